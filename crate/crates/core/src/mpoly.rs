//! Sparse multivariate polynomials over [`Coeff`] with exact gcd and resultants.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::coeff::{common_field, CPoly, Coeff, Embedding, NumberField};
use crate::field::Field;
use crate::linalg::{bareiss_det, ExactRing};
use crate::poly1::Poly1;

pub type Monomial = Vec<u32>;

/// Terms keyed by exponent vectors; lexicographic order with variable 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct MPoly {
    pub n: usize,
    pub terms: BTreeMap<Monomial, Coeff>,
}

impl MPoly {
    pub fn zero(n: usize) -> Self {
        MPoly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Coeff) -> Self {
        let mut p = Self::zero(n);
        if !c.is_zero() {
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Coeff::one())
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut m = vec![0; n];
        m[i] = 1;
        Self::monomial(n, m, Coeff::one())
    }

    pub fn monomial(n: usize, m: Monomial, c: Coeff) -> Self {
        let mut p = Self::zero(n);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(n: usize, it: impl IntoIterator<Item = (Monomial, Coeff)>) -> Self {
        let mut p = Self::zero(n);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(s) => {
                *s = s.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    pub fn constant_term(&self) -> Coeff {
        self.terms.get(&vec![0; self.n]).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn field(&self) -> Option<Arc<NumberField>> {
        common_field(self.terms.values())
    }

    pub fn deg_in(&self, i: usize) -> i64 {
        self.terms.keys().map(|m| m[i] as i64).max().unwrap_or(-1)
    }

    pub fn min_deg_in(&self, i: usize) -> i64 {
        self.terms.keys().map(|m| m[i] as i64).min().unwrap_or(-1)
    }

    pub fn total_degree(&self) -> i64 {
        self.terms.keys().map(|m| m.iter().sum::<u32>() as i64).max().unwrap_or(-1)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m[i] > 0)
    }

    pub fn vars_used(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.uses_var(i)).collect()
    }

    pub fn lead(&self) -> Option<(&Monomial, &Coeff)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.neg());
        }
        r
    }

    pub fn neg(&self) -> Self {
        MPoly { n: self.n, terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                r.add_term(m, ca.mul(cb));
            }
        }
        r
    }

    pub fn mul_term(&self, m: &Monomial, c: &Coeff) -> Self {
        MPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(ma, ca)| (ma.iter().zip(m).map(|(a, b)| a + b).collect(), ca.mul(c)))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        MPoly { n: self.n, terms: self.terms.iter().map(|(m, a)| (m.clone(), a.mul(c))).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.n);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn deriv(&self, i: usize) -> Self {
        let mut r = Self::zero(self.n);
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[i] -= 1;
            r.add_term(m2, c.mul(&Coeff::int(m[i] as i64)));
        }
        r
    }

    /// Coefficients with respect to variable `i`, low to high; each has no `i`.
    pub fn coeffs_in(&self, i: usize) -> Vec<MPoly> {
        let d = self.deg_in(i);
        if d < 0 {
            return vec![];
        }
        let mut out = vec![Self::zero(self.n); d as usize + 1];
        for (m, c) in &self.terms {
            let k = m[i] as usize;
            let mut m2 = m.clone();
            m2[i] = 0;
            out[k].terms.insert(m2, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(n: usize, i: usize, cs: &[MPoly]) -> Self {
        let mut r = Self::zero(n);
        for (k, c) in cs.iter().enumerate() {
            for (m, a) in &c.terms {
                let mut m2 = m.clone();
                m2[i] += k as u32;
                r.add_term(m2, a.clone());
            }
        }
        r
    }

    /// Substitutes variable `i` by `g`.
    pub fn subst(&self, i: usize, g: &MPoly) -> Self {
        let cs = self.coeffs_in(i);
        let mut acc = Self::zero(self.n);
        for c in cs.iter().rev() {
            acc = acc.mul(g).add(c);
        }
        acc
    }

    pub fn eval_var(&self, i: usize, a: &Coeff) -> Self {
        self.subst(i, &Self::constant(self.n, a.clone()))
    }

    /// Reorders variables: variable j of the result is variable `perm[j]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        MPoly {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (perm.iter().map(|&p| m[p]).collect(), c.clone())).collect(),
        }
    }

    /// Univariate view in variable `i`; panics unless `i` is the only variable used.
    pub fn to_univariate(&self, i: usize) -> CPoly {
        let mut c = vec![Coeff::zero(); (self.deg_in(i).max(0) + 1) as usize];
        for (m, a) in &self.terms {
            assert!(m.iter().enumerate().all(|(j, &e)| j == i || e == 0), "not univariate in var {i}");
            c[m[i] as usize] = a.clone();
        }
        Poly1::new(c)
    }

    pub fn from_univariate(n: usize, i: usize, p: &CPoly) -> Self {
        let mut r = Self::zero(n);
        for (k, a) in p.c.iter().enumerate() {
            let mut m = vec![0; n];
            m[i] = k as u32;
            r.add_term(m, a.clone());
        }
        r
    }

    pub fn embed(&self, e: &Embedding) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(m, c)| (m.clone(), c.embed(e))))
    }

    /// Scales so that the leading coefficient is one.
    pub fn normalize(&self) -> Self {
        match self.lead() {
            None => self.clone(),
            Some((_, c)) => {
                let ci = c.inv();
                self.scale(&ci)
            }
        }
    }

    /// Exact quotient, or `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &MPoly) -> Option<MPoly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        let (dm, dc) = d.lead().map(|(m, c)| (m.clone(), c.clone()))?;
        let dci = dc.inv();
        let mut r = self.clone();
        let mut q = Self::zero(self.n);
        while let Some((rm, rc)) = r.lead().map(|(m, c)| (m.clone(), c.clone())) {
            if rm.iter().zip(&dm).any(|(a, b)| a < b) {
                return None;
            }
            let m: Monomial = rm.iter().zip(&dm).map(|(a, b)| a - b).collect();
            let c = rc.mul(&dci);
            r = r.sub(&d.mul_term(&m, &c));
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Pseudo-remainder with respect to variable `i`.
    pub fn prem(&self, b: &MPoly, i: usize) -> MPoly {
        let db = b.deg_in(i);
        assert!(db >= 0);
        let bc = b.coeffs_in(i);
        let lb = bc[db as usize].clone();
        let tail = Self::from_coeffs_in(self.n, i, &bc[..db as usize]);
        let mut r = self.clone();
        loop {
            let dr = r.deg_in(i);
            if dr < db {
                return r;
            }
            let rc = r.coeffs_in(i);
            let lr = rc[dr as usize].clone();
            let rest = Self::from_coeffs_in(self.n, i, &rc[..dr as usize]);
            let mut sh = vec![0; self.n];
            sh[i] = (dr - db) as u32;
            // r ← lb·(r − lr·x^dr) − lr·x^(dr−db)·(b − lb·x^db)
            r = rest.mul(&lb).sub(&tail.mul(&lr).mul_term(&sh, &Coeff::one()));
        }
    }

    /// Gcd of the coefficients with respect to variable `i`.
    pub fn content_in(&self, i: usize) -> MPoly {
        let mut g = Self::zero(self.n);
        for c in self.coeffs_in(i) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_constant() {
                return Self::one(self.n);
            }
        }
        g
    }

    pub fn primitive_part_in(&self, i: usize) -> MPoly {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content_in(i);
        self.exact_div(&c).expect("content divides")
    }

    /// Radical with respect to the variables in `vars`: factors not involving them are dropped.
    pub fn squarefree_in(&self, vars: &[usize]) -> MPoly {
        let mut g = self.clone();
        for &v in vars {
            g = gcd(&g, &self.deriv(v));
        }
        let mut r = self.exact_div(&g).expect("gcd divides");
        // strip factors free of `vars`
        let keep: Vec<usize> = (0..self.n).filter(|j| vars.contains(j)).collect();
        if !keep.is_empty() {
            let mut c = r.clone();
            for &v in &keep {
                c = c.content_in(v);
                if c.is_constant() {
                    break;
                }
            }
            if !c.is_constant() {
                r = r.exact_div(&c).expect("content divides");
            }
        }
        r.normalize()
    }

    /// Res_i(self, o).
    pub fn resultant(&self, o: &MPoly, i: usize) -> MPoly {
        let a = self.coeffs_in(i);
        let b = o.coeffs_in(i);
        if a.is_empty() || b.is_empty() {
            return Self::zero(self.n);
        }
        let m = a.len() - 1;
        let k = b.len() - 1;
        if m == 0 {
            return a[0].pow(k as u32);
        }
        if k == 0 {
            return b[0].pow(m as u32);
        }
        let size = m + k;
        let mut rows = vec![];
        for r in 0..k {
            let mut row = vec![Self::zero(self.n); size];
            for (j, c) in a.iter().rev().enumerate() {
                row[r + j] = c.clone();
            }
            rows.push(row);
        }
        for r in 0..m {
            let mut row = vec![Self::zero(self.n); size];
            for (j, c) in b.iter().rev().enumerate() {
                row[r + j] = c.clone();
            }
            rows.push(row);
        }
        bareiss_det(rows)
    }

    pub fn fmt_with(&self, names: &[&str]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (m, c) in self.terms.iter().rev() {
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| if e == 1 { names[j].to_string() } else { format!("{}^{}", names[j], e) })
                .collect();
            let (neg, mag) = if c.is_atomic() && c.looks_negative() { (true, c.neg()) } else { (false, c.clone()) };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let cs = if mag.is_atomic() { mag.to_string() } else { format!("({mag})") };
            if mono.is_empty() {
                out.push_str(&cs);
            } else if mag.is_one() {
                out.push_str(&mono.join("*"));
            } else {
                out.push_str(&format!("{cs}*{}", mono.join("*")));
            }
        }
        out
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.n).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        write!(f, "{}", self.fmt_with(&refs))
    }
}

/// Sylvester-matrix arithmetic needs a zero of the right arity; the first operand fixes it.
impl ExactRing for MPoly {
    fn zero() -> Self {
        MPoly::zero(0)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn mul(&self, o: &Self) -> Self {
        if self.terms.is_empty() || o.terms.is_empty() {
            return MPoly::zero(self.n.max(o.n));
        }
        MPoly::mul(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        let n = self.n.max(o.n);
        let a = if self.n < n { MPoly::zero(n) } else { self.clone() };
        let b = if o.n < n { MPoly::zero(n) } else { o.clone() };
        MPoly::sub(&a, &b)
    }
    fn neg(&self) -> Self {
        MPoly::neg(self)
    }
    fn exact_div(&self, o: &Self) -> Self {
        if self.terms.is_empty() {
            return self.clone();
        }
        MPoly::exact_div(self, o).expect("Bareiss division is exact")
    }
}

/// Normalized gcd (leading coefficient one).
pub fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() {
        return b.normalize();
    }
    if b.is_zero() {
        return a.normalize();
    }
    let n = a.n;
    let i = match (0..n).rev().find(|&j| a.uses_var(j) || b.uses_var(j)) {
        None => return MPoly::one(n),
        Some(j) => j,
    };
    if !a.uses_var(i) {
        return gcd(a, &b.content_in(i));
    }
    if !b.uses_var(i) {
        return gcd(&a.content_in(i), b);
    }
    let ca = a.content_in(i);
    let cb = b.content_in(i);
    let c = gcd(&ca, &cb);
    let mut p = a.exact_div(&ca).unwrap();
    let mut q = b.exact_div(&cb).unwrap();
    if p.deg_in(i) < q.deg_in(i) {
        std::mem::swap(&mut p, &mut q);
    }
    while !q.is_zero() {
        let r = p.prem(&q, i);
        p = q;
        q = if r.is_zero() { r } else { r.primitive_part_in(i) };
        if !q.is_zero() && q.deg_in(i) == 0 {
            p = MPoly::one(n);
            break;
        }
    }
    let g = if p.deg_in(i) <= 0 { MPoly::one(n) } else { p.primitive_part_in(i) };
    c.mul(&g).normalize()
}
