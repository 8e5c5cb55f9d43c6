//! Polynomials in n variables with Puiseux-series coefficients, and their translation to
//! exact polynomials over the coefficient field in an extra variable s = t^(1/e).

use std::collections::BTreeMap;

use crate::coeff::{Coeff, Embedding};
use crate::field::Field;
use crate::gamma::{common_denom, Exp, Gamma};
use crate::mpoly::{MPoly, Monomial};
use crate::point::Point;
use crate::series::PuiseuxSeries;

#[derive(Clone, Debug, PartialEq)]
pub struct SPoly {
    pub n: usize,
    pub terms: BTreeMap<Monomial, PuiseuxSeries>,
}

/// An exact polynomial in the variables plus s (last), with t = s^e, up to the unit t^shift.
#[derive(Clone, Debug)]
pub struct SForm {
    pub poly: MPoly,
    pub e: i64,
    pub shift: Exp,
}

impl SPoly {
    pub fn zero(n: usize) -> Self {
        SPoly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: PuiseuxSeries) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, PuiseuxSeries::one())
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut m = vec![0; n];
        m[i] = 1;
        let mut p = Self::zero(n);
        p.terms.insert(m, PuiseuxSeries::one());
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: PuiseuxSeries) {
        if c.is_exact_zero() {
            return;
        }
        let v = match self.terms.remove(&m) {
            Some(s) => s.add(&c),
            None => c,
        };
        if !v.is_exact_zero() {
            self.terms.insert(m, v);
        }
    }

    pub fn from_mpoly(p: &MPoly) -> Self {
        let mut r = Self::zero(p.n);
        for (m, c) in &p.terms {
            r.add_term(m.clone(), PuiseuxSeries::constant(c.clone()));
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_in(&self, i: usize) -> i64 {
        self.terms.keys().map(|m| m[i] as i64).max().unwrap_or(-1)
    }

    pub fn total_degree(&self) -> i64 {
        self.terms.keys().map(|m| m.iter().sum::<u32>() as i64).max().unwrap_or(-1)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m[i] > 0)
    }

    /// True when no coefficient involves a positive or negative power of t.
    pub fn is_t_free(&self) -> bool {
        self.terms.values().all(|c| c.terms().all(|(e, _)| *e == Exp::from_integer(0)))
    }

    pub fn coeff(&self, m: &Monomial) -> PuiseuxSeries {
        self.terms.get(m).cloned().unwrap_or_else(PuiseuxSeries::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        SPoly { n: self.n, terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                r.add_term(ma.iter().zip(mb).map(|(a, b)| a + b).collect(), ca.mul(cb));
            }
        }
        r
    }

    pub fn scale(&self, c: &PuiseuxSeries) -> Self {
        let mut r = Self::zero(self.n);
        for (m, a) in &self.terms {
            r.add_term(m.clone(), a.mul(c));
        }
        r
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
            r.add_term(m2, c.scale(&Coeff::int(m[i] as i64)));
        }
        r
    }

    pub fn coeffs_in(&self, i: usize) -> Vec<SPoly> {
        let d = self.deg_in(i);
        if d < 0 {
            return vec![];
        }
        let mut out = vec![Self::zero(self.n); d as usize + 1];
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            m2[i] = 0;
            out[m[i] as usize].terms.insert(m2, c.clone());
        }
        out
    }

    pub fn subst(&self, i: usize, g: &SPoly) -> Self {
        let mut acc = Self::zero(self.n);
        for c in self.coeffs_in(i).iter().rev() {
            acc = acc.mul(g).add(c);
        }
        acc
    }

    pub fn eval_var(&self, i: usize, a: &PuiseuxSeries) -> Self {
        self.subst(i, &Self::constant(self.n, a.clone()))
    }

    /// Value at a point of Kⁿ.
    pub fn eval(&self, p: &Point) -> PuiseuxSeries {
        let mut acc = PuiseuxSeries::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (j, &e) in m.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&p.coords[j].pow(e));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// f(a + t^λ·X).
    pub fn recenter(&self, a: &Point, lambda: Exp) -> SPoly {
        let mut r = self.clone();
        let tl = PuiseuxSeries::t_pow(lambda);
        for i in 0..self.n {
            let mut g = Self::var(self.n, i).scale(&tl);
            g.add_term(vec![0; self.n], a.coords[i].clone());
            r = r.subst(i, &g);
        }
        r
    }

    /// Minimal valuation of the coefficients (lower bound when some are truncated).
    pub fn min_valuation(&self) -> Gamma {
        self.terms.values().map(|c| c.valuation_lb()).fold(Gamma::Inf, Gamma::min)
    }

    /// Residue of t^(−m)·f where m is the minimal coefficient valuation.
    pub fn residue(&self) -> (Exp, MPoly) {
        let m = self.min_valuation().fin().unwrap_or_else(|| Exp::from_integer(0));
        let mut r = MPoly::zero(self.n);
        for (mono, c) in &self.terms {
            let a = c.coeff(&m);
            if !a.is_zero() {
                r.terms.insert(mono.clone(), a);
            }
        }
        (m, r)
    }

    /// Lowest coefficients valuation for each monomial as (monomial, valuation, leading coefficient).
    pub fn valuation_data(&self) -> Vec<(Monomial, Exp, Coeff)> {
        self.terms
            .iter()
            .filter_map(|(m, c)| c.leading().map(|(e, a)| (m.clone(), e, a)))
            .collect()
    }

    pub fn ramification(&self) -> i64 {
        let exps: Vec<Exp> = self.terms.values().flat_map(|c| c.terms().map(|(e, _)| *e).collect::<Vec<_>>()).collect();
        common_denom(exps.iter())
    }

    /// Exact form over k[vars, s]; coefficients are taken as exact finite sums.
    pub fn to_sform(&self) -> SForm {
        let e = self.ramification();
        let shift = self
            .terms
            .values()
            .filter_map(|c| c.min_exponent())
            .min()
            .unwrap_or_else(|| Exp::from_integer(0));
        let n = self.n + 1;
        let mut poly = MPoly::zero(n);
        for (m, c) in &self.terms {
            for (x, a) in c.terms() {
                let k = (x - shift) * Exp::from_integer(e);
                debug_assert!(k.is_integer());
                let mut mono = m.clone();
                mono.push(k.to_integer() as u32);
                poly.terms.insert(mono, a.clone());
            }
        }
        SForm { poly, e, shift }
    }

    pub fn from_sform(p: &MPoly, e: i64) -> SPoly {
        let n = p.n - 1;
        let mut r = Self::zero(n);
        for (m, c) in &p.terms {
            let k = m[n] as i64;
            r.add_term(m[..n].to_vec(), PuiseuxSeries::monomial(c.clone(), Exp::new(k, e)));
        }
        r
    }

    /// Univariate coefficient list in variable `i`; other variables must be absent.
    pub fn univariate(&self, i: usize) -> Vec<PuiseuxSeries> {
        let d = self.deg_in(i).max(-1);
        let mut out = vec![PuiseuxSeries::zero(); (d + 1) as usize];
        for (m, c) in &self.terms {
            assert!(m.iter().enumerate().all(|(j, &e)| j == i || e == 0), "not univariate");
            out[m[i] as usize] = c.clone();
        }
        out
    }

    pub fn permute(&self, perm: &[usize]) -> Self {
        SPoly {
            n: perm.len(),
            terms: self.terms.iter().map(|(m, c)| (perm.iter().map(|&p| m[p]).collect(), c.clone())).collect(),
        }
    }

    /// Drops variables `from..` (which must be absent) or appends unused ones.
    pub fn with_arity(&self, n: usize) -> Self {
        SPoly {
            n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = m.clone();
                    m2.resize(n, 0);
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    pub fn embed(&self, e: &Embedding) -> Self {
        let mut r = Self::zero(self.n);
        for (m, c) in &self.terms {
            r.add_term(m.clone(), c.embed(e));
        }
        r
    }

    pub fn fmt_with(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
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
            let single = c.num_terms() == 1 && c.is_exact();
            let (neg, mag) = match c.leading() {
                Some((_, a)) if single && a.is_atomic() && a.looks_negative() => (true, c.neg()),
                _ => (false, c.clone()),
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let cs = mag.to_string();
            let is_one = single && mag == PuiseuxSeries::one();
            if mono.is_empty() {
                out.push_str(&if single { cs } else { format!("({cs})") });
            } else if is_one {
                out.push_str(&mono.join("*"));
            } else if single {
                out.push_str(&format!("{cs}*{}", mono.join("*")));
            } else {
                out.push_str(&format!("({cs})*{}", mono.join("*")));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sform_roundtrip_and_recenter() {
        // x*y - t^(1/2)
        let mut f = SPoly::var(2, 0).mul(&SPoly::var(2, 1));
        f.add_term(vec![0, 0], PuiseuxSeries::t_pow(Exp::new(1, 2)).neg());
        let s = f.to_sform();
        assert_eq!(s.e, 2);
        assert_eq!(SPoly::from_sform(&s.poly, s.e), f);
        // f(t^(1/4)(X,Y)) = t^(1/2)(XY - 1)
        let g = f.recenter(&Point::origin(2), Exp::new(1, 4));
        let (m, r) = g.residue();
        assert_eq!(m, Exp::new(1, 2));
        assert_eq!(r.fmt_with(&["X", "Y"]), "X*Y - 1");
        assert_eq!(f.fmt_with(&["x", "y"]), "x*y - t^(1/2)");
    }
}
