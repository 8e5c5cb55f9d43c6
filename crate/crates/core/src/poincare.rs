//! Poincaré series by counting closed balls that meet an algebraic set, over ℤ_p and 𝔽_q[[t]].
//!
//! A residue class a + π^k·Oⁿ meets Z when the rescaled system h(X) = f(a + π^k X)/π^c has a
//! smooth common zero modulo π (Hensel), and misses Z when it has no zero modulo π at all.
//! Classes with only singular residue zeros are refined one digit further, up to a cap.
//! The naive oracle enumerates residues flat and certifies with the classical one-variable
//! Hensel bound instead.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ball::{Ball, BallKind};
use crate::coeff::{Coeff, DEFAULT_EXT_BOUND};
use crate::curve::{singular_locus, CurvePoly};
use crate::error::{Result, RisoError};
use crate::mpoly::Monomial;
use crate::point::Point;
use crate::series::PuiseuxSeries;
use crate::spoly::SPoly;
use crate::tree::SCHEMA;

pub const DEFAULT_LMAX: u32 = 5;
pub const DEFAULT_SLACK: u32 = 3;
pub const MAX_BASE: u64 = 11;
pub const MAX_LMAX: u32 = 12;
pub const HELD_OUT_Q: u64 = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    /// ℤ_p, with t read as p.
    Zp(u64),
    /// 𝔽_q[[t]] for a prime q.
    Fq(u64),
}

impl Base {
    pub fn size(&self) -> u64 {
        match self {
            Base::Zp(p) | Base::Fq(p) => *p,
        }
    }

    /// Accepts `p=3`, `Zp,p=3`, `q=5`, `Fq[[t]],q=2,3,5,7`.
    pub fn parse_list(src: &str) -> Result<Vec<Base>> {
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        let (ring, rest) = match s.split_once(',') {
            Some((h, r)) if h.eq_ignore_ascii_case("zp") || h.to_ascii_lowercase().starts_with("fq") => (Some(h.to_string()), r.to_string()),
            _ => (None, s.clone()),
        };
        let (key, vals) = rest
            .split_once('=')
            .ok_or_else(|| RisoError::InvalidInput(format!("base `{src}` should look like p=3 or Fq[[t]],q=2,3")))?;
        let fq = match (key, ring.as_deref()) {
            ("p", None) => false,
            ("q", None) => true,
            ("p", Some(r)) | ("q", Some(r)) => !r.eq_ignore_ascii_case("zp"),
            _ => return Err(RisoError::InvalidInput(format!("unknown base parameter `{key}`"))),
        };
        let mut out = vec![];
        for v in vals.split(',') {
            let n: u64 = v.parse().map_err(|_| RisoError::InvalidInput(format!("`{v}` is not a base size")))?;
            out.push(if fq { Base::Fq(n) } else { Base::Zp(n) });
        }
        for b in &out {
            b.check()?;
        }
        Ok(out)
    }

    pub fn check(&self) -> Result<()> {
        let n = self.size();
        if n < 2 {
            return Err(RisoError::UnsupportedBase(format!("{n} is not a prime")));
        }
        if n > MAX_BASE {
            return Err(RisoError::UnsupportedBase(format!("{n} exceeds the cap {MAX_BASE}")));
        }
        if !is_prime(n) {
            return Err(match self {
                Base::Fq(_) if is_prime_power(n) => {
                    RisoError::UnsupportedBase(format!("q = {n} is a prime power; only prime q are supported"))
                }
                _ => RisoError::UnsupportedBase(format!("{n} is not a prime")),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Zp(p) => write!(f, "Z_{p}"),
            Base::Fq(q) => write!(f, "F_{q}[[t]]"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn is_prime_power(n: u64) -> bool {
    (2..=n).find(|d| n % d == 0).is_some_and(|p| {
        let mut m = n;
        while m % p == 0 {
            m /= p;
        }
        m == 1
    })
}

#[derive(Clone, Debug)]
pub struct PoincareOptions {
    pub lmax: u32,
    pub slack: u32,
}

impl Default for PoincareOptions {
    fn default() -> Self {
        PoincareOptions { lmax: DEFAULT_LMAX, slack: DEFAULT_SLACK }
    }
}

// ---------------------------------------------------------------------------------------
// Discrete valuation rings with exact elements.

trait Dvr: Sync + Send {
    type E: Clone + Send + Sync + PartialEq + fmt::Debug;
    fn p(&self) -> u64;
    fn zero(&self) -> Self::E;
    fn int(&self, n: &BigInt) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn val(&self, a: &Self::E) -> Option<u32>;
    /// Exact division by π^k.
    fn div_pi(&self, a: &Self::E, k: u32) -> Self::E;
    fn pi_pow(&self, k: u32) -> Self::E;
    fn residue(&self, a: &Self::E) -> u64;
    fn digit(&self, d: u64) -> Self::E {
        self.int(&BigInt::from(d))
    }
    fn is_zero(&self, a: &Self::E) -> bool {
        self.val(a).is_none()
    }
}

struct Zp {
    p: u64,
    pb: BigInt,
}

impl Dvr for Zp {
    type E = BigInt;
    fn p(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn int(&self, n: &BigInt) -> BigInt {
        n.clone()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn val(&self, a: &BigInt) -> Option<u32> {
        if a.is_zero() {
            return None;
        }
        let mut v = 0;
        let mut m = a.clone();
        while (&m % &self.pb).is_zero() {
            m /= &self.pb;
            v += 1;
        }
        Some(v)
    }
    fn div_pi(&self, a: &BigInt, k: u32) -> BigInt {
        a / self.pb.pow(k)
    }
    fn pi_pow(&self, k: u32) -> BigInt {
        self.pb.pow(k)
    }
    fn residue(&self, a: &BigInt) -> u64 {
        a.mod_floor(&self.pb).to_u64().unwrap()
    }
}

/// 𝔽_q[t] as dense coefficient vectors, lowest degree first, without trailing zeros.
struct FqT {
    q: u64,
}

impl FqT {
    fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }
}

impl Dvr for FqT {
    type E = Vec<u64>;
    fn p(&self) -> u64 {
        self.q
    }
    fn zero(&self) -> Vec<u64> {
        vec![]
    }
    fn int(&self, n: &BigInt) -> Vec<u64> {
        FqT::trim(vec![n.mod_floor(&BigInt::from(self.q)).to_u64().unwrap()])
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let n = a.len().max(b.len());
        FqT::trim((0..n).map(|i| (a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)) % self.q).collect())
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let n = a.len().max(b.len());
        FqT::trim((0..n).map(|i| (a.get(i).unwrap_or(&0) + self.q - b.get(i).unwrap_or(&0)) % self.q).collect())
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % self.q;
            }
        }
        FqT::trim(out)
    }
    fn val(&self, a: &Vec<u64>) -> Option<u32> {
        a.iter().position(|c| *c != 0).map(|i| i as u32)
    }
    fn div_pi(&self, a: &Vec<u64>, k: u32) -> Vec<u64> {
        a.iter().skip(k as usize).copied().collect()
    }
    fn pi_pow(&self, k: u32) -> Vec<u64> {
        let mut v = vec![0; k as usize];
        v.push(1);
        v
    }
    fn residue(&self, a: &Vec<u64>) -> u64 {
        a.first().copied().unwrap_or(0)
    }
}

// ---------------------------------------------------------------------------------------
// Polynomials over ℚ with an extra variable for t, used to prepare the input.

#[derive(Clone, Debug, Default)]
struct QtPoly {
    n: usize,
    terms: BTreeMap<(Monomial, i64), BigRational>,
}

impl QtPoly {
    fn constant(n: usize, c: BigRational, te: i64) -> Self {
        let mut p = QtPoly { n, terms: BTreeMap::new() };
        if !c.is_zero() {
            p.terms.insert((vec![0; n], te), c);
        }
        p
    }

    fn var(n: usize, i: usize) -> Self {
        let mut m = vec![0; n];
        m[i] = 1;
        let mut p = QtPoly { n, terms: BTreeMap::new() };
        p.terms.insert((m, 0), BigRational::one());
        p
    }

    fn add_term(&mut self, k: (Monomial, i64), c: BigRational) {
        let e = self.terms.entry(k.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    fn add(&self, o: &QtPoly) -> QtPoly {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c.clone());
        }
        r
    }

    fn mul(&self, o: &QtPoly) -> QtPoly {
        let mut r = QtPoly { n: self.n, terms: BTreeMap::new() };
        for ((m1, e1), c1) in &self.terms {
            for ((m2, e2), c2) in &o.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                r.add_term((m, e1 + e2), c1 * c2);
            }
        }
        r
    }

    fn pow(&self, e: u32) -> QtPoly {
        let mut r = QtPoly::constant(self.n, BigRational::one(), 0);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Substitutes x_i ↦ g_i for all i.
    fn compose(&self, gs: &[QtPoly]) -> QtPoly {
        let n = gs[0].n;
        let mut r = QtPoly { n, terms: BTreeMap::new() };
        for ((m, te), c) in &self.terms {
            let mut t = QtPoly::constant(n, c.clone(), *te);
            for (i, e) in m.iter().enumerate() {
                if *e > 0 {
                    t = t.mul(&gs[i].pow(*e));
                }
            }
            r = r.add(&t);
        }
        r
    }

    fn from_series(n: usize, s: &PuiseuxSeries) -> Result<QtPoly> {
        if !s.is_exact() {
            return Err(RisoError::InvalidInput(format!("{s} is not an exact series")));
        }
        let mut p = QtPoly { n, terms: BTreeMap::new() };
        for (e, c) in s.terms() {
            if !e.is_integer() {
                return Err(RisoError::UnsupportedBase(format!("fractional power t^{e} has no meaning in a discrete base")));
            }
            let q = rational_of(c)?;
            p.add_term((vec![0; n], e.to_integer()), q);
        }
        Ok(p)
    }

    fn from_spoly(f: &SPoly) -> Result<QtPoly> {
        let mut p = QtPoly { n: f.n, terms: BTreeMap::new() };
        for (m, s) in &f.terms {
            let c = QtPoly::from_series(f.n, s)?;
            for ((_, te), q) in c.terms {
                p.add_term((m.clone(), te), q);
            }
        }
        Ok(p)
    }

    /// Substitutes t = p.
    fn at_p(&self, p: u64) -> QtPoly {
        let mut r = QtPoly { n: self.n, terms: BTreeMap::new() };
        let pq = BigRational::from_integer(BigInt::from(p));
        for ((m, te), c) in &self.terms {
            r.add_term((m.clone(), 0), c * pow_signed(&pq, *te));
        }
        r
    }
}

fn pow_signed(q: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num::pow(q.clone(), e as usize)
    } else {
        num::pow(q.recip(), (-e) as usize)
    }
}

fn rational_of(c: &Coeff) -> Result<BigRational> {
    c.as_rational()
        .cloned()
        .ok_or_else(|| RisoError::UnsupportedBase(format!("coefficient {c} is not rational")))
}

/// Integer polynomial in x (and t) representing the same zero set over the base.
fn clear_denominators(f: &QtPoly, base: Base) -> Result<BTreeMap<(Monomial, i64), BigInt>> {
    let mut l = BigInt::one();
    for c in f.terms.values() {
        if let Base::Fq(q) = base {
            if (c.denom() % BigInt::from(q)).is_zero() {
                return Err(RisoError::UnsupportedBase(format!("coefficient {c} is not defined in characteristic {q}")));
            }
        }
        l = l.lcm(c.denom());
    }
    let tmin = f.terms.keys().map(|(_, e)| *e).min().unwrap_or(0);
    let mut g = BigInt::zero();
    let mut out = BTreeMap::new();
    for ((m, e), c) in &f.terms {
        let v = (c * BigRational::from_integer(l.clone())).to_integer();
        g = g.gcd(&v);
        out.insert((m.clone(), e - tmin), v);
    }
    if !g.is_zero() && !g.is_one() {
        if let Base::Fq(q) = base {
            // keep residues modulo q nonzero
            let qb = BigInt::from(q);
            while (&g % &qb).is_zero() {
                g /= &qb;
            }
        }
        for v in out.values_mut() {
            *v = &*v / &g;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------------------
// Polynomials over a Dvr.

#[derive(Clone, Debug)]
struct RPoly<E> {
    n: usize,
    terms: Vec<(Monomial, E)>,
}

fn rpoly_from<D: Dvr>(d: &D, base: Base, f: &QtPoly) -> Result<RPoly<D::E>> {
    let ints = clear_denominators(f, base)?;
    let mut acc: BTreeMap<Monomial, D::E> = BTreeMap::new();
    for ((m, e), v) in ints {
        let c = d.mul(&d.int(&v), &d.pi_pow(e as u32));
        let slot = acc.entry(m).or_insert_with(|| d.zero());
        *slot = d.add(slot, &c);
    }
    Ok(RPoly { n: f.n, terms: acc.into_iter().filter(|(_, c)| !d.is_zero(c)).collect() })
}

fn eval<D: Dvr>(d: &D, f: &RPoly<D::E>, a: &[D::E]) -> D::E {
    let mut acc = d.zero();
    for (m, c) in &f.terms {
        let mut t = c.clone();
        for (i, e) in m.iter().enumerate() {
            for _ in 0..*e {
                t = d.mul(&t, &a[i]);
            }
        }
        acc = d.add(&acc, &t);
    }
    acc
}

fn deriv<D: Dvr>(d: &D, f: &RPoly<D::E>, i: usize) -> RPoly<D::E> {
    let terms = f
        .terms
        .iter()
        .filter(|(m, _)| m[i] > 0)
        .map(|(m, c)| {
            let mut m2 = m.clone();
            m2[i] -= 1;
            (m2, d.mul(c, &d.int(&BigInt::from(m[i]))))
        })
        .filter(|(_, c)| !d.is_zero(c))
        .collect();
    RPoly { n: f.n, terms }
}

fn binom(n: u32, k: u32) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// f(a + π^k X) divided by its content, as a residue polynomial modulo π.
fn residue_at<D: Dvr>(d: &D, f: &RPoly<D::E>, a: &[D::E], k: u32) -> Vec<(Monomial, u64)> {
    let mut acc: BTreeMap<Monomial, D::E> = BTreeMap::new();
    let pk = d.pi_pow(k);
    for (m, c) in &f.terms {
        let mut partial: Vec<(Monomial, D::E)> = vec![(vec![0; f.n], c.clone())];
        for (i, e) in m.iter().enumerate() {
            if *e == 0 {
                continue;
            }
            let mut next = vec![];
            for (pm, pc) in &partial {
                let mut apow = vec![d.int(&BigInt::one())];
                for _ in 0..*e {
                    let last = apow.last().unwrap().clone();
                    apow.push(d.mul(&last, &a[i]));
                }
                let mut pkj = d.int(&BigInt::one());
                for j in 0..=*e {
                    let coef = d.mul(&d.mul(&d.int(&binom(*e, j)), &apow[(*e - j) as usize]), &pkj);
                    if !d.is_zero(&coef) {
                        let mut nm = pm.clone();
                        nm[i] += j;
                        next.push((nm, d.mul(pc, &coef)));
                    }
                    pkj = d.mul(&pkj, &pk);
                }
            }
            partial = next;
        }
        for (m2, c2) in partial {
            let slot = acc.entry(m2).or_insert_with(|| d.zero());
            *slot = d.add(slot, &c2);
        }
    }
    let content = acc.values().filter_map(|c| d.val(c)).min();
    let Some(content) = content else { return vec![] };
    acc.into_iter()
        .filter(|(_, c)| d.val(c) == Some(content))
        .map(|(m, c)| (m, d.residue(&d.div_pi(&c, content))))
        .collect()
}

fn eval_mod(h: &[(Monomial, u64)], x: &[u64], p: u64) -> u64 {
    let mut acc = 0u64;
    for (m, c) in h {
        let mut t = *c % p;
        for (i, e) in m.iter().enumerate() {
            for _ in 0..*e {
                t = t * x[i] % p;
            }
        }
        acc = (acc + t) % p;
    }
    acc
}

fn deriv_mod(h: &[(Monomial, u64)], i: usize, p: u64) -> Vec<(Monomial, u64)> {
    h.iter()
        .filter(|(m, _)| m[i] > 0)
        .map(|(m, c)| {
            let mut m2 = m.clone();
            m2[i] -= 1;
            (m2, c * (m[i] as u64 % p) % p)
        })
        .filter(|(_, c)| *c != 0)
        .collect()
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let (mut b, mut e) = (a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn rank_mod(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else { continue };
        rows.swap(rank, piv);
        let inv = inv_mod(rows[rank][c], p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != 0 {
                let f = rows[r][c] * inv % p;
                for cc in 0..cols {
                    rows[r][cc] = (rows[r][cc] + p * p - f * rows[rank][cc] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn tuples(p: u64, n: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = (p as usize).pow(n as u32);
    (0..total).map(move |mut k| {
        let mut v = vec![0u64; n];
        for x in v.iter_mut() {
            *x = (k % p as usize) as u64;
            k /= p as usize;
        }
        v
    })
}

/// How a residue class was decided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftVerdict {
    /// A smooth residue zero lifts by Hensel's lemma.
    LiftsSmooth,
    /// The class contains an exactly known point of Z.
    LiftsByParam,
    /// No point of Z; certified at this depth.
    DeadAtDepth(u32),
    UndecidedAtCap,
}

impl LiftVerdict {
    fn meets(&self) -> bool {
        matches!(self, LiftVerdict::LiftsSmooth | LiftVerdict::LiftsByParam)
    }
}

struct Problem<D: Dvr> {
    d: D,
    polys: Vec<RPoly<D::E>>,
    grads: Vec<Vec<RPoly<D::E>>>,
    /// Known points of Z in the rescaled coordinates, reduced modulo π^cap.
    points: Vec<Vec<D::E>>,
    n: usize,
    /// Variables occurring in the system.
    active: Vec<usize>,
    cap: u32,
    /// Z = everything.
    full: bool,
    empty: bool,
}

impl<D: Dvr> Problem<D> {
    fn contains_known(&self, a: &[D::E], k: u32) -> bool {
        self.points.iter().any(|pt| {
            pt.iter().zip(a).all(|(x, y)| self.d.val(&self.d.sub(x, y)).map_or(true, |v| v >= k))
        }) || self.polys.iter().all(|f| self.d.is_zero(&eval(&self.d, f, a)))
    }

    fn child(&self, a: &[D::E], k: u32, digits: &[u64]) -> Vec<D::E> {
        let pk = self.d.pi_pow(k);
        a.iter().zip(digits).map(|(x, dg)| self.d.add(x, &self.d.mul(&self.d.digit(*dg), &pk))).collect()
    }

    /// Residue-polynomial decision with refinement on singular residue zeros.
    fn decide(&self, a: &[D::E], k: u32) -> LiftVerdict {
        if self.full {
            return LiftVerdict::LiftsByParam;
        }
        if self.empty {
            return LiftVerdict::DeadAtDepth(k);
        }
        if self.contains_known(a, k) {
            return LiftVerdict::LiftsByParam;
        }
        let p = self.d.p();
        let hs: Vec<Vec<(Monomial, u64)>> = self.polys.iter().map(|f| residue_at(&self.d, f, a, k)).collect();
        let grads: Vec<Vec<Vec<(Monomial, u64)>>> =
            hs.iter().map(|h| (0..self.n).map(|i| deriv_mod(h, i, p)).collect()).collect();
        let mut singular = vec![];
        for x in tuples(p, self.n) {
            if hs.iter().all(|h| eval_mod(h, &x, p) == 0) {
                let jac: Vec<Vec<u64>> = grads.iter().map(|g| g.iter().map(|gi| eval_mod(gi, &x, p)).collect()).collect();
                if rank_mod(jac, p) == hs.len() {
                    return LiftVerdict::LiftsSmooth;
                }
                singular.push(x);
            }
        }
        if singular.is_empty() {
            return LiftVerdict::DeadAtDepth(k);
        }
        if k >= self.cap {
            return LiftVerdict::UndecidedAtCap;
        }
        let mut undecided = false;
        let mut deepest = k;
        for x in singular {
            match self.decide(&self.child(a, k, &x), k + 1) {
                v if v.meets() => return v,
                LiftVerdict::UndecidedAtCap => undecided = true,
                LiftVerdict::DeadAtDepth(m) => deepest = deepest.max(m),
                _ => unreachable!(),
            }
        }
        if undecided {
            LiftVerdict::UndecidedAtCap
        } else {
            LiftVerdict::DeadAtDepth(deepest)
        }
    }

    /// Exhaustive refinement with the classical one-variable Hensel bound; `k0` is the depth
    /// of the class being decided.
    fn decide_naive(&self, a: &[D::E], j: u32, k0: u32) -> LiftVerdict {
        if self.full {
            return LiftVerdict::LiftsByParam;
        }
        if self.empty {
            return LiftVerdict::DeadAtDepth(j);
        }
        let vals: Vec<D::E> = self.polys.iter().map(|f| eval(&self.d, f, a)).collect();
        if vals.iter().all(|v| self.d.is_zero(v)) || self.contains_known(a, j) {
            return LiftVerdict::LiftsByParam;
        }
        if vals.iter().any(|v| self.d.val(v).is_some_and(|x| x < j)) {
            return LiftVerdict::DeadAtDepth(j);
        }
        if self.polys.len() == 1 {
            let vf = self.d.val(&vals[0]).unwrap();
            for g in &self.grads[0] {
                if let Some(vg) = self.d.val(&eval(&self.d, g, a)) {
                    if vf > 2 * vg && vf - vg >= k0 {
                        return LiftVerdict::LiftsSmooth;
                    }
                }
            }
        }
        if j >= self.cap {
            return LiftVerdict::UndecidedAtCap;
        }
        let mut undecided = false;
        for xs in tuples(self.d.p(), self.active.len()) {
            let mut x = vec![0; self.n];
            for (i, v) in self.active.iter().zip(xs) {
                x[*i] = v;
            }
            match self.decide_naive(&self.child(a, j, &x), j + 1, k0) {
                v if v.meets() => return v,
                LiftVerdict::UndecidedAtCap => undecided = true,
                _ => {}
            }
        }
        if undecided {
            LiftVerdict::UndecidedAtCap
        } else {
            LiftVerdict::DeadAtDepth(j)
        }
    }

    fn undecided(&self, a: &[D::E], k: u32) -> RisoError {
        RisoError::UndecidableAtCap(format!(
            "residue class {:?} at depth {k} is not decided by depth {}; raise the slack",
            a.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>(),
            self.cap
        ))
    }

    fn walk(&self, a: &[D::E], k: u32, kmax: u32, counts: &mut [u64]) -> Result<()> {
        match self.decide(a, k) {
            LiftVerdict::UndecidedAtCap => return Err(self.undecided(a, k)),
            v if v.meets() => {
                counts[k as usize] += 1;
                if k < kmax {
                    for x in tuples(self.d.p(), self.n) {
                        self.walk(&self.child(a, k, &x), k + 1, kmax, counts)?;
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn count(&self, kmax: u32) -> Result<Vec<u64>> {
        let root: Vec<D::E> = vec![self.d.zero(); self.n];
        let mut counts = vec![0u64; kmax as usize + 1];
        match self.decide(&root, 0) {
            LiftVerdict::UndecidedAtCap => return Err(self.undecided(&root, 0)),
            v if !v.meets() => return Ok(counts),
            _ => counts[0] = 1,
        }
        if kmax == 0 {
            return Ok(counts);
        }
        let parts: Vec<Vec<u64>> = tuples(self.d.p(), self.n)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|x| {
                let mut c = vec![0u64; kmax as usize + 1];
                self.walk(&self.child(&root, 0, x), 1, kmax, &mut c)?;
                Ok(c)
            })
            .collect::<Result<_>>()?;
        for c in parts {
            for (i, v) in c.iter().enumerate() {
                counts[i] += v;
            }
        }
        Ok(counts)
    }

    fn count_naive(&self, kmax: u32) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; kmax as usize + 1];
        for k in 0..=kmax {
            let mut layer: Vec<Vec<D::E>> = vec![vec![self.d.zero(); self.n]];
            for j in 0..k {
                layer = layer.iter().flat_map(|a| tuples(self.d.p(), self.n).map(move |x| (a.clone(), x))).map(|(a, x)| self.child(&a, j, &x)).collect();
            }
            for a in &layer {
                match self.decide_naive(a, k, k) {
                    LiftVerdict::UndecidedAtCap => return Err(self.undecided(a, k)),
                    v if v.meets() => counts[k as usize] += 1,
                    _ => {}
                }
            }
        }
        Ok(counts)
    }
}

// ---------------------------------------------------------------------------------------
// Preparation of the input.

struct Prepared {
    polys: Vec<QtPoly>,
    /// Known points of Z in the rescaled coordinates, as exact t-polynomials or rationals.
    points: Vec<Vec<QtPoly>>,
    n: usize,
    radius: u32,
}

fn ball_data(ball: Option<&Ball>, n: usize) -> Result<(Vec<QtPoly>, u32)> {
    let Some(b) = ball else { return Ok((vec![QtPoly { n, terms: BTreeMap::new() }; n], 0)) };
    if b.dim() != n {
        return Err(RisoError::InvalidInput(format!("ball of dimension {} for {n} variables", b.dim())));
    }
    if !b.radius.is_integer() || b.radius < num::zero() {
        return Err(RisoError::InvalidInput("counting needs a ball of nonnegative integer radius".into()));
    }
    let mut r = b.radius.to_integer() as u32;
    if b.kind == BallKind::Open {
        r += 1;
    }
    let center = b.center.coords.iter().map(|c| QtPoly::from_series(n, &c.as_exact())).collect::<Result<Vec<_>>>()?;
    Ok((center, r))
}

/// Rational singular points of a plane curve, as candidates for exactly known points.
fn known_points(f: &QtPoly) -> Vec<Vec<BigRational>> {
    if f.n != 2 || f.terms.keys().any(|(_, e)| *e != 0) {
        return vec![];
    }
    let mp = crate::mpoly::MPoly::from_terms(2, f.terms.iter().map(|((m, _), c)| (m.clone(), Coeff::q(c.clone()))));
    let Ok(c) = CurvePoly::new(SPoly::from_mpoly(&mp)) else { return vec![] };
    let c = c.squarefree_part().0;
    let Ok(pts) = singular_locus(&c, DEFAULT_EXT_BOUND) else { return vec![] };
    pts.iter()
        .filter_map(|p: &Point| {
            p.coords.iter().map(|s| if s.is_exact_zero() { Some(BigRational::zero()) } else { s.coeff(&num::zero()).as_rational().cloned() }).collect()
        })
        .collect()
}

fn prepare(polys: &[SPoly], base: Base, ball: Option<&Ball>) -> Result<Prepared> {
    base.check()?;
    let n = polys.first().map(|f| f.n).ok_or_else(|| RisoError::InvalidInput("no polynomials given".into()))?;
    if polys.iter().any(|f| f.n != n) {
        return Err(RisoError::InvalidInput("all polynomials need the same variables".into()));
    }
    let (center, r) = ball_data(ball, n)?;
    let mut out_polys = vec![];
    let mut points = vec![];
    for f in polys {
        let mut q = QtPoly::from_spoly(f)?;
        if let Base::Zp(p) = base {
            q = q.at_p(p);
        }
        if polys.len() == 1 {
            for pt in known_points(&q) {
                points.push(pt);
            }
        }
        out_polys.push(q);
    }
    let tr = QtPoly::constant(n, BigRational::one(), r as i64);
    let subs: Vec<QtPoly> = (0..n)
        .map(|i| {
            let mut c = center[i].clone();
            if let Base::Zp(p) = base {
                c = c.at_p(p);
            }
            let scaled = match base {
                Base::Zp(p) => QtPoly::var(n, i).mul(&QtPoly::constant(n, num::pow(BigRational::from_integer(BigInt::from(p)), r as usize), 0)),
                Base::Fq(_) => QtPoly::var(n, i).mul(&tr),
            };
            c.add(&scaled)
        })
        .collect();
    let moved: Vec<QtPoly> = out_polys.iter().map(|f| f.compose(&subs)).collect();
    // known points in the rescaled coordinates: u = (P − c)/π^r
    let mut rescaled = vec![];
    for pt in points {
        let mut u = vec![];
        for (i, x) in pt.iter().enumerate() {
            let diff = QtPoly::constant(n, x.clone(), 0).add(&scale_qt(&center_at(&center[i], base), -1));
            u.push(divide_pi(&diff, r, base));
        }
        if let Some(u) = u.into_iter().collect::<Option<Vec<_>>>() {
            rescaled.push(u);
        }
    }
    Ok(Prepared { polys: moved, points: rescaled, n, radius: r })
}

fn center_at(c: &QtPoly, base: Base) -> QtPoly {
    match base {
        Base::Zp(p) => c.at_p(p),
        Base::Fq(_) => c.clone(),
    }
}

fn scale_qt(c: &QtPoly, s: i64) -> QtPoly {
    QtPoly { n: c.n, terms: c.terms.iter().map(|(k, v)| (k.clone(), v * BigRational::from_integer(BigInt::from(s)))).collect() }
}

/// (P − c)/π^r when it is integral.
fn divide_pi(d: &QtPoly, r: u32, base: Base) -> Option<QtPoly> {
    match base {
        Base::Zp(p) => {
            let v: BigRational = d.terms.values().cloned().fold(BigRational::zero(), |a, b| a + b);
            let pr = num::pow(BigRational::from_integer(BigInt::from(p)), r as usize);
            let u = v / pr;
            let pb = BigInt::from(p);
            if !u.is_zero() && (u.denom() % &pb).is_zero() {
                return None;
            }
            Some(QtPoly::constant(d.n, u, 0))
        }
        Base::Fq(_) => {
            if d.terms.keys().any(|(_, e)| *e < r as i64) {
                return None;
            }
            Some(QtPoly { n: d.n, terms: d.terms.iter().map(|((m, e), c)| ((m.clone(), e - r as i64), c.clone())).collect() })
        }
    }
}

fn known_elem<D: Dvr>(d: &D, base: Base, u: &QtPoly, cap: u32) -> Option<D::E> {
    match base {
        Base::Zp(p) => {
            let v: BigRational = u.terms.values().cloned().fold(BigRational::zero(), |a, b| a + b);
            let m = BigInt::from(p).pow(cap + 1);
            let den_inv = v.denom().modpow(&(totient_pow(p, cap + 1) - BigInt::one()), &m);
            Some(d.int(&(v.numer() * den_inv).mod_floor(&m)))
        }
        Base::Fq(q) => {
            let mut acc = d.zero();
            for ((_, e), c) in &u.terms {
                let qb = BigInt::from(q);
                if (c.denom() % &qb).is_zero() {
                    return None;
                }
                let inv = c.denom().modpow(&(qb.clone() - BigInt::from(2)), &qb);
                acc = d.add(&acc, &d.mul(&d.int(&(c.numer() * inv)), &d.pi_pow(*e as u32)));
            }
            Some(acc)
        }
    }
}

fn totient_pow(p: u64, k: u32) -> BigInt {
    BigInt::from(p).pow(k - 1) * BigInt::from(p - 1)
}

fn problem<D: Dvr>(d: D, base: Base, prep: &Prepared, cap: u32) -> Result<Problem<D>> {
    let mut polys = vec![];
    let mut full = true;
    let mut empty = false;
    for f in &prep.polys {
        let rp = rpoly_from(&d, base, f)?;
        if rp.terms.is_empty() {
            continue;
        }
        full = false;
        if rp.terms.len() == 1 && rp.terms[0].0.iter().all(|e| *e == 0) {
            empty = true;
        }
        polys.push(rp);
    }
    let grads = polys.iter().map(|f| (0..prep.n).map(|i| deriv(&d, f, i)).collect()).collect();
    let mut points = vec![];
    for u in &prep.points {
        let pt: Option<Vec<D::E>> = u.iter().map(|x| known_elem(&d, base, x, cap)).collect();
        if let Some(pt) = pt {
            // only exact zeros in the base count as known points
            let on = polys.iter().all(|f| d.val(&eval(&d, f, &pt)).map_or(true, |v| v > cap));
            if on {
                points.push(pt);
            }
        }
    }
    let active = (0..prep.n).filter(|i| polys.iter().any(|f| f.terms.iter().any(|(m, _)| m[*i] > 0))).collect();
    Ok(Problem { d, polys, grads, points, n: prep.n, active, cap, full, empty })
}

// ---------------------------------------------------------------------------------------
// Public API.

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareSeries {
    pub base: Base,
    pub n: usize,
    /// N_λ for λ = 0..=λ_max.
    pub coeffs: Vec<BigInt>,
    pub method: &'static str,
}

fn render_series(cs: &[String]) -> String {
    let mut parts = vec![];
    for (i, c) in cs.iter().enumerate() {
        if c == "0" {
            continue;
        }
        let coef = if c.contains(' ') { format!("({c})") } else { c.clone() };
        parts.push(match i {
            0 => coef,
            1 if c == "1" => "T".into(),
            1 => format!("{coef}*T"),
            _ if c == "1" => format!("T^{i}"),
            _ => format!("{coef}*T^{i}"),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        format!("{} + O(T^{})", parts.join(" + "), cs.len())
    }
}

impl PoincareSeries {
    pub fn render(&self) -> String {
        render_series(&self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "base": self.base.to_string(),
            "method": self.method,
            "coefficients": self.coeffs.iter().enumerate().map(|(l, c)| json!({"lambda": l, "N": c.to_string()})).collect::<Vec<_>>(),
            "series": self.render(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("base {} ({})\nlambda  N\n", self.base, self.method);
        for (l, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{l:>6}  {c}\n"));
        }
        out.push_str(&format!("P(T) = {}\n", self.render()));
        out
    }
}

fn run(polys: &[SPoly], base: Base, ball: Option<&Ball>, opts: &PoincareOptions, naive: bool) -> Result<PoincareSeries> {
    if opts.lmax > MAX_LMAX {
        return Err(RisoError::InvalidInput(format!("lambda_max {} exceeds the cap {MAX_LMAX}", opts.lmax)));
    }
    let prep = prepare(polys, base, ball)?;
    let r = prep.radius;
    let mut coeffs = vec![BigInt::zero(); opts.lmax as usize + 1];
    if r > opts.lmax {
        return Ok(PoincareSeries { base, n: prep.n, coeffs, method: if naive { "oracle" } else { "optimized" } });
    }
    let kmax = opts.lmax - r;
    let cap = kmax + opts.slack;
    let counts = match base {
        Base::Zp(p) => {
            let pr = problem(Zp { p, pb: BigInt::from(p) }, base, &prep, cap)?;
            if naive { pr.count_naive(kmax)? } else { pr.count(kmax)? }
        }
        Base::Fq(q) => {
            let pr = problem(FqT { q }, base, &prep, cap)?;
            if naive { pr.count_naive(kmax)? } else { pr.count(kmax)? }
        }
    };
    for (k, c) in counts.iter().enumerate() {
        coeffs[k + r as usize] = BigInt::from(*c);
    }
    Ok(PoincareSeries { base, n: prep.n, coeffs, method: if naive { "oracle" } else { "optimized" } })
}

/// N_λ = number of closed balls of radius λ inside B that meet the common zero set.
pub fn poincare_count(polys: &[SPoly], base: Base, ball: Option<&Ball>, opts: &PoincareOptions) -> Result<PoincareSeries> {
    run(polys, base, ball, opts, false)
}

/// The same counts by flat single-threaded enumeration with the classical Hensel bound.
pub fn poincare_oracle(polys: &[SPoly], base: Base, ball: Option<&Ball>, opts: &PoincareOptions) -> Result<PoincareSeries> {
    run(polys, base, ball, opts, true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberIdentityReport {
    pub base: Base,
    pub d: usize,
    pub lhs: Vec<BigInt>,
    pub fiber: Vec<BigInt>,
    pub rhs: Vec<BigInt>,
    pub first_discrepancy: Option<usize>,
}

impl FiberIdentityReport {
    pub fn holds(&self) -> bool {
        self.first_discrepancy.is_none()
    }

    pub fn to_json(&self) -> Value {
        let s = |v: &[BigInt]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        json!({
            "schema": SCHEMA,
            "base": self.base.to_string(),
            "d": self.d,
            "lhs": s(&self.lhs),
            "fiber": s(&self.fiber),
            "rhs": s(&self.rhs),
            "holds": self.holds(),
            "first_discrepancy": self.first_discrepancy,
        })
    }
}

/// Compares P_{Z,B}(T) with P_{Z_a,B_a}(base^d·T), where Z_a fixes the coordinates in
/// `fixed` at the center of B.
pub fn check_fiber_identity(
    polys: &[SPoly],
    base: Base,
    ball: Option<&Ball>,
    fixed: &[usize],
    opts: &PoincareOptions,
) -> Result<FiberIdentityReport> {
    let n = polys.first().map(|f| f.n).ok_or_else(|| RisoError::InvalidInput("no polynomials given".into()))?;
    if fixed.iter().any(|i| *i >= n) {
        return Err(RisoError::InvalidInput("projection index out of range".into()));
    }
    let lhs = poincare_count(polys, base, ball, opts)?;
    let d = fixed.len();
    if d == 0 {
        return Ok(FiberIdentityReport { base, d, lhs: lhs.coeffs.clone(), fiber: lhs.coeffs.clone(), rhs: lhs.coeffs, first_discrepancy: None });
    }
    let keep: Vec<usize> = (0..n).filter(|i| !fixed.contains(i)).collect();
    let center: Vec<PuiseuxSeries> = match ball {
        Some(b) => b.center.coords.clone(),
        None => vec![PuiseuxSeries::zero(); n],
    };
    let mut fibers = vec![];
    for f in polys {
        let mut g = f.clone();
        for &i in fixed {
            g = g.eval_var(i, &center[i].as_exact());
        }
        fibers.push(g.permute(&keep));
    }
    let fb = match ball {
        Some(b) => Some(Ball::new(Point::new(keep.iter().map(|i| center[*i].clone()).collect()), b.radius, b.kind)?),
        None => None,
    };
    let r = ball_data(ball, n)?.1 as usize;
    let fiber = poincare_count(&fibers, base, fb.as_ref(), opts)?;
    let q = BigInt::from(base.size());
    let rhs: Vec<BigInt> = fiber
        .coeffs
        .iter()
        .enumerate()
        .map(|(l, c)| if l < r { c.clone() } else { c * q.pow((d * (l - r)) as u32) })
        .collect();
    let first_discrepancy = lhs.coeffs.iter().zip(&rhs).position(|(a, b)| a != b);
    Ok(FiberIdentityReport { base, d, lhs: lhs.coeffs, fiber: fiber.coeffs, rhs, first_discrepancy })
}

/// Polynomial in q with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct QPolyCoeff(pub Vec<BigRational>);

impl QPolyCoeff {
    pub fn eval(&self, q: u64) -> BigRational {
        let qb = BigRational::from_integer(BigInt::from(q));
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * &qb + c)
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }
}

impl fmt::Display for QPolyCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = vec![];
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "q".into(),
                _ => format!("q^{i}"),
            };
            let mag = c.abs();
            let body = match (mono.is_empty(), mag.is_one()) {
                (true, _) => mag.to_string(),
                (false, true) => mono,
                (false, false) => format!("{mag}*{mono}"),
            };
            if parts.is_empty() {
                parts.push(if c.is_negative() { format!("-{body}") } else { body });
            } else {
                parts.push(format!("{} {body}", if c.is_negative() { "-" } else { "+" }));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotivicSeries {
    pub qs: Vec<u64>,
    pub held_out: u64,
    pub counts: Vec<(u64, Vec<BigInt>)>,
    /// Interpolated N_λ(q), standing for the class [Y_λ] with L read as q.
    pub coeffs: Vec<QPolyCoeff>,
}

impl MotivicSeries {
    pub fn render(&self) -> String {
        render_series(&self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "kind": "motivic-specialized",
            "semantics": "point counts over F_q[[t]] interpolated in q; L corresponds to q",
            "q": self.qs,
            "held_out": self.held_out,
            "counts": self.counts.iter().map(|(q, c)| json!({"q": q, "N": c.iter().map(|x| x.to_string()).collect::<Vec<_>>()})).collect::<Vec<_>>(),
            "coefficients": self.coeffs.iter().enumerate().map(|(l, c)| json!({"lambda": l, "N": c.to_string()})).collect::<Vec<_>>(),
            "series": self.render(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("motivic specialization from q in {:?}, checked at q = {}\nlambda  N(q)\n", self.qs, self.held_out);
        for (l, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{l:>6}  {c}\n"));
        }
        out.push_str(&format!("P(T) = {}\n", self.render()));
        out
    }
}

fn interpolate(pts: &[(u64, BigInt)]) -> QPolyCoeff {
    let m = pts.len();
    let mut out = vec![BigRational::zero(); m];
    for (i, (xi, yi)) in pts.iter().enumerate() {
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for (j, (xj, _)) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let xj = BigRational::from_integer(BigInt::from(*xj));
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xj;
            }
            basis = next;
            denom *= BigRational::from_integer(BigInt::from(*xi)) - xj;
        }
        let s = BigRational::from_integer(yi.clone()) / denom;
        for (k, c) in basis.iter().enumerate() {
            out[k] += c * &s;
        }
    }
    QPolyCoeff(out)
}

/// Counts over 𝔽_q[[t]] for each q, interpolates each N_λ as a polynomial in q of degree at
/// most n·λ and checks it at a held-out q.
pub fn motivic_specialize(
    polys: &[SPoly],
    ball: Option<&Ball>,
    qs: &[u64],
    held_out: u64,
    opts: &PoincareOptions,
) -> Result<MotivicSeries> {
    if qs.len() < 2 {
        return Err(RisoError::InvalidInput("motivic specialization needs at least two values of q".into()));
    }
    if qs.contains(&held_out) {
        return Err(RisoError::InvalidInput(format!("held-out q = {held_out} is also an interpolation node")));
    }
    let mut all: Vec<u64> = qs.to_vec();
    all.push(held_out);
    let counts: Vec<(u64, Vec<BigInt>)> = all
        .iter()
        .map(|&q| Ok((q, poincare_count(polys, Base::Fq(q), ball, opts)?.coeffs)))
        .collect::<Result<_>>()?;
    let n = polys[0].n;
    let mut coeffs = vec![];
    for l in 0..=opts.lmax as usize {
        let pts: Vec<(u64, BigInt)> = counts[..qs.len()].iter().map(|(q, c)| (*q, c[l].clone())).collect();
        let poly = interpolate(&pts);
        if poly.degree().unwrap_or(0) > n * l {
            return Err(RisoError::InterpolationMismatch(format!(
                "N_{l}(q) needs degree {} > {} = n*lambda",
                poly.degree().unwrap(),
                n * l
            )));
        }
        let (hq, hc) = counts.last().unwrap();
        if poly.eval(*hq) != BigRational::from_integer(hc[l].clone()) {
            return Err(RisoError::InterpolationMismatch(format!(
                "N_{l}({hq}) = {} but the interpolant {poly} gives {}",
                hc[l],
                poly.eval(*hq)
            )));
        }
        coeffs.push(poly);
    }
    Ok(MotivicSeries { qs: qs.to_vec(), held_out, counts, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_poly;

    fn f(s: &str, vars: &[&str]) -> SPoly {
        parse_poly(s, vars).unwrap()
    }
    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|x| BigInt::from(*x)).collect()
    }
    fn opts(l: u32) -> PoincareOptions {
        PoincareOptions { lmax: l, slack: DEFAULT_SLACK }
    }

    #[test]
    fn line_counts() {
        let s = poincare_count(&[f("y", &["x", "y"])], Base::Zp(3), None, &opts(3)).unwrap();
        assert_eq!(s.coeffs, ints(&[1, 3, 9, 27]));
        assert_eq!(s.render(), "1 + 3*T + 9*T^2 + 27*T^3 + O(T^4)");
        let m = motivic_specialize(&[f("y", &["x", "y"])], None, &[2, 3, 5, 7], 11, &opts(3)).unwrap();
        assert_eq!(m.coeffs[2].to_string(), "q^2");
    }

    #[test]
    fn cusp_matches_oracle() {
        for (p, l) in [(2, 3), (3, 3), (5, 2)] {
            let a = poincare_count(&[f("y^2 - x^3", &["x", "y"])], Base::Zp(p), None, &opts(l)).unwrap();
            let b = poincare_oracle(&[f("y^2 - x^3", &["x", "y"])], Base::Zp(p), None, &PoincareOptions { lmax: l, slack: 4 }).unwrap();
            assert_eq!(a.coeffs, b.coeffs, "p = {p}");
        }
    }

    #[test]
    fn cylinder_fiber_identity() {
        for p in [2, 3] {
            let r = check_fiber_identity(&[f("y^2 - x^3", &["x", "y", "z"])], Base::Zp(p), None, &[2], &opts(3)).unwrap();
            assert!(r.holds(), "{r:?}");
            let o = poincare_oracle(&[f("y^2 - x^3", &["x", "y", "z"])], Base::Zp(p), None, &PoincareOptions { lmax: 3, slack: 4 }).unwrap();
            assert_eq!(o.coeffs, r.lhs);
        }
    }

    fn cusp_image_counts(q: u64, l: u32) -> usize {
        let d = FqT { q };
        let mut set = std::collections::BTreeSet::new();
        for k in 0..q.pow(l) {
            let mut s = vec![];
            let mut kk = k;
            for _ in 0..l {
                s.push(kk % q);
                kk /= q;
            }
            let s = FqT::trim(s);
            let s2 = d.mul(&s, &s);
            let s3 = d.mul(&s2, &s);
            let tr = |v: Vec<u64>| FqT::trim(v.into_iter().take(l as usize).collect());
            set.insert((tr(s2), tr(s3)));
        }
        set.len()
    }

    #[test]
    fn cusp_counts_match_parametrization() {
        for q in [2, 3, 5, 7] {
            let s = poincare_count(&[f("y^2 - x^3", &["x", "y"])], Base::Fq(q), None, &opts(3)).unwrap();
            let bf: Vec<BigInt> = (0..=3).map(|l| BigInt::from(cusp_image_counts(q, l))).collect();
            assert_eq!(s.coeffs, bf, "q = {q}");
        }
    }

    #[test]
    fn cusp_motivic() {
        let m = motivic_specialize(&[f("y^2 - x^3", &["x", "y"])], None, &[2, 3, 5, 7], 11, &opts(2)).unwrap();
        assert_eq!(m.coeffs[0].to_string(), "1");
        assert_eq!(m.coeffs[1].to_string(), "q");
        assert_eq!(m.coeffs[2].to_string(), "q^2 - q + 1");
        // N_3 picks up the number of squares in F_q, which is not uniform in characteristic 2
        let e = motivic_specialize(&[f("y^2 - x^3", &["x", "y"])], None, &[2, 3, 5, 7], 11, &opts(3));
        assert!(matches!(e, Err(RisoError::InterpolationMismatch(_))));
    }

    #[test]
    fn bases() {
        assert_eq!(Base::parse_list("p=3").unwrap(), vec![Base::Zp(3)]);
        assert_eq!(Base::parse_list("Fq[[t]],q=2,3,5,7").unwrap().len(), 4);
        assert!(matches!(Base::parse_list("q=4"), Err(RisoError::UnsupportedBase(_))));
        assert!(matches!(Base::parse_list("p=13"), Err(RisoError::UnsupportedBase(_))));
    }

    #[test]
    fn empty_and_everything() {
        let s = poincare_count(&[f("1", &["x", "y"])], Base::Zp(2), None, &opts(2)).unwrap();
        assert_eq!(s.coeffs, ints(&[0, 0, 0]));
        let s = poincare_count(&[f("x^2 + y^2 + 1 - 1 - x^2 - y^2", &["x", "y"])], Base::Zp(2), None, &opts(2));
        assert!(s.is_ok());
    }
}
