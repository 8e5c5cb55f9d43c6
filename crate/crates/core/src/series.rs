//! Truncated Puiseux series over a coefficient field: finite support below a certified order ω.

use std::collections::BTreeMap;
use std::fmt;

use num::Signed;

use crate::coeff::{Coeff, Embedding};
use crate::error::{Result, RisoError};
use crate::field::Field;
use crate::gamma::{common_denom, fmt_exp, Exp, Gamma};

/// Default truncation order ω for computed expansions.
pub const DEFAULT_PRECISION: i64 = 32;

/// Invariants: no stored coefficient is zero and every stored exponent is below `omega`.
/// The exact zero is the empty support with `omega = ∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries {
    terms: BTreeMap<Exp, Coeff>,
    omega: Gamma,
}

impl PuiseuxSeries {
    pub fn zero() -> Self {
        PuiseuxSeries { terms: BTreeMap::new(), omega: Gamma::Inf }
    }

    /// Zero known only up to `t^ω`.
    pub fn zero_to(omega: Gamma) -> Self {
        PuiseuxSeries { terms: BTreeMap::new(), omega }
    }

    pub fn constant(c: Coeff) -> Self {
        Self::monomial(c, Exp::from_integer(0))
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Coeff::int(n))
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// c·t^e, exact.
    pub fn monomial(c: Coeff, e: Exp) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        PuiseuxSeries { terms, omega: Gamma::Inf }
    }

    /// t^e
    pub fn t_pow(e: Exp) -> Self {
        Self::monomial(Coeff::one(), e)
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Exp, Coeff)>, omega: Gamma) -> Self {
        let mut terms: BTreeMap<Exp, Coeff> = BTreeMap::new();
        for (e, c) in it {
            if Gamma::Fin(e) >= omega {
                continue;
            }
            let slot = terms.entry(e).or_insert_with(Coeff::zero);
            *slot = slot.add(&c);
        }
        terms.retain(|_, c| !c.is_zero());
        PuiseuxSeries { terms, omega }
    }

    pub fn omega(&self) -> Gamma {
        self.omega
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exp, &Coeff)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_exact(&self) -> bool {
        self.omega.is_inf()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.omega.is_inf()
    }

    /// Empty support (exact zero or unknown-small).
    pub fn support_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Minimal e with all exponents in (1/e)ℤ.
    pub fn ramification(&self) -> i64 {
        common_denom(self.terms.keys())
    }

    pub fn coeff(&self, e: &Exp) -> Coeff {
        self.terms.get(e).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Least exponent of the support; ∞ for the exact zero.
    pub fn valuation(&self) -> Result<Gamma> {
        match self.terms.keys().next() {
            Some(e) => Ok(Gamma::Fin(*e)),
            None if self.omega.is_inf() => Ok(Gamma::Inf),
            None => Err(RisoError::InsufficientPrecision(format!(
                "series vanishes below t^{}; valuation undecided",
                self.omega
            ))),
        }
    }

    /// A certified lower bound for the valuation (ω when the support is empty).
    pub fn valuation_lb(&self) -> Gamma {
        self.terms.keys().next().map(|e| Gamma::Fin(*e)).unwrap_or(self.omega)
    }

    /// Leading coefficient; zero for empty support.
    pub fn leading_coeff(&self) -> Coeff {
        self.terms.values().next().cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn leading(&self) -> Option<(Exp, Coeff)> {
        self.terms.iter().next().map(|(e, c)| (*e, c.clone()))
    }

    pub fn truncate(&self, omega: Gamma) -> Self {
        let om = self.omega.min(omega);
        PuiseuxSeries {
            terms: self.terms.iter().filter(|(e, _)| Gamma::Fin(**e) < om).map(|(e, c)| (*e, c.clone())).collect(),
            omega: om,
        }
    }

    /// Exact finite sum of the terms with exponent strictly below `bound`.
    pub fn head_below(&self, bound: Exp) -> Self {
        PuiseuxSeries {
            terms: self.terms.range(..bound).map(|(e, c)| (*e, c.clone())).collect(),
            omega: Gamma::Inf,
        }
    }

    /// Exact finite sum of the terms with exponent at most `bound`.
    pub fn head_upto(&self, bound: Exp) -> Self {
        PuiseuxSeries {
            terms: self.terms.range(..=bound).map(|(e, c)| (*e, c.clone())).collect(),
            omega: Gamma::Inf,
        }
    }

    /// Forgets the truncation order (for exact finite data such as canonical centers).
    pub fn as_exact(&self) -> Self {
        PuiseuxSeries { terms: self.terms.clone(), omega: Gamma::Inf }
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries { terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(), omega: self.omega }
    }

    pub fn add(&self, o: &Self) -> Self {
        let omega = self.omega.min(o.omega);
        Self::from_terms(
            self.terms.iter().chain(o.terms.iter()).map(|(e, c)| (*e, c.clone())),
            omega,
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.mul_below(o, Gamma::Inf)
    }

    /// Product truncated at t^bound.
    pub fn mul_below(&self, o: &Self, bound: Gamma) -> Self {
        let omega = (self.omega + o.valuation_lb()).min(o.omega + self.valuation_lb()).min(bound);
        let mut acc: BTreeMap<Exp, Coeff> = BTreeMap::new();
        for (ea, ca) in self.terms.iter() {
            for (eb, cb) in o.terms.iter() {
                let e = ea + eb;
                if Gamma::Fin(e) >= omega {
                    break;
                }
                let slot = acc.entry(e).or_insert_with(Coeff::zero);
                *slot = slot.add(&ca.mul(cb));
            }
        }
        acc.retain(|_, c| !c.is_zero());
        PuiseuxSeries { terms: acc, omega }
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        PuiseuxSeries { terms: self.terms.iter().map(|(e, a)| (*e, a.mul(c))).collect(), omega: self.omega }
    }

    /// Multiplication by t^s.
    pub fn shift(&self, s: Exp) -> Self {
        PuiseuxSeries { terms: self.terms.iter().map(|(e, a)| (e + s, a.clone())).collect(), omega: self.omega + s }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Fails when the result carries no certified term although it is not exactly zero.
    fn certify(self, what: &str) -> Result<Self> {
        if self.terms.is_empty() && !self.omega.is_inf() {
            return Err(RisoError::InsufficientPrecision(format!(
                "{what}: no term certified below t^{}",
                self.omega
            )));
        }
        Ok(self)
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self> {
        self.add(o).certify("add")
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self> {
        self.mul(o).certify("mul")
    }

    /// Inverse to output order min(order, ω − 2·v). An error in a of size t^ω perturbs
    /// 1/a by t^(ω − 2v).
    pub fn invert(&self, order: Exp) -> Result<Self> {
        let v = match self.valuation()? {
            Gamma::Fin(v) => v,
            Gamma::Inf => return Err(RisoError::InvalidInput("inverse of zero".into())),
        };
        let target = Gamma::Fin(order).min(self.omega - v - v);
        if target <= Gamma::Fin(-v) {
            return Err(RisoError::InsufficientPrecision(format!(
                "inverse of a series of valuation {} known to t^{} has no certified term",
                fmt_exp(&v),
                self.omega
            )));
        }
        let c = self.leading_coeff();
        let ci = c.inv();
        // self = c t^v (1 + u)
        let u = self.shift(-v).scale(&ci).sub(&Self::one());
        let u = PuiseuxSeries { terms: u.terms, omega: Gamma::Inf };
        let rel_target = target + v;
        // Newton steps x ← x(2 − (1 + u)x), doubling the correct order each time
        let m = match u.valuation_lb() {
            Gamma::Fin(m) => m,
            Gamma::Inf => return Ok(Self::constant(ci).shift(-v).truncate(target)),
        };
        let a = u.add(&Self::one());
        let two = Self::int(2);
        let mut x = Self::one();
        let mut known = Gamma::Fin(m);
        while known < rel_target {
            known = (known + m).max(known + known).min(rel_target);
            let ax = a.mul_below(&x, known);
            x = x.mul_below(&two.sub(&ax), known);
            x = PuiseuxSeries { terms: x.terms, omega: Gamma::Inf };
        }
        Ok(x.shift(-v).scale(&ci).truncate(target))
    }

    pub fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))), self.omega)
    }

    pub fn embed(&self, e: &Embedding) -> Self {
        self.map_coeffs(|c| c.embed(e))
    }

    /// True when every coefficient is rational.
    pub fn is_rational(&self) -> bool {
        self.terms.values().all(|c| c.is_rational())
    }

    pub fn max_exponent(&self) -> Option<Exp> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_exponent(&self) -> Option<Exp> {
        self.terms.keys().next().copied()
    }

    /// Applies t ↦ t^r to exponents (r > 0).
    pub fn rescale_exponents(&self, r: Exp) -> Self {
        PuiseuxSeries {
            terms: self.terms.iter().map(|(e, c)| (e * r, c.clone())).collect(),
            omega: match self.omega {
                Gamma::Fin(w) => Gamma::Fin(w * r),
                Gamma::Inf => Gamma::Inf,
            },
        }
    }
}

fn fmt_pow(var: &str, e: &Exp) -> String {
    if *e == Exp::from_integer(1) {
        var.into()
    } else if e.is_integer() && !e.is_negative() {
        format!("{var}^{}", e.numer())
    } else {
        format!("{var}^({})", fmt_exp(e))
    }
}

impl PuiseuxSeries {
    /// Renders with `var` in place of t.
    pub fn render_in(&self, var: &str) -> String {
        let fmt_tpow = |e: &Exp| fmt_pow(var, e);
        let mut out = String::new();
        for (e, c) in self.terms.iter() {
            let zero_exp = *e == Exp::from_integer(0);
            let (neg, mag) = if c.is_atomic() && c.looks_negative() { (true, c.neg()) } else { (false, c.clone()) };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let cs = if mag.is_atomic() { mag.to_string() } else { format!("({mag})") };
            if zero_exp {
                out.push_str(&cs);
            } else if mag.is_one() {
                out.push_str(&fmt_tpow(e));
            } else {
                out.push_str(&format!("{cs}*{}", fmt_tpow(e)));
            }
        }
        if let Gamma::Fin(w) = self.omega {
            if !out.is_empty() {
                out.push_str(" + ");
            }
            out.push_str(&format!("O({})", fmt_tpow(&w)));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render_in("t"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: i64, d: i64) -> Exp {
        Exp::new(n, d)
    }

    fn s(terms: &[(i64, i64, i64)]) -> PuiseuxSeries {
        PuiseuxSeries::from_terms(terms.iter().map(|&(c, n, d)| (e(n, d), Coeff::int(c))), Gamma::Inf)
    }

    #[test]
    fn valuation_cases() {
        assert_eq!(s(&[(1, 2, 1), (1, 3, 1)]).valuation().unwrap(), Gamma::int(2));
        assert_eq!(PuiseuxSeries::zero().valuation().unwrap(), Gamma::Inf);
        assert_eq!(s(&[(3, 0, 1), (1, 1, 2)]).valuation().unwrap(), Gamma::int(0));
        assert!(matches!(
            PuiseuxSeries::zero_to(Gamma::int(3)).valuation(),
            Err(RisoError::InsufficientPrecision(_))
        ));
    }

    #[test]
    fn products_and_inverse() {
        let a = s(&[(1, 0, 1), (1, 1, 1)]);
        let b = s(&[(1, 0, 1), (-1, 1, 1)]);
        assert_eq!(a.mul(&b), s(&[(1, 0, 1), (-1, 2, 1)]));
        let inv = b.invert(Exp::from_integer(3)).unwrap();
        assert_eq!(inv.to_string(), "1 + t + t^2 + O(t^3)");
        // precision rule: ω_out = ω − 2v
        let c = PuiseuxSeries::from_terms([(e(1, 1), Coeff::int(1)), (e(2, 1), Coeff::int(1))], Gamma::int(5));
        assert_eq!(c.invert(Exp::from_integer(100)).unwrap().omega(), Gamma::int(3));
    }

    #[test]
    fn mul_precision() {
        let a = PuiseuxSeries::from_terms([(e(1, 1), Coeff::int(1))], Gamma::int(4));
        let b = PuiseuxSeries::from_terms([(e(2, 1), Coeff::int(1))], Gamma::int(3));
        // min(4 + 2, 3 + 1) = 4
        assert_eq!(a.mul(&b).omega(), Gamma::int(4));
        assert!(PuiseuxSeries::zero_to(Gamma::int(1)).checked_mul(&a).is_err());
    }

    #[test]
    fn render() {
        assert_eq!(s(&[(1, 0, 1), (2, 3, 2)]).to_string(), "1 + 2*t^(3/2)");
        assert_eq!(s(&[(-1, -2, 1), (1, 1, 1)]).to_string(), "-t^(-2) + t");
        assert_eq!(PuiseuxSeries::zero().to_string(), "0");
        assert_eq!(s(&[(1, 1, 2), (1, 3, 4)]).ramification(), 4);
    }
}
