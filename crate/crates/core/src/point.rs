//! Points of Kⁿ, tuple valuation, leading terms and the ≈ relation.

use std::fmt;

use crate::coeff::{Coeff, Embedding};
use crate::error::{Result, RisoError};
use crate::gamma::{Exp, Gamma};
use crate::series::PuiseuxSeries;

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub coords: Vec<PuiseuxSeries>,
}

/// Leading-term class of a tuple. The zero tuple has λ = ∞ and an empty lead.
#[derive(Clone, Debug, PartialEq)]
pub struct RvClass {
    pub lambda: Gamma,
    pub lead: Vec<Coeff>,
}

impl RvClass {
    pub fn is_zero(&self) -> bool {
        self.lambda.is_inf()
    }
}

impl fmt::Display for RvClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "rv(0)");
        }
        let lead: Vec<String> = self.lead.iter().map(|c| c.to_string()).collect();
        write!(f, "rv[{}; ({})]", self.lambda, lead.join(", "))
    }
}

impl Point {
    pub fn new(coords: Vec<PuiseuxSeries>) -> Self {
        Point { coords }
    }

    pub fn origin(n: usize) -> Self {
        Point { coords: vec![PuiseuxSeries::zero(); n] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn add(&self, o: &Point) -> Point {
        Point { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, s: &PuiseuxSeries) -> Point {
        Point { coords: self.coords.iter().map(|a| a.mul(s)).collect() }
    }

    pub fn embed(&self, e: &Embedding) -> Point {
        Point { coords: self.coords.iter().map(|a| a.embed(e)).collect() }
    }

    pub fn as_exact(&self) -> Point {
        Point { coords: self.coords.iter().map(|a| a.as_exact()).collect() }
    }

    /// Least certified order among the coordinates.
    pub fn omega(&self) -> Gamma {
        self.coords.iter().map(|c| c.omega()).fold(Gamma::Inf, Gamma::min)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_exact_zero())
    }

    /// v(a) = min_i v(a_i).
    pub fn valuation(&self) -> Result<Gamma> {
        let lb = self.coords.iter().map(|c| c.valuation_lb()).fold(Gamma::Inf, Gamma::min);
        if lb.is_inf() {
            return Ok(Gamma::Inf);
        }
        let attained = self.coords.iter().any(|c| c.min_exponent().map(Gamma::Fin) == Some(lb));
        if attained {
            Ok(lb)
        } else {
            Err(RisoError::InsufficientPrecision(format!("tuple valuation undecided below t^{lb}")))
        }
    }

    /// Decides v(self) ≥ λ (or > λ when `strict`). A definite witness below the bound wins over
    /// missing precision elsewhere.
    pub fn valuation_at_least(&self, lambda: Exp, strict: bool) -> Result<bool> {
        let below = |e: &Exp| if strict { *e <= lambda } else { *e < lambda };
        if self.coords.iter().any(|c| c.min_exponent().map_or(false, |e| below(&e))) {
            return Ok(false);
        }
        let need = Gamma::Fin(lambda);
        for c in &self.coords {
            let ok = if strict { c.omega() > need } else { c.omega() >= need };
            if !ok {
                return Err(RisoError::InsufficientPrecision(format!(
                    "coordinate known only to t^{}; cannot compare with {}",
                    c.omega(),
                    need
                )));
            }
        }
        Ok(true)
    }

    pub fn rv(&self) -> Result<RvClass> {
        let lambda = self.valuation()?;
        let l = match lambda {
            Gamma::Inf => return Ok(RvClass { lambda, lead: vec![] }),
            Gamma::Fin(l) => l,
        };
        for c in &self.coords {
            if c.omega() <= lambda {
                return Err(RisoError::InsufficientPrecision(format!(
                    "coordinate known only to t^{}; leading term at {} undecided",
                    c.omega(),
                    lambda
                )));
            }
        }
        Ok(RvClass { lambda, lead: self.coords.iter().map(|c| c.coeff(&l)).collect() })
    }

    /// a ≈ b: v(a − b) > v(a), or both are zero.
    pub fn approx(&self, o: &Point) -> Result<bool> {
        match self.valuation()? {
            Gamma::Inf => Ok(o.valuation()?.is_inf()),
            Gamma::Fin(l) => self.sub(o).valuation_at_least(l, true),
        }
    }

    /// Coordinate-wise exact equality of the stored data.
    pub fn same_as(&self, o: &Point) -> bool {
        self == o
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", cs.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(n: i64, d: i64) -> PuiseuxSeries {
        PuiseuxSeries::t_pow(Exp::new(n, d))
    }

    #[test]
    fn rv_tuple_vs_componentwise() {
        let a = Point::new(vec![PuiseuxSeries::one(), PuiseuxSeries::zero()]);
        let b = Point::new(vec![PuiseuxSeries::one(), tp(1, 1)]);
        assert_eq!(a.rv().unwrap(), b.rv().unwrap());
        let a2 = Point::new(vec![PuiseuxSeries::zero()]);
        let b2 = Point::new(vec![tp(1, 1)]);
        assert_ne!(a2.rv().unwrap(), b2.rv().unwrap());
        let t = Point::new(vec![tp(1, 1)]);
        let two_t = Point::new(vec![tp(1, 1).scale(&Coeff::int(2))]);
        assert_ne!(t.rv().unwrap(), two_t.rv().unwrap());
    }

    #[test]
    fn approx_cases() {
        let a = Point::new(vec![tp(1, 1)]);
        let b = Point::new(vec![tp(1, 1).add(&tp(2, 1))]);
        assert!(a.approx(&b).unwrap());
        let c = Point::new(vec![tp(1, 1).scale(&Coeff::int(2))]);
        assert!(!a.approx(&c).unwrap());
    }

    #[test]
    fn truncated_valuation() {
        let p = Point::new(vec![
            PuiseuxSeries::zero_to(Gamma::int(5)),
            tp(2, 1),
        ]);
        assert_eq!(p.valuation().unwrap(), Gamma::int(2));
        let q = Point::new(vec![PuiseuxSeries::zero_to(Gamma::int(1)), tp(2, 1)]);
        assert!(q.valuation().is_err());
    }
}
