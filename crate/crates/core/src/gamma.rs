//! The value group ℚ extended by ∞.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num::rational::Ratio;
use num::{One, Signed, Zero};

/// Exponent type used for supports and radii.
pub type Exp = Ratio<i64>;

/// An element of Γ ∪ {∞}. `Ratio` keeps the fraction reduced with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gamma {
    Fin(Exp),
    Inf,
}

impl Gamma {
    pub fn zero() -> Self {
        Gamma::Fin(Exp::zero())
    }

    pub fn int(n: i64) -> Self {
        Gamma::Fin(Exp::from_integer(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Gamma::Fin(Exp::new(n, d))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Gamma::Inf)
    }

    pub fn fin(&self) -> Option<Exp> {
        match self {
            Gamma::Fin(r) => Some(*r),
            Gamma::Inf => None,
        }
    }

    /// Finite value; panics on ∞.
    pub fn unwrap(&self) -> Exp {
        self.fin().expect("finite value expected")
    }

    pub fn min(self, other: Gamma) -> Gamma {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Gamma) -> Gamma {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<Exp> for Gamma {
    fn from(r: Exp) -> Self {
        Gamma::Fin(r)
    }
}

impl From<i64> for Gamma {
    fn from(n: i64) -> Self {
        Gamma::int(n)
    }
}

impl PartialOrd for Gamma {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gamma {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Gamma::Inf, Gamma::Inf) => Ordering::Equal,
            (Gamma::Inf, _) => Ordering::Greater,
            (_, Gamma::Inf) => Ordering::Less,
            (Gamma::Fin(a), Gamma::Fin(b)) => a.cmp(b),
        }
    }
}

impl Add for Gamma {
    type Output = Gamma;
    fn add(self, rhs: Gamma) -> Gamma {
        match (self, rhs) {
            (Gamma::Fin(a), Gamma::Fin(b)) => Gamma::Fin(a + b),
            _ => Gamma::Inf,
        }
    }
}

impl Add<Exp> for Gamma {
    type Output = Gamma;
    fn add(self, rhs: Exp) -> Gamma {
        match self {
            Gamma::Fin(a) => Gamma::Fin(a + rhs),
            Gamma::Inf => Gamma::Inf,
        }
    }
}

impl Sub<Exp> for Gamma {
    type Output = Gamma;
    fn sub(self, rhs: Exp) -> Gamma {
        self + (-rhs)
    }
}

impl Neg for Gamma {
    type Output = Gamma;
    /// Only defined on finite values.
    fn neg(self) -> Gamma {
        Gamma::Fin(-self.unwrap())
    }
}

/// Renders an exponent as `p` or `p/q`.
pub fn fmt_exp(r: &Exp) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_exp(s: &str) -> Option<Exp> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(Exp::new(n, d))
    } else {
        Some(Exp::from_integer(s.parse().ok()?))
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Inf => write!(f, "inf"),
            Gamma::Fin(r) => write!(f, "{}", fmt_exp(r)),
        }
    }
}

impl FromStr for Gamma {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        if t == "inf" || t == "∞" {
            return Ok(Gamma::Inf);
        }
        parse_exp(t).map(Gamma::Fin).ok_or_else(|| format!("bad rational: {s}"))
    }
}

/// Least common multiple of denominators, at least 1.
pub fn common_denom<'a>(it: impl IntoIterator<Item = &'a Exp>) -> i64 {
    it.into_iter().fold(1i64, |acc, r| num::integer::lcm(acc, *r.denom()))
}

pub fn floor_exp(r: &Exp) -> i64 {
    r.floor().to_integer()
}

pub fn exp_is_positive(r: &Exp) -> bool {
    r.is_positive()
}

pub fn exp_one() -> Exp {
    Exp::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_inf() {
        assert!(Gamma::Inf > Gamma::int(1000));
        assert_eq!(Gamma::int(2) + Gamma::Inf, Gamma::Inf);
        assert_eq!(Gamma::frac(2, 4), Gamma::frac(1, 2));
        assert_eq!(Gamma::frac(3, -6).to_string(), "-1/2");
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["0", "-3", "3/2", "inf"] {
            assert_eq!(s.parse::<Gamma>().unwrap().to_string(), s);
        }
        assert!("1/0".parse::<Gamma>().is_err());
    }
}
