//! Valuative balls B(a, ≥λ) and B(a, >λ) in Kⁿ.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Result, RisoError};
use crate::expr::{parse_point, split_top};
use crate::gamma::{fmt_exp, parse_exp, Exp, Gamma};
use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BallKind {
    Closed,
    Open,
}

impl BallKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BallKind::Closed => "closed",
            BallKind::Open => "open",
        }
    }
}

/// Always stored in canonical form: the center keeps only the terms that matter
/// (exponents below λ for closed balls, up to λ for open ones) and is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: Exp,
    pub kind: BallKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Equal,
    /// The first ball is strictly inside the second.
    FirstInSecond,
    /// The second ball is strictly inside the first.
    SecondInFirst,
    Disjoint,
}

impl Ball {
    pub fn new(center: Point, radius: Exp, kind: BallKind) -> Result<Ball> {
        let need = Gamma::Fin(radius);
        let ok = match kind {
            BallKind::Closed => center.omega() >= need,
            BallKind::Open => center.omega() > need,
        };
        if !ok {
            return Err(RisoError::InsufficientPrecision(format!(
                "center known only to t^{}, ball radius {}",
                center.omega(),
                fmt_exp(&radius)
            )));
        }
        let coords = center
            .coords
            .iter()
            .map(|c| match kind {
                BallKind::Closed => c.head_below(radius),
                BallKind::Open => c.head_upto(radius),
            })
            .collect();
        Ok(Ball { center: Point::new(coords), radius, kind })
    }

    pub fn closed(center: Point, radius: Exp) -> Result<Ball> {
        Self::new(center, radius, BallKind::Closed)
    }

    pub fn open(center: Point, radius: Exp) -> Result<Ball> {
        Self::new(center, radius, BallKind::Open)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn is_open(&self) -> bool {
        self.kind == BallKind::Open
    }

    /// Re-canonicalizes (idempotent).
    pub fn canonical(&self) -> Result<Ball> {
        Self::new(self.center.clone(), self.radius, self.kind)
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        p.sub(&self.center).valuation_at_least(self.radius, self.kind == BallKind::Open)
    }

    /// Whether `o ⊆ self`.
    pub fn includes(&self, o: &Ball) -> Result<bool> {
        let size_ok = o.radius > self.radius
            || (o.radius == self.radius && (self.kind == BallKind::Closed || o.kind == BallKind::Open));
        if !size_ok {
            return Ok(false);
        }
        self.contains(&o.center)
    }

    pub fn relate(&self, o: &Ball) -> Result<Relation> {
        let a = o.includes(self)?;
        let b = self.includes(o)?;
        Ok(match (a, b) {
            (true, true) => Relation::Equal,
            (true, false) => Relation::FirstInSecond,
            (false, true) => Relation::SecondInFirst,
            (false, false) => Relation::Disjoint,
        })
    }

    pub fn to_text(&self) -> String {
        let op = if self.kind == BallKind::Closed { ">=" } else { ">" };
        format!("B({}, {}{})", self.center, op, fmt_exp(&self.radius))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "center": self.center.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "radius": fmt_exp(&self.radius),
            "kind": self.kind.as_str(),
        })
    }

    /// Parses `B((c1,...,cn), >=λ)` or `B(..., >λ)`.
    pub fn parse(src: &str) -> Result<Ball> {
        let s = src.trim();
        let bad = || RisoError::InvalidInput(format!("malformed ball `{src}`; expected B((c1,...,cn), >=p/q)"));
        let inner = s.strip_prefix("B(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let parts = split_top(inner);
        if parts.len() != 2 {
            return Err(bad());
        }
        let rel = parts[1].trim();
        let (kind, num) = if let Some(r) = rel.strip_prefix(">=").or_else(|| rel.strip_prefix('≥')) {
            (BallKind::Closed, r)
        } else if let Some(r) = rel.strip_prefix('>') {
            (BallKind::Open, r)
        } else {
            return Err(bad());
        };
        let radius = parse_exp(num.trim().trim_start_matches('(').trim_end_matches(')')).ok_or_else(bad)?;
        let center = parse_point(&parts[0])?;
        Ball::new(center, radius, kind)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Smallest closed ball containing both points.
pub fn join(p1: &Point, p2: &Point) -> Result<Ball> {
    match p1.sub(p2).valuation()? {
        Gamma::Inf => Err(RisoError::InvalidInput("join of equal points".into())),
        Gamma::Fin(r) => Ball::closed(p1.clone(), r),
    }
}

/// The minimal member of a finite nested chain.
pub fn resolve_chain(chain: &[Ball]) -> Result<Ball> {
    let mut best = chain.first().ok_or_else(|| RisoError::InvalidInput("empty chain".into()))?.clone();
    for b in &chain[1..] {
        match best.relate(b)? {
            Relation::Equal | Relation::FirstInSecond => {}
            Relation::SecondInFirst => best = b.clone(),
            Relation::Disjoint => {
                return Err(RisoError::NotNested(format!("{} and {} are disjoint", best, b)));
            }
        }
    }
    for b in chain {
        if !b.includes(&best)? {
            return Err(RisoError::NotNested(format!("{b} does not contain {best}")));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_series;

    fn pt(s: &[&str]) -> Point {
        Point::new(s.iter().map(|x| parse_series(x).unwrap()).collect())
    }
    fn q(n: i64, d: i64) -> Exp {
        Exp::new(n, d)
    }

    #[test]
    fn membership() {
        let b = Ball::closed(pt(&["0"]), q(2, 1)).unwrap();
        assert!(b.contains(&pt(&["t^2"])).unwrap());
        let o = Ball::open(pt(&["0"]), q(2, 1)).unwrap();
        assert!(!o.contains(&pt(&["t^2"])).unwrap());
        let m2 = Ball::open(pt(&["0", "0"]), q(0, 1)).unwrap();
        assert!(m2.contains(&pt(&["t^(1/2)", "t"])).unwrap());
    }

    #[test]
    fn relations() {
        let b1 = Ball::closed(pt(&["0"]), q(2, 1)).unwrap();
        let b2 = Ball::closed(pt(&["t^2"]), q(3, 1)).unwrap();
        assert_eq!(b1.relate(&b2).unwrap(), Relation::SecondInFirst);
        let c1 = Ball::closed(pt(&["0"]), q(1, 1)).unwrap();
        let c2 = Ball::closed(pt(&["1"]), q(1, 1)).unwrap();
        assert_eq!(c1.relate(&c2).unwrap(), Relation::Disjoint);
        let d1 = Ball::closed(pt(&["0"]), q(0, 1)).unwrap();
        let d2 = Ball::open(pt(&["t"]), q(0, 1)).unwrap();
        assert_eq!(d1.relate(&d2).unwrap(), Relation::SecondInFirst);
    }

    #[test]
    fn joins_and_chains() {
        assert_eq!(join(&pt(&["0"]), &pt(&["t^2"])).unwrap().radius, q(2, 1));
        let j = join(&pt(&["1"]), &pt(&["1 + t^3"])).unwrap();
        assert_eq!(j.to_text(), "B((1), >=3)");
        assert_eq!(join(&pt(&["0", "0"]), &pt(&["t^4", "t^6"])).unwrap().radius, q(4, 1));
        let chain = vec![
            Ball::closed(pt(&["0"]), q(0, 1)).unwrap(),
            Ball::closed(pt(&["t^(1/2)"]), q(3, 4)).unwrap(),
        ];
        assert_eq!(resolve_chain(&chain).unwrap(), chain[1]);
        let bad = vec![chain[1].clone(), Ball::closed(pt(&["1"]), q(1, 1)).unwrap()];
        assert!(matches!(resolve_chain(&bad), Err(RisoError::NotNested(_))));
    }

    #[test]
    fn text_roundtrip() {
        let b = Ball::parse("B((t^4,0),>4)").unwrap();
        assert_eq!(b.to_text(), "B((t^4,0), >4)");
        assert_eq!(Ball::parse(&b.to_text()).unwrap(), b);
        let c = Ball::parse("B((1 + t + t^5, 0), >=2)").unwrap();
        assert_eq!(c.to_text(), "B((1 + t,0), >=2)");
        assert_eq!(c.to_json()["kind"], "closed");
    }
}
