//! Riso-triviality dimension of a tuple of plane curves and finite point sets on a ball.
//!
//! After recentering f(c + t^λ·(X, Y)), the residue decides the coarse shape: no zeros gives
//! 2, and anything other than parallel residue lines (or one cone of lines for open balls)
//! gives 0. Otherwise Z ∩ B is a union of graphs with a common residue slope, and it is
//! 1-trivial exactly when no two of them meet and none folds inside the ball. Those events
//! are roots of a discriminant of a generic linear projection, which are counted in the
//! domain with the Newton polygon.

use crate::ball::{Ball, BallKind};
use crate::coeff::Coeff;
use crate::curve::CurvePoly;
use crate::error::{Result, RisoError};
use crate::expr::{parse_point, split_top};
use crate::field::Field;
use crate::mpoly::MPoly;
use crate::point::Point;
use crate::spoly::SPoly;

/// One entry of a tuple Z = (Z₁, …, Z_ℓ).
#[derive(Clone, Debug, PartialEq)]
pub enum Member {
    Curve(CurvePoly),
    Points(Vec<Point>),
}

impl Member {
    /// A polynomial in x, y, or a finite set `{(a,b), (c,d)}`.
    pub fn parse(src: &str) -> Result<Member> {
        let s = src.trim();
        if let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let pts = split_top(inner)
                .iter()
                .filter(|p| !p.trim().is_empty())
                .map(|p| parse_point(p))
                .collect::<Result<Vec<_>>>()?;
            if pts.iter().any(|p| p.dim() != 2) {
                return Err(RisoError::InvalidInput(format!("points of `{src}` must lie in K^2")));
            }
            return Ok(Member::Points(pts));
        }
        Ok(Member::Curve(CurvePoly::parse(s)?))
    }

    pub fn render(&self) -> String {
        match self {
            Member::Curve(c) => c.render(),
            Member::Points(ps) => format!("{{{}}}", ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")),
        }
    }
}

/// Squarefree product of all curve members, if there are any.
pub fn curve_product(members: &[Member]) -> Option<SPoly> {
    let mut prod: Option<SPoly> = None;
    for m in members {
        if let Member::Curve(c) = m {
            prod = Some(match prod {
                None => c.poly.clone(),
                Some(p) => p.mul(&c.poly),
            });
        }
    }
    let p = prod?;
    let c = CurvePoly { poly: p, names: ["x".into(), "y".into()], squarefree: false };
    Some(c.radical().0)
}

pub fn member_points(members: &[Member]) -> Vec<Point> {
    members
        .iter()
        .flat_map(|m| match m {
            Member::Points(ps) => ps.clone(),
            Member::Curve(_) => vec![],
        })
        .collect()
}

/// Lowest-degree homogeneous part.
fn lowest_part(p: &MPoly) -> MPoly {
    let d = p.terms.keys().map(|m| m.iter().sum::<u32>()).min().unwrap_or(0);
    MPoly::from_terms(p.n, p.terms.iter().filter(|(m, _)| m.iter().sum::<u32>() == d).map(|(m, c)| (m.clone(), c.clone())))
}

/// Whether P is a polynomial in one linear form: `Some((false, s))` for P(sX + Y),
/// `Some((true, 0))` for P(X).
fn line_form(p: &MPoly) -> Option<(bool, Coeff)> {
    let d = p.total_degree();
    if d <= 0 {
        return None;
    }
    let du = d as u32;
    let cy = p.terms.get(&vec![0, du]).cloned().unwrap_or_else(Coeff::zero);
    if cy.is_zero() {
        return if p.deriv(1).is_zero() { Some((true, Coeff::zero())) } else { None };
    }
    let cxy = p.terms.get(&vec![1, du - 1]).cloned().unwrap_or_else(Coeff::zero);
    let s = cxy.div(&cy.mul(&Coeff::int(d)));
    let flow = p.deriv(0).sub(&p.deriv(1).scale(&s));
    if flow.is_zero() {
        Some((false, s))
    } else {
        None
    }
}

fn candidate_shears() -> impl Iterator<Item = i64> {
    (0..).map(|i: i64| if i % 2 == 0 { -(i / 2) } else { (i + 1) / 2 })
}

/// Number of roots S of Σ r_k(s)·S^k with v(S) ≥ 0 (closed) or v(S) > 0 (open), where
/// t = s^e.
fn count_roots(r: &MPoly, kind: BallKind) -> usize {
    let cs = r.coeffs_in(0);
    let vals: Vec<Option<i64>> =
        cs.iter().map(|c| if c.is_zero() { None } else { Some(c.min_deg_in(2)) }).collect();
    let best = vals.iter().flatten().min().copied();
    let Some(best) = best else { return 0 };
    let argmins: Vec<usize> = vals.iter().enumerate().filter(|(_, v)| **v == Some(best)).map(|(k, _)| k).collect();
    match kind {
        BallKind::Closed => *argmins.last().unwrap(),
        BallKind::Open => argmins[0],
    }
}

/// Whether the graphs of G(X, Y) = 0 over the X-projection of the unit domain stay disjoint
/// and unramified. `s_res` is the common residue slope parameter.
fn collision_free(g: &SPoly, kind: BallKind, s_res: &Coeff) -> Result<bool> {
    let sf = g.to_sform();
    let mut q = sf.poly;
    let content = q.content_in(1);
    if !content.is_constant() {
        q = q.exact_div(&content).expect("content divides");
    }
    if q.deg_in(1) <= 0 {
        return Ok(true);
    }
    let dxy = q.terms.keys().map(|m| m[0] + m[1]).max().unwrap_or(0) as i64;
    let top = MPoly::from_terms(3, q.terms.iter().filter(|(m, _)| (m[0] + m[1]) as i64 == dxy).map(|(m, c)| (m.clone(), c.clone())));
    let needed = (dxy * (dxy - 1) + 1) as usize;
    let mut tried = 0usize;
    for c in candidate_shears().take(needed + 8 * dxy as usize + 8) {
        if tried >= needed {
            break;
        }
        let cc = Coeff::int(c);
        if Coeff::one().sub(&s_res.mul(&cc)).is_zero() {
            continue;
        }
        let tv = top.eval_var(0, &cc.neg()).eval_var(1, &Coeff::one());
        if tv.is_zero() {
            continue;
        }
        tried += 1;
        // X = S − c·Y
        let shear = MPoly::var(3, 0).sub(&MPoly::var(3, 1).scale(&cc));
        let qc = q.subst(0, &shear);
        let disc = qc.resultant(&qc.deriv(1), 1);
        if disc.is_zero() {
            return Err(RisoError::UnsupportedConfiguration(
                "projection discriminant vanishes identically on the ball".into(),
            ));
        }
        if count_roots(&disc, kind) == 0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// rtrdim_B(Z) ∈ {0, 1, 2}.
pub fn rtrdim_on_ball(members: &[Member], ball: &Ball) -> Result<u8> {
    if ball.dim() != 2 {
        return Err(RisoError::InvalidInput("rtrdim is implemented for balls in K^2".into()));
    }
    for p in member_points(members) {
        if ball.contains(&p)? {
            return Ok(0);
        }
    }
    let Some(f) = curve_product(members) else { return Ok(2) };
    let big_f = f.recenter(&ball.center, ball.radius);
    let (m, fbar) = big_f.residue();
    let form = match ball.kind {
        BallKind::Closed => {
            if fbar.is_constant() {
                return Ok(2);
            }
            line_form(&fbar)
        }
        BallKind::Open => {
            if !fbar.constant_term().is_zero() {
                return Ok(2);
            }
            line_form(&lowest_part(&fbar))
        }
    };
    let Some((swap, s)) = form else { return Ok(0) };
    let mut g = big_f.scale(&crate::series::PuiseuxSeries::t_pow(-m));
    if swap {
        g = g.permute(&[1, 0]);
    }
    Ok(if collision_free(&g, ball.kind, &s)? { 1 } else { 0 })
}

/// Convenience wrapper for a single curve.
pub fn rtrdim_curve(f: &CurvePoly, ball: &Ball) -> Result<u8> {
    rtrdim_on_ball(&[Member::Curve(f.clone())], ball)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Member {
        Member::parse(s).unwrap()
    }
    fn b(s: &str) -> Ball {
        Ball::parse(s).unwrap()
    }

    #[test]
    fn cusp_values() {
        let z = [m("y^2 - x^3")];
        for l in ["-2", "0", "3"] {
            assert_eq!(rtrdim_on_ball(&z, &b(&format!("B((0,0),>{l})"))).unwrap(), 0, "lambda {l}");
        }
        assert_eq!(rtrdim_on_ball(&z, &b("B((t^4,0),>4)")).unwrap(), 1);
        assert_eq!(rtrdim_on_ball(&z, &b("B((1,0),>0)")).unwrap(), 2);
        assert_eq!(rtrdim_on_ball(&z, &b("B((1,0),>=1)")).unwrap(), 2);
    }

    #[test]
    fn tuple_of_lines() {
        let ball = b("B((0,0),>0)");
        assert_eq!(rtrdim_on_ball(&[m("y")], &ball).unwrap(), 1);
        assert_eq!(rtrdim_on_ball(&[m("y - t*x")], &ball).unwrap(), 1);
        assert_eq!(rtrdim_on_ball(&[m("y"), m("y - t*x")], &ball).unwrap(), 0);
    }

    #[test]
    fn points_and_hyperbolas() {
        assert_eq!(rtrdim_on_ball(&[m("y"), m("{(0,0)}")], &b("B((0,0),>0)")).unwrap(), 0);
        assert_eq!(rtrdim_on_ball(&[m("y"), m("{(1,0)}")], &b("B((0,0),>0)")).unwrap(), 1);
        let h = [m("x*y - 1")];
        assert_eq!(rtrdim_on_ball(&h, &b("B((0,0),>=0)")).unwrap(), 0);
        assert_eq!(rtrdim_on_ball(&h, &b("B((1,1),>0)")).unwrap(), 1);
        assert_eq!(rtrdim_on_ball(&h, &b("B((0,0),>0)")).unwrap(), 2);
        let h2 = [m("x*y - t")];
        assert_eq!(rtrdim_on_ball(&h2, &b("B((0,0),>=1/2)")).unwrap(), 0);
        assert_eq!(rtrdim_on_ball(&h2, &b("B((t^(1/2),t^(1/2)),>1/2)")).unwrap(), 1);
    }

    #[test]
    fn folds_and_parallel_lines() {
        assert_eq!(rtrdim_on_ball(&[m("y^2 - t*x")], &b("B((0,0),>=0)")).unwrap(), 0);
        assert_eq!(rtrdim_on_ball(&[m("x*(x - 1)")], &b("B((0,0),>=0)")).unwrap(), 1);
        assert_eq!(rtrdim_on_ball(&[m("y*(y - t)")], &b("B((0,0),>=0)")).unwrap(), 1);
        assert_eq!(rtrdim_on_ball(&[m("y - x^2")], &b("B((0,0),>=0)")).unwrap(), 0);
        assert_eq!(rtrdim_on_ball(&[m("y - x^2")], &b("B((0,0),>0)")).unwrap(), 1);
    }
}
