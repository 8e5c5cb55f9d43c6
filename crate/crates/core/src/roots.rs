//! Roots in K of univariate polynomials with Puiseux-series coefficients, by Newton polygons.

use std::sync::Arc;

use crate::coeff::{adjoin_root, compose_embeddings, factor_c, CPoly, Coeff, Embedding, NumberField};
use crate::error::{Result, RisoError};
use crate::field::Field;
use crate::gamma::{Exp, Gamma};
use crate::series::PuiseuxSeries;

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: PuiseuxSeries,
    pub mult: usize,
}

#[derive(Clone, Debug)]
pub struct RootSet {
    /// Field containing all root coefficients.
    pub field: Option<Arc<NumberField>>,
    /// Embedding of the input field into `field`, if an extension was needed.
    pub ext: Option<Embedding>,
    pub roots: Vec<Root>,
}

enum Step {
    Done,
    Extend(CPoly),
}

/// Upper-left Newton polygon edges of points (k, v_k): (i, j, slope γ) meaning roots of valuation γ.
pub fn newton_edges(points: &[(usize, Exp)]) -> Vec<(usize, usize, Exp)> {
    let mut hull: Vec<(usize, Exp)> = vec![];
    for &(k, v) in points {
        while hull.len() >= 2 {
            let (k1, v1) = hull[hull.len() - 2];
            let (k2, v2) = hull[hull.len() - 1];
            // keep lower convex hull: drop middle point when it lies on or above segment
            let lhs = (v2 - v1) * Exp::from_integer((k - k1) as i64);
            let rhs = (v - v1) * Exp::from_integer((k2 - k1) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((k, v));
    }
    hull.windows(2)
        .map(|w| {
            let (i, vi) = w[0];
            let (j, vj) = w[1];
            (i, j, (vi - vj) / Exp::from_integer((j - i) as i64))
        })
        .collect()
}

/// q(y + c).
pub fn taylor_shift(q: &[PuiseuxSeries], c: &PuiseuxSeries) -> Vec<PuiseuxSeries> {
    let mut acc: Vec<PuiseuxSeries> = vec![];
    for a in q.iter().rev() {
        // acc ← acc·(y + c) + a
        let mut next = vec![PuiseuxSeries::zero(); acc.len() + 1];
        for (k, b) in acc.iter().enumerate() {
            next[k + 1] = next[k + 1].add(b);
            next[k] = next[k].add(&b.mul(c));
        }
        next[0] = next[0].add(a);
        acc = next;
    }
    while acc.last().map_or(false, |s| s.is_exact_zero()) {
        acc.pop();
    }
    acc
}

fn expand(
    q: &[PuiseuxSeries],
    prefix: &PuiseuxSeries,
    base: Option<Exp>,
    floor: Option<(Exp, bool)>,
    omega: Exp,
    field: Option<&Arc<NumberField>>,
    out: &mut Vec<Root>,
) -> Result<Step> {
    let k0 = q.iter().position(|c| !c.is_exact_zero()).unwrap_or(q.len());
    if k0 > 0 && k0 < q.len() {
        out.push(Root { value: prefix.clone(), mult: k0 });
    }
    let q = &q[k0..];
    if q.len() <= 1 {
        return Ok(Step::Done);
    }
    let mut pts = vec![];
    for (k, c) in q.iter().enumerate() {
        if c.is_exact_zero() {
            continue;
        }
        match c.valuation_lb() {
            Gamma::Fin(v) => pts.push((k, v)),
            Gamma::Inf => {}
        }
    }
    let mut beyond = 0usize;
    for (i, j, gamma) in newton_edges(&pts) {
        if base.map_or(false, |b| gamma <= b) {
            continue;
        }
        if floor.map_or(false, |(f, strict)| gamma < f || (strict && gamma == f)) {
            continue;
        }
        if gamma >= omega {
            beyond += j - i;
            continue;
        }
        if q[i].support_empty() || q[j].support_empty() {
            return Err(RisoError::InsufficientPrecision(format!(
                "root expansion needs a coefficient known only below t^{}",
                q[i].omega().min(q[j].omega())
            )));
        }
        let vi = pts.iter().find(|p| p.0 == i).unwrap().1;
        let mut phi = vec![Coeff::zero(); j - i + 1];
        for &(k, v) in &pts {
            if k < i || k > j {
                continue;
            }
            if v == vi - gamma * Exp::from_integer((k - i) as i64) {
                phi[k - i] = q[k].leading_coeff();
            }
        }
        let phi = CPoly::new(phi);
        for (h, m) in factor_c(&phi, field) {
            if h.deg() > 1 {
                return Ok(Step::Extend(h));
            }
            let z = h.coeff(0).neg();
            let c = PuiseuxSeries::monomial(z, gamma);
            let q2 = taylor_shift(q, &c);
            if m == 1 && !q2.first().map_or(true, |a| a.is_exact_zero()) {
                let tail = newton_tail(&q2, gamma, omega)?;
                out.push(Root { value: prefix.add(&c).add(&tail), mult: 1 });
                continue;
            }
            if let Step::Extend(h) = expand(&q2, &prefix.add(&c), Some(gamma), None, omega, field, out)? {
                return Ok(Step::Extend(h));
            }
        }
    }
    if beyond > 0 {
        out.push(Root { value: prefix.truncate(Gamma::Fin(omega)), mult: beyond });
    }
    Ok(Step::Done)
}

fn horner(q: &[PuiseuxSeries], y: &PuiseuxSeries, bound: Gamma) -> PuiseuxSeries {
    let mut acc = PuiseuxSeries::zero();
    for a in q.iter().rev() {
        acc = acc.mul_below(y, bound).add(a).truncate(bound);
    }
    acc
}

/// The root of q of valuation above γ, when it is the only one: every other root has valuation
/// at most γ, so Newton steps from 0 converge, doubling the excess of the correct order over γ.
fn newton_tail(q: &[PuiseuxSeries], gamma: Exp, omega: Exp) -> Result<PuiseuxSeries> {
    let dq: Vec<PuiseuxSeries> =
        q.iter().enumerate().skip(1).map(|(k, a)| a.scale(&Coeff::int(k as i64))).collect();
    let w = match dq[0].valuation()? {
        Gamma::Fin(w) => w,
        Gamma::Inf => return Err(RisoError::InvalidInput("simple root with vanishing derivative".into())),
    };
    let n = q.iter().fold(*gamma.denom(), |n, a| num::integer::lcm(n, a.ramification()));
    let target = Gamma::Fin(omega);
    let mut y = PuiseuxSeries::zero();
    // y agrees with the root below t^known
    let mut known = gamma + Exp::new(1, n);
    while known < omega {
        let next = (known + known - gamma).min(omega);
        let val = horner(q, &y, Gamma::Fin(next + w));
        if val.is_exact_zero() {
            return Ok(y);
        }
        let der = horner(&dq, &y, Gamma::Fin(next - known + w));
        let d = match val.valuation_lb() {
            Gamma::Fin(v) if !val.support_empty() && v - w < next => val.mul_below(&der.invert(next - v)?, Gamma::Fin(next)),
            _ => PuiseuxSeries::zero_to(val.omega() - w),
        };
        if let Gamma::Fin(reached) = d.omega() {
            if reached < next {
                if reached > known {
                    y = y.sub(&d).truncate(d.omega()).as_exact();
                    known = reached;
                }
                break;
            }
        }
        y = y.sub(&d).truncate(Gamma::Fin(next)).as_exact();
        known = next;
    }
    let known = target.min(Gamma::Fin(known));
    if known <= Gamma::Fin(gamma) {
        return Err(RisoError::InsufficientPrecision(format!("root expansion certified only below t^{known}")));
    }
    if y.num_terms() <= 16 && q.iter().all(|a| a.is_exact()) && horner(q, &y, Gamma::Inf).is_exact_zero() {
        return Ok(y);
    }
    Ok(PuiseuxSeries::from_terms(y.terms().map(|(e, c)| (*e, c.clone())), known))
}

/// All roots of Σ p_k y^k in K, each known below t^ω (exact when the expansion terminates).
/// The coefficient field is extended as needed, up to degree `bound`.
pub fn puiseux_roots(
    p: &[PuiseuxSeries],
    omega: Exp,
    ctx: Option<&Arc<NumberField>>,
    bound: usize,
) -> Result<RootSet> {
    puiseux_roots_above(p, omega, ctx, bound, None)
}

/// As `puiseux_roots`, keeping only roots of valuation above `floor` (or equal to it when not strict).
/// Zero roots are always kept.
pub fn puiseux_roots_above(
    p: &[PuiseuxSeries],
    omega: Exp,
    ctx: Option<&Arc<NumberField>>,
    bound: usize,
    floor: Option<(Exp, bool)>,
) -> Result<RootSet> {
    let mut poly: Vec<PuiseuxSeries> = p.to_vec();
    while poly.last().map_or(false, |s| s.is_exact_zero()) {
        poly.pop();
    }
    if poly.is_empty() {
        return Err(RisoError::InvalidInput("roots of the zero polynomial".into()));
    }
    let mut field = ctx.cloned();
    let mut ext: Option<Embedding> = None;
    loop {
        let mut out = vec![];
        match expand(&poly, &PuiseuxSeries::zero(), None, floor, omega, field.as_ref(), &mut out)? {
            Step::Done => {
                out.sort_by_key(|r| r.value.to_string());
                return Ok(RootSet { field, ext, roots: out });
            }
            Step::Extend(h) => {
                let (e, _) = adjoin_root(&h, field.as_ref(), bound)?;
                poly = poly.iter().map(|c| c.embed(&e)).collect();
                ext = Some(match ext {
                    None => e.clone(),
                    Some(prev) => compose_embeddings(&prev, &e),
                });
                field = Some(e.to.clone());
            }
        }
    }
}
