//! Plane curves over K: branch expansions at a point, strict slopes, contact exponents and
//! singular points.

use std::fmt;
use std::sync::Arc;

use crate::coeff::{adjoin_root, common_field, compose_embeddings, factor_c, CPoly, Coeff, Embedding, NumberField};
use crate::error::{Result, RisoError};
use crate::expr::parse_poly;
use crate::field::Field;
use crate::gamma::{Exp, Gamma};
use crate::mpoly::MPoly;
use crate::point::Point;
use crate::roots::{puiseux_roots_above, Root};
use crate::series::PuiseuxSeries;
use crate::spoly::SPoly;

/// Why a computation in a fixed coefficient field stopped.
#[derive(Debug)]
pub enum Halt {
    Err(RisoError),
    /// The field must grow; the embedding maps the current field into the larger one.
    Extend(Embedding),
}

impl From<RisoError> for Halt {
    fn from(e: RisoError) -> Self {
        Halt::Err(e)
    }
}

pub type Step<T> = std::result::Result<T, Halt>;

/// The coefficient field a computation currently runs in, with the embedding of the
/// starting field into it.
#[derive(Clone, Debug)]
pub struct FieldCtx {
    pub field: Option<Arc<NumberField>>,
    pub emb: Option<Embedding>,
    pub bound: usize,
}

impl FieldCtx {
    pub fn new(field: Option<Arc<NumberField>>, bound: usize) -> Self {
        FieldCtx { field, emb: None, bound }
    }

    pub fn lift_coeff(&self, c: &Coeff) -> Coeff {
        self.emb.as_ref().map_or_else(|| c.clone(), |e| c.embed(e))
    }

    pub fn lift_series(&self, s: &PuiseuxSeries) -> PuiseuxSeries {
        self.emb.as_ref().map_or_else(|| s.clone(), |e| s.embed(e))
    }

    pub fn lift_point(&self, p: &Point) -> Point {
        self.emb.as_ref().map_or_else(|| p.clone(), |e| p.embed(e))
    }

    pub fn lift_spoly(&self, f: &SPoly) -> SPoly {
        self.emb.as_ref().map_or_else(|| f.clone(), |e| f.embed(e))
    }

    /// Roots in K of a polynomial with coefficients in the current field.
    pub fn roots(&self, p: &[PuiseuxSeries], omega: Exp) -> Step<Vec<Root>> {
        self.roots_above(p, omega, None)
    }

    /// Roots of valuation above `floor` (or equal to it when not strict).
    pub fn roots_above(&self, p: &[PuiseuxSeries], omega: Exp, floor: Option<(Exp, bool)>) -> Step<Vec<Root>> {
        let rs = puiseux_roots_above(p, omega, self.field.as_ref(), self.bound, floor)?;
        match rs.ext {
            Some(e) => Err(Halt::Extend(e)),
            None => Ok(rs.roots),
        }
    }

    /// Roots in the residue field of an exact univariate polynomial.
    pub fn croots(&self, g: &CPoly) -> Step<Vec<(Coeff, usize)>> {
        if g.deg() <= 0 {
            return Ok(vec![]);
        }
        let mut out = vec![];
        for (h, m) in factor_c(g, self.field.as_ref()) {
            if h.deg() > 1 {
                let (e, _) = adjoin_root(&h, self.field.as_ref(), self.bound)?;
                return Err(Halt::Extend(e));
            }
            out.push((h.coeff(0).neg(), m));
        }
        Ok(out)
    }
}

/// Runs `body` in growing coefficient fields until it finishes without asking for an extension.
pub fn drive<T>(base: Option<Arc<NumberField>>, bound: usize, mut body: impl FnMut(&FieldCtx) -> Step<T>) -> Result<(T, FieldCtx)> {
    let mut ctx = FieldCtx::new(base, bound);
    loop {
        match body(&ctx) {
            Ok(v) => return Ok((v, ctx)),
            Err(Halt::Err(e)) => return Err(e),
            Err(Halt::Extend(e)) => {
                ctx.emb = Some(match &ctx.emb {
                    None => e.clone(),
                    Some(prev) => compose_embeddings(prev, &e),
                });
                ctx.field = Some(e.to.clone());
            }
        }
    }
}

/// Common number field of the coordinates of some points.
pub fn points_field<'a>(pts: impl IntoIterator<Item = &'a Point>) -> Option<Arc<NumberField>> {
    let cs: Vec<Coeff> =
        pts.into_iter().flat_map(|p| p.coords.iter().flat_map(|c| c.terms().map(|(_, a)| a.clone()).collect::<Vec<_>>())).collect();
    common_field(cs.iter())
}

/// A plane curve f(x, y) = 0 with Puiseux-series coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoly {
    pub poly: SPoly,
    pub names: [String; 2],
    pub squarefree: bool,
}

impl CurvePoly {
    pub fn new(poly: SPoly) -> Result<Self> {
        if poly.n != 2 {
            return Err(RisoError::InvalidInput("a plane curve needs exactly two variables".into()));
        }
        if poly.is_zero() {
            return Err(RisoError::InvalidInput("the zero polynomial does not define a curve".into()));
        }
        let mut c = CurvePoly { poly, names: ["x".into(), "y".into()], squarefree: false };
        c.squarefree = c.radical().0.total_degree() == c.total_degree();
        Ok(c)
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::new(parse_poly(src, &["x", "y"])?)
    }

    pub fn total_degree(&self) -> i64 {
        self.poly.total_degree()
    }

    /// Squarefree part (same zero set), with a notice when it differs from the input.
    pub fn radical(&self) -> (SPoly, Option<String>) {
        let sf = self.poly.to_sform();
        let r = sf.poly.squarefree_in(&[0, 1]);
        let d0 = self.poly.total_degree();
        let rr = SPoly::from_sform(&r, sf.e);
        if rr.total_degree() == d0 {
            return (self.poly.clone(), None);
        }
        let note = format!("replaced {} by its squarefree part {}", self.render(), rr.fmt_with(&["x", "y"]));
        (rr, Some(note))
    }

    /// The squarefree curve with the same zero set.
    pub fn squarefree_part(&self) -> (CurvePoly, Option<String>) {
        let (p, note) = self.radical();
        (CurvePoly { poly: p, names: self.names.clone(), squarefree: true }, note)
    }

    pub fn is_t_free(&self) -> bool {
        self.poly.is_t_free()
    }

    pub fn swapped(&self) -> CurvePoly {
        CurvePoly { poly: self.poly.permute(&[1, 0]), names: self.names.clone(), squarefree: self.squarefree }
    }

    pub fn render(&self) -> String {
        self.poly.fmt_with(&["x", "y"])
    }

    pub fn eval(&self, p: &Point) -> PuiseuxSeries {
        self.poly.eval(p)
    }
}

impl fmt::Display for CurvePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Exact polynomial for a t-free series polynomial.
pub fn tfree_mpoly(f: &SPoly) -> Option<MPoly> {
    if !f.is_t_free() {
        return None;
    }
    let zero = Exp::from_integer(0);
    Some(MPoly::from_terms(f.n, f.terms.iter().map(|(m, c)| (m.clone(), c.coeff(&zero)))))
}

fn constant_of(s: &PuiseuxSeries) -> Option<Coeff> {
    let zero = Exp::from_integer(0);
    if !s.is_exact() || s.terms().any(|(e, _)| *e != zero) {
        return None;
    }
    Some(s.coeff(&zero))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Orientation {
    /// y − c₂ = g(x − c₁).
    OverX,
    /// x − c₁ = g(y − c₂).
    OverY,
}

/// One local branch of a curve at `center`, as a graph over one coordinate. In `series` the
/// variable t stands for the offset of that coordinate from the center.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub center: Point,
    pub orientation: Orientation,
    pub series: PuiseuxSeries,
    pub mult: usize,
}

impl Branch {
    pub fn render(&self) -> String {
        let (dep, indep, c_dep, c_ind) = match self.orientation {
            Orientation::OverX => ("y", "x", &self.center.coords[1], &self.center.coords[0]),
            Orientation::OverY => ("x", "y", &self.center.coords[0], &self.center.coords[1]),
        };
        let var = if c_ind.is_exact_zero() { indep.to_string() } else { format!("({indep} - ({c_ind}))") };
        let body = self.series.render_in(&var);
        if c_dep.is_exact_zero() {
            format!("{dep} = {body}")
        } else if let Some(rest) = body.strip_prefix('-') {
            format!("{dep} = {c_dep} - {rest}")
        } else {
            format!("{dep} = {c_dep} + {body}")
        }
    }

    /// f along the branch, as a series in the branch parameter.
    pub fn residual(&self, f: &CurvePoly) -> PuiseuxSeries {
        let t = PuiseuxSeries::t_pow(Exp::from_integer(1));
        let (c1, c2) = (&self.center.coords[0], &self.center.coords[1]);
        let p = match self.orientation {
            Orientation::OverX => Point::new(vec![c1.add(&t), c2.add(&self.series)]),
            Orientation::OverY => Point::new(vec![c1.add(&self.series), c2.add(&t)]),
        };
        f.eval(&p)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[derive(Clone, Debug)]
pub struct BranchSet {
    pub branches: Vec<Branch>,
    pub field: Option<Arc<NumberField>>,
}

fn series_in(p: &MPoly, var: usize) -> PuiseuxSeries {
    PuiseuxSeries::from_terms(
        p.terms.iter().map(|(m, c)| (Exp::from_integer(m[var] as i64), c.clone())),
        Gamma::Inf,
    )
}

fn require_squarefree(f: &CurvePoly) -> Result<()> {
    if !f.squarefree {
        return Err(RisoError::NotSquarefree(format!("{f}; pass its squarefree part")));
    }
    Ok(())
}

fn require_t_free(f: &CurvePoly, what: &str) -> Result<MPoly> {
    tfree_mpoly(&f.poly).ok_or_else(|| {
        RisoError::UnsupportedConfiguration(format!("{what} needs a curve with constant coefficients; {f} involves t"))
    })
}

/// All branches of f through `center`, expanded below t^ω: graphs over x for branches with a
/// non-vertical tangent, graphs over y for the rest.
pub fn newton_puiseux(f: &CurvePoly, center: &Point, omega: Exp, bound: usize) -> Result<BranchSet> {
    require_squarefree(f)?;
    let g0 = require_t_free(f, "branch expansion")?;
    if center.dim() != 2 {
        return Err(RisoError::InvalidInput("branch center must be a point of K^2".into()));
    }
    let one = Exp::from_integer(1);
    let ((branches, field), _) = drive(points_field([center]), bound, |ctx| {
        let c = ctx.lift_point(center);
        let cs: Vec<Coeff> = c
            .coords
            .iter()
            .map(|s| {
                constant_of(s).ok_or_else(|| {
                    RisoError::UnsupportedConfiguration(format!("branch center {c} must have constant coordinates"))
                })
            })
            .collect::<Result<_>>()?;
        let shift = |i: usize| {
            let mut v = MPoly::var(2, i);
            v = v.add(&MPoly::constant(2, cs[i].clone()));
            v
        };
        let g = g0.subst(0, &shift(0)).subst(1, &shift(1));
        if !g.constant_term().is_zero() {
            return Err(RisoError::InvalidInput(format!("{c} is not on the curve {f}")).into());
        }
        let mut out = vec![];
        let ycoeffs: Vec<PuiseuxSeries> = g.coeffs_in(1).iter().map(|p| series_in(p, 0)).collect();
        for r in ctx.roots_above(&ycoeffs, omega, Some((one, false)))? {
            if r.value.valuation_lb() >= Gamma::Fin(one) {
                out.push(Branch { center: c.clone(), orientation: Orientation::OverX, series: r.value, mult: r.mult });
            }
        }
        let xcoeffs: Vec<PuiseuxSeries> = g.coeffs_in(0).iter().map(|p| series_in(p, 1)).collect();
        for r in ctx.roots_above(&xcoeffs, omega, Some((one, true)))? {
            if r.value.valuation_lb() > Gamma::Fin(one) {
                out.push(Branch { center: c.clone(), orientation: Orientation::OverY, series: r.value, mult: r.mult });
            }
        }
        Ok((out, ctx.field.clone()))
    })?;
    Ok(BranchSet { branches, field })
}

/// The strict derivative at the center of a branch g with g(0) fixed: the coefficient of the
/// linear term when every non-constant exponent is at least 1, none when some is below 1.
pub fn strict_slope(g: &PuiseuxSeries) -> Result<Option<Coeff>> {
    let zero = Exp::from_integer(0);
    let one = Exp::from_integer(1);
    if g.terms().any(|(e, _)| *e != zero && *e < one) {
        return Ok(None);
    }
    if g.omega() <= Gamma::Fin(one) {
        return Err(RisoError::InsufficientPrecision(format!(
            "branch known only below t^{}; linear term undecided",
            g.omega()
        )));
    }
    Ok(Some(g.coeff(&one)))
}

/// Distinct contact exponents among the branches of f at a point, sorted.
pub fn puiseux_invariants(f: &CurvePoly, point: &Point, omega: Exp, bound: usize) -> Result<Vec<Exp>> {
    let bs = newton_puiseux(f, point, omega, bound)?.branches;
    let mut out: Vec<Exp> = vec![];
    for i in 0..bs.len() {
        for j in i + 1..bs.len() {
            let e = if bs[i].orientation != bs[j].orientation {
                Exp::from_integer(1)
            } else {
                match bs[i].series.sub(&bs[j].series).valuation()? {
                    Gamma::Fin(v) => v,
                    Gamma::Inf => return Err(RisoError::NotSquarefree("two equal branches".into())),
                }
            };
            if !out.contains(&e) {
                out.push(e);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn univariate_at(p: &MPoly, alpha: &Coeff) -> CPoly {
    p.eval_var(0, alpha).to_univariate(1)
}

/// Common zeros of f, ∂f/∂x and ∂f/∂y, with coordinates in a finite extension of ℚ.
pub fn singular_locus(f: &CurvePoly, bound: usize) -> Result<Vec<Point>> {
    require_squarefree(f)?;
    let g = require_t_free(f, "the singular locus")?;
    if !g.uses_var(1) {
        return Ok(vec![]);
    }
    let gx = g.deriv(0);
    let gy = g.deriv(1);
    let r = g.resultant(&gy, 1);
    if r.is_zero() {
        return Err(RisoError::UnsupportedConfiguration(format!("discriminant of {f} vanishes identically")));
    }
    let ru = r.to_univariate(0).squarefree_part();
    let (pts, _) = drive(None, bound, |ctx| {
        let mut out: Vec<Point> = vec![];
        for (alpha, _) in ctx.croots(&ru)? {
            let h = univariate_at(&g, &alpha).gcd(&univariate_at(&gx, &alpha)).gcd(&univariate_at(&gy, &alpha));
            if h.is_zero() {
                return Err(RisoError::NotSquarefree(format!("{f} contains a multiple vertical line")).into());
            }
            for (beta, _) in ctx.croots(&h)? {
                out.push(Point::new(vec![PuiseuxSeries::constant(alpha.clone()), PuiseuxSeries::constant(beta)]));
            }
        }
        out.sort_by_key(|p| p.to_string());
        out.dedup();
        Ok(out)
    })?;
    Ok(pts)
}
