//! Shadows and riso-stratifications of plane tuples, the strict-C¹ locus of a curve and
//! radius profiles of fibered surfaces.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ball::Ball;
use crate::coeff::{Coeff, DEFAULT_EXT_BOUND};
use crate::curve::{drive, newton_puiseux, singular_locus, strict_slope, CurvePoly, Orientation};
use crate::curvetree::{control_points, riso_tree_curve, TreeOptions};
use crate::error::{Result, RisoError};
use crate::expr::parse_poly;
use crate::gamma::{fmt_exp, Exp};
use crate::point::Point;
use crate::rtrdim::{curve_product, member_points, rtrdim_on_ball, Member};
use crate::series::{PuiseuxSeries, DEFAULT_PRECISION};
use crate::spoly::SPoly;
use crate::tree::{Depth, NodeRole, TerminalKind, TreeNode, SCHEMA};

/// Number of shadow iterations for plane inputs.
pub const PLANE_ITERATIONS: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct S1Stratum {
    /// The union of the curve members, if any.
    pub curve: Option<String>,
    /// Curve points that belong to S₀ instead.
    pub removed: Vec<Point>,
    /// Points off the curve that lie in S₁.
    pub extra: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stratification2D {
    pub s0: Vec<Point>,
    pub s1: S1Stratum,
    /// Description of S₂: everything outside the curve and S₀.
    pub s2: String,
    pub iterations: usize,
    /// Whether the last iteration left the strata unchanged.
    pub stable: bool,
    /// rtrdim on B(a, >0) for every candidate point a.
    pub pointwise: Vec<(Point, u8)>,
    /// Candidates whose stratum could not be certified.
    pub undetermined: Vec<(Point, String)>,
}

fn pts_json(ps: &[Point]) -> Value {
    json!(ps.iter().map(|p| p.to_string()).collect::<Vec<_>>())
}

impl Stratification2D {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "S0": pts_json(&self.s0),
            "S1": {
                "curve": self.s1.curve,
                "removed": pts_json(&self.s1.removed),
                "extra": pts_json(&self.s1.extra),
            },
            "S2": { "complement_of": self.s2 },
            "iterations": self.iterations,
            "stable": self.stable,
            "pointwise": self.pointwise.iter().map(|(p, d)| json!({"point": p.to_string(), "rtrdim": d})).collect::<Vec<_>>(),
            "undetermined": self.undetermined.iter().map(|(p, why)| json!({"point": p.to_string(), "reason": why})).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let list = |ps: &[Point]| ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = format!("S0 = {{{}}}\n", list(&self.s0));
        match &self.s1.curve {
            Some(c) if self.s1.removed.is_empty() => out.push_str(&format!("S1 = {{{c} = 0}}\n")),
            Some(c) => out.push_str(&format!("S1 = {{{c} = 0}} minus {{{}}}\n", list(&self.s1.removed))),
            None => out.push_str("S1 = {}\n"),
        }
        if !self.s1.extra.is_empty() {
            out.push_str(&format!("S1 also contains {{{}}}\n", list(&self.s1.extra)));
        }
        out.push_str(&format!("S2 = complement of {}\n", self.s2));
        out.push_str(&format!("iterations: {} ({})\n", self.iterations, if self.stable { "stable" } else { "changed" }));
        for (p, why) in &self.undetermined {
            out.push_str(&format!("undetermined at {p}: {why}\n"));
        }
        out
    }
}

fn on_curve(f: Option<&SPoly>, p: &Point) -> bool {
    f.is_some_and(|f| f.eval(p).support_empty())
}

fn push_unique(v: &mut Vec<Point>, p: Point) {
    if !v.iter().any(|q| q.sub(&p).coords.iter().all(|c| c.support_empty())) {
        v.push(p);
    }
}

/// S₀ candidates: singular points of the union of the curves (which include the pairwise
/// intersections) and the point members.
fn candidates(members: &[Member], bound: usize) -> Result<Vec<Point>> {
    let mut out = vec![];
    if let Some(f) = curve_product(members) {
        let c = CurvePoly::new(f)?.squarefree_part().0;
        if !c.is_t_free() {
            return Err(RisoError::UnsupportedConfiguration(format!(
                "shadows need curves with constant coefficients; {} involves t",
                c.render()
            )));
        }
        for p in singular_locus(&c, bound)? {
            push_unique(&mut out, p);
        }
    }
    for p in member_points(members) {
        push_unique(&mut out, p);
    }
    out.sort_by_key(|p| p.to_string());
    Ok(out)
}

/// S_d = points a with rtrdim of Z on B(a, >0) equal to d.
pub fn shadow(members: &[Member], bound: usize) -> Result<Stratification2D> {
    let f = curve_product(members);
    let cands = candidates(members, bound)?;
    let results: Vec<(Point, Result<u8>)> = cands
        .par_iter()
        .map(|p| {
            let r = Ball::open(p.clone(), Exp::from_integer(0)).and_then(|b| rtrdim_on_ball(members, &b));
            (p.clone(), r)
        })
        .collect();
    let mut pointwise = vec![];
    let mut undetermined = vec![];
    for (p, r) in results {
        match r {
            Ok(d) => pointwise.push((p, d)),
            Err(e @ (RisoError::UnsupportedConfiguration(_) | RisoError::Undetermined(_))) => {
                undetermined.push((p, e.to_string()))
            }
            Err(e) => return Err(e),
        }
    }
    let s0: Vec<Point> = pointwise.iter().filter(|(_, d)| *d == 0).map(|(p, _)| p.clone()).collect();
    let removed: Vec<Point> = s0.iter().filter(|p| on_curve(f.as_ref(), p)).cloned().collect();
    let extra: Vec<Point> =
        pointwise.iter().filter(|(p, d)| *d == 1 && !on_curve(f.as_ref(), p)).map(|(p, _)| p.clone()).collect();
    let curve = f.as_ref().map(|g| g.fmt_with(&["x", "y"]));
    let s2 = match &curve {
        Some(c) if s0.is_empty() => format!("{{{c} = 0}}"),
        Some(c) => format!("{{{c} = 0}} and S0"),
        None if s0.is_empty() => "the empty set".into(),
        None => "S0".into(),
    };
    Ok(Stratification2D {
        s0,
        s1: S1Stratum { curve, removed, extra },
        s2,
        iterations: 1,
        stable: true,
        pointwise,
        undetermined,
    })
}

/// Iterated shadow: each round adds the strata of the previous one to the tuple.
pub fn riso_stratification_n(members: &[Member], rounds: usize, bound: usize) -> Result<Stratification2D> {
    let mut cur = shadow(members, bound)?;
    for k in 1..rounds.max(1) {
        let mut ext = members.to_vec();
        let mut lower = cur.s0.clone();
        lower.extend(cur.s1.extra.iter().cloned());
        if !lower.is_empty() {
            ext.push(Member::Points(lower));
        }
        let mut next = shadow(&ext, bound)?;
        next.stable = next.s0 == cur.s0 && next.s1 == cur.s1;
        next.iterations = k + 1;
        cur = next;
    }
    Ok(cur)
}

pub fn riso_stratification(members: &[Member], bound: usize) -> Result<Stratification2D> {
    riso_stratification_n(members, PLANE_ITERATIONS, bound)
}

/// Whether a curve is a strict C¹ graph near one of its points.
#[derive(Clone, Debug, PartialEq)]
pub struct C1Status {
    pub point: Point,
    pub c1: bool,
    pub branches: usize,
    /// The orientation and slope of the single branch, when C¹.
    pub slope: Option<(Orientation, Coeff)>,
}

impl C1Status {
    pub fn render(&self) -> String {
        match &self.slope {
            Some((Orientation::OverX, s)) => format!("{}: C1, dy/dx = {s}", self.point),
            Some((Orientation::OverY, s)) => format!("{}: C1, dx/dy = {s}", self.point),
            None => format!("{}: not C1 ({} branches)", self.point, self.branches),
        }
    }
}

pub fn strict_c1_at(f: &CurvePoly, p: &Point, bound: usize) -> Result<C1Status> {
    let bs = newton_puiseux(f, p, Exp::from_integer(4), bound)?.branches;
    let count: usize = bs.iter().map(|b| b.mult).sum();
    let slope = if count == 1 { strict_slope(&bs[0].series)?.map(|s| (bs[0].orientation, s)) } else { None };
    Ok(C1Status { point: p.clone(), c1: slope.is_some(), branches: count, slope })
}

/// Classifies the singular points and the points with axis-parallel or diagonal tangents;
/// all other points of the curve are C¹.
pub fn strict_c1_locus(f: &CurvePoly, bound: usize) -> Result<Vec<C1Status>> {
    if !f.squarefree {
        return Err(RisoError::NotSquarefree(format!("{}; pass its squarefree part", f.render())));
    }
    if !f.is_t_free() {
        return Err(RisoError::UnsupportedConfiguration(format!("{} involves t", f.render())));
    }
    let omega = Exp::from_integer(DEFAULT_PRECISION);
    let (pts, _) = drive(None, bound, |fc| Ok(control_points(fc, Some(&f.poly), &[], omega)?))?;
    let mut cands: Vec<Point> = vec![];
    for p in singular_locus(f, bound)?.into_iter().chain(pts.iter().map(|p| p.as_exact())) {
        push_unique(&mut cands, p);
    }
    cands.sort_by_key(|p| p.to_string());
    cands.par_iter().map(|p| strict_c1_at(f, p, bound)).collect()
}

/// A fibered surface F(x; y, z) = 0 read as the family of plane curves over x.
#[derive(Clone, Debug)]
pub struct Fibered {
    pub poly: SPoly,
}

impl Fibered {
    pub fn parse(src: &str) -> Result<Fibered> {
        let poly = parse_poly(src, &["x", "y", "z"])?;
        if poly.is_zero() {
            return Err(RisoError::InvalidInput("the zero polynomial does not define a surface".into()));
        }
        Ok(Fibered { poly })
    }

    /// The fiber over x = a as a curve in (y, z).
    pub fn fiber(&self, a: &PuiseuxSeries) -> Result<CurvePoly> {
        let g = self.poly.eval_var(0, a).permute(&[1, 2]);
        if g.is_zero() || g.total_degree() == 0 {
            return Err(RisoError::UnsupportedConfiguration(format!("fiber over x = {a} is not a curve")));
        }
        let mut c = CurvePoly::new(g)?;
        c.names = ["y".into(), "z".into()];
        Ok(c)
    }
}

/// Tr₀ data of one fiber around the fiber origin.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSample {
    /// v(x); `None` for the fiber over x = 0.
    pub mu: Option<Exp>,
    pub curve: String,
    /// Depth of the first terminal or branching of Tr₀ along the balls around the origin.
    pub radius: Depth,
    pub branching: Vec<Depth>,
}

/// ρ(μ) = slope·μ + offset for μ in [from, to].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub from: Exp,
    pub to: Exp,
    pub slope: Exp,
    pub offset: Exp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadiusProfile {
    pub samples: Vec<FiberSample>,
    pub segments: Vec<Segment>,
    pub at_zero: Option<FiberSample>,
    pub notes: Vec<String>,
}

impl RadiusProfile {
    pub fn to_json(&self) -> Value {
        let s = |f: &FiberSample| {
            json!({
                "mu": f.mu.map(|m| fmt_exp(&m)),
                "fiber": f.curve,
                "rho": f.radius.render(),
                "branching": f.branching.iter().map(|d| d.render()).collect::<Vec<_>>(),
            })
        };
        json!({
            "schema": SCHEMA,
            "samples": self.samples.iter().map(s).collect::<Vec<_>>(),
            "segments": self.segments.iter().map(|g| json!({
                "from": fmt_exp(&g.from), "to": fmt_exp(&g.to),
                "slope": fmt_exp(&g.slope), "offset": fmt_exp(&g.offset),
            })).collect::<Vec<_>>(),
            "at_zero": self.at_zero.as_ref().map(s),
            "notes": self.notes,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.samples {
            let mu = f.mu.map_or("x = 0".into(), |m| format!("mu = {}", fmt_exp(&m)));
            out.push_str(&format!("{mu}: rho = {}  fiber {}\n", f.radius.render(), f.curve));
        }
        for g in &self.segments {
            let lin = crate::tree::LinearDepth { slope: g.slope, offset: g.offset };
            out.push_str(&format!(
                "segment [{}, {}]: rho = {}  slope {}\n",
                fmt_exp(&g.from),
                fmt_exp(&g.to),
                lin.render().replace('λ', "mu"),
                fmt_exp(&g.slope)
            ));
        }
        if let Some(z) = &self.at_zero {
            out.push_str(&format!(
                "x = 0: rho = {}, branching [{}]\n",
                z.radius.render(),
                z.branching.iter().map(|d| d.render()).collect::<Vec<_>>().join(", ")
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

fn node_contains(n: &TreeNode, p: &Point) -> Result<bool> {
    match (n.role.clone(), n.depth) {
        (NodeRole::End, _) => Ok(n.center.sub(p).coords.iter().all(|c| c.support_empty())),
        (_, Depth::Fin(d)) => match n.ball() {
            Some(b) => b.contains(p),
            None => Ball::open(n.center.clone(), d)?.contains(p),
        },
        _ => Ok(true),
    }
}

/// Follows the Tr₀ balls containing `p` to the first terminal or branching.
fn event_depth(root: Option<&TreeNode>, p: &Point) -> Result<Depth> {
    let Some(mut cur) = root else { return Ok(Depth::NegInf) };
    loop {
        match cur.role {
            NodeRole::Terminal(_) | NodeRole::End => return Ok(cur.depth),
            NodeRole::Branch => return Ok(cur.depth),
            NodeRole::Root => {}
        }
        let mut next = None;
        for c in &cur.children {
            if node_contains(c, p)? {
                next = Some(c);
                break;
            }
        }
        match next {
            Some(c) => cur = c,
            None => return Ok(Depth::NegInf),
        }
    }
}

fn sample(fib: &Fibered, mu: Option<Exp>, opts: &TreeOptions) -> Result<FiberSample> {
    let a = mu.map_or_else(PuiseuxSeries::zero, PuiseuxSeries::t_pow);
    let c = fib.fiber(&a)?;
    let member = [Member::Curve(c.clone())];
    // a coarse pass first; it stands when no terminal sits at its precision cutoff
    let coarse = opts.omega.min(Exp::from_integer(8) + mu.unwrap_or_else(|| Exp::from_integer(0)) * Exp::from_integer(4));
    let first = if coarse < opts.omega {
        match riso_tree_curve(&member, &TreeOptions { omega: coarse, ..opts.clone() }) {
            Ok(t) if t.terminals().iter().all(|(_, k)| *k != TerminalKind::Precision) => Some(t),
            Ok(_) | Err(RisoError::InsufficientPrecision(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let t = match first {
        Some(t) => t,
        None => riso_tree_curve(&member, opts)?,
    };
    let radius = event_depth(t.tr0.as_ref(), &Point::origin(2))?;
    Ok(FiberSample { mu, curve: c.poly.fmt_with(&["y", "z"]), radius, branching: t.branching_depths() })
}

/// Greedy fit: each segment is spanned by two samples and confirmed by at least one more.
fn fit_segments(pts: &[(Exp, Exp)]) -> std::result::Result<Vec<Segment>, String> {
    let mut out = vec![];
    let mut i = 0;
    while i < pts.len() {
        if i + 2 >= pts.len() {
            return Err(format!("samples from mu = {} on do not determine a segment", fmt_exp(&pts[i].0)));
        }
        let (m1, r1) = pts[i];
        let (m2, r2) = pts[i + 1];
        let slope = (r2 - r1) / (m2 - m1);
        let offset = r1 - slope * m1;
        let mut j = i + 2;
        while j < pts.len() && slope * pts[j].0 + offset == pts[j].1 {
            j += 1;
        }
        if j == i + 2 {
            return Err(format!("no sample confirms the line through mu = {} and mu = {}", fmt_exp(&m1), fmt_exp(&m2)));
        }
        out.push(Segment { from: m1, to: pts[j - 1].0, slope, offset });
        i = j;
    }
    Ok(out)
}

/// ρ(μ) sampled at x = t^μ, fitted by exact piecewise-linear segments.
pub fn fiber_profile(fib: &Fibered, mus: &[Exp], opts: &TreeOptions) -> Result<RadiusProfile> {
    if mus.iter().any(|m| *m <= Exp::from_integer(0)) {
        return Err(RisoError::InvalidInput("profile samples must be positive".into()));
    }
    let mut mus = mus.to_vec();
    mus.sort();
    mus.dedup();
    let samples: Vec<FiberSample> = mus.par_iter().map(|m| sample(fib, Some(*m), opts)).collect::<Result<_>>()?;
    let at_zero = match sample(fib, None, opts) {
        Ok(s) => Some(s),
        Err(RisoError::UnsupportedConfiguration(_)) => None,
        Err(e) => return Err(e),
    };
    let raw = || {
        samples
            .iter()
            .map(|s| format!("{} -> {}", fmt_exp(&s.mu.unwrap()), s.radius.render()))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut notes = vec![];
    let fin: Vec<(Exp, Exp)> = samples.iter().filter_map(|s| s.radius.fin().map(|r| (s.mu.unwrap(), r))).collect();
    let segments = if fin.is_empty() {
        notes.push("no terminal or branching of Tr0 around the fiber origin".into());
        vec![]
    } else if fin.len() < samples.len() {
        return Err(RisoError::FitAmbiguous(format!("some fibers have no finite radius; samples {}", raw())));
    } else {
        fit_segments(&fin).map_err(|e| RisoError::FitAmbiguous(format!("{e}; samples {}", raw())))?
    };
    Ok(RadiusProfile { samples, segments, at_zero, notes })
}

pub fn default_bound() -> usize {
    DEFAULT_EXT_BOUND
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn z(src: &[&str]) -> Vec<Member> {
        src.iter().map(|s| Member::parse(s).unwrap()).collect()
    }
    fn q(n: i64) -> Exp {
        Exp::from_integer(n)
    }

    #[test]
    fn shadows() {
        let s = shadow(&z(&["y^2 - x^3"]), DEFAULT_EXT_BOUND).unwrap();
        assert_eq!(s.s0, vec![Point::origin(2)]);
        assert_eq!(s.s1.removed, vec![Point::origin(2)]);
        assert!(shadow(&z(&["x^2 + y^2 - 1"]), DEFAULT_EXT_BOUND).unwrap().s0.is_empty());
        let s = shadow(&z(&["y", "{(0,0)}"]), DEFAULT_EXT_BOUND).unwrap();
        assert_eq!(s.s0, vec![Point::origin(2)]);
        let empty = shadow(&[], DEFAULT_EXT_BOUND).unwrap();
        assert!(empty.s0.is_empty() && empty.s1.curve.is_none());
        assert_eq!(empty.s2, "the empty set");
    }

    #[test]
    fn stratification_is_stable() {
        let a = shadow(&z(&["y^2 - x^3"]), DEFAULT_EXT_BOUND).unwrap();
        let b = riso_stratification(&z(&["y^2 - x^3"]), DEFAULT_EXT_BOUND).unwrap();
        assert_eq!(b.iterations, 2);
        assert!(b.stable);
        assert_eq!(a.s0, b.s0);
        let j = b.to_json();
        assert_eq!(j["S0"][0], "(0,0)");
        assert_eq!(j["iterations"], 2);
    }

    #[test]
    fn c1_points() {
        let st = |s: &str| strict_c1_at(&CurvePoly::parse(s).unwrap(), &Point::origin(2), DEFAULT_EXT_BOUND).unwrap();
        assert!(!st("y^2 - x^3").c1);
        assert!(!st("y^2 - x^5").c1);
        assert_eq!(st("y^2 - x^5").branches, 2);
        let c = st("y - x^3");
        assert!(c.c1);
        assert_eq!(c.slope, Some((Orientation::OverX, Coeff::zero())));
        let loc = strict_c1_locus(&CurvePoly::parse("y - x^3").unwrap(), DEFAULT_EXT_BOUND).unwrap();
        assert!(loc.iter().any(|s| s.point == Point::origin(2) && s.c1));
        let loc = strict_c1_locus(&CurvePoly::parse("y^2 - x^3").unwrap(), DEFAULT_EXT_BOUND).unwrap();
        assert_eq!(loc.iter().filter(|s| !s.c1).count(), 1);
    }

    #[test]
    fn trumpet_and_cylinder() {
        let mus: Vec<Exp> = (1..=4).map(q).collect();
        let p = fiber_profile(&Fibered::parse("y^2 + z^2 - x^3").unwrap(), &mus, &TreeOptions::default()).unwrap();
        assert_eq!(p.segments.len(), 1);
        assert_eq!(p.segments[0].slope, Exp::new(3, 2));
        assert_eq!(p.segments[0].offset, q(0));
        let c = fiber_profile(&Fibered::parse("y^2 + z^2 - 1").unwrap(), &mus, &TreeOptions::default()).unwrap();
        assert_eq!(c.segments.len(), 1);
        assert_eq!(c.segments[0].slope, q(0));
    }

    #[test]
    fn whitney_fibers_differ_from_cusp() {
        let mus: Vec<Exp> = (1..=3).map(q).collect();
        let p = fiber_profile(&Fibered::parse("y^2 + z^3 - x^2*z^2").unwrap(), &mus, &TreeOptions::default()).unwrap();
        let z0 = p.at_zero.as_ref().unwrap();
        assert_eq!(z0.radius, Depth::Inf);
        assert!(z0.branching.is_empty());
        assert!(p.samples.iter().all(|s| s.radius != Depth::Inf && !s.branching.is_empty()));
    }

    #[test]
    fn too_few_samples_are_ambiguous() {
        let e = fiber_profile(&Fibered::parse("y^2 + z^2 - x^3").unwrap(), &[q(1), q(2)], &TreeOptions::default());
        assert!(matches!(e, Err(RisoError::FitAmbiguous(_))));
    }
}
