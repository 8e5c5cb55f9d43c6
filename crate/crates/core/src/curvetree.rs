//! Riso-trees of tuples of plane curves and points.
//!
//! Every Tr₀ ball contains a point of a finite control set (singular points, points with
//! horizontal, vertical or diagonal tangents, intersection points and the finite members).
//! Along the chain of balls around each control point, rtrdim only changes at finitely many
//! critical radii, so each chain is decided by a few queries. Tr₁ families are read off
//! along the edges of Tr₀ by sampling the fibers at three depths and fitting linear
//! separation depths.

use crate::ball::{Ball, BallKind};
use crate::coeff::{Coeff, DEFAULT_EXT_BOUND};
use crate::curve::{drive, points_field, FieldCtx, Halt, Step};
use crate::error::{Result, RisoError};
use crate::field::Field;
use crate::finite::{clusters, min_pair_val};
use crate::gamma::{Exp, Gamma};
use crate::mpoly::MPoly;
use crate::point::Point;
use crate::rtrdim::{curve_product, member_points, rtrdim_on_ball, Member};
use crate::series::{PuiseuxSeries, DEFAULT_PRECISION};
use crate::spoly::SPoly;
use crate::tree::{
    Attachment, Component, Depth, FiberTree, LinearDepth, NodeRole, RisoTreeSummary, TerminalKind, TreeNode,
};

#[derive(Clone, Debug)]
pub struct TreeOptions {
    pub omega: Exp,
    pub bound: usize,
    /// Keep only rational points, directions and fibers.
    pub real: bool,
    pub window: Option<Ball>,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions { omega: Exp::from_integer(DEFAULT_PRECISION), bound: DEFAULT_EXT_BOUND, real: false, window: None }
    }
}

/// Where the chain of Tr₀ balls around a control point stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RayEnd {
    pub depth: Depth,
    /// `None` for a chain that never leaves Tr₀.
    pub kind: Option<TerminalKind>,
}

impl RayEnd {
    fn key(&self) -> (Depth, u8) {
        let rank = match self.kind {
            None => 3,
            Some(TerminalKind::Limit) | Some(TerminalKind::Precision) => 0,
            Some(TerminalKind::Closed) => 1,
            Some(TerminalKind::Open) => 2,
        };
        (self.depth, rank)
    }

    fn includes_closed(&self, d: Exp) -> bool {
        self.key() >= (Depth::Fin(d), 1)
    }

    fn includes_open(&self, d: Exp) -> bool {
        self.key() >= (Depth::Fin(d), 2)
    }
}

#[derive(Clone, Debug)]
pub struct Ray {
    pub point: Point,
    pub critical: Vec<Exp>,
    /// `None` when not even huge balls around the point are in Tr₀.
    pub end: Option<RayEnd>,
}

fn same_point(a: &Point, b: &Point) -> bool {
    a.sub(b).coords.iter().all(|c| c.support_empty())
}

fn is_rational_point(p: &Point) -> bool {
    p.coords.iter().all(|c| c.is_rational())
}

fn x_roots(ctx: &FieldCtx, r: &MPoly, e: i64, omega: Exp) -> Step<Vec<PuiseuxSeries>> {
    if r.is_zero() || !r.uses_var(0) {
        return Ok(vec![]);
    }
    let r = r.squarefree_in(&[0]);
    if !r.uses_var(0) {
        return Ok(vec![]);
    }
    let sp = SPoly::from_sform(&r, e);
    Ok(ctx.roots(&sp.univariate(0), omega)?.into_iter().map(|r| r.value).collect())
}

/// Roots of a polynomial with truncated coefficients; clustered roots lose precision, so the
/// target order is halved until the expansion is determined.
fn roots_lossy(ctx: &FieldCtx, h: &[PuiseuxSeries], omega: Exp) -> Step<Vec<crate::roots::Root>> {
    let mut w = omega;
    loop {
        match ctx.roots(h, w) {
            Err(Halt::Err(RisoError::InsufficientPrecision(_))) if w > Exp::from_integer(1) => {
                w = w / Exp::from_integer(2);
            }
            r => return r,
        }
    }
}

fn all_truncated_zero(cs: &[PuiseuxSeries]) -> bool {
    cs.iter().all(|c| c.support_empty())
}

/// The finite control set: points of Z over the roots of the discriminants of f against
/// f_y, f_x and f_x ± f_y, together with the point members.
pub fn control_points(ctx: &FieldCtx, f: Option<&SPoly>, points: &[Point], omega: Exp) -> Step<Vec<Point>> {
    let mut out: Vec<Point> = vec![];
    if let Some(f) = f {
        let f = ctx.lift_spoly(f);
        let sf = f.to_sform();
        let q = &sf.poly;
        let (qx, qy) = (q.deriv(0), q.deriv(1));
        let mut alphas: Vec<PuiseuxSeries> = vec![];
        for other in [qy.clone(), qx.clone(), qx.add(&qy), qx.sub(&qy)] {
            if other.is_zero() || !q.uses_var(1) {
                continue;
            }
            for a in x_roots(ctx, &q.resultant(&other, 1), sf.e, omega)? {
                if !alphas.iter().any(|b| b.sub(&a).support_empty()) {
                    alphas.push(a);
                }
            }
        }
        let fx = f.deriv(0);
        for a in &alphas {
            let mut h = f.eval_var(0, a).univariate(1);
            if all_truncated_zero(&h) {
                h = fx.eval_var(0, a).univariate(1);
            }
            if all_truncated_zero(&h) || h.len() <= 1 {
                continue;
            }
            for b in roots_lossy(ctx, &h, omega)? {
                out.push(Point::new(vec![a.clone(), b.value]));
            }
        }
    }
    for p in points {
        out.push(ctx.lift_point(p));
    }
    let mut uniq: Vec<Point> = vec![];
    for p in out {
        match uniq.iter().position(|q| same_point(q, &p)) {
            Some(i) => {
                if p.omega() > uniq[i].omega() {
                    uniq[i] = p;
                }
            }
            None => uniq.push(p),
        }
    }
    uniq.sort_by_key(|p| p.to_string());
    Ok(uniq)
}

fn binom(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// For each degree d, the least valuation among the degree-d Taylor coefficients of f at p (p taken
/// as exact). When p is known only below t^w, degree d is computed only below
/// min over k > d of (m_k + (k − d)·w); beyond that it cannot reach the envelope below w.
fn taylor_valuations(f: &SPoly, p: &Point) -> Vec<(i64, Exp)> {
    let exact = p.as_exact();
    let w = p.omega();
    let top = f.total_degree().max(0) as u32;
    let zero = Exp::from_integer(0);
    let low = exact
        .coords
        .iter()
        .map(|c| c.valuation_lb())
        .chain(f.terms.values().map(|c| c.valuation_lb()))
        .filter_map(|g| g.fin())
        .fold(zero, |a, b| a.min(b));
    let slack = (zero - low) * Exp::from_integer(top as i64 + 1);
    let mut md: Vec<(i64, Exp)> = vec![];
    for d in (0..=top).rev() {
        let bound = match w {
            Gamma::Inf => Gamma::Inf,
            Gamma::Fin(w) => md
                .iter()
                .map(|&(k, mk)| Gamma::Fin(mk + Exp::from_integer(k - d as i64) * w))
                .fold(Gamma::Inf, Gamma::min),
        };
        let powers: Vec<Vec<PuiseuxSeries>> = exact
            .coords
            .iter()
            .map(|c| {
                let mut v = vec![PuiseuxSeries::one()];
                for _ in d..top {
                    let next = v.last().unwrap().mul_below(c, bound + slack);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut best = Gamma::Inf;
        let targets: Vec<&Vec<u32>> = f.terms.keys().collect();
        let mut alphas: Vec<Vec<u32>> = vec![];
        for beta in &targets {
            sub_monomials(beta, d, &mut alphas);
        }
        alphas.sort();
        alphas.dedup();
        for alpha in &alphas {
            let mut acc = PuiseuxSeries::zero_to(bound);
            for (beta, c) in &f.terms {
                if beta.iter().zip(alpha).any(|(b, a)| b < a) {
                    continue;
                }
                let mut term = c.clone();
                let mut k = 1i64;
                for (i, (b, a)) in beta.iter().zip(alpha).enumerate() {
                    k *= binom(*b, *a);
                    term = term.mul_below(&powers[i][(b - a) as usize], bound + slack);
                }
                acc = acc.add(&term.scale(&Coeff::int(k)).truncate(bound));
            }
            if acc.is_exact_zero() {
                continue;
            }
            best = best.min(acc.valuation_lb());
        }
        if let Gamma::Fin(v) = best {
            md.push((d as i64, v));
        }
    }
    md
}

/// Exponent vectors of total degree d dividing beta.
fn sub_monomials(beta: &[u32], d: u32, out: &mut Vec<Vec<u32>>) {
    fn rec(beta: &[u32], d: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == beta.len() {
            if d == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let i = cur.len();
        for a in 0..=beta[i].min(d) {
            cur.push(a);
            rec(beta, d - a, cur, out);
            cur.pop();
        }
    }
    rec(beta, d, &mut vec![], out);
}

/// Radii where rtrdim along the chain of balls around `p` may change: breakpoints of the
/// Taylor envelope of f at p and distances to the other control points.
pub fn critical_values(f: Option<&SPoly>, p: &Point, others: &[Point]) -> Vec<Exp> {
    let mut out: Vec<Exp> = vec![];
    if let Some(f) = f {
        let md = taylor_valuations(f, p);
        for &(i, mi) in &md {
            for &(j, mj) in &md {
                if j <= i {
                    continue;
                }
                let lam = (mi - mj) / Exp::from_integer(j - i);
                let val = mi + Exp::from_integer(i) * lam;
                if md.iter().all(|&(k, mk)| mk + Exp::from_integer(k) * lam >= val) {
                    out.push(lam);
                }
            }
        }
    }
    for q in others {
        let d = q.sub(p);
        if d.coords.iter().all(|c| c.support_empty()) {
            continue;
        }
        if let Ok(Gamma::Fin(v)) = d.valuation() {
            out.push(v);
        }
    }
    if let Gamma::Fin(w) = p.omega() {
        out.retain(|c| *c < w);
    }
    out.sort();
    out.dedup();
    out
}

fn in_tr0(members: &[Member], p: &Point, lambda: Exp, kind: BallKind) -> Result<bool> {
    let b = Ball::new(p.as_exact(), lambda, kind)?;
    Ok(rtrdim_on_ball(members, &b)? == 0)
}

/// Decides the chain of Tr₀ balls around `p` by probing below, at and between the critical radii.
pub fn ray(members: &[Member], f: Option<&SPoly>, p: &Point, others: &[Point]) -> Result<Ray> {
    let crit = critical_values(f, p, others);
    let one = Exp::from_integer(1);
    let first = crit.first().copied().unwrap_or_else(|| Exp::from_integer(0));
    let mk = |end| Ok(Ray { point: p.clone(), critical: crit.clone(), end });
    if !in_tr0(members, p, first - one, BallKind::Closed)? {
        return mk(None);
    }
    for (i, &c) in crit.iter().enumerate() {
        if !in_tr0(members, p, c, BallKind::Closed)? {
            return mk(Some(RayEnd { depth: Depth::Fin(c), kind: Some(TerminalKind::Limit) }));
        }
        if !in_tr0(members, p, c, BallKind::Open)? {
            return mk(Some(RayEnd { depth: Depth::Fin(c), kind: Some(TerminalKind::Closed) }));
        }
        let next = match (crit.get(i + 1), p.omega()) {
            (Some(n), _) => (c + n) / Exp::from_integer(2),
            (None, Gamma::Fin(w)) => (c + w) / Exp::from_integer(2),
            (None, Gamma::Inf) => c + one,
        };
        if !in_tr0(members, p, next, BallKind::Closed)? {
            return mk(Some(RayEnd { depth: Depth::Fin(c), kind: Some(TerminalKind::Open) }));
        }
    }
    mk(Some(match p.omega() {
        Gamma::Inf => RayEnd { depth: Depth::Inf, kind: None },
        Gamma::Fin(w) => RayEnd { depth: Depth::Fin(w), kind: Some(TerminalKind::Precision) },
    }))
}

fn canonical_center(p: &Point, depth: Exp, kind: BallKind) -> Point {
    Point::new(
        p.coords
            .iter()
            .map(|c| match kind {
                BallKind::Closed => c.head_below(depth),
                BallKind::Open => c.head_upto(depth),
            })
            .collect(),
    )
}

fn terminal(p: &Point, end: RayEnd) -> TreeNode {
    match (end.depth, end.kind) {
        (Depth::Fin(d), Some(k)) => {
            let kind = if k == TerminalKind::Open { BallKind::Open } else { BallKind::Closed };
            TreeNode { depth: end.depth, center: canonical_center(p, d, kind), role: NodeRole::Terminal(k), children: vec![] }
        }
        _ => TreeNode { depth: Depth::Inf, center: p.clone(), role: NodeRole::End, children: vec![] },
    }
}

fn build(cluster: &[(Point, RayEnd)], above: Depth) -> Result<Option<TreeNode>> {
    let (bp, best) = cluster.iter().max_by_key(|(_, e)| e.key()).cloned().expect("nonempty cluster");
    if let Depth::Fin(a) = above {
        if !best.includes_open(a) {
            return Ok(None);
        }
        if best.key() == (Depth::Fin(a), 2) {
            return Ok(Some(terminal(&bp, best)));
        }
    }
    if cluster.len() == 1 {
        return Ok(Some(terminal(&bp, best)));
    }
    let pts: Vec<Point> = cluster.iter().map(|(p, _)| p.clone()).collect();
    let delta = min_pair_val(&pts)?;
    if !best.includes_closed(delta) {
        return Ok(Some(terminal(&bp, best)));
    }
    let mut children = vec![];
    for sub in clusters(&pts, delta)? {
        let sc: Vec<(Point, RayEnd)> =
            cluster.iter().filter(|(p, _)| sub.iter().any(|q| same_point(p, q))).cloned().collect();
        if let Some(n) = build(&sc, Depth::Fin(delta))? {
            children.push(n);
        }
    }
    let center = canonical_center(&bp, delta, BallKind::Closed);
    Ok(Some(match children.len() {
        0 => TreeNode { depth: Depth::Fin(delta), center, role: NodeRole::Terminal(TerminalKind::Closed), children },
        1 => children.pop().unwrap(),
        _ => TreeNode { depth: Depth::Fin(delta), center, role: NodeRole::Branch, children },
    }))
}

/// Depths at which a finite subset of K splits, one entry per extra cluster.
fn split_profile(pts: &[Point]) -> Result<Vec<Exp>> {
    if pts.len() < 2 {
        return Ok(vec![]);
    }
    let d = min_pair_val(pts)?;
    let cs = clusters(pts, d)?;
    let mut out = vec![d; cs.len() - 1];
    for c in &cs {
        out.extend(split_profile(c)?);
    }
    out.sort();
    Ok(out)
}

/// Residue direction of a Tr₁ family along an edge.
#[derive(Clone, Debug, PartialEq)]
enum Direction {
    /// Offsets (1, r) in the rescaled coordinates.
    Slope(Coeff),
    Vertical,
}

impl Direction {
    fn render(&self) -> String {
        match self {
            Direction::Slope(r) if r.is_zero() => "Y = 0".into(),
            Direction::Slope(r) if r.is_one() => "Y = X".into(),
            Direction::Slope(r) if r.neg().is_one() => "Y = -X".into(),
            Direction::Slope(r) if r.is_atomic() => format!("Y = {r}*X"),
            Direction::Slope(r) => format!("Y = ({r})*X"),
            Direction::Vertical => "X = 0".into(),
        }
    }
}

/// Points of Z in the fiber through p + t^λ·(direction) that lie in the open ball of radius λ.
fn fiber(ctx: &FieldCtx, f: &SPoly, p: &Point, dir: &Direction, lambda: Exp, omega: Exp, real: bool) -> Step<Vec<Point>> {
    let tl = PuiseuxSeries::t_pow(lambda);
    let (h, center) = match dir {
        Direction::Slope(r) => {
            let x0 = p.coords[0].add(&tl);
            (f.eval_var(0, &x0).univariate(1), p.coords[1].add(&tl.scale(r)))
        }
        Direction::Vertical => {
            let y0 = p.coords[1].add(&tl);
            (f.eval_var(1, &y0).univariate(0), p.coords[0].clone())
        }
    };
    if all_truncated_zero(&h) || h.len() <= 1 {
        return Ok(vec![]);
    }
    let mut out = vec![];
    for r in roots_lossy(ctx, &h, omega)? {
        if real && !r.value.is_rational() {
            continue;
        }
        let off = Point::new(vec![r.value.sub(&center)]);
        if off.valuation_at_least(lambda, true)? {
            out.push(Point::new(vec![r.value]));
        }
    }
    Ok(out)
}

fn samples(lo: Depth, hi: Depth, cap: Gamma) -> [Exp; 3] {
    let q = |n: i64, d: i64| Exp::new(n, d);
    let hi = match (lo, hi, cap) {
        (Depth::Fin(a), Depth::Inf, Gamma::Fin(w)) if a + q(3, 1) >= w => Depth::Fin(w),
        (_, Depth::Inf, _) => Depth::Inf,
        (_, h, _) => h,
    };
    match (lo, hi) {
        (Depth::Fin(a), Depth::Fin(b)) => [1, 2, 3].map(|k| a + (b - a) * q(k, 4)),
        (Depth::Fin(a), _) => [1, 2, 3].map(|k| a + q(k, 1)),
        (_, Depth::Fin(b)) => [3, 2, 1].map(|k| b - q(k, 1)),
        _ => [1, 2, 3].map(|k| q(k, 1)),
    }
}

/// Fits each separation depth as a·λ + b on the first two samples and checks the third.
fn fit(samples: &[(Exp, Vec<Exp>)]) -> std::result::Result<Vec<LinearDepth>, String> {
    let n = samples[0].1.len();
    if samples.iter().any(|(_, d)| d.len() != n) {
        return Err("fiber size changes inside the segment".into());
    }
    let mut out = vec![];
    for i in 0..n {
        let (l1, d1) = (samples[0].0, samples[0].1[i]);
        let (l2, d2) = (samples[1].0, samples[1].1[i]);
        let slope = (d2 - d1) / (l2 - l1);
        let lin = LinearDepth { slope, offset: d1 - slope * l1 };
        for (l, d) in &samples[2..] {
            if lin.at(*l) != d[i] {
                return Err(format!("separation depth {} is not linear in the attachment depth", i + 1));
            }
        }
        out.push(lin);
    }
    Ok(out)
}

fn is_homogeneous(p: &MPoly) -> bool {
    let mut ds = p.terms.keys().map(|m| m.iter().sum::<u32>());
    let Some(d0) = ds.next() else { return true };
    ds.all(|d| d == d0)
}

/// Squarefree levels: pairs (m, A_m) with P = c·Π A_m^m.
fn levels(p: &MPoly) -> Vec<(usize, MPoly)> {
    let mut out = vec![];
    let mut cur = p.clone();
    let mut m = 1;
    while !cur.is_constant() {
        let rad = cur.squarefree_in(&[0, 1]);
        let next = cur.exact_div(&rad).expect("radical divides");
        let lev = if next.is_constant() { rad.clone() } else { rad.exact_div(&next.squarefree_in(&[0, 1])).expect("nested radicals") };
        if !lev.is_constant() {
            out.push((m, lev));
        }
        cur = next;
        m += 1;
    }
    out
}

struct Ctx<'a> {
    f: Option<SPoly>,
    control: Vec<Point>,
    opts: &'a TreeOptions,
}

fn edge_families(
    fc: &FieldCtx,
    cx: &Ctx,
    p: &Point,
    from: Depth,
    to: Depth,
    out: &mut Vec<Component>,
    notes: &mut Vec<String>,
) -> Step<()> {
    let Some(f) = cx.f.as_ref() else { return Ok(()) };
    let f = fc.lift_spoly(f);
    let mut cuts = vec![from];
    for c in critical_values(Some(&f), p, &cx.control) {
        if Depth::Fin(c) > from && Depth::Fin(c) < to {
            cuts.push(Depth::Fin(c));
        }
    }
    cuts.push(to);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let lams = samples(lo, hi, p.omega());
        let mid = lams[1];
        let (_, fbar) = f.recenter(&p.as_exact(), mid).residue();
        if !is_homogeneous(&fbar) {
            notes.push(format!("edge ({}, {}) at {}: residue is not a cone; families skipped", lo.render(), hi.render(), p));
            continue;
        }
        let d = fbar.total_degree();
        let h1 = fbar.eval_var(0, &Coeff::one()).to_univariate(1);
        let mut dirs = vec![];
        for (r, _) in fc.croots(&h1)? {
            if cx.opts.real && !r.is_rational() {
                continue;
            }
            dirs.push(Direction::Slope(r));
        }
        if h1.deg() < d as isize {
            dirs.push(Direction::Vertical);
        }
        for dir in dirs {
            let mut data = vec![];
            let mut count = 0;
            for &l in &lams {
                let coarse = cx.opts.omega.min(Exp::from_integer(8) + l.max(Exp::from_integer(0)) * 2);
                let mut pts = fiber(fc, &f, p, &dir, l, coarse, cx.opts.real)?;
                let mut prof = split_profile(&pts);
                if matches!(prof, Err(RisoError::InsufficientPrecision(_))) && coarse < cx.opts.omega {
                    pts = fiber(fc, &f, p, &dir, l, cx.opts.omega, cx.opts.real)?;
                    prof = split_profile(&pts);
                }
                count = pts.len();
                data.push((l, prof?));
            }
            let (separations, note) = match fit(&data) {
                Ok(s) => (s, None),
                Err(e) => (vec![], Some(RisoError::FitAmbiguous(e).to_string())),
            };
            let projection = if dir == Direction::Vertical { vec![1] } else { vec![0] };
            out.push(Component {
                d: 1,
                attachment: Attachment::Edge { center: p.clone(), from: lo, to: hi, direction: dir.render() },
                projection,
                fiber: Some(FiberTree { points: count, separations, note }),
            });
        }
    }
    Ok(())
}

fn node_families(cx: &Ctx, fc: &FieldCtx, ball: &Ball, out: &mut Vec<Component>) {
    let Some(f) = cx.f.as_ref() else { return };
    let f = fc.lift_spoly(f);
    let (_, fbar) = f.recenter(&ball.center, ball.radius).residue();
    for (m, lev) in levels(&fbar) {
        out.push(Component {
            d: 1,
            attachment: Attachment::Node { ball: ball.clone(), residue_curve: lev.fmt_with(&["X", "Y"]) },
            projection: vec![0],
            fiber: Some(FiberTree {
                points: m,
                separations: vec![],
                note: if m > 1 { Some("separation depends on the residue point".into()) } else { None },
            }),
        });
    }
}

fn walk_families(
    fc: &FieldCtx,
    cx: &Ctx,
    node: &TreeNode,
    comps: &mut Vec<Component>,
    notes: &mut Vec<String>,
) -> Step<()> {
    let closed_node = matches!(node.role, NodeRole::Branch | NodeRole::Root | NodeRole::Terminal(TerminalKind::Closed));
    if let (true, Depth::Fin(d)) = (closed_node, node.depth) {
        node_families(cx, fc, &Ball::closed(node.center.clone(), d)?, comps);
    }
    for ch in &node.children {
        if ch.depth > node.depth {
            edge_families(fc, cx, &ch.center, node.depth, ch.depth, comps, notes)?;
            if let Some(f) = cx.f.as_ref() {
                for c in critical_values(Some(f), &ch.center, &cx.control) {
                    if Depth::Fin(c) > node.depth && Depth::Fin(c) < ch.depth {
                        let (_, fbar) = fc.lift_spoly(f).recenter(&ch.center.as_exact(), c).residue();
                        if !is_homogeneous(&fbar) {
                            node_families(cx, fc, &Ball::closed(ch.center.as_exact(), c)?, comps);
                        }
                    }
                }
            }
        }
        walk_families(fc, cx, ch, comps, notes)?;
    }
    Ok(())
}

/// Tr₀ with its Tr₁ families and the generic Tr₂ complement.
pub fn riso_tree_curve(members: &[Member], opts: &TreeOptions) -> Result<RisoTreeSummary> {
    let mut notes: Vec<String> = vec![];
    for m in members {
        if let Member::Curve(c) = m {
            if let (_, Some(n)) = c.radical() {
                notes.push(n);
            }
        }
    }
    if opts.real {
        notes.push("real mode: only points, directions and fibers with rational coefficients are kept".into());
    }
    let f = curve_product(members);
    let pts_in = member_points(members);
    let ((tr0, comps, control, extra), _) = drive(points_field(pts_in.iter()), opts.bound, |fc| {
        let mut control = control_points(fc, f.as_ref(), &pts_in, opts.omega)?;
        if opts.real {
            control.retain(is_rational_point);
        }
        if let Some(w) = &opts.window {
            let mut kept = vec![];
            for p in control {
                if w.contains(&p)? {
                    kept.push(p);
                }
            }
            control = kept;
        }
        let lifted_f = f.as_ref().map(|g| fc.lift_spoly(g));
        let mut rays = vec![];
        for p in &control {
            let r = ray(members, lifted_f.as_ref(), p, &control)?;
            if let Some(e) = r.end {
                rays.push((p.clone(), e));
            }
        }
        let root_depth = opts.window.as_ref().map_or(Depth::NegInf, |w| Depth::Fin(w.radius));
        let top = if rays.is_empty() { None } else { build(&rays, Depth::NegInf)? };
        let top = match (&opts.window, top) {
            (Some(w), Some(n)) if n.depth < Depth::Fin(w.radius) => None,
            (_, t) => t,
        };
        let tr0 = top.map(|n| TreeNode {
            depth: root_depth,
            center: opts.window.as_ref().map_or_else(|| Point::origin(2), |w| w.center.clone()),
            role: NodeRole::Root,
            children: vec![n],
        });
        let cx = Ctx { f: f.clone(), control: control.clone(), opts };
        let mut comps = vec![];
        let mut extra = vec![];
        if let Some(root) = &tr0 {
            walk_families(fc, &cx, root, &mut comps, &mut extra)?;
        }
        comps.push(Component { d: 2, attachment: Attachment::Complement, projection: vec![0, 1], fiber: None });
        Ok((tr0, comps, control, extra))
    })?;
    notes.extend(extra);
    Ok(RisoTreeSummary { n: 2, tr0, components: comps, control, notes })
}
