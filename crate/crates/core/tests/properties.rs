use num::BigInt;
use proptest::prelude::*;

use riso_core::ball::{join, Ball, BallKind, Relation};
use riso_core::coeff::{Coeff, DEFAULT_EXT_BOUND};
use riso_core::curve::{newton_puiseux, CurvePoly};
use riso_core::curvetree::{riso_tree_curve, TreeOptions};
use riso_core::expr::{parse_point, parse_poly};
use riso_core::finite::{riso_equivalent, riso_tree_finite, FiniteConfig};
use riso_core::gamma::{Exp, Gamma};
use riso_core::point::Point;
use riso_core::poincare::{poincare_count, poincare_oracle, Base, PoincareOptions};
use riso_core::rtrdim::{rtrdim_on_ball, Member};
use riso_core::series::PuiseuxSeries;
use riso_core::spoly::SPoly;
use riso_core::strat::{fiber_profile, riso_stratification, riso_stratification_n, Fibered};
use riso_core::tree::{Attachment, Depth, NodeRole, TreeNode};

fn e(n: i64, d: i64) -> Exp {
    Exp::new(n, d)
}

fn series(terms: &[(i64, i64)], den: i64) -> PuiseuxSeries {
    PuiseuxSeries::from_terms(terms.iter().map(|(k, c)| (e(*k, den), Coeff::int(*c))), Gamma::Inf)
}

fn arb_series() -> impl Strategy<Value = PuiseuxSeries> {
    prop::collection::vec((-2i64..8, -3i64..=3), 0..5).prop_map(|ts| series(&ts, 2))
}

/// Series of valuation exactly `v` whose leading coefficient is 1 or 2, so that ≈ often holds.
fn arb_lead(v: i64) -> impl Strategy<Value = PuiseuxSeries> {
    (1i64..=2, prop::collection::vec((1i64..6, -2i64..=2), 0..3)).prop_map(move |(c, tail)| {
        let mut ts = vec![(2 * v, c)];
        ts.extend(tail.into_iter().map(|(k, c)| (2 * v + k, c)));
        series(&ts, 2)
    })
}

fn arb_point2() -> impl Strategy<Value = Point> {
    (arb_lead(0), arb_lead(1)).prop_map(|(a, b)| Point::new(vec![a, b]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ultrametric_inequality(a in arb_series(), b in arb_series()) {
        let va = a.valuation().unwrap();
        let vb = b.valuation().unwrap();
        let vs = a.add(&b).valuation().unwrap();
        prop_assert!(vs >= va.min(vb));
        if va != vb {
            prop_assert_eq!(vs, va.min(vb));
        }
    }

    #[test]
    fn approx_is_an_equivalence(a in arb_point2(), b in arb_point2(), c in arb_point2()) {
        prop_assert!(a.approx(&a).unwrap());
        prop_assert_eq!(a.approx(&b).unwrap(), b.approx(&a).unwrap());
        if a.approx(&b).unwrap() && b.approx(&c).unwrap() {
            prop_assert!(a.approx(&c).unwrap());
        }
    }

    #[test]
    fn tuple_valuation_is_coordinate_minimum(a in arb_series(), b in arb_series()) {
        let p = Point::new(vec![a.clone(), b.clone()]);
        prop_assert_eq!(p.valuation().unwrap(), a.valuation().unwrap().min(b.valuation().unwrap()));
    }
}

#[test]
fn rv_classes_match_approx_over_f2() {
    let exps = [e(0, 1), e(1, 2), e(1, 1), e(3, 2)];
    let mut family = vec![];
    for mask in 1u32..16 {
        let terms = (0..4).filter(|i| mask & (1 << i) != 0).map(|i| (exps[i], Coeff::Fp(2, 1)));
        family.push(Point::new(vec![PuiseuxSeries::from_terms(terms, Gamma::Fin(e(2, 1)))]));
    }
    for a in &family {
        for b in &family {
            assert_eq!(a.rv().unwrap() == b.rv().unwrap(), a.approx(b).unwrap(), "{a} vs {b}");
        }
    }
}

fn ball_family() -> Vec<Ball> {
    let mut out = vec![];
    for c in ["0", "t", "t^2", "1"] {
        for r in 0..=2 {
            for kind in [BallKind::Closed, BallKind::Open] {
                out.push(Ball::new(parse_point(c).unwrap(), e(r, 1), kind).unwrap());
            }
        }
    }
    out
}

fn samples() -> Vec<Point> {
    let mut out = vec![];
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                out.push(Point::new(vec![series(&[(0, a), (1, b), (2, c)], 1)]));
            }
        }
    }
    // every 0/1 pattern on the exponents 0, 1/2, ..., 5/2
    for mask in 0..64i64 {
        let ts: Vec<(i64, i64)> = (0..6).filter(|k| mask >> k & 1 == 1).map(|k| (k, 1)).collect();
        out.push(Point::new(vec![series(&ts, 2)]));
    }
    out
}

#[test]
fn ball_relations_are_a_dichotomy() {
    let fam = ball_family();
    let pts = samples();
    for a in &fam {
        for b in &fam {
            let inside = |x: &Ball, y: &Ball| pts.iter().all(|p| !x.contains(p).unwrap() || y.contains(p).unwrap());
            let meet = pts.iter().any(|p| a.contains(p).unwrap() && b.contains(p).unwrap());
            match a.relate(b).unwrap() {
                Relation::Equal => assert!(inside(a, b) && inside(b, a)),
                Relation::FirstInSecond => assert!(inside(a, b)),
                Relation::SecondInFirst => assert!(inside(b, a)),
                Relation::Disjoint => assert!(!meet, "{} and {}", a.to_text(), b.to_text()),
            }
            if meet {
                assert!(a.includes(b).unwrap() || b.includes(a).unwrap());
            }
        }
    }
}

#[test]
fn canonical_forms() {
    let fam = ball_family();
    let pts = samples();
    for a in &fam {
        let c = a.canonical().unwrap();
        assert_eq!(c.canonical().unwrap(), c);
        for b in &fam {
            let same_set = pts.iter().all(|p| a.contains(p).unwrap() == b.contains(p).unwrap());
            assert_eq!(same_set, c == b.canonical().unwrap(), "{} vs {}", a.to_text(), b.to_text());
        }
    }
}

proptest! {
    #[test]
    fn join_radius_is_distance(a in arb_series(), b in arb_series()) {
        prop_assume!(!a.sub(&b).is_exact_zero());
        let (p, q) = (Point::new(vec![a]), Point::new(vec![b]));
        let j = join(&p, &q).unwrap();
        prop_assert_eq!(Gamma::Fin(j.radius), p.sub(&q).valuation().unwrap());
        prop_assert!(j.contains(&p).unwrap() && j.contains(&q).unwrap());
    }
}

fn unit_ball() -> Ball {
    Ball::closed(Point::origin(1), e(0, 1)).unwrap()
}

fn arb_config() -> impl Strategy<Value = FiniteConfig> {
    prop::collection::btree_set(prop::collection::vec(-2i64..=2, 4), 1..=4).prop_map(|set| {
        let pts = set
            .into_iter()
            .map(|cs| Point::new(vec![series(&cs.iter().enumerate().map(|(i, c)| (i as i64, *c)).collect::<Vec<_>>(), 1)]))
            .collect();
        FiniteConfig::new(Some(unit_ball()), pts).unwrap()
    })
}

fn ends_below(n: &TreeNode) -> Vec<Point> {
    let mut v = vec![];
    n.walk(&mut v);
    v.into_iter().filter(|m| m.role == NodeRole::End).map(|m| m.center.clone()).collect()
}

/// Depth of the deepest node whose subtree reaches both points.
fn separation(root: &TreeNode, a: &Point, b: &Point) -> Depth {
    let mut v = vec![];
    root.walk(&mut v);
    v.into_iter()
        .filter(|n| {
            let ends = ends_below(n);
            ends.iter().any(|p| p.same_as(a)) && ends.iter().any(|p| p.same_as(b))
        })
        .map(|n| n.depth)
        .max()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn risometry_is_an_equivalence(z in arb_config(), w in arb_config(), u in arb_config()) {
        prop_assert!(riso_equivalent(&z, &z).unwrap());
        prop_assert_eq!(riso_equivalent(&z, &w).unwrap(), riso_equivalent(&w, &z).unwrap());
        if riso_equivalent(&z, &w).unwrap() && riso_equivalent(&w, &u).unwrap() {
            prop_assert!(riso_equivalent(&z, &u).unwrap());
        }
    }

    #[test]
    fn risometry_invariance(z in arb_config(), c in prop::collection::vec(-2i64..=2, 3), tail in prop::collection::vec(-2i64..=2, 2)) {
        let shift = Point::new(vec![series(&c.iter().enumerate().map(|(i, x)| (i as i64, *x)).collect::<Vec<_>>(), 1)]);
        let unit = series(&[(0, 1), (1, tail[0]), (2, tail[1])], 1);
        let moved = z.points.iter().map(|p| p.scale(&unit).add(&shift)).collect();
        let w = FiniteConfig::new(Some(unit_ball()), moved).unwrap();
        prop_assert!(riso_equivalent(&z, &w).unwrap());
    }

    #[test]
    fn finite_tree_separations(z in arb_config()) {
        let tree = riso_tree_finite(&z).unwrap();
        let root = tree.tr0.as_ref().unwrap();
        for (i, a) in z.points.iter().enumerate() {
            for b in &z.points[i + 1..] {
                let v = a.sub(b).valuation().unwrap().unwrap();
                prop_assert_eq!(separation(root, a, b), Depth::Fin(v));
            }
        }
        for n in tree.nodes() {
            if let Some(ball) = n.ball() {
                prop_assert!(z.points.iter().any(|p| ball.contains(p).unwrap()));
            }
        }
    }
}

fn m(s: &str) -> Member {
    Member::parse(s).unwrap()
}

fn examples() -> Vec<Vec<Member>> {
    vec![
        vec![m("y^2 - x^3")],
        vec![m("x*y - 1")],
        vec![m("x*y - t")],
        vec![m("y"), m("y - t*x")],
        vec![m("y"), m("{(0,0)}")],
        vec![m("y^2 - t*x")],
        vec![m("x*(x - 1)")],
        vec![m("y - x^2")],
        vec![m("x^2 + y^2 - 1")],
    ]
}

#[test]
fn rtrdim_is_monotone_on_nested_balls() {
    let centers = ["(0,0)", "(1,0)", "(t^4,0)", "(1,1)", "(t^(1/2),t^(1/2))"];
    let radii = [e(-1, 1), e(0, 1), e(1, 2), e(1, 1), e(2, 1), e(4, 1)];
    let mut balls = vec![];
    for c in centers {
        for r in radii {
            for kind in [BallKind::Closed, BallKind::Open] {
                balls.push(Ball::new(parse_point(c).unwrap(), r, kind).unwrap());
            }
        }
    }
    for z in examples() {
        let dims: Vec<u8> = balls.iter().map(|b| rtrdim_on_ball(&z, b).unwrap()).collect();
        for (i, inner) in balls.iter().enumerate() {
            for (j, outer) in balls.iter().enumerate() {
                if outer.includes(inner).unwrap() {
                    assert!(dims[i] >= dims[j], "{} in {}: {} < {}", inner.to_text(), outer.to_text(), dims[i], dims[j]);
                }
            }
        }
    }
}

#[test]
fn branches_are_certified() {
    let w = e(12, 1);
    for (f, p) in [
        ("y^2 - x^3", "(0,0)"),
        ("y^2 - x^2 - x^3", "(0,0)"),
        ("(y - x^2)*(y + x^2) - x^5", "(0,0)"),
        ("x^2 + y^2 - 1", "(1,0)"),
        ("y^3 - x^7", "(0,0)"),
    ] {
        let c = CurvePoly::parse(f).unwrap();
        for b in newton_puiseux(&c, &parse_point(p).unwrap(), w, DEFAULT_EXT_BOUND).unwrap().branches {
            let r = b.residual(&c);
            assert!(r.is_exact_zero() || r.valuation_lb() >= Gamma::Fin(b.series.omega().fin().unwrap_or(w)), "{f}: {b}");
        }
    }
}

fn tree_examples() -> Vec<Vec<Member>> {
    let mut v = examples();
    v.push(vec![m("y^2 - x^2 - x^3")]);
    v
}

#[test]
fn tr0_balls_meet_the_control_set() {
    for z in tree_examples() {
        let t = riso_tree_curve(&z, &TreeOptions::default()).unwrap();
        for n in t.nodes() {
            if let Some(ball) = n.ball() {
                assert!(t.control.iter().any(|p| ball.contains(p).unwrap()), "{} misses the control set", ball.to_text());
            }
        }
    }
}

/// A rational point b with v(b − center) = λ in the given residue direction.
fn along(center: &Point, lambda: Exp, direction: &str) -> Option<Point> {
    let tl = PuiseuxSeries::t_pow(lambda);
    let step = match direction {
        "X = 0" => Point::new(vec![PuiseuxSeries::zero(), tl]),
        "Y = 0" => Point::new(vec![tl, PuiseuxSeries::zero()]),
        d => {
            let r = d.strip_prefix("Y = ")?.strip_suffix("*X")?;
            let r = r.trim_start_matches('(').trim_end_matches(')');
            let s = riso_core::expr::parse_series(r).ok()?;
            Point::new(vec![tl.clone(), tl.mul(&s)])
        }
    };
    Some(center.add(&step))
}

#[test]
fn edge_families_are_trivial_on_samples() {
    for z in tree_examples() {
        let t = riso_tree_curve(&z, &TreeOptions::default()).unwrap();
        for c in &t.components {
            let Attachment::Edge { center, from, to, direction } = &c.attachment else { continue };
            let lambda = match (from, to) {
                (Depth::Fin(a), Depth::Fin(b)) => (*a + *b) / 2,
                (Depth::Fin(a), _) => *a + 1,
                (_, Depth::Fin(b)) => *b - 1,
                _ => Exp::from_integer(0),
            };
            let Some(b) = along(center, lambda, direction) else { continue };
            let ball = Ball::open(b, lambda).unwrap();
            assert_eq!(rtrdim_on_ball(&z, &ball).unwrap() as usize, c.d, "{} for {:?}", ball.to_text(), z);
        }
    }
}

fn tree_shape(members: &[Member], swap: bool) -> Vec<(Depth, String, String)> {
    let t = riso_tree_curve(members, &TreeOptions::default()).unwrap();
    let mut v: Vec<_> = t
        .nodes()
        .into_iter()
        .map(|n| {
            let c = if swap { Point::new(vec![n.center.coords[1].clone(), n.center.coords[0].clone()]) } else { n.center.clone() };
            (n.depth, format!("{:?}", n.role), if n.depth.fin().is_some() { String::new() } else { c.to_string() })
        })
        .collect();
    v.sort();
    v
}

#[test]
fn coordinate_swap_symmetry() {
    for f in ["y^2 - x^3", "x*y - 1", "x*y - t", "y^2 - x^2 - x^3", "y - x^2"] {
        let c = CurvePoly::parse(f).unwrap();
        let a = tree_shape(&[Member::Curve(c.clone())], false);
        let b = tree_shape(&[Member::Curve(c.swapped())], true);
        assert_eq!(a, b, "{f}");
        let ta = riso_tree_curve(&[Member::Curve(c.clone())], &TreeOptions::default()).unwrap();
        let tb = riso_tree_curve(&[Member::Curve(c.swapped())], &TreeOptions::default()).unwrap();
        let fibers = |t: &riso_core::tree::RisoTreeSummary| {
            let mut v: Vec<(usize, Option<usize>)> = t.components.iter().map(|c| (c.d, c.fiber.as_ref().map(|f| f.points))).collect();
            v.sort();
            v
        };
        assert_eq!(fibers(&ta), fibers(&tb), "{f}");
    }
}

#[test]
fn stratification_laws() {
    for z in [vec![m("y^2 - x^3")], vec![m("x^2 + y^2 - 1")], vec![m("y^2 - x^2 - x^3")], vec![m("y"), m("{(1,0)}")], vec![m("x*y")]] {
        let s = riso_stratification(&z, DEFAULT_EXT_BOUND).unwrap();
        for r in &s.s1.removed {
            assert!(s.s0.iter().any(|p| p.same_as(r)), "{r} removed from S1 but not in S0");
        }
        for e in &s.s1.extra {
            assert!(!s.s0.iter().any(|p| p.same_as(e)));
        }
        assert!(s.undetermined.is_empty());
        for (p, d) in &s.pointwise {
            assert_eq!(*d == 0, s.s0.iter().any(|q| q.same_as(p)), "{p}");
        }
        let one = riso_stratification_n(&z, 1, DEFAULT_EXT_BOUND).unwrap();
        for (p, d) in &one.pointwise {
            if let Some((_, d2)) = s.pointwise.iter().find(|(q, _)| q.same_as(p)) {
                assert!(d2 <= d, "{p}: stratum index grew from {d} to {d2}");
            }
        }
        assert!(s.stable);
    }
}

#[test]
fn profile_segments_pass_through_samples() {
    let mus: Vec<Exp> = (1..=4).map(|k| e(k, 1)).collect();
    for f in ["y^2 + z^2 - x^3", "y^2 - z^3 - x^2", "y*z - x"] {
        let p = fiber_profile(&Fibered::parse(f).unwrap(), &mus, &TreeOptions::default()).unwrap();
        for s in &p.samples {
            let mu = s.mu.unwrap();
            let seg = p.segments.iter().find(|g| g.from <= mu && mu <= g.to).expect("sample covered by a segment");
            assert_eq!(s.radius, Depth::Fin(seg.slope * mu + seg.offset), "{f} at {mu}");
        }
    }
}

fn big(v: &[u64]) -> Vec<BigInt> {
    v.iter().map(|x| BigInt::from(*x)).collect()
}

fn opts(l: u32, slack: u32) -> PoincareOptions {
    PoincareOptions { lmax: l, slack }
}

#[test]
fn optimized_counts_match_the_oracle() {
    for (f, p, l) in [("y", 3, 3), ("x^2 + y^2 - 1", 3, 3), ("x*y", 2, 3), ("y^2 - x^3", 2, 3), ("x*y - 2", 2, 3), ("y^2 - 2", 3, 2)] {
        let fs = [parse_poly(f, &["x", "y"]).unwrap()];
        let a = poincare_count(&fs, Base::Zp(p), None, &opts(l, 4)).unwrap();
        let b = poincare_oracle(&fs, Base::Zp(p), None, &opts(l, 4)).unwrap();
        assert_eq!(a.coeffs, b.coeffs, "{f} at p = {p}");
    }
    let fs = [parse_poly("y^2 - x^3", &["x", "y"]).unwrap()];
    assert_eq!(poincare_count(&fs, Base::Fq(3), None, &opts(2, 4)).unwrap().coeffs, poincare_oracle(&fs, Base::Fq(3), None, &opts(2, 4)).unwrap().coeffs);
    assert_eq!(poincare_count(&[parse_poly("y^2 - 2", &["x", "y"]).unwrap()], Base::Zp(3), None, &opts(2, 3)).unwrap().coeffs, big(&[0, 0, 0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counts_are_shear_invariant(k in 0usize..4, c in -3i64..=3, p in prop::sample::select(vec![2u64, 3, 5])) {
        let f = ["y^2 - x^3", "x^2 + y^2 - 1", "x*y - 1", "y^2 - x^2 - x^3"][k];
        let g = CurvePoly::parse(f).unwrap();
        // (x, y) ↦ (x, y + c·x) preserves every ball of O²
        let sheared = g.poly.subst(1, &SPoly::var(2, 1).add(&SPoly::var(2, 0).scale(&PuiseuxSeries::int(c))));
        let a = poincare_count(&[g.poly.clone()], Base::Zp(p), None, &opts(3, 3)).unwrap();
        let b = poincare_count(&[sheared], Base::Zp(p), None, &opts(3, 3)).unwrap();
        prop_assert_eq!(a.coeffs, b.coeffs);
    }

    #[test]
    fn count_growth_bounds(k in 0usize..5, p in prop::sample::select(vec![2u64, 3, 5])) {
        let f = ["y^2 - x^3", "x^2 + y^2 - 1", "x*y - 1", "y^2 - 2", "x*y - t"][k];
        let s = poincare_count(&[parse_poly(f, &["x", "y"]).unwrap()], Base::Zp(p), None, &opts(3, 3)).unwrap();
        let q = BigInt::from(p * p);
        prop_assert!(s.coeffs[0] <= BigInt::from(1));
        for l in 0..s.coeffs.len() - 1 {
            prop_assert!(s.coeffs[l + 1] <= &q * &s.coeffs[l]);
            prop_assert!(s.coeffs[l + 1] <= q.pow(l as u32 + 1));
        }
    }
}
