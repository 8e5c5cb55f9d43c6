//! Risometry classification of finite point sets and riso-trees of finite subsets of K.

use crate::ball::{Ball, BallKind};
use crate::error::{Result, RisoError};
use crate::gamma::{Exp, Gamma};
use crate::point::{Point, RvClass};
use crate::tree::{Attachment, Component, Depth, NodeRole, RisoTreeSummary, TreeNode};

pub const MAX_POINTS: usize = 64;

#[derive(Clone, Debug)]
pub struct FiniteConfig {
    pub ambient: Option<Ball>,
    pub points: Vec<Point>,
}

impl FiniteConfig {
    pub fn new(ambient: Option<Ball>, points: Vec<Point>) -> Result<Self> {
        if points.len() > MAX_POINTS {
            return Err(RisoError::InvalidInput(format!("at most {MAX_POINTS} points supported")));
        }
        for (i, p) in points.iter().enumerate() {
            for q in &points[..i] {
                if p.sub(q).valuation()?.is_inf() {
                    return Err(RisoError::InvalidInput(format!("repeated point {p}")));
                }
            }
            if let Some(b) = &ambient {
                if !b.contains(p)? {
                    return Err(RisoError::InvalidInput(format!("{p} lies outside {b}")));
                }
            }
        }
        Ok(FiniteConfig { ambient, points })
    }

    /// rv(a_i − a_j) for all ordered pairs.
    pub fn profile(&self) -> Result<Vec<Vec<RvClass>>> {
        let m = self.points.len();
        let mut out = vec![vec![RvClass { lambda: Gamma::Inf, lead: vec![] }; m]; m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    out[i][j] = self.points[i].sub(&self.points[j]).rv()?;
                }
            }
        }
        Ok(out)
    }
}

fn sort_key(p: &Point) -> Result<(Gamma, String)> {
    let v = p.valuation()?;
    let lead = p.rv()?.lead.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
    Ok((v, lead))
}

fn sorted(z: &FiniteConfig) -> Result<FiniteConfig> {
    let mut keyed = z.points.iter().map(|p| Ok((sort_key(p)?, p.clone()))).collect::<Result<Vec<_>>>()?;
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.to_string().cmp(&b.1.to_string())));
    Ok(FiniteConfig { ambient: z.ambient.clone(), points: keyed.into_iter().map(|(_, p)| p).collect() })
}

/// Decides whether some bijection matches all leading terms of pairwise differences,
/// with warnings for configurations the criterion does not cover.
pub fn riso_equivalent_report(z: &FiniteConfig, w: &FiniteConfig) -> Result<(bool, Vec<String>)> {
    let mut warnings = vec![];
    if z.points.len() != w.points.len() {
        return Ok((false, warnings));
    }
    match (&z.ambient, &w.ambient) {
        (Some(a), Some(b)) => {
            if a.kind != b.kind {
                warnings.push("ambient balls mix open and closed kinds; reported as not equivalent".into());
                return Ok((false, warnings));
            }
            if a.radius != b.radius {
                return Ok((false, warnings));
            }
        }
        (None, None) => {}
        _ => return Ok((false, warnings)),
    }
    let z = sorted(z)?;
    let w = sorted(w)?;
    let pz = z.profile()?;
    let pw = w.profile()?;
    let m = z.points.len();
    let mut assign = vec![usize::MAX; m];
    let mut used = vec![false; m];
    fn search(i: usize, pz: &[Vec<RvClass>], pw: &[Vec<RvClass>], assign: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let m = pz.len();
        if i == m {
            return true;
        }
        for q in 0..m {
            if used[q] {
                continue;
            }
            if (0..i).all(|j| pz[i][j] == pw[q][assign[j]]) {
                used[q] = true;
                assign[i] = q;
                if search(i + 1, pz, pw, assign, used) {
                    return true;
                }
                used[q] = false;
            }
        }
        false
    }
    Ok((search(0, &pz, &pw, &mut assign, &mut used), warnings))
}

pub fn riso_equivalent(z: &FiniteConfig, w: &FiniteConfig) -> Result<bool> {
    Ok(riso_equivalent_report(z, w)?.0)
}

pub fn min_pair_val(pts: &[Point]) -> Result<Exp> {
    let mut best: Option<Exp> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let v = pts[i].sub(&pts[j]).valuation()?.unwrap();
            best = Some(best.map_or(v, |b: Exp| b.min(v)));
        }
    }
    Ok(best.expect("at least two points"))
}

/// Partition into the open balls B(p, >δ).
pub fn clusters(pts: &[Point], delta: Exp) -> Result<Vec<Vec<Point>>> {
    let mut out: Vec<Vec<Point>> = vec![];
    for p in pts {
        let mut placed = false;
        for c in out.iter_mut() {
            if c[0].sub(p).valuation_at_least(delta, true)? {
                c.push(p.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            out.push(vec![p.clone()]);
        }
    }
    Ok(out)
}

fn cluster_tree(pts: &[Point]) -> Result<TreeNode> {
    if pts.len() == 1 {
        return Ok(TreeNode { depth: Depth::Inf, center: pts[0].clone(), role: NodeRole::End, children: vec![] });
    }
    let delta = min_pair_val(pts)?;
    let mut children = vec![];
    for c in clusters(pts, delta)? {
        children.push(cluster_tree(&c)?);
    }
    let center = Ball::closed(pts[0].clone(), delta)?.center;
    Ok(TreeNode { depth: Depth::Fin(delta), center, role: NodeRole::Branch, children })
}

/// Tr₀ is the set of balls meeting Z: one infinite branch per point, branching where
/// points separate. Everything else has riso-triviality dimension 1.
pub fn riso_tree_finite(z: &FiniteConfig) -> Result<RisoTreeSummary> {
    let n = z.points.first().map_or(1, |p| p.dim());
    let z = sorted(z)?;
    let root_depth = z.ambient.as_ref().map_or(Depth::NegInf, |b| Depth::Fin(b.radius));
    let root_center = match &z.ambient {
        Some(b) => b.center.clone(),
        None => z.points.first().cloned().unwrap_or_else(|| Point::origin(n)),
    };
    let tr0 = if z.points.is_empty() {
        None
    } else {
        let t = cluster_tree(&z.points)?;
        let merge = match (&z.ambient, t.depth) {
            (Some(b), Depth::Fin(d)) => b.kind == BallKind::Closed && d == b.radius,
            _ => false,
        };
        if merge {
            Some(TreeNode { role: NodeRole::Root, ..t })
        } else {
            Some(TreeNode { depth: root_depth, center: root_center, role: NodeRole::Root, children: vec![t] })
        }
    };
    Ok(RisoTreeSummary {
        n,
        tr0,
        components: vec![Component { d: n, attachment: Attachment::Complement, projection: (0..n).collect(), fiber: None }],
        control: z.points.clone(),
        notes: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_point;

    fn cfg(pts: &[&str]) -> FiniteConfig {
        let ball = Ball::closed(Point::origin(1), Exp::from_integer(0)).unwrap();
        FiniteConfig::new(Some(ball), pts.iter().map(|s| parse_point(s).unwrap()).collect()).unwrap()
    }

    #[test]
    fn equivalence_examples() {
        assert!(riso_equivalent(&cfg(&["0", "t"]), &cfg(&["t^2", "t^2 + t"])).unwrap());
        assert!(!riso_equivalent(&cfg(&["0", "t"]), &cfg(&["0", "2*t"])).unwrap());
        assert!(riso_equivalent(&cfg(&["t"]), &cfg(&["1"])).unwrap());
    }

    #[test]
    fn finite_tree_depths() {
        let z = FiniteConfig::new(
            None,
            ["0", "t^2", "t^2 + t^4", "1", "1 + t^3"].iter().map(|s| parse_point(s).unwrap()).collect(),
        )
        .unwrap();
        let tree = riso_tree_finite(&z).unwrap();
        let d: Vec<String> = tree.branching_depths().iter().map(|d| d.render()).collect();
        assert_eq!(d, vec!["0", "2", "3", "4"]);
        let single = riso_tree_finite(&FiniteConfig::new(None, vec![parse_point("0").unwrap()]).unwrap()).unwrap();
        assert!(single.branching_depths().is_empty());
        let two = riso_tree_finite(&cfg(&["0", "1"])).unwrap();
        assert_eq!(two.branching_depths(), vec![Depth::Fin(Exp::from_integer(0))]);
    }
}
