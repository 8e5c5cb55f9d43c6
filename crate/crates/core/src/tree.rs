//! Finite descriptions of riso-trees: the Tr₀ tree plus component families in
//! "line^d × Tr′₀" form.

use serde_json::{json, Value};

use crate::ball::Ball;
use crate::gamma::{fmt_exp, Exp};
use crate::point::Point;

pub const SCHEMA: &str = "riso/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    NegInf,
    Fin(Exp),
    Inf,
}

impl Depth {
    pub fn render(&self) -> String {
        match self {
            Depth::NegInf => "-inf".into(),
            Depth::Fin(e) => fmt_exp(e),
            Depth::Inf => "inf".into(),
        }
    }

    pub fn fin(&self) -> Option<Exp> {
        match self {
            Depth::Fin(e) => Some(*e),
            _ => None,
        }
    }
}

/// How a Tr₀ path ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalKind {
    /// The closed ball at this radius is the last member.
    Closed,
    /// The open ball at this radius is the last member.
    Open,
    /// All balls strictly above this radius are members, the closed ball at it is not.
    Limit,
    /// Still in Tr₀ at the precision limit.
    Precision,
}

impl TerminalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminalKind::Closed => "closed",
            TerminalKind::Open => "open",
            TerminalKind::Limit => "limit",
            TerminalKind::Precision => "precision",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeRole {
    Root,
    Branch,
    Terminal(TerminalKind),
    /// Infinite branch converging to the point `center`.
    End,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub depth: Depth,
    pub center: Point,
    pub role: NodeRole,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn walk<'a>(&'a self, out: &mut Vec<&'a TreeNode>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }

    /// The ball represented by a node of finite depth (closed unless an open terminal).
    pub fn ball(&self) -> Option<Ball> {
        let r = self.depth.fin()?;
        match self.role {
            NodeRole::Terminal(TerminalKind::Open) => Ball::open(self.center.clone(), r).ok(),
            NodeRole::Terminal(TerminalKind::Limit) => None,
            _ => Ball::closed(self.center.clone(), r).ok(),
        }
    }

    fn to_json(&self) -> Value {
        let mut v = json!({
            "depth": self.depth.render(),
            "center": self.center.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "role": match &self.role {
                NodeRole::Root => "root",
                NodeRole::Branch => "branch",
                NodeRole::Terminal(_) => "terminal",
                NodeRole::End => "end",
            },
            "children": self.children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        });
        if let NodeRole::Terminal(k) = &self.role {
            v["terminal"] = json!(k.as_str());
            v["radius"] = json!(self.depth.render());
        }
        if let Some(b) = self.ball() {
            v["ball"] = json!(b.to_text());
        }
        v
    }
}

/// Depth as an affine function a·λ + b of the attachment depth λ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinearDepth {
    pub slope: Exp,
    pub offset: Exp,
}

impl LinearDepth {
    pub fn at(&self, lambda: Exp) -> Exp {
        self.slope * lambda + self.offset
    }

    pub fn render(&self) -> String {
        let z = Exp::from_integer(0);
        let a = if self.slope == Exp::from_integer(1) {
            "λ".to_string()
        } else if self.slope == z {
            String::new()
        } else {
            format!("({})*λ", fmt_exp(&self.slope))
        };
        match (a.is_empty(), self.offset == z) {
            (true, _) => fmt_exp(&self.offset),
            (false, true) => a,
            (false, false) if self.offset < z => format!("{a} - {}", fmt_exp(&-self.offset)),
            (false, false) => format!("{a} + {}", fmt_exp(&self.offset)),
        }
    }
}

/// The fiber tree Tr′₀ of a component family: finitely many fiber points and the depths
/// at which they separate.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberTree {
    pub points: usize,
    pub separations: Vec<LinearDepth>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Attachment {
    /// Every ball not otherwise listed.
    Complement,
    /// Open balls directly below a fixed Tr₀ ball, indexed by the residue curve.
    Node { ball: Ball, residue_curve: String },
    /// Open balls B(b, >λ) with v(b − center) = λ in the depth interval, in the residue direction.
    Edge { center: Point, from: Depth, to: Depth, direction: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub d: usize,
    pub attachment: Attachment,
    pub projection: Vec<usize>,
    pub fiber: Option<FiberTree>,
}

impl Component {
    fn to_json(&self) -> Value {
        let att = match &self.attachment {
            Attachment::Complement => json!({"kind": "complement"}),
            Attachment::Node { ball, residue_curve } => {
                json!({"kind": "node", "ball": ball.to_text(), "residue_curve": residue_curve})
            }
            Attachment::Edge { center, from, to, direction } => json!({
                "kind": "edge",
                "center": center.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "from": from.render(),
                "to": to.render(),
                "direction": direction,
            }),
        };
        json!({
            "d": self.d,
            "attachment": att,
            "projection": self.projection,
            "fiber_tree": self.fiber.as_ref().map(|f| json!({
                "points": f.points,
                "separations": f.separations.iter().map(|s| s.render()).collect::<Vec<_>>(),
                "note": f.note,
            })),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RisoTreeSummary {
    pub n: usize,
    pub tr0: Option<TreeNode>,
    pub components: Vec<Component>,
    /// The finite control set Y₀ every Tr₀ ball must meet.
    pub control: Vec<Point>,
    pub notes: Vec<String>,
}

impl RisoTreeSummary {
    pub fn nodes(&self) -> Vec<&TreeNode> {
        let mut v = vec![];
        if let Some(r) = &self.tr0 {
            r.walk(&mut v);
        }
        v
    }

    /// Depths of nodes with at least two children, sorted.
    pub fn branching_depths(&self) -> Vec<Depth> {
        let mut d: Vec<Depth> = self.nodes().into_iter().filter(|n| n.children.len() >= 2).map(|n| n.depth).collect();
        d.sort();
        d
    }

    pub fn terminals(&self) -> Vec<(&TreeNode, TerminalKind)> {
        self.nodes()
            .into_iter()
            .filter_map(|n| match n.role {
                NodeRole::Terminal(k) => Some((n, k)),
                _ => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "dim": self.n,
            "tr0": self.tr0.as_ref().map(|r| r.to_json()),
            "components": self.components.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "control": self.control.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("Tr0:\n");
        fn emit(n: &TreeNode, indent: usize, out: &mut String) {
            let role = match &n.role {
                NodeRole::Root => "root".to_string(),
                NodeRole::Branch => "branch".to_string(),
                NodeRole::Terminal(k) => format!("terminal ({})", k.as_str()),
                NodeRole::End => "end".to_string(),
            };
            out.push_str(&format!("{}{} at depth {}, center {}\n", "  ".repeat(indent + 1), role, n.depth.render(), n.center));
            for c in &n.children {
                emit(c, indent + 1, out);
            }
        }
        match &self.tr0 {
            Some(r) => emit(r, 0, &mut out),
            None => out.push_str("  empty\n"),
        }
        out.push_str("components:\n");
        for c in &self.components {
            let what = match &c.attachment {
                Attachment::Complement => "complement".to_string(),
                Attachment::Node { ball, residue_curve } => format!("below {} along {residue_curve}", ball.to_text()),
                Attachment::Edge { center, from, to, direction } => {
                    format!("edge ({}, {}) at {center}, direction {direction}", from.render(), to.render())
                }
            };
            out.push_str(&format!("  Tr{}: {what}", c.d));
            if let Some(f) = &c.fiber {
                let seps: Vec<String> = f.separations.iter().map(|s| s.render()).collect();
                out.push_str(&format!("; fiber {} point{}", f.points, if f.points == 1 { "" } else { "s" }));
                if !seps.is_empty() {
                    out.push_str(&format!(", separating at {}", seps.join(", ")));
                }
            }
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tr0 {\n  node [shape=box];\n");
        let mut id = 0usize;
        fn emit(n: &TreeNode, parent: Option<usize>, id: &mut usize, out: &mut String) {
            let me = *id;
            *id += 1;
            let role = match &n.role {
                NodeRole::Root => "root".to_string(),
                NodeRole::Branch => "branch".to_string(),
                NodeRole::Terminal(k) => format!("terminal {}", k.as_str()),
                NodeRole::End => "end".to_string(),
            };
            let label = format!("{} depth {}\\n{}", role, n.depth.render(), n.center).replace('"', "'");
            out.push_str(&format!("  n{me} [label=\"{label}\"];\n"));
            if let Some(p) = parent {
                out.push_str(&format!("  n{p} -> n{me};\n"));
            }
            for c in &n.children {
                emit(c, Some(me), id, out);
            }
        }
        if let Some(r) = &self.tr0 {
            emit(r, None, &mut id, &mut out);
        }
        for (k, c) in self.components.iter().enumerate() {
            let what = match &c.attachment {
                Attachment::Complement => "complement".to_string(),
                Attachment::Node { ball, .. } => format!("below {}", ball.to_text()),
                Attachment::Edge { from, to, direction, .. } => {
                    format!("edge ({}, {}) {}", from.render(), to.render(), direction)
                }
            };
            let fib = c
                .fiber
                .as_ref()
                .map(|f| {
                    let seps: Vec<String> = f.separations.iter().map(|s| s.render()).collect();
                    format!("{} pts; sep {}", f.points, seps.join(", "))
                })
                .unwrap_or_default();
            out.push_str(&format!(
                "  c{k} [shape=note,label=\"Tr{} {}\\n{}\"];\n",
                c.d,
                what.replace('"', "'"),
                fib
            ));
        }
        out.push_str("}\n");
        out
    }
}
