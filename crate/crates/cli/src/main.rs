use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use riso_core::ball::Ball;
use riso_core::coeff::{Coeff, DEFAULT_EXT_BOUND};
use riso_core::curve::{newton_puiseux, puiseux_invariants, singular_locus, CurvePoly};
use riso_core::curvetree::{riso_tree_curve, TreeOptions};
use riso_core::error::RisoError;
use riso_core::expr::{parse_point, parse_poly, split_top};
use riso_core::finite::{riso_equivalent_report, riso_tree_finite, FiniteConfig};
use riso_core::gamma::{fmt_exp, parse_exp, Exp};
use riso_core::point::Point;
use riso_core::poincare::{
    check_fiber_identity, motivic_specialize, poincare_count, poincare_oracle, Base, PoincareOptions, DEFAULT_LMAX,
    DEFAULT_SLACK, HELD_OUT_Q,
};
use riso_core::rtrdim::{rtrdim_on_ball, Member};
use riso_core::series::DEFAULT_PRECISION;
use riso_core::spoly::SPoly;
use riso_core::strat::{fiber_profile, riso_stratification, strict_c1_locus, Fibered};
use riso_core::tree::SCHEMA;

#[derive(Parser)]
#[command(name = "riso", version, about = "Riso-trees, riso-stratifications and Poincaré series of valued-field sets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Absolute precision ω of series arithmetic (overrides RISO_PRECISION).
    #[arg(long, global = true)]
    precision: Option<i64>,
    /// Bound on the degree of coefficient fields.
    #[arg(long = "ext-bound", global = true, default_value_t = DEFAULT_EXT_BOUND)]
    ext_bound: usize,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Complex)]
    mode: Mode,
    /// Ball such as "B((0,0),>=1/2)".
    #[arg(long, global = true)]
    ball: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Complex,
    Real,
}

#[derive(Subcommand)]
enum Cmd {
    /// Riso-tree of plane curves and finite point sets.
    Tree { members: Vec<String> },
    /// Riso-triviality dimension on the ball given by --ball.
    Rtrdim { members: Vec<String> },
    /// Shadow iteration and the strata S0 ⊂ S1 ⊂ S2 in the plane.
    Stratify {
        members: Vec<String>,
        /// Also report the strict C¹ status at singular and control points.
        #[arg(long)]
        c1: bool,
    },
    /// Fiber radius profile of a surface f(x, y, z) = 0 over x = t^μ.
    Profile {
        poly: String,
        /// Comma-separated fiber exponents μ.
        #[arg(long, default_value = "1,2,3,4")]
        mu: String,
    },
    /// Ball-counting Poincaré series.
    Poincare {
        polys: Vec<String>,
        /// "p=3", "q=5" or "Fq[[t]],q=2,3,5,7".
        #[arg(long, default_value = "p=3")]
        base: String,
        #[arg(long, default_value_t = DEFAULT_LMAX)]
        lmax: u32,
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: u32,
        /// Interpolate the counts over F_q[[t]] as polynomials in q.
        #[arg(long)]
        motivic: bool,
        /// Use the naive exhaustive enumerator.
        #[arg(long)]
        oracle: bool,
        /// Compare with the fiber over the ball center after fixing these variables.
        #[arg(long, value_delimiter = ',')]
        fix: Vec<String>,
    },
    /// Tr₀ of a finite subset of K.
    FiniteTree { points: Vec<String> },
    /// Whether two finite sets are risometric.
    FiniteEq { first: String, second: String },
    /// Newton–Puiseux branches at a point.
    Puiseux {
        poly: String,
        #[arg(long, default_value = "(0,0)")]
        point: String,
    },
    /// Contact exponents between branches at the singular points.
    Invariants {
        poly: String,
        #[arg(long)]
        point: Option<String>,
    },
}

struct Out {
    text: String,
    json: Value,
    dot: Option<String>,
}

fn fail_input(msg: impl Into<String>) -> RisoError {
    RisoError::InvalidInput(msg.into())
}

fn exit_code(e: &RisoError) -> u8 {
    match e {
        RisoError::SyntaxError { .. }
        | RisoError::UnknownVariable(_)
        | RisoError::InvalidInput(_)
        | RisoError::NotSquarefree(_)
        | RisoError::NotNested(_) => 2,
        RisoError::Undetermined(_)
        | RisoError::UnsupportedConfiguration(_)
        | RisoError::UnsupportedBase(_)
        | RisoError::FitAmbiguous(_)
        | RisoError::InterpolationMismatch(_) => 3,
        RisoError::InsufficientPrecision(_) | RisoError::ExtensionRequired(_) | RisoError::UndecidableAtCap(_) => 4,
    }
}

fn precision(g: &Global) -> Result<i64, RisoError> {
    let w = match g.precision {
        Some(w) => w,
        None => match std::env::var("RISO_PRECISION") {
            Ok(s) => s.trim().parse().map_err(|_| fail_input(format!("RISO_PRECISION=`{s}` is not an integer")))?,
            Err(_) => DEFAULT_PRECISION,
        },
    };
    if w <= 0 {
        return Err(fail_input("precision must be positive"));
    }
    Ok(w)
}

fn tree_options(g: &Global) -> Result<TreeOptions, RisoError> {
    if g.ext_bound == 0 {
        return Err(fail_input("--ext-bound must be positive"));
    }
    Ok(TreeOptions {
        omega: Exp::from_integer(precision(g)?),
        bound: g.ext_bound,
        real: g.mode == Mode::Real,
        window: g.ball.as_deref().map(Ball::parse).transpose()?,
    })
}

fn members(src: &[String]) -> Result<Vec<Member>, RisoError> {
    if src.is_empty() {
        return Err(fail_input("give at least one curve or point set"));
    }
    src.iter().map(|s| Member::parse(s)).collect()
}

fn complex_only(g: &Global, what: &str) -> Result<(), RisoError> {
    if g.mode == Mode::Real {
        return Err(RisoError::UnsupportedConfiguration(format!("{what} works over the algebraic closure only")));
    }
    Ok(())
}

/// Polynomials in x, y, and z when it occurs in any of them or in `extra`.
fn polys_xyz(srcs: &[String], extra: &[String]) -> Result<Vec<SPoly>, RisoError> {
    let mut vars = vec!["x", "y"];
    let needs_z = extra.iter().any(|v| v == "z")
        || srcs.iter().any(|s| matches!(parse_poly(s, &vars), Err(RisoError::UnknownVariable(v)) if v == "z"));
    if needs_z {
        vars.push("z");
    }
    srcs.iter().map(|s| parse_poly(s, &vars)).collect()
}

fn point_set(src: &str) -> Result<Vec<Point>, RisoError> {
    let s = src.trim();
    let inner = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')).unwrap_or(s);
    split_top(inner).iter().filter(|p| !p.trim().is_empty()).map(|p| parse_point(p)).collect()
}

fn exps(src: &str) -> Result<Vec<Exp>, RisoError> {
    src.split(',')
        .map(|s| parse_exp(s.trim()).ok_or_else(|| fail_input(format!("`{s}` is not a rational number"))))
        .collect()
}

fn run(cli: &Cli) -> Result<Out, RisoError> {
    let g = &cli.global;
    let ball = g.ball.as_deref().map(Ball::parse).transpose()?;
    match &cli.cmd {
        Cmd::Tree { members: m } => {
            let t = riso_tree_curve(&members(m)?, &tree_options(g)?)?;
            Ok(Out { text: t.to_text(), json: t.to_json(), dot: Some(t.to_dot()) })
        }
        Cmd::Rtrdim { members: m } => {
            complex_only(g, "rtrdim")?;
            let b = ball.ok_or_else(|| fail_input("rtrdim needs --ball"))?;
            let d = rtrdim_on_ball(&members(m)?, &b)?;
            Ok(Out { text: format!("{d}\n"), json: json!({"schema": SCHEMA, "ball": b.to_text(), "rtrdim": d}), dot: None })
        }
        Cmd::Stratify { members: m, c1 } => {
            complex_only(g, "stratify")?;
            let ms = members(m)?;
            let s = riso_stratification(&ms, g.ext_bound)?;
            let mut text = s.to_text();
            let mut js = s.to_json();
            if *c1 {
                let curves: Vec<&CurvePoly> = ms
                    .iter()
                    .filter_map(|m| match m {
                        Member::Curve(c) => Some(c),
                        Member::Points(_) => None,
                    })
                    .collect();
                let mut rows = vec![];
                for c in curves {
                    for st in strict_c1_locus(&c.squarefree_part().0, g.ext_bound)? {
                        text.push_str(&format!("{}: {}\n", c.render(), st.render()));
                        rows.push(json!({"curve": c.render(), "point": st.point.to_string(), "strict_c1": st.c1}));
                    }
                }
                js["strict_c1"] = json!(rows);
            }
            Ok(Out { text, json: js, dot: None })
        }
        Cmd::Profile { poly, mu } => {
            let p = fiber_profile(&Fibered::parse(poly)?, &exps(mu)?, &tree_options(g)?)?;
            Ok(Out { text: p.to_text(), json: p.to_json(), dot: None })
        }
        Cmd::Poincare { polys, base, lmax, slack, motivic, oracle, fix } => {
            complex_only(g, "poincare")?;
            if polys.is_empty() {
                return Err(fail_input("give at least one polynomial"));
            }
            let fs = polys_xyz(polys, fix)?;
            let n = fs[0].n;
            let opts = PoincareOptions { lmax: *lmax, slack: *slack };
            let bases = Base::parse_list(base)?;
            if *motivic {
                let mut qs = vec![];
                for b in &bases {
                    match b {
                        Base::Fq(q) => qs.push(*q),
                        Base::Zp(_) => return Err(fail_input("--motivic needs an Fq[[t]] base")),
                    }
                }
                let m = motivic_specialize(&fs, ball.as_ref(), &qs, HELD_OUT_Q, &opts)?;
                return Ok(Out { text: m.to_text(), json: m.to_json(), dot: None });
            }
            let names = ["x", "y", "z"];
            let fixed: Vec<usize> = fix
                .iter()
                .map(|v| names[..n].iter().position(|w| w == v).ok_or_else(|| RisoError::UnknownVariable(v.clone())))
                .collect::<Result<_, _>>()?;
            let mut text = String::new();
            let mut rows = vec![];
            for b in bases {
                if !fixed.is_empty() {
                    let r = check_fiber_identity(&fs, b, ball.as_ref(), &fixed, &opts)?;
                    let s = |v: &[num_bigint::BigInt]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
                    text.push_str(&format!(
                        "base {b}\nlhs:   {}\nfiber: {}\nrhs:   {}\n{}\n",
                        s(&r.lhs),
                        s(&r.fiber),
                        s(&r.rhs),
                        match r.first_discrepancy {
                            None => "identity holds".to_string(),
                            Some(l) => format!("first discrepancy at lambda = {l}"),
                        }
                    ));
                    rows.push(r.to_json());
                } else {
                    let s = if *oracle { poincare_oracle(&fs, b, ball.as_ref(), &opts)? } else { poincare_count(&fs, b, ball.as_ref(), &opts)? };
                    text.push_str(&s.to_text());
                    rows.push(s.to_json());
                }
            }
            let js = if rows.len() == 1 { rows.pop().unwrap() } else { json!({"schema": SCHEMA, "results": rows}) };
            Ok(Out { text, json: js, dot: None })
        }
        Cmd::FiniteTree { points } => {
            let pts = points.iter().map(|s| point_set(s)).collect::<Result<Vec<_>, _>>()?.concat();
            let t = riso_tree_finite(&FiniteConfig::new(ball, pts)?)?;
            let depths: Vec<String> = t.branching_depths().iter().map(|d| d.render()).collect();
            let mut js = t.to_json();
            js["branching_depths"] = json!(depths);
            let text = format!("branching depths: [{}]\n{}", depths.join(", "), t.to_text());
            Ok(Out { text, json: js, dot: Some(t.to_dot()) })
        }
        Cmd::FiniteEq { first, second } => {
            let z = FiniteConfig::new(ball.clone(), point_set(first)?)?;
            let w = FiniteConfig::new(ball, point_set(second)?)?;
            let (eq, warnings) = riso_equivalent_report(&z, &w)?;
            let mut text = format!("{eq}\n");
            for w in &warnings {
                text.push_str(&format!("warning: {w}\n"));
            }
            Ok(Out { text, json: json!({"schema": SCHEMA, "risometric": eq, "warnings": warnings}), dot: None })
        }
        Cmd::Puiseux { poly, point } => {
            let f = CurvePoly::parse(poly)?.squarefree_part().0;
            let p = parse_point(point)?;
            let bs = newton_puiseux(&f, &p, Exp::from_integer(precision(g)?), g.ext_bound)?;
            let algebraic = bs.branches.iter().any(|b| b.series.terms().any(|(_, c)| matches!(c, Coeff::Nf(..))));
            let field = bs.field.as_ref().filter(|_| algebraic).map(|k| format!("{} = 0", k.minpoly_string()));
            let mut text = String::new();
            if let Some(k) = &field {
                text.push_str(&format!("coefficients in Q(a) with {k}\n"));
            }
            for b in &bs.branches {
                text.push_str(&format!("{b}  (multiplicity {})\n", b.mult));
            }
            let js = json!({
                "schema": SCHEMA,
                "point": p.to_string(),
                "field": field,
                "branches": bs.branches.iter().map(|b| json!({"branch": b.render(), "multiplicity": b.mult})).collect::<Vec<_>>(),
            });
            Ok(Out { text, json: js, dot: None })
        }
        Cmd::Invariants { poly, point } => {
            let f = CurvePoly::parse(poly)?.squarefree_part().0;
            let omega = Exp::from_integer(precision(g)?);
            let pts = match point {
                Some(p) => vec![parse_point(p)?],
                None => singular_locus(&f, g.ext_bound)?,
            };
            let mut rows = vec![];
            for p in &pts {
                let inv = puiseux_invariants(&f, p, omega, g.ext_bound)?;
                rows.push((p.to_string(), inv.iter().map(fmt_exp).collect::<Vec<_>>()));
            }
            let list = |v: &[String]| format!("[{}]", v.join(", "));
            let text = if rows.len() == 1 {
                format!("{}\n", list(&rows[0].1))
            } else {
                rows.iter().map(|(p, v)| format!("{p}: {}\n", list(v))).collect()
            };
            let js = json!({
                "schema": SCHEMA,
                "invariants": rows.iter().map(|(p, v)| json!({"point": p, "exponents": v})).collect::<Vec<_>>(),
            });
            Ok(Out { text, json: js, dot: None })
        }
    }
}

fn default_format(cmd: &Cmd) -> Format {
    match cmd {
        Cmd::Tree { .. } | Cmd::Stratify { .. } => Format::Json,
        _ => Format::Text,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.global.format.unwrap_or_else(|| default_format(&cli.cmd));
    match run(&cli) {
        Ok(out) => {
            let body = match format {
                Format::Text => out.text,
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&out.json).expect("serializable")),
                Format::Dot => match out.dot {
                    Some(d) => d,
                    None => {
                        eprintln!("error: this command has no dot output");
                        return ExitCode::from(2);
                    }
                },
            };
            // a closed pipe is not an error of ours
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
