use std::process::Command;

use riso_core::expr::{parse, render, to_spoly};

const VARS: [&str; 3] = ["x", "y", "z"];

const CORPUS: [&str; 50] = [
    "y^2 - x^3",
    "y^2-x^3",
    "x*y - 1",
    "x*y - t",
    "y",
    "y - t*x",
    "y^2 + z^2 - x^3",
    "y^2 - z^3 - x^2",
    "y*z - x",
    "x^2 + y^2 - 1",
    "y^2 - x^2 - x^3",
    "x^2 - y^2 - y^3",
    "y^2 - t*x",
    "x*(x - 1)",
    "y - x^2",
    "(y - x^2)*(y + x^2) - x^5",
    "y^3 - x^7",
    "x^3 - y^7",
    "y^3 - x^4",
    "x*y*(x - y)",
    "x^2*y + y^3",
    "-x",
    "-(x + y)",
    "-x^2",
    "(-x)^2",
    "3",
    "-7/2",
    "1/3*x",
    "x*1/3",
    "2*x^2 - 3*x*y + 4*y^2",
    "t",
    "t^(1/2)",
    "t^(-1)*x",
    "t^(3/2)*y - x",
    "(1 + t)*x",
    "(1 + t^(1/3))^2",
    "x - (y - z)",
    "x - y - z",
    "(x - y) - z",
    "x*(y*z)",
    "(x*y)*z",
    "((x))",
    "(x^2)^3",
    "(x + 1)^3",
    "x^0",
    "0",
    "0*x + y",
    "x^10 - t^10",
    "z^2 - x*y",
    "  y ^ 2  -  x ^ 3  ",
];

#[test]
fn corpus_round_trips() {
    for src in CORPUS {
        let e = parse(src, &VARS).unwrap_or_else(|err| panic!("{src}: {err}"));
        let text = render(&e);
        let again = parse(&text, &VARS).unwrap_or_else(|err| panic!("{src} rendered as {text}: {err}"));
        assert_eq!(again, e, "{src} rendered as {text}");
        assert_eq!(render(&again), text, "{src}");
        assert_eq!(to_spoly(&again, &VARS).unwrap(), to_spoly(&e, &VARS).unwrap(), "{src}");
    }
}

fn riso(args: &[&str]) -> (i32, Vec<u8>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_riso")).args(args).output().expect("riso runs");
    (out.status.code().unwrap_or(-1), out.stdout, String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn reruns_are_byte_identical() {
    let runs: [&[&str]; 6] = [
        &["tree", "y^2-x^2-x^3"],
        &["tree", "y^2-x^3", "--format", "dot"],
        &["stratify", "y^2-x^3", "--c1"],
        &["poincare", "y^2-x^3", "--base", "Fq[[t]],q=2,3"],
        &["profile", "y^2+z^2-x^3"],
        &["finite-tree", "0", "t^2", "t^2+t^4", "1", "1+t^3"],
    ];
    for args in runs {
        let (c1, a, _) = riso(args);
        let (c2, b, _) = riso(args);
        assert_eq!(c1, 0, "{args:?}");
        assert_eq!((c1, &a), (c2, &b), "{args:?}");
    }
}

#[test]
fn exit_codes() {
    for (args, code) in [
        (&["puiseux", "x^(1/2)"][..], 2),
        (&["tree", "y^2-x^"][..], 2),
        (&["tree", "x*w"][..], 2),
        (&["rtrdim", "y", "--ball", "B((0,0),>0"][..], 2),
        (&["poincare", "y", "--base", "p=13"][..], 3),
        (&["poincare", "y", "--base", "q=4"][..], 3),
        (&["--mode", "real", "stratify", "y"][..], 3),
        (&["poincare", "y^2-x^3", "--slack", "0"][..], 4),
    ] {
        let (got, _, err) = riso(args);
        assert_eq!(got, code, "{args:?}: {err}");
        assert!(err.starts_with("error: "), "{args:?}: {err}");
    }
}

#[test]
fn precision_sources() {
    let (_, flag, _) = riso(&["--precision", "4", "puiseux", "y*(1 - x) - x"]);
    let flag = String::from_utf8(flag).unwrap();
    assert!(flag.contains("O(x^4)"), "{flag}");
    let out = Command::new(env!("CARGO_BIN_EXE_riso"))
        .args(["puiseux", "y*(1 - x) - x"])
        .env("RISO_PRECISION", "3")
        .output()
        .unwrap();
    let env = String::from_utf8(out.stdout).unwrap();
    assert!(env.contains("O(x^3)"), "{env}");
}
