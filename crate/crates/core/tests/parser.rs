use gpe_core::potential::{parse, BinOp, Expr, Func, PotentialError, Var, FUNCTIONS};
use gpe_core::{Grid, GridSpec};
use proptest::prelude::*;

/// Tree-walking reference evaluator, independent of the compiled program.
fn walk(e: &Expr, params: &[(String, f64)], rho: f64, s: f64) -> f64 {
    match e {
        Expr::Num(v) => *v,
        Expr::Var(Var::S) => s,
        Expr::Var(Var::Rho) => rho,
        Expr::Param(p) => params.iter().rev().find(|(n, _)| n == p).unwrap().1,
        Expr::Neg(a) => -walk(a, params, rho, s),
        Expr::Binary(op, a, b) => {
            let (x, y) = (walk(a, params, rho, s), walk(b, params, rho, s));
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => x.powf(y),
            }
        }
        Expr::Call(f, a) => {
            let x = walk(a, params, rho, s);
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Tanh => x.tanh(),
                Func::Sech => x.cosh().recip(),
                Func::Abs => x.abs(),
                other => panic!("{other:?} cannot appear in source"),
            }
        }
    }
}

const PARAMS: [&str; 4] = ["a", "w0", "k_1", "Amp"];

// Literals are never negative: a leading minus parses as negation.
fn literal() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..100).prop_map(f64::from),
        0.0f64..10.0,
        (1e-12f64..1e12),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        literal().prop_map(Expr::Num),
        Just(Expr::Var(Var::S)),
        Just(Expr::Var(Var::Rho)),
        prop::sample::select(&PARAMS[..]).prop_map(|p| Expr::Param(p.to_string())),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let ops = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow];
        let funcs = [Func::Sin, Func::Cos, Func::Exp, Func::Tanh, Func::Sech, Func::Abs];
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (prop::sample::select(ops.to_vec()), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (prop::sample::select(funcs.to_vec()), inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

fn bindings() -> impl Strategy<Value = Vec<(String, f64)>> {
    prop::collection::vec(-3.0f64..3.0, PARAMS.len())
        .prop_map(|v| PARAMS.iter().map(|p| p.to_string()).zip(v).collect())
}

fn close(a: f64, b: f64) -> bool {
    if a.is_nan() || b.is_nan() {
        return a.is_nan() && b.is_nan();
    }
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-15 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn printed_tree_reparses_to_itself(e in expr()) {
        let text = e.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(back.root(), &e, "{}", text);
    }

    #[test]
    fn compiled_program_matches_tree_walk(
        e in expr(),
        params in bindings(),
        rho in 0.0f64..6.0,
        s in -20.0f64..20.0,
    ) {
        let compiled = parse(&e.to_string()).unwrap().bind(&params).unwrap();
        let want = walk(&e, &params, rho, s);
        let got = compiled.value(rho, s);
        prop_assert!(close(got, want), "{} at ({}, {}): {} vs {}", e, rho, s, got, want);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,40}") {
        let _ = parse(&text);
    }

    #[test]
    fn grammar_shaped_text_never_panics(
        text in "[sroh0-9a-z_.eE+*/^() \\-]{0,40}",
    ) {
        if let Ok(e) = parse(&text) {
            let _ = e.bind(&[]);
        }
    }
}

#[test]
fn s_on_a_line_grid_is_the_node_list() {
    let grid = Grid::build(GridSpec::Line { s_min: -8.0, s_max: 8.0, n_s: 64 }).unwrap();
    let v = parse("s").unwrap().bind(&[]).unwrap().sample(&grid).unwrap();
    assert_eq!(v.values, grid.axial_nodes());
}

#[test]
fn division_by_a_node_at_zero_names_the_node() {
    let grid = Grid::build(GridSpec::Line { s_min: -8.0, s_max: 8.0, n_s: 64 }).unwrap();
    assert!(grid.axial_nodes().contains(&0.0));
    let err = parse("1/s").unwrap().bind(&[]).unwrap().sample(&grid).unwrap_err();
    match &err {
        PotentialError::NonFinite { s, .. } => assert_eq!(*s, 0.0),
        other => panic!("unexpected error {other:?}"),
    }
    assert!(err.to_string().contains("s = 0"));
}

#[test]
fn squared_sech_matches_inverse_cosh() {
    let c = parse("sech(s)^2").unwrap().bind(&[]).unwrap();
    for k in -40..=40 {
        let s = 0.25 * k as f64;
        let want = 1.0 / s.cosh().powi(2);
        assert!((c.value(0.0, s) - want).abs() <= 1e-15, "s = {s}");
    }
}

#[test]
fn gaussian_barrier_peaks_at_its_amplitude() {
    let params = [("A".to_string(), 0.1), ("w".to_string(), 1.0), ("s0".to_string(), 2.0)];
    let c = parse("A*exp(-(s-s0)^2/w^2)").unwrap().bind(&params).unwrap();
    assert_eq!(c.value(0.0, 2.0), 0.1);
    assert!(c.value(0.0, 5.0) < 0.1 * (-8.9f64).exp());
}

#[test]
fn unknown_functions_list_the_allowed_ones() {
    let err = parse("log(s)").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("log"));
    for f in FUNCTIONS {
        assert!(msg.contains(f), "{msg}");
    }
}

#[test]
fn unbound_parameters_are_named() {
    let err = parse("k*s").unwrap().bind(&[]).unwrap_err();
    assert!(matches!(err, PotentialError::UnboundParameter { ref name, .. } if name == "k"));
}

#[test]
fn syntax_errors_carry_an_offset() {
    match parse("s + * 2").unwrap_err() {
        PotentialError::Syntax { offset, .. } => assert_eq!(offset, 4),
        other => panic!("unexpected error {other:?}"),
    }
}
