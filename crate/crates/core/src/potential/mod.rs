//! External potentials given as text expressions over `s`, `rho` and named
//! parameters.
//!
//! Grammar (whitespace-insensitive), highest precedence first:
//!
//! ```text
//! primary := number | s | rho | name | func "(" expr ")" | "(" expr ")"
//! power   := primary ("^" unary)?          -- right associative
//! unary   := ("-" | "+") unary | power
//! term    := unary (("*" | "/") unary)*
//! expr    := term (("+" | "-") term)*
//! func    := sin | cos | exp | tanh | sech | abs
//! ```
//!
//! So `-s^2` is `-(s^2)` and `2^3^2` is `2^(3^2)`.

mod diff;
mod eval;
mod parser;

use std::fmt;

use thiserror::Error;

pub use eval::CompiledPotential;
pub use parser::parse;

use crate::grid::Grid;

/// Variables bound to grid coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    S,
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            Self::Add => '+',
            Self::Sub => '-',
            Self::Mul => '*',
            Self::Div => '/',
            Self::Pow => '^',
        }
    }

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Self::Add => a + b,
            Self::Sub => a - b,
            Self::Mul => a * b,
            Self::Div => a / b,
            Self::Pow => a.powf(b),
        }
    }
}

/// Functions. `Ln` and `Sign` only appear in derivatives and cannot be
/// written in source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
    Sech,
    Abs,
    Ln,
    Sign,
}

/// Function names accepted by the parser.
pub const FUNCTIONS: [&str; 6] = ["sin", "cos", "exp", "tanh", "sech", "abs"];

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Exp => "exp",
            Self::Tanh => "tanh",
            Self::Sech => "sech",
            Self::Abs => "abs",
            Self::Ln => "ln",
            Self::Sign => "sign",
        }
    }

    fn from_source(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "exp" => Self::Exp,
            "tanh" => Self::Tanh,
            "sech" => Self::Sech,
            "abs" => Self::Abs,
            _ => return None,
        })
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Self::Sin => x.sin(),
            Self::Cos => x.cos(),
            Self::Exp => x.exp(),
            Self::Tanh => x.tanh(),
            Self::Sech => 1.0 / x.cosh(),
            Self::Abs => x.abs(),
            Self::Ln => x.ln(),
            Self::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parameter names in order of first appearance.
    pub fn parameters(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    pub fn depends_on(&self, var: Var) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= *e == Expr::Var(var));
        found
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(a) | Expr::Call(_, a) => a.visit(f),
            Expr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Symbolic derivative with respect to `s`.
    pub fn derivative_s(&self) -> Expr {
        diff::derivative(self, Var::S)
    }
}

/// Fully parenthesized output that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var(Var::S) => f.write_str("s"),
            Expr::Var(Var::Rho) => f.write_str("rho"),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed potential expression.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialExpr {
    source: String,
    root: Expr,
}

impl PotentialExpr {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn parameters(&self) -> Vec<String> {
        self.root.parameters()
    }

    /// Binds every named parameter and compiles the expression and its
    /// `s`-derivative.
    pub fn bind(&self, params: &[(String, f64)]) -> Result<CompiledPotential, PotentialError> {
        CompiledPotential::compile(&self.root, params)
    }
}

impl fmt::Display for PotentialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("syntax error at byte {offset}: found {found}, expected one of: {}", expected.join(", "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },

    #[error("unknown function `{name}` at byte {offset}; allowed: {}", allowed.join(", "))]
    UnknownFunction {
        offset: usize,
        name: String,
        allowed: Vec<&'static str>,
    },

    #[error("unbound parameter `{name}`; bound names: s, rho{}", bound.iter().map(|b| format!(", {b}")).collect::<String>())]
    UnboundParameter { name: String, bound: Vec<String> },

    #[error("potential is not finite ({value}) at node rho = {rho}, s = {s}")]
    NonFinite { rho: f64, s: f64, value: f64 },
}

/// A compiled external potential together with its source text, ready to be
/// added to the trap term.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalPotential {
    expr: PotentialExpr,
    params: Vec<(String, f64)>,
    compiled: CompiledPotential,
}

impl ExternalPotential {
    pub fn new(text: &str, params: &[(String, f64)]) -> Result<Self, PotentialError> {
        let expr = parse(text)?;
        let compiled = expr.bind(params)?;
        Ok(Self {
            expr,
            params: params.to_vec(),
            compiled,
        })
    }

    pub fn expr(&self) -> &PotentialExpr {
        &self.expr
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn compiled(&self) -> &CompiledPotential {
        &self.compiled
    }

    pub fn sample(&self, grid: &Grid) -> Result<PotentialSamples, PotentialError> {
        self.compiled.sample(grid)
    }
}

/// Samples of a potential and of its `s`-derivative on a grid.
#[derive(Debug, Clone)]
pub struct PotentialSamples {
    pub values: Vec<f64>,
    pub gradient_s: Vec<f64>,
}

/// Evaluates `expr` at every node of `grid` after binding `params`.
/// Fails on unbound parameters or any non-finite value.
pub fn evaluate_on_grid(
    expr: &PotentialExpr,
    grid: &Grid,
    params: &[(String, f64)],
) -> Result<Vec<f64>, PotentialError> {
    expr.bind(params)?.sample(grid).map(|s| s.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};

    fn p(name: &str, v: f64) -> (String, f64) {
        (name.to_string(), v)
    }

    #[test]
    fn linear_tilt() {
        let e = parse("0.01*s").unwrap();
        assert_eq!(
            *e.root(),
            Expr::Binary(BinOp::Mul, Box::new(Expr::Num(0.01)), Box::new(Expr::Var(Var::S)))
        );
    }

    #[test]
    fn harmonic_arithmetic() {
        let c = parse("0.5*0.2^2*s^2").unwrap().bind(&[]).unwrap();
        assert!((c.value(0.0, 2.0) - 0.08).abs() < 1e-15);
    }

    #[test]
    fn gaussian_barrier_peak() {
        let c = parse("A*exp(-(s-s0)^2/w^2)")
            .unwrap()
            .bind(&[p("A", 0.1), p("s0", 5.0), p("w", 2.0)])
            .unwrap();
        assert!((c.value(0.0, 5.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn coordinates_verbatim() {
        let g = Grid::build(GridSpec::Line { s_min: -3.0, s_max: 3.0, n_s: 24 }).unwrap();
        let v = evaluate_on_grid(&parse("s").unwrap(), &g, &[]).unwrap();
        assert_eq!(v, g.axial_nodes());
    }

    #[test]
    fn division_by_zero_names_the_node() {
        let g = Grid::build(GridSpec::Line { s_min: -2.0, s_max: 2.0, n_s: 16 }).unwrap();
        match evaluate_on_grid(&parse("1/s").unwrap(), &g, &[]) {
            Err(PotentialError::NonFinite { s, .. }) => assert_eq!(s, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sech_identity() {
        let c = parse("sech(s)^2").unwrap().bind(&[]).unwrap();
        for s in [-3.0, -0.4, 0.0, 1.7, 6.0] {
            let expected = 1.0 / (s as f64).cosh().powi(2);
            assert!((c.value(0.0, s) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let v = |t: &str| parse(t).unwrap().bind(&[]).unwrap().value(0.0, 3.0);
        assert_eq!(v("-s^2"), -9.0);
        assert_eq!(v("2^3^2"), 512.0);
        assert_eq!(v("8/4/2"), 1.0);
        assert_eq!(v("1 - 2 - 3"), -4.0);
        assert_eq!(v("2*-s"), -6.0);
        assert_eq!(v("2^-1"), 0.5);
        assert_eq!(v(" ( 1+s ) * 2 "), 8.0);
    }

    #[test]
    fn unbound_and_unknown_names() {
        let e = parse("k*s + c").unwrap();
        assert_eq!(e.parameters(), vec!["k".to_string(), "c".to_string()]);
        match e.bind(&[p("k", 1.0)]) {
            Err(PotentialError::UnboundParameter { name, .. }) => assert_eq!(name, "c"),
            other => panic!("{other:?}"),
        }
        match parse("cosh(s)") {
            Err(PotentialError::UnknownFunction { name, offset, allowed }) => {
                assert_eq!(name, "cosh");
                assert_eq!(offset, 0);
                assert!(allowed.contains(&"sech"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_are_positioned() {
        match parse("1 + * 2") {
            Err(PotentialError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse(""), Err(PotentialError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("(s"), Err(PotentialError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("s s"), Err(PotentialError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("exp s"), Err(PotentialError::Syntax { .. })));
        assert!(matches!(parse("1.2.3"), Err(PotentialError::Syntax { .. })));
        assert!(matches!(parse("s $ 2"), Err(PotentialError::Syntax { offset: 2, .. })));
        let deep = "(".repeat(100_000);
        assert!(parse(&deep).is_err());
    }

    #[test]
    fn derivative_of_common_potentials() {
        let cases: [(&str, fn(f64) -> f64); 5] = [
            ("0.01*s", |_| 0.01),
            ("0.5*0.2^2*s^2", |s| 0.04 * s),
            ("sech(s)^2", |s| -2.0 * s.tanh() / s.cosh().powi(2)),
            ("abs(s) + sin(2*s)", |s| s.signum() + 2.0 * (2.0 * s).cos()),
            ("2^s", |s| 2f64.powf(s) * 2f64.ln()),
        ];
        for (text, exact) in cases {
            let c = parse(text).unwrap().bind(&[]).unwrap();
            for s in [-2.5, -0.3, 0.7, 3.1] {
                let d = c.gradient_s(0.0, s);
                assert!((d - exact(s)).abs() < 1e-13, "{text} at {s}: {d}");
            }
        }
    }

    #[test]
    fn display_reparses() {
        for text in ["-s^2 + 3*rho", "A*exp(-(s-s0)^2/w^2)", "2^3^2", "1e-5*s/(1+abs(s))"] {
            let e = parse(text).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e.root(), again.root(), "{text} -> {e}");
        }
    }
}
