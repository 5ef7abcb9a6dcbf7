use super::{BinOp, Expr, Func, PotentialError, PotentialSamples, Var};
use crate::grid::Grid;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    S,
    Rho,
    Neg,
    Bin(BinOp),
    Call(Func),
}

#[derive(Debug, Clone, PartialEq)]
struct Program {
    ops: Vec<Op>,
    max_stack: usize,
}

impl Program {
    fn compile(e: &Expr, params: &[(String, f64)]) -> Result<Self, PotentialError> {
        let mut ops = Vec::new();
        emit(e, params, &mut ops)?;
        let mut depth = 0usize;
        let mut max_stack = 0;
        for op in &ops {
            match op {
                Op::Const(_) | Op::S | Op::Rho => depth += 1,
                Op::Bin(_) => depth -= 1,
                Op::Neg | Op::Call(_) => {}
            }
            max_stack = max_stack.max(depth);
        }
        Ok(Self { ops, max_stack })
    }

    fn run(&self, rho: f64, s: f64, stack: &mut Vec<f64>) -> f64 {
        stack.clear();
        for op in &self.ops {
            match *op {
                Op::Const(v) => stack.push(v),
                Op::S => stack.push(s),
                Op::Rho => stack.push(rho),
                Op::Neg => {
                    let top = stack.last_mut().expect("stack underflow");
                    *top = -*top;
                }
                Op::Call(f) => {
                    let top = stack.last_mut().expect("stack underflow");
                    *top = f.apply(*top);
                }
                Op::Bin(b) => {
                    let rhs = stack.pop().expect("stack underflow");
                    let top = stack.last_mut().expect("stack underflow");
                    *top = b.apply(*top, rhs);
                }
            }
        }
        stack.pop().unwrap_or(f64::NAN)
    }
}

fn emit(e: &Expr, params: &[(String, f64)], ops: &mut Vec<Op>) -> Result<(), PotentialError> {
    match e {
        Expr::Num(v) => ops.push(Op::Const(*v)),
        Expr::Var(Var::S) => ops.push(Op::S),
        Expr::Var(Var::Rho) => ops.push(Op::Rho),
        Expr::Param(name) => {
            let v = params
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| PotentialError::UnboundParameter {
                    name: name.clone(),
                    bound: params.iter().map(|(n, _)| n.clone()).collect(),
                })?;
            ops.push(Op::Const(v));
        }
        Expr::Neg(a) => {
            emit(a, params, ops)?;
            ops.push(Op::Neg);
        }
        Expr::Call(f, a) => {
            emit(a, params, ops)?;
            ops.push(Op::Call(*f));
        }
        Expr::Binary(op, a, b) => {
            emit(a, params, ops)?;
            emit(b, params, ops)?;
            ops.push(Op::Bin(*op));
        }
    }
    Ok(())
}

/// A potential with all parameters bound, ready for fast evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPotential {
    value: Program,
    gradient: Program,
    depends_on_s: bool,
}

impl CompiledPotential {
    pub(super) fn compile(e: &Expr, params: &[(String, f64)]) -> Result<Self, PotentialError> {
        Ok(Self {
            value: Program::compile(e, params)?,
            gradient: Program::compile(&e.derivative_s(), params)?,
            depends_on_s: e.depends_on(Var::S),
        })
    }

    pub fn depends_on_s(&self) -> bool {
        self.depends_on_s
    }

    pub fn value(&self, rho: f64, s: f64) -> f64 {
        self.value.run(rho, s, &mut Vec::with_capacity(self.value.max_stack))
    }

    pub fn gradient_s(&self, rho: f64, s: f64) -> f64 {
        self.gradient
            .run(rho, s, &mut Vec::with_capacity(self.gradient.max_stack))
    }

    /// Values and `s`-derivatives at every grid node.
    pub fn sample(&self, grid: &Grid) -> Result<PotentialSamples, PotentialError> {
        let n = grid.len();
        let mut values = vec![0.0; n];
        let mut gradient_s = vec![0.0; n];
        let cap = self.value.max_stack.max(self.gradient.max_stack);
        let row = grid.shape().1;
        par::for_each_row(&mut values, row, |r, out| {
            let mut stack = Vec::with_capacity(cap);
            for (j, v) in out.iter_mut().enumerate() {
                let (rho, s) = grid.coords(r * row + j);
                *v = self.value.run(rho, s, &mut stack);
            }
        });
        par::for_each_row(&mut gradient_s, row, |r, out| {
            let mut stack = Vec::with_capacity(cap);
            for (j, v) in out.iter_mut().enumerate() {
                let (rho, s) = grid.coords(r * row + j);
                *v = self.gradient.run(rho, s, &mut stack);
            }
        });
        if let Some(k) = (0..n).find(|&k| !values[k].is_finite()) {
            let (rho, s) = grid.coords(k);
            return Err(PotentialError::NonFinite {
                rho,
                s,
                value: values[k],
            });
        }
        for g in gradient_s.iter_mut() {
            if !g.is_finite() {
                *g = 0.0;
            }
        }
        Ok(PotentialSamples { values, gradient_s })
    }
}
