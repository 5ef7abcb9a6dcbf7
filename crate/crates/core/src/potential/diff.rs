use super::{BinOp, Expr, Func, Var};

fn num(x: f64) -> Expr {
    Expr::Num(x)
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(x) if *x == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => num(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
        return num(op.apply(*x, *y));
    }
    match op {
        BinOp::Add if is_num(&a, 0.0) => b,
        BinOp::Add | BinOp::Sub if is_num(&b, 0.0) => a,
        BinOp::Sub if is_num(&a, 0.0) => neg(b),
        BinOp::Mul if is_num(&a, 0.0) || is_num(&b, 0.0) => num(0.0),
        BinOp::Mul if is_num(&a, 1.0) => b,
        BinOp::Mul | BinOp::Div if is_num(&b, 1.0) => a,
        BinOp::Div if is_num(&a, 0.0) => num(0.0),
        BinOp::Pow if is_num(&b, 1.0) => a,
        BinOp::Pow if is_num(&b, 0.0) => num(1.0),
        _ => Expr::Binary(op, Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    match a {
        Expr::Num(x) => num(f.apply(x)),
        other => Expr::Call(f, Box::new(other)),
    }
}

pub(super) fn derivative(e: &Expr, var: Var) -> Expr {
    use BinOp::*;
    match e {
        Expr::Num(_) | Expr::Param(_) => num(0.0),
        Expr::Var(v) => num(if *v == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(derivative(a, var)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
            let da = derivative(&a, var);
            let db = derivative(&b, var);
            match op {
                Add => bin(Add, da, db),
                Sub => bin(Sub, da, db),
                Mul => bin(Add, bin(Mul, da, b.clone()), bin(Mul, a, db)),
                Div => bin(
                    Div,
                    bin(Sub, bin(Mul, da, b.clone()), bin(Mul, a, db)),
                    bin(Pow, b, num(2.0)),
                ),
                Pow if !b.depends_on(var) => {
                    let lowered = bin(Pow, a, bin(Sub, b.clone(), num(1.0)));
                    bin(Mul, bin(Mul, b, lowered), da)
                }
                Pow => {
                    // d(a^b) = a^b (b' ln a + b a'/a)
                    let whole = bin(Pow, a.clone(), b.clone());
                    let log_part = bin(Mul, db, call(Func::Ln, a.clone()));
                    let base_part = bin(Div, bin(Mul, b, da), a);
                    bin(Mul, whole, bin(Add, log_part, base_part))
                }
            }
        }
        Expr::Call(f, a) => {
            let inner = a.as_ref().clone();
            let da = derivative(&inner, var);
            if is_num(&da, 0.0) {
                return num(0.0);
            }
            let outer = match f {
                Func::Sin => call(Func::Cos, inner),
                Func::Cos => neg(call(Func::Sin, inner)),
                Func::Exp => call(Func::Exp, inner),
                Func::Tanh => bin(Pow, call(Func::Sech, inner), num(2.0)),
                Func::Sech => neg(bin(
                    Mul,
                    call(Func::Sech, inner.clone()),
                    call(Func::Tanh, inner),
                )),
                Func::Abs => call(Func::Sign, inner),
                Func::Ln => bin(Div, num(1.0), inner),
                Func::Sign => num(0.0),
            };
            bin(Mul, outer, da)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::parse;

    #[test]
    fn constants_fold_away() {
        let d = parse("3*rho + k").unwrap().root().derivative_s();
        assert_eq!(d, Expr::Num(0.0));
        let d = parse("0.01*s").unwrap().root().derivative_s();
        assert_eq!(d, Expr::Num(0.01));
    }
}
