use thiserror::Error;

use super::{ExpressionNode, Function};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{subexpression}` at x = {x}")]
pub struct EvalError {
    pub subexpression: String,
    pub x: f64,
}

/// Evaluates `e` at `x` in the precision of `T`.
///
/// Any non-finite intermediate (division by zero, `sqrt` or `log1p` outside
/// its domain, overflow) is a [`EvalError`] naming the offending subexpression.
pub fn eval_expression<T: Real>(e: &ExpressionNode, x: T) -> Result<T, EvalError> {
    eval_node(e, x)
}

fn eval_node<T: Real>(e: &ExpressionNode, x: T) -> Result<T, EvalError> {
    let v = match e {
        ExpressionNode::Constant(c) => T::from_rational(c),
        ExpressionNode::Variable => x,
        ExpressionNode::Add(a, b) => eval_node(a, x)? + eval_node(b, x)?,
        ExpressionNode::Sub(a, b) => eval_node(a, x)? - eval_node(b, x)?,
        ExpressionNode::Mul(a, b) => eval_node(a, x)? * eval_node(b, x)?,
        ExpressionNode::Div(a, b) => {
            let num = eval_node(a, x)?;
            let den = eval_node(b, x)?;
            if den.is_zero() {
                return Err(domain(e, x));
            }
            num / den
        }
        ExpressionNode::Pow(a, n) => {
            let base = eval_node(a, x)?;
            if *n < 0 && base.is_zero() {
                return Err(domain(e, x));
            }
            match i32::try_from(*n) {
                Ok(n) => base.powi(n),
                Err(_) => return Err(domain(e, x)),
            }
        }
        ExpressionNode::Call(f, a) => {
            let u = eval_node(a, x)?;
            match f {
                Function::Exp => u.exp(),
                Function::Expm1 => u.exp_m1(),
                Function::Sin => u.sin(),
                Function::Cos => u.cos(),
                Function::Tan => u.tan(),
                Function::Atan => u.atan(),
                Function::Log1p => {
                    if !(u > -T::one()) {
                        return Err(domain(e, x));
                    }
                    u.ln_1p()
                }
                Function::Sqrt => {
                    if u < T::zero() {
                        return Err(domain(e, x));
                    }
                    u.sqrt()
                }
                Function::Flatbump => flatbump(u),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(e, x))
    }
}

/// `exp(-1/u^2)`, exactly 0 at the origin and wherever the exponent underflows.
fn flatbump<T: Real>(u: T) -> T {
    let sq = u * u;
    // exp(-1/sq) is below every representable positive value for sq < 1e-3.
    if sq.to_f64() < 1e-3 {
        return T::zero();
    }
    (-(T::one() / sq)).exp()
}

fn domain<T: Real>(e: &ExpressionNode, x: T) -> EvalError {
    EvalError {
        subexpression: e.to_string(),
        x: x.to_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::DoubleDouble;

    fn eval(text: &str, x: f64) -> Result<f64, EvalError> {
        eval_expression(&parse_expression(text).unwrap(), x)
    }

    #[test]
    fn spec_examples() {
        assert!((eval("x - x^2", 0.3).unwrap() - 0.21).abs() < 1e-15);
        assert_eq!(eval("x + flatbump(x)", 0.0).unwrap(), 0.0);
        let err = eval("1/x", 0.0).unwrap_err();
        assert_eq!(err.subexpression, "1 / x");
    }

    #[test]
    fn domains() {
        assert!(eval("sqrt(x)", -1.0).is_err());
        assert!(eval("log1p(x)", -1.0).is_err());
        assert!(eval("x^-1", 0.0).is_err());
        assert!(eval("exp(x)", 1000.0).is_err());
        assert_eq!(eval("sqrt(x)", 0.0).unwrap(), 0.0);
    }

    #[test]
    fn flatbump_values() {
        // e^{-4} and e^{-1/0.09}
        assert!((eval("flatbump(x)", 0.5).unwrap() - 0.01831563888873418).abs() < 1e-17);
        assert!((eval("flatbump(x)", -0.3).unwrap() - 1.4945338524781451e-5).abs() < 1e-19);
        assert_eq!(eval("flatbump(x)", 1e-3).unwrap(), 0.0);
        assert_eq!(eval("flatbump(x)", 1e-200).unwrap(), 0.0);
        let dd = eval_expression(
            &parse_expression("flatbump(x)").unwrap(),
            DoubleDouble::from_f64(0.02),
        )
        .unwrap();
        assert_eq!(dd.to_f64(), 0.0);
    }

    #[test]
    fn generic_precisions_agree() {
        let e =
            parse_expression("x*exp(x) + tan(x)/2 - atan(x^2) + log1p(x) - sqrt(1 + x)").unwrap();
        let a = eval_expression(&e, 0.37f64).unwrap();
        let b = eval_expression(&e, DoubleDouble::from_f64(0.37)).unwrap();
        let c = eval_expression(&e, 0.37f32).unwrap();
        assert!((a - b.to_f64()).abs() < 1e-15);
        assert!((a - c as f64).abs() < 1e-6);
    }
}
