use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::scalar::{lit, Scalar};

use super::{BinOp, Builtin, CmpOp, Expr, Node};

fn fault(node: &Node, reason: &str) -> Error {
    let mut text = node.to_string();
    if text.len() > 80 {
        let cut = (0..=77).rev().find(|i| text.is_char_boundary(*i)).unwrap_or(0);
        text.truncate(cut);
        text.push_str("...");
    }
    Error::EvaluationFault {
        node: text,
        reason: reason.to_string(),
    }
}

fn checked<S: Scalar>(node: &Node, v: S) -> Result<S> {
    if v.is_nan() {
        Err(fault(node, "result is NaN"))
    } else {
        Ok(v)
    }
}

fn eval_node<S: Scalar>(node: &Node, x: &[S]) -> Result<S> {
    match node {
        Node::Const(c) => Ok(lit(*c)),
        Node::Var(i) => Ok(x[*i]),
        Node::Neg(inner) => Ok(-eval_node(inner, x)?),
        Node::Binary(op, a, b) => {
            let a = eval_node(a, x)?;
            let b = eval_node(b, x)?;
            let v = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == S::zero() {
                        return Err(fault(node, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => match b.to_i32() {
                    Some(k) if S::from_i32(k) == Some(b) => a.powi(k),
                    _ => a.powf(b),
                },
            };
            checked(node, v)
        }
        Node::Call(f, args) => {
            let a = eval_node(&args[0], x)?;
            let v = match f {
                Builtin::Sin => a.sin(),
                Builtin::Cos => a.cos(),
                Builtin::Abs => a.abs(),
                Builtin::Ln => {
                    if a <= S::zero() {
                        return Err(fault(node, "logarithm of a nonpositive number"));
                    }
                    a.ln()
                }
                Builtin::Sqrt => {
                    if a < S::zero() {
                        return Err(fault(node, "square root of a negative number"));
                    }
                    a.sqrt()
                }
                Builtin::Sgn => {
                    if a > S::zero() {
                        S::one()
                    } else if a < S::zero() {
                        -S::one()
                    } else {
                        S::zero()
                    }
                }
                Builtin::Min => a.min(eval_node(&args[1], x)?),
                Builtin::Max => a.max(eval_node(&args[1], x)?),
            };
            checked(node, v)
        }
        Node::Piecewise {
            lhs,
            op,
            rhs,
            then,
            otherwise,
        } => {
            let l = eval_node(lhs, x)?;
            let r = eval_node(rhs, x)?;
            let take = match op {
                CmpOp::Le => l <= r,
                CmpOp::Lt => l < r,
                CmpOp::Ge => l >= r,
                CmpOp::Gt => l > r,
                CmpOp::Eq => l == r,
            };
            // only the selected branch is evaluated
            if take {
                eval_node(then, x)
            } else {
                eval_node(otherwise, x)
            }
        }
    }
}

impl Expr {
    /// Strict evaluation at `x`. Overflow to `+inf` is a legal value.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<ExtendedReal<S>> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: x.len(),
            });
        }
        let v = eval_node(self.root(), x)?;
        ExtendedReal::from_scalar(v)
    }
}

/// Evaluates `e` at `x`; see [`Expr::eval`].
pub fn eval_expr<S: Scalar>(e: &Expr, x: &[S]) -> Result<ExtendedReal<S>> {
    e.eval(x)
}
