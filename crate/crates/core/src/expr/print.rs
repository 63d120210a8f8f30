//! Fully parenthesized printer; its output reparses to the same tree.

use std::fmt::{self, Write};

use super::{BinOp, CmpOp, Node};

fn bin_symbol(op: BinOp) -> char {
    match op {
        BinOp::Add => '+',
        BinOp::Sub => '-',
        BinOp::Mul => '*',
        BinOp::Div => '/',
        BinOp::Pow => '^',
    }
}

fn cmp_symbol(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Le => "<=",
        CmpOp::Lt => "<",
        CmpOp::Ge => ">=",
        CmpOp::Gt => ">",
        CmpOp::Eq => "==",
    }
}

pub(super) fn write_node<W: Write>(f: &mut W, node: &Node) -> fmt::Result {
    match node {
        // `{:?}` is the shortest representation that parses back to the same bits
        Node::Const(c) => write!(f, "{c:?}"),
        Node::Var(i) => write!(f, "x{}", i + 1),
        Node::Neg(inner) => {
            f.write_str("(-")?;
            write_node(f, inner)?;
            f.write_char(')')
        }
        Node::Binary(op, a, b) => {
            f.write_char('(')?;
            write_node(f, a)?;
            write!(f, " {} ", bin_symbol(*op))?;
            write_node(f, b)?;
            f.write_char(')')
        }
        Node::Call(b, args) => {
            write!(f, "{}(", b.name())?;
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                write_node(f, a)?;
            }
            f.write_char(')')
        }
        Node::Piecewise {
            lhs,
            op,
            rhs,
            then,
            otherwise,
        } => {
            f.write_str("piecewise(")?;
            write_node(f, lhs)?;
            write!(f, " {} ", cmp_symbol(*op))?;
            write_node(f, rhs)?;
            f.write_str(" ? ")?;
            write_node(f, then)?;
            f.write_str(" : ")?;
            write_node(f, otherwise)?;
            f.write_char(')')
        }
    }
}
