//! A small expression language for user-defined test functions.
//!
//! Grammar (`x1..xn` are the coordinates, `^` is right associative and binds
//! tighter than unary minus, so `-x1^2` is `-(x1^2)`):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" unary)?
//! atom   := number | "x" digit+ | ident "(" args ")" | "(" expr ")"
//!         | "piecewise" "(" cond "?" expr ":" expr ")"
//! cond   := expr ("<=" | "<" | ">=" | ">" | "==") expr
//! ```
//!
//! Builtins: `sin cos abs ln sqrt sgn` (one argument) and `min max` (two).
//! Juxtaposition is not multiplication.

mod eval;
mod parse;
mod print;

use std::fmt;

pub use eval::eval_expr;
pub use parse::{parse, ParseError};

/// Binary arithmetic operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Comparison operators, only legal inside `piecewise` conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

/// Builtin functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Sin,
    Cos,
    Abs,
    Ln,
    Sqrt,
    Sgn,
    Min,
    Max,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "abs" => Self::Abs,
            "ln" => Self::Ln,
            "sqrt" => Self::Sqrt,
            "sgn" => Self::Sgn,
            "min" => Self::Min,
            "max" => Self::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Abs => "abs",
            Self::Ln => "ln",
            Self::Sqrt => "sqrt",
            Self::Sgn => "sgn",
            Self::Min => "min",
            Self::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Self::Min | Self::Max => 2,
            _ => 1,
        }
    }
}

/// Expression tree. Variables are stored zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Builtin, Vec<Node>),
    Piecewise {
        lhs: Box<Node>,
        op: CmpOp,
        rhs: Box<Node>,
        then: Box<Node>,
        otherwise: Box<Node>,
    },
}

/// A parsed expression together with its declared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    dimension: usize,
}

impl Expr {
    pub fn new(root: Node, dimension: usize) -> Self {
        Self { root, dimension }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_node(f, &self.root)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_node(f, self)
    }
}
