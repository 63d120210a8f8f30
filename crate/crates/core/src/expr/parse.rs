use std::fmt;

use thiserror::Error;

use super::{BinOp, Builtin, CmpOp, Expr, Node};

const MAX_DEPTH: usize = 200;

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {position}: expected {expected}, found {found}")]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Question,
    Colon,
    Cmp(CmpOp),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Var(i) => write!(f, "variable x{i}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Question => f.write_str("`?`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Cmp(_) => f.write_str("comparison"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'?' => Tok::Question,
            b':' => Tok::Colon,
            b'<' | b'>' | b'=' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                let op = match (c, eq) {
                    (b'<', true) => CmpOp::Le,
                    (b'<', false) => CmpOp::Lt,
                    (b'>', true) => CmpOp::Ge,
                    (b'>', false) => CmpOp::Gt,
                    (b'=', true) => CmpOp::Eq,
                    _ => {
                        return Err(ParseError {
                            position: i,
                            expected: "`==`".into(),
                            found: "`=`".into(),
                        })
                    }
                };
                if eq {
                    i += 1;
                }
                Tok::Cmp(op)
            }
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text = &src[i..j];
                let v: f64 = text
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| ParseError {
                        position: i,
                        expected: "finite number".into(),
                        found: format!("`{text}`"),
                    })?;
                i = j;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &src[i..j];
                i = j;
                let tok = match word.strip_prefix('x') {
                    Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
                        let idx: usize = digits.parse().map_err(|_| ParseError {
                            position: start,
                            expected: "variable index".into(),
                            found: format!("`{word}`"),
                        })?;
                        Tok::Var(idx)
                    }
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((tok, start));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    position: i,
                    expected: "token".into(),
                    found: format!("`{ch}`"),
                });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dimension: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.offset(),
            expected: expected.to_string(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("shallower nesting"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Tok::Minus {
            self.enter()?;
            self.bump();
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.enter()?;
            self.bump();
            let exponent = self.unary()?;
            self.depth -= 1;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Const(v))
            }
            Tok::Var(i) => {
                if i == 0 || i > self.dimension {
                    return Err(ParseError {
                        position: at,
                        expected: format!("variable x1..x{}", self.dimension),
                        found: format!("x{i}"),
                    });
                }
                self.bump();
                Ok(Node::Var(i - 1))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "piecewise" => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let lhs = self.expr()?;
                let op = match self.peek() {
                    Tok::Cmp(op) => *op,
                    _ => return Err(self.error("comparison operator")),
                };
                self.bump();
                let rhs = self.expr()?;
                self.expect(Tok::Question, "`?`")?;
                let then = self.expr()?;
                self.expect(Tok::Colon, "`:`")?;
                let otherwise = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Node::Piecewise {
                    lhs: Box::new(lhs),
                    op,
                    rhs: Box::new(rhs),
                    then: Box::new(then),
                    otherwise: Box::new(otherwise),
                })
            }
            Tok::Ident(name) => {
                let Some(builtin) = Builtin::from_name(&name) else {
                    return Err(ParseError {
                        position: at,
                        expected: "builtin function".into(),
                        found: format!("`{name}`"),
                    });
                };
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                if args.len() != builtin.arity() {
                    return Err(ParseError {
                        position: at,
                        expected: format!("{} argument(s) to {}", builtin.arity(), builtin.name()),
                        found: format!("{} argument(s)", args.len()),
                    });
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Node::Call(builtin, args))
            }
            _ => Err(self.error("number, variable, function or `(`")),
        }
    }
}

/// Parses `source` as a function of `dimension` variables.
pub fn parse(source: &str, dimension: usize) -> Result<Expr, ParseError> {
    if dimension == 0 {
        return Err(ParseError {
            position: 0,
            expected: "dimension >= 1".into(),
            found: "0".into(),
        });
    }
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        dimension,
        depth: 0,
    };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("operator or end of input"));
    }
    Ok(Expr::new(root, dimension))
}
