//! Lexer and recursive-descent parser for the expression language.

use super::{BinaryOp, Expression, Node, UnaryOp};
use crate::error::Error;
use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize), Error> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, start));
        }
        let b = self.src[self.pos];
        let simple = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((t, start));
        }
        if b.is_ascii_digit() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos] == b'.' {
                self.pos += 1;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
            if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
                let mark = self.pos;
                self.pos += 1;
                if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                    self.pos += 1;
                }
                if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                } else {
                    // Not an exponent after all ("2e" followed by non-digit).
                    self.pos = mark;
                }
            }
            let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("invalid numeric literal `{text}`"),
            })?;
            return Ok((Tok::Num(v), start));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((Tok::Ident(text.to_owned()), start));
        }
        Err(Error::Syntax {
            offset: start,
            message: format!("unexpected character `{}`", b as char),
        })
    }
}

pub(super) struct Parser<'a> {
    lexer: Lexer<'a>,
    look: (Tok, usize),
    vars: &'a [&'a str],
}

fn function_of(name: &str) -> Option<UnaryOp> {
    Some(match name {
        "sin" => UnaryOp::Sin,
        "cos" => UnaryOp::Cos,
        "tan" => UnaryOp::Tan,
        "exp" => UnaryOp::Exp,
        "log" => UnaryOp::Log,
        "sqrt" => UnaryOp::Sqrt,
        "abs" => UnaryOp::Abs,
        "sinh" => UnaryOp::Sinh,
        "cosh" => UnaryOp::Cosh,
        "tanh" => UnaryOp::Tanh,
        _ => return None,
    })
}

impl<'a> Parser<'a> {
    pub(super) fn new(src: &'a str, vars: &'a [&'a str]) -> Result<Self, Error> {
        let mut lexer = Lexer::new(src);
        let look = lexer.next()?;
        Ok(Parser { lexer, look, vars })
    }

    fn advance(&mut self) -> Result<(Tok, usize), Error> {
        let next = self.lexer.next()?;
        Ok(core::mem::replace(&mut self.look, next))
    }

    pub(super) fn parse(mut self) -> Result<Node, Error> {
        if self.look.0 == Tok::Eof {
            return Err(Error::EmptyExpression);
        }
        let node = self.sum()?;
        match self.look {
            (Tok::Eof, _) => Ok(node),
            (ref t, offset) => Err(Error::Syntax {
                offset,
                message: format!("unexpected trailing token {t:?}"),
            }),
        }
    }

    // sum := product (('+' | '-') product)*        left-associative
    fn sum(&mut self) -> Result<Node, Error> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.look.0 {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.product()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // product := unary (('*' | '/') unary)*        left-associative
    fn product(&mut self) -> Result<Node, Error> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.look.0 {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // unary := '-' unary | power                   binds looser than '^'
    fn unary(&mut self) -> Result<Node, Error> {
        if self.look.0 == Tok::Minus {
            self.advance()?;
            let inner = self.unary()?;
            return Ok(Node::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    // power := primary ('^' unary)?                right-associative
    fn power(&mut self) -> Result<Node, Error> {
        let base = self.primary()?;
        if self.look.0 == Tok::Caret {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Node::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, Error> {
        let (tok, offset) = self.advance()?;
        match tok {
            Tok::Num(v) => Ok(Node::Literal(v)),
            Tok::LParen => {
                let inner = self.sum()?;
                let (close, close_off) = self.advance()?;
                if close != Tok::RParen {
                    return Err(Error::Syntax {
                        offset: close_off,
                        message: "expected `)`".into(),
                    });
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                if self.look.0 == Tok::LParen {
                    let op = function_of(&name).ok_or_else(|| Error::UnknownIdentifier {
                        offset,
                        name: name.clone(),
                    })?;
                    self.advance()?; // consume '('
                    let arg = self.sum()?;
                    let (close, close_off) = self.advance()?;
                    if close != Tok::RParen {
                        return Err(Error::Syntax {
                            offset: close_off,
                            message: "expected `)`".into(),
                        });
                    }
                    return Ok(Node::Unary(op, Box::new(arg)));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(idx) => Ok(Node::Variable(idx)),
                    None => Err(Error::UnknownIdentifier { offset, name }),
                }
            }
            Tok::Eof => Err(Error::Syntax {
                offset,
                message: "unexpected end of input".into(),
            }),
            other => Err(Error::Syntax {
                offset,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Parse `text` against an ordered variable list.
pub(super) fn parse(text: &str, vars: &[&str]) -> Result<Expression, Error> {
    let root = Parser::new(text, vars)?.parse()?;
    Ok(Expression {
        root,
        vars: vars.iter().map(|v| String::from(*v)).collect(),
    })
}
