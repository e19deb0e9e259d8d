//! Recursive-descent parser for the scalar expression language.
//!
//! ```text
//! expr    = term   { ("+" | "-") term } ;
//! term    = power  { ("*" | "/") power } ;
//! power   = unary  { "^" unary } ;            (* left associative *)
//! unary   = ("-" | "+") unary | primary ;
//! primary = number | variable | constant
//!         | function "(" expr ")" | "(" expr ")" ;
//! variable = "x" digits | "xn" ;
//! constant = "pi" ;
//! function = "exp" | "log" | "sqrt" | "sin" | "cos" | "tanh" ;
//! ```
//!
//! Unary sign binds tighter than `^`, so `-x1^2` is `(-x1)^2`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at column {}: {message}", pos + 1)]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at column {}", pos + 1)]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable `{name}` at column {} is outside x{first}..x{last}", pos + 1)]
    VariableOutOfRange {
        name: String,
        pos: usize,
        first: usize,
        last: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tanh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
        }
    }
}

/// Syntax tree node. `Var(k)` carries the index as written (`x1` is `Var(1)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// True when the subtree contains no variables.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(k) => write!(f, "x{k}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed expression over the variables `x{first} .. x{first + arity - 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Expr,
    first: usize,
    arity: usize,
}

impl Expression {
    /// Parses `text` over `x1 ..= x{arity}`.
    pub fn parse(text: &str, arity: usize) -> Result<Expression, ParseError> {
        Self::parse_indexed(text, 1, arity)
    }

    /// Parses `text` over `x{first} ..= x{first + arity - 1}`; metric entries use `first = 0`.
    pub fn parse_indexed(text: &str, first: usize, arity: usize) -> Result<Expression, ParseError> {
        if arity == 0 {
            return Err(ParseError::Syntax {
                pos: 0,
                message: "arity must be at least 1".into(),
            });
        }
        let mut parser = Parser {
            src: text,
            tokens: tokenize(text)?,
            pos: 0,
            first,
            last: first + arity - 1,
        };
        let root = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(ParseError::Syntax {
                pos: tok.pos,
                message: format!("unexpected `{}`", tok.text(parser.src)),
            });
        }
        Ok(Expression { root, first, arity })
    }

    pub fn constant(value: f64, arity: usize) -> Expression {
        Expression {
            root: Expr::Const(value),
            first: 1,
            arity,
        }
    }

    pub fn from_expr(root: Expr, first: usize, arity: usize) -> Expression {
        Expression { root, first, arity }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn first_index(&self) -> usize {
        self.first
    }

    /// Returns the value when the expression has no variables.
    pub fn as_constant(&self) -> Option<f64> {
        if self.root.is_constant() {
            super::eval::eval_value_unchecked(&self.root, self.first, &[])
        } else {
            None
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Ident,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, Copy)]
struct Token {
    kind: Tok,
    pos: usize,
    end: usize,
}

impl Token {
    fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.pos..self.end]
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
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
        let kind = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push(Token {
                    kind: Tok::Num(value),
                    pos: start,
                    end: i,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Tok::Ident,
                    pos: start,
                    end: i,
                });
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push(Token {
            kind,
            pos: start,
            end: i,
        });
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    first: usize,
    last: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<Token> {
        let tok = self.peek();
        self.pos += 1;
        tok
    }

    fn eof_pos(&self) -> usize {
        self.src.len()
    }

    fn expect(&mut self, kind: Tok, what: &str) -> Result<(), ParseError> {
        match self.bump() {
            Some(tok) if tok.kind == kind => Ok(()),
            Some(tok) => Err(ParseError::Syntax {
                pos: tok.pos,
                message: format!("expected {what}, found `{}`", tok.text(self.src)),
            }),
            None => Err(ParseError::Syntax {
                pos: self.eof_pos(),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                Tok::Plus => Expr::Add,
                Tok::Minus => Expr::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = op(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                Tok::Star => Expr::Mul,
                Tok::Slash => Expr::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.power()?;
            lhs = op(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while matches!(
            self.peek(),
            Some(Token {
                kind: Tok::Caret,
                ..
            })
        ) {
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Pow(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().map(|t| t.kind) {
            Some(Tok::Minus) => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.bump() else {
            return Err(ParseError::Syntax {
                pos: self.eof_pos(),
                message: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident => self.identifier(tok),
            _ => Err(ParseError::Syntax {
                pos: tok.pos,
                message: format!("unexpected `{}`", tok.text(self.src)),
            }),
        }
    }

    fn identifier(&mut self, tok: Token) -> Result<Expr, ParseError> {
        let name = tok.text(self.src);
        if let Some(func) = Func::from_name(name) {
            self.expect(Tok::LParen, "`(` after function name")?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if name == "pi" {
            return Ok(Expr::Const(std::f64::consts::PI));
        }
        if name == "xn" {
            return Ok(Expr::Var(self.last));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index < self.first || index > self.last {
                    return Err(ParseError::VariableOutOfRange {
                        name: name.to_string(),
                        pos: tok.pos,
                        first: self.first,
                        last: self.last,
                    });
                }
                return Ok(Expr::Var(index));
            }
        }
        Err(ParseError::UnknownIdentifier {
            name: name.to_string(),
            pos: tok.pos,
        })
    }
}
