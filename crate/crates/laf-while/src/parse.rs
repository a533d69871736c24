//! Grammar:
//!
//! ```text
//! program := stmt*
//! stmt    := IDENT ":=" expr ";"
//!          | "if" "(" expr ")" block ("else" (block | stmt))?
//!          | "while" "(" expr ")" block
//!          | "assert" "(" expr ")" ";"
//!          | "skip" ";"
//! block   := "{" stmt* "}"
//! expr    := binary expression over || && == != < <= > >= + - * /
//!            with unary - and !, atoms IDENT, INT, true, false, nondet
//! ```
//!
//! `//` starts a comment running to the end of the line.

use std::fmt;

use crate::ast::{BinOp, Expr, Program, Stmt, UnOp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const PUNCTS: [&str; 20] = [
    ":=", "<=", ">=", "==", "!=", "&&", "||", ";", "{", "}", "(", ")", "+", "-", "*", "/", "<",
    ">", "!", "=",
];

const KEYWORDS: [&str; 8] = [
    "if", "else", "while", "assert", "skip", "true", "false", "nondet",
];

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, SyntaxError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split("//").next().unwrap();
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), ln + 1, col));
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse().map_err(|_| SyntaxError {
                    line: ln + 1,
                    col,
                    message: format!("integer literal {s} out of range"),
                })?;
                out.push((Tok::Int(n), ln + 1, col));
            } else {
                let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let Some(p) = PUNCTS.iter().find(|p| rest.starts_with(**p)) else {
                    return Err(SyntaxError {
                        line: ln + 1,
                        col,
                        message: format!("unexpected character `{c}`"),
                    });
                };
                if *p == "=" {
                    return Err(SyntaxError {
                        line: ln + 1,
                        col,
                        message: "use `:=` for assignment and `==` for comparison".into(),
                    });
                }
                out.push((Tok::Punct(p), ln + 1, col));
                i += p.len();
            }
        }
    }
    let (line, col) = out.last().map(|(_, l, c)| (*l, *c + 1)).unwrap_or((1, 1));
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn line(&self) -> usize {
        self.toks[self.pos].1
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        let (_, line, col) = &self.toks[self.pos];
        Err(SyntaxError {
            line: *line,
            col: *col,
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn expect(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.is(p) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", self.peek()))
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect("{")?;
        let mut out = Vec::new();
        while !self.is("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unterminated block");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn paren(&mut self) -> Result<Expr, SyntaxError> {
        self.expect("(")?;
        let e = self.expr(1)?;
        self.expect(")")?;
        Ok(e)
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let line = self.line();
        let Tok::Ident(word) = self.peek().clone() else {
            return self.err(format!("expected a statement, found {}", self.peek()));
        };
        self.bump();
        match word.as_str() {
            "if" => {
                let cond = self.paren()?;
                let then = self.block()?;
                let els = if self.is_kw("else") {
                    self.bump();
                    if self.is("{") {
                        self.block()?
                    } else {
                        vec![self.stmt()?]
                    }
                } else {
                    Vec::new()
                };
                Ok(Stmt::If {
                    cond,
                    then,
                    els,
                    line,
                })
            }
            "while" => {
                let cond = self.paren()?;
                let body = self.block()?;
                Ok(Stmt::While { cond, body, line })
            }
            "assert" => {
                let expr = self.paren()?;
                self.expect(";")?;
                Ok(Stmt::Assert { expr, line })
            }
            "skip" => {
                self.expect(";")?;
                Ok(Stmt::Skip)
            }
            w if KEYWORDS.contains(&w) => {
                self.pos -= 1;
                self.err(format!("unexpected keyword `{w}`"))
            }
            _ => {
                self.expect(":=")?;
                let expr = self.expr(1)?;
                self.expect(";")?;
                Ok(Stmt::Assign {
                    var: word,
                    expr,
                    line,
                })
            }
        }
    }

    fn binop(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else {
            return None;
        };
        Some(match *p {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    /// Precedence climbing; all binary operators are left-associative.
    fn expr(&mut self, min: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let p = op.prec();
            if p < min {
                break;
            }
            self.bump();
            let rhs = self.expr(p + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.is("-") {
            self.bump();
            if let Tok::Int(i) = self.peek() {
                let i = *i;
                self.bump();
                return Ok(Expr::Int(-i));
            }
            return Ok(Expr::Un(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.is("!") {
            self.bump();
            return Ok(Expr::Un(UnOp::Not, Box::new(self.unary()?)));
        }
        match self.bump() {
            Tok::Int(i) => Ok(Expr::Int(i)),
            Tok::Ident(w) => match w.as_str() {
                "true" => Ok(Expr::Bool(true)),
                "false" => Ok(Expr::Bool(false)),
                "nondet" => Ok(Expr::Nondet),
                w if KEYWORDS.contains(&w) => {
                    self.pos -= 1;
                    self.err(format!("unexpected keyword `{w}`"))
                }
                _ => Ok(Expr::Var(w)),
            },
            Tok::Punct("(") => {
                let e = self.expr(1)?;
                self.expect(")")?;
                Ok(e)
            }
            t => {
                if t != Tok::Eof {
                    self.pos -= 1;
                }
                self.err(format!("expected an expression, found {t}"))
            }
        }
    }
}

pub fn parse_while(text: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut stmts = Vec::new();
    while *p.peek() != Tok::Eof {
        stmts.push(p.stmt()?);
    }
    Ok(Program { stmts })
}
