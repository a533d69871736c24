use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub(crate) fn prec(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    pub fn is_order(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    pub fn is_logic(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Int(i64),
    Bool(bool),
    /// An arbitrary value of the expected sort.
    Nondet,
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Un(UnOp::Not, Box::new(e))
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, outer: u8) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Nondet => write!(f, "nondet"),
            Expr::Un(op, e) => {
                write!(f, "{}", if *op == UnOp::Neg { "-" } else { "!" })?;
                e.fmt_prec(f, 7)
            }
            Expr::Bin(op, a, b) => {
                let p = op.prec();
                if p < outer {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, p + 1)?;
                if p < outer {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Assign {
        var: String,
        expr: Expr,
        line: usize,
    },
    If {
        cond: Expr,
        then: Vec<Stmt>,
        els: Vec<Stmt>,
        line: usize,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
        line: usize,
    },
    Assert {
        expr: Expr,
        line: usize,
    },
    Skip,
}

impl Stmt {
    /// Program variables assigned anywhere inside the statement.
    pub fn assigned(&self, out: &mut Vec<String>) {
        match self {
            Stmt::Assign { var, .. } => {
                if !out.contains(var) {
                    out.push(var.clone());
                }
            }
            Stmt::If { then, els, .. } => {
                for s in then.iter().chain(els) {
                    s.assigned(out);
                }
            }
            Stmt::While { body, .. } => {
                for s in body {
                    s.assigned(out);
                }
            }
            Stmt::Assert { .. } | Stmt::Skip => {}
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

fn write_block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], indent: usize) -> fmt::Result {
    for s in stmts {
        write_stmt(f, s, indent)?;
    }
    Ok(())
}

fn write_stmt(f: &mut fmt::Formatter<'_>, s: &Stmt, indent: usize) -> fmt::Result {
    let pad = "  ".repeat(indent);
    match s {
        Stmt::Assign { var, expr, .. } => writeln!(f, "{pad}{var} := {expr};"),
        Stmt::If {
            cond, then, els, ..
        } => {
            writeln!(f, "{pad}if ({cond}) {{")?;
            write_block(f, then, indent + 1)?;
            if els.is_empty() {
                writeln!(f, "{pad}}}")
            } else {
                writeln!(f, "{pad}}} else {{")?;
                write_block(f, els, indent + 1)?;
                writeln!(f, "{pad}}}")
            }
        }
        Stmt::While { cond, body, .. } => {
            writeln!(f, "{pad}while ({cond}) {{")?;
            write_block(f, body, indent + 1)?;
            writeln!(f, "{pad}}}")
        }
        Stmt::Assert { expr, .. } => writeln!(f, "{pad}assert({expr});"),
        Stmt::Skip => writeln!(f, "{pad}skip;"),
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_block(f, &self.stmts, 0)
    }
}

/// Replaces every loop by `n` guarded copies of its body followed by the loop.
pub fn unroll(stmts: &[Stmt], n: usize) -> Vec<Stmt> {
    stmts.iter().map(|s| unroll_stmt(s, n)).collect()
}

fn unroll_stmt(s: &Stmt, n: usize) -> Stmt {
    match s {
        Stmt::If {
            cond,
            then,
            els,
            line,
        } => Stmt::If {
            cond: cond.clone(),
            then: unroll(then, n),
            els: unroll(els, n),
            line: *line,
        },
        Stmt::While { cond, body, line } => {
            let body = unroll(body, n);
            let mut out = Stmt::While {
                cond: cond.clone(),
                body: body.clone(),
                line: *line,
            };
            for _ in 0..n {
                let mut then = body.clone();
                then.push(out);
                out = Stmt::If {
                    cond: cond.clone(),
                    then,
                    els: Vec::new(),
                    line: *line,
                };
            }
            out
        }
        other => other.clone(),
    }
}
