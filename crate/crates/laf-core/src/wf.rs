use std::fmt;

use crate::ir::{Context, Def, Rhs, Sort, Term, Var, VarTable};

/// A single well-formedness violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// Position of the offending definition in definition order (loop bodies included).
    pub def_index: usize,
    pub var: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "definition #{} ({}): {}",
            self.def_index, self.var, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WfError {
    #[error("variable {0} is not in scope")]
    Scope(String),
    #[error("variable {0} is defined twice")]
    Duplicate(String),
    #[error("sort error at {var}: {message}")]
    Sort { var: String, message: String },
    #[error("unknown variable id {0}")]
    UnknownVar(u32),
}

pub(crate) struct Scope {
    in_scope: Vec<bool>,
    defined: Vec<bool>,
    frames: Vec<Vec<Var>>,
}

impl Scope {
    pub(crate) fn new(nvars: usize) -> Self {
        Scope {
            in_scope: vec![false; nvars],
            defined: vec![false; nvars],
            frames: vec![Vec::new()],
        }
    }

    pub(crate) fn grow(&mut self, nvars: usize) {
        if self.in_scope.len() < nvars {
            self.in_scope.resize(nvars, false);
            self.defined.resize(nvars, false);
        }
    }

    pub(crate) fn visible(&self, v: Var) -> bool {
        self.in_scope.get(v.index()).copied().unwrap_or(false)
    }

    pub(crate) fn is_defined(&self, v: Var) -> bool {
        self.defined.get(v.index()).copied().unwrap_or(false)
    }

    pub(crate) fn bind(&mut self, v: Var) {
        self.in_scope[v.index()] = true;
        self.defined[v.index()] = true;
        self.frames.last_mut().unwrap().push(v);
    }

    pub(crate) fn push(&mut self) {
        self.frames.push(Vec::new());
    }

    pub(crate) fn pop(&mut self) {
        for v in self.frames.pop().unwrap() {
            self.in_scope[v.index()] = false;
        }
    }
}

/// Checks the right-hand side of `def` against the current scope and returns
/// the sort it produces. Loop bodies are not descended into.
pub(crate) fn check_rhs(vars: &VarTable, scope: &Scope, def: &Def) -> Result<Sort, WfError> {
    let name = |v: Var| {
        vars.get(v)
            .map(|i| i.name.clone())
            .unwrap_or_else(|| format!("#{}", v.0))
    };
    let sort_err = |message: String| WfError::Sort {
        var: name(def.var),
        message,
    };
    for a in def.rhs.args() {
        if vars.get(a).is_none() {
            return Err(WfError::UnknownVar(a.0));
        }
        if !scope.visible(a) {
            return Err(WfError::Scope(name(a)));
        }
    }
    let bound = vars
        .get(def.var)
        .ok_or(WfError::UnknownVar(def.var.0))?
        .sort
        .clone();
    let produced = match &def.rhs {
        Rhs::Op(op, args) => {
            let sorts: Vec<Sort> = args.iter().map(|a| vars.sort(*a).clone()).collect();
            op.result_sort(&sorts).map_err(sort_err)?
        }
        Rhs::Nondet(a, b) => {
            if vars.sort(*a) != vars.sort(*b) {
                return Err(sort_err("nondet arguments must share a sort".into()));
            }
            vars.sort(*a).clone()
        }
        Rhs::Assume(c, v) => {
            if *vars.sort(*c) != Sort::Bool {
                return Err(sort_err("assume condition must be bool".into()));
            }
            vars.sort(*v).clone()
        }
        Rhs::Unknown => bound.clone(),
        Rhs::Mu(mu) => {
            let s = vars.sort(mu.init).clone();
            if vars.get(mu.loopvar).map(|i| &i.sort) != Some(&s) {
                return Err(sort_err("loop variable sort differs from init".into()));
            }
            s
        }
    };
    if produced != bound {
        return Err(sort_err(format!(
            "declared {bound}, right-hand side has sort {produced}"
        )));
    }
    Ok(produced)
}

fn check_sort(s: &Sort) -> Result<(), String> {
    match s {
        Sort::BitVec(w) if *w == 0 || *w > 64 => {
            Err(format!("bitvector width {w} out of range 1..=64"))
        }
        Sort::Tuple(elems) if elems.is_empty() => Err("empty tuple sort".into()),
        Sort::Tuple(elems) => elems.iter().try_for_each(check_sort),
        _ => Ok(()),
    }
}

struct Checker<'a> {
    vars: &'a VarTable,
    scope: Scope,
    index: usize,
    last_id: Option<u32>,
    diags: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn diag(&mut self, v: Var, message: String) {
        let var = self
            .vars
            .get(v)
            .map(|i| i.name.clone())
            .unwrap_or_else(|| format!("#{}", v.0));
        self.diags.push(Diagnostic {
            def_index: self.index,
            var,
            message,
        });
    }

    fn introduce(&mut self, v: Var) {
        if self.vars.get(v).is_none() {
            self.diag(v, "variable missing from the variable table".into());
            return;
        }
        if let Err(m) = check_sort(self.vars.sort(v)) {
            self.diag(v, m);
        }
        if self.scope.is_defined(v) {
            self.diag(v, "variable defined twice".into());
        }
        if let Some(last) = self.last_id {
            if v.0 <= last {
                self.diag(v, "variable ids not allocated in definition order".into());
            }
        }
        self.last_id = Some(v.0.max(self.last_id.unwrap_or(0)));
    }

    fn context(&mut self, ctx: &Context) {
        for def in &ctx.defs {
            self.introduce(def.var);
            if let Rhs::Mu(mu) = &def.rhs {
                self.introduce(mu.loopvar);
                if let Err(e) = check_rhs(self.vars, &self.scope, def) {
                    self.diag(def.var, e.to_string());
                }
                let here = self.index;
                self.index += 1;
                self.scope.push();
                if self.vars.get(mu.loopvar).is_some() {
                    self.scope.bind(mu.loopvar);
                }
                self.context(&mu.body);
                let exit_ok = self.vars.get(mu.exit).is_some() && self.scope.visible(mu.exit);
                let exit_sort_ok = exit_ok && self.vars.sort(mu.exit) == self.vars.sort(def.var);
                self.scope.pop();
                let saved = self.index;
                self.index = here;
                if !exit_ok {
                    self.diag(def.var, "loop exit not in scope of the body".into());
                } else if !exit_sort_ok {
                    self.diag(def.var, "loop exit sort differs from the loop sort".into());
                }
                self.index = saved;
                if self.vars.get(def.var).is_some() {
                    self.scope.bind(def.var);
                }
            } else {
                if self.vars.get(def.var).is_some() {
                    if let Err(e) = check_rhs(self.vars, &self.scope, def) {
                        self.diag(def.var, e.to_string());
                    }
                    self.scope.bind(def.var);
                }
                self.index += 1;
            }
        }
    }
}

/// Checks every structural invariant of a term; never aborts.
pub fn check_wf(term: &Term) -> Result<(), Vec<Diagnostic>> {
    let mut ck = Checker {
        vars: &term.vars,
        scope: Scope::new(term.vars.len()),
        index: 0,
        last_id: None,
        diags: Vec::new(),
    };
    ck.context(&term.ctx);
    if term.vars.get(term.result).is_none() || !ck.scope.visible(term.result) {
        ck.diags.push(Diagnostic {
            def_index: ck.index,
            var: term
                .vars
                .get(term.result)
                .map(|i| i.name.clone())
                .unwrap_or_else(|| format!("#{}", term.result.0)),
            message: "result variable not in scope".into(),
        });
    }
    if ck.diags.is_empty() {
        Ok(())
    } else {
        Err(ck.diags)
    }
}

impl Context {
    /// Returns this context extended with `def`; `self` is left unchanged.
    /// The context is taken to be closed (top level).
    pub fn append(&self, vars: &VarTable, def: Def) -> Result<Context, WfError> {
        let mut scope = Scope::new(vars.len());
        for d in &self.defs {
            scope.bind(d.var);
        }
        if vars.get(def.var).is_none() {
            return Err(WfError::UnknownVar(def.var.0));
        }
        let bound: Vec<Var> = self.bound_vars();
        if bound.contains(&def.var) {
            return Err(WfError::Duplicate(vars.name(def.var).to_string()));
        }
        if let Rhs::Mu(_) = &def.rhs {
            let tmp = Term {
                vars: vars.clone(),
                ctx: Context {
                    defs: self
                        .defs
                        .iter()
                        .cloned()
                        .chain(std::iter::once(def.clone()))
                        .collect(),
                },
                result: def.var,
            };
            if let Err(diags) = check_wf(&tmp) {
                return Err(WfError::Sort {
                    var: vars.name(def.var).to_string(),
                    message: diags[0].message.clone(),
                });
            }
        } else {
            check_rhs(vars, &scope, &def)?;
        }
        let mut out = self.clone();
        out.defs.push(def);
        Ok(out)
    }
}
