use num_bigint::BigInt;

use crate::ir::{Context, Def, Literal, Mu, Op, Rhs, Sort, Term, Var, VarTable};
use crate::wf::{check_rhs, Scope, WfError};

/// Incremental construction of well-formed terms.
///
/// Every definition is checked as it is appended, so a finished term is
/// well-formed by construction.
pub struct TermBuilder {
    vars: VarTable,
    frames: Vec<Context>,
    scope: Scope,
}

impl Default for TermBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl TermBuilder {
    pub fn new() -> Self {
        TermBuilder {
            vars: VarTable::new(),
            frames: vec![Context::new()],
            scope: Scope::new(0),
        }
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn sort(&self, v: Var) -> &Sort {
        self.vars.sort(v)
    }

    pub fn in_scope(&self, v: Var) -> bool {
        self.scope.visible(v)
    }

    /// Current nesting depth (0 at top level).
    pub fn depth(&self) -> usize {
        self.frames.len() - 1
    }

    /// Definitions appended so far to the innermost open context.
    pub fn current(&self) -> &Context {
        self.frames.last().unwrap()
    }

    fn push_def(&mut self, var: Var, rhs: Rhs) -> Result<Var, WfError> {
        let def = Def { var, rhs };
        self.scope.grow(self.vars.len());
        check_rhs(&self.vars, &self.scope, &def)?;
        self.scope.bind(var);
        self.frames.last_mut().unwrap().defs.push(def);
        Ok(var)
    }

    fn arg_sorts(&self, args: &[Var]) -> Result<Vec<Sort>, WfError> {
        args.iter()
            .map(|a| {
                self.vars
                    .get(*a)
                    .map(|i| i.sort.clone())
                    .ok_or(WfError::UnknownVar(a.0))
            })
            .collect()
    }

    /// Appends `name ≜ op(args)`, inferring the sort from the op signature.
    pub fn op(&mut self, name: &str, op: Op, args: &[Var]) -> Result<Var, WfError> {
        let sorts = self.arg_sorts(args)?;
        let sort = op.result_sort(&sorts).map_err(|message| WfError::Sort {
            var: name.to_string(),
            message,
        })?;
        let v = self.vars.fresh(name, sort);
        self.push_def(v, Rhs::Op(op, args.to_vec()))
    }

    pub fn lit(&mut self, name: &str, lit: Literal) -> Result<Var, WfError> {
        self.op(name, Op::Lit(lit), &[])
    }

    pub fn int(&mut self, name: &str, i: i64) -> Result<Var, WfError> {
        self.lit(name, Literal::Int(BigInt::from(i)))
    }

    pub fn boolean(&mut self, name: &str, b: bool) -> Result<Var, WfError> {
        self.lit(name, Literal::Bool(b))
    }

    pub fn bv(&mut self, name: &str, width: u32, bits: u64) -> Result<Var, WfError> {
        self.lit(name, Literal::BitVec { width, bits })
    }

    pub fn nondet(&mut self, name: &str, a: Var, b: Var) -> Result<Var, WfError> {
        let sort = self.arg_sorts(&[a])?.remove(0);
        let v = self.vars.fresh(name, sort);
        self.push_def(v, Rhs::Nondet(a, b))
    }

    pub fn assume(&mut self, name: &str, cond: Var, val: Var) -> Result<Var, WfError> {
        let sort = self.arg_sorts(&[val])?.remove(0);
        let v = self.vars.fresh(name, sort);
        self.push_def(v, Rhs::Assume(cond, val))
    }

    pub fn unknown(&mut self, name: &str, sort: Sort) -> Result<Var, WfError> {
        let v = self.vars.fresh(name, sort);
        self.push_def(v, Rhs::Unknown)
    }

    /// Appends `name ≜ (μ loopvar. body[exit])(init)`. The closure receives the
    /// loop variable and returns the exit variable.
    pub fn mu(
        &mut self,
        name: &str,
        loopvar_name: &str,
        init: Var,
        body: impl FnOnce(&mut Self, Var) -> Result<Var, WfError>,
    ) -> Result<Var, WfError> {
        let sort = self.arg_sorts(&[init])?.remove(0);
        if !self.scope.visible(init) {
            return Err(WfError::Scope(self.vars.name(init).to_string()));
        }
        let x = self.vars.fresh(name, sort.clone());
        let s = self.vars.fresh(loopvar_name, sort);
        self.scope.grow(self.vars.len());
        self.frames.push(Context::new());
        self.scope.push();
        self.scope.bind(s);
        let exit = match body(self, s) {
            Ok(e) => e,
            Err(e) => {
                self.scope.pop();
                self.frames.pop();
                return Err(e);
            }
        };
        let exit_visible = self.scope.visible(exit);
        self.scope.pop();
        let body_ctx = self.frames.pop().unwrap();
        if !exit_visible {
            return Err(WfError::Scope(self.vars.name(exit).to_string()));
        }
        if self.vars.sort(exit) != self.vars.sort(x) {
            return Err(WfError::Sort {
                var: name.to_string(),
                message: "loop exit sort differs from init".into(),
            });
        }
        self.push_def(
            x,
            Rhs::Mu(Box::new(Mu {
                loopvar: s,
                body: body_ctx,
                exit,
                init,
            })),
        )
    }

    /// Low-level append of an arbitrary right-hand side with an explicit sort.
    pub fn raw(&mut self, name: &str, sort: Sort, rhs: Rhs) -> Result<Var, WfError> {
        let v = self.vars.fresh(name, sort);
        self.push_def(v, rhs)
    }

    pub fn finish(self, result: Var) -> Result<Term, WfError> {
        if self.frames.len() != 1 {
            return Err(WfError::Scope("unterminated loop body".into()));
        }
        if !self.scope.visible(result) {
            return Err(WfError::Scope(
                self.vars
                    .get(result)
                    .map(|i| i.name.clone())
                    .unwrap_or_default(),
            ));
        }
        let mut frames = self.frames;
        Ok(Term {
            vars: self.vars,
            ctx: frames.pop().unwrap(),
            result,
        })
    }
}
