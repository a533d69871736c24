use std::cmp::Ordering;
use std::fmt::Write as _;

use laf_core::Var;

/// A boolean constraint variable required to be true (`pos`) or false.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lit {
    pub var: Var,
    pub pos: bool,
}

impl Lit {
    pub fn new(var: Var, pos: bool) -> Lit {
        Lit { var, pos }
    }

    pub fn neg(self) -> Lit {
        Lit {
            var: self.var,
            pos: !self.pos,
        }
    }
}

// Ordered by variable, positive literal first.
impl Ord for Lit {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.var, !self.pos).cmp(&(o.var, !o.pos))
    }
}

impl PartialOrd for Lit {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// A conjunction of literals over distinct variables. The empty conjunction
/// is `true`. An unsatisfiable condition is represented by `None` wherever
/// an `Option<Cond>` appears.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Cond(Vec<Lit>);

impl Cond {
    pub fn top() -> Cond {
        Cond(Vec::new())
    }

    pub fn lit(l: Lit) -> Cond {
        Cond(vec![l])
    }

    /// Builds a condition from arbitrary literals, `None` if two conflict.
    pub fn from_lits(lits: impl IntoIterator<Item = Lit>) -> Option<Cond> {
        let mut c = Cond::top();
        for l in lits {
            c = c.with(l)?;
        }
        Some(c)
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn polarity(&self, v: Var) -> Option<bool> {
        self.0
            .binary_search_by(|l| l.var.cmp(&v))
            .ok()
            .map(|i| self.0[i].pos)
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.polarity(v).is_some()
    }

    pub fn with(&self, l: Lit) -> Option<Cond> {
        match self.0.binary_search_by(|m| m.var.cmp(&l.var)) {
            Ok(i) if self.0[i].pos == l.pos => Some(self.clone()),
            Ok(_) => None,
            Err(i) => {
                let mut v = self.0.clone();
                v.insert(i, l);
                Some(Cond(v))
            }
        }
    }

    pub fn and(&self, o: &Cond) -> Option<Cond> {
        let mut c = self.clone();
        for l in &o.0 {
            c = c.with(*l)?;
        }
        Some(c)
    }

    /// Every literal of `self` is in `o` (so `o` implies `self`).
    pub fn subset_of(&self, o: &Cond) -> bool {
        self.0.iter().all(|l| o.polarity(l.var) == Some(l.pos))
    }

    pub fn contradicts(&self, o: &Cond) -> bool {
        self.0.iter().any(|l| o.polarity(l.var) == Some(!l.pos))
    }

    pub fn minus(&self, o: &Cond) -> Cond {
        Cond(
            self.0
                .iter()
                .filter(|l| o.polarity(l.var) != Some(l.pos))
                .copied()
                .collect(),
        )
    }

    pub fn common(&self, o: &Cond) -> Cond {
        Cond(
            self.0
                .iter()
                .filter(|l| o.polarity(l.var) == Some(l.pos))
                .copied()
                .collect(),
        )
    }

    pub fn retain(&self, mut keep: impl FnMut(&Lit) -> bool) -> Cond {
        Cond(self.0.iter().filter(|l| keep(l)).copied().collect())
    }

    /// Key used to print condition maps: fewer literals first.
    pub fn sort_key(&self) -> (usize, Vec<Lit>) {
        (self.0.len(), self.0.clone())
    }

    pub fn show(&self, name: &dyn Fn(Var) -> String) -> String {
        if self.0.is_empty() {
            return "true".into();
        }
        let mut s = String::new();
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                s.push_str(" ∧ ");
            }
            if !l.pos {
                s.push('¬');
            }
            let _ = write!(s, "{}", name(l.var));
        }
        s
    }
}
