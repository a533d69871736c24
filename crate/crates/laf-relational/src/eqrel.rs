//! Conjunctions of equalities `p = q + k` and `p = k` over paths, kept in
//! union-find-with-offset form.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use laf_core::{Var, VarTable};
use num_bigint::BigInt;
use num_traits::Zero;

/// A scalar variable or a scalar component of a tuple variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub var: Var,
    pub comp: Option<usize>,
}

impl Path {
    pub fn var(var: Var) -> Path {
        Path { var, comp: None }
    }

    pub fn comp(var: Var, i: usize) -> Path {
        Path { var, comp: Some(i) }
    }

    pub fn show(&self, vars: &VarTable) -> String {
        self.show_with(&|v| vars.name(v).to_string())
    }

    pub fn show_with(&self, name: &dyn Fn(Var) -> String) -> String {
        match self.comp {
            None => name(self.var),
            Some(i) => format!("{}.{i}", name(self.var)),
        }
    }
}

/// Node of the union-find: the constant zero or a path. `Zero` sorts first,
/// so a class holding a constant always has it as representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Zero,
    Path(Path),
}

/// Element of the equality domain. `None` is ⊥. In `Some(m)`, each entry
/// `p ↦ (r, k)` states `p = r + k` where `r` is the least node of `p`'s class;
/// representatives have no entry. This form is canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EqRel(Option<BTreeMap<Path, (Node, BigInt)>>);

impl Default for EqRel {
    fn default() -> Self {
        EqRel::top()
    }
}

impl EqRel {
    pub fn top() -> EqRel {
        EqRel(Some(BTreeMap::new()))
    }

    pub fn bottom() -> EqRel {
        EqRel(None)
    }

    pub fn is_bottom(&self) -> bool {
        self.0.is_none()
    }

    pub fn is_top(&self) -> bool {
        self.0.as_ref().is_some_and(|m| m.is_empty())
    }

    /// Number of stored atoms.
    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |m| m.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Representative and offset of `n`.
    pub fn find(&self, n: Node) -> (Node, BigInt) {
        match (n, &self.0) {
            (Node::Path(p), Some(m)) => m.get(&p).cloned().unwrap_or((n, BigInt::zero())),
            _ => (n, BigInt::zero()),
        }
    }

    /// The constant `p` is known to equal, if any.
    pub fn constant(&self, p: Path) -> Option<BigInt> {
        if self.is_bottom() {
            return None;
        }
        match self.find(Node::Path(p)) {
            (Node::Zero, k) => Some(k),
            _ => None,
        }
    }

    /// The `k` such that `a = b + k` is entailed, if any. ⊥ entails nothing
    /// here, callers handle it first.
    pub fn difference(&self, a: Node, b: Node) -> Option<BigInt> {
        if self.is_bottom() {
            return None;
        }
        let (ra, ka) = self.find(a);
        let (rb, kb) = self.find(b);
        (ra == rb).then(|| ka - kb)
    }

    pub fn entails(&self, a: Node, b: Node, k: &BigInt) -> bool {
        self.is_bottom() || self.difference(a, b).as_ref() == Some(k)
    }

    /// Conjoins `a = b + k`.
    pub fn add(&mut self, a: Node, b: Node, k: BigInt) {
        let Some(m) = &mut self.0 else { return };
        let find = |m: &BTreeMap<Path, (Node, BigInt)>, n: Node| match n {
            Node::Path(p) => m.get(&p).cloned().unwrap_or((n, BigInt::zero())),
            Node::Zero => (n, BigInt::zero()),
        };
        let (ra, ka) = find(m, a);
        let (rb, kb) = find(m, b);
        // ra = rb + d
        let d = kb + k - ka;
        if ra == rb {
            if !d.is_zero() {
                self.0 = None;
            }
            return;
        }
        // Attach the class of the larger representative to the smaller one.
        let (keep, drop, shift) = if ra < rb { (ra, rb, -d) } else { (rb, ra, d) };
        // drop = keep + shift
        let Node::Path(dp) = drop else {
            unreachable!("zero is the least node")
        };
        for (r, off) in m.values_mut() {
            if *r == drop {
                *r = keep;
                *off += &shift;
            }
        }
        m.insert(dp, (keep, shift));
    }

    pub fn add_const(&mut self, p: Path, k: BigInt) {
        self.add(Node::Path(p), Node::Zero, k);
    }

    pub fn add_eq(&mut self, p: Path, q: Path, k: BigInt) {
        self.add(Node::Path(p), Node::Path(q), k);
    }

    /// Every atom, as `(p, r, k)` meaning `p = r + k`.
    pub fn atoms(&self) -> Vec<(Path, Node, BigInt)> {
        match &self.0 {
            None => Vec::new(),
            Some(m) => m.iter().map(|(p, (r, k))| (*p, *r, k.clone())).collect(),
        }
    }

    /// Paths mentioned by some atom.
    pub fn paths(&self) -> BTreeSet<Path> {
        let mut out = BTreeSet::new();
        for (p, r, _) in self.atoms() {
            out.insert(p);
            if let Node::Path(q) = r {
                out.insert(q);
            }
        }
        out
    }

    /// Forgets everything about the paths satisfying `pred`, keeping the
    /// relations they implied between the remaining paths.
    pub fn forget(&mut self, pred: impl Fn(&Path) -> bool) {
        let Some(m) = &mut self.0 else { return };
        // Representatives being removed hand their class to the least survivor.
        let mut rebase: HashMap<Path, Option<(Path, BigInt)>> = HashMap::new();
        for (p, (r, k)) in m.iter() {
            if let Node::Path(rp) = r {
                if pred(rp) && !pred(p) {
                    let e = rebase.entry(*rp).or_insert(None);
                    // BTreeMap iteration is ordered, so the first survivor is the least.
                    if e.is_none() {
                        *e = Some((*p, k.clone()));
                    }
                }
            }
        }
        let old = std::mem::take(m);
        for (p, (r, k)) in old {
            if pred(&p) {
                continue;
            }
            match r {
                Node::Path(rp) if pred(&rp) => {
                    let (np, nk) = rebase[&rp].clone().expect("survivor recorded");
                    if np != p {
                        // p = rp + k and np = rp + nk
                        m.insert(p, (Node::Path(np), k - nk));
                    }
                }
                _ => {
                    m.insert(p, (r, k));
                }
            }
        }
    }

    pub fn forget_var(&mut self, v: Var) {
        self.forget(|p| p.var == v);
    }

    pub fn forget_vars(&mut self, vs: &BTreeSet<Var>) {
        if !vs.is_empty() {
            self.forget(|p| vs.contains(&p.var));
        }
    }

    pub fn meet(&self, other: &EqRel) -> EqRel {
        let mut out = self.clone();
        out.meet_with(other);
        out
    }

    pub fn meet_with(&mut self, other: &EqRel) {
        match &other.0 {
            None => self.0 = None,
            Some(m) => {
                for (p, (r, k)) in m {
                    self.add(Node::Path(*p), *r, k.clone());
                }
            }
        }
    }

    /// The atoms entailed by both.
    pub fn join(&self, other: &EqRel) -> EqRel {
        let (Some(a), Some(b)) = (&self.0, &other.0) else {
            return if self.is_bottom() {
                other.clone()
            } else {
                self.clone()
            };
        };
        let mut nodes: BTreeSet<Node> = BTreeSet::from([Node::Zero]);
        for m in [a, b] {
            for (p, (r, _)) in m {
                nodes.insert(Node::Path(*p));
                nodes.insert(*r);
            }
        }
        // Two nodes stay related iff they share a class in both, with the
        // same difference; the key below captures exactly that.
        let mut groups: BTreeMap<(Node, Node, BigInt), Vec<(Node, BigInt)>> = BTreeMap::new();
        for n in nodes {
            let (r1, k1) = self.find(n);
            let (r2, k2) = other.find(n);
            groups.entry((r1, r2, &k1 - k2)).or_default().push((n, k1));
        }
        let mut out = BTreeMap::new();
        for members in groups.into_values() {
            // Nodes were visited in order, so the first member is the least.
            let (rep, rk) = members[0].clone();
            for (n, k) in &members[1..] {
                let Node::Path(p) = n else {
                    unreachable!("zero is the least node")
                };
                out.insert(*p, (rep, k - &rk));
            }
        }
        EqRel(Some(out))
    }

    /// Entailment order: `self ⊑ other` when `self` entails every atom of `other`.
    pub fn leq(&self, other: &EqRel) -> bool {
        match (&self.0, &other.0) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(_), Some(m)) => m
                .iter()
                .all(|(p, (r, k))| self.entails(Node::Path(*p), *r, k)),
        }
    }

    /// Whether some valuation satisfying this element extends the partial
    /// valuation `known`.
    pub fn admits(&self, known: &[(Path, BigInt)]) -> bool {
        if self.is_bottom() {
            return false;
        }
        let mut seen: HashMap<Node, BigInt> = HashMap::new();
        for (p, v) in known {
            let (r, k) = self.find(Node::Path(*p));
            // value of the representative
            let rv = v - k;
            if r == Node::Zero && !rv.is_zero() {
                return false;
            }
            match seen.get(&r) {
                Some(prev) if *prev != rv => return false,
                Some(_) => {}
                None => {
                    seen.insert(r, rv);
                }
            }
        }
        true
    }

    pub fn show(&self, vars: &VarTable) -> String {
        self.show_with(&|v| vars.name(v).to_string())
    }

    /// Prints with the given variable names.
    pub fn show_with(&self, name: &dyn Fn(Var) -> String) -> String {
        match &self.0 {
            None => "⊥".into(),
            Some(m) if m.is_empty() => "⊤".into(),
            Some(m) => {
                let atoms: Vec<String> = m
                    .iter()
                    .map(|(p, (r, k))| {
                        let lhs = p.show_with(name);
                        match r {
                            Node::Zero => format!("{lhs} = {k}"),
                            Node::Path(q) => {
                                let q = q.show_with(name);
                                if k.is_zero() {
                                    format!("{lhs} = {q}")
                                } else if k.sign() == num_bigint::Sign::Minus {
                                    format!("{lhs} = {q} - {}", -k)
                                } else {
                                    format!("{lhs} = {q} + {k}")
                                }
                            }
                        }
                    })
                    .collect();
                atoms.join(" ∧ ")
            }
        }
    }
}

impl fmt::Display for EqRel {
    /// Variable ids are printed as `vN`; use [`EqRel::show`] for names.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut t = VarTable::new();
        let max = self
            .paths()
            .iter()
            .map(|p| p.var.index())
            .max()
            .map_or(0, |m| m + 1);
        for i in 0..max {
            t.fresh(format!("v{i}"), laf_core::Sort::Int);
        }
        f.write_str(&self.show(&t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: u32) -> Path {
        Path::var(Var(i))
    }

    fn n(i: u32) -> Node {
        Node::Path(p(i))
    }

    #[test]
    fn closure_and_contradiction() {
        let mut d = EqRel::top();
        d.add_eq(p(2), p(1), 1.into());
        d.add_eq(p(3), p(2), (-1).into());
        assert_eq!(d.difference(n(3), n(1)), Some(0.into()));
        d.add_const(p(3), 5.into());
        assert_eq!(d.constant(p(2)), Some(6.into()));
        d.add_const(p(1), 4.into());
        assert!(d.is_bottom());
    }

    #[test]
    fn canonical_form_ignores_insertion_order() {
        let mut a = EqRel::top();
        a.add_eq(p(1), p(2), 3.into());
        a.add_eq(p(3), p(1), 0.into());
        let mut b = EqRel::top();
        b.add_eq(p(3), p(2), 3.into());
        b.add_eq(p(2), p(1), (-3).into());
        assert_eq!(a, b);
    }

    #[test]
    fn forgetting_a_representative_keeps_implied_atoms() {
        let mut d = EqRel::top();
        d.add_eq(p(2), p(1), 1.into());
        d.add_eq(p(3), p(1), 2.into());
        d.forget_var(Var(1));
        assert_eq!(d.difference(n(3), n(2)), Some(1.into()));
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn join_keeps_common_atoms() {
        let mut a = EqRel::top();
        a.add_eq(p(1), p(0), 0.into());
        a.add_const(p(0), 2.into());
        let mut b = EqRel::top();
        b.add_eq(p(1), p(0), 0.into());
        b.add_const(p(0), 3.into());
        let j = a.join(&b);
        assert_eq!(j.difference(n(1), n(0)), Some(0.into()));
        assert_eq!(j.constant(p(0)), None);
        assert!(a.leq(&j) && b.leq(&j));
        assert_eq!(EqRel::bottom().join(&a), a);
    }
}
