use laf_core::{Literal, Op, Sort, Term, TermBuilder, Var};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative weights of definition kinds.
#[derive(Clone, Debug)]
pub struct OpWeights {
    pub lit: u32,
    pub arith: u32,
    pub div: u32,
    pub cmp: u32,
    pub boolean: u32,
    pub tuple: u32,
    pub nondet: u32,
    pub assume: u32,
    pub unknown: u32,
    pub mu: u32,
    pub bitvec: u32,
}

impl Default for OpWeights {
    fn default() -> Self {
        OpWeights {
            lit: 3,
            arith: 4,
            div: 1,
            cmp: 3,
            boolean: 2,
            tuple: 2,
            nondet: 3,
            assume: 3,
            unknown: 2,
            mu: 5,
            bitvec: 0,
        }
    }
}

impl OpWeights {
    /// Mostly additions, copies through tuples and equalities.
    pub fn affine_heavy() -> Self {
        OpWeights {
            lit: 3,
            arith: 6,
            div: 0,
            cmp: 3,
            boolean: 1,
            tuple: 4,
            nondet: 2,
            assume: 3,
            unknown: 2,
            mu: 4,
            bitvec: 0,
        }
    }

    fn table(&self) -> [(Kind, u32); 11] {
        [
            (Kind::Lit, self.lit),
            (Kind::Arith, self.arith),
            (Kind::Div, self.div),
            (Kind::Cmp, self.cmp),
            (Kind::Bool, self.boolean),
            (Kind::Tuple, self.tuple),
            (Kind::Nondet, self.nondet),
            (Kind::Assume, self.assume),
            (Kind::Unknown, self.unknown),
            (Kind::Mu, self.mu),
            (Kind::BitVec, self.bitvec),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct TermGenConfig {
    /// Upper bound on definitions, loop bodies included.
    pub max_defs: usize,
    pub max_tuple_arity: usize,
    pub op_weights: OpWeights,
    pub seed: u64,
    pub allow_mu: bool,
    pub max_mu_depth: usize,
    pub max_unknowns: usize,
    /// Integer literals are drawn from this inclusive range.
    pub lit_range: (i64, i64),
}

impl Default for TermGenConfig {
    fn default() -> Self {
        TermGenConfig {
            max_defs: 12,
            max_tuple_arity: 3,
            op_weights: OpWeights::default(),
            seed: 0,
            allow_mu: true,
            max_mu_depth: 2,
            max_unknowns: 2,
            lit_range: (-3, 3),
        }
    }
}

impl TermGenConfig {
    pub fn loop_free() -> Self {
        TermGenConfig {
            allow_mu: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Lit,
    Arith,
    Div,
    Cmp,
    Bool,
    Tuple,
    Nondet,
    Assume,
    Unknown,
    Mu,
    BitVec,
}

/// Definitions needed by the convergence guard around a loop exit.
const MU_GUARD: usize = 6;

struct Gen<'a> {
    cfg: &'a TermGenConfig,
    rng: ChaCha8Rng,
    b: TermBuilder,
    visible: Vec<Var>,
    remaining: usize,
    unknowns: usize,
    depth: usize,
    counter: usize,
}

impl Gen<'_> {
    fn name(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    fn of_sort(&self, pred: impl Fn(&Sort) -> bool) -> Vec<Var> {
        self.visible
            .iter()
            .copied()
            .filter(|v| pred(self.b.sort(*v)))
            .collect()
    }

    fn pick(&mut self, pred: impl Fn(&Sort) -> bool) -> Option<Var> {
        let c = self.of_sort(pred);
        c.choose(&mut self.rng).copied()
    }

    fn pick_sorted(&mut self, s: &Sort) -> Option<Var> {
        self.pick(|x| x == s)
    }

    fn add(&mut self, v: Var) -> Var {
        self.visible.push(v);
        self.remaining -= 1;
        v
    }

    fn lit(&mut self, sort: &Sort) -> Var {
        let n = self.name("k");
        let l = match sort {
            Sort::Bool => Literal::Bool(self.rng.gen()),
            Sort::BitVec(w) => Literal::BitVec {
                width: *w,
                bits: self.rng.gen::<u64>() & ((1u64 << w) - 1),
            },
            _ => Literal::int(
                self.rng
                    .gen_range(self.cfg.lit_range.0..=self.cfg.lit_range.1),
            ),
        };
        let v = self.b.lit(&n, l).unwrap();
        self.add(v)
    }

    fn int_arg(&mut self) -> Option<Var> {
        self.pick_sorted(&Sort::Int)
    }

    fn op(&mut self, op: Op, args: &[Var]) -> Var {
        let n = self.name("v");
        let v = self.b.op(&n, op, args).unwrap();
        self.add(v)
    }

    fn one(&mut self) -> Var {
        let table = self.cfg.op_weights.table();
        let total: u32 = table
            .iter()
            .filter(|(k, _)| self.allowed(*k))
            .map(|(_, w)| *w)
            .sum();
        let mut r = self.rng.gen_range(0..total.max(1));
        let mut kind = Kind::Lit;
        for (k, w) in table {
            if !self.allowed(k) {
                continue;
            }
            if r < w {
                kind = k;
                break;
            }
            r -= w;
        }
        self.kind(kind)
    }

    fn allowed(&self, k: Kind) -> bool {
        match k {
            Kind::Mu => {
                self.cfg.allow_mu
                    && self.depth < self.cfg.max_mu_depth
                    && self.remaining > MU_GUARD + 2
            }
            Kind::Unknown => self.unknowns < self.cfg.max_unknowns,
            _ => true,
        }
    }

    fn kind(&mut self, kind: Kind) -> Var {
        match kind {
            Kind::Lit => {
                let s = if self.rng.gen_bool(0.7) {
                    Sort::Int
                } else {
                    Sort::Bool
                };
                self.lit(&s)
            }
            Kind::Arith => {
                let op = [Op::Add, Op::Sub, Op::Mul, Op::Neg]
                    .choose(&mut self.rng)
                    .unwrap()
                    .clone();
                match (self.int_arg(), self.int_arg()) {
                    (Some(a), Some(b)) => {
                        if op == Op::Neg {
                            self.op(op, &[a])
                        } else {
                            self.op(op, &[a, b])
                        }
                    }
                    _ => self.lit(&Sort::Int),
                }
            }
            Kind::Div => match (self.int_arg(), self.int_arg()) {
                (Some(a), Some(b)) => self.op(Op::Div, &[a, b]),
                _ => self.lit(&Sort::Int),
            },
            Kind::Cmp => {
                if self.rng.gen_bool(0.25) {
                    let a = match self.pick(|_| true) {
                        Some(a) => a,
                        None => return self.lit(&Sort::Bool),
                    };
                    let s = self.b.sort(a).clone();
                    let b = self.pick_sorted(&s).unwrap();
                    return self.op(Op::Eq, &[a, b]);
                }
                let op = [Op::Lt, Op::Le, Op::Eq]
                    .choose(&mut self.rng)
                    .unwrap()
                    .clone();
                match (self.int_arg(), self.int_arg()) {
                    (Some(a), Some(b)) => self.op(op, &[a, b]),
                    _ => self.lit(&Sort::Bool),
                }
            }
            Kind::Bool => {
                let op = [Op::And, Op::Or, Op::Not]
                    .choose(&mut self.rng)
                    .unwrap()
                    .clone();
                match (self.pick_sorted(&Sort::Bool), self.pick_sorted(&Sort::Bool)) {
                    (Some(a), Some(b)) => {
                        if op == Op::Not {
                            self.op(op, &[a])
                        } else {
                            self.op(op, &[a, b])
                        }
                    }
                    _ => self.lit(&Sort::Bool),
                }
            }
            Kind::Tuple => {
                if self.rng.gen_bool(0.5) {
                    if let Some(t) = self.pick(Sort::is_tuple) {
                        let n = match self.b.sort(t) {
                            Sort::Tuple(es) => es.len(),
                            _ => unreachable!(),
                        };
                        let i = self.rng.gen_range(0..n);
                        return self.op(Op::Get(i), &[t]);
                    }
                }
                let arity = self.rng.gen_range(1..=self.cfg.max_tuple_arity.max(1));
                let mut args = Vec::new();
                for _ in 0..arity {
                    match self.pick(|s| !s.is_tuple()) {
                        Some(a) => args.push(a),
                        None => break,
                    }
                }
                if args.is_empty() {
                    return self.lit(&Sort::Int);
                }
                self.op(Op::Mk, &args)
            }
            Kind::Nondet => {
                let a = match self.pick(|_| true) {
                    Some(a) => a,
                    None => return self.lit(&Sort::Int),
                };
                let s = self.b.sort(a).clone();
                let b = self.pick_sorted(&s).unwrap();
                let n = self.name("v");
                let v = self.b.nondet(&n, a, b).unwrap();
                self.add(v)
            }
            Kind::Assume => {
                let c = match self.pick_sorted(&Sort::Bool) {
                    Some(c) => c,
                    None => return self.lit(&Sort::Bool),
                };
                let x = self.pick(|_| true).unwrap();
                let n = self.name("v");
                let v = self.b.assume(&n, c, x).unwrap();
                self.add(v)
            }
            Kind::Unknown => {
                self.unknowns += 1;
                let s = if self.rng.gen_bool(0.7) {
                    Sort::Int
                } else {
                    Sort::Bool
                };
                let n = self.name("u");
                let v = self.b.unknown(&n, s).unwrap();
                self.add(v)
            }
            Kind::BitVec => self.bitvec(),
            Kind::Mu => self.mu(),
        }
    }

    fn bitvec(&mut self) -> Var {
        let bvs = self.of_sort(|s| matches!(s, Sort::BitVec(_)));
        if bvs.is_empty() || self.rng.gen_bool(0.2) {
            if self.unknowns < self.cfg.max_unknowns && self.rng.gen_bool(0.5) {
                self.unknowns += 1;
                let n = self.name("u");
                let v = self.b.unknown(&n, Sort::BitVec(4)).unwrap();
                return self.add(v);
            }
            return self.lit(&Sort::BitVec(4));
        }
        let x = *bvs.choose(&mut self.rng).unwrap();
        let w = self.b.sort(x).bv_width().unwrap();
        match self.rng.gen_range(0..3) {
            0 => {
                let lo = self.rng.gen_range(0..w);
                let hi = self.rng.gen_range(lo..w);
                self.op(Op::Extract { hi, lo }, &[x])
            }
            1 => {
                let y = *bvs.choose(&mut self.rng).unwrap();
                let wy = self.b.sort(y).bv_width().unwrap();
                if w + wy <= 16 {
                    self.op(Op::Concat, &[x, y])
                } else {
                    self.op(
                        Op::Extract {
                            hi: w - 1,
                            lo: w / 2,
                        },
                        &[x],
                    )
                }
            }
            _ => {
                let y = self.pick_sorted(&Sort::BitVec(w)).unwrap();
                self.op(Op::Eq, &[x, y])
            }
        }
    }

    /// A loop over integers whose exit is confined to a small range, so the
    /// concrete fixpoint is finite.
    fn mu(&mut self) -> Var {
        let init = match self.int_arg() {
            Some(i) => i,
            None => self.lit(&Sort::Int),
        };
        let n = self.name("m");
        let sname = self.name("s");
        let body_budget = self
            .rng
            .gen_range(1..=(self.remaining - 1 - MU_GUARD).min(4));
        let lo = self.rng.gen_range(-3..=0i64);
        let hi = self.rng.gen_range(1..=4i64);
        self.remaining -= 1 + MU_GUARD;
        self.depth += 1;
        let mut visible = std::mem::take(&mut self.visible);
        let mut b = std::mem::take(&mut self.b);
        let this = &mut *self;
        let res = b.mu(&n, &sname, init, |bb, s| {
            std::mem::swap(&mut this.b, bb);
            this.visible = visible.clone();
            this.visible.push(s);
            let start = this.visible.len();
            let target = this.remaining - body_budget;
            while this.remaining > target {
                this.one();
            }
            let local: Vec<Var> = this.visible[start - 1..]
                .iter()
                .copied()
                .filter(|v| *this.b.sort(*v) == Sort::Int)
                .collect();
            let e = *local.choose(&mut this.rng).unwrap();
            // exit guard: lo < e && e < hi
            let kl = this.b.int(&format!("{n}lo"), lo).unwrap();
            let kh = this.b.int(&format!("{n}hi"), hi).unwrap();
            let c1 = this.b.op(&format!("{n}c1"), Op::Lt, &[kl, e]).unwrap();
            let c2 = this.b.op(&format!("{n}c2"), Op::Lt, &[e, kh]).unwrap();
            let c = this.b.op(&format!("{n}c"), Op::And, &[c1, c2]).unwrap();
            let exit = this.b.assume(&format!("{n}e"), c, e).unwrap();
            std::mem::swap(&mut this.b, bb);
            Ok(exit)
        });
        self.b = b;
        let v = res.unwrap();
        self.depth -= 1;
        visible.push(v);
        self.visible = visible;
        v
    }
}

/// Generates a well-formed closed term. Deterministic in `cfg.seed`.
pub fn gen_term(cfg: &TermGenConfig) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max = cfg.max_defs.max(1);
    let n = rng.gen_range((max / 3).max(1)..=max);
    let mut g = Gen {
        cfg,
        rng,
        b: TermBuilder::new(),
        visible: Vec::new(),
        remaining: n,
        unknowns: 0,
        depth: 0,
        counter: 0,
    };
    while g.remaining > 0 {
        g.one();
    }
    let result = *g.visible.last().unwrap();
    g.b.finish(result).unwrap()
}
