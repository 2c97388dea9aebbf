//! Non-relational abstract memories over any numeric domain.
//!
//! A memory maps every program variable to an abstract value. As soon as
//! one entry becomes bottom the whole memory collapses to [`AMem::Bot`], so
//! a `Val` memory never has an empty entry.

use crate::concrete::ConcreteMem;
use crate::difftest::Mutant;
use crate::domain::{
    prefixpoint, AbstractDomain, FixStats, FixpointError, Lattice, MemDomain, NumDomain,
};
use crate::lang::{Expr, VarId};

/// An abstract memory: unreachable, or one abstract value per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AMem<A> {
    Bot,
    Val(Vec<A>),
}

impl<A> AMem<A> {
    pub fn entries(&self) -> Option<&[A]> {
        match self {
            AMem::Bot => None,
            AMem::Val(m) => Some(m),
        }
    }

    pub fn get(&self, v: VarId) -> Option<&A> {
        self.entries().map(|m| &m[v.index()])
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, AMem::Bot)
    }
}

/// The memory domain built on the numeric domain `N`.
#[derive(Clone, Debug)]
pub struct MemoryDomain<N> {
    num: N,
    nvars: usize,
    mutant: Option<Mutant>,
}

impl<N: NumDomain> MemoryDomain<N> {
    pub fn new(num: N, nvars: usize) -> Self {
        MemoryDomain {
            num,
            nvars,
            mutant: None,
        }
    }

    pub fn mutated(mut self, mutant: Mutant) -> Self {
        self.mutant = Some(mutant);
        self
    }

    pub fn num(&self) -> &N {
        &self.num
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Builds a memory from per-variable values, collapsing to `Bot` if any
    /// of them is bottom.
    pub fn from_entries(&self, entries: Vec<N::Value>) -> AMem<N::Value> {
        assert_eq!(entries.len(), self.nvars, "one entry per variable");
        self.reduce(entries)
    }

    fn reduce(&self, entries: Vec<N::Value>) -> AMem<N::Value> {
        if self.mutant != Some(Mutant::DroppedBotReduction)
            && entries.iter().any(|x| self.num.is_bottom(x))
        {
            AMem::Bot
        } else {
            AMem::Val(entries)
        }
    }

    /// True if `m` satisfies the canonical-form invariant.
    pub fn is_canonical(&self, m: &AMem<N::Value>) -> bool {
        match m {
            AMem::Bot => true,
            AMem::Val(e) => e.len() == self.nvars && !e.iter().any(|x| self.num.is_bottom(x)),
        }
    }

    pub fn update(&self, v: VarId, x: N::Value, m: &AMem<N::Value>) -> AMem<N::Value> {
        match m {
            AMem::Bot => AMem::Bot,
            AMem::Val(e) => {
                let mut e = e.clone();
                e[v.index()] = x;
                AMem::Val(e)
            }
        }
    }

    /// Forward abstract evaluation of `e` in `m`.
    pub fn asem_expr(&self, m: &AMem<N::Value>, e: &Expr) -> N::Value {
        match m {
            AMem::Bot => self.num.bottom(),
            AMem::Val(entries) => self.eval(entries, e),
        }
    }

    fn eval(&self, entries: &[N::Value], e: &Expr) -> N::Value {
        match e {
            Expr::Const(c) => self.num.beta(*c),
            Expr::Var(v) => entries[v.index()].clone(),
            Expr::Unknown => self.num.top(),
            Expr::BinOp(op, x, y) => {
                self.num
                    .forward_binop(*op, &self.eval(entries, x), &self.eval(entries, y))
            }
        }
    }

    /// One refinement pass of `m` under the hypothesis that `e` evaluates
    /// into `r`. The result is below `m`.
    pub fn backward_asem(&self, e: &Expr, r: &N::Value, m: &AMem<N::Value>) -> AMem<N::Value> {
        if self.is_bottom(m) {
            return AMem::Bot;
        }
        match e {
            Expr::Const(c) => {
                if self.num.cgamma(r, c) {
                    m.clone()
                } else {
                    AMem::Bot
                }
            }
            Expr::Unknown => m.clone(),
            Expr::Var(v) => {
                let cur = m.get(*v).expect("non-bottom memory");
                let x = self.num.meet(r, cur);
                if self.num.is_bottom(&x) {
                    AMem::Bot
                } else {
                    self.update(*v, x, m)
                }
            }
            Expr::BinOp(op, ex, ey) => {
                let (x, y) = self.num.backward_binop(
                    *op,
                    &self.asem_expr(m, ex),
                    &self.asem_expr(m, ey),
                    r,
                );
                let left = self.backward_asem(ex, &x, m);
                let right = self.backward_asem(ey, &y, m);
                self.meet(&left, &right)
            }
        }
    }

    /// Iterates [`Self::backward_asem`] until it stops refining.
    pub fn backward_asem_fp(
        &self,
        e: &Expr,
        r: &N::Value,
        m: &AMem<N::Value>,
        stats: &mut FixStats,
    ) -> Result<AMem<N::Value>, FixpointError> {
        let fp = prefixpoint(
            |a, b| self.corder(a, b),
            self.order_measure(),
            |x| self.backward_asem(e, r, x),
            m.clone(),
        )?;
        stats.record_backward(&fp);
        Ok(fp.value)
    }
}

impl<N: NumDomain> Lattice for MemoryDomain<N> {
    type Value = AMem<N::Value>;

    fn corder(&self, x: &Self::Value, y: &Self::Value) -> bool {
        match (x, y) {
            (AMem::Bot, _) => true,
            (_, AMem::Bot) => false,
            (AMem::Val(a), AMem::Val(b)) => a.iter().zip(b).all(|(p, q)| self.num.corder(p, q)),
        }
    }

    fn join(&self, x: &Self::Value, y: &Self::Value) -> Self::Value {
        match (x, y) {
            (m, AMem::Bot) | (AMem::Bot, m) => m.clone(),
            (AMem::Val(a), AMem::Val(b)) => {
                AMem::Val(a.iter().zip(b).map(|(p, q)| self.num.join(p, q)).collect())
            }
        }
    }

    fn meet(&self, x: &Self::Value, y: &Self::Value) -> Self::Value {
        match (x, y) {
            (AMem::Val(a), AMem::Val(b)) => {
                self.reduce(a.iter().zip(b).map(|(p, q)| self.num.meet(p, q)).collect())
            }
            _ => AMem::Bot,
        }
    }

    fn bottom(&self) -> Self::Value {
        AMem::Bot
    }

    fn top(&self) -> Self::Value {
        AMem::Val(vec![self.num.top(); self.nvars])
    }
}

impl<N: NumDomain> AbstractDomain for MemoryDomain<N> {
    type Concrete = ConcreteMem;

    fn cgamma(&self, x: &Self::Value, c: &ConcreteMem) -> bool {
        match x {
            AMem::Bot => false,
            AMem::Val(a) => a.iter().zip(c.values()).all(|(p, v)| self.num.cgamma(p, v)),
        }
    }

    fn widen(&self, x: &Self::Value, y: &Self::Value) -> Self::Value {
        match (x, y) {
            (m, AMem::Bot) | (AMem::Bot, m) => m.clone(),
            (AMem::Val(a), AMem::Val(b)) => {
                AMem::Val(a.iter().zip(b).map(|(p, q)| self.num.widen(p, q)).collect())
            }
        }
    }

    fn measure(&self, x: &Self::Value) -> u128 {
        match x {
            AMem::Bot => 0,
            AMem::Val(a) => 1 + a.iter().map(|p| self.num.measure(p)).sum::<u128>(),
        }
    }

    fn measure_max(&self) -> u128 {
        1 + self.num.measure_max() * self.nvars as u128
    }
}

impl<N: NumDomain> MemDomain for MemoryDomain<N> {
    fn assume(
        &self,
        m: &Self::Value,
        e: &Expr,
        stats: &mut FixStats,
    ) -> Result<Self::Value, FixpointError> {
        let pos = self.backward_asem_fp(e, &self.num.gt0(), m, stats)?;
        if self.mutant == Some(Mutant::AssumeWithoutLt0) {
            return Ok(pos);
        }
        let neg = self.backward_asem_fp(e, &self.num.lt0(), m, stats)?;
        Ok(self.join(&pos, &neg))
    }

    fn assign(&self, m: &Self::Value, v: VarId, e: &Expr) -> Self::Value {
        let x = self.asem_expr(m, e);
        if self.num.is_bottom(&x) {
            AMem::Bot
        } else {
            self.update(v, x, m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{IntervalDomain, Itv};
    use crate::machine_int::{BinOp, Width};

    fn dom(bits: u32, nvars: usize) -> MemoryDomain<IntervalDomain> {
        MemoryDomain::new(IntervalDomain::new(Width::new(bits).unwrap()), nvars)
    }

    fn a() -> Expr {
        Expr::var(0)
    }

    #[test]
    fn update_and_gamma() {
        let d = dom(4, 2);
        let m = d.update(VarId(0), Itv::val(1, 2), &d.top());
        assert_eq!(m.get(VarId(0)), Some(&Itv::val(1, 2)));
        assert_eq!(m.get(VarId(1)), Some(&d.num().top()));
        assert_eq!(d.update(VarId(0), Itv::val(1, 2), &AMem::Bot), AMem::Bot);
        for x in Width::new(4).unwrap().values() {
            for y in Width::new(4).unwrap().values() {
                let c = ConcreteMem(vec![x, y]);
                assert_eq!(d.cgamma(&m, &c), (1..=2).contains(&x));
            }
        }
    }

    #[test]
    fn meet_reduces_to_bot() {
        let d = dom(8, 2);
        let m1 = d.update(VarId(0), Itv::val(0, 5), &d.top());
        let m2 = d.update(VarId(0), Itv::val(6, 9), &d.top());
        assert_eq!(d.meet(&m1, &m2), AMem::Bot);
        assert_eq!(d.join(&AMem::Bot, &m1), m1);
        let bad = d.mutated(Mutant::DroppedBotReduction);
        assert!(!bad.is_canonical(&bad.meet(&m1, &m2)));
    }

    #[test]
    fn forward_evaluation() {
        let d = dom(8, 1);
        let m = d.update(VarId(0), Itv::val(1, 3), &d.top());
        assert_eq!(d.asem_expr(&d.top(), &Expr::Const(5)), Itv::singleton(5));
        assert_eq!(
            d.asem_expr(&m, &Expr::binop(BinOp::Plus, a(), Expr::Const(1))),
            Itv::val(2, 4)
        );
        assert_eq!(d.asem_expr(&AMem::Bot, &a()), Itv::Bot);
    }

    #[test]
    fn backward_examples() {
        let d = dom(8, 1);
        assert_eq!(
            d.backward_asem(&Expr::Const(3), &Itv::singleton(0), &d.top()),
            AMem::Bot
        );
        let m = d.update(VarId(0), Itv::val(5, 20), &d.top());
        assert_eq!(
            d.backward_asem(&a(), &Itv::val(0, 10), &m),
            d.update(VarId(0), Itv::val(5, 10), &m)
        );
        let lt = Expr::binop(BinOp::Lt, a(), Expr::Const(10));
        assert_eq!(
            d.backward_asem(&lt, &Itv::singleton(1), &d.top()),
            d.update(VarId(0), Itv::val(-128, 9), &d.top())
        );
        assert_eq!(d.backward_asem(&Expr::Unknown, &Itv::Bot, &m), m);
    }

    #[test]
    fn contradiction_found_by_iteration() {
        let d = dom(8, 2);
        let (x, y) = (Expr::var(0), Expr::var(1));
        let e = Expr::binop(
            BinOp::And,
            Expr::binop(BinOp::Lt, x.clone(), y.clone()),
            Expr::binop(BinOp::Lt, y, x),
        );
        let mut stats = FixStats::default();
        let r = d
            .backward_asem_fp(&e, &Itv::singleton(1), &d.top(), &mut stats)
            .unwrap();
        assert_eq!(r, AMem::Bot);
        assert!(stats.max_backward_steps as u128 <= d.measure(&d.top()) + 1);
    }

    #[test]
    fn assume_and_assign() {
        let d = dom(8, 2);
        let mut stats = FixStats::default();
        let m = d.update(VarId(1), Itv::val(0, 3), &d.top());
        assert_eq!(d.assume(&m, &Expr::Const(1), &mut stats).unwrap(), m);
        assert_eq!(d.assume(&m, &Expr::Const(0), &mut stats).unwrap(), AMem::Bot);
        let lt = Expr::binop(BinOp::Lt, a(), Expr::Const(10));
        assert_eq!(
            d.assume(&d.top(), &lt, &mut stats).unwrap(),
            d.update(VarId(0), Itv::val(-128, 9), &d.top())
        );
        assert_eq!(
            d.assign(&d.top(), VarId(0), &Expr::Const(5)).get(VarId(0)),
            Some(&Itv::singleton(5))
        );
        assert_eq!(
            d.assign(&m, VarId(0), &Expr::Unknown).get(VarId(0)),
            Some(&d.num().top())
        );
        let inc = Expr::binop(BinOp::Plus, Expr::var(1), Expr::Const(1));
        assert_eq!(d.assign(&m, VarId(0), &inc).get(VarId(0)), Some(&Itv::val(1, 4)));
    }

    #[test]
    fn measure_is_bounded() {
        let d = dom(64, 3);
        assert!(d.measure(&d.top()) < d.measure_max());
        assert_eq!(d.measure(&AMem::Bot), 0);
    }
}
