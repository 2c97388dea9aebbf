use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Expr, Program, Stmt, VarId};
use crate::machine_int::{BinOp, Width};

const VAR_NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];
const MAX_LOOP_DEPTH: usize = 2;
const MAX_EXPR_DEPTH: usize = 3;

/// Parameters of the random program generator.
#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    /// Upper bound on the number of statement nodes.
    pub size_budget: usize,
    /// Number of program variables, 1 to 8.
    pub vars: usize,
    pub width: Width,
}

impl GenConfig {
    pub fn new(size_budget: usize, vars: usize, width: Width) -> Self {
        assert!(size_budget >= 1, "size budget must be positive");
        assert!((1..=8).contains(&vars), "between 1 and 8 variables");
        GenConfig {
            size_budget,
            vars,
            width,
        }
    }
}

/// Deterministically generates a program from `seed`.
///
/// The statement tree has at most `size_budget` nodes, loops nest at most
/// twice, and `Seq` chains are nested to the right so the program prints
/// and re-parses to itself.
pub fn gen_random(seed: u64, size_budget: usize, vars: usize, width: Width) -> Program {
    let cfg = GenConfig::new(size_budget, vars, width);
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        consts: interesting_constants(width),
        cfg,
    };
    let body = g.stmt(cfg.size_budget, 0, true);
    Program {
        vars: VAR_NAMES[..vars].iter().map(|s| s.to_string()).collect(),
        body,
        width,
    }
}

/// `count` programs whose individual seeds are drawn from a stream keyed
/// by `seed`, so batches with different seeds do not overlap.
pub fn gen_batch(seed: u64, count: usize, cfg: GenConfig) -> Vec<Program> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| gen_random(rng.gen(), cfg.size_budget, cfg.vars, cfg.width))
        .collect()
}

fn interesting_constants(w: Width) -> Vec<i64> {
    let (min, max) = (w.min_int() as i128, w.max_int() as i128);
    let mut out: Vec<i64> = [
        -2, -1, 0, 1, 2, 3, -4, 4, -8, 8, -16, 16, -32, 32, -64, 64, min, min + 1, max - 1, max,
    ]
    .into_iter()
    .filter(|c| w.inbounds(*c))
    .map(|c| c as i64)
    .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Clone, Copy)]
enum Kind {
    Assign,
    Assume,
    Seq,
    Choice,
    Loop,
}

struct Gen {
    rng: ChaCha8Rng,
    consts: Vec<i64>,
    cfg: GenConfig,
}

impl Gen {
    fn stmt(&mut self, budget: usize, loops: usize, allow_seq: bool) -> Stmt {
        let mut kinds = vec![(Kind::Assign, 40), (Kind::Assume, 20)];
        if allow_seq && budget >= 3 {
            kinds.push((Kind::Seq, 20));
        }
        if budget >= 3 {
            kinds.push((Kind::Choice, 10));
        }
        if budget >= 2 && loops < MAX_LOOP_DEPTH {
            kinds.push((Kind::Loop, 10));
        }
        let kind = kinds
            .choose_weighted(&mut self.rng, |k| k.1)
            .expect("non-empty weights")
            .0;
        match kind {
            Kind::Assign => {
                let v = VarId(self.rng.gen_range(0..self.cfg.vars));
                let e = self.expr(0);
                Stmt::Assign(v, e)
            }
            Kind::Assume => Stmt::Assume(self.condition()),
            Kind::Seq => {
                let first_budget = self.rng.gen_range(1..=budget - 2);
                let first = self.stmt(first_budget, loops, false);
                let rest = self.stmt(budget - 1 - first.size(), loops, true);
                Stmt::seq(first, rest)
            }
            Kind::Choice => {
                let left_budget = self.rng.gen_range(1..=budget - 2);
                let a = self.stmt(left_budget, loops, true);
                let b = self.stmt(budget - 1 - a.size(), loops, true);
                Stmt::choice(a, b)
            }
            Kind::Loop => Stmt::looping(self.stmt(budget - 1, loops + 1, true)),
        }
    }

    fn constant(&mut self) -> i64 {
        *self.consts.choose(&mut self.rng).expect("constants")
    }

    fn var(&mut self) -> Expr {
        Expr::Var(VarId(self.rng.gen_range(0..self.cfg.vars)))
    }

    fn leaf(&mut self) -> Expr {
        match self.rng.gen_range(0..10) {
            0..=4 => self.var(),
            5..=7 => Expr::Const(self.constant()),
            _ => Expr::Unknown,
        }
    }

    fn expr(&mut self, depth: usize) -> Expr {
        let p_binop = match depth {
            0 => 0.6,
            1 => 0.35,
            _ => 0.0,
        };
        if depth + 1 >= MAX_EXPR_DEPTH || !self.rng.gen_bool(p_binop) {
            return self.leaf();
        }
        let op = *BinOp::ALL.choose(&mut self.rng).expect("ops");
        let l = self.expr(depth + 1);
        let r = self.expr(depth + 1);
        Expr::binop(op, l, r)
    }

    fn condition(&mut self) -> Expr {
        match self.rng.gen_range(0..4) {
            0 => {
                let c = Expr::Const(self.constant());
                Expr::binop(BinOp::Lt, self.var(), c)
            }
            1 => {
                let c = Expr::Const(self.constant());
                let v = self.var();
                if self.rng.gen_bool(0.5) {
                    Expr::binop(BinOp::Lt, c, v)
                } else {
                    Expr::binop(BinOp::Eq, v, c)
                }
            }
            _ => self.expr(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_with_vars, pretty};

    fn w4() -> Width {
        Width::new(4).unwrap()
    }

    #[test]
    fn deterministic_in_seed() {
        for seed in 0..50 {
            assert_eq!(gen_random(seed, 12, 3, w4()), gen_random(seed, 12, 3, w4()));
        }
    }

    #[test]
    fn batches_are_prefix_stable() {
        let cfg = GenConfig::new(12, 3, w4());
        let long = gen_batch(7, 20, cfg);
        assert_eq!(gen_batch(7, 5, cfg), long[..5]);
        assert_ne!(gen_batch(8, 5, cfg), long[..5]);
    }

    #[test]
    fn smallest_budget_gives_a_leaf() {
        for seed in 0..200 {
            let p = gen_random(seed, 1, 2, w4());
            assert!(matches!(p.body, Stmt::Assign(..) | Stmt::Assume(_)));
        }
    }

    #[test]
    fn respects_structural_bounds() {
        for seed in 0..1000 {
            let p = gen_random(seed, 12, 3, w4());
            assert!(p.body.size() <= 12);
            assert!(p.body.loop_depth() <= 2);
            assert!(Program::new(p.vars.clone(), p.body.clone(), p.width).is_ok());
        }
    }

    #[test]
    fn round_trips_through_concrete_syntax() {
        for bits in [4, 8, 64] {
            let w = Width::new(bits).unwrap();
            for seed in 0..1000 {
                let p = gen_random(seed, 16, 3, w);
                let text = pretty(&p);
                let q = parse_with_vars(&text, w, &p.vars).unwrap();
                assert_eq!(p, q, "seed {seed}:\n{text}");
            }
        }
    }
}
