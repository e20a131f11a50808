//! Seeded expression generators for verification and benchmarks.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{with_executor, Executor};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    BalancedMulTree,
    RandomDag,
    ZeroIdentity,
    RootTower,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::BalancedMulTree => "balanced-mul-tree",
            Generator::RandomDag => "random-dag",
            Generator::ZeroIdentity => "zero-identity",
            Generator::RootTower => "root-tower",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('_', "-").as_str() {
            "balanced-mul-tree" | "mul-tree" => Ok(Generator::BalancedMulTree),
            "random-dag" | "random" => Ok(Generator::RandomDag),
            "zero-identity" | "zero" => Ok(Generator::ZeroIdentity),
            "root-tower" | "tower" => Ok(Generator::RootTower),
            _ => Err(format!("unknown generator {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExprSpec {
    pub generator: Generator,
    pub depth: u32,
    /// Node budget (random DAGs only).
    pub nodes: usize,
    pub share_prob: f64,
    pub seed: u64,
    /// Fixed leaf value instead of random ones (mul tree, root tower).
    pub leaf: Option<f64>,
}

impl ExprSpec {
    pub fn new(generator: Generator) -> Self {
        let (depth, nodes) = match generator {
            Generator::BalancedMulTree => (12, 0),
            Generator::RandomDag => (10, 256),
            Generator::ZeroIdentity => (0, 0),
            Generator::RootTower => (6, 0),
        };
        ExprSpec { generator, depth, nodes, share_prob: 0.25, seed: 0, leaf: None }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn depth(mut self, depth: u32) -> Self {
        self.depth = depth;
        self
    }

    pub fn nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn share_prob(mut self, p: f64) -> Self {
        self.share_prob = p;
        self
    }

    pub fn leaf(mut self, v: f64) -> Self {
        self.leaf = Some(v);
        self
    }

    pub fn case_id(&self) -> String {
        format!("{}/d{}/n{}/s{}", self.generator, self.depth, self.nodes, self.seed)
    }

    /// Build the DAG. Same spec, same DAG.
    pub fn generate(&self) -> Real {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match self.generator {
            Generator::BalancedMulTree => balanced_mul_tree(self.depth, self.leaf, &mut rng),
            Generator::RandomDag => random_dag(self.depth, self.nodes, self.share_prob, &mut rng),
            Generator::ZeroIdentity => {
                let x = rng.gen_range(0.5..64.0);
                let mut y = rng.gen_range(0.5..64.0);
                while y == x {
                    y = rng.gen_range(0.5..64.0);
                }
                zero_identity(ZeroFamily::ALL[(self.seed % 4) as usize], x, y)
            }
            Generator::RootTower => {
                let x = self.leaf.unwrap_or_else(|| rng.gen_range(1.5..10.0));
                root_tower(self.depth, x)
            }
        }
    }
}

fn random_leaf(rng: &mut ChaCha8Rng) -> f64 {
    let v = match rng.gen_range(0..3) {
        0 => rng.gen_range(1..=8) as f64,
        1 => rng.gen_range(0.0625..10.0),
        _ => rng.gen_range(1..64) as f64 * 2f64.powi(rng.gen_range(-20..=20)),
    };
    if rng.gen_bool(0.3) {
        -v
    } else {
        v
    }
}

/// Product of `2^depth` leaves, paired level by level.
pub fn balanced_mul_tree(depth: u32, leaf: Option<f64>, rng: &mut ChaCha8Rng) -> Real {
    let mut level: Vec<Real> =
        (0..1usize << depth).map(|_| Real::new(leaf.unwrap_or_else(|| rng.gen_range(0.75..1.25)))).collect();
    while level.len() > 1 {
        level = level.chunks(2).map(|p| &p[0] * &p[1]).collect();
    }
    level.pop().unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroFamily {
    /// (√x+√y)(√x−√y) − (x−y)
    DifferenceOfSquares,
    /// √(a·a) − a with a = √x + y
    RootOfSquare,
    /// √x·√y − √(x·y)
    ProductOfRoots,
    /// ∛x·∛x·∛x − x
    CubeOfCbrt,
}

impl ZeroFamily {
    pub const ALL: [ZeroFamily; 4] =
        [ZeroFamily::DifferenceOfSquares, ZeroFamily::RootOfSquare, ZeroFamily::ProductOfRoots, ZeroFamily::CubeOfCbrt];
}

/// An expression equal to zero for positive `x`, `y`.
pub fn zero_identity(family: ZeroFamily, x: f64, y: f64) -> Real {
    let (x, y) = (Real::new(x), Real::new(y));
    match family {
        ZeroFamily::DifferenceOfSquares => {
            let (sx, sy) = (x.sqrt(), y.sqrt());
            (&sx + &sy) * (&sx - &sy) - (&x - &y)
        }
        ZeroFamily::RootOfSquare => {
            let a = x.sqrt() + &y;
            (&a * &a).sqrt() - &a
        }
        ZeroFamily::ProductOfRoots => x.sqrt() * y.sqrt() - (&x * &y).sqrt(),
        ZeroFamily::CubeOfCbrt => {
            let c = x.root(3).unwrap();
            &c * &c * &c - &x
        }
    }
}

/// Nested radicals t ← root(t + x, 2 or 3), sharing the leaf x.
pub fn root_tower(depth: u32, x: f64) -> Real {
    let x = Real::new(x);
    let mut t = x.clone();
    for i in 0..depth {
        t = (&t + &x).root(if i % 2 == 0 { 2 } else { 3 }).unwrap();
    }
    t
}

/// Sign decided by a bounded inline evaluation, `None` when |value| may be
/// below 2^-256.
pub fn screen_sign(r: &Real) -> Option<i32> {
    let i = r.node().interval();
    if !i.contains_zero() {
        return Some(if i.lo() > 0.0 { 1 } else { -1 });
    }
    with_executor(Executor::Inline, || {
        r.guarantee_absolute_error_two_to(-256).ok()?;
        let (a, e) = r.approx_and_error().ok()?;
        if e.is_zero() || a.abs() > e {
            Some(a.sign())
        } else {
            None
        }
    })
    .filter(|&s| s != 0 || r.node().is_exact())
}

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    /// every node built so far with its depth, for sharing
    all: Vec<(Real, u32)>,
    created: usize,
    budget: usize,
    share_prob: f64,
}

impl Builder<'_> {
    fn push(&mut self, r: Real, depth: u32) -> (Real, u32) {
        self.created += 1;
        self.all.push((r.clone(), depth));
        (r, depth)
    }

    fn leaf(&mut self) -> (Real, u32) {
        let v = random_leaf(self.rng);
        self.push(Real::new(v), 0)
    }

    fn shared(&mut self, lim: u32) -> Option<(Real, u32)> {
        let c: Vec<usize> = (0..self.all.len()).filter(|&i| self.all[i].1 <= lim).collect();
        (!c.is_empty()).then(|| self.all[c[self.rng.gen_range(0..c.len())]].clone())
    }

    /// `x*x + c` with a positive leaf c if that fits in `lim`, else a fresh
    /// positive leaf.
    fn positive(&mut self, x: Real, dx: u32, lim: u32) -> (Real, u32) {
        let v = random_leaf(self.rng).abs();
        let (c, _) = self.push(Real::new(v), 0);
        if dx + 2 > lim {
            return (c, 0);
        }
        let (sq, _) = self.push(&x * &x, dx + 1);
        self.push(&sq + &c, dx + 2)
    }

    /// A subtree of depth at most `lim`; `may_share` lets it reuse an
    /// earlier node instead.
    fn build(&mut self, lim: u32, may_share: bool) -> (Real, u32) {
        let out_of_budget = self.created + 3 > self.budget;
        if (may_share || out_of_budget) && self.rng.gen_bool(if out_of_budget { 0.5 } else { self.share_prob.clamp(0.0, 1.0) }) {
            if let Some(s) = self.shared(lim) {
                return s;
            }
        }
        if lim == 0 || out_of_budget {
            return self.leaf();
        }
        // mostly binary so the tree fills its depth
        let op = if self.rng.gen_bool(0.92) { self.rng.gen_range(0..4) } else { self.rng.gen_range(4..7) };
        // radicands and divisors leave room for the x*x + c fallback
        let screened = if lim > 3 { lim - 3 } else { lim - 1 };
        let (a, da) = self.build(if op >= 5 { screened } else { lim - 1 }, false);
        match op {
            0..=3 => {
                let (mut b, mut db) = self.build(if op == 3 { screened } else { lim - 1 }, true);
                if op == 1 && Arc::ptr_eq(a.node(), b.node()) {
                    (b, db) = self.leaf();
                }
                if op == 3 && screen_sign(&b).is_none_or(|s| s == 0) {
                    (b, db) = self.positive(b, db, lim - 1);
                }
                let r = match op {
                    0 => &a + &b,
                    1 => &a - &b,
                    2 => &a * &b,
                    _ => &a / &b,
                };
                self.push(r, da.max(db) + 1)
            }
            4 => self.push(-&a, da + 1),
            _ => {
                let (a, da) = match screen_sign(&a) {
                    Some(1) => (a, da),
                    Some(-1) if da + 1 < lim => self.push(-&a, da + 1),
                    _ => self.positive(a, da, lim - 1),
                };
                let d = if op == 5 { 2 } else { 3 };
                self.push(a.root(d).unwrap(), da + 1)
            }
        }
    }
}

/// Random DAG over {+,−,×,÷,neg,√,∛} with at most `budget` nodes and depth
/// at most `max_depth`, built top-down; with probability `share_prob` the
/// second operand of a binary node reuses an earlier node. Divisors and
/// radicands are screened so the DAG evaluates without errors.
pub fn random_dag(max_depth: u32, budget: usize, share_prob: f64, rng: &mut ChaCha8Rng) -> Real {
    let max_depth = max_depth.max(1);
    // room for the sign fix-up below
    let reserve = 2 * 4;
    let mut b = Builder { rng, all: Vec::new(), created: 0, budget: budget.saturating_sub(reserve).max(2), share_prob };
    let (mut root, mut depth) = b.build(max_depth, false);
    // keep the root's sign decidable
    for _ in 0..4 {
        if screen_sign(&root).is_some_and(|s| s != 0) || depth >= max_depth {
            break;
        }
        root = &root + &Real::new(random_leaf(b.rng));
        depth += 1;
    }
    root
}
