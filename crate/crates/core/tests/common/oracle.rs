//! Reference evaluators that share no code with the library's evaluator.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use exactdag::dag::reachable;
use exactdag::{BigFloat, Node, NodeKind};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Closed interval `[lo, hi] * 2^-frac` with integer endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    pub lo: BigInt,
    pub hi: BigInt,
    pub frac: u32,
}

impl Fixed {
    /// log2 of the width, `None` for a point.
    pub fn log2_width(&self) -> Option<i64> {
        let w = &self.hi - &self.lo;
        (!w.is_zero()).then(|| w.bits() as i64 - self.frac as i64)
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo.is_positive() || self.hi.is_negative()
    }

    /// True if `[c - r, c + r]` meets this interval.
    pub fn meets_ball(&self, c: &BigFloat, r: &BigFloat) -> bool {
        let lo = c.add_exact(&r.neg());
        let hi = c.add_exact(r);
        scaled_floor(&lo, self.frac) <= self.hi && scaled_ceil(&hi, self.frac) >= self.lo
    }

    /// Whether `[c - r, c + r]` contains this whole interval.
    pub fn inside_ball(&self, c: &BigFloat, r: &BigFloat) -> bool {
        let lo = c.add_exact(&r.neg());
        let hi = c.add_exact(r);
        scaled_ceil(&lo, self.frac) <= self.lo && scaled_floor(&hi, self.frac) >= self.hi
    }
}

fn bigint_of(x: &BigFloat) -> (BigInt, i64) {
    let s = if x.is_negative() { Sign::Minus } else { Sign::Plus };
    (BigInt::from_biguint(s, x.mantissa().clone()), x.exponent())
}

/// floor(x * 2^frac)
pub fn scaled_floor(x: &BigFloat, frac: u32) -> BigInt {
    if x.is_zero() {
        return BigInt::zero();
    }
    let (m, e) = bigint_of(x);
    let k = e + frac as i64;
    if k >= 0 {
        m << k as usize
    } else {
        m >> (-k) as usize
    }
}

/// ceil(x * 2^frac)
pub fn scaled_ceil(x: &BigFloat, frac: u32) -> BigInt {
    -scaled_floor(&x.neg(), frac)
}

fn shr_floor(v: &BigInt, k: u32) -> BigInt {
    v >> k as usize
}

fn shr_ceil(v: &BigInt, k: u32) -> BigInt {
    -((-v) >> k as usize)
}

fn root_floor(v: &BigInt, d: u32) -> BigInt {
    if v.is_positive() {
        v.nth_root(d)
    } else {
        BigInt::zero()
    }
}

fn root_ceil(v: &BigInt, d: u32) -> BigInt {
    let r = root_floor(v, d);
    if &r.pow(d) < v {
        r + 1
    } else {
        r
    }
}

fn leaf_value(n: &Arc<Node>) -> BigFloat {
    match n.kind() {
        NodeKind::Double => BigFloat::from_f64(n.interval().get_point()),
        _ => n.approx_and_error().expect("bigfloat leaves carry their value").0,
    }
}

/// Enclosure of the DAG's value with `frac` fractional bits; `None` if a
/// divisor interval contains zero.
pub fn enclose_at(root: &Arc<Node>, frac: u32) -> Option<Fixed> {
    let mut v: HashMap<u64, (BigInt, BigInt)> = HashMap::new();
    for n in reachable(root) {
        let (x, y) = n.children();
        let get = |c: &Option<Arc<Node>>| v[&c.as_ref().unwrap().id()].clone();
        let iv = match n.kind() {
            NodeKind::Double | NodeKind::BigFloat => {
                let b = leaf_value(&n);
                (scaled_floor(&b, frac), scaled_ceil(&b, frac))
            }
            NodeKind::Negation => {
                let (a, b) = get(&x);
                (-b, -a)
            }
            NodeKind::Addition | NodeKind::Subtraction => {
                let (a, b) = get(&x);
                let (c, d) = get(&y);
                if n.kind() == NodeKind::Addition {
                    (a + c, b + d)
                } else {
                    (a - d, b - c)
                }
            }
            NodeKind::Multiplication => {
                let (a, b) = get(&x);
                let (c, d) = get(&y);
                let p = [&a * &c, &a * &d, &b * &c, &b * &d];
                let lo = p.iter().min().unwrap();
                let hi = p.iter().max().unwrap();
                (shr_floor(lo, frac), shr_ceil(hi, frac))
            }
            NodeKind::Division => {
                let (a, b) = get(&x);
                let (c, d) = get(&y);
                if !(c.is_positive() || d.is_negative()) {
                    return None;
                }
                let (a, b) = (a << frac as usize, b << frac as usize);
                let lo = [a.div_floor(&c), a.div_floor(&d), b.div_floor(&c), b.div_floor(&d)].into_iter().min().unwrap();
                let hi = [a.div_ceil(&c), a.div_ceil(&d), b.div_ceil(&c), b.div_ceil(&d)].into_iter().max().unwrap();
                (lo, hi)
            }
            NodeKind::Root => {
                let d = n.degree();
                let (a, b) = get(&x);
                let s = (frac * (d - 1)) as usize;
                (root_floor(&(a << s), d), root_ceil(&(b << s), d))
            }
        };
        v.insert(n.id(), iv);
    }
    let (lo, hi) = v.remove(&root.id()).unwrap();
    Some(Fixed { lo, hi, frac })
}

/// Start at 512 fractional bits and double until the enclosure is no wider
/// than `2^max_log2_width` (or `max_frac` is reached).
pub fn enclose(root: &Arc<Node>, max_log2_width: i64, max_frac: u32) -> Option<Fixed> {
    let mut frac = 512;
    loop {
        let f = enclose_at(root, frac);
        let narrow = f.as_ref().is_some_and(|f| f.log2_width().is_none_or(|w| w <= max_log2_width));
        if narrow || frac >= max_frac {
            return f;
        }
        frac *= 2;
    }
}

/// Product of the degrees of the distinct radical nodes below `n` (inclusive),
/// found by a mark-visited traversal.
pub fn degree(n: &Arc<Node>) -> u64 {
    fn visit(n: &Arc<Node>, seen: &mut HashSet<u64>, acc: &mut u64) {
        if !seen.insert(n.id()) {
            return;
        }
        if n.kind() == NodeKind::Root {
            *acc = acc.saturating_mul(n.degree() as u64);
        }
        let (x, y) = n.children();
        for c in x.iter().chain(y.iter()) {
            visit(c, seen, acc);
        }
    }
    let mut acc = 1;
    visit(n, &mut HashSet::new(), &mut acc);
    acc
}
