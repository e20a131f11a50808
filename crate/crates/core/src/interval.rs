//! Outward rounded interval arithmetic over doubles.
//!
//! Each bound is computed with round-to-nearest and then corrected with an
//! error-free residual (two-sum / fma) so intervals stay tight when an
//! operation happens to be exact. Anything non-finite collapses to the
//! whole line.

use crate::bigfloat::BigFloat;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

// Below this magnitude fma residuals can underflow; always step outward.
const TINY: f64 = 1.0e-290;

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return f64::NEG_INFINITY;
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return f64::INFINITY;
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

// residual sign: >0 means the true value is above the computed one
fn mul_residual(a: f64, b: f64, p: f64) -> f64 {
    if p != 0.0 && p.abs() < TINY {
        return f64::NAN;
    }
    if p == 0.0 {
        return if a == 0.0 || b == 0.0 { 0.0 } else { f64::NAN };
    }
    a.mul_add(b, -p)
}

fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    let r = mul_residual(a, b, p);
    if r.is_nan() || r < 0.0 {
        p.next_down()
    } else {
        p
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    let r = mul_residual(a, b, p);
    if r.is_nan() || r > 0.0 {
        p.next_up()
    } else {
        p
    }
}

fn div_residual(a: f64, b: f64, q: f64) -> f64 {
    if q == 0.0 {
        return if a == 0.0 { 0.0 } else { f64::NAN };
    }
    if q.abs() < TINY || a.abs() < TINY {
        return f64::NAN;
    }
    // a - q*b exactly; true - q has the sign of r/b
    let r = (-q).mul_add(b, a);
    if b < 0.0 {
        -r
    } else {
        r
    }
}

fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    let r = div_residual(a, b, q);
    if r.is_nan() || r < 0.0 {
        q.next_down()
    } else {
        q
    }
}

fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    let r = div_residual(a, b, q);
    if r.is_nan() || r > 0.0 {
        q.next_up()
    } else {
        q
    }
}

fn sqrt_down(a: f64) -> f64 {
    let s = a.sqrt();
    if s == 0.0 {
        return 0.0;
    }
    if a < TINY {
        return s.next_down().max(0.0);
    }
    if (-s).mul_add(s, a) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

fn sqrt_up(a: f64) -> f64 {
    let s = a.sqrt();
    if a < TINY && a != 0.0 {
        return s.next_up();
    }
    if (-s).mul_add(s, a) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

fn pow_cmp(r: f64, d: u32, x: f64) -> std::cmp::Ordering {
    BigFloat::from_f64(r).pow_exact(d).cmp(&BigFloat::from_f64(x))
}

fn root_down(x: f64, d: u32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut r = x.powf(1.0 / d as f64);
    while r > 0.0 && pow_cmp(r, d, x).is_gt() {
        r = r.next_down();
    }
    r.max(0.0)
}

fn root_up(x: f64, d: u32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut r = x.powf(1.0 / d as f64);
    while pow_cmp(r, d, x).is_lt() {
        r = r.next_up();
    }
    r
}

impl Interval {
    pub fn whole() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn point(d: f64) -> Self {
        if d.is_finite() {
            Interval { lo: d, hi: d }
        } else {
            Self::whole()
        }
    }

    /// `[lo, hi]`; anything non-finite or reversed becomes the whole line.
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Interval { lo, hi }
        } else {
            Self::whole()
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_singleton(&self) -> bool {
        self.is_finite() && self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// The point of a singleton interval.
    pub fn get_point(&self) -> f64 {
        debug_assert!(self.is_singleton());
        self.lo
    }

    pub fn get_median(&self) -> f64 {
        if self.is_singleton() {
            return self.lo;
        }
        0.5 * self.lo + 0.5 * self.hi
    }

    /// Smallest radius (rounded up) such that `[m-r, m+r]` covers the interval.
    pub fn get_radius(&self) -> f64 {
        if self.is_singleton() {
            return 0.0;
        }
        let m = self.get_median();
        add_up(m, -self.lo).max(add_up(self.hi, -m))
    }

    pub fn set_median_and_radius(m: f64, r: f64) -> Self {
        Self::new(add_down(m, -r), add_up(m, r))
    }

    /// Finite and wider than one ulp at the midpoint.
    pub fn can_be_improved(&self) -> bool {
        if !self.is_finite() {
            return false;
        }
        let m = self.get_median().abs();
        self.hi - self.lo > m.next_up() - m
    }

    pub fn neg(&self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn add(&self, o: &Self) -> Self {
        if !self.is_finite() || !o.is_finite() {
            return Self::whole();
        }
        Self::new(add_down(self.lo, o.lo), add_up(self.hi, o.hi))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if !self.is_finite() || !o.is_finite() {
            return Self::whole();
        }
        let c = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let lo = c.iter().map(|&(a, b)| mul_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| mul_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Self::new(lo, hi)
    }

    pub fn div(&self, o: &Self) -> Self {
        if !self.is_finite() || !o.is_finite() || o.contains_zero() {
            return Self::whole();
        }
        let c = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let lo = c.iter().map(|&(a, b)| div_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| div_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Self::new(lo, hi)
    }

    /// d-th root. Intervals reaching below zero give the whole line so the
    /// exact path decides (and reports a negative radicand if there is one).
    pub fn root(&self, d: u32) -> Self {
        if !self.is_finite() || self.lo < 0.0 {
            return Self::whole();
        }
        match d {
            1 => *self,
            2 => Self::new(sqrt_down(self.lo), sqrt_up(self.hi)),
            _ => Self::new(root_down(self.lo, d), root_up(self.hi, d)),
        }
    }

    /// Enclosure of `approx ± error`.
    pub fn from_ball(approx: &BigFloat, error: &BigFloat) -> Self {
        let (lo, hi) = approx.to_interval();
        let e = error.to_f64(crate::bigfloat::RoundingMode::Up);
        Self::new(add_down(lo, -e), add_up(hi, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_points_stay_points() {
        let s = Interval::point(2.0).add(&Interval::point(3.0));
        assert_eq!(s, Interval::point(5.0));
        let p = Interval::point(1.5).mul(&Interval::point(4.0));
        assert!(p.is_singleton());
        assert_eq!(Interval::point(4.0).root(2), Interval::point(2.0));
        assert_eq!(Interval::point(27.0).root(3), Interval::point(3.0));
    }

    #[test]
    fn inexact_ops_bracket() {
        let t = Interval::point(1.0).div(&Interval::point(3.0));
        assert!(!t.is_singleton());
        assert_eq!(t.hi(), t.lo().next_up());
        let s = Interval::point(2.0).root(2);
        assert!(s.lo() * s.lo() <= 2.0 && s.hi() * s.hi() >= 2.0);
        let c = Interval::point(2.0).root(3);
        assert!(pow_cmp(c.lo(), 3, 2.0).is_le() && pow_cmp(c.hi(), 3, 2.0).is_ge());
        let a = Interval::point(0.1).add(&Interval::point(0.2));
        assert!(a.contains(0.30000000000000004) && !a.is_singleton());
    }

    #[test]
    fn non_finite_collapses() {
        assert!(!Interval::point(f64::NAN).is_finite());
        let big = Interval::point(f64::MAX);
        assert!(!big.add(&big).is_finite());
        assert!(!big.mul(&big).is_finite());
        let w = Interval::whole();
        assert!(!w.add(&Interval::point(1.0)).is_finite());
        assert!(!w.can_be_improved());
        assert!(!Interval::point(1.0).div(&Interval::new(-1.0, 1.0)).is_finite());
        assert!(!Interval::new(-1.0, 4.0).root(2).is_finite());
    }

    #[test]
    fn median_radius_cover() {
        let i = Interval::new(1.0, 1.0 + 2f64.powi(-20));
        let m = i.get_median();
        let r = i.get_radius();
        assert!(m - r <= i.lo() && m + r >= i.hi());
        let j = Interval::set_median_and_radius(m, r);
        assert!(j.lo() <= i.lo() && j.hi() >= i.hi());
        assert!(i.can_be_improved());
        assert!(!Interval::point(1.0).can_be_improved());
    }

    #[test]
    fn from_ball_encloses() {
        let a = BigFloat::from_f64(1.0).div(&BigFloat::from_f64(3.0), 200, crate::bigfloat::RoundingMode::Nearest).0;
        let i = Interval::from_ball(&a, &BigFloat::pow2(-100));
        assert!(i.lo() < 1.0 / 3.0 && i.hi() > 1.0 / 3.0 - 1e-17);
    }
}
