//! BFMSS style separation bound, kept as log2 exponents.
//!
//! `u` bounds log2 of the "numerator" part, `l` log2 of the "denominator".
//! For a nonzero expression of algebraic degree at most `D`,
//! `|E| >= 2^bound(D)`.

use crate::bigfloat::BigFloat;
use num_bigint::BigUint;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SepBound {
    pub u: i64,
    pub l: i64,
}

impl SepBound {
    /// State of an exact dyadic value `m * 2^e`.
    pub fn set(x: &BigFloat) -> Self {
        if x.is_zero() {
            return SepBound { u: 0, l: 0 };
        }
        let e = x.exponent();
        let top = x.mantissa().bits() as i64;
        // |m| * 2^max(e,0); ceil_log2 of an odd mantissa
        let cl = if x.mantissa() == &BigUint::from(1u32) { 0 } else { top };
        SepBound { u: cl + e.max(0), l: (-e).max(0) }
    }

    pub fn set_f64(d: f64) -> Self {
        Self::set(&BigFloat::from_f64(d))
    }

    pub fn negation(x: &Self) -> Self {
        *x
    }

    pub fn addition(x: &Self, y: &Self) -> Self {
        let u = x.u.saturating_add(y.l).max(x.l.saturating_add(y.u)).saturating_add(1);
        SepBound { u, l: x.l.saturating_add(y.l) }
    }

    pub fn subtraction(x: &Self, y: &Self) -> Self {
        Self::addition(x, y)
    }

    pub fn multiplication(x: &Self, y: &Self) -> Self {
        SepBound { u: x.u.saturating_add(y.u), l: x.l.saturating_add(y.l) }
    }

    pub fn division(x: &Self, y: &Self) -> Self {
        SepBound { u: x.u.saturating_add(y.l), l: x.l.saturating_add(y.u) }
    }

    pub fn root(x: &Self, k: u32) -> Self {
        let k = k.max(1) as i64;
        let num = x.u.saturating_add((k - 1).saturating_mul(x.l));
        SepBound { u: num.div_euclid(k) + i64::from(num.rem_euclid(k) != 0), l: x.l }
    }

    /// Exponent L with |E| >= 2^L whenever E != 0, for degree bound `d`.
    pub fn bound(&self, d: u64) -> i64 {
        let d1 = i64::try_from(d.max(1) - 1).unwrap_or(i64::MAX);
        d1.saturating_mul(self.u).saturating_add(self.l).saturating_neg()
    }
}
