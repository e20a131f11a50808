//! Arbitrary precision binary floating point with directed rounding.
//!
//! A value is `±mant * 2^exp` with `mant` odd (or zero). Every rounded
//! operation takes a precision in bits and a [`RoundingMode`] and returns
//! the result together with an exactness flag.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

pub type Precision = u64;
pub type Exponent = i64;

/// Precision used for error terms.
pub const ERROR_PREC: Precision = 64;
/// Precision of the first bigfloat evaluation of a node.
pub const INITIAL_PREC: Precision = 53;
pub const MIN_PREC: Precision = 2;

/// Clamp a requested bit count to something the backend accepts.
pub fn convert_to_prec(bits: Exponent) -> Precision {
    bits.max(MIN_PREC as Exponent) as Precision
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundingMode {
    /// Round to nearest, ties to even.
    Nearest,
    /// Toward +infinity.
    Up,
    /// Toward -infinity.
    Down,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigFloat {
    neg: bool,
    mant: BigUint,
    exp: Exponent,
}

fn bits(m: &BigUint) -> i64 {
    m.bits() as i64
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat { neg: false, mant: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        BigFloat { neg: false, mant: BigUint::one(), exp: 0 }
    }

    /// `2^k`, exact.
    pub fn pow2(k: Exponent) -> Self {
        BigFloat { neg: false, mant: BigUint::one(), exp: k }
    }

    pub fn from_parts(neg: bool, mant: BigUint, exp: Exponent) -> Self {
        Self::normalized(neg, mant, exp)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::normalized(v < 0, BigUint::from(v.unsigned_abs()), 0)
    }

    fn normalized(neg: bool, mut mant: BigUint, mut exp: Exponent) -> Self {
        match mant.trailing_zeros() {
            None => Self::zero(),
            Some(tz) => {
                if tz > 0 {
                    mant >>= tz;
                    exp += tz as i64;
                }
                BigFloat { neg, mant, exp }
            }
        }
    }

    /// Exact conversion. Panics on NaN or infinity.
    pub fn from_f64(d: f64) -> Self {
        assert!(d.is_finite(), "cannot convert non-finite double {d}");
        let b = d.to_bits();
        let neg = b >> 63 == 1;
        let e = ((b >> 52) & 0x7ff) as i64;
        let f = b & ((1u64 << 52) - 1);
        let (m, exp) = if e == 0 { (f, -1074) } else { (f | (1u64 << 52), e - 1075) };
        Self::normalized(neg, BigUint::from(m), exp)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn sign(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mant
    }

    pub fn exponent(&self) -> Exponent {
        self.exp
    }

    /// Number of significant bits, at least `MIN_PREC`.
    pub fn get_prec(&self) -> Precision {
        (self.mant.bits()).max(MIN_PREC)
    }

    /// Smallest k with |x| <= 2^k. Panics on zero.
    pub fn ceil_log2(&self) -> Exponent {
        assert!(!self.is_zero(), "ceil_log2 of zero");
        if self.mant.is_one() {
            self.exp
        } else {
            self.exp + bits(&self.mant)
        }
    }

    /// Largest k with 2^k <= |x|. Panics on zero.
    pub fn floor_log2(&self) -> Exponent {
        assert!(!self.is_zero(), "floor_log2 of zero");
        self.exp + bits(&self.mant) - 1
    }

    pub fn ldexp(&self, k: Exponent) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        BigFloat { neg: self.neg, mant: self.mant.clone(), exp: self.exp + k }
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        BigFloat { neg: !self.neg, mant: self.mant.clone(), exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        BigFloat { neg: false, mant: self.mant.clone(), exp: self.exp }
    }

    /// Round `±mant * 2^exp` to `prec` bits.
    fn round(neg: bool, mant: BigUint, exp: Exponent, prec: Precision, mode: RoundingMode) -> (Self, bool) {
        let prec = prec.max(MIN_PREC) as i64;
        let nb = bits(&mant);
        if nb <= prec {
            return (Self::normalized(neg, mant, exp), true);
        }
        let shift = (nb - prec) as u64;
        let tz = mant.trailing_zeros().unwrap_or(0);
        let exact = tz >= shift;
        let mut q = &mant >> shift;
        let up = match mode {
            RoundingMode::Nearest => mant.bit(shift - 1) && (tz < shift - 1 || q.bit(0)),
            RoundingMode::Up => !exact && !neg,
            RoundingMode::Down => !exact && neg,
        };
        if up {
            q += 1u32;
        }
        (Self::normalized(neg, q, exp + shift as i64), exact)
    }

    /// Round with an extra sticky bit below `mant` (mant must carry at least prec+2 bits).
    fn round_sticky(neg: bool, mant: BigUint, exp: Exponent, sticky: bool, prec: Precision, mode: RoundingMode) -> (Self, bool) {
        if !sticky {
            return Self::round(neg, mant, exp, prec, mode);
        }
        let m = (mant << 1u32) | BigUint::one();
        let (r, _) = Self::round(neg, m, exp - 1, prec, mode);
        (r, false)
    }

    pub fn round_to(&self, prec: Precision, mode: RoundingMode) -> (Self, bool) {
        Self::round(self.neg, self.mant.clone(), self.exp, prec, mode)
    }

    fn signed(&self) -> BigInt {
        BigInt::from_biguint(if self.neg { Sign::Minus } else { Sign::Plus }, self.mant.clone())
    }

    fn top(&self) -> Exponent {
        self.exp + bits(&self.mant)
    }

    pub fn add(&self, other: &Self, prec: Precision, mode: RoundingMode) -> (Self, bool) {
        if other.is_zero() {
            return self.round_to(prec, mode);
        }
        if self.is_zero() {
            return other.round_to(prec, mode);
        }
        let (big, small) = if self.top() >= other.top() { (self, other) } else { (other, self) };
        // A far smaller operand only matters through its sign: squash it to a sticky bit
        // well below both the rounding position and the last bit of the larger operand.
        let limit = big.exp.min(big.top() - prec.max(MIN_PREC) as i64 - 2) - 2;
        let squashed;
        let small = if small.top() <= limit {
            squashed = BigFloat { neg: small.neg, mant: BigUint::one(), exp: limit - 1 };
            &squashed
        } else {
            small
        };
        let e = big.exp.min(small.exp);
        let a = big.signed() << (big.exp - e) as u64;
        let b = small.signed() << (small.exp - e) as u64;
        let s = a + b;
        let (sign, mag) = s.into_parts();
        Self::round(sign == Sign::Minus, mag, e, prec, mode)
    }

    pub fn sub(&self, other: &Self, prec: Precision, mode: RoundingMode) -> (Self, bool) {
        self.add(&other.neg(), prec, mode)
    }

    pub fn mul(&self, other: &Self, prec: Precision, mode: RoundingMode) -> (Self, bool) {
        if self.is_zero() || other.is_zero() {
            return (Self::zero(), true);
        }
        Self::round(self.neg != other.neg, &self.mant * &other.mant, self.exp + other.exp, prec, mode)
    }

    /// Exact product.
    pub fn mul_exact(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self::normalized(self.neg != other.neg, &self.mant * &other.mant, self.exp + other.exp)
    }

    /// Exact sum.
    pub fn add_exact(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let s = (self.signed() << (self.exp - e) as u64) + (other.signed() << (other.exp - e) as u64);
        let (sign, mag) = s.into_parts();
        Self::normalized(sign == Sign::Minus, mag, e)
    }

    /// Panics when `other` is zero.
    pub fn div(&self, other: &Self, prec: Precision, mode: RoundingMode) -> (Self, bool) {
        assert!(!other.is_zero(), "bigfloat division by zero");
        if self.is_zero() {
            return (Self::zero(), true);
        }
        let prec = prec.max(MIN_PREC) as i64;
        let s = (prec + 3 + bits(&other.mant) - bits(&self.mant)).max(0);
        let n = &self.mant << s as u64;
        let (q, r) = n.div_rem(&other.mant);
        let exp = self.exp - other.exp - s;
        Self::round_sticky(self.neg != other.neg, q, exp, !r.is_zero(), prec as u64, mode)
    }

    /// d-th root of a nonnegative value. Panics on negative input or d == 0.
    pub fn root(&self, d: u32, prec: Precision, mode: RoundingMode) -> (Self, bool) {
        assert!(d >= 1, "root of degree 0");
        assert!(!self.neg, "bigfloat root of a negative value");
        if self.is_zero() {
            return (Self::zero(), true);
        }
        if d == 1 {
            return self.round_to(prec as u64, mode);
        }
        let di = d as i64;
        let prec = prec.max(MIN_PREC) as i64;
        let mut s = (di * (prec + 3) - bits(&self.mant)).max(0);
        s += (self.exp - s).rem_euclid(di);
        let n = &self.mant << s as u64;
        let r = n.nth_root(d);
        let exact = r.pow(d) == n;
        let exp = (self.exp - s) / di;
        Self::round_sticky(false, r, exp, !exact, prec as u64, mode)
    }

    /// Exact integer power.
    pub fn pow_exact(&self, k: u32) -> Self {
        if self.is_zero() {
            return if k == 0 { Self::one() } else { Self::zero() };
        }
        Self::normalized(self.neg && k % 2 == 1, self.mant.pow(k), self.exp * k as i64)
    }

    /// Directed conversion to a machine double, handling subnormals.
    /// Overflow gives ±infinity when rounding away from zero, else ±f64::MAX.
    pub fn to_f64(&self, mode: RoundingMode) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let f = self.floor_log2();
        let lsb = (f - 52).max(-1074);
        let shift = lsb - self.exp;
        let (mut m, exact) = if shift <= 0 {
            (&self.mant << (-shift) as u64, true)
        } else {
            let sh = shift as u64;
            let tz = self.mant.trailing_zeros().unwrap_or(0);
            (&self.mant >> sh, tz >= sh)
        };
        let mut lsb = lsb;
        if !exact {
            let up = match mode {
                RoundingMode::Nearest => {
                    let sh = shift as u64;
                    let tz = self.mant.trailing_zeros().unwrap_or(0);
                    self.mant.bit(sh - 1) && (tz < sh - 1 || m.bit(0))
                }
                RoundingMode::Up => !self.neg,
                RoundingMode::Down => self.neg,
            };
            if up {
                m += 1u32;
            }
        }
        let mut m: u64 = if m.bits() > 53 { u64::MAX } else { m.iter_u64_digits().next().unwrap_or(0) };
        if m == 1u64 << 53 {
            m >>= 1;
            lsb += 1;
        }
        let sign_bit = if self.neg { 1u64 << 63 } else { 0 };
        if m == 0 {
            return f64::from_bits(sign_bit);
        }
        let bits = if m < (1u64 << 52) {
            debug_assert_eq!(lsb, -1074);
            m
        } else {
            let be = lsb + 1075;
            if be >= 2047 {
                let away = match mode {
                    RoundingMode::Nearest => true,
                    RoundingMode::Up => !self.neg,
                    RoundingMode::Down => self.neg,
                };
                return if away {
                    if self.neg { f64::NEG_INFINITY } else { f64::INFINITY }
                } else if self.neg {
                    -f64::MAX
                } else {
                    f64::MAX
                };
            }
            ((be as u64) << 52) | (m - (1u64 << 52))
        };
        f64::from_bits(sign_bit | bits)
    }

    /// `[down(x), up(x)]` as doubles.
    pub fn to_interval(&self) -> (f64, f64) {
        (self.to_f64(RoundingMode::Down), self.to_f64(RoundingMode::Up))
    }

    fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match self.top().cmp(&other.top()) {
            Ordering::Equal => {}
            o => return o,
        }
        let e = self.exp.min(other.exp);
        (&self.mant << (self.exp - e) as u64).cmp(&(&other.mant << (other.exp - e) as u64))
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.sign().cmp(&other.sign()) {
            Ordering::Equal => {}
            o => return o,
        }
        let o = self.cmp_abs(other);
        if self.neg {
            o.reverse()
        } else {
            o
        }
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for BigFloat {
    fn default() -> Self {
        Self::zero()
    }
}

// Hex text: [+-]0x1.<hex>p[+-]E, zero is +0x0p+0.
impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "+0x0p+0");
        }
        let s = if self.neg { '-' } else { '+' };
        let t = bits(&self.mant) - 1;
        let e = self.exp + t;
        if t == 0 {
            return write!(f, "{s}0x1p{e:+}");
        }
        let digits = (t + 3) / 4;
        let frac = (&self.mant - (BigUint::one() << t as u64)) << (4 * digits - t) as u64;
        let hex = format!("{:0width$x}", frac, width = digits as usize);
        write!(f, "{s}0x1.{}p{e:+}", hex.trim_end_matches('0'))
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed bigfloat literal {0:?}")]
pub struct ParseBigFloatError(pub String);

impl FromStr for BigFloat {
    type Err = ParseBigFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseBigFloatError(s.to_string());
        let (neg, rest) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let rest = rest.strip_prefix("0x").ok_or_else(bad)?;
        let (m, e) = rest.split_once('p').ok_or_else(bad)?;
        let e: i64 = e.parse().map_err(|_| bad())?;
        let (int, frac) = m.split_once('.').unwrap_or((m, ""));
        if int.is_empty() {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let mant = BigUint::parse_bytes(digits.as_bytes(), 16).ok_or_else(bad)?;
        Ok(Self::normalized(neg, mant, e - 4 * frac.len() as i64))
    }
}
