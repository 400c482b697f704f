//! Outward-rounded interval arithmetic over binary floating values with
//! big-integer significands.
//!
//! An [`HpReal`] is a pair of dyadic rationals `lo ≤ x ≤ hi` that bracket a
//! real number. Every operation rounds `lo` toward zero and `hi` away from
//! it, so the true value is always enclosed. Significands are kept to
//! [`PRECISION`] bits; exponents are 128-bit, which is enough to hold
//! `(2/ε)^(2^(1/ε))` down to ε = 1/64.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// Significand bits retained after each rounding.
pub const PRECISION: u64 = 256;

/// A nonnegative `mant · 2^exp`.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mant: BigUint,
    exp: i128,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigUint::zero(), exp: 0 }
    }

    pub fn from_int(v: impl Into<BigUint>) -> Self {
        Dyadic { mant: v.into(), exp: 0 }.round(false)
    }

    pub fn new(mant: BigUint, exp: i128) -> Self {
        Dyadic { mant, exp }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    fn round(self, up: bool) -> Self {
        let bits = self.mant.bits();
        if bits <= PRECISION {
            return self;
        }
        let shift = bits - PRECISION;
        let mut mant = &self.mant >> shift;
        if up && (&mant << shift) != self.mant {
            mant += 1u32;
        }
        Dyadic { mant, exp: self.exp + shift as i128 }
    }

    /// Position of the leading bit: `2^(top-1) ≤ x < 2^top`.
    fn top(&self) -> i128 {
        self.mant.bits() as i128 + self.exp
    }

    fn mul(&self, other: &Dyadic, up: bool) -> Dyadic {
        Dyadic { mant: &self.mant * &other.mant, exp: self.exp + other.exp }.round(up)
    }

    fn div(&self, other: &Dyadic, up: bool) -> Dyadic {
        debug_assert!(!other.is_zero());
        let k = PRECISION + other.mant.bits() + 2;
        let num = &self.mant << k;
        let (mut q, r) = (&num / &other.mant, &num % &other.mant);
        if up && !r.is_zero() {
            q += 1u32;
        }
        Dyadic { mant: q, exp: self.exp - other.exp - k as i128 }.round(up)
    }

    /// `self - other`, or `None` when the difference would be negative.
    /// Exponent gaps are assumed moderate (both operands of similar size).
    fn sub(&self, other: &Dyadic, up: bool) -> Option<Dyadic> {
        if other.is_zero() {
            return Some(self.clone());
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        if a < b {
            return None;
        }
        Some(Dyadic { mant: a - b, exp: e }.round(up))
    }

    fn nth_root(&self, n: u32, up: bool) -> Dyadic {
        if n == 1 || self.is_zero() {
            return self.clone();
        }
        let n128 = n as i128;
        let want = n as u64 * (PRECISION + 2);
        let base_shift = want.saturating_sub(self.mant.bits()) as i128;
        let shift = base_shift + (self.exp - base_shift).rem_euclid(n128);
        let scaled = &self.mant << shift as u64;
        let exp = self.exp - shift;
        debug_assert_eq!(exp.rem_euclid(n128), 0);
        let mut root = scaled.nth_root(n);
        if up && root.pow(n) != scaled {
            root += 1u32;
        }
        Dyadic { mant: root, exp: exp / n128 }.round(up)
    }

    fn pow(&self, e: &BigUint, up: bool) -> Dyadic {
        let mut acc = Dyadic::from_int(1u32);
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc, up);
            if e.bit(i) {
                acc = acc.mul(self, up);
            }
        }
        acc
    }

    /// Leading 64 bits as `(t, shift)` with `x ≈ t · 2^shift`.
    fn head(&self) -> (u64, i128) {
        let bits = self.mant.bits();
        let drop = bits.saturating_sub(64);
        let t = (&self.mant >> drop).to_u64().unwrap_or(u64::MAX);
        (t, self.exp + drop as i128)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (t, shift) = self.head();
        if shift > 1100 {
            return f64::INFINITY;
        }
        if shift < -1200 {
            return 0.0;
        }
        t as f64 * 2f64.powi(shift as i32)
    }

    pub fn log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (t, shift) = self.head();
        (t as f64).log2() + shift as f64
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match self.top().cmp(&other.top()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        a.cmp(&b)
    }
}

/// A nonnegative real known to lie in `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HpReal {
    lo: Dyadic,
    hi: Dyadic,
}

impl HpReal {
    pub fn from_bounds(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo <= hi);
        HpReal { lo, hi }
    }

    pub fn from_int(v: impl Into<BigUint>) -> Self {
        let v: BigUint = v.into();
        HpReal { lo: Dyadic::from_int(v.clone()), hi: Dyadic { mant: v, exp: 0 }.round(true) }
    }

    pub fn one() -> Self {
        HpReal::from_int(1u32)
    }

    pub fn from_ratio(r: Ratio) -> Self {
        HpReal::from_int(r.numer()).div(&HpReal::from_int(r.denom())).expect("nonzero denominator")
    }

    pub fn lower(&self) -> &Dyadic {
        &self.lo
    }

    pub fn upper(&self) -> &Dyadic {
        &self.hi
    }

    pub fn mul(&self, other: &HpReal) -> HpReal {
        HpReal { lo: self.lo.mul(&other.lo, false), hi: self.hi.mul(&other.hi, true) }
    }

    pub fn div(&self, other: &HpReal) -> Result<HpReal> {
        if other.lo.is_zero() {
            return Err(Error::Range("division by an interval touching zero".into()));
        }
        Ok(HpReal { lo: self.lo.div(&other.hi, false), hi: self.hi.div(&other.lo, true) })
    }

    pub fn recip(&self) -> Result<HpReal> {
        HpReal::one().div(self)
    }

    /// `self - other`; errors if the result could be negative.
    pub fn sub(&self, other: &HpReal) -> Result<HpReal> {
        let lo = self
            .lo
            .sub(&other.hi, false)
            .ok_or_else(|| Error::Range("difference not provably nonnegative".into()))?;
        let hi = self.hi.sub(&other.lo, true).expect("hi - lo ≥ lo - hi ≥ 0");
        Ok(HpReal { lo, hi })
    }

    pub fn nth_root(&self, n: u32) -> Result<HpReal> {
        if n == 0 {
            return Err(Error::domain("zeroth root"));
        }
        Ok(HpReal { lo: self.lo.nth_root(n, false), hi: self.hi.nth_root(n, true) })
    }

    pub fn pow(&self, e: &BigUint) -> HpReal {
        HpReal { lo: self.lo.pow(e, false), hi: self.hi.pow(e, true) }
    }

    /// `self^(p/q)` as the q-th root of the p-th power.
    pub fn pow_ratio(&self, r: Ratio) -> Result<HpReal> {
        let q = u32::try_from(r.denom()).map_err(|_| Error::Range("exponent denominator too large".into()))?;
        self.pow(&BigUint::from(r.numer())).nth_root(q)
    }

    /// `self^y` for `self ≥ 1` and a real exponent bracketed by `y`.
    ///
    /// The exponent bounds are snapped outward to multiples of `2^-frac_bits`;
    /// the fractional power is reached by repeated square roots.
    pub fn pow_real(&self, y: &HpReal, frac_bits: u32) -> Result<HpReal> {
        if self.lo < Dyadic::from_int(1u32) {
            return Err(Error::domain("pow_real requires a base of at least 1"));
        }
        let snap = |d: &Dyadic, up: bool| -> BigUint {
            let shift = d.exp + frac_bits as i128;
            if shift >= 0 {
                &d.mant << shift as u64
            } else {
                let s = (-shift) as u64;
                let q = &d.mant >> s;
                if up && (&q << s) != d.mant {
                    q + 1u32
                } else {
                    q
                }
            }
        };
        let (m_lo, m_hi) = (snap(&y.lo, false), snap(&y.hi, true));
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for _ in 0..frac_bits {
            lo = lo.nth_root(2, false);
            hi = hi.nth_root(2, true);
        }
        Ok(HpReal { lo: lo.pow(&m_lo, false), hi: hi.pow(&m_hi, true) })
    }

    /// Midpoint in double precision (may be ±∞ for huge values).
    pub fn to_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }

    pub fn log2(&self) -> f64 {
        0.5 * (self.lo.log2() + self.hi.log2())
    }

    pub fn log10(&self) -> f64 {
        self.log2() * std::f64::consts::LOG10_2
    }

    /// `log2((hi - lo) / lo)`; `-∞` for a point interval.
    pub fn log2_relative_width(&self) -> f64 {
        match self.hi.sub(&self.lo, true) {
            Some(w) if !w.is_zero() => w.log2() - self.lo.log2(),
            _ => f64::NEG_INFINITY,
        }
    }

    /// True when every point of the interval is ≥ `v`.
    pub fn certainly_at_least(&self, v: &Dyadic) -> bool {
        &self.lo >= v
    }

    /// True when `v` does not exceed the upper end.
    pub fn admits(&self, v: &Dyadic) -> bool {
        v <= &self.hi
    }

    pub fn contains(&self, v: &Dyadic) -> bool {
        &self.lo <= v && v <= &self.hi
    }
}

impl fmt::Display for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.to_f64();
        if x.is_finite() {
            write!(f, "{x}")
        } else {
            write!(f, "10^{:.6}", self.log10())
        }
    }
}

impl From<u64> for Dyadic {
    fn from(v: u64) -> Self {
        Dyadic::from_int(v)
    }
}

impl From<u128> for Dyadic {
    fn from(v: u128) -> Self {
        Dyadic::from_int(v)
    }
}

/// `2^k` for a possibly negative `k`.
pub fn pow2(k: i128) -> Dyadic {
    Dyadic { mant: BigUint::one(), exp: k }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(p: u64, q: u64) -> Ratio {
        Ratio::new(p, q).unwrap()
    }

    #[test]
    fn integer_roots_are_points_or_tight() {
        let four = HpReal::from_int(16u32).nth_root(2).unwrap();
        assert_eq!(four.lower(), &Dyadic::from(4u64));
        assert_eq!(four.upper(), &Dyadic::from(4u64));

        let s2 = HpReal::from_int(2u32).nth_root(2).unwrap();
        assert!(s2.log2_relative_width() < -250.0);
        assert!((s2.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn root_brackets_are_certified() {
        // lo^q ≤ p^a ≤ hi^q checked with exact integers via the dyadic order.
        for (p, a, q) in [(2u64, 1u64, 2u32), (3, 3, 10), (997, 1, 2), (1_000_000, 3, 10)] {
            let x = HpReal::from_int(p).pow_ratio(ratio(a, q as u64)).unwrap();
            let target = Dyadic::from_int(BigUint::from(p).pow(a as u32));
            let lo_q = x.lower().pow(&BigUint::from(q), false);
            let hi_q = x.upper().pow(&BigUint::from(q), true);
            assert!(lo_q <= target && target <= hi_q, "{p}^({a}/{q})");
        }
    }

    #[test]
    fn division_and_subtraction() {
        let third = HpReal::from_ratio(ratio(1, 3));
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        assert!(third.lower() < third.upper());
        let two_thirds = HpReal::one().sub(&third).unwrap();
        assert!((two_thirds.to_f64() - 2.0 / 3.0).abs() < 1e-16);
        assert!(third.sub(&HpReal::one()).is_err());
        assert!(HpReal::one().div(&HpReal::from_int(0u32)).is_err());
    }

    #[test]
    fn huge_powers_keep_exponent() {
        // 128^(2^64) = 2^(7 · 2^64)
        let x = HpReal::from_int(128u32).pow(&(BigUint::one() << 64u32));
        let expected = 7.0 * 2f64.powi(64);
        assert!((x.log2() - expected).abs() / expected < 1e-12);
        assert_eq!(x.to_f64(), f64::INFINITY);
    }

    #[test]
    fn real_power_matches_integer_power() {
        let base = HpReal::from_int(5u32);
        let exact = base.pow(&BigUint::from(7u32));
        let y = HpReal::from_int(7u32);
        let via_real = base.pow_real(&y, 16).unwrap();
        assert!(via_real.lower() <= exact.lower() && exact.upper() <= via_real.upper());
        assert!(via_real.log2_relative_width() < -200.0);
    }

    #[test]
    fn ordering() {
        let a = Dyadic::new(BigUint::from(3u32), -1); // 1.5
        let b = Dyadic::new(BigUint::from(1u32), 0);
        assert!(a > b);
        assert!(Dyadic::zero() < b);
        assert_eq!(Dyadic::new(BigUint::from(4u32), -2), b);
    }
}
