//! Software IEEE-754 binary16.
//!
//! Arithmetic widens both operands to binary64, computes there, and rounds
//! the result back once. A binary64 significand holds the exact sum or
//! product of two binary16 values, and is wide enough that a single extra
//! rounding of a quotient or fused product-sum never changes the final
//! binary16 result, so every operation here is correctly rounded.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// A binary16 value stored as its raw bit pattern.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
#[repr(transparent)]
pub struct Half16(u16);

/// IEEE-754 classification of a binary16 value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpClass {
    Zero,
    Subnormal,
    Normal,
    Inf,
    Nan,
}

/// How a multiply-add is rounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MulAddMode {
    /// One rounding of the exact `x*y + z`.
    Fused,
    /// Round the product, then round the sum.
    #[default]
    DoubleRounding,
}

impl FromStr for MulAddMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fused" => Ok(Self::Fused),
            "double" => Ok(Self::DoubleRounding),
            other => Err(format!(
                "unknown muladd mode `{other}` (expected fused|double)"
            )),
        }
    }
}

impl fmt::Display for MulAddMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fused => "fused",
            Self::DoubleRounding => "double",
        })
    }
}

/// Rounding behaviour applied to every binary16 result.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundingPolicy {
    /// Replace subnormal results by a zero of the same sign.
    pub flush_subnormals: bool,
    pub muladd: MulAddMode,
}

impl RoundingPolicy {
    pub const fn new(flush_subnormals: bool, muladd: MulAddMode) -> Self {
        Self {
            flush_subnormals,
            muladd,
        }
    }
}

const SIGN_MASK: u16 = 0x8000;
const EXP_MASK: u16 = 0x7C00;
const MAN_MASK: u16 = 0x03FF;

impl Half16 {
    pub const ZERO: Self = Self(0x0000);
    pub const NEG_ZERO: Self = Self(0x8000);
    pub const ONE: Self = Self(0x3C00);
    pub const INFINITY: Self = Self(0x7C00);
    pub const NEG_INFINITY: Self = Self(0xFC00);
    /// Canonical quiet NaN; every NaN-producing operation returns exactly this.
    pub const NAN: Self = Self(0x7E00);
    /// 65504
    pub const MAX: Self = Self(0x7BFF);
    /// 2^-14
    pub const MIN_POSITIVE: Self = Self(0x0400);
    /// 2^-24
    pub const MIN_POSITIVE_SUBNORMAL: Self = Self(0x0001);
    /// 2^-10
    pub const EPSILON: Self = Self(0x1400);

    pub const fn from_bits(bits: u16) -> Self {
        Self(bits)
    }

    pub const fn to_bits(self) -> u16 {
        self.0
    }

    /// Exact widening; every binary16 value is representable in binary64.
    pub fn to_f64(self) -> f64 {
        let sign = if self.0 & SIGN_MASK != 0 { -1.0 } else { 1.0 };
        let exp = (self.0 & EXP_MASK) >> 10;
        let man = (self.0 & MAN_MASK) as u64;
        match exp {
            0x1F if man != 0 => f64::NAN,
            0x1F => sign * f64::INFINITY,
            0 => {
                // man * 2^-24, exact
                sign * (man as f64) * f64::from_bits((1023u64 - 24) << 52)
            }
            e => {
                // Rebias the exponent and left-align the mantissa in binary64.
                let bits = ((e as u64 + 1023 - 15) << 52) | (man << 42);
                sign * f64::from_bits(bits)
            }
        }
    }

    pub fn from_f64(x: f64, policy: RoundingPolicy) -> Self {
        round_f64_to_f16(x, policy)
    }

    pub fn classify(self) -> FpClass {
        let exp = self.0 & EXP_MASK;
        let man = self.0 & MAN_MASK;
        match (exp, man) {
            (0, 0) => FpClass::Zero,
            (0, _) => FpClass::Subnormal,
            (EXP_MASK, 0) => FpClass::Inf,
            (EXP_MASK, _) => FpClass::Nan,
            _ => FpClass::Normal,
        }
    }

    pub fn is_nan(self) -> bool {
        self.classify() == FpClass::Nan
    }

    pub fn is_finite(self) -> bool {
        self.0 & EXP_MASK != EXP_MASK
    }

    pub fn is_sign_negative(self) -> bool {
        self.0 & SIGN_MASK != 0
    }

    pub fn abs(self) -> Self {
        Self(self.0 & !SIGN_MASK)
    }

    /// Apply a binary64 function and round the result; used for
    /// transcendentals, which only appear when precomputing constants.
    pub fn map_widened(self, f: impl FnOnce(f64) -> f64, policy: RoundingPolicy) -> Self {
        round_f64_to_f16(f(self.to_f64()), policy)
    }

    pub fn sqrt(self, policy: RoundingPolicy) -> Self {
        self.map_widened(f64::sqrt, policy)
    }

    pub fn exp(self, policy: RoundingPolicy) -> Self {
        self.map_widened(f64::exp, policy)
    }

    pub fn ln(self, policy: RoundingPolicy) -> Self {
        self.map_widened(f64::ln, policy)
    }

    pub fn sin(self, policy: RoundingPolicy) -> Self {
        self.map_widened(f64::sin, policy)
    }

    pub fn cos(self, policy: RoundingPolicy) -> Self {
        self.map_widened(f64::cos, policy)
    }
}

impl fmt::Debug for Half16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Half16({:#06x} = {})", self.0, self.to_f64())
    }
}

impl fmt::Display for Half16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl PartialOrd for Half16 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

/// Round a binary64 value to the nearest binary16, ties to even.
///
/// Overflow goes to a signed infinity, NaN to [`Half16::NAN`]. Results below
/// 2^-14 in magnitude are subnormal unless the policy flushes them.
pub fn round_f64_to_f16(x: f64, policy: RoundingPolicy) -> Half16 {
    let bits = x.to_bits();
    let sign = ((bits >> 48) as u16) & SIGN_MASK;
    let exp = ((bits >> 52) & 0x7FF) as i32;
    let man = bits & ((1u64 << 52) - 1);

    if exp == 0x7FF {
        return if man != 0 {
            Half16::NAN
        } else {
            Half16(sign | EXP_MASK)
        };
    }
    // binary64 subnormals are far below half of 2^-24.
    if exp == 0 {
        return Half16(sign);
    }
    let e = exp - 1023;
    if e > 15 {
        return Half16(sign | EXP_MASK);
    }

    let out = if e >= -14 {
        // Normal range: keep 10 of the 52 mantissa bits.
        let kept = (man >> 42) as u16;
        let rest = man & ((1u64 << 42) - 1);
        let half = 1u64 << 41;
        let biased = (((e + 15) as u16) << 10) | kept;
        // A carry out of the mantissa bumps the exponent, possibly to Inf.
        if rest > half || (rest == half && kept & 1 == 1) {
            biased + 1
        } else {
            biased
        }
    } else {
        // Subnormal range: the result is sig * 2^(e-52) in units of 2^-24.
        let sig = man | (1u64 << 52);
        let shift = (28 - e) as u32;
        if shift > 53 {
            0
        } else {
            let kept = (sig >> shift) as u16;
            let rest = sig & ((1u64 << shift) - 1);
            let half = 1u64 << (shift - 1);
            // Rounding up from 0x3FF lands exactly on 0x400, the smallest normal.
            if rest > half || (rest == half && kept & 1 == 1) {
                kept + 1
            } else {
                kept
            }
        }
    };

    let out = if policy.flush_subnormals && out & EXP_MASK == 0 {
        0
    } else {
        out
    };
    Half16(sign | out)
}

fn binary(
    a: Half16,
    b: Half16,
    policy: RoundingPolicy,
    op: impl FnOnce(f64, f64) -> f64,
) -> Half16 {
    round_f64_to_f16(op(a.to_f64(), b.to_f64()), policy)
}

pub fn f16_add(a: Half16, b: Half16, policy: RoundingPolicy) -> Half16 {
    binary(a, b, policy, |x, y| x + y)
}

pub fn f16_sub(a: Half16, b: Half16, policy: RoundingPolicy) -> Half16 {
    binary(a, b, policy, |x, y| x - y)
}

pub fn f16_mul(a: Half16, b: Half16, policy: RoundingPolicy) -> Half16 {
    binary(a, b, policy, |x, y| x * y)
}

pub fn f16_div(a: Half16, b: Half16, policy: RoundingPolicy) -> Half16 {
    binary(a, b, policy, |x, y| x / y)
}

/// `x*y + z` rounded according to `policy.muladd`.
pub fn f16_muladd(x: Half16, y: Half16, z: Half16, policy: RoundingPolicy) -> Half16 {
    match policy.muladd {
        MulAddMode::Fused => round_f64_to_f16(x.to_f64().mul_add(y.to_f64(), z.to_f64()), policy),
        MulAddMode::DoubleRounding => f16_add(f16_mul(x, y, policy), z, policy),
    }
}

/// Sign flip; exact, and NaN stays NaN.
impl std::ops::Neg for Half16 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0 ^ SIGN_MASK)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULT: RoundingPolicy = RoundingPolicy::new(false, MulAddMode::DoubleRounding);
    const FTZ: RoundingPolicy = RoundingPolicy::new(true, MulAddMode::DoubleRounding);

    fn h(x: f64) -> Half16 {
        round_f64_to_f16(x, DEFAULT)
    }

    #[test]
    fn limits() {
        assert_eq!(Half16::MAX.to_f64(), 65504.0);
        assert_eq!(Half16::MIN_POSITIVE.to_f64(), 2f64.powi(-14));
        assert_eq!(Half16::MIN_POSITIVE_SUBNORMAL.to_f64(), 2f64.powi(-24));
        assert_eq!(Half16::EPSILON.to_f64(), 2f64.powi(-10));
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(h(65504.0), Half16::MAX);
        assert_eq!(h(0.0).to_bits(), 0x0000);
        assert_eq!(h(-0.0).to_bits(), 0x8000);
        // halfway between 1 and 1 + 2^-10: ties to the even neighbour
        assert_eq!(h(1.0 + 2f64.powi(-11)), Half16::ONE);
        assert_eq!(h(1.0 + 3.0 * 2f64.powi(-11)).to_bits(), 0x3C02);
        assert_eq!(h(65520.0), Half16::INFINITY);
        assert_eq!(h(-1e10), Half16::NEG_INFINITY);
        assert_eq!(h(f64::NAN), Half16::NAN);
        assert_eq!(h(f64::MIN_POSITIVE / 4.0).to_bits(), 0);
        // largest subnormal rounds up into the normal range
        assert_eq!(h(2f64.powi(-14) - 2f64.powi(-26)), Half16::MIN_POSITIVE);
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(f16_add(Half16::MAX, Half16::MAX, DEFAULT), Half16::INFINITY);
        let tiny = h(2f64.powi(-12));
        assert_eq!(f16_mul(tiny, tiny, FTZ), Half16::ZERO);
        assert_eq!(f16_mul(tiny, tiny, DEFAULT), Half16::MIN_POSITIVE_SUBNORMAL);
        assert_eq!(f16_mul(-tiny, tiny, FTZ), Half16::NEG_ZERO);
        assert_eq!(f16_div(Half16::ZERO, Half16::ZERO, DEFAULT), Half16::NAN);
        assert_eq!(
            f16_sub(Half16::INFINITY, Half16::INFINITY, DEFAULT),
            Half16::NAN
        );
    }

    #[test]
    fn nan_inputs_are_canonicalised() {
        let odd_nan = Half16::from_bits(0xFD01);
        assert!(odd_nan.is_nan());
        assert_eq!(f16_add(odd_nan, Half16::ONE, DEFAULT).to_bits(), 0x7E00);
        assert_eq!(
            f16_muladd(Half16::ONE, odd_nan, Half16::ONE, DEFAULT).to_bits(),
            0x7E00
        );
    }

    #[test]
    fn classify_examples() {
        assert_eq!(Half16::from_bits(0x0001).classify(), FpClass::Subnormal);
        assert_eq!(Half16::from_bits(0x7C00).classify(), FpClass::Inf);
        assert_eq!(Half16::from_bits(0x0400).classify(), FpClass::Normal);
        assert_eq!(Half16::from_bits(0x8000).classify(), FpClass::Zero);
        assert_eq!(Half16::from_bits(0x7C01).classify(), FpClass::Nan);
    }

    #[test]
    fn muladd_modes() {
        let y = h(1.75);
        let z = h(-3.5);
        for mode in [MulAddMode::Fused, MulAddMode::DoubleRounding] {
            let p = RoundingPolicy::new(false, mode);
            assert_eq!(f16_muladd(Half16::ZERO, y, z, p), z);
            assert_eq!(f16_muladd(Half16::ONE, y, Half16::ZERO, p), y);
        }
        // (1 + 2^-10)^2 - (1 + 2^-9) = 2^-20 exactly; the rounded product loses it.
        let x = Half16::from_bits(0x3C01);
        let z = Half16::from_bits(0xBC02);
        let fused = f16_muladd(x, x, z, RoundingPolicy::new(false, MulAddMode::Fused));
        let double = f16_muladd(x, x, z, DEFAULT);
        assert_eq!(fused.to_f64(), 2f64.powi(-20));
        assert_eq!(double, Half16::ZERO);
    }

    #[test]
    fn transcendentals_round_once() {
        assert_eq!(Half16::ZERO.exp(DEFAULT), Half16::ONE);
        assert_eq!(h(4.0).sqrt(DEFAULT), h(2.0));
        assert_eq!(Half16::ONE.ln(DEFAULT), Half16::ZERO);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("fused".parse::<MulAddMode>().unwrap(), MulAddMode::Fused);
        assert_eq!(
            "double".parse::<MulAddMode>().unwrap(),
            MulAddMode::DoubleRounding
        );
        assert!("triple".parse::<MulAddMode>().is_err());
    }
}
