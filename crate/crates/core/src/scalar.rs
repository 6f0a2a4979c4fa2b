//! The numeric contract every kernel and the shallow-water model are generic
//! over, plus its implementations for binary64, binary32 and software
//! binary16.

use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use crate::half::{self, Half16, MulAddMode, RoundingPolicy};

/// Number format a run is carried out in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarKind {
    F64,
    F32,
    F16,
    /// binary16 arithmetic with a binary32 time integration.
    Mixed,
}

impl ScalarKind {
    pub const ALL: [ScalarKind; 4] = [Self::F64, Self::F32, Self::F16, Self::Mixed];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::F64 => "f64",
            Self::F32 => "f32",
            Self::F16 => "f16",
            Self::Mixed => "f16/f32",
        }
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScalarKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f64" | "float64" => Ok(Self::F64),
            "f32" | "float32" => Ok(Self::F32),
            "f16" | "float16" => Ok(Self::F16),
            "mixed" | "f16/f32" | "f16/32" => Ok(Self::Mixed),
            other => Err(format!(
                "unknown scalar kind `{other}` (expected f64|f32|f16|mixed)"
            )),
        }
    }
}

/// Arithmetic a number format has to provide.
///
/// `Context` carries whatever a value needs beyond its bits in order to be
/// constructed: nothing for plain floats, a recorder handle for
/// instrumented numbers. Binary operators never need it because operands
/// already carry it.
pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Context: Copy;

    /// Format the arithmetic rounds to.
    const KIND: ScalarKind;

    fn from_f64(x: f64, ctx: Self::Context) -> Self;
    fn to_f64(self) -> f64;
    fn context(self) -> Self::Context;

    /// `self * b + c`, rounded the way the format defines it.
    fn mul_add(self, b: Self, c: Self) -> Self;
    fn sqrt(self) -> Self;

    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }

    /// Re-round into another format without touching any recorder.
    fn convert<U: Scalar>(self, ctx: U::Context) -> U {
        U::from_f64(self.to_f64(), ctx)
    }
}

impl Scalar for f64 {
    type Context = ();
    const KIND: ScalarKind = ScalarKind::F64;

    #[inline]
    fn from_f64(x: f64, _: ()) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn context(self) {}
    /// Unfused: the product is rounded before the add.
    #[inline]
    fn mul_add(self, b: Self, c: Self) -> Self {
        self * b + c
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for f32 {
    type Context = ();
    const KIND: ScalarKind = ScalarKind::F32;

    #[inline]
    fn from_f64(x: f64, _: ()) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
    #[inline]
    fn context(self) {}
    #[inline]
    fn mul_add(self, b: Self, c: Self) -> Self {
        self * b + c
    }
    #[inline]
    fn sqrt(self) -> Self {
        f32::sqrt(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
}

/// Software binary16 with its rounding policy fixed in the type.
///
/// `FTZ` flushes subnormal results to zero; `FUSED` selects single-rounding
/// multiply-add.
#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
#[repr(transparent)]
pub struct F16<const FTZ: bool = false, const FUSED: bool = false>(pub Half16);

impl<const FTZ: bool, const FUSED: bool> F16<FTZ, FUSED> {
    pub const POLICY: RoundingPolicy = RoundingPolicy::new(
        FTZ,
        if FUSED {
            MulAddMode::Fused
        } else {
            MulAddMode::DoubleRounding
        },
    );

    pub fn bits(self) -> u16 {
        self.0.to_bits()
    }
}

impl<const FTZ: bool, const FUSED: bool> Debug for F16<FTZ, FUSED> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Debug::fmt(&self.0, f)
    }
}

macro_rules! f16_binop {
    ($tr:ident, $method:ident, $func:path) => {
        impl<const FTZ: bool, const FUSED: bool> $tr for F16<FTZ, FUSED> {
            type Output = Self;
            #[inline]
            fn $method(self, rhs: Self) -> Self {
                F16($func(self.0, rhs.0, Self::POLICY))
            }
        }
    };
}

f16_binop!(Add, add, half::f16_add);
f16_binop!(Sub, sub, half::f16_sub);
f16_binop!(Mul, mul, half::f16_mul);
f16_binop!(Div, div, half::f16_div);

impl<const FTZ: bool, const FUSED: bool> Neg for F16<FTZ, FUSED> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        F16(-self.0)
    }
}

impl<const FTZ: bool, const FUSED: bool> Scalar for F16<FTZ, FUSED> {
    type Context = ();
    const KIND: ScalarKind = ScalarKind::F16;

    #[inline]
    fn from_f64(x: f64, _: ()) -> Self {
        F16(half::round_f64_to_f16(x, Self::POLICY))
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.0.to_f64()
    }
    #[inline]
    fn context(self) {}
    #[inline]
    fn mul_add(self, b: Self, c: Self) -> Self {
        F16(half::f16_muladd(self.0, b.0, c.0, Self::POLICY))
    }
    #[inline]
    fn sqrt(self) -> Self {
        F16(self.0.sqrt(Self::POLICY))
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

/// Calls `$body` with `$T` bound to the `F16` instantiation for `$policy`.
#[macro_export]
macro_rules! with_f16_policy {
    ($policy:expr, $T:ident => $body:expr) => {{
        let p: $crate::half::RoundingPolicy = $policy;
        match (p.flush_subnormals, p.muladd) {
            (false, $crate::half::MulAddMode::DoubleRounding) => {
                type $T = $crate::scalar::F16<false, false>;
                $body
            }
            (false, $crate::half::MulAddMode::Fused) => {
                type $T = $crate::scalar::F16<false, true>;
                $body
            }
            (true, $crate::half::MulAddMode::DoubleRounding) => {
                type $T = $crate::scalar::F16<true, false>;
                $body
            }
            (true, $crate::half::MulAddMode::Fused) => {
                type $T = $crate::scalar::F16<true, true>;
                $body
            }
        }
    }};
}
