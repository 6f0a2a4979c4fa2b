//! Integer-exact binary16 arithmetic.
//!
//! Every finite binary16 value is `mag * 2^exp` with an integer `mag`, so sums
//! and products of them are exact in `i128`. Quotients are carried out as
//! long division with a sticky bit. Rounding to nearest-even is done once on
//! the exact value.

pub const CANONICAL_NAN: u16 = 0x7E00;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Zero,
    Subnormal,
    Normal,
    Inf,
    Nan,
}

#[derive(Clone, Copy, Debug)]
enum Decoded {
    Nan,
    Inf { neg: bool },
    Finite { neg: bool, mag: u128, exp: i32 },
}

fn decode(bits: u16) -> Decoded {
    let neg = bits & 0x8000 != 0;
    let e = ((bits >> 10) & 0x1F) as i32;
    let m = (bits & 0x3FF) as u128;
    match e {
        0x1F if m != 0 => Decoded::Nan,
        0x1F => Decoded::Inf { neg },
        0 => Decoded::Finite {
            neg,
            mag: m,
            exp: -24,
        },
        _ => Decoded::Finite {
            neg,
            mag: m | 0x400,
            exp: e - 25,
        },
    }
}

fn sign_bit(neg: bool) -> u16 {
    if neg {
        0x8000
    } else {
        0
    }
}

/// Round `(-1)^neg * (mag + sticky*epsilon) * 2^exp` to binary16.
///
/// `sticky` means "strictly more than `mag`, by less than one unit of `exp`".
pub fn round_exact(neg: bool, mag: u128, exp: i32, sticky: bool, flush: bool) -> u16 {
    let sign = sign_bit(neg);
    if mag == 0 {
        return sign;
    }
    let top = 127 - mag.leading_zeros() as i32;
    let value_exp = top + exp;
    if value_exp > 15 {
        return sign | 0x7C00;
    }
    let mut lsb = (value_exp - 10).max(-24);
    let shift = lsb - exp;
    let mut q: u128;
    if shift <= 0 {
        q = mag << (-shift) as u32;
    } else {
        let (kept, rem, half) = if shift >= 128 {
            (0u128, mag, None)
        } else {
            let kept = mag >> shift as u32;
            (
                kept,
                mag - (kept << shift as u32),
                Some(1u128 << (shift - 1) as u32),
            )
        };
        q = kept;
        let up = match half {
            None => false,
            Some(h) => rem > h || (rem == h && (sticky || q & 1 == 1)),
        };
        if up {
            q += 1;
        }
    }
    if q >= 2048 {
        q >>= 1;
        lsb += 1;
    }
    if q >= 1024 && lsb + 10 > 15 {
        return sign | 0x7C00;
    }
    if q < 1024 {
        if flush && q != 0 {
            return sign;
        }
        return sign | q as u16;
    }
    let biased = (lsb + 25) as u16;
    sign | (biased << 10) | (q as u16 - 1024)
}

pub fn from_f64(x: f64, flush: bool) -> u16 {
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let e = ((bits >> 52) & 0x7FF) as i32;
    let m = (bits & ((1u64 << 52) - 1)) as u128;
    if e == 0x7FF {
        return if m != 0 {
            CANONICAL_NAN
        } else {
            sign_bit(neg) | 0x7C00
        };
    }
    if e == 0 {
        round_exact(neg, m, -1074, false, flush)
    } else {
        round_exact(neg, m | (1u128 << 52), e - 1075, false, flush)
    }
}

pub fn to_f64(bits: u16) -> f64 {
    match decode(bits) {
        Decoded::Nan => f64::NAN,
        Decoded::Inf { neg } => {
            if neg {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        }
        Decoded::Finite { neg, mag, exp } => {
            let v = mag as f64 * 2f64.powi(exp);
            if neg {
                -v
            } else {
                v
            }
        }
    }
}

pub fn classify(bits: u16) -> Class {
    let v = to_f64(bits);
    if v.is_nan() {
        Class::Nan
    } else if v.is_infinite() {
        Class::Inf
    } else if v == 0.0 {
        Class::Zero
    } else if v.abs() < 2f64.powi(-14) {
        Class::Subnormal
    } else {
        Class::Normal
    }
}

fn signed_at(neg: bool, mag: u128, exp: i32, unit_exp: i32) -> i128 {
    let v = (mag << (exp - unit_exp) as u32) as i128;
    if neg {
        -v
    } else {
        v
    }
}

fn round_signed(sum: i128, unit_exp: i32, zero_neg: bool, flush: bool) -> u16 {
    if sum == 0 {
        return sign_bit(zero_neg);
    }
    round_exact(sum < 0, sum.unsigned_abs(), unit_exp, false, flush)
}

pub fn add(a: u16, b: u16, flush: bool) -> u16 {
    match (decode(a), decode(b)) {
        (Decoded::Nan, _) | (_, Decoded::Nan) => CANONICAL_NAN,
        (Decoded::Inf { neg: x }, Decoded::Inf { neg: y }) => {
            if x == y {
                sign_bit(x) | 0x7C00
            } else {
                CANONICAL_NAN
            }
        }
        (Decoded::Inf { neg }, _) | (_, Decoded::Inf { neg }) => sign_bit(neg) | 0x7C00,
        (
            Decoded::Finite {
                neg: na,
                mag: ma,
                exp: ea,
            },
            Decoded::Finite {
                neg: nb,
                mag: mb,
                exp: eb,
            },
        ) => {
            let sum = signed_at(na, ma, ea, -24) + signed_at(nb, mb, eb, -24);
            round_signed(sum, -24, na && nb, flush)
        }
    }
}

fn negate(b: u16) -> u16 {
    match decode(b) {
        Decoded::Nan => b,
        _ => b ^ 0x8000,
    }
}

pub fn sub(a: u16, b: u16, flush: bool) -> u16 {
    add(a, negate(b), flush)
}

pub fn mul(a: u16, b: u16, flush: bool) -> u16 {
    match (decode(a), decode(b)) {
        (Decoded::Nan, _) | (_, Decoded::Nan) => CANONICAL_NAN,
        (Decoded::Inf { neg: x }, Decoded::Inf { neg: y }) => sign_bit(x != y) | 0x7C00,
        (Decoded::Inf { neg: x }, Decoded::Finite { neg: y, mag, .. })
        | (Decoded::Finite { neg: y, mag, .. }, Decoded::Inf { neg: x }) => {
            if mag == 0 {
                CANONICAL_NAN
            } else {
                sign_bit(x != y) | 0x7C00
            }
        }
        (
            Decoded::Finite {
                neg: na,
                mag: ma,
                exp: ea,
            },
            Decoded::Finite {
                neg: nb,
                mag: mb,
                exp: eb,
            },
        ) => round_exact(na != nb, ma * mb, ea + eb, false, flush),
    }
}

pub fn div(a: u16, b: u16, flush: bool) -> u16 {
    match (decode(a), decode(b)) {
        (Decoded::Nan, _) | (_, Decoded::Nan) => CANONICAL_NAN,
        (Decoded::Inf { .. }, Decoded::Inf { .. }) => CANONICAL_NAN,
        (Decoded::Inf { neg: x }, Decoded::Finite { neg: y, .. }) => sign_bit(x != y) | 0x7C00,
        (Decoded::Finite { neg: x, .. }, Decoded::Inf { neg: y }) => sign_bit(x != y),
        (
            Decoded::Finite {
                neg: na,
                mag: ma,
                exp: ea,
            },
            Decoded::Finite {
                neg: nb,
                mag: mb,
                exp: eb,
            },
        ) => {
            let neg = na != nb;
            match (ma == 0, mb == 0) {
                (true, true) => CANONICAL_NAN,
                (false, true) => sign_bit(neg) | 0x7C00,
                (true, false) => sign_bit(neg),
                (false, false) => {
                    const K: u32 = 64;
                    let num = ma << K;
                    let q = num / mb;
                    let r = num % mb;
                    round_exact(neg, q, ea - eb - K as i32, r != 0, flush)
                }
            }
        }
    }
}

/// `x*y + z` rounded once.
pub fn fma(x: u16, y: u16, z: u16, flush: bool) -> u16 {
    let (dx, dy, dz) = (decode(x), decode(y), decode(z));
    if matches!(dx, Decoded::Nan) || matches!(dy, Decoded::Nan) || matches!(dz, Decoded::Nan) {
        return CANONICAL_NAN;
    }
    let is_zero = |d: Decoded| matches!(d, Decoded::Finite { mag: 0, .. });
    let is_inf = |d: Decoded| matches!(d, Decoded::Inf { .. });
    let neg_of = |d: Decoded| match d {
        Decoded::Nan => false,
        Decoded::Inf { neg } | Decoded::Finite { neg, .. } => neg,
    };
    let prod_neg = neg_of(dx) != neg_of(dy);
    if is_inf(dx) || is_inf(dy) {
        if is_zero(dx) || is_zero(dy) {
            return CANONICAL_NAN;
        }
        if let Decoded::Inf { neg } = dz {
            if neg != prod_neg {
                return CANONICAL_NAN;
            }
        }
        return sign_bit(prod_neg) | 0x7C00;
    }
    if let Decoded::Inf { neg } = dz {
        return sign_bit(neg) | 0x7C00;
    }
    let (
        Decoded::Finite {
            mag: mx, exp: ex, ..
        },
        Decoded::Finite {
            mag: my, exp: ey, ..
        },
    ) = (dx, dy)
    else {
        unreachable!()
    };
    let Decoded::Finite {
        neg: nz,
        mag: mz,
        exp: ez,
    } = dz
    else {
        unreachable!()
    };
    let p = signed_at(prod_neg, mx * my, ex + ey, -48);
    let s = signed_at(nz, mz, ez, -48);
    round_signed(p + s, -48, prod_neg && nz, flush)
}
