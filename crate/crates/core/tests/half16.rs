use std::time::Instant;

use lowprec_core::half::{f16_add, f16_div, f16_mul, f16_muladd, f16_sub, round_f64_to_f16};
use lowprec_core::{FpClass, Half16, MulAddMode, RoundingPolicy};
use lowprec_oracle::binary16 as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 1_000_000;

fn policy(flush: bool, muladd: MulAddMode) -> RoundingPolicy {
    RoundingPolicy::new(flush, muladd)
}

#[test]
fn every_pattern_round_trips() {
    let start = Instant::now();
    for bits in 0..=u16::MAX {
        let h = Half16::from_bits(bits);
        let back = round_f64_to_f16(h.to_f64(), RoundingPolicy::default());
        if h.is_nan() {
            assert!(back.is_nan(), "{bits:#06x}");
        } else {
            assert_eq!(back.to_bits(), bits);
        }
        if !h.is_nan() {
            assert_eq!(
                h.to_f64().to_bits(),
                oracle::to_f64(bits).to_bits(),
                "{bits:#06x}"
            );
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn conversion_matches_oracle_on_random_doubles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..SAMPLES {
        // magnitudes spanning the whole binary16 range and beyond
        let x = rng.random_range(-1.0..1.0) * 2f64.powi(rng.random_range(-30..20));
        for flush in [false, true] {
            assert_eq!(
                round_f64_to_f16(x, policy(flush, MulAddMode::Fused)).to_bits(),
                oracle::from_f64(x, flush),
                "{x:e}"
            );
        }
    }
}

#[test]
fn arithmetic_matches_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..SAMPLES {
        let (a, b, c): (u16, u16, u16) = (rng.random(), rng.random(), rng.random());
        let (ha, hb, hc) = (
            Half16::from_bits(a),
            Half16::from_bits(b),
            Half16::from_bits(c),
        );
        for flush in [false, true] {
            let p = policy(flush, MulAddMode::Fused);
            let ctx = |op: &str| format!("{op} {a:#06x} {b:#06x} {c:#06x} flush={flush}");
            assert_eq!(
                f16_add(ha, hb, p).to_bits(),
                oracle::add(a, b, flush),
                "{}",
                ctx("add")
            );
            assert_eq!(
                f16_sub(ha, hb, p).to_bits(),
                oracle::sub(a, b, flush),
                "{}",
                ctx("sub")
            );
            assert_eq!(
                f16_mul(ha, hb, p).to_bits(),
                oracle::mul(a, b, flush),
                "{}",
                ctx("mul")
            );
            assert_eq!(
                f16_div(ha, hb, p).to_bits(),
                oracle::div(a, b, flush),
                "{}",
                ctx("div")
            );
            assert_eq!(
                f16_muladd(ha, hb, hc, p).to_bits(),
                oracle::fma(a, b, c, flush),
                "{}",
                ctx("fma")
            );
            let d = policy(flush, MulAddMode::DoubleRounding);
            assert_eq!(
                f16_muladd(ha, hb, hc, d).to_bits(),
                oracle::add(oracle::mul(a, b, flush), c, flush),
                "{}",
                ctx("muladd")
            );
        }
        let p = RoundingPolicy::default();
        assert_eq!(f16_add(ha, hb, p).to_bits(), f16_add(hb, ha, p).to_bits());
        assert_eq!(f16_mul(ha, hb, p).to_bits(), f16_mul(hb, ha, p).to_bits());
    }
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn flushing_leaves_no_subnormal_results() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut subnormal_without_flush = 0;
    for _ in 0..SAMPLES {
        let (a, b, c) = (
            Half16::from_bits(rng.random()),
            Half16::from_bits(rng.random()),
            Half16::from_bits(rng.random()),
        );
        for mode in [MulAddMode::Fused, MulAddMode::DoubleRounding] {
            let p = policy(true, mode);
            for r in [
                f16_add(a, b, p),
                f16_sub(a, b, p),
                f16_mul(a, b, p),
                f16_div(a, b, p),
                f16_muladd(a, b, c, p),
            ] {
                assert_ne!(r.classify(), FpClass::Subnormal);
            }
        }
        if f16_mul(a, b, RoundingPolicy::default()).classify() == FpClass::Subnormal {
            subnormal_without_flush += 1;
        }
    }
    // the sweep does reach the subnormal range
    assert!(subnormal_without_flush > 0);
}

/// Seeded search for a triple on which single and double rounding differ,
/// decided by the oracle alone.
fn find_divergent_triple() -> (u16, u16, u16) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    loop {
        // finite operands of moderate size
        let mut draw = || rng.random_range(0x3000u16..0x4800) | (rng.random::<u16>() & 0x8000);
        let (x, y, z) = (draw(), draw(), draw());
        if oracle::fma(x, y, z, false) != oracle::add(oracle::mul(x, y, false), z, false) {
            return (x, y, z);
        }
    }
}

#[test]
fn fused_and_double_rounding_diverge() {
    let (x, y, z) = find_divergent_triple();
    let (hx, hy, hz) = (
        Half16::from_bits(x),
        Half16::from_bits(y),
        Half16::from_bits(z),
    );
    let fused = f16_muladd(hx, hy, hz, policy(false, MulAddMode::Fused));
    let double = f16_muladd(hx, hy, hz, policy(false, MulAddMode::DoubleRounding));
    assert_ne!(
        fused.to_bits(),
        double.to_bits(),
        "{x:#06x} {y:#06x} {z:#06x}"
    );

    // pinned: (1 + 2^-10)^2 - (1 + 2^-9) = 2^-20, lost when the product is rounded first
    let (x, z) = (0x3C01, 0xBC02);
    assert_eq!(
        oracle::fma(x, x, z, false),
        oracle::from_f64(2f64.powi(-20), false)
    );
    assert_eq!(oracle::add(oracle::mul(x, x, false), z, false), 0);
    let (hx, hz) = (Half16::from_bits(x), Half16::from_bits(z));
    assert_eq!(
        f16_muladd(hx, hx, hz, policy(false, MulAddMode::Fused)).to_bits(),
        oracle::fma(x, x, z, false)
    );
    assert_eq!(
        f16_muladd(hx, hx, hz, RoundingPolicy::default()).to_bits(),
        0
    );
}

#[test]
fn rounding_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100_000 {
        let a = rng.random_range(-70000.0..70000.0) * 2f64.powi(rng.random_range(-28..0));
        let b = a + rng.random_range(0.0..1.0) * a.abs().max(1e-8);
        let (ra, rb) = (
            round_f64_to_f16(a, RoundingPolicy::default()),
            round_f64_to_f16(b, RoundingPolicy::default()),
        );
        assert!(ra.to_f64() <= rb.to_f64(), "{a:e} {b:e}");
    }
}

#[test]
fn scalar_core_examples() {
    let p = RoundingPolicy::default();
    let h = |x: f64| round_f64_to_f16(x, p);
    assert_eq!(h(65504.0).to_f64(), 65504.0);
    assert_eq!(h(0.0).to_bits(), 0);
    assert_eq!(h(1.0 + 2f64.powi(-11)).to_f64(), 1.0);
    assert_eq!(f16_add(h(65504.0), h(65504.0), p), Half16::INFINITY);
    assert_eq!(
        oracle::add(0x7BFF, 0x7BFF, false),
        Half16::INFINITY.to_bits()
    );
    let tiny = h(2f64.powi(-12));
    assert_eq!(
        f16_mul(tiny, tiny, policy(true, MulAddMode::DoubleRounding)).to_bits(),
        0
    );
    assert_eq!(oracle::mul(tiny.to_bits(), tiny.to_bits(), true), 0);
    assert_eq!(Half16::from_bits(0x0001).classify(), FpClass::Subnormal);
    assert_eq!(oracle::classify(0x0001), oracle::Class::Subnormal);
    assert_eq!(Half16::from_bits(0x7C00).classify(), FpClass::Inf);
    assert_eq!(Half16::from_bits(0x0400).classify(), FpClass::Normal);
    assert_eq!(oracle::classify(0x0400), oracle::Class::Normal);
    for bits in 0..=0x7BFFu16 {
        let x = Half16::from_bits(bits);
        assert_eq!(f16_mul(x, Half16::ONE, p), x);
    }
}
