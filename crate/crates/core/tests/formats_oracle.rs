//! Element rounding checked against grids built here from first principles,
//! with a binary-search nearest-value oracle.

use mx_emu::formats::{round_real_to_fp, ElementFormat};
use mx_emu::rng::seeded;
use proptest::prelude::*;
use rand::Rng;

/// Non-negative magnitudes indexed by code: subnormals `m * 2^(1-bias-M)`,
/// normals `2^(e-bias) * (1 + m / 2^M)`, capped at `max`.
fn float_magnitudes(ebits: u32, mbits: u32, max: f64) -> Vec<f64> {
    let bias = (1i32 << (ebits - 1)) - 1;
    let mut out = Vec::new();
    for e in 0..(1u32 << ebits) {
        for m in 0..(1u32 << mbits) {
            let frac = m as f64 / (1u32 << mbits) as f64;
            let v = if e == 0 {
                frac * 2f64.powi(1 - bias)
            } else {
                (1.0 + frac) * 2f64.powi(e as i32 - bias)
            };
            if v <= max {
                out.push(v);
            }
        }
    }
    out
}

fn int_magnitudes(bits: u32) -> Vec<f64> {
    (0..(1u32 << (bits - 1))).map(|v| v as f64).collect()
}

/// Nearest magnitude; on an exact tie the even index (code) wins.
fn oracle_round(mags: &[f64], v: f64) -> f64 {
    let a = v.abs();
    let max = *mags.last().unwrap();
    let r = if a >= max {
        max
    } else {
        let hi = mags.partition_point(|&m| m < a);
        if mags[hi] == a {
            a
        } else {
            let lo = hi - 1;
            let (dl, dh) = (a - mags[lo], mags[hi] - a);
            if dl < dh || (dl == dh && lo % 2 == 0) {
                mags[lo]
            } else {
                mags[hi]
            }
        }
    };
    if v < 0.0 {
        -r
    } else {
        r
    }
}

fn cases() -> Vec<(ElementFormat, Vec<f64>)> {
    vec![
        (ElementFormat::fp4_e2m1(), float_magnitudes(2, 1, 6.0)),
        (ElementFormat::fp6_e3m2(), float_magnitudes(3, 2, 28.0)),
        (ElementFormat::fp6_e2m3(), float_magnitudes(2, 3, 7.5)),
        (ElementFormat::fp8_e4m3(), float_magnitudes(4, 3, 448.0)),
        (ElementFormat::fp8_e5m2(), float_magnitudes(5, 2, 57344.0)),
        (ElementFormat::int4(), int_magnitudes(4)),
        (ElementFormat::int8(), int_magnitudes(8)),
    ]
}

#[test]
fn grids_match_independent_construction() {
    for (fmt, mags) in cases() {
        assert_eq!(fmt.magnitudes().unwrap(), mags, "{fmt}");
        assert_eq!(fmt.max_normal(), *mags.last().unwrap(), "{fmt}");
    }
}

#[test]
fn random_inputs_match_nearest_search() {
    for (i, (fmt, mags)) in cases().into_iter().enumerate() {
        let mut rng = seeded(1000 + i as u64);
        let lo = mags[1].log2() - 3.0;
        let hi = mags.last().unwrap().log2() + 2.0;
        for k in 0..100_000 {
            let v = if k % 4 == 0 {
                // Exact midpoint between neighbours exercises ties.
                let j = rng.gen_range(0..mags.len() - 1);
                0.5 * (mags[j] + mags[j + 1])
            } else {
                2f64.powf(rng.gen_range(lo..hi))
            };
            let v = if rng.gen::<bool>() { -v } else { v };
            let got = fmt.round_to_grid(v).unwrap();
            let want = oracle_round(&mags, v);
            assert_eq!(got, want, "{fmt}: round({v:e})");
        }
    }
}

#[test]
fn every_code_round_trips() {
    for (fmt, mags) in cases() {
        for &m in &mags {
            for v in [m, -m] {
                let c = fmt.encode(v).unwrap();
                assert_eq!(fmt.decode(c), v, "{fmt} {v}");
                if v == 0.0 {
                    assert!(!c.sign);
                }
            }
        }
    }
}

#[test]
fn fp32_matches_hardware_cast() {
    let fp32 = ElementFormat::fp32();
    let mut rng = seeded(32);
    for _ in 0..100_000 {
        let v: f64 = rng.gen_range(-1.0..1.0) * 2f64.powf(rng.gen_range(-120.0..120.0));
        assert_eq!(fp32.round_to_grid(v).unwrap(), v as f32 as f64, "{v:e}");
    }
}

#[test]
fn scale_rounding_never_returns_zero() {
    let e4m3 = ElementFormat::fp8_e4m3();
    assert_eq!(round_real_to_fp(1e-30, &e4m3).unwrap(), 2f64.powi(-9));
    assert_eq!(round_real_to_fp(1e9, &e4m3).unwrap(), 448.0);
}

proptest! {
    #[test]
    fn rounding_is_monotone(a in -500.0f64..500.0, b in -500.0f64..500.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for (fmt, _) in cases() {
            prop_assert!(fmt.round_to_grid(lo).unwrap() <= fmt.round_to_grid(hi).unwrap());
        }
    }

    #[test]
    fn rounding_is_odd_and_idempotent(v in -1e5f64..1e5) {
        for (fmt, _) in cases() {
            let r = fmt.round_to_grid(v).unwrap();
            prop_assert_eq!(fmt.round_to_grid(-v).unwrap(), -r);
            prop_assert_eq!(fmt.round_to_grid(r).unwrap(), r);
            prop_assert_eq!(fmt.decode(fmt.encode(v).unwrap()), r);
        }
    }
}
