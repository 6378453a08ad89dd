use half::f16;
use mpfgmres::precision::{fl_op, round_to, Format, FpOp, QuadValue, Status};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Integer-only binary16 rounder: `v = m 2^e` exactly, then the significand
/// is shifted onto the binary16 quantum with ties to even.
fn oracle_half(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if biased == 0 { (frac, -1074) } else { (frac | (1 << 52), biased - 1075) };
    let top = 63 - m.leading_zeros() as i64 + e;
    let q = top.max(-14) - 10;
    let k: u64 = if e >= q {
        m << (e - q)
    } else {
        let s = (q - e) as u32;
        if s >= 64 {
            0
        } else {
            let (whole, rem) = (m >> s, m & ((1u64 << s) - 1));
            let half = 1u64 << (s - 1);
            if rem > half || (rem == half && whole & 1 == 1) { whole + 1 } else { whole }
        }
    };
    let mag = k as f64 * 2f64.powi(q as i32);
    let mag = if mag > 65504.0 { f64::INFINITY } else { mag };
    mag.copysign(v)
}

fn check_half(v: f64) {
    let got = round_to(Format::HALF, v);
    let want = oracle_half(v);
    assert!(got.to_bits() == want.to_bits(), "half({v:e}): got {got:e}, oracle {want:e}");
}

/// Every finite binary16 value, in increasing order.
fn finite_halves() -> Vec<f64> {
    let mut all: Vec<f64> = (0..=u16::MAX)
        .map(f16::from_bits)
        .filter(|h| h.is_finite())
        .map(f16::to_f64)
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.dedup_by(|a, b| a.to_bits() == b.to_bits());
    all
}

#[test]
fn half_grid_points_are_fixed() {
    let all: Vec<u16> = (0..=u16::MAX).filter(|&b| f16::from_bits(b).is_finite()).collect();
    assert_eq!(all.len(), 63488);
    for b in all {
        let v = f16::from_bits(b).to_f64();
        check_half(v);
        assert_eq!(round_to(Format::HALF, v).to_bits(), v.to_bits());
    }
}

#[test]
fn half_midpoints_match_oracle() {
    let grid = finite_halves();
    let mut count = 0;
    for w in grid.windows(2) {
        let mid = w[0] + (w[1] - w[0]) / 2.0;
        check_half(mid);
        check_half(mid.next_up());
        check_half(mid.next_down());
        count += 1;
    }
    // the overflow threshold sits half an ulp above the largest finite value
    for s in [1.0, -1.0] {
        check_half(s * 65520.0);
        check_half(s * 65520f64.next_down());
        assert_eq!(round_to(Format::HALF, s * 65520.0), s * f64::INFINITY);
    }
    assert!(count > 63000);
}

#[test]
fn half_random_samples_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for i in 0..1_000_000u32 {
        let v = match i % 3 {
            // random bit patterns cover the full binary64 range
            0 => f64::from_bits(rng.gen()),
            1 => rng.gen_range(-70000.0..70000.0),
            _ => rng.gen_range(-1.0..1.0) * 2f64.powi(rng.gen_range(-30..17)),
        };
        if v.is_nan() {
            assert!(round_to(Format::HALF, v).is_nan());
            continue;
        }
        check_half(v);
    }
}

#[test]
fn unit_roundoffs_are_bit_exact() {
    assert_eq!(Format::HALF.unit_roundoff().to_bits(), 2f64.powi(-11).to_bits());
    assert_eq!(Format::SINGLE.unit_roundoff().to_bits(), 2f64.powi(-24).to_bits());
    assert_eq!(Format::DOUBLE.unit_roundoff().to_bits(), 2f64.powi(-53).to_bits());
    assert_eq!(Format::QUAD.unit_roundoff().to_bits(), 2f64.powi(-104).to_bits());
}

fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap()
}

fn rational_quad(q: QuadValue) -> BigRational {
    rational(q.hi()) + rational(q.lo())
}

/// `|got - exact| / |exact|` as an `f64`.
fn relative_gap(got: QuadValue, exact: &BigRational) -> f64 {
    if exact.is_zero() {
        return if rational_quad(got).is_zero() { 0.0 } else { f64::INFINITY };
    }
    let rel = ((rational_quad(got) - exact) / exact).abs();
    // scale into f64 range before converting
    let scaled = rel * BigRational::from_integer(BigInt::from(1u128 << 120));
    let (n, d) = (scaled.numer().clone(), scaled.denom().clone());
    let int = n / d;
    int.to_string().parse::<f64>().unwrap() / 2f64.powi(120)
}

fn random_quad(rng: &mut ChaCha8Rng) -> QuadValue {
    let hi: f64 = rng.gen_range(-1.0..1.0) * 2f64.powi(rng.gen_range(-40..40));
    let lo = hi * rng.gen_range(-1.0..1.0) * 2f64.powi(-54);
    QuadValue::new(hi, lo)
}

#[test]
fn quad_operations_meet_effective_roundoff() {
    let u = Format::QUAD.unit_roundoff();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = [0f64; 4];
    for _ in 0..4000 {
        let (a, b) = (random_quad(&mut rng), random_quad(&mut rng));
        let (ra, rb) = (rational_quad(a), rational_quad(b));
        let gaps = [
            relative_gap(a + b, &(&ra + &rb)),
            relative_gap(a - b, &(&ra - &rb)),
            relative_gap(a * b, &(&ra * &rb)),
            relative_gap(a / b, &(&ra / &rb)),
        ];
        for (w, g) in worst.iter_mut().zip(gaps) {
            *w = w.max(g);
        }
    }
    for (op, w) in ["add", "sub", "mul", "div"].iter().zip(worst) {
        assert!(w <= u, "{op}: relative error {w:e} exceeds 2^-104");
    }
}

#[test]
fn single_rounding_matches_hardware_cast() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..200_000 {
        let v = f64::from_bits(rng.gen());
        if v.is_nan() {
            continue;
        }
        assert_eq!(round_to(Format::SINGLE, v).to_bits(), (v as f32 as f64).to_bits(), "{v:e}");
    }
}

fn binary_formats() -> impl Strategy<Value = Format> {
    prop_oneof![Just(Format::HALF), Just(Format::MP4), Just(Format::SINGLE), Just(Format::DOUBLE)]
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        (-1.0f64..1.0, -60i32..60).prop_map(|(m, e)| m * 2f64.powi(e)),
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn rounding_is_idempotent(fmt in binary_formats(), v in finite()) {
        let r = round_to(fmt, v);
        prop_assert_eq!(round_to(fmt, r).to_bits(), r.to_bits());
    }

    #[test]
    fn rounding_is_odd(fmt in binary_formats(), v in finite()) {
        prop_assert_eq!(round_to(fmt, -v).to_bits(), (-round_to(fmt, v)).to_bits());
    }

    #[test]
    fn rounding_is_monotone(fmt in binary_formats(), a in finite(), b in finite()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(round_to(fmt, lo) <= round_to(fmt, hi));
    }

    #[test]
    fn normal_range_error_within_unit_roundoff(fmt in binary_formats(), m in 0.5f64..1.0, e in -10i32..10) {
        let v = m * 2f64.powi(e);
        let r = round_to(fmt, v);
        prop_assert!((r - v).abs() <= fmt.unit_roundoff() * v.abs());
    }

    #[test]
    fn operations_are_correctly_rounded_products(a in -300.0f64..300.0, b in -300.0f64..300.0) {
        // both inputs on the half grid, the exact product fits in binary64
        let (a, b) = (round_to(Format::HALF, a), round_to(Format::HALF, b));
        let st = Status::default();
        let got = fl_op(Format::HALF, FpOp::Mul, a, b, &st);
        prop_assert_eq!(got.to_bits(), oracle_half(a * b).to_bits());
    }
}
