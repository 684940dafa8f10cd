//! Student-t distribution for fractional degrees of freedom.
//!
//! The CDF goes through the regularized incomplete beta function; quantiles
//! are found by Newton iteration on the upper tail, safeguarded by a
//! bisection bracket. Above `LARGE_DOF` the quantile switches to the
//! Cornish-Fisher expansion around the normal quantile, whose error there is
//! far below double precision.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LARGE_DOF: f64 = 1e7;
const QUANTILE_TOL: f64 = 1e-14;
const MAX_CF_ITER: usize = 200_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let series = LANCZOS
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64));
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// `ln Gamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2]` for large `x`.
fn stirling_correction(x: f64) -> f64 {
    let x2 = x * x;
    (1.0 / 12.0
        - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * x2)) / x2) / x2) / x2)
        / x
}

/// `ln B(a, b)`. When one argument is large the gamma difference is formed
/// analytically to avoid cancelling two huge `ln Gamma` values.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, big) = if a < b { (a, b) } else { (b, a) };
    if big < 15.0 {
        return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    }
    let sum = big + small;
    ln_gamma(small) - (big - 0.5) * (small / big).ln_1p() - small * sum.ln()
        + small
        + stirling_correction(big)
        - stirling_correction(sum)
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_CF_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`, taking `ln x` and `ln(1 - x)`
/// separately so callers can supply them without cancellation.
fn beta_reg_logs(a: f64, b: f64, x: f64, ln_x: f64, ln_1mx: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (a * ln_x + b * ln_1mx - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`, `0 <= x <= 1`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    beta_reg_logs(a, b, x, x.ln(), (-x).ln_1p())
}

/// `P(T > t)` for `t >= 0`.
fn upper_tail(t: f64, dof: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let t2 = t * t;
    let ratio = t2 / dof;
    // x = dof / (dof + t^2), 1 - x = t^2 / (dof + t^2).
    let x = 1.0 / (1.0 + ratio);
    let ln_x = -ratio.ln_1p();
    let ln_1mx = t2.ln() - (dof + t2).ln();
    0.5 * beta_reg_logs(0.5 * dof, 0.5, x, ln_x, ln_1mx)
}

/// CDF of Student's t with `dof > 0` degrees of freedom.
pub fn t_cdf(t: f64, dof: f64) -> f64 {
    if t >= 0.0 {
        1.0 - upper_tail(t, dof)
    } else {
        upper_tail(-t, dof)
    }
}

/// Density of Student's t.
pub fn t_pdf(t: f64, dof: f64) -> f64 {
    (-(0.5 * (dof + 1.0)) * (t * t / dof).ln_1p() - 0.5 * dof.ln() - ln_beta(0.5 * dof, 0.5)).exp()
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Standard normal quantile (Wichura's AS 241, about 1e-16 relative).
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return Ok(q * horner(&A, r) / horner(&B, r));
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        let r = r - 5.0;
        horner(&E, r) / horner(&F, r)
    };
    Ok(if q < 0.0 { -z } else { z })
}

/// Cornish-Fisher expansion of the t quantile in powers of `1/dof`.
fn cornish_fisher(z: f64, dof: f64) -> f64 {
    let z2 = z * z;
    let g1 = z * (z2 + 1.0) / 4.0;
    let g2 = z * ((5.0 * z2 + 16.0) * z2 + 3.0) / 96.0;
    let g3 = z * (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) / 384.0;
    let g4 = z * ((((79.0 * z2 + 776.0) * z2 + 1482.0) * z2 - 1920.0) * z2 - 945.0) / 92160.0;
    z + (g1 + (g2 + (g3 + g4 / dof) / dof) / dof) / dof
}

/// Quantile `q` with `t_cdf(q, dof) = p`. `dof` may be fractional; an
/// infinite `dof` gives the normal quantile.
pub fn t_quantile(dof: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    if dof.is_nan() || dof <= 0.0 {
        return Err(Error::InvalidDegreesOfFreedom(dof));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let z = normal_quantile(p)?;
    if dof.is_infinite() {
        return Ok(z);
    }
    if dof >= LARGE_DOF {
        return Ok(cornish_fisher(z, dof));
    }
    // Work on the upper tail: find q > 0 with P(T > q) = tail.
    let tail = if p < 0.5 { p } else { 1.0 - p };
    let sign = if p < 0.5 { -1.0 } else { 1.0 };

    let mut q = cornish_fisher(z.abs(), dof.max(1.0)).max(1e-3);
    if !q.is_finite() {
        q = 1.0;
    }
    let (mut lo, mut hi) = (0.0_f64, q);
    while upper_tail(hi, dof) > tail {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Ok(sign * f64::MAX);
        }
    }
    q = q.clamp(lo, hi);
    for _ in 0..500 {
        let f = upper_tail(q, dof) - tail;
        if f > 0.0 {
            lo = q;
        } else {
            hi = q;
        }
        let step = f / t_pdf(q, dof);
        let mut next = q + step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - q).abs() <= QUANTILE_TOL * q.max(1.0) || hi - lo <= QUANTILE_TOL * hi {
            q = next;
            break;
        }
        q = next;
    }
    Ok(sign * q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-15);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_beta_large_argument_agrees_with_gamma_route() {
        for &(a, b) in &[(20.0, 0.5), (50.0, 3.0), (16.0, 16.0), (500.0, 0.5)] {
            let direct = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
            assert!((ln_beta(a, b) - direct).abs() < 1e-11, "{a} {b}");
        }
    }

    #[test]
    fn beta_reg_closed_forms() {
        // I_x(1, 1) = x, I_x(a, 1) = x^a, I_x(1, b) = 1 - (1 - x)^b.
        for &x in &[0.1, 0.35, 0.9] {
            assert!((beta_reg(1.0, 1.0, x) - x).abs() < 1e-14);
            assert!((beta_reg(3.5, 1.0, x) - x.powf(3.5)).abs() < 1e-14);
            assert!((beta_reg(1.0, 2.5, x) - (1.0 - (1.0 - x).powf(2.5))).abs() < 1e-14);
        }
    }

    #[test]
    fn cauchy_cdf() {
        for &t in &[-3.0f64, -0.5, 0.0, 0.7, 12.0] {
            let want = 0.5 + t.atan() / PI;
            assert!((t_cdf(t, 1.0) - want).abs() < 1e-14, "{t}");
        }
    }

    #[test]
    fn normal_quantile_reference() {
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((normal_quantile(0.5).unwrap()).abs() < 1e-16);
        assert!((normal_quantile(1e-10).unwrap() + 6.361_340_902_404_056).abs() < 1e-12);
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn quantile_symmetry_and_monotonicity() {
        for &dof in &[0.7, 2.4, 11.07] {
            let mut prev = f64::NEG_INFINITY;
            for &p in &[0.001, 0.05, 0.3, 0.5, 0.8, 0.975, 0.9999] {
                let q = t_quantile(dof, p).unwrap();
                let mirror = t_quantile(dof, 1.0 - p).unwrap();
                assert!((q + mirror).abs() <= 1e-12 * q.abs().max(1.0));
                assert!(q > prev);
                prev = q;
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            t_quantile(3.0, 0.0),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            t_quantile(3.0, 1.0),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            t_quantile(0.0, 0.5),
            Err(Error::InvalidDegreesOfFreedom(_))
        ));
        assert!(matches!(
            t_quantile(f64::NAN, 0.5),
            Err(Error::InvalidDegreesOfFreedom(_))
        ));
    }
}
