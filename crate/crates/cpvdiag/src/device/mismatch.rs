//! Per-cell short-circuit scale factors.
//!
//! Two draw modes. The stratified mode (module default) assigns the 25
//! midpoint quantiles of Normal(1, sigma), shuffled across cells by the
//! seed: the module is the representative one for its spread, with sample
//! sd exactly sigma. Under uniform illumination and temperature a series
//! string is invariant under cell permutation, so the curve then depends
//! only on sigma; a spread fitted from one such module transfers exactly
//! to any other, which is what makes fault round-trips identifiable. The
//! iid mode draws 25 independent normals instead: each seed is a genuinely
//! different module, as in a production population. A single iid module's
//! maximum-power current is dominated by its weakest cells, so it scatters
//! around the representative value; fits against iid modules carry that
//! scatter no matter how the fitting side averages.

use super::CELLS_PER_MODULE;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Iid,
    #[default]
    Stratified,
}

/// Factors below this are clamped; a cell never loses more than 95% of its
/// photocurrent to mismatch.
pub const SCALE_FLOOR: f64 = 0.05;

/// Acklam's rational approximation to the standard normal quantile
/// function, |relative error| < 1.15e-9 over (0, 1).
fn norm_ppf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LO: f64 = 0.02425;
    if p < P_LO {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LO {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -norm_ppf(1.0 - p)
    }
}

/// Midpoint normal quantiles for 25 cells, renormalized so the set has mean
/// exactly 0 and sample standard deviation (n-1 denominator) exactly 1.
static QUANTILES: LazyLock<[f64; CELLS_PER_MODULE]> = LazyLock::new(|| {
    let n = CELLS_PER_MODULE;
    let mut q = [0.0; CELLS_PER_MODULE];
    for (k, item) in q.iter_mut().enumerate() {
        *item = norm_ppf((k as f64 + 0.5) / n as f64);
    }
    let mean = q.iter().sum::<f64>() / n as f64;
    for item in q.iter_mut() {
        *item -= mean;
    }
    let var = q.iter().map(|x| x * x).sum::<f64>() / (n as f64 - 1.0);
    let sd = var.sqrt();
    for item in q.iter_mut() {
        *item /= sd;
    }
    q
});

/// Independent Normal(1, sigma) factors, one draw per cell.
pub fn sample_mismatch(sigma: f64, seed: u64) -> Result<Vec<f64>> {
    sample_mismatch_mode(sigma, seed, SamplingMode::Iid)
}

pub fn sample_mismatch_mode(sigma: f64, seed: u64, mode: SamplingMode) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::Domain(format!("mismatch sigma {sigma} must be >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<f64> = match mode {
        SamplingMode::Stratified => {
            let mut q: Vec<f64> = QUANTILES.to_vec();
            q.shuffle(&mut rng);
            q.iter().map(|qk| 1.0 + sigma * qk).collect()
        }
        SamplingMode::Iid => {
            let dist = Normal::new(1.0, sigma)
                .map_err(|e| Error::Domain(format!("normal({sigma}): {e}")))?;
            (0..CELLS_PER_MODULE).map(|_| dist.sample(&mut rng)).collect()
        }
    };
    Ok(factors.into_iter().map(|f| f.max(SCALE_FLOOR)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppf_matches_reference_points() {
        assert!((norm_ppf(0.5)).abs() < 1e-9);
        assert!((norm_ppf(0.975) - 1.959963984540054).abs() < 1e-7);
        assert!((norm_ppf(0.025) + 1.959963984540054).abs() < 1e-7);
        assert!((norm_ppf(0.84134474606854293) - 1.0).abs() < 1e-7);
        assert!((norm_ppf(0.0013498980316300933) + 3.0).abs() < 1e-6);
    }

    #[test]
    fn quantile_profile_normalized() {
        let q = &*QUANTILES;
        let mean = q.iter().sum::<f64>() / 25.0;
        let var = q.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 24.0;
        assert!(mean.abs() < 1e-14);
        assert!((var - 1.0).abs() < 1e-12);
        let qmin = q.iter().cloned().fold(f64::MAX, f64::min);
        assert!((-2.35..=-1.95).contains(&qmin), "min quantile {qmin}");
    }

    #[test]
    fn zero_sigma_gives_unit_factors() {
        for mode in [SamplingMode::Stratified, SamplingMode::Iid] {
            let f = sample_mismatch_mode(0.0, 123, mode).unwrap();
            assert!(f.iter().all(|x| (*x - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn iid_sample_sd_in_plausible_window() {
        // n = 25 puts a standard error of about sigma/7 on the sample sd
        for seed in [1, 7, 42, 99, 1234] {
            let f = sample_mismatch(0.23, seed).unwrap();
            let mean = f.iter().sum::<f64>() / 25.0;
            let sd = (f.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 24.0).sqrt();
            assert!((0.15..=0.31).contains(&sd), "sd {sd} at seed {seed}");
            assert!((mean - 1.0).abs() < 0.15, "mean {mean} at seed {seed}");
        }
    }

    #[test]
    fn stratified_sample_sd_is_exactly_sigma() {
        for &sigma in &[0.05, 0.1, 0.23, 0.3] {
            let f = sample_mismatch_mode(sigma, 99, SamplingMode::Stratified).unwrap();
            let mean = f.iter().sum::<f64>() / 25.0;
            let sd = (f.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 24.0).sqrt();
            assert!((mean - 1.0).abs() < 1e-12, "mean {mean} at sigma {sigma}");
            assert!((sd - sigma).abs() < 1e-12, "sd {sd} at sigma {sigma}");
        }
    }

    #[test]
    fn stratified_seeds_permute_the_same_multiset() {
        let mut a = sample_mismatch_mode(0.23, 1, SamplingMode::Stratified).unwrap();
        let mut b = sample_mismatch_mode(0.23, 2, SamplingMode::Stratified).unwrap();
        assert_ne!(a, b, "different seeds produce different orderings");
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b, "but the same multiset of factors");
        let mut c = sample_mismatch(0.23, 1).unwrap();
        c.sort_by(f64::total_cmp);
        assert_ne!(a, c, "iid draws are not the quantile multiset");
    }

    #[test]
    fn deterministic_per_seed() {
        for mode in [SamplingMode::Stratified, SamplingMode::Iid] {
            let a = sample_mismatch_mode(0.23, 42, mode).unwrap();
            let b = sample_mismatch_mode(0.23, 42, mode).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn iid_sample_sd_plausible_and_floor_respected() {
        // across many seeds the pooled sd estimates sigma
        let sigma = 0.2;
        let mut pool = Vec::new();
        for seed in 0..40 {
            pool.extend(sample_mismatch_mode(sigma, seed, SamplingMode::Iid).unwrap());
        }
        let mean = pool.iter().sum::<f64>() / pool.len() as f64;
        let sd = (pool.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (pool.len() as f64 - 1.0))
            .sqrt();
        assert!((sd - sigma).abs() < 0.03, "pooled sd {sd}");
        let extreme = sample_mismatch_mode(0.6, 7, SamplingMode::Iid).unwrap();
        assert!(extreme.iter().all(|f| *f >= SCALE_FLOOR));
    }

    #[test]
    fn stratified_ecdf_close_to_normal() {
        // Kolmogorov-Smirnov distance between the stratified sample and
        // N(1, sigma^2); midpoint quantiles sit half a step from the ECDF
        // jumps, so the distance is about 1/(2n) plus renormalization.
        let sigma = 0.23;
        let mut f = sample_mismatch_mode(sigma, 5, SamplingMode::Stratified).unwrap();
        f.sort_by(f64::total_cmp);
        let phi = |x: f64| 0.5 * (1.0 + erf_approx(x / std::f64::consts::SQRT_2));
        let mut ks: f64 = 0.0;
        for (k, x) in f.iter().enumerate() {
            let z = (x - 1.0) / sigma;
            let cdf = phi(z);
            let lo = k as f64 / 25.0;
            let hi = (k as f64 + 1.0) / 25.0;
            ks = ks.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        assert!(ks < 0.05, "KS distance {ks}");
    }

    // Abramowitz-Stegun 7.1.26, |error| < 1.5e-7; test helper only.
    fn erf_approx(x: f64) -> f64 {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let x = x.abs();
        let t = 1.0 / (1.0 + 0.3275911 * x);
        let y = 1.0
            - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
                + 0.254829592)
                * t
                * (-x * x).exp();
        sign * y
    }
}
