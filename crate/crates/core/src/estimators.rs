//! Variance estimators computed from replicate deviations, and the
//! theoretical covariance of BRR deviations.
//!
//! For the two-PSU schemes each estimator is reported twice: from the
//! replicate deviations and from `sum_h d_h^2`. The two agree exactly in
//! exact arithmetic for BRR, Fay-BRR, the paired jackknife and Fay-JK.

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::design::direct_variance;
use crate::error::{Error, Result};
use crate::replication::{ReplicateEstimates, SchemeKind, SchemeSpec};

/// Relative tolerance of the replicate-path / contrast-path agreement.
pub const COLLAPSE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub scheme: SchemeSpec,
    /// Same as `via_replicates`.
    pub value: f64,
    pub via_replicates: f64,
    /// `sum_h d_h^2`; absent for the delete-a-group jackknife.
    pub via_contrasts: Option<f64>,
    /// Strata (or zones) contributing to the estimate.
    pub n_components: usize,
}

impl VarianceEstimate {
    fn new(est: &ReplicateEstimates, via_replicates: f64, n_components: usize) -> Self {
        Self {
            scheme: *est.scheme(),
            value: via_replicates,
            via_replicates,
            via_contrasts: est.contrasts().map(direct_variance),
            n_components,
        }
    }

    /// The value passed on to intervals and reports: the contrast form when
    /// available.
    pub fn canonical(&self) -> f64 {
        self.via_contrasts.unwrap_or(self.value)
    }

    /// `|via_replicates - via_contrasts|`, zero when there is no contrast form.
    pub fn collapse_discrepancy(&self) -> f64 {
        self.via_contrasts
            .map(|c| (self.via_replicates - c).abs())
            .unwrap_or(0.0)
    }

    /// Whether the two routes agree within `tol * (1 + via_contrasts)`.
    pub fn collapse_holds(&self, tol: f64) -> bool {
        match self.via_contrasts {
            Some(c) => self.collapse_discrepancy() <= tol * (1.0 + c),
            None => true,
        }
    }
}

fn sum_of_squares(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(epsilon))
    }
}

fn require_kind(est: &ReplicateEstimates, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::SchemeMismatch {
            scheme: est.scheme().to_string(),
            reason: format!("expected {what} replicates"),
        })
    }
}

fn check_count(est: &ReplicateEstimates, replicates: usize) -> Result<()> {
    if est.n_replicates() != replicates {
        return Err(Error::DimensionMismatch(format!(
            "{} replicate estimates, expected {replicates}",
            est.n_replicates()
        )));
    }
    Ok(())
}

/// `(1/R) sum_r X_r^2` for unperturbed BRR.
pub fn variance_brr(est: &ReplicateEstimates, replicates: usize) -> Result<VarianceEstimate> {
    require_kind(
        est,
        est.scheme().kind().is_brr_family() && est.scheme().epsilon() == 1.0,
        "unperturbed BRR",
    )?;
    check_count(est, replicates)?;
    let v = sum_of_squares(est.deviations()) / replicates as f64;
    Ok(VarianceEstimate::new(est, v, strata_count(est)))
}

/// `(1/(eps^2 R)) sum_r X_r^2`.
pub fn variance_fay_brr(
    est: &ReplicateEstimates,
    replicates: usize,
    epsilon: f64,
) -> Result<VarianceEstimate> {
    check_epsilon(epsilon)?;
    require_kind(est, est.scheme().kind().is_brr_family(), "BRR")?;
    check_count(est, replicates)?;
    let v = sum_of_squares(est.deviations()) / (epsilon * epsilon * replicates as f64);
    Ok(VarianceEstimate::new(est, v, strata_count(est)))
}

/// `(1/(2 eps^2)) sum_h [X_(h1)^2 + X_(h2)^2]`; deviations ordered by `(h, i)`.
pub fn variance_paired_jk(est: &ReplicateEstimates, epsilon: f64) -> Result<VarianceEstimate> {
    check_epsilon(epsilon)?;
    require_kind(
        est,
        est.scheme().kind().is_paired_jk_family(),
        "paired jackknife",
    )?;
    let n = est.n_replicates();
    if !n.is_multiple_of(2) {
        return Err(Error::OddReplicateCount(n));
    }
    let v = est
        .deviations()
        .chunks_exact(2)
        .map(|pair| pair[0] * pair[0] + pair[1] * pair[1])
        .sum::<f64>()
        / (2.0 * epsilon * epsilon);
    Ok(VarianceEstimate::new(est, v, n / 2))
}

/// `((G-1)/G) sum_i (T_i - T)^2` for the delete-a-group jackknife.
pub fn variance_jk1(est: &ReplicateEstimates, zones: usize) -> Result<VarianceEstimate> {
    if zones < 2 {
        return Err(Error::TooFewZones(zones));
    }
    require_kind(est, est.scheme().kind() == SchemeKind::Jk1, "JK1")?;
    check_count(est, zones)?;
    let g = zones as f64;
    let v = (g - 1.0) / g * sum_of_squares(est.deviations());
    Ok(VarianceEstimate::new(est, v, zones))
}

fn strata_count(est: &ReplicateEstimates) -> usize {
    est.contrasts().map(|d| d.len()).unwrap_or(0)
}

/// Dispatches on the scheme recorded in the estimates.
pub fn estimate_variance(est: &ReplicateEstimates) -> Result<VarianceEstimate> {
    let scheme = *est.scheme();
    let r = est.n_replicates();
    match scheme.kind() {
        SchemeKind::Brr => variance_brr(est, r),
        SchemeKind::FayBrr => variance_fay_brr(est, r, scheme.epsilon()),
        SchemeKind::PairedJk | SchemeKind::FayJk => variance_paired_jk(est, scheme.epsilon()),
        SchemeKind::Jk1 => variance_jk1(est, r),
    }
}

/// `Cov(X_r, X_s) = sum_h alpha_rh alpha_sh Var(d_h)` for the `R x H` sign
/// array `signs`.
pub fn brr_deviation_covariance(
    stratum_variances: &[f64],
    signs: ArrayView2<'_, i8>,
) -> Result<Array2<f64>> {
    let (r, h) = signs.dim();
    if h != stratum_variances.len() {
        return Err(Error::DimensionMismatch(format!(
            "{h} sign columns but {} stratum variances",
            stratum_variances.len()
        )));
    }
    if let Some(v) = stratum_variances.iter().find(|v| v.is_nan() || **v < 0.0) {
        return Err(Error::DimensionMismatch(format!(
            "stratum variance {v} is not a nonnegative number"
        )));
    }
    Ok(Array2::from_shape_fn((r, r), |(a, b)| {
        (0..h)
            .map(|k| (signs[[a, k]] as f64) * (signs[[b, k]] as f64) * stratum_variances[k])
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{StratifiedSample, ZoneSample};
    use crate::replication::*;
    use ndarray::arr2;

    fn d12() -> StratifiedSample {
        // d = (1, 2)
        StratifiedSample::from_pairs(&[(1.0, 3.0, 1.0, 2.0), (2.0, 3.0, 1.0, 4.0)]).unwrap()
    }

    fn estimates(s: &StratifiedSample, spec: SchemeSpec) -> ReplicateEstimates {
        replicate_estimates(s, &replicate_weights(s, &spec).unwrap()).unwrap()
    }

    #[test]
    fn brr_single_stratum() {
        // d = 5 with R = 4: deviations are +-5, (1/4) * 4 * 25 = 25.
        let s = StratifiedSample::from_pairs(&[(1.0, 6.0, 1.0, 1.0)]).unwrap();
        let spec = SchemeSpec::brr().with_hadamard_order(4).unwrap();
        let est = estimates(&s, spec);
        assert!(est.deviations().iter().all(|x| x.abs() == 5.0));
        let v = variance_brr(&est, 4).unwrap();
        assert_eq!(v.value, 25.0);
        assert_eq!(v.via_contrasts, Some(25.0));
    }

    #[test]
    fn brr_two_strata_by_enumeration() {
        let spec = SchemeSpec::brr().with_hadamard_order(4).unwrap();
        let est = estimates(&d12(), spec);
        // Brute force over the four sign rows of columns 2 and 3.
        let brute: f64 = [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)]
            .iter()
            .map(|(a, b): &(f64, f64)| (a * 1.0 + b * 2.0).powi(2))
            .sum::<f64>()
            / 4.0;
        assert_eq!(brute, 5.0);
        assert_eq!(variance_brr(&est, 4).unwrap().value, brute);
    }

    #[test]
    fn zero_outcomes_zero_variance() {
        let s = StratifiedSample::from_pairs(&[(1.0, 0.0, 3.0, 0.0); 3]).unwrap();
        let v = estimate_variance(&estimates(&s, SchemeSpec::brr())).unwrap();
        assert_eq!(v.value, 0.0);
        let v = estimate_variance(&estimates(&s, SchemeSpec::paired_jk())).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn fay_brr_matches_brr() {
        let s = d12();
        let fay = estimates(&s, SchemeSpec::fay_brr(0.5).unwrap());
        let v = variance_fay_brr(&fay, fay.n_replicates(), 0.5).unwrap();
        assert!((v.value - 5.0).abs() < 1e-12);
        let brr = estimates(&s, SchemeSpec::brr());
        let unit = variance_fay_brr(&brr, brr.n_replicates(), 1.0).unwrap();
        assert_eq!(
            unit.value,
            variance_brr(&brr, brr.n_replicates()).unwrap().value
        );
        assert!(matches!(
            variance_fay_brr(&fay, fay.n_replicates(), 0.0),
            Err(Error::EpsilonOutOfRange(_))
        ));
    }

    #[test]
    fn paired_jk_examples() {
        let s = d12();
        let est = estimates(&s, SchemeSpec::paired_jk());
        assert_eq!(est.deviations(), &[1.0, -1.0, 2.0, -2.0]);
        assert_eq!(variance_paired_jk(&est, 1.0).unwrap().value, 5.0);
        let est = estimates(&s, SchemeSpec::fay_jk(0.5).unwrap());
        assert_eq!(variance_paired_jk(&est, 0.5).unwrap().value, 5.0);
        let z = StratifiedSample::from_pairs(&[(2.0, 1.0, 1.0, 2.0); 4]).unwrap();
        let est = estimates(&z, SchemeSpec::paired_jk());
        assert_eq!(variance_paired_jk(&est, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn jk1_two_zones_matches_paired_jk() {
        let (a, b) = (7.0, 3.5);
        let z = ZoneSample::from_units(&[(1.0, a), (1.0, b)]).unwrap();
        let est = zone_replicate_estimates(&z, &jk1_weights(&z).unwrap()).unwrap();
        let v = variance_jk1(&est, 2).unwrap();
        assert_eq!(v.value, (a - b) * (a - b));
        assert_eq!(v.via_contrasts, None);

        let pair = StratifiedSample::from_pairs(&[(1.0, a, 1.0, b)]).unwrap();
        let pj = estimate_variance(&estimates(&pair, SchemeSpec::paired_jk())).unwrap();
        assert_eq!(pj.value, v.value);
    }

    #[test]
    fn jk1_brute_force_three_zones() {
        let units = [(1.0, 2.0), (2.0, 1.0), (0.5, 6.0)];
        let z = ZoneSample::from_units(&units).unwrap();
        let est = zone_replicate_estimates(&z, &jk1_weights(&z).unwrap()).unwrap();
        // Oracle: recompute each delete-one total directly.
        let full: f64 = units.iter().map(|(w, y)| w * y).sum();
        let mut ss = 0.0;
        for drop in 0..3 {
            let t: f64 = units
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, (w, y))| w * 1.5 * y)
                .sum();
            ss += (t - full).powi(2);
        }
        let v = variance_jk1(&est, 3).unwrap();
        assert!((v.value - ss * 2.0 / 3.0).abs() < 1e-12);

        let same = ZoneSample::from_units(&[(2.0, 3.0); 5]).unwrap();
        let est = zone_replicate_estimates(&same, &jk1_weights(&same).unwrap()).unwrap();
        assert!(variance_jk1(&est, 5).unwrap().value.abs() < 1e-24);
        assert!(matches!(variance_jk1(&est, 1), Err(Error::TooFewZones(1))));
    }

    #[test]
    fn wrong_estimator_for_scheme() {
        let est = estimates(&d12(), SchemeSpec::paired_jk());
        assert!(variance_brr(&est, 4).is_err());
        let est = estimates(&d12(), SchemeSpec::fay_brr(0.5).unwrap());
        assert!(variance_brr(&est, est.n_replicates()).is_err());
        assert!(matches!(
            variance_fay_brr(&est, 3, 0.5),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn covariance_by_hand() {
        let signs = arr2(&[[1i8, 1], [1, -1]]);
        let c = brr_deviation_covariance(&[1.0, 2.0], signs.view()).unwrap();
        assert_eq!(c, arr2(&[[3.0, -1.0], [-1.0, 3.0]]));

        let one = arr2(&[[1i8, -1, 1]]);
        let c = brr_deviation_covariance(&[0.5, 1.0, 2.0], one.view()).unwrap();
        assert_eq!(c, arr2(&[[3.5]]));

        assert!(brr_deviation_covariance(&[1.0], signs.view()).is_err());
    }

    #[test]
    fn covariance_equal_variances_full_matrix_is_diagonal() {
        let m = crate::hadamard::construct(8).unwrap();
        let c = brr_deviation_covariance(&[2.0; 8], m.entries()).unwrap();
        for r in 0..8 {
            for s in 0..8 {
                assert_eq!(c[[r, s]], if r == s { 16.0 } else { 0.0 });
            }
        }
    }
}
