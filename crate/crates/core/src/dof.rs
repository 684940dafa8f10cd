//! Effective degrees of freedom and t intervals for the total.
//!
//! With `V = sum_h d_h^2` the Welch-Satterthwaite plug-in is
//! `nu = (sum d^2)^2 / sum d^4`, which lies in `[1, H]`. The bias-corrected
//! version is `3 nu - 2`, in `[1, 3H - 2]`. Intervals use the corrected
//! value by default, floored at 1; it is not capped at `H` unless asked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::ContrastVector;
use crate::error::{Error, Result};
use crate::estimators::VarianceEstimate;
use crate::replication::ReplicateEstimates;
use crate::tdist::{normal_quantile, t_quantile};

/// Which quantities the degrees of freedom were computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DofBasis {
    Contrasts,
    JkReplicates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofEstimate {
    pub naive: f64,
    pub corrected: f64,
    pub corrected_clamped: f64,
    pub basis: DofBasis,
    /// Number of strata `H`.
    pub n_components: usize,
}

/// Rule for picking the degrees of freedom of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DofRule {
    /// Bias-corrected estimate, floored at 1.
    Corrected,
    /// Plain Welch-Satterthwaite estimate.
    Naive,
    /// `H` degrees of freedom.
    FixedH,
    /// Normal quantile (infinite degrees of freedom).
    Normal,
}

impl DofRule {
    pub const ALL: [DofRule; 4] = [
        DofRule::Corrected,
        DofRule::Naive,
        DofRule::FixedH,
        DofRule::Normal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DofRule::Corrected => "corrected",
            DofRule::Naive => "naive",
            DofRule::FixedH => "fixed-h",
            DofRule::Normal => "normal",
        }
    }
}

impl fmt::Display for DofRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DofRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        DofRule::ALL
            .into_iter()
            .find(|r| r.as_str() == norm)
            .ok_or_else(|| Error::Config {
                path: "dof-rule".into(),
                message: format!(
                    "unknown rule {s:?}; expected corrected, naive, fixed-h or normal"
                ),
            })
    }
}

impl DofEstimate {
    fn from_naive(naive: f64, basis: DofBasis, n_components: usize) -> Self {
        let corrected = 3.0 * naive - 2.0;
        Self {
            naive,
            corrected,
            corrected_clamped: corrected.max(1.0),
            basis,
            n_components,
        }
    }

    /// Degrees of freedom under `rule`; `None` means the normal quantile.
    /// `cap_at_h` limits the corrected value to `H`.
    pub fn for_rule(&self, rule: DofRule, cap_at_h: bool) -> Option<f64> {
        match rule {
            DofRule::Corrected if cap_at_h => {
                Some(self.corrected_clamped.min(self.n_components as f64))
            }
            DofRule::Corrected => Some(self.corrected_clamped),
            DofRule::Naive => Some(self.naive),
            DofRule::FixedH => Some(self.n_components as f64),
            DofRule::Normal => None,
        }
    }
}

/// `(sum d^2)^2 / sum d^4`, in `[1, H]`.
pub fn ws_naive(d: &ContrastVector) -> Result<f64> {
    ws_naive_slice(d.as_slice())
}

fn ws_naive_slice(d: &[f64]) -> Result<f64> {
    let scale = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::DegenerateContrasts);
    }
    // Scaling by max |d| keeps d^4 away from overflow and underflow.
    let (s2, s4) = d.iter().fold((0.0, 0.0), |(s2, s4), x| {
        let u = x / scale;
        let u2 = u * u;
        (s2 + u2, s4 + u2 * u2)
    });
    // Cauchy-Schwarz bounds; clamping only removes rounding excursions.
    Ok((s2 * s2 / s4).clamp(1.0, d.len() as f64))
}

/// Naive and bias-corrected degrees of freedom from the stratum contrasts.
pub fn ws_corrected(d: &ContrastVector) -> Result<DofEstimate> {
    Ok(DofEstimate::from_naive(
        ws_naive(d)?,
        DofBasis::Contrasts,
        d.len(),
    ))
}

/// Degrees of freedom from one paired-jackknife deviation per stratum,
/// `T_(h1) - T`. The Fay factor `epsilon` is divided out first. Using both
/// replicates of a stratum would count each `d_h^2` twice.
pub fn ws_from_jk_replicates(deviations: &[f64], epsilon: f64) -> Result<DofEstimate> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let scaled: Vec<f64> = deviations.iter().map(|x| x / epsilon).collect();
    Ok(DofEstimate::from_naive(
        ws_naive_slice(&scaled)?,
        DofBasis::JkReplicates,
        deviations.len(),
    ))
}

/// The `(h1)` deviation of every stratum from paired-jackknife estimates.
pub fn first_jk_deviations(est: &ReplicateEstimates) -> Result<Vec<f64>> {
    if !est.scheme().kind().is_paired_jk_family() {
        return Err(Error::SchemeMismatch {
            scheme: est.scheme().to_string(),
            reason: "expected paired jackknife replicates".into(),
        });
    }
    if !est.n_replicates().is_multiple_of(2) {
        return Err(Error::OddReplicateCount(est.n_replicates()));
    }
    Ok(est.deviations().iter().step_by(2).copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub level: f64,
    /// `None` when the normal quantile was used.
    pub dof_used: Option<f64>,
    pub quantile: f64,
    /// Zero variance: the interval is a single point.
    pub degenerate: bool,
}

impl ConfidenceInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn covers(&self, value: f64) -> bool {
        (value - self.center).abs() <= self.half_width
    }
}

/// `T +- t_{nu, 1 - alpha/2} sqrt(V)` with the corrected degrees of freedom.
pub fn confidence_interval(
    total: f64,
    variance: &VarianceEstimate,
    dof: &DofEstimate,
    level: f64,
) -> Result<ConfidenceInterval> {
    interval_with_rule(
        total,
        variance.canonical(),
        dof,
        level,
        DofRule::Corrected,
        false,
    )
}

/// Interval for an arbitrary variance value and degrees-of-freedom rule.
pub fn interval_with_rule(
    total: f64,
    variance: f64,
    dof: &DofEstimate,
    level: f64,
    rule: DofRule,
    cap_at_h: bool,
) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidProbability(level));
    }
    let p = 1.0 - (1.0 - level) / 2.0;
    let dof_used = dof.for_rule(rule, cap_at_h);
    let quantile = match dof_used {
        Some(nu) => t_quantile(nu, p)?,
        None => normal_quantile(p)?,
    };
    let variance = variance.max(0.0);
    Ok(ConfidenceInterval {
        center: total,
        half_width: quantile * variance.sqrt(),
        level,
        dof_used,
        quantile,
        degenerate: variance == 0.0,
    })
}

/// Normal-theory variance of `V = sum d_h^2` when `d_h^2 ~ sigma_h^2 chi^2_1`:
/// `sum_h 2 sigma_h^4`, with `sigma_h^2 = E[d_h^2]`.
pub fn variance_of_variance_normal(sigma2: &[f64]) -> f64 {
    debug_assert!(sigma2.iter().all(|s| *s >= 0.0));
    sigma2.iter().map(|s| 2.0 * s * s).sum()
}

/// `Var(sum_r X_r^2) = R^2 sum_h Var(d_h^2)` under the same model.
pub fn replicate_sum_variance_normal(sigma2: &[f64], replicates: usize) -> f64 {
    let r = replicates as f64;
    r * r * variance_of_variance_normal(sigma2)
}
