//! Monte Carlo harness for the distributional claims behind the estimators:
//! interval coverage under several degrees-of-freedom rules, the
//! `Var(d^2) = 2 Var(d)^2` normal moment identity, the covariance of BRR
//! deviations and the calibration of the corrected degrees of freedom.
//!
//! Each stratum draws two units with unit weights and
//! `y ~ N(mean, sigma_h^2)`, so `d_h ~ N(0, 2 sigma_h^2)` and the expected
//! total is `2 H mean`.
//!
//! # Random streams
//!
//! Repetition `i` of stream `s` uses ChaCha8 keyed by
//! `splitmix64(seed ^ splitmix64(s))` with ChaCha stream id `i`. Streams are
//! independent of the order in which repetitions run, so parallel and
//! sequential runs produce bit-identical reports.

use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{contrasts, total_estimate, Observation, StratifiedSample, Stratum};
use crate::dof::{interval_with_rule, variance_of_variance_normal, ws_corrected, DofRule};
use crate::error::{Error, Result};
use crate::estimators::{brr_deviation_covariance, estimate_variance};
use crate::replication::{replicate_estimates, replicate_weights, SchemeSpec};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const MIN_REPS: usize = 100;

const STREAM_SAMPLE: u64 = 0;
const CHUNK: usize = 4096;

/// Unit-level standard deviations across strata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SigmaProfile {
    /// Every stratum has the same `sigma`.
    Equal { sigma: f64 },
    /// `sigma` rises linearly from `min` (stratum 1) to `max` (stratum H).
    Linear { min: f64, max: f64 },
    /// Stratum 1 has `sigma = ratio`, all others `sigma = 1`.
    OneDominant { ratio: f64 },
    /// One `sigma` per stratum.
    Custom { sigmas: Vec<f64> },
}

impl SigmaProfile {
    pub fn sigmas(&self, strata: usize) -> Vec<f64> {
        match self {
            SigmaProfile::Equal { sigma } => vec![*sigma; strata],
            SigmaProfile::Linear { min, max } => (0..strata)
                .map(|h| {
                    if strata == 1 {
                        *min
                    } else {
                        min + (max - min) * h as f64 / (strata - 1) as f64
                    }
                })
                .collect(),
            SigmaProfile::OneDominant { ratio } => {
                let mut s = vec![1.0; strata];
                if let Some(first) = s.first_mut() {
                    *first = *ratio;
                }
                s
            }
            SigmaProfile::Custom { sigmas } => sigmas.clone(),
        }
    }
}

/// Execution strategy for the repetition loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

fn default_level() -> f64 {
    0.95
}

fn default_mean() -> f64 {
    10.0
}

fn default_scheme() -> SchemeSpec {
    SchemeSpec::brr()
}

fn default_rules() -> Vec<DofRule> {
    DofRule::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Number of strata `H`.
    pub strata: usize,
    pub sigma_profile: SigmaProfile,
    /// Common stratum mean of `y`.
    #[serde(default = "default_mean")]
    pub stratum_mean: f64,
    pub n_reps: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    pub seed: u64,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeSpec,
    #[serde(default = "default_rules")]
    pub dof_rules: Vec<DofRule>,
    /// Cap the corrected degrees of freedom at `H`.
    #[serde(default)]
    pub cap_at_h: bool,
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl SimulationConfig {
    pub fn new(strata: usize, sigma_profile: SigmaProfile, n_reps: usize, seed: u64) -> Self {
        Self {
            strata,
            sigma_profile,
            stratum_mean: default_mean(),
            n_reps,
            level: default_level(),
            seed,
            scheme: default_scheme(),
            dof_rules: default_rules(),
            cap_at_h: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strata == 0 {
            return Err(config_error("strata", "must be at least 1"));
        }
        if self.n_reps < MIN_REPS {
            return Err(config_error(
                "n_reps",
                format!("must be at least {MIN_REPS}, got {}", self.n_reps),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(config_error(
                "level",
                format!("{} is outside (0, 1)", self.level),
            ));
        }
        if !self.stratum_mean.is_finite() {
            return Err(config_error("stratum_mean", "must be finite"));
        }
        if let SigmaProfile::Custom { sigmas } = &self.sigma_profile {
            if sigmas.len() != self.strata {
                return Err(config_error(
                    "sigma_profile.sigmas",
                    format!("has {} entries for {} strata", sigmas.len(), self.strata),
                ));
            }
        }
        if let Some(s) = self
            .sigma_profile
            .sigmas(self.strata)
            .into_iter()
            .find(|s| !(s.is_finite() && *s > 0.0))
        {
            return Err(config_error(
                "sigma_profile",
                format!("every sigma must be positive and finite, got {s}"),
            ));
        }
        if self.scheme.kind() == crate::replication::SchemeKind::Jk1 {
            return Err(config_error(
                "scheme.kind",
                "jk1 needs one unit per zone; simulations use two-PSU strata",
            ));
        }
        if self.dof_rules.is_empty() {
            return Err(config_error("dof_rules", "list at least one rule"));
        }
        Ok(())
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.sigma_profile.sigmas(self.strata)
    }

    /// `Var(d_h) = 2 sigma_h^2` under unit weights.
    pub fn contrast_variances(&self) -> Vec<f64> {
        self.sigmas().iter().map(|s| 2.0 * s * s).collect()
    }

    /// Expectation of the total estimator under the generator.
    pub fn true_total(&self) -> f64 {
        2.0 * self.strata as f64 * self.stratum_mean
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic generator for `(seed, rep_index, stream)`.
pub fn rep_rng(seed: u64, rep_index: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(stream)));
    rng.set_stream(rep_index);
    rng
}

/// `(y_h1, y_h2)` for every stratum of repetition `rep_index`.
fn draw_units(config: &SimulationConfig, sigmas: &[f64], rep_index: usize) -> Vec<(f64, f64)> {
    let mut rng = rep_rng(config.seed, rep_index as u64, STREAM_SAMPLE);
    let mu = config.stratum_mean;
    sigmas
        .iter()
        .map(|s| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (mu + s * a, mu + s * b)
        })
        .collect()
}

fn build_sample(units: &[(f64, f64)]) -> StratifiedSample {
    let strata = units
        .iter()
        .enumerate()
        .map(|(h, &(y1, y2))| {
            Stratum::new(
                (h + 1).to_string(),
                Observation::new(1.0, y1),
                Observation::new(1.0, y2),
            )
            .expect("generated values are finite")
        })
        .collect();
    StratifiedSample::new(strata).expect("at least one stratum")
}

/// Sample for repetition `rep_index`; identical for identical inputs.
pub fn draw_sample(config: &SimulationConfig, rep_index: usize) -> Result<StratifiedSample> {
    config.validate()?;
    Ok(build_sample(&draw_units(
        config,
        &config.sigmas(),
        rep_index,
    )))
}

/// Runs `work` over every repetition and feeds the results to `fold` in
/// repetition order.
fn for_each_rep<T, W, F>(n_reps: usize, exec: Execution, work: W, mut fold: F)
where
    T: Send,
    W: Fn(usize) -> T + Sync,
    F: FnMut(T),
{
    let mut start = 0;
    while start < n_reps {
        let end = (start + CHUNK).min(n_reps);
        let chunk: Vec<T> = match exec {
            Execution::Sequential => (start..end).map(&work).collect(),
            Execution::Parallel => (start..end).into_par_iter().map(&work).collect(),
        };
        chunk.into_iter().for_each(&mut fold);
        start = end;
    }
}

/// Running first and second moments, accumulated in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Population variance (divisor `n`).
    fn variance(&self) -> f64 {
        let m = self.mean();
        (self.sum_sq / self.n as f64 - m * m).max(0.0)
    }

    fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    fn se(&self) -> f64 {
        self.sd() / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleCoverage {
    pub rule: DofRule,
    pub covered: usize,
    pub missed: usize,
    /// Repetitions without degrees of freedom (all contrasts zero); counted
    /// as missed.
    pub degenerate: usize,
    pub coverage: f64,
    /// `sqrt(p (1 - p) / n)`.
    pub mc_se: f64,
    pub mean_dof: Option<f64>,
    pub sd_dof: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSummary {
    pub mean: f64,
    /// `sum_h Var(d_h)`, the expectation of the variance estimator.
    pub expected: f64,
    pub empirical_variance: f64,
    /// `sum_h 2 Var(d_h)^2`.
    pub normal_theory_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceComparison {
    /// `Cov(X_r, X_s)` from `sum_h alpha_rh alpha_sh Var(d_h)`.
    pub theoretical: Vec<Vec<f64>>,
    pub empirical: Vec<Vec<f64>>,
    pub standard_error: Vec<Vec<f64>>,
    /// Largest `|empirical - theoretical| / standard_error`.
    pub max_abs_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema_version: u32,
    pub config: SimulationConfig,
    pub true_total: f64,
    pub n_reps: usize,
    pub coverage: Vec<RuleCoverage>,
    pub variance: VarianceSummary,
    /// BRR-family schemes only. Deviations are divided by the Fay factor.
    pub deviation_covariance: Option<CovarianceComparison>,
    /// Wall-clock time; not serialized so report files stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SimulationReport {
    pub fn rule(&self, rule: DofRule) -> Option<&RuleCoverage> {
        self.coverage.iter().find(|c| c.rule == rule)
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} reps, H={}, scheme={}, level={}\n",
            self.n_reps, self.config.strata, self.config.scheme, self.config.level
        );
        for c in &self.coverage {
            out.push_str(&format!(
                "  {:<10} coverage {:.4} (se {:.4})",
                c.rule.as_str(),
                c.coverage,
                c.mc_se
            ));
            if let Some(m) = c.mean_dof {
                out.push_str(&format!("  mean dof {m:.4}"));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "  variance: mean {:.6} (expected {:.6}), var {:.6} (normal theory {:.6})\n",
            self.variance.mean,
            self.variance.expected,
            self.variance.empirical_variance,
            self.variance.normal_theory_variance
        ));
        if let Some(cov) = &self.deviation_covariance {
            out.push_str(&format!(
                "  deviation covariance: max |z| = {:.3}\n",
                cov.max_abs_z
            ));
        }
        out.push_str(&format!("  elapsed {:.3}s", self.elapsed.as_secs_f64()));
        out
    }
}

struct RepOutcome {
    variance: f64,
    dof: Option<(f64, f64)>,
    covered: Vec<bool>,
    dof_used: Vec<Option<f64>>,
    deviations: Option<Vec<f64>>,
}

/// Accumulates `E[X_r X_s]` and `E[(X_r X_s)^2]` for every replicate pair.
struct CovarianceAccumulator {
    n: usize,
    sum: Vec<f64>,
    cross: Array2<f64>,
    cross_sq: Array2<f64>,
}

impl CovarianceAccumulator {
    fn new(r: usize) -> Self {
        Self {
            n: 0,
            sum: vec![0.0; r],
            cross: Array2::zeros((r, r)),
            cross_sq: Array2::zeros((r, r)),
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        for (a, xa) in x.iter().enumerate() {
            self.sum[a] += xa;
            for (b, xb) in x.iter().enumerate() {
                let p = xa * xb;
                self.cross[[a, b]] += p;
                self.cross_sq[[a, b]] += p * p;
            }
        }
    }

    fn compare(&self, theoretical: &Array2<f64>) -> CovarianceComparison {
        let n = self.n as f64;
        let r = self.sum.len();
        let mut empirical = vec![vec![0.0; r]; r];
        let mut se = vec![vec![0.0; r]; r];
        let mut max_abs_z = 0.0_f64;
        for a in 0..r {
            for b in 0..r {
                let m = self.cross[[a, b]] / n;
                let cov = m - (self.sum[a] / n) * (self.sum[b] / n);
                let var_prod = (self.cross_sq[[a, b]] / n - m * m).max(0.0);
                let s = (var_prod / n).sqrt();
                empirical[a][b] = cov;
                se[a][b] = s;
                let diff = cov - theoretical[[a, b]];
                if s > 0.0 {
                    max_abs_z = max_abs_z.max(diff.abs() / s);
                } else if diff.abs() > 1e-12 {
                    max_abs_z = f64::INFINITY;
                }
            }
        }
        CovarianceComparison {
            theoretical: theoretical.outer_iter().map(|row| row.to_vec()).collect(),
            empirical,
            standard_error: se,
            max_abs_z,
        }
    }
}

/// Coverage run with the default (parallel) execution.
pub fn run_coverage(config: &SimulationConfig) -> Result<SimulationReport> {
    run_coverage_with(config, Execution::default())
}

pub fn run_coverage_with(config: &SimulationConfig, exec: Execution) -> Result<SimulationReport> {
    config.validate()?;
    let started = Instant::now();
    let sigmas = config.sigmas();
    let truth = config.true_total();
    let rules = config.dof_rules.clone();

    // Design weights are fixed across repetitions, so one table serves all.
    let template = build_sample(&draw_units(config, &sigmas, 0));
    let table = replicate_weights(&template, &config.scheme)?;
    let signs = table.balancing_signs().cloned();
    let eps = config.scheme.epsilon();

    let work = |rep: usize| -> Result<RepOutcome> {
        let sample = build_sample(&draw_units(config, &sigmas, rep));
        let est = replicate_estimates(&sample, &table)?;
        let variance = estimate_variance(&est)?.canonical();
        let total = total_estimate(&sample);
        let dof = ws_corrected(&contrasts(&sample)).ok();
        let mut covered = Vec::with_capacity(rules.len());
        let mut dof_used = Vec::with_capacity(rules.len());
        for &rule in &rules {
            match &dof {
                Some(d) => {
                    let ci = interval_with_rule(
                        total,
                        variance,
                        d,
                        config.level,
                        rule,
                        config.cap_at_h,
                    )?;
                    covered.push(ci.covers(truth));
                    dof_used.push(ci.dof_used);
                }
                None => {
                    covered.push(false);
                    dof_used.push(None);
                }
            }
        }
        let deviations = signs
            .as_ref()
            .map(|_| est.deviations().iter().map(|x| x / eps).collect());
        Ok(RepOutcome {
            variance,
            dof: dof.map(|d| (d.naive, d.corrected)),
            covered,
            dof_used,
            deviations,
        })
    };

    let mut hits = vec![0usize; rules.len()];
    let mut degenerate = 0usize;
    let mut dof_moments = vec![Moments::default(); rules.len()];
    let mut variance = Moments::default();
    let mut cov_acc = signs
        .as_ref()
        .map(|s| CovarianceAccumulator::new(s.n_replicates()));
    let mut failure = None;

    for_each_rep(config.n_reps, exec, work, |outcome| {
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => {
                failure.get_or_insert(e);
                return;
            }
        };
        variance.push(outcome.variance);
        if outcome.dof.is_none() {
            degenerate += 1;
        }
        for (k, (&c, d)) in outcome.covered.iter().zip(&outcome.dof_used).enumerate() {
            hits[k] += c as usize;
            if let Some(d) = d {
                dof_moments[k].push(*d);
            }
        }
        if let (Some(acc), Some(x)) = (cov_acc.as_mut(), outcome.deviations.as_ref()) {
            acc.push(x);
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let n = config.n_reps as f64;
    let coverage = rules
        .iter()
        .enumerate()
        .map(|(k, &rule)| {
            let p = hits[k] as f64 / n;
            let m = &dof_moments[k];
            RuleCoverage {
                rule,
                covered: hits[k],
                missed: config.n_reps - hits[k],
                degenerate,
                coverage: p,
                mc_se: (p * (1.0 - p) / n).sqrt(),
                mean_dof: (m.n > 0).then(|| m.mean()),
                sd_dof: (m.n > 0).then(|| m.sd()),
            }
        })
        .collect();

    let var_d = config.contrast_variances();
    let deviation_covariance = match (cov_acc, signs) {
        (Some(acc), Some(s)) => {
            let theory = brr_deviation_covariance(&var_d, s.signs())?;
            Some(acc.compare(&theory))
        }
        _ => None,
    };

    Ok(SimulationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: config.clone(),
        true_total: truth,
        n_reps: config.n_reps,
        coverage,
        variance: VarianceSummary {
            mean: variance.mean(),
            expected: var_d.iter().sum(),
            empirical_variance: variance.variance(),
            normal_theory_variance: variance_of_variance_normal(&var_d),
        },
        deviation_covariance,
        elapsed: started.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumMoments {
    pub sigma: f64,
    /// `2 sigma^2`.
    pub var_d_theory: f64,
    pub mean_d: f64,
    pub se_mean_d: f64,
    pub var_d: f64,
    pub var_d2: f64,
    /// `2 Var(d)^2` with the theoretical `Var(d)`.
    pub var_d2_theory: f64,
    /// `Var(d^2) / Var(d)^2` from the draws; 2 for normal contrasts.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2Check {
    pub n_reps: usize,
    pub strata: Vec<StratumMoments>,
}

/// Empirical moments of `d_h` and `d_h^2` over `n_reps` draws per stratum.
pub fn check_chi2_approx(config: &SimulationConfig, exec: Execution) -> Result<Chi2Check> {
    config.validate()?;
    let sigmas = config.sigmas();
    let h = sigmas.len();
    // Per stratum: sums of d, d^2, d^4.
    let mut acc = vec![[0.0f64; 3]; h];
    let work = |rep: usize| -> Vec<f64> {
        draw_units(config, &sigmas, rep)
            .into_iter()
            .map(|(a, b)| a - b)
            .collect()
    };
    for_each_rep(config.n_reps, exec, work, |d| {
        for (a, x) in acc.iter_mut().zip(d) {
            let x2 = x * x;
            a[0] += x;
            a[1] += x2;
            a[2] += x2 * x2;
        }
    });
    let n = config.n_reps as f64;
    let strata = sigmas
        .iter()
        .zip(&acc)
        .map(|(&sigma, a)| {
            let mean = a[0] / n;
            let m2 = a[1] / n;
            let m4 = a[2] / n;
            let var_d = m2 - mean * mean;
            let var_d2 = m4 - m2 * m2;
            let var_d_theory = 2.0 * sigma * sigma;
            StratumMoments {
                sigma,
                var_d_theory,
                mean_d: mean,
                se_mean_d: (var_d / n).sqrt(),
                var_d,
                var_d2,
                var_d2_theory: 2.0 * var_d_theory * var_d_theory,
                ratio: var_d2 / (var_d * var_d),
            }
        })
        .collect();
    Ok(Chi2Check {
        n_reps: config.n_reps,
        strata,
    })
}

/// Compares the Monte Carlo covariance of BRR deviations with its closed form.
pub fn check_deviation_covariance(
    config: &SimulationConfig,
    exec: Execution,
) -> Result<CovarianceComparison> {
    if !config.scheme.kind().is_brr_family() {
        return Err(Error::SchemeMismatch {
            scheme: config.scheme.to_string(),
            reason: "deviation covariance needs a BRR-family scheme".into(),
        });
    }
    let mut only_variance = config.clone();
    only_variance.dof_rules = vec![DofRule::Normal];
    run_coverage_with(&only_variance, exec)?
        .deviation_covariance
        .ok_or_else(|| Error::SchemeMismatch {
            scheme: config.scheme.to_string(),
            reason: "no balancing signs".into(),
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofCalibration {
    pub n_reps: usize,
    pub strata: usize,
    pub mean_naive: f64,
    pub sd_naive: f64,
    pub se_naive: f64,
    pub mean_corrected: f64,
    pub sd_corrected: f64,
    pub se_corrected: f64,
    pub degenerate: usize,
}

/// Distribution of the naive and corrected degrees of freedom across draws.
pub fn check_dof_calibration(config: &SimulationConfig, exec: Execution) -> Result<DofCalibration> {
    config.validate()?;
    let sigmas = config.sigmas();
    let work = |rep: usize| {
        let d: Vec<f64> = draw_units(config, &sigmas, rep)
            .into_iter()
            .map(|(a, b)| a - b)
            .collect();
        ws_corrected(&d.into()).ok().map(|e| (e.naive, e.corrected))
    };
    let (mut naive, mut corrected, mut degenerate) = (Moments::default(), Moments::default(), 0);
    for_each_rep(config.n_reps, exec, work, |r| match r {
        Some((a, b)) => {
            naive.push(a);
            corrected.push(b);
        }
        None => degenerate += 1,
    });
    Ok(DofCalibration {
        n_reps: config.n_reps,
        strata: config.strata,
        mean_naive: naive.mean(),
        sd_naive: naive.sd(),
        se_naive: naive.se(),
        mean_corrected: corrected.mean(),
        sd_corrected: corrected.sd(),
        se_corrected: corrected.se(),
        degenerate,
    })
}
