//! Replicate variance estimation for stratified designs with two primary
//! sampling units per stratum.
//!
//! Every estimator here reduces to the stratum contrasts
//! `d_h = w_h1 y_h1 - w_h2 y_h2`: balanced repeated replication (BRR), Fay's
//! perturbed BRR, the paired jackknife and its Fay variant all collapse to
//! `sum_h d_h^2`. The delete-a-group jackknife (JK1) is provided for designs
//! with one unit per zone.
//!
//! ```
//! use stratrep::{contrasts, estimate_variance, replicate_estimates, replicate_weights,
//!                ws_corrected, SchemeSpec, StratifiedSample};
//!
//! // (w1, y1, w2, y2) per stratum; d = (1, 2)
//! let sample = StratifiedSample::from_pairs(&[(1.0, 3.0, 1.0, 2.0), (1.0, 5.0, 1.0, 3.0)])?;
//! let table = replicate_weights(&sample, &SchemeSpec::fay_brr(0.5)?)?;
//! let est = replicate_estimates(&sample, &table)?;
//! let v = estimate_variance(&est)?;
//! assert!((v.via_replicates - 5.0).abs() < 1e-12);
//! let dof = ws_corrected(&contrasts(&sample))?;
//! assert!((dof.corrected - 41.0 / 17.0).abs() < 1e-12);
//! # Ok::<(), stratrep::Error>(())
//! ```

pub mod commands;
pub mod design;
pub mod dof;
pub mod error;
pub mod estimators;
pub mod hadamard;
pub mod io;
pub mod replication;
pub mod simulation;
pub mod tdist;

pub use design::{
    contrasts, direct_variance, total_estimate, ContrastVector, Observation, StratifiedSample,
    Stratum, ZoneSample,
};
pub use dof::{
    confidence_interval, interval_with_rule, ws_corrected, ws_from_jk_replicates, ws_naive,
    ConfidenceInterval, DofBasis, DofEstimate, DofRule,
};
pub use error::{Error, Result};
pub use estimators::{
    brr_deviation_covariance, estimate_variance, variance_brr, variance_fay_brr, variance_jk1,
    variance_paired_jk, VarianceEstimate, COLLAPSE_TOLERANCE,
};
pub use hadamard::{
    balanced_columns, brr_order, construct, smallest_valid_order, verify, BalancingSigns,
    HadamardMatrix,
};
pub use replication::{
    brr_weights, jk1_weights, paired_jk_weights, replicate_estimates, replicate_mean_check,
    replicate_weights, zone_replicate_estimates, ReplicateEstimates, ReplicateWeightTable,
    SchemeKind, SchemeSpec,
};
pub use simulation::{run_coverage, SigmaProfile, SimulationConfig, SimulationReport};
pub use tdist::{t_cdf, t_quantile};
