//! Replicate weight tables and replicate totals.
//!
//! Weight columns are laid out in `(stratum, unit)` order, matching
//! [`StratifiedSample::observations`]. Tables are materialized so they can be
//! exported for use in other survey software.
//!
//! Conventions:
//!
//! - BRR family: replicate `r` gives unit `i` of stratum `h` the weight
//!   `w_hi * (1 + alpha_rh * delta_i * eps)` with `delta_1 = +1`,
//!   `delta_2 = -1`. With `eps = 1` this is the classic `{0, 2w}` scheme.
//! - Paired jackknife: replicates come in pairs per stratum. Replicate
//!   `(h, 1)` up-weights unit 1, so its deviation is `+eps * d_h`;
//!   replicate `(h, 2)` up-weights unit 2 and deviates by `-eps * d_h`.
//! - JK1: replicate `i` drops zone `i` and scales the others by `G/(G-1)`.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{contrasts, total_estimate, ContrastVector, StratifiedSample, ZoneSample};
use crate::error::{Error, Result};
use crate::hadamard::{self, BalancingSigns};

/// Perturbation factor used by the Fay schemes when none is given.
pub const DEFAULT_FAY_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Brr,
    FayBrr,
    PairedJk,
    FayJk,
    Jk1,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Brr,
        SchemeKind::FayBrr,
        SchemeKind::PairedJk,
        SchemeKind::FayJk,
        SchemeKind::Jk1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Brr => "brr",
            SchemeKind::FayBrr => "fay-brr",
            SchemeKind::PairedJk => "paired-jk",
            SchemeKind::FayJk => "fay-jk",
            SchemeKind::Jk1 => "jk1",
        }
    }

    pub fn is_brr_family(self) -> bool {
        matches!(self, SchemeKind::Brr | SchemeKind::FayBrr)
    }

    pub fn is_paired_jk_family(self) -> bool {
        matches!(self, SchemeKind::PairedJk | SchemeKind::FayJk)
    }

    pub fn is_fay(self) -> bool {
        matches!(self, SchemeKind::FayBrr | SchemeKind::FayJk)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| Error::SchemeMismatch {
                scheme: s.to_string(),
                reason: "unknown scheme; expected one of brr, fay-brr, paired-jk, fay-jk, jk1"
                    .into(),
            })
    }
}

/// A validated replicate scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme", into = "RawScheme")]
pub struct SchemeSpec {
    kind: SchemeKind,
    epsilon: f64,
    hadamard_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    kind: SchemeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hadamard_order: Option<usize>,
}

impl TryFrom<RawScheme> for SchemeSpec {
    type Error = Error;

    fn try_from(raw: RawScheme) -> Result<Self> {
        SchemeSpec::new(raw.kind, raw.epsilon, raw.hadamard_order)
    }
}

impl From<SchemeSpec> for RawScheme {
    fn from(s: SchemeSpec) -> Self {
        RawScheme {
            kind: s.kind,
            epsilon: Some(s.epsilon),
            hadamard_order: s.hadamard_order,
        }
    }
}

impl SchemeSpec {
    /// `epsilon` defaults to 1 for the unperturbed schemes (where it may not
    /// be anything else) and to [`DEFAULT_FAY_EPSILON`] for the Fay schemes.
    /// A Hadamard order may only be given for the BRR family.
    pub fn new(
        kind: SchemeKind,
        epsilon: Option<f64>,
        hadamard_order: Option<usize>,
    ) -> Result<Self> {
        let epsilon = match (kind.is_fay(), epsilon) {
            (true, e) => e.unwrap_or(DEFAULT_FAY_EPSILON),
            (false, None) => 1.0,
            (false, Some(1.0)) => 1.0,
            (false, Some(e)) => {
                return Err(Error::SchemeMismatch {
                    scheme: kind.to_string(),
                    reason: format!("perturbation factor is fixed at 1, got {e}"),
                })
            }
        };
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        if let Some(order) = hadamard_order {
            if !kind.is_brr_family() {
                return Err(Error::SchemeMismatch {
                    scheme: kind.to_string(),
                    reason: "a Hadamard order only applies to brr and fay-brr".into(),
                });
            }
            if !hadamard::is_constructible(order) {
                return Err(Error::UnconstructibleOrder(order));
            }
        }
        Ok(Self {
            kind,
            epsilon,
            hadamard_order,
        })
    }

    pub fn brr() -> Self {
        Self::new(SchemeKind::Brr, None, None).expect("valid")
    }

    pub fn fay_brr(epsilon: f64) -> Result<Self> {
        Self::new(SchemeKind::FayBrr, Some(epsilon), None)
    }

    pub fn paired_jk() -> Self {
        Self::new(SchemeKind::PairedJk, None, None).expect("valid")
    }

    pub fn fay_jk(epsilon: f64) -> Result<Self> {
        Self::new(SchemeKind::FayJk, Some(epsilon), None)
    }

    pub fn jk1() -> Self {
        Self::new(SchemeKind::Jk1, None, None).expect("valid")
    }

    pub fn with_hadamard_order(self, order: usize) -> Result<Self> {
        Self::new(self.kind, Some(self.epsilon), Some(order))
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn hadamard_order(&self) -> Option<usize> {
        self.hadamard_order
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if self.kind.is_fay() {
            write!(f, "(eps={})", self.epsilon)?;
        }
        Ok(())
    }
}

/// How each replicate was formed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ReplicateDesign {
    /// BRR family: the `alpha_rh` signs, one row per replicate.
    Balanced { signs: BalancingSigns },
    /// Paired jackknife: `(stratum, up-weighted unit)` per replicate, zero-based
    /// stratum index and unit in `{1, 2}`.
    Paired { replicates: Vec<(usize, u8)> },
    /// JK1: the zone dropped by each replicate.
    DeleteZone { dropped: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateWeightTable {
    scheme: SchemeSpec,
    full_weights: Vec<f64>,
    /// `[replicate, observation]`.
    weights: Array2<f64>,
    design: ReplicateDesign,
}

impl ReplicateWeightTable {
    pub fn scheme(&self) -> &SchemeSpec {
        &self.scheme
    }

    pub fn n_replicates(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_observations(&self) -> usize {
        self.weights.ncols()
    }

    pub fn full_weights(&self) -> &[f64] {
        &self.full_weights
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn weight(&self, replicate: usize, observation: usize) -> f64 {
        self.weights[[replicate, observation]]
    }

    pub fn design(&self) -> &ReplicateDesign {
        &self.design
    }

    /// BRR signs, if this is a BRR-family table.
    pub fn balancing_signs(&self) -> Option<&BalancingSigns> {
        match &self.design {
            ReplicateDesign::Balanced { signs } => Some(signs),
            _ => None,
        }
    }

    /// Order of the Hadamard matrix behind a BRR-family table.
    pub fn hadamard_order(&self) -> Option<usize> {
        self.balancing_signs().map(BalancingSigns::n_replicates)
    }

    fn replicate_total(&self, r: usize, ys: &[f64]) -> f64 {
        self.weights.row(r).iter().zip(ys).map(|(w, y)| w * y).sum()
    }
}

fn sample_weights(sample: &StratifiedSample) -> Vec<f64> {
    sample.observations().map(|o| o.weight).collect()
}

/// BRR and Fay-BRR weights. When the scheme carries no Hadamard order the
/// smallest order with enough zero-sum columns is used.
pub fn brr_weights(sample: &StratifiedSample, spec: &SchemeSpec) -> Result<ReplicateWeightTable> {
    if !spec.kind.is_brr_family() {
        return Err(Error::SchemeMismatch {
            scheme: spec.kind.to_string(),
            reason: "brr_weights needs brr or fay-brr".into(),
        });
    }
    let h = sample.n_strata();
    let order = match spec.hadamard_order {
        Some(order) => order,
        None => hadamard::brr_order(h)?,
    };
    let matrix = hadamard::construct(order)?;
    let signs = hadamard::balanced_columns(&matrix, h)?;
    let eps = spec.epsilon;
    let full_weights = sample_weights(sample);
    let weights = Array2::from_shape_fn((order, 2 * h), |(r, j)| {
        let alpha = signs.sign(r, j / 2) as f64;
        let delta = if j % 2 == 0 { 1.0 } else { -1.0 };
        full_weights[j] * (1.0 + alpha * delta * eps)
    });
    Ok(ReplicateWeightTable {
        scheme: *spec,
        full_weights,
        weights,
        design: ReplicateDesign::Balanced { signs },
    })
}

/// Paired (and Fay) jackknife weights: `2H` replicates, ordered
/// `(1,1), (1,2), (2,1), ...`.
pub fn paired_jk_weights(
    sample: &StratifiedSample,
    spec: &SchemeSpec,
) -> Result<ReplicateWeightTable> {
    if !spec.kind.is_paired_jk_family() {
        return Err(Error::SchemeMismatch {
            scheme: spec.kind.to_string(),
            reason: "paired_jk_weights needs paired-jk or fay-jk".into(),
        });
    }
    let h = sample.n_strata();
    let eps = spec.epsilon;
    let full_weights = sample_weights(sample);
    let weights = Array2::from_shape_fn((2 * h, 2 * h), |(r, j)| {
        let w = full_weights[j];
        if r / 2 != j / 2 {
            return w;
        }
        // Replicate (h, 1) scales unit 1 by 1 + eps and unit 2 by 1 - eps.
        let up = r % 2 == j % 2;
        if up {
            w * (1.0 + eps)
        } else {
            w * (1.0 - eps)
        }
    });
    let replicates = (0..h).flat_map(|s| [(s, 1u8), (s, 2u8)]).collect();
    Ok(ReplicateWeightTable {
        scheme: *spec,
        full_weights,
        weights,
        design: ReplicateDesign::Paired { replicates },
    })
}

/// Delete-a-group jackknife weights for one unit per zone.
pub fn jk1_weights(zones: &ZoneSample) -> Result<ReplicateWeightTable> {
    let g = zones.n_zones();
    if g < 2 {
        return Err(Error::TooFewZones(g));
    }
    let full_weights: Vec<f64> = zones.zones().iter().map(|(_, o)| o.weight).collect();
    let scale = g as f64 / (g - 1) as f64;
    let weights = Array2::from_shape_fn(
        (g, g),
        |(r, j)| {
            if r == j {
                0.0
            } else {
                full_weights[j] * scale
            }
        },
    );
    Ok(ReplicateWeightTable {
        scheme: SchemeSpec::jk1(),
        full_weights,
        weights,
        design: ReplicateDesign::DeleteZone {
            dropped: (0..g).collect(),
        },
    })
}

/// Builds the replicate table for any paired-design scheme.
pub fn replicate_weights(
    sample: &StratifiedSample,
    spec: &SchemeSpec,
) -> Result<ReplicateWeightTable> {
    match spec.kind {
        SchemeKind::Brr | SchemeKind::FayBrr => brr_weights(sample, spec),
        SchemeKind::PairedJk | SchemeKind::FayJk => paired_jk_weights(sample, spec),
        SchemeKind::Jk1 => Err(Error::SchemeMismatch {
            scheme: spec.kind.to_string(),
            reason: "jk1 works on one unit per zone; use jk1_weights with a ZoneSample".into(),
        }),
    }
}

/// Full-sample total, replicate totals and replicate deviations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateEstimates {
    scheme: SchemeSpec,
    t_full: f64,
    t_rep: Vec<f64>,
    deviations: Vec<f64>,
    /// Present for two-PSU designs.
    contrasts: Option<ContrastVector>,
}

impl ReplicateEstimates {
    pub fn scheme(&self) -> &SchemeSpec {
        &self.scheme
    }

    pub fn t_full(&self) -> f64 {
        self.t_full
    }

    pub fn t_rep(&self) -> &[f64] {
        &self.t_rep
    }

    /// `T_r - T` for each replicate.
    pub fn deviations(&self) -> &[f64] {
        &self.deviations
    }

    pub fn n_replicates(&self) -> usize {
        self.t_rep.len()
    }

    pub fn contrasts(&self) -> Option<&ContrastVector> {
        self.contrasts.as_ref()
    }

    fn from_totals(
        scheme: SchemeSpec,
        t_full: f64,
        t_rep: Vec<f64>,
        contrasts: Option<ContrastVector>,
    ) -> Self {
        let deviations = t_rep.iter().map(|t| t - t_full).collect();
        Self {
            scheme,
            t_full,
            t_rep,
            deviations,
            contrasts,
        }
    }
}

fn check_paired_table(sample: &StratifiedSample, table: &ReplicateWeightTable) -> Result<Vec<f64>> {
    if table.scheme.kind == SchemeKind::Jk1 {
        return Err(Error::SchemeMismatch {
            scheme: table.scheme.kind.to_string(),
            reason: "a zone table cannot be applied to a two-PSU sample".into(),
        });
    }
    if table.n_observations() != sample.n_observations() {
        return Err(Error::DimensionMismatch(format!(
            "table has {} observation columns, sample has {} observations",
            table.n_observations(),
            sample.n_observations()
        )));
    }
    Ok(sample.observations().map(|o| o.y).collect())
}

/// `T_r = sum_j w_rj y_j` for every replicate, summed in observation order.
pub fn replicate_estimates(
    sample: &StratifiedSample,
    table: &ReplicateWeightTable,
) -> Result<ReplicateEstimates> {
    let ys = check_paired_table(sample, table)?;
    let t_rep = (0..table.n_replicates())
        .map(|r| table.replicate_total(r, &ys))
        .collect();
    Ok(ReplicateEstimates::from_totals(
        table.scheme,
        total_estimate(sample),
        t_rep,
        Some(contrasts(sample)),
    ))
}

/// Same as [`replicate_estimates`], evaluating replicates on the rayon pool.
/// Each replicate keeps its summation order, so the result is identical.
pub fn par_replicate_estimates(
    sample: &StratifiedSample,
    table: &ReplicateWeightTable,
) -> Result<ReplicateEstimates> {
    let ys = check_paired_table(sample, table)?;
    let t_rep = (0..table.n_replicates())
        .into_par_iter()
        .map(|r| table.replicate_total(r, &ys))
        .collect();
    Ok(ReplicateEstimates::from_totals(
        table.scheme,
        total_estimate(sample),
        t_rep,
        Some(contrasts(sample)),
    ))
}

pub fn zone_replicate_estimates(
    zones: &ZoneSample,
    table: &ReplicateWeightTable,
) -> Result<ReplicateEstimates> {
    if table.scheme.kind != SchemeKind::Jk1 || table.n_observations() != zones.n_zones() {
        return Err(Error::DimensionMismatch(format!(
            "{} table with {} columns does not fit {} zones",
            table.scheme.kind,
            table.n_observations(),
            zones.n_zones()
        )));
    }
    let ys: Vec<f64> = zones.zones().iter().map(|(_, o)| o.y).collect();
    let t_rep = (0..table.n_replicates())
        .map(|r| table.replicate_total(r, &ys))
        .collect();
    Ok(ReplicateEstimates::from_totals(
        table.scheme,
        zones.total(),
        t_rep,
        None,
    ))
}

/// `(1/R) sum_r T_r - T`. Zero up to rounding for balanced BRR designs, and
/// for the paired jackknife, whose deviations cancel within each stratum.
pub fn replicate_mean_check(est: &ReplicateEstimates) -> f64 {
    let r = est.t_rep.len() as f64;
    est.t_rep.iter().sum::<f64>() / r - est.t_full
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample(pairs: &[(f64, f64, f64, f64)]) -> StratifiedSample {
        StratifiedSample::from_pairs(pairs).unwrap()
    }

    /// First replicate with `alpha = +1` / `-1` in stratum 0.
    fn replicate_with_sign(table: &ReplicateWeightTable, sign: i8) -> usize {
        let signs = table.balancing_signs().unwrap();
        (0..signs.n_replicates())
            .find(|&r| signs.sign(r, 0) == sign)
            .unwrap()
    }

    #[test]
    fn brr_doubles_selected_unit() {
        let s = sample(&[(3.0, 1.0, 5.0, 1.0)]);
        let t = brr_weights(&s, &SchemeSpec::brr()).unwrap();
        let r = replicate_with_sign(&t, 1);
        assert_eq!((t.weight(r, 0), t.weight(r, 1)), (6.0, 0.0));
        let r = replicate_with_sign(&t, -1);
        assert_eq!((t.weight(r, 0), t.weight(r, 1)), (0.0, 10.0));
    }

    #[test]
    fn fay_brr_weights_by_hand() {
        let s = sample(&[(1.0, 1.0, 1.0, 1.0)]);
        let t = brr_weights(&s, &SchemeSpec::fay_brr(0.5).unwrap()).unwrap();
        let r = replicate_with_sign(&t, 1);
        assert_eq!((t.weight(r, 0), t.weight(r, 1)), (1.5, 0.5));

        let s = sample(&[(2.0, 1.0, 2.0, 1.0)]);
        let t = brr_weights(&s, &SchemeSpec::fay_brr(0.3).unwrap()).unwrap();
        let r = replicate_with_sign(&t, -1);
        assert_abs_diff_eq!(t.weight(r, 0), 1.4, epsilon = 1e-15);
        assert_abs_diff_eq!(t.weight(r, 1), 2.6, epsilon = 1e-15);
    }

    #[test]
    fn brr_replicate_counts() {
        let s = sample(&[(1.0, 1.0, 1.0, 2.0); 3]);
        assert_eq!(
            brr_weights(&s, &SchemeSpec::brr()).unwrap().n_replicates(),
            4
        );
        let spec = SchemeSpec::brr().with_hadamard_order(12).unwrap();
        assert_eq!(brr_weights(&s, &spec).unwrap().n_replicates(), 12);
        let spec = SchemeSpec::brr().with_hadamard_order(2).unwrap();
        assert!(matches!(
            brr_weights(&s, &spec),
            Err(Error::InsufficientBalancedColumns { .. })
        ));
    }

    #[test]
    fn paired_jk_delete_and_double() {
        let s = sample(&[(1.0, 1.0, 1.0, 1.0), (3.0, 1.0, 5.0, 1.0)]);
        let t = paired_jk_weights(&s, &SchemeSpec::paired_jk()).unwrap();
        assert_eq!(t.n_replicates(), 4);
        // Replicate (2, 2) deletes unit 1 of stratum 2.
        assert_eq!(t.weights().row(3).to_vec(), vec![1.0, 1.0, 0.0, 10.0]);
        assert_eq!(t.weights().row(2).to_vec(), vec![1.0, 1.0, 6.0, 0.0]);
    }

    #[test]
    fn fay_jk_weights_by_hand() {
        let s = sample(&[(2.0, 1.0, 4.0, 1.0)]);
        let t = paired_jk_weights(&s, &SchemeSpec::fay_jk(0.5).unwrap()).unwrap();
        assert_eq!(t.weights().row(0).to_vec(), vec![3.0, 2.0]);
        assert_eq!(t.weights().row(1).to_vec(), vec![1.0, 6.0]);
    }

    #[test]
    fn jk1_rescales_survivors() {
        let z = ZoneSample::from_units(&[(1.0, 1.0), (1.0, 1.0)]).unwrap();
        let t = jk1_weights(&z).unwrap();
        assert_eq!(t.weights().row(0).to_vec(), vec![0.0, 2.0]);

        let z = ZoneSample::from_units(&[(3.0, 1.0); 4]).unwrap();
        let t = jk1_weights(&z).unwrap();
        assert_eq!(t.n_replicates(), 4);
        assert_eq!(t.weights().row(1).to_vec(), vec![4.0, 0.0, 4.0, 4.0]);
    }

    #[test]
    fn single_stratum_brr_deviations() {
        // d = 2*4 - 1*3 = 5
        let s = sample(&[(2.0, 4.0, 1.0, 3.0)]);
        let t = brr_weights(&s, &SchemeSpec::brr()).unwrap();
        let est = replicate_estimates(&s, &t).unwrap();
        let signs = t.balancing_signs().unwrap();
        for (r, x) in est.deviations().iter().enumerate() {
            assert_eq!(*x, 5.0 * signs.sign(r, 0) as f64);
        }
    }

    #[test]
    fn fay_jk_deviations_are_half_contrast() {
        let s = sample(&[(1.0, 3.0, 1.0, 2.0), (2.0, 1.0, 1.0, 4.0)]);
        let t = paired_jk_weights(&s, &SchemeSpec::fay_jk(0.5).unwrap()).unwrap();
        let est = replicate_estimates(&s, &t).unwrap();
        assert_eq!(est.deviations(), &[0.5, -0.5, -1.0, 1.0]);
    }

    #[test]
    fn zero_outcomes_zero_deviations() {
        let s = sample(&[(1.5, 0.0, 2.5, 0.0); 5]);
        for spec in [
            SchemeSpec::brr(),
            SchemeSpec::fay_brr(0.3).unwrap(),
            SchemeSpec::paired_jk(),
            SchemeSpec::fay_jk(0.7).unwrap(),
        ] {
            let t = replicate_weights(&s, &spec).unwrap();
            let est = replicate_estimates(&s, &t).unwrap();
            assert!(est.deviations().iter().all(|&x| x == 0.0), "{spec}");
        }
    }

    #[test]
    fn replicate_mean_single_stratum_is_exact() {
        let s = sample(&[(1.0, 7.0, 1.0, 2.0)]);
        let t = brr_weights(&s, &SchemeSpec::brr().with_hadamard_order(4).unwrap()).unwrap();
        let est = replicate_estimates(&s, &t).unwrap();
        assert_eq!(replicate_mean_check(&est), 0.0);
    }

    #[test]
    fn mismatched_table_is_rejected() {
        let s1 = sample(&[(1.0, 1.0, 1.0, 2.0)]);
        let s2 = sample(&[(1.0, 1.0, 1.0, 2.0); 2]);
        let t = paired_jk_weights(&s1, &SchemeSpec::paired_jk()).unwrap();
        assert!(matches!(
            replicate_estimates(&s2, &t),
            Err(Error::DimensionMismatch(_))
        ));
        let z = ZoneSample::from_units(&[(1.0, 1.0), (1.0, 2.0)]).unwrap();
        let tz = jk1_weights(&z).unwrap();
        assert!(replicate_estimates(&s1, &tz).is_err());
        assert!(zone_replicate_estimates(&z, &t).is_err());
    }

    #[test]
    fn scheme_validation() {
        assert!(matches!(
            SchemeSpec::fay_brr(0.0),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            SchemeSpec::fay_jk(1.5),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(SchemeSpec::new(SchemeKind::Brr, Some(0.5), None).is_err());
        assert!(SchemeSpec::new(SchemeKind::PairedJk, None, Some(4)).is_err());
        assert!(matches!(
            SchemeSpec::new(SchemeKind::Brr, None, Some(6)),
            Err(Error::UnconstructibleOrder(6))
        ));
        assert_eq!(
            SchemeSpec::new(SchemeKind::FayBrr, None, None)
                .unwrap()
                .epsilon(),
            0.5
        );
        assert_eq!("Fay_BRR".parse::<SchemeKind>().unwrap(), SchemeKind::FayBrr);
        assert!("bootstrap".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn scheme_serde_validates() {
        let ok: SchemeSpec = serde_json::from_str(r#"{"kind":"fay-jk","epsilon":0.3}"#).unwrap();
        assert_eq!(ok, SchemeSpec::fay_jk(0.3).unwrap());
        assert!(serde_json::from_str::<SchemeSpec>(r#"{"kind":"fay-jk","epsilon":2}"#).is_err());
        let back: SchemeSpec = serde_json::from_str(&serde_json::to_string(&ok).unwrap()).unwrap();
        assert_eq!(back, ok);
    }

    #[test]
    fn parallel_matches_sequential() {
        let pairs: Vec<_> = (0..40)
            .map(|h| {
                let h = h as f64;
                (
                    1.0 + h * 0.1,
                    (h * 1.7).sin() * 9.0,
                    2.0 - h * 0.01,
                    (h * 0.3).cos(),
                )
            })
            .collect();
        let s = sample(&pairs);
        let t = brr_weights(&s, &SchemeSpec::fay_brr(0.5).unwrap()).unwrap();
        assert_eq!(
            replicate_estimates(&s, &t).unwrap(),
            par_replicate_estimates(&s, &t).unwrap()
        );
    }
}
