//! Stratified two-PSU design: the sample model, the full-sample total and
//! the within-stratum contrasts `d_h = w_h1 * y_h1 - w_h2 * y_h2`.
//!
//! Every variance estimator in this crate reduces to a function of the
//! contrasts. The sign of each `d_h` depends on which observation is unit 1;
//! input order defines that and is preserved. Only `d_h^2` enters the
//! published estimators, so the sign never changes a reported number.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One weighted observation (a PSU-level estimate and its design weight).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub weight: f64,
    pub y: f64,
}

impl Observation {
    pub fn new(weight: f64, y: f64) -> Self {
        Self { weight, y }
    }

    #[inline]
    pub fn weighted(&self) -> f64 {
        self.weight * self.y
    }
}

/// A stratum with exactly two PSUs, in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    label: String,
    units: [Observation; 2],
}

impl Stratum {
    pub fn new(label: impl Into<String>, unit1: Observation, unit2: Observation) -> Result<Self> {
        let label = label.into();
        for obs in [unit1, unit2] {
            check_observation(&label, obs)?;
        }
        Ok(Self {
            label,
            units: [unit1, unit2],
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn units(&self) -> &[Observation; 2] {
        &self.units
    }

    /// `w_h1 y_h1 - w_h2 y_h2`.
    #[inline]
    pub fn contrast(&self) -> f64 {
        self.units[0].weighted() - self.units[1].weighted()
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.units[0].weighted() + self.units[1].weighted()
    }

    /// The same stratum with unit 1 and unit 2 exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            label: self.label.clone(),
            units: [self.units[1], self.units[0]],
        }
    }
}

fn check_observation(label: &str, obs: Observation) -> Result<()> {
    if !(obs.weight.is_finite() && obs.weight > 0.0) {
        return Err(Error::InvalidWeight {
            label: label.to_string(),
            weight: obs.weight,
        });
    }
    if !obs.y.is_finite() {
        return Err(Error::NonFiniteValue {
            label: label.to_string(),
            value: obs.y,
        });
    }
    Ok(())
}

/// `H >= 1` strata, each holding two observations. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedSample {
    strata: Vec<Stratum>,
}

impl StratifiedSample {
    pub fn new(strata: Vec<Stratum>) -> Result<Self> {
        if strata.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { strata })
    }

    /// Builds a sample from `(w1, y1, w2, y2)` tuples, labelling strata `1..=H`.
    pub fn from_pairs(pairs: &[(f64, f64, f64, f64)]) -> Result<Self> {
        let strata = pairs
            .iter()
            .enumerate()
            .map(|(h, &(w1, y1, w2, y2))| {
                Stratum::new(
                    (h + 1).to_string(),
                    Observation::new(w1, y1),
                    Observation::new(w2, y2),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(strata)
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn n_strata(&self) -> usize {
        self.strata.len()
    }

    pub fn n_observations(&self) -> usize {
        2 * self.strata.len()
    }

    /// Observations flattened in `(stratum, unit)` order. This is the column
    /// order used by replicate weight tables.
    pub fn observations(&self) -> impl Iterator<Item = &Observation> + '_ {
        self.strata.iter().flat_map(|s| s.units.iter())
    }

    /// The same design with every `y` multiplied by `c`.
    pub fn scaled_y(&self, c: f64) -> Result<Self> {
        let strata = self
            .strata
            .iter()
            .map(|s| {
                let [u1, u2] = s.units;
                Stratum::new(
                    s.label.clone(),
                    Observation::new(u1.weight, u1.y * c),
                    Observation::new(u2.weight, u2.y * c),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(strata)
    }

    /// The same design with the two units of stratum `h` exchanged.
    pub fn with_swapped(&self, h: usize) -> Self {
        let mut strata = self.strata.clone();
        strata[h] = strata[h].swapped();
        Self { strata }
    }
}

/// `d_h` for every stratum, in stratum order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContrastVector(Vec<f64>);

impl ContrastVector {
    pub fn new(d: Vec<f64>) -> Self {
        Self(d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.0.iter().all(|&d| d == 0.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for ContrastVector {
    fn from(d: Vec<f64>) -> Self {
        Self(d)
    }
}

/// `T = sum_h sum_i w_hi y_hi`, summed in `(stratum, unit)` order.
pub fn total_estimate(sample: &StratifiedSample) -> f64 {
    sample.observations().map(Observation::weighted).sum()
}

pub fn contrasts(sample: &StratifiedSample) -> ContrastVector {
    ContrastVector(sample.strata.iter().map(Stratum::contrast).collect())
}

/// `sum_h d_h^2`. Every replicate scheme in this crate reproduces this value.
pub fn direct_variance(contrasts: &ContrastVector) -> f64 {
    contrasts.0.iter().map(|d| d * d).sum()
}

/// A delete-a-group design with one weighted unit per jackknife zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneSample {
    zones: Vec<(String, Observation)>,
}

impl ZoneSample {
    /// Fails with `TooFewZones` when fewer than two zones are given.
    pub fn new(zones: Vec<(String, Observation)>) -> Result<Self> {
        if zones.len() < 2 {
            return Err(Error::TooFewZones(zones.len()));
        }
        for (label, obs) in &zones {
            check_observation(label, *obs)?;
        }
        Ok(Self { zones })
    }

    pub fn from_units(units: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            units
                .iter()
                .enumerate()
                .map(|(i, &(w, y))| ((i + 1).to_string(), Observation::new(w, y)))
                .collect(),
        )
    }

    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn zones(&self) -> &[(String, Observation)] {
        &self.zones
    }

    pub fn total(&self) -> f64 {
        self.zones.iter().map(|(_, o)| o.weighted()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_strata() -> StratifiedSample {
        StratifiedSample::from_pairs(&[(1.0, 3.0, 1.0, 2.0), (2.0, 1.0, 1.0, 4.0)]).unwrap()
    }

    #[test]
    fn total_of_single_stratum() {
        let s = StratifiedSample::from_pairs(&[(2.0, 1.0, 3.0, 1.0)]).unwrap();
        assert_eq!(total_estimate(&s), 5.0);
    }

    #[test]
    fn total_of_zero_outcomes() {
        let s = StratifiedSample::from_pairs(&[(1.0, 0.0, 1.0, 0.0); 2]).unwrap();
        assert_eq!(total_estimate(&s), 0.0);
    }

    #[test]
    fn total_and_contrasts_by_hand() {
        let s = two_strata();
        assert_eq!(total_estimate(&s), 11.0);
        assert_eq!(contrasts(&s).as_slice(), &[1.0, -2.0]);
    }

    #[test]
    fn symmetric_units_give_zero_contrast() {
        let s = StratifiedSample::from_pairs(&[(2.0, 5.0, 2.0, 5.0)]).unwrap();
        assert_eq!(contrasts(&s).as_slice(), &[0.0]);
    }

    #[test]
    fn direct_variance_examples() {
        assert_eq!(direct_variance(&vec![1.0, 2.0].into()), 5.0);
        assert_eq!(direct_variance(&vec![0.0; 4].into()), 0.0);
        assert_eq!(direct_variance(&vec![-3.0].into()), 9.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            StratifiedSample::new(vec![]),
            Err(Error::EmptySample)
        ));
        assert!(matches!(
            StratifiedSample::from_pairs(&[(0.0, 1.0, 1.0, 1.0)]),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(matches!(
            StratifiedSample::from_pairs(&[(1.0, 1.0, f64::INFINITY, 1.0)]),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(matches!(
            StratifiedSample::from_pairs(&[(1.0, f64::NAN, 1.0, 1.0)]),
            Err(Error::NonFiniteValue { .. })
        ));
        assert!(matches!(
            ZoneSample::from_units(&[(1.0, 1.0)]),
            Err(Error::TooFewZones(1))
        ));
    }

    #[test]
    fn swap_negates_one_contrast() {
        let s = two_strata();
        let t = s.with_swapped(1);
        assert_eq!(contrasts(&t).as_slice(), &[1.0, 2.0]);
        assert_eq!(total_estimate(&t), total_estimate(&s));
    }
}
