//! The four command-line operations as library functions. Each returns the
//! product in memory; writing it out is left to the caller.

use std::path::PathBuf;

use crate::design::{contrasts, StratifiedSample, ZoneSample};
use crate::dof::{interval_with_rule, ws_corrected, DofRule};
use crate::error::{Error, Result};
use crate::estimators::{estimate_variance, variance_jk1, COLLAPSE_TOLERANCE};
use crate::hadamard::construct;
use crate::io::{
    hadamard_csv, load_simulation_config, parse_sample, parse_zones, replicate_csv,
    zone_replicate_csv, DofSection, IntervalSection, SchemeSection, VarianceReport,
    VarianceSection, VARIANCE_REPORT_SCHEMA_VERSION,
};
use crate::replication::{
    jk1_weights, replicate_estimates, replicate_weights, zone_replicate_estimates, SchemeKind,
    SchemeSpec,
};
use crate::simulation::{run_coverage, SimulationReport};

pub const ZERO_MEAN_ASSUMPTION: &str =
    "E[d_h] = 0 in every stratum (holds under simple random sampling within strata); \
     not checkable from a single sample";

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    /// Sample CSV, or a zone CSV for `jk1`.
    pub input: PathBuf,
    pub scheme: SchemeSpec,
    pub level: f64,
    pub dof_rule: DofRule,
    pub cap_at_h: bool,
}

impl EstimateOptions {
    pub fn new(input: impl Into<PathBuf>, scheme: SchemeSpec) -> Self {
        Self {
            input: input.into(),
            scheme,
            level: 0.95,
            dof_rule: DofRule::Corrected,
            cap_at_h: false,
        }
    }
}

pub fn estimate(opts: &EstimateOptions) -> Result<VarianceReport> {
    if opts.scheme.kind() == SchemeKind::Jk1 {
        estimate_zones(&parse_zones(&opts.input)?, opts.level)
    } else {
        estimate_sample(
            &parse_sample(&opts.input)?,
            &opts.scheme,
            opts.level,
            opts.dof_rule,
            opts.cap_at_h,
        )
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(level))
    }
}

/// Full pipeline for a two-PSU sample: contrasts, replicate table, variance
/// (checked against `sum d^2`), degrees of freedom and interval.
pub fn estimate_sample(
    sample: &StratifiedSample,
    scheme: &SchemeSpec,
    level: f64,
    rule: DofRule,
    cap_at_h: bool,
) -> Result<VarianceReport> {
    check_level(level)?;
    let table = replicate_weights(sample, scheme)?;
    let est = replicate_estimates(sample, &table)?;
    let variance = estimate_variance(&est)?;
    let d = contrasts(sample);
    let mut warnings = Vec::new();
    if !variance.collapse_holds(COLLAPSE_TOLERANCE) {
        warnings.push(format!(
            "replicate-path variance {} differs from sum of squared contrasts {} by {:e}",
            variance.via_replicates,
            variance.canonical(),
            variance.collapse_discrepancy()
        ));
    }
    let (dof, interval) = match ws_corrected(&d) {
        Ok(dof) => {
            let ci = interval_with_rule(
                est.t_full(),
                variance.canonical(),
                &dof,
                level,
                rule,
                cap_at_h,
            )?;
            (
                Some(DofSection::new(&dof, rule, cap_at_h)),
                Some(IntervalSection::from(&ci)),
            )
        }
        Err(Error::DegenerateContrasts) => {
            warnings.push(
                "every stratum contrast is zero: the variance estimate is 0 and no degrees of \
                 freedom or interval are reported"
                    .into(),
            );
            (None, None)
        }
        Err(e) => return Err(e),
    };
    Ok(VarianceReport {
        schema_version: VARIANCE_REPORT_SCHEMA_VERSION,
        n_strata: sample.n_strata(),
        n_observations: sample.n_observations(),
        total: est.t_full(),
        scheme: SchemeSection {
            kind: scheme.kind(),
            epsilon: scheme.epsilon(),
            n_replicates: table.n_replicates(),
            hadamard_order: table.hadamard_order(),
        },
        variance: VarianceSection::from(&variance),
        contrasts: Some(d.into_inner()),
        dof,
        interval,
        warnings,
        assumptions: vec![ZERO_MEAN_ASSUMPTION.into()],
    })
}

/// Delete-a-group jackknife over single-unit zones. No stratum contrasts
/// exist, so no degrees of freedom or interval are produced.
pub fn estimate_zones(zones: &ZoneSample, level: f64) -> Result<VarianceReport> {
    check_level(level)?;
    let table = jk1_weights(zones)?;
    let est = zone_replicate_estimates(zones, &table)?;
    let variance = variance_jk1(&est, zones.n_zones())?;
    Ok(VarianceReport {
        schema_version: VARIANCE_REPORT_SCHEMA_VERSION,
        n_strata: zones.n_zones(),
        n_observations: zones.n_zones(),
        total: est.t_full(),
        scheme: SchemeSection {
            kind: SchemeKind::Jk1,
            epsilon: 1.0,
            n_replicates: table.n_replicates(),
            hadamard_order: None,
        },
        variance: VarianceSection::from(&variance),
        contrasts: None,
        dof: None,
        interval: None,
        warnings: vec![
            "degrees of freedom are defined for two-PSU strata only; no interval is reported"
                .into(),
        ],
        assumptions: vec![],
    })
}

/// Replicate weight CSV for the sample (or zone file, for `jk1`) at `input`.
pub fn replicates(input: &std::path::Path, scheme: &SchemeSpec) -> Result<String> {
    if scheme.kind() == SchemeKind::Jk1 {
        let zones = parse_zones(input)?;
        zone_replicate_csv(&zones, &jk1_weights(&zones)?)
    } else {
        let sample = parse_sample(input)?;
        replicate_csv(&sample, &replicate_weights(&sample, scheme)?)
    }
}

/// Verified Hadamard matrix of `order` as CSV.
pub fn hadamard(order: usize) -> Result<String> {
    Ok(hadamard_csv(&construct(order)?))
}

pub fn simulate(config: &std::path::Path) -> Result<SimulationReport> {
    run_coverage(&load_simulation_config(config)?)
}
