//! File formats: sample and zone CSVs, replicate-weight and Hadamard CSVs,
//! the JSON variance report and the TOML simulation config.
//!
//! # Sample file
//!
//! ```text
//! stratum,psu,weight,y
//! A,1,3,2.5
//! A,2,5,1.0
//! ```
//!
//! Two rows per stratum label, `psu` 1 and 2, positive finite weights. Strata
//! keep the order in which their labels first appear.
//!
//! # Zone file (JK1)
//!
//! ```text
//! zone,weight,y
//! ```
//!
//! One row per zone.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::design::{Observation, StratifiedSample, Stratum, ZoneSample};
use crate::dof::{ConfidenceInterval, DofBasis, DofEstimate, DofRule};
use crate::error::{Error, Result};
use crate::estimators::VarianceEstimate;
use crate::hadamard::HadamardMatrix;
use crate::replication::{ReplicateWeightTable, SchemeKind, SchemeSpec};
use crate::simulation::SimulationConfig;

pub const SAMPLE_HEADER: [&str; 4] = ["stratum", "psu", "weight", "y"];
pub const ZONE_HEADER: [&str; 3] = ["zone", "weight", "y"];
pub const VARIANCE_REPORT_SCHEMA_VERSION: u32 = 1;
/// Environment variable naming the default directory for output files.
pub const OUTPUT_DIR_ENV: &str = "STRATREP_OUTPUT_DIR";

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(csv_error)?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn parse_number(field: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{name} {field:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{name} {field:?} is not finite"),
        });
    }
    Ok(v)
}

fn parse_weight(field: &str, line: u64) -> Result<f64> {
    let w = parse_number(field, "weight", line)?;
    if w <= 0.0 {
        return Err(Error::NonPositiveWeight { line, weight: w });
    }
    Ok(w)
}

fn reader_for(input: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(input)
}

/// Reads a sample CSV.
pub fn parse_sample(path: impl AsRef<Path>) -> Result<StratifiedSample> {
    let path = path.as_ref();
    read_sample(read_file(path)?.as_bytes())
}

/// Reads a sample CSV from any reader.
pub fn read_sample(input: impl Read) -> Result<StratifiedSample> {
    let mut reader = reader_for(input);
    check_header(&mut reader, &SAMPLE_HEADER)?;
    let mut order: Vec<String> = Vec::new();
    let mut units: HashMap<String, [Option<Observation>; 2]> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let label = record[0].to_string();
        let psu: u8 = match &record[1] {
            "1" => 1,
            "2" => 2,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("psu {other:?} must be 1 or 2"),
                })
            }
        };
        let weight = parse_weight(&record[2], line)?;
        let y = parse_number(&record[3], "y", line)?;
        let slot = units.entry(label.clone()).or_insert_with(|| {
            order.push(label.clone());
            [None, None]
        });
        let cell = &mut slot[usize::from(psu - 1)];
        if cell.is_some() {
            return Err(Error::DuplicatePsu { line, label, psu });
        }
        *cell = Some(Observation::new(weight, y));
    }
    let strata = order
        .into_iter()
        .map(|label| match units.remove(&label) {
            Some([Some(a), Some(b)]) => Stratum::new(label, a, b),
            _ => Err(Error::MissingPair(label)),
        })
        .collect::<Result<Vec<_>>>()?;
    StratifiedSample::new(strata)
}

/// Reads a zone CSV for the delete-a-group jackknife.
pub fn parse_zones(path: impl AsRef<Path>) -> Result<ZoneSample> {
    read_zones(read_file(path.as_ref())?.as_bytes())
}

pub fn read_zones(input: impl Read) -> Result<ZoneSample> {
    let mut reader = reader_for(input);
    check_header(&mut reader, &ZONE_HEADER)?;
    let mut zones = Vec::new();
    let mut seen = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let label = record[0].to_string();
        if let Some(first) = seen.insert(label.clone(), line) {
            return Err(Error::Parse {
                line,
                message: format!("zone {label:?} already appears on line {first}"),
            });
        }
        let weight = parse_weight(&record[1], line)?;
        let y = parse_number(&record[2], "y", line)?;
        zones.push((label, Observation::new(weight, y)));
    }
    if zones.is_empty() {
        return Err(Error::EmptySample);
    }
    ZoneSample::new(zones)
}

/// Replicate weight CSV: `stratum,psu,weight,rw1..rwK`, one row per
/// observation. Numbers use the shortest representation that reads back to
/// the same `f64`.
pub fn replicate_csv(sample: &StratifiedSample, table: &ReplicateWeightTable) -> Result<String> {
    if table.n_observations() != sample.n_observations() {
        return Err(Error::DimensionMismatch(format!(
            "table has {} observation columns, sample has {} observations",
            table.n_observations(),
            sample.n_observations()
        )));
    }
    let rows = sample
        .strata()
        .iter()
        .flat_map(|s| [(s.label(), 1u8), (s.label(), 2u8)]);
    write_weight_rows(
        &["stratum", "psu"],
        rows.map(|(l, p)| vec![l.to_string(), p.to_string()]),
        table,
    )
}

/// JK1 replicate weight CSV: `zone,weight,rw1..rwG`.
pub fn zone_replicate_csv(zones: &ZoneSample, table: &ReplicateWeightTable) -> Result<String> {
    if table.n_observations() != zones.n_zones() {
        return Err(Error::DimensionMismatch(format!(
            "table has {} columns for {} zones",
            table.n_observations(),
            zones.n_zones()
        )));
    }
    write_weight_rows(
        &["zone"],
        zones.zones().iter().map(|(l, _)| vec![l.clone()]),
        table,
    )
}

fn write_weight_rows(
    keys: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
    table: &ReplicateWeightTable,
) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
    header.push("weight".into());
    header.extend((1..=table.n_replicates()).map(|r| format!("rw{r}")));
    writer.write_record(&header).map_err(csv_error)?;
    for (j, mut row) in rows.enumerate() {
        row.push(table.full_weights()[j].to_string());
        row.extend(table.weights().column(j).iter().map(f64::to_string));
        writer.write_record(&row).map_err(csv_error)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// The matrix as comma-separated rows of `1` and `-1`, no header.
pub fn hadamard_csv(m: &HadamardMatrix) -> String {
    let mut out = String::new();
    for row in m.entries().rows() {
        let cells: Vec<String> = row.iter().map(i8::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSection {
    pub kind: SchemeKind,
    pub epsilon: f64,
    pub n_replicates: usize,
    pub hadamard_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSection {
    pub value: f64,
    pub via_replicates: f64,
    pub via_contrasts: Option<f64>,
    pub collapse_discrepancy: f64,
}

impl From<&VarianceEstimate> for VarianceSection {
    fn from(v: &VarianceEstimate) -> Self {
        Self {
            value: v.canonical(),
            via_replicates: v.via_replicates,
            via_contrasts: v.via_contrasts,
            collapse_discrepancy: v.collapse_discrepancy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofSection {
    pub naive: f64,
    pub corrected: f64,
    pub corrected_clamped: f64,
    pub basis: DofBasis,
    pub rule: DofRule,
    pub cap_at_h: bool,
    /// Degrees of freedom behind the interval; `None` for the normal rule.
    pub used: Option<f64>,
}

impl DofSection {
    pub fn new(d: &DofEstimate, rule: DofRule, cap_at_h: bool) -> Self {
        Self {
            naive: d.naive,
            corrected: d.corrected,
            corrected_clamped: d.corrected_clamped,
            basis: d.basis,
            rule,
            cap_at_h,
            used: d.for_rule(rule, cap_at_h),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSection {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
    pub quantile: f64,
}

impl From<&ConfidenceInterval> for IntervalSection {
    fn from(ci: &ConfidenceInterval) -> Self {
        Self {
            level: ci.level,
            lower: ci.lower(),
            upper: ci.upper(),
            half_width: ci.half_width,
            quantile: ci.quantile,
        }
    }
}

/// Output of `estimate`. Floats are written with full precision, so a
/// report read back compares equal to the one written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub schema_version: u32,
    pub n_strata: usize,
    pub n_observations: usize,
    pub total: f64,
    pub scheme: SchemeSection,
    pub variance: VarianceSection,
    /// `d_h` per stratum; absent for JK1.
    pub contrasts: Option<Vec<f64>>,
    /// Absent when every contrast is zero or the scheme is JK1.
    pub dof: Option<DofSection>,
    pub interval: Option<IntervalSection>,
    pub warnings: Vec<String>,
    pub assumptions: Vec<String>,
}

impl VarianceReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Human-readable summary with 12 significant digits.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scheme {} (eps {}), {} replicates{}",
            self.scheme.kind,
            sig12(self.scheme.epsilon),
            self.scheme.n_replicates,
            self.scheme
                .hadamard_order
                .map(|o| format!(", Hadamard order {o}"))
                .unwrap_or_default()
        );
        let _ = writeln!(out, "strata   {}", self.n_strata);
        let _ = writeln!(out, "total    {}", sig12(self.total));
        let _ = writeln!(out, "variance {}", sig12(self.variance.value));
        let _ = writeln!(out, "se       {}", sig12(self.variance.value.sqrt()));
        if let Some(d) = &self.dof {
            let _ = writeln!(
                out,
                "dof      naive {}, corrected {}, used {} ({})",
                sig12(d.naive),
                sig12(d.corrected),
                d.used.map(sig12).unwrap_or_else(|| "normal".into()),
                d.rule
            );
        }
        if let Some(ci) = &self.interval {
            let _ = writeln!(
                out,
                "{}% CI   [{}, {}]",
                sig12(ci.level * 100.0),
                sig12(ci.lower),
                sig12(ci.upper)
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

/// `x` with 12 significant digits, trailing zeros removed.
pub fn sig12(x: f64) -> String {
    format_significant(x, 12)
}

pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = digits as i64 - 1 - magnitude;
    if (-4..=15).contains(&magnitude) && decimals >= 0 {
        let s = format!("{:.*}", decimals as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

/// Parses and validates a TOML simulation config. Errors name the offending
/// field, e.g. `sigma_profile.sigma`.
pub fn load_simulation_config(path: impl AsRef<Path>) -> Result<SimulationConfig> {
    parse_simulation_config(&read_file(path.as_ref())?)
}

pub fn parse_simulation_config(text: &str) -> Result<SimulationConfig> {
    let de = toml::de::Deserializer::parse(text).map_err(|e| Error::Config {
        path: String::new(),
        message: e.message().to_string(),
    })?;
    let config: SimulationConfig =
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().message().to_string(),
        })?;
    config.validate()?;
    Ok(config)
}

/// `explicit`, or `file_name` inside the directory named by
/// `STRATREP_OUTPUT_DIR` when that is set.
pub fn resolve_output(explicit: Option<&Path>, file_name: &str) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(file_name))
    })
}

pub fn write_output(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Builds a scheme from command-line style arguments.
pub fn scheme_from_args(
    kind: &str,
    epsilon: Option<f64>,
    order: Option<usize>,
) -> Result<SchemeSpec> {
    let kind: SchemeKind = kind.parse()?;
    SchemeSpec::new(kind, epsilon, order)
}
