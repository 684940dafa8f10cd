//! End-to-end file workflow: read a sample CSV, export replicate weights,
//! produce the JSON variance report and read it back.
//!
//!     cargo run --example csv_pipeline

use stratrep::commands::{estimate, replicates, EstimateOptions};
use stratrep::io::VarianceReport;
use stratrep::{DofRule, SchemeSpec};

fn main() -> stratrep::Result<()> {
    let input = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/counties.csv");

    let csv = replicates(input.as_ref(), &SchemeSpec::fay_brr(0.5)?)?;
    println!("replicate weights (first rows):");
    for line in csv.lines().take(4) {
        println!("  {line}");
    }

    let mut opts = EstimateOptions::new(input, SchemeSpec::brr());
    let brr = estimate(&opts)?;
    print!("\n{}", brr.summary());

    opts.scheme = SchemeSpec::fay_jk(0.5)?;
    opts.dof_rule = DofRule::Corrected;
    let jk = estimate(&opts)?;
    println!(
        "\nfay-jk variance {} (brr {}), same dof: {}",
        jk.variance.value,
        brr.variance.value,
        jk.dof == brr.dof
    );

    let json = brr.to_json()?;
    let back = VarianceReport::from_json(&json)?;
    println!("report round-trips: {}", back == brr);
    Ok(())
}
