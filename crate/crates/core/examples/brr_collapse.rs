//! BRR and Fay-BRR replicate variances against `sum_h d_h^2`.
//!
//!     cargo run --example brr_collapse

use stratrep::{
    contrasts, direct_variance, estimate_variance, replicate_estimates, replicate_mean_check,
    replicate_weights, SchemeSpec, StratifiedSample,
};

fn main() -> stratrep::Result<()> {
    let sample = StratifiedSample::from_pairs(&[
        (3.0, 2.0, 5.0, 1.0),
        (1.0, 4.5, 2.0, 3.0),
        (2.5, 1.2, 2.5, 0.7),
    ])?;
    let d = contrasts(&sample);
    println!("contrasts {:?}", d.as_slice());
    println!("sum d^2   {}", direct_variance(&d));

    for scheme in [
        SchemeSpec::brr(),
        SchemeSpec::fay_brr(0.5)?,
        SchemeSpec::fay_brr(0.3)?,
        SchemeSpec::brr().with_hadamard_order(8)?,
    ] {
        let table = replicate_weights(&sample, &scheme)?;
        let est = replicate_estimates(&sample, &table)?;
        let v = estimate_variance(&est)?;
        println!(
            "{:<22} R={:<2} replicate path {:.12}  mean check {:+.1e}",
            scheme.to_string(),
            table.n_replicates(),
            v.via_replicates,
            replicate_mean_check(&est)
        );
    }

    let table = replicate_weights(&sample, &SchemeSpec::brr())?;
    println!("\nBRR weights, stratum 1 (unit 1, unit 2) by replicate:");
    for r in 0..table.n_replicates() {
        println!(
            "  r{}: ({}, {})",
            r + 1,
            table.weight(r, 0),
            table.weight(r, 1)
        );
    }
    Ok(())
}
