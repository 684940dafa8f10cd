//! Paired jackknife and Fay jackknife: 2H replicates, deviations `+-eps d_h`.
//!
//!     cargo run --example paired_jackknife

use stratrep::dof::first_jk_deviations;
use stratrep::{
    contrasts, estimate_variance, replicate_estimates, replicate_weights, ws_corrected,
    ws_from_jk_replicates, SchemeSpec, StratifiedSample,
};

fn main() -> stratrep::Result<()> {
    let sample = StratifiedSample::from_pairs(&[(1.0, 3.0, 1.0, 2.0), (1.0, 5.0, 1.0, 3.0)])?;

    for scheme in [SchemeSpec::paired_jk(), SchemeSpec::fay_jk(0.5)?] {
        let table = replicate_weights(&sample, &scheme)?;
        let est = replicate_estimates(&sample, &table)?;
        println!("{scheme}: deviations {:?}", est.deviations());
        println!("  variance {}", estimate_variance(&est)?.via_replicates);
        let from_reps = ws_from_jk_replicates(&first_jk_deviations(&est)?, scheme.epsilon())?;
        println!(
            "  corrected dof from replicates {:.12}",
            from_reps.corrected
        );
    }

    let direct = ws_corrected(&contrasts(&sample))?;
    println!(
        "corrected dof from contrasts    {:.12} (41/17)",
        direct.corrected
    );
    Ok(())
}
