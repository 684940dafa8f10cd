//! Closed-form covariance of BRR deviations against a Monte Carlo estimate.
//!
//!     cargo run --release --example deviation_covariance

use stratrep::simulation::{check_deviation_covariance, Execution};
use stratrep::{SigmaProfile, SimulationConfig};

fn main() -> stratrep::Result<()> {
    let config = SimulationConfig::new(
        2,
        SigmaProfile::Custom {
            sigmas: vec![1.0, 3.0],
        },
        100_000,
        11,
    );
    let cmp = check_deviation_covariance(&config, Execution::Parallel)?;
    println!("theoretical covariance (sum_h a_rh a_sh Var d_h):");
    for row in &cmp.theoretical {
        println!("  {row:?}");
    }
    println!("Monte Carlo, {} reps:", config.n_reps);
    for row in &cmp.empirical {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:8.3}")).collect();
        println!("  [{}]", cells.join(", "));
    }
    println!("largest |z| = {:.3}", cmp.max_abs_z);
    Ok(())
}
