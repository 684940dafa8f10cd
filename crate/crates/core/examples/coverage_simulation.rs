//! Interval coverage under one dominant stratum, plus the chi-square moment
//! check and the calibration of the corrected degrees of freedom.
//!
//!     cargo run --release --example coverage_simulation [config.toml]

use stratrep::io::load_simulation_config;
use stratrep::simulation::{check_chi2_approx, check_dof_calibration, Execution};
use stratrep::{run_coverage, SigmaProfile, SimulationConfig};

fn main() -> stratrep::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/data/one_dominant.toml"
        )
        .into()
    });
    let config = load_simulation_config(&path)?;
    let report = run_coverage(&config)?;
    println!("{}\n", report.summary());

    let moments = SimulationConfig::new(3, SigmaProfile::Linear { min: 1.0, max: 5.0 }, 200_000, 3);
    let chi = check_chi2_approx(&moments, Execution::Parallel)?;
    for s in &chi.strata {
        println!(
            "sigma {:.1}: Var(d^2)/Var(d)^2 = {:.4}, E[d] = {:+.4} (se {:.4})",
            s.sigma, s.ratio, s.mean_d, s.se_mean_d
        );
    }

    let equal = SimulationConfig::new(10, SigmaProfile::Equal { sigma: 1.0 }, 20_000, 5);
    let cal = check_dof_calibration(&equal, Execution::Parallel)?;
    println!(
        "\nH = 10, equal variances: mean naive dof {:.3}, mean corrected dof {:.3} (true 10)",
        cal.mean_naive, cal.mean_corrected
    );
    Ok(())
}
