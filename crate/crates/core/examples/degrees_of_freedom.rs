//! Welch-Satterthwaite degrees of freedom, the `3 nu - 2` correction and the
//! resulting t intervals.
//!
//!     cargo run --example degrees_of_freedom

use stratrep::dof::interval_with_rule;
use stratrep::{direct_variance, t_quantile, ws_corrected, ContrastVector, DofRule};

fn main() -> stratrep::Result<()> {
    let cases: [&[f64]; 4] = [
        &[1.0, 1.0, 1.0, 1.0],
        &[2.0, 0.0, 0.0],
        &[1.0, 2.0],
        &[10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
    ];
    println!("{:<44} {:>8} {:>10}", "contrasts", "naive", "corrected");
    for d in cases {
        let e = ws_corrected(&ContrastVector::from(d.to_vec()))?;
        println!(
            "{:<44} {:>8.4} {:>10.4}",
            format!("{d:?}"),
            e.naive,
            e.corrected
        );
    }

    println!("\nt quantiles at 0.975:");
    for nu in [1.0, 2.0, 2.5, 5.0, 30.0, 1e8] {
        println!("  nu = {nu:<6e} {:.10}", t_quantile(nu, 0.975)?);
    }

    let d = ContrastVector::from(vec![10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
    let dof = ws_corrected(&d)?;
    let v = direct_variance(&d);
    println!("\n95% intervals around T = 100 with V = {v}:");
    for rule in DofRule::ALL {
        let ci = interval_with_rule(100.0, v, &dof, 0.95, rule, false)?;
        println!(
            "  {:<10} dof {:<10} [{:.4}, {:.4}]",
            rule.as_str(),
            ci.dof_used
                .map(|n| format!("{n:.4}"))
                .unwrap_or_else(|| "inf".into()),
            ci.lower(),
            ci.upper()
        );
    }
    Ok(())
}
