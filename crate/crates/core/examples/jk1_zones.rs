//! Delete-a-group jackknife with one unit per zone.
//!
//!     cargo run --example jk1_zones

use stratrep::io::parse_zones;
use stratrep::{jk1_weights, variance_jk1, zone_replicate_estimates};

fn main() -> stratrep::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/zones.csv");
    let zones = parse_zones(path)?;
    let table = jk1_weights(&zones)?;
    let est = zone_replicate_estimates(&zones, &table)?;
    let g = zones.n_zones();
    println!("{g} zones, total {}", zones.total());
    for (r, dev) in est.deviations().iter().enumerate() {
        let kept: Vec<f64> = table.weights().row(r).to_vec();
        println!(
            "  drop {}: weights {kept:?}, deviation {dev:+.6}",
            zones.zones()[r].0
        );
    }
    let v = variance_jk1(&est, g)?;
    println!("variance (G-1)/G sum dev^2 = {:.6}", v.value);
    Ok(())
}
