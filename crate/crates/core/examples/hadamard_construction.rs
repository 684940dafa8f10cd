//! Builds Hadamard matrices, checks `H^T H = R I` exactly and picks the
//! balanced columns that supply BRR signs.
//!
//!     cargo run --example hadamard_construction -- 12

use stratrep::{balanced_columns, brr_order, construct, smallest_valid_order, verify};

fn main() -> stratrep::Result<()> {
    let order: usize = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("order must be an integer"))
        .unwrap_or(12);

    let m = construct(order)?;
    println!("order {} verified: {}", m.order(), verify(&m));
    for row in m.entries().rows() {
        let line: String = row.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect();
        println!("  {line}");
    }

    let strata = order - 1;
    let signs = balanced_columns(&m, strata)?;
    println!(
        "{strata} strata use columns {:?} (1-based), each summing to zero",
        signs
            .source_columns()
            .iter()
            .map(|c| c + 1)
            .collect::<Vec<_>>()
    );

    println!("\n  H  smallest order  BRR order");
    for h in [1, 3, 4, 9, 12, 20, 40, 64] {
        println!(
            "{h:>3}  {:>14}  {:>9}",
            smallest_valid_order(h)?,
            brr_order(h)?
        );
    }

    match construct(6) {
        Ok(_) => unreachable!(),
        Err(e) => println!("\norder 6: {e}"),
    }
    Ok(())
}
