//! Closed-form peak concurrence over the two directionalities.
//!
//! ```bash
//! cargo run --example directionality_map
//! ```

use chiral_qed::markovian::cmax_analytic;
use chiral_qed::Result;

fn main() -> Result<()> {
    let grid: Vec<f64> = (0..=8).map(|k| -1.0 + k as f64 * 0.25).collect();
    print!("Δ1 \\ Δ2");
    for d2 in &grid {
        print!("{d2:>7.2}");
    }
    println!();
    for d1 in grid.iter().rev() {
        print!("{d1:>7.2}");
        for d2 in &grid {
            print!("{:>7.3}", cmax_analytic(*d1, *d2)?);
        }
        println!();
    }
    Ok(())
}
