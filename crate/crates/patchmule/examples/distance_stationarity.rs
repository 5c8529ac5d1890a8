//! The patch division rests on a stationary distance distribution.
//!
//! Because an agent returns to its nearest water source every day, its
//! distance to that source settles into a stationary distribution; that is
//! what justifies carving the map into per-source patches in the first
//! place. Two independent long runs should therefore produce nearly
//! identical histograms.
//!
//! ```bash
//! cargo run --release --example distance_stationarity
//! ```

use patchmule::geometry::{distance_histogram, MovementParams, Point, WorldMap};

fn main() -> patchmule::Result<()> {
    let map = WorldMap::new(20_000.0, 20_000.0, vec![Point::new(9_000.0, 12_000.0)])?;
    let params = MovementParams::default();
    let bins = 25;
    let years = 2.0;

    println!("one agent, one water source, two independent {years}-year runs\n");
    let a = distance_histogram(&map, &params, years * 365.0, bins, 1)?;
    let b = distance_histogram(&map, &params, years * 365.0, bins, 2)?;

    println!("distance     run A    run B");
    for (k, (pa, pb)) in a.mass.iter().zip(&b.mass).enumerate() {
        if *pa > 0.002 || *pb > 0.002 {
            let from = k as f64 * a.bin_width / 1_000.0;
            let bar = "#".repeat((pa * 200.0) as usize);
            println!("{from:>5.1} km   {pa:>6.3}   {pb:>6.3}  {bar}");
        }
    }
    println!(
        "\nL1 distance between the normalized histograms: {:.4}",
        a.l1_distance(&b)?
    );
    Ok(())
}
