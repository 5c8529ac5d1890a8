//! Calibrating patch-model rates from the continuous-space micro-model.
//!
//! Ten water sources partition a 20 km x 20 km reserve into Voronoi
//! patches. One probe agent per patch roams for a simulated year alongside
//! the base station; counting its contacts and migrations (divided by the
//! duration) yields the per-patch rates the patch model runs on.
//!
//! ```bash
//! cargo run --release --example calibrate_world
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use patchmule::geometry::{calibrate, MovementParams, WorldMap};

fn main() -> patchmule::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sources = WorldMap::random_sources(20_000.0, 20_000.0, 10, &mut rng);
    let map = WorldMap::new(20_000.0, 20_000.0, sources)?
        .with_radio_range(5_000.0)
        .with_peer_range(500.0);
    let movement = MovementParams::default();

    let duration_days = 365.0;
    println!(
        "calibrating {} patches over {duration_days} simulated days (radio {} m)...",
        map.n_patches(),
        map.radio_range_m
    );
    let result = calibrate(&map, &movement, duration_days, 99)?;

    println!("\nper-patch base contact rates (alpha, per zebra-day):");
    for i in 0..map.n_patches() {
        let source = &map.water_sources[i];
        println!(
            "  patch {i}: alpha = {:>8.4}   (source at {:>6.0} m, {:>6.0} m, {} contacts)",
            result.rates.alpha(i),
            source.x,
            source.y,
            result.event_counts.base[i]
        );
    }

    let peer_events: u64 = result.event_counts.peer.iter().flatten().sum::<u64>() / 2;
    let migrations: u64 = result.event_counts.migration.iter().flatten().sum();
    println!("\npeer contacts observed: {peer_events}");
    println!("migrations observed:    {migrations}");
    let busiest = (0..map.n_patches())
        .flat_map(|i| (0..map.n_patches()).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .max_by_key(|&(i, j)| result.event_counts.migration[i][j]);
    if let Some((i, j)) = busiest {
        println!(
            "busiest migration corridor: {i} -> {j} at {:.4}/day",
            result.rates.gamma(i, j)
        );
    }
    println!("\nserialize the full result with serde_json to feed `patchmule simulate`.");
    Ok(())
}
