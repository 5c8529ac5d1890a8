//! Stochastic ensembles converge to the mean-field trajectory.
//!
//! The mean-field ODEs approximate the average of the stochastic model over
//! infinitely many runs. Averaging larger and larger ensembles therefore
//! pulls the empirical mean toward the integrated trajectory; this example
//! prints the base-age deviation for ensembles of 1, 10 and 50 runs.
//!
//! ```bash
//! cargo run --release --example ensemble_convergence
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use patchmule::meanfield::{integrate, MeanFieldConfig};
use patchmule::metrics::{ensemble_mean, trajectory_deviation};
use patchmule::model::{even_split, PatchModel, RateParameters};
use patchmule::ssa::{run_ensemble, SimulationConfig};

fn main() -> patchmule::Result<()> {
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut rates = RateParameters::zeros(n);
    for i in 0..n {
        rates.set_alpha(i, rng.random_range(0.2..0.8));
        for j in (i + 1)..n {
            rates.set_beta(i, j, rng.random_range(0.0..0.01));
        }
        for j in 0..n {
            if j != i {
                rates.set_gamma(i, j, rng.random_range(0.01..0.05));
            }
        }
    }
    let model = PatchModel::new(rates, even_split(48, n))?;

    let horizon = 60.0;
    let cfg = SimulationConfig::new(horizon, 2024)?.with_sample_step(0.5)?;
    let mf = MeanFieldConfig::new(horizon)?.with_sample_grid(cfg.sample_grid.clone());
    let reference = integrate(&model, &mf)?;
    let runs = run_ensemble(&model, &cfg, 50)?;

    println!("{n}-patch model, 48 zebras, {horizon}-day horizon");
    println!("deviation of the ensemble-mean base ages from the mean-field trajectory:\n");
    let base_age = |name: &str| name.starts_with("A_") && name.matches('_').count() == 1;
    for count in [1, 10, 50] {
        let mean = ensemble_mean(&runs[..count])?;
        let report = trajectory_deviation(&mean, &reference)?;
        println!(
            "  {count:>3} run(s): max deviation {:.4} days",
            report.filtered_max(base_age)
        );
    }
    println!("\nmore runs, closer to the mean-field prediction.");
    Ok(())
}
