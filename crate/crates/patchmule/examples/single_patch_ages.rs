//! Single-patch sanity check against closed forms.
//!
//! With one patch, no peers and no migration, the base-station age is reset
//! by a Poisson process with rate `alpha * N`, so its stationary mean is
//! `1 / (alpha * N)` and the mean-field ODE `dA/dt = 1 - alpha N A` has the
//! same fixed point. We check both engines against those numbers.
//!
//! ```bash
//! cargo run --release --example single_patch_ages
//! ```

use patchmule::layout::StateLayout;
use patchmule::meanfield::{integrate, MeanFieldConfig};
use patchmule::model::{PatchModel, RateParameters};
use patchmule::ssa::{run_ensemble, SimulationConfig};

fn main() -> patchmule::Result<()> {
    let alpha = 0.1; // contacts per zebra-day
    let population = 50;
    let expected = 1.0 / (alpha * population as f64);

    let mut rates = RateParameters::zeros(1);
    rates.set_alpha(0, alpha);
    let model = PatchModel::new(rates, vec![population])?;
    let layout = StateLayout::new(1);

    println!("single patch, {population} zebras, alpha = {alpha}/day");
    println!("analytic stationary age: {expected} days\n");

    let cfg = SimulationConfig::new(100.0, 7)?;
    let runs = run_ensemble(&model, &cfg, 50)?;
    let mut sum = 0.0;
    let mut count = 0u64;
    for run in &runs {
        for (t, row) in run.times().iter().zip(run.rows()) {
            if *t >= 10.0 {
                sum += row[layout.base_age(0)];
                count += 1;
            }
        }
    }
    let stochastic = sum / count as f64;
    println!(
        "stochastic: time-average over [10, 100] days x 50 runs = {stochastic:.5} ({:+.2}%)",
        100.0 * (stochastic - expected) / expected
    );

    let mf = MeanFieldConfig::new(20.0)?;
    let trajectory = integrate(&model, &mf)?;
    let settled = trajectory.row(trajectory.len() - 1)[layout.base_age(0)];
    println!(
        "mean-field: A(20) = {settled:.9} ({:+.2e} from the fixed point)",
        settled - expected
    );
    Ok(())
}
