//! Trajectory files: one CSV schema for both engines.
//!
//! Stochastic runs, ensemble means and mean-field integrations all share
//! the column layout `t, N_0.., A_0.., A_0_1..`, so files from either
//! engine can be diffed with the same tooling. This example writes an
//! ensemble mean and a mean-field trajectory to disk, reads them back and
//! reports the per-column deviation, which is what `patchmule compare`
//! does for files produced by separate invocations.
//!
//! ```bash
//! cargo run --release --example export_and_compare
//! ```

use patchmule::meanfield::{integrate, MeanFieldConfig};
use patchmule::metrics::{ensemble_mean, trajectory_deviation};
use patchmule::model::{even_split, PatchModel, RateParameters};
use patchmule::ssa::{run_ensemble, SimulationConfig};
use patchmule::trajectory::Trajectory;

fn main() -> patchmule::Result<()> {
    let n = 4;
    let mut rates = RateParameters::zeros(n);
    for i in 0..n {
        rates.set_alpha(i, 0.3 + 0.1 * i as f64);
        for j in 0..n {
            if i != j {
                rates.set_gamma(i, j, 0.02);
            }
        }
    }
    rates.set_beta(0, 2, 0.008);
    let model = PatchModel::new(rates, even_split(40, n))?;

    let cfg = SimulationConfig::new(30.0, 5)?.with_sample_step(0.5)?;
    let runs = run_ensemble(&model, &cfg, 25)?;
    let mean = ensemble_mean(&runs)?;
    let mf = MeanFieldConfig::new(30.0)?.with_sample_grid(cfg.sample_grid.clone());
    let meanfield = integrate(&model, &mf)?;

    let dir = std::env::temp_dir().join("patchmule-example");
    std::fs::create_dir_all(&dir)?;
    let meta = |kind: &str| {
        vec![
            ("tool".to_string(), "patchmule example".to_string()),
            ("kind".to_string(), kind.to_string()),
            ("seed".to_string(), "5".to_string()),
        ]
    };
    let mean_path = dir.join("ensemble_mean.csv");
    let mf_path = dir.join("meanfield.csv");
    let mut buf = Vec::new();
    mean.write_csv(&mut buf, &meta("ensemble-mean"))?;
    std::fs::write(&mean_path, &buf)?;
    buf.clear();
    meanfield.write_csv(&mut buf, &meta("mean-field"))?;
    std::fs::write(&mf_path, &buf)?;
    println!("wrote {}", mean_path.display());
    println!("wrote {}\n", mf_path.display());

    let a = Trajectory::read_csv(std::io::BufReader::new(std::fs::File::open(&mean_path)?))?;
    let b = Trajectory::read_csv(std::io::BufReader::new(std::fs::File::open(&mf_path)?))?;
    let report = trajectory_deviation(&a, &b)?;
    println!("25-run mean vs mean-field, per-column deviation (worst five):");
    let mut columns: Vec<_> = report.columns.iter().collect();
    columns.sort_by(|x, y| y.max_abs.total_cmp(&x.max_abs));
    for column in columns.iter().take(5) {
        println!(
            "  {:>6}: max {:.4}, rms {:.4}",
            column.column, column.max_abs, column.rms
        );
    }
    println!("overall: max {:.4}, rms {:.4}", report.max_abs, report.rms);
    Ok(())
}
