//! Delivery-rate metric, ensemble statistics and trajectory comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{calibrate, MovementParams, WorldMap};
use crate::layout::StateLayout;
use crate::model::{even_split, PatchModel, SystemState};
use crate::ssa::{child_seed, simulate, Placement, SimulationConfig};
use crate::trajectory::Trajectory;

/// Fraction of all generated data that reached the base station by time `t`,
/// together with the per-patch backlog behind it.
///
/// Each zebra generates data at a constant rate; the amount generated per
/// zebra-day cancels out of the fraction, so it is fixed to one internally
/// and never taken as an input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeliveryReport {
    /// `1 - sum_i N_i A_i / (N t)`; at most 1, negative only if ages were
    /// initialized above zero.
    pub r: f64,
    /// Undelivered backlog `N_i * A_i` per patch, in zebra-days.
    pub per_patch_undelivered: Vec<f64>,
    pub t: f64,
    pub n_total: u64,
}

/// Delivery rate of a state at elapsed time `t`.
pub fn delivery_rate(state: &SystemState, n_total: u64, t: f64) -> Result<DeliveryReport> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::InvalidEvaluationTime(t));
    }
    let actual = state.total_population();
    if actual != n_total {
        return Err(Error::PopulationMismatch {
            declared: n_total,
            actual,
        });
    }
    let per_patch: Vec<f64> = (0..state.n_patches())
        .map(|i| state.population(i) as f64 * state.base_age(i))
        .collect();
    let undelivered: f64 = per_patch.iter().sum();
    Ok(DeliveryReport {
        r: 1.0 - undelivered / (n_total as f64 * t),
        per_patch_undelivered: per_patch,
        t,
        n_total,
    })
}

/// Delivery rate of a flattened (possibly real-valued) state row, for
/// mean-field trajectories.
pub fn delivery_rate_of_row(row: &[f64], layout: &StateLayout, t: f64) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::InvalidEvaluationTime(t));
    }
    let n = layout.n_patches();
    let total: f64 = (0..n).map(|i| row[layout.population(i)]).sum();
    let undelivered: f64 = (0..n)
        .map(|i| row[layout.population(i)] * row[layout.base_age(i)])
        .sum();
    Ok(1.0 - undelivered / (total * t))
}

/// Time-averaged variant of the delivery rate: the mean of `R(t)` over all
/// positive sample times of a trajectory. The headline metric is the
/// end-of-horizon value; this one is offered behind a CLI flag.
pub fn time_averaged_delivery_rate(trajectory: &Trajectory) -> Result<f64> {
    let layout = trajectory.layout();
    let mut sum = 0.0;
    let mut count = 0u64;
    for (t, row) in trajectory.times().iter().zip(trajectory.rows()) {
        if *t > 0.0 {
            sum += delivery_rate_of_row(row, &layout, *t)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidEvaluationTime(0.0));
    }
    Ok(sum / count as f64)
}

/// Pointwise mean of every state component across runs sharing one grid.
pub fn ensemble_mean(trajectories: &[Trajectory]) -> Result<Trajectory> {
    let first = trajectories.first().ok_or(Error::EmptyEnsemble)?;
    for t in &trajectories[1..] {
        if t.layout() != first.layout() {
            return Err(Error::GridMismatch("mixed patch counts".into()));
        }
        if t.times() != first.times() {
            return Err(Error::GridMismatch("observation grids differ".into()));
        }
    }
    let scale = 1.0 / trajectories.len() as f64;
    let mut mean = Trajectory::new(first.n_patches());
    for (k, &t) in first.times().iter().enumerate() {
        let mut row = vec![0.0; first.layout().width()];
        for trajectory in trajectories {
            for (acc, v) in row.iter_mut().zip(trajectory.row(k)) {
                *acc += v;
            }
        }
        for v in &mut row {
            *v *= scale;
        }
        mean.push(t, row);
    }
    Ok(mean)
}

/// Per-column deviation between two trajectories on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnDeviation {
    pub column: String,
    pub max_abs: f64,
    /// Root-mean-square deviation over the grid.
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub columns: Vec<ColumnDeviation>,
    pub max_abs: f64,
    pub rms: f64,
}

impl DeviationReport {
    /// Deviations restricted to columns whose name passes the filter.
    pub fn filtered_max(&self, filter: impl Fn(&str) -> bool) -> f64 {
        self.columns
            .iter()
            .filter(|c| filter(&c.column))
            .map(|c| c.max_abs)
            .fold(0.0, f64::max)
    }
}

/// Compares two trajectories column by column. The observation grids and
/// layouts must match exactly.
pub fn trajectory_deviation(a: &Trajectory, b: &Trajectory) -> Result<DeviationReport> {
    if a.layout() != b.layout() {
        return Err(Error::GridMismatch("column layouts differ".into()));
    }
    if a.times() != b.times() {
        return Err(Error::GridMismatch("observation grids differ".into()));
    }
    if a.is_empty() {
        return Err(Error::GridMismatch("trajectories are empty".into()));
    }
    let layout = a.layout();
    let names: Vec<String> = layout
        .csv_header()
        .split(',')
        .skip(1)
        .map(str::to_string)
        .collect();
    let samples = a.len() as f64;
    let mut columns = Vec::with_capacity(layout.width());
    for (col, name) in names.into_iter().enumerate() {
        let mut max_abs = 0.0f64;
        let mut sum_sq = 0.0;
        for k in 0..a.len() {
            let d = a.row(k)[col] - b.row(k)[col];
            max_abs = max_abs.max(d.abs());
            sum_sq += d * d;
        }
        columns.push(ColumnDeviation {
            column: name,
            max_abs,
            rms: (sum_sq / samples).sqrt(),
        });
    }
    let max_abs = columns.iter().map(|c| c.max_abs).fold(0.0, f64::max);
    let rms = (columns.iter().map(|c| c.rms * c.rms).sum::<f64>() / columns.len() as f64).sqrt();
    Ok(DeviationReport {
        columns,
        max_abs,
        rms,
    })
}

/// Radio-range sweep plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub ranges_m: Vec<f64>,
    pub runs_per_range: usize,
    pub horizon_days: f64,
    pub seed: u64,
    /// Length of the probe-agent calibration behind each run.
    pub calibration_days: f64,
    /// Zebras in the simulated system (placed uniformly per run).
    pub population: u64,
    /// Water sources drawn per run.
    pub n_sources: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ranges_m.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one range".into()));
        }
        if self.ranges_m.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidConfig("ranges must be nonnegative".into()));
        }
        if self.runs_per_range == 0 {
            return Err(Error::InvalidConfig("sweep needs at least one run per range".into()));
        }
        if !self.horizon_days.is_finite() || self.horizon_days <= 0.0 {
            return Err(Error::InvalidConfig("sweep horizon must be positive".into()));
        }
        if self.population == 0 {
            return Err(Error::InvalidConfig("sweep needs at least one zebra".into()));
        }
        if self.n_sources == 0 {
            return Err(Error::InvalidConfig("sweep needs at least one water source".into()));
        }
        Ok(())
    }
}

/// One sweep table row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub range_m: f64,
    pub mean_r: f64,
    pub std_r: f64,
    pub runs: usize,
}

/// Sweeps the base-station radio range: for each range and run, a fresh
/// water-source layout is drawn, the rates are calibrated and one
/// stochastic run is scored by its delivery rate at the horizon.
///
/// Run `k` reuses the same source layout and movement randomness across all
/// ranges (the movement process does not depend on the radio range), so the
/// sweep compares ranges under common random numbers. Results are
/// deterministic in `(seed, config)` regardless of worker scheduling.
pub fn sweep_radio_range(
    template: &WorldMap,
    movement: &MovementParams,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    movement.validate()?;

    let jobs: Vec<(usize, usize)> = (0..cfg.ranges_m.len())
        .flat_map(|ridx| (0..cfg.runs_per_range).map(move |k| (ridx, k)))
        .collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(ridx, k)| -> Result<f64> {
            let run_master = child_seed(cfg.seed, k as u64);
            let mut layout_rng = ChaCha8Rng::seed_from_u64(child_seed(run_master, 0));
            let mut map = template.clone();
            map.water_sources = WorldMap::random_sources(
                template.width_m,
                template.height_m,
                cfg.n_sources,
                &mut layout_rng,
            );
            map.radio_range_m = cfg.ranges_m[ridx];
            map.validate()?;

            let calibration = calibrate(&map, movement, cfg.calibration_days, child_seed(run_master, 1))?;
            let model = PatchModel::new(
                calibration.rates,
                even_split(cfg.population, cfg.n_sources),
            )?;
            let sim = SimulationConfig::new(cfg.horizon_days, child_seed(run_master, 2 + ridx as u64))?
                .with_sample_grid(vec![cfg.horizon_days])
                .with_placement(Placement::UniformRandom);
            let trajectory = simulate(&model, &sim)?;
            let state = trajectory.snapshot(trajectory.len() - 1)?;
            Ok(delivery_rate(&state, cfg.population, cfg.horizon_days)?.r)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut rows = Vec::with_capacity(cfg.ranges_m.len());
    for (ridx, &range_m) in cfg.ranges_m.iter().enumerate() {
        let rs = &scores[ridx * cfg.runs_per_range..(ridx + 1) * cfg.runs_per_range];
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        let std = if rs.len() > 1 {
            (rs.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (rs.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        rows.push(SweepRow {
            range_m,
            mean_r: mean,
            std_r: std,
            runs: rs.len(),
        });
    }
    Ok(rows)
}
