//! Probe-agent calibration of the patch-model rates.
//!
//! One agent per patch roams the map together with the base station. Base
//! and peer contacts are counted within their ranges subject to the
//! per-pair lockout, migrations are counted when an agent reaches a foreign
//! water source, and every count divided by the simulated duration is the
//! maximum-likelihood rate estimate for the corresponding parameter.
//!
//! At each day boundary any agent found outside its home patch is put back
//! at a uniformly random point of it, so every patch hosts exactly one
//! probe agent at the start of every day.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::map::{base_position, patch_of, Point, WorldMap};
use super::movement::{step_agent, MovementParams, ZebraAgent};
use super::SECONDS_PER_DAY;
use crate::error::{Error, Result};
use crate::model::RateParameters;
use crate::ssa::RNG_ALGORITHM;

/// Raw event tallies behind the rate estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventCounts {
    /// Base contacts per home patch.
    pub base: Vec<u64>,
    /// Peer contacts per unordered home-patch pair (symmetric).
    pub peer: Vec<Vec<u64>>,
    /// Migrations per (home patch, reached patch).
    pub migration: Vec<Vec<u64>>,
}

impl EventCounts {
    fn zeros(n: usize) -> Self {
        Self {
            base: vec![0; n],
            peer: vec![vec![0; n]; n],
            migration: vec![vec![0; n]; n],
        }
    }

    pub fn total(&self) -> u64 {
        self.base.iter().sum::<u64>()
            + self.peer.iter().flatten().sum::<u64>() / 2
            + self.migration.iter().flatten().sum::<u64>()
    }
}

/// Calibrated rates plus everything needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub rates: RateParameters,
    pub event_counts: EventCounts,
    pub sim_duration_days: f64,
    pub radio_range_m: f64,
    /// Set when the run observed no event at all; the rates are then zero
    /// and the duration was probably too short.
    pub no_events: bool,
    pub seed: u64,
    pub rng_algorithm: String,
    pub map: WorldMap,
    pub movement: MovementParams,
}

/// Draws a uniform point within the given patch by rejection sampling.
fn uniform_point_in_patch<R: Rng>(map: &WorldMap, patch: usize, rng: &mut R) -> Point {
    for _ in 0..100_000 {
        let p = Point::new(
            rng.random_range(0.0..=map.width_m),
            rng.random_range(0.0..=map.height_m),
        );
        if patch_of(&p, map).expect("sampled point is in bounds") == patch {
            return p;
        }
    }
    // A patch so small that rejection fails always contains its own source.
    map.water_sources[patch]
}

/// Runs the probe-agent micro-simulation and estimates all rates.
pub fn calibrate(
    map: &WorldMap,
    params: &MovementParams,
    duration_days: f64,
    seed: u64,
) -> Result<CalibrationResult> {
    map.validate()?;
    params.validate()?;
    if !duration_days.is_finite() || duration_days < 1.0 {
        return Err(Error::InvalidCalibration(format!(
            "duration must be at least one day, got {duration_days}"
        )));
    }

    let n = map.n_patches();
    let step = params.step_s;
    let steps_per_day = (SECONDS_PER_DAY / step).round().max(1.0) as u64;
    let total_steps = (duration_days * SECONDS_PER_DAY / step).round() as u64;
    // Reaching a source means getting within one decision step of travel,
    // the same rule the thirst trip uses for arrival.
    let arrival_radius_sq = (params.thirst_speed_mps * step).powi(2);
    let radio_sq = map.radio_range_m * map.radio_range_m;
    let peer_sq = map.peer_range_m * map.peer_range_m;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agents: Vec<ZebraAgent> = (0..n)
        .map(|patch| {
            let pos = uniform_point_in_patch(map, patch, &mut rng);
            ZebraAgent::new(patch, pos, params, &mut rng)
        })
        .collect();

    let mut counts = EventCounts::zeros(n);
    let mut base_locked_until = vec![f64::NEG_INFINITY; n];
    let mut peer_locked_until = vec![vec![f64::NEG_INFINITY; n]; n];
    let mut migrated = vec![false; n];

    for step_idx in 0..total_steps {
        let now = step_idx as f64 * step;
        if step_idx > 0 && step_idx % steps_per_day == 0 {
            // Day boundary: every patch gets its probe agent back.
            for (idx, agent) in agents.iter_mut().enumerate() {
                let current = patch_of(&agent.position, map)?;
                if current != agent.home_patch {
                    let pos = uniform_point_in_patch(map, agent.home_patch, &mut rng);
                    agent.relocate(pos, &mut rng);
                }
                migrated[idx] = false;
            }
        }

        for agent in agents.iter_mut() {
            step_agent(agent, now, step, params, map, &mut rng);
        }
        let t = (step_idx + 1) as f64 * step;
        let base = base_position(t, map);

        for (idx, agent) in agents.iter().enumerate() {
            if agent.position.distance_squared(&base) <= radio_sq && t >= base_locked_until[idx] {
                counts.base[agent.home_patch] += 1;
                base_locked_until[idx] = t + map.contact_lockout_s;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if agents[i].position.distance_squared(&agents[j].position) <= peer_sq
                    && t >= peer_locked_until[i][j]
                {
                    let (a, b) = (agents[i].home_patch, agents[j].home_patch);
                    counts.peer[a][b] += 1;
                    counts.peer[b][a] += 1;
                    peer_locked_until[i][j] = t + map.contact_lockout_s;
                }
            }
        }
        for (idx, agent) in agents.iter().enumerate() {
            if migrated[idx] {
                continue;
            }
            for (target, source) in map.water_sources.iter().enumerate() {
                if target != agent.home_patch
                    && agent.position.distance_squared(source) <= arrival_radius_sq
                {
                    counts.migration[agent.home_patch][target] += 1;
                    migrated[idx] = true;
                    break;
                }
            }
        }
    }

    let mut rates = RateParameters::zeros(n);
    for i in 0..n {
        rates.set_alpha(i, counts.base[i] as f64 / duration_days);
        for j in (i + 1)..n {
            rates.set_beta(i, j, counts.peer[i][j] as f64 / duration_days);
        }
        for j in 0..n {
            if j != i {
                rates.set_gamma(i, j, counts.migration[i][j] as f64 / duration_days);
            }
        }
    }
    let no_events = counts.total() == 0;
    Ok(CalibrationResult {
        rates,
        event_counts: counts,
        sim_duration_days: duration_days,
        radio_range_m: map.radio_range_m,
        no_events,
        seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        map: map.clone(),
        movement: params.clone(),
    })
}

/// Normalized histogram of agent-to-source distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// Probability mass per bin; sums to one.
    pub mass: Vec<f64>,
    pub samples: u64,
}

impl Histogram {
    /// L1 distance between two histograms over the same binning.
    pub fn l1_distance(&self, other: &Histogram) -> Result<f64> {
        if self.mass.len() != other.mass.len() || self.bin_width != other.bin_width {
            return Err(Error::GridMismatch(
                "histograms have different binnings".into(),
            ));
        }
        Ok(self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }
}

/// Samples the distance between a lone agent and the map's single water
/// source at every decision step and returns the normalized histogram over
/// `[0, diagonal]`.
pub fn distance_histogram(
    map: &WorldMap,
    params: &MovementParams,
    duration_days: f64,
    bins: usize,
    seed: u64,
) -> Result<Histogram> {
    map.validate()?;
    params.validate()?;
    if map.n_patches() != 1 {
        return Err(Error::InvalidCalibration(format!(
            "distance histogram needs exactly one water source, got {}",
            map.n_patches()
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidCalibration("need at least one bin".into()));
    }
    if !duration_days.is_finite() || duration_days <= 0.0 {
        return Err(Error::InvalidCalibration(format!(
            "duration must be positive, got {duration_days}"
        )));
    }

    let step = params.step_s;
    let total_steps = (duration_days * SECONDS_PER_DAY / step).round() as u64;
    let bin_width = map.diagonal() / bins as f64;
    let source = map.water_sources[0];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Point::new(
        rng.random_range(0.0..=map.width_m),
        rng.random_range(0.0..=map.height_m),
    );
    let mut agent = ZebraAgent::new(0, start, params, &mut rng);
    let mut counts = vec![0u64; bins];
    for step_idx in 0..total_steps {
        let now = step_idx as f64 * step;
        step_agent(&mut agent, now, step, params, map, &mut rng);
        let dist = agent.position.distance(&source);
        let bin = ((dist / bin_width) as usize).min(bins - 1);
        counts[bin] += 1;
    }
    let total: u64 = counts.iter().sum();
    Ok(Histogram {
        bin_width,
        mass: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        samples: total,
    })
}
