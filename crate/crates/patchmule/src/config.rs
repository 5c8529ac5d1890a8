//! Experiment configuration: a TOML document with `map`, `movement`,
//! `model`, `simulation`, `sweep` and `output` sections.
//!
//! Every key has a default, so the empty document is a valid experiment
//! (the scenario defaults: 20 km x 20 km map, 10 water sources, 50 zebras,
//! 90-day runs). Unknown keys are rejected, and all values are checked
//! before anything runs. `schema/experiment.schema.json` documents the
//! format; `schema/reference.toml` is a fully commented example.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    ModeSettings, MovementParams, Point, RectRoute, ThirstTrigger, WorldMap, DEFAULT_LOCKOUT_S,
    DEFAULT_MAP_SIZE_M, DEFAULT_PEER_RANGE_M, DEFAULT_ROUTE_INSET, DEFAULT_WATER_SOURCES,
    SECONDS_PER_DAY,
};
use crate::meanfield::DEFAULT_STEP_DAYS;
use crate::metrics::SweepConfig;
use crate::model::{even_split, PatchModel, RateParameters};
use crate::ssa::{child_seed, Placement, SimulationConfig, DEFAULT_SAMPLE_STEP_DAYS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub map: MapSection,
    #[serde(default)]
    pub movement: MovementSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapSection {
    pub width_m: f64,
    pub height_m: f64,
    /// Number of water sources drawn uniformly from the seed; ignored when
    /// explicit coordinates are given.
    pub water_sources: usize,
    /// Explicit water-source coordinates as `[x, y]` pairs.
    pub water_source_points: Option<Vec<[f64; 2]>>,
    pub peer_range_m: f64,
    pub radio_range_m: f64,
    pub contact_lockout_min: f64,
    /// The base route rectangle is inset this fraction from each edge.
    pub route_inset: f64,
    pub base_period_days: f64,
}

impl Default for MapSection {
    fn default() -> Self {
        Self {
            width_m: DEFAULT_MAP_SIZE_M,
            height_m: DEFAULT_MAP_SIZE_M,
            water_sources: DEFAULT_WATER_SOURCES,
            water_source_points: None,
            peer_range_m: DEFAULT_PEER_RANGE_M,
            radio_range_m: 5_000.0,
            contact_lockout_min: DEFAULT_LOCKOUT_S / 60.0,
            route_inset: DEFAULT_ROUTE_INSET,
            base_period_days: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MovementSection {
    pub grazing_speed_mps: f64,
    pub graze_walking_speed_mps: f64,
    pub fast_moving_speed_mps: f64,
    /// Heading/mode decision interval, shared by the three modes.
    pub decision_interval_s: f64,
    pub mode_switch_prob: f64,
    pub thirst_speed_mps: f64,
    /// Fixed second-of-day of the daily thirst onset; omit for a fresh
    /// uniform time each day.
    pub thirst_second_of_day: Option<f64>,
    /// Duration of the probe-agent calibration.
    pub calibration_days: f64,
}

impl Default for MovementSection {
    fn default() -> Self {
        let defaults = MovementParams::default();
        Self {
            grazing_speed_mps: defaults.grazing.speed_mps,
            graze_walking_speed_mps: defaults.graze_walking.speed_mps,
            fast_moving_speed_mps: defaults.fast_moving.speed_mps,
            decision_interval_s: defaults.step_s,
            mode_switch_prob: defaults.mode_switch_prob,
            thirst_speed_mps: defaults.thirst_speed_mps,
            thirst_second_of_day: None,
            calibration_days: 3_650.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub population: u64,
    /// `"uniform"` draws each zebra's patch uniformly per run; `"even"`
    /// splits the population deterministically.
    pub placement: PlacementChoice,
    /// Explicit initial population per patch; overrides `placement`.
    pub initial_population: Option<Vec<u64>>,
    pub initial_age_days: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementChoice {
    Uniform,
    Even,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            population: 50,
            placement: PlacementChoice::Uniform,
            initial_population: None,
            initial_age_days: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub horizon_days: f64,
    pub sample_step_days: f64,
    pub seed: u64,
    pub runs: usize,
    /// Fixed step of the mean-field integrator.
    pub meanfield_step_days: f64,
    /// Record the per-run event log (large; off by default).
    pub event_log: bool,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            horizon_days: crate::ssa::DEFAULT_HORIZON_DAYS,
            sample_step_days: DEFAULT_SAMPLE_STEP_DAYS,
            seed: 0,
            runs: 20,
            meanfield_step_days: DEFAULT_STEP_DAYS,
            event_log: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Radio ranges to sweep; defaults to 1 km .. 10 km in 10 steps.
    pub ranges_m: Vec<f64>,
    pub runs_per_range: usize,
    /// Calibration length behind each sweep run; shorter than the
    /// standalone calibration because one is run per (range, run) pair.
    pub calibration_days: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            ranges_m: (1..=10).map(|k| k as f64 * 1_000.0).collect(),
            runs_per_range: 20,
            calibration_days: 365.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("config does not match schema: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.map;
        if !(m.width_m > 0.0 && m.height_m > 0.0) {
            return Err(Error::InvalidConfig("map dimensions must be positive".into()));
        }
        if m.water_source_points.is_none() && m.water_sources == 0 {
            return Err(Error::InvalidConfig("need at least one water source".into()));
        }
        if !(0.0..0.5).contains(&m.route_inset) {
            return Err(Error::InvalidConfig("route_inset must lie in [0, 0.5)".into()));
        }
        if m.peer_range_m < 0.0 || m.radio_range_m < 0.0 || m.contact_lockout_min < 0.0 {
            return Err(Error::InvalidConfig("ranges and lockout must be nonnegative".into()));
        }
        if !(m.base_period_days > 0.0) {
            return Err(Error::InvalidConfig("base_period_days must be positive".into()));
        }
        self.movement_params().validate()?;
        if !(self.movement.calibration_days >= 1.0) {
            return Err(Error::InvalidConfig("calibration_days must be at least 1".into()));
        }
        let model = &self.model;
        if model.population == 0 {
            return Err(Error::InvalidConfig("population must be at least 1".into()));
        }
        if let Some(pops) = &model.initial_population {
            if pops.iter().sum::<u64>() != model.population {
                return Err(Error::InvalidConfig(
                    "initial_population must sum to population".into(),
                ));
            }
        }
        if !(model.initial_age_days >= 0.0) {
            return Err(Error::InvalidConfig("initial_age_days must be nonnegative".into()));
        }
        let sim = &self.simulation;
        if !(sim.horizon_days > 0.0) || !(sim.sample_step_days > 0.0) {
            return Err(Error::InvalidConfig(
                "horizon_days and sample_step_days must be positive".into(),
            ));
        }
        if sim.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if !(sim.meanfield_step_days > 0.0) {
            return Err(Error::InvalidConfig("meanfield_step_days must be positive".into()));
        }
        let sweep = &self.sweep;
        if sweep.ranges_m.is_empty() || sweep.runs_per_range == 0 {
            return Err(Error::InvalidConfig("sweep must have ranges and runs".into()));
        }
        if !(sweep.calibration_days >= 1.0) {
            return Err(Error::InvalidConfig(
                "sweep calibration_days must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Resolves the world map; random sources are drawn from a stream
    /// derived from `seed`.
    pub fn resolve_map(&self, seed: u64) -> Result<WorldMap> {
        let m = &self.map;
        let sources = match &m.water_source_points {
            Some(points) => points.iter().map(|p| Point::new(p[0], p[1])).collect(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 0));
                WorldMap::random_sources(m.width_m, m.height_m, m.water_sources, &mut rng)
            }
        };
        let route = RectRoute {
            min: Point::new(m.route_inset * m.width_m, m.route_inset * m.height_m),
            max: Point::new(
                (1.0 - m.route_inset) * m.width_m,
                (1.0 - m.route_inset) * m.height_m,
            ),
        };
        let map = WorldMap::new(m.width_m, m.height_m, sources)?
            .with_route(route, m.base_period_days * SECONDS_PER_DAY)
            .with_peer_range(m.peer_range_m)
            .with_radio_range(m.radio_range_m)
            .with_lockout(m.contact_lockout_min * 60.0);
        map.validate()?;
        Ok(map)
    }

    pub fn movement_params(&self) -> MovementParams {
        let mv = &self.movement;
        let mode = |speed: f64| ModeSettings {
            speed_mps: speed,
            decision_interval_s: mv.decision_interval_s,
        };
        MovementParams {
            grazing: mode(mv.grazing_speed_mps),
            graze_walking: mode(mv.graze_walking_speed_mps),
            fast_moving: mode(mv.fast_moving_speed_mps),
            mode_switch_prob: mv.mode_switch_prob,
            thirst_speed_mps: mv.thirst_speed_mps,
            thirst_trigger: match mv.thirst_second_of_day {
                Some(s) => ThirstTrigger::FixedSecondOfDay(s),
                None => ThirstTrigger::UniformDaily,
            },
            step_s: mv.decision_interval_s,
        }
    }

    /// Builds the patch model around externally supplied rates.
    pub fn build_model(&self, rates: RateParameters) -> Result<PatchModel> {
        let n = rates.n_patches();
        let pops = match &self.model.initial_population {
            Some(explicit) => {
                if explicit.len() != n {
                    return Err(Error::InvalidConfig(format!(
                        "initial_population has {} patches, rates have {n}",
                        explicit.len()
                    )));
                }
                explicit.clone()
            }
            None => even_split(self.model.population, n),
        };
        PatchModel::new(rates, pops)?.with_initial_age(self.model.initial_age_days)
    }

    /// Placement behavior for stochastic runs.
    pub fn placement(&self) -> Placement {
        if self.model.initial_population.is_some() {
            return Placement::FromModel;
        }
        match self.model.placement {
            PlacementChoice::Uniform => Placement::UniformRandom,
            PlacementChoice::Even => Placement::FromModel,
        }
    }

    /// The expected initial population vector, used by the mean-field
    /// integration for like-for-like comparisons with ensembles.
    pub fn expected_initial_population(&self, n_patches: usize) -> Vec<f64> {
        match (&self.model.initial_population, self.model.placement) {
            (Some(explicit), _) => explicit.iter().map(|&c| c as f64).collect(),
            (None, PlacementChoice::Uniform) => {
                vec![self.model.population as f64 / n_patches as f64; n_patches]
            }
            (None, PlacementChoice::Even) => even_split(self.model.population, n_patches)
                .into_iter()
                .map(|c| c as f64)
                .collect(),
        }
    }

    pub fn simulation_config(&self, seed: u64) -> Result<SimulationConfig> {
        Ok(SimulationConfig::new(self.simulation.horizon_days, seed)?
            .with_sample_step(self.simulation.sample_step_days)?
            .with_event_log(self.simulation.event_log)
            .with_placement(self.placement()))
    }

    pub fn sweep_config(&self, seed: u64) -> SweepConfig {
        SweepConfig {
            ranges_m: self.sweep.ranges_m.clone(),
            runs_per_range: self.sweep.runs_per_range,
            horizon_days: self.simulation.horizon_days,
            seed,
            calibration_days: self.sweep.calibration_days,
            population: self.model.population,
            n_sources: self.map.water_sources,
        }
    }
}
