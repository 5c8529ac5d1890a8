//! Agent movement: three roaming patterns plus a daily thirst trip.
//!
//! An agent roams with a per-mode speed, resampling its heading (and
//! occasionally its mode) at that mode's decision epochs, and reflecting
//! off the map boundary. Once per simulated day it gets thirsty and heads
//! straight to its nearest water source at constant speed; on arrival it
//! resumes roaming.
//!
//! The default speeds, intervals and switch probability are placeholders to
//! be tuned against field data; the structure, not the numbers, is fixed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::map::{patch_of, Point, WorldMap};
use super::SECONDS_PER_DAY;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MovementMode {
    Grazing,
    GrazeWalking,
    FastMoving,
}

const ALL_MODES: [MovementMode; 3] = [
    MovementMode::Grazing,
    MovementMode::GrazeWalking,
    MovementMode::FastMoving,
];

/// Speed and heading-decision interval for one movement mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSettings {
    pub speed_mps: f64,
    pub decision_interval_s: f64,
}

/// When, within each day, an agent gets thirsty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThirstTrigger {
    /// A fresh uniform time in each day.
    UniformDaily,
    /// The same second-of-day every day.
    FixedSecondOfDay(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementParams {
    pub grazing: ModeSettings,
    pub graze_walking: ModeSettings,
    pub fast_moving: ModeSettings,
    /// Probability of switching to another mode at a decision epoch.
    pub mode_switch_prob: f64,
    pub thirst_speed_mps: f64,
    pub thirst_trigger: ThirstTrigger,
    /// Simulation step; one movement decision per step.
    pub step_s: f64,
}

impl Default for MovementParams {
    fn default() -> Self {
        Self {
            grazing: ModeSettings {
                speed_mps: 0.1,
                decision_interval_s: 180.0,
            },
            graze_walking: ModeSettings {
                speed_mps: 0.5,
                decision_interval_s: 180.0,
            },
            fast_moving: ModeSettings {
                speed_mps: 1.5,
                decision_interval_s: 180.0,
            },
            mode_switch_prob: 0.1,
            thirst_speed_mps: 1.0,
            thirst_trigger: ThirstTrigger::UniformDaily,
            step_s: 180.0,
        }
    }
}

impl MovementParams {
    pub fn mode(&self, mode: MovementMode) -> &ModeSettings {
        match mode {
            MovementMode::Grazing => &self.grazing,
            MovementMode::GrazeWalking => &self.graze_walking,
            MovementMode::FastMoving => &self.fast_moving,
        }
    }

    fn decision_steps(&self, mode: MovementMode) -> u32 {
        ((self.mode(mode).decision_interval_s / self.step_s).round() as u32).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        for settings in [&self.grazing, &self.graze_walking, &self.fast_moving] {
            if !settings.speed_mps.is_finite() || settings.speed_mps < 0.0 {
                return Err(Error::InvalidMovement("speeds must be nonnegative".into()));
            }
            if !(settings.decision_interval_s > 0.0) {
                return Err(Error::InvalidMovement(
                    "decision intervals must be positive".into(),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.mode_switch_prob) {
            return Err(Error::InvalidMovement(
                "mode switch probability must lie in [0, 1]".into(),
            ));
        }
        if !self.thirst_speed_mps.is_finite() || self.thirst_speed_mps < 0.0 {
            return Err(Error::InvalidMovement("thirst speed must be nonnegative".into()));
        }
        if let ThirstTrigger::FixedSecondOfDay(s) = self.thirst_trigger {
            if !(0.0..SECONDS_PER_DAY).contains(&s) {
                return Err(Error::InvalidMovement(format!(
                    "thirst second-of-day {s} outside [0, 86400)"
                )));
            }
        }
        if !(self.step_s > 0.0) {
            return Err(Error::InvalidMovement("step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentMode {
    Roaming(MovementMode),
    /// Heading straight to the water source with this index.
    Thirsty { target: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZebraAgent {
    pub position: Point,
    pub heading: f64,
    pub mode: AgentMode,
    pub home_patch: usize,
    steps_since_decision: u32,
    next_thirst_s: f64,
}

impl ZebraAgent {
    pub fn new<R: Rng>(
        home_patch: usize,
        position: Point,
        params: &MovementParams,
        rng: &mut R,
    ) -> Self {
        Self {
            position,
            heading: rng.random_range(0.0..std::f64::consts::TAU),
            mode: AgentMode::Roaming(MovementMode::Grazing),
            home_patch,
            steps_since_decision: 0,
            next_thirst_s: draw_thirst_time(0, params, rng),
        }
    }

    /// Resets roaming state after a relocation, keeping the thirst schedule.
    pub(crate) fn relocate<R: Rng>(&mut self, position: Point, rng: &mut R) {
        self.position = position;
        self.heading = rng.random_range(0.0..std::f64::consts::TAU);
        self.mode = AgentMode::Roaming(MovementMode::Grazing);
        self.steps_since_decision = 0;
    }
}

/// Thirst onset within the given day.
fn draw_thirst_time<R: Rng>(day: u64, params: &MovementParams, rng: &mut R) -> f64 {
    let second = match params.thirst_trigger {
        ThirstTrigger::UniformDaily => rng.random_range(0.0..SECONDS_PER_DAY),
        ThirstTrigger::FixedSecondOfDay(s) => s,
    };
    day as f64 * SECONDS_PER_DAY + second
}

/// Advances one agent by one decision step of length `dt_s`, starting at
/// absolute time `now_s`.
///
/// Thirst onset is checked first; a thirsty agent moves straight toward its
/// target source and arrives (exactly on the source) once the remaining
/// distance fits in one step. Roaming agents resample heading and possibly
/// mode at their mode's decision epochs, then move along their heading,
/// reflecting off the map boundary.
pub fn step_agent<R: Rng>(
    agent: &mut ZebraAgent,
    now_s: f64,
    dt_s: f64,
    params: &MovementParams,
    map: &WorldMap,
    rng: &mut R,
) {
    if now_s >= agent.next_thirst_s {
        if let AgentMode::Roaming(_) = agent.mode {
            let target = patch_of(&agent.position, map)
                .expect("agent positions stay within the map");
            agent.mode = AgentMode::Thirsty { target };
        }
        // Already-thirsty agents keep their trip; either way the next onset
        // moves to the following day.
        let next_day = (now_s / SECONDS_PER_DAY).floor() as u64 + 1;
        agent.next_thirst_s = draw_thirst_time(next_day, params, rng);
    }

    match agent.mode {
        AgentMode::Thirsty { target } => {
            let source = map.water_sources[target];
            let travel = params.thirst_speed_mps * dt_s;
            let dist = agent.position.distance(&source);
            if dist <= travel {
                agent.position = source;
                agent.mode = AgentMode::Roaming(MovementMode::Grazing);
                agent.heading = rng.random_range(0.0..std::f64::consts::TAU);
                agent.steps_since_decision = 0;
            } else {
                let scale = travel / dist;
                agent.position.x += (source.x - agent.position.x) * scale;
                agent.position.y += (source.y - agent.position.y) * scale;
            }
        }
        AgentMode::Roaming(mode) => {
            if agent.steps_since_decision >= params.decision_steps(mode) {
                agent.steps_since_decision = 0;
                agent.heading = rng.random_range(0.0..std::f64::consts::TAU);
                if rng.random::<f64>() < params.mode_switch_prob {
                    let others: Vec<MovementMode> =
                        ALL_MODES.iter().copied().filter(|m| *m != mode).collect();
                    agent.mode = AgentMode::Roaming(others[rng.random_range(0..others.len())]);
                }
            }
            agent.steps_since_decision += 1;
            let mode = match agent.mode {
                AgentMode::Roaming(m) => m,
                AgentMode::Thirsty { .. } => unreachable!(),
            };
            let speed = params.mode(mode).speed_mps;
            let x = agent.position.x + speed * dt_s * agent.heading.cos();
            let y = agent.position.y + speed * dt_s * agent.heading.sin();
            let (x, flipped_x) = reflect(x, map.width_m);
            let (y, flipped_y) = reflect(y, map.height_m);
            agent.position = Point::new(x, y);
            if flipped_x {
                agent.heading = std::f64::consts::PI - agent.heading;
            }
            if flipped_y {
                agent.heading = -agent.heading;
            }
        }
    }
}

/// Folds a coordinate back into `[0, limit]`, reporting whether the
/// direction along this axis ended up mirrored.
fn reflect(value: f64, limit: f64) -> (f64, bool) {
    let mut v = value;
    let mut flipped = false;
    loop {
        if v < 0.0 {
            v = -v;
            flipped = !flipped;
        } else if v > limit {
            v = 2.0 * limit - v;
            flipped = !flipped;
        } else {
            return (v, flipped);
        }
    }
}
