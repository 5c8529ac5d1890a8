//! Continuous-space micro-model: map geometry, agent movement and the
//! probe-agent calibration that produces the patch-model rates.
//!
//! Geometry works in meters and seconds; the calibration boundary converts
//! to the patch model's units (days, events per day).

mod calibration;
mod map;
mod movement;

pub use calibration::{
    calibrate, distance_histogram, CalibrationResult, EventCounts, Histogram,
};
pub use map::{
    base_position, patch_of, Point, RectRoute, WorldMap, DEFAULT_LOCKOUT_S, DEFAULT_MAP_SIZE_M,
    DEFAULT_PEER_RANGE_M, DEFAULT_ROUTE_INSET, DEFAULT_WATER_SOURCES,
};
pub use movement::{
    step_agent, AgentMode, ModeSettings, MovementMode, MovementParams, ThirstTrigger, ZebraAgent,
};

/// Simulated seconds per day.
pub const SECONDS_PER_DAY: f64 = 86_400.0;
