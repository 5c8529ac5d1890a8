//! The reserve map: bounds, water sources, the base station's route and the
//! contact ranges. Patches are the Voronoi cells of the water sources.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SECONDS_PER_DAY;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn distance_squared(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Axis-aligned rectangular route, traversed counter-clockwise from the
/// minimum corner at constant speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectRoute {
    pub min: Point,
    pub max: Point,
}

impl RectRoute {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    /// Point at the given arc length from the start corner.
    pub fn at_arc_length(&self, arc: f64) -> Point {
        let w = self.width();
        let h = self.height();
        let s = arc.rem_euclid(self.perimeter());
        if s < w {
            Point::new(self.min.x + s, self.min.y)
        } else if s < w + h {
            Point::new(self.max.x, self.min.y + (s - w))
        } else if s < 2.0 * w + h {
            Point::new(self.max.x - (s - w - h), self.max.y)
        } else {
            Point::new(self.min.x, self.max.y - (s - 2.0 * w - h))
        }
    }
}

/// World geometry for the micro-simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldMap {
    pub width_m: f64,
    pub height_m: f64,
    pub water_sources: Vec<Point>,
    pub base_route: RectRoute,
    /// Time for the base station to complete one lap of its route.
    pub base_period_s: f64,
    /// Peer discovery range between two zebras.
    pub peer_range_m: f64,
    /// Radio range between a zebra and the base station.
    pub radio_range_m: f64,
    /// Refractory period after a counted contact for the same pair.
    pub contact_lockout_s: f64,
}

/// Default map edge (20 km square reserve).
pub const DEFAULT_MAP_SIZE_M: f64 = 20_000.0;
/// Default number of water sources.
pub const DEFAULT_WATER_SOURCES: usize = 10;
/// Default peer discovery range.
pub const DEFAULT_PEER_RANGE_M: f64 = 100.0;
/// Default contact lockout (30 minutes).
pub const DEFAULT_LOCKOUT_S: f64 = 1_800.0;
/// The base route is inset this fraction from each map edge by default.
pub const DEFAULT_ROUTE_INSET: f64 = 0.25;

impl WorldMap {
    /// Map with the given sources and the default route (a rectangle inset
    /// 25% from the edges, one lap per day), peer range and lockout.
    pub fn new(width_m: f64, height_m: f64, water_sources: Vec<Point>) -> Result<Self> {
        let map = Self {
            width_m,
            height_m,
            water_sources,
            base_route: RectRoute {
                min: Point::new(DEFAULT_ROUTE_INSET * width_m, DEFAULT_ROUTE_INSET * height_m),
                max: Point::new(
                    (1.0 - DEFAULT_ROUTE_INSET) * width_m,
                    (1.0 - DEFAULT_ROUTE_INSET) * height_m,
                ),
            },
            base_period_s: SECONDS_PER_DAY,
            peer_range_m: DEFAULT_PEER_RANGE_M,
            radio_range_m: 5_000.0,
            contact_lockout_s: DEFAULT_LOCKOUT_S,
        };
        map.validate()?;
        Ok(map)
    }

    /// Uniformly random water sources for a `width x height` map.
    pub fn random_sources<R: Rng>(
        width_m: f64,
        height_m: f64,
        count: usize,
        rng: &mut R,
    ) -> Vec<Point> {
        (0..count)
            .map(|_| Point::new(rng.random_range(0.0..width_m), rng.random_range(0.0..height_m)))
            .collect()
    }

    pub fn with_radio_range(mut self, range_m: f64) -> Self {
        self.radio_range_m = range_m;
        self
    }

    pub fn with_peer_range(mut self, range_m: f64) -> Self {
        self.peer_range_m = range_m;
        self
    }

    pub fn with_route(mut self, route: RectRoute, period_s: f64) -> Self {
        self.base_route = route;
        self.base_period_s = period_s;
        self
    }

    pub fn with_lockout(mut self, lockout_s: f64) -> Self {
        self.contact_lockout_s = lockout_s;
        self
    }

    pub fn n_patches(&self) -> usize {
        self.water_sources.len()
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.width_m).contains(&p.x) && (0.0..=self.height_m).contains(&p.y)
    }

    pub fn diagonal(&self) -> f64 {
        (self.width_m * self.width_m + self.height_m * self.height_m).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width_m > 0.0 && self.height_m > 0.0) {
            return Err(Error::InvalidMap("map dimensions must be positive".into()));
        }
        if self.water_sources.is_empty() {
            return Err(Error::InvalidMap("need at least one water source".into()));
        }
        for p in &self.water_sources {
            if !self.contains(p) {
                return Err(Error::InvalidMap(format!(
                    "water source ({}, {}) outside map",
                    p.x, p.y
                )));
            }
        }
        // Zero ranges are allowed: they model a disabled radio or peer link.
        if self.peer_range_m < 0.0 || self.radio_range_m < 0.0 {
            return Err(Error::InvalidMap("contact ranges must be nonnegative".into()));
        }
        if self.contact_lockout_s < 0.0 {
            return Err(Error::InvalidMap("lockout must be nonnegative".into()));
        }
        if !(self.base_period_s > 0.0) {
            return Err(Error::InvalidMap("route period must be positive".into()));
        }
        let r = &self.base_route;
        if !(r.max.x > r.min.x && r.max.y > r.min.y)
            || !self.contains(&r.min)
            || !self.contains(&r.max)
        {
            return Err(Error::InvalidMap("route rectangle must lie inside the map".into()));
        }
        Ok(())
    }
}

/// Index of the patch containing `point`: the nearest water source by
/// Euclidean distance, ties broken toward the lowest index.
pub fn patch_of(point: &Point, map: &WorldMap) -> Result<usize> {
    if !map.contains(point) {
        return Err(Error::OutOfBounds {
            x: point.x,
            y: point.y,
        });
    }
    let mut best = 0;
    let mut best_d2 = f64::INFINITY;
    for (idx, source) in map.water_sources.iter().enumerate() {
        let d2 = point.distance_squared(source);
        if d2 < best_d2 {
            best = idx;
            best_d2 = d2;
        }
    }
    Ok(best)
}

/// Base-station position at time `t_s`: the route is walked at constant
/// speed, one lap per `base_period_s`, starting from the minimum corner.
pub fn base_position(t_s: f64, map: &WorldMap) -> Point {
    let speed = map.base_route.perimeter() / map.base_period_s;
    map.base_route.at_arc_length(speed * t_s)
}
