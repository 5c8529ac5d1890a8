//! Patch-model state space and exact reset semantics.
//!
//! The system tracks, for `n` spatial patches, the zebra count `N_i` per
//! patch, the age `A_i` of the freshest data from patch `i` held by the
//! mobile base station, and the age `A_i_j` of the freshest data from patch
//! `i` held by patch `j`. Ages grow at unit rate between events; the three
//! event families reset them:
//!
//! * base contact at patch `i`: the base receives everything patch `i`
//!   stores (own data plus relayed copies),
//! * peer contact between patches `i` and `j`: both patches flood-exchange
//!   all stored data and keep the fresher copy of everything,
//! * patch move `i -> j`: one zebra migrates and carries patch `i`'s stored
//!   data into patch `j`.
//!
//! Internally ages are kept as freshness timestamps (`age = t - stamp`), so
//! advancing the clock is exact and O(1) and every reset reduces to a `max`
//! over stamps. The public API speaks in ages only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{off_diagonal_index, StateLayout};

/// Per-patch and per-pair event rates, all in events per day.
///
/// `alpha[i]` is the per-zebra base-station contact rate in patch `i`,
/// `beta[i][j]` the per-pair peer contact rate between patches `i` and `j`
/// (symmetric, diagonal unused), and `gamma[i][j]` the per-zebra migration
/// rate from patch `i` to patch `j` (diagonal unused).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateParameters {
    alpha: Vec<f64>,
    beta: Vec<Vec<f64>>,
    gamma: Vec<Vec<f64>>,
}

impl RateParameters {
    pub fn new(alpha: Vec<f64>, beta: Vec<Vec<f64>>, gamma: Vec<Vec<f64>>) -> Result<Self> {
        let rates = Self { alpha, beta, gamma };
        rates.validate()?;
        Ok(rates)
    }

    /// All-zero rates for an `n`-patch system; useful as a starting point.
    pub fn zeros(n_patches: usize) -> Self {
        Self {
            alpha: vec![0.0; n_patches],
            beta: vec![vec![0.0; n_patches]; n_patches],
            gamma: vec![vec![0.0; n_patches]; n_patches],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alpha.len();
        if n == 0 {
            return Err(Error::InvalidRates("alpha must not be empty".into()));
        }
        let square = |name: &str, m: &Vec<Vec<f64>>| -> Result<()> {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidRates(format!("{name} must be {n}x{n}")));
            }
            Ok(())
        };
        square("beta", &self.beta)?;
        square("gamma", &self.gamma)?;
        let all = self
            .alpha
            .iter()
            .chain(self.beta.iter().flatten())
            .chain(self.gamma.iter().flatten());
        for &r in all {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidRates(format!(
                    "rates must be finite and nonnegative, got {r}"
                )));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.beta[i][j] != self.beta[j][i] {
                    return Err(Error::InvalidRates(format!(
                        "beta must be symmetric, beta[{i}][{j}] != beta[{j}][{i}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_patches(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self, patch: usize) -> f64 {
        self.alpha[patch]
    }

    pub fn beta(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i != j, "beta diagonal is unused");
        self.beta[i][j]
    }

    pub fn gamma(&self, from: usize, to: usize) -> f64 {
        debug_assert!(from != to, "gamma diagonal is unused");
        self.gamma[from][to]
    }

    pub fn set_alpha(&mut self, patch: usize, rate: f64) {
        self.alpha[patch] = rate;
    }

    pub fn set_beta(&mut self, i: usize, j: usize, rate: f64) {
        assert!(i != j, "beta diagonal is unused");
        self.beta[i][j] = rate;
        self.beta[j][i] = rate;
    }

    pub fn set_gamma(&mut self, from: usize, to: usize, rate: f64) {
        assert!(from != to, "gamma diagonal is unused");
        self.gamma[from][to] = rate;
    }
}

/// A patch model: rate parameters plus the initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchModel {
    rates: RateParameters,
    initial_population: Vec<u64>,
    initial_age: f64,
}

impl PatchModel {
    pub fn new(rates: RateParameters, initial_population: Vec<u64>) -> Result<Self> {
        rates.validate()?;
        if initial_population.len() != rates.n_patches() {
            return Err(Error::InvalidModel(format!(
                "initial_population has {} entries for {} patches",
                initial_population.len(),
                rates.n_patches()
            )));
        }
        Ok(Self {
            rates,
            initial_population,
            initial_age: 0.0,
        })
    }

    /// Overrides the default initial age (0 days) of every age variable.
    pub fn with_initial_age(mut self, age: f64) -> Result<Self> {
        if !age.is_finite() || age < 0.0 {
            return Err(Error::InvalidAge(age));
        }
        self.initial_age = age;
        Ok(self)
    }

    pub fn n_patches(&self) -> usize {
        self.rates.n_patches()
    }

    pub fn rates(&self) -> &RateParameters {
        &self.rates
    }

    pub fn initial_population(&self) -> &[u64] {
        &self.initial_population
    }

    pub fn initial_age(&self) -> f64 {
        self.initial_age
    }

    pub fn total_population(&self) -> u64 {
        self.initial_population.iter().sum()
    }

    /// The state at t = 0 with the model's initial populations and ages.
    pub fn initial_state(&self) -> SystemState {
        SystemState::with_initial_age(self.initial_population.clone(), self.initial_age)
            .expect("model invariants guarantee a valid initial state")
    }
}

/// Full system state at one instant: clock, populations and all data ages.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    t: f64,
    populations: Vec<u64>,
    // Freshness stamps: age = t - stamp. `patch_stamp` stores only the
    // off-diagonal entries row-major by source; the diagonal age is 0 by
    // definition (a patch always holds fresh data about itself).
    base_stamp: Vec<f64>,
    patch_stamp: Vec<f64>,
}

impl SystemState {
    /// State at t = 0 with all ages zero.
    pub fn new(populations: Vec<u64>) -> Result<Self> {
        Self::with_initial_age(populations, 0.0)
    }

    /// State at t = 0 with every age set to `initial_age`.
    pub fn with_initial_age(populations: Vec<u64>, initial_age: f64) -> Result<Self> {
        if populations.is_empty() {
            return Err(Error::InvalidModel("need at least one patch".into()));
        }
        if !initial_age.is_finite() || initial_age < 0.0 {
            return Err(Error::InvalidAge(initial_age));
        }
        let n = populations.len();
        Ok(Self {
            t: 0.0,
            populations,
            base_stamp: vec![-initial_age; n],
            patch_stamp: vec![-initial_age; n * (n - 1)],
        })
    }

    pub fn n_patches(&self) -> usize {
        self.populations.len()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn populations(&self) -> &[u64] {
        &self.populations
    }

    pub fn population(&self, patch: usize) -> u64 {
        self.populations[patch]
    }

    pub fn total_population(&self) -> u64 {
        self.populations.iter().sum()
    }

    /// Age of the freshest data from `patch` held by the base station.
    pub fn base_age(&self, patch: usize) -> f64 {
        self.t - self.base_stamp[patch]
    }

    /// Age of the freshest data from `source` held by patch `holder`.
    /// The diagonal is 0 by definition.
    pub fn patch_age(&self, source: usize, holder: usize) -> f64 {
        if source == holder {
            0.0
        } else {
            self.t - self.patch_stamp[self.od(source, holder)]
        }
    }

    pub fn set_base_age(&mut self, patch: usize, age: f64) -> Result<()> {
        self.check_patch(patch)?;
        check_age(age)?;
        self.base_stamp[patch] = self.t - age;
        Ok(())
    }

    pub fn set_patch_age(&mut self, source: usize, holder: usize, age: f64) -> Result<()> {
        self.check_patch(source)?;
        self.check_patch(holder)?;
        if source == holder {
            return Err(Error::SamePatch(source));
        }
        check_age(age)?;
        let idx = self.od(source, holder);
        self.patch_stamp[idx] = self.t - age;
        Ok(())
    }

    fn od(&self, source: usize, holder: usize) -> usize {
        off_diagonal_index(self.populations.len(), source, holder)
    }

    fn check_patch(&self, patch: usize) -> Result<()> {
        if patch >= self.populations.len() {
            return Err(Error::PatchIndex {
                index: patch,
                n: self.populations.len(),
            });
        }
        Ok(())
    }

    /// Advances the clock by `dt`; every age grows by exactly `dt`.
    pub fn advance_ages(&mut self, dt: f64) -> Result<()> {
        if !dt.is_finite() || dt < 0.0 {
            return Err(Error::InvalidDuration(dt));
        }
        self.t += dt;
        Ok(())
    }

    /// Advances the clock to an absolute time, landing on it exactly.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::InvalidDuration(t));
        }
        if t < self.t {
            return Err(Error::ClockRewind {
                current: self.t,
                requested: t,
            });
        }
        self.t = t;
        Ok(())
    }

    /// Base contact at patch `i`: the base gets patch `i`'s own data fresh
    /// and, for every other patch `j`, the fresher of its current copy and
    /// the copy patch `i` relays.
    pub fn apply_base_contact(&mut self, i: usize) -> Result<()> {
        self.check_patch(i)?;
        self.base_stamp[i] = self.t;
        for j in 0..self.populations.len() {
            if j == i {
                continue;
            }
            let relayed = self.patch_stamp[self.od(j, i)];
            if relayed > self.base_stamp[j] {
                self.base_stamp[j] = relayed;
            }
        }
        Ok(())
    }

    /// Peer contact between patches `i` and `j`: both get each other's own
    /// data fresh and keep the fresher copy of every third patch's data.
    /// Symmetric in its arguments.
    pub fn apply_peer_contact(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_patch(i)?;
        self.check_patch(j)?;
        if i == j {
            return Err(Error::SamePatch(i));
        }
        let at_j = self.od(i, j);
        let at_i = self.od(j, i);
        self.patch_stamp[at_j] = self.t;
        self.patch_stamp[at_i] = self.t;
        for k in 0..self.populations.len() {
            if k == i || k == j {
                continue;
            }
            let ki = self.od(k, i);
            let kj = self.od(k, j);
            let fresher = self.patch_stamp[ki].max(self.patch_stamp[kj]);
            self.patch_stamp[ki] = fresher;
            self.patch_stamp[kj] = fresher;
        }
        Ok(())
    }

    /// One zebra migrates `from -> to`, carrying everything its patch
    /// stores: patch `to` gets fresh data about `from` and keeps the
    /// fresher copy of every third patch's data. What patch `from` holds is
    /// unchanged.
    pub fn apply_patch_move(&mut self, from: usize, to: usize) -> Result<()> {
        self.check_patch(from)?;
        self.check_patch(to)?;
        if from == to {
            return Err(Error::SamePatch(from));
        }
        if self.populations[from] == 0 {
            return Err(Error::EmptyPatch(from));
        }
        self.populations[from] -= 1;
        self.populations[to] += 1;
        let idx = self.od(from, to);
        self.patch_stamp[idx] = self.t;
        for k in 0..self.populations.len() {
            if k == from || k == to {
                continue;
            }
            let carried = self.patch_stamp[self.od(k, from)];
            let kt = self.od(k, to);
            if carried > self.patch_stamp[kt] {
                self.patch_stamp[kt] = carried;
            }
        }
        Ok(())
    }

    /// Applies one event's reset.
    pub fn apply(&mut self, event: &EventKind) -> Result<()> {
        match *event {
            EventKind::BaseContact { patch } => self.apply_base_contact(patch),
            EventKind::PeerContact { a, b } => self.apply_peer_contact(a, b),
            EventKind::PatchMove { from, to } => self.apply_patch_move(from, to),
        }
    }

    /// Flattens the state into the shared column layout
    /// (populations, base ages, off-diagonal patch ages).
    pub fn to_row(&self) -> Vec<f64> {
        let n = self.populations.len();
        let mut row = Vec::with_capacity(n * (n + 1));
        row.extend(self.populations.iter().map(|&c| c as f64));
        row.extend(self.base_stamp.iter().map(|&s| self.t - s));
        row.extend(self.patch_stamp.iter().map(|&s| self.t - s));
        row
    }

    /// Rebuilds a state from a flattened row, for example the last sample of
    /// a stochastic trajectory. Populations must be exact integers.
    pub fn from_row(t: f64, row: &[f64]) -> Result<Self> {
        let n = (0..).find(|&n: &usize| n * (n + 1) >= row.len()).unwrap();
        let layout = StateLayout::new(n.max(1));
        if n == 0 || layout.width() != row.len() {
            return Err(Error::InvalidModel(format!(
                "row of length {} is not a valid state vector",
                row.len()
            )));
        }
        let mut populations = Vec::with_capacity(n);
        for (col, &v) in row.iter().take(n).enumerate() {
            let rounded = v.round();
            if !((v - rounded).abs() <= 1e-9) || rounded < 0.0 {
                return Err(Error::NonIntegerPopulation { column: col, value: v });
            }
            populations.push(rounded as u64);
        }
        let mut state = Self::new(populations)?;
        state.t = t;
        for i in 0..n {
            state.base_stamp[i] = t - row[layout.base_age(i)];
        }
        for (i, j) in layout.patch_age_pairs() {
            let idx = state.od(i, j);
            state.patch_stamp[idx] = t - row[layout.patch_age(i, j)];
        }
        Ok(state)
    }
}

fn check_age(age: f64) -> Result<()> {
    if !age.is_finite() || age < 0.0 {
        return Err(Error::InvalidAge(age));
    }
    Ok(())
}

/// Splits `total` zebras as evenly as possible over `n` patches, earlier
/// patches receiving the remainder.
pub fn even_split(total: u64, n: usize) -> Vec<u64> {
    let base = total / n as u64;
    let extra = (total % n as u64) as usize;
    (0..n)
        .map(|i| base + u64::from(i < extra))
        .collect()
}

/// The three event families of the patch model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    BaseContact { patch: usize },
    /// Canonical form has `a < b`.
    PeerContact { a: usize, b: usize },
    PatchMove { from: usize, to: usize },
}

/// An event together with its rate at the state it was enumerated from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventInstance {
    pub kind: EventKind,
    pub rate: f64,
}

/// Enumerates every event with a positive rate at the given state:
/// base contacts at `alpha_i * N_i`, peer contacts at
/// `beta_i_j * N_i * N_j` (unordered pairs), patch moves at
/// `gamma_i_j * N_i`. Zero-rate events are omitted, so rates depend only on
/// the populations and the list is unchanged between patch moves.
pub fn enumerate_events(state: &SystemState, rates: &RateParameters) -> Vec<EventInstance> {
    let n = state.n_patches();
    debug_assert_eq!(n, rates.n_patches());
    let mut events = Vec::new();
    for i in 0..n {
        let rate = rates.alpha(i) * state.population(i) as f64;
        if rate > 0.0 {
            events.push(EventInstance {
                kind: EventKind::BaseContact { patch: i },
                rate,
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let rate = rates.beta(i, j) * state.population(i) as f64 * state.population(j) as f64;
            if rate > 0.0 {
                events.push(EventInstance {
                    kind: EventKind::PeerContact { a: i, b: j },
                    rate,
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let rate = rates.gamma(i, j) * state.population(i) as f64;
            if rate > 0.0 {
                events.push(EventInstance {
                    kind: EventKind::PatchMove { from: i, to: j },
                    rate,
                });
            }
        }
    }
    events
}

/// Sum of the rates of an enumerated event list.
pub fn total_rate(events: &[EventInstance]) -> f64 {
    events.iter().map(|e| e.rate).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state2() -> SystemState {
        SystemState::new(vec![1, 1]).unwrap()
    }

    #[test]
    fn advance_grows_all_ages_uniformly() {
        let mut s = SystemState::new(vec![2, 1]).unwrap();
        s.advance_ages(2.5).unwrap();
        assert_eq!(s.t(), 2.5);
        assert_eq!(s.base_age(0), 2.5);
        assert_eq!(s.base_age(1), 2.5);
        assert_eq!(s.patch_age(0, 1), 2.5);
        assert_eq!(s.patch_age(1, 0), 2.5);
        assert_eq!(s.populations(), &[2, 1]);
    }

    #[test]
    fn advance_zero_is_identity() {
        let mut s = state2();
        s.set_base_age(0, 1.0).unwrap();
        let before = s.clone();
        s.advance_ages(0.0).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn advance_is_additive() {
        let mut s = state2();
        s.set_base_age(0, 1.0).unwrap();
        s.set_patch_age(0, 1, 4.0).unwrap();
        s.advance_ages(1.0).unwrap();
        assert_eq!(s.base_age(0), 2.0);
        assert_eq!(s.patch_age(0, 1), 5.0);
    }

    #[test]
    fn advance_rejects_negative_dt() {
        let mut s = state2();
        assert!(matches!(
            s.advance_ages(-0.1),
            Err(Error::InvalidDuration(_))
        ));
    }

    #[test]
    fn base_contact_takes_fresher_relayed_copy() {
        let mut s = state2();
        s.advance_ages(10.0).unwrap();
        s.set_base_age(0, 5.0).unwrap();
        s.set_base_age(1, 7.0).unwrap();
        s.set_patch_age(1, 0, 3.0).unwrap();
        s.apply_base_contact(0).unwrap();
        assert_eq!(s.base_age(0), 0.0);
        assert_eq!(s.base_age(1), 3.0);
    }

    #[test]
    fn base_contact_ignores_stale_relayed_copy() {
        let mut s = state2();
        s.advance_ages(10.0).unwrap();
        s.set_base_age(0, 5.0).unwrap();
        s.set_base_age(1, 2.0).unwrap();
        s.set_patch_age(1, 0, 9.0).unwrap();
        s.apply_base_contact(0).unwrap();
        assert_eq!(s.base_age(0), 0.0);
        assert_eq!(s.base_age(1), 2.0);
    }

    #[test]
    fn base_contact_single_patch() {
        let mut s = SystemState::new(vec![5]).unwrap();
        s.advance_ages(4.0).unwrap();
        assert_eq!(s.base_age(0), 4.0);
        s.apply_base_contact(0).unwrap();
        assert_eq!(s.base_age(0), 0.0);
    }

    #[test]
    fn base_contact_rejects_bad_index() {
        let mut s = state2();
        assert!(matches!(
            s.apply_base_contact(2),
            Err(Error::PatchIndex { .. })
        ));
    }

    #[test]
    fn peer_contact_floods_third_party_data() {
        let mut s = SystemState::new(vec![1, 1, 1]).unwrap();
        s.advance_ages(10.0).unwrap();
        s.set_patch_age(2, 0, 6.0).unwrap();
        s.set_patch_age(2, 1, 2.0).unwrap();
        s.set_patch_age(0, 1, 3.0).unwrap();
        s.set_patch_age(1, 0, 4.0).unwrap();
        s.apply_peer_contact(0, 1).unwrap();
        assert_eq!(s.patch_age(0, 1), 0.0);
        assert_eq!(s.patch_age(1, 0), 0.0);
        assert_eq!(s.patch_age(2, 0), 2.0);
        assert_eq!(s.patch_age(2, 1), 2.0);
    }

    #[test]
    fn peer_contact_is_symmetric() {
        let mut a = SystemState::new(vec![1, 2, 3]).unwrap();
        a.advance_ages(8.0).unwrap();
        a.set_patch_age(2, 0, 6.0).unwrap();
        a.set_patch_age(2, 1, 1.5).unwrap();
        let mut b = a.clone();
        a.apply_peer_contact(0, 1).unwrap();
        b.apply_peer_contact(1, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn peer_contact_two_patches_has_no_third_party_terms() {
        let mut s = state2();
        s.advance_ages(5.0).unwrap();
        s.apply_peer_contact(0, 1).unwrap();
        assert_eq!(s.patch_age(0, 1), 0.0);
        assert_eq!(s.patch_age(1, 0), 0.0);
        assert_eq!(s.base_age(0), 5.0);
    }

    #[test]
    fn peer_contact_rejects_equal_patches() {
        let mut s = state2();
        assert!(matches!(s.apply_peer_contact(1, 1), Err(Error::SamePatch(1))));
    }

    #[test]
    fn patch_move_transfers_one_zebra_and_carries_data() {
        let mut s = SystemState::new(vec![2, 1, 0]).unwrap();
        s.advance_ages(10.0).unwrap();
        s.set_patch_age(0, 1, 7.0).unwrap();
        s.set_patch_age(2, 0, 3.0).unwrap();
        s.set_patch_age(2, 1, 9.0).unwrap();
        s.apply_patch_move(0, 1).unwrap();
        assert_eq!(s.populations(), &[1, 2, 0]);
        assert_eq!(s.patch_age(0, 1), 0.0);
        assert_eq!(s.patch_age(2, 1), 3.0);
        assert_eq!(s.patch_age(2, 0), 3.0);
        assert_eq!(s.base_age(0), 10.0);
    }

    #[test]
    fn patch_move_round_trip_restores_populations() {
        let mut s = SystemState::new(vec![2, 1]).unwrap();
        s.apply_patch_move(0, 1).unwrap();
        s.apply_patch_move(1, 0).unwrap();
        assert_eq!(s.populations(), &[2, 1]);
    }

    #[test]
    fn patch_move_rejects_empty_source() {
        let mut s = SystemState::new(vec![0, 1]).unwrap();
        assert!(matches!(s.apply_patch_move(0, 1), Err(Error::EmptyPatch(0))));
    }

    #[test]
    fn enumerate_returns_nothing_for_empty_system() {
        let s = SystemState::new(vec![0, 0]).unwrap();
        let mut rates = RateParameters::zeros(2);
        rates.set_alpha(0, 1.0);
        rates.set_beta(0, 1, 1.0);
        rates.set_gamma(0, 1, 1.0);
        let events = enumerate_events(&s, &rates);
        assert!(events.is_empty());
        assert_eq!(total_rate(&events), 0.0);
    }

    #[test]
    fn enumerate_base_contact_rate_scales_with_population() {
        let s = SystemState::new(vec![50]).unwrap();
        let mut rates = RateParameters::zeros(1);
        rates.set_alpha(0, 0.1);
        let events = enumerate_events(&s, &rates);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventKind::BaseContact { patch: 0 });
        assert_eq!(events[0].rate, 5.0);
    }

    #[test]
    fn enumerate_peer_contact_rate() {
        let s = state2();
        let mut rates = RateParameters::zeros(2);
        rates.set_beta(0, 1, 0.2);
        let events = enumerate_events(&s, &rates);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventKind::PeerContact { a: 0, b: 1 });
        assert_eq!(events[0].rate, 0.2);
    }

    #[test]
    fn rates_reject_asymmetric_beta() {
        let mut beta = vec![vec![0.0; 2]; 2];
        beta[0][1] = 0.1;
        let err = RateParameters::new(vec![0.0; 2], beta, vec![vec![0.0; 2]; 2]);
        assert!(matches!(err, Err(Error::InvalidRates(_))));
    }

    #[test]
    fn row_round_trip() {
        let mut s = SystemState::new(vec![3, 2, 1]).unwrap();
        s.advance_ages(6.0).unwrap();
        s.apply_peer_contact(0, 2).unwrap();
        s.advance_ages(0.5).unwrap();
        let row = s.to_row();
        let back = SystemState::from_row(s.t(), &row).unwrap();
        assert_eq!(back, s);
    }

    fn random_state_and_rates(n: usize, seed: u64) -> (SystemState, RateParameters) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pops: Vec<u64> = (0..n).map(|_| rng.random_range(0..6)).collect();
        let mut s = SystemState::new(pops).unwrap();
        s.advance_ages(20.0).unwrap();
        for i in 0..n {
            s.set_base_age(i, rng.random_range(0.0..15.0)).unwrap();
            for j in 0..n {
                if i != j {
                    s.set_patch_age(i, j, rng.random_range(0.0..15.0)).unwrap();
                }
            }
        }
        let mut rates = RateParameters::zeros(n);
        for i in 0..n {
            rates.set_alpha(i, rng.random_range(0.0..1.0));
            for j in (i + 1)..n {
                rates.set_beta(i, j, rng.random_range(0.0..0.1));
            }
            for j in 0..n {
                if i != j {
                    rates.set_gamma(i, j, rng.random_range(0.0..0.5));
                }
            }
        }
        (s, rates)
    }

    proptest! {
        #[test]
        fn population_is_conserved_by_event_sequences(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let (mut s, rates) = random_state_and_rates(4, seed);
            let total = s.total_population();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            for _ in 0..40 {
                let events = enumerate_events(&s, &rates);
                if events.is_empty() {
                    break;
                }
                let pick = rng.random_range(0..events.len());
                s.apply(&events[pick].kind).unwrap();
                prop_assert_eq!(s.total_population(), total);
            }
        }

        #[test]
        fn resets_never_increase_any_age(seed in 0u64..500) {
            let (s, _) = random_state_and_rates(4, seed);
            let events = [
                EventKind::BaseContact { patch: 1 },
                EventKind::PeerContact { a: 0, b: 2 },
                EventKind::PatchMove { from: 3, to: 1 },
            ];
            for ev in &events {
                let mut after = s.clone();
                if after.apply(ev).is_err() {
                    continue; // move from an empty patch
                }
                for i in 0..4 {
                    prop_assert!(after.base_age(i) <= s.base_age(i));
                    for j in 0..4 {
                        prop_assert!(after.patch_age(i, j) <= s.patch_age(i, j));
                    }
                }
            }
        }

        #[test]
        fn contacts_are_idempotent(seed in 0u64..500) {
            let (s, _) = random_state_and_rates(5, seed);
            let mut once = s.clone();
            once.apply_base_contact(2).unwrap();
            let mut twice = once.clone();
            twice.apply_base_contact(2).unwrap();
            prop_assert_eq!(&once, &twice);

            let mut once = s.clone();
            once.apply_peer_contact(1, 3).unwrap();
            let mut twice = once.clone();
            twice.apply_peer_contact(1, 3).unwrap();
            prop_assert_eq!(&once, &twice);
        }

        #[test]
        fn event_rates_depend_only_on_populations(seed in 0u64..500) {
            let (mut s, rates) = random_state_and_rates(4, seed);
            let before = enumerate_events(&s, &rates);
            s.advance_ages(3.0).unwrap();
            s.apply_base_contact(0).unwrap();
            if s.n_patches() > 1 {
                s.apply_peer_contact(0, 1).unwrap();
            }
            let after = enumerate_events(&s, &rates);
            prop_assert_eq!(before, after);
        }
    }
}
