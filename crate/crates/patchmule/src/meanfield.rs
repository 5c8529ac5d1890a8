//! Mean-field ODE counterpart of the stochastic patch model.
//!
//! Each state variable has an evolution matrix: the list of continuous
//! flows and events that touch it, with the kind of change and its rate.
//! Treating event resets as fluid flows turns every entry into a derivative
//! contribution `change x rate`, and summing them yields the ODE system:
//!
//! * `dN_i/dt    = sum_{j!=i} gamma_j_i N_j - sum_{j!=i} gamma_i_j N_i`
//! * `dA_i/dt    = 1 - alpha_i N_i A_i
//!                 - sum_{j!=i} alpha_j N_j relu(A_i - A_i_j)`
//! * `dA_i_j/dt  = 1 - beta_i_j N_i N_j A_i_j - gamma_i_j N_i A_i_j
//!                 - sum_{k!=i,j} beta_j_k N_j N_k relu(A_i_j - A_i_k)
//!                 - sum_{k!=i,j} gamma_k_j N_k relu(A_i_j - A_i_k)`
//!
//! with `relu(x) = (|x| + x) / 2`: a zero reset drains `x` at `rate * x`, a
//! min reset against `y` drains the excess `relu(x - y)`.
//!
//! [`meanfield_rhs`] codes the equations directly; [`evolution_rhs`] folds
//! the entries produced by [`build_evolution_matrices`] mechanically. The
//! two constructions are independent routes to the same right-hand side and
//! are tested against each other.
//!
//! The solution approximates the average of the stochastic model over
//! infinitely many runs; populations are relaxed to reals.

use crate::error::{Error, Result};
use crate::layout::StateLayout;
use crate::model::{PatchModel, RateParameters};
use crate::trajectory::{uniform_grid, Trajectory};

/// Default fixed integration step in days. The relu terms make the
/// right-hand side only piecewise smooth, so a small fixed step is used
/// instead of an adaptive one that may chatter at the kinks.
pub const DEFAULT_STEP_DAYS: f64 = 0.01;

/// One state variable of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Population(usize),
    BaseAge(usize),
    /// Age of data from `source` held at `holder`.
    PatchAge { source: usize, holder: usize },
}

impl Variable {
    pub fn index(&self, layout: &StateLayout) -> usize {
        match *self {
            Variable::Population(i) => layout.population(i),
            Variable::BaseAge(i) => layout.base_age(i),
            Variable::PatchAge { source, holder } => layout.patch_age(source, holder),
        }
    }
}

/// How an event or flow changes its target variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfluenceKind {
    /// Continuous flow at the given strength.
    ConstantDrift(f64),
    /// Reset to zero.
    ZeroReset,
    /// Reset to the minimum of the variable and a partner variable.
    MinReset(Variable),
    /// Population gain of one.
    Increment,
    /// Population loss of one.
    Decrement,
}

/// Symbolic event rate, evaluated against populations and rate parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateExpr {
    /// Constant one, used for continuous flows.
    Unit,
    /// `alpha_i * N_i`
    BaseContact(usize),
    /// `beta_i_j * N_i * N_j`
    PeerContact(usize, usize),
    /// `gamma_i_j * N_i`
    PatchMove(usize, usize),
}

impl RateExpr {
    pub fn eval(&self, state: &[f64], layout: &StateLayout, rates: &RateParameters) -> f64 {
        let n = |i: usize| state[layout.population(i)];
        match *self {
            RateExpr::Unit => 1.0,
            RateExpr::BaseContact(i) => rates.alpha(i) * n(i),
            RateExpr::PeerContact(i, j) => rates.beta(i, j) * n(i) * n(j),
            RateExpr::PatchMove(i, j) => rates.gamma(i, j) * n(i),
        }
    }
}

/// One row of one variable's evolution matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionEntry {
    pub variable: Variable,
    pub influence: InfluenceKind,
    pub rate: RateExpr,
}

/// Emits the full evolution matrices of an `n`-patch model, one entry per
/// (variable, event-or-flow) pair:
///
/// * `N_i`: a decrement per outgoing move and an increment per incoming one;
/// * `A_i`: unit drift, a zero reset on the patch's own base contact, and a
///   min reset against `A_i_j` on every other patch's base contact;
/// * `A_i_j`: unit drift, zero resets on the `(i,j)` peer contact and the
///   `i -> j` move, and min resets against `A_i_k` on every third patch's
///   peer contact with `j` and move into `j`.
pub fn build_evolution_matrices(n_patches: usize) -> Vec<EvolutionEntry> {
    let n = n_patches;
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            entries.push(EvolutionEntry {
                variable: Variable::Population(i),
                influence: InfluenceKind::Decrement,
                rate: RateExpr::PatchMove(i, j),
            });
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            entries.push(EvolutionEntry {
                variable: Variable::Population(i),
                influence: InfluenceKind::Increment,
                rate: RateExpr::PatchMove(j, i),
            });
        }
    }
    for i in 0..n {
        entries.push(EvolutionEntry {
            variable: Variable::BaseAge(i),
            influence: InfluenceKind::ConstantDrift(1.0),
            rate: RateExpr::Unit,
        });
        entries.push(EvolutionEntry {
            variable: Variable::BaseAge(i),
            influence: InfluenceKind::ZeroReset,
            rate: RateExpr::BaseContact(i),
        });
        for j in 0..n {
            if j == i {
                continue;
            }
            entries.push(EvolutionEntry {
                variable: Variable::BaseAge(i),
                influence: InfluenceKind::MinReset(Variable::PatchAge {
                    source: i,
                    holder: j,
                }),
                rate: RateExpr::BaseContact(j),
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let target = Variable::PatchAge {
                source: i,
                holder: j,
            };
            entries.push(EvolutionEntry {
                variable: target,
                influence: InfluenceKind::ConstantDrift(1.0),
                rate: RateExpr::Unit,
            });
            entries.push(EvolutionEntry {
                variable: target,
                influence: InfluenceKind::ZeroReset,
                rate: RateExpr::PeerContact(i.min(j), i.max(j)),
            });
            entries.push(EvolutionEntry {
                variable: target,
                influence: InfluenceKind::ZeroReset,
                rate: RateExpr::PatchMove(i, j),
            });
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let partner = Variable::PatchAge {
                    source: i,
                    holder: k,
                };
                entries.push(EvolutionEntry {
                    variable: target,
                    influence: InfluenceKind::MinReset(partner),
                    rate: RateExpr::PeerContact(j.min(k), j.max(k)),
                });
                entries.push(EvolutionEntry {
                    variable: target,
                    influence: InfluenceKind::MinReset(partner),
                    rate: RateExpr::PatchMove(k, j),
                });
            }
        }
    }
    entries
}

fn relu(x: f64) -> f64 {
    (x.abs() + x) / 2.0
}

/// Right-hand side of the mean-field ODEs, coded directly.
pub fn meanfield_rhs(state: &[f64], rates: &RateParameters) -> Vec<f64> {
    let n = rates.n_patches();
    let layout = StateLayout::new(n);
    debug_assert_eq!(state.len(), layout.width());
    let pop = |i: usize| state[layout.population(i)];
    let base = |i: usize| state[layout.base_age(i)];
    let patch = |i: usize, j: usize| state[layout.patch_age(i, j)];

    let mut deriv = vec![0.0; layout.width()];
    for i in 0..n {
        let mut d = 0.0;
        for j in 0..n {
            if j != i {
                d += rates.gamma(j, i) * pop(j);
            }
        }
        for j in 0..n {
            if j != i {
                d -= rates.gamma(i, j) * pop(i);
            }
        }
        deriv[layout.population(i)] = d;
    }
    for i in 0..n {
        let mut d = 1.0 - rates.alpha(i) * pop(i) * base(i);
        for j in 0..n {
            if j != i {
                d -= rates.alpha(j) * pop(j) * relu(base(i) - patch(i, j));
            }
        }
        deriv[layout.base_age(i)] = d;
    }
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let a = patch(i, j);
            let mut d = 1.0 - rates.beta(i, j) * pop(i) * pop(j) * a - rates.gamma(i, j) * pop(i) * a;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                d -= rates.beta(j, k) * pop(j) * pop(k) * relu(a - patch(i, k));
                d -= rates.gamma(k, j) * pop(k) * relu(a - patch(i, k));
            }
            deriv[layout.patch_age(i, j)] = d;
        }
    }
    deriv
}

/// Right-hand side obtained by folding the evolution matrices: each entry
/// contributes `rate * (post-reset - pre-reset)` treated as a fluid flow.
pub fn evolution_rhs(
    entries: &[EvolutionEntry],
    state: &[f64],
    layout: &StateLayout,
    rates: &RateParameters,
) -> Vec<f64> {
    let mut deriv = vec![0.0; layout.width()];
    for entry in entries {
        let idx = entry.variable.index(layout);
        let rate = entry.rate.eval(state, layout, rates);
        deriv[idx] += match entry.influence {
            InfluenceKind::ConstantDrift(strength) => strength * rate,
            InfluenceKind::ZeroReset => -rate * state[idx],
            InfluenceKind::MinReset(partner) => {
                -rate * relu(state[idx] - state[partner.index(layout)])
            }
            InfluenceKind::Increment => rate,
            InfluenceKind::Decrement => -rate,
        };
    }
    deriv
}

#[derive(Debug, Clone)]
pub struct MeanFieldConfig {
    pub horizon: f64,
    /// Fixed RK4 step; sub-divided as needed to land on sample times.
    pub step: f64,
    pub sample_grid: Vec<f64>,
    /// Initial population vector; `None` uses the model's vector. Pass the
    /// expected placement (for example `total/n` per patch for uniform
    /// random placement) to compare against ensembles.
    pub initial_population: Option<Vec<f64>>,
}

impl MeanFieldConfig {
    pub fn new(horizon: f64) -> Result<Self> {
        Ok(Self {
            horizon,
            step: DEFAULT_STEP_DAYS,
            sample_grid: uniform_grid(horizon, crate::ssa::DEFAULT_SAMPLE_STEP_DAYS)?,
            initial_population: None,
        })
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_sample_grid(mut self, grid: Vec<f64>) -> Self {
        self.sample_grid = grid;
        self
    }

    pub fn with_initial_population(mut self, pops: Vec<f64>) -> Self {
        self.initial_population = Some(pops);
        self
    }

    fn validate(&self, n_patches: usize) -> Result<()> {
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !self.step.is_finite() || self.step <= 0.0 || self.step > self.horizon {
            return Err(Error::InvalidConfig(format!(
                "integration step must lie in (0, horizon], got {}",
                self.step
            )));
        }
        if self.sample_grid.is_empty()
            || self.sample_grid.windows(2).any(|w| w[1] <= w[0])
            || self.sample_grid[0] < 0.0
            || *self.sample_grid.last().unwrap() > self.horizon
        {
            return Err(Error::InvalidConfig(
                "sample grid must be strictly increasing within [0, horizon]".into(),
            ));
        }
        if let Some(pops) = &self.initial_population {
            if pops.len() != n_patches || pops.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidConfig(
                    "initial population override must be nonnegative per patch".into(),
                ));
            }
        }
        Ok(())
    }
}

fn rk4_step(state: &mut [f64], h: f64, rates: &RateParameters, scratch: &mut Vec<f64>) {
    let k1 = meanfield_rhs(state, rates);
    axpy(scratch, state, &k1, h / 2.0);
    let k2 = meanfield_rhs(scratch, rates);
    axpy(scratch, state, &k2, h / 2.0);
    let k3 = meanfield_rhs(scratch, rates);
    axpy(scratch, state, &k3, h);
    let k4 = meanfield_rhs(scratch, rates);
    for i in 0..state.len() {
        state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn axpy(out: &mut Vec<f64>, base: &[f64], dir: &[f64], scale: f64) {
    out.clear();
    out.extend(base.iter().zip(dir).map(|(b, d)| b + scale * d));
}

/// Integrates the mean-field ODEs with classical fixed-step RK4 and records
/// the solution on the sample grid, in the same layout and CSV schema as
/// the stochastic engine.
pub fn integrate(model: &PatchModel, cfg: &MeanFieldConfig) -> Result<Trajectory> {
    let n = model.n_patches();
    cfg.validate(n)?;
    let layout = StateLayout::new(n);
    let rates = model.rates();

    let mut state = vec![0.0; layout.width()];
    match &cfg.initial_population {
        Some(pops) => state[..n].copy_from_slice(pops),
        None => {
            for (i, &p) in model.initial_population().iter().enumerate() {
                state[i] = p as f64;
            }
        }
    }
    state[n..].fill(model.initial_age());

    let mut trajectory = Trajectory::new(n);
    let mut scratch = Vec::with_capacity(layout.width());
    let mut t = 0.0;
    for &target in &cfg.sample_grid {
        if target > t {
            let span = target - t;
            let substeps = (span / cfg.step).ceil().max(1.0) as usize;
            let h = span / substeps as f64;
            for _ in 0..substeps {
                rk4_step(&mut state, h, rates, &mut scratch);
            }
            t = target;
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteDerivative { t });
        }
        trajectory.push(target, state.clone());
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn count_for(entries: &[EvolutionEntry], var: Variable) -> usize {
        entries.iter().filter(|e| e.variable == var).count()
    }

    #[test]
    fn single_patch_matrix_has_only_base_age_entries() {
        let entries = build_evolution_matrices(1);
        assert_eq!(entries.len(), 2);
        assert_eq!(
            entries[0].influence,
            InfluenceKind::ConstantDrift(1.0)
        );
        assert_eq!(entries[1].influence, InfluenceKind::ZeroReset);
        assert_eq!(entries[1].rate, RateExpr::BaseContact(0));
    }

    #[test]
    fn two_patch_entry_counts() {
        let entries = build_evolution_matrices(2);
        assert_eq!(count_for(&entries, Variable::Population(0)), 2);
        assert_eq!(count_for(&entries, Variable::BaseAge(0)), 3);
        assert_eq!(
            count_for(
                &entries,
                Variable::PatchAge {
                    source: 0,
                    holder: 1
                }
            ),
            3
        );
    }

    #[test]
    fn patch_age_entry_count_matches_closed_form() {
        for n in 2..7 {
            let entries = build_evolution_matrices(n);
            let count = count_for(
                &entries,
                Variable::PatchAge {
                    source: 0,
                    holder: 1,
                },
            );
            assert_eq!(count, 1 + 2 + 2 * (n - 2), "n = {n}");
        }
    }

    fn random_setup(n: usize, seed: u64) -> (Vec<f64>, RateParameters) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = StateLayout::new(n);
        let mut state = vec![0.0; layout.width()];
        for i in 0..n {
            state[layout.population(i)] = rng.random_range(0.0..10.0);
        }
        for age in &mut state[n..] {
            *age = rng.random_range(0.0..3.0);
        }
        let mut rates = RateParameters::zeros(n);
        for i in 0..n {
            rates.set_alpha(i, rng.random_range(0.0..1.0));
            for j in (i + 1)..n {
                rates.set_beta(i, j, rng.random_range(0.0..0.05));
            }
            for j in 0..n {
                if j != i {
                    rates.set_gamma(i, j, rng.random_range(0.0..1.0));
                }
            }
        }
        (state, rates)
    }

    #[test]
    fn rhs_with_empty_populations_is_pure_drift() {
        let n = 3;
        let layout = StateLayout::new(n);
        let (mut state, rates) = random_setup(n, 5);
        for i in 0..n {
            state[layout.population(i)] = 0.0;
        }
        let deriv = meanfield_rhs(&state, &rates);
        for i in 0..n {
            assert_eq!(deriv[layout.population(i)], 0.0);
            assert_eq!(deriv[layout.base_age(i)], 1.0);
        }
        for (i, j) in layout.patch_age_pairs() {
            assert_eq!(deriv[layout.patch_age(i, j)], 1.0);
        }
    }

    #[test]
    fn hand_evaluated_base_age_derivative() {
        // n = 2, N = (1, 1), alpha = (0.5, 0), A_0 = 2, A_0_1 = 1:
        // dA_0/dt = 1 - 0.5 * 1 * 2 - 0 = 0.
        let layout = StateLayout::new(2);
        let mut rates = RateParameters::zeros(2);
        rates.set_alpha(0, 0.5);
        let mut state = vec![0.0; layout.width()];
        state[layout.population(0)] = 1.0;
        state[layout.population(1)] = 1.0;
        state[layout.base_age(0)] = 2.0;
        state[layout.patch_age(0, 1)] = 1.0;
        let direct = meanfield_rhs(&state, &rates);
        assert_eq!(direct[layout.base_age(0)], 0.0);
        let entries = build_evolution_matrices(2);
        let folded = evolution_rhs(&entries, &state, &layout, &rates);
        assert_eq!(folded[layout.base_age(0)], 0.0);
    }

    #[test]
    fn dual_constructions_agree_on_random_states() {
        let n = 4;
        let layout = StateLayout::new(n);
        let entries = build_evolution_matrices(n);
        for seed in 0..100 {
            let (state, rates) = random_setup(n, seed);
            let direct = meanfield_rhs(&state, &rates);
            let folded = evolution_rhs(&entries, &state, &layout, &rates);
            for (d, f) in direct.iter().zip(&folded) {
                assert!((d - f).abs() < 1e-12, "seed {seed}: {d} vs {f}");
            }
        }
    }

    #[test]
    fn single_patch_age_settles_at_inverse_total_rate() {
        let mut rates = RateParameters::zeros(1);
        rates.set_alpha(0, 0.1);
        let model = PatchModel::new(rates, vec![50]).unwrap();
        let cfg = MeanFieldConfig::new(10.0).unwrap();
        let trajectory = integrate(&model, &cfg).unwrap();
        let layout = trajectory.layout();
        let last = trajectory.row(trajectory.len() - 1);
        assert!((last[layout.base_age(0)] - 0.2).abs() < 1e-6);
    }

    #[test]
    fn populations_stay_constant_without_migration() {
        let mut rates = RateParameters::zeros(3);
        rates.set_alpha(0, 0.4);
        rates.set_beta(0, 2, 0.01);
        let model = PatchModel::new(rates, vec![10, 20, 20]).unwrap();
        let cfg = MeanFieldConfig::new(20.0).unwrap();
        let trajectory = integrate(&model, &cfg).unwrap();
        let layout = trajectory.layout();
        for row in trajectory.rows() {
            assert_eq!(row[layout.population(0)], 10.0);
            assert_eq!(row[layout.population(1)], 20.0);
            assert_eq!(row[layout.population(2)], 20.0);
        }
    }

    #[test]
    fn integration_never_goes_meaningfully_negative() {
        let (_, rates) = random_setup(5, 77);
        let model = PatchModel::new(rates, vec![10; 5]).unwrap();
        let cfg = MeanFieldConfig::new(30.0).unwrap();
        let trajectory = integrate(&model, &cfg).unwrap();
        let floor = trajectory
            .rows()
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(floor > -1e-9, "component dipped to {floor:.3e}");
    }

    #[test]
    fn halving_the_step_shrinks_the_error_fourth_order() {
        // Smooth single-patch problem with the closed form
        // A(t) = (1 - exp(-5t)) / 5.
        let mut rates = RateParameters::zeros(1);
        rates.set_alpha(0, 0.1);
        let model = PatchModel::new(rates, vec![50]).unwrap();
        let horizon = 1.0;
        let exact = (1.0 - (-5.0f64 * horizon).exp()) / 5.0;
        let error_at = |step: f64| {
            let cfg = MeanFieldConfig::new(horizon)
                .unwrap()
                .with_step(step)
                .with_sample_grid(vec![horizon]);
            let t = integrate(&model, &cfg).unwrap();
            (t.row(0)[StateLayout::new(1).base_age(0)] - exact).abs()
        };
        let coarse = error_at(0.2);
        let fine = error_at(0.1);
        assert!(
            fine < coarse / 10.0,
            "coarse {coarse:.3e}, fine {fine:.3e}: not fourth order"
        );
    }

    proptest! {
        #[test]
        fn relu_equals_max_with_zero(x in -1e6f64..1e6) {
            prop_assert_eq!(relu(x), x.max(0.0));
        }

        #[test]
        fn population_flux_sums_to_zero(seed in 0u64..200) {
            let n = 5;
            let layout = StateLayout::new(n);
            let (state, rates) = random_setup(n, seed);
            let deriv = meanfield_rhs(&state, &rates);
            let net: f64 = (0..n).map(|i| deriv[layout.population(i)]).sum();
            prop_assert!(net.abs() < 1e-12);
        }
    }

    #[test]
    fn relu_at_zero() {
        assert_eq!(relu(0.0), 0.0);
        assert_eq!(relu(-0.0), 0.0);
    }
}
