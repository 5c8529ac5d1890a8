//! From event resets to ODEs, mechanically.
//!
//! Every state variable carries an evolution matrix listing the flows and
//! events that touch it. Folding those entries with
//! `contribution = rate x (post-reset - pre-reset)` yields the mean-field
//! right-hand side without writing the equations down; this example prints
//! the matrices for a 3-patch system and shows the folded construction
//! agreeing with the directly coded equations.
//!
//! ```bash
//! cargo run --release --example derive_ode
//! ```

use patchmule::layout::StateLayout;
use patchmule::meanfield::{
    build_evolution_matrices, evolution_rhs, meanfield_rhs, EvolutionEntry, InfluenceKind,
    RateExpr, Variable,
};
use patchmule::model::RateParameters;

fn variable_name(v: &Variable) -> String {
    match v {
        Variable::Population(i) => format!("N_{i}"),
        Variable::BaseAge(i) => format!("A_{i}"),
        Variable::PatchAge { source, holder } => format!("A_{source}_{holder}"),
    }
}

fn influence_name(e: &EvolutionEntry) -> String {
    match &e.influence {
        InfluenceKind::ConstantDrift(v) => format!("drift {v}"),
        InfluenceKind::ZeroReset => "reset to 0".into(),
        InfluenceKind::MinReset(p) => format!("min with {}", variable_name(p)),
        InfluenceKind::Increment => "+1".into(),
        InfluenceKind::Decrement => "-1".into(),
    }
}

fn rate_name(r: &RateExpr) -> String {
    match r {
        RateExpr::Unit => "1".into(),
        RateExpr::BaseContact(i) => format!("alpha_{i} N_{i}"),
        RateExpr::PeerContact(i, j) => format!("beta_{i}_{j} N_{i} N_{j}"),
        RateExpr::PatchMove(i, j) => format!("gamma_{i}_{j} N_{i}"),
    }
}

fn main() {
    let n = 3;
    let entries = build_evolution_matrices(n);
    println!("{} evolution entries for a {n}-patch system\n", entries.len());

    for target in [
        Variable::Population(0),
        Variable::BaseAge(0),
        Variable::PatchAge { source: 0, holder: 1 },
    ] {
        println!("evolution matrix of {}:", variable_name(&target));
        for entry in entries.iter().filter(|e| e.variable == target) {
            println!("  {:<18} at rate {}", influence_name(entry), rate_name(&entry.rate));
        }
        println!();
    }

    // The folded entries and the hand-coded equations are the same function.
    let layout = StateLayout::new(n);
    let mut rates = RateParameters::zeros(n);
    rates.set_alpha(0, 0.5);
    rates.set_alpha(1, 0.25);
    rates.set_beta(0, 1, 0.01);
    rates.set_gamma(0, 2, 0.1);
    rates.set_gamma(2, 0, 0.05);
    let mut state = vec![0.0; layout.width()];
    state[layout.population(0)] = 20.0;
    state[layout.population(1)] = 20.0;
    state[layout.population(2)] = 10.0;
    for (offset, age) in state[n..].iter_mut().enumerate() {
        *age = 0.5 + 0.1 * (n + offset) as f64;
    }
    let direct = meanfield_rhs(&state, &rates);
    let folded = evolution_rhs(&entries, &state, &layout, &rates);
    let worst = direct
        .iter()
        .zip(&folded)
        .map(|(d, f)| (d - f).abs())
        .fold(0.0, f64::max);
    println!("direct vs folded right-hand side: max |difference| = {worst:.2e}");
}
