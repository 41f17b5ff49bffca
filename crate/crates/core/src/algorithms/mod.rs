//! GSEMO, MOEA/D, the repair (1+1) EA and the protocol run at each capacity change.

mod change;
mod decomposition;
mod gsemo;
mod moead;
mod repair;
mod variation;

use crate::model::{Instance, Solution};
use crate::objectives::{Formulation, ObjectiveVector};
use crate::rng::Rng;

pub use change::{on_capacity_change, previous_best, ChangeReport};
pub use decomposition::{
    dirichlet_weights, g_pbi, g_te, g_ws, neighborhood_size, Decomposition, DEFAULT_PBI_THETA,
};
pub use gsemo::{Gsemo, GsemoArchive};
pub use moead::{Moead, MoeadState};
pub use repair::{repair, RepairOutcome};
pub use variation::{mutate, uniform_crossover, VariationConfig};

/// A solution paired with its objective vector under the current capacity.
#[derive(Clone, Debug)]
pub struct Member {
    pub solution: Solution,
    pub objectives: ObjectiveVector,
}

impl Member {
    pub fn evaluate<F: Formulation>(solution: Solution, formulation: &F) -> Self {
        let objectives = formulation.evaluate(&solution);
        Member {
            solution,
            objectives,
        }
    }
}

/// A population-based optimiser driven one fitness evaluation at a time.
pub trait Optimizer {
    /// Creates one offspring, evaluates it (one unit of budget) and updates the population.
    fn step<F: Formulation>(&mut self, inst: &Instance, formulation: &F, rng: &mut Rng);

    /// The stored solutions.
    fn members(&self) -> &[Member];

    /// Re-scores every stored solution after the capacity moved. Returns whether any
    /// stored solution is feasible under the new capacity. Costs no budget.
    fn reevaluate<F: Formulation>(&mut self, formulation: &F) -> bool;

    /// Takes over the solution produced by the repair mechanism.
    fn adopt<F: Formulation>(&mut self, solution: Solution, formulation: &F);
}
