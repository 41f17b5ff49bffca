//! MOEA/D over bit strings with neighbourhood mating and replacement.

use rand::Rng as _;

use super::decomposition::{dirichlet_weights, neighborhood_size, neighborhoods, Decomposition};
use super::{mutate, uniform_crossover, Member, Optimizer, VariationConfig};
use crate::model::{Instance, Solution};
use crate::objectives::{Formulation, ObjectiveVector};
use crate::rng::Rng;
use crate::{Error, Result};

/// Sub-problem weights, neighbourhoods, one incumbent per sub-problem and the
/// reference point `z*` (maximisation form).
#[derive(Clone, Debug)]
pub struct MoeadState {
    pub weights: Vec<Vec<f64>>,
    pub neighborhoods: Vec<Vec<usize>>,
    pub population: Vec<Member>,
    pub z_star: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Moead {
    state: MoeadState,
    decomposition: Decomposition,
    variation: VariationConfig,
    cursor: usize,
    last_selected: usize,
}

impl Moead {
    /// `size` sub-problems with Dirichlet weights and uniformly random incumbents.
    pub fn new<F: Formulation>(
        inst: &Instance,
        formulation: &F,
        size: usize,
        decomposition: Decomposition,
        variation: VariationConfig,
        rng: &mut Rng,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("MOEA/D population size must be at least 1"));
        }
        if let Decomposition::Pbi { theta } = decomposition {
            if !(theta > 0.0) {
                return Err(Error::invalid(format!(
                    "PBI penalty must be positive, got {theta}"
                )));
            }
        }
        variation.validate()?;
        let weights = dirichlet_weights(size, formulation.dims(), rng)?;
        let neighborhoods = neighborhoods(&weights, neighborhood_size(size));
        let population = (0..size)
            .map(|_| Member::evaluate(Solution::random(inst, rng), formulation))
            .collect();
        let mut moead = Moead {
            state: MoeadState {
                weights,
                neighborhoods,
                population,
                z_star: Vec::new(),
            },
            decomposition,
            variation,
            cursor: 0,
            last_selected: 0,
        };
        moead.reset_reference_point();
        Ok(moead)
    }

    pub fn state(&self) -> &MoeadState {
        &self.state
    }

    pub fn decomposition(&self) -> Decomposition {
        self.decomposition
    }

    /// Index of the sub-problem handled by the most recent step.
    pub fn last_selected(&self) -> usize {
        self.last_selected
    }

    fn reset_reference_point(&mut self) {
        let dims = self.state.population[0].objectives.dims();
        self.state.z_star = vec![f64::NEG_INFINITY; dims];
        for i in 0..self.state.population.len() {
            let objectives = self.state.population[i].objectives;
            self.absorb(&objectives);
        }
    }

    fn absorb(&mut self, objectives: &ObjectiveVector) {
        for (i, z) in self.state.z_star.iter_mut().enumerate() {
            *z = z.max(objectives.normalized(i));
        }
    }

    fn cost(&self, objectives: &ObjectiveVector, sub: usize) -> f64 {
        let f = objectives.normalized_values();
        self.decomposition
            .cost(&f, &self.state.weights[sub], &self.state.z_star)
    }
}

impl Optimizer for Moead {
    fn step<F: Formulation>(&mut self, inst: &Instance, formulation: &F, rng: &mut Rng) {
        let sub = self.cursor;
        self.cursor = (self.cursor + 1) % self.state.population.len();
        self.last_selected = sub;

        let hood = &self.state.neighborhoods[sub];
        let (a, b) = if hood.len() >= 2 {
            let i = rng.random_range(0..hood.len());
            let mut j = rng.random_range(0..hood.len() - 1);
            if j >= i {
                j += 1;
            }
            (hood[i], hood[j])
        } else {
            (hood[0], hood[0])
        };
        let child = uniform_crossover(
            &self.state.population[a].solution,
            &self.state.population[b].solution,
            self.variation.crossover_prob,
            inst,
            rng,
        )
        .expect("population members share one length");
        let child = mutate(&child, self.variation.mutation_rate, inst, rng);
        let child = Member::evaluate(child, formulation);
        self.absorb(&child.objectives);

        let hood = self.state.neighborhoods[sub].clone();
        for j in hood {
            if self.cost(&child.objectives, j) < self.cost(&self.state.population[j].objectives, j)
            {
                self.state.population[j] = child.clone();
            }
        }
    }

    fn members(&self) -> &[Member] {
        &self.state.population
    }

    fn reevaluate<F: Formulation>(&mut self, formulation: &F) -> bool {
        let mut any_feasible = false;
        for m in &mut self.state.population {
            m.objectives = formulation.evaluate(&m.solution);
            any_feasible |= formulation.is_feasible(&m.solution);
        }
        // Penalty offsets move with the capacity, so the old reference point is stale.
        self.reset_reference_point();
        any_feasible
    }

    fn adopt<F: Formulation>(&mut self, solution: Solution, formulation: &F) {
        let member = Member::evaluate(solution, formulation);
        self.absorb(&member.objectives);
        self.state.population[self.last_selected] = member;
    }
}
