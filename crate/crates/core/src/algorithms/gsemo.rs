use rand::Rng as _;

use super::{mutate, Member, Optimizer};
use crate::model::{Instance, Solution};
use crate::objectives::Formulation;
use crate::rng::Rng;

/// Mutually non-dominated solutions with pairwise distinct objective vectors.
#[derive(Clone, Debug, Default)]
pub struct GsemoArchive {
    members: Vec<Member>,
}

impl GsemoArchive {
    pub fn new(first: Member) -> Self {
        GsemoArchive {
            members: vec![first],
        }
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Adds `candidate` unless a member strongly dominates it. On insertion every
    /// member the candidate weakly dominates is dropped, which includes a member
    /// with an identical objective vector.
    pub fn insert(&mut self, candidate: Member) -> bool {
        if self
            .members
            .iter()
            .any(|m| m.objectives.strongly_dominates(&candidate.objectives))
        {
            return false;
        }
        self.members
            .retain(|m| !candidate.objectives.weakly_dominates(&m.objectives));
        self.members.push(candidate);
        true
    }

    /// Rebuilds the archive from arbitrary members, keeping the invariants.
    pub fn from_members(members: impl IntoIterator<Item = Member>) -> Self {
        let mut archive = GsemoArchive::default();
        for m in members {
            archive.insert(m);
        }
        archive
    }
}

/// Global simple evolutionary multi-objective optimiser.
#[derive(Clone, Debug)]
pub struct Gsemo {
    archive: GsemoArchive,
    mutation_rate: f64,
}

impl Gsemo {
    /// Starts from one uniformly random bit string.
    pub fn new<F: Formulation>(inst: &Instance, formulation: &F, rng: &mut Rng) -> Self {
        let start = Solution::random(inst, rng);
        Gsemo::from_solution(start, inst, formulation)
    }

    pub fn from_solution<F: Formulation>(
        start: Solution,
        inst: &Instance,
        formulation: &F,
    ) -> Self {
        Gsemo {
            archive: GsemoArchive::new(Member::evaluate(start, formulation)),
            mutation_rate: 1.0 / inst.len() as f64,
        }
    }

    pub fn archive(&self) -> &GsemoArchive {
        &self.archive
    }
}

impl Optimizer for Gsemo {
    fn step<F: Formulation>(&mut self, inst: &Instance, formulation: &F, rng: &mut Rng) {
        let parent = &self.archive.members[rng.random_range(0..self.archive.len())];
        let child = mutate(&parent.solution, self.mutation_rate, inst, rng);
        self.archive.insert(Member::evaluate(child, formulation));
    }

    fn members(&self) -> &[Member] {
        &self.archive.members
    }

    fn reevaluate<F: Formulation>(&mut self, formulation: &F) -> bool {
        let members = std::mem::take(&mut self.archive.members);
        let any_feasible = members.iter().any(|m| formulation.is_feasible(&m.solution));
        self.archive = GsemoArchive::from_members(
            members
                .into_iter()
                .map(|m| Member::evaluate(m.solution, formulation)),
        );
        any_feasible
    }

    fn adopt<F: Formulation>(&mut self, solution: Solution, formulation: &F) {
        self.archive = GsemoArchive::new(Member::evaluate(solution, formulation));
    }
}
