use super::mutate;
use crate::model::{Instance, Solution};
use crate::objectives::{Formulation, RepairScore};
use crate::rng::Rng;

#[derive(Clone, Debug)]
pub struct RepairOutcome {
    pub solution: Solution,
    /// Fitness evaluations spent, one per mutation tried.
    pub evaluations: u64,
    pub feasible: bool,
}

/// (1+1) EA on the repair fitness, started from `start`.
///
/// Each iteration mutates the incumbent with rate `1/n` and keeps the offspring
/// when its [`RepairScore`] is at least as good. Stops once the incumbent is
/// feasible or `budget_cap` evaluations are spent, returning the incumbent either way.
pub fn repair<F: Formulation>(
    start: Solution,
    formulation: &F,
    inst: &Instance,
    budget_cap: u64,
    rng: &mut Rng,
) -> RepairOutcome {
    let rate = 1.0 / inst.len() as f64;
    let mut x = start;
    let mut score = RepairScore::of(&x, formulation, inst);
    let mut evaluations = 0;
    while !score.feasible && evaluations < budget_cap {
        let y = mutate(&x, rate, inst, rng);
        evaluations += 1;
        let candidate = RepairScore::of(&y, formulation, inst);
        if candidate >= score {
            x = y;
            score = candidate;
        }
    }
    RepairOutcome {
        solution: x,
        evaluations,
        feasible: score.feasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_instance, InstanceClass, VarianceRegime};
    use crate::objectives::{Formulation2D, Formulation3D};
    use crate::rng::{stream, Stream};
    use crate::stochastic::ChanceLevel;

    #[test]
    fn feasible_start_costs_nothing() {
        let inst =
            generate_instance(InstanceClass::Uncorrelated, 8, VarianceRegime::V1, 1).unwrap();
        let f = Formulation2D::new(&inst, ChanceLevel::new(0.99).unwrap(), 0.0, 10.0).unwrap();
        let mut rng = stream(0, Stream::Algorithm(0));
        let out = repair(Solution::empty(8), &f, &inst, 100, &mut rng);
        assert_eq!(out.evaluations, 0);
        assert!(out.feasible);
        assert_eq!(out.solution, Solution::empty(8));
    }

    #[test]
    fn single_item_walks_to_empty() {
        let inst =
            generate_instance(InstanceClass::Uncorrelated, 1, VarianceRegime::V1, 1).unwrap();
        let f = Formulation2D::new(&inst, ChanceLevel::new(0.99).unwrap(), 0.0, 0.0).unwrap();
        let mut rng = stream(0, Stream::Algorithm(0));
        let start = Solution::from_bits(vec![true], &inst).unwrap();
        let out = repair(start, &f, &inst, 100, &mut rng);
        assert!(out.feasible);
        assert_eq!(out.solution.count_ones(), 0);
        assert_eq!(out.evaluations, 1);
    }

    #[test]
    fn respects_budget_cap() {
        let inst =
            generate_instance(InstanceClass::Uncorrelated, 20, VarianceRegime::V1, 2).unwrap();
        // No solution can reach a band far above the total weight.
        let f = Formulation2D::new(&inst, ChanceLevel::new(0.99).unwrap(), 1e9, 1.0).unwrap();
        let mut rng = stream(0, Stream::Algorithm(0));
        let out = repair(Solution::empty(20), &f, &inst, 37, &mut rng);
        assert_eq!(out.evaluations, 37);
        assert!(!out.feasible);
        // Every accepted step moves toward the band.
        assert!(out.solution.count_ones() > 0);
    }

    #[test]
    fn never_worsens_start() {
        for seed in 0..20 {
            let inst = generate_instance(
                InstanceClass::BoundedStronglyCorrelated,
                12,
                VarianceRegime::V2,
                seed,
            )
            .unwrap();
            let mut rng = stream(seed, Stream::Algorithm(0));
            let lo = ChanceLevel::from_tail(1e-2).unwrap();
            let hi = ChanceLevel::from_tail(1e-10).unwrap();
            let f = Formulation3D::new(&inst, lo, hi, 1500.0, 100.0).unwrap();
            let start = Solution::random(&inst, &mut rng);
            let before = RepairScore::of(&start, &f, &inst);
            let out = repair(start, &f, &inst, 500, &mut rng);
            let after = RepairScore::of(&out.solution, &f, &inst);
            assert!(after >= before);
            assert_eq!(out.feasible, after.feasible);
        }
    }
}
