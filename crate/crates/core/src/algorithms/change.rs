use super::{repair, Member, Optimizer};
use crate::model::{Instance, Solution};
use crate::objectives::{Formulation, RepairScore};
use crate::rng::Rng;

/// What happened at one capacity change.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChangeReport {
    pub repaired: bool,
    /// Evaluations the repair consumed; they count against the following epoch.
    pub evaluations: u64,
    /// Whether the repaired solution reached feasibility within its cap.
    pub repair_succeeded: bool,
}

/// The solution the repair starts from: the most profitable feasible member under
/// the capacity before the change, or the member with the best repair score when
/// none was feasible.
pub fn previous_best<F: Formulation>(
    members: &[Member],
    formulation: &F,
    inst: &Instance,
) -> Solution {
    let feasible = members
        .iter()
        .filter(|m| formulation.is_feasible(&m.solution))
        .max_by_key(|m| m.solution.profit());
    if let Some(m) = feasible {
        return m.solution.clone();
    }
    members
        .iter()
        .map(|m| (RepairScore::of(&m.solution, formulation, inst), m))
        .max_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("repair scores are totally ordered")
        })
        .map(|(_, m)| m.solution.clone())
        .expect("populations are never empty")
}

/// Moves `formulation` to `new_capacity`, re-scores the population and, when no
/// stored solution is feasible any more, repairs the previous best solution with at
/// most `budget_cap` evaluations and hands the result to the optimiser.
pub fn on_capacity_change<O: Optimizer, F: Formulation>(
    optimizer: &mut O,
    inst: &Instance,
    formulation: &mut F,
    new_capacity: f64,
    budget_cap: u64,
    rng: &mut Rng,
) -> ChangeReport {
    let start = previous_best(optimizer.members(), formulation, inst);
    formulation.set_capacity(new_capacity);
    if optimizer.reevaluate(formulation) {
        return ChangeReport::default();
    }
    let outcome = repair(start, formulation, inst, budget_cap, rng);
    optimizer.adopt(outcome.solution, formulation);
    ChangeReport {
        repaired: true,
        evaluations: outcome.evaluations,
        repair_succeeded: outcome.feasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{Decomposition, Gsemo, Moead, VariationConfig};
    use crate::model::{generate_instance, InstanceClass, VarianceRegime};
    use crate::objectives::{Formulation2D, Formulation3D};
    use crate::rng::{stream, Stream};
    use crate::stochastic::ChanceLevel;

    fn inst() -> Instance {
        generate_instance(InstanceClass::Uncorrelated, 30, VarianceRegime::V1, 9).unwrap()
    }

    #[test]
    fn no_repair_when_members_stay_in_band() {
        let inst = inst();
        let mut f =
            Formulation2D::new(&inst, ChanceLevel::new(0.99).unwrap(), 3000.0, 500.0).unwrap();
        let mut rng = stream(1, Stream::Algorithm(0));
        let mut g = Gsemo::new(&inst, &f, &mut rng);
        for _ in 0..5000 {
            g.step(&inst, &f, &mut rng);
        }
        assert!(g.members().iter().any(|m| f.in_band(&m.solution)));
        let report = on_capacity_change(&mut g, &inst, &mut f, 3010.0, 1000, &mut rng);
        assert!(!report.repaired);
        assert_eq!(report.evaluations, 0);
        assert_eq!(f.capacity(), 3010.0);
    }

    #[test]
    fn gsemo_restarts_from_repaired_solution() {
        let inst = inst();
        let mut f =
            Formulation2D::new(&inst, ChanceLevel::new(0.99).unwrap(), 8000.0, 100.0).unwrap();
        let mut rng = stream(2, Stream::Algorithm(0));
        let mut g = Gsemo::new(&inst, &f, &mut rng);
        for _ in 0..5000 {
            g.step(&inst, &f, &mut rng);
        }
        let report = on_capacity_change(&mut g, &inst, &mut f, 1000.0, 10_000, &mut rng);
        assert!(report.repaired);
        assert!(report.repair_succeeded);
        assert_eq!(g.members().len(), 1);
        assert!(f.in_band(&g.members()[0].solution));
    }

    #[test]
    fn moead_overwrites_last_selected() {
        let inst = inst();
        let lo = ChanceLevel::from_tail(1e-2).unwrap();
        let hi = ChanceLevel::from_tail(1e-10).unwrap();
        let mut f = Formulation3D::new(&inst, lo, hi, 8000.0, 100.0).unwrap();
        let mut rng = stream(3, Stream::Algorithm(0));
        let mut m = Moead::new(
            &inst,
            &f,
            30,
            Decomposition::Tchebycheff,
            VariationConfig::for_items(30),
            &mut rng,
        )
        .unwrap();
        for _ in 0..47 {
            m.step(&inst, &f, &mut rng);
        }
        let slot = m.last_selected();
        let report = on_capacity_change(&mut m, &inst, &mut f, 500.0, 10_000, &mut rng);
        assert!(report.repaired);
        assert!(f.feasible(&m.members()[slot].solution));
        let feasible = m
            .members()
            .iter()
            .filter(|x| f.feasible(&x.solution))
            .count();
        assert_eq!(feasible, 1);
    }

    #[test]
    fn previous_best_prefers_feasible_profit() {
        let inst = inst();
        let f = Formulation2D::new(&inst, ChanceLevel::new(0.99).unwrap(), 2000.0, 500.0).unwrap();
        let mut rng = stream(4, Stream::Algorithm(0));
        let members: Vec<Member> = (0..200)
            .map(|_| Member::evaluate(Solution::random(&inst, &mut rng), &f))
            .collect();
        let best = previous_best(&members, &f, &inst);
        let expect = members
            .iter()
            .filter(|m| f.in_band(&m.solution))
            .map(|m| m.solution.profit())
            .max();
        match expect {
            Some(p) => assert_eq!(best.profit(), p),
            None => assert!(!f.in_band(&best)),
        }
    }
}
