//! Evolutionary optimisation of the dynamic chance-constrained knapsack problem.
//!
//! Items carry a deterministic profit and a normally distributed weight
//! `N(μ_i, σ_i²)`. A solution is feasible at confidence level `α` when
//! `Pr(w(x) ≤ B) ≥ α`, which for independent normal weights reduces to the
//! deterministic test `μ(x) + K_α·√v(x) ≤ B` where `K_α` is the standard normal
//! quantile. The capacity `B` performs a random walk while the optimiser runs.
//!
//! The crate provides:
//!
//! * [`model`]: instances, bit-string solutions with cached aggregates, generators and file I/O.
//! * [`stochastic`]: the normal quantile `K_α` and the chance-constraint weight `w_α(x)`.
//! * [`dynamics`]: the seeded capacity schedule.
//! * [`objectives`]: the 2-objective (single `α`) and 3-objective (`α`-range) fitness
//!   functions, dominance, and the repair fitness.
//! * [`algorithms`]: GSEMO, MOEA/D with weighted-sum, Tchebycheff and PBI scalarisation,
//!   the repair (1+1) EA and the capacity-change protocol.
//! * [`evaluation`]: the dynamic-programming optimum and the partial offline error.
//! * [`harness`]: run configuration, experiment orchestration and result export.
//!
//! The `book/` directory at the repository root explains the model in prose; its
//! code listings are compiled and run as doctests of this crate.
//!
//! ```
//! use dcckp::model::{generate_instance, InstanceClass, Solution, VarianceRegime};
//! use dcckp::stochastic::ChanceLevel;
//!
//! let inst = generate_instance(InstanceClass::Uncorrelated, 20, VarianceRegime::V1, 7).unwrap();
//! let mut x = Solution::empty(inst.len());
//! x.flip(3, &inst).unwrap();
//! let level = ChanceLevel::new(0.99).unwrap();
//! assert!(level.weight(&x) >= x.mean_weight() as f64);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod dynamics;
mod error;
pub mod evaluation;
pub mod harness;
pub mod model;
pub mod objectives;
pub mod rng;
pub mod stochastic;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/chance_constraints.md")]
    mod chance_constraints {}
    #[doc = include_str!("../../../book/src/formulations.md")]
    mod formulations {}
    #[doc = include_str!("../../../book/src/algorithms.md")]
    mod algorithms {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/offline_error.md")]
    mod offline_error {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
