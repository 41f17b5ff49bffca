//! Fitness functions for the two formulations, dominance, and the repair fitness.
//!
//! Both formulations keep solutions whose chance-constraint weight lies near the
//! current capacity, inside the band `[B − η, B + η]`. Solutions outside get a
//! penalty vector that every solution inside the band strictly dominates.
//!
//! * 2 objectives, one level `α`: maximise `p(x)`, minimise `w_α(x)`.
//! * 3 objectives, a range `[α_l, α_h]`: maximise `p(x)`, minimise `μ(x)`, minimise `v(x)`.
//!   A solution is feasible when `[w_{α_l}(x), w_{α_h}(x)]` meets the band.

use std::cmp::Ordering;
use std::fmt;

use crate::model::{Instance, Solution};
use crate::stochastic::{w_alpha_max, ChanceLevel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

pub const SENSES_2D: [Sense; 2] = [Sense::Maximize, Sense::Minimize];
pub const SENSES_3D: [Sense; 3] = [Sense::Maximize, Sense::Minimize, Sense::Minimize];

/// Objective values with a fixed optimisation sense per coordinate (2 or 3 of them).
#[derive(Clone, Copy, PartialEq)]
pub struct ObjectiveVector {
    values: [f64; 3],
    senses: &'static [Sense],
}

impl ObjectiveVector {
    pub fn new(values: &[f64], senses: &'static [Sense]) -> Result<Self> {
        if !(2..=3).contains(&senses.len()) || values.len() != senses.len() {
            return Err(Error::invalid(format!(
                "objective vector needs 2 or 3 values matching its senses, got {} values for {} senses",
                values.len(),
                senses.len()
            )));
        }
        let mut buf = [0.0; 3];
        buf[..values.len()].copy_from_slice(values);
        Ok(ObjectiveVector {
            values: buf,
            senses,
        })
    }

    fn two(a: f64, b: f64) -> Self {
        ObjectiveVector {
            values: [a, b, 0.0],
            senses: &SENSES_2D,
        }
    }

    fn three(a: f64, b: f64, c: f64) -> Self {
        ObjectiveVector {
            values: [a, b, c],
            senses: &SENSES_3D,
        }
    }

    pub fn dims(&self) -> usize {
        self.senses.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values[..self.dims()]
    }

    pub fn senses(&self) -> &'static [Sense] {
        self.senses
    }

    /// Coordinate `i` with minimised objectives negated, so larger is always better.
    #[inline]
    pub fn normalized(&self, i: usize) -> f64 {
        match self.senses[i] {
            Sense::Maximize => self.values[i],
            Sense::Minimize => -self.values[i],
        }
    }

    /// All coordinates in maximisation form.
    pub fn normalized_values(&self) -> Vec<f64> {
        (0..self.dims()).map(|i| self.normalized(i)).collect()
    }

    /// Dominance of `self` over `other`; errors when the two belong to different formulations.
    pub fn dominance(&self, other: &ObjectiveVector) -> Result<Dominance> {
        if self.senses != other.senses {
            return Err(Error::invalid(format!(
                "cannot compare a {}-objective vector with a {}-objective vector",
                self.dims(),
                other.dims()
            )));
        }
        Ok(self.dominance_unchecked(other))
    }

    #[inline]
    pub(crate) fn dominance_unchecked(&self, other: &ObjectiveVector) -> Dominance {
        let mut strict = false;
        for i in 0..self.dims() {
            let (a, b) = (self.normalized(i), other.normalized(i));
            if a < b {
                return Dominance::None;
            }
            if a > b {
                strict = true;
            }
        }
        if strict {
            Dominance::Strong
        } else {
            Dominance::Weak
        }
    }

    #[inline]
    pub fn strongly_dominates(&self, other: &ObjectiveVector) -> bool {
        self.dominance_unchecked(other) == Dominance::Strong
    }

    #[inline]
    pub fn weakly_dominates(&self, other: &ObjectiveVector) -> bool {
        self.dominance_unchecked(other) != Dominance::None
    }
}

impl fmt::Debug for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.values()).finish()
    }
}

/// Result of comparing `a` against `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// `a` is worse than `b` somewhere.
    None,
    /// `a` equals `b` in every coordinate.
    Weak,
    /// `a` is at least as good everywhere and better somewhere.
    Strong,
}

pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<Dominance> {
    a.dominance(b)
}

/// Operations the optimisers need from a fitness formulation.
pub trait Formulation: Clone + Send + Sync {
    fn evaluate(&self, x: &Solution) -> ObjectiveVector;

    /// Whether `x` counts as feasible for storage: inside the band for 2 objectives,
    /// interval intersection for 3.
    fn is_feasible(&self, x: &Solution) -> bool;

    /// Constraint violation `h(x) ≥ 0`, zero exactly when [`Formulation::is_feasible`] holds.
    fn violation(&self, x: &Solution) -> f64;

    fn capacity(&self) -> f64;

    fn set_capacity(&mut self, capacity: f64);

    fn eta(&self) -> f64;

    fn dims(&self) -> usize;
}

fn check_band(capacity: f64, eta: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!(
            "eta must be non-negative, got {eta}"
        )));
    }
    if !capacity.is_finite() {
        return Err(Error::invalid(format!(
            "capacity must be finite, got {capacity}"
        )));
    }
    Ok(())
}

/// Two objectives `(p(x), w_α(x))` for a single confidence level.
#[derive(Clone, Debug)]
pub struct Formulation2D {
    level: ChanceLevel,
    capacity: f64,
    eta: f64,
    w_alpha_max: f64,
}

impl Formulation2D {
    pub fn new(inst: &Instance, level: ChanceLevel, capacity: f64, eta: f64) -> Result<Self> {
        if !(level.alpha() > 0.5) {
            return Err(Error::invalid(format!(
                "alpha must exceed 1/2, got {level}"
            )));
        }
        check_band(capacity, eta)?;
        Ok(Formulation2D {
            level,
            capacity,
            eta,
            w_alpha_max: w_alpha_max(inst, &level),
        })
    }

    pub fn level(&self) -> &ChanceLevel {
        &self.level
    }

    pub fn w_alpha_max(&self) -> f64 {
        self.w_alpha_max
    }

    #[inline]
    pub fn chance_weight(&self, x: &Solution) -> f64 {
        self.level.weight(x)
    }

    /// `w_α(x) ∈ [B − η, B + η]`, boundaries included.
    #[inline]
    pub fn in_band(&self, x: &Solution) -> bool {
        (self.chance_weight(x) - self.capacity).abs() <= self.eta
    }

    /// `e(x) = |w_α(x) − B| − η`; positive for solutions outside the band.
    pub fn penalty(&self, x: &Solution) -> f64 {
        (self.chance_weight(x) - self.capacity).abs() - self.eta
    }

    pub fn fitness(&self, x: &Solution) -> ObjectiveVector {
        let w = self.chance_weight(x);
        let e = (w - self.capacity).abs() - self.eta;
        if e <= 0.0 {
            ObjectiveVector::two(x.profit() as f64, w)
        } else {
            ObjectiveVector::two(-e, self.w_alpha_max + 1.0 + e)
        }
    }

    /// `h(x) = max(|w_α(x) − B| − η, 0)`.
    pub fn violation(&self, x: &Solution) -> f64 {
        self.penalty(x).max(0.0)
    }
}

impl Formulation for Formulation2D {
    fn evaluate(&self, x: &Solution) -> ObjectiveVector {
        self.fitness(x)
    }

    fn is_feasible(&self, x: &Solution) -> bool {
        self.in_band(x)
    }

    fn violation(&self, x: &Solution) -> f64 {
        Formulation2D::violation(self, x)
    }

    fn capacity(&self) -> f64 {
        self.capacity
    }

    fn set_capacity(&mut self, capacity: f64) {
        self.capacity = capacity;
    }

    fn eta(&self) -> f64 {
        self.eta
    }

    fn dims(&self) -> usize {
        2
    }
}

/// Three objectives `(p(x), μ(x), v(x))`, independent of any single level in `[α_l, α_h]`.
#[derive(Clone, Debug)]
pub struct Formulation3D {
    low: ChanceLevel,
    high: ChanceLevel,
    capacity: f64,
    eta: f64,
    mu_cap: f64,
    var_cap: f64,
}

impl Formulation3D {
    pub fn new(
        inst: &Instance,
        low: ChanceLevel,
        high: ChanceLevel,
        capacity: f64,
        eta: f64,
    ) -> Result<Self> {
        if !(low.alpha() > 0.5 && low.alpha() < high.alpha() && high.alpha() < 1.0) {
            return Err(Error::invalid(format!(
                "need 1/2 < alpha_low < alpha_high < 1, got [{low}, {high}]"
            )));
        }
        check_band(capacity, eta)?;
        let n = inst.len() as f64;
        Ok(Formulation3D {
            low,
            high,
            capacity,
            eta,
            mu_cap: n * inst.max_mean() as f64 + 1.0,
            var_cap: n * inst.max_variance() as f64 + 1.0,
        })
    }

    pub fn low(&self) -> &ChanceLevel {
        &self.low
    }

    pub fn high(&self) -> &ChanceLevel {
        &self.high
    }

    /// `n·μ_max + 1`
    pub fn mu_cap(&self) -> f64 {
        self.mu_cap
    }

    /// `n·v_max + 1`
    pub fn var_cap(&self) -> f64 {
        self.var_cap
    }

    /// `(w_{α_l}(x), w_{α_h}(x))`
    #[inline]
    pub fn weight_range(&self, x: &Solution) -> (f64, f64) {
        (self.low.weight(x), self.high.weight(x))
    }

    /// The two one-sided excesses: `(B − η) − w_{α_h}(x)` and `w_{α_l}(x) − (B + η)`.
    #[inline]
    fn excesses(&self, x: &Solution) -> (f64, f64) {
        let (wl, wh) = self.weight_range(x);
        (
            (self.capacity - self.eta) - wh,
            wl - (self.capacity + self.eta),
        )
    }

    /// `[w_{α_l}(x), w_{α_h}(x)] ∩ [B − η, B + η] ≠ ∅`.
    #[inline]
    pub fn feasible(&self, x: &Solution) -> bool {
        let (below, above) = self.excesses(x);
        below <= 0.0 && above <= 0.0
    }

    /// `e′(x) = max((B − η) − w_{α_h}(x), w_{α_l}(x) − (B + η))`; positive when infeasible.
    pub fn penalty(&self, x: &Solution) -> f64 {
        let (below, above) = self.excesses(x);
        below.max(above)
    }

    pub fn fitness(&self, x: &Solution) -> ObjectiveVector {
        let (below, above) = self.excesses(x);
        if below <= 0.0 && above <= 0.0 {
            ObjectiveVector::three(
                x.profit() as f64,
                x.mean_weight() as f64,
                x.variance() as f64,
            )
        } else {
            let e = below.max(above);
            ObjectiveVector::three(-e, self.mu_cap + e, self.var_cap + e)
        }
    }

    /// `h(x) = max(0, max((B − η) − w_{α_h}, 0) + max(w_{α_l} − (B + η), 0))`.
    pub fn violation(&self, x: &Solution) -> f64 {
        let (below, above) = self.excesses(x);
        (below.max(0.0) + above.max(0.0)).max(0.0)
    }
}

impl Formulation for Formulation3D {
    fn evaluate(&self, x: &Solution) -> ObjectiveVector {
        self.fitness(x)
    }

    fn is_feasible(&self, x: &Solution) -> bool {
        self.feasible(x)
    }

    fn violation(&self, x: &Solution) -> f64 {
        Formulation3D::violation(self, x)
    }

    fn capacity(&self) -> f64 {
        self.capacity
    }

    fn set_capacity(&mut self, capacity: f64) {
        self.capacity = capacity;
    }

    fn eta(&self) -> f64 {
        self.eta
    }

    fn dims(&self) -> usize {
        3
    }
}

/// `f_r(x) = p(x) − (n·p_max + 1)·h(x)`.
pub fn repair_fitness(x: &Solution, violation: f64, inst: &Instance) -> Result<f64> {
    if !(violation >= 0.0) {
        return Err(Error::invalid(format!(
            "constraint violation must be non-negative, got {violation}"
        )));
    }
    let factor = inst.len() as f64 * inst.max_profit() as f64 + 1.0;
    Ok(x.profit() as f64 - factor * violation)
}

/// Repair fitness ordered lexicographically: any solution with `h = 0` beats any
/// with `h > 0`, then larger `f_r` wins. With a real-valued capacity `h` can be a
/// fraction, where the multiplier alone would not separate the two groups.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepairScore {
    pub feasible: bool,
    pub value: f64,
}

impl RepairScore {
    pub fn new(x: &Solution, violation: f64, inst: &Instance) -> Result<Self> {
        Ok(RepairScore {
            feasible: violation == 0.0,
            value: repair_fitness(x, violation, inst)?,
        })
    }

    pub fn of<F: Formulation>(x: &Solution, formulation: &F, inst: &Instance) -> Self {
        RepairScore::new(x, formulation.violation(x), inst).expect("violations are non-negative")
    }
}

impl PartialOrd for RepairScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(
            self.feasible
                .cmp(&other.feasible)
                .then(self.value.total_cmp(&other.value)),
        )
    }
}
