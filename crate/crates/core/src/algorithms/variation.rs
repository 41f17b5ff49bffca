use rand::distr::{Bernoulli, Distribution};
use rand::Rng;

use crate::model::{Instance, Solution};
use crate::{Error, Result};

/// Standard bit-flip mutation rate and uniform crossover probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationConfig {
    pub mutation_rate: f64,
    pub crossover_prob: f64,
}

impl VariationConfig {
    /// Mutation rate `1/n`, crossover probability 0.8.
    pub fn for_items(n: usize) -> Self {
        VariationConfig {
            mutation_rate: 1.0 / n.max(1) as f64,
            crossover_prob: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mutation rate", self.mutation_rate),
            ("crossover probability", self.crossover_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Flips every bit of `x` independently with probability `rate`.
pub fn mutate<R: Rng + ?Sized>(x: &Solution, rate: f64, inst: &Instance, rng: &mut R) -> Solution {
    let coin = Bernoulli::new(rate.clamp(0.0, 1.0)).expect("rate clamped to [0, 1]");
    let mut y = x.clone();
    for i in 0..y.len() {
        if coin.sample(rng) {
            y.flip_unchecked(i, inst);
        }
    }
    y
}

/// With probability `prob` takes each bit from `a` or `b` with equal chance;
/// otherwise returns a copy of `a`.
pub fn uniform_crossover<R: Rng + ?Sized>(
    a: &Solution,
    b: &Solution,
    prob: f64,
    inst: &Instance,
    rng: &mut R,
) -> Result<Solution> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "crossover parents differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if !rng.random_bool(prob.clamp(0.0, 1.0)) {
        return Ok(a.clone());
    }
    let bits = a
        .bits()
        .iter()
        .zip(b.bits())
        .map(|(&x, &y)| if rng.random_bool(0.5) { x } else { y })
        .collect();
    Solution::from_bits(bits, inst)
}
