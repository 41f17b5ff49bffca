//! Scalarising functions and weight vectors for MOEA/D.
//!
//! All functions take objective vectors in maximisation form (minimised
//! coordinates negated), with the reference point `z*` holding the best value
//! seen per coordinate.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decomposition {
    WeightedSum,
    Tchebycheff,
    /// Penalty-based boundary intersection with penalty `theta`.
    Pbi {
        theta: f64,
    },
}

pub const DEFAULT_PBI_THETA: f64 = 5.0;

impl Decomposition {
    /// Cost of `f` for the sub-problem with weights `lambda`; lower is better for
    /// every variant (the weighted sum is negated).
    pub(crate) fn cost(&self, f: &[f64], lambda: &[f64], z_star: &[f64]) -> f64 {
        match *self {
            Decomposition::WeightedSum => -ws(f, lambda),
            Decomposition::Tchebycheff => te(f, lambda, z_star),
            Decomposition::Pbi { theta } => pbi(f, lambda, z_star, theta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Decomposition::WeightedSum => "ws",
            Decomposition::Tchebycheff => "te",
            Decomposition::Pbi { .. } => "pbi",
        }
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Decomposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ws" => Ok(Decomposition::WeightedSum),
            "te" => Ok(Decomposition::Tchebycheff),
            "pbi" => Ok(Decomposition::Pbi {
                theta: DEFAULT_PBI_THETA,
            }),
            _ => Err(Error::invalid(format!(
                "unknown decomposition {s:?} (ws|te|pbi)"
            ))),
        }
    }
}

fn check_dims(f: &[f64], lambda: &[f64], z: Option<&[f64]>) -> Result<()> {
    let ok = f.len() == lambda.len() && z.is_none_or(|z| z.len() == f.len());
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "dimension mismatch: |F| = {}, |lambda| = {}, |z*| = {:?}",
            f.len(),
            lambda.len(),
            z.map(<[f64]>::len)
        )))
    }
}

/// `Σ λ_i f_i`, to be maximised.
pub fn g_ws(f: &[f64], lambda: &[f64]) -> Result<f64> {
    check_dims(f, lambda, None)?;
    Ok(ws(f, lambda))
}

/// `max_i λ_i |f_i − z_i*|`, to be minimised.
pub fn g_te(f: &[f64], lambda: &[f64], z_star: &[f64]) -> Result<f64> {
    check_dims(f, lambda, Some(z_star))?;
    Ok(te(f, lambda, z_star))
}

/// `d₁ + θ·d₂` with `d₁ = |(z* − F)·λ| / ‖λ‖` and `d₂ = ‖F − (z* − d₁·λ/‖λ‖)‖`, to be minimised.
pub fn g_pbi(f: &[f64], lambda: &[f64], z_star: &[f64], theta: f64) -> Result<f64> {
    check_dims(f, lambda, Some(z_star))?;
    if !(theta > 0.0) {
        return Err(Error::invalid(format!(
            "PBI penalty must be positive, got {theta}"
        )));
    }
    if norm(lambda) == 0.0 {
        return Err(Error::invalid("PBI weight vector is zero"));
    }
    Ok(pbi(f, lambda, z_star, theta))
}

#[inline]
fn ws(f: &[f64], lambda: &[f64]) -> f64 {
    f.iter().zip(lambda).map(|(a, l)| a * l).sum()
}

#[inline]
fn te(f: &[f64], lambda: &[f64], z: &[f64]) -> f64 {
    f.iter()
        .zip(lambda)
        .zip(z)
        .map(|((a, l), zi)| l * (a - zi).abs())
        .fold(0.0, f64::max)
}

#[inline]
fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
fn pbi(f: &[f64], lambda: &[f64], z: &[f64], theta: f64) -> f64 {
    let ln = norm(lambda);
    let d1 = f
        .iter()
        .zip(lambda)
        .zip(z)
        .map(|((a, l), zi)| (zi - a) * l)
        .sum::<f64>()
        .abs()
        / ln;
    let d2 = f
        .iter()
        .zip(lambda)
        .zip(z)
        .map(|((a, l), zi)| {
            let d = a - (zi - d1 * l / ln);
            d * d
        })
        .sum::<f64>()
        .sqrt();
    d1 + theta * d2
}

/// `count` weight vectors drawn from the flat Dirichlet distribution on the `m`-simplex.
pub fn dirichlet_weights<R: Rng + ?Sized>(
    count: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::invalid("need at least one weight vector"));
    }
    if !(2..=3).contains(&m) {
        return Err(Error::invalid(format!(
            "weight vectors need 2 or 3 components, got {m}"
        )));
    }
    // Normalised i.i.d. unit exponentials are Dirichlet(1, …, 1).
    Ok((0..count)
        .map(|_| {
            let draws: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = draws.iter().sum();
            let mut lambda: Vec<f64> = draws[..m - 1].iter().map(|d| d / total).collect();
            let head: f64 = lambda.iter().sum();
            lambda.push((1.0 - head).max(0.0));
            lambda
        })
        .collect())
}

/// Neighbourhood size `max(2, ⌈N/10⌉)`, capped at `N`.
pub fn neighborhood_size(population: usize) -> usize {
    population.div_ceil(10).max(2).min(population)
}

/// For each weight vector, the indices of the `size` nearest vectors by Euclidean
/// distance, itself first.
pub(crate) fn neighborhoods(weights: &[Vec<f64>], size: usize) -> Vec<Vec<usize>> {
    weights
        .iter()
        .enumerate()
        .map(|(i, wi)| {
            let mut order: Vec<(f64, usize)> = weights
                .iter()
                .enumerate()
                .map(|(j, wj)| {
                    let d: f64 = wi.iter().zip(wj).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d, j)
                })
                .collect();
            order.sort_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then((a.1 != i).cmp(&(b.1 != i)))
                    .then(a.1.cmp(&b.1))
            });
            order.into_iter().take(size).map(|(_, j)| j).collect()
        })
        .collect()
}
