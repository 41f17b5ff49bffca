//! Partial offline error against the deterministic (mean-weight) knapsack optimum.
//!
//! Before each capacity change the population is scored at every reporting level
//! `α`. If some stored solution satisfies `w_α(x) ≤ B`, the error is the gap
//! between the optimum `P(x*)` and the best such profit; otherwise it is `P(x*)`
//! plus the smallest excess `w_α(x) − B` in the population. The total error `E`
//! is the mean over all changes.
//!
//! The test here has no `η` slack: the band is only a storage device for the
//! optimisers, not a relaxation of the constraint being reported.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;

use crate::model::{Instance, Solution};
use crate::stochastic::ChanceLevel;
use crate::{Error, Result};

/// Default bound on DP table cells (`⌊B⌋ + 1`).
pub const DEFAULT_DP_CELL_LIMIT: u64 = 100_000_000;

/// Maximum profit with mean weights and integer capacity `⌊capacity⌋`.
///
/// Runs the weight-indexed dynamic program in `O(n·⌊B⌋)` time and `O(⌊B⌋)` memory.
pub fn dp_optimum(inst: &Instance, capacity: f64, cell_limit: u64) -> Result<u64> {
    if !(capacity >= 0.0) {
        return Err(Error::invalid(format!(
            "capacity must be non-negative, got {capacity}"
        )));
    }
    if capacity >= inst.total_mean() as f64 {
        return Ok(inst.total_profit());
    }
    let cap = capacity.floor() as u64;
    if cap + 1 > cell_limit {
        return Err(Error::Resource(format!(
            "DP table for capacity {cap} needs {} cells, limit is {cell_limit}",
            cap + 1
        )));
    }
    let cap = cap as usize;
    let mut best = vec![0u64; cap + 1];
    for (&p, &w) in inst.profits().iter().zip(inst.means()) {
        let w = w as usize;
        if w > cap {
            continue;
        }
        for c in (w..=cap).rev() {
            let take = best[c - w] + p;
            if take > best[c] {
                best[c] = take;
            }
        }
    }
    Ok(best[cap])
}

/// [`dp_optimum`] memoised on `⌊B⌋`; shareable across threads.
#[derive(Debug)]
pub struct DpOracle<'a> {
    inst: &'a Instance,
    cell_limit: u64,
    memo: RwLock<HashMap<u64, u64>>,
}

impl<'a> DpOracle<'a> {
    pub fn new(inst: &'a Instance, cell_limit: u64) -> Self {
        DpOracle {
            inst,
            cell_limit,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn optimum(&self, capacity: f64) -> Result<u64> {
        if !(capacity >= 0.0) {
            return Err(Error::invalid(format!(
                "capacity must be non-negative, got {capacity}"
            )));
        }
        let key = capacity.floor() as u64;
        if let Some(&v) = self.memo.read().expect("memo lock poisoned").get(&key) {
            return Ok(v);
        }
        let v = dp_optimum(self.inst, key as f64, self.cell_limit)?;
        self.memo
            .write()
            .expect("memo lock poisoned")
            .insert(key, v);
        Ok(v)
    }
}

/// Offline error at one change and one level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationRecord {
    /// 1-based index of the change the snapshot precedes.
    pub change_index: usize,
    pub alpha: f64,
    pub capacity: f64,
    pub p_star: u64,
    /// Profit of the best solution with `w_α(x) ≤ B`, when there is one.
    pub best_profit: Option<u64>,
    /// Smallest `w_α(x) − B` in the population, when nothing satisfies the constraint.
    pub min_violation: Option<f64>,
    #[serde(rename = "e_i")]
    pub error: f64,
}

/// Scores a population against the optimum `p_star` at capacity `capacity`.
pub fn offline_error<'s>(
    change_index: usize,
    capacity: f64,
    level: &ChanceLevel,
    p_star: u64,
    population: impl IntoIterator<Item = &'s Solution>,
) -> Result<EvaluationRecord> {
    let mut best_profit: Option<u64> = None;
    let mut min_violation = f64::INFINITY;
    let mut seen = false;
    for x in population {
        seen = true;
        let excess = level.weight(x) - capacity;
        if excess <= 0.0 {
            best_profit = Some(best_profit.map_or(x.profit(), |b| b.max(x.profit())));
        } else {
            min_violation = min_violation.min(excess);
        }
    }
    if !seen {
        return Err(Error::invalid("cannot evaluate an empty population"));
    }
    let (error, min_violation) = match best_profit {
        Some(p) => (p_star as f64 - p as f64, None),
        None => (p_star as f64 + min_violation, Some(min_violation)),
    };
    Ok(EvaluationRecord {
        change_index,
        alpha: level.alpha(),
        capacity,
        p_star,
        best_profit,
        min_violation,
        error,
    })
}

/// All records of one run at one level, with their mean `E`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaSeries {
    pub alpha: f64,
    pub records: Vec<EvaluationRecord>,
    pub total_error: f64,
}

/// Per-level results of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunResult {
    pub series: Vec<AlphaSeries>,
}

impl RunResult {
    pub fn total_error(&self, alpha: f64) -> Option<f64> {
        self.series
            .iter()
            .find(|s| s.alpha == alpha)
            .map(|s| s.total_error)
    }
}

/// Mean offline error `E = Σ e_j / ν` over one level's records.
///
/// Records are summed in change order, so the result does not depend on the
/// order they are passed in.
pub fn total_error(records: &[EvaluationRecord], nu: usize) -> Result<f64> {
    if records.len() != nu || nu == 0 {
        return Err(Error::invalid(format!(
            "expected {nu} records (one per change), got {}",
            records.len()
        )));
    }
    let mut ordered: Vec<&EvaluationRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.change_index);
    if ordered
        .windows(2)
        .any(|w| w[0].change_index == w[1].change_index)
    {
        return Err(Error::invalid("duplicate change index among records"));
    }
    Ok(ordered.iter().map(|r| r.error).sum::<f64>() / nu as f64)
}

/// Groups records by level (in first-seen order) and computes `E` for each.
pub fn aggregate(records: Vec<EvaluationRecord>, nu: usize) -> Result<RunResult> {
    let mut series: Vec<AlphaSeries> = Vec::new();
    for r in records {
        match series.iter_mut().find(|s| s.alpha == r.alpha) {
            Some(s) => s.records.push(r),
            None => series.push(AlphaSeries {
                alpha: r.alpha,
                records: vec![r],
                total_error: 0.0,
            }),
        }
    }
    for s in &mut series {
        s.records.sort_by_key(|r| r.change_index);
        s.total_error = total_error(&s.records, nu)?;
    }
    Ok(RunResult { series })
}
