//! Knapsack instances with normally distributed item weights, and bit-string solutions.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Upper end of the uniform range profits and mean weights are drawn from.
pub const VALUE_RANGE: u64 = 1000;

/// Profit offset of the bounded strongly correlated class: `p_i = μ_i + BSC_OFFSET`.
pub const BSC_OFFSET: u64 = VALUE_RANGE / 10;

/// Items of a chance-constrained knapsack: profit `p_i` and weight `N(μ_i, v_i)`.
///
/// Immutable once built; all values are at least one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    profits: Vec<u64>,
    means: Vec<u64>,
    variances: Vec<u64>,
    maxima: Maxima,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Maxima {
    profit: u64,
    mean: u64,
    variance: u64,
}

impl Instance {
    pub fn new(profits: Vec<u64>, means: Vec<u64>, variances: Vec<u64>) -> Result<Self> {
        let n = profits.len();
        if n == 0 {
            return Err(Error::invalid("an instance needs at least one item"));
        }
        if means.len() != n || variances.len() != n {
            return Err(Error::invalid(format!(
                "array lengths differ: {} profits, {} means, {} variances",
                n,
                means.len(),
                variances.len()
            )));
        }
        for (i, ((&p, &m), &v)) in profits.iter().zip(&means).zip(&variances).enumerate() {
            if p == 0 || m == 0 || v == 0 {
                return Err(Error::invalid(format!(
                    "item {i} has a non-positive value (p={p}, mu={m}, v={v})"
                )));
            }
        }
        let maxima = Maxima {
            profit: *profits.iter().max().unwrap(),
            mean: *means.iter().max().unwrap(),
            variance: *variances.iter().max().unwrap(),
        };
        Ok(Instance {
            profits,
            means,
            variances,
            maxima,
        })
    }

    /// Number of items `n`.
    pub fn len(&self) -> usize {
        self.profits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profits.is_empty()
    }

    pub fn profits(&self) -> &[u64] {
        &self.profits
    }

    pub fn means(&self) -> &[u64] {
        &self.means
    }

    pub fn variances(&self) -> &[u64] {
        &self.variances
    }

    pub fn profit(&self, i: usize) -> u64 {
        self.profits[i]
    }

    pub fn mean(&self, i: usize) -> u64 {
        self.means[i]
    }

    pub fn variance(&self, i: usize) -> u64 {
        self.variances[i]
    }

    pub fn max_profit(&self) -> u64 {
        self.maxima.profit
    }

    pub fn max_mean(&self) -> u64 {
        self.maxima.mean
    }

    pub fn max_variance(&self) -> u64 {
        self.maxima.variance
    }

    pub fn total_mean(&self) -> u64 {
        self.means.iter().sum()
    }

    pub fn total_profit(&self) -> u64 {
        self.profits.iter().sum()
    }

    /// Serialises to the text format: a line with `n`, then one `p μ v` line per item.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 * (self.len() + 1));
        let _ = writeln!(out, "{}", self.len());
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{} {} {}",
                self.profits[i], self.means[i], self.variances[i]
            );
        }
        out
    }

    /// Parses the text format. `origin` names the source in error messages.
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (header_no, header) = lines
            .by_ref()
            .find(|(_, l)| !l.is_empty())
            .ok_or_else(|| parse_err(1, "missing item count".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| parse_err(header_no, format!("bad item count {header:?}")))?;
        if n == 0 {
            return Err(parse_err(header_no, "item count must be positive".into()));
        }

        let mut profits = Vec::with_capacity(n);
        let mut means = Vec::with_capacity(n);
        let mut variances = Vec::with_capacity(n);
        let mut last_line = header_no;
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            last_line = no;
            if profits.len() == n {
                return Err(parse_err(no, format!("more than {n} item lines")));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(
                    no,
                    format!("expected 3 fields `p mu v`, found {}", fields.len()),
                ));
            }
            let mut vals = [0u64; 3];
            for (slot, (field, name)) in vals.iter_mut().zip(fields.iter().zip(["p", "mu", "v"])) {
                let v = u64::from_str(field).map_err(|_| {
                    parse_err(
                        no,
                        format!("{name} is not a non-negative integer: {field:?}"),
                    )
                })?;
                if v == 0 {
                    return Err(parse_err(no, format!("{name} must be at least 1")));
                }
                *slot = v;
            }
            profits.push(vals[0]);
            means.push(vals[1]);
            variances.push(vals[2]);
        }
        if profits.len() != n {
            return Err(parse_err(
                last_line,
                format!(
                    "header declares {n} items but {} item lines follow",
                    profits.len()
                ),
            ));
        }
        Instance::new(profits, means, variances)
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Instance::from_text(&text, &path.display().to_string())
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, inst.to_text()).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstanceClass {
    /// Profits and mean weights drawn independently.
    Uncorrelated,
    /// Profit equals mean weight plus a fixed offset.
    BoundedStronglyCorrelated,
}

impl InstanceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            InstanceClass::Uncorrelated => "uncorr",
            InstanceClass::BoundedStronglyCorrelated => "bsc",
        }
    }
}

impl FromStr for InstanceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncorr" => Ok(InstanceClass::Uncorrelated),
            "bsc" => Ok(InstanceClass::BoundedStronglyCorrelated),
            _ => Err(Error::invalid(format!(
                "unknown instance class {s:?} (uncorr|bsc)"
            ))),
        }
    }
}

/// How item variances are drawn relative to the mean weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarianceRegime {
    /// `v_i` uniform on `{1, …, μ_i}`.
    V1,
    /// `v_i` uniform on `{μ_i², …, 2μ_i²}`.
    V2,
}

impl VarianceRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            VarianceRegime::V1 => "V1",
            VarianceRegime::V2 => "V2",
        }
    }

    /// Draws one variance for an item with mean weight `mean`.
    pub fn draw<R: Rng + ?Sized>(self, mean: u64, rng: &mut R) -> u64 {
        match self {
            VarianceRegime::V1 => rng.random_range(1..=mean),
            VarianceRegime::V2 => {
                let sq = mean * mean;
                rng.random_range(sq..=2 * sq)
            }
        }
    }
}

impl FromStr for VarianceRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "V1" | "v1" => Ok(VarianceRegime::V1),
            "V2" | "v2" => Ok(VarianceRegime::V2),
            _ => Err(Error::invalid(format!(
                "unknown variance regime {s:?} (V1|V2)"
            ))),
        }
    }
}

/// Generates a benchmark instance; deterministic in all four arguments.
pub fn generate_instance(
    class: InstanceClass,
    n: usize,
    regime: VarianceRegime,
    seed: u64,
) -> Result<Instance> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mut rng = rng::stream(seed, Stream::Instance);
    let mut profits = Vec::with_capacity(n);
    let mut means = Vec::with_capacity(n);
    let mut variances = Vec::with_capacity(n);
    for _ in 0..n {
        let mean = rng.random_range(1..=VALUE_RANGE);
        let profit = match class {
            InstanceClass::Uncorrelated => rng.random_range(1..=VALUE_RANGE),
            InstanceClass::BoundedStronglyCorrelated => mean + BSC_OFFSET,
        };
        means.push(mean);
        profits.push(profit);
        variances.push(regime.draw(mean, &mut rng));
    }
    Instance::new(profits, means, variances)
}

/// A subset of items as a bit string, with profit, mean and variance sums cached.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Solution {
    bits: Vec<bool>,
    profit: u64,
    mean: u64,
    variance: u64,
}

impl Solution {
    pub fn empty(n: usize) -> Self {
        Solution {
            bits: vec![false; n],
            profit: 0,
            mean: 0,
            variance: 0,
        }
    }

    pub fn from_bits(bits: Vec<bool>, inst: &Instance) -> Result<Self> {
        if bits.len() != inst.len() {
            return Err(Error::invalid(format!(
                "bit string has length {}, instance has {} items",
                bits.len(),
                inst.len()
            )));
        }
        let mut sol = Solution {
            bits,
            profit: 0,
            mean: 0,
            variance: 0,
        };
        sol.recompute(inst);
        Ok(sol)
    }

    pub fn random<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Self {
        let bits = (0..inst.len()).map(|_| rng.random_bool(0.5)).collect();
        Solution::from_bits(bits, inst).expect("length matches by construction")
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `p(x)`
    pub fn profit(&self) -> u64 {
        self.profit
    }

    /// `μ(x)`
    pub fn mean_weight(&self) -> u64 {
        self.mean
    }

    /// `v(x)`
    pub fn variance(&self) -> u64 {
        self.variance
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Toggles item `i`, updating the cached sums in O(1).
    pub fn flip(&mut self, i: usize, inst: &Instance) -> Result<()> {
        if i >= self.bits.len() {
            return Err(Error::invalid(format!(
                "bit index {i} out of range for {} items",
                self.bits.len()
            )));
        }
        self.flip_unchecked(i, inst);
        Ok(())
    }

    pub(crate) fn flip_unchecked(&mut self, i: usize, inst: &Instance) {
        let bit = &mut self.bits[i];
        *bit = !*bit;
        if *bit {
            self.profit += inst.profit(i);
            self.mean += inst.mean(i);
            self.variance += inst.variance(i);
        } else {
            self.profit -= inst.profit(i);
            self.mean -= inst.mean(i);
            self.variance -= inst.variance(i);
        }
    }

    /// Returns a copy with item `i` toggled.
    pub fn flipped(&self, i: usize, inst: &Instance) -> Result<Self> {
        let mut out = self.clone();
        out.flip(i, inst)?;
        Ok(out)
    }

    fn recompute(&mut self, inst: &Instance) {
        let (mut p, mut m, mut v) = (0, 0, 0);
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            p += inst.profit(i);
            m += inst.mean(i);
            v += inst.variance(i);
        }
        self.profit = p;
        self.mean = m;
        self.variance = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn small() -> Instance {
        Instance::new(vec![3, 1, 4], vec![2, 7, 1], vec![5, 9, 2]).unwrap()
    }

    // Independent dot-product recomputation.
    fn dot(sol: &Solution, inst: &Instance) -> (u64, u64, u64) {
        let pick = |vals: &[u64]| -> u64 {
            sol.bits()
                .iter()
                .zip(vals)
                .map(|(&b, &v)| if b { v } else { 0 })
                .sum()
        };
        (
            pick(inst.profits()),
            pick(inst.means()),
            pick(inst.variances()),
        )
    }

    #[test]
    fn rejects_invalid_instances() {
        assert!(Instance::new(vec![], vec![], vec![]).is_err());
        assert!(Instance::new(vec![1, 2], vec![1], vec![1, 1]).is_err());
        assert!(Instance::new(vec![1], vec![0], vec![1]).is_err());
    }

    #[test]
    fn maxima() {
        let inst = small();
        assert_eq!(inst.max_profit(), 4);
        assert_eq!(inst.max_mean(), 7);
        assert_eq!(inst.max_variance(), 9);
    }

    #[test]
    fn flip_single_item() {
        let inst = small();
        let mut x = Solution::empty(3);
        x.flip(0, &inst).unwrap();
        assert_eq!((x.profit(), x.mean_weight(), x.variance()), (3, 2, 5));
    }

    #[test]
    fn flip_is_involution() {
        let inst = small();
        let x = Solution::from_bits(vec![true, false, true], &inst).unwrap();
        let y = x.flipped(1, &inst).unwrap().flipped(1, &inst).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn flip_out_of_range() {
        let inst = small();
        let mut x = Solution::empty(3);
        assert!(matches!(x.flip(3, &inst), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_aggregates_iff_empty() {
        let inst = small();
        let x = Solution::empty(3);
        assert_eq!((x.profit(), x.mean_weight(), x.variance()), (0, 0, 0));
        let y = x.flipped(2, &inst).unwrap();
        assert!(y.profit() > 0 && y.mean_weight() > 0 && y.variance() > 0);
    }

    #[test]
    fn incremental_matches_recompute_on_random_n12() {
        let inst =
            generate_instance(InstanceClass::Uncorrelated, 12, VarianceRegime::V2, 3).unwrap();
        let mut rng = rng::stream(11, Stream::Algorithm(0));
        let mut x = Solution::random(&inst, &mut rng);
        for _ in 0..500 {
            let i = rng.random_range(0..12);
            x.flip(i, &inst).unwrap();
            assert_eq!((x.profit(), x.mean_weight(), x.variance()), dot(&x, &inst));
        }
    }

    #[test]
    fn exhaustive_gray_code_walk_n16() {
        // A Gray-code walk visits every subset of 16 items through single flips.
        let inst = generate_instance(
            InstanceClass::BoundedStronglyCorrelated,
            16,
            VarianceRegime::V1,
            5,
        )
        .unwrap();
        let mut x = Solution::empty(16);
        for k in 1u32..(1 << 16) {
            x.flip(k.trailing_zeros() as usize, &inst).unwrap();
            assert_eq!((x.profit(), x.mean_weight(), x.variance()), dot(&x, &inst));
        }
    }

    #[test]
    fn v1_variances_bounded_by_mean() {
        let mut rng = rng::stream(1, Stream::Instance);
        for &mu in &[4u64, 9, 2] {
            for _ in 0..200 {
                let v = VarianceRegime::V1.draw(mu, &mut rng);
                assert!((1..=mu).contains(&v));
            }
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_instance(InstanceClass::Uncorrelated, 50, VarianceRegime::V1, 42).unwrap();
        let b = generate_instance(InstanceClass::Uncorrelated, 50, VarianceRegime::V1, 42).unwrap();
        let c = generate_instance(InstanceClass::Uncorrelated, 50, VarianceRegime::V1, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generator_rejects_zero_items() {
        assert!(generate_instance(InstanceClass::Uncorrelated, 0, VarianceRegime::V1, 1).is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let short = "3\n1 1 1\n2 2 2\n";
        match Instance::from_text(short, "short.txt") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let zero_mean = "2\n1 1 1\n5 0 1\n";
        match Instance::from_text(zero_mean, "zero.txt") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("mu"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(Instance::from_text("1\n1 2\n", "x").is_err());
        assert!(Instance::from_text("1\n1 2 3\n4 5 6\n", "x").is_err());
        assert!(Instance::from_text("", "x").is_err());
    }

    #[test]
    fn file_round_trip_n300() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.txt");
        let inst = generate_instance(
            InstanceClass::BoundedStronglyCorrelated,
            300,
            VarianceRegime::V2,
            9,
        )
        .unwrap();
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);
    }

    proptest! {
        #[test]
        fn generated_instances_respect_class_and_regime(
            n in 1usize..60,
            seed in any::<u64>(),
            bsc in any::<bool>(),
            v2 in any::<bool>(),
        ) {
            let class = if bsc { InstanceClass::BoundedStronglyCorrelated } else { InstanceClass::Uncorrelated };
            let regime = if v2 { VarianceRegime::V2 } else { VarianceRegime::V1 };
            let inst = generate_instance(class, n, regime, seed).unwrap();
            prop_assert_eq!(inst.len(), n);
            for i in 0..n {
                let (p, m, v) = (inst.profit(i), inst.mean(i), inst.variance(i));
                prop_assert!((1..=VALUE_RANGE).contains(&m));
                match regime {
                    VarianceRegime::V1 => prop_assert!(1 <= v && v <= m),
                    VarianceRegime::V2 => prop_assert!(m * m <= v && v <= 2 * m * m),
                }
                if bsc {
                    prop_assert_eq!(p - m, BSC_OFFSET);
                } else {
                    prop_assert!((1..=VALUE_RANGE).contains(&p));
                }
            }
        }

        #[test]
        fn text_round_trip(n in 1usize..40, seed in any::<u64>()) {
            let inst = generate_instance(InstanceClass::Uncorrelated, n, VarianceRegime::V2, seed).unwrap();
            let back = Instance::from_text(&inst.to_text(), "mem").unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
