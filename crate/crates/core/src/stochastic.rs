//! Normal quantiles and the deterministic chance-constraint weight.
//!
//! For independent normal item weights the total weight of `x` is
//! `N(μ(x), v(x))`, so `Pr(w(x) ≤ B) ≥ α` holds exactly when
//! `w_α(x) = μ(x) + K_α·√v(x) ≤ B`, with `K_α = Φ⁻¹(α)`.

// The AS241 coefficients are kept exactly as published.
#![allow(clippy::excessive_precision)]

use std::fmt;
use std::str::FromStr;

use crate::model::{Instance, Solution};
use crate::{Error, Result};

/// Inverse of the standard normal CDF, Wichura's AS241 (PPND16) rational
/// approximation. Relative accuracy is about 1e-16 over the whole open interval.
///
/// Returns a domain error unless `0 < p < 1`.
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile requires 0 < p < 1, got {p}"
        )));
    }
    Ok(ppnd16(p))
}

const SPLIT1: f64 = 0.425;
const SPLIT2: f64 = 5.0;
const CONST1: f64 = 0.180625;
const CONST2: f64 = 1.6;

const A: [f64; 8] = [
    3.387_132_872_796_366_608_0e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083_0e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061_0e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561_0e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_90e0,
    5.769_497_221_460_691_405_50e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_70e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_40e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_40e0,
    6.897_673_349_851_000_045_50e-1,
    1.481_039_764_274_800_745_90e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946_00e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_20e0,
    5.463_784_911_164_114_369_90e0,
    1.784_826_539_917_291_335_80e0,
    2.965_605_718_285_048_912_30e-1,
    2.653_218_952_657_612_309_30e-2,
    1.242_660_947_388_078_438_60e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_90e-1,
    1.369_298_809_227_358_053_10e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591_00e-4,
    1.846_318_317_510_054_681_80e-5,
    1.421_511_758_316_445_888_70e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn horner(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn ppnd16(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= SPLIT1 {
        let r = CONST1 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let v = if r <= SPLIT2 {
        let r = r - CONST2;
        horner(&C, r) / horner(&D, r)
    } else {
        let r = r - SPLIT2;
        horner(&E, r) / horner(&F, r)
    };
    if q < 0.0 {
        -v
    } else {
        v
    }
}

/// `K_α`, the α-quantile of the standard normal distribution.
pub fn k_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level must lie in (0, 1), got {alpha}; K_alpha is infinite at 1"
        )));
    }
    Ok(ppnd16(alpha))
}

/// How a confidence level was specified. Levels close to one lose digits when
/// written as `α` in binary floating point, so they can be given by their tail `1 − α`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum LevelSpec {
    Alpha(f64),
    Tail(f64),
}

/// A confidence level `α` with its quantile `K_α` precomputed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChanceLevel {
    spec: LevelSpec,
    alpha: f64,
    k: f64,
}

impl ChanceLevel {
    pub fn new(alpha: f64) -> Result<Self> {
        let k = k_alpha(alpha)?;
        Ok(ChanceLevel {
            spec: LevelSpec::Alpha(alpha),
            alpha,
            k,
        })
    }

    /// The level `α = 1 − tail`, with `K_α` computed from the tail without cancellation.
    pub fn from_tail(tail: f64) -> Result<Self> {
        if !(tail > 0.0 && tail < 1.0) {
            return Err(Error::Domain(format!(
                "tail probability must lie in (0, 1), got {tail}"
            )));
        }
        Ok(ChanceLevel {
            spec: LevelSpec::Tail(tail),
            alpha: 1.0 - tail,
            k: -ppnd16(tail),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `K_α`
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `w_α` for a solution with mean weight `mean` and variance `variance`.
    #[inline]
    pub fn weight_of(&self, mean: u64, variance: u64) -> f64 {
        mean as f64 + self.k * (variance as f64).sqrt()
    }

    #[inline]
    pub fn weight(&self, sol: &Solution) -> f64 {
        self.weight_of(sol.mean_weight(), sol.variance())
    }
}

impl fmt::Display for ChanceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.spec {
            LevelSpec::Alpha(a) => write!(f, "{a}"),
            LevelSpec::Tail(t) => write!(f, "1-{t:e}"),
        }
    }
}

impl FromStr for ChanceLevel {
    type Err = Error;

    /// Accepts a plain probability (`0.99`) or a tail form (`1-1e-10`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("cannot parse confidence level {s:?}"));
        match s.strip_prefix("1-") {
            Some(tail) => ChanceLevel::from_tail(tail.trim().parse().map_err(|_| bad())?),
            None => ChanceLevel::new(s.parse().map_err(|_| bad())?),
        }
    }
}

/// `w_α(x) = μ(x) + K_α·√v(x)`.
pub fn chance_weight(sol: &Solution, alpha: f64) -> Result<f64> {
    Ok(ChanceLevel::new(alpha)?.weight(sol))
}

/// Upper bound on `w_α` over all solutions: `n·μ_max + K_α·√(n·v_max)`.
pub fn w_alpha_max(inst: &Instance, level: &ChanceLevel) -> f64 {
    let n = inst.len() as f64;
    n * inst.max_mean() as f64 + level.k() * (n * inst.max_variance() as f64).sqrt()
}

/// The confidence range `[α_l, α_h]` together with the levels results are reported at.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaProfile {
    low: ChanceLevel,
    high: ChanceLevel,
    grid: Vec<ChanceLevel>,
}

impl AlphaProfile {
    /// `grid` must be strictly ascending and lie inside `[low, high]`, with `1/2 < low < high < 1`.
    pub fn new(low: ChanceLevel, high: ChanceLevel, grid: Vec<ChanceLevel>) -> Result<Self> {
        if !(low.alpha() > 0.5 && low.alpha() < high.alpha() && high.alpha() < 1.0) {
            return Err(Error::invalid(format!(
                "need 1/2 < alpha_low < alpha_high < 1, got [{low}, {high}]"
            )));
        }
        if grid.is_empty() {
            return Err(Error::invalid("the reporting grid is empty"));
        }
        for w in grid.windows(2) {
            if w[0].alpha() >= w[1].alpha() {
                return Err(Error::invalid(format!(
                    "reporting grid must be strictly ascending: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let (first, last) = (grid[0].alpha(), grid[grid.len() - 1].alpha());
        if first < low.alpha() || last > high.alpha() {
            return Err(Error::invalid(format!(
                "reporting grid [{first}, {last}] leaves [{low}, {high}]"
            )));
        }
        Ok(AlphaProfile { low, high, grid })
    }

    /// Profile spanning the given grid exactly: `α_l` and `α_h` are its end points.
    pub fn spanning(grid: Vec<ChanceLevel>) -> Result<Self> {
        let (low, high) = match (grid.first(), grid.last()) {
            (Some(&l), Some(&h)) => (l, h),
            _ => return Err(Error::invalid("the reporting grid is empty")),
        };
        AlphaProfile::new(low, high, grid)
    }

    /// The levels `1 − 10⁻²`, `1 − 10⁻⁴`, …, `1 − 10⁻¹⁰`.
    pub fn standard() -> Self {
        let grid = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10]
            .iter()
            .map(|&t| ChanceLevel::from_tail(t).expect("valid tail"))
            .collect();
        AlphaProfile::spanning(grid).expect("standard grid is valid")
    }

    pub fn low(&self) -> &ChanceLevel {
        &self.low
    }

    pub fn high(&self) -> &ChanceLevel {
        &self.high
    }

    pub fn grid(&self) -> &[ChanceLevel] {
        &self.grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_instance, InstanceClass, VarianceRegime};
    use proptest::prelude::*;
    // Oracle: Φ from the C library's erfc, and bisection on it.
    extern "C" {
        fn erfc(x: f64) -> f64;
    }

    fn phi(x: f64) -> f64 {
        let tail = 0.5 * unsafe { erfc(x.abs() / std::f64::consts::SQRT_2) };
        if x < 0.0 {
            tail
        } else {
            1.0 - tail
        }
    }

    fn bisect(alpha: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn median_is_zero() {
        assert_eq!(k_alpha(0.5).unwrap(), 0.0);
    }

    #[test]
    fn frozen_quantiles() {
        // Values from a 50-digit bisection of Φ for the exact decimal levels.
        let k2 = ChanceLevel::from_tail(1e-2).unwrap().k();
        let k10 = ChanceLevel::from_tail(1e-10).unwrap().k();
        assert!((k2 - 2.326_347_874_040_841).abs() < 1e-12, "{k2}");
        assert!((k10 - 6.361_340_902_404_056).abs() < 1e-12, "{k10}");

        // `1 - 1e-10` rounds to a double about 8e-18 above the decimal level,
        // which moves the quantile by roughly 1.3e-8.
        let k = k_alpha(1.0 - 1e-10).unwrap();
        assert!((k - 6.361_340_902_4).abs() < 2e-8, "{k}");
        // Φ is flat out there: one ulp of α spans about 1.7e-7 in K.
        assert!((k - bisect(1.0 - 1e-10)).abs() < 1e-6);
        assert!((phi(k) - (1.0 - 1e-10)).abs() <= 1e-12);
        assert!((k_alpha(1.0 - 1e-2).unwrap() - 2.326_347_874_0).abs() < 1e-10);
    }

    #[test]
    fn matches_bisection_oracle() {
        for &a in &[
            0.5,
            0.841_345,
            0.9,
            0.99,
            0.9999,
            1.0 - 1e-6,
            1.0 - 1e-8,
            1.0 - 1e-10,
            0.01,
            0.3,
        ] {
            let k = k_alpha(a).unwrap();
            assert!((phi(k) - a).abs() <= 1e-12, "alpha {a}: Φ(K)={}", phi(k));
            assert!((k - bisect(a)).abs() < 1e-6);
        }
    }

    #[test]
    fn domain_errors() {
        for &a in &[0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(k_alpha(a), Err(Error::Domain(_))));
        }
        assert!(ChanceLevel::from_tail(0.0).is_err());
    }

    #[test]
    fn chance_weight_examples() {
        let inst = crate::model::Instance::new(vec![1, 1], vec![6, 4], vec![3, 1]).unwrap();
        let x = Solution::from_bits(vec![true, true], &inst).unwrap();
        assert_eq!(chance_weight(&x, 0.5).unwrap(), 10.0);
        let at_phi1 = chance_weight(&x, phi(1.0)).unwrap();
        assert!((at_phi1 - 12.0).abs() < 1e-9, "{at_phi1}");
        assert_eq!(chance_weight(&Solution::empty(2), 0.999).unwrap(), 0.0);
    }

    #[test]
    fn w_alpha_max_examples() {
        let one = crate::model::Instance::new(vec![1], vec![5], vec![4]).unwrap();
        assert_eq!(w_alpha_max(&one, &ChanceLevel::new(0.5).unwrap()), 5.0);
        let four = crate::model::Instance::new(vec![1; 4], vec![3, 1, 2, 3], vec![1; 4]).unwrap();
        let w = w_alpha_max(&four, &ChanceLevel::new(phi(1.0)).unwrap());
        assert!((w - 14.0).abs() < 1e-9, "{w}");
    }

    #[test]
    fn w_alpha_max_dominates_enumeration() {
        for seed in 0..6 {
            let inst = generate_instance(InstanceClass::Uncorrelated, 12, VarianceRegime::V2, seed)
                .unwrap();
            for &a in &[0.5, 0.9, 0.99, 1.0 - 1e-10] {
                let level = ChanceLevel::new(a).unwrap();
                let bound = w_alpha_max(&inst, &level);
                let mut x = Solution::empty(12);
                for code in 1u32..(1 << 12) {
                    x.flip(code.trailing_zeros() as usize, &inst).unwrap();
                    assert!(level.weight(&x) <= bound);
                }
            }
        }
    }

    #[test]
    fn standard_profile() {
        let p = AlphaProfile::standard();
        assert_eq!(p.grid().len(), 5);
        assert_eq!(p.low().alpha(), 0.99);
        assert_eq!(p.high().alpha(), 1.0 - 1e-10);
        assert_eq!(p.grid()[2].to_string(), "1-1e-6");
    }

    #[test]
    fn profile_validation() {
        let l = |a: f64| ChanceLevel::new(a).unwrap();
        assert!(AlphaProfile::new(l(0.4), l(0.9), vec![l(0.5)]).is_err());
        assert!(AlphaProfile::new(l(0.9), l(0.8), vec![l(0.85)]).is_err());
        assert!(AlphaProfile::new(l(0.6), l(0.9), vec![l(0.8), l(0.7)]).is_err());
        assert!(AlphaProfile::new(l(0.6), l(0.9), vec![l(0.7), l(0.7)]).is_err());
        assert!(AlphaProfile::new(l(0.6), l(0.9), vec![l(0.95)]).is_err());
        assert!(AlphaProfile::new(l(0.6), l(0.9), vec![l(0.6), l(0.9)]).is_ok());
    }

    #[test]
    fn level_text_round_trip() {
        for s in ["0.99", "1-0.0001", "1-1e-10", "0.841345"] {
            let level: ChanceLevel = s.parse().unwrap();
            let back: ChanceLevel = level.to_string().parse().unwrap();
            assert_eq!(level, back);
        }
        assert!("abc".parse::<ChanceLevel>().is_err());
        assert!("1-0".parse::<ChanceLevel>().is_err());
    }

    proptest! {
        #[test]
        fn k_alpha_strictly_increasing(a in 0.5f64..0.999_999, d in 1e-9f64..1e-3) {
            let b = (a + d).min(1.0 - 1e-12);
            prop_assume!(b > a);
            prop_assert!(k_alpha(a).unwrap() < k_alpha(b).unwrap());
        }

        #[test]
        fn chance_weight_monotone_in_alpha(mean in 0u64..100_000, var in 0u64..10_000_000, a in 0.5f64..0.99, d in 1e-6f64..0.009) {
            let lo = ChanceLevel::new(a).unwrap().weight_of(mean, var);
            let hi = ChanceLevel::new(a + d).unwrap().weight_of(mean, var);
            if var == 0 {
                prop_assert_eq!(lo, hi);
            } else {
                prop_assert!(lo < hi);
            }
        }

        #[test]
        fn adding_item_never_decreases_weight(seed in any::<u64>(), bits in proptest::collection::vec(any::<bool>(), 10), i in 0usize..10, a in 0.5f64..0.9999) {
            let inst = generate_instance(InstanceClass::Uncorrelated, 10, VarianceRegime::V1, seed).unwrap();
            let x = Solution::from_bits(bits, &inst).unwrap();
            prop_assume!(!x.bits()[i]);
            let y = x.flipped(i, &inst).unwrap();
            let level = ChanceLevel::new(a).unwrap();
            prop_assert!(level.weight(&y) >= level.weight(&x));
        }
    }
}
