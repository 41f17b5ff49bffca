use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::algorithms::{Decomposition, DEFAULT_PBI_THETA};
use crate::evaluation::DEFAULT_DP_CELL_LIMIT;
use crate::model::{InstanceClass, VarianceRegime};
use crate::stochastic::{AlphaProfile, ChanceLevel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulationKind {
    Obj2,
    Obj3,
}

impl FormulationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulationKind::Obj2 => "obj2",
            FormulationKind::Obj3 => "obj3",
        }
    }
}

impl fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obj2" => Ok(FormulationKind::Obj2),
            "obj3" => Ok(FormulationKind::Obj3),
            _ => Err(Error::Config(format!(
                "unknown formulation {s:?} (obj2|obj3)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Gsemo,
    MoeadWs,
    MoeadTe,
    MoeadPbi,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::Gsemo,
        AlgorithmKind::MoeadWs,
        AlgorithmKind::MoeadTe,
        AlgorithmKind::MoeadPbi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::Gsemo => "gsemo",
            AlgorithmKind::MoeadWs => "moead_ws",
            AlgorithmKind::MoeadTe => "moead_te",
            AlgorithmKind::MoeadPbi => "moead_pbi",
        }
    }

    /// The scalarisation for MOEA/D variants; `None` for GSEMO.
    pub fn decomposition(self, theta: f64) -> Option<Decomposition> {
        match self {
            AlgorithmKind::Gsemo => None,
            AlgorithmKind::MoeadWs => Some(Decomposition::WeightedSum),
            AlgorithmKind::MoeadTe => Some(Decomposition::Tchebycheff),
            AlgorithmKind::MoeadPbi => Some(Decomposition::Pbi { theta }),
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown algorithm {s:?} (gsemo|moead_ws|moead_te|moead_pbi)"
                ))
            })
    }
}

/// Where the instance comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    Generated {
        class: InstanceClass,
        n: usize,
        regime: VarianceRegime,
        seed: u64,
    },
    File(PathBuf),
}

/// Where the capacity schedule comes from. Repeat `j` of a generated schedule uses seed `seed + j`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleSpec {
    Generated {
        /// Defaults to `2r`.
        b0: Option<f64>,
        r: f64,
        t: u64,
        nu: usize,
        /// Defaults to `r`.
        eta: Option<f64>,
        seed: u64,
    },
    File(PathBuf),
}

/// Everything needed to reproduce one experiment cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    pub formulation: FormulationKind,
    pub algorithm: AlgorithmKind,
    /// Reporting levels; for `obj3` also the default `[α_l, α_h]`.
    pub alphas: Vec<ChanceLevel>,
    pub alpha_low: Option<ChanceLevel>,
    pub alpha_high: Option<ChanceLevel>,
    pub schedule: ScheduleSpec,
    /// Must equal `t·ν` when given.
    pub budget: Option<u64>,
    /// MOEA/D population; defaults to `n` for `obj2` and `2n` for `obj3`.
    pub population_size: Option<usize>,
    pub repeats: usize,
    pub algorithm_seed: u64,
    pub theta: f64,
    pub dp_cell_limit: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            instance: InstanceSpec::Generated {
                class: InstanceClass::Uncorrelated,
                n: 100,
                regime: VarianceRegime::V1,
                seed: 0,
            },
            formulation: FormulationKind::Obj3,
            algorithm: AlgorithmKind::Gsemo,
            alphas: AlphaProfile::standard().grid().to_vec(),
            alpha_low: None,
            alpha_high: None,
            schedule: ScheduleSpec::Generated {
                b0: None,
                r: 500.0,
                t: 2000,
                nu: 50,
                eta: None,
                seed: 0,
            },
            budget: None,
            population_size: None,
            repeats: 1,
            algorithm_seed: 0,
            theta: DEFAULT_PBI_THETA,
            dp_cell_limit: DEFAULT_DP_CELL_LIMIT,
        }
    }
}

const KEYS: &[&str] = &[
    "instance_class",
    "n",
    "regime",
    "instance_seed",
    "instance_file",
    "formulation",
    "algorithm",
    "alphas",
    "alpha_low",
    "alpha_high",
    "b0",
    "r",
    "t",
    "nu",
    "eta",
    "schedule_seed",
    "schedule_file",
    "budget",
    "population_size",
    "repeats",
    "algorithm_seed",
    "theta",
    "dp_cell_limit",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_levels(key: &str, value: &str) -> Result<Vec<ChanceLevel>> {
    value
        .split(',')
        .map(|s| s.parse().map_err(|e| Error::Config(format!("{key}: {e}"))))
        .collect()
}

fn join_levels(levels: &[ChanceLevel]) -> String {
    levels
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "instance_class" | "n" | "regime" | "instance_seed" => {
                let (mut class, mut n, mut regime, mut seed) = match &self.instance {
                    InstanceSpec::Generated {
                        class,
                        n,
                        regime,
                        seed,
                    } => (*class, *n, *regime, *seed),
                    InstanceSpec::File(_) => {
                        return Err(Error::Config(format!("{key} conflicts with instance_file")))
                    }
                };
                match key {
                    "instance_class" => class = value.parse().map_err(config_err(key))?,
                    "n" => n = parse(key, value)?,
                    "regime" => regime = value.parse().map_err(config_err(key))?,
                    _ => seed = parse(key, value)?,
                }
                self.instance = InstanceSpec::Generated {
                    class,
                    n,
                    regime,
                    seed,
                };
            }
            "instance_file" => self.instance = InstanceSpec::File(PathBuf::from(value)),
            "formulation" => self.formulation = value.parse()?,
            "algorithm" => self.algorithm = value.parse()?,
            "alphas" => self.alphas = parse_levels(key, value)?,
            "alpha_low" => self.alpha_low = Some(value.parse().map_err(config_err(key))?),
            "alpha_high" => self.alpha_high = Some(value.parse().map_err(config_err(key))?),
            "b0" | "r" | "t" | "nu" | "eta" | "schedule_seed" => {
                let ScheduleSpec::Generated {
                    b0,
                    r,
                    t,
                    nu,
                    eta,
                    seed,
                } = &mut self.schedule
                else {
                    return Err(Error::Config(format!("{key} conflicts with schedule_file")));
                };
                match key {
                    "b0" => *b0 = Some(parse(key, value)?),
                    "r" => *r = parse(key, value)?,
                    "t" => *t = parse(key, value)?,
                    "nu" => *nu = parse(key, value)?,
                    "eta" => *eta = Some(parse(key, value)?),
                    _ => *seed = parse(key, value)?,
                }
            }
            "schedule_file" => self.schedule = ScheduleSpec::File(PathBuf::from(value)),
            "budget" => self.budget = Some(parse(key, value)?),
            "population_size" => self.population_size = Some(parse(key, value)?),
            "repeats" => self.repeats = parse(key, value)?,
            "algorithm_seed" => self.algorithm_seed = parse(key, value)?,
            "theta" => self.theta = parse(key, value)?,
            "dp_cell_limit" => self.dp_cell_limit = parse(key, value)?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key {key:?}; expected one of {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses flat `key=value` lines over the defaults. `#` starts a comment.
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let wrap = |message: String| Error::Parse {
                path: origin.to_string(),
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| wrap(format!("expected key=value, got {line:?}")))?;
            let key = key.trim();
            if seen.contains(&key) {
                return Err(wrap(format!("duplicate key {key:?}")));
            }
            seen.push(key);
            cfg.set(key, value).map_err(|e| wrap(e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Serialises every field so that [`RunConfig::from_text`] restores an equal value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        match &self.instance {
            InstanceSpec::Generated {
                class,
                n,
                regime,
                seed,
            } => {
                put("instance_class", class.as_str().into());
                put("n", n.to_string());
                put("regime", regime.as_str().into());
                put("instance_seed", seed.to_string());
            }
            InstanceSpec::File(p) => put("instance_file", p.display().to_string()),
        }
        put("formulation", self.formulation.to_string());
        put("algorithm", self.algorithm.to_string());
        put("alphas", join_levels(&self.alphas));
        if let Some(l) = &self.alpha_low {
            put("alpha_low", l.to_string());
        }
        if let Some(h) = &self.alpha_high {
            put("alpha_high", h.to_string());
        }
        match &self.schedule {
            ScheduleSpec::Generated {
                b0,
                r,
                t,
                nu,
                eta,
                seed,
            } => {
                if let Some(b0) = b0 {
                    put("b0", b0.to_string());
                }
                put("r", r.to_string());
                put("t", t.to_string());
                put("nu", nu.to_string());
                if let Some(eta) = eta {
                    put("eta", eta.to_string());
                }
                put("schedule_seed", seed.to_string());
            }
            ScheduleSpec::File(p) => put("schedule_file", p.display().to_string()),
        }
        if let Some(b) = self.budget {
            put("budget", b.to_string());
        }
        if let Some(p) = self.population_size {
            put("population_size", p.to_string());
        }
        put("repeats", self.repeats.to_string());
        put("algorithm_seed", self.algorithm_seed.to_string());
        put("theta", self.theta.to_string());
        put("dp_cell_limit", self.dp_cell_limit.to_string());
        out
    }

    /// Checks everything that does not need file access.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let InstanceSpec::Generated { n, .. } = self.instance {
            if n == 0 {
                return bad("n: must be at least 1".into());
            }
        }
        if self.alphas.is_empty() {
            return bad("alphas: at least one level is required".into());
        }
        if let Some(l) = self.alphas.iter().find(|l| !(l.alpha() > 0.5)) {
            return bad(format!("alphas: levels must exceed 1/2, got {l}"));
        }
        if self.repeats == 0 {
            return bad("repeats: must be at least 1".into());
        }
        if self.population_size == Some(0) {
            return bad("population_size: must be at least 1".into());
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return bad(format!("theta: must be positive, got {}", self.theta));
        }
        if let ScheduleSpec::Generated {
            b0, r, t, nu, eta, ..
        } = &self.schedule
        {
            if !(*r >= 0.0 && r.is_finite()) {
                return bad(format!("r: must be non-negative, got {r}"));
            }
            if *t == 0 || *nu == 0 {
                return bad("t, nu: must be at least 1".into());
            }
            if let Some(b0) = b0 {
                if !(*b0 >= 0.0 && b0.is_finite()) {
                    return bad(format!("b0: must be non-negative, got {b0}"));
                }
            }
            if let Some(eta) = eta {
                if !(*eta >= 0.0 && eta.is_finite()) {
                    return bad(format!("eta: must be non-negative, got {eta}"));
                }
            }
            self.check_budget(*t, *nu)?;
        }
        if self.formulation == FormulationKind::Obj3 {
            self.alpha_profile()?;
        }
        Ok(())
    }

    /// `budget = t·ν`, and for `obj2` every sub-run gets at least one evaluation per epoch.
    pub(crate) fn check_budget(&self, t: u64, nu: usize) -> Result<()> {
        let total = t
            .checked_mul(nu as u64)
            .ok_or_else(|| Error::Config("t·nu overflows".into()))?;
        if let Some(b) = self.budget {
            if b != total {
                return Err(Error::Config(format!(
                    "budget: {b} differs from t·nu = {t}·{nu} = {total}"
                )));
            }
        }
        if self.formulation == FormulationKind::Obj2 && t < self.alphas.len() as u64 {
            return Err(Error::Config(format!(
                "t: {t} cannot be split across {} levels",
                self.alphas.len()
            )));
        }
        Ok(())
    }

    /// `[α_l, α_h]` and the grid for the 3-objective formulation.
    pub fn alpha_profile(&self) -> Result<AlphaProfile> {
        let mut grid = self.alphas.clone();
        grid.sort_by(|a, b| a.alpha().total_cmp(&b.alpha()));
        let low = self.alpha_low.unwrap_or(grid[0]);
        let high = self.alpha_high.unwrap_or(grid[grid.len() - 1]);
        AlphaProfile::new(low, high, grid).map_err(|e| Error::Config(format!("alphas: {e}")))
    }
}

fn config_err(key: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Config(format!("{key}: {e}"))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_text(&text, &path.display().to_string())
}

pub fn save_config(cfg: &RunConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, cfg.to_text()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn round_trip_default_and_files() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_text(&cfg.to_text(), "cfg").unwrap(), cfg);

        let cfg = RunConfig {
            instance: InstanceSpec::File("inst.txt".into()),
            schedule: ScheduleSpec::File("sched.txt".into()),
            alpha_low: Some(ChanceLevel::new(0.9).unwrap()),
            budget: Some(100_000),
            population_size: Some(7),
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::from_text(&cfg.to_text(), "cfg").unwrap(), cfg);
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let e = RunConfig::from_text("n=10\nfoo=1\n", "c").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        assert!(e.to_string().contains("foo"));
        assert!(RunConfig::from_text("n=10\nn=11\n", "c").is_err());
        assert!(RunConfig::from_text("n 10\n", "c").is_err());
        assert!(RunConfig::from_text("instance_file=a\nn=3\n", "c").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg =
            RunConfig::from_text("# setting\n\nn = 12 # small\nalgorithm=moead_te\n", "c").unwrap();
        assert_eq!(cfg.algorithm, AlgorithmKind::MoeadTe);
        assert!(matches!(
            cfg.instance,
            InstanceSpec::Generated { n: 12, .. }
        ));
    }

    #[test]
    fn budget_must_match() {
        let cfg = RunConfig::from_text("t=100\nnu=10\nbudget=1000\n", "c").unwrap();
        cfg.validate().unwrap();
        let cfg = RunConfig::from_text("t=100\nnu=10\nbudget=999\n", "c").unwrap();
        let e = cfg.validate().unwrap_err();
        assert!(e.to_string().contains("budget"), "{e}");
    }

    #[test]
    fn invalid_fields_are_named() {
        for (text, key) in [
            ("n=0", "n"),
            ("repeats=0", "repeats"),
            ("theta=-1", "theta"),
            ("r=-5", "r"),
            ("alphas=0.4", "alphas"),
            ("formulation=obj3\nalphas=0.9", "alphas"),
        ] {
            let e = RunConfig::from_text(text, "c")
                .and_then(|c| c.validate())
                .unwrap_err();
            assert!(e.to_string().contains(key), "{text}: {e}");
        }
    }

    proptest! {
        #[test]
        fn round_trip_random(
            n in 1usize..2000,
            seed in any::<u64>(),
            r in 0.0f64..1e4,
            t in 1u64..100_000,
            nu in 1usize..500,
            b0 in proptest::option::of(0.0f64..1e5),
            pop in proptest::option::of(1usize..5000),
            obj2 in any::<bool>(),
            alg in 0usize..4,
            theta in 0.01f64..50.0,
        ) {
            let cfg = RunConfig {
                instance: InstanceSpec::Generated {
                    class: InstanceClass::BoundedStronglyCorrelated,
                    n,
                    regime: VarianceRegime::V2,
                    seed,
                },
                formulation: if obj2 { FormulationKind::Obj2 } else { FormulationKind::Obj3 },
                algorithm: AlgorithmKind::ALL[alg],
                schedule: ScheduleSpec::Generated { b0, r, t, nu, eta: Some(r / 2.0), seed: seed ^ 7 },
                population_size: pop,
                theta,
                ..RunConfig::default()
            };
            prop_assert_eq!(RunConfig::from_text(&cfg.to_text(), "p").unwrap(), cfg);
        }
    }
}
