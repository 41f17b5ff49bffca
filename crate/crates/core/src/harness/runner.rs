use rayon::prelude::*;
use serde::Serialize;

use super::config::{AlgorithmKind, FormulationKind, InstanceSpec, RunConfig, ScheduleSpec};
use crate::algorithms::{on_capacity_change, Gsemo, Moead, Optimizer, VariationConfig};
use crate::dynamics::{load_schedule, DynamicSchedule};
use crate::evaluation::{offline_error, total_error, DpOracle, EvaluationRecord};
use crate::model::{generate_instance, load_instance, Instance};
use crate::objectives::{Formulation, Formulation2D, Formulation3D};
use crate::rng::{stream, Stream};
use crate::stochastic::ChanceLevel;
use crate::{Error, Result};

/// Identifies one run and records how its budget was spent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMeta {
    pub run_id: String,
    pub algorithm: AlgorithmKind,
    pub formulation: FormulationKind,
    pub instance_class: String,
    pub n: usize,
    pub regime: String,
    pub r: f64,
    /// Configured evaluations between changes.
    pub t: u64,
    pub nu: usize,
    /// Evaluations between changes in this run (`⌊t/k⌋` for a 2-objective sub-run).
    pub epoch_length: u64,
    /// Fitness evaluations consumed, repairs included.
    pub evaluations: u64,
    /// Budget lost to rounding when splitting across levels.
    pub dropped_budget: u64,
    pub repairs: usize,
    pub clamp_events: usize,
    pub repeat: usize,
    pub seed_schedule: u64,
    pub seed_algorithm: u64,
}

/// The offline-error series of one run at one reporting level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaRun {
    #[serde(flatten)]
    pub meta: RunMeta,
    pub alpha: f64,
    /// The level as configured, e.g. `1-1e-10`.
    pub level: String,
    #[serde(rename = "E")]
    pub total_error: f64,
    pub records: Vec<EvaluationRecord>,
}

struct Trace {
    records: Vec<EvaluationRecord>,
    evaluations: u64,
    repairs: usize,
}

/// Alternates epochs of `schedule.t()` evaluations with capacity changes and scores
/// the population at every level just before each change.
///
/// Repair evaluations are charged to the epoch that follows, so each epoch costs
/// exactly `t`. The last change ends the run and is not applied.
fn drive<O: Optimizer, F: Formulation>(
    optimizer: &mut O,
    formulation: &mut F,
    inst: &Instance,
    schedule: &DynamicSchedule,
    levels: &[ChanceLevel],
    oracle: &DpOracle<'_>,
    rng: &mut crate::rng::Rng,
) -> Result<Trace> {
    let t = schedule.t();
    let nu = schedule.nu();
    let capacities = schedule.capacities();
    let mut records = Vec::with_capacity(nu * levels.len());
    let mut evaluations = 0;
    let mut repairs = 0;
    let mut carry = 0;
    for k in 1..=nu {
        for _ in carry..t {
            optimizer.step(inst, formulation, rng);
            evaluations += 1;
        }
        let capacity = capacities[k - 1];
        let p_star = oracle.optimum(capacity)?;
        for level in levels {
            let population = optimizer.members().iter().map(|m| &m.solution);
            records.push(offline_error(k, capacity, level, p_star, population)?);
        }
        if k < nu {
            let report = on_capacity_change(optimizer, inst, formulation, capacities[k], t, rng);
            carry = report.evaluations;
            evaluations += report.evaluations;
            repairs += usize::from(report.repaired);
        }
    }
    Ok(Trace {
        records,
        evaluations,
        repairs,
    })
}

fn drive_with<F: Formulation>(
    cfg: &RunConfig,
    mut formulation: F,
    inst: &Instance,
    schedule: &DynamicSchedule,
    levels: &[ChanceLevel],
    oracle: &DpOracle<'_>,
    mut rng: crate::rng::Rng,
) -> Result<Trace> {
    match cfg.algorithm.decomposition(cfg.theta) {
        None => {
            let mut g = Gsemo::new(inst, &formulation, &mut rng);
            drive(
                &mut g,
                &mut formulation,
                inst,
                schedule,
                levels,
                oracle,
                &mut rng,
            )
        }
        Some(decomposition) => {
            let size = cfg.population_size.unwrap_or(match cfg.formulation {
                FormulationKind::Obj2 => inst.len(),
                FormulationKind::Obj3 => 2 * inst.len(),
            });
            let variation = VariationConfig::for_items(inst.len());
            let mut m = Moead::new(inst, &formulation, size, decomposition, variation, &mut rng)?;
            drive(
                &mut m,
                &mut formulation,
                inst,
                schedule,
                levels,
                oracle,
                &mut rng,
            )
        }
    }
}

/// The instance a config refers to, with its class and regime labels.
pub fn resolve_instance(spec: &InstanceSpec) -> Result<(Instance, String, String)> {
    match spec {
        InstanceSpec::Generated {
            class,
            n,
            regime,
            seed,
        } => Ok((
            generate_instance(*class, *n, *regime, *seed)?,
            class.as_str().to_string(),
            regime.as_str().to_string(),
        )),
        InstanceSpec::File(path) => Ok((load_instance(path)?, "file".into(), "-".into())),
    }
}

/// The capacity schedule for repeat `repeat`.
pub fn resolve_schedule(cfg: &RunConfig, repeat: usize) -> Result<DynamicSchedule> {
    let schedule = match &cfg.schedule {
        ScheduleSpec::Generated {
            b0,
            r,
            t,
            nu,
            eta,
            seed,
        } => {
            let s = DynamicSchedule::build(
                b0.unwrap_or(2.0 * r),
                *r,
                *t,
                *nu,
                seed.wrapping_add(repeat as u64),
            )?;
            match eta {
                Some(eta) => s.with_eta(*eta)?,
                None => s,
            }
        }
        ScheduleSpec::File(path) => load_schedule(path)?,
    };
    cfg.check_budget(schedule.t(), schedule.nu())?;
    if schedule.clamp_events() > 0 {
        log::info!(
            "schedule seed {}: {} change(s) clamped at the capacity floor",
            schedule.seed(),
            schedule.clamp_events()
        );
    }
    Ok(schedule)
}

/// One repeat of one config: a single 3-objective run, or one 2-objective sub-run per level.
pub fn run_repeat(
    cfg: &RunConfig,
    inst: &Instance,
    labels: (&str, &str),
    schedule: &DynamicSchedule,
    oracle: &DpOracle<'_>,
    run_id: &str,
    repeat: usize,
) -> Result<Vec<AlphaRun>> {
    let algorithm_seed = cfg.algorithm_seed.wrapping_add(repeat as u64);
    let meta = |epoch_length: u64, trace: &Trace, dropped: u64| RunMeta {
        run_id: run_id.to_string(),
        algorithm: cfg.algorithm,
        formulation: cfg.formulation,
        instance_class: labels.0.to_string(),
        n: inst.len(),
        regime: labels.1.to_string(),
        r: schedule.r(),
        t: schedule.t(),
        nu: schedule.nu(),
        epoch_length,
        evaluations: trace.evaluations,
        dropped_budget: dropped,
        repairs: trace.repairs,
        clamp_events: schedule.clamp_events(),
        repeat,
        seed_schedule: schedule.seed(),
        seed_algorithm: algorithm_seed,
    };
    let b0 = schedule.initial_capacity();
    let eta = schedule.eta();
    let nu = schedule.nu();
    match cfg.formulation {
        FormulationKind::Obj2 => {
            let k = cfg.alphas.len() as u64;
            let sub_t = schedule.t() / k;
            let dropped = (schedule.t() - sub_t * k) * nu as u64;
            if dropped > 0 {
                log::info!("{run_id}: {dropped} evaluations dropped splitting t across {k} levels");
            }
            let sub_schedule = schedule.with_epoch_length(sub_t)?;
            let mut out = Vec::with_capacity(cfg.alphas.len());
            for (a, level) in cfg.alphas.iter().enumerate() {
                let f = Formulation2D::new(inst, *level, b0, eta)?;
                let rng = stream(algorithm_seed, Stream::Algorithm(a as u32));
                let trace = drive_with(cfg, f, inst, &sub_schedule, &[*level], oracle, rng)?;
                out.push(AlphaRun {
                    meta: meta(sub_t, &trace, dropped),
                    alpha: level.alpha(),
                    level: level.to_string(),
                    total_error: total_error(&trace.records, nu)?,
                    records: trace.records,
                });
            }
            Ok(out)
        }
        FormulationKind::Obj3 => {
            let profile = cfg.alpha_profile()?;
            let f = Formulation3D::new(inst, *profile.low(), *profile.high(), b0, eta)?;
            let rng = stream(algorithm_seed, Stream::Algorithm(0));
            let trace = drive_with(cfg, f, inst, schedule, &cfg.alphas, oracle, rng)?;
            cfg.alphas
                .iter()
                .map(|level| {
                    let records: Vec<_> = trace
                        .records
                        .iter()
                        .filter(|r| r.alpha == level.alpha())
                        .cloned()
                        .collect();
                    Ok(AlphaRun {
                        meta: meta(schedule.t(), &trace, 0),
                        alpha: level.alpha(),
                        level: level.to_string(),
                        total_error: total_error(&records, nu)?,
                        records,
                    })
                })
                .collect()
        }
    }
}

/// Runs every repeat of one config; see [`run_experiments`].
pub fn run_experiment(cfg: &RunConfig) -> Result<Vec<AlphaRun>> {
    run_experiments(std::slice::from_ref(cfg))
}

/// Runs every `(config, repeat)` pair on the rayon pool.
///
/// Configs naming the same instance share it and its DP memo. Schedules depend only
/// on the schedule spec and the repeat, so configs that differ only in algorithm or
/// formulation see identical dynamics. Output order is config order, then repeat,
/// then level, whatever the thread count.
pub fn run_experiments(cfgs: &[RunConfig]) -> Result<Vec<AlphaRun>> {
    if cfgs.is_empty() {
        return Err(Error::Config("no configurations to run".into()));
    }
    for cfg in cfgs {
        cfg.validate()?;
    }
    let mut keys: Vec<(&InstanceSpec, u64)> = Vec::new();
    let mut slot = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let key = (&cfg.instance, cfg.dp_cell_limit);
        let idx = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
            keys.push(key);
            keys.len() - 1
        });
        slot.push(idx);
    }
    let instances = keys
        .iter()
        .map(|(spec, _)| resolve_instance(spec))
        .collect::<Result<Vec<_>>>()?;
    let oracles: Vec<DpOracle<'_>> = instances
        .iter()
        .zip(&keys)
        .map(|((inst, _, _), (_, limit))| DpOracle::new(inst, *limit))
        .collect();

    let jobs: Vec<(usize, usize)> = cfgs
        .iter()
        .enumerate()
        .flat_map(|(c, cfg)| (0..cfg.repeats).map(move |j| (c, j)))
        .collect();
    let per_job = jobs
        .par_iter()
        .map(|&(c, j)| {
            let cfg = &cfgs[c];
            let (inst, class, regime) = &instances[slot[c]];
            let schedule = resolve_schedule(cfg, j)?;
            let run_id = format!("{c}-{}-{}-{j}", cfg.algorithm, cfg.formulation);
            run_repeat(
                cfg,
                inst,
                (class, regime),
                &schedule,
                &oracles[slot[c]],
                &run_id,
                j,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(formulation: &str, algorithm: &str) -> RunConfig {
        let text = format!(
            "n=20\nformulation={formulation}\nalgorithm={algorithm}\nr=100\nt=100\nnu=10\nrepeats=2\n"
        );
        RunConfig::from_text(&text, "test").unwrap()
    }

    #[test]
    fn budget_identity() {
        for alg in ["gsemo", "moead_ws", "moead_te", "moead_pbi"] {
            let runs = run_experiment(&small("obj3", alg)).unwrap();
            assert_eq!(runs.len(), 2 * 5);
            for r in &runs {
                assert_eq!(r.meta.evaluations, 1000, "{alg}");
                assert_eq!(r.records.len(), 10);
            }
        }
    }

    #[test]
    fn obj2_splits_budget_across_levels() {
        let runs = run_experiment(&small("obj2", "gsemo")).unwrap();
        assert_eq!(runs.len(), 2 * 5);
        for r in &runs {
            assert_eq!(r.meta.epoch_length, 20);
            assert_eq!(r.meta.evaluations, 200);
            assert_eq!(r.meta.dropped_budget, 0);
        }
        let mut cfg = small("obj2", "gsemo");
        cfg.set("t", "103").unwrap();
        let runs = run_experiment(&cfg).unwrap();
        assert_eq!(runs[0].meta.evaluations, 200);
        assert_eq!(runs[0].meta.dropped_budget, 30);
    }

    #[test]
    fn records_cover_every_change() {
        for r in run_experiment(&small("obj3", "moead_te")).unwrap() {
            let idx: Vec<_> = r.records.iter().map(|e| e.change_index).collect();
            assert_eq!(idx, (1..=10).collect::<Vec<_>>());
            assert!(r.records.iter().all(|e| e.alpha == r.alpha));
            let mean = r.records.iter().map(|e| e.error).sum::<f64>() / 10.0;
            assert_eq!(mean, r.total_error);
        }
    }

    #[test]
    fn deterministic() {
        let cfg = small("obj2", "moead_pbi");
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    }

    #[test]
    fn schedules_shared_across_algorithms() {
        let a = run_experiments(&[small("obj3", "gsemo"), small("obj2", "moead_ws")]).unwrap();
        let caps = |alg: AlgorithmKind, rep: usize| -> Vec<f64> {
            a.iter()
                .find(|r| r.meta.algorithm == alg && r.meta.repeat == rep)
                .unwrap()
                .records
                .iter()
                .map(|e| e.capacity)
                .collect()
        };
        assert_eq!(
            caps(AlgorithmKind::Gsemo, 1),
            caps(AlgorithmKind::MoeadWs, 1)
        );
        assert_ne!(caps(AlgorithmKind::Gsemo, 0), caps(AlgorithmKind::Gsemo, 1));
    }

    #[test]
    fn algorithm_seed_does_not_move_capacities() {
        let a = run_experiment(&small("obj3", "gsemo")).unwrap();
        let mut cfg = small("obj3", "gsemo");
        cfg.algorithm_seed = 99;
        let b = run_experiment(&cfg).unwrap();
        let caps = |v: &[AlphaRun]| v[0].records.iter().map(|e| e.capacity).collect::<Vec<_>>();
        assert_eq!(caps(&a), caps(&b));
    }

    #[test]
    fn budget_mismatch_is_rejected() {
        let mut cfg = small("obj3", "gsemo");
        cfg.budget = Some(999);
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }
}
