//! The three-step hybrid procedure.
//!
//! 1. For every k in the schedule, encode the single-bin objective targeting
//!    weight sum `k * dw`, optimize the ansatz and keep every bitstring whose
//!    final probability exceeds the selection threshold.
//! 2. Split the kept bitstrings into feasible (`s <= C`) and infeasible blocks.
//! 3. Combine feasible blocks into covers of all items with the fewest bins.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::ansatz::{build_circuit, AnsatzKind};
use crate::encoding::{
    build_cd_pool, build_cost_hamiltonian, build_mixer, delta_omega, k_schedule, Bitstring, BppInstance, EncodingParams,
};
use crate::error::{Error, Result};
use crate::optimizer::{optimize, OptConfig};
use crate::oracle::{brute_force_partial, oracle, OracleResult};
use crate::seed::{derive_seed, K_STREAM, SHOT_STREAM};
use crate::simulator::SampleSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: AnsatzKind,
    pub layers: usize,
    pub stepsize: f64,
    /// Penalty weight `B`; `A` is derived per k.
    pub penalty_b: f64,
    /// Keep bitstrings with probability strictly above this; `None` means `2^-n`.
    pub threshold: Option<f64>,
    /// 0 reads exact distributions; otherwise the number of shots per readout.
    pub shots: u64,
    /// Use the commutator coefficients for the CD pool instead of unit weights.
    pub cd_weighted: bool,
    pub opt: OptConfig,
    /// Embed the brute-force oracle in the report.
    pub with_oracle: bool,
    pub record_wall_clock: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: AnsatzKind::CdMixer,
            layers: 1,
            stepsize: 1.0,
            penalty_b: 1.0,
            threshold: None,
            shots: 0,
            cd_weighted: false,
            opt: OptConfig::default(),
            with_oracle: false,
            record_wall_clock: false,
        }
    }
}

impl ExperimentConfig {
    pub fn threshold_for(&self, n: usize) -> f64 {
        self.threshold.unwrap_or_else(|| (-(n as f64)).exp2())
    }

    fn validate(&self) -> Result<()> {
        if let Some(t) = self.threshold {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::Config(format!("threshold {t} outside [0, 1)")));
            }
        }
        if self.layers == 0 {
            return Err(Error::Config("layer count must be at least 1".into()));
        }
        self.opt.validate()
    }
}

/// Where a sampled bitstring was seen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawHit {
    pub max_probability: f64,
    pub k_values: Vec<f64>,
}

/// Union of kept bitstrings across the schedule.
pub type RawSamples = BTreeMap<Bitstring, RawHit>;

fn record(raw: &mut RawSamples, b: Bitstring, p: f64, k: f64) {
    let hit = raw.entry(b).or_insert(RawHit { max_probability: 0.0, k_values: Vec::new() });
    hit.max_probability = hit.max_probability.max(p);
    hit.k_values.push(k);
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSolution {
    pub bitstring: Bitstring,
    pub weight_sum: u64,
    pub max_probability: f64,
    pub k_values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PartialSolutionSet {
    pub feasible: Vec<PartialSolution>,
    pub infeasible: Vec<PartialSolution>,
}

impl PartialSolutionSet {
    pub fn feasible_bitstrings(&self) -> Vec<Bitstring> {
        self.feasible.iter().map(|p| p.bitstring).collect()
    }
}

/// Step II: a block is feasible iff it is nonempty and fits in one bin. The
/// empty bitstring is dropped from both sides.
pub fn filter_feasible(raw: &RawSamples, inst: &BppInstance) -> Result<PartialSolutionSet> {
    let mut out = PartialSolutionSet::default();
    for (b, hit) in raw {
        if b.len() != inst.num_items() {
            return Err(Error::QubitMismatch { left: inst.num_items(), right: b.len() });
        }
        if b.is_empty() {
            continue;
        }
        let s = b.weight_sum(inst);
        let entry = PartialSolution {
            bitstring: *b,
            weight_sum: s,
            max_probability: hit.max_probability,
            k_values: hit.k_values.clone(),
        };
        if s <= inst.capacity() {
            out.feasible.push(entry);
        } else {
            out.infeasible.push(entry);
        }
    }
    Ok(out)
}

/// Step II for plain bitstrings.
pub fn classify(bitstrings: impl IntoIterator<Item = Bitstring>, inst: &BppInstance) -> Result<PartialSolutionSet> {
    let mut raw = RawSamples::new();
    for b in bitstrings {
        raw.entry(b).or_insert(RawHit { max_probability: 0.0, k_values: Vec::new() });
    }
    filter_feasible(&raw, inst)
}

/// Optimization record for one sub-Hamiltonian.
#[derive(Debug, Clone, Serialize)]
pub struct KRecord {
    pub k: f64,
    pub target: f64,
    pub best_trial: usize,
    pub best_cost: f64,
    /// Cost histories, one per trial.
    pub histories: Vec<Vec<f64>>,
    #[serde(skip)]
    pub kept_per_trial: Vec<Vec<(Bitstring, f64)>>,
    #[serde(skip)]
    pub snapshots: Vec<(usize, Vec<(Bitstring, f64)>)>,
}

impl KRecord {
    pub fn kept(&self) -> &[(Bitstring, f64)] {
        &self.kept_per_trial[self.best_trial]
    }
}

#[derive(Debug, Clone)]
pub struct SamplingOutcome {
    pub delta_w: f64,
    pub threshold: f64,
    pub records: Vec<KRecord>,
    /// Step I result: union over k of the best trial's kept bitstrings.
    pub raw: RawSamples,
    /// The same union built from each trial index separately.
    pub raw_per_trial: Vec<RawSamples>,
    pub set: PartialSolutionSet,
}

/// Step I plus the Step II split (Algorithm "subset sampling").
pub fn subset_sampling(inst: &BppInstance, cfg: &ExperimentConfig) -> Result<SamplingOutcome> {
    cfg.validate()?;
    let n = inst.num_items();
    let dw = delta_omega(inst);
    let schedule = k_schedule(inst.capacity() as f64, dw, cfg.stepsize)?;
    let threshold = cfg.threshold_for(n);
    let mixer = build_mixer(n)?;
    let unit_pool = build_cd_pool(n, None)?;

    let records = schedule
        .par_iter()
        .enumerate()
        .map(|(ki, &k)| -> Result<KRecord> {
            let p = EncodingParams::new(inst.capacity(), cfg.penalty_b, k, dw)?;
            let cost = build_cost_hamiltonian(inst, &p)?.hamiltonian;
            let pool = if cfg.cd_weighted { build_cd_pool(n, Some(&cost))? } else { unit_pool.clone() };
            let circuit = build_circuit(cfg.kind, &cost, &mixer, &pool, cfg.layers)?;
            let opt_cfg = OptConfig { seed: derive_seed(cfg.opt.seed, &[K_STREAM, ki as u64]), ..cfg.opt.clone() };
            let result = optimize(&circuit, &cost, &opt_cfg)?;

            let kept_per_trial = result
                .trials
                .iter()
                .enumerate()
                .map(|(t, trial)| {
                    let readout = if cfg.shots == 0 {
                        trial.final_state.full_distribution()
                    } else {
                        let seed = derive_seed(cfg.opt.seed, &[SHOT_STREAM, ki as u64, t as u64]);
                        trial.final_state.sample(cfg.shots, seed)?
                    };
                    Ok(above(&readout, threshold))
                })
                .collect::<Result<Vec<_>>>()?;
            let snapshots = result.best().snapshots.iter().map(|(it, dist)| (*it, above(dist, threshold))).collect();
            Ok(KRecord {
                k,
                target: p.target(),
                best_trial: result.best_trial,
                best_cost: result.best_cost(),
                histories: result.trials.iter().map(|t| t.history.clone()).collect(),
                kept_per_trial,
                snapshots,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut raw = RawSamples::new();
    let mut raw_per_trial = vec![RawSamples::new(); cfg.opt.trials];
    for r in &records {
        for &(b, p) in r.kept() {
            record(&mut raw, b, p, r.k);
        }
        for (t, kept) in r.kept_per_trial.iter().enumerate() {
            for &(b, p) in kept {
                record(&mut raw_per_trial[t], b, p, r.k);
            }
        }
    }
    let set = filter_feasible(&raw, inst)?;
    Ok(SamplingOutcome { delta_w: dw, threshold, records, raw, raw_per_trial, set })
}

fn above(dist: &SampleSet, threshold: f64) -> Vec<(Bitstring, f64)> {
    dist.frequencies().into_iter().filter(|(_, p)| *p > threshold).collect()
}

/// Optimal packings assembled from feasible blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingResult {
    pub m_opt: usize,
    /// Every optimal partition; blocks ordered by their first item.
    pub partitions: Vec<Vec<Bitstring>>,
    pub fs_unordered: u64,
    pub fs_ordered: u128,
}

/// Step III: smallest `m` for which `m` disjoint blocks from `fps` cover all
/// items, with every such cover enumerated.
///
/// Depth-first exact-cover search: the first uncovered item must be covered
/// by a block whose first item it is, so blocks are bucketed by first item.
pub fn combine_bins(fps: &[Bitstring], inst: &BppInstance) -> Result<PackingResult> {
    let n = inst.num_items();
    if fps.is_empty() {
        return Err(Error::Precondition("no feasible blocks to combine".into()));
    }
    let mut blocks: Vec<(u64, u64)> = Vec::new();
    for b in fps {
        if b.len() != n {
            return Err(Error::QubitMismatch { left: n, right: b.len() });
        }
        let w = b.weight_sum(inst);
        if b.is_empty() || w > inst.capacity() {
            return Err(Error::Precondition(format!("block {b} is not a feasible partial solution")));
        }
        blocks.push((b.index(), w));
    }
    blocks.sort_unstable();
    blocks.dedup();

    // First item of a block = highest set index bit.
    let first_item = |mask: u64| n - 1 - (63 - mask.leading_zeros() as usize);
    let mut buckets: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n];
    for &(mask, w) in &blocks {
        buckets[first_item(mask)].push((mask, w));
    }

    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let total = inst.total_weight();
    let lower = total.div_ceil(inst.capacity()) as usize;
    for m in lower.max(1)..=n {
        let mut search = CoverSearch {
            n,
            buckets: &buckets,
            capacity: inst.capacity(),
            full,
            limit: m,
            stack: Vec::with_capacity(m),
            found: Vec::new(),
        };
        search.visit(0, total);
        if !search.found.is_empty() {
            let fs_unordered = search.found.len() as u64;
            let fs_ordered = (1..=m as u128)
                .try_fold(fs_unordered as u128, |acc, k| acc.checked_mul(k))
                .ok_or(Error::Overflow("ordered final solution count"))?;
            let partitions = search
                .found
                .into_iter()
                .map(|p| p.into_iter().map(|mask| Bitstring::from_index(n, mask)).collect())
                .collect();
            return Ok(PackingResult { m_opt: m, partitions, fs_unordered, fs_ordered });
        }
    }
    Err(Error::CoverInfeasible)
}

struct CoverSearch<'a> {
    n: usize,
    buckets: &'a [Vec<(u64, u64)>],
    capacity: u64,
    full: u64,
    limit: usize,
    stack: Vec<u64>,
    found: Vec<Vec<u64>>,
}

impl CoverSearch<'_> {
    fn visit(&mut self, covered: u64, remaining: u64) {
        if covered == self.full {
            self.found.push(self.stack.clone());
            return;
        }
        let left = (self.limit - self.stack.len()) as u64;
        if left == 0 || remaining > left * self.capacity {
            return;
        }
        let uncovered = self.full & !covered;
        let item = self.n - 1 - (63 - uncovered.leading_zeros() as usize);
        for &(mask, w) in &self.buckets[item] {
            if mask & covered == 0 {
                self.stack.push(mask);
                self.visit(covered | mask, remaining - w);
                self.stack.pop();
            }
        }
    }
}

/// `|found.feasible| / exact_count`.
pub fn feasibility_ratio(found: &PartialSolutionSet, exact_count: usize) -> Result<f64> {
    if exact_count == 0 {
        return Err(Error::Precondition("exact partial solution count must be positive".into()));
    }
    Ok(found.feasible.len() as f64 / exact_count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// Feasibility ratio of the best-trial selection.
    pub fr: f64,
    pub fps: usize,
    pub ips: usize,
    pub exact_fps: usize,
    pub m_opt: Option<usize>,
    pub fs_unordered: Option<u64>,
    pub fs_ordered: Option<u128>,
    /// The same ratio computed from each trial index on its own.
    pub fr_trials: Vec<f64>,
    pub fr_mean: f64,
    /// Population standard deviation over trials.
    pub fr_std: f64,
    pub fps_trials: Vec<usize>,
    pub ips_trials: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    CoverInfeasible,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub instance: BppInstance,
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    pub delta_w: f64,
    pub threshold_used: f64,
    pub schedule: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotDistribution {
    pub k: f64,
    pub probabilities: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub iteration: usize,
    pub distributions: Vec<SnapshotDistribution>,
}

/// Everything a run produces.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub status: RunStatus,
    pub metrics: Metrics,
    pub partial_solutions: PartialSolutionSet,
    pub final_solutions: Vec<Vec<Bitstring>>,
    pub histories: Vec<KRecord>,
    pub snapshots: Vec<Snapshot>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_secs: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Steps I-III plus metrics. A missing cover is reported through
/// [`RunStatus::CoverInfeasible`] rather than an error so the partial results
/// survive.
pub fn run_experiment(inst: &BppInstance, cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let exact = brute_force_partial(inst)?;
    let sampling = subset_sampling(inst, cfg)?;
    let fr = feasibility_ratio(&sampling.set, exact.len())?;

    let mut fr_trials = Vec::new();
    let mut fps_trials = Vec::new();
    let mut ips_trials = Vec::new();
    for raw in &sampling.raw_per_trial {
        let set = filter_feasible(raw, inst)?;
        fr_trials.push(feasibility_ratio(&set, exact.len())?);
        fps_trials.push(set.feasible.len());
        ips_trials.push(set.infeasible.len());
    }
    let (fr_mean, fr_std) = mean_std(&fr_trials);

    let fps = sampling.set.feasible_bitstrings();
    let packing = if fps.is_empty() { Err(Error::CoverInfeasible) } else { combine_bins(&fps, inst) };
    let (status, packing) = match packing {
        Ok(p) => (RunStatus::Ok, Some(p)),
        Err(Error::CoverInfeasible) => (RunStatus::CoverInfeasible, None),
        Err(e) => return Err(e),
    };

    let metrics = Metrics {
        fr,
        fps: sampling.set.feasible.len(),
        ips: sampling.set.infeasible.len(),
        exact_fps: exact.len(),
        m_opt: packing.as_ref().map(|p| p.m_opt),
        fs_unordered: packing.as_ref().map(|p| p.fs_unordered),
        fs_ordered: packing.as_ref().map(|p| p.fs_ordered),
        fr_trials,
        fr_mean,
        fr_std,
        fps_trials,
        ips_trials,
    };

    let mut snapshots: Vec<Snapshot> = Vec::new();
    for &it in &cfg.opt.snapshots {
        if snapshots.iter().any(|s| s.iteration == it) {
            continue;
        }
        let distributions = sampling
            .records
            .iter()
            .map(|r| SnapshotDistribution {
                k: r.k,
                probabilities: r
                    .snapshots
                    .iter()
                    .filter(|(i, _)| *i == it)
                    .flat_map(|(_, d)| d.iter().map(|(b, p)| (b.to_string(), *p)))
                    .collect(),
            })
            .collect();
        snapshots.push(Snapshot { iteration: it, distributions });
    }

    let oracle = if cfg.with_oracle { Some(oracle(inst, None)?) } else { None };

    Ok(RunReport {
        config: ConfigEcho {
            instance: inst.clone(),
            experiment: cfg.clone(),
            delta_w: sampling.delta_w,
            threshold_used: sampling.threshold,
            schedule: sampling.records.iter().map(|r| r.k).collect(),
        },
        status,
        metrics,
        partial_solutions: sampling.set,
        final_solutions: packing.map(|p| p.partitions).unwrap_or_default(),
        histories: sampling.records,
        snapshots,
        oracle,
        wall_clock_secs: cfg.record_wall_clock.then(|| start.elapsed().as_secs_f64()),
    })
}
