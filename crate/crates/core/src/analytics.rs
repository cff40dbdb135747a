//! Accuracy analytics over result records and per-pair summaries.
//!
//! Everything here is pure. Accuracies are fractions in [0, 1]; conversion
//! to percentages happens only in the report layer.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::extraction::Letter;
use crate::jsonl::{self, JsonlError};
use crate::store::ResultRecord;

/// Per-pair summaries of the reference retained runs.
pub const RETAINED_PAIRS: &str = include_str!("../fixtures/retained_pairs.jsonl");

pub const DEFAULT_REPLICATES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TAUS: [f64; 6] = [0.0, 0.02, 0.05, 0.10, 0.20, 0.30];

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum AnalyticsError {
    #[error("no input rows")]
    EmptyInput,
    #[error("no pair has a direct accuracy above {tau}")]
    EmptyPartition { tau: f64 },
    #[error("generator macro does not exceed direct macro")]
    DegenerateGap,
    #[error("need at least two distinct groups, found {0}")]
    InsufficientGroups(usize),
    #[error("tau must lie in [0, 1), got {0}")]
    InvalidTau(f64),
    #[error("at least 1000 replicates are required, got {0}")]
    TooFewReplicates(usize),
    #[error("invalid pair summary: {0}")]
    InvalidPair(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Direct,
    Assisted,
    Generator,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Direct, Channel::Assisted, Channel::Generator];

    pub fn letter(self, r: &ResultRecord) -> Letter {
        match self {
            Channel::Direct => r.solverLLM_baseline_ans,
            Channel::Assisted => r.solverLLM_assisted_ans,
            Channel::Generator => r.genLLM_ans,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelScores {
    pub z_b: u8,
    pub z_a: u8,
    pub z_g: u8,
}

impl ChannelScores {
    pub fn get(&self, c: Channel) -> u8 {
        match c {
            Channel::Direct => self.z_b,
            Channel::Assisted => self.z_a,
            Channel::Generator => self.z_g,
        }
    }
}

pub fn score_channels(r: &ResultRecord) -> ChannelScores {
    let z = |c: Channel| u8::from(c.letter(r) == r.correct_ans);
    ChannelScores {
        z_b: z(Channel::Direct),
        z_a: z(Channel::Assisted),
        z_g: z(Channel::Generator),
    }
}

// ---------------------------------------------------------------------------
// Pair summaries

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub dataset_id: String,
    pub solver_label: String,
    pub n_records: u64,
    #[serde(rename = "A_b")]
    pub a_b: f64,
    #[serde(rename = "A_a")]
    pub a_a: f64,
    #[serde(rename = "A_g")]
    pub a_g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_tag: Option<String>,
}

impl PairSummary {
    pub fn diff(&self) -> f64 {
        self.a_a - self.a_b
    }

    pub fn accuracy(&self, c: Channel) -> f64 {
        match c {
            Channel::Direct => self.a_b,
            Channel::Assisted => self.a_a,
            Channel::Generator => self.a_g,
        }
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if self.n_records == 0 {
            return Err(AnalyticsError::InvalidPair(format!(
                "{}/{}: n_records is 0",
                self.dataset_id, self.solver_label
            )));
        }
        for (name, v) in [("A_b", self.a_b), ("A_a", self.a_a), ("A_g", self.a_g)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(AnalyticsError::InvalidPair(format!(
                    "{}/{}: {name} = {v} outside [0, 1]",
                    self.dataset_id, self.solver_label
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: AnalyticsError,
    },
}

pub fn parse_pairs(text: &str) -> Result<Vec<PairSummary>, FixtureError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: PairSummary = serde_json::from_str(line).map_err(|e| FixtureError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        pair.validate().map_err(|source| FixtureError::Invalid { line: idx + 1, source })?;
        out.push(pair);
    }
    Ok(out)
}

pub fn load_pairs(path: &Path) -> Result<Vec<PairSummary>, FixtureError> {
    let rows: Vec<(usize, PairSummary)> = jsonl::read(path)?;
    rows.into_iter()
        .map(|(line, p)| p.validate().map(|_| p).map_err(|source| FixtureError::Invalid { line, source }))
        .collect()
}

pub fn retained_pairs() -> Vec<PairSummary> {
    parse_pairs(RETAINED_PAIRS).expect("bundled fixture parses")
}

/// One summary per (dataset_id, solver_label), in order of first appearance.
pub fn pair_summaries(records: &[ResultRecord]) -> Vec<PairSummary> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut sums: HashMap<(String, String), [u64; 4]> = HashMap::new();
    for r in records {
        let key = (r.dataset_id.clone(), r.solver_label.clone());
        let s = sums.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            [0; 4]
        });
        let z = score_channels(r);
        s[0] += 1;
        s[1] += z.z_b as u64;
        s[2] += z.z_a as u64;
        s[3] += z.z_g as u64;
    }
    order
        .into_iter()
        .map(|key| {
            let [n, b, a, g] = sums[&key];
            let f = |x: u64| x as f64 / n as f64;
            PairSummary {
                dataset_id: key.0,
                solver_label: key.1,
                n_records: n,
                a_b: f(b),
                a_a: f(a),
                a_g: f(g),
                partition_tag: Some(if b > 0 { "nonzero" } else { "zero_baseline" }.into()),
            }
        })
        .collect()
}

pub fn micro_accuracy(records: &[ResultRecord], channel: Channel) -> Result<f64, AnalyticsError> {
    if records.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let hits: u64 = records.iter().map(|r| score_channels(r).get(channel) as u64).sum();
    Ok(hits as f64 / records.len() as f64)
}

/// Records-weighted accuracy reconstructed from pair summaries.
pub fn weighted_micro(pairs: &[PairSummary], channel: Channel) -> Result<f64, AnalyticsError> {
    let n: u64 = pairs.iter().map(|p| p.n_records).sum();
    if n == 0 {
        return Err(AnalyticsError::EmptyInput);
    }
    Ok(pairs.iter().map(|p| p.n_records as f64 * p.accuracy(channel)).sum::<f64>() / n as f64)
}

// ---------------------------------------------------------------------------
// Partitions

/// Divisor for the spread of per-pair values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SdConvention {
    /// n - 1. Reproduces the reference spreads.
    #[default]
    Sample,
    /// n.
    Population,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn std_dev(values: &[f64], convention: SdConvention) -> f64 {
    let n = values.len();
    let denom = match convention {
        SdConvention::Sample if n > 1 => (n - 1) as f64,
        SdConvention::Sample => return 0.0,
        SdConvention::Population if n > 0 => n as f64,
        SdConvention::Population => return 0.0,
    };
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / denom).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub tau: f64,
    pub kept_pairs: Vec<PairSummary>,
    pub n_records: u64,
    pub macro_direct: f64,
    pub macro_assisted: f64,
    pub macro_gen: f64,
    pub delta: f64,
    pub sd_direct: f64,
    pub sd_assisted: f64,
    pub sd_gen: f64,
    pub sd_delta: f64,
    pub sd_convention: SdConvention,
}

fn summarize(tau: f64, kept: Vec<PairSummary>, convention: SdConvention) -> PartitionReport {
    let col = |f: &dyn Fn(&PairSummary) -> f64| kept.iter().map(f).collect::<Vec<f64>>();
    let (b, a, g, d) = (col(&|p| p.a_b), col(&|p| p.a_a), col(&|p| p.a_g), col(&|p| p.diff()));
    PartitionReport {
        tau,
        n_records: kept.iter().map(|p| p.n_records).sum(),
        macro_direct: mean(&b),
        macro_assisted: mean(&a),
        macro_gen: mean(&g),
        delta: mean(&a) - mean(&b),
        sd_direct: std_dev(&b, convention),
        sd_assisted: std_dev(&a, convention),
        sd_gen: std_dev(&g, convention),
        sd_delta: std_dev(&d, convention),
        sd_convention: convention,
        kept_pairs: kept,
    }
}

pub fn partition(pairs: &[PairSummary], tau: f64) -> Result<PartitionReport, AnalyticsError> {
    partition_with(pairs, tau, SdConvention::default())
}

/// Pairs with direct accuracy strictly above `tau`.
pub fn partition_with(pairs: &[PairSummary], tau: f64, convention: SdConvention) -> Result<PartitionReport, AnalyticsError> {
    if !(0.0..1.0).contains(&tau) {
        return Err(AnalyticsError::InvalidTau(tau));
    }
    let kept: Vec<PairSummary> = pairs.iter().filter(|p| p.a_b > tau).cloned().collect();
    if kept.is_empty() {
        return Err(AnalyticsError::EmptyPartition { tau });
    }
    Ok(summarize(tau, kept, convention))
}

pub fn threshold_sweep(pairs: &[PairSummary], taus: &[f64]) -> Vec<Result<PartitionReport, AnalyticsError>> {
    taus.iter().map(|&t| partition(pairs, t)).collect()
}

/// Macros over the pairs whose direct accuracy is exactly zero.
pub fn zero_baseline_report(pairs: &[PairSummary]) -> Result<PartitionReport, AnalyticsError> {
    zero_baseline_report_with(pairs, SdConvention::default())
}

pub fn zero_baseline_report_with(pairs: &[PairSummary], convention: SdConvention) -> Result<PartitionReport, AnalyticsError> {
    let kept: Vec<PairSummary> = pairs.iter().filter(|p| p.a_b == 0.0).cloned().collect();
    if kept.is_empty() {
        return Err(AnalyticsError::EmptyPartition { tau: 0.0 });
    }
    Ok(summarize(0.0, kept, convention))
}

/// Share of the generator-over-direct gap recovered by the assisted channel.
pub fn gap_closure(macro_b: f64, macro_a: f64, macro_g: f64) -> Result<f64, AnalyticsError> {
    let gap = macro_g - macro_b;
    if gap <= 0.0 {
        return Err(AnalyticsError::DegenerateGap);
    }
    Ok((macro_a - macro_b) / gap)
}

// ---------------------------------------------------------------------------
// Uncertainty

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Mean over pairs of assisted minus direct accuracy.
    MacroDelta,
    MacroDirect,
    MacroAssisted,
    MacroGen,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::MacroDelta => "macro_delta",
            Statistic::MacroDirect => "macro_direct",
            Statistic::MacroAssisted => "macro_assisted",
            Statistic::MacroGen => "macro_gen",
        }
    }

    pub fn eval<'a>(self, pairs: impl IntoIterator<Item = &'a PairSummary>) -> f64 {
        let f = |p: &PairSummary| match self {
            Statistic::MacroDelta => p.diff(),
            Statistic::MacroDirect => p.a_b,
            Statistic::MacroAssisted => p.a_a,
            Statistic::MacroGen => p.a_g,
        };
        let (sum, n) = pairs.into_iter().fold((0.0, 0usize), |(s, n), p| (s + f(p), n + 1));
        sum / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleUnit {
    Pair,
    DatasetCluster,
    SolverCluster,
}

impl ResampleUnit {
    pub fn name(self) -> &'static str {
        match self {
            ResampleUnit::Pair => "pair",
            ResampleUnit::DatasetCluster => "dataset-cluster",
            ResampleUnit::SolverCluster => "solver-cluster",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapReport {
    pub statistic_name: String,
    pub unit: ResampleUnit,
    pub replicates: usize,
    pub seed: u64,
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Percentile of sorted data with linear interpolation between order
/// statistics (`p` in [0, 1]).
pub fn percentile_linear(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn clusters(pairs: &[PairSummary], unit: ResampleUnit) -> Vec<Vec<&PairSummary>> {
    match unit {
        ResampleUnit::Pair => pairs.iter().map(|p| vec![p]).collect(),
        ResampleUnit::DatasetCluster | ResampleUnit::SolverCluster => {
            let mut order: Vec<&str> = Vec::new();
            let mut groups: HashMap<&str, Vec<&PairSummary>> = HashMap::new();
            for p in pairs {
                let key = if unit == ResampleUnit::DatasetCluster {
                    p.dataset_id.as_str()
                } else {
                    p.solver_label.as_str()
                };
                groups
                    .entry(key)
                    .or_insert_with(|| {
                        order.push(key);
                        Vec::new()
                    })
                    .push(p);
            }
            order.into_iter().map(|k| groups.remove(k).unwrap()).collect()
        }
    }
}

/// Percentile bootstrap 95% interval. Each replicate draws as many units as
/// there are, with replacement; cluster units contribute all their pairs and
/// the statistic is taken over the pooled pairs. A ChaCha8 stream seeded with
/// `seed` draws unit indices sequentially.
pub fn bootstrap_ci(
    pairs: &[PairSummary],
    statistic: Statistic,
    unit: ResampleUnit,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapReport, AnalyticsError> {
    if pairs.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    if replicates < 1000 {
        return Err(AnalyticsError::TooFewReplicates(replicates));
    }
    let units = clusters(pairs, unit);
    let k = units.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let mut pooled: Vec<&PairSummary> = Vec::with_capacity(pairs.len());
        for _ in 0..k {
            pooled.extend(&units[rng.gen_range(0..k)]);
        }
        stats.push(statistic.eval(pooled));
    }
    stats.sort_by(f64::total_cmp);
    Ok(BootstrapReport {
        statistic_name: statistic.name().into(),
        unit,
        replicates,
        seed,
        point_estimate: statistic.eval(pairs),
        ci_low: percentile_linear(&stats, 0.025),
        ci_high: percentile_linear(&stats, 0.975),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Dataset,
    Solver,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaveOneOutRange {
    pub min: f64,
    pub max: f64,
    /// Statistic with each group removed, in order of first appearance.
    pub per_group: Vec<(String, f64)>,
}

pub fn leave_one_out(pairs: &[PairSummary], axis: Axis, statistic: Statistic) -> Result<LeaveOneOutRange, AnalyticsError> {
    let key = |p: &PairSummary| match axis {
        Axis::Dataset => p.dataset_id.clone(),
        Axis::Solver => p.solver_label.clone(),
    };
    let mut groups: Vec<String> = Vec::new();
    for p in pairs {
        let k = key(p);
        if !groups.contains(&k) {
            groups.push(k);
        }
    }
    if groups.len() < 2 {
        return Err(AnalyticsError::InsufficientGroups(groups.len()));
    }
    let per_group: Vec<(String, f64)> = groups
        .into_iter()
        .map(|g| {
            let v = statistic.eval(pairs.iter().filter(|p| key(p) != g));
            (g, v)
        })
        .collect();
    let min = per_group.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let max = per_group.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(LeaveOneOutRange { min, max, per_group })
}

// ---------------------------------------------------------------------------
// Row-level diagnostics

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct OverlapCounts {
    pub n: usize,
    pub assisted_gen_agree: usize,
    pub assisted_correct_gen_wrong: usize,
    pub gen_correct_assisted_wrong: usize,
    pub assisted_correct_direct_wrong: usize,
    pub direct_correct_assisted_wrong: usize,
}

impl OverlapCounts {
    /// Fraction of rows for a count; 0 on empty input.
    pub fn rate(&self, count: usize) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            count as f64 / self.n as f64
        }
    }
}

pub fn overlap_table(records: &[ResultRecord]) -> OverlapCounts {
    let mut c = OverlapCounts {
        n: records.len(),
        ..Default::default()
    };
    for r in records {
        let z = score_channels(r);
        c.assisted_gen_agree += usize::from(r.solverLLM_assisted_ans == r.genLLM_ans);
        c.assisted_correct_gen_wrong += usize::from(z.z_a == 1 && z.z_g == 0);
        c.gen_correct_assisted_wrong += usize::from(z.z_g == 1 && z.z_a == 0);
        c.assisted_correct_direct_wrong += usize::from(z.z_a == 1 && z.z_b == 0);
        c.direct_correct_assisted_wrong += usize::from(z.z_b == 1 && z.z_a == 0);
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FailureRates {
    pub n: usize,
    pub direct: f64,
    pub assisted: f64,
    pub gen: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionFailureReport {
    pub all: FailureRates,
    pub nonzero: FailureRates,
    pub zero_baseline: FailureRates,
}

fn x_rates<'a>(rows: impl Iterator<Item = &'a ResultRecord>) -> FailureRates {
    let mut n = 0;
    let mut counts = [0usize; 3];
    for r in rows {
        n += 1;
        for (i, c) in Channel::ALL.iter().enumerate() {
            counts[i] += usize::from(c.letter(r).is_sentinel());
        }
    }
    let f = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    FailureRates {
        n,
        direct: f(counts[0]),
        assisted: f(counts[1]),
        gen: f(counts[2]),
    }
}

/// Sentinel rates per channel, overall and per partition slice. A row's
/// slice is decided by its pair's direct accuracy.
pub fn extraction_failure_rates(records: &[ResultRecord]) -> ExtractionFailureReport {
    let nonzero: std::collections::HashSet<(String, String)> = pair_summaries(records)
        .into_iter()
        .filter(|p| p.a_b > 0.0)
        .map(|p| (p.dataset_id, p.solver_label))
        .collect();
    let is_nz = |r: &ResultRecord| nonzero.contains(&(r.dataset_id.clone(), r.solver_label.clone()));
    ExtractionFailureReport {
        all: x_rates(records.iter()),
        nonzero: x_rates(records.iter().filter(|r| is_nz(r))),
        zero_baseline: x_rates(records.iter().filter(|r| !is_nz(r))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifficultyBucket {
    /// "1" through "9", or "unset".
    pub label: String,
    pub n: usize,
    pub direct: f64,
    pub assisted: f64,
    pub gen: f64,
    pub diff: f64,
}

/// Accuracy by generator-estimated difficulty. Only non-empty buckets are
/// returned, ordered 1..=9 then "unset".
pub fn difficulty_buckets(records: &[ResultRecord]) -> Vec<DifficultyBucket> {
    let mut groups: BTreeMap<u8, [usize; 4]> = BTreeMap::new();
    for r in records {
        // 10 sorts after every real difficulty
        let key = r.genLLM_difficulty.unwrap_or(10);
        let z = score_channels(r);
        let g = groups.entry(key).or_default();
        g[0] += 1;
        g[1] += z.z_b as usize;
        g[2] += z.z_a as usize;
        g[3] += z.z_g as usize;
    }
    groups
        .into_iter()
        .map(|(k, [n, b, a, g])| {
            let f = |x: usize| x as f64 / n as f64;
            DifficultyBucket {
                label: if k == 10 { "unset".into() } else { k.to_string() },
                n,
                direct: f(b),
                assisted: f(a),
                gen: f(g),
                diff: f(a) - f(b),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Group tables

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRow {
    pub key: String,
    pub n_pairs: usize,
    pub n_records: u64,
    pub macro_direct: f64,
    pub macro_assisted: f64,
    pub macro_gen: f64,
    pub delta: f64,
}

/// Macro accuracies per dataset or per solver, in order of first appearance.
pub fn group_macro_table(pairs: &[PairSummary], axis: Axis) -> Vec<GroupRow> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<&PairSummary>> = HashMap::new();
    for p in pairs {
        let k = match axis {
            Axis::Dataset => p.dataset_id.clone(),
            Axis::Solver => p.solver_label.clone(),
        };
        groups
            .entry(k.clone())
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(p);
    }
    order
        .into_iter()
        .map(|k| {
            let g = &groups[&k];
            let b = Statistic::MacroDirect.eval(g.iter().copied());
            let a = Statistic::MacroAssisted.eval(g.iter().copied());
            GroupRow {
                n_pairs: g.len(),
                n_records: g.iter().map(|p| p.n_records).sum(),
                macro_direct: b,
                macro_assisted: a,
                macro_gen: Statistic::MacroGen.eval(g.iter().copied()),
                delta: a - b,
                key: k,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixCell {
    pub delta: f64,
    /// Direct accuracy was zero for this pair.
    pub zero_baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovementMatrix {
    pub datasets: Vec<String>,
    pub solvers: Vec<String>,
    /// `cells[d][s]`, None when the pair is absent.
    pub cells: Vec<Vec<Option<MatrixCell>>>,
}

pub fn improvement_matrix(pairs: &[PairSummary]) -> ImprovementMatrix {
    let mut datasets: Vec<String> = Vec::new();
    let mut solvers: Vec<String> = Vec::new();
    for p in pairs {
        if !datasets.contains(&p.dataset_id) {
            datasets.push(p.dataset_id.clone());
        }
        if !solvers.contains(&p.solver_label) {
            solvers.push(p.solver_label.clone());
        }
    }
    datasets.sort();
    solvers.sort();
    let mut cells = vec![vec![None; solvers.len()]; datasets.len()];
    for p in pairs {
        let d = datasets.iter().position(|x| *x == p.dataset_id).unwrap();
        let s = solvers.iter().position(|x| *x == p.solver_label).unwrap();
        cells[d][s] = Some(MatrixCell {
            delta: p.diff(),
            zero_baseline: p.a_b == 0.0,
        });
    }
    ImprovementMatrix { datasets, solvers, cells }
}
