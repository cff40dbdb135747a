//! Tables for the replay, audit, and summary commands, rendered as aligned
//! text and CSV.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytics::{
    self, Axis, BootstrapReport, Channel, ExtractionFailureReport, LeaveOneOutRange, PairSummary, PartitionReport, ResampleUnit, Statistic,
};
use crate::extraction::extract_answer;
use crate::gateway::{self, CallLedgerEntry, CallStats, Role};
use crate::sandbox::ExecutionStatus;
use crate::scaffold::{self, ScaffoldDirAudit};
use crate::store::{self, CoverageReport, ResultRecord};

// ---------------------------------------------------------------------------
// Formatting

/// Rounds `value` to `decimals` places, halves away from zero.
pub fn round_half_up(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let scaled = value * scale;
    // absorb binary representation error so 28.105 rounds up
    let nudged = scaled + scaled.signum() * 1e-9 * scaled.abs().max(1.0);
    nudged.round() / scale
}

/// Fraction as a percentage with two decimals: `0.38106 -> "38.11%"`.
pub fn fmt_pct(fraction: f64) -> String {
    format!("{:.2}%", round_half_up(fraction * 100.0, 2))
}

/// Fraction difference in percentage points: `0.281 -> "+28.10 pp"`.
pub fn fmt_pp(fraction: f64) -> String {
    let v = round_half_up(fraction * 100.0, 2);
    let sign = if v >= 0.0 { "+" } else { "" };
    format!("{sign}{v:.2} pp")
}

/// Bare percentage-point number for spreads and CI endpoints.
pub fn fmt_num(fraction: f64) -> String {
    format!("{:.2}", round_half_up(fraction * 100.0, 2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem for the CSV output.
    pub name: String,
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, title: &str, headers: &[&str]) -> Self {
        Table {
            name: name.into(),
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn cell(&self, row: usize, header: &str) -> Option<&str> {
        let col = self.headers.iter().position(|h| h == header)?;
        self.rows.get(row).map(|r| r[col].as_str())
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = format!("{}\n", self.title);
        out.push_str(&line(&self.headers));
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1)));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 cells")
    }
}

pub fn render_text(tables: &[Table]) -> String {
    tables.iter().map(Table::to_text).collect::<Vec<_>>().join("\n")
}

/// Writes `<stem>.txt` with every table plus one `<table.name>.csv` each.
pub fn write_tables(dir: &Path, stem: &str, tables: &[Table]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = vec![dir.join(format!("{stem}.txt"))];
    std::fs::write(&written[0], render_text(tables))?;
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        std::fs::write(&path, t.to_csv())?;
        written.push(path);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// Fixture replay

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySpec {
    pub taus: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for ReplaySpec {
    fn default() -> Self {
        ReplaySpec {
            taus: analytics::DEFAULT_TAUS.to_vec(),
            replicates: analytics::DEFAULT_REPLICATES,
            seed: analytics::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MicroRow {
    pub n_records: u64,
    pub direct: f64,
    pub assisted: f64,
    pub gen: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub nonzero: PartitionReport,
    pub zero_baseline: Option<PartitionReport>,
    pub micro_all: MicroRow,
    pub micro_nonzero: MicroRow,
    pub micro_zero: Option<MicroRow>,
    pub sweep: Vec<(f64, Result<PartitionReport, analytics::AnalyticsError>)>,
    pub rho_all: Option<f64>,
    pub rho_nonzero: Option<f64>,
    pub bootstrap: Vec<BootstrapReport>,
    pub leave_one_out: Vec<(Axis, LeaveOneOutRange)>,
}

fn micro_row(pairs: &[PairSummary]) -> Option<MicroRow> {
    Some(MicroRow {
        n_records: pairs.iter().map(|p| p.n_records).sum(),
        direct: analytics::weighted_micro(pairs, Channel::Direct).ok()?,
        assisted: analytics::weighted_micro(pairs, Channel::Assisted).ok()?,
        gen: analytics::weighted_micro(pairs, Channel::Generator).ok()?,
    })
}

/// Recomputes the macro, sweep, gap-closure, and uncertainty rows from
/// per-pair summaries. Only the non-zero-baseline partition failing is fatal.
pub fn replay_fixture(pairs: &[PairSummary], spec: &ReplaySpec) -> Result<ReplayReport, analytics::AnalyticsError> {
    let nonzero = analytics::partition(pairs, 0.0)?;
    let zero_baseline = analytics::zero_baseline_report(pairs).ok();
    let micro_all = micro_row(pairs).ok_or(analytics::AnalyticsError::EmptyInput)?;
    let micro_nonzero = micro_row(&nonzero.kept_pairs).ok_or(analytics::AnalyticsError::EmptyInput)?;
    let micro_zero = zero_baseline.as_ref().and_then(|z| micro_row(&z.kept_pairs));
    let sweep = spec.taus.iter().map(|&t| (t, analytics::partition(pairs, t))).collect();
    let rho_all = analytics::gap_closure(micro_all.direct, micro_all.assisted, micro_all.gen).ok();
    let rho_nonzero = analytics::gap_closure(nonzero.macro_direct, nonzero.macro_assisted, nonzero.macro_gen).ok();
    let kept = &nonzero.kept_pairs;
    let mut bootstrap = Vec::new();
    for unit in [ResampleUnit::Pair, ResampleUnit::DatasetCluster, ResampleUnit::SolverCluster] {
        bootstrap.push(analytics::bootstrap_ci(
            kept,
            Statistic::MacroDelta,
            unit,
            spec.replicates,
            spec.seed,
        )?);
    }
    let leave_one_out = [Axis::Dataset, Axis::Solver]
        .into_iter()
        .filter_map(|axis| analytics::leave_one_out(kept, axis, Statistic::MacroDelta).ok().map(|r| (axis, r)))
        .collect();
    Ok(ReplayReport {
        nonzero,
        zero_baseline,
        micro_all,
        micro_nonzero,
        micro_zero,
        sweep,
        rho_all,
        rho_nonzero,
        bootstrap,
        leave_one_out,
    })
}

impl ReplayReport {
    pub fn tables(&self) -> Vec<Table> {
        let mut macro_t = Table::new(
            "macro_partitions",
            "Macro accuracy by partition (± is the sample SD across pairs)",
            &[
                "slice",
                "estimator",
                "pairs",
                "n_records",
                "direct",
                "assisted",
                "gen",
                "diff",
                "sd_direct",
                "sd_assisted",
                "sd_diff",
            ],
        );
        let mut push_macro = |slice: &str, r: &PartitionReport| {
            macro_t.push(vec![
                slice.into(),
                "macro".into(),
                r.kept_pairs.len().to_string(),
                r.n_records.to_string(),
                fmt_pct(r.macro_direct),
                fmt_pct(r.macro_assisted),
                fmt_pct(r.macro_gen),
                fmt_pp(r.delta),
                fmt_num(r.sd_direct),
                fmt_num(r.sd_assisted),
                fmt_num(r.sd_delta),
            ]);
        };
        push_macro("nonzero", &self.nonzero);
        if let Some(z) = &self.zero_baseline {
            push_macro("zero_baseline", z);
        }
        let mut push_micro = |slice: &str, m: &MicroRow| {
            macro_t.push(vec![
                slice.into(),
                "micro".into(),
                String::new(),
                m.n_records.to_string(),
                fmt_pct(m.direct),
                fmt_pct(m.assisted),
                fmt_pct(m.gen),
                fmt_pp(m.assisted - m.direct),
                String::new(),
                String::new(),
                String::new(),
            ]);
        };
        push_micro("nonzero", &self.micro_nonzero);
        if let Some(m) = &self.micro_zero {
            push_micro("zero_baseline", m);
        }
        push_micro("all", &self.micro_all);

        let mut sweep = Table::new(
            "threshold_sweep",
            "Direct-baseline threshold sweep",
            &["tau", "pairs", "n_records", "direct", "assisted", "delta"],
        );
        for (tau, r) in &self.sweep {
            match r {
                Ok(r) => sweep.push(vec![
                    format!("{tau:.2}"),
                    r.kept_pairs.len().to_string(),
                    r.n_records.to_string(),
                    fmt_pct(r.macro_direct),
                    fmt_pct(r.macro_assisted),
                    fmt_pp(r.delta),
                ]),
                Err(e) => sweep.push(vec![
                    format!("{tau:.2}"),
                    "0".into(),
                    "0".into(),
                    String::new(),
                    String::new(),
                    e.to_string(),
                ]),
            }
        }

        let mut gap = Table::new("gap_closure", "Generator-gap closure", &["slice", "estimator", "rho"]);
        let rho = |r: Option<f64>| r.map_or_else(|| "undefined".into(), fmt_pct);
        gap.push(vec!["all".into(), "micro".into(), rho(self.rho_all)]);
        gap.push(vec!["nonzero".into(), "macro".into(), rho(self.rho_nonzero)]);

        let mut unc = Table::new(
            "uncertainty",
            "Uncertainty of the non-zero-baseline macro delta",
            &["method", "unit", "replicates", "seed", "estimate", "low", "high"],
        );
        for b in &self.bootstrap {
            unc.push(vec![
                "bootstrap95".into(),
                b.unit.name().into(),
                b.replicates.to_string(),
                b.seed.to_string(),
                fmt_pp(b.point_estimate),
                fmt_num(b.ci_low),
                fmt_num(b.ci_high),
            ]);
        }
        for (axis, r) in &self.leave_one_out {
            unc.push(vec![
                "leave_one_out".into(),
                match axis {
                    Axis::Dataset => "dataset".into(),
                    Axis::Solver => "solver".into(),
                },
                String::new(),
                String::new(),
                fmt_pp(self.nonzero.delta),
                fmt_num(r.min),
                fmt_num(r.max),
            ]);
        }
        vec![macro_t, sweep, gap, unc]
    }
}

// ---------------------------------------------------------------------------
// Standalone bootstrap

pub fn bootstrap_table(reports: &[BootstrapReport]) -> Table {
    let mut t = Table::new(
        "bootstrap",
        "Percentile bootstrap 95% intervals",
        &["statistic", "unit", "replicates", "seed", "estimate", "low", "high"],
    );
    for b in reports {
        t.push(vec![
            b.statistic_name.clone(),
            b.unit.name().into(),
            b.replicates.to_string(),
            b.seed.to_string(),
            fmt_num(b.point_estimate),
            fmt_num(b.ci_low),
            fmt_num(b.ci_high),
        ]);
    }
    t
}

// ---------------------------------------------------------------------------
// Audit

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub coverage: CoverageReport,
    pub direct_calls: CallStats,
    pub assisted_calls: CallStats,
    pub generator_calls: CallStats,
    pub direct_tokens: u64,
    pub assisted_tokens: u64,
    pub generator_tokens: u64,
    /// Assisted plus generator tokens over direct tokens.
    pub token_ratio: Option<f64>,
    pub extraction: ExtractionFailureReport,
    /// Direct-channel X answers that came from a literal standalone `X`.
    pub direct_literal_x: usize,
    pub status_counts: Vec<(ExecutionStatus, usize)>,
    pub scaffolds: Option<ScaffoldDirAudit>,
}

pub fn audit(
    records: &[ResultRecord],
    ledger: &[CallLedgerEntry],
    scaffold_dir: Option<&Path>,
    call_limit: usize,
) -> std::io::Result<AuditReport> {
    let direct_tokens = gateway::ledger_token_totals(ledger, Role::Direct);
    let assisted_tokens = gateway::ledger_token_totals(ledger, Role::Assisted);
    let generator_tokens = gateway::ledger_token_totals(ledger, Role::Generator);

    let mut last_direct: HashMap<(&str, &str, &str), &CallLedgerEntry> = HashMap::new();
    for e in ledger.iter().filter(|e| e.role == Role::Direct) {
        let key = (e.run_id.as_str(), e.dataset_id.as_str(), e.item_id.as_str());
        if last_direct.get(&key).is_none_or(|prev| prev.sequence_index <= e.sequence_index) {
            last_direct.insert(key, e);
        }
    }
    let direct_literal_x = records
        .iter()
        .filter(|r| r.solverLLM_baseline_ans.is_sentinel())
        .filter(|r| {
            last_direct
                .get(&(r.run_id.as_str(), r.dataset_id.as_str(), r.item_id.as_str()))
                .is_some_and(|e| extract_answer(&e.response.text).is_literal_x())
        })
        .count();

    let status_counts = ExecutionStatus::ALL
        .iter()
        .map(|s| (*s, records.iter().filter(|r| r.assisted_status == *s).count()))
        .collect();
    let scaffolds = match scaffold_dir {
        Some(dir) => Some(scaffold::audit_scaffold_dir(dir, call_limit)?),
        None => None,
    };
    Ok(AuditReport {
        coverage: store::join_metadata(records, ledger),
        direct_calls: gateway::ledger_call_stats(ledger, Role::Direct),
        assisted_calls: gateway::ledger_call_stats(ledger, Role::Assisted),
        generator_calls: gateway::ledger_call_stats(ledger, Role::Generator),
        direct_tokens,
        assisted_tokens,
        generator_tokens,
        token_ratio: gateway::token_ratio(assisted_tokens + generator_tokens, direct_tokens),
        extraction: analytics::extraction_failure_rates(records),
        direct_literal_x,
        status_counts,
        scaffolds,
    })
}

impl AuditReport {
    pub fn tables(&self) -> Vec<Table> {
        let c = &self.coverage;
        let mut cov = Table::new(
            "audit_coverage",
            "Response-metadata coverage",
            &["role", "rows_covered", "total_rows"],
        );
        for (role, n) in [
            ("direct", c.rows_with_direct_metadata),
            ("assisted", c.rows_with_assisted_metadata),
            ("generator", c.rows_with_generator_metadata),
        ] {
            cov.push(vec![role.into(), n.to_string(), c.total_rows.to_string()]);
        }

        let mut calls = Table::new(
            "audit_calls",
            "Calls per item",
            &["role", "items", "mean", "median", "p95", "max", "tokens"],
        );
        for (role, s, tokens) in [
            ("direct", &self.direct_calls, self.direct_tokens),
            ("assisted", &self.assisted_calls, self.assisted_tokens),
            ("generator", &self.generator_calls, self.generator_tokens),
        ] {
            calls.push(vec![
                role.into(),
                s.items.to_string(),
                format!("{:.2}", s.mean),
                format!("{:.1}", s.median),
                s.p95.to_string(),
                s.max.to_string(),
                tokens.to_string(),
            ]);
        }

        let mut ext = Table::new(
            "audit_extraction",
            "Sentinel X rates",
            &["slice", "rows", "direct", "assisted", "gen"],
        );
        for (slice, r) in [
            ("all", &self.extraction.all),
            ("nonzero", &self.extraction.nonzero),
            ("zero_baseline", &self.extraction.zero_baseline),
        ] {
            ext.push(vec![
                slice.into(),
                r.n.to_string(),
                fmt_pct(r.direct),
                fmt_pct(r.assisted),
                fmt_pct(r.gen),
            ]);
        }

        let mut misc = Table::new("audit_summary", "Audit summary", &["check", "value"]);
        misc.push(vec![
            "token ratio (assisted+generator)/direct".into(),
            self.token_ratio.map_or_else(|| "undefined".into(), |r| format!("{r:.2}")),
        ]);
        misc.push(vec!["direct literal-X answers".into(), self.direct_literal_x.to_string()]);
        for (s, n) in &self.status_counts {
            misc.push(vec![format!("assisted status {}", s.as_str()), n.to_string()]);
        }
        if let Some(s) = &self.scaffolds {
            misc.push(vec![
                "scaffolds with literal solverLLM_answer".into(),
                format!("{} / {}", s.literal_answer_files, s.files_scanned),
            ]);
            misc.push(vec!["max llm_model call sites".into(), s.max_call_sites.to_string()]);
            misc.push(vec![
                "scaffolds over call-site limit".into(),
                format!("{} / {}", s.files_over_call_limit, s.files_scanned),
            ]);
            misc.push(vec![
                "scaffolds without return contract".into(),
                format!("{} / {}", s.files_without_contract, s.files_scanned),
            ]);
        }
        vec![cov, calls, ext, misc]
    }
}

// ---------------------------------------------------------------------------
// Result summaries

pub fn summary_tables(records: &[ResultRecord]) -> Vec<Table> {
    let pairs = analytics::pair_summaries(records);
    let group = |axis: Axis, name: &str, title: &str, key: &str| {
        let mut t = Table::new(name, title, &[key, "pairs", "n_records", "direct", "assisted", "gen", "diff"]);
        for r in analytics::group_macro_table(&pairs, axis) {
            t.push(vec![
                r.key,
                r.n_pairs.to_string(),
                r.n_records.to_string(),
                fmt_pct(r.macro_direct),
                fmt_pct(r.macro_assisted),
                fmt_pct(r.macro_gen),
                fmt_pp(r.delta),
            ]);
        }
        t
    };
    let datasets = group(
        Axis::Dataset,
        "dataset_macro",
        "Dataset-level macro accuracy over solvers",
        "dataset_id",
    );
    let solvers = group(
        Axis::Solver,
        "solver_macro",
        "Solver-level macro accuracy over datasets",
        "solver_label",
    );

    let mut pair_t = Table::new(
        "pair_summaries",
        "Per-pair accuracy",
        &["dataset_id", "solver_label", "n_records", "A_b", "A_a", "A_g", "partition_tag"],
    );
    for p in &pairs {
        pair_t.push(vec![
            p.dataset_id.clone(),
            p.solver_label.clone(),
            p.n_records.to_string(),
            format!("{:.6}", p.a_b),
            format!("{:.6}", p.a_a),
            format!("{:.6}", p.a_g),
            p.partition_tag.clone().unwrap_or_default(),
        ]);
    }

    let m = analytics::improvement_matrix(&pairs);
    let mut headers = vec!["dataset_id"];
    headers.extend(m.solvers.iter().map(String::as_str));
    let mut matrix = Table::new("improvement_matrix", "Assisted minus direct per pair (* zero baseline)", &headers);
    let mut long = Table::new(
        "improvement_matrix_long",
        "Improvement matrix plot data",
        &["dataset_id", "solver_label", "diff", "zero_baseline"],
    );
    for (d, row) in m.cells.iter().enumerate() {
        let mut cells = vec![m.datasets[d].clone()];
        for (s, cell) in row.iter().enumerate() {
            cells.push(match cell {
                Some(c) => format!("{}{}", fmt_pp(c.delta), if c.zero_baseline { "*" } else { "" }),
                None => String::new(),
            });
            if let Some(c) = cell {
                long.push(vec![
                    m.datasets[d].clone(),
                    m.solvers[s].clone(),
                    format!("{:.6}", c.delta),
                    c.zero_baseline.to_string(),
                ]);
            }
        }
        matrix.push(cells);
    }

    let mut diff = Table::new(
        "difficulty_buckets",
        "Accuracy by generator-estimated difficulty",
        &["difficulty", "n", "direct", "assisted", "gen", "diff"],
    );
    for b in analytics::difficulty_buckets(records) {
        diff.push(vec![
            b.label,
            b.n.to_string(),
            fmt_pct(b.direct),
            fmt_pct(b.assisted),
            fmt_pct(b.gen),
            fmt_pp(b.diff),
        ]);
    }

    let o = analytics::overlap_table(records);
    let mut overlap = Table::new("overlap", "Same-row channel overlap", &["comparison", "rows", "share"]);
    for (name, n) in [
        ("assisted = gen", o.assisted_gen_agree),
        ("assisted correct, gen wrong", o.assisted_correct_gen_wrong),
        ("gen correct, assisted wrong", o.gen_correct_assisted_wrong),
        ("assisted correct, direct wrong", o.assisted_correct_direct_wrong),
        ("direct correct, assisted wrong", o.direct_correct_assisted_wrong),
    ] {
        overlap.push(vec![name.into(), n.to_string(), fmt_pct(o.rate(n))]);
    }
    vec![datasets, solvers, pair_t, matrix, long, diff, overlap]
}
