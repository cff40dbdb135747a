//! End-to-end evaluation runs: direct baseline plus assisted path for every
//! item, written to append-only result and ledger files.
//!
//! Output layout under the run's output directory:
//!
//! ```text
//! results/<run_id>.jsonl
//! ledger/<run_id>.jsonl
//! scaffolds/<dataset>/<item>/<generator>.txt
//! ```

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::direct::{run_direct, DirectConfig};
use crate::gateway::{CallContext, CallLedger, Gateway, ModelClient, RetryPolicy};
use crate::item::Item;
use crate::sandbox::{run_assisted, AssistedConfig};
use crate::scaffold::{path_component, ScaffoldStore};
use crate::store::{ResultRecord, ResultStore, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("run_id {0:?} is empty or not filesystem-safe")]
    InvalidRunId(String),
    #[error("run {0:?} already has results; choose a new run_id")]
    DuplicateRun(String),
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("ledger: {0}")]
    Ledger(#[from] crate::jsonl::JsonlError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub struct RunConfig {
    pub run_id: String,
    pub items: Vec<Item>,
    pub solver: Arc<dyn ModelClient>,
    pub solver_label: String,
    pub generator: Arc<dyn ModelClient>,
    pub generator_label: String,
    pub direct: DirectConfig,
    pub assisted: AssistedConfig,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub retry: RetryPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemFailure {
    pub dataset_id: String,
    pub item_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub records_written: usize,
    pub failures: Vec<ItemFailure>,
    pub results_path: PathBuf,
    pub ledger_path: PathBuf,
    pub scaffold_dir: PathBuf,
}

pub fn results_path(out_dir: &Path, run_id: &str) -> PathBuf {
    out_dir.join("results").join(format!("{run_id}.jsonl"))
}

pub fn ledger_path(out_dir: &Path, run_id: &str) -> PathBuf {
    out_dir.join("ledger").join(format!("{run_id}.jsonl"))
}

pub fn run(config: RunConfig) -> Result<RunSummary, RunError> {
    if config.run_id.is_empty() || path_component(&config.run_id) != config.run_id {
        return Err(RunError::InvalidRunId(config.run_id));
    }
    if config.workers == 0 {
        return Err(RunError::NoWorkers);
    }
    let results = results_path(&config.out_dir, &config.run_id);
    let ledger_file = ledger_path(&config.out_dir, &config.run_id);
    if results.exists() || ledger_file.exists() {
        return Err(RunError::DuplicateRun(config.run_id));
    }
    let store = Mutex::new(ResultStore::open(&results)?);
    let ledger = Arc::new(CallLedger::with_sink(&ledger_file)?);
    let scaffold_dir = config.out_dir.join("scaffolds");
    let scaffolds = ScaffoldStore::new(&scaffold_dir);
    let solver = Gateway::new(config.solver.clone(), ledger.clone(), config.solver_label.clone()).with_retry(config.retry);
    let generator = Gateway::new(config.generator.clone(), ledger, config.generator_label.clone()).with_retry(config.retry);

    let next = Mutex::new(0usize);
    let failures = Mutex::new(Vec::new());
    let written = Mutex::new(0usize);
    std::thread::scope(|scope| {
        for _ in 0..config.workers.min(config.items.len().max(1)) {
            scope.spawn(|| loop {
                let idx = {
                    let mut n = next.lock().unwrap();
                    let i = *n;
                    *n += 1;
                    i
                };
                let Some(item) = config.items.get(idx) else { break };
                match evaluate_item(item, &config, &solver, &generator, &scaffolds) {
                    Ok(record) => match store.lock().unwrap().append(&record) {
                        Ok(()) => *written.lock().unwrap() += 1,
                        Err(e) => failures.lock().unwrap().push(failure(item, e.to_string())),
                    },
                    Err(message) => failures.lock().unwrap().push(failure(item, message)),
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    failures.sort_by(|a, b| (&a.dataset_id, &a.item_id).cmp(&(&b.dataset_id, &b.item_id)));
    Ok(RunSummary {
        records_written: written.into_inner().unwrap(),
        failures,
        results_path: results,
        ledger_path: ledger_file,
        scaffold_dir,
    })
}

fn failure(item: &Item, message: String) -> ItemFailure {
    ItemFailure {
        dataset_id: item.dataset_id.clone(),
        item_id: item.item_id.clone(),
        message,
    }
}

fn evaluate_item(
    item: &Item,
    config: &RunConfig,
    solver: &Gateway,
    generator: &Gateway,
    scaffolds: &ScaffoldStore,
) -> Result<ResultRecord, String> {
    let ctx = CallContext::new(&config.run_id, &item.dataset_id, &item.item_id);
    let direct = run_direct(item, solver, &ctx, &config.direct).map_err(|e| format!("direct: {e}"))?;
    let assisted = run_assisted(item, generator, solver, &ctx, Some(scaffolds), &config.assisted).map_err(|e| format!("assisted: {e}"))?;
    Ok(ResultRecord {
        run_id: config.run_id.clone(),
        dataset_id: item.dataset_id.clone(),
        item_id: item.item_id.clone(),
        solver_label: config.solver_label.clone(),
        generator_label: config.generator_label.clone(),
        correct_ans: item.gold_option_id,
        solverLLM_baseline_ans: direct.answer_letter,
        solverLLM_assisted_ans: assisted.result.assisted_answer,
        genLLM_ans: assisted.result.generator_answer,
        genLLM_difficulty: assisted.result.difficulty,
        reattempt_ct: (direct.attempts_used - 1) + assisted.executions.saturating_sub(1),
        assisted_status: assisted.result.status,
        artifact_digest: assisted.artifact.map(|a| a.digest),
    })
}
