//! Append-only result records and their joins to the call ledger.

use std::collections::HashSet;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::extraction::Letter;
use crate::gateway::{CallLedgerEntry, Role};
use crate::jsonl::{self, JsonlError};
use crate::sandbox::ExecutionStatus;

/// One evaluated (item, solver, generator) row. Field names follow the
/// reference trace format.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub run_id: String,
    pub dataset_id: String,
    pub item_id: String,
    pub solver_label: String,
    pub generator_label: String,
    pub correct_ans: Letter,
    pub solverLLM_baseline_ans: Letter,
    pub solverLLM_assisted_ans: Letter,
    pub genLLM_ans: Letter,
    pub genLLM_difficulty: Option<u8>,
    pub reattempt_ct: u32,
    pub assisted_status: ExecutionStatus,
    #[serde(default)]
    pub artifact_digest: Option<String>,
}

pub type RecordKey = (String, String, String, String, String);

impl ResultRecord {
    pub fn key(&self) -> RecordKey {
        (
            self.dataset_id.clone(),
            self.item_id.clone(),
            self.solver_label.clone(),
            self.generator_label.clone(),
            self.run_id.clone(),
        )
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("run_id", &self.run_id),
            ("dataset_id", &self.dataset_id),
            ("item_id", &self.item_id),
            ("solver_label", &self.solver_label),
            ("generator_label", &self.generator_label),
        ] {
            if v.trim().is_empty() {
                return Err(format!("{name} empty"));
            }
        }
        if let Some(d) = self.genLLM_difficulty {
            if !(1..=9).contains(&d) {
                return Err(format!("genLLM_difficulty {d} outside 1..=9"));
            }
        }
        Ok(())
    }

    /// Parses and validates one serialized record.
    pub fn parse(line: &str) -> Result<Self, StoreError> {
        let record: ResultRecord = serde_json::from_str(line).map_err(|e| StoreError::Validation(e.to_string()))?;
        record.validate().map_err(StoreError::Validation)?;
        Ok(record)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("duplicate record key {0:?}")]
    DuplicateKey(RecordKey),
    #[error("invalid record: {0}")]
    Validation(String),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

impl StoreError {
    pub fn line(&self) -> Option<usize> {
        match self {
            StoreError::Jsonl(e) => e.line(),
            _ => None,
        }
    }
}

/// Single-writer append-only record file. Each append is flushed and
/// synced before returning.
pub struct ResultStore {
    path: PathBuf,
    file: File,
    keys: HashSet<RecordKey>,
}

impl ResultStore {
    /// Opens `path` for appending, creating it if needed. Keys already in
    /// the file count toward duplicate detection.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let keys = if path.exists() {
            load_records(path)?.iter().map(ResultRecord::key).collect()
        } else {
            HashSet::new()
        };
        let file = jsonl::open_append(path)?;
        Ok(ResultStore {
            path: path.to_path_buf(),
            file,
            keys,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn append(&mut self, record: &ResultRecord) -> Result<(), StoreError> {
        record.validate().map_err(StoreError::Validation)?;
        let key = record.key();
        if self.keys.contains(&key) {
            return Err(StoreError::DuplicateKey(key));
        }
        jsonl::append(&mut self.file, record)?;
        self.keys.insert(key);
        Ok(())
    }
}

pub fn load_records(path: &Path) -> Result<Vec<ResultRecord>, StoreError> {
    let rows: Vec<(usize, ResultRecord)> = jsonl::read(path)?;
    rows.into_iter()
        .map(|(line, r)| {
            r.validate().map_err(|message| {
                StoreError::Jsonl(JsonlError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message,
                })
            })?;
            Ok(r)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CoverageReport {
    pub total_rows: usize,
    pub rows_with_direct_metadata: usize,
    pub rows_with_assisted_metadata: usize,
    pub rows_with_generator_metadata: usize,
}

/// A row is covered for a role when at least one ledger entry shares its
/// (run_id, dataset_id, item_id) and has that role.
pub fn join_metadata(records: &[ResultRecord], ledger: &[CallLedgerEntry]) -> CoverageReport {
    let seen: HashSet<(&str, &str, &str, Role)> = ledger
        .iter()
        .map(|e| (e.run_id.as_str(), e.dataset_id.as_str(), e.item_id.as_str(), e.role))
        .collect();
    let covered = |role: Role| {
        records
            .iter()
            .filter(|r| seen.contains(&(r.run_id.as_str(), r.dataset_id.as_str(), r.item_id.as_str(), role)))
            .count()
    };
    CoverageReport {
        total_rows: records.len(),
        rows_with_direct_metadata: covered(Role::Direct),
        rows_with_assisted_metadata: covered(Role::Assisted),
        rows_with_generator_metadata: covered(Role::Generator),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::gateway::GenerationResponse;
    use proptest::prelude::*;

    pub(crate) fn record(item: &str) -> ResultRecord {
        let l = |c| Letter::new(c).unwrap();
        ResultRecord {
            run_id: "run1".into(),
            dataset_id: "OBQA".into(),
            item_id: item.into(),
            solver_label: "gemma".into(),
            generator_label: "opus".into(),
            correct_ans: l('A'),
            solverLLM_baseline_ans: l('B'),
            solverLLM_assisted_ans: l('A'),
            genLLM_ans: l('A'),
            genLLM_difficulty: None,
            reattempt_ct: 0,
            assisted_status: ExecutionStatus::Ok,
            artifact_digest: None,
        }
    }

    pub(crate) fn entry(item: &str, role: Role) -> CallLedgerEntry {
        CallLedgerEntry {
            run_id: "run1".into(),
            dataset_id: "OBQA".into(),
            item_id: item.into(),
            role,
            sequence_index: 0,
            request_digest: String::new(),
            response: GenerationResponse {
                text: "A".into(),
                prompt_tokens: 1,
                completion_tokens: 1,
                latency_ms: 0.0,
                model_label: "m".into(),
            },
        }
    }

    #[test]
    fn append_and_duplicate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results/run1.jsonl");
        let mut store = ResultStore::open(&path).unwrap();
        store.append(&record("q1")).unwrap();
        assert_eq!(store.len(), 1);
        assert!(matches!(store.append(&record("q1")), Err(StoreError::DuplicateKey(_))));
        drop(store);
        let mut reopened = ResultStore::open(&path).unwrap();
        assert!(matches!(reopened.append(&record("q1")), Err(StoreError::DuplicateKey(_))));
    }

    #[test]
    fn invalid_correct_answer_rejected() {
        let mut v = serde_json::to_value(record("q1")).unwrap();
        v["correct_ans"] = "1".into();
        assert!(matches!(ResultRecord::parse(&v.to_string()), Err(StoreError::Validation(_))));
        let mut bad = record("q1");
        bad.genLLM_difficulty = Some(0);
        let dir = tempfile::tempdir().unwrap();
        let mut store = ResultStore::open(&dir.path().join("r.jsonl")).unwrap();
        assert!(matches!(store.append(&bad), Err(StoreError::Validation(_))));
    }

    #[test]
    fn field_names_and_null_difficulty() {
        let v = serde_json::to_value(record("q1")).unwrap();
        for key in [
            "run_id",
            "dataset_id",
            "item_id",
            "solver_label",
            "generator_label",
            "correct_ans",
            "solverLLM_baseline_ans",
            "solverLLM_assisted_ans",
            "genLLM_ans",
            "genLLM_difficulty",
            "reattempt_ct",
            "assisted_status",
            "artifact_digest",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["genLLM_difficulty"].is_null());
        assert_eq!(v["assisted_status"], "ok");
    }

    #[test]
    fn load_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let mut store = ResultStore::open(&path).unwrap();
        let recs: Vec<_> = ["a", "b", "c"].iter().map(|i| record(i)).collect();
        for r in &recs {
            store.append(r).unwrap();
        }
        assert_eq!(load_records(&path).unwrap(), recs);

        let bad = dir.path().join("bad.jsonl");
        std::fs::write(&bad, format!("{}\n{{nope\n", serde_json::to_string(&recs[0]).unwrap())).unwrap();
        assert_eq!(load_records(&bad).unwrap_err().line(), Some(2));

        let empty = dir.path().join("empty.jsonl");
        std::fs::write(&empty, "").unwrap();
        assert!(load_records(&empty).unwrap().is_empty());
    }

    #[test]
    fn coverage_join() {
        let rows = vec![record("q1"), record("q2")];
        let ledger = vec![entry("q1", Role::Direct), entry("q2", Role::Direct), entry("q1", Role::Assisted)];
        assert_eq!(
            join_metadata(&rows, &ledger),
            CoverageReport {
                total_rows: 2,
                rows_with_direct_metadata: 2,
                rows_with_assisted_metadata: 1,
                rows_with_generator_metadata: 0,
            }
        );
        assert_eq!(join_metadata(&rows, &[]).rows_with_direct_metadata, 0);

        let rows: Vec<_> = (0..10).map(|i| record(&format!("q{i}"))).collect();
        let ledger: Vec<_> = (1..10).map(|i| entry(&format!("q{i}"), Role::Direct)).collect();
        assert_eq!(join_metadata(&rows, &ledger).rows_with_direct_metadata, 9);
    }

    proptest! {
        #[test]
        fn coverage_matches_brute_force(
            rows in proptest::collection::vec(0u8..6, 0..12),
            ledger in proptest::collection::vec((0u8..8, 0usize..3), 0..20),
        ) {
            let mut seen = HashSet::new();
            let rows: Vec<_> = rows.into_iter().filter(|r| seen.insert(*r)).map(|r| record(&format!("q{r}"))).collect();
            let ledger: Vec<_> = ledger.into_iter().map(|(i, r)| entry(&format!("q{i}"), Role::ALL[r])).collect();
            let report = join_metadata(&rows, &ledger);
            for (role, got) in [
                (Role::Direct, report.rows_with_direct_metadata),
                (Role::Assisted, report.rows_with_assisted_metadata),
                (Role::Generator, report.rows_with_generator_metadata),
            ] {
                let want = rows.iter().filter(|row| ledger.iter().any(|e| e.item_id == row.item_id && e.role == role)).count();
                prop_assert_eq!(got, want);
                prop_assert!(got <= report.total_rows);
            }
        }

        #[test]
        fn reads_mid_run_are_prefixes(n in 1usize..8) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.jsonl");
            let mut store = ResultStore::open(&path).unwrap();
            let mut snapshots = Vec::new();
            for i in 0..n {
                store.append(&record(&format!("q{i}"))).unwrap();
                snapshots.push(std::fs::read_to_string(&path).unwrap());
            }
            let last = snapshots.last().unwrap().clone();
            for s in snapshots {
                prop_assert!(last.starts_with(&s));
            }
        }
    }
}
