//! Normalized multiple-choice items and the dataset registry.
//!
//! Item files are line-delimited JSON, one item per line:
//!
//! ```text
//! {"item_id":"obqa-7","dataset_id":"OBQA","question":"...","options":[{"id":"A","text":"..."},...],"correct_ans":"A"}
//! ```
//!
//! Unknown fields are carried through unchanged. Option ids must be the
//! contiguous letters `A, B, C, ...` and exactly one gold letter is allowed.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::extraction::Letter;
use crate::jsonl::{self, JsonlError};

#[derive(Debug, thiserror::Error)]
pub enum ItemError {
    #[error("dataset {0:?} is already registered")]
    DuplicateDataset(String),
    #[error(transparent)]
    Parse(#[from] JsonlError),
    #[error("{path}:{line}: invalid item: {violation}")]
    Validation { path: String, line: usize, violation: Violation },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionEntry {
    #[serde(rename = "id")]
    pub option_id: Letter,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub item_id: String,
    pub dataset_id: String,
    #[serde(rename = "question")]
    pub question_text: String,
    pub options: Vec<OptionEntry>,
    #[serde(rename = "correct_ans")]
    pub gold_option_id: Letter,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Item {
    pub fn option_ids(&self) -> Vec<Letter> {
        self.options.iter().map(|o| o.option_id).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    /// Reported but does not block loading.
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub rule: String,
    pub severity: Severity,
}

impl Violation {
    fn error(field: &'static str, rule: impl Into<String>) -> Self {
        Violation {
            field,
            rule: rule.into(),
            severity: Severity::Error,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.field, self.rule)
    }
}

/// Checks every item invariant. Empty iff the item is valid.
pub fn validate_item(item: &Item) -> Vec<Violation> {
    let mut out = Vec::new();
    if item.item_id.is_empty() {
        out.push(Violation::error("item_id", "empty"));
    }
    if item.question_text.trim().is_empty() {
        out.push(Violation::error("question_text", "empty"));
    }
    if item.options.len() < 2 {
        out.push(Violation::error("options", "length < 2"));
    }
    let mut seen = [false; 26];
    for (pos, opt) in item.options.iter().enumerate() {
        let id = opt.option_id;
        if seen[id.index()] {
            out.push(Violation::error("options", format!("duplicate option id {id}")));
        }
        seen[id.index()] = true;
        if Letter::from_index(pos) != Some(id) {
            out.push(Violation::error(
                "options",
                format!("option id {id} at position {} breaks contiguous A, B, C, ... order", pos + 1),
            ));
        }
        if opt.text.trim().is_empty() {
            out.push(Violation::error("options", format!("text of option {id} empty")));
        }
    }
    if !item.options.iter().any(|o| o.option_id == item.gold_option_id) {
        out.push(Violation::error(
            "gold_option_id",
            format!("{} not among option ids", item.gold_option_id),
        ));
    }
    if item.options.iter().any(|o| o.option_id == Letter::SENTINEL) {
        out.push(Violation {
            field: "options",
            rule: "option X collides with the extraction sentinel".into(),
            severity: Severity::Warning,
        });
    }
    out
}

/// Raw line shape: ids are strings here so a bad letter becomes a
/// validation error naming the field rather than a bare parse error.
#[derive(Deserialize)]
struct RawItem {
    item_id: String,
    dataset_id: String,
    question: String,
    options: Vec<RawOption>,
    correct_ans: Value,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Deserialize)]
struct RawOption {
    id: String,
    text: String,
}

fn convert(raw: RawItem) -> Result<Item, Violation> {
    let gold = match &raw.correct_ans {
        Value::String(s) => Letter::parse(s).ok_or_else(|| Violation::error("gold_option_id", format!("{s:?} is not a letter A-Z")))?,
        Value::Array(_) => return Err(Violation::error("gold_option_id", "multiple gold options")),
        other => return Err(Violation::error("gold_option_id", format!("{other} is not a letter"))),
    };
    let options = raw
        .options
        .into_iter()
        .map(|o| {
            Letter::parse(&o.id)
                .map(|option_id| OptionEntry { option_id, text: o.text })
                .ok_or_else(|| Violation::error("options", format!("id {:?} is not a letter A-Z", o.id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Item {
        item_id: raw.item_id,
        dataset_id: raw.dataset_id,
        question_text: raw.question,
        options,
        gold_option_id: gold,
        extra: raw.extra,
    })
}

/// Loads and validates an item file. `dataset_id`, when given, must match
/// every record.
pub fn load_items(path: &Path, dataset_id: Option<&str>) -> Result<Vec<Item>, ItemError> {
    let raws: Vec<(usize, RawItem)> = jsonl::read(path)?;
    let invalid = |line, violation| ItemError::Validation {
        path: path.display().to_string(),
        line,
        violation,
    };
    let mut items = Vec::with_capacity(raws.len());
    for (line, raw) in raws {
        let item = convert(raw).map_err(|v| invalid(line, v))?;
        if let Some(want) = dataset_id {
            if item.dataset_id != want {
                return Err(invalid(
                    line,
                    Violation::error("dataset_id", format!("{:?} does not match {want:?}", item.dataset_id)),
                ));
            }
        }
        if let Some(v) = validate_item(&item).into_iter().find(|v| v.severity == Severity::Error) {
            return Err(invalid(line, v));
        }
        items.push(item);
    }
    Ok(items)
}

pub fn write_items(path: &Path, items: &[Item]) -> std::io::Result<()> {
    jsonl::write_all_atomic(path, items)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub dataset_id: String,
    pub local_config_name: String,
    pub expected_item_count: Option<u64>,
    pub provenance_note: String,
}

impl DatasetConfig {
    pub fn new(dataset_id: &str, local_config_name: &str) -> Self {
        DatasetConfig {
            dataset_id: dataset_id.into(),
            local_config_name: local_config_name.into(),
            expected_item_count: None,
            provenance_note: String::new(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DatasetRegistry {
    configs: Vec<DatasetConfig>,
}

impl DatasetRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The nine retained local configurations with their source item counts.
    pub fn builtin() -> Self {
        let rows: [(&str, &str, u64, &str); 9] = [
            ("aime", "aime2025QA", 30, "AIME I/II official pages"),
            ("medQA", "medQA", 500, "MedQA release"),
            ("phyQA", "physicsQA", 45, "PhysicsQA/MoRA release"),
            ("MMLUPro", "MMLUPro500", 500, "MMLU-Pro release"),
            ("SGPQA", "SuperGPQA", 500, "SuperGPQA release"),
            ("TMQA", "TimeMQA", 500, "Time-MQA release"),
            ("CBQA", "CorrectBenchQA", 494, "CorrectBench release"),
            ("OBQA", "OpenBookQA", 500, "OpenBookQA release"),
            ("FSIQ_RL", "FailureSensorIQ", 500, "FailureSensorIQ release"),
        ];
        let mut reg = DatasetRegistry::new();
        for (id, name, count, note) in rows {
            reg.register(DatasetConfig {
                dataset_id: id.into(),
                local_config_name: name.into(),
                expected_item_count: Some(count),
                provenance_note: note.into(),
            })
            .expect("builtin ids are unique");
        }
        reg
    }

    pub fn register(&mut self, config: DatasetConfig) -> Result<(), ItemError> {
        if self.get(&config.dataset_id).is_some() {
            return Err(ItemError::DuplicateDataset(config.dataset_id));
        }
        self.configs.push(config);
        Ok(())
    }

    pub fn get(&self, dataset_id: &str) -> Option<&DatasetConfig> {
        self.configs.iter().find(|c| c.dataset_id == dataset_id)
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DatasetConfig> {
        self.configs.iter()
    }
}
