//! Code-guided reasoning (CGR) evaluation harness.
//!
//! A target solver model answers multiple-choice items twice: once through a
//! strict letter-only prompt (the direct channel) and once through a program
//! written by a generator model that may query the solver repeatedly (the
//! assisted channel). The generator's own embedded answer is kept as a third,
//! diagnostic channel. This crate runs both paths, stores the three channels
//! per item, audits the traces, and computes partitioned macro/micro metrics
//! with bootstrap uncertainty.
//!
//! Module map:
//!
//! * [`item`] normalized item files and the dataset registry
//! * [`gateway`] model clients, the scripted test client, and the call ledger
//! * [`extraction`] answer-letter extraction
//! * [`direct`] the direct baseline runner
//! * [`scaffold`] generator prompts, program extraction, static validators
//! * [`sandbox`] isolated scaffold execution over a line-framed pipe bridge
//! * [`store`] append-only result records and metadata joins
//! * [`analytics`] channel scoring, partitions, bootstrap, audits
//! * [`report`] table and CSV rendering for replay, audit, and summaries
//! * [`pipeline`] full evaluation runs over a worker pool

pub mod analytics;
pub mod direct;
pub mod extraction;
pub mod gateway;
pub mod item;
pub mod jsonl;
pub mod pipeline;
pub mod report;
pub mod sandbox;
pub mod scaffold;
pub mod store;

pub use extraction::{extract_answer, extract_answer_in_set, ExtractionOutcome, Letter};
pub use item::{Item, OptionEntry};
