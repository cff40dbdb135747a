//! Executes scaffold programs in a separate Python interpreter.
//!
//! The child gets a fresh scratch directory, a write/network/process guard,
//! and resource limits. Solver calls are bridged back to the parent over the
//! line protocol described in `docs/bridge-protocol.md`; the parent owns the
//! call cap and the wall-clock timeout.

use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::direct::AttemptBound;
use crate::extraction::Letter;
use crate::gateway::{CallContext, Gateway, GatewayError, Role};
use crate::item::Item;
use crate::scaffold::{self, GeneratorPromptConfig, ScaffoldArtifact, ScaffoldStore};

pub const RUNNER_SOURCE: &str = include_str!("sandbox/runner.py");

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionConfig {
    pub call_cap: u32,
    pub strict_call_cap: u32,
    pub wall_timeout_s: f64,
    pub enforce_strict_cap: bool,
    pub interpreter: String,
    /// Make the injected `extract_answer` skip letters outside the option set.
    pub option_set_aware: bool,
    pub memory_limit_bytes: u64,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        ExecutionConfig {
            call_cap: 30,
            strict_call_cap: 10,
            wall_timeout_s: 120.0,
            enforce_strict_cap: false,
            interpreter: "python3".into(),
            option_set_aware: false,
            memory_limit_bytes: 1 << 30,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("invalid execution config: {0}")]
pub struct InvalidConfig(pub &'static str);

impl ExecutionConfig {
    pub fn effective_cap(&self) -> u32 {
        if self.enforce_strict_cap {
            self.strict_call_cap
        } else {
            self.call_cap
        }
    }

    pub fn validate(&self) -> Result<(), InvalidConfig> {
        if self.call_cap < 1 || self.strict_call_cap < 1 {
            return Err(InvalidConfig("call_cap must be at least 1"));
        }
        if !(self.wall_timeout_s > 0.0 && self.wall_timeout_s.is_finite()) {
            return Err(InvalidConfig("wall_timeout_s must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionStatus {
    Ok,
    CallLimit,
    Timeout,
    ContractViolation,
    RuntimeFault,
}

impl ExecutionStatus {
    pub const ALL: [ExecutionStatus; 5] = [
        ExecutionStatus::Ok,
        ExecutionStatus::CallLimit,
        ExecutionStatus::Timeout,
        ExecutionStatus::ContractViolation,
        ExecutionStatus::RuntimeFault,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExecutionStatus::Ok => "ok",
            ExecutionStatus::CallLimit => "call_limit",
            ExecutionStatus::Timeout => "timeout",
            ExecutionStatus::ContractViolation => "contract_violation",
            ExecutionStatus::RuntimeFault => "runtime_fault",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    Key,
    Value,
    Other,
}

impl FaultKind {
    /// Classifies a Python exception by the class names in its MRO.
    pub fn from_mro<S: AsRef<str>>(mro: &[S]) -> FaultKind {
        if mro.iter().any(|n| n.as_ref() == "KeyError") {
            FaultKind::Key
        } else if mro.iter().any(|n| n.as_ref() == "ValueError") {
            FaultKind::Value
        } else {
            FaultKind::Other
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub assisted_answer: Letter,
    pub generator_answer: Letter,
    pub difficulty: Option<u8>,
    /// The returned difficulty was outside [1, 9] and has been clamped.
    pub difficulty_out_of_range: bool,
    pub calls_made: u32,
    pub status: ExecutionStatus,
    pub fault_kind: Option<FaultKind>,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ExecutionResult {
    fn failed(status: ExecutionStatus, calls_made: u32, detail: impl Into<String>) -> Self {
        ExecutionResult {
            assisted_answer: Letter::SENTINEL,
            generator_answer: Letter::SENTINEL,
            difficulty: None,
            difficulty_out_of_range: false,
            calls_made,
            status,
            fault_kind: None,
            duration_s: 0.0,
            detail: Some(detail.into()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == ExecutionStatus::Ok
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SandboxUnavailable {
    #[error("cannot prepare scratch directory: {0}")]
    Scratch(#[source] std::io::Error),
    #[error("cannot spawn interpreter {interpreter:?}: {source}")]
    Spawn {
        interpreter: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Config(#[from] InvalidConfig),
}

enum ChildLine {
    Line(String),
    Eof,
}

/// Runs `artifact` against `solver`. Every outcome other than an
/// infrastructure failure is reported through [`ExecutionResult::status`].
pub fn execute_scaffold(
    artifact: &ScaffoldArtifact,
    item: &Item,
    solver: &Gateway,
    ctx: &CallContext,
    config: &ExecutionConfig,
) -> Result<ExecutionResult, SandboxUnavailable> {
    config.validate()?;
    let started = Instant::now();
    let mut result = if artifact.source_text.trim().is_empty() {
        ExecutionResult::failed(ExecutionStatus::ContractViolation, 0, "empty program")
    } else {
        run_child(artifact, item, solver, ctx, config, started)?
    };
    result.duration_s = started.elapsed().as_secs_f64();
    Ok(result)
}

fn run_child(
    artifact: &ScaffoldArtifact,
    item: &Item,
    solver: &Gateway,
    ctx: &CallContext,
    config: &ExecutionConfig,
    started: Instant,
) -> Result<ExecutionResult, SandboxUnavailable> {
    let scratch = tempfile::Builder::new()
        .prefix("cgr-sandbox-")
        .tempdir()
        .map_err(SandboxUnavailable::Scratch)?;
    let dir = scratch.path();
    let child_config = json!({
        "option_ids": item.option_ids().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "option_set_aware": config.option_set_aware,
        "exp_config": {
            "solver": solver.model_label(),
            "dataset_id": ctx.dataset_id,
            "item_id": ctx.item_id,
        },
        "memory_limit_bytes": config.memory_limit_bytes,
        "cpu_limit_s": config.wall_timeout_s.ceil() as u64 + 5,
    });
    let write = |name: &str, data: &[u8]| std::fs::write(dir.join(name), data).map_err(SandboxUnavailable::Scratch);
    write("runner.py", RUNNER_SOURCE.as_bytes())?;
    write("scaffold.py", artifact.source_text.as_bytes())?;
    write("config.json", child_config.to_string().as_bytes())?;

    let mut command = Command::new(&config.interpreter);
    command
        .args(["-I", "-B", "runner.py", "scaffold.py", "config.json"])
        .current_dir(dir)
        .env_clear()
        .env("LANG", "C.UTF-8")
        .env("HOME", dir)
        .env("TMPDIR", dir)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(path) = std::env::var_os("PATH") {
        command.env("PATH", path);
    }
    let mut child = command.spawn().map_err(|source| SandboxUnavailable::Spawn {
        interpreter: config.interpreter.clone(),
        source,
    })?;

    let stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let mut stdin = child.stdin.take().expect("piped stdin");
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let mut reader = BufReader::new(stdout);
        loop {
            let mut line = String::new();
            match reader.read_line(&mut line) {
                Ok(0) | Err(_) => {
                    let _ = tx.send(ChildLine::Eof);
                    return;
                }
                Ok(_) => {
                    if tx.send(ChildLine::Line(line)).is_err() {
                        return;
                    }
                }
            }
        }
    });
    let stderr_tail = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr.read_to_end(&mut buf);
        let start = buf.len().saturating_sub(2000);
        String::from_utf8_lossy(&buf[start..]).into_owned()
    });

    let cap = config.effective_cap();
    let deadline = started + Duration::from_secs_f64(config.wall_timeout_s);
    let mut calls_made = 0u32;
    let outcome = loop {
        let remaining = deadline.saturating_duration_since(Instant::now());
        let line = match rx.recv_timeout(remaining) {
            Ok(ChildLine::Line(line)) => line,
            Ok(ChildLine::Eof) | Err(RecvTimeoutError::Disconnected) => {
                let _ = child.wait();
                let tail = stderr_tail.join().unwrap_or_default();
                break ExecutionResult::failed(
                    ExecutionStatus::RuntimeFault,
                    calls_made,
                    format!("interpreter exited without a result: {}", tail.trim()),
                )
                .with_fault(FaultKind::Other);
            }
            Err(RecvTimeoutError::Timeout) => {
                kill(&mut child);
                break ExecutionResult::failed(
                    ExecutionStatus::Timeout,
                    calls_made,
                    format!("exceeded {}s wall timeout", config.wall_timeout_s),
                );
            }
        };
        let line = line.trim_end_matches(['\n', '\r']);
        let (tag, payload) = line.split_once(' ').unwrap_or((line, ""));
        match tag {
            "CALL" => {
                if calls_made >= cap {
                    kill(&mut child);
                    break ExecutionResult::failed(ExecutionStatus::CallLimit, calls_made, format!("solver call cap {cap} exceeded"));
                }
                let prompt: String = match serde_json::from_str(payload) {
                    Ok(p) => p,
                    Err(e) => {
                        kill(&mut child);
                        break ExecutionResult::failed(ExecutionStatus::RuntimeFault, calls_made, format!("bad CALL line: {e}"))
                            .with_fault(FaultKind::Other);
                    }
                };
                let request = solver.request(Role::Assisted, prompt);
                match solver.complete(ctx, &request) {
                    Ok(response) => {
                        calls_made += 1;
                        let reply = format!("RESP {}\n", serde_json::to_string(&response.text).expect("string encodes"));
                        if stdin.write_all(reply.as_bytes()).and_then(|_| stdin.flush()).is_err() {
                            // child died; its EOF arrives on the next recv
                        }
                    }
                    Err(e) => {
                        kill(&mut child);
                        break ExecutionResult::failed(ExecutionStatus::RuntimeFault, calls_made, format!("solver call failed: {e}"))
                            .with_fault(FaultKind::Other);
                    }
                }
            }
            "RET" => {
                let _ = child.wait();
                break match serde_json::from_str::<Value>(payload) {
                    Ok(v) => map_return(&v, calls_made),
                    Err(e) => ExecutionResult::failed(ExecutionStatus::ContractViolation, calls_made, format!("bad RET line: {e}")),
                };
            }
            "ERR" => {
                let _ = child.wait();
                let v: Value = serde_json::from_str(payload).unwrap_or(Value::Null);
                let message = format!("{}: {}", v["type"].as_str().unwrap_or("?"), v["message"].as_str().unwrap_or(""));
                if v["phase"] == "compile" {
                    break ExecutionResult::failed(ExecutionStatus::ContractViolation, calls_made, message);
                }
                let mro: Vec<&str> = v["mro"]
                    .as_array()
                    .map_or_else(Vec::new, |a| a.iter().filter_map(Value::as_str).collect());
                break ExecutionResult::failed(ExecutionStatus::RuntimeFault, calls_made, message).with_fault(FaultKind::from_mro(&mro));
            }
            _ => {
                kill(&mut child);
                break ExecutionResult::failed(ExecutionStatus::RuntimeFault, calls_made, format!("unexpected line {tag:?}"))
                    .with_fault(FaultKind::Other);
            }
        }
    };
    drop(stdin);
    Ok(outcome)
}

fn kill(child: &mut Child) {
    let _ = child.kill();
    let _ = child.wait();
}

impl ExecutionResult {
    fn with_fault(mut self, kind: FaultKind) -> Self {
        self.fault_kind = Some(kind);
        self
    }
}

fn letter_field(v: &Value) -> Option<Letter> {
    let s = v.as_str()?.trim();
    let mut chars = s.chars();
    let c = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    Letter::new(c)
}

/// Integer-coercible: ints, integral floats, and strings holding either.
fn coerce_int(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .or_else(|| n.as_f64().filter(|f| f.fract() == 0.0 && f.abs() < 1e15).map(|f| f as i64)),
        Value::String(s) => {
            let s = s.trim();
            s.parse::<i64>().ok().or_else(|| {
                s.parse::<f64>()
                    .ok()
                    .filter(|f| f.fract() == 0.0 && f.abs() < 1e15)
                    .map(|f| f as i64)
            })
        }
        _ => None,
    }
}

fn map_return(v: &Value, calls_made: u32) -> ExecutionResult {
    let violation = |why: &str| ExecutionResult::failed(ExecutionStatus::ContractViolation, calls_made, why.to_string());
    let Some(items) = v.as_array() else {
        return violation("return value is not a tuple");
    };
    if items.len() != 3 {
        return violation(&format!("return tuple has {} elements, expected 3", items.len()));
    }
    let (Some(assisted), Some(generator)) = (letter_field(&items[0]), letter_field(&items[1])) else {
        return violation("answer fields must be single capital letters");
    };
    let Some(raw) = coerce_int(&items[2]) else {
        return violation("difficulty is not integer-coercible");
    };
    let clamped = raw.clamp(1, 9);
    ExecutionResult {
        assisted_answer: assisted,
        generator_answer: generator,
        difficulty: Some(clamped as u8),
        difficulty_out_of_range: clamped != raw,
        calls_made,
        status: ExecutionStatus::Ok,
        fault_kind: None,
        duration_s: 0.0,
        detail: None,
    }
}

// ---------------------------------------------------------------------------
// Assisted path

#[derive(Debug, Clone, PartialEq)]
pub struct AssistedConfig {
    pub prompt: GeneratorPromptConfig,
    pub execution: ExecutionConfig,
    /// Extra executions of the same artifact after an unusable result.
    pub reattempt_max_ct: u32,
    pub bound: AttemptBound,
}

impl Default for AssistedConfig {
    fn default() -> Self {
        AssistedConfig {
            prompt: GeneratorPromptConfig::default(),
            execution: ExecutionConfig::default(),
            reattempt_max_ct: 3,
            bound: AttemptBound::Extra,
        }
    }
}

impl AssistedConfig {
    fn max_executions(&self) -> u32 {
        match self.bound {
            AttemptBound::Extra => 1 + self.reattempt_max_ct,
            AttemptBound::Total => self.reattempt_max_ct.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssistedOutcome {
    /// None when the generator response held no program.
    pub artifact: Option<ScaffoldArtifact>,
    /// Result of the final execution.
    pub result: ExecutionResult,
    pub executions: u32,
    /// Solver calls summed over all executions.
    pub assisted_calls: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum AssistedError {
    #[error("generator call failed: {0}")]
    Generator(#[from] GatewayError),
    #[error(transparent)]
    Sandbox(#[from] SandboxUnavailable),
    #[error("cannot store scaffold: {0}")]
    Store(#[from] std::io::Error),
}

/// Generator call, program extraction, optional storage, and execution with
/// re-execution of unusable results.
pub fn run_assisted(
    item: &Item,
    generator: &Gateway,
    solver: &Gateway,
    ctx: &CallContext,
    store: Option<&ScaffoldStore>,
    config: &AssistedConfig,
) -> Result<AssistedOutcome, AssistedError> {
    let prompt = scaffold::build_generator_prompt(item, &config.prompt);
    let response = generator.complete(ctx, &generator.request(Role::Generator, prompt))?;
    let source = match scaffold::extract_program(&response.text) {
        Ok(s) => s,
        Err(e) => {
            return Ok(AssistedOutcome {
                artifact: None,
                result: ExecutionResult::failed(ExecutionStatus::ContractViolation, 0, e.to_string()),
                executions: 0,
                assisted_calls: 0,
            })
        }
    };
    let artifact = ScaffoldArtifact::new(&item.dataset_id, &item.item_id, generator.model_label(), source);
    if let Some(store) = store {
        store.write(&artifact)?;
    }
    let option_ids = item.option_ids();
    let mut executions = 0;
    let mut assisted_calls = 0;
    loop {
        let result = execute_scaffold(&artifact, item, solver, ctx, &config.execution)?;
        executions += 1;
        assisted_calls += result.calls_made;
        let unusable = result.status == ExecutionStatus::ContractViolation
            || (result.assisted_answer.is_sentinel() && !option_ids.contains(&result.assisted_answer));
        if !unusable || executions >= config.max_executions() {
            return Ok(AssistedOutcome {
                artifact: Some(artifact),
                result,
                executions,
                assisted_calls,
            });
        }
    }
}
