//! Generator prompts, program extraction, artifact storage, and static
//! validators for generated scaffolds.
//!
//! Validators work over a small Python lexer rather than a parser so they
//! still report something useful on syntactically broken generations.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::gateway::sha256_hex;
use crate::item::Item;
use crate::jsonl;

pub const SOLVER_HELPER: &str = "llm_model";
pub const EXTRACT_HELPER: &str = "extract_answer";
pub const CONTRACT_IDENTS: [&str; 3] = ["solverLLM_answer", "genLLM_answer", "genLLM_difficulty"];

// ---------------------------------------------------------------------------
// Prompt

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorPromptConfig {
    /// Solver-call limit stated in the prompt (not enforced here).
    pub max_solver_calls: u32,
}

impl Default for GeneratorPromptConfig {
    fn default() -> Self {
        GeneratorPromptConfig { max_solver_calls: 10 }
    }
}

pub fn build_generator_prompt(item: &Item, config: &GeneratorPromptConfig) -> String {
    let mut p = String::new();
    p.push_str("You are a domain expert and an expert Python programmer.\n\n");
    p.push_str(
        "A smaller target solver model will answer the multiple-choice question below. \
         The solver may lack the subject knowledge needed to answer it directly; additional \
         context or a logical flow of reasoning steps can help it.\n\n",
    );
    p.push_str(&format!(
        "Write a Python program that guides the solver to the answer. You may split the question \
         into subquestions, compute intermediate quantities, use loops, and query the solver \
         repeatedly, but make at most {} solver calls in total.\n\n",
        config.max_solver_calls
    ));
    p.push_str("Two helpers are already defined in scope. Do not import or redefine them:\n");
    p.push_str(&format!(
        "- {SOLVER_HELPER}(prompt, exp_config): sends prompt to the target solver and returns its response text. Pass exp_config through unchanged.\n"
    ));
    p.push_str(&format!(
        "- {EXTRACT_HELPER}(response): returns the first standalone capital letter A-Z in response, or \"X\" if there is none.\n\n"
    ));
    p.push_str("Contract:\n");
    p.push_str("- Define a function `solve(exp_config)` containing the whole program.\n");
    p.push_str(
        "- solverLLM_answer is the option letter selected from the solver's responses with extract_answer. \
         The answer must not be hard-coded; it has to come from solver calls.\n",
    );
    p.push_str(
        "- genLLM_answer is the option letter you believe is correct. Never include it, or hints toward it, in any solver prompt.\n",
    );
    p.push_str("- genLLM_difficulty is an integer from 1 (easiest) to 9 (hardest).\n");
    p.push_str("- The function must end with exactly: return (solverLLM_answer, genLLM_answer, genLLM_difficulty)\n\n");
    p.push_str("Question: ");
    p.push_str(item.question_text.trim());
    p.push_str("\n\nOptions:\n");
    for opt in &item.options {
        p.push_str(&format!("{}. {}\n", opt.option_id, opt.text.trim()));
    }
    p.push_str("\nRespond with the complete program in a single ```python fenced code block.");
    p
}

// ---------------------------------------------------------------------------
// Program extraction

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("generator response contains no program")]
pub struct EmptyProgram;

/// Contents of the first non-blank fenced code block, or the whole trimmed
/// response when there is no fence.
pub fn extract_program(response: &str) -> Result<String, EmptyProgram> {
    let mut rest = response;
    let mut saw_fence = false;
    while let Some(open) = rest.find("```") {
        saw_fence = true;
        let after = &rest[open + 3..];
        // info string runs to end of line
        let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
        let body = &after[body_start..];
        let (content, tail) = match body.find("```") {
            Some(close) => (&body[..close], &body[close + 3..]),
            None => (body, ""),
        };
        if !content.trim().is_empty() {
            return Ok(content.trim_end().to_string() + "\n");
        }
        rest = tail;
    }
    if saw_fence || response.trim().is_empty() {
        return Err(EmptyProgram);
    }
    Ok(response.trim().to_string() + "\n")
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Ident(&'a str),
    Str(&'a str),
    Op(&'a str),
    Other,
    Newline,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    tok: Tok<'a>,
    line: usize,
    start: usize,
    end: usize,
}

const THREE_CHAR_OPS: [&str; 6] = ["**=", "//=", ">>=", "<<=", "...", "!=="];
const TWO_CHAR_OPS: [&str; 18] = [
    "==", "!=", "<=", ">=", ":=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->", "**", "//", "<<", ">>",
];

fn lex(src: &str) -> Vec<Token<'_>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut depth: i32 = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                if depth <= 0 && !matches!(out.last(), Some(Token { tok: Tok::Newline, .. }) | None) {
                    out.push(Token {
                        tok: Tok::Newline,
                        line,
                        start: i,
                        end: i + 1,
                    });
                }
                line += 1;
                i += 1;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'\\' if bytes.get(i + 1) == Some(&b'\n') => {
                line += 1;
                i += 2;
            }
            _ if c.is_ascii_whitespace() => i += 1,
            _ if c == b'_' || c.is_ascii_alphabetic() || c >= 0x80 => {
                let start = i;
                while i < bytes.len() && (bytes[i] == b'_' || bytes[i].is_ascii_alphanumeric() || bytes[i] >= 0x80) {
                    i += 1;
                }
                let word = &src[start..i];
                let is_prefix = word.len() <= 2 && word.chars().all(|ch| "rRbBuUfF".contains(ch));
                if is_prefix && matches!(bytes.get(i), Some(b'"') | Some(b'\'')) {
                    let raw = word.contains(['r', 'R']);
                    let (tok, end, lines) = lex_string(src, i, raw);
                    out.push(Token { tok, line, start, end });
                    line += lines;
                    i = end;
                } else {
                    out.push(Token {
                        tok: Tok::Ident(word),
                        line,
                        start,
                        end: i,
                    });
                }
            }
            b'"' | b'\'' => {
                let (tok, end, lines) = lex_string(src, i, false);
                out.push(Token { tok, line, start: i, end });
                line += lines;
                i = end;
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.' || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Other,
                    line,
                    start,
                    end: i,
                });
            }
            _ => {
                let rest = &src[i..];
                let len = if THREE_CHAR_OPS.iter().any(|op| rest.starts_with(op)) {
                    3
                } else if TWO_CHAR_OPS.iter().any(|op| rest.starts_with(op)) {
                    2
                } else {
                    1
                };
                match c {
                    b'(' | b'[' | b'{' => depth += 1,
                    b')' | b']' | b'}' => depth -= 1,
                    _ => {}
                }
                out.push(Token {
                    tok: Tok::Op(&src[i..i + len]),
                    line,
                    start: i,
                    end: i + len,
                });
                i += len;
            }
        }
    }
    out
}

/// Lexes a string literal starting at the opening quote. Returns the token,
/// the end offset, and how many newlines it spans. Unterminated single-quoted
/// strings stop at end of line; unterminated triple-quoted ones at EOF.
fn lex_string(src: &str, quote_at: usize, raw: bool) -> (Tok<'_>, usize, usize) {
    let bytes = src.as_bytes();
    let q = bytes[quote_at];
    let triple = bytes.get(quote_at + 1) == Some(&q) && bytes.get(quote_at + 2) == Some(&q);
    let open = if triple { 3 } else { 1 };
    let content_start = quote_at + open;
    let mut i = content_start;
    let mut lines = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\\' && i + 1 < bytes.len() {
            if bytes[i + 1] == b'\n' {
                lines += 1;
            }
            // raw strings still cannot end on an escaped quote
            i += 2;
            let _ = raw;
            continue;
        }
        if c == b'\n' {
            if !triple {
                return (Tok::Str(&src[content_start..i]), i, lines);
            }
            lines += 1;
        }
        if c == q && (!triple || (bytes.get(i + 1) == Some(&q) && bytes.get(i + 2) == Some(&q))) {
            return (Tok::Str(&src[content_start..i]), i + open, lines);
        }
        i += 1;
    }
    (Tok::Str(&src[content_start..]), bytes.len(), lines)
}

// ---------------------------------------------------------------------------
// Validators

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteralHit {
    pub line: usize,
    pub matched_text: String,
}

/// Assignments of a quoted single uppercase letter to `solverLLM_answer`.
/// Literal `genLLM_answer` assignments are expected and not reported.
pub fn scan_literal_answer(source: &str) -> Vec<LiteralHit> {
    let toks = lex(source);
    toks.windows(3)
        .filter_map(|w| match (&w[0].tok, &w[1].tok, &w[2].tok) {
            (Tok::Ident(name), Tok::Op("="), Tok::Str(content))
                if *name == CONTRACT_IDENTS[0] && content.len() == 1 && content.as_bytes()[0].is_ascii_uppercase() =>
            {
                Some(LiteralHit {
                    line: w[0].line,
                    matched_text: source[w[0].start..w[2].end].to_string(),
                })
            }
            _ => None,
        })
        .collect()
}

/// Occurrences of `llm_model(` outside comments and string literals.
pub fn count_call_sites(source: &str) -> usize {
    let toks = lex(source);
    toks.windows(2)
        .filter(|w| w[0].tok == Tok::Ident(SOLVER_HELPER) && w[1].tok == Tok::Op("("))
        .count()
}

/// True when some `return` yields a three-element tuple whose elements
/// reference the three contract identifiers in order.
pub fn check_contract(source: &str) -> bool {
    let toks = lex(source);
    toks.iter().enumerate().any(|(i, t)| {
        if t.tok != Tok::Ident("return") {
            return false;
        }
        let stmt: Vec<&Tok> = toks[i + 1..].iter().map(|t| &t.tok).take_while(|t| **t != Tok::Newline).collect();
        returns_contract_triple(&stmt)
    })
}

fn returns_contract_triple(mut expr: &[&Tok]) -> bool {
    if expr.len() >= 2 && *expr[0] == Tok::Op("(") && *expr[expr.len() - 1] == Tok::Op(")") {
        // only strip when the parens enclose the whole expression
        let mut depth = 0;
        let encloses = expr.iter().enumerate().all(|(k, t)| {
            match t {
                Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
                Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
                _ => {}
            }
            depth > 0 || k == expr.len() - 1
        });
        if encloses {
            expr = &expr[1..expr.len() - 1];
        }
    }
    let mut parts: Vec<Vec<&Tok>> = vec![Vec::new()];
    let mut depth = 0;
    for t in expr {
        match t {
            Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
            Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
            Tok::Op(",") if depth == 0 => {
                parts.push(Vec::new());
                continue;
            }
            _ => {}
        }
        parts.last_mut().unwrap().push(t);
    }
    if parts.last().is_some_and(|p| p.is_empty()) {
        parts.pop();
    }
    parts.len() == 3
        && parts
            .iter()
            .zip(CONTRACT_IDENTS)
            .all(|(part, ident)| part.iter().any(|t| **t == Tok::Ident(ident)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticAuditReport {
    pub literal_answer_hits: Vec<LiteralHit>,
    pub call_site_count: usize,
    pub has_return_contract: bool,
}

pub fn audit_source(source: &str) -> StaticAuditReport {
    StaticAuditReport {
        literal_answer_hits: scan_literal_answer(source),
        call_site_count: count_call_sites(source),
        has_return_contract: check_contract(source),
    }
}

// ---------------------------------------------------------------------------
// Artifacts

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldArtifact {
    pub dataset_id: String,
    pub item_id: String,
    pub generator_label: String,
    pub source_text: String,
    pub digest: String,
    pub static_flags: StaticAuditReport,
    /// Unix seconds.
    pub created_at: u64,
}

impl ScaffoldArtifact {
    pub fn new(dataset_id: &str, item_id: &str, generator_label: &str, source_text: String) -> Self {
        ScaffoldArtifact {
            dataset_id: dataset_id.into(),
            item_id: item_id.into(),
            generator_label: generator_label.into(),
            digest: sha256_hex(&source_text),
            static_flags: audit_source(&source_text),
            source_text,
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn digest_matches(&self) -> bool {
        sha256_hex(&self.source_text) == self.digest
    }
}

/// One line of the store's audit index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub dataset_id: String,
    pub item_id: String,
    pub generator_label: String,
    pub path: String,
    pub digest: String,
    pub static_flags: StaticAuditReport,
}

/// Stores scaffolds as `<root>/<dataset>/<item>/<generator>.txt` with a
/// `<generator>.audit.json` sidecar and a line-delimited `index.jsonl`.
pub struct ScaffoldStore {
    root: PathBuf,
    index_lock: Mutex<()>,
}

pub const INDEX_FILE: &str = "index.jsonl";

/// Replaces characters that are unsafe in a single path component.
pub fn path_component(s: &str) -> String {
    let cleaned: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    match cleaned.as_str() {
        "" | "." | ".." => format!("_{cleaned}"),
        _ => cleaned,
    }
}

impl ScaffoldStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ScaffoldStore {
            root: root.into(),
            index_lock: Mutex::new(()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, artifact: &ScaffoldArtifact) -> PathBuf {
        self.root
            .join(path_component(&artifact.dataset_id))
            .join(path_component(&artifact.item_id))
            .join(format!("{}.txt", path_component(&artifact.generator_label)))
    }

    pub fn write(&self, artifact: &ScaffoldArtifact) -> std::io::Result<PathBuf> {
        let path = self.path_for(artifact);
        let dir = path.parent().expect("artifact path has a parent");
        std::fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        std::io::Write::write_all(&mut tmp, artifact.source_text.as_bytes())?;
        tmp.persist(&path).map_err(|e| e.error)?;
        let sidecar = path.with_extension("audit.json");
        let meta = serde_json::json!({
            "digest": artifact.digest,
            "created_at": artifact.created_at,
            "static_flags": artifact.static_flags,
        });
        std::fs::write(&sidecar, serde_json::to_vec_pretty(&meta)?)?;

        let rel = path.strip_prefix(&self.root).unwrap_or(&path).display().to_string();
        let entry = IndexEntry {
            dataset_id: artifact.dataset_id.clone(),
            item_id: artifact.item_id.clone(),
            generator_label: artifact.generator_label.clone(),
            path: rel,
            digest: artifact.digest.clone(),
            static_flags: artifact.static_flags.clone(),
        };
        let _guard = self.index_lock.lock().unwrap();
        let index_path = self.root.join(INDEX_FILE);
        let mut entries = self.index()?;
        entries.retain(|e| e.path != entry.path);
        entries.push(entry);
        jsonl::write_all_atomic(&index_path, &entries)?;
        Ok(path)
    }

    pub fn index(&self) -> std::io::Result<Vec<IndexEntry>> {
        let path = self.root.join(INDEX_FILE);
        if !path.exists() {
            return Ok(Vec::new());
        }
        jsonl::read(&path)
            .map(|v| v.into_iter().map(|(_, e)| e).collect())
            .map_err(std::io::Error::other)
    }

    pub fn load(&self, dataset_id: &str, item_id: &str, generator_label: &str) -> std::io::Result<ScaffoldArtifact> {
        let probe = ScaffoldArtifact::new(dataset_id, item_id, generator_label, String::new());
        let path = self.path_for(&probe);
        let source = std::fs::read_to_string(&path)?;
        let mut artifact = ScaffoldArtifact::new(dataset_id, item_id, generator_label, source);
        if let Ok(meta) = std::fs::read(path.with_extension("audit.json")) {
            if let Ok(v) = serde_json::from_slice::<serde_json::Value>(&meta) {
                if let Some(d) = v["digest"].as_str() {
                    artifact.digest = d.to_string();
                }
                if let Some(t) = v["created_at"].as_u64() {
                    artifact.created_at = t;
                }
            }
        }
        Ok(artifact)
    }
}

/// Static scan over every scaffold file (`*.txt` or `*.py`) under a directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScaffoldDirAudit {
    pub files_scanned: usize,
    pub literal_answer_files: usize,
    pub literal_answer_paths: Vec<String>,
    pub max_call_sites: usize,
    pub files_over_call_limit: usize,
    pub files_without_contract: usize,
}

pub fn audit_scaffold_dir(dir: &Path, call_limit: usize) -> std::io::Result<ScaffoldDirAudit> {
    let mut report = ScaffoldDirAudit::default();
    if !dir.exists() {
        return Ok(report);
    }
    let mut paths: Vec<PathBuf> = walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("txt") | Some("py")))
        .collect();
    paths.sort();
    for path in paths {
        let source = std::fs::read_to_string(&path)?;
        let audit = audit_source(&source);
        report.files_scanned += 1;
        if !audit.literal_answer_hits.is_empty() {
            report.literal_answer_files += 1;
            report
                .literal_answer_paths
                .push(path.strip_prefix(dir).unwrap_or(&path).display().to_string());
        }
        report.max_call_sites = report.max_call_sites.max(audit.call_site_count);
        if audit.call_site_count > call_limit {
            report.files_over_call_limit += 1;
        }
        if !audit.has_return_contract {
            report.files_without_contract += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::item::tests::fog_item;
    use crate::item::OptionEntry;
    use crate::Letter;

    /// Reference OpenBookQA tiebreak scaffold.
    pub(crate) const EXCERPT: &str = r#"response1 = llm_model(prompt=analysis_prompt, exp_config=exp_config)
answer1 = extract_answer(response=response1)

response2 = llm_model(prompt=verification_prompt, exp_config=exp_config)
answer2 = extract_answer(response=response2)

if answer1 == answer2:
    solverLLM_answer = answer1
else:
    response3 = llm_model(prompt=tiebreaker_prompt, exp_config=exp_config)
    solverLLM_answer = extract_answer(response=response3)

genLLM_answer = "A"
return (solverLLM_answer, genLLM_answer, genLLM_difficulty)
"#;

    #[test]
    fn generator_prompt_contents() {
        let p = build_generator_prompt(&fog_item(), &GeneratorPromptConfig::default());
        for needle in [
            "domain expert",
            "lack the subject knowledge",
            "at most 10 solver calls",
            "llm_model(prompt, exp_config)",
            "extract_answer(response)",
            "must not be hard-coded",
            "return (solverLLM_answer, genLLM_answer, genLLM_difficulty)",
            "There is most likely going to be fog around:",
            "A. a marsh",
            "D. a desert",
        ] {
            assert!(p.contains(needle), "missing {needle:?}");
        }
        assert_eq!(p, build_generator_prompt(&fog_item(), &GeneratorPromptConfig::default()));
    }

    #[test]
    fn generator_prompt_renders_26_options() {
        let mut item = fog_item();
        item.options = (0..26)
            .map(|i| OptionEntry {
                option_id: Letter::from_index(i).unwrap(),
                text: format!("opt{i}"),
            })
            .collect();
        let p = build_generator_prompt(&item, &GeneratorPromptConfig::default());
        assert!(p.contains("A. opt0\n") && p.contains("Z. opt25\n"));
    }

    #[test]
    fn extract_program_cases() {
        assert_eq!(extract_program("```python\nx = 1\n```").unwrap(), "x = 1\n");
        assert_eq!(
            extract_program("Here is the program:\n```\ny = 2\n```\nand ```\nz\n```").unwrap(),
            "y = 2\n"
        );
        assert_eq!(extract_program("   \n"), Err(EmptyProgram));
        assert_eq!(extract_program("```python\n\n```"), Err(EmptyProgram));
        assert_eq!(extract_program("  just prose  ").unwrap(), "just prose\n");
        assert_eq!(extract_program("```py\nunterminated").unwrap(), "unterminated\n");
    }

    #[test]
    fn literal_answer_scan() {
        let src = "x = 1\nsolverLLM_answer = \"A\"\n";
        let hits = scan_literal_answer(src);
        assert_eq!(
            hits,
            vec![LiteralHit {
                line: 2,
                matched_text: "solverLLM_answer = \"A\"".into()
            }]
        );
        assert!(scan_literal_answer(EXCERPT).is_empty());
        assert!(scan_literal_answer("").is_empty());
        // comparisons, comments, strings, and non-letter literals are not hits
        let clean = "if solverLLM_answer == 'A':\n    pass\n# solverLLM_answer = 'B'\ns = \"solverLLM_answer = 'C'\"\nsolverLLM_answer = 'AB'\nsolverLLM_answer = 'a'\n";
        assert!(scan_literal_answer(clean).is_empty());
        let single = "    solverLLM_answer='D'  # forced\n";
        assert_eq!(scan_literal_answer(single)[0].line, 1);
    }

    #[test]
    fn call_sites() {
        assert_eq!(count_call_sites(EXCERPT), 3);
        assert_eq!(count_call_sites(""), 0);
        // handcrafted lexer oracle: only line 4 is a real call
        let src = "# llm_model(prompt)\nx = 'llm_model(p)'\ny = \"\"\"\nllm_model(q)\n\"\"\"\nz = llm_model (p, c)\nmy_llm_model(p)\n";
        assert_eq!(count_call_sites(src), 1);
        assert_eq!(count_call_sites("# llm_model(x)\n"), 0);
    }

    #[test]
    fn contract_check() {
        assert!(check_contract(EXCERPT));
        assert!(check_contract(
            "def solve(c):\n    return solverLLM_answer, genLLM_answer, int(genLLM_difficulty)\n"
        ));
        assert!(!check_contract("return (solverLLM_answer, genLLM_answer)\n"));
        assert!(!check_contract(""));
        assert!(!check_contract("return (genLLM_answer, solverLLM_answer, genLLM_difficulty)\n"));
        assert!(check_contract(
            "return (\n    solverLLM_answer,\n    genLLM_answer,\n    genLLM_difficulty,\n)\n"
        ));
    }

    #[test]
    fn artifact_store_layout() {
        let dir = tempfile::tempdir().unwrap();
        let store = ScaffoldStore::new(dir.path());
        let art = ScaffoldArtifact::new("OBQA", "q/1", "opus", EXCERPT.to_string());
        assert!(art.digest_matches());
        let path = store.write(&art).unwrap();
        assert_eq!(path, dir.path().join("OBQA").join("q_1").join("opus.txt"));
        assert!(dir.path().join("OBQA/q_1/opus.audit.json").exists());
        store.write(&art).unwrap();
        let index = store.index().unwrap();
        assert_eq!(index.len(), 1);
        assert_eq!(index[0].static_flags.call_site_count, 3);
        let loaded = store.load("OBQA", "q/1", "opus").unwrap();
        assert_eq!(loaded.source_text, EXCERPT);
        assert!(loaded.digest_matches());
    }

    proptest::proptest! {
        #[test]
        fn call_sites_invariant_under_comment_lines(comments in proptest::collection::vec("[ -~]{0,30}", 0..6)) {
            let mut src = EXCERPT.to_string();
            for c in &comments {
                src.push_str(&format!("# {c}\n"));
            }
            proptest::prop_assert_eq!(count_call_sites(&src), 3);
        }
    }
}
