#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cgr::item::Item;
use cgr::Letter;
use serde_json::{json, Value};

pub const TIEBREAK_BODY: &str = r#"response1 = llm_model(prompt=analysis_prompt, exp_config=exp_config)
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

pub const TIEBREAK_PRELUDE: &str =
    "analysis_prompt = \"Which place is most likely to be foggy? Options: A marsh, B tundra, C plains, D desert.\"\n\
verification_prompt = \"Fog forms over moist ground. Pick the option letter.\"\n\
tiebreaker_prompt = \"Decide between the earlier answers; reply with one letter.\"\n\
genLLM_difficulty = 3\n";

pub fn tiebreak_program() -> String {
    format!("{TIEBREAK_PRELUDE}{TIEBREAK_BODY}")
}

pub fn fenced(program: &str) -> String {
    format!("Here is the scaffold.\n\n```python\n{program}```\n")
}

pub fn item_json(item_id: &str, dataset_id: &str, gold: char) -> Value {
    json!({
        "item_id": item_id,
        "dataset_id": dataset_id,
        "question": "There is most likely going to be fog around:",
        "options": [
            {"id": "A", "text": "a marsh"},
            {"id": "B", "text": "a tundra"},
            {"id": "C", "text": "the plains"},
            {"id": "D", "text": "a desert"}
        ],
        "correct_ans": gold.to_string(),
    })
}

pub fn item(item_id: &str, dataset_id: &str, gold: char) -> Item {
    serde_json::from_value(item_json(item_id, dataset_id, gold)).unwrap()
}

pub fn write_jsonl(path: &Path, rows: &[Value]) {
    let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
    std::fs::write(path, text).unwrap();
}

/// Three OBQA items plus solver/generator scripts for one sequential
/// (single-worker) run.
///
/// item | direct calls | assisted calls | final (b, a, g)
/// q1   | 1 ("A")      | 2, agree       | (A, A, A)
/// q2   | 3, two blank | 3, tiebreak    | (B, B, A)
/// q3   | 1 ("C")      | 1, solve()     | (C, C, D)
pub struct ThreeItemRun {
    pub items: Vec<Item>,
    pub solver: Vec<&'static str>,
    pub generator: Vec<String>,
    pub direct_calls: [usize; 3],
    pub assisted_calls: [usize; 3],
    pub expected: [(char, char, char); 3],
}

pub fn three_item_run() -> ThreeItemRun {
    let solve =
        "def solve(exp_config):\n    r = llm_model('Which option is plains?', exp_config)\n    return (extract_answer(r), 'D', 6)\n";
    ThreeItemRun {
        items: vec![item("q1", "OBQA", 'A'), item("q2", "OBQA", 'B'), item("q3", "OBQA", 'C')],
        solver: vec![
            "A",
            "The answer is A.",
            "A is right",
            "no idea",
            "still thinking...",
            "B",
            "A marsh",
            "maybe B",
            "B after all",
            "C",
            "C",
        ],
        generator: vec![fenced(&tiebreak_program()), fenced(&tiebreak_program()), fenced(solve)],
        direct_calls: [1, 3, 1],
        assisted_calls: [2, 3, 1],
        expected: [('A', 'A', 'A'), ('B', 'B', 'A'), ('C', 'C', 'D')],
    }
}

pub fn scripts_json(run: &ThreeItemRun) -> Value {
    json!({
        "solver": {"responses": run.solver},
        "generator": {"responses": run.generator},
    })
}

pub fn letter(c: char) -> Letter {
    Letter::new(c).unwrap()
}

pub fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/retained_pairs.jsonl")
}
