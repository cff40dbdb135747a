//! Direct baseline: one strict letter-only prompt, reattempted with the
//! identical request while the extracted answer is the sentinel.

use crate::extraction::{extract_answer, ExtractionOutcome, Letter};
use crate::gateway::{CallContext, Gateway, GatewayError, Role};
use crate::item::Item;

/// How `reattempt_max_ct` bounds the number of calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum AttemptBound {
    /// Up to `1 + reattempt_max_ct` calls.
    #[default]
    Extra,
    /// Up to `max(1, reattempt_max_ct)` calls.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectConfig {
    pub reattempt_max_ct: u32,
    /// Also reattempt when the extracted letter is not an option id.
    pub retry_out_of_set: bool,
    pub bound: AttemptBound,
}

impl Default for DirectConfig {
    fn default() -> Self {
        DirectConfig {
            reattempt_max_ct: 3,
            retry_out_of_set: false,
            bound: AttemptBound::Extra,
        }
    }
}

impl DirectConfig {
    pub fn max_attempts(&self) -> u32 {
        match self.bound {
            AttemptBound::Extra => 1 + self.reattempt_max_ct,
            AttemptBound::Total => self.reattempt_max_ct.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectOutcome {
    pub answer_letter: Letter,
    /// Extraction of the final attempt.
    pub extraction: ExtractionOutcome,
    pub attempts_used: u32,
    /// Request digests of each attempt, in order.
    pub responses: Vec<String>,
}

pub fn build_direct_prompt(item: &Item) -> String {
    let mut prompt = String::from("Solve the following multiple-choice question.\n\nQuestion: ");
    prompt.push_str(item.question_text.trim());
    prompt.push_str("\n\nOptions:\n");
    for opt in &item.options {
        prompt.push_str(&format!("{}. {}\n", opt.option_id, opt.text.trim()));
    }
    let ids: Vec<String> = item.options.iter().map(|o| o.option_id.to_string()).collect();
    prompt.push_str(&format!(
        "\nOutput only the option letter of the correct answer ({}). Do not output anything else.",
        ids.join(", ")
    ));
    prompt
}

pub fn run_direct(item: &Item, solver: &Gateway, ctx: &CallContext, config: &DirectConfig) -> Result<DirectOutcome, GatewayError> {
    let request = solver.request(Role::Direct, build_direct_prompt(item));
    let option_ids = item.option_ids();
    let max_attempts = config.max_attempts();
    let mut digests = Vec::new();
    loop {
        let response = solver.complete(ctx, &request)?;
        digests.push(request.digest());
        let extraction = extract_answer(&response.text);
        let letter = extraction.letter;
        let is_member = option_ids.contains(&letter);
        let unusable = (letter.is_sentinel() && !is_member) || (config.retry_out_of_set && !is_member);
        if !unusable || digests.len() as u32 >= max_attempts {
            return Ok(DirectOutcome {
                answer_letter: letter,
                extraction,
                attempts_used: digests.len() as u32,
                responses: digests,
            });
        }
    }
}
