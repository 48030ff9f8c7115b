//! Prompt templates, embedded as versioned text resources.
//!
//! Placeholders use `{name}` and are substituted verbatim; the question
//! wording in the judge templates is load-bearing and must not be edited
//! without bumping [`TEMPLATE_VERSION`]. `{error_blocks}` in the critique
//! template is replaced with per-annotation blocks that carry their own
//! trailing newline.

pub const TEMPLATE_VERSION: &str = "v1";

/// Q1-Q7 critique prompt for reports with error annotations.
pub const CRITIQUE_PROMPT: &str = include_str!("../resources/templates/critique.txt");

/// Single-question confirmation prompt for empty reports.
pub const NO_ERROR_PROMPT: &str = include_str!("../resources/templates/no_error.txt");

/// Error-injection prompt for synthetic data generation.
pub const INJECTION_PROMPT: &str = include_str!("../resources/templates/injection.txt");

/// Domain-list generation prompt.
pub const DOMAINS_PROMPT: &str = include_str!("../resources/templates/domains.txt");

/// Topic-list generation prompt.
pub const TOPICS_PROMPT: &str = include_str!("../resources/templates/topics.txt");

/// Raw-sentence generation prompt.
pub const SENTENCES_PROMPT: &str = include_str!("../resources/templates/sentences.txt");

/// Default evaluator instruction wrapped around a reference/candidate pair.
pub const EVAL_INSTRUCTION: &str = include_str!("../resources/templates/eval_instruction.txt");

/// Default reward-scorer instruction wrapped around a report.
pub const REWARD_PROMPT: &str = include_str!("../resources/templates/reward.txt");

/// Fills the evaluator instruction (or a caller-supplied template with the
/// same placeholders) for one instance.
pub fn render_eval_prompt(template: &str, reference: &str, candidate: &str) -> String {
    template
        .replace("{reference}", reference)
        .replace("{candidate}", candidate)
}

/// Fills the reward-scorer prompt for one sampled report.
pub fn render_reward_prompt(reference: &str, candidate: &str, report_text: &str) -> String {
    REWARD_PROMPT
        .replace("{reference}", reference)
        .replace("{candidate}", candidate)
        .replace("{report}", report_text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critique_template_has_all_seven_questions() {
        for i in 1..=7 {
            let prefix = format!("Q{i}:");
            let question_lines =
                CRITIQUE_PROMPT.lines().filter(|l| l.starts_with(&prefix)).count();
            assert_eq!(question_lines, 1, "Q{i}");
        }
    }

    #[test]
    fn eval_prompt_fills_both_slots() {
        let p = render_eval_prompt(EVAL_INSTRUCTION, "ref text", "cand text");
        assert!(p.contains("Reference: \"ref text\""));
        assert!(p.contains("Translation: \"cand text\""));
        assert!(!p.contains("{reference}"));
    }
}
