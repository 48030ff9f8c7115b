//! Synthetic data generation: the domain/topic/sentence prompt chain, error
//! recipe sampling over the MQM taxonomy, injection prompt rendering,
//! response parsing into synthetic records, and fine-tune record emission.
//!
//! All randomness is drawn from a seeded ChaCha8 stream so that a corpus
//! build is reproducible; the algorithm identifier is recorded in the run
//! manifest.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{
    parse_report, render_report, DiagnosticReport, ErrorAnnotation, ParseMode, Severity,
};
use crate::templates;

/// RNG identifier recorded in manifests.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Top-level MQM error category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCategory {
    Accuracy,
    Fluency,
    Terminology,
    Style,
    LocaleConvention,
}

/// The 18 MQM leaf error types used for synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorKind {
    Addition,
    Omission,
    Mistranslation,
    UntranslatedText,
    Spelling,
    Grammar,
    Register,
    Inconsistency,
    CharacterEncoding,
    InappropriateForContext,
    InconsistentUse,
    Awkward,
    AddressFormat,
    CurrencyFormat,
    DateFormat,
    NameFormat,
    TelephoneFormat,
    TimeFormat,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 18] = [
        ErrorKind::Addition,
        ErrorKind::Omission,
        ErrorKind::Mistranslation,
        ErrorKind::UntranslatedText,
        ErrorKind::Spelling,
        ErrorKind::Grammar,
        ErrorKind::Register,
        ErrorKind::Inconsistency,
        ErrorKind::CharacterEncoding,
        ErrorKind::InappropriateForContext,
        ErrorKind::InconsistentUse,
        ErrorKind::Awkward,
        ErrorKind::AddressFormat,
        ErrorKind::CurrencyFormat,
        ErrorKind::DateFormat,
        ErrorKind::NameFormat,
        ErrorKind::TelephoneFormat,
        ErrorKind::TimeFormat,
    ];

    pub fn category(self) -> ErrorCategory {
        use ErrorKind::*;
        match self {
            Addition | Omission | Mistranslation | UntranslatedText => ErrorCategory::Accuracy,
            Spelling | Grammar | Register | Inconsistency | CharacterEncoding => {
                ErrorCategory::Fluency
            }
            InappropriateForContext | InconsistentUse => ErrorCategory::Terminology,
            Awkward => ErrorCategory::Style,
            AddressFormat | CurrencyFormat | DateFormat | NameFormat | TelephoneFormat
            | TimeFormat => ErrorCategory::LocaleConvention,
        }
    }

    /// The MQM guideline description, verbatim.
    pub fn description(self) -> &'static str {
        use ErrorKind::*;
        match self {
            Addition => "Translation includes information not present in the source.",
            Omission => "Translation is missing content from the source.",
            Mistranslation => "Translation does not accurately represent the source.",
            UntranslatedText => "Source text has been left untranslated.",
            Spelling => "Incorrect spelling or capitalization.",
            Grammar => "Problems with grammar, other than orthography.",
            Register => "Wrong grammatical register (eg, inappropriately informal pronouns).",
            Inconsistency => "Internal inconsistency (not related to terminology).",
            CharacterEncoding => "Characters are garbled due to incorrect encoding.",
            InappropriateForContext => "Terminology is non-standard or does not fit the context.",
            InconsistentUse => "Terminology is used inconsistently.",
            Awkward => "Translation has stylistic problems.",
            AddressFormat => "Wrong format for addresses.",
            CurrencyFormat => "Wrong format for currency.",
            DateFormat => "Wrong format for dates.",
            NameFormat => "Wrong format for names.",
            TelephoneFormat => "Wrong format for telephone numbers.",
            TimeFormat => "Wrong format for time expressions.",
        }
    }

    /// The description as it appears in injection prompts: reference-based
    /// wording ("the correct translation") and no trailing period.
    pub fn prompt_description(self) -> String {
        self.description()
            .trim_end_matches('.')
            .replace("the source", "the correct translation")
    }
}

/// One planned error: a taxonomy leaf plus a severity label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeError {
    pub kind: ErrorKind,
    pub severity: Severity,
}

/// A sampled plan for one synthetic sentence: 1 to 5 errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecipe {
    pub errors: Vec<RecipeError>,
}

impl ErrorRecipe {
    /// Draws a recipe from an RNG stream: the error count is uniform on
    /// 1..=5, each type uniform over the 18 leaves, each severity uniform.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let n = rng.gen_range(1..=5);
        let errors = (0..n)
            .map(|_| RecipeError {
                kind: ErrorKind::ALL[rng.gen_range(0..ErrorKind::ALL.len())],
                severity: if rng.gen_bool(0.5) { Severity::Major } else { Severity::Minor },
            })
            .collect();
        ErrorRecipe { errors }
    }

    /// Deterministic single-recipe sampling: the same seed always yields
    /// the same recipe, on every platform.
    pub fn from_seed(seed: u64) -> Self {
        Self::sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn n_errors(&self) -> usize {
        self.errors.len()
    }

    pub fn n_major(&self) -> usize {
        self.errors.iter().filter(|e| e.severity == Severity::Major).count()
    }

    pub fn n_minor(&self) -> usize {
        self.errors.iter().filter(|e| e.severity == Severity::Minor).count()
    }
}

fn count_in_words(n: usize) -> &'static str {
    match n {
        1 => "one",
        2 => "two",
        3 => "three",
        4 => "four",
        5 => "five",
        _ => "several",
    }
}

/// Renders the domain-list prompt from the seed domains.
pub fn build_domains_prompt(seed_domains: &[String], count: usize) -> String {
    let list = match seed_domains.len() {
        0 => String::new(),
        1 => seed_domains[0].clone(),
        n => format!("{}, and {}", seed_domains[..n - 1].join(", "), seed_domains[n - 1]),
    };
    templates::DOMAINS_PROMPT
        .replace("{count}", &count.to_string())
        .replace("{seed_domains}", &list)
}

/// Renders the topic-list prompt for one domain.
pub fn build_topics_prompt(domain: &str, count: usize) -> String {
    templates::TOPICS_PROMPT
        .replace("{count}", &count.to_string())
        .replace("{domain}", domain)
}

/// Renders the raw-sentence prompt for one topic.
pub fn build_sentences_prompt(topic: &str, count: usize, language: &str) -> String {
    templates::SENTENCES_PROMPT
        .replace("{count}", &count.to_string())
        .replace("{language}", language)
        .replace("{topic}", topic)
}

/// Renders the error-injection prompt for one raw text and recipe.
pub fn build_injection_prompt(
    raw_text: &str,
    recipe: &ErrorRecipe,
    source_lang: &str,
    target_lang: &str,
) -> String {
    let slots = recipe
        .errors
        .iter()
        .enumerate()
        .map(|(i, err)| {
            let i = i + 1;
            format!(
                "Error type {i}: {}\nMajor/minor: {}\nError location {i}:\nExplanation for error {i}:",
                err.kind.prompt_description(),
                err.severity
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    templates::INJECTION_PROMPT
        .replace("{source_lang}", source_lang)
        .replace("{target_lang}", target_lang)
        .replace("{raw_text}", raw_text)
        .replace("{count_words}", count_in_words(recipe.n_errors()))
        .replace("{n_minor}", &recipe.n_minor().to_string())
        .replace("{n_major}", &recipe.n_major().to_string())
        .replace("{error_slots}", &slots)
}

/// One synthesized training example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticRecord {
    pub raw_text: String,
    pub pseudo_reference: String,
    pub candidate: String,
    pub report: DiagnosticReport,
}

/// One fine-tune example: model input and serialization target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneRecord {
    pub input: String,
    pub target: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatagenError {
    #[error("reply does not follow the scaffold: missing {missing:?}")]
    ScaffoldMismatch { missing: String },
    #[error("reply contains {found} error blocks but the recipe has {expected}")]
    CountMismatch { expected: usize, found: usize },
    #[error("synthetic report failed validation: {0}")]
    InvalidReport(String),
}

fn strip_wrapping_quotes(text: &str) -> &str {
    let text = text.trim();
    for (open, close) in [('"', '"'), ('\u{201c}', '\u{201d}')] {
        if text.len() >= open.len_utf8() + close.len_utf8()
            && text.starts_with(open)
            && text.ends_with(close)
        {
            return &text[open.len_utf8()..text.len() - close.len_utf8()];
        }
    }
    text
}

/// Finds a scaffold line by its ASCII key (case-insensitive) and returns
/// the content after the colon.
fn scaffold_field<'a>(lines: &[&'a str], key: &str) -> Option<&'a str> {
    lines.iter().find_map(|line| {
        let line = line.trim_start();
        if line.len() >= key.len() && line.as_bytes()[..key.len()].eq_ignore_ascii_case(key.as_bytes())
        {
            let tail = line[key.len()..].trim_start_matches(':');
            Some(tail.strip_prefix(' ').unwrap_or(tail))
        } else {
            None
        }
    })
}

/// Parses a generator reply into a synthetic record. Error types and
/// severities come from the recipe; the reply contributes the paraphrase,
/// the erroneous sentence, and per-error locations and explanations.
pub fn parse_injection_response(
    raw: &str,
    recipe: &ErrorRecipe,
) -> Result<SyntheticRecord, DatagenError> {
    let lines: Vec<&str> = raw.lines().collect();
    let missing = |key: &str| DatagenError::ScaffoldMismatch { missing: key.to_string() };

    let pseudo_reference = scaffold_field(&lines, "Paraphrase correct translation")
        .ok_or_else(|| missing("Paraphrase correct translation:"))?;
    let candidate = scaffold_field(&lines, "Incorrect Translation")
        .ok_or_else(|| missing("Incorrect Translation:"))?;

    let found = lines
        .iter()
        .filter(|l| {
            let l = l.trim_start();
            l.len() >= 15 && l.as_bytes()[..15].eq_ignore_ascii_case(b"error location ")
        })
        .count();
    if found != recipe.n_errors() {
        return Err(DatagenError::CountMismatch { expected: recipe.n_errors(), found });
    }

    let mut annotations = Vec::with_capacity(recipe.n_errors());
    for (i, err) in recipe.errors.iter().enumerate() {
        let index = (i + 1) as u32;
        let location_raw = scaffold_field(&lines, &format!("Error location {index}"))
            .ok_or_else(|| missing(&format!("Error location {index}:")))?;
        let explanation = scaffold_field(&lines, &format!("Explanation for error {index}"))
            .ok_or_else(|| missing(&format!("Explanation for error {index}:")))?;
        annotations.push(ErrorAnnotation {
            index,
            error_type: err.kind.prompt_description(),
            severity: err.severity,
            location_raw: location_raw.trim().to_string(),
            explanation: explanation.trim().to_string(),
        });
    }

    let report = DiagnosticReport {
        declared_count: annotations.len() as u32,
        annotations,
    };
    report
        .validate_strict()
        .map_err(|e| DatagenError::InvalidReport(e.to_string()))?;

    Ok(SyntheticRecord {
        raw_text: String::new(),
        pseudo_reference: strip_wrapping_quotes(pseudo_reference).to_string(),
        candidate: strip_wrapping_quotes(candidate).to_string(),
        report,
    })
}

/// Converts a synthetic record into a fine-tune example: the instruction
/// template filled with the pseudo reference and candidate, paired with the
/// canonical report text.
pub fn to_finetune_record(
    record: &SyntheticRecord,
    instruction_template: &str,
) -> Result<FinetuneRecord, DatagenError> {
    let target = render_report(&record.report)
        .map_err(|e| DatagenError::InvalidReport(e.to_string()))?;
    Ok(FinetuneRecord {
        input: templates::render_eval_prompt(
            instruction_template,
            &record.pseudo_reference,
            &record.candidate,
        ),
        target,
    })
}

/// Parses a quoted-list reply (`"News","Technical",...`); falls back to
/// comma/newline splitting with numbering stripped.
pub fn parse_name_list(raw: &str) -> Vec<String> {
    let quoted: Vec<String> = raw
        .split('"')
        .enumerate()
        .filter(|(i, _)| i % 2 == 1)
        .map(|(_, s)| s.trim().to_string())
        .filter(|s| !s.is_empty() && *s != ",")
        .collect();
    if !quoted.is_empty() {
        return quoted;
    }
    raw.split(['\n', ','])
        .map(strip_numbering)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parses a numbered-list reply (`1. Artificial Intelligence` ...).
pub fn parse_numbered_list(raw: &str) -> Vec<String> {
    raw.lines()
        .map(strip_numbering)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn strip_numbering(line: &str) -> &str {
    let line = line.trim();
    let digits = line.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &line[digits..];
        if let Some(rest) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            return rest.trim();
        }
    }
    line
}

/// Picks one sentence out of the candidates, uniformly.
pub fn select_sentence<R: Rng>(candidates: &[String], rng: &mut R) -> usize {
    assert!(!candidates.is_empty());
    rng.gen_range(0..candidates.len())
}

/// Provenance record written next to every generated corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatagenManifest {
    pub seed: u64,
    pub rng_algorithm: String,
    pub template_version: String,
    pub counts: BTreeMap<String, u64>,
}

impl DatagenManifest {
    pub fn new(seed: u64) -> Self {
        DatagenManifest {
            seed,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            template_version: templates::TEMPLATE_VERSION.to_string(),
            counts: BTreeMap::new(),
        }
    }
}

/// Parses a fine-tune target back into a report (round-trip validation).
pub fn reparse_target(target: &str) -> Result<DiagnosticReport, DatagenError> {
    parse_report(target, ParseMode::Strict)
        .map(|p| p.report)
        .map_err(|e| DatagenError::InvalidReport(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn taxonomy_has_exactly_18_leaves() {
        assert_eq!(ErrorKind::ALL.len(), 18);
        let by_cat = |cat| ErrorKind::ALL.iter().filter(|k| k.category() == cat).count();
        assert_eq!(by_cat(ErrorCategory::Accuracy), 4);
        assert_eq!(by_cat(ErrorCategory::Fluency), 5);
        assert_eq!(by_cat(ErrorCategory::Terminology), 2);
        assert_eq!(by_cat(ErrorCategory::Style), 1);
        assert_eq!(by_cat(ErrorCategory::LocaleConvention), 6);
    }

    #[test]
    fn descriptions_match_the_guidelines() {
        assert_eq!(
            ErrorKind::Addition.description(),
            "Translation includes information not present in the source."
        );
        assert_eq!(
            ErrorKind::Grammar.description(),
            "Problems with grammar, other than orthography."
        );
        assert_eq!(ErrorKind::TimeFormat.description(), "Wrong format for time expressions.");
        assert_eq!(
            ErrorKind::Addition.prompt_description(),
            "Translation includes information not present in the correct translation"
        );
    }

    #[test]
    fn recipes_are_deterministic_per_seed() {
        let a = ErrorRecipe::from_seed(42);
        let b = ErrorRecipe::from_seed(42);
        assert_eq!(a, b);
        assert!((1..=5).contains(&a.n_errors()));
        assert_eq!(a.n_major() + a.n_minor(), a.n_errors());
    }

    fn two_major_recipe() -> ErrorRecipe {
        ErrorRecipe {
            errors: vec![
                RecipeError { kind: ErrorKind::Addition, severity: Severity::Major },
                RecipeError { kind: ErrorKind::Grammar, severity: Severity::Major },
            ],
        }
    }

    #[test]
    fn injection_prompt_carries_the_error_count_clause() {
        let prompt = build_injection_prompt(
            fixtures::INJECTION_RAW_TEXT,
            &two_major_recipe(),
            "Chinese",
            "English",
        );
        assert!(prompt.contains("Please give 0 minor errors and 2 major errors"));
        assert!(prompt.contains("Major errors can significantly alter the meaning"));
        assert!(prompt.contains("contain two non-overlapping errors"));
        assert!(prompt.contains("You are translating from Chinese to English."));
        assert!(prompt
            .contains("Error type 1: Translation includes information not present in the correct translation"));
        assert!(prompt.contains("Error type 2: Problems with grammar, other than orthography"));
        assert_eq!(prompt.matches("Paraphrase correct translation:").count(), 1);
    }

    #[test]
    fn one_error_recipe_renders_one_slot() {
        let recipe = ErrorRecipe {
            errors: vec![RecipeError { kind: ErrorKind::Spelling, severity: Severity::Minor }],
        };
        let prompt = build_injection_prompt("Some text.", &recipe, "Chinese", "English");
        assert_eq!(prompt.matches("Error type").count(), 1);
        assert!(prompt.contains("Please give 1 minor errors and 0 major errors"));
        assert!(prompt.contains("contain one non-overlapping errors"));
    }

    #[test]
    fn parses_the_worked_injection_reply() {
        let record =
            parse_injection_response(fixtures::INJECTION_REPLY, &two_major_recipe()).unwrap();
        assert_eq!(record.report.annotations.len(), 2);
        assert!(record.report.annotations.iter().all(|a| a.severity == Severity::Major));
        assert_eq!(record.report.annotations[0].location_raw, "\"...giving enough examples...\"");
        assert!(record.pseudo_reference.starts_with("The art of writing"));
        assert!(record.candidate.starts_with("Writing for educational"));
        // strict round trip through the canonical grammar
        let target = render_report(&record.report).unwrap();
        assert_eq!(reparse_target(&target).unwrap(), record.report);
    }

    #[test]
    fn missing_scaffold_line_is_rejected() {
        let reply = fixtures::INJECTION_REPLY.replace("Incorrect Translation:", "Output:");
        let err = parse_injection_response(&reply, &two_major_recipe()).unwrap_err();
        assert_eq!(
            err,
            DatagenError::ScaffoldMismatch { missing: "Incorrect Translation:".into() }
        );
    }

    #[test]
    fn count_mismatch_against_the_recipe() {
        let recipe = ErrorRecipe {
            errors: vec![RecipeError { kind: ErrorKind::Addition, severity: Severity::Major }],
        };
        let err = parse_injection_response(fixtures::INJECTION_REPLY, &recipe).unwrap_err();
        assert_eq!(err, DatagenError::CountMismatch { expected: 1, found: 2 });
    }

    #[test]
    fn finetune_record_round_trips() {
        let record =
            parse_injection_response(fixtures::INJECTION_REPLY, &two_major_recipe()).unwrap();
        let ft = to_finetune_record(&record, templates::EVAL_INSTRUCTION).unwrap();
        assert!(ft.target.starts_with("Your Translation contains"));
        assert_eq!(ft.target.matches("Error type 2:").count(), 1);
        assert!(ft.input.contains(&record.pseudo_reference));
        assert_eq!(reparse_target(&ft.target).unwrap(), record.report);
    }

    #[test]
    fn domain_prompt_joins_seeds_with_a_final_and() {
        let seeds: Vec<String> =
            ["News", "Technical", "Legal"].iter().map(|s| s.to_string()).collect();
        let prompt = build_domains_prompt(&seeds, 100);
        assert!(prompt.contains("following format like this: News, Technical, and Legal"));
        assert!(prompt.contains("make sure all domains are very distinct from one another"));
    }

    #[test]
    fn topic_and_sentence_prompts_fill_slots() {
        let p = build_topics_prompt("Technical", 100);
        assert_eq!(
            p,
            "Find 100 topics in the Technical domain (make sure all topics are very distinct from one another)"
        );
        let p = build_sentences_prompt("5G Technology", 5, "English");
        assert!(p.starts_with("Give me 5 English sentences about 5G Technology"));
        assert!(p.ends_with("Only return English text."));
    }

    #[test]
    fn list_parsers_handle_both_reply_shapes() {
        let quoted = parse_name_list("\"News\",\"Technical\",\"Legal\"");
        assert_eq!(quoted, vec!["News", "Technical", "Legal"]);
        let numbered = parse_numbered_list("1. Artificial Intelligence\n2. Machine Learning\n");
        assert_eq!(numbered, vec!["Artificial Intelligence", "Machine Learning"]);
        let bare = parse_name_list("News, Technical");
        assert_eq!(bare, vec!["News", "Technical"]);
    }

    #[test]
    fn sentence_selection_is_seeded() {
        let candidates: Vec<String> = (0..5).map(|i| format!("s{i}")).collect();
        let mut rng_a = ChaCha8Rng::seed_from_u64(7);
        let mut rng_b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(select_sentence(&candidates, &mut rng_a), select_sentence(&candidates, &mut rng_b));
    }

    #[test]
    fn synthesized_reports_score_like_their_recipes() {
        use crate::scoring::{score_report, ScoreWeights};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let recipe = ErrorRecipe::sample(&mut rng);
            let reply = synth_reply(&recipe);
            let record = parse_injection_response(&reply, &recipe).unwrap();
            let score = score_report(&record.report, ScoreWeights::default());
            assert_eq!(score.value, -5 * recipe.n_major() as i64 - recipe.n_minor() as i64);
        }
    }

    /// Fabricates a scaffold-shaped reply for a recipe (test helper).
    fn synth_reply(recipe: &ErrorRecipe) -> String {
        let mut out = String::from(
            "Paraphrase correct translation: \"A paraphrased sentence.\"\nIncorrect Translation: \"A corrupted sentence.\"",
        );
        for (i, err) in recipe.errors.iter().enumerate() {
            let i = i + 1;
            out.push_str(&format!(
                "\nError type {i}: {}\nMajor/minor: {}\nError location {i}: \"span {i}\"\nExplanation for error {i}: Fabricated explanation {i}.",
                err.kind.prompt_description(),
                err.severity
            ));
        }
        out
    }
}
