//! Bundled worked examples: real evaluator outputs with known error counts
//! and severities, used across the test suites and handy as demo inputs.
//!
//! Each case is a reference/candidate pair plus the diagnostic report the
//! evaluator produced for it. `CASE_REPORTS` lists them together with the
//! error count stated in each report header.

use crate::report::EvalInstance;

pub const MISALIGN_REFERENCE: &str = "Normally, people wash hands by flushing hands with water, with a little soap and sanitizer at most; however, Li Qizhang and his classmates invented a set of \u{201c}equipment to wash hands with air\u{201d}.";
pub const MISALIGN_CANDIDATE: &str = "Ordinary people wash their hands with water, at most, wipe some soap and squeeze some hand sanitizer, while Li Qizhang and other students invented a set of \"air hand washing device\".";

/// Four errors; the first explanation aligns "with water" against "with air".
pub const MISALIGN_REPORT: &str = r#"Your Translation contains 4 errors:
Error type 1: Incorrect translation is missing content from the correct translation
Major/minor: Major
Error location 1: "with air"
Explanation for error 1: The incorrect translation changes the method of hand washing from "with water" to "with air," which significantly alters the meaning of the sentence.
Error type 2: Incorrect translation has stylistic problems
Major/minor: Major
Error location 2: "Ordinary people wash their hands with water, at most, wipe some soap and squeeze some hand sanitizer,"
Explanation for error 2: The incorrect translation has a choppy and awkward sentence structure, making it difficult to understand the intended meaning.
Error type 3: Incorrect translation includes information not present in the correct translation
Major/minor: Major
Error location 3: "other students"
Explanation for error 3: The incorrect translation adds information about other students, which is not present in the correct translation.
Error type 4: Incorrect translation does not accurately represent the correct translation
Major/minor: Minor
Error location 4: "air hand washing device"
Explanation for error 4: The incorrect translation uses "air hand washing device" instead of "air hand washing equipment," which is a less accurate representation of the correct translation."#;

pub const LOGIC_REFERENCE: &str = "This set of biological sensor uses the new material of graphene; its target is chemical elements, and its keen \u{201c}sense of smell\u{201d} enables it to reflect the health status of the body more in-depth and accurately.";
pub const LOGIC_CANDIDATE: &str = "This biosensor uses graphene, a new material, and its target is chemical elements. Its keen sense of smell enables it to reflect the health status more deeply and accurately.";

/// Two errors; the first explanation quotes the same phrase on both sides.
pub const LOGIC_REPORT: &str = r#"Your Translation contains 2 errors:
Error type 1: Incorrect translation is missing content from the correct translation
Major/minor: Major
Error location 1: "and its target is chemical elements"
Explanation for error 1: The incorrect translation omits the information about the biosensor's target being "chemical elements" and instead only mentions "chemical elements."
Error type 2: Incorrect translation has stylistic problems
Major/minor: Minor
Error location 2: "biosensor" instead of "biological sensor"
Explanation for error 2: The incorrect translation uses "biosensor" instead of "biological sensor," which is a minor stylistic error that does not significantly change the meaning but may be noticed by the reader."#;

pub const REPEAT_REFERENCE: &str = "And how much longer does it take for the restaurant to prepare it? Could could help me ask them?";
pub const REPEAT_CANDIDATE: &str = "Or how long before the restaurant is ready? Can you ask for me?";

/// Three errors; annotations 2 and 3 point at the same mistake.
pub const REPEAT_REPORT: &str = r#"Your Translation contains 3 errors:
Error type 1: Incorrect translation is missing content from the correct translation
Major/minor: Major
Error location 1: "Or how long before the restaurant is ready?"
Explanation for error 1: The incorrect translation omits the information about the wait time for the food, which is an important detail in the correct translation.
Error type 2: Incorrect translation has stylistic problems
Major/minor: Major
Error location 2: "Can you ask for me?"
Explanation for error 2: The incorrect translation changes the meaning of the sentence by implying that the person is asking the question on behalf of someone else, rather than themselves.
Error type 3: Problems with grammar, other than orthography
Major/minor: Minor
Error location 3: "could help me ask them?"
Explanation for error 3: The incorrect translation uses "could help me ask them" instead of "could you ask them for me?" The grammar is slightly off, but the meaning is still clear."#;

pub const MULTIPLE_REFERENCE: &str = "According to Shen Junfei, for example, in early inspection of cancer, if doctors cannot see clearly all the tumor tissues in a timely manner, the tumor cells will still spread.";
pub const MULTIPLE_CANDIDATE: &str = "Shen Junfei said, for example, if doctors can't see all the tumor tissues in time during the early examination of cancer, the cancer cells will spread later.";

/// Two errors; the first explanation bundles two distinct phrase fixes.
pub const MULTIPLE_REPORT: &str = r#"Your Translation contains 2 errors:
Error type 1: Incorrect translation has stylistic problems
Major/minor: Major
Error location 1: "Shen Junfei said, for example"
Explanation for error 1: The incorrect translation uses "said" instead of "stated" and "for example" instead of "such as", which makes the sentence less formal and less precise.
Error type 2: Incorrect translation includes information not present in the correct translation
Major/minor: Major
Error location 2: "later"
Explanation for error 2: The incorrect translation adds the word "later" which is not present in the correct translation and changes the meaning by implying that the spread of cancer cells is delayed, rather than happening sooner."#;

pub const CRITIC_REFERENCE: &str = "State-owned enterprises and advantageous private enterprises entered the revolutionary base area of south Jiangxi.";
pub const CRITIC_CANDIDATE: &str = "State-owned enterprises and dominant private enterprises entered the old revolutionary district of southern Jiangxi.";

/// The worked critique example, in canonical report form. Severities follow
/// the judge's Q4 verdicts (major-error, minor-error).
pub const CRITIC_REPORT: &str = r#"Your Translation contains 2 errors:
Error type 1: Terminology is non-standard or does not fit the context. Terminology is used inconsistently
Major/minor: Major
Error location 1: "old revolutionary district"
Explanation for error 1: The correct term should be "new revolutionary base area" which refers to the area where the revolution started in 1927, not "old revolutionary district" which does not convey the same meaning.
Error type 2: Incorrect translation includes information not present in the correct translation
Major/minor: Minor
Error location 2: "dominant"
Explanation for error 2: The word "dominant" is used instead of "privileged," which adds information that is not present in the correct translation, but does not change the overall meaning."#;

/// The judge's reply for the critique example above, verbatim.
pub const CRITIC_JUDGE_REPLY: &str = r#"{
  "Err1": {
    "Q1": "old revolutionary district",
    "Q2": ["old revolutionary district", "new revolutionary base area"],
    "Q3": "Yes",
    "Q4": "major-error",
    "Q5": "Yes",
    "Q6": "Yes"
  },
  "Err2": {
    "Q1": "dominant",
    "Q2": ["dominant", "privileged"],
    "Q3": "Yes",
    "Q4": "minor-error",
    "Q5": "Yes",
    "Q6": "Yes"
  },
  "Q7": "No, 0"
}"#;

pub const NO_ERROR_REFERENCE: &str = "Summarizing foreign media reports, the IAEA report states that Iran\u{2019}s Natanz Nuclear Facility's advanced centrifuge is \u{201c}accumulating or ready to accumulate enriched uranium\u{201d}.";
pub const NO_ERROR_CANDIDATE: &str = "According to comprehensive foreign media reports, the IAEA report pointed out that the advanced centrifuges at Iran's Natanz nuclear facility are \"accumulating or are ready to accumulate enriched uranium\".";

/// The raw text used in the worked error-injection exchange.
pub const INJECTION_RAW_TEXT: &str = "The art of writing for educational publications involves striking a delicate balance between providing enough detail to be useful and overwhelming the reader with too much information.";

/// The generator's reply for the worked error-injection exchange (two
/// major errors: an addition and a grammar problem).
pub const INJECTION_REPLY: &str = r#"Paraphrase correct translation: "The art of writing for educational publications involves striking a delicate balance between providing enough detail to be useful and overwhelming the reader with too much information."
Incorrect Translation: "Writing for educational publications is about finding a balance between giving enough examples to be useful and making the reader bored with too many details."
Error type 1: Translation includes information not present in the correct translation
Major/minor: Major
Error location 1: "...giving enough examples..."
Explanation for error 1: The correct translation talks about providing enough detail, not specific examples, which changes the meaning of the sentence.
Error type 2: Problems with grammar, other than orthography
Major/minor: Major
Error location 2: "...making the reader bored with too many details."
Explanation for error 2: The correct translation mentions overwhelming the reader with too much information, not making them bored with too many details. This change in phrasing alters the meaning of the sentence."#;

/// (name, report text, declared error count)
pub const CASE_REPORTS: &[(&str, &str, u32)] = &[
    ("misalign", MISALIGN_REPORT, 4),
    ("logic", LOGIC_REPORT, 2),
    ("repeat", REPEAT_REPORT, 3),
    ("multiple", MULTIPLE_REPORT, 2),
    ("critic", CRITIC_REPORT, 2),
];

/// The case studies as evaluation instances, keyed by short stable ids.
pub fn case_instances() -> Vec<(EvalInstance, &'static str)> {
    vec![
        (
            EvalInstance {
                instance_id: "case-misalign".into(),
                reference: MISALIGN_REFERENCE.into(),
                candidate: MISALIGN_CANDIDATE.into(),
                source: None,
            },
            MISALIGN_REPORT,
        ),
        (
            EvalInstance {
                instance_id: "case-logic".into(),
                reference: LOGIC_REFERENCE.into(),
                candidate: LOGIC_CANDIDATE.into(),
                source: None,
            },
            LOGIC_REPORT,
        ),
        (
            EvalInstance {
                instance_id: "case-repeat".into(),
                reference: REPEAT_REFERENCE.into(),
                candidate: REPEAT_CANDIDATE.into(),
                source: None,
            },
            REPEAT_REPORT,
        ),
        (
            EvalInstance {
                instance_id: "case-multiple".into(),
                reference: MULTIPLE_REFERENCE.into(),
                candidate: MULTIPLE_CANDIDATE.into(),
                source: None,
            },
            MULTIPLE_REPORT,
        ),
        (
            EvalInstance {
                instance_id: "case-critic".into(),
                reference: CRITIC_REFERENCE.into(),
                candidate: CRITIC_CANDIDATE.into(),
                source: None,
            },
            CRITIC_REPORT,
        ),
    ]
}
