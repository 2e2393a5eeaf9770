use super::template::render;
use crate::error::{Error, Result};
use crate::modelio::{generate, GenerationParams, TextBackend};
use crate::reward::RewriteTask;

/// Instruction samples per task, used as few-shot exemplars.
pub const INSTRUCTION_SAMPLES: &[(RewriteTask, &str)] = &[
    (RewriteTask::Formalize, "Make the text formal."),
    (RewriteTask::Formalize, "Make this sentence more formal."),
    (RewriteTask::Formalize, "Formalize the text."),
    (RewriteTask::Formalize, "Rewrite this sentence in a more formal way."),
    (RewriteTask::Shorten, "Make the text more concise."),
    (RewriteTask::Shorten, "Rewrite this text in concise language."),
    (RewriteTask::Shorten, "Make the text shorter."),
    (RewriteTask::Shorten, "Make this sound more concise"),
    (RewriteTask::Elaborate, "Make this more verbose."),
    (RewriteTask::Elaborate, "Expand this text."),
    (RewriteTask::Elaborate, "Rephrase this sentence in a more expand style."),
    (RewriteTask::Elaborate, "Make the text more elaborated."),
    (RewriteTask::Paraphrase, "Rewrite this sentence."),
    (RewriteTask::Paraphrase, "Rephrase the text."),
    (RewriteTask::Paraphrase, "Paraphrase the following text."),
    (RewriteTask::Paraphrase, "Rewrite, reword and reorganize. way."),
    (
        RewriteTask::Proofread,
        "Fix the grammar error or spelling error of the following text.",
    ),
    (
        RewriteTask::Proofread,
        "Correct the following sentence if there is any spelling or grammar error.",
    ),
    (RewriteTask::Proofread, "Please proofread this sentence."),
];

/// Checked in order; paraphrase cues come last because "rewrite" and
/// "rephrase" also appear in instructions for the other tasks.
const KEYWORDS: &[(RewriteTask, &[&str])] = &[
    (
        RewriteTask::Proofread,
        &["proofread", "grammar", "spelling", "typo", "correct"],
    ),
    (
        RewriteTask::Shorten,
        &["short", "concise", "brief", "condense", "simplif", "trim"],
    ),
    (
        RewriteTask::Elaborate,
        &["elaborat", "expand", "verbose", "detail", "longer"],
    ),
    (RewriteTask::Formalize, &["formal", "professional", "polite"]),
    (
        RewriteTask::Paraphrase,
        &["paraphrase", "rephrase", "reword", "rewrite"],
    ),
];

pub fn classification_prompt(instruction: &str) -> Result<String> {
    let mut template = String::from(
        "Classify each rewrite instruction as one of: formalize, shorten, elaborate, paraphrase, proofread.\n\n",
    );
    for (task, sample) in INSTRUCTION_SAMPLES {
        template.push_str(&format!("Instruction: {sample}\nTask: {task}\n\n"));
    }
    template.push_str("Now classify this one.\nInstruction: {instruction}\nTask:");
    render(&template, &[("instruction", instruction.trim())])
}

/// Reads a task name from the first word of the model output.
pub fn parse_task_label(output: &str) -> Option<RewriteTask> {
    let word = output.split_whitespace().next()?;
    word.trim_matches(|c: char| !c.is_alphanumeric()).parse().ok()
}

pub fn keyword_task(instruction: &str) -> Option<RewriteTask> {
    let lower = instruction.to_lowercase();
    KEYWORDS
        .iter()
        .find(|(_, cues)| cues.iter().any(|cue| lower.contains(cue)))
        .map(|(task, _)| *task)
}

/// Asks the backend for a task label, retrying once on an unreadable answer.
pub fn classify_task(instruction: &str, backend: &dyn TextBackend) -> Result<RewriteTask> {
    if instruction.trim().is_empty() {
        return Err(Error::invalid("instruction must be non-empty"));
    }
    let prompt = classification_prompt(instruction)?;
    let params = GenerationParams {
        temperature: 0.0,
        num_samples: 1,
        max_tokens: 8,
        logprobs: false,
    };
    let mut last = String::new();
    for _ in 0..2 {
        let out = generate(backend, &prompt, &params)?;
        last = out[0].text.clone();
        if let Some(task) = parse_task_label(&last) {
            return Ok(task);
        }
    }
    if backend.offline_fallback() {
        if let Some(task) = keyword_task(instruction) {
            return Ok(task);
        }
    }
    Err(Error::Classification(format!(
        "no task label in `{}` for instruction `{}`",
        last.trim(),
        instruction.trim()
    )))
}
