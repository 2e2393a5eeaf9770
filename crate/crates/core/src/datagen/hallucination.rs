//! Few-shot prompting that makes an LLM keep inventing (source, rewrite,
//! instruction) blocks after a seed query, and the parser for its output.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::template::render;
use crate::error::{Error, Result};

const DEFAULT_TEMPLATE: &str = "\
Below are short everyday messages. Each Source is followed by a Rewrite and the Prompt that asked for it.

Query: asking a coworker to cover a shift
Source: hey can u cover my shift sat, something came up
Rewrite: Hi, would you be able to cover my Saturday shift? Something unexpected came up.
Prompt: Make the text more formal.
Source: I wanted to let you know that I will not be able to make it to the shift on Saturday because something came up at home.
Rewrite: I can't make Saturday's shift; something came up at home.
Prompt: Make the text shorter.

Query: thanking a friend for a gift
Source: thanks for the mug!
Rewrite: Thank you so much for the mug! It is perfect for my morning coffee and I think of you every time I use it.
Prompt: Expand this text.
Source: thank you for the present it was realy thoughtfull
Rewrite: Thank you for the present, it was really thoughtful.
Prompt: Please proofread this sentence.
Source: Your gift made my whole week better.
Rewrite: The present you gave me brightened my entire week.
Prompt: Rephrase the text.

Query: {query}
Source:";

/// A prompt template with a `{query}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallucinationTemplate {
    pub id: String,
    pub text: String,
}

impl HallucinationTemplate {
    pub fn builtin(id: &str) -> Result<Self> {
        match id {
            "default" => Ok(Self {
                id: id.into(),
                text: DEFAULT_TEMPLATE.into(),
            }),
            other => Err(Error::invalid(format!("unknown hallucination template `{other}`"))),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self {
            id: path.display().to_string(),
            text: std::fs::read_to_string(path)?,
        })
    }

    /// Builtin id or a path to a template file.
    pub fn resolve(id_or_path: &str) -> Result<Self> {
        let path = Path::new(id_or_path);
        if path.is_file() {
            Self::from_file(path)
        } else {
            Self::builtin(id_or_path)
        }
    }
}

pub fn build_hallucination_prompt(seed_query: &str, template: &HallucinationTemplate) -> Result<String> {
    let seed = seed_query.trim();
    if seed.is_empty() {
        return Err(Error::invalid("seed query must be non-empty"));
    }
    render(&template.text, &[("query", seed)])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedTriple {
    pub source: String,
    pub rewrite: String,
    pub instruction: String,
    pub seed_query: String,
    pub raw_block: String,
}

impl GeneratedTriple {
    /// Renders the triple as a labeled block that parses back to itself.
    pub fn to_block(&self) -> String {
        format!(
            "Source: {}\nRewrite: {}\nPrompt: {}\n",
            self.source, self.rewrite, self.instruction
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutcome {
    pub triples: Vec<GeneratedTriple>,
    /// Blocks discarded for missing fields or source == rewrite.
    pub dropped: usize,
    /// Complete blocks removed as (source, instruction) duplicates.
    pub duplicates: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Source,
    Rewrite,
    Prompt,
}

#[derive(Default)]
struct Block {
    source: Option<String>,
    rewrite: Option<String>,
    prompt: Option<String>,
    raw: Vec<String>,
}

impl Block {
    fn slot(&mut self, field: Field) -> &mut Option<String> {
        match field {
            Field::Source => &mut self.source,
            Field::Rewrite => &mut self.rewrite,
            Field::Prompt => &mut self.prompt,
        }
    }

    fn is_empty(&self) -> bool {
        self.source.is_none() && self.rewrite.is_none() && self.prompt.is_none()
    }
}

enum Line<'a> {
    Query(&'a str),
    Field(Field, &'a str),
    Text(&'a str),
}

fn classify_line(line: &str) -> Line<'_> {
    let trimmed = line.trim_start();
    for (label, kind) in [
        ("query:", None),
        ("source:", Some(Field::Source)),
        ("rewrite:", Some(Field::Rewrite)),
        ("prompt:", Some(Field::Prompt)),
    ] {
        if trimmed.len() >= label.len()
            && trimmed.is_char_boundary(label.len())
            && trimmed[..label.len()].eq_ignore_ascii_case(label)
        {
            let value = &trimmed[label.len()..];
            return match kind {
                None => Line::Query(value),
                Some(field) => Line::Field(field, value),
            };
        }
    }
    Line::Text(line)
}

/// Extracts labeled Source/Rewrite/Prompt blocks from an LLM continuation.
///
/// Labels are case-insensitive and may appear in any order within a block;
/// a label seen twice starts a new block, as does a `Query:` line. Values may
/// continue on following lines until a blank line or the next label.
pub fn parse_hallucinated_triples(continuation: &str) -> ParseOutcome {
    let mut outcome = ParseOutcome::default();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut query = String::new();
    let mut block = Block::default();
    let mut active: Option<Field> = None;

    let mut finish = |block: &mut Block, query: &str, outcome: &mut ParseOutcome| {
        let done = std::mem::take(block);
        if done.is_empty() {
            return;
        }
        let clean = |v: &Option<String>| v.as_deref().map(str::trim).unwrap_or("").to_owned();
        let (source, rewrite, instruction) = (clean(&done.source), clean(&done.rewrite), clean(&done.prompt));
        if source.is_empty() || rewrite.is_empty() || instruction.is_empty() || source == rewrite {
            outcome.dropped += 1;
            return;
        }
        if !seen.insert((source.clone(), instruction.clone())) {
            outcome.duplicates += 1;
            return;
        }
        outcome.triples.push(GeneratedTriple {
            source,
            rewrite,
            instruction,
            seed_query: query.to_owned(),
            raw_block: done.raw.join("\n"),
        });
    };

    for line in continuation.lines() {
        match classify_line(line) {
            Line::Query(q) => {
                finish(&mut block, &query, &mut outcome);
                query = q.trim().to_owned();
                active = None;
            }
            Line::Field(field, value) => {
                if block.slot(field).is_some() {
                    finish(&mut block, &query, &mut outcome);
                }
                *block.slot(field) = Some(value.trim().to_owned());
                block.raw.push(line.to_owned());
                active = Some(field);
            }
            Line::Text(text) if text.trim().is_empty() => active = None,
            Line::Text(text) => {
                if let Some(field) = active {
                    let slot = block.slot(field).get_or_insert_with(String::new);
                    if !slot.is_empty() {
                        slot.push('\n');
                    }
                    slot.push_str(text.trim());
                    block.raw.push(line.to_owned());
                }
            }
        }
    }
    finish(&mut block, &query, &mut outcome);
    outcome
}
