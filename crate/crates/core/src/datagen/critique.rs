//! Chain-of-thought judge prompt, verdict parsing and unanimous voting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::template::render;
use crate::error::{Error, Result};
use crate::modelio::{generate, GenerationParams, TextBackend};

pub const CRITIQUE_TEMPLATE: &str = "\
Judge whether the #Response rephrases #Context and complete the rewriting task in #Comment. Choose among two choices: GOOD, BAD.

#Comment: Make the text more formal.
#Context: Do we want to go to movie now? This one should be pretty good.
#Response: Want to go to movie? It should be a great one.
#Choose (GOOD) or (BAD): BAD
#Explanation: Response is not more formal than Context.

#Comment: Simplify the text.
#Context: Ric Flair had a match against Mitch of the Spirit Squad. All five members of the Spirit Squad were present, so Flair brought out Rowdy Roddy Piper, Money Inc., and Arn Anderson as his backup. Flair's allies kept the Squad in check, enabling Flair to win the match.
#Response: Ric Flair defeated Mitch of the Spirit Squad with help from Rowdy Roddy Piper, Money Inc., and Arn Anderson.
#Choose (GOOD) or (BAD): GOOD
#Explanation: Response is shorter than Context Response preserves overall meaning.

#Comment: Elaborate the following text.
#Context: Iuter X Vanguard collaboration T-shirt by Giorgio Di Salvo. Octopus print. All Iuter apparel is Made in Italy.
#Response: This T-shirt is part of the collaboration between Iuter and Vanguard. It is designed by Giorgio Di Salvo and features an octopus print. All Iuter apparel is Made in Italy.
#Choose (GOOD) or (BAD): GOOD
#Explanation: Response rephrases and elaborates the context with preserved meaning.

#Comment: Paraphrase the source text.
#Context: He likes the dogs a lot, according to his parents.
#Response: He is fond of the dogs.
#Choose (GOOD) or (BAD): BAD
#Explanation: Response did not preserve all the meaning of Context. The fact \"according to his parents\" is missing in Response.

#Comment: Fix the grammar and spelling error if there is any.
#Context: Native is very fortunate.
#Response: Native people are very fortunate.
#Choose (GOOD) or (BAD): GOOD
#Explanation: Response fix the grammar errors in the Context.

#Comment: {comment}
#Context: {input}
#Response: {output_best}
#Choose (GOOD) or (BAD):";

pub fn build_critique_prompt(instruction: &str, source: &str, response: &str) -> Result<String> {
    for (name, value) in [("instruction", instruction), ("source", source), ("response", response)] {
        if value.trim().is_empty() {
            return Err(Error::invalid(format!("{name} must be non-empty")));
        }
    }
    render(
        CRITIQUE_TEMPLATE,
        &[("comment", instruction), ("input", source), ("output_best", response)],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Good,
    Bad,
    Unparseable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Good => "GOOD",
            Verdict::Bad => "BAD",
            Verdict::Unparseable => "UNPARSEABLE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GOOD" => Ok(Verdict::Good),
            "BAD" => Ok(Verdict::Bad),
            "UNPARSEABLE" => Ok(Verdict::Unparseable),
            other => Err(Error::invalid(format!("unknown verdict `{other}`"))),
        }
    }
}

const EXPLANATION_MARKER: &str = "#Explanation";

/// First standalone `GOOD` or `BAD` ahead of any `#Explanation` marker.
pub fn parse_verdict(judge_output: &str) -> Verdict {
    let head = judge_output
        .find(EXPLANATION_MARKER)
        .map_or(judge_output, |i| &judge_output[..i]);
    let standalone = |word: &str| {
        head.match_indices(word)
            .find(|(i, w)| {
                let before = head[..*i].chars().next_back();
                let after = head[i + w.len()..].chars().next();
                !before.is_some_and(is_word_char) && !after.is_some_and(is_word_char)
            })
            .map(|(i, _)| i)
    };
    match (standalone("GOOD"), standalone("BAD")) {
        (Some(g), Some(b)) if b < g => Verdict::Bad,
        (Some(_), _) => Verdict::Good,
        (None, Some(_)) => Verdict::Bad,
        (None, None) => Verdict::Unparseable,
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn explanation(judge_output: &str) -> Option<String> {
    let i = judge_output.find(EXPLANATION_MARKER)?;
    let rest = judge_output[i + EXPLANATION_MARKER.len()..]
        .trim_start_matches(':')
        .trim();
    (!rest.is_empty()).then(|| rest.to_owned())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CritiqueVerdict {
    pub label: Verdict,
    pub votes: Vec<Verdict>,
    pub explanation: Option<String>,
}

impl CritiqueVerdict {
    /// GOOD only on unanimous GOOD votes; UNPARSEABLE only if no vote parsed.
    pub fn from_votes(votes: Vec<Verdict>, explanation: Option<String>) -> Self {
        let label = if !votes.is_empty() && votes.iter().all(|v| *v == Verdict::Good) {
            Verdict::Good
        } else if !votes.is_empty() && votes.iter().all(|v| *v == Verdict::Unparseable) {
            Verdict::Unparseable
        } else {
            Verdict::Bad
        };
        Self {
            label,
            votes,
            explanation,
        }
    }

    pub fn keep(&self) -> bool {
        self.label == Verdict::Good
    }
}

/// Samples `k` judge outputs for one (instruction, source, response) and
/// combines them under the unanimity rule.
pub fn judge(
    judge_backend: &dyn TextBackend,
    instruction: &str,
    source: &str,
    response: &str,
    k: usize,
    params: &GenerationParams,
) -> Result<CritiqueVerdict> {
    if k < 1 {
        return Err(Error::invalid("number of judges k must be >= 1"));
    }
    let prompt = build_critique_prompt(instruction, source, response)?;
    let outputs = generate(judge_backend, &prompt, &params.with_samples(k))?;
    let votes = outputs.iter().map(|o| parse_verdict(&o.text)).collect();
    let explanation = outputs.iter().find_map(|o| explanation(&o.text));
    Ok(CritiqueVerdict::from_votes(votes, explanation))
}
