use serde::{Deserialize, Serialize};

use super::critique::Verdict;
use crate::error::{Error, Result};
use crate::modelio::SuffixConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuffixLabel {
    Good,
    Bad,
}

impl SuffixLabel {
    pub fn text(self, config: &SuffixConfig) -> &str {
        match self {
            SuffixLabel::Good => &config.good_label,
            SuffixLabel::Bad => &config.bad_label,
        }
    }
}

impl TryFrom<Verdict> for SuffixLabel {
    type Error = Error;

    fn try_from(v: Verdict) -> Result<Self> {
        match v {
            Verdict::Good => Ok(SuffixLabel::Good),
            Verdict::Bad => Ok(SuffixLabel::Bad),
            Verdict::Unparseable => Err(Error::invalid("suffix records need a GOOD or BAD verdict")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuffixRecord {
    pub input_text: String,
    pub response: String,
    pub labeled_text: String,
    pub label: SuffixLabel,
}

/// One line of the suffix training set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuffixExample {
    pub text: String,
    pub label: SuffixLabel,
}

impl SuffixRecord {
    pub fn example(&self) -> SuffixExample {
        SuffixExample {
            text: self.labeled_text.clone(),
            label: self.label,
        }
    }
}

pub fn build_suffix_record(
    instruction: &str,
    source: &str,
    response: &str,
    verdict: Verdict,
    config: &SuffixConfig,
) -> Result<SuffixRecord> {
    config.validate()?;
    for label in [&config.good_label, &config.bad_label] {
        if label.contains(&config.delimiter) {
            return Err(Error::invalid("suffix labels must not contain the delimiter"));
        }
    }
    let label = SuffixLabel::try_from(verdict)?;
    let input_text = format!("{instruction}\n{source}");
    let labeled_text = format!("{}{}", config.scoring_prefix(&input_text, response), label.text(config));
    Ok(SuffixRecord {
        input_text,
        response: response.to_owned(),
        labeled_text,
        label,
    })
}

/// Splits `labeled_text` at the last delimiter into the scored body
/// (`input_text + "\n" + response`) and its label.
pub fn decompose(labeled_text: &str, config: &SuffixConfig) -> Result<(String, SuffixLabel)> {
    let (body, tail) = labeled_text
        .rsplit_once(config.delimiter.as_str())
        .ok_or_else(|| Error::invalid("labeled text has no delimiter"))?;
    let label = if tail == config.good_label {
        SuffixLabel::Good
    } else if tail == config.bad_label {
        SuffixLabel::Bad
    } else {
        return Err(Error::invalid(format!("unknown suffix label `{tail}`")));
    };
    Ok((body.to_owned(), label))
}

/// Recovers (instruction, source, response) from a body whose instruction
/// and response are single lines; the source may span lines.
pub fn split_body(body: &str) -> Option<(&str, &str, &str)> {
    let (instruction, rest) = body.split_once('\n')?;
    let (source, response) = rest.rsplit_once('\n')?;
    Some((instruction, source, response))
}
