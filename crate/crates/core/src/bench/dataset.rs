use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reward::RewriteTask;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteExample {
    pub id: String,
    pub task: RewriteTask,
    pub instruction: String,
    pub source: String,
    pub targets: Vec<String>,
}

impl RewriteExample {
    pub fn first_target(&self) -> &str {
        &self.targets[0]
    }

    fn validate(&self) -> std::result::Result<(), String> {
        for (name, value) in [
            ("id", &self.id),
            ("instruction", &self.instruction),
            ("source", &self.source),
        ] {
            if value.trim().is_empty() {
                return Err(format!("field `{name}` is empty"));
            }
        }
        if self.targets.is_empty() {
            return Err("field `targets` is empty".into());
        }
        if let Some(i) = self.targets.iter().position(|t| t.trim().is_empty()) {
            return Err(format!("target {i} is empty"));
        }
        Ok(())
    }
}

fn line_error(line: usize, message: impl std::fmt::Display) -> Error {
    Error::Validation(format!("line {line}: {message}"))
}

/// Parses dataset JSONL; blank lines are skipped but still counted.
pub fn parse_dataset(text: &str) -> Result<Vec<RewriteExample>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let example: RewriteExample = serde_json::from_str(line).map_err(|e| line_error(i + 1, e))?;
        example.validate().map_err(|e| line_error(i + 1, e))?;
        if !seen.insert(example.id.clone()) {
            return Err(line_error(i + 1, format!("duplicate id `{}`", example.id)));
        }
        out.push(example);
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<RewriteExample>> {
    parse_dataset(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub prediction: String,
}

pub fn parse_predictions(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: Prediction = serde_json::from_str(line).map_err(|e| line_error(i + 1, e))?;
        if out.insert(p.id.clone(), p.prediction).is_some() {
            return Err(line_error(i + 1, format!("duplicate id `{}`", p.id)));
        }
    }
    Ok(out)
}

pub fn load_predictions(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_predictions(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopyMode {
    Source,
    Target,
}

impl std::str::FromStr for CopyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" => Ok(CopyMode::Source),
            "target" => Ok(CopyMode::Target),
            other => Err(Error::invalid(format!(
                "unknown copy mode `{other}` (source or target)"
            ))),
        }
    }
}

/// Baseline predictions that copy the source or the first target.
pub fn copy_predictions(examples: &[RewriteExample], mode: CopyMode) -> BTreeMap<String, String> {
    examples
        .iter()
        .map(|e| {
            let text = match mode {
                CopyMode::Source => e.source.clone(),
                CopyMode::Target => e.first_target().to_owned(),
            };
            (e.id.clone(), text)
        })
        .collect()
}
