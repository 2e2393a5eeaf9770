use serde::Serialize;

use super::dataset::RewriteExample;
use crate::error::{Error, Result};
use crate::metrics::{edit_ratio, length_ratio};
use crate::reward::{NliScorer, RewriteTask};
use crate::textcore::{tokenize, word_count, CasingMode};

/// One row of the dataset statistics table. Word counts and ratios are
/// per-example means; ratios compare the first target to the source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub task: String,
    pub size: usize,
    pub ins: f64,
    pub sou: f64,
    pub tar: f64,
    pub len_ratio: f64,
    pub edit_ratio: f64,
    pub nli_st: Option<f64>,
    pub nli_ts: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    /// Tasks present in the data, in canonical order, followed by "all".
    pub rows: Vec<StatsRow>,
}

impl DatasetStats {
    pub fn row(&self, task: &str) -> Option<&StatsRow> {
        self.rows.iter().find(|r| r.task == task)
    }
}

struct PerExample {
    task: RewriteTask,
    values: [f64; 5],
    nli: Option<(f64, f64)>,
}

fn measure(e: &RewriteExample, scorer: Option<&dyn NliScorer>) -> Result<PerExample> {
    let target = e.first_target();
    let src = tokenize(&e.source, CasingMode::Preserve);
    let tgt = tokenize(target, CasingMode::Preserve);
    let degenerate = |err: Error| Error::Validation(format!("example `{}`: {err}", e.id));
    let nli = match scorer {
        Some(s) => Some((s.score(&e.source, target)?, s.score(target, &e.source)?)),
        None => None,
    };
    Ok(PerExample {
        task: e.task,
        values: [
            word_count(&e.instruction) as f64,
            src.len() as f64,
            tgt.len() as f64,
            length_ratio(&src, &tgt).map_err(degenerate)?,
            edit_ratio(&src, &tgt).map_err(degenerate)?,
        ],
        nli,
    })
}

fn aggregate(task: &str, items: &[&PerExample]) -> StatsRow {
    let n = items.len() as f64;
    let mean = |k: usize| items.iter().map(|p| p.values[k]).sum::<f64>() / n;
    let nli_mean = |pick: fn(&(f64, f64)) -> f64| -> Option<f64> {
        let values: Option<Vec<f64>> = items.iter().map(|p| p.nli.as_ref().map(pick)).collect();
        values.map(|v| v.iter().sum::<f64>() / n)
    };
    StatsRow {
        task: task.to_owned(),
        size: items.len(),
        ins: mean(0),
        sou: mean(1),
        tar: mean(2),
        len_ratio: mean(3),
        edit_ratio: mean(4),
        nli_st: nli_mean(|p| p.0),
        nli_ts: nli_mean(|p| p.1),
    }
}

pub fn dataset_stats(examples: &[RewriteExample], scorer: Option<&dyn NliScorer>) -> Result<DatasetStats> {
    if examples.is_empty() {
        return Err(Error::invalid("dataset is empty"));
    }
    let measured = examples
        .iter()
        .map(|e| measure(e, scorer))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for task in RewriteTask::ALL {
        let items: Vec<&PerExample> = measured.iter().filter(|p| p.task == task).collect();
        if !items.is_empty() {
            rows.push(aggregate(task.as_str(), &items));
        }
    }
    rows.push(aggregate("all", &measured.iter().collect::<Vec<_>>()));
    Ok(DatasetStats { rows })
}
