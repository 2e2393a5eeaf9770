use std::collections::BTreeMap;

use serde::Serialize;

use super::dataset::RewriteExample;
use crate::datagen::{judge, Verdict};
use crate::error::{Error, Result};
use crate::metrics::{bleu, edit_ratio, length_ratio, sari, update_rouge, BleuStats};
use crate::modelio::{map_bounded, GenerationParams, TextBackend};
use crate::reward::{NliScorer, RewriteTask};
use crate::textcore::{tokenize, CasingMode};

/// Edit ratios above this often come from hallucinated content.
pub const HALLUCINATION_EDIT_RATIO: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleDetail {
    pub id: String,
    pub task: RewriteTask,
    pub prediction: String,
    /// Against the source.
    pub edit_ratio: f64,
    pub length_ratio: f64,
    /// Against the first target.
    pub target_edit_ratio: f64,
    pub nli: f64,
    pub reversed_nli: f64,
    pub sari: f64,
    pub bleu: f64,
    pub update_rouge: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub flagged: bool,
}

/// Aggregate metrics for one system. `sari`, `bleu` and `update_rouge` are
/// fractions; BLEU is corpus-level and every other column is a mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub system: String,
    pub size: usize,
    pub edit_ratio: f64,
    pub length_ratio: f64,
    pub target_edit_ratio: f64,
    pub nli: f64,
    pub reversed_nli: f64,
    pub sari: f64,
    pub bleu: f64,
    pub update_rouge: f64,
    pub success_rate: Option<f64>,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub row: EvalRow,
    pub details: Vec<ExampleDetail>,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub system: String,
    /// Judge votes per prediction; success needs all of them GOOD.
    pub judge_k: usize,
    pub judge_params: GenerationParams,
    pub workers: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            system: "system".into(),
            judge_k: 1,
            judge_params: GenerationParams::default(),
            workers: 4,
        }
    }
}

fn detail(e: &RewriteExample, prediction: &str, scorer: &dyn NliScorer) -> Result<(ExampleDetail, BleuStats)> {
    let src = tokenize(&e.source, CasingMode::Preserve);
    let pred = tokenize(prediction, CasingMode::Preserve);
    let tgt = tokenize(e.first_target(), CasingMode::Preserve);
    let context = |err: Error| Error::Validation(format!("example `{}`: {err}", e.id));
    let er = edit_ratio(&src, &pred).map_err(context)?;
    let d = ExampleDetail {
        id: e.id.clone(),
        task: e.task,
        prediction: prediction.to_owned(),
        edit_ratio: er,
        length_ratio: length_ratio(&src, &pred).map_err(context)?,
        target_edit_ratio: edit_ratio(&tgt, &pred).map_err(context)?,
        nli: scorer.score(&e.source, prediction)?,
        reversed_nli: scorer.score(prediction, &e.source)?,
        sari: sari(&e.source, prediction, &e.targets)?,
        bleu: bleu(prediction, &e.targets)?,
        update_rouge: update_rouge(&e.source, prediction, &e.targets)?,
        verdict: None,
        flagged: er > HALLUCINATION_EDIT_RATIO,
    };
    Ok((d, BleuStats::from_texts(prediction, &e.targets)?))
}

/// Scores every prediction and aggregates in id order, so the result does
/// not depend on the order of `examples`.
pub fn evaluate(
    examples: &[RewriteExample],
    predictions: &BTreeMap<String, String>,
    scorer: &dyn NliScorer,
    judge_backend: Option<&dyn TextBackend>,
    options: &EvalOptions,
) -> Result<Evaluation> {
    if examples.is_empty() {
        return Err(Error::invalid("no examples to evaluate"));
    }
    let missing: Vec<&str> = examples
        .iter()
        .filter(|e| !predictions.contains_key(&e.id))
        .map(|e| e.id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "missing predictions for: {}",
            missing.join(", ")
        )));
    }

    let measured = map_bounded(examples, options.workers, |e| detail(e, &predictions[&e.id], scorer));
    let mut details = Vec::with_capacity(examples.len());
    let mut stats = Vec::with_capacity(examples.len());
    for m in measured {
        let (d, s) = m?;
        details.push(d);
        stats.push(s);
    }

    if let Some(backend) = judge_backend {
        let verdicts = map_bounded(examples, backend.max_in_flight(), |e| {
            let prediction = &predictions[&e.id];
            if prediction.trim().is_empty() {
                return Ok(Verdict::Bad);
            }
            judge(
                backend,
                &e.instruction,
                &e.source,
                prediction,
                options.judge_k,
                &options.judge_params,
            )
            .map(|v| v.label)
        });
        for (d, v) in details.iter_mut().zip(verdicts) {
            d.verdict = Some(v?);
        }
    }

    let mut order: Vec<usize> = (0..details.len()).collect();
    order.sort_by(|&a, &b| details[a].id.cmp(&details[b].id));
    let n = details.len() as f64;
    let mean = |f: fn(&ExampleDetail) -> f64| order.iter().map(|&i| f(&details[i])).sum::<f64>() / n;
    let mut corpus = BleuStats::default();
    for &i in &order {
        corpus.merge(&stats[i]);
    }
    let success_rate =
        judge_backend.map(|_| details.iter().filter(|d| d.verdict == Some(Verdict::Good)).count() as f64 / n);

    let row = EvalRow {
        system: options.system.clone(),
        size: details.len(),
        edit_ratio: mean(|d| d.edit_ratio),
        length_ratio: mean(|d| d.length_ratio),
        target_edit_ratio: mean(|d| d.target_edit_ratio),
        nli: mean(|d| d.nli),
        reversed_nli: mean(|d| d.reversed_nli),
        sari: mean(|d| d.sari),
        bleu: corpus.score(),
        update_rouge: mean(|d| d.update_rouge),
        success_rate,
        flagged: details.iter().filter(|d| d.flagged).count(),
    };
    Ok(Evaluation { row, details })
}
