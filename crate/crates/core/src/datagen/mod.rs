//! Synthetic paired-data generation and LLM-judge filtering.

mod classify;
mod critique;
mod hallucination;
mod suffix_record;
mod template;

pub use classify::{classification_prompt, classify_task, keyword_task, parse_task_label, INSTRUCTION_SAMPLES};
pub use critique::{build_critique_prompt, judge, parse_verdict, CritiqueVerdict, Verdict, CRITIQUE_TEMPLATE};
pub use hallucination::{
    build_hallucination_prompt, parse_hallucinated_triples, GeneratedTriple, HallucinationTemplate, ParseOutcome,
};
pub use suffix_record::{build_suffix_record, decompose, split_body, SuffixExample, SuffixLabel, SuffixRecord};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modelio::{generate, map_bounded, GenerationParams, SuffixConfig, TextBackend};
use crate::reward::RewriteTask;

#[derive(Debug, Clone)]
pub struct DatagenOptions {
    pub template: HallucinationTemplate,
    /// Judges per triple.
    pub k: usize,
    /// Sampling for hallucination; `num_samples` continuations per seed.
    pub generation: GenerationParams,
    pub judge_params: GenerationParams,
}

impl Default for DatagenOptions {
    fn default() -> Self {
        Self {
            template: HallucinationTemplate::builtin("default").expect("builtin template"),
            k: 3,
            generation: GenerationParams::default().with_samples(1),
            judge_params: GenerationParams::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: String,
    pub votes: Vec<Verdict>,
}

/// A rewrite pair, as read by `filter`/`suffix-data` and written by `datagen`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<RewriteTask>,
    pub instruction: String,
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatagenSummary {
    pub seeds: usize,
    pub continuations: usize,
    pub triples: usize,
    pub dropped_blocks: usize,
    pub duplicates: usize,
    pub kept: usize,
    pub rejected: usize,
}

/// Non-empty trimmed lines of a seed file.
pub fn read_seeds(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Hallucinates triples for every seed, classifies and judges them, and
/// returns the unanimously approved ones in seed order.
pub fn run_datagen(
    seeds: &[String],
    generator: &dyn TextBackend,
    judge_backend: &dyn TextBackend,
    options: &DatagenOptions,
) -> Result<(Vec<PairRecord>, DatagenSummary)> {
    if options.k < 1 {
        return Err(Error::invalid("number of judges k must be >= 1"));
    }
    let mut summary = DatagenSummary {
        seeds: seeds.len(),
        ..Default::default()
    };

    let continuations = map_bounded(seeds, generator.max_in_flight(), |seed| {
        let prompt = build_hallucination_prompt(seed, &options.template)?;
        generate(generator, &prompt, &options.generation)
    });

    let mut seen = HashSet::new();
    let mut triples: Vec<(String, GeneratedTriple)> = Vec::new();
    for (seed, outputs) in seeds.iter().zip(continuations) {
        for output in outputs? {
            summary.continuations += 1;
            let parsed = parse_hallucinated_triples(&format!("Source:{}", output.text));
            summary.dropped_blocks += parsed.dropped;
            summary.duplicates += parsed.duplicates;
            for mut t in parsed.triples {
                if !seen.insert((t.source.clone(), t.instruction.clone())) {
                    summary.duplicates += 1;
                    continue;
                }
                if t.seed_query.is_empty() {
                    t.seed_query = seed.clone();
                }
                triples.push((seed.clone(), t));
            }
        }
    }
    summary.triples = triples.len();

    let judged = map_bounded(
        &triples,
        judge_backend.max_in_flight(),
        |(seed, t)| -> Result<Option<PairRecord>> {
            let verdict = self_consistency_filter(t, judge_backend, options.k, &options.judge_params)?;
            if !verdict.keep() {
                return Ok(None);
            }
            let task = classify_task(&t.instruction, generator)?;
            Ok(Some(PairRecord {
                task: Some(task),
                instruction: t.instruction.clone(),
                source: t.source.clone(),
                target: t.rewrite.clone(),
                provenance: Some(Provenance {
                    seed: seed.clone(),
                    votes: verdict.votes,
                }),
            }))
        },
    );

    let mut kept = Vec::new();
    for result in judged {
        match result? {
            Some(record) => kept.push(record),
            None => summary.rejected += 1,
        }
    }
    summary.kept = kept.len();
    Ok((kept, summary))
}

/// Judges one triple `k` times; it is kept only on unanimous GOOD.
pub fn self_consistency_filter(
    triple: &GeneratedTriple,
    judge_backend: &dyn TextBackend,
    k: usize,
    params: &GenerationParams,
) -> Result<CritiqueVerdict> {
    judge(
        judge_backend,
        &triple.instruction,
        &triple.source,
        &triple.rewrite,
        k,
        params,
    )
}

/// Re-judges existing pairs, keeping the unanimously approved ones in order.
pub fn filter_pairs(
    pairs: &[PairRecord],
    judge_backend: &dyn TextBackend,
    k: usize,
    params: &GenerationParams,
) -> Result<Vec<PairRecord>> {
    let judged = map_bounded(pairs, judge_backend.max_in_flight(), |p| {
        judge(judge_backend, &p.instruction, &p.source, &p.target, k, params)
    });
    let mut kept = Vec::new();
    for (pair, verdict) in pairs.iter().zip(judged) {
        let verdict = verdict?;
        if verdict.keep() {
            let seed = pair.provenance.as_ref().map(|p| p.seed.clone()).unwrap_or_default();
            kept.push(PairRecord {
                provenance: Some(Provenance {
                    seed,
                    votes: verdict.votes,
                }),
                ..pair.clone()
            });
        }
    }
    Ok(kept)
}

/// Labels every pair's target good (unanimous GOOD) or bad and renders the
/// suffix training text.
pub fn suffix_dataset(
    pairs: &[PairRecord],
    judge_backend: &dyn TextBackend,
    k: usize,
    params: &GenerationParams,
    config: &SuffixConfig,
) -> Result<Vec<SuffixRecord>> {
    let judged = map_bounded(pairs, judge_backend.max_in_flight(), |p| {
        judge(judge_backend, &p.instruction, &p.source, &p.target, k, params)
    });
    pairs
        .iter()
        .zip(judged)
        .map(|(p, verdict)| {
            let label = if verdict?.keep() { Verdict::Good } else { Verdict::Bad };
            build_suffix_record(&p.instruction, &p.source, &p.target, label, config)
        })
        .collect()
}

/// Parses JSONL pairs, reporting the first bad line by number.
pub fn read_pairs(text: &str) -> Result<Vec<PairRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: PairRecord =
            serde_json::from_str(line).map_err(|e| Error::Validation(format!("line {}: {e}", i + 1)))?;
        out.push(pair);
    }
    Ok(out)
}

/// One JSON document per line.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    items
        .iter()
        .map(|item| serde_json::to_string(item).expect("serializable") + "\n")
        .collect()
}
