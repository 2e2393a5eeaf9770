//! SARI for rewriting: add-F1, keep-F1 and delete precision over n-gram
//! orders 1..=4, averaged per operation and then across operations.
//!
//! Multi-reference handling pools reference n-gram counts and scales source
//! and system counts by the number of references, so keep and delete credit
//! is fractional in how many references agree. For every operation and
//! order, a system set and gold set that are both empty score 1.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::textcore::{ngrams, tokenize, CasingMode, TokenSeq};

const MAX_ORDER: usize = 4;

type Counts<'a> = BTreeMap<&'a [String], usize>;

/// Per-operation SARI components, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SariBreakdown {
    pub add_f1: f64,
    pub keep_f1: f64,
    pub delete_precision: f64,
}

impl SariBreakdown {
    pub fn score(&self) -> f64 {
        (self.add_f1 + self.keep_f1 + self.delete_precision) / 3.0
    }
}

pub fn sari<S: AsRef<str>>(source: &str, prediction: &str, references: &[S]) -> Result<f64> {
    Ok(sari_breakdown(source, prediction, references)?.score())
}

pub fn sari_breakdown<S: AsRef<str>>(source: &str, prediction: &str, references: &[S]) -> Result<SariBreakdown> {
    if references.is_empty() {
        return Err(Error::invalid("SARI needs at least one reference"));
    }
    let src = tokenize(source, CasingMode::Lowercase);
    let sys = tokenize(prediction, CasingMode::Lowercase);
    let refs: Vec<TokenSeq> = references
        .iter()
        .map(|r| tokenize(r.as_ref(), CasingMode::Lowercase))
        .collect();

    let (mut add, mut keep, mut del) = (0.0, 0.0, 0.0);
    for n in 1..=MAX_ORDER {
        let s = ngrams(&src, n)?;
        let c = ngrams(&sys, n)?;
        let r: Vec<_> = refs.iter().map(|r| ngrams(r, n)).collect::<Result<_>>()?;

        let numref = refs.len();
        let src_rep: Counts = s.counts().iter().map(|(g, &k)| (g.as_slice(), k * numref)).collect();
        let sys_rep: Counts = c.counts().iter().map(|(g, &k)| (g.as_slice(), k * numref)).collect();
        let mut ref_pool: Counts = BTreeMap::new();
        for hist in &r {
            for (g, &k) in hist.counts() {
                *ref_pool.entry(g.as_slice()).or_insert(0) += k;
            }
        }

        keep += keep_f1(&src_rep, &sys_rep, &ref_pool);
        del += delete_precision(&src_rep, &sys_rep, &ref_pool);
        add += add_f1(&src_rep, &sys_rep, &ref_pool);
    }
    let orders = MAX_ORDER as f64;
    Ok(SariBreakdown {
        add_f1: add / orders,
        keep_f1: keep / orders,
        delete_precision: del / orders,
    })
}

fn intersect<'a>(a: &Counts<'a>, b: &Counts<'a>) -> Counts<'a> {
    a.iter()
        .filter_map(|(g, &x)| {
            let m = x.min(b.get(g).copied().unwrap_or(0));
            (m > 0).then_some((*g, m))
        })
        .collect()
}

fn subtract<'a>(a: &Counts<'a>, b: &Counts<'a>) -> Counts<'a> {
    a.iter()
        .filter_map(|(g, &x)| {
            let d = x.saturating_sub(b.get(g).copied().unwrap_or(0));
            (d > 0).then_some((*g, d))
        })
        .collect()
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision > 0.0 || recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn keep_f1(src: &Counts, sys: &Counts, refs: &Counts) -> f64 {
    let kept = intersect(src, sys);
    let gold = intersect(src, refs);
    if kept.is_empty() && gold.is_empty() {
        return 1.0;
    }
    let good = intersect(&kept, refs);
    let precision = if kept.is_empty() {
        0.0
    } else {
        kept.iter()
            .map(|(g, &k)| good.get(g).copied().unwrap_or(0) as f64 / k as f64)
            .sum::<f64>()
            / kept.len() as f64
    };
    let recall = if gold.is_empty() {
        0.0
    } else {
        good.values().sum::<usize>() as f64 / gold.values().sum::<usize>() as f64
    };
    f1(precision, recall)
}

fn delete_precision(src: &Counts, sys: &Counts, refs: &Counts) -> f64 {
    let deleted = subtract(src, sys);
    let gold = subtract(src, refs);
    if deleted.is_empty() && gold.is_empty() {
        return 1.0;
    }
    if deleted.is_empty() {
        return 0.0;
    }
    let good = subtract(&deleted, refs);
    deleted
        .iter()
        .map(|(g, &k)| good.get(g).copied().unwrap_or(0) as f64 / k as f64)
        .sum::<f64>()
        / deleted.len() as f64
}

fn add_f1(src: &Counts, sys: &Counts, refs: &Counts) -> f64 {
    let added: BTreeSet<_> = sys.keys().filter(|g| !src.contains_key(*g)).collect();
    let gold: BTreeSet<_> = refs.keys().filter(|g| !src.contains_key(*g)).collect();
    if added.is_empty() && gold.is_empty() {
        return 1.0;
    }
    let good = added.intersection(&gold).count() as f64;
    let precision = if added.is_empty() {
        0.0
    } else {
        good / added.len() as f64
    };
    let recall = if gold.is_empty() { 0.0 } else { good / gold.len() as f64 };
    f1(precision, recall)
}
