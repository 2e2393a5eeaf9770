//! BLEU-4 with clipped precisions, closest-reference brevity penalty and
//! add-one smoothing for orders >= 2 that have no matches.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::textcore::{ngrams, tokenize, CasingMode, TokenSeq};

pub const MAX_ORDER: usize = 4;

/// Sufficient statistics for sentence or corpus BLEU.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn from_texts<S: AsRef<str>>(prediction: &str, references: &[S]) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::invalid("BLEU needs at least one reference"));
        }
        let hyp = tokenize(prediction, CasingMode::Lowercase);
        let refs: Vec<TokenSeq> = references
            .iter()
            .map(|r| tokenize(r.as_ref(), CasingMode::Lowercase))
            .collect();
        Ok(Self::from_tokens(&hyp, &refs))
    }

    fn from_tokens(hyp: &TokenSeq, refs: &[TokenSeq]) -> Self {
        let mut stats = BleuStats {
            hyp_len: hyp.len(),
            ref_len: closest_ref_len(hyp.len(), refs),
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let hyp_counts = ngrams(hyp, n).expect("order >= 1");
            let mut max_ref: HashMap<&[String], usize> = HashMap::new();
            let ref_hists: Vec<_> = refs.iter().map(|r| ngrams(r, n).expect("order >= 1")).collect();
            for hist in &ref_hists {
                for (gram, &count) in hist.counts() {
                    let slot = max_ref.entry(gram.as_slice()).or_insert(0);
                    *slot = (*slot).max(count);
                }
            }
            stats.totals[n - 1] = hyp_counts.total();
            stats.matches[n - 1] = hyp_counts
                .counts()
                .iter()
                .map(|(gram, &count)| count.min(max_ref.get(gram.as_slice()).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    pub fn merge(&mut self, other: &BleuStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches[0] == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for n in 0..MAX_ORDER {
            let (num, den) = if n > 0 && self.matches[n] == 0 {
                (1, self.totals[n] + 1)
            } else {
                (self.matches[n], self.totals[n])
            };
            log_sum += (num as f64 / den as f64).ln();
        }
        let brevity = if self.hyp_len > self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        };
        brevity * (log_sum / MAX_ORDER as f64).exp()
    }
}

/// Reference length closest to the hypothesis length; ties go to the shorter one.
fn closest_ref_len(hyp_len: usize, refs: &[TokenSeq]) -> usize {
    refs.iter()
        .map(TokenSeq::len)
        .min_by_key(|&len| (len.abs_diff(hyp_len), len))
        .unwrap_or(0)
}

/// Sentence-level BLEU in [0, 1].
pub fn bleu<S: AsRef<str>>(prediction: &str, references: &[S]) -> Result<f64> {
    Ok(BleuStats::from_texts(prediction, references)?.score())
}

/// Corpus BLEU: statistics are pooled over all pairs before scoring.
pub fn corpus_bleu<'a, I, S>(pairs: I) -> Result<f64>
where
    I: IntoIterator<Item = (&'a str, &'a [S])>,
    S: AsRef<str> + 'a,
{
    let mut total = BleuStats::default();
    for (prediction, references) in pairs {
        total.merge(&BleuStats::from_texts(prediction, references)?);
    }
    Ok(total.score())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_is_one() {
        assert_eq!(
            bleu("the quick brown fox jumps", &["the quick brown fox jumps"]).unwrap(),
            1.0
        );
        assert_eq!(bleu("a b", &["a b"]).unwrap(), 1.0);
    }

    #[test]
    fn no_overlap_is_zero() {
        assert_eq!(bleu("x y z w", &["a b c d"]).unwrap(), 0.0);
        assert_eq!(bleu("", &["a b c d"]).unwrap(), 0.0);
    }

    #[test]
    fn toy_smoothed_value() {
        // p1=2/3, p2=1/2, p3=(0+1)/(1+1), p4=(0+1)/(0+1), BP=1
        let expected = 0.638943104246272;
        let got = bleu("a b c", &["a b d"]).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got}");
    }

    #[test]
    fn brevity_penalty_applies() {
        // 2-token hypothesis fully matching a 4-token reference prefix
        let got = bleu("a b", &["a b c d"]).unwrap();
        let p = [1.0f64, 1.0, 1.0 / 1.0, 1.0 / 1.0];
        let expected = (1.0f64 - 4.0 / 2.0).exp() * (p.iter().map(|x| x.ln()).sum::<f64>() / 4.0).exp();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn clips_by_max_reference_count() {
        let stats = BleuStats::from_texts("the the the", &["the cat", "the the dog"]).unwrap();
        assert_eq!(stats.matches[0], 2);
        assert_eq!(stats.totals[0], 3);
        // closest reference length to 3 is 3
        assert_eq!(stats.ref_len, 3);
    }

    #[test]
    fn requires_reference() {
        let none: [&str; 0] = [];
        assert!(bleu("a", &none).is_err());
    }

    #[test]
    fn corpus_pools_counts() {
        let refs_a = ["a b c d"];
        let refs_b = ["e f g h"];
        let corpus = corpus_bleu([("a b c d", &refs_a[..]), ("e f g h", &refs_b[..])]).unwrap();
        assert_eq!(corpus, 1.0);
        let mixed = corpus_bleu([("a b c d", &refs_a[..]), ("x y z w", &refs_b[..])]).unwrap();
        assert!(mixed > 0.0 && mixed < 1.0);
    }

    proptest! {
        #[test]
        fn reference_order_invariant(
            hyp in "[a-c]( [a-c]){0,8}",
            r1 in "[a-c]( [a-c]){0,8}",
            r2 in "[a-c]( [a-c]){0,8}",
        ) {
            let a = bleu(&hyp, &[r1.as_str(), r2.as_str()]).unwrap();
            let b = bleu(&hyp, &[r2.as_str(), r1.as_str()]).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn self_reference_is_one(words in proptest::collection::vec("[a-z]{1,4}", 4..12)) {
            let x = words.join(" ");
            prop_assert_eq!(bleu(&x, &[x.as_str()]).unwrap(), 1.0);
        }
    }
}
