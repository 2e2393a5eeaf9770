//! On-device/server cascade: best-of-N by suffix score, strict threshold
//! routing, and offline replay of logged scores for threshold sweeps.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modelio::{
    generate, map_bounded, suffix_score, CandidateResponse, GenerationParams, SuffixConfig, TextBackend,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeConfig {
    pub gamma: f64,
    pub num_samples: usize,
    pub temperature: f64,
    pub max_tokens: usize,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        let g = GenerationParams::default();
        Self {
            gamma: 0.5,
            num_samples: g.num_samples,
            temperature: g.temperature,
            max_tokens: g.max_tokens,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        self.params().validate()
    }

    pub fn params(&self) -> GenerationParams {
        GenerationParams {
            temperature: self.temperature,
            num_samples: self.num_samples,
            max_tokens: self.max_tokens,
            logprobs: true,
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKey {
    #[default]
    SuffixScore,
    /// Mean token log-probability, compared to gamma as `exp(lm_score)`.
    LmScore,
}

impl std::str::FromStr for ScoreKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "suffix" | "suffix_score" => Ok(ScoreKey::SuffixScore),
            "lm" | "lm_score" => Ok(ScoreKey::LmScore),
            other => Err(Error::invalid(format!("unknown score key `{other}` (suffix or lm)"))),
        }
    }
}

trait Scored {
    fn suffix(&self) -> Option<f64>;
    fn lm(&self) -> Option<f64>;

    fn key(&self, key: ScoreKey) -> Option<f64> {
        match key {
            ScoreKey::SuffixScore => self.suffix(),
            ScoreKey::LmScore => self.lm().map(f64::exp),
        }
    }
}

impl Scored for CandidateResponse {
    fn suffix(&self) -> Option<f64> {
        self.suffix_score
    }
    fn lm(&self) -> Option<f64> {
        self.lm_score
    }
}

impl Scored for LogCandidate {
    fn suffix(&self) -> Option<f64> {
        self.suffix_score
    }
    fn lm(&self) -> Option<f64> {
        self.lm_score
    }
}

fn argmax<T: Scored>(candidates: &[T], key: ScoreKey) -> Result<(usize, f64)> {
    if candidates.is_empty() {
        return Err(Error::invalid("no candidates to select from"));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let s = c
            .key(key)
            .filter(|s| !s.is_nan())
            .ok_or_else(|| Error::invalid(format!("candidate {i} has no {key:?}")))?;
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    Ok(best.expect("non-empty"))
}

/// Highest-scoring candidate; ties go to the lowest index.
pub fn select_best(candidates: &[CandidateResponse], key: ScoreKey) -> Result<(usize, &CandidateResponse)> {
    let (i, _) = argmax(candidates, key)?;
    Ok((i, &candidates[i]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    OnDevice,
    Server,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeDecision {
    pub chosen_text: String,
    pub origin: Origin,
    /// Best on-device suffix score.
    pub suffix_score: f64,
    pub gamma: f64,
    pub candidates_considered: usize,
    pub candidates: Vec<CandidateResponse>,
}

impl CascadeDecision {
    /// A log record for later labeling and replay.
    pub fn log_record(&self, prompt_id: &str) -> CascadeLogRecord {
        CascadeLogRecord {
            prompt_id: prompt_id.to_owned(),
            candidates: self
                .candidates
                .iter()
                .map(|c| LogCandidate {
                    text: c.text.clone(),
                    suffix_score: c.suffix_score,
                    lm_score: c.lm_score,
                    label: None,
                })
                .collect(),
            server_text: match self.origin {
                Origin::Server => Some(self.chosen_text.clone()),
                Origin::OnDevice => None,
            },
            on_device_label: None,
            server_label: None,
        }
    }
}

/// Samples N on-device candidates, scores them, and answers on-device when
/// the best suffix score is strictly above gamma; otherwise asks the server.
pub fn route(
    prompt: &str,
    on_device: &dyn TextBackend,
    server: &dyn TextBackend,
    config: &CascadeConfig,
    suffix_config: &SuffixConfig,
) -> Result<CascadeDecision> {
    config.validate()?;
    suffix_config.validate()?;
    let mut candidates = generate(on_device, prompt, &config.params())?;
    let scores = map_bounded(&candidates, on_device.max_in_flight(), |c| {
        if c.text.is_empty() {
            Ok(0.0)
        } else {
            suffix_score(on_device, prompt, &c.text, suffix_config).map(|s| s.value)
        }
    });
    for (c, s) in candidates.iter_mut().zip(scores) {
        c.suffix_score = Some(s?);
    }
    let (best, s) = argmax(&candidates, ScoreKey::SuffixScore)?;
    let considered = candidates.len();
    if s > config.gamma {
        return Ok(CascadeDecision {
            chosen_text: candidates[best].text.clone(),
            origin: Origin::OnDevice,
            suffix_score: s,
            gamma: config.gamma,
            candidates_considered: considered,
            candidates,
        });
    }
    let reply = generate(server, prompt, &config.params().with_samples(1))?;
    Ok(CascadeDecision {
        chosen_text: reply.into_iter().next().expect("one candidate").text,
        origin: Origin::Server,
        suffix_score: s,
        gamma: config.gamma,
        candidates_considered: considered,
        candidates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JudgeLabel {
    Good,
    Bad,
}

impl JudgeLabel {
    pub fn is_good(self) -> bool {
        self == JudgeLabel::Good
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogCandidate {
    pub text: String,
    #[serde(default)]
    pub suffix_score: Option<f64>,
    #[serde(default)]
    pub lm_score: Option<f64>,
    /// Judge label for this candidate, when every candidate was judged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<JudgeLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeLogRecord {
    pub prompt_id: String,
    pub candidates: Vec<LogCandidate>,
    #[serde(default)]
    pub server_text: Option<String>,
    /// Label of the suffix-score best candidate.
    #[serde(default)]
    pub on_device_label: Option<JudgeLabel>,
    #[serde(default)]
    pub server_label: Option<JudgeLabel>,
}

impl CascadeLogRecord {
    fn validate(&self) -> Result<()> {
        if self.candidates.is_empty() {
            return Err(Error::Validation(format!(
                "record `{}` has no candidates",
                self.prompt_id
            )));
        }
        for c in &self.candidates {
            if let Some(s) = c.suffix_score {
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::Validation(format!(
                        "record `{}` has suffix score {s} outside [0, 1]",
                        self.prompt_id
                    )));
                }
            }
            if let Some(lm) = c.lm_score {
                if lm.is_nan() || lm > 0.0 {
                    return Err(Error::Validation(format!(
                        "record `{}` has lm score {lm} above 0",
                        self.prompt_id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Judge label of candidate `i`, falling back to `on_device_label` for the
    /// suffix-score winner among all candidates.
    fn candidate_label(&self, i: usize) -> Option<JudgeLabel> {
        self.candidates[i].label.or_else(|| {
            let best = argmax(&self.candidates, ScoreKey::SuffixScore).ok()?.0;
            (best == i).then_some(self.on_device_label).flatten()
        })
    }
}

pub fn read_log(text: &str) -> Result<Vec<CascadeLogRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: CascadeLogRecord =
            serde_json::from_str(line).map_err(|e| Error::Validation(format!("line {}: {e}", i + 1)))?;
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub gamma: f64,
    pub on_device_ratio: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub key: ScoreKey,
    /// Only the first `n` candidates of each record compete (best-of-n).
    pub max_candidates: Option<usize>,
}

/// Per-record replay inputs: best score and the outcome of each arm.
struct Replay {
    score: f64,
    on_device_good: bool,
    server_good: bool,
}

fn prepare(log: &[CascadeLogRecord], options: SweepOptions) -> Result<Vec<Replay>> {
    if options.max_candidates == Some(0) {
        return Err(Error::invalid("max candidates must be >= 1"));
    }
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(log.len());
    for record in log {
        record.validate()?;
        let n = options
            .max_candidates
            .unwrap_or(usize::MAX)
            .min(record.candidates.len());
        let (best, score) = argmax(&record.candidates[..n], options.key)
            .map_err(|e| Error::Validation(format!("record `{}`: {e}", record.prompt_id)))?;
        match (record.candidate_label(best), record.server_label) {
            (Some(d), Some(s)) => out.push(Replay {
                score,
                on_device_good: d.is_good(),
                server_good: s.is_good(),
            }),
            _ => missing.push(record.prompt_id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "records missing judge labels: {}",
            missing.join(", ")
        )));
    }
    Ok(out)
}

fn replay_point(replays: &[Replay], gamma: f64) -> TradeoffPoint {
    let n = replays.len() as f64;
    let (mut on_device, mut good) = (0usize, 0usize);
    for r in replays {
        let local = r.score > gamma;
        on_device += usize::from(local);
        good += usize::from(if local { r.on_device_good } else { r.server_good });
    }
    TradeoffPoint {
        gamma,
        on_device_ratio: on_device as f64 / n,
        success_rate: good as f64 / n,
    }
}

pub fn sweep_thresholds(log: &[CascadeLogRecord], gammas: &[f64], key: ScoreKey) -> Result<Vec<TradeoffPoint>> {
    sweep_with(
        log,
        gammas,
        SweepOptions {
            key,
            max_candidates: None,
        },
    )
}

/// Replays the routing rule over logged scores for every gamma.
pub fn sweep_with(log: &[CascadeLogRecord], gammas: &[f64], options: SweepOptions) -> Result<Vec<TradeoffPoint>> {
    if log.is_empty() {
        return Err(Error::invalid("cascade log is empty"));
    }
    for &g in gammas {
        check_gamma(g)?;
    }
    let replays = prepare(log, options)?;
    Ok(gammas.iter().map(|&g| replay_point(&replays, g)).collect())
}

/// Largest gamma on the score grid whose on-device ratio still meets the
/// target. The grid holds every distinct best score, 1.0, and 0.0.
pub fn pick_gamma_for_budget(log: &[CascadeLogRecord], target_on_device_ratio: f64, key: ScoreKey) -> Result<f64> {
    if !(0.0..=1.0).contains(&target_on_device_ratio) {
        return Err(Error::invalid(format!(
            "target on-device ratio must lie in [0, 1], got {target_on_device_ratio}"
        )));
    }
    if log.is_empty() {
        return Err(Error::invalid("cascade log is empty"));
    }
    let mut scores: Vec<f64> = Vec::with_capacity(log.len());
    for record in log {
        record.validate()?;
        let (_, s) = argmax(&record.candidates, key)
            .map_err(|e| Error::Validation(format!("record `{}`: {e}", record.prompt_id)))?;
        scores.push(s.clamp(0.0, 1.0));
    }
    let n = scores.len() as f64;
    let mut grid = scores.clone();
    grid.extend([0.0, 1.0]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let ratio = |g: f64| scores.iter().filter(|&&s| s > g).count() as f64 / n;
    let mut best_ratio = 0.0f64;
    for &g in grid.iter().rev() {
        let r = ratio(g);
        best_ratio = best_ratio.max(r);
        if r >= target_on_device_ratio {
            return Ok(g);
        }
    }
    Err(Error::InfeasibleBudget {
        target: target_on_device_ratio,
        best: best_ratio,
    })
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_gamma_grid(grid: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("bad number `{}` in gamma grid", s.trim())))
    };
    let gammas = if grid.contains(':') {
        let parts: Vec<&str> = grid.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(Error::invalid("gamma range must be start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(Error::invalid("gamma range needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        grid.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if gammas.is_empty() {
        return Err(Error::invalid("gamma grid is empty"));
    }
    for &g in &gammas {
        check_gamma(g)?;
    }
    Ok(gammas)
}

pub fn tradeoff_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::from("gamma,on_device_ratio,success_rate\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.gamma, p.on_device_ratio, p.success_rate);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelio::MockBackend;
    use proptest::prelude::*;

    fn cand(s: f64) -> CandidateResponse {
        CandidateResponse {
            suffix_score: Some(s),
            ..CandidateResponse::new("x", vec![-0.1])
        }
    }

    fn record(id: &str, scores: &[f64], labels: &[bool], server_good: bool) -> CascadeLogRecord {
        CascadeLogRecord {
            prompt_id: id.into(),
            candidates: scores
                .iter()
                .zip(labels)
                .map(|(&s, &g)| LogCandidate {
                    text: format!("c{s}"),
                    suffix_score: Some(s),
                    lm_score: Some(-1.0),
                    label: Some(if g { JudgeLabel::Good } else { JudgeLabel::Bad }),
                })
                .collect(),
            server_text: Some("server".into()),
            on_device_label: None,
            server_label: Some(if server_good { JudgeLabel::Good } else { JudgeLabel::Bad }),
        }
    }

    #[test]
    fn select_best_examples() {
        let c = [cand(0.2), cand(0.9), cand(0.5)];
        assert_eq!(select_best(&c, ScoreKey::SuffixScore).unwrap().0, 1);
        assert_eq!(
            select_best(&[cand(0.7), cand(0.7)], ScoreKey::SuffixScore).unwrap().0,
            0
        );
        assert!(matches!(
            select_best(&[], ScoreKey::SuffixScore),
            Err(Error::InvalidArgument(_))
        ));
        let no_lm = [CandidateResponse::new("x", vec![])];
        assert!(matches!(
            select_best(&no_lm, ScoreKey::LmScore),
            Err(Error::InvalidArgument(_))
        ));
    }

    fn device(good: f64, bad: f64) -> MockBackend {
        MockBackend::from_json(&format!(
            r#"{{"generate": {{"*": ["a", "b"]}},
                "score": [
                    {{"prefix": "*", "continuation": "quality is good", "logprob": {good}}},
                    {{"prefix": "*", "continuation": "quality is bad", "logprob": {bad}}}
                ]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn route_examples() {
        let server = MockBackend::from_json(r#"{"generate": {"*": ["from server"]}}"#).unwrap();
        let cfg = |gamma| CascadeConfig {
            gamma,
            num_samples: 2,
            ..Default::default()
        };
        let sc = SuffixConfig::default();

        let high = device(0.9f64.ln(), 0.1f64.ln());
        let d = route("p", &high, &server, &cfg(0.5), &sc).unwrap();
        assert_eq!(d.origin, Origin::OnDevice);
        assert_eq!(d.chosen_text, "a");
        assert!((d.suffix_score - 0.9).abs() < 1e-12);

        let low = device(0.3f64.ln(), 0.7f64.ln());
        let d = route("p", &low, &server, &cfg(0.5), &sc).unwrap();
        assert_eq!((d.origin, d.chosen_text.as_str()), (Origin::Server, "from server"));

        let certain = device(0.0, -1e9);
        let d = route("p", &certain, &server, &cfg(1.0), &sc).unwrap();
        assert_eq!(d.origin, Origin::Server);
        assert_eq!(d.candidates_considered, 2);
    }

    #[test]
    fn route_surfaces_server_failure() {
        let low = device(0.3f64.ln(), 0.7f64.ln());
        let dead = MockBackend::from_json(r#"{"fallback": "error"}"#).unwrap();
        let cfg = CascadeConfig {
            num_samples: 2,
            ..Default::default()
        };
        assert!(route("p", &low, &dead, &cfg, &SuffixConfig::default()).is_err());
        let bad_gamma = CascadeConfig {
            gamma: 1.5,
            ..Default::default()
        };
        assert!(route("p", &low, &low, &bad_gamma, &SuffixConfig::default()).is_err());
    }

    #[test]
    fn sweep_endpoints_and_separable_log() {
        let log: Vec<_> = (0..10)
            .map(|i| {
                let good = i % 2 == 0;
                record(&format!("r{i}"), &[if good { 0.9 } else { 0.1 }], &[good], true)
            })
            .collect();
        let pts = sweep_thresholds(&log, &[0.0, 0.5, 1.0], ScoreKey::SuffixScore).unwrap();
        assert_eq!(pts[0].on_device_ratio, 1.0);
        assert_eq!(pts[0].success_rate, 0.5);
        assert_eq!((pts[1].on_device_ratio, pts[1].success_rate), (0.5, 1.0));
        assert_eq!((pts[2].on_device_ratio, pts[2].success_rate), (0.0, 1.0));
    }

    #[test]
    fn sweep_lists_unlabeled_records() {
        let mut a = record("a", &[0.4], &[true], true);
        a.server_label = None;
        let mut b = record("b", &[0.4, 0.6], &[true, true], true);
        b.candidates[1].label = None;
        let err = sweep_thresholds(&[a, b], &[0.5], ScoreKey::SuffixScore).unwrap_err();
        assert!(matches!(&err, Error::Validation(m) if m.contains("a, b")), "{err}");
    }

    #[test]
    fn on_device_label_covers_best_candidate() {
        let mut r = record("r", &[0.2, 0.8], &[false, false], false);
        for c in &mut r.candidates {
            c.label = None;
        }
        r.on_device_label = Some(JudgeLabel::Good);
        let pts = sweep_thresholds(&[r.clone()], &[0.5], ScoreKey::SuffixScore).unwrap();
        assert_eq!(pts[0].success_rate, 1.0);
        let only_first = SweepOptions {
            max_candidates: Some(1),
            ..Default::default()
        };
        assert!(sweep_with(&[r], &[0.5], only_first).is_err());
    }

    #[test]
    fn pick_gamma_examples() {
        let log = vec![record("a", &[0.3], &[true], true), record("b", &[0.8], &[true], true)];
        assert_eq!(pick_gamma_for_budget(&log, 0.5, ScoreKey::SuffixScore).unwrap(), 0.3);
        assert_eq!(pick_gamma_for_budget(&log, 0.0, ScoreKey::SuffixScore).unwrap(), 1.0);
        let g = pick_gamma_for_budget(&log, 1.0, ScoreKey::SuffixScore).unwrap();
        assert!(g < 0.3);
        let zero = vec![record("z", &[0.0], &[true], true)];
        assert!(matches!(
            pick_gamma_for_budget(&zero, 1.0, ScoreKey::SuffixScore),
            Err(Error::InfeasibleBudget { .. })
        ));
    }

    #[test]
    fn grid_parsing() {
        let g = parse_gamma_grid("0:1:0.01").unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!((g[0], g[37], g[100]), (0.0, 0.37, 1.0));
        assert_eq!(parse_gamma_grid("0.2, 0.5").unwrap(), vec![0.2, 0.5]);
        assert!(parse_gamma_grid("0:2:0.5").is_err());
        assert!(parse_gamma_grid("0:1").is_err());
        assert!(parse_gamma_grid("x").is_err());
    }

    #[test]
    fn csv_header() {
        let csv = tradeoff_csv(&[TradeoffPoint {
            gamma: 0.5,
            on_device_ratio: 0.25,
            success_rate: 1.0,
        }]);
        assert_eq!(csv, "gamma,on_device_ratio,success_rate\n0.5,0.25,1\n");
    }

    fn arb_log() -> impl Strategy<Value = Vec<CascadeLogRecord>> {
        prop::collection::vec(
            (
                prop::collection::vec((0.0..=1.0f64, any::<bool>()), 1..6),
                any::<bool>(),
            ),
            1..30,
        )
        .prop_map(|recs| {
            recs.into_iter()
                .enumerate()
                .map(|(i, (cands, server))| {
                    let (s, l): (Vec<f64>, Vec<bool>) = cands.into_iter().unzip();
                    record(&i.to_string(), &s, &l, server)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn ratio_non_increasing(log in arb_log()) {
            let grid = parse_gamma_grid("0:1:0.05").unwrap();
            let pts = sweep_thresholds(&log, &grid, ScoreKey::SuffixScore).unwrap();
            for w in pts.windows(2) {
                prop_assert!(w[1].on_device_ratio <= w[0].on_device_ratio);
            }
            prop_assert_eq!(pts.last().unwrap().on_device_ratio, 0.0);
        }

        #[test]
        fn argmax_invariant_under_monotone_transform(scores in prop::collection::vec(0.0..1.0f64, 1..10)) {
            let a: Vec<_> = scores.iter().map(|&s| cand(s)).collect();
            let b: Vec<_> = scores.iter().map(|&s| cand((3.0 * s).exp() / 30.0)).collect();
            prop_assert_eq!(
                select_best(&a, ScoreKey::SuffixScore).unwrap().0,
                select_best(&b, ScoreKey::SuffixScore).unwrap().0
            );
        }

        #[test]
        fn best_of_n_dominates_under_oracle_scores(
            recs in prop::collection::vec(prop::collection::vec(any::<bool>(), 1..8), 1..30),
        ) {
            let log: Vec<_> = recs.iter().enumerate().map(|(i, labels)| {
                let scores: Vec<f64> = labels.iter().enumerate()
                    .map(|(j, &g)| if g { 0.6 + 0.01 * j as f64 } else { 0.1 + 0.01 * j as f64 })
                    .collect();
                record(&i.to_string(), &scores, labels, false)
            }).collect();
            let all = sweep_with(&log, &[0.0], SweepOptions::default()).unwrap()[0];
            let one = sweep_with(&log, &[0.0], SweepOptions { max_candidates: Some(1), ..Default::default() }).unwrap()[0];
            prop_assert!(all.success_rate >= one.success_rate);
            let p = pick_gamma_for_budget(&log, 0.5, ScoreKey::SuffixScore);
            if let Ok(g) = p {
                let pt = sweep_thresholds(&log, &[g], ScoreKey::SuffixScore).unwrap()[0];
                prop_assert!(pt.on_device_ratio >= 0.5);
            }
        }
    }
}
