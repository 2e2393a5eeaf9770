//! C ABI over the msgrewrite library.
//!
//! Every fallible function returns an [`MrStatus`]; results go through out
//! pointers. On failure the message is kept per thread and can be fetched
//! with [`mr_last_error`]. Strings handed out by this library must be
//! released with [`mr_string_free`], handles with their own `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;
use std::time::Duration;

use msgrewrite::cascade::{self, CascadeConfig, CascadeLogRecord, Origin, ScoreKey};
use msgrewrite::datagen::{self, Verdict};
use msgrewrite::metrics::{self, NGramPenaltyConfig};
use msgrewrite::modelio::{self, MockBackend, RemoteBackend, RemoteConfig, SuffixConfig, TextBackend};
use msgrewrite::reward::{self, RewardWeights, StubNli};
use msgrewrite::textcore::{tokenize, CasingMode};
use msgrewrite::{Error, RewriteTask};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrStatus {
    Ok = 0,
    InvalidArgument = 1,
    DegenerateInput = 2,
    BackendUnavailable = 3,
    BackendRejected = 4,
    Protocol = 5,
    ScorerUnavailable = 6,
    Validation = 7,
    Classification = 8,
    InfeasibleBudget = 9,
    Template = 10,
    Config = 11,
    Io = 12,
    NullPointer = 13,
    InvalidUtf8 = 14,
    Panic = 15,
}

impl From<&Error> for MrStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => MrStatus::InvalidArgument,
            Error::DegenerateInput(_) => MrStatus::DegenerateInput,
            Error::BackendUnavailable { .. } => MrStatus::BackendUnavailable,
            Error::BackendRejected { .. } => MrStatus::BackendRejected,
            Error::Protocol(_) => MrStatus::Protocol,
            Error::ScorerUnavailable(_) => MrStatus::ScorerUnavailable,
            Error::Validation(_) => MrStatus::Validation,
            Error::Classification(_) => MrStatus::Classification,
            Error::InfeasibleBudget { .. } => MrStatus::InfeasibleBudget,
            Error::Template(_) => MrStatus::Template,
            Error::Config { .. } => MrStatus::Config,
            Error::Io(_) => MrStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrTask {
    Formalize = 0,
    Shorten = 1,
    Elaborate = 2,
    Paraphrase = 3,
    Proofread = 4,
}

impl From<MrTask> for RewriteTask {
    fn from(t: MrTask) -> Self {
        match t {
            MrTask::Formalize => RewriteTask::Formalize,
            MrTask::Shorten => RewriteTask::Shorten,
            MrTask::Elaborate => RewriteTask::Elaborate,
            MrTask::Paraphrase => RewriteTask::Paraphrase,
            MrTask::Proofread => RewriteTask::Proofread,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrScoreKey {
    Suffix = 0,
    Lm = 1,
}

impl From<MrScoreKey> for ScoreKey {
    fn from(k: MrScoreKey) -> Self {
        match k {
            MrScoreKey::Suffix => ScoreKey::SuffixScore,
            MrScoreKey::Lm => ScoreKey::LmScore,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrVerdict {
    Good = 0,
    Bad = 1,
    Unparseable = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrOrigin {
    OnDevice = 0,
    Server = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrRewardWeights {
    pub sigma_nli: f64,
    pub sigma_rnli: f64,
    pub sigma_length: f64,
    pub sigma_edit: f64,
    pub sigma_ngram: f64,
}

impl From<RewardWeights> for MrRewardWeights {
    fn from(w: RewardWeights) -> Self {
        Self {
            sigma_nli: w.sigma_nli,
            sigma_rnli: w.sigma_rnli,
            sigma_length: w.sigma_length,
            sigma_edit: w.sigma_edit,
            sigma_ngram: w.sigma_ngram,
        }
    }
}

impl From<MrRewardWeights> for RewardWeights {
    fn from(w: MrRewardWeights) -> Self {
        RewardWeights::new(w.sigma_nli, w.sigma_rnli, w.sigma_length, w.sigma_edit, w.sigma_ngram)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrRewardBreakdown {
    pub nli: f64,
    pub rnli: f64,
    pub length_ratio: f64,
    pub edit_ratio: f64,
    pub ngram_reward: f64,
    pub weights: MrRewardWeights,
    pub total: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrCascadeConfig {
    pub gamma: f64,
    pub num_samples: usize,
    pub temperature: f64,
    pub max_tokens: usize,
}

impl From<MrCascadeConfig> for CascadeConfig {
    fn from(c: MrCascadeConfig) -> Self {
        CascadeConfig {
            gamma: c.gamma,
            num_samples: c.num_samples,
            temperature: c.temperature,
            max_tokens: c.max_tokens,
        }
    }
}

/// Opaque model backend.
pub struct MrBackend {
    inner: Arc<dyn TextBackend>,
}

/// Opaque parsed cascade log.
pub struct MrCascadeLog {
    records: Vec<CascadeLogRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: MrStatus, msg: impl Into<String>) -> MrStatus {
    set_last_error(msg);
    status
}

type FfiResult<T> = std::result::Result<T, MrStatus>;

fn lift<T>(r: msgrewrite::Result<T>) -> FfiResult<T> {
    r.map_err(|e| fail(MrStatus::from(&e), e.to_string()))
}

/// Runs `f`, translating panics and errors into status codes.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> MrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MrStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(MrStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(fail(MrStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MrStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn str_array<'a>(p: *const *const c_char, n: usize, name: &str) -> FfiResult<Vec<&'a str>> {
    if n > 0 && p.is_null() {
        return Err(fail(MrStatus::NullPointer, format!("`{name}` is null")));
    }
    (0..n).map(|i| str_arg(*p.add(i), name)).collect()
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| fail(MrStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| fail(MrStatus::NullPointer, format!("`{name}` is null")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Copy of the calling thread's last error message, or NULL when the last
/// call succeeded. Free with `mr_string_free`.
#[no_mangle]
pub extern "C" fn mr_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Token-level Levenshtein distance between two whitespace-tokenized texts.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mr_edit_distance(
    source: *const c_char,
    prediction: *const c_char,
    out_distance: *mut usize,
) -> MrStatus {
    guard(|| {
        let s = tokenize(str_arg(source, "source")?, CasingMode::Preserve);
        let p = tokenize(str_arg(prediction, "prediction")?, CasingMode::Preserve);
        *out(out_distance, "out_distance")? = metrics::edit_distance(&s, &p);
        Ok(())
    })
}

/// # Safety
/// See [`mr_edit_distance`].
#[no_mangle]
pub unsafe extern "C" fn mr_edit_ratio(
    source: *const c_char,
    prediction: *const c_char,
    out_ratio: *mut f64,
) -> MrStatus {
    guard(|| {
        let s = tokenize(str_arg(source, "source")?, CasingMode::Preserve);
        let p = tokenize(str_arg(prediction, "prediction")?, CasingMode::Preserve);
        *out(out_ratio, "out_ratio")? = lift(metrics::edit_ratio(&s, &p))?;
        Ok(())
    })
}

/// # Safety
/// See [`mr_edit_distance`].
#[no_mangle]
pub unsafe extern "C" fn mr_length_ratio(
    source: *const c_char,
    prediction: *const c_char,
    out_ratio: *mut f64,
) -> MrStatus {
    guard(|| {
        let s = tokenize(str_arg(source, "source")?, CasingMode::Preserve);
        let p = tokenize(str_arg(prediction, "prediction")?, CasingMode::Preserve);
        *out(out_ratio, "out_ratio")? = lift(metrics::length_ratio(&s, &p))?;
        Ok(())
    })
}

/// # Safety
/// `references` must point to `num_references` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn mr_sari(
    source: *const c_char,
    prediction: *const c_char,
    references: *const *const c_char,
    num_references: usize,
    out_score: *mut f64,
) -> MrStatus {
    guard(|| {
        let refs = str_array(references, num_references, "references")?;
        let score = lift(metrics::sari(
            str_arg(source, "source")?,
            str_arg(prediction, "prediction")?,
            &refs,
        ))?;
        *out(out_score, "out_score")? = score;
        Ok(())
    })
}

/// Sentence BLEU of `prediction` against the references.
///
/// # Safety
/// See [`mr_sari`].
#[no_mangle]
pub unsafe extern "C" fn mr_bleu(
    prediction: *const c_char,
    references: *const *const c_char,
    num_references: usize,
    out_score: *mut f64,
) -> MrStatus {
    guard(|| {
        let refs = str_array(references, num_references, "references")?;
        *out(out_score, "out_score")? = lift(metrics::bleu(str_arg(prediction, "prediction")?, &refs))?;
        Ok(())
    })
}

/// # Safety
/// See [`mr_sari`].
#[no_mangle]
pub unsafe extern "C" fn mr_update_rouge(
    source: *const c_char,
    prediction: *const c_char,
    references: *const *const c_char,
    num_references: usize,
    out_score: *mut f64,
) -> MrStatus {
    guard(|| {
        let refs = str_array(references, num_references, "references")?;
        let score = lift(metrics::update_rouge(
            str_arg(source, "source")?,
            str_arg(prediction, "prediction")?,
            &refs,
        ))?;
        *out(out_score, "out_score")? = score;
        Ok(())
    })
}

/// Loop penalty: `-penalty` if any n-gram order reaches its threshold.
/// With `num_orders == 0` the default thresholds and penalty are used.
///
/// # Safety
/// `orders` and `thresholds` must each hold `num_orders` values.
#[no_mangle]
pub unsafe extern "C" fn mr_loop_reward(
    text: *const c_char,
    orders: *const usize,
    thresholds: *const usize,
    num_orders: usize,
    penalty: f64,
    out_reward: *mut f64,
) -> MrStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let config = if num_orders == 0 {
            NGramPenaltyConfig::default()
        } else {
            if orders.is_null() || thresholds.is_null() {
                return Err(fail(MrStatus::NullPointer, "`orders` or `thresholds` is null"));
            }
            let pairs = (0..num_orders).map(|i| (*orders.add(i), *thresholds.add(i)));
            lift(NGramPenaltyConfig::new(pairs, penalty))?
        };
        *out(out_reward, "out_reward")? = metrics::ngram_loop_reward(text, &config);
        Ok(())
    })
}

/// # Safety
/// `out_weights` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mr_default_weights(task: MrTask, out_weights: *mut MrRewardWeights) -> MrStatus {
    guard(|| {
        *out(out_weights, "out_weights")? = reward::default_weights(task.into()).into();
        Ok(())
    })
}

/// Heuristic reward with the built-in overlap entailment stand-in and the
/// default loop penalty. `weights` may be NULL for the task defaults.
///
/// # Safety
/// String arguments must be NUL-terminated; `weights` NULL or readable.
#[no_mangle]
pub unsafe extern "C" fn mr_reward(
    task: MrTask,
    source: *const c_char,
    prediction: *const c_char,
    weights: *const MrRewardWeights,
    out_breakdown: *mut MrRewardBreakdown,
) -> MrStatus {
    guard(|| {
        let weights: Option<RewardWeights> = weights.as_ref().map(|w| (*w).into());
        let b = lift(reward::heuristic_reward(
            task.into(),
            str_arg(source, "source")?,
            str_arg(prediction, "prediction")?,
            &StubNli,
            &NGramPenaltyConfig::default(),
            weights.as_ref(),
        ))?;
        *out(out_breakdown, "out_breakdown")? = MrRewardBreakdown {
            nli: b.nli,
            rnli: b.rnli,
            length_ratio: b.length_ratio,
            edit_ratio: b.edit_ratio,
            ngram_reward: b.ngram_reward,
            weights: b.weights.into(),
            total: b.total,
        };
        Ok(())
    })
}

/// Scripted backend from a JSON mock script.
///
/// # Safety
/// `script_json` must be NUL-terminated; `out_backend` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_backend_mock_new(script_json: *const c_char, out_backend: *mut *mut MrBackend) -> MrStatus {
    guard(|| {
        let slot = out(out_backend, "out_backend")?;
        let backend = lift(MockBackend::from_json(str_arg(script_json, "script_json")?))?;
        *slot = Box::into_raw(Box::new(MrBackend {
            inner: Arc::new(backend),
        }));
        Ok(())
    })
}

/// HTTP backend. `auth_token` may be NULL; `timeout_ms == 0` keeps the
/// default timeout.
///
/// # Safety
/// `endpoint` must be NUL-terminated; `out_backend` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_backend_remote_new(
    endpoint: *const c_char,
    auth_token: *const c_char,
    timeout_ms: u64,
    out_backend: *mut *mut MrBackend,
) -> MrStatus {
    guard(|| {
        let slot = out(out_backend, "out_backend")?;
        let mut config = RemoteConfig::new(str_arg(endpoint, "endpoint")?);
        config.auth_token = opt_str_arg(auth_token, "auth_token")?.map(str::to_owned);
        if timeout_ms > 0 {
            config.timeout = Duration::from_millis(timeout_ms);
        }
        let backend = lift(RemoteBackend::new(config))?;
        *slot = Box::into_raw(Box::new(MrBackend {
            inner: Arc::new(backend),
        }));
        Ok(())
    })
}

/// # Safety
/// `backend` must be NULL or a live handle from `mr_backend_*_new`.
#[no_mangle]
pub unsafe extern "C" fn mr_backend_free(backend: *mut MrBackend) {
    if !backend.is_null() {
        drop(Box::from_raw(backend));
    }
}

/// Normalized self-critique suffix score of `response` to `prompt`.
///
/// # Safety
/// `backend` must be a live handle; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mr_suffix_score(
    backend: *const MrBackend,
    prompt: *const c_char,
    response: *const c_char,
    out_score: *mut f64,
) -> MrStatus {
    guard(|| {
        let b = handle(backend, "backend")?;
        let s = lift(modelio::suffix_score(
            b.inner.as_ref(),
            str_arg(prompt, "prompt")?,
            str_arg(response, "response")?,
            &SuffixConfig::default(),
        ))?;
        *out(out_score, "out_score")? = s.value;
        Ok(())
    })
}

/// # Safety
/// `out_config` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mr_cascade_config_default(out_config: *mut MrCascadeConfig) -> MrStatus {
    guard(|| {
        let c = CascadeConfig::default();
        *out(out_config, "out_config")? = MrCascadeConfig {
            gamma: c.gamma,
            num_samples: c.num_samples,
            temperature: c.temperature,
            max_tokens: c.max_tokens,
        };
        Ok(())
    })
}

/// Routes one prompt through the cascade. The chosen text is written to
/// `out_text` (free with `mr_string_free`).
///
/// # Safety
/// Handles must be live; `config` readable; out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn mr_route(
    on_device: *const MrBackend,
    server: *const MrBackend,
    prompt: *const c_char,
    config: *const MrCascadeConfig,
    out_text: *mut *mut c_char,
    out_origin: *mut MrOrigin,
    out_score: *mut f64,
) -> MrStatus {
    guard(|| {
        let device = handle(on_device, "on_device")?;
        let server = handle(server, "server")?;
        let config: CascadeConfig = (*handle(config, "config")?).into();
        let (text_slot, origin_slot, score_slot) = (
            out(out_text, "out_text")?,
            out(out_origin, "out_origin")?,
            out(out_score, "out_score")?,
        );
        let d = lift(cascade::route(
            str_arg(prompt, "prompt")?,
            device.inner.as_ref(),
            server.inner.as_ref(),
            &config,
            &SuffixConfig::default(),
        ))?;
        *origin_slot = match d.origin {
            Origin::OnDevice => MrOrigin::OnDevice,
            Origin::Server => MrOrigin::Server,
        };
        *score_slot = d.suffix_score;
        *text_slot = into_c_string(d.chosen_text);
        Ok(())
    })
}

/// Parses a JSONL cascade log.
///
/// # Safety
/// `jsonl` must be NUL-terminated; `out_log` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_cascade_log_parse(jsonl: *const c_char, out_log: *mut *mut MrCascadeLog) -> MrStatus {
    guard(|| {
        let slot = out(out_log, "out_log")?;
        let records = lift(cascade::read_log(str_arg(jsonl, "jsonl")?))?;
        *slot = Box::into_raw(Box::new(MrCascadeLog { records }));
        Ok(())
    })
}

/// Number of records in the log, 0 for NULL.
///
/// # Safety
/// `log` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mr_cascade_log_len(log: *const MrCascadeLog) -> usize {
    log.as_ref().map_or(0, |l| l.records.len())
}

/// # Safety
/// `log` must be NULL or a live handle from `mr_cascade_log_parse`.
#[no_mangle]
pub unsafe extern "C" fn mr_cascade_log_free(log: *mut MrCascadeLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// Replays the log at each of `num_gammas` thresholds, filling the two
/// caller-allocated arrays of the same length.
///
/// # Safety
/// `gammas`, `out_on_device_ratio` and `out_success_rate` must each hold
/// `num_gammas` values.
#[no_mangle]
pub unsafe extern "C" fn mr_sweep(
    log: *const MrCascadeLog,
    gammas: *const f64,
    num_gammas: usize,
    key: MrScoreKey,
    out_on_device_ratio: *mut f64,
    out_success_rate: *mut f64,
) -> MrStatus {
    guard(|| {
        let log = handle(log, "log")?;
        if num_gammas == 0 {
            return Err(fail(MrStatus::InvalidArgument, "gamma grid is empty"));
        }
        if gammas.is_null() || out_on_device_ratio.is_null() || out_success_rate.is_null() {
            return Err(fail(MrStatus::NullPointer, "array argument is null"));
        }
        let grid = std::slice::from_raw_parts(gammas, num_gammas);
        let points = lift(cascade::sweep_thresholds(&log.records, grid, key.into()))?;
        for (i, p) in points.iter().enumerate() {
            *out_on_device_ratio.add(i) = p.on_device_ratio;
            *out_success_rate.add(i) = p.success_rate;
        }
        Ok(())
    })
}

/// Largest threshold whose on-device ratio still meets `target`.
///
/// # Safety
/// `log` must be a live handle; `out_gamma` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_pick_gamma(
    log: *const MrCascadeLog,
    target: f64,
    key: MrScoreKey,
    out_gamma: *mut f64,
) -> MrStatus {
    guard(|| {
        let log = handle(log, "log")?;
        *out(out_gamma, "out_gamma")? = lift(cascade::pick_gamma_for_budget(&log.records, target, key.into()))?;
        Ok(())
    })
}

/// Critique prompt for one (instruction, source, response). Free the result
/// with `mr_string_free`.
///
/// # Safety
/// Strings must be NUL-terminated; `out_prompt` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_critique_prompt(
    instruction: *const c_char,
    source: *const c_char,
    response: *const c_char,
    out_prompt: *mut *mut c_char,
) -> MrStatus {
    guard(|| {
        let slot = out(out_prompt, "out_prompt")?;
        let p = lift(datagen::build_critique_prompt(
            str_arg(instruction, "instruction")?,
            str_arg(source, "source")?,
            str_arg(response, "response")?,
        ))?;
        *slot = into_c_string(p);
        Ok(())
    })
}

/// # Safety
/// `judge_output` must be NUL-terminated; `out_verdict` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_parse_verdict(judge_output: *const c_char, out_verdict: *mut MrVerdict) -> MrStatus {
    guard(|| {
        let v = datagen::parse_verdict(str_arg(judge_output, "judge_output")?);
        *out(out_verdict, "out_verdict")? = match v {
            Verdict::Good => MrVerdict::Good,
            Verdict::Bad => MrVerdict::Bad,
            Verdict::Unparseable => MrVerdict::Unparseable,
        };
        Ok(())
    })
}
