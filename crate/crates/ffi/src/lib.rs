//! C interface to `ebleu-core`.
//!
//! Corpora and lexicons live behind opaque handles created and freed through
//! this API. Every fallible function returns an [`EbleuStatus`] and writes its
//! result through an out-pointer; on failure [`ebleu_last_error`] describes
//! what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use libc::{c_char, size_t};

use ebleu_core::bleu::{bleu_score, BleuConfig};
use ebleu_core::corpus::{
    load_parallel_corpus, load_synonym_lexicon, tokenize, EvalPair, ParallelCorpus, SynonymLexicon, TokenizerConfig,
};
use ebleu_core::ebleu::{ebleu_score, EbleuConfig};
use ebleu_core::refmetrics::{
    lepor_score, meteor_score, nist_score, ribes_score, ter_score, LeporConfig, RibesConfig, TerConfig,
};
use ebleu_core::{stats, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbleuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    /// Malformed or misaligned input data.
    InvalidInput = 4,
    /// A parameter outside its allowed range.
    InvalidArgument = 5,
    EmptyCorpus = 6,
    /// The statistic is undefined for this data (for example zero variance).
    Undefined = 7,
    Panic = 8,
}

impl From<&Error> for EbleuStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => EbleuStatus::Io,
            Error::Encoding { .. } => EbleuStatus::InvalidUtf8,
            Error::LineCountMismatch { .. }
            | Error::MalformedLine { .. }
            | Error::InvalidCorpus(_)
            | Error::Parse { .. }
            | Error::SchemaMismatch(_)
            | Error::LengthMismatch(..)
            | Error::InvalidTable(_) => EbleuStatus::InvalidInput,
            Error::InvalidPercent(_) | Error::InvalidConfig(_) | Error::OrderMismatch { .. } => {
                EbleuStatus::InvalidArgument
            }
            Error::EmptyCorpus => EbleuStatus::EmptyCorpus,
            Error::TooFewObservations(_)
            | Error::ZeroVariance
            | Error::DegenerateTable
            | Error::InsufficientDistinctValues { .. } => EbleuStatus::Undefined,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Failure(EbleuStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(EbleuStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EbleuStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, turning errors and panics into a status plus last-error message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> EbleuStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => EbleuStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            EbleuStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(EbleuStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn read_str_array<'a>(p: *const *const c_char, len: size_t, what: &str) -> Result<Vec<&'a str>, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    (0..len).map(|i| read_str(*p.add(i), what)).collect()
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Opaque corpus handle.
pub struct EbleuCorpus {
    corpus: ParallelCorpus,
    tokenizer: TokenizerConfig,
}

/// Opaque synonym lexicon handle.
pub struct EbleuLexicon {
    lexicon: SynonymLexicon,
}

/// EBLEU parameters. `max_order` also sets the BLEU order.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbleuParams {
    pub max_order: u32,
    pub synonym_score: f64,
    pub rare_words_percent: f64,
    pub rare_words_score: f64,
    /// Floor for zero order scores; 0 disables smoothing.
    pub epsilon: f64,
}

#[no_mangle]
pub extern "C" fn ebleu_params_default() -> EbleuParams {
    let d = EbleuConfig::default();
    EbleuParams {
        max_order: d.max_order as u32,
        synonym_score: d.synonym_score,
        rare_words_percent: d.rare_words_percent,
        rare_words_score: d.rare_words_score,
        epsilon: d.smoothing_epsilon,
    }
}

impl From<&EbleuParams> for EbleuConfig {
    fn from(p: &EbleuParams) -> Self {
        EbleuConfig {
            max_order: p.max_order as usize,
            synonym_score: p.synonym_score,
            rare_words_percent: p.rare_words_percent,
            rare_words_score: p.rare_words_score,
            smoothing_epsilon: p.epsilon,
        }
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ebleu_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates an empty corpus whose pairs each carry `ref_count` references.
/// Sentences added later are tokenized with the given switches.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn ebleu_corpus_new(
    ref_count: u32,
    lowercase: bool,
    split_punctuation: bool,
    out: *mut *mut EbleuCorpus,
) -> EbleuStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let corpus = ParallelCorpus::new(Vec::new(), ref_count as usize)?;
        let handle = EbleuCorpus {
            corpus,
            tokenizer: TokenizerConfig {
                lowercase,
                split_punctuation,
            },
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// Appends one hypothesis with exactly `ref_count` references.
///
/// # Safety
/// `corpus` must come from this library; `hypothesis` and each of the
/// `n_refs` entries of `references` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ebleu_corpus_add_pair(
    corpus: *mut EbleuCorpus,
    hypothesis: *const c_char,
    references: *const *const c_char,
    n_refs: size_t,
) -> EbleuStatus {
    guard(|| {
        let handle = corpus.as_mut().ok_or_else(|| null("corpus"))?;
        let hyp = read_str(hypothesis, "hypothesis")?;
        let refs = read_str_array(references, n_refs, "references")?;
        let cfg = handle.tokenizer;
        let pair = EvalPair::new(tokenize(hyp, &cfg), refs.iter().map(|r| tokenize(r, &cfg)).collect())?;
        handle.corpus.push(pair)?;
        Ok(())
    })
}

/// Loads a line-aligned hypothesis file and `n_refs` reference files.
///
/// # Safety
/// Path arguments must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_corpus_load(
    hyp_path: *const c_char,
    ref_paths: *const *const c_char,
    n_refs: size_t,
    lowercase: bool,
    split_punctuation: bool,
    out: *mut *mut EbleuCorpus,
) -> EbleuStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let hyp = PathBuf::from(read_str(hyp_path, "hyp_path")?);
        let refs: Vec<PathBuf> = read_str_array(ref_paths, n_refs, "ref_paths")?
            .into_iter()
            .map(PathBuf::from)
            .collect();
        let tokenizer = TokenizerConfig {
            lowercase,
            split_punctuation,
        };
        let corpus = load_parallel_corpus(hyp, &refs, &tokenizer)?;
        *out = Box::into_raw(Box::new(EbleuCorpus { corpus, tokenizer }));
        Ok(())
    })
}

/// Number of pairs, or 0 for a null handle.
///
/// # Safety
/// `corpus` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ebleu_corpus_len(corpus: *const EbleuCorpus) -> size_t {
    corpus.as_ref().map_or(0, |h| h.corpus.len())
}

/// # Safety
/// `corpus` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn ebleu_corpus_free(corpus: *mut EbleuCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_lexicon_new(out: *mut *mut EbleuLexicon) -> EbleuStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(EbleuLexicon {
            lexicon: SynonymLexicon::new(),
        }));
        Ok(())
    })
}

/// Adds a set of mutually synonymous words. Words are used as given.
///
/// # Safety
/// `lexicon` must come from this library; `words` must hold `n_words`
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ebleu_lexicon_add_synset(
    lexicon: *mut EbleuLexicon,
    words: *const *const c_char,
    n_words: size_t,
) -> EbleuStatus {
    guard(|| {
        let handle = lexicon.as_mut().ok_or_else(|| null("lexicon"))?;
        let words = read_str_array(words, n_words, "words")?;
        handle.lexicon.add_synset(words);
        Ok(())
    })
}

/// Loads a synonym file (one comma-separated set per line), normalizing
/// words with the given tokenizer switches.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_lexicon_load(
    path: *const c_char,
    lowercase: bool,
    split_punctuation: bool,
    out: *mut *mut EbleuLexicon,
) -> EbleuStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = read_str(path, "path")?;
        let cfg = TokenizerConfig {
            lowercase,
            split_punctuation,
        };
        let lexicon = load_synonym_lexicon(path, &cfg)?;
        *out = Box::into_raw(Box::new(EbleuLexicon { lexicon }));
        Ok(())
    })
}

/// Number of words with at least one synonym, or 0 for a null handle.
///
/// # Safety
/// `lexicon` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ebleu_lexicon_len(lexicon: *const EbleuLexicon) -> size_t {
    lexicon.as_ref().map_or(0, |h| h.lexicon.len())
}

/// # Safety
/// `lexicon` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn ebleu_lexicon_free(lexicon: *mut EbleuLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

unsafe fn corpus_ref<'a>(corpus: *const EbleuCorpus) -> Result<&'a ParallelCorpus, Failure> {
    corpus.as_ref().map(|h| &h.corpus).ok_or_else(|| null("corpus"))
}

/// Null lexicon means no synonyms.
unsafe fn lexicon_or_empty(lexicon: *const EbleuLexicon, empty: &SynonymLexicon) -> &SynonymLexicon {
    lexicon.as_ref().map_or(empty, |h| &h.lexicon)
}

unsafe fn score_into(
    out: *mut f64,
    score: impl FnOnce() -> Result<f64, Failure>,
) -> EbleuStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = score()?;
        Ok(())
    })
}

/// Corpus EBLEU in [0, 1]. `lexicon` may be null; `params` null means defaults.
///
/// # Safety
/// Handles must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_score_ebleu(
    corpus: *const EbleuCorpus,
    lexicon: *const EbleuLexicon,
    params: *const EbleuParams,
    out: *mut f64,
) -> EbleuStatus {
    score_into(out, || {
        let corpus = corpus_ref(corpus)?;
        let empty = SynonymLexicon::new();
        let cfg = params.as_ref().map_or_else(EbleuConfig::default, EbleuConfig::from);
        Ok(ebleu_score(corpus, lexicon_or_empty(lexicon, &empty), &cfg)?.corpus_score)
    })
}

/// Corpus BLEU with uniform weights up to `max_order`.
///
/// # Safety
/// `corpus` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_score_bleu(
    corpus: *const EbleuCorpus,
    max_order: u32,
    epsilon: f64,
    out: *mut f64,
) -> EbleuStatus {
    score_into(out, || {
        let cfg = BleuConfig::uniform(max_order as usize).with_epsilon(epsilon);
        Ok(bleu_score(corpus_ref(corpus)?, &cfg)?.corpus_score)
    })
}

/// Corpus NIST (unbounded, higher is better).
///
/// # Safety
/// `corpus` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_score_nist(corpus: *const EbleuCorpus, max_order: u32, out: *mut f64) -> EbleuStatus {
    score_into(out, || Ok(nist_score(corpus_ref(corpus)?, max_order as usize)?.corpus_score))
}

/// Corpus TER as a fraction (lower is better).
///
/// # Safety
/// `corpus` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_score_ter(corpus: *const EbleuCorpus, out: *mut f64) -> EbleuStatus {
    score_into(out, || Ok(ter_score(corpus_ref(corpus)?, &TerConfig::default())?.corpus_score))
}

/// Corpus METEOR; `lexicon` may be null.
///
/// # Safety
/// Handles must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_score_meteor(
    corpus: *const EbleuCorpus,
    lexicon: *const EbleuLexicon,
    out: *mut f64,
) -> EbleuStatus {
    score_into(out, || {
        let empty = SynonymLexicon::new();
        Ok(meteor_score(corpus_ref(corpus)?, lexicon_or_empty(lexicon, &empty))?.score)
    })
}

/// # Safety
/// `corpus` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_score_lepor(corpus: *const EbleuCorpus, out: *mut f64) -> EbleuStatus {
    score_into(out, || Ok(lepor_score(corpus_ref(corpus)?, &LeporConfig::default())?.corpus_score))
}

/// # Safety
/// `corpus` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_score_ribes(corpus: *const EbleuCorpus, out: *mut f64) -> EbleuStatus {
    score_into(out, || Ok(ribes_score(corpus_ref(corpus)?, &RibesConfig::default())?.corpus_score))
}

unsafe fn read_f64s<'a>(p: *const f64, n: size_t, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Pearson correlation of two arrays of length `n`.
///
/// # Safety
/// `x` and `y` must each point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_pearson(x: *const f64, y: *const f64, n: size_t, out: *mut f64) -> EbleuStatus {
    score_into(out, || {
        let r = stats::pearson(read_f64s(x, n, "x")?, read_f64s(y, n, "y")?)?;
        Ok(r.coefficient)
    })
}

/// Spearman correlation. `out_p` may be null; it receives the two-tailed
/// p-value, or NaN when fewer than three observations are given.
///
/// # Safety
/// `x` and `y` must each point to `n` readable doubles; `out_rho` must be
/// writable, `out_p` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ebleu_spearman(
    x: *const f64,
    y: *const f64,
    n: size_t,
    out_rho: *mut f64,
    out_p: *mut f64,
) -> EbleuStatus {
    guard(|| {
        let rho = out_ptr(out_rho, "out_rho")?;
        let r = stats::spearman(read_f64s(x, n, "x")?, read_f64s(y, n, "y")?)?;
        *rho = r.coefficient;
        if let Some(p) = out_p.as_mut() {
            *p = r.two_tailed_p.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}
