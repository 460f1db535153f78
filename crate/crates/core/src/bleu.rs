//! Corpus-level BLEU: brevity penalty times the weighted geometric mean of
//! pooled modified n-gram precisions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{ParallelCorpus, TokenSequence};
use crate::error::{Error, Result};
use crate::ngram::{match_stats, MatchStats};

/// Corpus score plus per-sentence breakdown and named intermediate values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricScore {
    pub metric: String,
    pub corpus_score: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_sentence: Vec<f64>,
    pub details: BTreeMap<String, f64>,
}

impl MetricScore {
    pub fn new(metric: impl Into<String>, corpus_score: f64) -> Self {
        MetricScore {
            metric: metric.into(),
            corpus_score,
            per_sentence: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuConfig {
    pub max_order: usize,
    pub weights: Vec<f64>,
    pub smoothing_epsilon: f64,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig::uniform(4)
    }
}

impl BleuConfig {
    /// Uniform weights `1/N`, no smoothing.
    pub fn uniform(max_order: usize) -> Self {
        let w = 1.0 / max_order.max(1) as f64;
        BleuConfig {
            max_order,
            weights: vec![w; max_order],
            smoothing_epsilon: 0.0,
        }
    }

    pub fn with_weights(weights: Vec<f64>) -> Result<Self> {
        let cfg = BleuConfig {
            max_order: weights.len(),
            weights,
            smoothing_epsilon: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.smoothing_epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 {
            return Err(Error::InvalidConfig("max order must be at least 1".into()));
        }
        if self.weights.len() != self.max_order {
            return Err(Error::InvalidConfig(format!(
                "{} weights given for max order {}",
                self.weights.len(),
                self.max_order
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidConfig("weights must be positive".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("weights sum to {sum}, not 1")));
        }
        if !self.smoothing_epsilon.is_finite() || self.smoothing_epsilon < 0.0 {
            return Err(Error::InvalidConfig("epsilon must be a non-negative number".into()));
        }
        Ok(())
    }
}

/// `1` if `c > r`, else `e^(1 - r/c)`. A zero-length candidate against a
/// non-empty reference gets 0; two empty sides get 1.
pub fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c > r {
        1.0
    } else if c == 0 {
        if r == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// Length of the reference closest to `hyp_len`; ties go to the shorter one.
pub fn effective_ref_length(hyp_len: usize, references: &[TokenSequence]) -> usize {
    references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| (len.abs_diff(hyp_len), len))
        .unwrap_or(0)
}

/// Sufficient statistics for BLEU-style scores: per-order matches and lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BleuStats {
    pub orders: Vec<MatchStats>,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn zero(max_order: usize) -> Self {
        BleuStats {
            orders: vec![MatchStats::default(); max_order],
            hyp_len: 0,
            ref_len: 0,
        }
    }

    pub fn for_pair(hypothesis: &[String], references: &[TokenSequence], max_order: usize) -> Self {
        BleuStats {
            orders: (1..=max_order)
                .map(|n| match_stats(hypothesis, references, n))
                .collect(),
            hyp_len: hypothesis.len(),
            ref_len: effective_ref_length(hypothesis.len(), references),
        }
    }

    pub fn add(&mut self, other: &BleuStats) {
        for (a, b) in self.orders.iter_mut().zip(&other.orders) {
            *a += *b;
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }
}

/// `max(p, eps / total)`; an order with no n-grams at all is floored at `eps`.
pub(crate) fn smoothed(p: f64, total: usize, epsilon: f64) -> f64 {
    if epsilon > 0.0 {
        p.max(epsilon / total.max(1) as f64)
    } else {
        p
    }
}

struct BleuParts {
    score: f64,
    precisions: Vec<f64>,
    bp: f64,
}

fn combine(stats: &BleuStats, cfg: &BleuConfig) -> BleuParts {
    let precisions: Vec<f64> = stats
        .orders
        .iter()
        .map(|s| smoothed(s.precision(), s.total, cfg.smoothing_epsilon))
        .collect();
    let bp = brevity_penalty(stats.hyp_len, stats.ref_len);
    let score = if precisions.iter().any(|&p| p <= 0.0) {
        0.0
    } else {
        let log_sum: f64 = cfg
            .weights
            .iter()
            .zip(&precisions)
            .map(|(w, p)| w * p.ln())
            .sum();
        bp * log_sum.exp()
    };
    BleuParts {
        score,
        precisions,
        bp,
    }
}

/// Corpus BLEU with pooled counts. Per-sentence values apply the same formula
/// to each pair alone.
pub fn bleu_score(corpus: &ParallelCorpus, cfg: &BleuConfig) -> Result<MetricScore> {
    cfg.validate()?;
    corpus.ensure_non_empty()?;

    let mut total = BleuStats::zero(cfg.max_order);
    let mut per_sentence = Vec::with_capacity(corpus.len());
    for pair in corpus.pairs() {
        let stats = BleuStats::for_pair(&pair.hypothesis, &pair.references, cfg.max_order);
        per_sentence.push(combine(&stats, cfg).score);
        total.add(&stats);
    }

    let parts = combine(&total, cfg);
    let mut score = MetricScore::new("bleu", parts.score);
    score.per_sentence = per_sentence;
    for (n, p) in parts.precisions.iter().enumerate() {
        score.details.insert(format!("p_{}", n + 1), *p);
    }
    score.details.insert("brevity_penalty".into(), parts.bp);
    score.details.insert("hyp_length".into(), total.hyp_len as f64);
    score.details.insert("ref_length".into(), total.ref_len as f64);
    Ok(score)
}
