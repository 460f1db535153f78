use std::collections::HashMap;

use serde::Serialize;

use crate::bleu::MetricScore;
use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankCorrelation {
    Kendall,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibesConfig {
    /// Exponent on unigram precision, in `[0, 1]`.
    pub alpha: f64,
    pub correlation: RankCorrelation,
}

impl Default for RibesConfig {
    fn default() -> Self {
        RibesConfig {
            alpha: 0.25,
            correlation: RankCorrelation::Kendall,
        }
    }
}

impl RibesConfig {
    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.alpha) {
            Ok(())
        } else {
            Err(Error::InvalidConfig("RIBES alpha must lie in [0, 1]".into()))
        }
    }
}

/// Reference positions of aligned hypothesis words, in hypothesis order.
///
/// Words occurring exactly once in both strings are aligned directly; the
/// remaining words take the leftmost free reference position holding the same
/// word.
pub fn ribes_alignment(hyp: &[String], reference: &[String]) -> Vec<usize> {
    let mut hyp_freq: HashMap<&str, usize> = HashMap::new();
    for w in hyp {
        *hyp_freq.entry(w).or_default() += 1;
    }
    let mut ref_pos: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, w) in reference.iter().enumerate() {
        ref_pos.entry(w).or_default().push(j);
    }

    let mut used = vec![false; reference.len()];
    let mut aligned: Vec<Option<usize>> = vec![None; hyp.len()];
    for (i, w) in hyp.iter().enumerate() {
        if let Some(positions) = ref_pos.get(w.as_str()) {
            if positions.len() == 1 && hyp_freq[w.as_str()] == 1 {
                aligned[i] = Some(positions[0]);
                used[positions[0]] = true;
            }
        }
    }
    for (i, w) in hyp.iter().enumerate() {
        if aligned[i].is_some() {
            continue;
        }
        if let Some(positions) = ref_pos.get(w.as_str()) {
            if let Some(&j) = positions.iter().find(|&&j| !used[j]) {
                used[j] = true;
                aligned[i] = Some(j);
            }
        }
    }
    aligned.into_iter().flatten().collect()
}

/// Kendall's tau of a sequence of distinct ranks against their index order.
pub fn kendall_tau(ranks: &[usize]) -> f64 {
    let n = ranks.len();
    if n < 2 {
        return 0.0;
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            if ranks[i] < ranks[j] {
                concordant += 1;
            } else if ranks[i] > ranks[j] {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    (concordant - discordant) as f64 / pairs
}

/// Spearman's rho of a sequence of distinct values against their index order.
pub fn spearman_rho(values: &[usize]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| values[i]);
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let d2: f64 = rank
        .iter()
        .enumerate()
        .map(|(i, &r)| (i as f64 - r as f64).powi(2))
        .sum();
    let n = n as f64;
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

fn pair_ribes(hyp: &[String], reference: &[String], cfg: &RibesConfig) -> f64 {
    let aligned = ribes_alignment(hyp, reference);
    if aligned.len() < 2 {
        return 0.0;
    }
    let coefficient = match cfg.correlation {
        RankCorrelation::Kendall => kendall_tau(&aligned),
        RankCorrelation::Spearman => spearman_rho(&aligned),
    };
    let normalized = (coefficient + 1.0) / 2.0;
    let precision = aligned.len() as f64 / hyp.len() as f64;
    normalized * precision.powf(cfg.alpha)
}

/// Mean over pairs of the normalized rank correlation times `precision^alpha`,
/// taking the best reference per pair. Pairs with fewer than two aligned words
/// score 0.
pub fn ribes_score(corpus: &ParallelCorpus, cfg: &RibesConfig) -> Result<MetricScore> {
    cfg.validate()?;
    corpus.ensure_non_empty()?;
    let per_sentence: Vec<f64> = corpus
        .pairs()
        .iter()
        .map(|p| {
            p.references
                .iter()
                .map(|r| pair_ribes(&p.hypothesis, r, cfg))
                .fold(0.0, f64::max)
        })
        .collect();
    let mean = per_sentence.iter().sum::<f64>() / per_sentence.len() as f64;
    let mut score = MetricScore::new("ribes", mean);
    score.per_sentence = per_sentence;
    score.details.insert("alpha".into(), cfg.alpha);
    Ok(score)
}
