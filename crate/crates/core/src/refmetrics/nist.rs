use std::collections::HashMap;

use crate::bleu::MetricScore;
use crate::corpus::{ParallelCorpus, TokenSequence};
use crate::error::Result;
use crate::ngram::{extract_ngrams, NGramCounts};

pub const NIST_DEFAULT_ORDER: usize = 5;

/// `exp(beta * ln^2(min(c / r, 1)))`, with `beta` chosen so the factor is 0.5
/// when the candidate is two thirds of the reference length.
pub fn nist_brevity_factor(hyp_len: f64, avg_ref_len: f64) -> f64 {
    if avg_ref_len <= 0.0 {
        return 1.0;
    }
    let beta = 0.5f64.ln() / (2.0f64 / 3.0).ln().powi(2);
    let ratio = (hyp_len / avg_ref_len).min(1.0);
    (beta * ratio.ln().powi(2)).exp()
}

/// N-gram counts over every reference sentence in the corpus.
struct InfoTable {
    counts: HashMap<Vec<String>, usize>,
    total_words: usize,
}

impl InfoTable {
    fn build<'a>(references: impl Iterator<Item = &'a TokenSequence>, max_order: usize) -> Self {
        let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
        let mut total_words = 0;
        for sentence in references {
            total_words += sentence.len();
            for n in 1..=max_order {
                if sentence.len() < n {
                    break;
                }
                for window in sentence.windows(n) {
                    *counts.entry(window.to_vec()).or_default() += 1;
                }
            }
        }
        InfoTable { counts, total_words }
    }

    /// `log2(count(prefix) / count(gram))`; the empty prefix counts every word.
    fn info(&self, gram: &[String]) -> f64 {
        let count = self.counts.get(gram).copied().unwrap_or(0);
        if count == 0 {
            return 0.0;
        }
        let prefix = if gram.len() == 1 {
            self.total_words
        } else {
            self.counts.get(&gram[..gram.len() - 1]).copied().unwrap_or(0)
        };
        (prefix as f64 / count as f64).log2()
    }
}

#[derive(Debug, Clone)]
struct NistStats {
    info: Vec<f64>,
    totals: Vec<usize>,
    hyp_len: usize,
    avg_ref_len: f64,
}

impl NistStats {
    fn score(&self) -> f64 {
        let sum: f64 = self
            .info
            .iter()
            .zip(&self.totals)
            .filter(|(_, &t)| t > 0)
            .map(|(i, &t)| i / t as f64)
            .sum();
        sum * nist_brevity_factor(self.hyp_len as f64, self.avg_ref_len)
    }
}

fn pair_stats(hyp: &TokenSequence, refs: &[TokenSequence], table: &InfoTable, max_order: usize) -> NistStats {
    let mut info = Vec::with_capacity(max_order);
    let mut totals = Vec::with_capacity(max_order);
    for n in 1..=max_order {
        let hyp_counts = extract_ngrams(hyp, n);
        let ref_counts: Vec<_> = refs.iter().map(|r| extract_ngrams(r, n)).collect();
        let max_ref = NGramCounts::max_over(n, &ref_counts).expect("same order");
        let mut grams: Vec<_> = hyp_counts.iter().collect();
        grams.sort_unstable();
        let matched: f64 = grams
            .into_iter()
            .map(|(gram, c)| c.min(max_ref.get(gram)) as f64 * table.info(gram))
            .sum();
        info.push(matched);
        totals.push(hyp_counts.total());
    }
    let avg_ref_len = refs.iter().map(|r| r.len()).sum::<usize>() as f64 / refs.len() as f64;
    NistStats {
        info,
        totals,
        hyp_len: hyp.len(),
        avg_ref_len,
    }
}

/// Information-weighted n-gram co-occurrence score, summed over orders
/// `1..=max_order`. Weights come from n-gram counts over all references.
pub fn nist_score(corpus: &ParallelCorpus, max_order: usize) -> Result<MetricScore> {
    corpus.ensure_non_empty()?;
    if max_order == 0 {
        return Err(crate::Error::InvalidConfig("NIST order must be at least 1".into()));
    }
    let table = InfoTable::build(corpus.references(), max_order);

    let mut pooled = NistStats {
        info: vec![0.0; max_order],
        totals: vec![0; max_order],
        hyp_len: 0,
        avg_ref_len: 0.0,
    };
    let mut per_sentence = Vec::with_capacity(corpus.len());
    for pair in corpus.pairs() {
        let stats = pair_stats(&pair.hypothesis, &pair.references, &table, max_order);
        per_sentence.push(stats.score());
        for n in 0..max_order {
            pooled.info[n] += stats.info[n];
            pooled.totals[n] += stats.totals[n];
        }
        pooled.hyp_len += stats.hyp_len;
        pooled.avg_ref_len += stats.avg_ref_len;
    }

    let mut score = MetricScore::new("nist", pooled.score());
    score.per_sentence = per_sentence;
    for n in 0..max_order {
        let term = if pooled.totals[n] > 0 {
            pooled.info[n] / pooled.totals[n] as f64
        } else {
            0.0
        };
        score.details.insert(format!("info_{}", n + 1), term);
    }
    score.details.insert(
        "brevity_factor".into(),
        nist_brevity_factor(pooled.hyp_len as f64, pooled.avg_ref_len),
    );
    Ok(score)
}
