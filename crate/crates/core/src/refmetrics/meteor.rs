use serde::Serialize;

use crate::bleu::MetricScore;
use crate::corpus::{ParallelCorpus, SynonymLexicon};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeteorResult {
    pub precision: f64,
    pub recall: f64,
    pub matched_unigrams: usize,
    pub chunks: usize,
    pub penalty: f64,
    pub score: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_sentence: Vec<f64>,
}

impl MeteorResult {
    fn from_counts(matched: usize, chunks: usize, hyp_len: usize, ref_len: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(matched, hyp_len);
        let recall = ratio(matched, ref_len);
        let penalty = 0.5 * ratio(chunks, matched);
        let score = if matched == 0 {
            0.0
        } else {
            let fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
            fmean * (1.0 - penalty)
        };
        MeteorResult {
            precision,
            recall,
            matched_unigrams: matched,
            chunks,
            penalty,
            score,
            per_sentence: Vec::new(),
        }
    }

    pub fn to_metric_score(&self) -> MetricScore {
        let mut s = MetricScore::new("meteor", self.score);
        s.per_sentence = self.per_sentence.clone();
        s.details.insert("precision".into(), self.precision);
        s.details.insert("recall".into(), self.recall);
        s.details.insert("matched_unigrams".into(), self.matched_unigrams as f64);
        s.details.insert("chunks".into(), self.chunks as f64);
        s.details.insert("penalty".into(), self.penalty);
        s
    }
}

type MatchFn<'a> = dyn Fn(&str, &str) -> bool + 'a;

fn pick(
    candidates: impl Iterator<Item = usize>,
    used: &[bool],
    continues: Option<usize>,
) -> Option<usize> {
    let mut first = None;
    for j in candidates.filter(|&j| !used[j]) {
        if Some(j) == continues {
            return Some(j);
        }
        first.get_or_insert(j);
    }
    first
}

/// One-to-one unigram alignment: exact matches first, then lexicon synonyms.
///
/// Within a stage hypothesis words are visited left to right; each takes the
/// reference position that extends the previous word's chunk if possible,
/// otherwise the leftmost free one.
pub fn align_unigrams(hyp: &[String], reference: &[String], lexicon: &SynonymLexicon) -> Vec<Option<usize>> {
    let mut alignment: Vec<Option<usize>> = vec![None; hyp.len()];
    let mut used = vec![false; reference.len()];

    let stages: [&MatchFn; 2] = [&|h, r| h == r, &|h, r| lexicon.contains_pair(h, r)];
    for matches in stages {
        for i in 0..hyp.len() {
            if alignment[i].is_some() {
                continue;
            }
            let continues = i
                .checked_sub(1)
                .and_then(|p| alignment[p])
                .map(|j| j + 1);
            let candidates = (0..reference.len()).filter(|&j| matches(&hyp[i], &reference[j]));
            if let Some(j) = pick(candidates, &used, continues) {
                used[j] = true;
                alignment[i] = Some(j);
            }
        }
    }
    alignment
}

/// Number of maximal runs of aligned words that are contiguous in both strings.
pub fn count_chunks(alignment: &[Option<usize>]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<usize> = None;
    for a in alignment {
        match (prev, *a) {
            (Some(p), Some(j)) if j == p + 1 => {}
            (_, Some(_)) => chunks += 1,
            _ => {}
        }
        prev = *a;
    }
    chunks
}

struct SentenceCounts {
    matched: usize,
    chunks: usize,
    hyp_len: usize,
    ref_len: usize,
}

fn sentence_counts(hyp: &[String], reference: &[String], lexicon: &SynonymLexicon) -> SentenceCounts {
    let alignment = align_unigrams(hyp, reference, lexicon);
    SentenceCounts {
        matched: alignment.iter().flatten().count(),
        chunks: count_chunks(&alignment),
        hyp_len: hyp.len(),
        ref_len: reference.len(),
    }
}

/// METEOR of a single hypothesis/reference pair.
pub fn meteor_sentence(hyp: &[String], reference: &[String], lexicon: &SynonymLexicon) -> MeteorResult {
    let c = sentence_counts(hyp, reference, lexicon);
    MeteorResult::from_counts(c.matched, c.chunks, c.hyp_len, c.ref_len)
}

/// Corpus METEOR. Each pair is scored against its best reference; matches,
/// chunks and lengths are then pooled.
pub fn meteor_score(corpus: &ParallelCorpus, lexicon: &SynonymLexicon) -> Result<MeteorResult> {
    corpus.ensure_non_empty()?;
    let (mut matched, mut chunks, mut hyp_len, mut ref_len) = (0, 0, 0, 0);
    let mut per_sentence = Vec::with_capacity(corpus.len());
    for pair in corpus.pairs() {
        let mut best: Option<(f64, SentenceCounts)> = None;
        for reference in &pair.references {
            let c = sentence_counts(&pair.hypothesis, reference, lexicon);
            let s = MeteorResult::from_counts(c.matched, c.chunks, c.hyp_len, c.ref_len).score;
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                best = Some((s, c));
            }
        }
        let (s, c) = best.expect("pairs have at least one reference");
        per_sentence.push(s);
        matched += c.matched;
        chunks += c.chunks;
        hyp_len += c.hyp_len;
        ref_len += c.ref_len;
    }
    let mut result = MeteorResult::from_counts(matched, chunks, hyp_len, ref_len);
    result.per_sentence = per_sentence;
    Ok(result)
}
