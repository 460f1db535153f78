use crate::bleu::MetricScore;
use crate::corpus::{ParallelCorpus, TokenSequence};
use crate::error::Result;

/// Bounds on the greedy phrase-shift search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerConfig {
    pub max_shift_phrase: usize,
    pub max_shift_distance: usize,
}

impl Default for TerConfig {
    fn default() -> Self {
        TerConfig {
            max_shift_phrase: 10,
            max_shift_distance: 50,
        }
    }
}

/// Word-level Levenshtein distance with unit costs.
pub fn edit_distance<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> usize {
    let mut prev: Vec<usize> = (0..=reference.len()).collect();
    let mut cur = vec![0; reference.len() + 1];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i + 1;
        for (j, r) in reference.iter().enumerate() {
            let sub = prev[j] + usize::from(h.as_ref() != r.as_ref());
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[reference.len()]
}

/// Moves `tokens[start..start + len]` so that it begins at index `dest` of the
/// resulting sequence.
pub fn apply_shift<T: Clone>(tokens: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let phrase = &tokens[start..start + len];
    let mut rest: Vec<T> = Vec::with_capacity(tokens.len());
    rest.extend_from_slice(&tokens[..start]);
    rest.extend_from_slice(&tokens[start + len..]);
    let mut out = Vec::with_capacity(tokens.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(phrase);
    out.extend_from_slice(&rest[dest..]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerEdits {
    pub shifts: usize,
    pub edits: usize,
}

impl TerEdits {
    pub fn total(&self) -> usize {
        self.shifts + self.edits
    }
}

fn occurs_in(phrase: &[String], reference: &[String]) -> bool {
    reference.windows(phrase.len()).any(|w| w == phrase)
}

/// Greedy shift search followed by edit distance.
///
/// Each round tries every shift of a phrase that also occurs in the reference
/// and keeps the one that lowers the edit distance most, provided the drop
/// exceeds the cost of the shift itself. Stops when no shift pays off.
pub fn ter_edits(hyp: &[String], reference: &[String], cfg: &TerConfig) -> TerEdits {
    let mut current = hyp.to_vec();
    let mut distance = edit_distance(&current, reference);
    let mut shifts = 0;

    loop {
        let mut best: Option<(usize, Vec<String>)> = None;
        let n = current.len();
        for start in 0..n {
            for len in 1..=cfg.max_shift_phrase.min(n - start) {
                if !occurs_in(&current[start..start + len], reference) {
                    break;
                }
                for dest in 0..=n - len {
                    if dest == start || dest.abs_diff(start) > cfg.max_shift_distance {
                        continue;
                    }
                    let candidate = apply_shift(&current, start, len, dest);
                    let d = edit_distance(&candidate, reference);
                    if d + 1 < distance && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, candidate));
                    }
                }
            }
        }
        match best {
            Some((d, candidate)) => {
                current = candidate;
                distance = d;
                shifts += 1;
            }
            None => break,
        }
    }

    TerEdits {
        shifts,
        edits: distance,
    }
}

fn ratio(edits: f64, length: f64) -> f64 {
    if length > 0.0 {
        edits / length
    } else if edits > 0.0 {
        1.0
    } else {
        0.0
    }
}

struct PairTer {
    edits: usize,
    avg_ref_len: f64,
}

fn pair_ter(hyp: &TokenSequence, refs: &[TokenSequence], cfg: &TerConfig) -> PairTer {
    let edits = refs
        .iter()
        .map(|r| ter_edits(hyp, r, cfg).total())
        .min()
        .unwrap_or(0);
    let avg_ref_len = refs.iter().map(|r| r.len()).sum::<usize>() as f64 / refs.len().max(1) as f64;
    PairTer { edits, avg_ref_len }
}

/// Corpus TER as a fraction: total edits over total average reference length.
/// Lower is better. An empty reference side counts any edit as 1.
pub fn ter_score(corpus: &ParallelCorpus, cfg: &TerConfig) -> Result<MetricScore> {
    corpus.ensure_non_empty()?;
    let mut edits = 0usize;
    let mut length = 0.0;
    let mut per_sentence = Vec::with_capacity(corpus.len());
    for pair in corpus.pairs() {
        let p = pair_ter(&pair.hypothesis, &pair.references, cfg);
        per_sentence.push(ratio(p.edits as f64, p.avg_ref_len));
        edits += p.edits;
        length += p.avg_ref_len;
    }
    let mut score = MetricScore::new("ter", ratio(edits as f64, length));
    score.per_sentence = per_sentence;
    score.details.insert("edits".into(), edits as f64);
    score.details.insert("ref_length".into(), length);
    Ok(score)
}
