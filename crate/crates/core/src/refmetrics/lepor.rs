use crate::bleu::MetricScore;
use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};

/// Weights of recall (`alpha`) and precision (`beta`) in the harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeporConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LeporConfig {
    fn default() -> Self {
        LeporConfig { alpha: 1.0, beta: 1.0 }
    }
}

impl LeporConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.beta > 0.0 && self.alpha.is_finite() && self.beta.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig("LEPOR weights must be positive".into()))
        }
    }
}

/// Two-sided length penalty: `e^(1 - r/c)` when short, `e^(1 - c/r)` when long.
pub fn length_penalty(c: f64, r: f64) -> f64 {
    if c == r {
        1.0
    } else if c < r {
        if c <= 0.0 {
            0.0
        } else {
            (1.0 - r / c).exp()
        }
    } else if r <= 0.0 {
        0.0
    } else {
        (1.0 - c / r).exp()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct LeporCounts {
    matched: usize,
    hyp_len: usize,
    ref_len: usize,
    position_diff: f64,
}

/// Matches each hypothesis word to the unused reference occurrence of the same
/// word whose relative position is closest (ties leftmost) and sums the
/// absolute relative-position differences. Unmatched words add nothing.
fn position_matches(hyp: &[String], reference: &[String]) -> LeporCounts {
    let mut used = vec![false; reference.len()];
    let mut matched = 0;
    let mut position_diff = 0.0;
    let hyp_len = hyp.len() as f64;
    let ref_len = reference.len() as f64;
    for (i, word) in hyp.iter().enumerate() {
        let h = (i + 1) as f64 / hyp_len;
        let mut best: Option<(usize, f64)> = None;
        for (j, r) in reference.iter().enumerate() {
            if used[j] || r != word {
                continue;
            }
            let d = (h - (j + 1) as f64 / ref_len).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            used[j] = true;
            matched += 1;
            position_diff += d;
        }
    }
    LeporCounts {
        matched,
        hyp_len: hyp.len(),
        ref_len: reference.len(),
        position_diff,
    }
}

fn combine(c: &LeporCounts, pairs: usize, cfg: &LeporConfig) -> f64 {
    if c.matched == 0 {
        return 0.0;
    }
    let precision = c.matched as f64 / c.hyp_len as f64;
    let recall = c.matched as f64 / c.ref_len as f64;
    let lp = length_penalty(c.hyp_len as f64 / pairs as f64, c.ref_len as f64 / pairs as f64);
    let npd = c.position_diff / c.hyp_len as f64;
    let harmonic = (cfg.alpha + cfg.beta) / (cfg.alpha / recall + cfg.beta / precision);
    lp * (-npd).exp() * harmonic
}

/// Corpus LEPOR: length penalty on average sentence lengths, position penalty
/// and unigram precision/recall pooled over pairs. Each pair uses the reference
/// it scores best against.
pub fn lepor_score(corpus: &ParallelCorpus, cfg: &LeporConfig) -> Result<MetricScore> {
    cfg.validate()?;
    corpus.ensure_non_empty()?;
    let mut pooled = LeporCounts::default();
    let mut per_sentence = Vec::with_capacity(corpus.len());
    for pair in corpus.pairs() {
        let (s, c) = pair
            .references
            .iter()
            .map(|r| {
                let c = position_matches(&pair.hypothesis, r);
                (combine(&c, 1, cfg), c)
            })
            .fold(None, |best: Option<(f64, LeporCounts)>, cur| match best {
                Some(b) if b.0 >= cur.0 => Some(b),
                _ => Some(cur),
            })
            .expect("pairs have at least one reference");
        per_sentence.push(s);
        pooled.matched += c.matched;
        pooled.hyp_len += c.hyp_len;
        pooled.ref_len += c.ref_len;
        pooled.position_diff += c.position_diff;
    }

    let mut score = MetricScore::new("lepor", combine(&pooled, corpus.len(), cfg));
    score.per_sentence = per_sentence;
    let n = corpus.len() as f64;
    score.details.insert(
        "length_penalty".into(),
        length_penalty(pooled.hyp_len as f64 / n, pooled.ref_len as f64 / n),
    );
    if pooled.hyp_len > 0 {
        score.details.insert("npd".into(), pooled.position_diff / pooled.hyp_len as f64);
        score.details.insert("precision".into(), pooled.matched as f64 / pooled.hyp_len as f64);
    }
    if pooled.ref_len > 0 {
        score.details.insert("recall".into(), pooled.matched as f64 / pooled.ref_len as f64);
    }
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EvalPair;

    fn corpus(h: &str, r: &[&str]) -> ParallelCorpus {
        ParallelCorpus::from_pairs(vec![EvalPair::from_text(h, r).unwrap()]).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn identical_is_one() {
        let s = lepor_score(&corpus("a b c d", &["a b c d"]), &LeporConfig::default()).unwrap();
        assert!((s.corpus_score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn length_penalty_branches() {
        assert!((length_penalty(5.0, 10.0) - (-1.0f64).exp()).abs() < 1e-12);
        assert!((length_penalty(20.0, 10.0) - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(length_penalty(7.0, 7.0), 1.0);
        assert_eq!(length_penalty(0.0, 3.0), 0.0);
        assert_eq!(length_penalty(0.0, 0.0), 1.0);
    }

    #[test]
    fn length_penalty_continuity() {
        let r = 200.0;
        let below = length_penalty(r - 1.0, r);
        let above = length_penalty(r + 1.0, r);
        assert!(below < 1.0 && above < 1.0);
        assert!(below >= (-1.0 / r).exp() - 1e-4 && above >= (-1.0 / r).exp() - 1e-12);
    }

    #[test]
    fn swapped_pair_position_penalty() {
        let c = position_matches(&toks("b a"), &toks("a b"));
        assert_eq!(c.matched, 2);
        assert!((c.position_diff / 2.0 - 0.5).abs() < 1e-12);
        let s = lepor_score(&corpus("b a", &["a b"]), &LeporConfig::default()).unwrap();
        assert!((s.corpus_score - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn short_hypothesis_penalized() {
        // c = 2, r = 4: LP = e^(1 - 2)
        let s = lepor_score(&corpus("a b", &["a b c d"]), &LeporConfig::default()).unwrap();
        assert!((s.detail("length_penalty").unwrap() - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn disjoint_and_invalid() {
        let s = lepor_score(&corpus("x y", &["a b"]), &LeporConfig::default()).unwrap();
        assert_eq!(s.corpus_score, 0.0);
        assert!(lepor_score(&corpus("a", &["a"]), &LeporConfig { alpha: 0.0, beta: 1.0 }).is_err());
    }
}
