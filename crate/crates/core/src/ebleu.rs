//! Enhanced BLEU.
//!
//! Three changes on top of BLEU:
//!
//! * hypothesis words that miss every reference may be swapped for a lexicon
//!   synonym that does occur there; matches through such a word are credited at
//!   `synonym_score` per substituted token instead of 1,
//! * matched n-grams that contain a rare reference word are credited
//!   `rare_words_score` times (once per n-gram), with each order score clamped
//!   to `[0, 1]`,
//! * order scores are combined cumulatively in the log domain,
//!   `C_i = exp((log B_1 + .. + log B_i) / i + len_score)`, where
//!   `len_score = min(0, 1 - ref_length / hyp_length)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::bleu::{effective_ref_length, smoothed, MetricScore};
use crate::corpus::{build_rare_word_set, EvalPair, ParallelCorpus, RareWordSet, SynonymLexicon, TokenSequence};
use crate::error::{Error, Result};
use crate::ngram::{extract_ngrams, NGramCounts};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbleuConfig {
    pub max_order: usize,
    pub synonym_score: f64,
    pub rare_words_percent: f64,
    pub rare_words_score: f64,
    pub smoothing_epsilon: f64,
}

impl Default for EbleuConfig {
    fn default() -> Self {
        EbleuConfig {
            max_order: 4,
            synonym_score: 0.90,
            rare_words_percent: 0.10,
            rare_words_score: 1.10,
            smoothing_epsilon: 0.0,
        }
    }
}

impl EbleuConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.max_order == 0 {
            return bad("max order must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.synonym_score) {
            return bad("synonym score must lie in [0, 1]");
        }
        if !(self.rare_words_percent > 0.0 && self.rare_words_percent <= 1.0) {
            return Err(Error::InvalidPercent(self.rare_words_percent));
        }
        if !self.rare_words_score.is_finite() || self.rare_words_score < 1.0 {
            return bad("rare-words score must be a finite number >= 1");
        }
        if !self.smoothing_epsilon.is_finite() || self.smoothing_epsilon < 0.0 {
            return bad("epsilon must be a non-negative number");
        }
        Ok(())
    }
}

/// The hypothesis after synonym substitution, and where substitutions happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionTrace {
    pub modified_hypothesis: TokenSequence,
    pub substituted_positions: BTreeSet<usize>,
}

fn max_reference_unigrams(references: &[TokenSequence]) -> HashMap<&str, usize> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for reference in references {
        let mut local: HashMap<&str, usize> = HashMap::new();
        for token in reference.iter() {
            *local.entry(token).or_default() += 1;
        }
        for (word, c) in local {
            let slot = counts.entry(word).or_default();
            *slot = (*slot).max(c);
        }
    }
    counts
}

/// Replaces unmatched hypothesis words with their most useful synonym.
///
/// Reference occurrences (max over references) form a pool. Exact matches draw
/// from the pool first, left to right. Each remaining token then takes the
/// synonym with the most occurrences still in the pool (ties lexicographic
/// ascending) and consumes one; tokens without such a synonym are left alone.
pub fn synonym_substitute(pair: &EvalPair, lexicon: &SynonymLexicon) -> SubstitutionTrace {
    let mut available = max_reference_unigrams(&pair.references);
    let mut tokens: Vec<String> = pair.hypothesis.to_vec();
    let mut unmatched = Vec::new();

    for (i, token) in tokens.iter().enumerate() {
        match available.get_mut(token.as_str()) {
            Some(left) if *left > 0 => *left -= 1,
            _ => unmatched.push(i),
        }
    }

    let mut substituted_positions = BTreeSet::new();
    for i in unmatched {
        let mut best: Option<(&str, usize)> = None;
        for synonym in lexicon.synonyms(&tokens[i]) {
            let left = available.get(synonym).copied().unwrap_or(0);
            if left > 0 && best.is_none_or(|(_, b)| left > b) {
                best = Some((synonym, left));
            }
        }
        if let Some((synonym, _)) = best {
            let synonym = synonym.to_owned();
            *available.get_mut(synonym.as_str()).unwrap() -= 1;
            tokens[i] = synonym;
            substituted_positions.insert(i);
        }
    }

    SubstitutionTrace {
        modified_hypothesis: TokenSequence::new(tokens).expect("tokens come from valid sequences"),
        substituted_positions,
    }
}

/// Weighted clipped matches of one order before normalization.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeightedMatches {
    pub weighted: f64,
    pub total: usize,
}

impl WeightedMatches {
    /// `min(1, weighted / total)`, 0 for an order with no hypothesis n-grams.
    pub fn order_score(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.weighted / self.total as f64).min(1.0)
        }
    }
}

pub(crate) fn weighted_matches(
    trace: &SubstitutionTrace,
    references: &[TokenSequence],
    n: usize,
    rare: &RareWordSet,
    cfg: &EbleuConfig,
) -> WeightedMatches {
    let tokens = trace.modified_hypothesis.tokens();
    let ref_tables: Vec<_> = references.iter().map(|r| extract_ngrams(r, n)).collect();
    let max_ref = NGramCounts::max_over(n, &ref_tables).expect("orders agree by construction");

    // ordered so the floating-point sum is reproducible run to run
    let mut instances: BTreeMap<&[String], Vec<f64>> = BTreeMap::new();
    let mut total = 0;
    if tokens.len() >= n {
        for (start, window) in tokens.windows(n).enumerate() {
            total += 1;
            let substituted = trace.substituted_positions.range(start..start + n).count();
            let mut weight = cfg.synonym_score.powi(substituted as i32);
            if window.iter().any(|w| rare.contains(w)) {
                weight *= cfg.rare_words_score;
            }
            instances.entry(window).or_default().push(weight);
        }
    }

    let mut weighted = 0.0;
    for (gram, mut weights) in instances {
        let allowed = max_ref.get(gram).min(weights.len());
        if allowed == 0 {
            continue;
        }
        // clipping drops the lowest-weight instances first
        weights.sort_unstable_by(|a, b| b.total_cmp(a));
        weighted += weights[..allowed].iter().sum::<f64>();
    }
    WeightedMatches { weighted, total }
}

/// Order score `B_n` of one pair, in `[0, 1]`.
pub fn ebleu_order_score(
    trace: &SubstitutionTrace,
    pair: &EvalPair,
    n: usize,
    rare: &RareWordSet,
    cfg: &EbleuConfig,
) -> Result<f64> {
    if n == 0 || n > cfg.max_order {
        return Err(Error::OrderMismatch {
            expected: cfg.max_order,
            found: n,
        });
    }
    Ok(weighted_matches(trace, &pair.references, n, rare, cfg).order_score())
}

/// `min(0, 1 - ref_length / hyp_length)`. An empty hypothesis against a
/// non-empty reference gives `-inf`, which drives every cumulative score to 0;
/// both empty gives 0.
pub fn ebleu_length_score(ref_length: usize, hyp_length: usize) -> f64 {
    if hyp_length == 0 {
        return if ref_length == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    (1.0 - ref_length as f64 / hyp_length as f64).min(0.0)
}

/// Cumulative scores `C_1..C_N` from order scores, accumulated in log space.
/// A zero order score makes that and every later cumulative score 0.
pub fn ebleu_cumulative(order_scores: &[f64], len_score: f64) -> Vec<f64> {
    let mut log_sum = 0.0;
    order_scores
        .iter()
        .enumerate()
        .map(|(i, b)| {
            log_sum += b.ln();
            (log_sum / (i + 1) as f64 + len_score).exp()
        })
        .collect()
}

#[derive(Debug, Clone)]
struct PairStats {
    orders: Vec<WeightedMatches>,
    hyp_len: usize,
    ref_len: usize,
    substitutions: usize,
}

struct Combined {
    order_scores: Vec<f64>,
    cumulative: Vec<f64>,
    len_score: f64,
}

fn combine(orders: &[WeightedMatches], hyp_len: usize, ref_len: usize, cfg: &EbleuConfig) -> Combined {
    let order_scores: Vec<f64> = orders
        .iter()
        .map(|m| smoothed(m.order_score(), m.total, cfg.smoothing_epsilon))
        .collect();
    let len_score = ebleu_length_score(ref_len, hyp_len);
    let cumulative = ebleu_cumulative(&order_scores, len_score);
    Combined {
        order_scores,
        cumulative,
        len_score,
    }
}

/// Enhanced BLEU with the rare-word set built from the corpus references.
pub fn ebleu_score(corpus: &ParallelCorpus, lexicon: &SynonymLexicon, cfg: &EbleuConfig) -> Result<MetricScore> {
    cfg.validate()?;
    corpus.ensure_non_empty()?;
    let rare = build_rare_word_set(corpus.references(), cfg.rare_words_percent)?;
    ebleu_score_with_rare_set(corpus, lexicon, &rare, cfg)
}

/// Enhanced BLEU against an explicit rare-word set.
pub fn ebleu_score_with_rare_set(
    corpus: &ParallelCorpus,
    lexicon: &SynonymLexicon,
    rare: &RareWordSet,
    cfg: &EbleuConfig,
) -> Result<MetricScore> {
    cfg.validate()?;
    corpus.ensure_non_empty()?;

    let mut pooled = PairStats {
        orders: vec![WeightedMatches::default(); cfg.max_order],
        hyp_len: 0,
        ref_len: 0,
        substitutions: 0,
    };
    let mut per_sentence = Vec::with_capacity(corpus.len());

    for pair in corpus.pairs() {
        let trace = synonym_substitute(pair, lexicon);
        let stats = PairStats {
            orders: (1..=cfg.max_order)
                .map(|n| weighted_matches(&trace, &pair.references, n, rare, cfg))
                .collect(),
            hyp_len: pair.hypothesis.len(),
            ref_len: effective_ref_length(pair.hypothesis.len(), &pair.references),
            substitutions: trace.substituted_positions.len(),
        };
        let sentence = combine(&stats.orders, stats.hyp_len, stats.ref_len, cfg);
        per_sentence.push(*sentence.cumulative.last().unwrap());

        for (acc, m) in pooled.orders.iter_mut().zip(&stats.orders) {
            acc.weighted += m.weighted;
            acc.total += m.total;
        }
        pooled.hyp_len += stats.hyp_len;
        pooled.ref_len += stats.ref_len;
        pooled.substitutions += stats.substitutions;
    }

    let corpus_level = combine(&pooled.orders, pooled.hyp_len, pooled.ref_len, cfg);
    let mut score = MetricScore::new("ebleu", *corpus_level.cumulative.last().unwrap());
    score.per_sentence = per_sentence;
    for (i, (b, c)) in corpus_level
        .order_scores
        .iter()
        .zip(&corpus_level.cumulative)
        .enumerate()
    {
        score.details.insert(format!("B_{}", i + 1), *b);
        score.details.insert(format!("C_{}", i + 1), *c);
    }
    score.details.insert("len_score".into(), corpus_level.len_score);
    score.details.insert("hyp_length".into(), pooled.hyp_len as f64);
    score.details.insert("ref_length".into(), pooled.ref_len as f64);
    score.details.insert("rare_words".into(), rare.len() as f64);
    score.details.insert("substitutions".into(), pooled.substitutions as f64);
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bleu::{bleu_score, BleuConfig};
    use proptest::prelude::*;

    fn exam_lexicon() -> SynonymLexicon {
        SynonymLexicon::from_synsets([&["exam", "test", "quiz", "examination"][..]])
    }

    fn no_rare_cfg(max_order: usize) -> EbleuConfig {
        EbleuConfig {
            max_order,
            rare_words_score: 1.0,
            ..EbleuConfig::default()
        }
    }

    fn words(seq: &TokenSequence) -> String {
        seq.to_string()
    }

    #[test]
    fn substitutes_exam_with_quiz() {
        let pair = EvalPair::from_text("this is a exam", &["this is a quiz"]).unwrap();
        let trace = synonym_substitute(&pair, &exam_lexicon());
        assert_eq!(words(&trace.modified_hypothesis), "this is a quiz");
        assert_eq!(trace.substituted_positions, BTreeSet::from([3]));
    }

    #[test]
    fn empty_lexicon_changes_nothing() {
        let pair = EvalPair::from_text("this is a exam", &["this is a quiz"]).unwrap();
        let trace = synonym_substitute(&pair, &SynonymLexicon::new());
        assert_eq!(trace.modified_hypothesis, pair.hypothesis);
        assert!(trace.substituted_positions.is_empty());
    }

    #[test]
    fn reference_occurrences_are_consumed() {
        let pair = EvalPair::from_text("a exam exam", &["a quiz"]).unwrap();
        let trace = synonym_substitute(&pair, &exam_lexicon());
        assert_eq!(words(&trace.modified_hypothesis), "a quiz exam");
        assert_eq!(trace.substituted_positions, BTreeSet::from([1]));

        // an exact match elsewhere in the hypothesis claims the only "quiz"
        let pair = EvalPair::from_text("exam quiz", &["a quiz"]).unwrap();
        let trace = synonym_substitute(&pair, &exam_lexicon());
        assert!(trace.substituted_positions.is_empty());
    }

    #[test]
    fn prefers_most_frequent_then_lexicographic() {
        let pair = EvalPair::from_text("exam", &["test quiz quiz"]).unwrap();
        let trace = synonym_substitute(&pair, &exam_lexicon());
        assert_eq!(words(&trace.modified_hypothesis), "quiz");

        let pair = EvalPair::from_text("exam", &["test quiz"]).unwrap();
        let trace = synonym_substitute(&pair, &exam_lexicon());
        assert_eq!(words(&trace.modified_hypothesis), "quiz");
    }

    #[test]
    fn order_scores_with_synonym() {
        let pair = EvalPair::from_text("this is a exam", &["this is a quiz"]).unwrap();
        let trace = synonym_substitute(&pair, &exam_lexicon());
        let cfg = no_rare_cfg(4);
        let rare = RareWordSet::empty();
        let b1 = ebleu_order_score(&trace, &pair, 1, &rare, &cfg).unwrap();
        assert!((b1 - 0.975).abs() < 1e-12);
        let b2 = ebleu_order_score(&trace, &pair, 2, &rare, &cfg).unwrap();
        assert!((b2 - 2.9 / 3.0).abs() < 1e-12);
        assert!((b2 - 0.9667).abs() < 1e-4);
        let b3 = ebleu_order_score(&trace, &pair, 3, &rare, &cfg).unwrap();
        assert!((b3 - 1.9 / 2.0).abs() < 1e-12);
        assert!(ebleu_order_score(&trace, &pair, 5, &rare, &cfg).is_err());
    }

    #[test]
    fn rare_bonus_is_clamped() {
        let pair = EvalPair::from_text("roman empire", &["roman empire"]).unwrap();
        let trace = synonym_substitute(&pair, &SynonymLexicon::new());
        let rare = build_rare_word_set(&pair.references, 0.5).unwrap();
        assert!(rare.contains("roman"));
        let cfg = EbleuConfig {
            max_order: 2,
            ..EbleuConfig::default()
        };
        assert_eq!(ebleu_order_score(&trace, &pair, 2, &rare, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn rare_bonus_counts_once_per_ngram() {
        // matched bigrams "x r1", "r1 r2" (two rare tokens), "r2 y"; "y z" misses
        let pair = EvalPair::from_text("x r1 r2 y z", &["x r1 r2 y q"]).unwrap();
        let trace = synonym_substitute(&pair, &SynonymLexicon::new());
        let rare = build_rare_word_set(&[TokenSequence::from_text("r1 r2 x x y y z z q q")], 0.33).unwrap();
        assert!(rare.contains("r1") && rare.contains("r2"));
        let cfg = EbleuConfig { max_order: 2, rare_words_score: 1.1, ..EbleuConfig::default() };
        let m = weighted_matches(&trace, &pair.references, 2, &rare, &cfg);
        assert_eq!(m.total, 4);
        assert!((m.weighted - (1.1 + 1.1 + 1.1 + 0.0)).abs() < 1e-12);
    }

    #[test]
    fn clipping_keeps_highest_weights() {
        // "quiz" appears once in the reference; the exact-match instance survives clipping
        let pair = EvalPair::from_text("quiz quiz", &["quiz a"]).unwrap();
        let trace = SubstitutionTrace {
            modified_hypothesis: TokenSequence::from_text("quiz quiz"),
            substituted_positions: BTreeSet::from([0]),
        };
        let cfg = no_rare_cfg(1);
        let m = weighted_matches(&trace, &pair.references, 1, &RareWordSet::empty(), &cfg);
        assert!((m.weighted - 1.0).abs() < 1e-12);
    }

    #[test]
    fn length_score_cases() {
        assert_eq!(ebleu_length_score(10, 10), 0.0);
        assert_eq!(ebleu_length_score(10, 5), -1.0);
        assert_eq!(ebleu_length_score(5, 10), 0.0);
        assert_eq!(ebleu_length_score(3, 0), f64::NEG_INFINITY);
        assert_eq!(ebleu_length_score(0, 0), 0.0);
    }

    #[test]
    fn cumulative_worked_table() {
        let c = ebleu_cumulative(&[0.70, 0.55, 0.37, 0.28], 0.0);
        // the two-decimal targets are truncated: C_4 = 0.4469
        let truncated: Vec<f64> = c.iter().map(|v| (v * 100.0 + 1e-9).floor() / 100.0).collect();
        assert_eq!(truncated, [0.70, 0.62, 0.52, 0.44]);
        assert!((c[3] - 0.4469).abs() < 5e-5);
        assert_eq!(ebleu_cumulative(&[1.0; 4], 0.0), [1.0; 4]);

        let c = ebleu_cumulative(&[0.70, 0.55], -1.0);
        assert!((c[1] - 0.2283).abs() < 5e-5);
        assert!((c[1] - (0.70f64 * 0.55).sqrt() * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn cumulative_zero_propagates() {
        let c = ebleu_cumulative(&[0.5, 0.0, 0.9], 0.0);
        assert!(c[0] > 0.0);
        assert_eq!(&c[1..], [0.0, 0.0]);
    }

    #[test]
    fn exam_quiz_corpus_score() {
        let corpus = ParallelCorpus::from_pairs(vec![EvalPair::from_text("this is a exam", &["this is a quiz"]).unwrap()]).unwrap();
        let s = ebleu_score(&corpus, &exam_lexicon(), &no_rare_cfg(1)).unwrap();
        assert!((s.corpus_score - 0.975).abs() < 1e-12);
        assert_eq!(s.per_sentence, vec![s.corpus_score]);
        assert_eq!(s.detail("substitutions"), Some(1.0));
    }

    #[test]
    fn identical_pair_scores_one() {
        let corpus = ParallelCorpus::from_pairs(vec![EvalPair::from_text("a b c d e", &["a b c d e"]).unwrap()]).unwrap();
        let s = ebleu_score_with_rare_set(&corpus, &SynonymLexicon::new(), &RareWordSet::empty(), &EbleuConfig::default()).unwrap();
        assert!((s.corpus_score - 1.0).abs() < 1e-12);
        // the default rare bonus is clamped, so the identity still scores 1
        let s = ebleu_score(&corpus, &SynonymLexicon::new(), &EbleuConfig::default()).unwrap();
        assert!((s.corpus_score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = EbleuConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.synonym_score = 1.2;
        assert!(cfg.validate().is_err());
        let cfg = EbleuConfig { rare_words_score: 0.9, ..EbleuConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = EbleuConfig { rare_words_percent: 0.0, ..EbleuConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::InvalidPercent(_))));
        let cfg = EbleuConfig { max_order: 0, ..EbleuConfig::default() };
        assert!(cfg.validate().is_err());
    }

    fn sentence() -> impl Strategy<Value = String> {
        proptest::collection::vec(0u8..6, 0..10)
            .prop_map(|v| v.iter().map(|w| format!("w{w}")).collect::<Vec<_>>().join(" "))
    }

    fn corpus_strategy() -> impl Strategy<Value = ParallelCorpus> {
        proptest::collection::vec((sentence(), sentence(), sentence()), 1..6).prop_map(|rows| {
            ParallelCorpus::from_pairs(
                rows.iter()
                    .map(|(h, r1, r2)| EvalPair::from_text(h, &[r1, r2]).unwrap())
                    .collect(),
            )
            .unwrap()
        })
    }

    fn lexicon() -> SynonymLexicon {
        SynonymLexicon::from_synsets([&["w0", "w6"][..], &["w1", "w2", "w7"][..], &["w3", "w4"][..]])
    }

    proptest! {
        #[test]
        fn degenerates_to_bleu(corpus in corpus_strategy(), n in 1usize..5, eps in prop_oneof![Just(0.0), 0.01f64..0.5]) {
            let cfg = EbleuConfig { max_order: n, smoothing_epsilon: eps, ..EbleuConfig::default() };
            let e = ebleu_score_with_rare_set(&corpus, &SynonymLexicon::new(), &RareWordSet::empty(), &cfg).unwrap();
            let b = bleu_score(&corpus, &BleuConfig::uniform(n).with_epsilon(eps)).unwrap();
            prop_assert!((e.corpus_score - b.corpus_score).abs() < 1e-9);
        }

        #[test]
        fn scores_bounded_and_closed_form(corpus in corpus_strategy(), syn in 0.0f64..=1.0, bonus in 1.0f64..3.0) {
            let cfg = EbleuConfig { synonym_score: syn, rare_words_score: bonus, rare_words_percent: 0.3, ..EbleuConfig::default() };
            let s = ebleu_score(&corpus, &lexicon(), &cfg).unwrap();
            let len = s.detail("len_score").unwrap();
            let mut prod = 1.0;
            for i in 1..=4 {
                let b = s.detail(&format!("B_{i}")).unwrap();
                let c = s.detail(&format!("C_{i}")).unwrap();
                prop_assert!((0.0..=1.0).contains(&b));
                prop_assert!((0.0..=1.0).contains(&c));
                prod *= b;
                let closed = prod.powf(1.0 / i as f64) * len.exp();
                prop_assert!((c - closed).abs() < 1e-12);
            }
            for v in &s.per_sentence {
                prop_assert!((0.0..=1.0).contains(v));
            }
        }

        #[test]
        fn substitution_preserves_length(corpus in corpus_strategy()) {
            let lex = lexicon();
            for pair in corpus.pairs() {
                let trace = synonym_substitute(pair, &lex);
                prop_assert_eq!(trace.modified_hypothesis.len(), pair.hypothesis.len());
                for &i in &trace.substituted_positions {
                    prop_assert!(lex.contains_pair(&pair.hypothesis[i], &trace.modified_hypothesis[i]));
                }
            }
        }

        #[test]
        fn monotone_in_bonus_weights(corpus in corpus_strategy(), a in 0.0f64..=1.0, b in 0.0f64..=1.0, r1 in 1.0f64..2.0, r2 in 1.0f64..2.0) {
            let (lo_s, hi_s) = if a <= b { (a, b) } else { (b, a) };
            let (lo_r, hi_r) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let base = EbleuConfig { rare_words_percent: 0.3, ..EbleuConfig::default() };
            let score = |syn, rare| {
                ebleu_score(&corpus, &lexicon(), &EbleuConfig { synonym_score: syn, rare_words_score: rare, ..base.clone() }).unwrap()
            };
            prop_assert!(score(hi_s, lo_r).corpus_score >= score(lo_s, lo_r).corpus_score);
            let lo = score(lo_s, lo_r);
            let hi = score(lo_s, hi_r);
            for i in 1..=4 {
                let key = format!("B_{i}");
                prop_assert!(hi.detail(&key).unwrap() >= lo.detail(&key).unwrap());
            }
        }
    }
}
