//! N-gram extraction and reference-clipped counting.

use std::collections::HashMap;

use crate::corpus::{EvalPair, TokenSequence};
use crate::error::{Error, Result};

/// An n-gram borrowed from the sentence it was extracted from.
pub type NGram<'a> = &'a [String];

/// Multiset of n-grams of a single order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramCounts<'a> {
    order: usize,
    counts: HashMap<NGram<'a>, usize>,
}

impl<'a> NGramCounts<'a> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, gram: &[String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Sum of multiplicities.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NGram<'a>, usize)> + '_ {
        self.counts.iter().map(|(g, c)| (*g, *c))
    }

    /// Per-n-gram maximum over several count tables of the same order.
    pub fn max_over(order: usize, tables: &[NGramCounts<'a>]) -> Result<Self> {
        let mut counts: HashMap<NGram<'a>, usize> = HashMap::new();
        for table in tables {
            check_order(order, table.order)?;
            for (gram, c) in table.iter() {
                let slot = counts.entry(gram).or_default();
                *slot = (*slot).max(c);
            }
        }
        Ok(NGramCounts { order, counts })
    }
}

fn check_order(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::OrderMismatch { expected, found })
    }
}

/// Counts every contiguous window of length `n`.
///
/// # Panics
/// If `n == 0`.
pub fn extract_ngrams(tokens: &[String], n: usize) -> NGramCounts<'_> {
    assert!(n >= 1, "n-gram order must be at least 1");
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_default() += 1;
        }
    }
    NGramCounts { order: n, counts }
}

/// Σ over hypothesis n-grams of `min(hyp count, max reference count)`.
pub fn clipped_match_count(hyp: &NGramCounts<'_>, refs: &[NGramCounts<'_>]) -> Result<usize> {
    for r in refs {
        check_order(hyp.order, r.order)?;
    }
    Ok(hyp
        .iter()
        .map(|(gram, count)| {
            let max_ref = refs.iter().map(|r| r.get(gram)).max().unwrap_or(0);
            count.min(max_ref)
        })
        .sum())
}

/// Clipped matches and hypothesis n-gram total for one pair at one order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchStats {
    pub matched: usize,
    pub total: usize,
}

impl MatchStats {
    /// `matched / total`, or 0 when the hypothesis has no n-grams of this order.
    pub fn precision(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }
}

impl std::ops::AddAssign for MatchStats {
    fn add_assign(&mut self, rhs: Self) {
        self.matched += rhs.matched;
        self.total += rhs.total;
    }
}

pub fn match_stats(hypothesis: &[String], references: &[TokenSequence], n: usize) -> MatchStats {
    let hyp = extract_ngrams(hypothesis, n);
    let refs: Vec<_> = references.iter().map(|r| extract_ngrams(r, n)).collect();
    let matched = clipped_match_count(&hyp, &refs).expect("orders agree by construction");
    MatchStats {
        matched,
        total: hyp.total(),
    }
}

/// Clipped n-gram precision of a single pair; 0 for a hypothesis shorter than `n`.
pub fn modified_precision(pair: &EvalPair, n: usize) -> f64 {
    match_stats(&pair.hypothesis, &pair.references, n).precision()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::from_text(s)
    }

    #[test]
    fn bigrams_of_worked_sentence() {
        let s = seq("the cat is here");
        let c = extract_ngrams(&s, 2);
        assert_eq!(c.distinct(), 3);
        assert_eq!(c.total(), 3);
        for g in [["the", "cat"], ["cat", "is"], ["is", "here"]] {
            let g: Vec<String> = g.iter().map(|w| w.to_string()).collect();
            assert_eq!(c.get(&g), 1);
        }
    }

    #[test]
    fn repeated_unigram() {
        let s = seq("the the the the the the the");
        let c = extract_ngrams(&s, 1);
        assert_eq!(c.get(&["the".to_string()]), 7);
        assert_eq!(c.distinct(), 1);
    }

    #[test]
    fn window_longer_than_sentence() {
        let s = seq("a b");
        assert!(extract_ngrams(&s, 3).is_empty());
        assert!(extract_ngrams(&[], 1).is_empty());
    }

    #[test]
    fn clip_against_max_reference() {
        let h = seq("the the the the the the the");
        let r1 = seq("the cat is on the mat");
        let r2 = seq("there is a cat on the mat");
        let hc = extract_ngrams(&h, 1);
        let refs = [extract_ngrams(&r1, 1), extract_ngrams(&r2, 1)];
        assert_eq!(clipped_match_count(&hc, &refs).unwrap(), 2);
    }

    #[test]
    fn clip_full_match_and_bigram() {
        let h = seq("a b c a");
        let hc = extract_ngrams(&h, 1);
        assert_eq!(clipped_match_count(&hc, &[extract_ngrams(&h, 1)]).unwrap(), 4);

        let h = seq("the cat is here");
        let r = seq("the cat is on the mat");
        let hc = extract_ngrams(&h, 2);
        assert_eq!(clipped_match_count(&hc, &[extract_ngrams(&r, 2)]).unwrap(), 2);
    }

    #[test]
    fn clip_order_mismatch() {
        let h = seq("a b c");
        let err = clipped_match_count(&extract_ngrams(&h, 1), &[extract_ngrams(&h, 2)]).unwrap_err();
        assert!(matches!(err, Error::OrderMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn worked_precisions() {
        let pair = EvalPair::from_text(
            "the the the the the the the",
            &["the cat is on the mat", "there is a cat on the mat"],
        )
        .unwrap();
        assert!((modified_precision(&pair, 1) - 2.0 / 7.0).abs() < 1e-12);

        let pair = EvalPair::from_text("the cat is here", &["the cat is on the mat"]).unwrap();
        assert!((modified_precision(&pair, 2) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_and_empty_precision() {
        let pair = EvalPair::from_text("a b c d e", &["a b c d e"]).unwrap();
        for n in 1..=5 {
            assert_eq!(modified_precision(&pair, n), 1.0);
        }
        let empty = EvalPair::from_text("", &["a b"]).unwrap();
        assert_eq!(modified_precision(&empty, 1), 0.0);
    }

    fn sentence() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec((0u8..5).prop_map(|w| format!("w{w}")), 0..9)
    }

    proptest! {
        #[test]
        fn precision_bounded_and_monotone_in_references(
            hyp in sentence(),
            refs in proptest::collection::vec(sentence(), 1..4),
            extra in sentence(),
            n in 1usize..4,
        ) {
            let refs: Vec<TokenSequence> = refs.into_iter().map(|r| TokenSequence::new(r).unwrap()).collect();
            let s = match_stats(&hyp, &refs, n);
            prop_assert!(s.precision() >= 0.0 && s.precision() <= 1.0);

            let rcs: Vec<_> = refs.iter().map(|r| extract_ngrams(r, n)).collect();
            let max_ref = NGramCounts::max_over(n, &rcs).unwrap();
            prop_assert!(s.matched <= s.total.min(max_ref.total()));

            let mut more = refs.clone();
            more.push(TokenSequence::new(extra).unwrap());
            prop_assert!(match_stats(&hyp, &more, n).matched >= s.matched);
        }
    }
}
