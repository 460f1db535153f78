//! Machine translation evaluation.
//!
//! [`ebleu`] scores hypotheses with an n-gram precision metric that credits
//! lexicon synonyms and boosts rare reference words. [`bleu`] and
//! [`refmetrics`] implement the usual reference metrics, and [`stats`] holds
//! the correlation tools used to compare metrics across runs.

pub mod bleu;
pub mod cli;
pub mod corpus;
pub mod ebleu;
pub mod error;
pub mod ngram;
pub mod refmetrics;
pub mod stats;

pub use bleu::{bleu_score, BleuConfig, MetricScore};
pub use corpus::{
    build_rare_word_set, load_parallel_corpus, load_synonym_lexicon, tokenize, EvalPair, ParallelCorpus,
    RareWordSet, SynonymLexicon, TokenSequence, TokenizerConfig,
};
pub use ebleu::{ebleu_score, EbleuConfig};
pub use error::{Error, Result};
