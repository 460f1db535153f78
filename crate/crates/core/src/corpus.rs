//! Corpus ingestion: tokenization, line-aligned hypothesis/reference files,
//! the synonym lexicon and the rare-word set derived from the references.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::ops::Deref;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Normalization switches applied to every line before scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub split_punctuation: bool,
}

/// An ordered list of non-empty, whitespace-free tokens for one sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Wraps already-split tokens. Fails if a token is empty or contains whitespace.
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if let Some(bad) = tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(Error::InvalidCorpus(format!("invalid token {bad:?}")));
        }
        Ok(TokenSequence(tokens))
    }

    /// Splits on whitespace without further normalization.
    pub fn from_text(text: &str) -> Self {
        TokenSequence(text.split_whitespace().map(str::to_owned).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

fn is_punctuation(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Whitespace tokenization with optional case folding and punctuation isolation.
///
/// With `split_punctuation`, every character that is neither alphanumeric nor
/// whitespace becomes a token of its own.
pub fn tokenize(raw_line: &str, cfg: &TokenizerConfig) -> TokenSequence {
    let folded;
    let line = if cfg.lowercase {
        folded = raw_line.to_lowercase();
        folded.as_str()
    } else {
        raw_line
    };

    let mut tokens = Vec::new();
    for word in line.split_whitespace() {
        if !cfg.split_punctuation {
            tokens.push(word.to_owned());
            continue;
        }
        let mut current = String::new();
        for c in word.chars() {
            if is_punctuation(c) {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    TokenSequence(tokens)
}

/// One hypothesis with its aligned reference translations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPair {
    pub hypothesis: TokenSequence,
    pub references: Vec<TokenSequence>,
}

impl EvalPair {
    pub fn new(hypothesis: TokenSequence, references: Vec<TokenSequence>) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::InvalidCorpus(
                "a pair needs at least one reference".into(),
            ));
        }
        Ok(EvalPair { hypothesis, references })
    }

    /// Convenience constructor from whitespace-separated strings.
    pub fn from_text(hypothesis: &str, references: &[&str]) -> Result<Self> {
        EvalPair::new(
            TokenSequence::from_text(hypothesis),
            references.iter().map(|r| TokenSequence::from_text(r)).collect(),
        )
    }
}

/// Line-aligned hypotheses and references with a uniform reference count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<EvalPair>,
    ref_count: usize,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<EvalPair>, ref_count: usize) -> Result<Self> {
        if ref_count == 0 {
            return Err(Error::InvalidCorpus("ref_count must be at least 1".into()));
        }
        if let Some((i, p)) = pairs
            .iter()
            .enumerate()
            .find(|(_, p)| p.references.len() != ref_count)
        {
            return Err(Error::InvalidCorpus(format!(
                "pair {i} has {} references, expected {ref_count}",
                p.references.len()
            )));
        }
        Ok(ParallelCorpus { pairs, ref_count })
    }

    /// Builds a corpus, taking the reference count from the first pair.
    pub fn from_pairs(pairs: Vec<EvalPair>) -> Result<Self> {
        let ref_count = pairs.first().map_or(1, |p| p.references.len());
        ParallelCorpus::new(pairs, ref_count)
    }

    pub fn pairs(&self) -> &[EvalPair] {
        &self.pairs
    }

    /// Appends a pair, which must carry `ref_count` references.
    pub fn push(&mut self, pair: EvalPair) -> Result<()> {
        if pair.references.len() != self.ref_count {
            return Err(Error::InvalidCorpus(format!(
                "pair has {} references, expected {}",
                pair.references.len(),
                self.ref_count
            )));
        }
        self.pairs.push(pair);
        Ok(())
    }

    pub fn ref_count(&self) -> usize {
        self.ref_count
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// All reference sentences, pair by pair.
    pub fn references(&self) -> impl Iterator<Item = &TokenSequence> {
        self.pairs.iter().flat_map(|p| p.references.iter())
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.pairs.is_empty() {
            Err(Error::EmptyCorpus)
        } else {
            Ok(())
        }
    }
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::Encoding {
        path: path.to_owned(),
        offset: e.utf8_error().valid_up_to(),
    })
}

/// `str::lines` already strips a trailing `\r`.
fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(read_utf8(path)?.lines().map(str::to_owned).collect())
}

/// Reads one hypothesis file and any number of reference files, pairing line `i`
/// of each.
pub fn load_parallel_corpus<P: AsRef<Path>>(
    hyp_path: P,
    ref_paths: &[P],
    cfg: &TokenizerConfig,
) -> Result<ParallelCorpus> {
    let hyp_path = hyp_path.as_ref();
    if ref_paths.is_empty() {
        return Err(Error::InvalidCorpus("at least one reference file is required".into()));
    }
    let hyp_lines = read_lines(hyp_path)?;
    let mut ref_lines = Vec::with_capacity(ref_paths.len());
    for path in ref_paths {
        let path = path.as_ref();
        let lines = read_lines(path)?;
        if lines.len() != hyp_lines.len() {
            return Err(Error::LineCountMismatch {
                hyp_path: hyp_path.to_owned(),
                hyp_lines: hyp_lines.len(),
                ref_path: path.to_owned(),
                ref_lines: lines.len(),
            });
        }
        ref_lines.push(lines);
    }

    let pairs = hyp_lines
        .iter()
        .enumerate()
        .map(|(i, hyp)| EvalPair {
            hypothesis: tokenize(hyp, cfg),
            references: ref_lines.iter().map(|lines| tokenize(&lines[i], cfg)).collect(),
        })
        .collect();
    ParallelCorpus::new(pairs, ref_paths.len())
}

/// Word to synonym-set mapping. Symmetric by construction and irreflexive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: HashMap<String, BTreeSet<String>>,
}

impl SynonymLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one synset: every member becomes a synonym of every other member.
    /// Sets merge per headword; closure is not transitive across synsets.
    pub fn add_synset<I, S>(&mut self, words: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: BTreeSet<String> = words.into_iter().map(Into::into).collect();
        for word in &words {
            let entry = self.entries.entry(word.clone()).or_default();
            entry.extend(words.iter().filter(|w| *w != word).cloned());
        }
    }

    pub fn from_synsets<'a, I>(synsets: I) -> Self
    where
        I: IntoIterator<Item = &'a [&'a str]>,
    {
        let mut lexicon = SynonymLexicon::new();
        for set in synsets {
            lexicon.add_synset(set.iter().copied());
        }
        lexicon
    }

    /// Synonyms of `word`, in lexicographic order. Unknown words have none.
    pub fn synonyms<'a>(&'a self, word: &str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .get(word)
            .into_iter()
            .flat_map(|set| set.iter().map(String::as_str))
    }

    pub fn contains_pair(&self, a: &str, b: &str) -> bool {
        self.entries.get(a).is_some_and(|set| set.contains(b))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Parses the comma-separated synset format. `origin` labels error messages.
    pub fn parse(text: &str, origin: &Path, cfg: &TokenizerConfig) -> Result<Self> {
        let mut lexicon = SynonymLexicon::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            // Multi-token entries can never match a single token, so they are dropped.
            let words: BTreeSet<String> = trimmed
                .split(',')
                .filter_map(|piece| {
                    let mut toks = tokenize(piece, cfg).into_tokens();
                    (toks.len() == 1).then(|| toks.pop().unwrap())
                })
                .collect();
            if words.len() < 2 {
                return Err(Error::MalformedLine {
                    path: origin.to_owned(),
                    line: idx + 1,
                });
            }
            lexicon.add_synset(words);
        }
        Ok(lexicon)
    }
}

/// Loads a synonym lexicon: one synset per line, comma-separated, `#` comments.
/// Entries go through the same tokenizer normalization as the corpus.
pub fn load_synonym_lexicon<P: AsRef<Path>>(path: P, cfg: &TokenizerConfig) -> Result<SynonymLexicon> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    SynonymLexicon::parse(&text, path, cfg)
}

/// The low-frequency tail of the reference vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct RareWordSet {
    words: HashSet<String>,
    source_vocab_size: usize,
    percent: f64,
}

impl RareWordSet {
    /// A set with no rare words; disables the rare-word bonus.
    pub fn empty() -> Self {
        RareWordSet {
            words: HashSet::new(),
            source_vocab_size: 0,
            percent: 0.0,
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn source_vocab_size(&self) -> usize {
        self.source_vocab_size
    }

    pub fn percent(&self) -> f64 {
        self.percent
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// Number of tail entries for `percent` of `vocab`. The small slack keeps
/// products such as `0.1 * 30` from rounding up to an extra word.
pub(crate) fn rare_cut(percent: f64, vocab: usize) -> usize {
    let raw = percent * vocab as f64;
    ((raw - 1e-9).ceil().max(0.0) as usize).min(vocab)
}

/// Ranks distinct reference words by descending frequency (ties lexicographic
/// ascending) and keeps the last `ceil(percent * vocab)` of them.
pub fn build_rare_word_set<'a, I>(references: I, percent: f64) -> Result<RareWordSet>
where
    I: IntoIterator<Item = &'a TokenSequence>,
{
    if !(percent > 0.0 && percent <= 1.0) {
        return Err(Error::InvalidPercent(percent));
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for sentence in references {
        for token in sentence.iter() {
            *freq.entry(token.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let vocab = ranked.len();
    let take = rare_cut(percent, vocab);
    let words = ranked[vocab - take..]
        .iter()
        .map(|(w, _)| (*w).to_owned())
        .collect();
    Ok(RareWordSet {
        words,
        source_vocab_size: vocab,
        percent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn toks(seq: &TokenSequence) -> Vec<&str> {
        seq.iter().map(String::as_str).collect()
    }

    #[test]
    fn tokenize_lowercase_and_punct() {
        let cfg = TokenizerConfig { lowercase: true, split_punctuation: true };
        assert_eq!(toks(&tokenize("The cat.", &cfg)), ["the", "cat", "."]);
    }

    #[test]
    fn tokenize_empty_and_defaults() {
        let cfg = TokenizerConfig::default();
        assert!(tokenize("", &cfg).is_empty());
        assert!(tokenize("   \t ", &cfg).is_empty());
        assert_eq!(toks(&tokenize("this is a exam", &cfg)), ["this", "is", "a", "exam"]);
        assert_eq!(toks(&tokenize("The cat.", &cfg)), ["The", "cat."]);
    }

    #[test]
    fn token_sequence_rejects_whitespace() {
        assert!(TokenSequence::new(vec!["a b".into()]).is_err());
        assert!(TokenSequence::new(vec![String::new()]).is_err());
        assert!(TokenSequence::new(vec!["ab".into()]).is_ok());
    }

    #[test]
    fn push_checks_reference_count() {
        let mut c = ParallelCorpus::new(Vec::new(), 2).unwrap();
        assert!(c.push(EvalPair::from_text("a", &["a"]).unwrap()).is_err());
        c.push(EvalPair::from_text("a", &["a", "b"]).unwrap()).unwrap();
        assert_eq!(c.len(), 1);
    }

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn load_corpus_aligns_lines() {
        let dir = tempfile::tempdir().unwrap();
        let h = write(&dir, "h", "a b\nc d\r\ne f\n");
        let r1 = write(&dir, "r1", "a b\nc x\ne f\n");
        let r2 = write(&dir, "r2", "x b\nc d\ne\n");
        let corpus = load_parallel_corpus(&h, &[&r1, &r2], &TokenizerConfig::default()).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus.ref_count(), 2);
        assert_eq!(toks(&corpus.pairs()[1].hypothesis), ["c", "d"]);
        assert_eq!(toks(&corpus.pairs()[2].references[1]), ["e"]);
    }

    #[test]
    fn load_corpus_line_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let h = write(&dir, "h", "a\nb\nc\n");
        let r = write(&dir, "r", "a\nb\n");
        let err = load_parallel_corpus(&h, &[&r], &TokenizerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::LineCountMismatch { hyp_lines: 3, ref_lines: 2, .. }));
    }

    #[test]
    fn load_corpus_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let h = write(&dir, "h", "");
        let r = write(&dir, "r", "");
        let corpus = load_parallel_corpus(&h, &[&r], &TokenizerConfig::default()).unwrap();
        assert!(corpus.is_empty());
    }

    #[test]
    fn load_corpus_bad_encoding_and_missing() {
        let dir = tempfile::tempdir().unwrap();
        let h = dir.path().join("h");
        fs::write(&h, [0x61, 0xff, 0x0a]).unwrap();
        let r = write(&dir, "r", "a\n");
        let err = load_parallel_corpus(&h, &[&r], &TokenizerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Encoding { offset: 1, .. }));

        let missing = dir.path().join("nope");
        let err = load_parallel_corpus(&missing, &[&r], &TokenizerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn lexicon_synset_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "syn", "# comment\nexam, test, quiz, examination\n\n");
        let lex = load_synonym_lexicon(&p, &TokenizerConfig::default()).unwrap();
        let exam: BTreeSet<&str> = lex.synonyms("exam").collect();
        assert!(exam.is_superset(&["test", "quiz", "examination"].into_iter().collect()));
        assert!(lex.contains_pair("quiz", "exam"));
        assert!(!lex.contains_pair("exam", "exam"));
    }

    #[test]
    fn lexicon_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "syn", "");
        let lex = load_synonym_lexicon(&p, &TokenizerConfig::default()).unwrap();
        assert!(lex.is_empty());
        assert_eq!(lex.synonyms("anything").count(), 0);
    }

    #[test]
    fn lexicon_merges_per_headword_not_transitively() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "syn", "a, b\nb, c\n");
        let lex = load_synonym_lexicon(&p, &TokenizerConfig::default()).unwrap();
        assert_eq!(lex.synonyms("b").collect::<Vec<_>>(), ["a", "c"]);
        assert_eq!(lex.synonyms("a").collect::<Vec<_>>(), ["b"]);
        assert!(!lex.contains_pair("a", "c"));
    }

    #[test]
    fn lexicon_malformed_and_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "syn", "a, b\nlonely\n");
        let err = load_synonym_lexicon(&p, &TokenizerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }));

        let p = write(&dir, "syn2", "Exam, QUIZ\n");
        let cfg = TokenizerConfig { lowercase: true, split_punctuation: false };
        let lex = load_synonym_lexicon(&p, &cfg).unwrap();
        assert!(lex.contains_pair("exam", "quiz"));
    }

    #[test]
    fn rare_words_hand_counted() {
        let refs = [TokenSequence::from_text("the cat the"), TokenSequence::from_text("the dog")];
        let rare = build_rare_word_set(&refs, 0.5).unwrap();
        assert_eq!(rare.source_vocab_size(), 3);
        let mut words: Vec<_> = rare.words().collect();
        words.sort();
        assert_eq!(words, ["cat", "dog"]);

        let all = build_rare_word_set(&refs, 1.0).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn rare_words_tie_break_at_boundary() {
        // all frequency 1: ranked a, b, c, d; tail of size 1 is "d"
        let refs = [TokenSequence::from_text("c a d b")];
        let rare = build_rare_word_set(&refs, 0.25).unwrap();
        assert_eq!(rare.words().collect::<Vec<_>>(), ["d"]);
    }

    #[test]
    fn rare_words_empty_and_invalid() {
        let none: [TokenSequence; 0] = [];
        assert!(build_rare_word_set(&none, 0.1).unwrap().is_empty());
        assert!(matches!(build_rare_word_set(&none, 0.0), Err(Error::InvalidPercent(_))));
        assert!(matches!(build_rare_word_set(&none, 1.5), Err(Error::InvalidPercent(_))));
        assert!(build_rare_word_set(&none, f64::NAN).is_err());
    }

    #[test]
    fn rare_cut_avoids_float_creep() {
        assert_eq!(rare_cut(0.1, 30), 3);
        assert_eq!(rare_cut(0.1, 31), 4);
        assert_eq!(rare_cut(0.01, 5), 1);
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[a-zA-Z0-9ÀÉßœ.,;!?'\"() \t-]{0,40}").unwrap()
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in text_strategy(), lower: bool, split: bool) {
            let cfg = TokenizerConfig { lowercase: lower, split_punctuation: split };
            let once = tokenize(&text, &cfg);
            let twice = tokenize(&once.to_string(), &cfg);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn rare_set_is_frequency_downward_closed(
            sents in proptest::collection::vec(proptest::collection::vec(0u8..12, 0..10), 0..6),
            percent in 0.01f64..=1.0,
        ) {
            let refs: Vec<TokenSequence> = sents
                .iter()
                .map(|s| TokenSequence::new(s.iter().map(|w| format!("w{w}")).collect()).unwrap())
                .collect();
            let rare = build_rare_word_set(&refs, percent).unwrap();
            let mut freq: HashMap<&str, usize> = HashMap::new();
            for t in refs.iter().flat_map(|s| s.iter()) {
                *freq.entry(t).or_default() += 1;
            }
            prop_assert_eq!(rare.len(), rare_cut(percent, freq.len()));
            for (w, f) in &freq {
                if !rare.contains(w) {
                    for r in rare.words() {
                        prop_assert!(freq[r] <= *f);
                    }
                }
            }
        }

        #[test]
        fn lexicon_is_symmetric(
            sets in proptest::collection::vec(proptest::collection::btree_set(0u8..10, 2..5), 0..6)
        ) {
            let mut lex = SynonymLexicon::new();
            for s in &sets {
                lex.add_synset(s.iter().map(|w| format!("w{w}")));
            }
            for (word, syns) in &lex.entries {
                prop_assert!(!syns.contains(word));
                for s in syns {
                    prop_assert!(lex.contains_pair(s, word));
                }
            }
        }
    }
}
