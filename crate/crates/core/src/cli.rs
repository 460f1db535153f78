//! Command-line front end: `score`, `correlate` and `report`.
//!
//! Each subcommand renders its whole output into a string, so the binary only
//! has to choose between stdout and `--out` and map errors to exit codes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bleu::{bleu_score, BleuConfig, MetricScore};
use crate::corpus::{load_parallel_corpus, load_synonym_lexicon, ParallelCorpus, SynonymLexicon, TokenizerConfig};
use crate::ebleu::{ebleu_score, EbleuConfig};
use crate::error::{Error, Result};
use crate::refmetrics::{
    lepor_score, meteor_score, nist_score, ribes_score, ter_score, LeporConfig, RibesConfig, TerConfig,
    NIST_DEFAULT_ORDER,
};
use crate::stats::{correlation_matrix, lambda_between, CorrelationKind, CorrelationMatrix, LambdaResult, ScoreTable};

#[derive(Debug, Parser)]
#[command(name = "ebleu", version, about = "Machine translation evaluation and metric correlation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a hypothesis file against one or more reference files.
    Score(ScoreArgs),
    /// Correlate the metric columns of a score table.
    Correlate(CorrelateArgs),
    /// Merge score tables or JSON score reports into one table.
    Report(ReportArgs),
}

/// Metrics in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Ebleu,
    Bleu,
    Nist,
    Ter,
    Meteor,
    Lepor,
    Ribes,
}

impl MetricName {
    pub fn column(self) -> &'static str {
        match self {
            MetricName::Ebleu => "EBLEU",
            MetricName::Bleu => "BLEU",
            MetricName::Nist => "NIST",
            MetricName::Ter => "TER",
            MetricName::Meteor => "METEOR",
            MetricName::Lepor => "LEPOR",
            MetricName::Ribes => "RIBES",
        }
    }

    fn from_key(key: &str) -> Option<Self> {
        <MetricName as ValueEnum>::from_str(key, true).ok()
    }

    /// Tabular value: NIST is unbounded and stays raw, the rest are percentages.
    pub fn display_value(self, raw: f64) -> f64 {
        let v = if self == MetricName::Nist { raw } else { raw * 100.0 };
        round2(v)
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[arg(long, value_name = "PATH")]
    pub hyp: PathBuf,
    /// Reference file; repeat for multiple references.
    #[arg(long = "ref", value_name = "PATH", required = true)]
    pub refs: Vec<PathBuf>,
    /// Metric to compute; repeatable.
    #[arg(long = "metric", value_name = "NAME", required = true)]
    pub metrics: Vec<MetricName>,
    /// Synonym sets, one comma-separated set per line. Without it no synonym
    /// matching takes place.
    #[arg(long, value_name = "PATH")]
    pub lexicon: Option<PathBuf>,
    /// Highest n-gram order for EBLEU, BLEU and NIST (default 4, NIST 5).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_ngram: Option<u64>,
    #[arg(long, value_name = "F", default_value_t = 0.90)]
    pub synonym_score: f64,
    #[arg(long, value_name = "F", default_value_t = 0.10)]
    pub rare_words_percent: f64,
    #[arg(long, value_name = "F", default_value_t = 1.10)]
    pub rare_words_score: f64,
    /// Floor for zero n-gram precisions in EBLEU and BLEU; 0 disables smoothing.
    #[arg(long, value_name = "F", default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long)]
    pub lowercase: bool,
    #[arg(long)]
    pub split_punct: bool,
    #[arg(long)]
    pub per_sentence: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
    pub format: OutputFormat,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrelateKind {
    Pearson,
    Spearman,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    #[arg(long, value_name = "PATH")]
    pub table: PathBuf,
    #[arg(long, value_enum, default_value_t = CorrelateKind::Both)]
    pub kind: CorrelateKind,
    /// Also compute Goodman-Kruskal lambda for every ordered pair of metrics.
    #[arg(long)]
    pub lambda: bool,
    /// Number of equal-frequency bins used to discretize scores for lambda.
    #[arg(long, value_name = "K", default_value_t = 10)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
    pub format: OutputFormat,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Score table (TSV) or JSON score report; repeatable.
    #[arg(long = "in", value_name = "PATH", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn out_path(&self) -> Option<&Path> {
        match self {
            Command::Score(a) => a.out.as_deref(),
            Command::Correlate(a) => a.out.as_deref(),
            Command::Report(a) => a.out.as_deref(),
        }
    }
}

/// Runs a parsed command and returns the rendered output.
pub fn run(command: &Command) -> Result<String> {
    match command {
        Command::Score(args) => {
            let report = cmd_score(args)?;
            Ok(match args.format {
                OutputFormat::Json => to_json(&report),
                OutputFormat::Tsv => report.to_tsv(),
            })
        }
        Command::Correlate(args) => {
            let report = cmd_correlate(args)?;
            Ok(match args.format {
                OutputFormat::Json => to_json(&report),
                OutputFormat::Tsv => report.to_tsv(),
            })
        }
        Command::Report(args) => Ok(cmd_report(args)?.to_tsv()),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes `output` to `path`, or to stdout when no path is given.
pub fn emit(output: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, output).map_err(|e| Error::io(p, e)),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreSettings {
    pub hyp: PathBuf,
    pub refs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    pub metrics: Vec<MetricName>,
    pub tokenizer: TokenizerConfig,
    pub ebleu: EbleuConfig,
    pub bleu_max_order: usize,
    pub nist_max_order: usize,
    pub per_sentence: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusStats {
    pub pairs: usize,
    pub references_per_pair: usize,
    pub hyp_tokens: usize,
    pub ref_tokens: usize,
}

impl CorpusStats {
    fn of(corpus: &ParallelCorpus) -> Self {
        CorpusStats {
            pairs: corpus.len(),
            references_per_pair: corpus.ref_count(),
            hyp_tokens: corpus.pairs().iter().map(|p| p.hypothesis.len()).sum(),
            ref_tokens: corpus.references().map(|r| r.len()).sum(),
        }
    }
}

/// Output of `score`: configuration echo, corpus statistics and one entry per
/// selected metric, in column order.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreReport {
    pub config: ScoreSettings,
    pub corpus: CorpusStats,
    pub metrics: Vec<MetricScore>,
}

impl ScoreReport {
    /// Header of metric columns, a `corpus` row and optionally one row per
    /// sentence, on the tabular scale.
    pub fn to_tsv(&self) -> String {
        let names: Vec<MetricName> = self.config.metrics.clone();
        let mut out = String::from("run");
        for m in &names {
            out.push('\t');
            out.push_str(m.column());
        }
        out.push('\n');
        let mut row = |label: &str, values: &mut dyn Iterator<Item = f64>| {
            out.push_str(label);
            for (m, v) in names.iter().zip(values) {
                let _ = write!(out, "\t{:.2}", m.display_value(v));
            }
            out.push('\n');
        };
        row("corpus", &mut self.metrics.iter().map(|s| s.corpus_score));
        if self.config.per_sentence {
            for i in 0..self.corpus.pairs {
                row(&(i + 1).to_string(), &mut self.metrics.iter().map(|s| s.per_sentence[i]));
            }
        }
        out
    }
}

pub fn cmd_score(args: &ScoreArgs) -> Result<ScoreReport> {
    let tokenizer = TokenizerConfig {
        lowercase: args.lowercase,
        split_punctuation: args.split_punct,
    };
    let mut metrics = args.metrics.clone();
    metrics.sort();
    metrics.dedup();

    let max_ngram = args.max_ngram.map(|n| n as usize);
    let ebleu_cfg = EbleuConfig {
        max_order: max_ngram.unwrap_or(4),
        synonym_score: args.synonym_score,
        rare_words_percent: args.rare_words_percent,
        rare_words_score: args.rare_words_score,
        smoothing_epsilon: args.epsilon,
    };
    let bleu_cfg = BleuConfig::uniform(max_ngram.unwrap_or(4)).with_epsilon(args.epsilon);
    let nist_order = max_ngram.unwrap_or(NIST_DEFAULT_ORDER);
    // validate before touching the filesystem
    if metrics.contains(&MetricName::Ebleu) {
        ebleu_cfg.validate()?;
    }
    bleu_cfg.validate()?;

    let corpus = load_parallel_corpus(args.hyp.as_path(), &args.refs.iter().map(PathBuf::as_path).collect::<Vec<_>>(), &tokenizer)?;
    corpus.ensure_non_empty()?;
    let lexicon = match &args.lexicon {
        Some(path) => load_synonym_lexicon(path, &tokenizer)?,
        None => SynonymLexicon::new(),
    };

    let mut scores = Vec::with_capacity(metrics.len());
    for metric in &metrics {
        let mut score = match metric {
            MetricName::Ebleu => ebleu_score(&corpus, &lexicon, &ebleu_cfg)?,
            MetricName::Bleu => bleu_score(&corpus, &bleu_cfg)?,
            MetricName::Nist => nist_score(&corpus, nist_order)?,
            MetricName::Ter => ter_score(&corpus, &TerConfig::default())?,
            MetricName::Meteor => meteor_score(&corpus, &lexicon)?.to_metric_score(),
            MetricName::Lepor => lepor_score(&corpus, &LeporConfig::default())?,
            MetricName::Ribes => ribes_score(&corpus, &RibesConfig::default())?,
        };
        if !args.per_sentence {
            score.per_sentence.clear();
        }
        scores.push(score);
    }

    Ok(ScoreReport {
        config: ScoreSettings {
            hyp: args.hyp.clone(),
            refs: args.refs.clone(),
            lexicon: args.lexicon.clone(),
            metrics,
            tokenizer,
            ebleu: ebleu_cfg,
            bleu_max_order: bleu_cfg.max_order,
            nist_max_order: nist_order,
            per_sentence: args.per_sentence,
        },
        corpus: CorpusStats::of(&corpus),
        metrics: scores,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaEntry {
    pub dependent: String,
    pub predictor: String,
    #[serde(flatten)]
    pub result: LambdaResult,
}

/// Output of `correlate`.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub runs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pearson: Option<CorrelationMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spearman: Option<CorrelationMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<LambdaEntry>,
}

impl CorrelationReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (name, matrix) in [("pearson", &self.pearson), ("spearman", &self.spearman)] {
            if let Some(m) = matrix {
                let _ = writeln!(out, "# {name} (n = {})", self.runs);
                out.push_str(&m.to_tsv());
                out.push('\n');
            }
        }
        if let Some(bins) = self.bins {
            let _ = writeln!(out, "# lambda ({bins} bins)");
            out.push_str("dependent\tpredictor\tlambda\tvariance\n");
            for e in &self.lambda {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{:.4}\t{:.4}",
                    e.dependent, e.predictor, e.result.lambda, e.result.variance
                );
            }
            out.push('\n');
        }
        out.pop();
        out
    }
}

pub fn read_score_table(path: &Path) -> Result<ScoreTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScoreTable::parse_tsv(&text, &path.display().to_string())
}

pub fn cmd_correlate(args: &CorrelateArgs) -> Result<CorrelationReport> {
    let table = read_score_table(&args.table)?;
    correlate_table(&table, args.kind, args.lambda.then_some(args.bins))
}

/// Correlation matrices of `table` and, if `lambda_bins` is set, lambda for
/// every ordered pair of distinct metrics.
pub fn correlate_table(table: &ScoreTable, kind: CorrelateKind, lambda_bins: Option<usize>) -> Result<CorrelationReport> {
    let want = |k: CorrelateKind| kind == k || kind == CorrelateKind::Both;
    let pearson = if want(CorrelateKind::Pearson) {
        Some(correlation_matrix(table, CorrelationKind::Pearson)?)
    } else {
        None
    };
    let spearman = if want(CorrelateKind::Spearman) {
        Some(correlation_matrix(table, CorrelationKind::Spearman)?)
    } else {
        None
    };

    let mut lambda = Vec::new();
    if let Some(bins) = lambda_bins {
        let names = &table.metric_names;
        for dep in 0..names.len() {
            for pred in 0..names.len() {
                if dep == pred {
                    continue;
                }
                let result = lambda_between(&table.column(dep), &table.column(pred), bins)?;
                lambda.push(LambdaEntry {
                    dependent: names[dep].clone(),
                    predictor: names[pred].clone(),
                    result,
                });
            }
        }
    }

    Ok(CorrelationReport {
        runs: table.rows.len(),
        pearson,
        spearman,
        bins: lambda_bins,
        lambda,
    })
}

#[derive(serde::Deserialize)]
struct StoredReport {
    metrics: Vec<StoredMetric>,
}

#[derive(serde::Deserialize)]
struct StoredMetric {
    metric: String,
    corpus_score: f64,
}

/// A JSON score report becomes a single row on the tabular scale, labelled
/// with the file stem.
fn table_from_json(text: &str, path: &Path) -> Result<ScoreTable> {
    let origin = path.display().to_string();
    let report: StoredReport = serde_json::from_str(text).map_err(|e| Error::Parse {
        origin: origin.clone(),
        message: e.to_string(),
    })?;
    let mut names = Vec::with_capacity(report.metrics.len());
    let mut row = Vec::with_capacity(report.metrics.len());
    for m in &report.metrics {
        let name = MetricName::from_key(&m.metric).ok_or_else(|| Error::Parse {
            origin: origin.clone(),
            message: format!("unknown metric {:?}", m.metric),
        })?;
        names.push(name.column().to_owned());
        row.push(name.display_value(m.corpus_score));
    }
    let mut table = ScoreTable::new(names, vec![row])?;
    table.labels = vec![path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| origin.clone())];
    Ok(table)
}

fn load_report_input(path: &Path) -> Result<ScoreTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('{') {
        table_from_json(&text, path)
    } else {
        ScoreTable::parse_tsv(&text, &path.display().to_string())
    }
}

/// Concatenates the rows of all inputs; every input must have the same columns.
pub fn cmd_report(args: &ReportArgs) -> Result<ScoreTable> {
    let mut inputs = args.inputs.iter();
    let first = inputs.next().ok_or_else(|| Error::InvalidConfig("no inputs".into()))?;
    let mut merged = load_report_input(first)?;
    for path in inputs {
        merged
            .append(&load_report_input(path)?)
            .map_err(|e| match e {
                Error::SchemaMismatch(msg) => Error::SchemaMismatch(format!("{}: {msg}", path.display())),
                other => other,
            })?;
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_order_and_names() {
        let mut m = vec![MetricName::Ribes, MetricName::Ebleu, MetricName::Ter];
        m.sort();
        assert_eq!(m, [MetricName::Ebleu, MetricName::Ter, MetricName::Ribes]);
        assert_eq!(MetricName::from_key("meteor"), Some(MetricName::Meteor));
        assert_eq!(MetricName::from_key("METEOR"), Some(MetricName::Meteor));
        assert_eq!(MetricName::from_key("wer"), None);
    }

    #[test]
    fn display_scale() {
        assert_eq!(MetricName::Bleu.display_value(0.975), 97.5);
        assert_eq!(MetricName::Nist.display_value(7.12345), 7.12);
        assert_eq!(MetricName::Ter.display_value(0.123456), 12.35);
    }

    #[test]
    fn json_report_row() {
        let text = r#"{"metrics": [{"metric": "ebleu", "corpus_score": 0.5}, {"metric": "nist", "corpus_score": 6.5}]}"#;
        let t = table_from_json(text, Path::new("dir/run7.json")).unwrap();
        assert_eq!(t.metric_names, ["EBLEU", "NIST"]);
        assert_eq!(t.rows, [vec![50.0, 6.5]]);
        assert_eq!(t.labels, ["run7"]);
        assert!(table_from_json(r#"{"metrics": [{"metric": "x", "corpus_score": 1}]}"#, Path::new("a")).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
