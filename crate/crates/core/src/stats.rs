//! Correlation statistics for comparing metrics across runs: Pearson, Spearman
//! with average ranks for ties, Goodman-Kruskal's asymmetric lambda, and the
//! score tables they operate on.

use std::fmt::Write as _;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub coefficient: f64,
    pub n: usize,
    /// Two-tailed significance from the t approximation; Spearman only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_tailed_p: Option<f64>,
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations(x.len()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    check_lengths(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(CorrelationResult {
        coefficient: (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0),
        n: x.len(),
        two_tailed_p: None,
    })
}

/// 1-based ranks; tied values share the average of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn has_ties(ranks: &[f64]) -> bool {
    ranks.iter().any(|r| r.fract() != 0.0) || {
        let mut sorted = ranks.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).any(|w| w[0] == w[1])
    }
}

/// Two-tailed p-value of a correlation coefficient via `t = r sqrt((n-2)/(1-r^2))`.
pub fn t_test_p_value(r: f64, n: usize) -> Option<f64> {
    if n < 3 {
        return None;
    }
    if r.abs() >= 1.0 {
        return Some(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some((2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0))
}

/// Rank correlation. Without ties uses `1 - 6 sum(d^2) / (n (n^2 - 1))`; with
/// ties, Pearson on average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    check_lengths(x, y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let coefficient = if has_ties(&rx) || has_ties(&ry) {
        pearson(&rx, &ry)?.coefficient
    } else {
        let n = x.len() as f64;
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
        1.0 - 6.0 * d2 / (n * (n * n - 1.0))
    };
    Ok(CorrelationResult {
        coefficient,
        n: x.len(),
        two_tailed_p: t_test_p_value(coefficient, x.len()),
    })
}

/// Cross-tabulation of two categorical variables; rows are the predictor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    n: u64,
}

impl ContingencyTable {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidTable("need at least 2 rows".into()));
        }
        let cols = counts[0].len();
        if cols < 2 {
            return Err(Error::InvalidTable("need at least 2 columns".into()));
        }
        if counts.iter().any(|row| row.len() != cols) {
            return Err(Error::InvalidTable("rows differ in length".into()));
        }
        let n = counts.iter().flatten().sum();
        Ok(ContingencyTable { counts, n })
    }

    /// Counts co-occurrences of `rows[i]` and `columns[i]` labels.
    pub fn from_labels(rows: &[usize], columns: &[usize], n_rows: usize, n_cols: usize) -> Result<Self> {
        if rows.len() != columns.len() {
            return Err(Error::LengthMismatch(rows.len(), columns.len()));
        }
        let mut counts = vec![vec![0u64; n_cols]; n_rows];
        for (&r, &c) in rows.iter().zip(columns) {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidTable(format!("label ({r}, {c}) out of range")));
            }
            counts[r][c] += 1;
        }
        ContingencyTable::new(counts)
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaResult {
    pub lambda: f64,
    pub variance: f64,
}

/// Goodman-Kruskal `lambda(C|R)`: proportional reduction in error when
/// predicting the column category from the row category.
///
/// `r_i` is the largest count in row `i` and `r` the largest column total.
/// For the variance, column `l` is the first column attaining `r`, and
/// `sum(r_i | l_i = l)` adds `r_i` over the rows whose maximum is attained in
/// column `l`.
pub fn goodman_kruskal_lambda(table: &ContingencyTable) -> Result<LambdaResult> {
    let n = table.n as f64;
    let row_max: Vec<u64> = table
        .counts
        .iter()
        .map(|row| *row.iter().max().unwrap())
        .collect();
    let cols = table.counts[0].len();
    let col_totals: Vec<u64> = (0..cols)
        .map(|j| table.counts.iter().map(|row| row[j]).sum())
        .collect();
    let (l, &r) = col_totals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .unwrap();
    let r = r as f64;
    if n <= r {
        return Err(Error::DegenerateTable);
    }
    let sum_ri: f64 = row_max.iter().sum::<u64>() as f64;
    let sum_ri_at_l: f64 = table
        .counts
        .iter()
        .zip(&row_max)
        .filter(|(row, &m)| row[l] == m)
        .map(|(_, &m)| m as f64)
        .sum();

    let lambda = (sum_ri - r) / (n - r);
    let variance = (n - sum_ri) / (n - r).powi(3) * (sum_ri + r - 2.0 * sum_ri_at_l);
    Ok(LambdaResult {
        lambda,
        variance: variance.max(0.0),
    })
}

/// Equal-frequency binning. Values are ranked; position `k` of `n` falls in bin
/// `floor(k * bins / n)`, and tied values all take the lowest bin any of them
/// reaches.
pub fn discretize(values: &[f64], bins: usize) -> Result<Vec<usize>> {
    if bins < 2 {
        return Err(Error::InvalidConfig("need at least 2 bins".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let distinct = 1 + order
        .windows(2)
        .filter(|w| values[w[0]] != values[w[1]])
        .count();
    if values.is_empty() || distinct < bins {
        return Err(Error::InsufficientDistinctValues {
            distinct: if values.is_empty() { 0 } else { distinct },
            bins,
        });
    }
    let n = values.len();
    let mut labels = vec![0; n];
    let mut current = 0;
    for (k, &i) in order.iter().enumerate() {
        if k == 0 || values[i] != values[order[k - 1]] {
            current = k * bins / n;
        }
        labels[i] = current;
    }
    Ok(labels)
}

/// Runs x metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    pub metric_names: Vec<String>,
    /// Optional per-row labels (for instance experiment numbers).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Name of the optional leading label column in score-table TSV files.
pub const LABEL_COLUMN: &str = "run";

impl ScoreTable {
    pub fn new(metric_names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = metric_names.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::Parse {
                origin: "score table".into(),
                message: format!("row {} has {} values, header has {width}", i + 1, row.len()),
            });
        }
        Ok(ScoreTable {
            metric_names,
            labels: Vec::new(),
            rows,
        })
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.metric_names
            .iter()
            .position(|m| m.eq_ignore_ascii_case(name))
            .map(|i| self.column(i))
    }

    /// Parses tab-separated text: a header of metric names, then numeric rows.
    /// A first column headed `run` holds row labels. Blank lines are skipped.
    pub fn parse_tsv(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            origin: format!("{origin}:{line}"),
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| err(1, "missing header row".into()))?;
        let mut names: Vec<String> = header.split('\t').map(|s| s.trim().to_owned()).collect();
        let labelled = names.first().is_some_and(|h| h.eq_ignore_ascii_case(LABEL_COLUMN));
        if labelled {
            names.remove(0);
        }
        if names.is_empty() || names.iter().any(String::is_empty) {
            return Err(err(1, "empty metric name in header".into()));
        }

        let mut labels = Vec::new();
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let mut cells: Vec<&str> = line.split('\t').map(str::trim).collect();
            if labelled {
                if cells.is_empty() {
                    return Err(err(idx + 1, "missing row label".into()));
                }
                labels.push(cells.remove(0).to_owned());
            }
            if cells.len() != names.len() {
                return Err(err(
                    idx + 1,
                    format!("expected {} values, found {}", names.len(), cells.len()),
                ));
            }
            let row = cells
                .iter()
                .map(|c| {
                    c.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(idx + 1, format!("not a number: {c:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let mut table = ScoreTable::new(names, rows)?;
        table.labels = labels;
        Ok(table)
    }

    /// Writes the table back as TSV, with a `run` column when labels exist.
    /// Values use the shortest representation that parses back exactly.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let labelled = !self.labels.is_empty();
        if labelled {
            out.push_str(LABEL_COLUMN);
            out.push('\t');
        }
        out.push_str(&self.metric_names.join("\t"));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            if labelled {
                out.push_str(&self.labels[i]);
                out.push('\t');
            }
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }

    /// Appends the rows of `other`, which must have the same metric columns.
    pub fn append(&mut self, other: &ScoreTable) -> Result<()> {
        if self.metric_names != other.metric_names {
            return Err(Error::SchemaMismatch(format!(
                "columns [{}] vs [{}]",
                self.metric_names.join(", "),
                other.metric_names.join(", ")
            )));
        }
        let labelled = !self.labels.is_empty() || !other.labels.is_empty();
        if labelled {
            let fill = |t: &ScoreTable, start: usize| -> Vec<String> {
                if t.labels.is_empty() {
                    (start + 1..=start + t.rows.len()).map(|i| i.to_string()).collect()
                } else {
                    t.labels.clone()
                }
            };
            let mut labels = fill(self, 0);
            labels.extend(fill(other, self.rows.len()));
            self.labels = labels;
        }
        self.rows.extend(other.rows.iter().cloned());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    Pearson,
    Spearman,
}

/// Lower-triangular matrix of pairwise correlations, diagonal included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub kind: CorrelationKind,
    pub metric_names: Vec<String>,
    /// `cells[i][j]` for `j <= i`.
    pub cells: Vec<Vec<CorrelationResult>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: usize, b: usize) -> &CorrelationResult {
        if b <= a {
            &self.cells[a][b]
        } else {
            &self.cells[b][a]
        }
    }

    pub fn get_by_name(&self, a: &str, b: &str) -> Option<&CorrelationResult> {
        let find = |name: &str| self.metric_names.iter().position(|m| m.eq_ignore_ascii_case(name));
        Some(self.get(find(a)?, find(b)?))
    }

    /// Tab-separated lower triangle, four decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push('\t');
        out.push_str(&self.metric_names.join("\t"));
        out.push('\n');
        for (i, row) in self.cells.iter().enumerate() {
            out.push_str(&self.metric_names[i]);
            for cell in row {
                let _ = write!(out, "\t{:.4}", cell.coefficient);
            }
            out.push('\n');
        }
        out
    }
}

pub fn correlation_matrix(table: &ScoreTable, kind: CorrelationKind) -> Result<CorrelationMatrix> {
    if table.rows.len() < 2 {
        return Err(Error::TooFewObservations(table.rows.len()));
    }
    let columns: Vec<Vec<f64>> = (0..table.metric_names.len()).map(|i| table.column(i)).collect();
    let mut cells = Vec::with_capacity(columns.len());
    for i in 0..columns.len() {
        let mut row = Vec::with_capacity(i + 1);
        for j in 0..=i {
            let result = if i == j {
                let base = match kind {
                    CorrelationKind::Pearson => pearson(&columns[i], &columns[j])?,
                    CorrelationKind::Spearman => spearman(&columns[i], &columns[j])?,
                };
                CorrelationResult { coefficient: 1.0, ..base }
            } else {
                match kind {
                    CorrelationKind::Pearson => pearson(&columns[i], &columns[j])?,
                    CorrelationKind::Spearman => spearman(&columns[i], &columns[j])?,
                }
            };
            row.push(result);
        }
        cells.push(row);
    }
    Ok(CorrelationMatrix {
        kind,
        metric_names: table.metric_names.clone(),
        cells,
    })
}

/// Lambda of one metric (columns, dependent) given another (rows), after
/// discretizing both into `bins` equal-frequency categories.
pub fn lambda_between(dependent: &[f64], predictor: &[f64], bins: usize) -> Result<LambdaResult> {
    if dependent.len() != predictor.len() {
        return Err(Error::LengthMismatch(dependent.len(), predictor.len()));
    }
    let cols = discretize(dependent, bins)?;
    let rows = discretize(predictor, bins)?;
    goodman_kruskal_lambda(&ContingencyTable::from_labels(&rows, &cols, bins, bins)?)
}
