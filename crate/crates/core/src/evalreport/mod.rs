//! Per-class accuracy, mean aggregation, run comparison and text outputs.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dataio::{ClassId, NUM_CLASSES};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("class id {0} out of range")]
    ClassOutOfRange(usize),
    #[error("class {0} has no test images")]
    MissingClass(ClassId),
    #[error("run {label:?} was evaluated on test split {found}, table uses {expected}")]
    TestSplitMismatch {
        label: String,
        expected: String,
        found: String,
    },
    #[error("run label {0:?} must be non-empty without whitespace or parentheses")]
    BadLabel(String),
    #[error("empty comparison")]
    Empty,
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Accuracy percent per class; `None` marks classes absent from the test set.
#[derive(Clone, Debug, PartialEq)]
pub struct PerClassAccuracy {
    pub accuracy: [Option<f64>; NUM_CLASSES],
    pub count: [usize; NUM_CLASSES],
}

impl PerClassAccuracy {
    /// Builds from known percentages, e.g. values read off a plot.
    pub fn from_percentages(values: [f64; NUM_CLASSES], count: [usize; NUM_CLASSES]) -> Self {
        Self {
            accuracy: values.map(Some),
            count,
        }
    }

    pub fn total(&self) -> usize {
        self.count.iter().sum()
    }
}

pub fn per_class_accuracy(predictions: &[usize], labels: &[usize]) -> Result<PerClassAccuracy, ReportError> {
    if predictions.len() != labels.len() {
        return Err(ReportError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut correct = [0usize; NUM_CLASSES];
    let mut count = [0usize; NUM_CLASSES];
    for (&p, &l) in predictions.iter().zip(labels) {
        if l >= NUM_CLASSES {
            return Err(ReportError::ClassOutOfRange(l));
        }
        if p >= NUM_CLASSES {
            return Err(ReportError::ClassOutOfRange(p));
        }
        count[l] += 1;
        if p == l {
            correct[l] += 1;
        }
    }
    let accuracy = std::array::from_fn(|c| (count[c] > 0).then(|| 100.0 * correct[c] as f64 / count[c] as f64));
    Ok(PerClassAccuracy { accuracy, count })
}

/// Unweighted mean over all ten classes.
pub fn aggregate_report(per_class: &PerClassAccuracy) -> Result<f64, ReportError> {
    let mut sum = 0.0;
    for (c, a) in per_class.accuracy.iter().enumerate() {
        match a {
            Some(v) => sum += v,
            None => {
                return Err(ReportError::MissingClass(
                    ClassId::new(c).expect("index below class count"),
                ))
            }
        }
    }
    Ok(sum / NUM_CLASSES as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub label: String,
    pub per_class: PerClassAccuracy,
    pub mean: f64,
    pub seed: u64,
    pub config_hash: String,
    pub test_split_hash: String,
    pub train_size: usize,
    pub test_size: usize,
}

impl RunReport {
    pub fn new(
        label: &str,
        per_class: PerClassAccuracy,
        seed: u64,
        config_hash: &str,
        test_split_hash: &str,
        train_size: usize,
    ) -> Result<Self, ReportError> {
        check_label(label)?;
        let mean = aggregate_report(&per_class)?;
        Ok(Self {
            label: label.to_string(),
            test_size: per_class.total(),
            per_class,
            mean,
            seed,
            config_hash: config_hash.to_string(),
            test_split_hash: test_split_hash.to_string(),
            train_size,
        })
    }
}

fn check_label(label: &str) -> Result<(), ReportError> {
    if label.is_empty() || label.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
        return Err(ReportError::BadLabel(label.to_string()));
    }
    Ok(())
}

/// Runs evaluated on one shared test split.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<RunReport>,
}

impl ComparisonTable {
    pub fn push(&mut self, report: RunReport) -> Result<(), ReportError> {
        if let Some(first) = self.rows.first() {
            if first.test_split_hash != report.test_split_hash {
                return Err(ReportError::TestSplitMismatch {
                    label: report.label,
                    expected: first.test_split_hash.clone(),
                    found: report.test_split_hash,
                });
            }
        }
        self.rows.push(report);
        Ok(())
    }
}

/// `class_id,accuracy_percent,count` rows followed by `mean,<mean>,<total>`.
pub fn emit_csv(report: &RunReport) -> String {
    let mut s = String::from("class_id,accuracy_percent,count\n");
    for c in 0..NUM_CLASSES {
        let acc = report.per_class.accuracy[c].unwrap_or(f64::NAN);
        writeln!(s, "{c},{acc:.2},{}", report.per_class.count[c]).unwrap();
    }
    writeln!(s, "mean,{:.2},{}", report.mean, report.per_class.total()).unwrap();
    s
}

/// Reads [`emit_csv`] output back as `(per-class, mean)`.
pub fn parse_csv(text: &str) -> Result<(PerClassAccuracy, f64), ReportError> {
    let err = |line: usize, reason: String| ReportError::Parse { line, reason };
    let lines: Vec<&str> = text.lines().collect();
    if lines.first() != Some(&"class_id,accuracy_percent,count") {
        return Err(err(1, "missing header".into()));
    }
    if lines.len() != NUM_CLASSES + 2 {
        return Err(err(lines.len(), format!("expected {} lines", NUM_CLASSES + 2)));
    }
    let mut accuracy = [None; NUM_CLASSES];
    let mut count = [0; NUM_CLASSES];
    let mut mean = 0.0;
    for (i, line) in lines.iter().enumerate().skip(1) {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        let [key, acc, cnt] = f[..] else {
            return Err(err(n, format!("expected 3 fields in {line:?}")));
        };
        let acc: f64 = acc.parse().map_err(|e| err(n, format!("accuracy {acc:?}: {e}")))?;
        let cnt: usize = cnt.parse().map_err(|e| err(n, format!("count {cnt:?}: {e}")))?;
        if i <= NUM_CLASSES {
            if key != (i - 1).to_string() {
                return Err(err(n, format!("expected class {}, got {key:?}", i - 1)));
            }
            accuracy[i - 1] = (!acc.is_nan()).then_some(acc);
            count[i - 1] = cnt;
        } else if key == "mean" {
            mean = acc;
        } else {
            return Err(err(n, format!("expected mean row, got {key:?}")));
        }
    }
    Ok((PerClassAccuracy { accuracy, count }, mean))
}

/// Shortest decimal of `v` at two-place precision: 73.10 → `73.1`, 78.00 → `78`.
fn coordinate(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

/// One line per run: the label, a space, then `(class,accuracy)` pairs for
/// every present class.
pub fn emit_plot_series(table: &ComparisonTable) -> Result<String, ReportError> {
    if table.rows.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut s = String::new();
    for run in &table.rows {
        s.push_str(&run.label);
        s.push(' ');
        for (c, a) in run.per_class.accuracy.iter().enumerate() {
            if let Some(a) = a {
                write!(s, "({c},{})", coordinate(*a)).unwrap();
            }
        }
        s.push('\n');
    }
    Ok(s)
}

/// One plot line: run label and `(class, accuracy)` points.
pub type PlotSeries = (String, Vec<(usize, f64)>);

/// Parses [`emit_plot_series`] output into `(label, [(class, accuracy)])`.
pub fn parse_plot_series(text: &str) -> Result<Vec<PlotSeries>, ReportError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |reason: String| ReportError::Parse { line: i + 1, reason };
        if line.trim().is_empty() {
            continue;
        }
        let (label, rest) = line.split_once(' ').ok_or_else(|| err("missing label".into()))?;
        let body = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| err(format!("bad coordinate list {rest:?}")))?;
        let mut pairs = Vec::new();
        for pair in body.split(")(") {
            let (c, a) = pair.split_once(',').ok_or_else(|| err(format!("bad pair {pair:?}")))?;
            let c: usize = c.parse().map_err(|e| err(format!("class {c:?}: {e}")))?;
            let a: f64 = a.parse().map_err(|e| err(format!("accuracy {a:?}: {e}")))?;
            pairs.push((c, a));
        }
        out.push((label.to_string(), pairs));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_trim_zeros() {
        assert_eq!(coordinate(73.1), "73.1");
        assert_eq!(coordinate(78.0), "78");
        assert_eq!(coordinate(77.61), "77.61");
        assert_eq!(coordinate(100.0), "100");
        assert_eq!(coordinate(0.004), "0");
    }
}
