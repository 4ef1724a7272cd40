use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{Dataset, DecisionTree, LearnError, Result, TreeParams};
use crate::corpus::NsuClass;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Actual instances of the class.
    pub support: u64,
}

/// Metrics derived from a square confusion matrix (rows = gold, columns =
/// predicted).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub confusion: Vec<Vec<u64>>,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, per-class precision/recall/F1 and support-weighted averages.
/// Ratios with a zero denominator are 0.
pub fn metrics(confusion: &[Vec<u64>]) -> EvalReport {
    let k = confusion.len();
    let n: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let mut per_class = Vec::with_capacity(k);
    let (mut wp, mut wr, mut wf) = (0.0, 0.0, 0.0);
    for c in 0..k {
        let tp = confusion[c][c];
        let actual: u64 = confusion[c].iter().sum();
        let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
        let fp = predicted - tp;
        let fn_ = actual - tp;
        let m = ClassMetrics {
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
            support: actual,
        };
        wp += actual as f64 * m.precision;
        wr += actual as f64 * m.recall;
        wf += actual as f64 * m.f1;
        per_class.push(m);
    }
    let nf = if n == 0 { 1.0 } else { n as f64 };
    EvalReport {
        confusion: confusion.to_vec(),
        accuracy: ratio(trace, n),
        per_class,
        precision: wp / nf,
        recall: wr / nf,
        f1: wf / nf,
    }
}

impl EvalReport {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// Per-class rows plus a weighted-average row, as CSV.
    pub fn write_csv(&self, sink: impl Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let mut write = || -> csv::Result<()> {
            w.write_record(["class", "precision", "recall", "f1", "support"])?;
            for (i, m) in self.per_class.iter().enumerate() {
                let name = NsuClass::from_index(i).map_or_else(|| i.to_string(), |c| c.to_string());
                w.write_record([
                    name,
                    format!("{:.4}", m.precision),
                    format!("{:.4}", m.recall),
                    format!("{:.4}", m.f1),
                    m.support.to_string(),
                ])?;
            }
            w.write_record([
                "weighted".to_string(),
                format!("{:.4}", self.precision),
                format!("{:.4}", self.recall),
                format!("{:.4}", self.f1),
                self.total().to_string(),
            ])?;
            w.write_record([
                "accuracy".to_string(),
                format!("{:.4}", self.accuracy),
                String::new(),
                String::new(),
                self.total().to_string(),
            ])?;
            w.flush()?;
            Ok(())
        };
        write().map_err(std::io::Error::other)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>9} {:>9} {:>9} {:>7}", "class", "precision", "recall", "F1", "N")?;
        for (i, m) in self.per_class.iter().enumerate() {
            if m.support == 0 && self.confusion.iter().all(|r| r[i] == 0) {
                continue;
            }
            let name = NsuClass::from_index(i).map_or_else(|| i.to_string(), |c| c.to_string());
            writeln!(
                f,
                "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>7}",
                name, m.precision, m.recall, m.f1, m.support
            )?;
        }
        writeln!(
            f,
            "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>7}",
            "weighted",
            self.precision,
            self.recall,
            self.f1,
            self.total()
        )?;
        write!(f, "accuracy {:.4}", self.accuracy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub folds: Vec<EvalReport>,
    pub pooled: EvalReport,
    /// Test fold of every row.
    pub assignment: Vec<usize>,
}

impl CrossValidation {
    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|r| r.accuracy).collect()
    }
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin,
/// the dealing position carrying over from one class to the next.
pub fn stratified_folds(labels: &[NsuClass], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NsuClass::COUNT];
    for (i, l) in labels.iter().enumerate() {
        by_class[l.index()].push(i);
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for mut group in by_class {
        group.shuffle(&mut rng);
        for i in group {
            assignment[i] = next % k;
            next += 1;
        }
    }
    assignment
}

pub fn cross_validate(d: &Dataset, k: usize, params: TreeParams, seed: u64) -> Result<CrossValidation> {
    if k < 2 {
        return Err(LearnError::InvalidParameter("k must be at least 2".into()));
    }
    if d.len() < k {
        return Err(LearnError::TooFewRows {
            needed: k,
            have: d.len(),
        });
    }
    let labels: Vec<NsuClass> = d.rows.iter().map(|r| r.label).collect();
    let assignment = stratified_folds(&labels, k, seed);
    let mut pooled = vec![vec![0u64; NsuClass::COUNT]; NsuClass::COUNT];
    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let train: Vec<usize> = (0..d.len()).filter(|&i| assignment[i] != fold).collect();
        let test: Vec<usize> = (0..d.len()).filter(|&i| assignment[i] == fold).collect();
        let tree = DecisionTree::train(&d.subset(&train), params)?;
        let mut cm = vec![vec![0u64; NsuClass::COUNT]; NsuClass::COUNT];
        for &i in &test {
            let row = &d.rows[i];
            let pred = tree.predict(&row.values)?.argmax();
            cm[row.label.index()][pred.index()] += 1;
            pooled[row.label.index()][pred.index()] += 1;
        }
        folds.push(metrics(&cm));
    }
    Ok(CrossValidation {
        folds,
        pooled: metrics(&pooled),
        assignment,
    })
}

/// Accuracy, weighted precision/recall/F1 of `tree` on `d`.
pub fn evaluate(tree: &DecisionTree, d: &Dataset) -> Result<EvalReport> {
    let mut cm = vec![vec![0u64; NsuClass::COUNT]; NsuClass::COUNT];
    for row in &d.rows {
        let pred = tree.predict(&row.values)?.argmax();
        cm[row.label.index()][pred.index()] += 1;
    }
    Ok(metrics(&cm))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

/// Paired two-tailed t-test on `a[i] - b[i]`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(LearnError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(LearnError::TooFewSamples);
    }
    let deltas: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean = deltas.iter().sum::<f64>() / nf;
    let ss: f64 = deltas.iter().map(|d| (d - mean).powi(2)).sum();
    let df = nf - 1.0;
    if ss == 0.0 {
        if mean == 0.0 {
            return Ok(TTest { t: 0.0, p: 1.0, df });
        }
        return Err(LearnError::ZeroVariance { mean });
    }
    let t = mean / (ss / (nf * df)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, p, df })
}
