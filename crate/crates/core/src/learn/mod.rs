//! Decision-tree learning, evaluation and hyperparameter search.

mod eval;
mod tree;
mod tune;

pub use eval::{
    cross_validate, evaluate, metrics, paired_t_test, stratified_folds, ClassMetrics, CrossValidation,
    EvalReport, TTest,
};
pub use tree::{ClassDist, DecisionTree, Node, TreeParams};
pub use tune::{coordinate_ascent, maximize, tune_tree, Ascent, StepRule, TuneResult};

use thiserror::Error;

use crate::corpus::{Corpus, NsuClass};
use crate::features::{FeatureExtractor, FeatureKind, FeatureValue, Schema, SchemaTag};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("probabilities must be non-negative and sum to 1")]
    InvalidDistribution,
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("need at least {needed} rows, have {have}")]
    TooFewRows { needed: usize, have: usize },
    #[error("vector has {got} values, schema `{schema}` expects {expected}")]
    SchemaMismatch {
        schema: String,
        expected: usize,
        got: usize,
    },
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two paired samples")]
    TooFewSamples,
    #[error("differences are constant and nonzero (mean {mean}); t is infinite")]
    ZeroVariance { mean: f64 },
    #[error("initial component {0} is zero")]
    ZeroInitialComponent(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model parse error at line {line}: {msg}")]
    ModelFormat { line: usize, msg: String },
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

pub type Result<T> = std::result::Result<T, LearnError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<FeatureValue>,
    pub label: NsuClass,
}

/// Labelled feature rows over a fixed schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn new(schema: Schema) -> Self {
        Dataset {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, values: Vec<FeatureValue>, label: NsuClass) -> Result<()> {
        self.check(&values)?;
        self.rows.push(Row { values, label });
        Ok(())
    }

    pub fn check(&self, values: &[FeatureValue]) -> Result<()> {
        if values.len() != self.schema.len() {
            return Err(LearnError::SchemaMismatch {
                schema: self.schema.name.clone(),
                expected: self.schema.len(),
                got: values.len(),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn class_counts(&self) -> [usize; NsuClass::COUNT] {
        let mut c = [0; NsuClass::COUNT];
        for r in &self.rows {
            c[r.label.index()] += 1;
        }
        c
    }

    /// Share of the most frequent class.
    pub fn majority_rate(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        *self.class_counts().iter().max().unwrap_or(&0) as f64 / self.rows.len() as f64
    }

    /// Builds the feature dataset for every record of a corpus.
    pub fn from_corpus(corpus: &Corpus, tag: SchemaTag, fx: &FeatureExtractor) -> Result<Dataset> {
        let mut d = Dataset::new(tag.schema());
        for r in &corpus.records {
            let (nsu, ant) = corpus.pair(r)?;
            d.push(fx.extract(tag, nsu, ant).values, r.label)?;
        }
        Ok(d)
    }
}

/// Shannon entropy in bits.
pub fn entropy(dist: &[f64]) -> Result<f64> {
    if dist.is_empty() || dist.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(LearnError::InvalidDistribution);
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(LearnError::InvalidDistribution);
    }
    Ok(entropy_of(dist))
}

/// Entropy of a (normalised) distribution without validation.
pub(crate) fn entropy_of(dist: &[f64]) -> f64 {
    let h: f64 = dist
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    h.max(0.0)
}

pub(crate) fn entropy_counts(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let h: f64 = counts
        .iter()
        .filter(|c| **c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Information gain of splitting `d` on feature `name`.
///
/// Categorical features split per symbol (unknown is its own symbol);
/// numeric features use their best midpoint threshold.
pub fn info_gain(d: &Dataset, name: &str) -> Result<f64> {
    let f = d
        .schema
        .index_of(name)
        .ok_or_else(|| LearnError::UnknownFeature(name.to_string()))?;
    let idx: Vec<usize> = (0..d.len()).collect();
    Ok(match d.schema.features[f].kind {
        FeatureKind::Categorical => tree::categorical_gain(d, &idx, f),
        FeatureKind::Numeric => tree::best_threshold(d, &idx, f, 1)
            .map(|(g, _)| g)
            .unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Schema;

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(entropy(&[1.0]).unwrap(), 0.0);
        let direct = -(0.75f64 * 0.75f64.log2() + 0.2 * 0.2f64.log2() + 0.05 * 0.05f64.log2());
        let h = entropy(&[0.75, 0.2, 0.05]).unwrap();
        assert!((h - direct).abs() < 1e-12);
        assert!((h - 0.9918).abs() < 1e-4);
        assert!(entropy(&[0.5, 0.6]).is_err());
        assert!(entropy(&[-0.5, 1.5]).is_err());
    }

    fn toy(values: &[(&str, NsuClass)]) -> Dataset {
        let mut d = Dataset::new(Schema::new("toy", &[("f", FeatureKind::Categorical)]));
        for (v, c) in values {
            d.push(vec![FeatureValue::cat(v)], *c).unwrap();
        }
        d
    }

    #[test]
    fn gain_extremes() {
        use NsuClass::*;
        let perfect = toy(&[("a", Ack), ("b", CE), ("a", Ack), ("c", Sluice)]);
        let h = entropy_counts(&[2, 1, 1]);
        assert!((info_gain(&perfect, "f").unwrap() - h).abs() < 1e-12);
        let constant = toy(&[("a", Ack), ("a", CE)]);
        assert_eq!(info_gain(&constant, "f").unwrap(), 0.0);
        assert!(matches!(
            info_gain(&constant, "g"),
            Err(LearnError::UnknownFeature(_))
        ));
    }
}
