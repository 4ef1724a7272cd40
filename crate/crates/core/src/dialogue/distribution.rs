use serde::{Deserialize, Serialize};

use super::DialogueError;

pub const TOLERANCE: f64 = 1e-9;

/// A categorical distribution over values in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution<V> {
    entries: Vec<(V, f64)>,
}

impl<V: PartialEq + Clone> Distribution<V> {
    pub fn point(v: V) -> Self {
        Distribution {
            entries: vec![(v, 1.0)],
        }
    }

    /// Builds a distribution from weights, merging equal values and
    /// normalising. Zero weights are dropped.
    pub fn from_weights(weights: impl IntoIterator<Item = (V, f64)>) -> Result<Self, DialogueError> {
        let mut entries: Vec<(V, f64)> = Vec::new();
        for (v, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(DialogueError::InvalidDistribution);
            }
            if w == 0.0 {
                continue;
            }
            match entries.iter_mut().find(|(u, _)| *u == v) {
                Some(e) => e.1 += w,
                None => entries.push((v, w)),
            }
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if entries.is_empty() || total <= 0.0 {
            return Err(DialogueError::InvalidDistribution);
        }
        for e in &mut entries {
            e.1 /= total;
        }
        Ok(Distribution { entries })
    }

    /// Like `from_weights` but the weights must already sum to one.
    pub fn new(weights: impl IntoIterator<Item = (V, f64)>) -> Result<Self, DialogueError> {
        let weights: Vec<(V, f64)> = weights.into_iter().collect();
        let total: f64 = weights.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > TOLERANCE {
            return Err(DialogueError::InvalidDistribution);
        }
        Self::from_weights(weights)
    }

    pub fn prob(&self, v: &V) -> f64 {
        self.entries.iter().find(|(u, _)| u == v).map_or(0.0, |e| e.1)
    }

    /// Most probable value; the earliest inserted wins ties.
    pub fn argmax(&self) -> &V {
        let mut best = &self.entries[0];
        for e in &self.entries[1..] {
            if e.1 > best.1 + TOLERANCE {
                best = e;
            }
        }
        &best.0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&V, f64)> {
        self.entries.iter().map(|(v, p)| (v, *p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn is_point(&self) -> bool {
        self.entries.len() == 1
    }

    /// Entries sorted by probability, highest first; ties keep insertion
    /// order.
    pub fn sorted(&self) -> Vec<(&V, f64)> {
        let mut v: Vec<(&V, f64)> = self.iter().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }

    pub fn map<U: PartialEq + Clone>(&self, f: impl Fn(&V) -> U) -> Distribution<U> {
        Distribution::from_weights(self.iter().map(|(v, p)| (f(v), p))).expect("mass is preserved")
    }

    /// Mixture `Σ wᵢ·Dᵢ`, weights normalised.
    pub fn mixture(parts: impl IntoIterator<Item = (f64, Distribution<V>)>) -> Result<Self, DialogueError> {
        let mut weights = Vec::new();
        for (w, d) in parts {
            for (v, p) in d.entries {
                weights.push((v, w * p));
            }
        }
        Self::from_weights(weights)
    }
}

/// Recency prior over QUD indices: `P(i) ∝ e^(i − size)` for `1..=size`, or
/// certainty on 0 when the QUD is empty.
pub fn max_qud_prior(size: usize) -> Distribution<usize> {
    if size == 0 {
        return Distribution::point(0);
    }
    Distribution::from_weights((1..=size).map(|i| (i, (i as f64 - size as f64).exp())))
        .expect("positive weights")
}
