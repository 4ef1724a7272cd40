use std::collections::HashMap;

use super::{cross_validate, Dataset, LearnError, Result, TreeParams};

/// How `maximize` forms a candidate from the current value and step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// `x + δ`
    #[default]
    Additive,
    /// `δ × x`, the literal pseudocode update.
    Multiplicative,
}

impl StepRule {
    fn candidate(self, x: f64, delta: f64) -> f64 {
        match self {
            StepRule::Additive => x + delta,
            StepRule::Multiplicative => delta * x,
        }
    }
}

/// Line search along coordinate `k`: try a step, keep it if `f` improves,
/// otherwise reverse direction; the step decays by `alpha` every iteration
/// until it drops below `min_step`.
pub fn maximize<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    k: usize,
    x: &[f64],
    mut delta: f64,
    min_step: f64,
    alpha: f64,
    rule: StepRule,
) -> f64 {
    let mut x = x.to_vec();
    let mut y_max = f(&x);
    while delta.abs() >= min_step {
        let mut cand = x.clone();
        cand[k] = rule.candidate(cand[k], delta);
        let y = f(&cand);
        if y > y_max {
            y_max = y;
            x[k] = cand[k];
        } else {
            delta = -delta;
        }
        delta *= alpha;
    }
    x[k]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ascent {
    pub x: Vec<f64>,
    pub value: f64,
    pub sweeps: usize,
    /// Point and value after each sweep.
    pub trajectory: Vec<(Vec<f64>, f64)>,
}

const MAX_SWEEPS: usize = 10_000;

/// Cyclic coordinate ascent; stops when a full sweep changes nothing.
pub fn coordinate_ascent<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    deltas: &[f64],
    mins: &[f64],
    alpha: f64,
    rule: StepRule,
) -> Result<Ascent> {
    let n = x0.len();
    if deltas.len() != n || mins.len() != n {
        return Err(LearnError::InvalidParameter(
            "x0, deltas and mins must have equal length".into(),
        ));
    }
    if let Some(k) = x0.iter().position(|v| *v == 0.0) {
        return Err(LearnError::ZeroInitialComponent(k));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LearnError::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if mins.iter().any(|m| !(*m > 0.0)) {
        return Err(LearnError::InvalidParameter("minimum steps must be positive".into()));
    }
    let mut x = x0.to_vec();
    let mut trajectory = Vec::new();
    let mut sweeps = 0;
    loop {
        let last = x.clone();
        for k in 0..n {
            x[k] = maximize(&mut f, k, &x, deltas[k], mins[k], alpha, rule);
        }
        sweeps += 1;
        trajectory.push((x.clone(), f(&x)));
        if x == last || sweeps >= MAX_SWEEPS {
            break;
        }
    }
    let value = f(&x);
    Ok(Ascent {
        x,
        value,
        sweeps,
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub params: TreeParams,
    pub accuracy: f64,
    pub trajectory: Vec<(TreeParams, f64)>,
}

fn to_params(x: &[f64]) -> TreeParams {
    TreeParams {
        confidence: Some(x[0].clamp(0.001, 0.5)),
        min_leaf: x[1].round().max(1.0) as usize,
    }
}

/// Tunes (C, M) for k-fold accuracy, starting from `start`.
pub fn tune_tree(d: &Dataset, k: usize, seed: u64, start: TreeParams) -> Result<TuneResult> {
    let mut cache: HashMap<(u64, usize), f64> = HashMap::new();
    let mut failure: Option<LearnError> = None;
    let objective = |x: &[f64]| -> f64 {
        let p = to_params(x);
        let key = (p.confidence.unwrap_or(0.0).to_bits(), p.min_leaf);
        if let Some(v) = cache.get(&key) {
            return *v;
        }
        let acc = match cross_validate(d, k, p, seed) {
            Ok(cv) => cv.pooled.accuracy,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        };
        cache.insert(key, acc);
        acc
    };
    let x0 = [start.confidence.unwrap_or(0.25), start.min_leaf as f64];
    let ascent = coordinate_ascent(objective, &x0, &[0.1, 2.0], &[0.01, 0.5], 0.5, StepRule::Additive)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(TuneResult {
        params: to_params(&ascent.x),
        accuracy: ascent.value,
        trajectory: ascent
            .trajectory
            .iter()
            .map(|(x, v)| (to_params(x), *v))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_optimum() {
        let f = |x: &[f64]| -(x[0] - 3.0).powi(2);
        let r = coordinate_ascent(f, &[1.0], &[2.0], &[1e-4], 0.5, StepRule::Additive).unwrap();
        assert!((r.x[0] - 3.0).abs() <= 0.01);
    }

    #[test]
    fn constant_function_keeps_start() {
        let r = coordinate_ascent(|_: &[f64]| 1.0, &[1.0, 2.0], &[1.0, 1.0], &[0.1, 0.1], 0.5, StepRule::Additive)
            .unwrap();
        assert_eq!(r.x, vec![1.0, 2.0]);
        assert_eq!(r.sweeps, 1);
    }

    #[test]
    fn zero_start_rejected() {
        let r = coordinate_ascent(|_: &[f64]| 0.0, &[0.0], &[1.0], &[0.1], 0.5, StepRule::Additive);
        assert!(matches!(r, Err(LearnError::ZeroInitialComponent(0))));
    }

    #[test]
    fn multiplicative_rule_is_literal() {
        // from 1 the first candidate is 2 × 1 = 2, after which every scaled
        // candidate is worse
        let f = |x: &[f64]| -(x[0] - 3.0).powi(2);
        let r = coordinate_ascent(f, &[1.0], &[2.0], &[1e-4], 0.5, StepRule::Multiplicative).unwrap();
        assert_eq!(r.x, vec![2.0]);
    }
}
