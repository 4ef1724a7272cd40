//! Pool-based active learning with entropy sampling, and self-training.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::NsuClass;
use crate::features::FeatureValue;
use crate::learn::{evaluate, ClassDist, Dataset, DecisionTree, LearnError, TreeParams};

#[derive(Debug, Error)]
pub enum ActiveError {
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("unknown task {0}")]
    UnknownTask(usize),
    #[error("task {0} is not pending")]
    NotPending(usize),
}

pub type Result<T> = std::result::Result<T, ActiveError>;

/// An unlabelled instance with its source location. `label` holds the gold
/// class when known (used by automatic oracles only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolInstance {
    pub values: Vec<FeatureValue>,
    pub file_id: String,
    pub sentence_id: u32,
    pub label: Option<NsuClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub labeled_count: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Pool indices with their prediction entropy, highest first. Equal
/// entropies keep pool order.
pub fn entropy_sampling(
    model: &DecisionTree,
    pool: &[PoolInstance],
    k: usize,
) -> std::result::Result<Vec<(usize, f64)>, LearnError> {
    let mut scored = pool
        .iter()
        .enumerate()
        .map(|(i, p)| Ok((i, model.predict(&p.values)?.entropy())))
        .collect::<std::result::Result<Vec<_>, LearnError>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored.truncate(k);
    Ok(scored)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Label(NsuClass),
    Skip,
    Abort,
}

/// Supplies labels for queried instances.
pub trait Oracle {
    fn answer(&mut self, instance: &PoolInstance, predicted: &ClassDist) -> Answer;
}

/// Answers with the gold label carried by the instance, skipping unlabelled
/// ones.
#[derive(Debug, Default, Clone, Copy)]
pub struct GoldOracle;

impl Oracle for GoldOracle {
    fn answer(&mut self, instance: &PoolInstance, _: &ClassDist) -> Answer {
        instance.label.map_or(Answer::Skip, Answer::Label)
    }
}

impl<F: FnMut(&PoolInstance, &ClassDist) -> Answer> Oracle for F {
    fn answer(&mut self, instance: &PoolInstance, predicted: &ClassDist) -> Answer {
        self(instance, predicted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskStatus {
    Unqueried,
    Pending,
    Labeled(NsuClass),
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    /// Pool index.
    pub id: usize,
    pub entropy: f64,
    pub predicted: ClassDist,
}

/// Incremental active-learning state: query, label, retrain.
#[derive(Debug, Clone)]
pub struct ActiveSession {
    pub train: Dataset,
    pub dev: Dataset,
    pub pool: Vec<PoolInstance>,
    pub status: Vec<TaskStatus>,
    params: TreeParams,
    model: DecisionTree,
    curve: Vec<CurvePoint>,
    labeled_in_batch: usize,
}

impl ActiveSession {
    pub fn new(train: Dataset, dev: Dataset, pool: Vec<PoolInstance>, params: TreeParams) -> Result<Self> {
        let model = DecisionTree::train(&train, params)?;
        let status = vec![TaskStatus::Unqueried; pool.len()];
        let mut s = ActiveSession {
            train,
            dev,
            pool,
            status,
            params,
            model,
            curve: Vec::new(),
            labeled_in_batch: 0,
        };
        s.record()?;
        Ok(s)
    }

    fn record(&mut self) -> Result<()> {
        let r = evaluate(&self.model, &self.dev)?;
        self.curve.push(CurvePoint {
            labeled_count: self.train.len(),
            accuracy: r.accuracy,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
        });
        Ok(())
    }

    pub fn model(&self) -> &DecisionTree {
        &self.model
    }

    pub fn curve(&self) -> &[CurvePoint] {
        &self.curve
    }

    pub fn pending(&self) -> Vec<usize> {
        (0..self.pool.len())
            .filter(|&i| self.status[i] == TaskStatus::Pending)
            .collect()
    }

    /// Instances never labelled (skipped ones included).
    pub fn unlabeled(&self) -> usize {
        self.status
            .iter()
            .filter(|s| !matches!(s, TaskStatus::Labeled(_)))
            .count()
    }

    pub fn labeled(&self) -> usize {
        self.status
            .iter()
            .filter(|s| matches!(s, TaskStatus::Labeled(_)))
            .count()
    }

    pub fn task(&self, id: usize) -> Result<Task> {
        let inst = self.pool.get(id).ok_or(ActiveError::UnknownTask(id))?;
        let predicted = self.model.predict(&inst.values)?;
        Ok(Task {
            id,
            entropy: predicted.entropy(),
            predicted,
        })
    }

    /// Returns the pending batch, or samples a new one of up to `k` tasks
    /// among instances never queried.
    pub fn next_batch(&mut self, k: usize) -> Result<Vec<Task>> {
        let pending = self.pending();
        if !pending.is_empty() {
            return pending.into_iter().map(|i| self.task(i)).collect();
        }
        let candidates: Vec<usize> = (0..self.pool.len())
            .filter(|&i| self.status[i] == TaskStatus::Unqueried)
            .collect();
        let sub: Vec<PoolInstance> = candidates.iter().map(|&i| self.pool[i].clone()).collect();
        let picked = entropy_sampling(&self.model, &sub, k)?;
        let mut tasks = Vec::with_capacity(picked.len());
        for (j, _) in picked {
            let id = candidates[j];
            self.status[id] = TaskStatus::Pending;
            tasks.push(self.task(id)?);
        }
        Ok(tasks)
    }

    fn resolve(&mut self, id: usize, status: TaskStatus) -> Result<()> {
        match self.status.get(id) {
            None => return Err(ActiveError::UnknownTask(id)),
            Some(TaskStatus::Pending) => {}
            Some(_) => return Err(ActiveError::NotPending(id)),
        }
        self.status[id] = status;
        if let TaskStatus::Labeled(c) = status {
            self.train.push(self.pool[id].values.clone(), c)?;
            self.labeled_in_batch += 1;
        }
        if self.pending().is_empty() && self.labeled_in_batch > 0 {
            self.model = DecisionTree::train(&self.train, self.params)?;
            self.labeled_in_batch = 0;
            self.record()?;
        }
        Ok(())
    }

    pub fn label(&mut self, id: usize, class: NsuClass) -> Result<()> {
        self.resolve(id, TaskStatus::Labeled(class))
    }

    pub fn skip(&mut self, id: usize) -> Result<()> {
        self.resolve(id, TaskStatus::Skipped)
    }
}

#[derive(Debug, Clone)]
pub struct AlOutcome {
    pub train: Dataset,
    pub curve: Vec<CurvePoint>,
    /// Pool indices in query order.
    pub queried: Vec<usize>,
    pub aborted: bool,
}

/// Queries up to `budget` labels in batches of `batch`, retraining after each
/// batch. One curve point is recorded up front and one per labelled batch.
pub fn al_loop(
    train: Dataset,
    dev: Dataset,
    pool: Vec<PoolInstance>,
    oracle: &mut dyn Oracle,
    budget: usize,
    batch: usize,
    params: TreeParams,
) -> Result<AlOutcome> {
    let batch = batch.max(1);
    let mut s = ActiveSession::new(train, dev, pool, params)?;
    let mut queried = Vec::new();
    let mut aborted = false;
    'outer: while s.labeled() < budget {
        let want = batch.min(budget - s.labeled());
        let tasks = s.next_batch(want)?;
        if tasks.is_empty() {
            break;
        }
        for t in tasks {
            queried.push(t.id);
            match oracle.answer(&s.pool[t.id], &t.predicted) {
                Answer::Label(c) => s.label(t.id, c)?,
                Answer::Skip => s.skip(t.id)?,
                Answer::Abort => {
                    aborted = true;
                    break 'outer;
                }
            }
        }
    }
    Ok(AlOutcome {
        curve: s.curve.clone(),
        train: s.train,
        queried,
        aborted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfTrainStrategy {
    /// Admit the `k` predictions with the highest class probability.
    MostConfident(usize),
    /// Admit `k` random instances.
    Random(usize, u64),
    /// Admit everything in the first round; later rounds relabel the
    /// admitted rows with the retrained model.
    AllThenCorrect,
}

/// Self-training over `rounds` rounds; admitted rows carry predicted labels.
pub fn self_train(
    train: &Dataset,
    pool: &[PoolInstance],
    strategy: SelfTrainStrategy,
    rounds: usize,
    params: TreeParams,
) -> std::result::Result<Dataset, LearnError> {
    let base = train.len();
    let mut data = train.clone();
    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    let mut admitted: Vec<usize> = Vec::new();
    let mut rng = match strategy {
        SelfTrainStrategy::Random(_, seed) => ChaCha8Rng::seed_from_u64(seed),
        _ => ChaCha8Rng::seed_from_u64(0),
    };
    for round in 0..rounds {
        if pool.is_empty() {
            break;
        }
        let model = DecisionTree::train(&data, params)?;
        match strategy {
            SelfTrainStrategy::MostConfident(k) => {
                let mut scored = remaining
                    .iter()
                    .map(|&i| Ok((i, model.predict(&pool[i].values)?)))
                    .collect::<std::result::Result<Vec<_>, LearnError>>()?;
                scored.sort_by(|a, b| b.1.max_prob().total_cmp(&a.1.max_prob()));
                for (i, dist) in scored.into_iter().take(k) {
                    data.push(pool[i].values.clone(), dist.argmax())?;
                    remaining.retain(|&r| r != i);
                }
            }
            SelfTrainStrategy::Random(k, _) => {
                remaining.shuffle(&mut rng);
                let take: Vec<usize> = remaining.drain(..k.min(remaining.len())).collect();
                for i in take {
                    let c = model.predict(&pool[i].values)?.argmax();
                    data.push(pool[i].values.clone(), c)?;
                }
                remaining.sort_unstable();
            }
            SelfTrainStrategy::AllThenCorrect => {
                if round == 0 {
                    for &i in &remaining {
                        let c = model.predict(&pool[i].values)?.argmax();
                        data.push(pool[i].values.clone(), c)?;
                        admitted.push(i);
                    }
                    remaining.clear();
                } else {
                    for (j, &i) in admitted.iter().enumerate() {
                        data.rows[base + j].label = model.predict(&pool[i].values)?.argmax();
                    }
                }
            }
        }
    }
    Ok(data)
}

/// Stratified seeded split into train, dev and test index sets.
pub fn split_indices(labels: &[NsuClass], ratios: (f64, f64, f64), seed: u64) -> [Vec<usize>; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: [Vec<usize>; 3] = Default::default();
    let total = ratios.0 + ratios.1 + ratios.2;
    for class in NsuClass::ALL {
        let mut group: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        group.shuffle(&mut rng);
        let n = group.len() as f64;
        let n_train = (n * ratios.0 / total).round() as usize;
        let n_dev = ((n * ratios.1 / total).round() as usize).min(group.len() - n_train);
        out[0].extend(&group[..n_train]);
        out[1].extend(&group[n_train..n_train + n_dev]);
        out[2].extend(&group[n_train + n_dev..]);
    }
    for part in &mut out {
        part.sort_unstable();
    }
    out
}

/// Train, dev and gold-labelled pool built from one labelled dataset.
/// `sources` gives the (file id, sentence id) of every row.
pub fn holdout(
    d: &Dataset,
    sources: &[(String, u32)],
    ratios: (f64, f64, f64),
    seed: u64,
) -> (Dataset, Dataset, Vec<PoolInstance>) {
    let labels: Vec<NsuClass> = d.rows.iter().map(|r| r.label).collect();
    let [train, dev, pool] = split_indices(&labels, ratios, seed);
    let pool = pool
        .into_iter()
        .map(|i| PoolInstance {
            values: d.rows[i].values.clone(),
            file_id: sources[i].0.clone(),
            sentence_id: sources[i].1,
            label: Some(d.rows[i].label),
        })
        .collect();
    (d.subset(&train), d.subset(&dev), pool)
}

pub fn write_curve(curve: &[CurvePoint], sink: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut go = || -> csv::Result<()> {
        w.write_record(["labeled_count", "accuracy", "precision", "recall", "f1"])?;
        for p in curve {
            w.write_record([
                p.labeled_count.to_string(),
                format!("{:.6}", p.accuracy),
                format!("{:.6}", p.precision),
                format!("{:.6}", p.recall),
                format!("{:.6}", p.f1),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    go().map_err(std::io::Error::other)
}
