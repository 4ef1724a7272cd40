use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{entropy_counts, entropy_of, Dataset, LearnError, Result};
use crate::corpus::NsuClass;
use crate::features::{FeatureDef, FeatureKind, FeatureValue, Schema};

const EPS: f64 = 1e-12;
const UNKNOWN_KEY: &str = "?";

/// `M` is the minimum number of rows per leaf; `C` the pruning confidence
/// (`None` disables pruning).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub confidence: Option<f64>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf: 2,
            confidence: Some(0.25),
        }
    }
}

impl TreeParams {
    pub fn unpruned(min_leaf: usize) -> Self {
        TreeParams {
            min_leaf,
            confidence: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(LearnError::InvalidParameter("M must be at least 1".into()));
        }
        if let Some(c) = self.confidence {
            if !(c > 0.0 && c <= 1.0) {
                return Err(LearnError::InvalidParameter(format!(
                    "C must lie in (0, 1], got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// Probability of each class, indexed by [`NsuClass::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassDist(pub [f64; NsuClass::COUNT]);

impl ClassDist {
    pub fn from_counts(counts: &[u32; NsuClass::COUNT]) -> Self {
        let n: u32 = counts.iter().sum();
        let mut p = [0.0; NsuClass::COUNT];
        if n > 0 {
            for (pi, &c) in p.iter_mut().zip(counts) {
                *pi = c as f64 / n as f64;
            }
        }
        ClassDist(p)
    }

    pub fn point(c: NsuClass) -> Self {
        let mut p = [0.0; NsuClass::COUNT];
        p[c.index()] = 1.0;
        ClassDist(p)
    }

    pub fn prob(&self, c: NsuClass) -> f64 {
        self.0[c.index()]
    }

    /// Most probable class; the lowest index wins ties.
    pub fn argmax(&self) -> NsuClass {
        let mut best = 0;
        for i in 1..NsuClass::COUNT {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        NsuClass::ALL[best]
    }

    pub fn max_prob(&self) -> f64 {
        self.0[self.argmax().index()]
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.0)
    }

    /// Classes with nonzero probability, in class order.
    pub fn support(&self) -> impl Iterator<Item = (NsuClass, f64)> + '_ {
        NsuClass::ALL
            .iter()
            .zip(self.0.iter())
            .filter(|(_, p)| **p > 0.0)
            .map(|(c, p)| (*c, *p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        counts: [u32; NsuClass::COUNT],
    },
    Categorical {
        feature: usize,
        branches: Vec<(String, Node)>,
        /// Branch taken by unknown and unseen symbols.
        default: usize,
    },
    Numeric {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
        /// Side taken by unknown values.
        default_left: bool,
    },
}

impl Node {
    /// Training counts reaching this node.
    pub fn counts(&self) -> [u32; NsuClass::COUNT] {
        match self {
            Node::Leaf { counts } => *counts,
            Node::Categorical { branches, .. } => {
                let mut c = [0; NsuClass::COUNT];
                for (_, child) in branches {
                    for (a, b) in c.iter_mut().zip(child.counts()) {
                        *a += b;
                    }
                }
                c
            }
            Node::Numeric { left, right, .. } => {
                let mut c = left.counts();
                for (a, b) in c.iter_mut().zip(right.counts()) {
                    *a += b;
                }
                c
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub schema: Schema,
    pub params: TreeParams,
    pub root: Node,
}

fn label_counts(d: &Dataset, idx: &[usize]) -> [usize; NsuClass::COUNT] {
    let mut c = [0; NsuClass::COUNT];
    for &i in idx {
        c[d.rows[i].label.index()] += 1;
    }
    c
}

fn cat_key(v: &FeatureValue) -> String {
    match v {
        FeatureValue::Cat(s) => s.clone(),
        FeatureValue::Num(x) => format!("{x}"),
        FeatureValue::Unknown => UNKNOWN_KEY.to_string(),
    }
}

fn groups(d: &Dataset, idx: &[usize], f: usize) -> BTreeMap<String, Vec<usize>> {
    let mut g: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for &i in idx {
        g.entry(cat_key(&d.rows[i].values[f])).or_default().push(i);
    }
    g
}

fn gain_of_partition(d: &Dataset, idx: &[usize], parts: &[&[usize]]) -> f64 {
    let n = idx.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let h = entropy_counts(&label_counts(d, idx));
    let cond: f64 = parts
        .iter()
        .map(|p| p.len() as f64 / n * entropy_counts(&label_counts(d, p)))
        .sum();
    (h - cond).max(0.0)
}

pub(crate) fn categorical_gain(d: &Dataset, idx: &[usize], f: usize) -> f64 {
    let g = groups(d, idx, f);
    let parts: Vec<&[usize]> = g.values().map(Vec::as_slice).collect();
    gain_of_partition(d, idx, &parts)
}

/// Best midpoint threshold of a numeric feature as (gain, threshold).
/// Unknown values join the larger side; both sides need `min_leaf` rows.
pub(crate) fn best_threshold(
    d: &Dataset,
    idx: &[usize],
    f: usize,
    min_leaf: usize,
) -> Option<(f64, f64)> {
    let mut known: Vec<(f64, usize)> = Vec::new();
    let mut unknown: Vec<usize> = Vec::new();
    for &i in idx {
        match d.rows[i].values[f].as_num() {
            Some(x) => known.push((x, i)),
            None => unknown.push(i),
        }
    }
    known.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, f64)> = None;
    for cut in 1..known.len() {
        let (lo, hi) = (known[cut - 1].0, known[cut].0);
        if lo == hi {
            continue;
        }
        let threshold = lo + (hi - lo) / 2.0;
        let mut left: Vec<usize> = known[..cut].iter().map(|p| p.1).collect();
        let mut right: Vec<usize> = known[cut..].iter().map(|p| p.1).collect();
        if left.len() >= right.len() {
            left.extend(&unknown);
        } else {
            right.extend(&unknown);
        }
        if left.len() < min_leaf || right.len() < min_leaf {
            continue;
        }
        let g = gain_of_partition(d, idx, &[&left, &right]);
        if best.is_none_or(|(bg, _)| g > bg + EPS) {
            best = Some((g, threshold));
        }
    }
    best
}

enum Split {
    Cat(usize),
    Num(usize, f64),
}

fn leaf(counts: &[usize; NsuClass::COUNT]) -> Node {
    let mut c = [0u32; NsuClass::COUNT];
    for (a, b) in c.iter_mut().zip(counts) {
        *a = *b as u32;
    }
    Node::Leaf { counts: c }
}

fn build(d: &Dataset, idx: &[usize], m: usize) -> Node {
    let counts = label_counts(d, idx);
    let pure = counts.iter().filter(|c| **c > 0).count() <= 1;
    if pure || idx.len() < 2 * m {
        return leaf(&counts);
    }
    let mut best: Option<(f64, Split)> = None;
    for (f, def) in d.schema.features.iter().enumerate() {
        let candidate = match def.kind {
            FeatureKind::Categorical => {
                let g = groups(d, idx, f);
                let big = g.values().filter(|v| v.len() >= m).count();
                if g.len() < 2 || big < 2 {
                    continue;
                }
                let parts: Vec<&[usize]> = g.values().map(Vec::as_slice).collect();
                (gain_of_partition(d, idx, &parts), Split::Cat(f))
            }
            FeatureKind::Numeric => match best_threshold(d, idx, f, m) {
                Some((g, t)) => (g, Split::Num(f, t)),
                None => continue,
            },
        };
        if best.as_ref().is_none_or(|(bg, _)| candidate.0 > bg + EPS) {
            best = Some(candidate);
        }
    }
    let Some((gain, split)) = best else {
        return leaf(&counts);
    };
    if gain <= EPS {
        return leaf(&counts);
    }
    match split {
        Split::Cat(f) => {
            let g = groups(d, idx, f);
            let mut default = 0;
            let mut largest = 0;
            let mut branches = Vec::with_capacity(g.len());
            for (i, (sym, rows)) in g.into_iter().enumerate() {
                if rows.len() > largest {
                    largest = rows.len();
                    default = i;
                }
                branches.push((sym, build(d, &rows, m)));
            }
            Node::Categorical {
                feature: f,
                branches,
                default,
            }
        }
        Split::Num(f, threshold) => {
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut unknown = Vec::new();
            for &i in idx {
                match d.rows[i].values[f].as_num() {
                    Some(x) if x <= threshold => left.push(i),
                    Some(_) => right.push(i),
                    None => unknown.push(i),
                }
            }
            let default_left = left.len() >= right.len();
            if default_left {
                left.extend(unknown);
            } else {
                right.extend(unknown);
            }
            Node::Numeric {
                feature: f,
                threshold,
                left: Box::new(build(d, &left, m)),
                right: Box::new(build(d, &right, m)),
                default_left,
            }
        }
    }
}

/// Normal-approximation upper bound on the error rate of a leaf.
fn pessimistic_errors(counts: &[u32; NsuClass::COUNT], z: f64) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let e = n - *counts.iter().max().unwrap_or(&0) as f64;
    let f = e / n;
    let z2 = z * z;
    let ub = (f + z2 / (2.0 * n) + z * (f / n - f * f / n + z2 / (4.0 * n * n)).max(0.0).sqrt())
        / (1.0 + z2 / n);
    n * ub
}

/// Bottom-up subtree replacement; returns the estimated errors of the result.
fn prune(node: Node, z: f64) -> (Node, f64) {
    match node {
        Node::Leaf { counts } => {
            let e = pessimistic_errors(&counts, z);
            (Node::Leaf { counts }, e)
        }
        Node::Categorical {
            feature,
            branches,
            default,
        } => {
            let mut subtree = 0.0;
            let branches: Vec<(String, Node)> = branches
                .into_iter()
                .map(|(s, child)| {
                    let (c, e) = prune(child, z);
                    subtree += e;
                    (s, c)
                })
                .collect();
            let node = Node::Categorical {
                feature,
                branches,
                default,
            };
            collapse(node, subtree, z)
        }
        Node::Numeric {
            feature,
            threshold,
            left,
            right,
            default_left,
        } => {
            let (l, el) = prune(*left, z);
            let (r, er) = prune(*right, z);
            let node = Node::Numeric {
                feature,
                threshold,
                left: Box::new(l),
                right: Box::new(r),
                default_left,
            };
            collapse(node, el + er, z)
        }
    }
}

fn collapse(node: Node, subtree: f64, z: f64) -> (Node, f64) {
    let counts = node.counts();
    let as_leaf = pessimistic_errors(&counts, z);
    if as_leaf <= subtree + 1e-9 {
        (Node::Leaf { counts }, as_leaf)
    } else {
        (node, subtree)
    }
}

impl DecisionTree {
    pub fn train(d: &Dataset, params: TreeParams) -> Result<Self> {
        params.validate()?;
        if d.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        let idx: Vec<usize> = (0..d.len()).collect();
        let mut root = build(d, &idx, params.min_leaf);
        if let Some(c) = params.confidence {
            let z = Normal::new(0.0, 1.0)
                .expect("standard normal")
                .inverse_cdf(1.0 - c);
            let z = if z.is_finite() { z.max(0.0) } else { 0.0 };
            root = prune(root, z).0;
        }
        Ok(DecisionTree {
            schema: d.schema.clone(),
            params,
            root,
        })
    }

    pub fn predict(&self, values: &[FeatureValue]) -> Result<ClassDist> {
        if values.len() != self.schema.len() {
            return Err(LearnError::SchemaMismatch {
                schema: self.schema.name.clone(),
                expected: self.schema.len(),
                got: values.len(),
            });
        }
        let mut node = &self.root;
        loop {
            node = match node {
                Node::Leaf { counts } => return Ok(ClassDist::from_counts(counts)),
                Node::Categorical {
                    feature,
                    branches,
                    default,
                } => {
                    let hit = match &values[*feature] {
                        FeatureValue::Cat(s) => branches.iter().find(|(b, _)| b == s),
                        _ => None,
                    };
                    &hit.unwrap_or(&branches[*default]).1
                }
                Node::Numeric {
                    feature,
                    threshold,
                    left,
                    right,
                    default_left,
                } => match values[*feature].as_num() {
                    Some(x) if x <= *threshold => left,
                    Some(_) => right,
                    None if *default_left => left,
                    None => right,
                },
            };
        }
    }

    pub fn depth(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Categorical { branches, .. } => {
                    1 + branches.iter().map(|(_, c)| go(c)).max().unwrap_or(0)
                }
                Node::Numeric { left, right, .. } => 1 + go(left).max(go(right)),
            }
        }
        go(&self.root)
    }

    pub fn leaves(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 1,
                Node::Categorical { branches, .. } => branches.iter().map(|(_, c)| go(c)).sum(),
                Node::Numeric { left, right, .. } => go(left) + go(right),
            }
        }
        go(&self.root)
    }

    /// Serialises the tree in a line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = String::from("nsu-tree 1\n");
        let _ = writeln!(out, "schema {}", self.schema.name);
        for f in &self.schema.features {
            let kind = match f.kind {
                FeatureKind::Categorical => "categorical",
                FeatureKind::Numeric => "numeric",
            };
            let _ = writeln!(out, "feature {} {kind}", f.name);
        }
        let c = match self.params.confidence {
            Some(c) => format!("{c:?}"),
            None => "off".into(),
        };
        let _ = writeln!(out, "params M={} C={c}", self.params.min_leaf);
        self.write_node(&self.root, 0, &mut out);
        out
    }

    fn write_node(&self, node: &Node, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match node {
            Node::Leaf { counts } => {
                out.push_str(&pad);
                out.push_str("leaf");
                for (c, n) in NsuClass::ALL.iter().zip(counts) {
                    if *n > 0 {
                        let _ = write!(out, " {c}:{n}");
                    }
                }
                out.push('\n');
            }
            Node::Categorical {
                feature,
                branches,
                default,
            } => {
                let _ = writeln!(
                    out,
                    "{pad}split-cat {} default={default} branches={}",
                    self.schema.features[*feature].name,
                    branches.len()
                );
                for (sym, child) in branches {
                    let _ = writeln!(out, "{pad}branch {sym}");
                    self.write_node(child, depth + 1, out);
                }
            }
            Node::Numeric {
                feature,
                threshold,
                left,
                right,
                default_left,
            } => {
                let side = if *default_left { "left" } else { "right" };
                let _ = writeln!(
                    out,
                    "{pad}split-num {} {threshold:?} unknown={side}",
                    self.schema.features[*feature].name
                );
                self.write_node(left, depth + 1, out);
                self.write_node(right, depth + 1, out);
            }
        }
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .peekable();
        let err = |line: usize, msg: &str| LearnError::ModelFormat {
            line,
            msg: msg.to_string(),
        };
        match lines.next() {
            Some((_, "nsu-tree 1")) => {}
            Some((n, _)) => return Err(err(n, "expected `nsu-tree 1` header")),
            None => return Err(err(1, "empty model")),
        }
        let (n, l) = lines.next().ok_or_else(|| err(2, "missing schema line"))?;
        let name = l.strip_prefix("schema ").ok_or_else(|| err(n, "expected `schema <name>`"))?;
        let mut features = Vec::new();
        while let Some((n, l)) = lines.peek().copied() {
            let Some(rest) = l.strip_prefix("feature ") else {
                break;
            };
            lines.next();
            let (fname, kind) = rest.split_once(' ').ok_or_else(|| err(n, "bad feature line"))?;
            let kind = match kind {
                "categorical" => FeatureKind::Categorical,
                "numeric" => FeatureKind::Numeric,
                _ => return Err(err(n, "feature kind must be categorical or numeric")),
            };
            features.push(FeatureDef {
                name: fname.to_string(),
                kind,
            });
        }
        let schema = Schema {
            name: name.to_string(),
            features,
        };
        let (n, l) = lines.next().ok_or_else(|| err(0, "missing params line"))?;
        let params = parse_params(l).ok_or_else(|| err(n, "expected `params M=<m> C=<c|off>`"))?;
        let root = parse_node(&schema, &mut lines)?;
        if let Some((n, _)) = lines.next() {
            return Err(err(n, "trailing content after tree"));
        }
        Ok(DecisionTree {
            schema,
            params,
            root,
        })
    }
}

fn parse_params(l: &str) -> Option<TreeParams> {
    let rest = l.strip_prefix("params ")?;
    let mut m = None;
    let mut c = None;
    for part in rest.split_whitespace() {
        if let Some(v) = part.strip_prefix("M=") {
            m = v.parse().ok();
        } else if let Some(v) = part.strip_prefix("C=") {
            c = Some(if v == "off" { None } else { Some(v.parse().ok()?) });
        }
    }
    Some(TreeParams {
        min_leaf: m?,
        confidence: c?,
    })
}

fn parse_node<'a, I>(schema: &Schema, lines: &mut std::iter::Peekable<I>) -> Result<Node>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let (n, l) = lines.next().ok_or(LearnError::ModelFormat {
        line: 0,
        msg: "unexpected end of model".into(),
    })?;
    let err = |msg: String| LearnError::ModelFormat { line: n, msg };
    let feature_index = |name: &str| {
        schema
            .index_of(name)
            .ok_or_else(|| err(format!("unknown feature `{name}`")))
    };
    let mut parts = l.split_whitespace();
    match parts.next() {
        Some("leaf") => {
            let mut counts = [0u32; NsuClass::COUNT];
            for p in parts {
                let (c, k) = p.split_once(':').ok_or_else(|| err(format!("bad count `{p}`")))?;
                let c: NsuClass = c.parse().map_err(|_| err(format!("unknown class `{c}`")))?;
                counts[c.index()] = k.parse().map_err(|_| err(format!("bad count `{p}`")))?;
            }
            Ok(Node::Leaf { counts })
        }
        Some("split-cat") => {
            let feature = feature_index(parts.next().unwrap_or(""))?;
            let default: usize = parts
                .next()
                .and_then(|p| p.strip_prefix("default="))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err("missing default=".into()))?;
            let count: usize = parts
                .next()
                .and_then(|p| p.strip_prefix("branches="))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err("missing branches=".into()))?;
            if count < 2 || default >= count {
                return Err(err("categorical split needs >= 2 branches and a valid default".into()));
            }
            let mut branches = Vec::with_capacity(count);
            for _ in 0..count {
                let (bn, bl) = lines.next().ok_or_else(|| err("missing branch".into()))?;
                let sym = bl.strip_prefix("branch ").ok_or(LearnError::ModelFormat {
                    line: bn,
                    msg: "expected `branch <symbol>`".into(),
                })?;
                branches.push((sym.to_string(), parse_node(schema, lines)?));
            }
            Ok(Node::Categorical {
                feature,
                branches,
                default,
            })
        }
        Some("split-num") => {
            let feature = feature_index(parts.next().unwrap_or(""))?;
            let threshold: f64 = parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err("bad threshold".into()))?;
            let default_left = match parts.next() {
                Some("unknown=left") => true,
                Some("unknown=right") => false,
                _ => return Err(err("expected unknown=left|right".into())),
            };
            let left = parse_node(schema, lines)?;
            let right = parse_node(schema, lines)?;
            Ok(Node::Numeric {
                feature,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
                default_left,
            })
        }
        _ => Err(err(format!("unexpected line `{l}`"))),
    }
}
