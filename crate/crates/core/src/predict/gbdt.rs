//! Squared-error gradient boosted regression trees.
//!
//! Categorical columns are turned into numbers with ordered target
//! statistics: training rows are visited in a seeded random permutation and
//! each row's category is encoded from the labels of the rows visited before
//! it, so a row never sees its own label. Inference uses statistics over the
//! whole training set. Trees are grown level by level with an exact split
//! search over presorted columns.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GbdtError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("model dump line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

impl ColumnKind {
    fn code(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "num",
            ColumnKind::Categorical => "cat",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Num(f64),
    Cat(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
        }
    }
}

/// Stable fingerprint of a feature schema.
pub fn schema_hash(columns: &[Column]) -> String {
    let mut h = Sha256::new();
    for c in columns {
        h.update(c.name.as_bytes());
        h.update(b":");
        h.update(c.kind.code().as_bytes());
        h.update(b"\n");
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l2_reg: f64,
    pub min_samples_leaf: usize,
    /// Pseudo-count of the label mean mixed into every category statistic.
    pub ts_prior_weight: f64,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            n_trees: 500,
            max_depth: 7,
            learning_rate: 0.05,
            l2_reg: 1.0,
            min_samples_leaf: 1,
            ts_prior_weight: 1.0,
            seed: 42,
        }
    }
}

/// Inference-time encoding of one categorical column.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetStatistics {
    pub prior: f64,
    pub levels: BTreeMap<String, f64>,
}

impl TargetStatistics {
    pub fn encode(&self, category: &str) -> f64 {
        self.levels.get(category).copied().unwrap_or(self.prior)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn output(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub columns: Vec<Column>,
    pub params: GbdtParams,
    pub base_score: f64,
    pub cat_stats: Vec<Option<TargetStatistics>>,
    pub trees: Vec<Tree>,
}

/// Result of a boosting run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: GbdtModel,
    /// Training RMSE before the first tree and after each tree, measured on
    /// the encoded matrix the trees were fitted on.
    pub train_rmse: Vec<f64>,
}

fn rmse_of(residuals: &[f64]) -> f64 {
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    (sse / residuals.len() as f64).sqrt()
}

fn check_row(columns: &[Column], row: &[FeatureValue]) -> Result<(), GbdtError> {
    if row.len() != columns.len() {
        return Err(GbdtError::SchemaMismatch(format!(
            "expected {} features, got {}",
            columns.len(),
            row.len()
        )));
    }
    for (c, v) in columns.iter().zip(row) {
        match (c.kind, v) {
            (ColumnKind::Numeric, FeatureValue::Num(x)) => {
                if !x.is_finite() {
                    return Err(GbdtError::NonFinite(c.name.clone()));
                }
            }
            (ColumnKind::Categorical, FeatureValue::Cat(_)) => {}
            _ => {
                return Err(GbdtError::SchemaMismatch(format!(
                    "feature `{}` should be {}",
                    c.name,
                    c.kind.code()
                )))
            }
        }
    }
    Ok(())
}

impl GbdtModel {
    /// A model that predicts `base_score` everywhere.
    pub fn constant(columns: Vec<Column>, params: GbdtParams, base_score: f64) -> Self {
        let cat_stats = columns
            .iter()
            .map(|c| {
                (c.kind == ColumnKind::Categorical).then(|| TargetStatistics {
                    prior: base_score,
                    levels: BTreeMap::new(),
                })
            })
            .collect();
        Self {
            columns,
            params,
            base_score,
            cat_stats,
            trees: Vec::new(),
        }
    }

    pub fn fit(
        columns: &[Column],
        rows: &[Vec<FeatureValue>],
        labels: &[f64],
        params: &GbdtParams,
    ) -> Result<FitReport, GbdtError> {
        if rows.is_empty() {
            return Err(GbdtError::EmptyTrainingSet);
        }
        if rows.len() != labels.len() {
            return Err(GbdtError::LengthMismatch {
                rows: rows.len(),
                labels: labels.len(),
            });
        }
        for row in rows {
            check_row(columns, row)?;
        }
        if labels.iter().any(|y| !y.is_finite()) {
            return Err(GbdtError::NonFinite("labels".to_string()));
        }
        let n = rows.len();
        if labels.iter().all(|y| *y == labels[0]) {
            let model = Self::constant(columns.to_vec(), params.clone(), labels[0]);
            return Ok(FitReport {
                model,
                train_rmse: vec![0.0],
            });
        }
        let base_score = labels.iter().sum::<f64>() / n as f64;

        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);

        let mut matrix: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
        let mut cat_stats = Vec::with_capacity(columns.len());
        for (f, c) in columns.iter().enumerate() {
            match c.kind {
                ColumnKind::Numeric => {
                    matrix.push(
                        rows.iter()
                            .map(|r| match &r[f] {
                                FeatureValue::Num(x) => *x,
                                FeatureValue::Cat(_) => unreachable!("checked"),
                            })
                            .collect(),
                    );
                    cat_stats.push(None);
                }
                ColumnKind::Categorical => {
                    let cats: Vec<&str> = rows
                        .iter()
                        .map(|r| match &r[f] {
                            FeatureValue::Cat(s) => s.as_str(),
                            FeatureValue::Num(_) => unreachable!("checked"),
                        })
                        .collect();
                    let (encoded, stats) =
                        ordered_target_statistics(&cats, labels, &order, base_score, params.ts_prior_weight);
                    matrix.push(encoded);
                    cat_stats.push(Some(stats));
                }
            }
        }

        let sorted: Vec<Vec<usize>> = matrix
            .iter()
            .map(|col| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
                idx
            })
            .collect();

        let mut residuals: Vec<f64> = labels.iter().map(|y| y - base_score).collect();
        let mut train_rmse = Vec::with_capacity(params.n_trees + 1);
        train_rmse.push(rmse_of(&residuals));
        let mut trees = Vec::with_capacity(params.n_trees);
        for _ in 0..params.n_trees {
            let (tree, leaf_of) = grow_tree(&matrix, &sorted, &residuals, params);
            for (i, r) in residuals.iter_mut().enumerate() {
                if let Node::Leaf { value } = tree.nodes[leaf_of[i]] {
                    *r -= params.learning_rate * value;
                }
            }
            train_rmse.push(rmse_of(&residuals));
            trees.push(tree);
        }

        Ok(FitReport {
            model: GbdtModel {
                columns: columns.to_vec(),
                params: params.clone(),
                base_score,
                cat_stats,
                trees,
            },
            train_rmse,
        })
    }

    pub fn encode(&self, row: &[FeatureValue]) -> Result<Vec<f64>, GbdtError> {
        check_row(&self.columns, row)?;
        Ok(row
            .iter()
            .zip(&self.cat_stats)
            .map(|(v, stats)| match (v, stats) {
                (FeatureValue::Num(x), _) => *x,
                (FeatureValue::Cat(s), Some(st)) => st.encode(s),
                (FeatureValue::Cat(_), None) => unreachable!("checked"),
            })
            .collect())
    }

    pub fn predict(&self, row: &[FeatureValue]) -> Result<f64, GbdtError> {
        let x = self.encode(row)?;
        Ok(self.predict_encoded(&x))
    }

    pub fn predict_encoded(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.output(x)).sum();
        self.base_score + self.params.learning_rate * sum
    }

    /// Total split gain per feature, normalized to sum to one and sorted
    /// in descending order (ties by column order).
    pub fn feature_importance(&self) -> Vec<(String, f64)> {
        let mut gain = vec![0.0; self.columns.len()];
        for t in &self.trees {
            for node in &t.nodes {
                if let Node::Split { feature, gain: g, .. } = node {
                    gain[*feature] += g;
                }
            }
        }
        let total: f64 = gain.iter().sum();
        let mut out: Vec<(usize, f64)> = gain
            .into_iter()
            .map(|g| if total > 0.0 { g / total } else { 0.0 })
            .enumerate()
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out.into_iter()
            .map(|(i, s)| (self.columns[i].name.clone(), s))
            .collect()
    }

    pub fn schema_hash(&self) -> String {
        schema_hash(&self.columns)
    }

    /// Line-oriented text dump; [`GbdtModel::load`] restores it exactly.
    pub fn dump(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "gbdt 1");
        let _ = writeln!(s, "n_trees {}", p.n_trees);
        let _ = writeln!(s, "max_depth {}", p.max_depth);
        let _ = writeln!(s, "learning_rate {}", p.learning_rate);
        let _ = writeln!(s, "l2_reg {}", p.l2_reg);
        let _ = writeln!(s, "min_samples_leaf {}", p.min_samples_leaf);
        let _ = writeln!(s, "ts_prior_weight {}", p.ts_prior_weight);
        let _ = writeln!(s, "base_score {}", self.base_score);
        let _ = writeln!(s, "seed {}", p.seed);
        let _ = writeln!(s, "schema {}", self.schema_hash());
        let _ = writeln!(s, "features {}", self.columns.len());
        for (i, c) in self.columns.iter().enumerate() {
            let _ = writeln!(s, "feature {i} {} {}", c.kind.code(), c.name);
        }
        for (i, st) in self.cat_stats.iter().enumerate() {
            if let Some(st) = st {
                let _ = writeln!(s, "cat {i} {} {}", st.prior, st.levels.len());
                for (level, v) in &st.levels {
                    let _ = writeln!(s, "level {v} {level}");
                }
            }
        }
        let _ = writeln!(s, "trees {}", self.trees.len());
        for (t, tree) in self.trees.iter().enumerate() {
            let _ = writeln!(s, "tree {t} {}", tree.nodes.len());
            // node_id feature threshold left right leaf_value gain
            for (i, node) in tree.nodes.iter().enumerate() {
                match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                        gain,
                    } => {
                        let _ = writeln!(s, "node {i} {feature} {threshold} {left} {right} - {gain}");
                    }
                    Node::Leaf { value } => {
                        let _ = writeln!(s, "node {i} - - - - {value} -");
                    }
                }
            }
        }
        let _ = writeln!(s, "end");
        s
    }

    pub fn load(text: &str) -> Result<Self, GbdtError> {
        let mut lines = DumpLines::new(text);
        lines.expect_key("gbdt")?.expect_value("1")?;
        let n_trees = lines.keyed("n_trees")?;
        let max_depth = lines.keyed("max_depth")?;
        let learning_rate = lines.keyed("learning_rate")?;
        let l2_reg = lines.keyed("l2_reg")?;
        let min_samples_leaf = lines.keyed("min_samples_leaf")?;
        let ts_prior_weight = lines.keyed("ts_prior_weight")?;
        let base_score = lines.keyed("base_score")?;
        let seed = lines.keyed("seed")?;
        let schema: String = lines.keyed("schema")?;
        let n_features: usize = lines.keyed("features")?;
        let mut columns = Vec::with_capacity(n_features);
        for i in 0..n_features {
            let (line_no, rest) = lines.next_with("feature")?;
            let mut parts = rest.splitn(3, ' ');
            let idx: usize = parse_field(parts.next(), line_no, "feature index")?;
            if idx != i {
                return Err(GbdtError::Parse {
                    line: line_no,
                    message: format!("expected feature {i}"),
                });
            }
            let kind = match parts.next() {
                Some("num") => ColumnKind::Numeric,
                Some("cat") => ColumnKind::Categorical,
                other => {
                    return Err(GbdtError::Parse {
                        line: line_no,
                        message: format!("bad feature kind {other:?}"),
                    })
                }
            };
            let name = parts.next().unwrap_or_default().to_string();
            columns.push(Column { name, kind });
        }
        if schema_hash(&columns) != schema {
            return Err(GbdtError::SchemaMismatch(
                "schema hash does not match the listed features".to_string(),
            ));
        }
        let mut cat_stats: Vec<Option<TargetStatistics>> = columns.iter().map(|_| None).collect();
        loop {
            let (line_no, key, rest) = lines.peek_key()?;
            if key != "cat" {
                break;
            }
            lines.advance();
            let mut parts = rest.split(' ');
            let idx: usize = parse_field(parts.next(), line_no, "cat index")?;
            let prior: f64 = parse_field(parts.next(), line_no, "cat prior")?;
            let count: usize = parse_field(parts.next(), line_no, "cat level count")?;
            if columns.get(idx).map(|c| c.kind) != Some(ColumnKind::Categorical) {
                return Err(GbdtError::Parse {
                    line: line_no,
                    message: format!("feature {idx} is not categorical"),
                });
            }
            let mut levels = BTreeMap::new();
            for _ in 0..count {
                let (ln, rest) = lines.next_with("level")?;
                let (v, name) = rest.split_once(' ').unwrap_or((rest, ""));
                levels.insert(name.to_string(), parse_field(Some(v), ln, "level value")?);
            }
            cat_stats[idx] = Some(TargetStatistics { prior, levels });
        }
        for (i, c) in columns.iter().enumerate() {
            if c.kind == ColumnKind::Categorical && cat_stats[i].is_none() {
                cat_stats[i] = Some(TargetStatistics {
                    prior: base_score,
                    levels: BTreeMap::new(),
                });
            }
        }
        let tree_count: usize = lines.keyed("trees")?;
        let mut trees = Vec::with_capacity(tree_count);
        for t in 0..tree_count {
            let (line_no, rest) = lines.next_with("tree")?;
            let mut parts = rest.split(' ');
            let idx: usize = parse_field(parts.next(), line_no, "tree index")?;
            let n_nodes: usize = parse_field(parts.next(), line_no, "node count")?;
            if idx != t {
                return Err(GbdtError::Parse {
                    line: line_no,
                    message: format!("expected tree {t}"),
                });
            }
            let mut nodes = Vec::with_capacity(n_nodes);
            for i in 0..n_nodes {
                let (ln, rest) = lines.next_with("node")?;
                let f: Vec<&str> = rest.split(' ').collect();
                if f.len() != 7 || f[0] != i.to_string() {
                    return Err(GbdtError::Parse {
                        line: ln,
                        message: "malformed node".to_string(),
                    });
                }
                let node = if f[1] == "-" {
                    Node::Leaf {
                        value: parse_field(Some(f[5]), ln, "leaf value")?,
                    }
                } else {
                    let node = Node::Split {
                        feature: parse_field(Some(f[1]), ln, "feature")?,
                        threshold: parse_field(Some(f[2]), ln, "threshold")?,
                        left: parse_field(Some(f[3]), ln, "left")?,
                        right: parse_field(Some(f[4]), ln, "right")?,
                        gain: parse_field(Some(f[6]), ln, "gain")?,
                    };
                    if let Node::Split {
                        feature, left, right, ..
                    } = node
                    {
                        if feature >= columns.len() || left >= n_nodes || right >= n_nodes {
                            return Err(GbdtError::Parse {
                                line: ln,
                                message: "node reference out of range".to_string(),
                            });
                        }
                    }
                    node
                };
                nodes.push(node);
            }
            trees.push(Tree { nodes });
        }
        lines.expect_key("end")?;
        Ok(GbdtModel {
            columns,
            params: GbdtParams {
                n_trees,
                max_depth,
                learning_rate,
                l2_reg,
                min_samples_leaf,
                ts_prior_weight,
                seed,
            },
            base_score,
            cat_stats,
            trees,
        })
    }
}

fn parse_field<T: std::str::FromStr>(s: Option<&str>, line: usize, what: &str) -> Result<T, GbdtError> {
    s.and_then(|v| v.parse().ok()).ok_or_else(|| GbdtError::Parse {
        line,
        message: format!("bad {what}"),
    })
}

struct DumpLines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> DumpLines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text
                .lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l))
                .filter(|(_, l)| !l.trim().is_empty())
                .collect(),
            pos: 0,
        }
    }

    fn peek_key(&self) -> Result<(usize, &'a str, &'a str), GbdtError> {
        let (n, l) = self.lines.get(self.pos).copied().ok_or(GbdtError::Parse {
            line: self.lines.last().map(|l| l.0).unwrap_or(0),
            message: "unexpected end of dump".to_string(),
        })?;
        let (k, rest) = l.split_once(' ').unwrap_or((l, ""));
        Ok((n, k, rest))
    }

    fn advance(&mut self) {
        self.pos += 1;
    }

    fn next_with(&mut self, key: &str) -> Result<(usize, &'a str), GbdtError> {
        let (n, k, rest) = self.peek_key()?;
        if k != key {
            return Err(GbdtError::Parse {
                line: n,
                message: format!("expected `{key}`, found `{k}`"),
            });
        }
        self.advance();
        Ok((n, rest))
    }

    fn expect_key(&mut self, key: &str) -> Result<KeyedValue<'a>, GbdtError> {
        let (n, rest) = self.next_with(key)?;
        Ok(KeyedValue { line: n, rest })
    }

    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, GbdtError> {
        let (n, rest) = self.next_with(key)?;
        parse_field(Some(rest), n, key)
    }
}

struct KeyedValue<'a> {
    line: usize,
    rest: &'a str,
}

impl KeyedValue<'_> {
    fn expect_value(self, want: &str) -> Result<(), GbdtError> {
        if self.rest != want {
            return Err(GbdtError::Parse {
                line: self.line,
                message: format!("expected `{want}`, found `{}`", self.rest),
            });
        }
        Ok(())
    }
}

/// Ordered target statistics for one categorical column. Returns the
/// training encoding (row order) and the full-data statistics for inference.
pub fn ordered_target_statistics(
    cats: &[&str],
    labels: &[f64],
    order: &[usize],
    prior: f64,
    prior_weight: f64,
) -> (Vec<f64>, TargetStatistics) {
    let mut running: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let mut encoded = vec![0.0; cats.len()];
    for &i in order {
        let e = running.entry(cats[i]).or_insert((0.0, 0.0));
        encoded[i] = (e.0 + prior_weight * prior) / (e.1 + prior_weight);
        e.0 += labels[i];
        e.1 += 1.0;
    }
    let levels = running
        .into_iter()
        .map(|(k, (sum, count))| (k.to_string(), (sum + prior_weight * prior) / (count + prior_weight)))
        .collect();
    (encoded, TargetStatistics { prior, levels })
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Grows one tree on the residuals; returns it with the leaf of every row.
fn grow_tree(matrix: &[Vec<f64>], sorted: &[Vec<usize>], residuals: &[f64], params: &GbdtParams) -> (Tree, Vec<usize>) {
    let n = residuals.len();
    let lambda = params.l2_reg;
    let score = |s: f64, c: f64| s * s / (c + lambda);

    let mut nodes: Vec<Node> = vec![Node::Leaf { value: 0.0 }];
    let mut node_of = vec![0usize; n];
    let mut active = vec![0usize];
    // Per-node totals (sum of residuals, count), indexed by node id.
    let mut totals: Vec<(f64, f64)> = vec![residuals.iter().fold((0.0, 0.0), |(s, c), r| (s + r, c + 1.0))];

    for _depth in 0..params.max_depth {
        if active.is_empty() {
            break;
        }
        let mut slot_of_node = vec![usize::MAX; nodes.len()];
        for (k, &node) in active.iter().enumerate() {
            slot_of_node[node] = k;
        }
        let mut best: Vec<Option<Candidate>> = vec![None; active.len()];
        for (f, order) in sorted.iter().enumerate() {
            let col = &matrix[f];
            let mut left: Vec<(f64, f64)> = vec![(0.0, 0.0); active.len()];
            let mut last: Vec<Option<f64>> = vec![None; active.len()];
            for &i in order {
                let k = slot_of_node[node_of[i]];
                if k == usize::MAX {
                    continue;
                }
                let x = col[i];
                if let Some(prev) = last[k] {
                    if x > prev {
                        let (ls, lc) = left[k];
                        let (ts, tc) = totals[active[k]];
                        let (rs, rc) = (ts - ls, tc - lc);
                        let min_leaf = params.min_samples_leaf as f64;
                        if lc >= min_leaf && rc >= min_leaf {
                            let gain = score(ls, lc) + score(rs, rc) - score(ts, tc);
                            if gain > 0.0 && best[k].is_none_or(|b| gain > b.gain) {
                                best[k] = Some(Candidate {
                                    gain,
                                    feature: f,
                                    threshold: prev + (x - prev) / 2.0,
                                });
                            }
                        }
                    }
                }
                left[k].0 += residuals[i];
                left[k].1 += 1.0;
                last[k] = Some(x);
            }
        }

        let mut next_active = Vec::new();
        let mut children: Vec<Option<(usize, usize, Candidate)>> = vec![None; active.len()];
        for (k, &node) in active.iter().enumerate() {
            if let Some(c) = best[k] {
                let l = nodes.len();
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                totals.push((0.0, 0.0));
                totals.push((0.0, 0.0));
                nodes[node] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left: l,
                    right: l + 1,
                    gain: c.gain,
                };
                children[k] = Some((l, l + 1, c));
                next_active.push(l);
                next_active.push(l + 1);
            }
        }
        for i in 0..n {
            let node = node_of[i];
            let k = if node < slot_of_node.len() {
                slot_of_node[node]
            } else {
                usize::MAX
            };
            if k == usize::MAX {
                continue;
            }
            if let Some((l, r, c)) = children[k] {
                let child = if matrix[c.feature][i] <= c.threshold { l } else { r };
                node_of[i] = child;
                totals[child].0 += residuals[i];
                totals[child].1 += 1.0;
            }
        }
        active = next_active;
    }

    for (id, node) in nodes.iter_mut().enumerate() {
        if let Node::Leaf { value } = node {
            let (s, c) = totals[id];
            *value = s / (c + lambda);
        }
    }
    (Tree { nodes }, node_of)
}
