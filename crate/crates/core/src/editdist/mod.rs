//! Edit sets, cost functions and edit distances.
//!
//! Sequence edits use 1-based positions: `insert` at position `n` places the
//! new symbol so that it ends up at index `n` (so `n = len + 1` appends),
//! `delete` and `relabel` address an existing symbol. Tree edits address
//! nodes by root-relative paths of 1-based child indices (`[]` is the root).

mod sequence;
mod tree;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::states::{Label, State};

pub use sequence::{seq_distance, seq_distance_value};
pub use tree::{tree_distance, tree_distance_value, tree_mapping, PreparedTree};

/// Cost of relabeling one label into another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum RelabelCost {
    /// The same cost for every pair of distinct labels.
    Uniform { cost: f64 },
    /// Labels are `type<separator>text`. Relabeling across types costs
    /// infinity; within a type it costs the normalized character Levenshtein
    /// distance of the texts, a value in `[0, 1]`.
    Typed { separator: String },
}

/// A symmetric edit cost function: inserting and deleting a label cost the
/// same, and relabel costs are symmetric with zero on the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub indel: f64,
    pub indel_by_label: BTreeMap<Label, f64>,
    pub relabel: RelabelCost,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::unit()
    }
}

impl CostModel {
    /// Unit costs for every insert, delete and relabel.
    pub fn unit() -> Self {
        CostModel {
            indel: 1.0,
            indel_by_label: BTreeMap::new(),
            relabel: RelabelCost::Uniform { cost: 1.0 },
        }
    }

    pub fn typed(separator: &str) -> Self {
        CostModel {
            relabel: RelabelCost::Typed {
                separator: separator.to_string(),
            },
            ..CostModel::unit()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.indel) {
            return Err(Error::Usage(format!(
                "indel cost must be positive and finite, got {}",
                self.indel
            )));
        }
        for (l, &v) in &self.indel_by_label {
            if !positive(v) {
                return Err(Error::Usage(format!(
                    "indel cost of {:?} must be positive and finite, got {v}",
                    l.as_str()
                )));
            }
        }
        match &self.relabel {
            RelabelCost::Uniform { cost } if cost.is_nan() || *cost < 0.0 => Err(Error::Usage(
                format!("relabel cost must be non-negative, got {cost}"),
            )),
            RelabelCost::Typed { separator } if separator.is_empty() => Err(Error::Usage(
                "typed relabel costs need a non-empty separator".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Cost of inserting or deleting `l`.
    pub fn indel(&self, l: &Label) -> f64 {
        self.indel_by_label.get(l).copied().unwrap_or(self.indel)
    }

    pub fn relabel(&self, a: &Label, b: &Label) -> f64 {
        if a == b {
            return 0.0;
        }
        match &self.relabel {
            RelabelCost::Uniform { cost } => *cost,
            RelabelCost::Typed { separator } => {
                let split = |l: &Label| -> (String, String) {
                    match l.as_str().split_once(separator.as_str()) {
                        Some((t, rest)) => (t.to_string(), rest.to_string()),
                        None => (l.as_str().to_string(), String::new()),
                    }
                };
                let (ta, xa) = split(a);
                let (tb, xb) = split(b);
                if ta != tb {
                    return f64::INFINITY;
                }
                let ca: Vec<char> = xa.chars().collect();
                let cb: Vec<char> = xb.chars().collect();
                let longest = ca.len().max(cb.len());
                if longest == 0 {
                    return 0.0;
                }
                char_levenshtein(&ca, &cb) as f64 / longest as f64
            }
        }
    }
}

fn char_levenshtein(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqEdit {
    Delete { position: usize },
    Insert { position: usize, label: Label },
    Relabel { position: usize, label: Label },
}

impl SeqEdit {
    pub fn position(&self) -> usize {
        match self {
            SeqEdit::Delete { position }
            | SeqEdit::Insert { position, .. }
            | SeqEdit::Relabel { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TreeEdit {
    /// Removes the node and splices its children into its parent at its
    /// position. The root can only be deleted when it has exactly one child.
    #[serde(rename = "delete_node")]
    Delete { path: Vec<usize> },
    /// Inserts a node under the parent at `path`, placed at child index
    /// `child_span.0` and adopting `child_span.1` consecutive children. A
    /// `None` path wraps the whole tree in a new root (`child_span` is `(1, 1)`).
    #[serde(rename = "insert_node")]
    Insert {
        path: Option<Vec<usize>>,
        label: Label,
        child_span: (usize, usize),
    },
    #[serde(rename = "relabel_node")]
    Relabel { path: Vec<usize>, label: Label },
}

impl TreeEdit {
    /// Depth of the affected node; `0` for the root.
    pub fn depth(&self) -> usize {
        match self {
            TreeEdit::Delete { path } | TreeEdit::Relabel { path, .. } => path.len(),
            TreeEdit::Insert { path: Some(p), .. } => p.len() + 1,
            TreeEdit::Insert { path: None, .. } => 0,
        }
    }
}

/// A single atomic edit on either state kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Edit {
    Seq(SeqEdit),
    Tree(TreeEdit),
}

impl Edit {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("edits always serialize")
    }

    /// Order-free tie-break key: position for sequence edits, depth for tree
    /// edits, then the serialized form.
    pub fn tie_key(&self) -> (usize, String) {
        let rank = match self {
            Edit::Seq(e) => e.position(),
            Edit::Tree(e) => e.depth(),
        };
        (rank, self.to_json())
    }
}

impl fmt::Display for SeqEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqEdit::Delete { position } => write!(f, "del_{position}"),
            SeqEdit::Insert { position, label } => write!(f, "ins_{{{position},{label}}}"),
            SeqEdit::Relabel { position, label } => write!(f, "rep_{{{position},{label}}}"),
        }
    }
}

fn fmt_path(path: &[usize]) -> String {
    let parts: Vec<String> = path.iter().map(usize::to_string).collect();
    format!("[{}]", parts.join(","))
}

impl fmt::Display for TreeEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeEdit::Delete { path } => write!(f, "delete {}", fmt_path(path)),
            TreeEdit::Relabel { path, label } => write!(f, "relabel {} to {label}", fmt_path(path)),
            TreeEdit::Insert {
                path: None, label, ..
            } => write!(f, "insert root {label}"),
            TreeEdit::Insert {
                path: Some(p),
                label,
                child_span: (first, count),
            } => write!(
                f,
                "insert {label} under {} at {first} adopting {count}",
                fmt_path(p)
            ),
        }
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edit::Seq(e) => e.fmt(f),
            Edit::Tree(e) => e.fmt(f),
        }
    }
}

/// An ordered list of edits turning a source state into a target state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditScript {
    pub edits: Vec<Edit>,
    pub total_cost: f64,
}

impl EditScript {
    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// Replays the script on `source`.
    pub fn apply(&self, source: &State) -> Result<State> {
        let mut s = source.clone();
        for e in &self.edits {
            s = apply_edit(&s, e)?;
        }
        Ok(s)
    }
}

fn kind_mismatch(s: &State, e: &Edit) -> Error {
    Error::Address(format!("edit {e} does not apply to a {:?} state", s.kind()))
}

pub fn apply_edit(s: &State, e: &Edit) -> Result<State> {
    match (s, e) {
        (State::Sequence(x), Edit::Seq(e)) => sequence::apply(x, e).map(State::Sequence),
        (State::Tree(x), Edit::Tree(e)) => tree::apply(x, e).map(State::Tree),
        _ => Err(kind_mismatch(s, e)),
    }
}

/// The edit undoing `e` on `s`: `apply(apply(s, e), invert(e, s)) == s`.
pub fn invert_edit(e: &Edit, s: &State) -> Result<Edit> {
    match (s, e) {
        (State::Sequence(x), Edit::Seq(e)) => sequence::invert(e, x).map(Edit::Seq),
        (State::Tree(x), Edit::Tree(e)) => tree::invert(e, x).map(Edit::Tree),
        _ => Err(kind_mismatch(s, e)),
    }
}

/// Cost of applying `e` to `s` under `c`.
pub fn edit_cost(s: &State, e: &Edit, c: &CostModel) -> Result<f64> {
    match (s, e) {
        (State::Sequence(x), Edit::Seq(e)) => sequence::cost(x, e, c),
        (State::Tree(x), Edit::Tree(e)) => tree::cost(x, e, c),
        _ => Err(kind_mismatch(s, e)),
    }
}

fn mixed_kinds() -> Error {
    Error::Data("cannot compare a sequence state with a tree state".into())
}

pub fn distance(x: &State, y: &State, c: &CostModel) -> Result<f64> {
    match (x, y) {
        (State::Sequence(a), State::Sequence(b)) => Ok(seq_distance_value(a, b, c)),
        (State::Tree(a), State::Tree(b)) => Ok(tree_distance_value(a, b, c)),
        _ => Err(mixed_kinds()),
    }
}

/// Minimum-cost edit script from `x` to `y`.
pub fn edit_script(x: &State, y: &State, c: &CostModel) -> Result<EditScript> {
    match (x, y) {
        (State::Sequence(a), State::Sequence(b)) => Ok(seq_distance(a, b, c).1),
        (State::Tree(a), State::Tree(b)) => Ok(tree_distance(a, b, c).1),
        _ => Err(mixed_kinds()),
    }
}

/// Single edits applicable to `x` that lie on some shortest path to `y`.
///
/// For sequences these are exactly the edits of the backtraced script, which
/// are all expressed relative to `x`. For trees the script's later edits see
/// an already modified tree, so the candidates are re-derived from the optimal
/// node mapping and each one is addressed within `x` itself.
pub fn candidate_edits(x: &State, y: &State, c: &CostModel) -> Result<Vec<Edit>> {
    match (x, y) {
        (State::Sequence(a), State::Sequence(b)) => Ok(seq_distance(a, b, c).1.edits),
        (State::Tree(a), State::Tree(b)) => Ok(tree::candidate_edits(a, b, c)),
        _ => Err(mixed_kinds()),
    }
}

/// All pairwise distances. The upper triangle is computed in parallel; the
/// result does not depend on scheduling.
pub fn pairwise_distances(states: &[State], c: &CostModel) -> Result<Matrix> {
    let n = states.len();
    if let Some(first) = states.first() {
        if states.iter().any(|s| s.kind() != first.kind()) {
            return Err(mixed_kinds());
        }
    }
    let prepared: Vec<Option<PreparedTree<'_>>> = states
        .iter()
        .map(|s| s.as_tree().map(PreparedTree::new))
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| match (&states[i], &states[j]) {
                    (State::Sequence(a), State::Sequence(b)) => seq_distance_value(a, b, c),
                    _ => tree::prepared_distance(
                        prepared[i].as_ref().expect("tree"),
                        prepared[j].as_ref().expect("tree"),
                        c,
                    ),
                })
                .collect()
        })
        .collect();
    let mut d = Matrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            let j = i + 1 + k;
            if !v.is_finite() {
                return Err(Error::Numerical {
                    message: format!("distance between states {i} and {j} is not finite"),
                    residual: v,
                });
            }
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

/// Distances from `x` to each of `states`, in parallel.
pub fn distances_to(x: &State, states: &[State], c: &CostModel) -> Result<Vec<f64>> {
    if states.iter().any(|s| s.kind() != x.kind()) {
        return Err(mixed_kinds());
    }
    let px = x.as_tree().map(PreparedTree::new);
    Ok(states
        .par_iter()
        .map(|s| match (x, s) {
            (State::Sequence(a), State::Sequence(b)) => seq_distance_value(a, b, c),
            (_, State::Tree(b)) => {
                tree::prepared_distance(px.as_ref().expect("tree"), &PreparedTree::new(b), c)
            }
            _ => unreachable!(),
        })
        .collect())
}
