//! Traces, datasets, goal-directedness filtering and training pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::editdist::{distances_to, CostModel, Edit};
use crate::error::{Error, Result};
use crate::states::{canonicalize, CanonConfig, State, StateKind};

/// One student's recorded states, from the first to the final submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub id: String,
    #[serde(default = "yes")]
    pub successful: bool,
    pub states: Vec<State>,
}

fn yes() -> bool {
    true
}

impl Trace {
    pub fn new(id: impl Into<String>, states: Vec<State>) -> Self {
        Trace {
            id: id.into(),
            successful: true,
            states,
        }
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("traces are non-empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// A tutor's hint for a recorded state, rated in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TutorHint {
    pub trace: String,
    /// 0-based index into the trace's recorded `states`.
    pub step: usize,
    pub edit: Edit,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub kind: StateKind,
    pub traces: Vec<Trace>,
    #[serde(default)]
    pub tutor_hints: Vec<TutorHint>,
}

impl Dataset {
    pub fn new(kind: StateKind, traces: Vec<Trace>) -> Self {
        Dataset {
            kind,
            traces,
            tutor_hints: Vec::new(),
        }
    }

    /// Parses a dataset. States are read according to `kind`: a sequence is
    /// a JSON array of symbols or a string of one-character symbols, a tree
    /// is a string in bracket notation.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDataset = serde_json::from_str(text)?;
        let mut traces = Vec::with_capacity(raw.traces.len());
        for t in raw.traces {
            let states = t
                .states
                .into_iter()
                .enumerate()
                .map(|(k, v)| {
                    parse_state(raw.kind, v)
                        .map_err(|e| Error::Data(format!("state {k} of trace {:?}: {e}", t.id)))
                })
                .collect::<Result<_>>()?;
            traces.push(Trace {
                id: t.id,
                successful: t.successful,
                states,
            });
        }
        let d = Dataset {
            kind: raw.kind,
            traces,
            tutor_hints: raw.tutor_hints,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Dataset::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("datasets always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for t in &self.traces {
            if t.states.is_empty() {
                return Err(Error::Data(format!("trace {:?} has no states", t.id)));
            }
            if !ids.insert(t.id.as_str()) {
                return Err(Error::Data(format!("duplicate trace id {:?}", t.id)));
            }
            if let Some((k, _)) = t
                .states
                .iter()
                .enumerate()
                .find(|(_, s)| s.kind() != self.kind)
            {
                return Err(Error::Data(format!(
                    "state {k} of trace {:?} is not a {:?} state",
                    t.id, self.kind
                )));
            }
        }
        for h in &self.tutor_hints {
            let t = self.trace(&h.trace).ok_or_else(|| {
                Error::Data(format!("tutor hint refers to unknown trace {:?}", h.trace))
            })?;
            if h.step >= t.states.len() {
                return Err(Error::Data(format!(
                    "tutor hint step {} is out of range for trace {:?} with {} states",
                    h.step,
                    h.trace,
                    t.states.len()
                )));
            }
            if !(0.0..=1.0).contains(&h.quality) {
                return Err(Error::Data(format!(
                    "tutor hint quality {} is outside [0, 1]",
                    h.quality
                )));
            }
        }
        Ok(())
    }

    pub fn trace(&self, id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.id == id)
    }

    /// A SHA-256 digest of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("datasets always serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Deserialize)]
struct RawDataset {
    kind: StateKind,
    traces: Vec<RawTrace>,
    #[serde(default)]
    tutor_hints: Vec<TutorHint>,
}

#[derive(Deserialize)]
struct RawTrace {
    id: String,
    #[serde(default = "yes")]
    successful: bool,
    states: Vec<serde_json::Value>,
}

fn parse_state(kind: StateKind, v: serde_json::Value) -> Result<State> {
    match (kind, v) {
        (_, serde_json::Value::String(s)) => State::parse(kind, &s),
        (StateKind::Sequence, v @ serde_json::Value::Array(_)) => Ok(State::Sequence(
            crate::states::SequenceState::new(serde_json::from_value(v)?),
        )),
        (_, v) => Err(Error::Data(format!("expected a {kind:?} state, found {v}"))),
    }
}

/// Canonicalizes every state and collapses consecutive duplicates.
pub fn canonicalize_trace(t: &Trace, cfg: &CanonConfig) -> Trace {
    let mut states: Vec<State> = Vec::with_capacity(t.states.len());
    for s in &t.states {
        let c = canonicalize(s, cfg);
        if states.last() != Some(&c) {
            states.push(c);
        }
    }
    Trace {
        id: t.id.clone(),
        successful: t.successful,
        states,
    }
}

/// Keeps the first state, every state strictly closer to the final state
/// than the last kept one, and the final state.
///
/// `dist_to_final[k]` is the distance of state `k` to the trace's final state.
pub fn goal_filter_by(t: &Trace, dist_to_final: &[f64]) -> Trace {
    let n = t.states.len();
    if n <= 1 {
        return t.clone();
    }
    let mut keep = vec![0];
    let mut last = dist_to_final[0];
    for (k, &d) in dist_to_final.iter().enumerate().take(n - 1).skip(1) {
        if d < last {
            keep.push(k);
            last = d;
        }
    }
    if last == 0.0 && keep.len() > 1 {
        // a kept state already at the goal is superseded by the final state
        keep.pop();
    }
    if last == 0.0 && keep == [0] {
        keep.clear();
    }
    keep.push(n - 1);
    Trace {
        id: t.id.clone(),
        successful: t.successful,
        states: keep.into_iter().map(|k| t.states[k].clone()).collect(),
    }
}

/// [`goal_filter_by`] with distances from `metric`.
pub fn goal_filter(t: &Trace, metric: impl Fn(&State, &State) -> f64) -> Trace {
    let d: Vec<f64> = t
        .states
        .iter()
        .map(|s| metric(s, t.final_state()))
        .collect();
    goal_filter_by(t, &d)
}

/// [`goal_filter`] with edit distances under `cost`, computed in parallel.
pub fn goal_filter_edit(t: &Trace, cost: &CostModel) -> Result<Trace> {
    let d = distances_to(t.final_state(), &t.states, cost)?;
    Ok(goal_filter_by(t, &d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Start,
    Intermediate,
    End,
    /// A trace consisting of a single state.
    Single,
}

/// Flattened trace states and the `(x_i, y_i)` training pairs over them.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePairs {
    pub states: Vec<State>,
    pub trace_ids: Vec<String>,
    /// State index range of each trace.
    pub trace_ranges: Vec<Range<usize>>,
    pub trace_of: Vec<usize>,
    pub position_of: Vec<Position>,
    /// `(source, target)` state indices of each pair.
    pub pairs: Vec<(usize, usize)>,
}

impl TracePairs {
    /// Builds one pair per step of every trace. With `final_self_pairs`, each
    /// final state is also paired with itself, so pair and state indices
    /// coincide.
    pub fn build(traces: &[Trace], final_self_pairs: bool) -> Self {
        let mut out = TracePairs {
            states: Vec::new(),
            trace_ids: Vec::new(),
            trace_ranges: Vec::new(),
            trace_of: Vec::new(),
            position_of: Vec::new(),
            pairs: Vec::new(),
        };
        for (ti, t) in traces.iter().enumerate() {
            let start = out.states.len();
            let n = t.states.len();
            for (k, s) in t.states.iter().enumerate() {
                let idx = start + k;
                out.states.push(s.clone());
                out.trace_of.push(ti);
                out.position_of.push(match (k, n) {
                    (_, 1) => Position::Single,
                    (0, _) => Position::Start,
                    (k, n) if k + 1 == n => Position::End,
                    _ => Position::Intermediate,
                });
                if k + 1 < n {
                    out.pairs.push((idx, idx + 1));
                } else if final_self_pairs {
                    out.pairs.push((idx, idx));
                }
            }
            out.trace_ids.push(t.id.clone());
            out.trace_ranges.push(start..start + n);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    /// Index of the final state of the trace containing state `i`.
    pub fn final_of(&self, i: usize) -> usize {
        self.trace_ranges[self.trace_of[i]].end - 1
    }

    /// Successor of state `i` within its trace; a final state is its own
    /// successor.
    pub fn successor_of(&self, i: usize) -> usize {
        if i == self.final_of(i) {
            i
        } else {
            i + 1
        }
    }

    /// Indices of the trace final states.
    pub fn finals(&self) -> Vec<usize> {
        self.trace_ranges.iter().map(|r| r.end - 1).collect()
    }

    /// `trace#step` identifier of each state.
    pub fn state_ids(&self) -> Vec<String> {
        (0..self.states.len())
            .map(|i| {
                format!(
                    "{}#{}",
                    self.trace_ids[self.trace_of[i]],
                    i - self.trace_ranges[self.trace_of[i]].start
                )
            })
            .collect()
    }
}

/// The distinct states of a set of traces and the observed transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionNetwork {
    /// Distinct states in order of first appearance.
    pub nodes: Vec<State>,
    pub edges: BTreeSet<(usize, usize)>,
    /// How often each node occurs across all traces.
    pub visits: Vec<usize>,
}

impl InteractionNetwork {
    pub fn build(traces: &[Trace]) -> Self {
        let mut index: BTreeMap<&State, usize> = BTreeMap::new();
        let mut nodes = Vec::new();
        let mut visits = Vec::new();
        let mut edges = BTreeSet::new();
        for t in traces {
            let mut prev = None;
            for s in &t.states {
                let id = *index.entry(s).or_insert_with(|| {
                    nodes.push(s.clone());
                    visits.push(0);
                    nodes.len() - 1
                });
                visits[id] += 1;
                if let Some(p) = prev {
                    edges.insert((p, id));
                }
                prev = Some(id);
            }
        }
        InteractionNetwork {
            nodes,
            edges,
            visits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkStats {
    pub unique_states: usize,
    pub fraction_visited_once: f64,
}

/// Number of distinct states and the fraction of them that occur exactly
/// once across all traces. States are compared after canonicalization.
pub fn network_stats(traces: &[Trace], canon: &CanonConfig) -> NetworkStats {
    let canonical: Vec<Trace> = traces
        .iter()
        .map(|t| canonicalize_trace(t, canon))
        .collect();
    let net = InteractionNetwork::build(&canonical);
    let once = net.visits.iter().filter(|&&v| v == 1).count();
    NetworkStats {
        unique_states: net.nodes.len(),
        fraction_visited_once: if net.nodes.is_empty() {
            0.0
        } else {
            once as f64 / net.nodes.len() as f64
        },
    }
}
