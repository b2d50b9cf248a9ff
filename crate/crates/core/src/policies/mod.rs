//! Hint policies: Gaussian-process regression in the edit distance space with
//! sparsified pre-image selection, its NWR and 1-NN variants, and the
//! Zimmerman, Gross and random baselines.

mod baselines;
mod preimage;
mod regression;

use serde::{Deserialize, Serialize};

use crate::editdist::{distances_to, pairwise_distances, CostModel, Edit};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricEigen};
use crate::space::{CorrectedSpace, Correction, QueryEmbedding};
use crate::states::{canonicalize, CanonConfig, State, StateKind};
use crate::traces::{canonicalize_trace, goal_filter_edit, Dataset, Trace, TracePairs};

pub use baselines::{gross_hint, random_hint, zimmerman_hint};
pub use preimage::{
    candidate_edits_toward, chf_hint, chf_hint_toward, chf_hint_with, closest_correct,
    preimage_select, score, sparsify, CandidateFilter, PassAll, Sparse, Target,
};
pub use regression::{
    alpha_from_gamma, gpr_weights, kernel_vector, nn_weights, nwr_weights, rbf, KernelSystem,
};

/// Default cap on the number of states in a sparsified target.
pub const DEFAULT_M_MAX: usize = 11;
/// Hints are withheld when the GPR weight vector is shorter than this.
pub const DECAY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// RBF length scale ψ.
    pub length_scale: f64,
    /// Observation noise σ̃.
    pub noise_std: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            length_scale: 1.0,
            noise_std: 0.0,
        }
    }
}

impl KernelParams {
    pub fn new(length_scale: f64, noise_std: f64) -> Self {
        KernelParams {
            length_scale,
            noise_std,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale.is_finite() && self.length_scale > 0.0) {
            return Err(Error::Usage(format!(
                "length scale must be positive, got {}",
                self.length_scale
            )));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::Usage(format!(
                "noise must be non-negative, got {}",
                self.noise_std
            )));
        }
        Ok(())
    }
}

/// Everything that shapes a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub cost: CostModel,
    pub canon: CanonConfig,
    pub correction: Correction,
    pub kernel: KernelParams,
    /// Pair every trace's final state with itself.
    pub final_self_pairs: bool,
    /// Drop trace states that do not approach the final state.
    pub goal_filter: bool,
    /// Sparsification budget; `None` scores candidates against the full
    /// regression target.
    pub m_max: Option<usize>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            cost: CostModel::unit(),
            canon: CanonConfig::default(),
            correction: Correction::Clip,
            kernel: KernelParams::default(),
            final_self_pairs: true,
            goal_filter: true,
            m_max: Some(DEFAULT_M_MAX),
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        self.cost.validate()?;
        self.canon.validate()?;
        self.kernel.validate()?;
        if self.m_max == Some(0) {
            return Err(Error::Usage("m_max must be at least 1".into()));
        }
        Ok(())
    }

    /// Canonicalized, deduplicated and (optionally) goal-filtered successful
    /// traces of a dataset.
    pub fn prepare(&self, data: &Dataset) -> Result<Vec<Trace>> {
        data.traces
            .iter()
            .filter(|t| t.successful)
            .map(|t| {
                let t = canonicalize_trace(t, &self.canon);
                if self.goal_filter {
                    goal_filter_edit(&t, &self.cost)
                } else {
                    Ok(t)
                }
            })
            .collect()
    }
}

/// Which regression turns kernel values into pair weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regressor {
    Gpr,
    Nwr,
    Nn,
}

/// Hint policies selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Chf,
    Nwr,
    Nn,
    Zimmerman,
    Gross,
    Random,
}

impl Policy {
    pub const ALL: [Policy; 6] = [
        Policy::Chf,
        Policy::Nwr,
        Policy::Nn,
        Policy::Zimmerman,
        Policy::Gross,
        Policy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Chf => "chf",
            Policy::Nwr => "nwr",
            Policy::Nn => "nn",
            Policy::Zimmerman => "zimmerman",
            Policy::Gross => "gross",
            Policy::Random => "random",
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown policy {s:?} (chf, nwr, nn, zimmerman, gross, random)"
                ))
            })
    }
}

/// A fitted hint model: training traces, their edit distance space and the
/// factorized kernel system over the training pairs.
#[derive(Debug, Clone)]
pub struct Model {
    kind: StateKind,
    options: FitOptions,
    traces: Vec<Trace>,
    pairs: TracePairs,
    dist: Matrix,
    space: CorrectedSpace,
    system: KernelSystem,
}

impl Model {
    /// Prepares the dataset's successful traces and fits on them.
    pub fn fit(data: &Dataset, options: &FitOptions) -> Result<Model> {
        options.validate()?;
        let traces = options.prepare(data)?;
        Model::from_traces(data.kind, traces, options)
    }

    /// Fits on traces that are already canonicalized and filtered.
    pub fn from_traces(kind: StateKind, traces: Vec<Trace>, options: &FitOptions) -> Result<Model> {
        if traces.is_empty() {
            return Err(Error::Data("the dataset has no successful traces".into()));
        }
        let pairs = TracePairs::build(&traces, options.final_self_pairs);
        let dist = pairwise_distances(&pairs.states, &options.cost)
            .map_err(|e| e.in_stage("distances"))?;
        Model::from_distances(kind, traces, dist, None, options)
    }

    /// Fits from precomputed raw distances between the flattened trace
    /// states, optionally reusing the eigendecomposition of their centered
    /// squared distances.
    pub fn from_distances(
        kind: StateKind,
        traces: Vec<Trace>,
        dist: Matrix,
        eigen: Option<SymmetricEigen>,
        options: &FitOptions,
    ) -> Result<Model> {
        options.validate()?;
        let pairs = TracePairs::build(&traces, options.final_self_pairs);
        if pairs.is_empty() {
            return Err(Error::Data("the training traces yield no pairs".into()));
        }
        if dist.rows() != pairs.states.len() {
            return Err(Error::Usage(
                "distance matrix does not match the trace states".into(),
            ));
        }
        let d2 = Matrix::from_fn(dist.rows(), dist.cols(), |i, j| dist[(i, j)] * dist[(i, j)]);
        let space = match eigen {
            Some(e) => CorrectedSpace::from_parts(d2, e, options.correction),
            None => CorrectedSpace::from_sq_distances(d2, options.correction)
                .map_err(|e| e.in_stage("embedding"))?,
        };
        let system = KernelSystem::new(&space, &pairs.sources(), options.kernel)
            .map_err(|e| e.in_stage("kernel"))?;
        Ok(Model {
            kind,
            options: options.clone(),
            traces,
            pairs,
            dist,
            space,
            system,
        })
    }

    /// The same model with different kernel parameters.
    pub fn with_kernel(&self, kernel: KernelParams) -> Result<Model> {
        kernel.validate()?;
        let mut options = self.options.clone();
        options.kernel = kernel;
        let system = KernelSystem::new(&self.space, &self.pairs.sources(), kernel)?;
        Ok(Model {
            options,
            system,
            ..self.clone()
        })
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn options(&self) -> &FitOptions {
        &self.options
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn pairs(&self) -> &TracePairs {
        &self.pairs
    }

    pub fn states(&self) -> &[State] {
        &self.pairs.states
    }

    /// Raw edit distances between the training states.
    pub fn distances(&self) -> &Matrix {
        &self.dist
    }

    pub fn space(&self) -> &CorrectedSpace {
        &self.space
    }

    pub fn system(&self) -> &KernelSystem {
        &self.system
    }

    /// Canonicalizes `x` and embeds it.
    pub fn query(&self, x: &State) -> Result<Query> {
        if x.kind() != self.kind {
            return Err(Error::Data(format!("query is not a {:?} state", self.kind)));
        }
        let state = canonicalize(x, &self.options.canon);
        let raw = distances_to(&state, &self.pairs.states, &self.options.cost)
            .map_err(|e| e.in_stage("distances"))?;
        let d2: Vec<f64> = raw.iter().map(|d| d * d).collect();
        let embedding = self
            .space
            .extend(&d2)
            .map_err(|e| e.in_stage("extension"))?;
        let sqdist = embedding.sqdists(&self.space);
        Ok(Query {
            state,
            raw,
            embedding,
            sqdist,
        })
    }
}

/// A canonicalized query state with its raw and corrected distances.
#[derive(Debug, Clone)]
pub struct Query {
    pub state: State,
    /// Raw edit distances to every training state.
    pub raw: Vec<f64>,
    pub embedding: QueryEmbedding,
    /// Corrected squared distances to every training state.
    pub sqdist: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredEdit {
    pub edit: Edit,
    pub score: f64,
}

/// One term of the target a hint is scored against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportTerm {
    /// `trace#step` of a training state, or `query`.
    pub state: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HintResult {
    pub policy: String,
    pub edit: Option<Edit>,
    pub objective: Option<f64>,
    pub candidates: Vec<ScoredEdit>,
    /// Coefficients over the training states; the query carries weight 1.
    pub alpha: Vec<f64>,
    pub support: Vec<SupportTerm>,
    pub sparsified: bool,
    pub reason: Option<String>,
    /// The kernel system was pseudo-inverted because it is singular.
    pub pseudo_inverse: bool,
}

impl HintResult {
    pub(crate) fn none(policy: Policy, reason: &str) -> Self {
        HintResult {
            policy: policy.name().to_string(),
            reason: Some(reason.to_string()),
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hint results always serialize")
    }
}

/// Runs the named policy. `seed` is only used by the random baseline.
pub fn hint(model: &Model, policy: Policy, x: &State, seed: u64) -> Result<HintResult> {
    match policy {
        Policy::Chf => chf_hint(model, x),
        Policy::Nwr => chf_hint_with(model, x, Regressor::Nwr, &PassAll),
        Policy::Nn => chf_hint_with(model, x, Regressor::Nn, &PassAll),
        Policy::Zimmerman => zimmerman_hint(model, x),
        Policy::Gross => gross_hint(model, x),
        Policy::Random => random_hint(model, x, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert!(matches!("mdp".parse::<Policy>(), Err(Error::Usage(_))));
    }

    #[test]
    fn fit_rejects_empty_datasets() {
        let data = Dataset::new(StateKind::Sequence, vec![]);
        assert!(matches!(
            Model::fit(&data, &FitOptions::default()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn kernel_params_validation() {
        assert!(KernelParams::new(0.0, 0.0).validate().is_err());
        assert!(KernelParams::new(1.0, -1.0).validate().is_err());
        assert!(KernelParams::new(1.0, 0.0).validate().is_ok());
    }
}
