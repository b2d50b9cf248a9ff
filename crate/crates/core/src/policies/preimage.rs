//! Sparsification of the regression target, candidate extraction and
//! pre-image selection.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::regression::{alpha_from_gamma, gpr_weights, nn_weights, nwr_weights};
use super::{
    HintResult, Model, Policy, Query, Regressor, ScoredEdit, SupportTerm, DECAY_THRESHOLD,
};
use crate::editdist::{apply_edit, candidate_edits, distance, Edit};
use crate::error::{Error, Result};
use crate::linalg::{pinv_symmetric, Matrix};
use crate::states::State;

/// Relative tolerance under which two candidate scores count as tied.
const SCORE_TIE: f64 = 1e-9;

/// Decides whether a candidate edit may be recommended, for instance by
/// checking that the edited program still parses.
pub trait CandidateFilter: Sync {
    fn accept(&self, x: &State, edit: &Edit, edited: &State) -> bool;
}

/// Accepts every candidate.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassAll;

impl CandidateFilter for PassAll {
    fn accept(&self, _: &State, _: &Edit, _: &State) -> bool {
        true
    }
}

/// A weighted combination `query_weight·φ(x) + Σ weights_i·φ(x_i)` of the
/// query and the training states.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub weights: Vec<f64>,
    pub query_weight: f64,
}

impl Target {
    /// The regression target `φ(x) + Σ α_i φ(x_i)`.
    pub fn from_alpha(alpha: &[f64]) -> Self {
        Target {
            weights: alpha.to_vec(),
            query_weight: 1.0,
        }
    }
}

/// Result of [`sparsify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sparse {
    pub target: Target,
    /// Squared distance to the full target in the corrected embedding.
    pub error: f64,
    /// `omp` or `top_m`, whichever came closer.
    pub method: &'static str,
}

/// The training end state closest to the query in the corrected embedding.
/// Ties go to the lexicographically smallest trace id, then to the earlier
/// trace.
pub fn closest_correct(model: &Model, q: &Query) -> Option<usize> {
    let pairs = model.pairs();
    pairs.finals().into_iter().min_by(|&a, &b| {
        q.sqdist[a]
            .total_cmp(&q.sqdist[b])
            .then_with(|| {
                pairs.trace_ids[pairs.trace_of[a]].cmp(&pairs.trace_ids[pairs.trace_of[b]])
            })
            .then(a.cmp(&b))
    })
}

/// Index `m` stands for the query, `0..m` for training states.
struct Extended<'a> {
    model: &'a Model,
    q: &'a Query,
}

impl Extended<'_> {
    fn inner(&self, a: usize, b: usize) -> f64 {
        let m = self.model.states().len();
        match (a == m, b == m) {
            (true, true) => self.q.embedding.self_inner,
            (true, false) => self.q.embedding.cross_gram[b],
            (false, true) => self.q.embedding.cross_gram[a],
            (false, false) => self.model.space().gram()[(a, b)],
        }
    }

    /// Coefficients of a target over the extended index space.
    fn coefficients(&self, t: &Target) -> Vec<(usize, f64)> {
        let m = self.model.states().len();
        let mut c: Vec<(usize, f64)> = t
            .weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(i, &w)| (i, w))
            .collect();
        if t.query_weight != 0.0 {
            c.push((m, t.query_weight));
        }
        c
    }

    fn with(&self, e: usize, c: &[(usize, f64)]) -> f64 {
        c.iter().map(|&(k, w)| w * self.inner(e, k)).sum()
    }

    fn sqnorm(&self, c: &[(usize, f64)]) -> f64 {
        c.iter().map(|&(k, w)| w * self.with(k, c)).sum()
    }

    /// Best weights summing to one on `support` for approximating the target
    /// with inner products `b` and squared norm `tt`.
    fn constrained_fit(&self, support: &[usize], b: &[f64], tt: f64) -> Result<(Vec<f64>, f64)> {
        let s = support.len();
        let kkt = Matrix::from_fn(s + 1, s + 1, |i, j| match (i < s, j < s) {
            (true, true) => self.inner(support[i], support[j]),
            (false, false) => 0.0,
            _ => 1.0,
        });
        let (inv, _) = pinv_symmetric(&kkt, 1e-12)?;
        let mut rhs: Vec<f64> = support.iter().zip(b).map(|(_, &v)| v).collect();
        rhs.push(1.0);
        let sol = inv.matvec(&rhs);
        let w = sol[..s].to_vec();
        let c: Vec<(usize, f64)> = support.iter().copied().zip(w.iter().copied()).collect();
        let err = self.sqnorm(&c) - 2.0 * w.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() + tt;
        Ok((w, err))
    }
}

/// Approximates `target` by at most `m_max` states, with weights summing to
/// one, drawn from the states `x_i` (and the query itself) that satisfy
/// `d(x_i, x) ≤ d(x, x*)` and `d(x_i, x*) ≤ d(x, x*)` in raw edit distance.
///
/// Two approximations are computed, a greedy orthogonal matching pursuit in
/// the kernel space with a constrained refit after every step, and the
/// renormalized `m_max` largest coefficients; the closer one is returned.
pub fn sparsify(
    model: &Model,
    q: &Query,
    target: &Target,
    x_star: usize,
    m_max: usize,
) -> Result<Sparse> {
    if m_max == 0 {
        return Err(Error::Usage("m_max must be at least 1".into()));
    }
    let m = model.states().len();
    let radius = q.raw[x_star];
    let dist = model.distances();
    let mut allowed: Vec<usize> = (0..m)
        .filter(|&i| q.raw[i] <= radius && dist[(i, x_star)] <= radius)
        .collect();
    allowed.push(m);

    let ext = Extended { model, q };
    let c = ext.coefficients(target);
    let tt = ext.sqnorm(&c);
    let b: Vec<f64> = allowed.iter().map(|&e| ext.with(e, &c)).collect();

    // greedy selection by residual error
    let mut chosen: Vec<usize> = Vec::new();
    let mut omp: Option<(Vec<f64>, f64)> = None;
    for _ in 0..m_max.min(allowed.len()) {
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for slot in 0..allowed.len() {
            if chosen.contains(&slot) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(slot);
            let support: Vec<usize> = trial.iter().map(|&k| allowed[k]).collect();
            let bs: Vec<f64> = trial.iter().map(|&k| b[k]).collect();
            let (w, err) = ext.constrained_fit(&support, &bs, tt)?;
            if best.as_ref().is_none_or(|(_, _, e)| err < *e) {
                best = Some((slot, w, err));
            }
        }
        let Some((slot, w, err)) = best else { break };
        if let Some((_, prev)) = &omp {
            if err >= *prev - 1e-14 * (1.0 + tt.abs()) {
                break;
            }
        }
        chosen.push(slot);
        omp = Some((w, err));
    }

    let to_target = |slots: &[usize], w: &[f64]| {
        let mut t = Target {
            weights: vec![0.0; m],
            query_weight: 0.0,
        };
        for (&k, &wk) in slots.iter().zip(w) {
            let e = allowed[k];
            if e == m {
                t.query_weight = wk;
            } else {
                t.weights[e] = wk;
            }
        }
        t
    };
    let mut result = omp.map(|(w, err)| Sparse {
        target: to_target(&chosen, &w),
        error: err,
        method: "omp",
    });

    // largest coefficients within the allowed support, renormalized
    let mut ranked: Vec<(usize, f64)> = allowed
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            (
                k,
                if e == m {
                    target.query_weight
                } else {
                    target.weights[e]
                },
            )
        })
        .filter(|(_, v)| *v != 0.0)
        .collect();
    ranked.sort_by(|x, y| y.1.abs().total_cmp(&x.1.abs()).then(x.0.cmp(&y.0)));
    ranked.truncate(m_max);
    let total: f64 = ranked.iter().map(|(_, v)| v).sum();
    if total.abs() > 1e-12 {
        let slots: Vec<usize> = ranked.iter().map(|(k, _)| *k).collect();
        let w: Vec<f64> = ranked.iter().map(|(_, v)| v / total).collect();
        let t = to_target(&slots, &w);
        let err = ext.sqnorm(&ext.coefficients(&t))
            - 2.0
                * ext
                    .coefficients(&t)
                    .iter()
                    .map(|&(e, v)| v * ext.with(e, &c))
                    .sum::<f64>()
            + tt;
        if result.as_ref().is_none_or(|r| err < r.error) {
            result = Some(Sparse {
                target: t,
                error: err,
                method: "top_m",
            });
        }
    }
    result.ok_or_else(|| Error::Numerical {
        message: "sparsification found no feasible approximation".into(),
        residual: tt,
    })
}

/// Edits of `x` on shortest paths toward the training states with positive
/// weight, deduplicated by serialized form.
pub fn candidate_edits_toward(model: &Model, x: &State, target: &Target) -> Result<Vec<Edit>> {
    let states = model.states();
    let lists: Vec<Vec<Edit>> = target
        .weights
        .par_iter()
        .enumerate()
        .filter(|(i, w)| **w > 0.0 && states[*i] != *x)
        .map(|(i, _)| candidate_edits(x, &states[i], &model.options().cost))
        .collect::<Result<_>>()?;
    let mut unique: BTreeMap<String, Edit> = BTreeMap::new();
    for e in lists.into_iter().flatten() {
        unique.entry(e.to_json()).or_insert(e);
    }
    Ok(unique.into_values().collect())
}

/// Scores every candidate `δ` by `Σ_j w_j · d(δ(x), s_j)²` over the target's
/// terms (the query included) in raw edit distance, and picks the minimum.
/// Scores within a relative `1e-9` of the minimum tie; ties go to the
/// smallest position (sequences) or shallowest node (trees), then to the
/// smallest serialized form.
pub fn preimage_select(
    model: &Model,
    x: &State,
    target: &Target,
    candidates: &[Edit],
) -> Result<(Option<ScoredEdit>, Vec<ScoredEdit>)> {
    let states = model.states();
    let cost = &model.options().cost;
    let mut terms: Vec<(&State, f64)> = target
        .weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(i, &w)| (&states[i], w))
        .collect();
    if target.query_weight != 0.0 {
        terms.push((x, target.query_weight));
    }
    let scored: Vec<ScoredEdit> = candidates
        .par_iter()
        .map(|e| {
            let next = apply_edit(x, e)?;
            let sq: Vec<f64> = terms
                .iter()
                .map(|&(s, _)| distance(&next, s, cost).map(|d| d * d))
                .collect::<Result<_>>()?;
            let weights: Vec<f64> = terms.iter().map(|t| t.1).collect();
            Ok(ScoredEdit {
                edit: e.clone(),
                score: score(&weights, &sq),
            })
        })
        .collect::<Result<_>>()?;
    Ok((select(&scored).cloned(), scored))
}

/// The pre-image objective `Σ_j w_j d_j²` of a candidate with squared
/// distances `d_j²` to the target's terms. When the weights sum to one it
/// differs from the squared embedding distance to the target only by a
/// constant that does not depend on the candidate.
pub fn score(weights: &[f64], sqdists: &[f64]) -> f64 {
    weights.iter().zip(sqdists).map(|(w, d)| w * d).sum()
}

fn select(scored: &[ScoredEdit]) -> Option<&ScoredEdit> {
    let min = scored.iter().map(|s| s.score).min_by(f64::total_cmp)?;
    let tol = SCORE_TIE * min.abs().max(1.0);
    scored
        .iter()
        .filter(|s| s.score <= min + tol)
        .min_by_key(|s| s.edit.tie_key())
}

/// The continuous hint factory policy with GPR weights and no candidate
/// filter.
pub fn chf_hint(model: &Model, x: &State) -> Result<HintResult> {
    chf_hint_with(model, x, Regressor::Gpr, &PassAll)
}

/// Canonicalize, embed, regress, convert pair weights to state coefficients,
/// sparsify, extract candidates, filter and select.
pub fn chf_hint_with(
    model: &Model,
    x: &State,
    regressor: Regressor,
    filter: &dyn CandidateFilter,
) -> Result<HintResult> {
    chf_hint_toward(model, x, regressor, None, filter)
}

/// Like [`chf_hint_with`], with the sparsification anchored at training
/// state `x_star` instead of the closest end state.
pub fn chf_hint_toward(
    model: &Model,
    x: &State,
    regressor: Regressor,
    x_star: Option<usize>,
    filter: &dyn CandidateFilter,
) -> Result<HintResult> {
    if x_star.is_some_and(|i| i >= model.states().len()) {
        return Err(Error::Usage("anchor state index is out of range".into()));
    }
    let policy = match regressor {
        Regressor::Gpr => Policy::Chf,
        Regressor::Nwr => Policy::Nwr,
        Regressor::Nn => Policy::Nn,
    };
    let q = model.query(x)?;
    let gamma = match regressor {
        Regressor::Gpr => {
            let g = gpr_weights(model, &q.sqdist);
            if g.iter().map(|v| v * v).sum::<f64>().sqrt() < DECAY_THRESHOLD {
                return Ok(HintResult::none(policy, "kernel-decay"));
            }
            g
        }
        Regressor::Nwr => match nwr_weights(model, &q.sqdist) {
            Some(g) => g,
            None => return Ok(HintResult::none(policy, "kernel-decay")),
        },
        Regressor::Nn => nn_weights(model, &q.sqdist),
    };
    let alpha = alpha_from_gamma(&gamma, model.pairs());
    let mut target = Target::from_alpha(&alpha);
    let mut sparsified = false;
    let mut reason = None;
    if let Some(m_max) = model.options().m_max {
        match x_star.or_else(|| closest_correct(model, &q)) {
            Some(x_star) => {
                target = sparsify(model, &q, &target, x_star, m_max)
                    .map_err(|e| e.in_stage("sparsification"))?
                    .target;
                sparsified = true;
            }
            None => reason = Some("sparsification-skipped".to_string()),
        }
    }
    let candidates: Vec<Edit> = candidate_edits_toward(model, &q.state, &target)
        .map_err(|e| e.in_stage("candidates"))?
        .into_iter()
        .filter(|e| apply_edit(&q.state, e).is_ok_and(|next| filter.accept(&q.state, e, &next)))
        .collect();
    let (best, scored) = preimage_select(model, &q.state, &target, &candidates)
        .map_err(|e| e.in_stage("pre-image"))?;
    let ids = model.pairs().state_ids();
    let mut support: Vec<SupportTerm> = target
        .weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(i, &w)| SupportTerm {
            state: ids[i].clone(),
            weight: w,
        })
        .collect();
    if target.query_weight != 0.0 {
        support.push(SupportTerm {
            state: "query".into(),
            weight: target.query_weight,
        });
    }
    if best.is_none() {
        reason = Some("no-candidates".to_string());
    }
    Ok(HintResult {
        policy: policy.name().to_string(),
        objective: best.as_ref().map(|b| b.score),
        edit: best.map(|b| b.edit),
        candidates: scored,
        alpha,
        support,
        sparsified,
        reason,
        pseudo_inverse: model.system().pseudo_inverse(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::editdist::SeqEdit;
    use crate::policies::{FitOptions, KernelParams};
    use crate::space::Correction;
    use crate::states::{label, StateKind};
    use crate::traces::Trace;

    fn worked_model(extra: &[&str], options: FitOptions) -> Model {
        let mut traces = vec![
            Trace::new("1", vec![State::seq("a"), State::seq("aac")]),
            Trace::new("2", vec![State::seq("b"), State::seq("bbc")]),
        ];
        for (k, s) in extra.iter().enumerate() {
            traces.push(Trace::new(format!("{}", k + 3), vec![State::seq(s)]));
        }
        Model::from_traces(StateKind::Sequence, traces, &options).unwrap()
    }

    fn exact_options() -> FitOptions {
        FitOptions {
            correction: Correction::Off,
            final_self_pairs: false,
            kernel: KernelParams::new(1.0, 0.0),
            m_max: None,
            ..FitOptions::default()
        }
    }

    fn ins3c() -> Edit {
        Edit::Seq(SeqEdit::Insert {
            position: 3,
            label: label("c"),
        })
    }

    #[test]
    fn worked_example_candidates_and_hint() {
        let model = worked_model(&[], exact_options());
        let r = chf_hint(&model, &State::seq("ab")).unwrap();
        let shown: Vec<String> = r.candidates.iter().map(|c| c.edit.to_string()).collect();
        assert_eq!(shown.len(), 3);
        for e in ["rep_{2,a}", "ins_{3,c}", "rep_{1,b}"] {
            assert!(shown.contains(&e.to_string()), "{shown:?}");
        }
        assert_eq!(r.edit, Some(ins3c()));
    }

    #[test]
    fn default_pipeline_also_hints_ins3c() {
        let model = worked_model(&[], FitOptions::default());
        let r = chf_hint(&model, &State::seq("ab")).unwrap();
        assert!(r.sparsified);
        assert_eq!(r.edit, Some(ins3c()));
    }

    #[test]
    fn far_query_decays() {
        let model = worked_model(&[], FitOptions::default());
        let r = chf_hint(&model, &State::seq("zzzzzzzzzzzzzzzz")).unwrap();
        assert_eq!(r.edit, None);
        assert_eq!(r.reason.as_deref(), Some("kernel-decay"));
    }

    #[test]
    fn correct_solution_gets_no_hint() {
        let model = worked_model(&[], FitOptions::default());
        let r = chf_hint(&model, &State::seq("aac")).unwrap();
        assert_eq!(r.edit, None);
    }

    #[test]
    fn selection_ignores_candidate_order() {
        let scored = vec![
            ScoredEdit {
                edit: Edit::Seq(SeqEdit::Delete { position: 2 }),
                score: 1.0,
            },
            ScoredEdit {
                edit: Edit::Seq(SeqEdit::Delete { position: 1 }),
                score: 1.0 + 1e-12,
            },
            ScoredEdit {
                edit: ins3c(),
                score: 2.0,
            },
        ];
        let mut reversed = scored.clone();
        reversed.reverse();
        assert_eq!(select(&scored), select(&reversed));
        assert_eq!(
            select(&scored).unwrap().edit,
            Edit::Seq(SeqEdit::Delete { position: 1 })
        );
    }

    #[test]
    fn single_candidate_is_selected() {
        let model = worked_model(&[], exact_options());
        let x = State::seq("ab");
        let (best, _) =
            preimage_select(&model, &x, &Target::from_alpha(&[0.0; 4]), &[ins3c()]).unwrap();
        assert_eq!(best.unwrap().edit, ins3c());
    }

    #[test]
    fn sparse_weights_sum_to_one_within_budget() {
        let model = worked_model(&["abcd"], exact_options());
        let q = model.query(&State::seq("ab")).unwrap();
        let gamma = gpr_weights(&model, &q.sqdist);
        let alpha = alpha_from_gamma(&gamma, model.pairs());
        for m_max in 1..=4 {
            let s = sparsify(&model, &q, &Target::from_alpha(&alpha), 4, m_max).unwrap();
            let nonzero = s.target.weights.iter().filter(|w| **w != 0.0).count()
                + usize::from(s.target.query_weight != 0.0);
            assert!(nonzero <= m_max);
            let total: f64 = s.target.weights.iter().sum::<f64>() + s.target.query_weight;
            assert!((total - 1.0).abs() < 1e-9);
            // b is outside the allowed support: d(b, abcd) = 3 > d(ab, abcd) = 2
            assert_eq!(s.target.weights[2], 0.0);
        }
    }
}
