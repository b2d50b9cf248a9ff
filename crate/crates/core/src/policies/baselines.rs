//! Reference-state baselines: each picks a training state and recommends the
//! first edit on a shortest path toward it. All distances are raw edit
//! distances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{HintResult, Model, Policy, ScoredEdit, SupportTerm};
use crate::editdist::{candidate_edits, distances_to, edit_cost};
use crate::error::Result;
use crate::states::{canonicalize, State};

/// Nearest index by raw distance among `pool`; ties go to the first.
fn nearest(raw: &[f64], pool: impl IntoIterator<Item = usize>) -> Option<usize> {
    pool.into_iter()
        .min_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)))
}

fn toward(
    model: &Model,
    policy: Policy,
    x: &State,
    reference: usize,
    raw: &[f64],
) -> Result<HintResult> {
    let target = &model.states()[reference];
    if target == x {
        return Ok(HintResult::none(policy, "at-reference"));
    }
    let edits = candidate_edits(x, target, &model.options().cost)?;
    let first = edits.iter().min_by_key(|e| e.tie_key()).cloned();
    let rest = match &first {
        Some(e) => raw[reference] - edit_cost(x, e, &model.options().cost)?,
        None => raw[reference],
    };
    Ok(HintResult {
        policy: policy.name().to_string(),
        objective: first.as_ref().map(|_| rest),
        candidates: edits
            .into_iter()
            .map(|edit| ScoredEdit { edit, score: rest })
            .collect(),
        reason: first.is_none().then(|| "no-candidates".to_string()),
        edit: first,
        support: vec![SupportTerm {
            state: model.pairs().state_ids()[reference].clone(),
            weight: 1.0,
        }],
        ..HintResult::default()
    })
}

fn prepare(model: &Model, x: &State) -> Result<(State, Vec<f64>)> {
    let x = canonicalize(x, &model.options().canon);
    let raw = distances_to(&x, model.states(), &model.options().cost)?;
    Ok((x, raw))
}

/// Toward the closest training end state.
pub fn zimmerman_hint(model: &Model, x: &State) -> Result<HintResult> {
    let (x, raw) = prepare(model, x)?;
    let reference =
        nearest(&raw, model.pairs().finals()).expect("a fitted model has at least one trace");
    toward(model, Policy::Zimmerman, &x, reference, &raw)
}

/// Toward the successor of the closest training state.
pub fn gross_hint(model: &Model, x: &State) -> Result<HintResult> {
    let (x, raw) = prepare(model, x)?;
    let closest = nearest(&raw, 0..raw.len()).expect("a fitted model has at least one state");
    toward(
        model,
        Policy::Gross,
        &x,
        model.pairs().successor_of(closest),
        &raw,
    )
}

/// Toward a training state drawn uniformly with a seeded generator.
pub fn random_hint(model: &Model, x: &State, seed: u64) -> Result<HintResult> {
    let (x, raw) = prepare(model, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reference = rng.gen_range(0..raw.len());
    toward(model, Policy::Random, &x, reference, &raw)
}
