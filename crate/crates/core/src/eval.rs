//! Evaluation harness: leave-one-trace-out prediction error in the corrected
//! embedding, agreement with tutor hints, random hyper-parameter search and a
//! synthetic corpus generator.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::editdist::{apply_edit, candidate_edits, distance, pairwise_distances, Edit, SeqEdit};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricEigen};
use crate::policies::{
    alpha_from_gamma, gpr_weights, hint, nn_weights, nwr_weights, FitOptions, KernelParams, Model,
    Policy,
};
use crate::space::CorrectedSpace;
use crate::states::{canonicalize, Label, SequenceState, State, StateKind};
use crate::traces::{Dataset, Trace};

/// How the next state is predicted in leave-one-out evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Stay in the current state.
    DoNothing,
    /// The successor of the closest training state.
    SuccessorOfClosest,
    /// The closest training end state.
    ClosestCorrect,
    GaussianProcess,
    Nwr,
    Nn,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::DoNothing,
        Scheme::SuccessorOfClosest,
        Scheme::ClosestCorrect,
        Scheme::GaussianProcess,
        Scheme::Nwr,
        Scheme::Nn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::DoNothing => "do_nothing",
            Scheme::SuccessorOfClosest => "successor_of_closest",
            Scheme::ClosestCorrect => "closest_correct",
            Scheme::GaussianProcess => "gaussian_process",
            Scheme::Nwr => "nwr",
            Scheme::Nn => "nn",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown scheme {s:?}")))
    }
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Summary { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    /// Id of the held-out trace.
    pub trace: String,
    pub states: usize,
    pub next_rmse: f64,
    pub final_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFold {
    pub trace: String,
    pub reason: String,
}

/// Leave-one-trace-out errors of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    pub scheme: Scheme,
    pub kernel: KernelParams,
    pub folds: Vec<FoldResult>,
    pub skipped: Vec<SkippedFold>,
    pub next: Summary,
    pub final_step: Summary,
}

impl RmseReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Serializes rows to CSV with a header taken from the field names.
pub fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory CSV writes succeed");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flushes"))
        .expect("CSV of UTF-8 fields is UTF-8")
}

#[derive(Serialize)]
struct FoldRow<'a> {
    scheme: &'a str,
    trace: &'a str,
    states: usize,
    next_rmse: f64,
    final_rmse: f64,
}

/// One row per scheme and fold, for significance tests downstream.
pub fn folds_csv(reports: &[RmseReport]) -> String {
    to_csv(reports.iter().flat_map(|r| {
        r.folds.iter().map(move |f| FoldRow {
            scheme: r.scheme.name(),
            trace: &f.trace,
            states: f.states,
            next_rmse: f.next_rmse,
            final_rmse: f.final_rmse,
        })
    }))
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    scheme: &'a str,
    next_mean: f64,
    next_std: f64,
    final_mean: f64,
    final_std: f64,
    folds: usize,
    skipped: usize,
}

/// One row per scheme with the mean and standard deviation across folds.
pub fn summary_csv(reports: &[RmseReport]) -> String {
    to_csv(reports.iter().map(|r| SummaryRow {
        scheme: r.scheme.name(),
        next_mean: r.next.mean,
        next_std: r.next.std,
        final_mean: r.final_step.mean,
        final_std: r.final_step.std,
        folds: r.folds.len(),
        skipped: r.skipped.len(),
    }))
}

/// Prepared traces, their pairwise raw distances and one fitted model per
/// held-out trace, shared by every scheme and kernel setting.
#[derive(Debug, Clone)]
pub struct Corpus {
    options: FitOptions,
    traces: Vec<Trace>,
    ranges: Vec<Range<usize>>,
    dist: Matrix,
    folds: Vec<std::result::Result<Model, String>>,
}

impl Corpus {
    pub fn new(data: &Dataset, options: &FitOptions) -> Result<Corpus> {
        options.validate()?;
        let traces = options.prepare(data)?;
        if traces.len() < 2 {
            return Err(Error::Data(format!(
                "leave-one-out needs at least 2 successful traces, found {}",
                traces.len()
            )));
        }
        let mut ranges = Vec::with_capacity(traces.len());
        let mut states = Vec::new();
        for t in &traces {
            ranges.push(states.len()..states.len() + t.states.len());
            states.extend(t.states.iter().cloned());
        }
        let dist =
            pairwise_distances(&states, &options.cost).map_err(|e| e.in_stage("distances"))?;
        let folds = (0..traces.len())
            .into_par_iter()
            .map(|k| {
                fit_fold(data.kind, &traces, &ranges, &dist, k, options).map_err(|e| e.to_string())
            })
            .collect();
        Ok(Corpus {
            options: options.clone(),
            traces,
            ranges,
            dist,
            folds,
        })
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn options(&self) -> &FitOptions {
        &self.options
    }

    /// Leave-one-out errors with the corpus' own kernel parameters.
    pub fn loo_rmse(&self, scheme: Scheme) -> RmseReport {
        self.loo_rmse_with(scheme, self.options.kernel)
    }

    pub fn loo_rmse_with(&self, scheme: Scheme, kernel: KernelParams) -> RmseReport {
        let outcomes: Vec<std::result::Result<FoldResult, String>> = (0..self.traces.len())
            .into_par_iter()
            .map(|k| {
                let base = self.folds[k].as_ref().map_err(Clone::clone)?;
                let model = if base.options().kernel == kernel {
                    base.clone()
                } else {
                    base.with_kernel(kernel).map_err(|e| e.to_string())?
                };
                self.evaluate_fold(&model, k, scheme)
                    .map_err(|e| e.to_string())
            })
            .collect();
        let mut folds = Vec::new();
        let mut skipped = Vec::new();
        for (k, o) in outcomes.into_iter().enumerate() {
            match o {
                Ok(f) => folds.push(f),
                Err(reason) => skipped.push(SkippedFold {
                    trace: self.traces[k].id.clone(),
                    reason,
                }),
            }
        }
        let next: Vec<f64> = folds.iter().map(|f| f.next_rmse).collect();
        let fin: Vec<f64> = folds.iter().map(|f| f.final_rmse).collect();
        RmseReport {
            scheme,
            kernel,
            next: Summary::of(&next),
            final_step: Summary::of(&fin),
            folds,
            skipped,
        }
    }

    fn evaluate_fold(&self, model: &Model, k: usize, scheme: Scheme) -> Result<FoldResult> {
        let held = self.ranges[k].clone();
        let train: Vec<usize> = (0..self.dist.rows())
            .filter(|i| !held.contains(i))
            .collect();
        let t = held.len();
        let rows: Vec<Vec<f64>> = held
            .clone()
            .map(|h| train.iter().map(|&i| self.dist[(h, i)].powi(2)).collect())
            .collect();
        let between = Matrix::from_fn(t, t, |a, b| {
            self.dist[(held.start + a, held.start + b)].powi(2)
        });
        let space = model.space();
        let qs = space.extend_many(&rows, &between)?;
        let m = train.len();
        let unit = |n: usize, i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        let (mut next_sq, mut final_sq) = (0.0, 0.0);
        for a in 0..t {
            let sqdist: Vec<f64> = (0..m).map(|i| qs.sqdist_to_state(space, a, i)).collect();
            let (c, e) = predict(model, scheme, &sqdist, a, t);
            let next = (vec![0.0; m], unit(t, (a + 1).min(t - 1)));
            let fin = (vec![0.0; m], unit(t, t - 1));
            next_sq += space
                .combo_sqdist(&qs, (&c, &e), (&next.0, &next.1))
                .max(0.0);
            final_sq += space.combo_sqdist(&qs, (&c, &e), (&fin.0, &fin.1)).max(0.0);
        }
        Ok(FoldResult {
            trace: self.traces[k].id.clone(),
            states: t,
            next_rmse: (next_sq / t as f64).sqrt(),
            final_rmse: (final_sq / t as f64).sqrt(),
        })
    }
}

fn fit_fold(
    kind: StateKind,
    traces: &[Trace],
    ranges: &[Range<usize>],
    dist: &Matrix,
    k: usize,
    options: &FitOptions,
) -> Result<Model> {
    let train: Vec<usize> = ranges
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .flat_map(|(_, r)| r.clone())
        .collect();
    let sub = dist.select(&train);
    let d2 = Matrix::from_fn(sub.rows(), sub.cols(), |i, j| sub[(i, j)] * sub[(i, j)]);
    let eigen: SymmetricEigen = CorrectedSpace::from_sq_distances(d2, options.correction)?
        .eigen()
        .clone();
    let kept: Vec<Trace> = traces
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, t)| t.clone())
        .collect();
    Model::from_distances(kind, kept, sub, Some(eigen), options)
}

/// Prediction for held-out state `a` as training and query coefficients.
fn predict(
    model: &Model,
    scheme: Scheme,
    sqdist: &[f64],
    a: usize,
    t: usize,
) -> (Vec<f64>, Vec<f64>) {
    let m = sqdist.len();
    let mut c = vec![0.0; m];
    let mut e = vec![0.0; t];
    let closest = |pool: &mut dyn Iterator<Item = usize>| {
        pool.min_by(|&i, &j| sqdist[i].total_cmp(&sqdist[j]).then(i.cmp(&j)))
            .expect("training set is non-empty")
    };
    let regress = |gamma: Vec<f64>, c: &mut Vec<f64>, e: &mut Vec<f64>| {
        *c = alpha_from_gamma(&gamma, model.pairs());
        e[a] = 1.0;
    };
    match scheme {
        Scheme::DoNothing => e[a] = 1.0,
        Scheme::SuccessorOfClosest => c[model.pairs().successor_of(closest(&mut (0..m)))] = 1.0,
        Scheme::ClosestCorrect => c[closest(&mut model.pairs().finals().into_iter())] = 1.0,
        Scheme::GaussianProcess => regress(gpr_weights(model, sqdist), &mut c, &mut e),
        Scheme::Nwr => match nwr_weights(model, sqdist) {
            Some(g) => regress(g, &mut c, &mut e),
            None => e[a] = 1.0,
        },
        Scheme::Nn => regress(nn_weights(model, sqdist), &mut c, &mut e),
    }
    (c, e)
}

/// Leave-one-trace-out errors of a scheme on a dataset.
pub fn loo_rmse(data: &Dataset, scheme: Scheme, options: &FitOptions) -> Result<RmseReport> {
    Ok(Corpus::new(data, options)?.loo_rmse(scheme))
}

/// Outcome for one tutor-annotated state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateQuality {
    pub trace: String,
    pub step: usize,
    pub edit: Option<Edit>,
    /// Average rating of the matching tutor hints, or 0.
    pub quality: f64,
    /// Raw edit distance from the hinted state to the nearest tutor-hinted
    /// state.
    pub distance: Option<f64>,
}

/// Agreement of a policy with tutor hints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub policy: Policy,
    pub states: Vec<StateQuality>,
    pub median: f64,
    pub quality: Summary,
    /// Fraction of states with quality above zero.
    pub positive: f64,
    /// Root mean squared distance to the nearest tutor-hinted state, over
    /// the states that received a hint.
    pub rmse: Option<f64>,
    /// Fraction of states that received a hint.
    pub hintable: f64,
}

impl QualityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

#[derive(Serialize)]
struct QualityRow<'a> {
    policy: &'a str,
    trace: &'a str,
    step: usize,
    edit: String,
    quality: f64,
    distance: Option<f64>,
}

/// One row per policy and annotated state.
pub fn quality_csv(reports: &[QualityReport]) -> String {
    to_csv(reports.iter().flat_map(|r| {
        r.states.iter().map(move |s| QualityRow {
            policy: r.policy.name(),
            trace: &s.trace,
            step: s.step,
            edit: s.edit.as_ref().map(|e| e.to_string()).unwrap_or_default(),
            quality: s.quality,
            distance: s.distance,
        })
    }))
}

/// Generates a hint for every tutor-annotated state with a model fitted on
/// the dataset's successful traces. A hint matches a tutor hint when the
/// edits serialize identically or lead to the same canonical state.
pub fn hint_quality(
    data: &Dataset,
    policy: Policy,
    options: &FitOptions,
    seed: u64,
) -> Result<QualityReport> {
    if data.tutor_hints.is_empty() {
        return Err(Error::Data("the dataset has no tutor hints".into()));
    }
    let model = Model::fit(data, options)?;
    let mut groups: BTreeMap<(String, usize), Vec<usize>> = BTreeMap::new();
    for (i, h) in data.tutor_hints.iter().enumerate() {
        groups.entry((h.trace.clone(), h.step)).or_default().push(i);
    }
    let canon = &options.canon;
    let states: Vec<StateQuality> = groups
        .into_par_iter()
        .map(|((trace, step), idx)| {
            let raw = &data.trace(&trace).expect("validated").states[step];
            let x = canonicalize(raw, canon);
            let r = hint(&model, policy, raw, seed)?;
            let Some(edit) = r.edit else {
                return Ok(StateQuality {
                    trace,
                    step,
                    edit: None,
                    quality: 0.0,
                    distance: None,
                });
            };
            let ours = canonicalize(&apply_edit(&x, &edit)?, canon);
            let mut matched = Vec::new();
            let mut nearest = f64::INFINITY;
            for &i in &idx {
                let h = &data.tutor_hints[i];
                let theirs = canonicalize(&apply_edit(raw, &h.edit)?, canon);
                if h.edit == edit || theirs == ours {
                    matched.push(h.quality);
                }
                nearest = nearest.min(distance(&ours, &theirs, &options.cost)?);
            }
            let quality = if matched.is_empty() {
                0.0
            } else {
                matched.iter().sum::<f64>() / matched.len() as f64
            };
            Ok(StateQuality {
                trace,
                step,
                edit: Some(edit),
                quality,
                distance: Some(nearest),
            })
        })
        .collect::<Result<_>>()?;
    let n = states.len() as f64;
    let qualities: Vec<f64> = states.iter().map(|s| s.quality).collect();
    let distances: Vec<f64> = states.iter().filter_map(|s| s.distance).collect();
    Ok(QualityReport {
        policy,
        median: median(&qualities),
        quality: Summary::of(&qualities),
        positive: qualities.iter().filter(|&&q| q > 0.0).count() as f64 / n,
        rmse: (!distances.is_empty()).then(|| {
            (distances.iter().map(|d| d * d).sum::<f64>() / distances.len() as f64).sqrt()
        }),
        hintable: distances.len() as f64 / n,
        states,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// A closed interval for log-uniform sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRange {
    pub lo: f64,
    pub hi: f64,
}

impl LogRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Usage(format!("invalid search range [{lo}, {hi}]")));
        }
        Ok(LogRange { lo, hi })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.gen();
        (self.lo.ln() + u * (self.hi.ln() - self.lo.ln()))
            .exp()
            .clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub kernel: KernelParams,
    /// Mean next-step leave-one-out RMSE of the Gaussian process.
    pub next_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: KernelParams,
    pub best_rmse: f64,
    pub trials: Vec<Trial>,
}

impl SearchResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("search results always serialize")
    }
}

/// Samples `repeats` kernel settings log-uniformly and keeps the one with the
/// lowest mean next-step error; the first wins ties.
pub fn hyper_search(
    corpus: &Corpus,
    psi: LogRange,
    sigma: LogRange,
    repeats: usize,
    seed: u64,
) -> Result<SearchResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<KernelParams> = (0..repeats)
        .map(|_| {
            let length_scale = psi.sample(&mut rng);
            KernelParams::new(length_scale, sigma.sample(&mut rng))
        })
        .collect();
    search_over(corpus, &candidates)
}

/// Evaluates explicit kernel settings; folds that fail count as infinitely
/// bad.
pub fn search_over(corpus: &Corpus, candidates: &[KernelParams]) -> Result<SearchResult> {
    if candidates.is_empty() {
        return Err(Error::Usage("no kernel settings to search".into()));
    }
    for c in candidates {
        c.validate()?;
    }
    let trials: Vec<Trial> = candidates
        .iter()
        .map(|&kernel| {
            let r = corpus.loo_rmse_with(Scheme::GaussianProcess, kernel);
            let next_rmse = if r.next.mean.is_finite() {
                r.next.mean
            } else {
                f64::INFINITY
            };
            Trial { kernel, next_rmse }
        })
        .collect();
    let best = trials
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.next_rmse.total_cmp(&b.1.next_rmse).then(a.0.cmp(&b.0)))
        .map(|(_, t)| t.clone())
        .expect("non-empty");
    Ok(SearchResult {
        best: best.kernel,
        best_rmse: best.next_rmse,
        trials,
    })
}

/// Settings for [`synthetic_corpus`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub traces: usize,
    pub goal: String,
    pub alphabet: String,
    /// Probability that a step is a random edit instead of progress.
    pub noise: f64,
    pub max_start_len: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            traces: 20,
            goal: "abcdef".into(),
            alphabet: "abcdefgh".into(),
            noise: 0.25,
            max_start_len: 3,
            seed: 7,
        }
    }
}

/// Noisy goal-directed string traces: every trace starts from a short random
/// string and mostly takes steps along shortest edit paths to a shared goal,
/// with occasional random edits.
pub fn synthetic_corpus(cfg: &SyntheticConfig) -> Result<Dataset> {
    let alphabet: Vec<Label> = cfg
        .alphabet
        .chars()
        .map(|c| Label::new(c.to_string()))
        .collect::<Result<_>>()?;
    if alphabet.is_empty() || cfg.goal.is_empty() || !(0.0..1.0).contains(&cfg.noise) {
        return Err(Error::Usage(
            "synthetic corpus needs a goal, an alphabet and noise in [0, 1)".into(),
        ));
    }
    let goal = State::seq(&cfg.goal);
    let cost = crate::editdist::CostModel::unit();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let width = cfg.traces.to_string().len();
    let mut traces = Vec::with_capacity(cfg.traces);
    for n in 0..cfg.traces {
        let len = rng.gen_range(1..=cfg.max_start_len.max(1));
        let mut x = State::Sequence(SequenceState::new(
            (0..len)
                .map(|_| alphabet.choose(&mut rng).expect("non-empty").clone())
                .collect(),
        ));
        let mut states = vec![x.clone()];
        let mut steps = 0;
        while x != goal {
            steps += 1;
            let edit = if steps < 40 && rng.gen::<f64>() < cfg.noise {
                random_edit(&x, &alphabet, &mut rng)
            } else {
                candidate_edits(&x, &goal, &cost)?
                    .choose(&mut rng)
                    .expect("a state other than the goal has candidates")
                    .clone()
            };
            x = apply_edit(&x, &edit)?;
            states.push(x.clone());
        }
        traces.push(Trace::new(format!("s{:0width$}", n + 1), states));
    }
    Ok(Dataset::new(StateKind::Sequence, traces))
}

fn random_edit(x: &State, alphabet: &[Label], rng: &mut impl Rng) -> Edit {
    let len = x.size();
    let label = alphabet.choose(rng).expect("non-empty").clone();
    let seq = match (len, rng.gen_range(0..3)) {
        (0, _) | (_, 0) => SeqEdit::Insert {
            position: rng.gen_range(1..=len + 1),
            label,
        },
        (_, 1) => SeqEdit::Delete {
            position: rng.gen_range(1..=len),
        },
        _ => SeqEdit::Relabel {
            position: rng.gen_range(1..=len),
            label,
        },
    };
    Edit::Seq(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus_data() -> Dataset {
        synthetic_corpus(&SyntheticConfig::default()).unwrap()
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0]);
        assert_eq!((s.mean, s.std), (2.0, 1.0));
        assert_eq!(Summary::of(&[4.0]).std, 0.0);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }

    #[test]
    fn synthetic_corpus_is_seeded_and_reaches_the_goal() {
        let a = corpus_data();
        assert_eq!(a, corpus_data());
        assert_eq!(a.traces.len(), 20);
        for t in &a.traces {
            assert_eq!(t.final_state(), &State::seq("abcdef"));
        }
        let other = synthetic_corpus(&SyntheticConfig {
            seed: 8,
            ..SyntheticConfig::default()
        })
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn log_range_stays_inside() {
        let r = LogRange::new(0.1, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let v = r.sample(&mut rng);
            assert!((0.1..=10.0).contains(&v));
        }
        let point = LogRange::new(2.0, 2.0).unwrap();
        assert_eq!(point.sample(&mut rng), 2.0);
        assert!(LogRange::new(0.0, 1.0).is_err());
        assert!(LogRange::new(2.0, 1.0).is_err());
    }

    #[test]
    fn do_nothing_on_static_traces_is_zero() {
        let data = Dataset::new(
            StateKind::Sequence,
            vec![
                Trace::new("1", vec![State::seq("ab"), State::seq("ab")]),
                Trace::new("2", vec![State::seq("cd")]),
            ],
        );
        let r = loo_rmse(&data, Scheme::DoNothing, &FitOptions::default()).unwrap();
        assert_eq!(r.folds.len(), 2);
        for f in &r.folds {
            assert_eq!(f.next_rmse, 0.0);
        }
    }

    #[test]
    fn reports_export_csv() {
        let data = corpus_data();
        let r = loo_rmse(&data, Scheme::DoNothing, &FitOptions::default()).unwrap();
        let csv = folds_csv(std::slice::from_ref(&r));
        assert_eq!(csv.lines().count(), 21);
        assert!(csv.starts_with("scheme,trace,states,next_rmse,final_rmse\n"));
        assert_eq!(summary_csv(std::slice::from_ref(&r)).lines().count(), 2);
        assert!(r.skipped.is_empty());
    }

    #[test]
    fn gaussian_process_beats_trivial_schemes() {
        let corpus = Corpus::new(&corpus_data(), &FitOptions::default()).unwrap();
        let gp = corpus.loo_rmse(Scheme::GaussianProcess).next.mean;
        let dn = corpus.loo_rmse(Scheme::DoNothing).next.mean;
        let sc = corpus.loo_rmse(Scheme::SuccessorOfClosest).next.mean;
        eprintln!("gp {gp} do_nothing {dn} successor {sc}");
        for s in Scheme::ALL {
            eprintln!("{} {:?}", s.name(), corpus.loo_rmse(s).next);
        }
        assert!(gp < dn && gp < sc);
    }
}
