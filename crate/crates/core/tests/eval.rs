//! Evaluation harness: leave-one-out errors, tutor agreement and kernel search.

use chf::editdist::{Edit, SeqEdit};
use chf::eval::{
    hint_quality, hyper_search, loo_rmse, search_over, synthetic_corpus, Corpus, LogRange, Scheme,
    SyntheticConfig,
};
use chf::policies::{chf_hint, FitOptions, KernelParams, Model, Policy};
use chf::states::{State, StateKind};
use chf::traces::{Dataset, Trace, TutorHint};

fn seq(s: &str) -> State {
    State::seq(s)
}

fn data(traces: &[(&str, &[&str])]) -> Dataset {
    Dataset::new(
        StateKind::Sequence,
        traces
            .iter()
            .map(|(id, states)| Trace::new(*id, states.iter().map(|s| seq(s)).collect()))
            .collect(),
    )
}

fn synth(traces: usize) -> Dataset {
    synthetic_corpus(&SyntheticConfig {
        traces,
        ..SyntheticConfig::default()
    })
    .unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn do_nothing_matches_closed_form() {
    let d = data(&[("1", &["a", "ab", "abc"]), ("2", &["x", "xy"])]);
    let r = loo_rmse(&d, Scheme::DoNothing, &FitOptions::default()).unwrap();
    let f = r.folds.iter().find(|f| f.trace == "1").unwrap();
    // distances to the final state are 2, 1, 0 and to the next state 1, 1, 0
    assert!(close(f.final_rmse, (5.0f64 / 3.0).sqrt()), "{f:?}");
    assert!(close(f.next_rmse, (2.0f64 / 3.0).sqrt()), "{f:?}");
}

#[test]
fn gp_reproduces_a_duplicated_trace() {
    let d = data(&[
        ("1", &["a", "ab", "abc"]),
        ("2", &["a", "ab", "abc"]),
        ("3", &["xyz", "xy", "x"]),
    ]);
    let opts = FitOptions {
        kernel: KernelParams::new(1.0, 0.0),
        ..FitOptions::default()
    };
    let r = loo_rmse(&d, Scheme::GaussianProcess, &opts).unwrap();
    assert!(r.skipped.is_empty(), "{:?}", r.skipped);
    let f = r.folds.iter().find(|f| f.trace == "1").unwrap();
    assert!(f.next_rmse < 1e-6, "{f:?}");
}

#[test]
fn every_scheme_reports_every_fold() {
    let corpus = Corpus::new(&synth(6), &FitOptions::default()).unwrap();
    for s in Scheme::ALL {
        let r = corpus.loo_rmse(s);
        assert_eq!(r.folds.len() + r.skipped.len(), 6);
        assert!(r
            .folds
            .iter()
            .all(|f| f.next_rmse.is_finite() && f.final_rmse >= 0.0));
    }
}

#[test]
fn leave_one_out_needs_two_traces() {
    let d = data(&[("1", &["a", "ab"])]);
    assert!(Corpus::new(&d, &FitOptions::default()).is_err());
}

/// Training traces plus an unsuccessful trace whose states get annotated.
fn annotated() -> (Dataset, Vec<State>) {
    let mut d = data(&[
        ("1", &["a", "aac"]),
        ("2", &["b", "bbc"]),
        ("3", &["ab", "abc"]),
    ]);
    let mut student = Trace::new("s", vec![seq("ab"), seq("a"), seq("bb")]);
    student.successful = false;
    let states = student.states.clone();
    d.traces.push(student);
    (d, states)
}

fn chf_edit(d: &Dataset, x: &State) -> Edit {
    let m = Model::fit(d, &FitOptions::default()).unwrap();
    chf_hint(&m, x).unwrap().edit.expect("a hint")
}

#[test]
fn reproducing_tutor_hints_scores_one() {
    let (mut d, states) = annotated();
    for (step, x) in states.iter().enumerate() {
        d.tutor_hints.push(TutorHint {
            trace: "s".into(),
            step,
            edit: chf_edit(&d, x),
            quality: 1.0,
        });
    }
    let r = hint_quality(&d, Policy::Chf, &FitOptions::default(), 0).unwrap();
    assert_eq!(r.median, 1.0);
    assert_eq!(r.hintable, 1.0);
    assert_eq!(r.positive, 1.0);
    assert_eq!(r.rmse, Some(0.0));
}

#[test]
fn quality_averages_over_annotated_states() {
    let (mut d, states) = annotated();
    let other = Edit::Seq(SeqEdit::Delete { position: 1 });
    for (step, q) in [(0, 0.6), (1, 0.9)] {
        d.tutor_hints.push(TutorHint {
            trace: "s".into(),
            step,
            edit: chf_edit(&d, &states[step]),
            quality: q,
        });
    }
    assert_ne!(chf_edit(&d, &states[2]), other);
    d.tutor_hints.push(TutorHint {
        trace: "s".into(),
        step: 2,
        edit: other,
        quality: 1.0,
    });
    let r = hint_quality(&d, Policy::Chf, &FitOptions::default(), 0).unwrap();
    assert!(close(r.quality.mean, (0.6 + 0.9) / 3.0), "{:?}", r.quality);
    assert!(close(r.median, 0.6));
    assert!(close(r.positive, 2.0 / 3.0));
}

#[test]
fn no_hints_at_solutions_means_nothing_hintable() {
    let (mut d, _) = annotated();
    d.tutor_hints.push(TutorHint {
        trace: "1".into(),
        step: 1,
        edit: Edit::Seq(SeqEdit::Delete { position: 3 }),
        quality: 1.0,
    });
    let r = hint_quality(&d, Policy::Chf, &FitOptions::default(), 0).unwrap();
    assert_eq!(r.hintable, 0.0);
    assert_eq!(r.rmse, None);
    assert_eq!(r.states[0].edit, None);
}

#[test]
fn hint_quality_needs_annotations() {
    let (d, _) = annotated();
    assert!(hint_quality(&d, Policy::Chf, &FitOptions::default(), 0).is_err());
}

#[test]
fn collapsed_range_returns_that_point() {
    let corpus = Corpus::new(&synth(5), &FitOptions::default()).unwrap();
    let psi = LogRange::new(0.7, 0.7).unwrap();
    let sigma = LogRange::new(0.05, 0.05).unwrap();
    let r = hyper_search(&corpus, psi, sigma, 3, 1).unwrap();
    assert_eq!(r.best, KernelParams::new(0.7, 0.05));
    assert_eq!(r.trials.len(), 3);
}

#[test]
fn vanishing_length_scale_loses() {
    let corpus = Corpus::new(&synth(8), &FitOptions::default()).unwrap();
    let tiny = KernelParams::new(1e-6, 0.1);
    let sane = KernelParams::new(1.0, 0.1);
    let r = search_over(&corpus, &[tiny, sane]).unwrap();
    assert_eq!(r.best, sane);
    assert!(r.trials[0].next_rmse > r.trials[1].next_rmse);
}

#[test]
fn search_is_seeded() {
    let corpus = Corpus::new(&synth(5), &FitOptions::default()).unwrap();
    let psi = LogRange::new(0.1, 10.0).unwrap();
    let sigma = LogRange::new(1e-3, 1.0).unwrap();
    let a = hyper_search(&corpus, psi, sigma, 4, 11).unwrap();
    let b = hyper_search(&corpus, psi, sigma, 4, 11).unwrap();
    assert_eq!(a, b);
    let c = hyper_search(&corpus, psi, sigma, 4, 12).unwrap();
    assert_ne!(a.trials, c.trials);
}
