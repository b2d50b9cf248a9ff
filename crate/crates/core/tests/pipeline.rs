//! Hint pipeline on trees: canonicalization, candidate filters and validity of
//! the recommended edits.

use chf::editdist::{apply_edit, distance, Edit, TreeEdit};
use chf::eval::{synthetic_corpus, SyntheticConfig};
use chf::policies::{
    chf_hint, chf_hint_with, hint, CandidateFilter, FitOptions, Model, Policy, Regressor,
};
use chf::states::{canonicalize, label, CanonConfig, State, StateKind};
use chf::traces::{Dataset, Trace};

fn tree(s: &str) -> State {
    State::tree(s)
}

fn canon() -> CanonConfig {
    CanonConfig {
        variable_label_prefixes: vec![label("var_")],
        commutative_labels: vec![label("plus")],
        dead_labels: vec![label("comment")],
    }
}

/// Two students building `ret(plus(v1,1))` for a function with one argument.
fn model() -> Model {
    let d = Dataset::new(
        StateKind::Tree,
        vec![
            Trace::new(
                "1",
                vec![
                    tree("def(var_n)"),
                    tree("def(var_n,ret)"),
                    tree("def(var_n,ret(plus(var_n,1)))"),
                ],
            ),
            Trace::new(
                "2",
                vec![
                    tree("def(var_k,ret(var_k))"),
                    tree("def(var_k,ret(plus(1,var_k)))"),
                ],
            ),
        ],
    );
    let opts = FitOptions {
        canon: canon(),
        ..FitOptions::default()
    };
    Model::fit(&d, &opts).unwrap()
}

#[test]
fn training_traces_are_canonical() {
    let m = model();
    let finals: Vec<String> = m
        .traces()
        .iter()
        .map(|t| t.final_state().to_string())
        .collect();
    assert_eq!(finals[0], finals[1]);
    assert_eq!(finals[0], "def(v1,ret(plus(1,v1)))");
}

#[test]
fn renamed_reordered_and_commented_queries_agree() {
    let m = model();
    let base = chf_hint(&m, &tree("def(var_q,ret)")).unwrap();
    assert!(base.edit.is_some(), "{base:?}");
    for variant in ["def(var_zz,ret)", "def(var_q,comment(todo),ret)"] {
        let r = chf_hint(&m, &tree(variant)).unwrap();
        assert_eq!(r.edit, base.edit, "{variant}");
    }
    let a = chf_hint(&m, &tree("def(var_n,ret(plus(var_n,2)))")).unwrap();
    let b = chf_hint(&m, &tree("def(var_n,ret(plus(2,var_n)))")).unwrap();
    assert_eq!(a.edit, b.edit);
}

#[test]
fn finished_program_needs_no_hint() {
    let m = model();
    let r = chf_hint(&m, &tree("def(var_x,comment,ret(plus(var_x,1)))")).unwrap();
    assert_eq!(r.edit, None);
}

#[test]
fn hint_moves_closer_to_the_solution() {
    let m = model();
    let goal = m.traces()[0].final_state().clone();
    for raw in ["def(var_a)", "def(var_a,ret)", "def(var_a,ret(var_a))"] {
        let x = canonicalize(&tree(raw), &canon());
        let r = chf_hint(&m, &x).unwrap();
        let edit = r
            .edit
            .unwrap_or_else(|| panic!("no hint for {raw}: {:?}", r.reason));
        let y = apply_edit(&x, &edit).unwrap();
        let cost = &m.options().cost;
        assert!(
            distance(&y, &goal, cost).unwrap() < distance(&x, &goal, cost).unwrap(),
            "{raw}: {edit}"
        );
    }
}

struct NoInserts;

impl CandidateFilter for NoInserts {
    fn accept(&self, _: &State, edit: &Edit, _: &State) -> bool {
        !matches!(edit, Edit::Tree(TreeEdit::Insert { .. }))
    }
}

struct Nothing;

impl CandidateFilter for Nothing {
    fn accept(&self, _: &State, _: &Edit, _: &State) -> bool {
        false
    }
}

#[test]
fn filters_restrict_candidates() {
    let m = model();
    let x = tree("def(var_a,ret(var_a))");
    let open = chf_hint(&m, &x).unwrap();
    assert!(
        matches!(open.edit, Some(Edit::Tree(TreeEdit::Insert { .. }))),
        "{open:?}"
    );

    let r = chf_hint_with(&m, &x, Regressor::Gpr, &NoInserts).unwrap();
    assert!(r.edit.is_none() || !matches!(r.edit, Some(Edit::Tree(TreeEdit::Insert { .. }))));

    let r = chf_hint_with(&m, &x, Regressor::Gpr, &Nothing).unwrap();
    assert_eq!(r.edit, None);
    assert_eq!(r.reason.as_deref(), Some("no-candidates"));
}

#[test]
fn every_policy_gives_applicable_edits() {
    let data = synthetic_corpus(&SyntheticConfig {
        traces: 8,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let m = Model::fit(&data, &FitOptions::default()).unwrap();
    for t in &data.traces {
        for x in &t.states {
            for p in Policy::ALL {
                let r = hint(&m, p, x, 3).unwrap();
                if let Some(e) = &r.edit {
                    apply_edit(x, e).unwrap_or_else(|err| panic!("{p:?} on {x}: {e}: {err}"));
                }
            }
        }
    }
}
