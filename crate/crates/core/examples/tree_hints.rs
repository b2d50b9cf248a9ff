//! Hints for small programs written as trees, with a candidate filter that
//! forbids deleting nodes.

use chf::editdist::{Edit, TreeEdit};
use chf::policies::{chf_hint_with, hint, CandidateFilter, FitOptions, Model, Policy, Regressor};
use chf::states::{label, CanonConfig, State, StateKind};
use chf::traces::{Dataset, Trace};

struct NoDeletes;

impl CandidateFilter for NoDeletes {
    fn accept(&self, _: &State, edit: &Edit, _: &State) -> bool {
        !matches!(edit, Edit::Tree(TreeEdit::Delete { .. }))
    }
}

fn main() -> chf::Result<()> {
    let t = |s: &str| State::tree(s);
    let data = Dataset::new(
        StateKind::Tree,
        vec![
            Trace::new(
                "1",
                vec![
                    t("def(var_n)"),
                    t("def(var_n,ret)"),
                    t("def(var_n,ret(plus(var_n,1)))"),
                ],
            ),
            Trace::new(
                "2",
                vec![
                    t("def(var_k,ret(var_k))"),
                    t("def(var_k,ret(plus(1,var_k)))"),
                ],
            ),
            Trace::new(
                "3",
                vec![t("def(var_x,ret(1))"), t("def(var_x,ret(plus(var_x,1)))")],
            ),
        ],
    );
    let opts = FitOptions {
        canon: CanonConfig {
            variable_label_prefixes: vec![label("var_")],
            commutative_labels: vec![label("plus")],
            ..CanonConfig::default()
        },
        ..FitOptions::default()
    };
    let model = Model::fit(&data, &opts)?;
    for q in [
        "def(var_a)",
        "def(var_a,ret(var_a))",
        "def(var_a,ret(2))",
        "def(var_a,ret(plus(var_a,1)))",
    ] {
        let x = t(q);
        println!("{q}");
        for p in Policy::ALL {
            let r = hint(&model, p, &x, 0)?;
            let shown = r
                .edit
                .map(|e| e.to_string())
                .or(r.reason)
                .unwrap_or_default();
            println!("  {:<10} {shown}", p.name());
        }
        let r = chf_hint_with(&model, &x, Regressor::Gpr, &NoDeletes)?;
        println!(
            "  {:<10} {}",
            "no-delete",
            r.edit
                .map(|e| e.to_string())
                .or(r.reason)
                .unwrap_or_default()
        );
    }
    Ok(())
}
