//! Weighted Levenshtein distance with script backtrace.

use super::{CostModel, Edit, EditScript, SeqEdit};
use crate::error::{Error, Result};
use crate::states::SequenceState;

// The table is filled over suffixes, S[i][j] = d(x[i..], y[j..]), so that the
// backtrace walks from the front and resolves ties at the earliest position:
// relabel (or match) first, then delete, then insert.
fn suffix_table(x: &SequenceState, y: &SequenceState, c: &CostModel) -> Vec<Vec<f64>> {
    let (n, m) = (x.len(), y.len());
    let mut s = vec![vec![0.0; m + 1]; n + 1];
    for j in (0..m).rev() {
        s[n][j] = s[n][j + 1] + c.indel(&y.symbols[j]);
    }
    for i in (0..n).rev() {
        s[i][m] = s[i + 1][m] + c.indel(&x.symbols[i]);
        for j in (0..m).rev() {
            s[i][j] = best(
                s[i + 1][j + 1] + c.relabel(&x.symbols[i], &y.symbols[j]),
                s[i + 1][j] + c.indel(&x.symbols[i]),
                s[i][j + 1] + c.indel(&y.symbols[j]),
            );
        }
    }
    s
}

fn best(relabel: f64, delete: f64, insert: f64) -> f64 {
    let mut v = relabel;
    if delete < v {
        v = delete;
    }
    if insert < v {
        v = insert;
    }
    v
}

/// Distance only, in O(min) memory.
pub fn seq_distance_value(x: &SequenceState, y: &SequenceState, c: &CostModel) -> f64 {
    let (n, m) = (x.len(), y.len());
    let mut next = vec![0.0; m + 1];
    for j in (0..m).rev() {
        next[j] = next[j + 1] + c.indel(&y.symbols[j]);
    }
    let mut cur = vec![0.0; m + 1];
    for i in (0..n).rev() {
        cur[m] = next[m] + c.indel(&x.symbols[i]);
        for j in (0..m).rev() {
            cur[j] = best(
                next[j + 1] + c.relabel(&x.symbols[i], &y.symbols[j]),
                next[j] + c.indel(&x.symbols[i]),
                cur[j + 1] + c.indel(&y.symbols[j]),
            );
        }
        std::mem::swap(&mut cur, &mut next);
    }
    next[0]
}

/// Distance and a minimum-cost script from `x` to `y`.
///
/// The script lists edits right to left, so every edit is addressed in the
/// coordinates of `x` and can also be applied to `x` on its own.
pub fn seq_distance(x: &SequenceState, y: &SequenceState, c: &CostModel) -> (f64, EditScript) {
    let s = suffix_table(x, y, c);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut steps: Vec<(Option<SeqEdit>, f64)> = Vec::new();
    while i < n || j < m {
        if i < n && j < m {
            let r = c.relabel(&x.symbols[i], &y.symbols[j]);
            if s[i][j] == s[i + 1][j + 1] + r {
                let edit = (x.symbols[i] != y.symbols[j]).then(|| SeqEdit::Relabel {
                    position: i + 1,
                    label: y.symbols[j].clone(),
                });
                steps.push((edit, r));
                i += 1;
                j += 1;
                continue;
            }
        }
        if i < n {
            let d = c.indel(&x.symbols[i]);
            if s[i][j] == s[i + 1][j] + d {
                steps.push((Some(SeqEdit::Delete { position: i + 1 }), d));
                i += 1;
                continue;
            }
        }
        let d = c.indel(&y.symbols[j]);
        steps.push((
            Some(SeqEdit::Insert {
                position: i + 1,
                label: y.symbols[j].clone(),
            }),
            d,
        ));
        j += 1;
    }
    // Accumulating from the back repeats the table's additions exactly.
    let mut total = 0.0;
    let mut edits = Vec::new();
    for (edit, cost) in steps.into_iter().rev() {
        total += cost;
        if let Some(e) = edit {
            edits.push(Edit::Seq(e));
        }
    }
    debug_assert_eq!(total, s[0][0]);
    (
        s[0][0],
        EditScript {
            edits,
            total_cost: total,
        },
    )
}

fn out_of_range(e: &SeqEdit, len: usize) -> Error {
    Error::Address(format!(
        "{e} is out of range for a sequence of length {len}"
    ))
}

pub(super) fn apply(x: &SequenceState, e: &SeqEdit) -> Result<SequenceState> {
    let len = x.len();
    let mut out = x.clone();
    match e {
        SeqEdit::Insert { position, label } => {
            if *position == 0 || *position > len + 1 {
                return Err(out_of_range(e, len));
            }
            out.symbols.insert(position - 1, label.clone());
        }
        SeqEdit::Delete { position } => {
            if *position == 0 || *position > len {
                return Err(out_of_range(e, len));
            }
            out.symbols.remove(position - 1);
        }
        SeqEdit::Relabel { position, label } => {
            if *position == 0 || *position > len {
                return Err(out_of_range(e, len));
            }
            out.symbols[position - 1] = label.clone();
        }
    }
    Ok(out)
}

pub(super) fn invert(e: &SeqEdit, x: &SequenceState) -> Result<SeqEdit> {
    apply(x, e)?;
    Ok(match e {
        SeqEdit::Insert { position, .. } => SeqEdit::Delete {
            position: *position,
        },
        SeqEdit::Delete { position } => SeqEdit::Insert {
            position: *position,
            label: x.symbols[position - 1].clone(),
        },
        SeqEdit::Relabel { position, .. } => SeqEdit::Relabel {
            position: *position,
            label: x.symbols[position - 1].clone(),
        },
    })
}

pub(super) fn cost(x: &SequenceState, e: &SeqEdit, c: &CostModel) -> Result<f64> {
    apply(x, e)?;
    Ok(match e {
        SeqEdit::Insert { label, .. } => c.indel(label),
        SeqEdit::Delete { position } => c.indel(&x.symbols[position - 1]),
        SeqEdit::Relabel { position, label } => c.relabel(&x.symbols[position - 1], label),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::editdist::{apply_edit, invert_edit};
    use crate::states::{label, State};
    use proptest::prelude::*;

    fn s(text: &str) -> SequenceState {
        SequenceState::from_chars(text)
    }

    fn d(a: &str, b: &str) -> f64 {
        seq_distance_value(&s(a), &s(b), &CostModel::unit())
    }

    #[test]
    fn distances_from_the_worked_example() {
        assert_eq!(d("ab", "ab"), 0.0);
        assert_eq!(d("ab", "abc"), 1.0);
        assert_eq!(d("ab", "bbc"), 2.0);
        assert_eq!(d("", "abc"), 3.0);
    }

    #[test]
    fn ties_resolve_at_the_front() {
        let (dist, script) = seq_distance(&s("ab"), &s("aac"), &CostModel::unit());
        assert_eq!(dist, 2.0);
        let shown: Vec<String> = script.edits.iter().map(|e| e.to_string()).collect();
        assert_eq!(shown, ["ins_{3,c}", "rep_{2,a}"]);
        let (_, script) = seq_distance(&s("ab"), &s("bbc"), &CostModel::unit());
        let shown: Vec<String> = script.edits.iter().map(|e| e.to_string()).collect();
        assert_eq!(shown, ["ins_{3,c}", "rep_{1,b}"]);
    }

    #[test]
    fn apply_examples() {
        let ab = State::seq("ab");
        let ins = Edit::Seq(SeqEdit::Insert {
            position: 3,
            label: label("c"),
        });
        assert_eq!(apply_edit(&ab, &ins).unwrap(), State::seq("abc"));
        let rep = Edit::Seq(SeqEdit::Relabel {
            position: 2,
            label: label("a"),
        });
        assert_eq!(apply_edit(&ab, &rep).unwrap(), State::seq("aa"));
        let bad = Edit::Seq(SeqEdit::Delete { position: 3 });
        assert!(matches!(apply_edit(&ab, &bad), Err(Error::Address(_))));
    }

    #[test]
    fn invert_examples() {
        let ab = State::seq("ab");
        let ins = Edit::Seq(SeqEdit::Insert {
            position: 3,
            label: label("c"),
        });
        assert_eq!(
            invert_edit(&ins, &ab).unwrap(),
            Edit::Seq(SeqEdit::Delete { position: 3 })
        );
        let del = Edit::Seq(SeqEdit::Delete { position: 2 });
        assert_eq!(
            invert_edit(&del, &ab).unwrap(),
            Edit::Seq(SeqEdit::Insert {
                position: 2,
                label: label("b")
            })
        );
    }

    #[test]
    fn weighted_costs() {
        let mut c = CostModel::unit();
        c.indel_by_label.insert(label("x"), 5.0);
        // deleting x costs 5, so delete a and relabel x instead
        assert_eq!(seq_distance_value(&s("ax"), &s("a"), &c), 2.0);
        assert_eq!(seq_distance_value(&s("x"), &s(""), &c), 5.0);
        assert_eq!(seq_distance_value(&s("ax"), &s("ab"), &c), 1.0);
    }

    proptest! {
        #[test]
        fn script_replays_and_costs_match(a in "[abc]{0,7}", b in "[abc]{0,7}") {
            let c = CostModel::unit();
            let (dist, script) = seq_distance(&s(&a), &s(&b), &c);
            prop_assert_eq!(dist, seq_distance_value(&s(&a), &s(&b), &c));
            prop_assert_eq!(script.total_cost, dist);
            prop_assert_eq!(script.apply(&State::seq(&a)).unwrap(), State::seq(&b));
            // each edit is also valid on the source on its own
            for e in &script.edits {
                prop_assert!(apply_edit(&State::seq(&a), e).is_ok());
            }
        }

        #[test]
        fn invert_round_trips(a in "[abc]{1,6}", pos in 1usize..8, sym in "[abcd]", kind in 0u8..3) {
            let x = State::seq(&a);
            let e = Edit::Seq(match kind {
                0 => SeqEdit::Insert { position: pos.min(a.len() + 1), label: label(&sym) },
                1 => SeqEdit::Delete { position: pos.min(a.len()) },
                _ => SeqEdit::Relabel { position: pos.min(a.len()), label: label(&sym) },
            });
            let y = apply_edit(&x, &e).unwrap();
            let inv = invert_edit(&e, &x).unwrap();
            prop_assert_eq!(apply_edit(&y, &inv).unwrap(), x);
        }
    }
}
