//! Embedding edit distances: eigenvalues of the centered Gram matrix, the
//! effect of each correction mode and two-dimensional coordinates.

use chf::editdist::{pairwise_distances, CostModel};
use chf::space::{CorrectedSpace, Correction};
use chf::states::State;

fn main() -> chf::Result<()> {
    let states: Vec<State> = ["a", "ab", "abc", "b", "bbc", "cab"]
        .iter()
        .map(|s| State::seq(s))
        .collect();
    let d = pairwise_distances(&states, &CostModel::unit())?;
    for mode in [
        Correction::Off,
        Correction::Clip,
        Correction::Flip,
        Correction::Shift,
    ] {
        let space = CorrectedSpace::from_distances(&d, mode)?;
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.3}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!(
            "{mode:?}: eigenvalues [{}]",
            fmt(space.corrected_eigenvalues())
        );
        println!(
            "  corrected d(a, cab) = {:.4}",
            space.corrected_sqdist(0, 5).sqrt()
        );
    }
    let space = CorrectedSpace::from_distances(&d, Correction::Clip)?;
    for (s, c) in states.iter().zip(space.coordinates(2)) {
        println!("{s:>4}  ({:+.3}, {:+.3})", c[0], c[1]);
    }
    Ok(())
}
