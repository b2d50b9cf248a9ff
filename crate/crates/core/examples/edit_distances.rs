//! Edit distances and optimal edit scripts for strings and trees.

use chf::editdist::{candidate_edits, distance, edit_script, CostModel};
use chf::states::State;

fn main() -> chf::Result<()> {
    let cost = CostModel::unit();
    for (x, y) in [
        (State::seq("kitten"), State::seq("sitting")),
        (State::tree("f(a,b)"), State::tree("f(g(a),c)")),
    ] {
        let script = edit_script(&x, &y, &cost)?;
        println!("{x} -> {y}: distance {}", distance(&x, &y, &cost)?);
        for e in &script.edits {
            println!("  {e}");
        }
        let first: Vec<String> = candidate_edits(&x, &y, &cost)?
            .iter()
            .map(ToString::to_string)
            .collect();
        println!("  possible first steps: {}", first.join(", "));
    }
    Ok(())
}
