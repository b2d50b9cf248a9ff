//! The two-trace example: students went a -> aac and b -> bbc, and a new
//! student sits at ab.

use chf::policies::{chf_hint, FitOptions, KernelParams, Model};
use chf::space::Correction;
use chf::states::{State, StateKind};
use chf::traces::Trace;

fn main() -> chf::Result<()> {
    let traces = vec![
        Trace::new("1", vec![State::seq("a"), State::seq("aac")]),
        Trace::new("2", vec![State::seq("b"), State::seq("bbc")]),
    ];
    let exact = FitOptions {
        correction: Correction::Off,
        final_self_pairs: false,
        kernel: KernelParams::new(1.0, 0.0),
        m_max: None,
        ..FitOptions::default()
    };
    for (name, opts) in [
        ("hand-computable", exact),
        ("default", FitOptions::default()),
    ] {
        let model = Model::from_traces(StateKind::Sequence, traces.clone(), &opts)?;
        let r = chf_hint(&model, &State::seq("ab"))?;
        println!(
            "{name}: hint {}",
            r.edit.map(|e| e.to_string()).unwrap_or("none".into())
        );
        for c in &r.candidates {
            println!("  {:<12} score {:.4}", c.edit.to_string(), c.score);
        }
    }
    Ok(())
}
