//! Leave-one-trace-out errors of every prediction scheme on a synthetic
//! corpus, plus agreement with simulated tutor hints.

use chf::eval::{hint_quality, synthetic_corpus, Corpus, Scheme, SyntheticConfig};
use chf::policies::{chf_hint, FitOptions, Model, Policy};
use chf::traces::TutorHint;

fn main() -> chf::Result<()> {
    let mut data = synthetic_corpus(&SyntheticConfig::default())?;
    let opts = FitOptions::default();
    let corpus = Corpus::new(&data, &opts)?;
    println!("{:<22} {:>10} {:>10}", "scheme", "next", "final");
    for s in Scheme::ALL {
        let r = corpus.loo_rmse(s);
        println!(
            "{:<22} {:>10.4} {:>10.4}",
            s.name(),
            r.next.mean,
            r.final_step.mean
        );
    }

    // a "tutor" that agrees with the model's own hints on the first trace
    let model = Model::fit(&data, &opts)?;
    let first = data.traces[0].clone();
    for (step, x) in first.states.iter().enumerate() {
        if let Some(edit) = chf_hint(&model, x)?.edit {
            data.tutor_hints.push(TutorHint {
                trace: first.id.clone(),
                step,
                edit,
                quality: 1.0,
            });
        }
    }
    for p in Policy::ALL {
        let q = hint_quality(&data, p, &opts, 0)?;
        println!(
            "{:<10} median quality {:.2}, hintable {:.2}",
            p.name(),
            q.median,
            q.hintable
        );
    }
    Ok(())
}
