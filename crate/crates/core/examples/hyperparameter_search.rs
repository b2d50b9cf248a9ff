//! Random log-uniform search over the kernel length scale and noise.

use chf::eval::{hyper_search, synthetic_corpus, Corpus, LogRange, SyntheticConfig};
use chf::policies::FitOptions;

fn main() -> chf::Result<()> {
    let data = synthetic_corpus(&SyntheticConfig::default())?;
    let corpus = Corpus::new(&data, &FitOptions::default())?;
    let r = hyper_search(
        &corpus,
        LogRange::new(0.1, 10.0)?,
        LogRange::new(1e-3, 1.0)?,
        12,
        42,
    )?;
    for t in &r.trials {
        println!(
            "psi {:>7.3}  sigma {:>7.4}  next rmse {:.4}",
            t.kernel.length_scale, t.kernel.noise_std, t.next_rmse
        );
    }
    println!(
        "best: psi {:.3}, sigma {:.4} ({:.4})",
        r.best.length_scale, r.best.noise_std, r.best_rmse
    );
    Ok(())
}
