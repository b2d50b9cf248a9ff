//! Kernel regression over training pairs and the conversion of pair weights
//! into state coefficients.

use super::{KernelParams, Model};
use crate::error::Result;
use crate::linalg::{cholesky, cholesky_solve, pinv_symmetric, Matrix};
use crate::space::CorrectedSpace;
use crate::traces::TracePairs;

/// Relative pivot floor for the Cholesky factorization and relative
/// eigenvalue cutoff of the pseudo-inverse fallback.
const SOLVE_EPS: f64 = 1e-10;

/// `exp(-d² / (2ψ²))` for a squared distance `d²`.
pub fn rbf(d2: f64, length_scale: f64) -> f64 {
    (-0.5 * d2.max(0.0) / (length_scale * length_scale)).exp()
}

#[derive(Debug, Clone)]
enum Factor {
    Cholesky(Matrix),
    Pinv(Matrix),
}

/// The kernel matrix over the pair sources and a factorization of
/// `K + σ̃²I`. Falls back to a pseudo-inverse when the system is singular,
/// as it is for duplicate states at zero noise.
#[derive(Debug, Clone)]
pub struct KernelSystem {
    params: KernelParams,
    sources: Vec<usize>,
    kernel: Matrix,
    factor: Factor,
}

impl KernelSystem {
    pub fn new(space: &CorrectedSpace, sources: &[usize], params: KernelParams) -> Result<Self> {
        let m = sources.len();
        let kernel = Matrix::from_fn(m, m, |a, b| {
            if a == b {
                1.0
            } else {
                rbf(
                    space.corrected_sqdist(sources[a], sources[b]),
                    params.length_scale,
                )
            }
        });
        let noise = params.noise_std * params.noise_std;
        let mut system = kernel.clone();
        for a in 0..m {
            system[(a, a)] += noise;
        }
        let factor = match cholesky(&system, SOLVE_EPS) {
            Some(l) => Factor::Cholesky(l),
            None => Factor::Pinv(pinv_symmetric(&system, SOLVE_EPS)?.0),
        };
        Ok(KernelSystem {
            params,
            sources: sources.to_vec(),
            kernel,
            factor,
        })
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    /// State index of each pair source.
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    /// `K`, without the noise term.
    pub fn kernel(&self) -> &Matrix {
        &self.kernel
    }

    pub fn pseudo_inverse(&self) -> bool {
        matches!(self.factor, Factor::Pinv(_))
    }

    /// `(K + σ̃²I)⁻¹ k`.
    pub fn solve(&self, k: &[f64]) -> Vec<f64> {
        match &self.factor {
            Factor::Cholesky(l) => cholesky_solve(l, k),
            Factor::Pinv(p) => p.matvec(k),
        }
    }

    /// Kernel values between a query and every pair source, given the
    /// query's corrected squared distances to all states.
    pub fn kernel_vector(&self, sqdist: &[f64]) -> Vec<f64> {
        self.sources
            .iter()
            .map(|&s| rbf(sqdist[s], self.params.length_scale))
            .collect()
    }
}

/// Kernel values between a query and the pair sources, from the query's
/// corrected squared distances to every training state.
pub fn kernel_vector(model: &Model, sqdist: &[f64]) -> Vec<f64> {
    model.system().kernel_vector(sqdist)
}

/// GPR weights `γ = k (K + σ̃²I)⁻¹` over the training pairs.
pub fn gpr_weights(model: &Model, sqdist: &[f64]) -> Vec<f64> {
    model.system().solve(&kernel_vector(model, sqdist))
}

/// Nadaraya–Watson weights `k / Σk`, or `None` when every kernel value
/// underflows to zero.
pub fn nwr_weights(model: &Model, sqdist: &[f64]) -> Option<Vec<f64>> {
    let k = kernel_vector(model, sqdist);
    let total: f64 = k.iter().sum();
    (total > 0.0).then(|| k.iter().map(|v| v / total).collect())
}

/// Unit weight on the pair whose source is nearest; ties go to the lowest
/// pair index.
pub fn nn_weights(model: &Model, sqdist: &[f64]) -> Vec<f64> {
    let sources = model.system().sources();
    let mut best = 0;
    for (p, &s) in sources.iter().enumerate() {
        if sqdist[s] < sqdist[sources[best]] {
            best = p;
        }
    }
    let mut g = vec![0.0; sources.len()];
    if !g.is_empty() {
        g[best] = 1.0;
    }
    g
}

/// State coefficients `α` such that `Σ γ_p (φ(y_p) − φ(x_p)) = Σ α_i φ(x_i)`:
/// every pair moves its weight from its source to its target, so trace
/// starts get `−γ`, intermediate states `γ_in − γ_out` and ends `γ_in`
/// (a final self-pair cancels).
pub fn alpha_from_gamma(gamma: &[f64], pairs: &TracePairs) -> Vec<f64> {
    let mut alpha = vec![0.0; pairs.states.len()];
    for (&g, &(s, t)) in gamma.iter().zip(&pairs.pairs) {
        alpha[s] -= g;
        alpha[t] += g;
    }
    alpha
}
