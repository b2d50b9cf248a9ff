//! Edit distance space: double centering, eigenvalue correction and
//! out-of-sample extension of queries into the corrected embedding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, jacobi_eigen, Matrix, SymmetricEigen};

/// Relative eigenvalue threshold for rank decisions.
pub const RANK_EPS: f64 = 1e-10;

/// How negative eigenvalues of the centered Gram matrix are repaired.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    /// Negative eigenvalues are set to zero.
    #[default]
    Clip,
    /// Negative eigenvalues are replaced by their magnitude.
    Flip,
    /// All eigenvalues are shifted by the magnitude of the smallest one.
    Shift,
    /// No correction; distances stay raw and may be non-Euclidean.
    Off,
}

impl std::str::FromStr for Correction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clip" => Ok(Correction::Clip),
            "flip" => Ok(Correction::Flip),
            "shift" => Ok(Correction::Shift),
            "off" => Ok(Correction::Off),
            _ => Err(Error::Usage(format!(
                "unknown correction mode {s:?} (clip, flip, shift, off)"
            ))),
        }
    }
}

/// `G = -1/2 J D² J` with `J = I - 11ᵀ/M`.
pub fn center(d2: &Matrix) -> Matrix {
    let (means, grand) = column_means(d2);
    Matrix::from_fn(d2.rows(), d2.cols(), |i, j| {
        -0.5 * (d2[(i, j)] - means[i] - means[j] + grand)
    })
}

fn column_means(d2: &Matrix) -> (Vec<f64>, f64) {
    let n = d2.rows();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let means: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| d2[(i, j)]).sum::<f64>() / n as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / n as f64;
    (means, grand)
}

fn correct(mode: Correction, values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(0.0f64, f64::min);
    values
        .iter()
        .map(|&v| match mode {
            Correction::Clip => v.max(0.0),
            Correction::Flip => v.abs(),
            Correction::Shift => v - min,
            Correction::Off => v,
        })
        .collect()
}

/// An eigen-decomposed, eigenvalue-corrected Gram representation of a set of
/// states given their pairwise squared distances.
#[derive(Debug, Clone)]
pub struct CorrectedSpace {
    mode: Correction,
    d2: Matrix,
    col_means: Vec<f64>,
    grand_mean: f64,
    eigen: SymmetricEigen,
    corrected: Vec<f64>,
    gram: Matrix,
    eps: f64,
}

impl CorrectedSpace {
    /// Builds the space from pairwise (unsquared) distances.
    pub fn from_distances(d: &Matrix, mode: Correction) -> Result<Self> {
        let d2 = Matrix::from_fn(d.rows(), d.cols(), |i, j| d[(i, j)] * d[(i, j)]);
        Self::from_sq_distances(d2, mode)
    }

    pub fn from_sq_distances(d2: Matrix, mode: Correction) -> Result<Self> {
        validate_sq_distances(&d2)?;
        let eigen = jacobi_eigen(&center(&d2)).map_err(|e| e.in_stage("eigendecomposition"))?;
        Ok(Self::from_parts(d2, eigen, mode))
    }

    /// Reassembles a space from a stored eigendecomposition.
    pub fn from_parts(d2: Matrix, eigen: SymmetricEigen, mode: Correction) -> Self {
        let (col_means, grand_mean) = column_means(&d2);
        let corrected = correct(mode, &eigen.values);
        let gram = eigen.reconstruct_with(&corrected);
        let max_abs = eigen.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        CorrectedSpace {
            mode,
            d2,
            col_means,
            grand_mean,
            eigen,
            corrected,
            gram,
            eps: RANK_EPS * max_abs,
        }
    }

    /// The same decomposition under a different correction mode.
    pub fn with_mode(&self, mode: Correction) -> Self {
        Self::from_parts(self.d2.clone(), self.eigen.clone(), mode)
    }

    pub fn len(&self) -> usize {
        self.d2.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.d2.rows() == 0
    }

    pub fn mode(&self) -> Correction {
        self.mode
    }

    pub fn sq_distances(&self) -> &Matrix {
        &self.d2
    }

    /// Raw eigenvalues of the centered Gram matrix, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn corrected_eigenvalues(&self) -> &[f64] {
        &self.corrected
    }

    pub fn eigen(&self) -> &SymmetricEigen {
        &self.eigen
    }

    /// Corrected Gram matrix `G⁺ = U Λ⁺ Uᵀ`.
    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn corrected_sqdist(&self, i: usize, j: usize) -> f64 {
        self.gram[(i, i)] + self.gram[(j, j)] - 2.0 * self.gram[(i, j)]
    }

    pub fn corrected_sq_distances(&self) -> Matrix {
        Matrix::from_fn(self.len(), self.len(), |i, j| {
            if i == j {
                0.0
            } else {
                self.corrected_sqdist(i, j)
            }
        })
    }

    /// Largest raw eigenvalue magnitude below which eigenvalues count as zero.
    pub fn rank_threshold(&self) -> f64 {
        self.eps
    }

    fn shift(&self) -> f64 {
        -self.eigen.values.iter().copied().fold(0.0f64, f64::min)
    }

    /// Coordinates `√λ⁺_k u_k` along the `dims` largest corrected eigenvalues.
    pub fn coordinates(&self, dims: usize) -> Vec<Vec<f64>> {
        let mut order: Vec<usize> = (0..self.corrected.len()).collect();
        order.sort_by(|&a, &b| {
            self.corrected[b]
                .total_cmp(&self.corrected[a])
                .then(a.cmp(&b))
        });
        order.truncate(dims);
        (0..self.len())
            .map(|i| {
                order
                    .iter()
                    .map(|&k| self.corrected[k].max(0.0).sqrt() * self.eigen.vectors[(i, k)])
                    .collect()
            })
            .collect()
    }

    fn centered_cross(&self, d2: &[f64]) -> (Vec<f64>, f64) {
        let mean = d2.iter().sum::<f64>() / d2.len().max(1) as f64;
        let g = d2
            .iter()
            .zip(&self.col_means)
            .map(|(&d, &cm)| -0.5 * (d - mean - cm + self.grand_mean))
            .collect();
        (g, mean)
    }

    /// Embeds a query given its squared raw distances to every state.
    ///
    /// The query's centered cross-Gram is corrected component-wise in the
    /// eigenbasis of the training states while its own centered norm is kept,
    /// so corrected query distances deviate from raw ones only as much as the
    /// correction moved the training states. A query at distance zero from a
    /// state is identified with that state.
    pub fn extend(&self, d2: &[f64]) -> Result<QueryEmbedding> {
        Ok(self
            .extend_many(&[d2.to_vec()], &Matrix::zeros(1, 1))?
            .into_single())
    }

    /// Embeds several queries jointly. `between` holds their pairwise squared
    /// raw distances.
    pub fn extend_many(&self, d2: &[Vec<f64>], between: &Matrix) -> Result<QuerySet> {
        let m = self.len();
        let q = d2.len();
        if between.rows() != q || between.cols() != q {
            return Err(Error::Usage(
                "query distance matrix has the wrong shape".into(),
            ));
        }
        for row in d2 {
            if row.len() != m {
                return Err(Error::Usage(format!(
                    "query has {} distances, the space has {m} states",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Data(
                    "query distances must be finite and non-negative".into(),
                ));
            }
        }
        let snapped: Vec<Option<usize>> = d2
            .iter()
            .map(|row| row.iter().position(|&v| v == 0.0))
            .collect();
        let centered: Vec<(Vec<f64>, f64)> =
            d2.iter().map(|row| self.centered_cross(row)).collect();
        // Raw centered inner products between the queries.
        let raw_between = Matrix::from_fn(q, q, |a, b| {
            -0.5 * (between[(a, b)] - centered[a].1 - centered[b].1 + self.grand_mean)
        });

        // Each spectral component of a query's cross-Gram is scaled the way its
        // eigenvalue was corrected; the queries' own inner products stay raw.
        let active: Vec<usize> = (0..self.eigen.values.len())
            .filter(|&k| {
                self.eigen.values[k].abs() > self.eps && self.corrected[k] != self.eigen.values[k]
            })
            .collect();
        let mut gram = raw_between;
        let mut cross: Vec<Vec<f64>> = centered.into_iter().map(|(g, _)| g).collect();
        if self.mode == Correction::Shift {
            // The shifted Gram adds `s·I`; a query is a fresh point of that
            // augmented space.
            let s = self.shift();
            for a in 0..q {
                gram[(a, a)] += s;
            }
        } else {
            for c in &mut cross {
                let proj: Vec<(usize, f64)> = active
                    .iter()
                    .map(|&k| {
                        (
                            k,
                            dot(&self.eigen.vectors.column(k), c)
                                * (self.corrected[k] / self.eigen.values[k] - 1.0),
                        )
                    })
                    .collect();
                for (i, ci) in c.iter_mut().enumerate() {
                    *ci += proj
                        .iter()
                        .map(|&(k, p)| p * self.eigen.vectors[(i, k)])
                        .sum::<f64>();
                }
            }
        }
        // Queries identical to a state take that state's exact representation.
        for a in 0..q {
            if let Some(j) = snapped[a] {
                cross[a] = self.gram.row(j).to_vec();
            }
        }
        for a in 0..q {
            for b in 0..q {
                gram[(a, b)] = match (snapped[a], snapped[b]) {
                    (Some(i), Some(j)) => self.gram[(i, j)],
                    (Some(i), None) => cross[b][i],
                    (None, Some(j)) => cross[a][j],
                    (None, None) => gram[(a, b)],
                };
            }
        }
        Ok(QuerySet {
            cross,
            gram,
            snapped,
        })
    }

    /// `‖Σ c_i φ(x_i) + Σ e_a φ(q_a)‖²` for training coefficients `c` and
    /// query coefficients `e`.
    pub fn combo_sqnorm(&self, queries: &QuerySet, c: &[f64], e: &[f64]) -> f64 {
        let mut total = self.gram.bilinear(c, c);
        for (a, &ea) in e.iter().enumerate() {
            if ea == 0.0 {
                continue;
            }
            total += 2.0 * ea * dot(&queries.cross[a], c);
            for (b, &eb) in e.iter().enumerate() {
                total += ea * eb * queries.gram[(a, b)];
            }
        }
        total
    }

    /// Squared distance between two weighted combinations of the states and
    /// the queries.
    pub fn combo_sqdist(
        &self,
        queries: &QuerySet,
        a: (&[f64], &[f64]),
        b: (&[f64], &[f64]),
    ) -> f64 {
        let c: Vec<f64> = a.0.iter().zip(b.0).map(|(x, y)| x - y).collect();
        let e: Vec<f64> = a.1.iter().zip(b.1).map(|(x, y)| x - y).collect();
        self.combo_sqnorm(queries, &c, &e)
    }
}

fn validate_sq_distances(d2: &Matrix) -> Result<()> {
    let n = d2.rows();
    if n != d2.cols() {
        return Err(Error::Data(format!(
            "distance matrix is {}x{}, not square",
            n,
            d2.cols()
        )));
    }
    for i in 0..n {
        if d2[(i, i)] != 0.0 {
            return Err(Error::Data(format!(
                "distance matrix has non-zero diagonal entry at {i}"
            )));
        }
        for j in 0..n {
            let v = d2[(i, j)];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Data(format!(
                    "distance ({i}, {j}) = {v} is not finite and non-negative"
                )));
            }
        }
    }
    let scale = d2.frobenius_norm().max(1.0);
    if d2.max_abs_asymmetry() > 1e-12 * scale {
        return Err(Error::Data("distance matrix is not symmetric".into()));
    }
    Ok(())
}

/// Embedded queries: cross inner products with every state and the inner
/// products among the queries.
#[derive(Debug, Clone)]
pub struct QuerySet {
    pub cross: Vec<Vec<f64>>,
    pub gram: Matrix,
    /// The state each query coincides with, if any.
    pub snapped: Vec<Option<usize>>,
}

impl QuerySet {
    fn into_single(self) -> QueryEmbedding {
        QueryEmbedding {
            self_inner: self.gram[(0, 0)],
            cross_gram: self.cross.into_iter().next().expect("one query"),
            snapped: self.snapped[0],
        }
    }

    pub fn len(&self) -> usize {
        self.cross.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cross.is_empty()
    }

    /// Corrected squared distance from query `a` to state `i`.
    pub fn sqdist_to_state(&self, space: &CorrectedSpace, a: usize, i: usize) -> f64 {
        self.gram[(a, a)] + space.gram[(i, i)] - 2.0 * self.cross[a][i]
    }

    /// Corrected squared distance between queries `a` and `b`.
    pub fn sqdist_between(&self, a: usize, b: usize) -> f64 {
        self.gram[(a, a)] + self.gram[(b, b)] - 2.0 * self.gram[(a, b)]
    }
}

/// A single embedded query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryEmbedding {
    pub cross_gram: Vec<f64>,
    pub self_inner: f64,
    pub snapped: Option<usize>,
}

impl QueryEmbedding {
    pub fn sqdist_to_state(&self, space: &CorrectedSpace, i: usize) -> f64 {
        self.self_inner + space.gram[(i, i)] - 2.0 * self.cross_gram[i]
    }

    /// Corrected squared distances to every state.
    pub fn sqdists(&self, space: &CorrectedSpace) -> Vec<f64> {
        (0..space.len())
            .map(|i| self.sqdist_to_state(space, i))
            .collect()
    }

    pub fn as_set(&self) -> QuerySet {
        QuerySet {
            cross: vec![self.cross_gram.clone()],
            gram: Matrix::from_rows(&[vec![self.self_inner]]),
            snapped: vec![self.snapped],
        }
    }
}
