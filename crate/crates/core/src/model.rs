//! Model persistence. A model file is a JSON envelope holding the SHA-256 of
//! its body next to the body itself, so corruption is caught on load.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricEigen};
use crate::policies::{FitOptions, Model};
use crate::states::StateKind;
use crate::traces::Trace;

/// Bumped whenever the body layout changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Body {
    format: u32,
    kind: StateKind,
    /// Digest of the dataset the model was fitted on.
    dataset_sha256: String,
    options: FitOptions,
    traces: Vec<Trace>,
    /// Raw edit distances between the flattened trace states.
    distances: Matrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
    /// Kernel matrix over the pair sources, for inspection.
    kernel: Matrix,
}

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    sha256: &'a str,
    body: &'a RawValue,
}

#[derive(Deserialize)]
struct EnvelopeIn<'a> {
    sha256: String,
    #[serde(borrow)]
    body: &'a RawValue,
}

/// A model read back from disk.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub model: Model,
    pub dataset_sha256: String,
}

/// Serializes a model. The output depends only on the model, so refitting
/// the same data gives the same bytes.
pub fn encode(model: &Model, dataset_sha256: &str) -> String {
    let eigen = model.space().eigen();
    let body = Body {
        format: FORMAT_VERSION,
        kind: model.kind(),
        dataset_sha256: dataset_sha256.to_string(),
        options: model.options().clone(),
        traces: model.traces().to_vec(),
        distances: model.distances().clone(),
        eigenvalues: eigen.values.clone(),
        eigenvectors: eigen.vectors.clone(),
        kernel: model.system().kernel().clone(),
    };
    let body = serde_json::to_string(&body).expect("model bodies always serialize");
    let sha = hex::encode(Sha256::digest(body.as_bytes()));
    let raw = RawValue::from_string(body).expect("serde_json output is valid JSON");
    let mut out = serde_json::to_string(&EnvelopeOut {
        sha256: &sha,
        body: &raw,
    })
    .expect("envelope serializes");
    out.push('\n');
    out
}

/// Parses and verifies a model file's contents.
pub fn decode(text: &str) -> Result<Loaded> {
    let env: EnvelopeIn = serde_json::from_str(text)?;
    let found = hex::encode(Sha256::digest(env.body.get().as_bytes()));
    if found != env.sha256 {
        return Err(Error::Checksum {
            expected: env.sha256,
            found,
        });
    }
    let body: Body = serde_json::from_str(env.body.get())?;
    if body.format != FORMAT_VERSION {
        return Err(Error::Data(format!(
            "model format {} is not supported (expected {FORMAT_VERSION})",
            body.format
        )));
    }
    let m = body.eigenvalues.len();
    for (name, mat) in [
        ("distances", &body.distances),
        ("eigenvectors", &body.eigenvectors),
    ] {
        if mat.rows() != m
            || mat.cols() != m
            || mat.to_rows().iter().map(Vec::len).sum::<usize>() != m * m
        {
            return Err(Error::Data(format!(
                "model {name} matrix does not have {m}x{m} entries"
            )));
        }
    }
    let eigen = SymmetricEigen {
        values: body.eigenvalues,
        vectors: body.eigenvectors,
        sweeps: 0,
    };
    let model = Model::from_distances(
        body.kind,
        body.traces,
        body.distances,
        Some(eigen),
        &body.options,
    )?;
    Ok(Loaded {
        model,
        dataset_sha256: body.dataset_sha256,
    })
}

pub fn save(model: &Model, dataset_sha256: &str, path: &Path) -> Result<()> {
    std::fs::write(path, encode(model, dataset_sha256))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Loaded> {
    decode(&std::fs::read_to_string(path)?)
}
