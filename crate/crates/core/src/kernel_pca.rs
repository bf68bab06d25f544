//! Kernel PCA: double-centering, eigendecomposition, projection.
//!
//! The kernel matrix is centered, eigendecomposed, and the top components
//! become coordinates scaled by √λ. The `raw` transform feeds the distance
//! matrix in directly; `mds` applies the classical multidimensional-scaling
//! map −½·D∘D first, which is exact on Euclidean distance matrices.

use std::io::Write;

use crate::eigen::eigendecompose_symmetric;
use crate::error::{Error, Result};
use crate::kernel::{KernelMatrix, PsdMode};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KpcaTransform {
    /// Use the kernel matrix as-is.
    Raw,
    /// Classical MDS: center −½·D∘D.
    Mds,
}

/// Kernel-PCA scores for a dataset.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// n×m score matrix; column j is √λⱼ·vⱼ.
    pub coords: DenseMatrix,
    /// Retained eigenvalues, descending, all positive.
    pub eigenvalues: Vec<f64>,
    /// How many eigenvalues fell below −tol and were discarded.
    pub dropped_negative: usize,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coords.rows()
    }

    pub fn components(&self) -> usize {
        self.coords.cols()
    }
}

/// Double-center a symmetric matrix:
/// Kc = K − (1/n)·1·1ᵀK − (1/n)·K·1·1ᵀ + (1/n²)·1·1ᵀK·1·1ᵀ.
pub fn center_kernel(k: &DenseMatrix) -> Result<DenseMatrix> {
    let n = k.rows();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let inv = 1.0 / n as f64;
    let mut row_mean = vec![0.0f64; n];
    let mut col_mean = vec![0.0f64; n];
    let mut grand = 0.0f64;
    for (i, rm) in row_mean.iter_mut().enumerate() {
        for (j, cm) in col_mean.iter_mut().enumerate() {
            let v = k.get(i, j);
            *rm += v;
            *cm += v;
            grand += v;
        }
    }
    for m in row_mean.iter_mut() {
        *m *= inv;
    }
    for m in col_mean.iter_mut() {
        *m *= inv;
    }
    grand *= inv * inv;

    let mut out = DenseMatrix::zeros(n, n);
    for (i, rm) in row_mean.iter().enumerate() {
        for (j, cm) in col_mean.iter().enumerate() {
            out.set(i, j, k.get(i, j) - rm - cm + grand);
        }
    }
    Ok(out)
}

/// Project a kernel matrix to an m-dimensional embedding.
///
/// Under `Clip` the eigenvalues at or below tol = 1e-10·λ₁ are discarded;
/// under `Shift` the input is expected to already be PSD and
/// `dropped_negative` stays 0. Returns [`Error::DegenerateKernel`] when no
/// positive eigenvalue remains (the caller may fall back to the `mds`
/// transform).
pub fn project(
    kernel: &KernelMatrix,
    components: usize,
    _mode: PsdMode,
    transform: KpcaTransform,
) -> Result<Embedding> {
    if components < 1 {
        return Err(Error::InvalidComponents(components));
    }
    let n = kernel.n();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }

    let base = match transform {
        KpcaTransform::Raw => kernel.data().clone(),
        KpcaTransform::Mds => {
            let mut m = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let d = kernel.get(i, j);
                    m.set(i, j, -0.5 * d * d);
                }
            }
            m
        }
    };
    let centered = center_kernel(&base)?;
    let eig = eigendecompose_symmetric(&centered)?;

    // Degenerate when the top eigenvalue is zero (or rounding noise)
    // relative to the dominant eigenvalue magnitude. Raw distance matrices
    // land here: metrics of negative type center to a NSD operator.
    let lambda_max = eig.values.first().copied().unwrap_or(0.0);
    let lambda_min = eig.values.last().copied().unwrap_or(0.0);
    let magnitude = lambda_max.abs().max(lambda_min.abs());
    if lambda_max <= 1e-12 * magnitude {
        return Err(Error::DegenerateKernel);
    }
    let tol = 1e-10 * lambda_max;
    let positive = eig.values.iter().filter(|&&l| l > tol).count();
    let dropped_negative = eig.values.iter().filter(|&&l| l < -tol).count();
    let retained = components.min(positive);

    let mut coords = DenseMatrix::zeros(n, retained);
    for j in 0..retained {
        let scale = eig.values[j].sqrt();
        for i in 0..n {
            coords.set(i, j, scale * eig.vectors.get(i, j));
        }
    }
    Ok(Embedding {
        coords,
        eigenvalues: eig.values[..retained].to_vec(),
        dropped_negative,
    })
}

/// TSV export: header `id, c1..cm`, one row per sample.
pub fn write_embedding_tsv<W: Write>(
    w: &mut W,
    ids: &[String],
    embedding: &Embedding,
) -> Result<()> {
    write!(w, "id")?;
    for j in 0..embedding.components() {
        write!(w, "\tc{}", j + 1)?;
    }
    writeln!(w)?;
    for (i, id) in ids.iter().enumerate() {
        write!(w, "{id}")?;
        for &v in embedding.coords.row(i) {
            write!(w, "\t{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Sidecar CSV with the retained eigenvalue spectrum.
pub fn write_eigenvalues_csv<W: Write>(w: &mut W, embedding: &Embedding) -> Result<()> {
    writeln!(w, "component,eigenvalue")?;
    for (j, l) in embedding.eigenvalues.iter().enumerate() {
        writeln!(w, "{},{l}", j + 1)?;
    }
    Ok(())
}
