//! Pairwise kernel-matrix construction and PSD adjustment.
//!
//! The hyperboloid kernel evaluates the hyperbolic distance between the
//! lifted spectra of every pair; the Euclidean kind is the plain distance
//! baseline. Only the upper triangle is computed and then mirrored, so the
//! matrix is symmetric bit-for-bit and the result does not depend on the
//! worker count.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::eigen::eigendecompose_symmetric;
use crate::error::{Error, Result};
use crate::hyperboloid::{distance, lift, HyperboloidPoint};
use crate::matrix::{read_f64, read_u64, DenseMatrix};

const KERNEL_MAGIC: &[u8; 4] = b"HKM1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdMode {
    /// Leave the matrix alone; kernel PCA discards negative eigenvalues.
    Clip,
    /// Add |λ_min| + ε to the diagonal when λ_min < 0.
    Shift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    HyperboloidDistance,
    EuclideanDistance,
    Adjusted(PsdMode),
}

impl KernelKind {
    fn code(self) -> u8 {
        match self {
            KernelKind::HyperboloidDistance => 0,
            KernelKind::EuclideanDistance => 1,
            KernelKind::Adjusted(PsdMode::Clip) => 2,
            KernelKind::Adjusted(PsdMode::Shift) => 3,
        }
    }

    fn from_code(code: u8) -> Result<KernelKind> {
        match code {
            0 => Ok(KernelKind::HyperboloidDistance),
            1 => Ok(KernelKind::EuclideanDistance),
            2 => Ok(KernelKind::Adjusted(PsdMode::Clip)),
            3 => Ok(KernelKind::Adjusted(PsdMode::Shift)),
            other => Err(Error::Numerical(format!(
                "unknown kernel kind code {other}"
            ))),
        }
    }
}

/// Dense symmetric n×n matrix of pairwise distances/kernel values.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    data: DenseMatrix,
    kind: KernelKind,
    diag_shift: f64,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.data.rows()
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn diag_shift(&self) -> f64 {
        self.diag_shift
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data.get(i, j)
    }

    pub fn data(&self) -> &DenseMatrix {
        &self.data
    }

    /// Assemble from a precomputed symmetric matrix.
    pub fn from_parts(
        data: DenseMatrix,
        kind: KernelKind,
        diag_shift: f64,
    ) -> Result<KernelMatrix> {
        if data.rows() != data.cols() {
            return Err(Error::DimensionMismatch(data.rows(), data.cols()));
        }
        Ok(KernelMatrix {
            data,
            kind,
            diag_shift,
        })
    }

    /// Write the `HKM1` binary layout: magic, u64 LE n, u8 kind code,
    /// f64 LE diag_shift, then n·n row-major f64 LE values.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(KERNEL_MAGIC)?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        w.write_all(&[self.kind.code()])?;
        w.write_all(&self.diag_shift.to_le_bytes())?;
        for v in self.data.data() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<KernelMatrix> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != KERNEL_MAGIC {
            return Err(Error::Numerical("not an HKM1 kernel file".into()));
        }
        let n = read_u64(r)? as usize;
        let mut code = [0u8; 1];
        r.read_exact(&mut code)?;
        let kind = KernelKind::from_code(code[0])?;
        let diag_shift = read_f64(r)?;
        let mut data = DenseMatrix::zeros(n, n);
        for v in data.data_mut() {
            *v = read_f64(r)?;
        }
        Ok(KernelMatrix {
            data,
            kind,
            diag_shift,
        })
    }

    /// CSV export carrying 17 significant digits, enough to round-trip f64.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        for i in 0..self.n() {
            let row = self.data.row(i);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(w, ",")?;
                }
                write!(w, "{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Build the pairwise kernel matrix over spectrum rows.
///
/// Rows of the upper triangle are computed in parallel (one writer per row)
/// and mirrored afterwards; the diagonal is zero.
pub fn kernel_matrix(spectra: &DenseMatrix, kind: KernelKind) -> Result<KernelMatrix> {
    let n = spectra.rows();
    match kind {
        KernelKind::HyperboloidDistance => {
            let points: Vec<HyperboloidPoint> = (0..n)
                .into_par_iter()
                .map(|i| lift(spectra.row(i)))
                .collect::<Result<_>>()?;
            build_symmetric(n, kind, |i, j| {
                distance(&points[i], &points[j]).map_err(|e| match e {
                    Error::Domain { value, .. } => Error::Domain {
                        value,
                        pair: Some((i, j)),
                    },
                    other => other,
                })
            })
        }
        KernelKind::EuclideanDistance => {
            for i in 0..n {
                if spectra.row(i).iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidVector);
                }
            }
            build_symmetric(n, kind, |i, j| {
                Ok(euclidean_distance(spectra.row(i), spectra.row(j)))
            })
        }
        KernelKind::Adjusted(_) => Err(Error::Numerical(
            "adjusted kernels are produced by psd_adjust, not kernel_matrix".into(),
        )),
    }
}

fn build_symmetric<F>(n: usize, kind: KernelKind, cell: F) -> Result<KernelMatrix>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let mut data = DenseMatrix::zeros(n, n);
    data.par_rows_mut()
        .enumerate()
        .try_for_each(|(i, row)| -> Result<()> {
            for (j, slot) in row.iter_mut().enumerate().skip(i + 1) {
                *slot = cell(i, j)?;
            }
            Ok(())
        })?;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = data.get(i, j);
            data.set(j, i, v);
        }
    }
    Ok(KernelMatrix {
        data,
        kind,
        diag_shift: 0.0,
    })
}

fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Make the kernel usable as a PSD operator downstream.
///
/// Shift mode adds |λ_min| + ε to every diagonal entry when λ_min < 0,
/// leaving the off-diagonal entries untouched; with ε unset it defaults to
/// 1e-9·max(1, |λ_min|). Clip mode only tags the matrix — kernel PCA drops
/// the negative eigenvalues itself.
pub fn psd_adjust(k: &KernelMatrix, mode: PsdMode, epsilon: Option<f64>) -> Result<KernelMatrix> {
    match mode {
        PsdMode::Clip => Ok(KernelMatrix {
            data: k.data.clone(),
            kind: KernelKind::Adjusted(PsdMode::Clip),
            diag_shift: k.diag_shift,
        }),
        PsdMode::Shift => {
            let eig = eigendecompose_symmetric(&k.data)?;
            let lambda_min = eig.values.last().copied().unwrap_or(0.0);
            if lambda_min >= 0.0 {
                return Ok(k.clone());
            }
            let eps = epsilon.unwrap_or_else(|| 1e-9 * f64::max(1.0, lambda_min.abs()));
            let shift = lambda_min.abs() + eps;
            let mut data = k.data.clone();
            for i in 0..data.rows() {
                let v = data.get(i, i) + shift;
                data.set(i, i, v);
            }
            Ok(KernelMatrix {
                data,
                kind: KernelKind::Adjusted(PsdMode::Shift),
                diag_shift: k.diag_shift + shift,
            })
        }
    }
}
