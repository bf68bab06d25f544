//! Symmetric eigendecomposition.
//!
//! Householder reduction to tridiagonal form followed by the implicitly
//! shifted QL iteration, the classic EISPACK tred2/tql2 pair. Eigenvalues
//! come back in descending order with orthonormal eigenvector columns and a
//! deterministic sign convention: the largest-magnitude entry of each
//! eigenvector is positive.
//!
//! Internally the accumulating transform is stored transposed (one
//! contiguous slice per column) so the O(n³) rotation and reduction loops
//! stream memory instead of striding it.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Maximum QL sweeps per eigenvalue before giving up.
const MAX_SWEEPS: usize = 60;

/// Relative asymmetry allowed in the input.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, ordered to match `values`.
    pub vectors: DenseMatrix,
}

/// Decompose a symmetric matrix into eigenvalues and orthonormal eigenvectors.
pub fn eigendecompose_symmetric(a: &DenseMatrix) -> Result<SymmetricEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(n, a.cols()));
    }
    check_symmetry(a)?;
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(0, 0),
        });
    }

    // w holds the transform transposed: column c lives at w[c·n .. (c+1)·n].
    // The input is symmetric, so its row-major data already is its own
    // transpose.
    let mut w = a.data().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut w, n, &mut d, &mut e);
    tql2(&mut w, n, &mut d, &mut e)?;

    // Descending eigenvalue order; stable on ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).expect("finite eigenvalues"));

    let mut values = Vec::with_capacity(n);
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(d[src]);
        let column = &w[src * n..(src + 1) * n];
        let mut max_abs = 0.0;
        let mut max_row = 0;
        for (k, &c) in column.iter().enumerate() {
            if c.abs() > max_abs {
                max_abs = c.abs();
                max_row = k;
            }
        }
        let flip = if column[max_row] < 0.0 { -1.0 } else { 1.0 };
        for (k, &c) in column.iter().enumerate() {
            vectors.set(k, dst, flip * c);
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

fn check_symmetry(a: &DenseMatrix) -> Result<()> {
    let n = a.rows();
    if a.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let scale = a
        .data()
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (a.get(i, j) - a.get(j, i)).abs() > SYMMETRY_TOL * scale {
                return Err(Error::Numerical(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Householder reduction to tridiagonal form in `d` (diagonal) and `e`
/// (subdiagonal, e[0] unused), accumulating the transform into `w`.
///
/// `w` stores the transform transposed: entry (row r, column c) of the
/// conceptual orthogonal matrix lives at `w[c·n + r]`, so the hot loops
/// below scan contiguous column slices.
#[allow(clippy::needless_range_loop)]
fn tred2(w: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = w[j * n + (n - 1)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[j * n + (i - 1)];
                w[j * n + i] = 0.0;
                w[i * n + j] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                w[i * n + j] = f;
                let column = &w[j * n..j * n + i];
                let mut g = e[j] + column[j] * f;
                for k in (j + 1)..i {
                    g += column[k] * d[k];
                    e[k] += column[k] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let column = &mut w[j * n..j * n + i];
                for k in j..i {
                    column[k] -= f * e[k] + g * d[k];
                }
                d[j] = column[i - 1];
                w[j * n + i] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..(n - 1) {
        w[i * n + (n - 1)] = w[i * n + i];
        w[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            let (head, tail) = w.split_at_mut((i + 1) * n);
            let next = &tail[..=i];
            for (slot, &value) in d[..=i].iter_mut().zip(next) {
                *slot = value / h;
            }
            for j in 0..=i {
                let column = &mut head[j * n..j * n + i + 1];
                let mut g = 0.0;
                for k in 0..=i {
                    g += next[k] * column[k];
                }
                for k in 0..=i {
                    column[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            w[(i + 1) * n + k] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = w[j * n + (n - 1)];
        w[j * n + (n - 1)] = 0.0;
    }
    w[(n - 1) * n + (n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal form, accumulating
/// eigenvectors into the transposed transform `w`.
#[allow(clippy::needless_range_loop)]
fn tql2(w: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::Numerical(format!(
                        "QL iteration failed to converge for eigenvalue {l}"
                    )));
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    // plane rotation of adjacent columns, both contiguous
                    let (col_i, col_i1) = w[i * n..(i + 2) * n].split_at_mut(n);
                    for (a, b) in col_i.iter_mut().zip(col_i1.iter_mut()) {
                        let h = *b;
                        *b = s * *a + c * h;
                        *a = c * *a - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
