//! Inter-class cosine-similarity heatmaps over embedding rows.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone)]
pub struct ClassHeatmap {
    /// Class names, sorted; one row/column per class.
    pub classes: Vec<String>,
    /// Min-max normalized mean cosine similarities in [0, 1], symmetric.
    pub matrix: DenseMatrix,
    pub warnings: Vec<String>,
}

/// Mean pairwise cosine similarity between class embeddings, min-max
/// normalized to [0, 1].
///
/// `H[a][b]` averages cosine(rowᵢ, rowⱼ) over i ∈ a, j ∈ b (skipping i = j on
/// the diagonal); a diagonal cell with a single usable row is defined as 1
/// before normalization. Zero-norm rows are excluded with a warning, and a
/// constant matrix normalizes to all ones.
pub fn class_heatmap(embedding: &DenseMatrix, labels: &[String]) -> Result<ClassHeatmap> {
    if labels.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    debug_assert_eq!(embedding.rows(), labels.len());

    let norms_sq: Vec<f64> = (0..embedding.rows())
        .map(|i| embedding.row(i).iter().map(|v| v * v).sum::<f64>())
        .collect();

    let mut warnings = Vec::new();
    let excluded = norms_sq.iter().filter(|&&n| n == 0.0).count();
    if excluded > 0 {
        warnings.push(format!(
            "{excluded} zero-norm embedding rows excluded from the heatmap"
        ));
    }

    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        if norms_sq[i] > 0.0 {
            by_class.entry(label).or_default().push(i);
        }
    }
    for label in labels {
        if !by_class.contains_key(label.as_str()) {
            warnings.push(format!(
                "class `{label}` has no nonzero embedding rows; dropped from the heatmap"
            ));
        }
    }
    let classes: Vec<String> = by_class.keys().map(|s| s.to_string()).collect();
    if classes.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    warnings.sort();
    warnings.dedup();

    // Single square root of the norm product so identical rows give
    // exactly 1 and the constant-matrix rule can fire.
    let cosine = |i: usize, j: usize| {
        let mut dot = 0.0;
        for (a, b) in embedding.row(i).iter().zip(embedding.row(j)) {
            dot += a * b;
        }
        dot / (norms_sq[i] * norms_sq[j]).sqrt()
    };

    let c = classes.len();
    let mut raw = DenseMatrix::zeros(c, c);
    let groups: Vec<&Vec<usize>> = by_class.values().collect();
    for a in 0..c {
        for b in a..c {
            let mut sum = 0.0;
            let mut count = 0usize;
            for &i in groups[a] {
                for &j in groups[b] {
                    if a == b && i == j {
                        continue;
                    }
                    sum += cosine(i, j);
                    count += 1;
                }
            }
            let value = if count == 0 {
                // single usable row on the diagonal
                1.0
            } else {
                sum / count as f64
            };
            raw.set(a, b, value);
            raw.set(b, a, value);
        }
    }

    let min = raw.data().iter().cloned().fold(f64::INFINITY, f64::min);
    let max = raw.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut matrix = DenseMatrix::zeros(c, c);
    for i in 0..c {
        for j in 0..c {
            let v = if max == min {
                1.0
            } else {
                (raw.get(i, j) - min) / (max - min)
            };
            matrix.set(i, j, v);
        }
    }
    Ok(ClassHeatmap {
        classes,
        matrix,
        warnings,
    })
}

/// CSV with class names as header row and column.
pub fn write_heatmap_csv<W: Write>(w: &mut W, heatmap: &ClassHeatmap) -> Result<()> {
    write!(w, "class")?;
    for c in &heatmap.classes {
        write!(w, ",{c}")?;
    }
    writeln!(w)?;
    for (i, c) in heatmap.classes.iter().enumerate() {
        write!(w, "{c}")?;
        for j in 0..heatmap.classes.len() {
            write!(w, ",{}", heatmap.matrix.get(i, j))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
