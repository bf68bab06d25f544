//! kNN and nearest-centroid classification over embedding rows.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Per-sample class score vectors, columns ordered by `classes`.
#[derive(Debug, Clone)]
pub struct Scores {
    pub classes: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Scores {
    pub fn column_of(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

fn sorted_classes(labels: &[String]) -> Vec<String> {
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    classes
}

/// Majority vote over the `neighbors` nearest training rows (Euclidean
/// metric in embedding space).
///
/// Vote ties break by the smaller summed distance, then the
/// lexicographically smaller label. Score vectors are the per-class vote
/// fractions. `neighbors` is capped at the training size.
pub fn knn_classify(
    train: &DenseMatrix,
    train_labels: &[String],
    test: &DenseMatrix,
    neighbors: usize,
) -> Result<(Vec<String>, Scores)> {
    let n_train = train.rows();
    if n_train == 0 {
        return Err(Error::NoTrainingData);
    }
    if train_labels.len() != n_train {
        return Err(Error::DimensionMismatch(train_labels.len(), n_train));
    }
    assert!(neighbors >= 1, "neighbors must be at least 1");
    let k = neighbors.min(n_train);
    let classes = sorted_classes(train_labels);

    let results: Vec<(String, Vec<f64>)> = (0..test.rows())
        .into_par_iter()
        .map(|t| {
            let row = test.row(t);
            let mut dists: Vec<(f64, usize)> = (0..n_train)
                .map(|i| (euclidean(row, train.row(i)), i))
                .collect();
            dists.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .expect("finite distances")
                    .then(a.1.cmp(&b.1))
            });

            let mut votes: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
            for &(d, i) in dists.iter().take(k) {
                let entry = votes.entry(train_labels[i].as_str()).or_insert((0, 0.0));
                entry.0 += 1;
                entry.1 += d;
            }
            let (winner, _) = votes
                .iter()
                .map(|(&label, &(count, dist_sum))| (label, (count, dist_sum)))
                .max_by(|a, b| {
                    // more votes, then smaller summed distance, then smaller label
                    a.1 .0
                        .cmp(&b.1 .0)
                        .then(b.1 .1.partial_cmp(&a.1 .1).expect("finite distances"))
                        .then(b.0.cmp(a.0))
                })
                .expect("at least one neighbor");

            let scores: Vec<f64> = classes
                .iter()
                .map(|c| {
                    votes
                        .get(c.as_str())
                        .map(|&(count, _)| count as f64 / k as f64)
                        .unwrap_or(0.0)
                })
                .collect();
            (winner.to_string(), scores)
        })
        .collect();

    let (predictions, rows) = results.into_iter().unzip();
    Ok((predictions, Scores { classes, rows }))
}

/// Predict the label of the nearest train-class mean; ties break to the
/// lexicographically smaller label. Scores are one-hot on the prediction.
pub fn nearest_centroid_classify(
    train: &DenseMatrix,
    train_labels: &[String],
    test: &DenseMatrix,
) -> Result<(Vec<String>, Scores)> {
    let n_train = train.rows();
    if n_train == 0 {
        return Err(Error::NoTrainingData);
    }
    if train_labels.len() != n_train {
        return Err(Error::DimensionMismatch(train_labels.len(), n_train));
    }
    let classes = sorted_classes(train_labels);
    let dim = train.cols();

    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(classes.len());
    for class in &classes {
        let mut sum = vec![0.0f64; dim];
        let mut count = 0usize;
        for (i, label) in train_labels.iter().enumerate() {
            if label == class {
                for (s, v) in sum.iter_mut().zip(train.row(i)) {
                    *s += v;
                }
                count += 1;
            }
        }
        for s in sum.iter_mut() {
            *s /= count as f64;
        }
        centroids.push(sum);
    }

    let mut predictions = Vec::with_capacity(test.rows());
    let mut rows = Vec::with_capacity(test.rows());
    for t in 0..test.rows() {
        let row = test.row(t);
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for (c, centroid) in centroids.iter().enumerate() {
            let d = euclidean(row, centroid);
            if d < best_dist {
                best_dist = d;
                best = c;
            }
        }
        predictions.push(classes[best].clone());
        let mut score = vec![0.0; classes.len()];
        score[best] = 1.0;
        rows.push(score);
    }
    Ok((predictions, Scores { classes, rows }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: Vec<Vec<f64>>) -> DenseMatrix {
        DenseMatrix::from_rows(rows)
    }

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_nn_picks_closest() {
        let train = mat(vec![vec![0.0], vec![10.0]]);
        let (preds, scores) =
            knn_classify(&train, &labels(&["A", "B"]), &mat(vec![vec![1.0]]), 1).unwrap();
        assert_eq!(preds, vec!["A"]);
        assert_eq!(scores.rows[0], vec![1.0, 0.0]);
    }

    #[test]
    fn three_nn_majority() {
        let train = mat(vec![vec![0.0], vec![1.0], vec![10.0]]);
        let (preds, scores) =
            knn_classify(&train, &labels(&["A", "A", "B"]), &mat(vec![vec![2.0]]), 3).unwrap();
        assert_eq!(preds, vec!["A"]);
        let a_col = scores.column_of("A").unwrap();
        let b_col = scores.column_of("B").unwrap();
        assert!((scores.rows[0][a_col] - 2.0 / 3.0).abs() <= 1e-15);
        assert!((scores.rows[0][b_col] - 1.0 / 3.0).abs() <= 1e-15);
    }

    #[test]
    fn exact_match_wins_at_one_nn() {
        let train = mat(vec![vec![3.0], vec![4.0]]);
        let (preds, _) =
            knn_classify(&train, &labels(&["X", "Y"]), &mat(vec![vec![4.0]]), 1).unwrap();
        assert_eq!(preds, vec!["Y"]);
    }

    #[test]
    fn vote_tie_breaks_by_summed_distance() {
        // 2-NN: one A at distance 1, one B at distance 2 -> tie on votes,
        // A has the smaller summed distance.
        let train = mat(vec![vec![-1.0], vec![2.0]]);
        let (preds, _) =
            knn_classify(&train, &labels(&["A", "B"]), &mat(vec![vec![0.0]]), 2).unwrap();
        assert_eq!(preds, vec!["A"]);
    }

    #[test]
    fn full_tie_breaks_lexicographically() {
        let train = mat(vec![vec![-1.0], vec![1.0]]);
        let (preds, _) =
            knn_classify(&train, &labels(&["B", "A"]), &mat(vec![vec![0.0]]), 2).unwrap();
        assert_eq!(preds, vec!["A"]);
    }

    #[test]
    fn empty_train_is_an_error() {
        let train = DenseMatrix::zeros(0, 1);
        assert!(matches!(
            knn_classify(&train, &[], &mat(vec![vec![0.0]]), 1),
            Err(Error::NoTrainingData)
        ));
    }

    #[test]
    fn knn_matches_exhaustive_oracle() {
        let mut rng = crate::rng::SplitMix64::new(2718);
        let n_train = 150;
        let n_test = 50;
        let dim = 4;
        let class_names = ["A", "B", "C"];
        let train_rows: Vec<Vec<f64>> = (0..n_train)
            .map(|_| (0..dim).map(|_| rng.next_f64() * 4.0 - 2.0).collect())
            .collect();
        let train_labels: Vec<String> = (0..n_train)
            .map(|_| class_names[rng.next_below(3) as usize].to_string())
            .collect();
        let test_rows: Vec<Vec<f64>> = (0..n_test)
            .map(|_| (0..dim).map(|_| rng.next_f64() * 4.0 - 2.0).collect())
            .collect();
        let train = mat(train_rows.clone());
        let test = mat(test_rows.clone());

        for &k in &[1usize, 3, 5] {
            let (preds, _) = knn_classify(&train, &train_labels, &test, k).unwrap();
            for (t, test_row) in test_rows.iter().enumerate() {
                // Oracle: recompute everything naively and re-vote.
                let mut dists: Vec<(f64, usize)> = train_rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let d = r
                            .iter()
                            .zip(test_row)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt();
                        (d, i)
                    })
                    .collect();
                dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
                for &(d, i) in dists.iter().take(k) {
                    let e = tally.entry(train_labels[i].as_str()).or_insert((0, 0.0));
                    e.0 += 1;
                    e.1 += d;
                }
                let expected = tally
                    .iter()
                    .max_by(|a, b| {
                        a.1 .0
                            .cmp(&b.1 .0)
                            .then(b.1 .1.partial_cmp(&a.1 .1).unwrap())
                            .then(b.0.cmp(a.0))
                    })
                    .map(|(l, _)| l.to_string())
                    .unwrap();
                assert_eq!(preds[t], expected, "k={k}, test={t}");
            }
        }
    }

    #[test]
    fn centroid_basic() {
        let train = mat(vec![vec![0.0], vec![10.0]]);
        let (preds, _) =
            nearest_centroid_classify(&train, &labels(&["A", "B"]), &mat(vec![vec![4.0]])).unwrap();
        assert_eq!(preds, vec!["A"]);
    }

    #[test]
    fn centroid_tie_is_lexicographic() {
        let train = mat(vec![vec![0.0], vec![10.0]]);
        let (preds, _) =
            nearest_centroid_classify(&train, &labels(&["B", "A"]), &mat(vec![vec![5.0]])).unwrap();
        assert_eq!(preds, vec!["A"]);
    }

    #[test]
    fn centroid_uses_class_means() {
        let train = mat(vec![vec![0.0], vec![2.0], vec![10.0]]);
        let (preds, _) =
            nearest_centroid_classify(&train, &labels(&["A", "A", "B"]), &mat(vec![vec![3.0]]))
                .unwrap();
        assert_eq!(preds, vec!["A"]);
    }
}
