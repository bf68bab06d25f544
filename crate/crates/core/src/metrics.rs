//! Multiclass evaluation metrics and the Welch t-test.

use std::collections::BTreeMap;

use crate::classify::Scores;
use crate::error::{Error, Result};

/// One evaluation's worth of metrics. All rates are in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricBlock {
    pub accuracy: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted: f64,
    pub f1_macro: f64,
    pub roc_auc_ovr: f64,
}

/// Compute accuracy, weighted/macro precision-recall-F1, and one-vs-rest
/// ROC-AUC from predictions, class scores, and ground truth.
///
/// Per-class rates come from the confusion matrix with 0/0 defined as 0;
/// weighted aggregates weight by true-class support; macro averages over
/// every label seen in truth or predictions. ROC-AUC is the tie-aware rank
/// statistic per truth class (classes without negatives are skipped).
pub fn evaluate(predictions: &[String], scores: &Scores, truth: &[String]) -> Result<MetricBlock> {
    if predictions.is_empty() || truth.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch(predictions.len(), truth.len()));
    }
    debug_assert!(scores.rows.len() == truth.len());
    debug_assert!(scores
        .rows
        .iter()
        .all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= 1e-9));

    let n = truth.len() as f64;
    let correct = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count() as f64;
    let accuracy = correct / n;

    // Union of labels, each its own confusion row even if never in truth.
    let mut class_set: Vec<&str> = truth
        .iter()
        .chain(predictions)
        .map(String::as_str)
        .collect();
    class_set.sort_unstable();
    class_set.dedup();

    let mut support: BTreeMap<&str, usize> = BTreeMap::new();
    let mut tp: BTreeMap<&str, usize> = BTreeMap::new();
    let mut pred_count: BTreeMap<&str, usize> = BTreeMap::new();
    for (p, t) in predictions.iter().zip(truth) {
        *support.entry(t.as_str()).or_insert(0) += 1;
        *pred_count.entry(p.as_str()).or_insert(0) += 1;
        if p == t {
            *tp.entry(t.as_str()).or_insert(0) += 1;
        }
    }

    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let mut precision_weighted = 0.0;
    let mut recall_weighted = 0.0;
    let mut f1_weighted = 0.0;
    let mut f1_sum = 0.0;
    for &class in &class_set {
        let tp_c = tp.get(class).copied().unwrap_or(0);
        let sup_c = support.get(class).copied().unwrap_or(0);
        let prec = ratio(tp_c, pred_count.get(class).copied().unwrap_or(0));
        let rec = ratio(tp_c, sup_c);
        let f1 = if prec + rec == 0.0 {
            0.0
        } else {
            2.0 * prec * rec / (prec + rec)
        };
        let weight = sup_c as f64 / n;
        precision_weighted += weight * prec;
        recall_weighted += weight * rec;
        f1_weighted += weight * f1;
        f1_sum += f1;
    }
    let f1_macro = f1_sum / class_set.len() as f64;

    // One-vs-rest AUC over truth classes with at least one negative.
    let mut auc_sum = 0.0;
    let mut auc_classes = 0usize;
    for (&class, &sup_c) in &support {
        let negatives = truth.len() - sup_c;
        if negatives == 0 {
            continue;
        }
        let column = scores.column_of(class);
        let class_scores: Vec<f64> = match column {
            Some(c) => scores.rows.iter().map(|r| r[c]).collect(),
            None => vec![0.0; truth.len()],
        };
        let positives: Vec<bool> = truth.iter().map(|t| t == class).collect();
        auc_sum += binary_auc(&class_scores, &positives);
        auc_classes += 1;
    }
    let roc_auc_ovr = if auc_classes == 0 {
        0.5
    } else {
        auc_sum / auc_classes as f64
    };

    Ok(MetricBlock {
        accuracy,
        precision_weighted,
        recall_weighted,
        f1_weighted,
        f1_macro,
        roc_auc_ovr,
    })
}

/// AUC as the Mann-Whitney rank statistic with midranks for ties.
fn binary_auc(scores: &[f64], positives: &[bool]) -> f64 {
    let n_pos = positives.iter().filter(|&&p| p).count();
    let n_neg = positives.len() - n_pos;
    debug_assert!(n_pos > 0 && n_neg > 0);

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based midrank for the tie group [i, j)
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if positives[idx] {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    u / (n_pos as f64 * n_neg as f64)
}

/// Welch two-sample t-test from summary statistics.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TTestSummary {
    pub t: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
}

/// Welch t statistic with Welch-Satterthwaite degrees of freedom and a
/// two-sided p-value from the Student-t CDF.
///
/// Degenerate inputs: both deviations zero with equal means gives t = 0,
/// p = 1; with different means t is ±∞ and p = 0.
pub fn t_test_summary(
    mean1: f64,
    sd1: f64,
    n1: usize,
    mean2: f64,
    sd2: f64,
    n2: usize,
) -> TTestSummary {
    assert!(sd1 >= 0.0 && sd2 >= 0.0, "standard deviations must be >= 0");
    assert!(
        n1 >= 2 && n2 >= 2,
        "need at least 2 observations per sample"
    );
    let var1 = sd1 * sd1 / n1 as f64;
    let var2 = sd2 * sd2 / n2 as f64;
    let se_sq = var1 + var2;
    if se_sq == 0.0 {
        return if mean1 == mean2 {
            TTestSummary {
                t: 0.0,
                degrees_of_freedom: (n1 + n2 - 2) as f64,
                p_value: 1.0,
            }
        } else {
            TTestSummary {
                t: if mean1 > mean2 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                },
                degrees_of_freedom: (n1 + n2 - 2) as f64,
                p_value: 0.0,
            }
        };
    }
    let t = (mean1 - mean2) / se_sq.sqrt();
    let df = se_sq * se_sq / (var1 * var1 / (n1 as f64 - 1.0) + var2 * var2 / (n2 as f64 - 1.0));
    let p_value = if t == 0.0 {
        1.0
    } else {
        // two-sided: P(|T| > |t|) = I_{df/(df+t²)}(df/2, 1/2)
        regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    };
    TTestSummary {
        t,
        degrees_of_freedom: df,
        p_value,
    }
}

/// ln Γ(x) by the Lanczos approximation (g = 7, n = 9).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection formula
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_9;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta I_x(a, b) by the Lentz continued fraction.
fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
