//! Deterministic train/test splitting for multi-run evaluation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Stream label separating split randomness from other consumers of the seed.
const SPLIT_STREAM: u64 = 1;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SplitSpec {
    /// Fraction of each class routed to the test side, in (0, 1).
    pub test_fraction: f64,
    pub runs: usize,
    pub base_seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.3,
            runs: 5,
            base_seed: 0,
            stratified: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Split sample indices for one run, deterministically in
/// `(base_seed, run_index)`.
///
/// Stratified mode draws round(class_size · test_fraction) test members per
/// class, keeping at least one member on each side for classes of size ≥ 2.
/// Singleton classes go to the train side with a warning; when every class
/// is a singleton the split is infeasible.
pub fn stratified_split(labels: &[String], spec: &SplitSpec, run_index: usize) -> Result<Split> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::SplitInfeasible(format!(
            "need at least 2 samples, have {n}"
        )));
    }
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::SplitInfeasible(format!(
            "test fraction {} outside (0, 1)",
            spec.test_fraction
        )));
    }
    let mut rng = SplitMix64::new(spec.base_seed)
        .derive(SPLIT_STREAM)
        .derive(run_index as u64);

    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut warnings = Vec::new();

    if spec.stratified {
        let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, label) in labels.iter().enumerate() {
            by_class.entry(label).or_default().push(i);
        }
        if by_class.values().all(|members| members.len() < 2) {
            return Err(Error::SplitInfeasible(
                "every class has a single member".into(),
            ));
        }
        for (label, mut members) in by_class {
            if members.len() == 1 {
                warnings.push(format!(
                    "class `{label}` has a single member; placed in train"
                ));
                train.push(members[0]);
                continue;
            }
            let size = members.len();
            let want = (size as f64 * spec.test_fraction).round() as usize;
            let take = want.clamp(1, size - 1);
            rng.shuffle(&mut members);
            test.extend_from_slice(&members[..take]);
            train.extend_from_slice(&members[take..]);
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        let want = (n as f64 * spec.test_fraction).round() as usize;
        let take = want.clamp(1, n - 1);
        test.extend_from_slice(&order[..take]);
        train.extend_from_slice(&order[take..]);
    }

    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train,
        test,
        warnings,
    })
}
