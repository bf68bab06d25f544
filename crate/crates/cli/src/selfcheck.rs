//! Built-in invariant suite: regenerates data and re-verifies the core
//! geometric and statistical contracts, printing one line per property.

use std::collections::BTreeMap;
use std::time::Instant;

use lorentzseq::classify::knn_classify;
use lorentzseq::eigen::eigendecompose_symmetric;
use lorentzseq::hyperboloid::{acosh_stable, distance, lift, lorentz_inner_raw, CLAMP_TOL};
use lorentzseq::matrix::DenseMatrix;
use lorentzseq::rng::SplitMix64;

use crate::{CliError, CliResult, SelfcheckArgs};

/// Wall-clock budget for the whole suite at default sizes.
const TIME_BUDGET_SEC: f64 = 60.0;

struct Check {
    name: &'static str,
    run: fn(&mut SplitMix64, bool) -> Result<(), String>,
}

const CHECKS: &[Check] = &[
    Check {
        name: "sheet_membership",
        run: check_sheet_membership,
    },
    Check {
        name: "lorentz_lower_bound",
        run: check_lorentz_lower_bound,
    },
    Check {
        name: "metric_axioms",
        run: check_metric_axioms,
    },
    Check {
        name: "acosh_identity",
        run: check_acosh_identity,
    },
    Check {
        name: "knn_oracle",
        run: check_knn_oracle,
    },
    Check {
        name: "eigen_residuals",
        run: check_eigen_residuals,
    },
];

pub fn run(args: &SelfcheckArgs) -> CliResult<()> {
    if let Some(fault) = &args.inject_fault {
        if !cfg!(debug_assertions) {
            return Err(CliError::Usage(
                "--inject-fault is only available in test builds".into(),
            ));
        }
        if !CHECKS.iter().any(|c| c.name == fault) {
            return Err(CliError::Usage(format!(
                "unknown property `{fault}`; choose one of: {}",
                CHECKS.iter().map(|c| c.name).collect::<Vec<_>>().join(", ")
            )));
        }
    }

    let start = Instant::now();
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for check in CHECKS {
        let mut rng = SplitMix64::new(0xC0FFEE);
        let inject = args.inject_fault.as_deref() == Some(check.name);
        match (check.run)(&mut rng, inject) {
            Ok(()) => {
                println!("check {}: ok", check.name);
                results.push((check.name, true));
            }
            Err(msg) => {
                println!("check {}: FAIL ({msg})", check.name);
                results.push((check.name, false));
                failures.push(check.name);
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "selfcheck: {} of {} properties hold ({elapsed:?})",
        CHECKS.len() - failures.len(),
        CHECKS.len(),
    );

    if let Some(dir) = &args.out {
        let mut writer = crate::ArtifactWriter::new(dir)?;
        let manifest = serde_json::json!({
            "command": "selfcheck",
            "version": env!("CARGO_PKG_VERSION"),
            "budget_sec": TIME_BUDGET_SEC,
            "elapsed_sec": elapsed.as_secs_f64(),
            "properties": results
                .iter()
                .map(|(name, ok)| (name.to_string(), serde_json::json!(ok)))
                .collect::<serde_json::Map<_, _>>(),
        });
        crate::write_manifest(&mut writer, &manifest)?;
    }

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Compute(format!(
            "failing properties: {}",
            failures.join(", ")
        )))
    }
}

fn random_vector(rng: &mut SplitMix64, dim: usize, max_exp: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
    let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm > 0.0 {
        let target = 10f64.powf(rng.next_f64() * max_exp - 1.0);
        for c in v.iter_mut() {
            *c *= target / norm;
        }
    }
    v
}

fn check_sheet_membership(rng: &mut SplitMix64, inject: bool) -> Result<(), String> {
    let bound = if inject { 0.0 } else { 1e-9 };
    for _ in 0..2000 {
        let dim = 1 + rng.next_below(64) as usize;
        let v = random_vector(rng, dim, 4.0);
        let p = lift(&v).map_err(|e| e.to_string())?;
        if p.sheet_residual() > bound {
            return Err(format!(
                "residual {} for a vector of norm {:.3e}",
                p.sheet_residual(),
                v.iter().map(|c| c * c).sum::<f64>().sqrt()
            ));
        }
    }
    Ok(())
}

fn check_lorentz_lower_bound(rng: &mut SplitMix64, inject: bool) -> Result<(), String> {
    let slack = if inject { -1.0 } else { 0.0 };
    for _ in 0..5000 {
        let dim = 1 + rng.next_below(32) as usize;
        let x = lift(&random_vector(rng, dim, 4.0)).map_err(|e| e.to_string())?;
        let y = lift(&random_vector(rng, dim, 4.0)).map_err(|e| e.to_string())?;
        let raw = lorentz_inner_raw(&x, &y);
        let tol = CLAMP_TOL * f64::max(1.0, x.x0() * y.x0());
        if raw < 1.0 - tol + slack {
            return Err(format!("B = {raw} with x0·y0 = {}", x.x0() * y.x0()));
        }
    }
    Ok(())
}

fn check_metric_axioms(rng: &mut SplitMix64, inject: bool) -> Result<(), String> {
    let slack = if inject { -1.0 } else { 1e-9 };
    for _ in 0..2000 {
        let dim = 1 + rng.next_below(16) as usize;
        let x = lift(&random_vector(rng, dim, 3.0)).map_err(|e| e.to_string())?;
        let y = lift(&random_vector(rng, dim, 3.0)).map_err(|e| e.to_string())?;
        let z = lift(&random_vector(rng, dim, 3.0)).map_err(|e| e.to_string())?;
        let dxy = distance(&x, &y).map_err(|e| e.to_string())?;
        let dyx = distance(&y, &x).map_err(|e| e.to_string())?;
        let dyz = distance(&y, &z).map_err(|e| e.to_string())?;
        let dxz = distance(&x, &z).map_err(|e| e.to_string())?;
        if dxy.to_bits() != dyx.to_bits() {
            return Err(format!("symmetry broke: {dxy} vs {dyx}"));
        }
        if distance(&x, &x).map_err(|e| e.to_string())? != 0.0 {
            return Err("d(X,X) != 0".into());
        }
        if dxz > dxy + dyz + slack {
            return Err(format!("triangle violated: {dxz} > {dxy} + {dyz}"));
        }
    }
    Ok(())
}

fn check_acosh_identity(rng: &mut SplitMix64, inject: bool) -> Result<(), String> {
    let bound = if inject { 0.0 } else { 1e-12 };
    for _ in 0..2000 {
        // z = cosh(t) for t log-uniform in [1e-7, 20]
        let t = 10f64.powf(rng.next_f64() * 8.3 - 7.0);
        let z = t.cosh();
        let back = acosh_stable(z).map_err(|e| e.to_string())?;
        // the round trip through cosh loses precision near t = 0 in z
        // itself, so compare against the closed form of the same z
        let u = z - 1.0;
        let reference = if u <= 1e-4 {
            (2.0 * u).sqrt() * (1.0 - u / 12.0 + 3.0 * u * u / 160.0)
        } else {
            (z + (z * z - 1.0).sqrt()).ln()
        };
        if (back - reference).abs() > bound * reference.abs() + bound {
            return Err(format!("acosh({z}) = {back}, reference {reference}"));
        }
    }
    Ok(())
}

fn check_knn_oracle(rng: &mut SplitMix64, inject: bool) -> Result<(), String> {
    let names = ["A", "B", "C"];
    let n_train = 100;
    let dim = 3;
    let train_rows: Vec<Vec<f64>> = (0..n_train)
        .map(|_| (0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
        .collect();
    let train_labels: Vec<String> = (0..n_train)
        .map(|_| names[rng.next_below(3) as usize].to_string())
        .collect();
    let test_rows: Vec<Vec<f64>> = (0..30)
        .map(|_| (0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
        .collect();
    let train = DenseMatrix::from_rows(train_rows.clone());
    let test = DenseMatrix::from_rows(test_rows.clone());
    for k in [1usize, 3, 5] {
        let (preds, _) =
            knn_classify(&train, &train_labels, &test, k).map_err(|e| e.to_string())?;
        for (t, test_row) in test_rows.iter().enumerate() {
            let mut dists: Vec<(f64, usize)> = train_rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let d: f64 = row
                        .iter()
                        .zip(test_row)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    (d, i)
                })
                .collect();
            dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let take = if inject { k.max(2) - 1 } else { k };
            let mut votes: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
            for &(d, i) in dists.iter().take(take) {
                let e = votes.entry(train_labels[i].as_str()).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += d;
            }
            let expected = votes
                .iter()
                .max_by(|a, b| {
                    a.1 .0
                        .cmp(&b.1 .0)
                        .then(b.1 .1.partial_cmp(&a.1 .1).unwrap())
                        .then(b.0.cmp(a.0))
                })
                .map(|(&l, _)| l.to_string())
                .unwrap();
            if preds[t] != expected {
                return Err(format!(
                    "k={k}, test point {t}: predicted {} vs oracle {expected}",
                    preds[t]
                ));
            }
        }
    }
    Ok(())
}

fn check_eigen_residuals(rng: &mut SplitMix64, inject: bool) -> Result<(), String> {
    let bound = if inject { 0.0 } else { 1e-8 };
    for n in [5usize, 15, 30] {
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.next_f64() * 4.0 - 2.0;
                a.set(i, j, v);
                a.set(j, i, v);
            }
        }
        let norm: f64 = a.data().iter().map(|v| v * v).sum::<f64>().sqrt();
        let eig = eigendecompose_symmetric(&a).map_err(|e| e.to_string())?;
        for j in 0..n {
            let mut res = 0.0f64;
            for i in 0..n {
                let mut av = 0.0;
                for l in 0..n {
                    av += a.get(i, l) * eig.vectors.get(l, j);
                }
                res += (av - eig.values[j] * eig.vectors.get(i, j)).powi(2);
            }
            if res.sqrt() > bound * norm {
                return Err(format!(
                    "n={n}: residual {} for eigenpair {j} (λ = {})",
                    res.sqrt(),
                    eig.values[j]
                ));
            }
        }
    }
    Ok(())
}
