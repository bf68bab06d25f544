//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Run with `cargo test -p lorentzseq --test acceptance` (add
//! `-- --nocapture` to see the PASS lines).

use std::time::Instant;

use lorentzseq::alphabet::Alphabet;
use lorentzseq::classify::knn_classify;
use lorentzseq::classify::Scores;
use lorentzseq::eigen::eigendecompose_symmetric;
use lorentzseq::experiment::{run_experiment, ExperimentConfig};
use lorentzseq::hyperboloid::{
    acosh_stable, distance, lift, lorentz_inner, lorentz_inner_raw, CLAMP_TOL,
};
use lorentzseq::kernel::{kernel_matrix, psd_adjust, KernelKind, PsdMode};
use lorentzseq::kernel_pca::{center_kernel, project, KpcaTransform};
use lorentzseq::matrix::DenseMatrix;
use lorentzseq::metrics::{evaluate, t_test_summary};
use lorentzseq::rng::SplitMix64;
use lorentzseq::split::SplitSpec;
use lorentzseq::synth::{generate_mutation_tree, SynthConfig};

/// Random vector with log-uniform norm in [10^lo, 10^hi].
fn random_vector(rng: &mut SplitMix64, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
    let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let target = 10f64.powf(lo + rng.next_f64() * (hi - lo));
    if norm > 0.0 {
        let scale = target / norm;
        for c in v.iter_mut() {
            *c *= scale;
        }
    }
    v
}

#[test]
fn criterion_1_geometry_suite() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(101);
    let dims = [4usize, 16, 64, 256];
    let per_group = 2_500usize;
    let pairs_per_group = 25_000usize;

    for &dim in &dims {
        let points: Vec<_> = (0..per_group)
            .map(|_| {
                let v = random_vector(&mut rng, dim, -3.0, 4.0);
                lift(&v).expect("finite vector lifts")
            })
            .collect();

        // sheet membership and self-inner
        for p in &points {
            assert!(
                p.sheet_residual() <= 1e-9,
                "sheet residual {} at dim {dim}",
                p.sheet_residual()
            );
            let self_raw = lorentz_inner_raw(p, p);
            let tol = CLAMP_TOL * f64::max(1.0, p.x0() * p.x0());
            assert!(
                (self_raw - 1.0).abs() <= tol,
                "self inner {self_raw} at dim {dim}"
            );
            assert_eq!(lorentz_inner(p, p).unwrap(), 1.0);
        }

        // lower bound over sampled pairs
        for _ in 0..pairs_per_group {
            let i = rng.next_below(per_group as u64) as usize;
            let j = rng.next_below(per_group as u64) as usize;
            let raw = lorentz_inner_raw(&points[i], &points[j]);
            let tol = CLAMP_TOL * f64::max(1.0, points[i].x0() * points[j].x0());
            assert!(
                raw >= 1.0 - tol,
                "B = {raw} below bound for pair ({i},{j}) at dim {dim}"
            );
            assert!(lorentz_inner(&points[i], &points[j]).unwrap() >= 1.0);
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "geometry suite took {elapsed:?}"
    );
    println!("ACCEPTANCE criterion 1 (geometry suite, {elapsed:?}): PASS");
}

#[test]
fn criterion_2_metric_suite() {
    let mut rng = SplitMix64::new(202);
    for _ in 0..10_000 {
        // dims ≥ 2: random directions keep the triples away from the
        // collinear equality case of the triangle inequality
        let dim = 2 + rng.next_below(31) as usize;
        let x = lift(&random_vector(&mut rng, dim, -2.0, 3.0)).unwrap();
        let y = lift(&random_vector(&mut rng, dim, -2.0, 3.0)).unwrap();
        let z = lift(&random_vector(&mut rng, dim, -2.0, 3.0)).unwrap();

        let dxy = distance(&x, &y).unwrap();
        let dyx = distance(&y, &x).unwrap();
        let dyz = distance(&y, &z).unwrap();
        let dxz = distance(&x, &z).unwrap();

        assert_eq!(dxy.to_bits(), dyx.to_bits(), "symmetry must be bit-exact");
        assert!(
            dxz <= dxy + dyz + 1e-9,
            "triangle violated: {dxz} > {dxy} + {dyz}"
        );
        assert!(dxy >= 0.0);
        assert_eq!(distance(&x, &x).unwrap(), 0.0);
    }
    println!("ACCEPTANCE criterion 2 (metric suite): PASS");
}

/// Extended-precision-quality oracle for acosh: series where the closed
/// form cancels, closed form elsewhere.
fn acosh_oracle(z: f64) -> f64 {
    let u = z - 1.0;
    if u <= 1e-4 {
        (2.0 * u).sqrt() * (1.0 - u / 12.0 + 3.0 * u * u / 160.0 - 5.0 * u * u * u / 896.0)
    } else {
        (z + (z * z - 1.0).sqrt()).ln()
    }
}

#[test]
fn criterion_3_acosh_oracle() {
    let mut z = 1.0f64 + 1e-14;
    let mut checked = 0usize;
    while z <= 1e12 {
        let stable = acosh_stable(z).unwrap();
        let oracle = acosh_oracle(z);
        assert!(
            (stable - oracle).abs() <= 1e-12 * oracle.abs(),
            "acosh mismatch at z = {z}: {stable} vs {oracle}"
        );
        checked += 1;
        z = (z - 1.0) * 1.3 + 1.0;
    }
    assert!(checked > 100);

    // worked value: acosh(√170) = ln(√170 + 13)
    let d = acosh_stable(170f64.sqrt()).unwrap();
    assert!((d - (170f64.sqrt() + 13.0).ln()).abs() <= 1e-14);
    assert!((d - 3.25957).abs() <= 1e-5);
    println!("ACCEPTANCE criterion 3 (acosh oracle, {checked} grid points): PASS");
}

#[test]
fn criterion_4_algorithm_fidelity() {
    let n = 200usize;
    let dim = 32usize;
    let mut rng = SplitMix64::new(404);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| random_vector(&mut rng, dim, -1.0, 2.0))
        .collect();
    let spectra = DenseMatrix::from_rows(rows);

    let fast = kernel_matrix(&spectra, KernelKind::HyperboloidDistance).unwrap();

    // naive double-loop reference with the same arithmetic order
    let points: Vec<_> = (0..n).map(|i| lift(spectra.row(i)).unwrap()).collect();
    let mut reference = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance(&points[i], &points[j]).unwrap();
            reference.set(i, j, d);
            reference.set(j, i, d);
        }
    }

    for i in 0..n {
        assert_eq!(fast.get(i, i), 0.0, "diagonal must be exactly zero");
        for j in 0..n {
            assert_eq!(
                fast.get(i, j).to_bits(),
                reference.get(i, j).to_bits(),
                "0-ulp mismatch at ({i},{j})"
            );
            assert_eq!(fast.get(i, j).to_bits(), fast.get(j, i).to_bits());
        }
    }

    // worker-count invariance
    let pool1 = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let pool8 = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap();
    let k1 = pool1.install(|| kernel_matrix(&spectra, KernelKind::HyperboloidDistance).unwrap());
    let k8 = pool8.install(|| kernel_matrix(&spectra, KernelKind::HyperboloidDistance).unwrap());
    assert_eq!(k1.data().data(), k8.data().data());
    assert_eq!(k1.data().data(), fast.data().data());
    println!("ACCEPTANCE criterion 4 (Algorithm fidelity, n = {n}): PASS");
}

#[test]
fn criterion_5_psd_suite() {
    let mut rng = SplitMix64::new(505);
    for trial in 0..50 {
        let n = 2 + rng.next_below(99) as usize; // up to 100
        let dim = 1 + rng.next_below(16) as usize;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| random_vector(&mut rng, dim, -1.0, 1.5))
            .collect();
        let k = kernel_matrix(
            &DenseMatrix::from_rows(rows),
            KernelKind::HyperboloidDistance,
        )
        .unwrap();
        let shifted = psd_adjust(&k, PsdMode::Shift, None).unwrap();

        let eig = eigendecompose_symmetric(shifted.data()).unwrap();
        let lambda_min = *eig.values.last().unwrap();
        assert!(
            lambda_min >= 0.0,
            "trial {trial}: λ_min = {lambda_min} after shift"
        );
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert_eq!(
                        shifted.get(i, j).to_bits(),
                        k.get(i, j).to_bits(),
                        "off-diagonal changed at ({i},{j})"
                    );
                }
            }
        }
    }
    println!("ACCEPTANCE criterion 5 (PSD suite, 50 matrices): PASS");
}

#[test]
fn criterion_6_kernel_pca_suite() {
    let mut rng = SplitMix64::new(606);

    // centering: row/col sums vanish
    for &n in &[3usize, 10, 40] {
        let mut k = DenseMatrix::zeros(n, n);
        let mut max_abs = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let v = rng.next_f64() * 20.0 - 10.0;
                k.set(i, j, v);
                k.set(j, i, v);
                max_abs = max_abs.max(v.abs());
            }
        }
        let c = center_kernel(&k).unwrap();
        let tol = 1e-9 * n as f64 * max_abs;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| c.get(i, j)).sum();
            let col: f64 = (0..n).map(|j| c.get(j, i)).sum();
            assert!(row.abs() <= tol && col.abs() <= tol);
        }
    }

    // eigen residuals ≤ 1e-8·‖A‖_F on random symmetric matrices
    for &n in &[5usize, 20, 50] {
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.next_f64() * 4.0 - 2.0;
                a.set(i, j, v);
                a.set(j, i, v);
            }
        }
        let norm: f64 = a.data().iter().map(|v| v * v).sum::<f64>().sqrt();
        let eig = eigendecompose_symmetric(&a).unwrap();
        for j in 0..n {
            let mut res = 0.0f64;
            for i in 0..n {
                let mut av = 0.0;
                for l in 0..n {
                    av += a.get(i, l) * eig.vectors.get(l, j);
                }
                res += (av - eig.values[j] * eig.vectors.get(i, j)).powi(2);
            }
            assert!(
                res.sqrt() <= 1e-8 * norm,
                "residual {} at n={n}",
                res.sqrt()
            );
        }
    }

    // classical MDS exactness on Euclidean configurations
    for &n in &[5usize, 12, 30] {
        let d = 3usize;
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.next_f64() * 10.0 - 5.0).collect())
            .collect();
        let dist = kernel_matrix(
            &DenseMatrix::from_rows(points.clone()),
            KernelKind::EuclideanDistance,
        )
        .unwrap();
        let emb = project(&dist, n, PsdMode::Clip, KpcaTransform::Mds).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let original = dist.get(i, j);
                let mut acc = 0.0;
                for c in 0..emb.components() {
                    let diff = emb.coords.get(i, c) - emb.coords.get(j, c);
                    acc += diff * diff;
                }
                let reconstructed = acc.sqrt();
                assert!(
                    (reconstructed - original).abs() <= 1e-6 * original,
                    "n={n}: pair ({i},{j}) {reconstructed} vs {original}"
                );
            }
        }
    }
    println!("ACCEPTANCE criterion 6 (kernel PCA suite): PASS");
}

#[test]
fn criterion_7_classifier_oracle() {
    let mut rng = SplitMix64::new(707);
    let n_train = 200usize;
    let n_test = 60usize;
    let dim = 3usize;
    let names = ["A", "B", "C"];
    let train_rows: Vec<Vec<f64>> = (0..n_train)
        .map(|_| (0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
        .collect();
    let train_labels: Vec<String> = (0..n_train)
        .map(|_| names[rng.next_below(3) as usize].to_string())
        .collect();
    let test_rows: Vec<Vec<f64>> = (0..n_test)
        .map(|_| (0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
        .collect();
    let train = DenseMatrix::from_rows(train_rows.clone());
    let test = DenseMatrix::from_rows(test_rows.clone());

    for &k in &[1usize, 3, 5] {
        let (preds, _) = knn_classify(&train, &train_labels, &test, k).unwrap();
        for (t, test_row) in test_rows.iter().enumerate() {
            // exhaustive-scan oracle: recompute all distances, re-vote
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
            let mut votes: std::collections::BTreeMap<&str, (usize, f64)> = Default::default();
            for &(d, i) in dists.iter().take(k) {
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
            assert_eq!(preds[t], expected, "k={k}, test point {t}");
        }
    }

    // frozen hand-worked confusion-matrix example
    let preds = vec!["A".to_string(), "A".to_string(), "B".to_string()];
    let truth = vec!["A".to_string(), "B".to_string(), "B".to_string()];
    let scores = Scores {
        classes: vec!["A".to_string(), "B".to_string()],
        rows: vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
    };
    let m = evaluate(&preds, &scores, &truth).unwrap();
    assert!((m.accuracy - 2.0 / 3.0).abs() <= 1e-12);
    assert!((m.f1_macro - 2.0 / 3.0).abs() <= 1e-12);
    println!("ACCEPTANCE criterion 7 (classifier oracle): PASS");
}

fn desk_scale_config(kernel: KernelKind) -> ExperimentConfig {
    ExperimentConfig {
        kernel,
        split: SplitSpec {
            test_fraction: 0.3,
            runs: 5,
            base_seed: 808,
            stratified: true,
        },
        ..ExperimentConfig::default()
    }
}

fn desk_scale_records() -> Vec<lorentzseq::fasta::SequenceRecord> {
    generate_mutation_tree(
        &SynthConfig {
            classes: 4,
            n: 400,
            length: 300,
            mu_within: 0.02,
            mu_between: 0.15,
            seed: 808,
        },
        &Alphabet::dna(),
    )
}

#[test]
fn criterion_8_desk_scale_experiment() {
    let start = Instant::now();
    let records = desk_scale_records();

    let hyper = run_experiment(
        &records,
        &desk_scale_config(KernelKind::HyperboloidDistance),
    )
    .unwrap();
    assert_eq!(hyper.report.per_run.len(), 5);
    assert!(
        hyper.report.mean.accuracy >= 0.95,
        "mean accuracy {} below 0.95",
        hyper.report.mean.accuracy
    );
    assert!(hyper.report.sd.accuracy.is_finite());
    assert!(hyper.report.sd.f1_weighted.is_finite());

    let euclid =
        run_experiment(&records, &desk_scale_config(KernelKind::EuclideanDistance)).unwrap();
    assert_eq!(euclid.report.per_run.len(), 5);

    let t = t_test_summary(
        hyper.report.mean.accuracy,
        hyper.report.sd.accuracy,
        5,
        euclid.report.mean.accuracy,
        euclid.report.sd.accuracy,
        5,
    );
    assert!(t.p_value.is_finite(), "p-value must be finite");
    assert!((0.0..=1.0).contains(&t.p_value));

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "desk-scale experiment took {elapsed:?}"
    );
    println!(
        "ACCEPTANCE criterion 8 (desk-scale: hyperboloid acc {:.4} ± {:.4}, euclidean acc {:.4}, p = {:.3e}, {elapsed:?}): PASS",
        hyper.report.mean.accuracy, hyper.report.sd.accuracy, euclid.report.mean.accuracy, t.p_value
    );
}

#[test]
fn criterion_9_determinism() {
    let records = desk_scale_records();
    let config = desk_scale_config(KernelKind::HyperboloidDistance);

    let first = run_experiment(&records, &config).unwrap();
    let second = run_experiment(&records, &config).unwrap();
    assert_eq!(
        first.report.to_json().into_bytes(),
        second.report.to_json().into_bytes(),
        "report.json must be byte-identical"
    );

    // kernel binary reproducibility across full recomputes
    let alphabet = Alphabet::dna();
    let mut binaries = Vec::new();
    for _ in 0..2 {
        let spectra = lorentzseq::spectrum::spectrum_matrix(
            &records,
            3,
            &alphabet,
            lorentzseq::alphabet::AmbiguityPolicy::MaskKmers,
            true,
        )
        .unwrap();
        let kernel = kernel_matrix(&spectra, KernelKind::HyperboloidDistance).unwrap();
        let mut bytes = Vec::new();
        kernel.write_binary(&mut bytes).unwrap();
        binaries.push(bytes);
    }
    assert_eq!(
        binaries[0], binaries[1],
        "kernel binary must be byte-identical"
    );
    println!("ACCEPTANCE criterion 9 (determinism): PASS");
}
