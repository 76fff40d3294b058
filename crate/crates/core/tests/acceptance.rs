//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a criterion fails that is not listed in `KNOWN_UNATTAINABLE`.

#![allow(clippy::needless_range_loop)]

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use bdrkit_core::changepoint::{penalized_cost, segment_with_penalty};
use bdrkit_core::*;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot pass in this environment, with the reason.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(7, "Ceramic data set is not shipped with the repository")];

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Dense generalized spectrum of `L y = lambda D y`, computed directly from
/// the affinity.
fn dense_spectrum(w: &DMatrix<f64>, mode: EigenMode) -> Vec<f64> {
    let n = w.nrows();
    let d: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let l = if i == j { d[i] - w[(i, i)] } else { -w[(i, j)] };
        match mode {
            EigenMode::Standard => l,
            EigenMode::Generalized => l / (d[i] * d[j]).sqrt(),
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn max_abs_gap(predicted: &[f64], actual: &[f64]) -> f64 {
    if predicted.len() != actual.len() {
        return f64::INFINITY;
    }
    predicted
        .iter()
        .zip(actual)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn random_spec(rng: &mut ChaCha8Rng) -> BlockSpec {
    let k = rng.random_range(2..=4);
    let sizes = (0..k).map(|_| rng.random_range(2..=10)).collect();
    let within = (0..k).map(|_| rng.random_range(0.3..=1.0)).collect();
    BlockSpec::new(sizes, within)
}

fn min_within(spec: &BlockSpec) -> f64 {
    spec.within.iter().copied().fold(f64::INFINITY, f64::min)
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for mode in [EigenMode::Generalized, EigenMode::Standard] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for draw in 0..200 {
            let spec = random_spec(&mut rng);
            let k = spec.n_blocks();
            let cap = 0.5 * min_within(&spec);
            let coeffs: Vec<f64> = (0..k).map(|_| rng.random_range(0.01 * cap..cap)).collect();
            let (prediction, corruption) = if draw % 2 == 0 {
                let c = CorruptionSpec {
                    type2: vec![Type2Outlier {
                        position: spec.n_vertices() + 1,
                        coefficients: coeffs.clone(),
                    }],
                    ..Default::default()
                };
                (predict_eigs_type2(&spec, &coeffs, mode), c)
            } else {
                let block = rng.random_range(0..k);
                let mut group = vec![vec![0.0; k]; k];
                for j in (0..k).filter(|&j| j != block) {
                    group[block][j] = coeffs[j];
                    group[j][block] = coeffs[j];
                }
                let c = CorruptionSpec {
                    group_sim: group,
                    ..Default::default()
                };
                (predict_eigs_group(&spec, block, &coeffs, mode), c)
            };
            let prediction = match prediction {
                Ok(p) => p,
                Err(e) => return outcome(false, format!("draw {draw}: {e}")),
            };
            let g = gen_target_bd(&spec, draw).unwrap();
            let corrupted = inject_corruption(&g, &spec, &corruption, draw).unwrap();
            let actual = dense_spectrum(corrupted.graph.affinity(), mode);
            worst = worst.max(max_abs_gap(&prediction.eigenvalues(), &actual));
            count += 1;
        }
    }
    outcome(
        worst <= 1e-7,
        format!("{count} instances, max sorted gap {worst:.2e} (tol 1e-7)"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut count = 0;
    for draw in 0..100u64 {
        let spec = random_spec(&mut rng);
        let k = spec.n_blocks();
        let n = spec.n_vertices();
        let cap = 0.5 * min_within(&spec);
        let coeffs: Vec<f64> = (0..k).map(|_| rng.random_range(0.01 * cap..cap)).collect();
        let mut scenarios = Vec::new();
        for position in [1, 2, spec.sizes[0], spec.sizes[0] + 1, n + 1] {
            scenarios.push(CorruptionSpec {
                type2: vec![Type2Outlier {
                    position,
                    coefficients: coeffs.clone(),
                }],
                ..Default::default()
            });
        }
        for block in [0, k - 1] {
            let mut group = vec![vec![0.0; k]; k];
            for j in (0..k).filter(|&j| j != block) {
                group[block][j] = coeffs[j];
                group[j][block] = coeffs[j];
            }
            scenarios.push(CorruptionSpec {
                group_sim: group,
                ..Default::default()
            });
        }
        let mut group = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let x = rng.random_range(0.0..cap);
                group[i][j] = x;
                group[j][i] = x;
            }
        }
        scenarios.push(CorruptionSpec {
            group_sim: group,
            ..Default::default()
        });

        let g = gen_target_bd(&spec, draw).unwrap();
        for c in &scenarios {
            let predicted = match predict_v(&spec, c) {
                Ok(v) => v,
                Err(e) => return outcome(false, format!("draw {draw}: {e}")),
            };
            let corrupted = inject_corruption(&g, &spec, c, draw).unwrap();
            let actual = vector_v(corrupted.graph.laplacian());
            worst = worst.max(max_abs_gap(&predicted, &actual));
            count += 1;
        }
    }
    outcome(
        worst <= 1e-12,
        format!("{count} cases, max deviation {worst:.2e} (tol 1e-12)"),
    )
}

fn criterion_3() -> Outcome {
    let spec = BlockSpec::new(vec![10, 8, 12], vec![0.6, 0.3, 0.9]);
    let g = gen_target_bd(&spec, 0).unwrap();
    let actual = dense_spectrum(g.affinity(), EigenMode::Generalized);
    let mut expected = vec![0.0; 3];
    for n in [10usize, 8, 12] {
        expected.extend(std::iter::repeat_n(n as f64 / (n as f64 - 1.0), n - 1));
    }
    expected.sort_by(f64::total_cmp);
    let predicted = predict_eigs_target(&spec, EigenMode::Generalized)
        .unwrap()
        .eigenvalues();
    let gap = max_abs_gap(&expected, &actual).max(max_abs_gap(&expected, &predicted));
    outcome(gap <= 1e-9, format!("max deviation {gap:.2e} (tol 1e-9)"))
}

/// Affine least-squares residual by the normal equations, independent of the
/// prefix-sum implementation.
fn direct_cost(y: &[f64]) -> f64 {
    if y.len() < 3 {
        return 0.0;
    }
    let k = y.len() as f64;
    let mx = (k - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / k;
    let num: f64 = y.iter().enumerate().map(|(i, &v)| (i as f64 - mx) * (v - my)).sum();
    let den: f64 = (0..y.len()).map(|i| (i as f64 - mx).powi(2)).sum();
    let slope = num / den;
    y.iter()
        .enumerate()
        .map(|(i, &v)| (v - my - slope * (i as f64 - mx)).powi(2))
        .sum()
}

fn enumerate_best(v: &[f64], gamma: f64, min_segment: usize) -> (Vec<usize>, f64) {
    let n = v.len();
    let mut best = (Vec::new(), f64::INFINITY);
    for mask in 0u32..(1 << (n - 1)) {
        let tau: Vec<usize> = (1..n).filter(|t| mask >> (t - 1) & 1 == 1).collect();
        let mut prev = 0;
        let mut total = gamma * tau.len() as f64;
        let mut admissible = true;
        for &t in tau.iter().chain(std::iter::once(&n)) {
            admissible &= tau.is_empty() || t - prev >= min_segment;
            total += direct_cost(&v[prev..t]);
            prev = t;
        }
        if admissible && total < best.1 {
            best = (tau, total);
        }
    }
    best
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..500 {
        let len = rng.random_range(2..=12);
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let gamma = 10f64.powf(rng.random_range(-4.0..1.0));
        let min_segment = rng.random_range(2..=3);
        let (tau, best) = enumerate_best(&v, gamma, min_segment);
        let dp = segment_with_penalty(&v, gamma, min_segment);
        let dp_cost = penalized_cost(&v, &dp, gamma);
        let tie = (penalized_cost(&v, &tau, gamma) - dp_cost).abs() <= 1e-12 * best.max(1.0);
        if !(dp == tau || tie) || (dp_cost - best).abs() > 1e-9 * best.max(1.0) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("500 vectors, {mismatches} mismatches"))
}

struct SyntheticTally {
    recovered: usize,
    diag_ok: usize,
}

fn synthetic_recovery(cfg: &PipelineConfig) -> SyntheticTally {
    let mut tally = SyntheticTally {
        recovered: 0,
        diag_ok: 0,
    };
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(2..=3);
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(8..=20)).collect();
        let within: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..=1.0)).collect();
        let cap = 0.4 * within.iter().copied().fold(f64::INFINITY, f64::min);
        let mut group = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let x = rng.random_range(0.0..=cap);
                group[i][j] = x;
                group[j][i] = x;
            }
        }
        let spec = BlockSpec::new(sizes.clone(), within.clone()).with_jitter(0.01);
        let c = CorruptionSpec {
            group_sim: group,
            ..Default::default()
        };
        let out = inject_corruption(&gen_target_bd(&spec, seed).unwrap(), &spec, &c, seed).unwrap();
        let truth = out.truth_labels(&c);
        let Ok(res) = run(&out.graph, cfg, Some(&truth)) else {
            continue;
        };
        // True block of each position of the estimated layout.
        let ordered_truth: Vec<usize> = res
            .ordering
            .order
            .iter()
            .map(|&i| truth[res.type1.kept_indices[i]])
            .collect();
        let mut layout = Vec::new();
        for &label in &ordered_truth {
            match layout.last_mut() {
                Some((l, count)) if *l == label => *count += 1,
                _ => layout.push((label, 1usize)),
            }
        }
        let true_sizes: Vec<usize> = layout.iter().map(|&(_, c)| c).collect();
        if res.k_hat() != k || res.n_hat() != true_sizes.as_slice() || res.metrics.accuracy != Some(1.0) {
            continue;
        }
        tally.recovered += 1;
        let diag_ok = layout
            .iter()
            .enumerate()
            .all(|(i, &(label, _))| (res.estimate.w_sim[(i, i)] - within[label - 1]).abs() <= 0.05);
        if diag_ok {
            tally.diag_ok += 1;
        }
    }
    tally
}

fn criterion_5() -> Outcome {
    let scored = PipelineConfig {
        sparsify: SparsifyChoice::None,
        ..Default::default()
    };
    let t = synthetic_recovery(&scored);
    let mut detail = format!(
        "sparsify=none: recovered {}/100, diag within 0.05 in {}/{}",
        t.recovered, t.diag_ok, t.recovered
    );
    let variants = [
        ("pnn-union (default)", PipelineConfig::default()),
        (
            "pnn-mutual",
            PipelineConfig {
                knn_rule: KnnRule::Mutual,
                ..Default::default()
            },
        ),
        (
            "threshold",
            PipelineConfig {
                sparsify: SparsifyChoice::Threshold,
                ..Default::default()
            },
        ),
    ];
    for (name, cfg) in variants {
        let v = synthetic_recovery(&cfg);
        detail.push_str(&format!("; [info] {name}: {}/{}", v.recovered, v.diag_ok));
    }
    outcome(t.recovered >= 95 && t.diag_ok == t.recovered, detail)
}

fn read_table(path: &Path) -> std::io::Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter_map(|line| {
            let row: Option<Vec<f64>> = line.split(',').map(|f| f.trim().parse().ok()).collect();
            row.filter(|r| !r.is_empty())
        })
        .collect())
}

fn read_labels(path: &Path) -> std::io::Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.lines().filter_map(|l| l.trim().parse().ok()).collect())
}

fn real_data(features: &Path, labels: &Path) -> std::result::Result<(PipelineResult, Duration), String> {
    let rows = read_table(features).map_err(|e| format!("{}: {e}", features.display()))?;
    let truth = read_labels(labels).map_err(|e| format!("{}: {e}", labels.display()))?;
    let x = DataMatrix::from_sample_rows(&rows).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let res = run_on_data(&x, &PipelineConfig::default(), Some(&truth)).map_err(|e| e.to_string())?;
    Ok((res, start.elapsed()))
}

fn criterion_6() -> Outcome {
    let dir = data_dir();
    match real_data(&dir.join("iris.csv"), &dir.join("iris_labels.csv")) {
        Ok((res, elapsed)) => {
            let acc = res.metrics.accuracy.unwrap_or(0.0);
            outcome(
                res.k_hat() == 3 && acc >= 0.90 && elapsed < Duration::from_secs(5),
                format!(
                    "K={} n={:?} accuracy={acc:.4} in {elapsed:.2?}",
                    res.k_hat(),
                    res.n_hat()
                ),
            )
        }
        Err(e) => outcome(false, e),
    }
}

fn criterion_7() -> Outcome {
    let dir = std::env::var_os("BDRKIT_CERAMIC_DIR").map_or_else(data_dir, PathBuf::from);
    let features = dir.join("ceramic.csv");
    if !features.exists() {
        return outcome(false, format!("{} not found", features.display()));
    }
    match real_data(&features, &dir.join("ceramic_labels.csv")) {
        Ok((res, elapsed)) => {
            let acc = res.metrics.accuracy.unwrap_or(0.0);
            outcome(
                res.k_hat() == 2 && res.n_hat() == [44, 44] && acc >= 0.95 && elapsed < Duration::from_secs(2),
                format!(
                    "K={} n={:?} accuracy={acc:.4} in {elapsed:.2?}",
                    res.k_hat(),
                    res.n_hat()
                ),
            )
        }
        Err(e) => outcome(false, e),
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut contiguous = 0;
    for draw in 0..100u64 {
        let k = rng.random_range(2..=4);
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(2..=10)).collect();
        let within: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..=1.0)).collect();
        let spec = BlockSpec::new(sizes, within);
        let g = gen_target_bd(&spec, draw).unwrap();
        let block = spec.block_of_vertex();
        let mut perm: Vec<usize> = (0..g.len()).collect();
        perm.shuffle(&mut rng);
        let shuffled = g.permuted(&perm);
        let order = sbdo_order(&shuffled).order;
        let blocks: Vec<usize> = order.iter().map(|&i| block[perm[i]]).collect();
        let runs = 1 + blocks.windows(2).filter(|w| w[0] != w[1]).count();
        if runs == k {
            contiguous += 1;
        }
    }
    outcome(contiguous == 100, format!("{contiguous}/100 orderings contiguous"))
}

fn criterion_9() -> Outcome {
    let mut w = DMatrix::zeros(4, 4);
    for (a, b) in [(0, 1), (2, 3)] {
        w[(a, b)] = 1.0;
        w[(b, a)] = 1.0;
    }
    let labels = [1, 1, 2, 2];
    let m = modularity(&w, &labels).unwrap();
    let c = conductance(&w, &labels).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut invariant = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..40);
        let k = rng.random_range(1..=5);
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(1..=k)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(1..=k)).collect();
        let mut perm: Vec<usize> = (1..=k).collect();
        perm.shuffle(&mut rng);
        let relabeled: Vec<usize> = pred.iter().map(|&l| perm[l - 1]).collect();
        if accuracy(&pred, &truth).unwrap() == accuracy(&relabeled, &truth).unwrap() {
            invariant += 1;
        }
    }
    outcome(
        (m - 0.5).abs() <= 1e-12 && c == 0.0 && invariant == 1000,
        format!("modularity={m}, conductance={c}, accuracy invariant on {invariant}/1000 pairs"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "theorem eigenvalue oracle", Duration::from_secs(10), criterion_1),
        (2, "vector v oracle", Duration::from_secs(2), criterion_2),
        (3, "target spectrum", Duration::MAX, criterion_3),
        (4, "changepoint DP vs enumeration", Duration::MAX, criterion_4),
        (5, "synthetic end-to-end recovery", Duration::from_secs(60), criterion_5),
        (6, "Iris", Duration::MAX, criterion_6),
        (7, "Ceramic", Duration::MAX, criterion_7),
        (8, "sBDO contiguity", Duration::MAX, criterion_8),
        (9, "metric unit checks", Duration::MAX, criterion_9),
    ];
    let mut unexpected = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed < budget;
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == id);
        let status = match (pass, known) {
            (true, _) => "PASS".to_string(),
            (false, Some((_, why))) => format!("FAIL (known: {why})"),
            (false, None) => {
                unexpected += 1;
                "FAIL".to_string()
            }
        };
        println!("criterion {id} [{name}]: {status} -- {} [{elapsed:.2?}]", result.detail);
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
