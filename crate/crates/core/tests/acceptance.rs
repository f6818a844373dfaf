//! Acceptance suite. Each criterion prints one PASS/FAIL line; tolerances and
//! run counts are pinned as constants next to the check that uses them.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noisegate::cli;
use noisegate::complexity::quanta_profile;
use noisegate::dataio::bin_into_quanta;
use noisegate::discretize::{
    ckmeans_breaks, discretize_with, estimate_noisy_area, extremes, noisy_area_at, threshold_median, Class,
    ThresholdMethod,
};
use noisegate::evalstats::metrics::{auc_from_bools, brier, perf_measures, Confusion, Measure};
use noisegate::evalstats::scott_knott::scott_knott_esd;
use noisegate::evalstats::stattest::wilcoxon_signed_rank;
use noisegate::learners::logistic::{fit_irls, penalized_gradient, penalized_objective};
use noisegate::learners::{tune, ClassifierKind, TuningGrid};
use noisegate::matrix::Matrix;
use noisegate::pipeline::experiments::{noisy_to_extremes_experiment, oversample_experiment, OversampleConfig};
use noisegate::pipeline::synthetic::{generate_synthetic, generate_with_weights};
use noisegate::pipeline::{incremental_analysis, interpretation_impact};

// Timed criteria run one at a time so their budgets do not overlap.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Writes straight to stdout so the line survives test-output capture.
fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let line = format!("criterion {id:>2} {}: {name} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {id} failed: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- 1

/// Best contiguous 2-split of the sorted sample by naive SS; returns the
/// size of the lower cluster and its cost.
fn brute_two_means(values: &[f64]) -> (usize, f64) {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let ss = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
    };
    let mut best = (0, f64::INFINITY);
    for k in 1..s.len() {
        if s[k] == s[k - 1] {
            continue;
        }
        let c = ss(&s[..k]) + ss(&s[k..]);
        if c < best.1 {
            best = (k, c);
        }
    }
    best
}

#[test]
fn criterion_01_ckmeans_matches_exhaustive_split() {
    const SAMPLES: usize = 200;
    const BUDGET: Duration = Duration::from_secs(5);
    let _g = serial();
    let start = Instant::now();
    let mut r = rng(101);
    let mut mismatches = 0;
    for s in 0..SAMPLES {
        let n = r.random_range(2..=20);
        // integer grids produce ties; continuous draws do not
        let values: Vec<f64> = if s % 2 == 0 {
            (0..n).map(|_| r.random_range(-50.0..50.0)).collect()
        } else {
            (0..n).map(|_| r.random_range(0..8) as f64).collect()
        };
        let distinct = {
            let mut d = values.clone();
            d.sort_by(f64::total_cmp);
            d.dedup();
            d
        };
        if distinct.len() < 2 {
            continue;
        }
        let (xs, ends) = ckmeans_breaks(&values, 2).unwrap();
        let lower_max = xs[ends[0] - 1];
        let dp_lower = values.iter().filter(|&&v| v <= lower_max).count();
        let (bf_lower, _) = brute_two_means(&values);
        if dp_lower != bf_lower {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "optimal 2-means equals exhaustive contiguous split",
        mismatches == 0 && elapsed < BUDGET,
        format!("{mismatches} mismatches in {SAMPLES}, {:.2}s", elapsed.as_secs_f64()),
    );
}

// ---------------------------------------------------------------- 2

fn enumerate_wilcoxon_p(d: &[f64]) -> f64 {
    let d: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
    let n = d.len();
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    // average ranks by direct counting
    let ranks: Vec<f64> = abs
        .iter()
        .map(|&a| {
            let below = abs.iter().filter(|&&b| b < a).count() as f64;
            let equal = abs.iter().filter(|&&b| b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        let w: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            le += 1;
        }
        if w >= observed - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}

#[test]
fn criterion_02_wilcoxon_exact_matches_enumeration() {
    const FIXTURES: usize = 100;
    const TOL: f64 = 1e-12;
    const BUDGET: Duration = Duration::from_secs(10);
    let _g = serial();
    let start = Instant::now();
    let mut r = rng(202);
    let mut worst = 0.0f64;
    for f in 0..FIXTURES {
        let n = r.random_range(1..=12);
        let shift = r.random_range(-1.5..1.5);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0.0..4.0)).collect();
        // every third fixture uses coarse values to create tied |d|
        let b: Vec<f64> = a
            .iter()
            .map(|x| {
                let v = x + shift + r.random_range(-1.0..1.0);
                if f % 3 == 0 {
                    (v * 2.0).round() / 2.0 + 0.25
                } else {
                    v
                }
            })
            .collect();
        let res = wilcoxon_signed_rank(&a, &b).unwrap();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let oracle = if res.n_effective == 0 { 1.0 } else { enumerate_wilcoxon_p(&d) };
        assert!(res.exact);
        worst = worst.max((res.p_value - oracle).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        2,
        "exact signed-rank p equals 2^n enumeration",
        worst <= TOL && elapsed < BUDGET,
        format!("max |Δp| = {worst:.2e}, {:.2}s", elapsed.as_secs_f64()),
    );
}

// ---------------------------------------------------------------- 3

/// Two-sided rank-sum p by enumerating every m-subset of the pooled ranks.
fn enumerate_rank_sum_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let rank = |v: f64| pooled.iter().filter(|&&w| w < v).count() + 1;
    let observed: usize = a.iter().map(|&v| rank(v)).sum();
    let m = a.len();
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    // walk all m-combinations of 1..=n
    let mut idx: Vec<usize> = (1..=m).collect();
    loop {
        let s: usize = idx.iter().sum();
        total += 1;
        if s <= observed {
            le += 1;
        }
        if s >= observed {
            ge += 1;
        }
        let mut i = m;
        while i > 0 && idx[i - 1] == n - m + i {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}

fn direct_d(a: &[f64], b: &[f64]) -> f64 {
    let ma = a.iter().sum::<f64>() / a.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    let ssa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let ssb: f64 = b.iter().map(|x| (x - mb).powi(2)).sum();
    (ma - mb) / ((ssa + ssb) / (a.len() + b.len() - 2) as f64).sqrt()
}

/// Ordered partitions of `order` into contiguous blocks, reached by the
/// top-down rule: among all cuts pick the largest between-group SS computed
/// from raw values, keep it only when the sides differ.
fn oracle_partition(groups: &[Vec<f64>], order: &[usize], out: &mut Vec<Vec<usize>>) {
    if order.len() > 1 {
        let all: Vec<f64> = order.iter().flat_map(|&g| groups[g].clone()).collect();
        let grand = all.iter().sum::<f64>() / all.len() as f64;
        let mut best: Option<(usize, f64)> = None;
        for k in 1..order.len() {
            let left: Vec<f64> = order[..k].iter().flat_map(|&g| groups[g].clone()).collect();
            let right: Vec<f64> = order[k..].iter().flat_map(|&g| groups[g].clone()).collect();
            let ml = left.iter().sum::<f64>() / left.len() as f64;
            let mr = right.iter().sum::<f64>() / right.len() as f64;
            let bss = left.len() as f64 * (ml - grand).powi(2) + right.len() as f64 * (mr - grand).powi(2);
            if best.is_none_or(|(_, b)| bss > b) {
                best = Some((k, bss));
            }
        }
        let k = best.unwrap().0;
        let left: Vec<f64> = order[..k].iter().flat_map(|&g| groups[g].clone()).collect();
        let right: Vec<f64> = order[k..].iter().flat_map(|&g| groups[g].clone()).collect();
        if enumerate_rank_sum_p(&left, &right) <= 0.05 && direct_d(&left, &right).abs() > 0.2 {
            oracle_partition(groups, &order[..k], out);
            oracle_partition(groups, &order[k..], out);
            return;
        }
    }
    out.push(order.to_vec());
}

#[test]
fn criterion_03_scott_knott_matches_partition_oracle() {
    const FIXTURES: usize = 50;
    const BUDGET: Duration = Duration::from_secs(30);
    let _g = serial();
    let start = Instant::now();
    let mut r = rng(303);
    let mut mismatches = 0;
    let mut n_parts_seen = std::collections::BTreeSet::new();
    for _ in 0..FIXTURES {
        let groups: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                let centre = [0.0, 0.6, 1.5, 4.0][r.random_range(0..4)];
                let n = r.random_range(2..=6);
                (0..n).map(|_| centre + r.random_range(-1.0..1.0)).collect()
            })
            .collect();
        let got = scott_knott_esd(&groups).unwrap();
        let means: Vec<f64> = groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| means[b].partial_cmp(&means[a]).unwrap());
        let mut parts = Vec::new();
        oracle_partition(&groups, &order, &mut parts);
        let mut want = vec![0; 4];
        for (rank, part) in parts.iter().enumerate() {
            for &g in part {
                want[g] = rank + 1;
            }
        }
        n_parts_seen.insert(parts.len());
        if got != want {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        3,
        "Scott-Knott ESD equals brute-force partition search",
        mismatches == 0 && elapsed < BUDGET,
        format!(
            "{mismatches} mismatches in {FIXTURES}, partition sizes seen {n_parts_seen:?}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_04_metric_identities() {
    const FIXTURES: usize = 100;
    const TOL: f64 = 1e-12;
    let mut r = rng(404);
    let mut auc_mismatch = 0;
    for _ in 0..FIXTURES {
        let n = r.random_range(2..=40);
        let mut truth: Vec<bool> = (0..n).map(|_| r.random_bool(0.5)).collect();
        truth[0] = true;
        truth[1] = false;
        // one decimal place forces score ties
        let scores: Vec<f64> = (0..n).map(|_| (r.random_range(0.0..1.0f64) * 10.0).round() / 10.0).collect();
        let (mut credit, mut pairs) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if truth[i] && !truth[j] {
                    pairs += 1.0;
                    credit += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        if (auc_from_bools(&truth, &scores).unwrap() - credit / pairs).abs() > TOL {
            auc_mismatch += 1;
        }
    }

    let (tp, fp, fn_, tn) = (3.0, 1.0, 2.0, 4.0);
    let truth: Vec<Class> = [[Class::Class1; 3].as_slice(), &[Class::Class2], &[Class::Class1; 2], &[Class::Class2; 4]].concat();
    let probs = [0.9, 0.8, 0.7, 0.6, 0.3, 0.2, 0.1, 0.4, 0.2, 0.05];
    let perf = perf_measures(&truth, &probs, 0.5).unwrap();
    let precision = tp / (tp + fp);
    let recall = tp / (tp + fn_);
    let expected = [
        (Measure::Accuracy, (tp + tn) / 10.0),
        (Measure::Precision, precision),
        (Measure::Recall, recall),
        (Measure::FMeasure, 2.0 * precision * recall / (precision + recall)),
        (Measure::Mcc, 10.0 / 600f64.sqrt()),
        (
            Measure::Brier,
            probs
                .iter()
                .zip(&truth)
                .map(|(p, c)| (p - if *c == Class::Class1 { 1.0 } else { 0.0 }).powi(2))
                .sum::<f64>()
                / 10.0,
        ),
    ];
    let worst = expected.iter().map(|(m, v)| (perf.get(*m) - v).abs()).fold(0.0, f64::max);
    let c = Confusion {
        tp: 3,
        fp: 1,
        fn_: 2,
        tn: 4,
    };
    let mcc_direct = (c.mcc().unwrap() - 10.0 / 600f64.sqrt()).abs();
    let bools: Vec<bool> = truth.iter().map(|c| c.is_positive()).collect();
    let brier_direct = (brier(&bools, &probs) - expected[5].1).abs();
    verdict(
        4,
        "AUC and threshold metrics equal definitional formulas",
        auc_mismatch == 0 && worst <= TOL && mcc_direct <= TOL && brier_direct <= TOL,
        format!("{auc_mismatch} AUC mismatches in {FIXTURES}, max fixture error {worst:.1e}"),
    );
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_05_logistic_gradient_and_irls_convergence() {
    const INSTANCES: usize = 20;
    const REL_TOL: f64 = 1e-5;
    const GRAD_TOL: f64 = 1e-6;
    const H: f64 = 1e-6;
    let mut r = rng(505);
    let mut worst_rel = 0.0f64;
    let mut worst_grad = 0.0f64;
    for _ in 0..INSTANCES {
        let n = r.random_range(10..=40);
        let p = r.random_range(1..=4);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
        let z = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows
            .iter()
            .map(|row| if row[0] + r.random_range(-1.5..1.5) > 0.0 { 1.0 } else { 0.0 })
            .collect();
        let ridge = r.random_range(0.01..1.0);
        let coef: Vec<f64> = (0..=p).map(|_| r.random_range(-1.0..1.0)).collect();
        let g = penalized_gradient(&z, &y, &coef, ridge);
        for j in 0..=p {
            let mut up = coef.clone();
            let mut dn = coef.clone();
            up[j] += H;
            dn[j] -= H;
            let fd = (penalized_objective(&z, &y, &up, ridge) - penalized_objective(&z, &y, &dn, ridge)) / (2.0 * H);
            let rel = (g[j] - fd).abs() / g[j].abs().max(fd.abs()).max(1.0);
            worst_rel = worst_rel.max(rel);
        }
        let fit = fit_irls(&z, &y, ridge);
        let gt = penalized_gradient(&z, &y, &fit.coef, ridge);
        worst_grad = worst_grad.max(gt.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    verdict(
        5,
        "logistic gradient matches finite differences and IRLS converges",
        worst_rel <= REL_TOL && worst_grad < GRAD_TOL,
        format!("max relative error {worst_rel:.1e}, max terminal |∇|∞ {worst_grad:.1e}"),
    );
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_06_noisy_area_recovery() {
    const RUNS: u64 = 100;
    const REQUIRED: usize = 95;
    const BUDGET: Duration = Duration::from_secs(120);
    let _g = serial();
    let start = Instant::now();
    let mut hits = 0;
    let mut limits = std::collections::BTreeMap::new();
    for seed in 0..RUNS {
        let data = generate_synthetic(2000, 5, 10.0, 1.0, seed).unwrap();
        let c = threshold_median(data.target()).unwrap();
        let spec = estimate_noisy_area(&data, c, 5.0, seed).unwrap();
        let limit = spec.limit_pct().map(|l| l.round() as i64).unwrap_or(-1);
        *limits.entry(limit).or_insert(0usize) += 1;
        if limit == 10 || limit == 15 {
            hits += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        6,
        "estimated limit recovers the planted ±10% band",
        hits >= REQUIRED && elapsed < BUDGET,
        format!("{hits}/{RUNS} in {{10, 15}}, limits {limits:?}, {:.1}s", elapsed.as_secs_f64()),
    );
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_07_complexity_rises_toward_cutpoint() {
    const RUNS: u64 = 100;
    const REQUIRED: usize = 95;
    let _g = serial();
    let start = Instant::now();
    let (mut n4_hits, mut n2_hits) = (0, 0);
    for seed in 0..RUNS {
        let data = generate_synthetic(2000, 5, 10.0, 1.0, seed).unwrap();
        let c = threshold_median(data.target()).unwrap();
        let spec = discretize_with(&data, c, Some(ThresholdMethod::Median)).unwrap();
        let quanta = bin_into_quanta(&data, &spec.labels, 5).unwrap();
        let profile = quanta_profile(data.features(), &spec.labels, &quanta, seed).unwrap();
        let first = &profile[0].report;
        let last = &profile[4].report;
        n4_hits += usize::from(last.n4 > first.n4);
        n2_hits += usize::from(last.n2 > first.n2);
    }
    verdict(
        7,
        "N4 and N2 of the bin nearest the cutpoint exceed the farthest bin",
        n4_hits >= REQUIRED && n2_hits >= REQUIRED,
        format!("N4 {n4_hits}/{RUNS}, N2 {n2_hits}/{RUNS}, {:.1}s", start.elapsed().as_secs_f64()),
    );
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_08_oversampled_noise_costs_little_auc() {
    const N_BOOT: usize = 25;
    const RF_DROP: f64 = 0.10;
    const KNN_DROP: f64 = 0.15;
    const BUDGET: Duration = Duration::from_secs(600);
    const SEED: u64 = 8;
    let _g = serial();
    let start = Instant::now();
    let data = generate_synthetic(2000, 5, 10.0, 1.0, SEED).unwrap();
    let c = threshold_median(data.target()).unwrap();
    let spec = discretize_with(&data, c, Some(ThresholdMethod::Median)).unwrap();
    let limit = estimate_noisy_area(&data, c, 5.0, SEED).unwrap().limit_pct().unwrap();
    let area = noisy_area_at(data.target(), c, limit);
    let ext = extremes(data.target(), 0.1).unwrap();
    let cfg = OversampleConfig {
        over_sample_pcts: vec![0, 300],
    };
    let grid = TuningGrid::default();
    let mut deltas = Vec::new();
    for kind in [ClassifierKind::RandomForest, ClassifierKind::Knn] {
        let rows = oversample_experiment(&data, &spec, &area, &ext, kind, &cfg, N_BOOT, SEED, &grid).unwrap();
        deltas.push(rows[1].median_auc - rows[0].median_auc);
    }
    let elapsed = start.elapsed();
    verdict(
        8,
        "300% oversampled noisy area barely lowers AUC on extremes",
        deltas[0] >= -RF_DROP && deltas[1] >= -KNN_DROP && elapsed < BUDGET,
        format!("RF ΔAUC {:+.4}, KNN ΔAUC {:+.4}, {:.1}s", deltas[0], deltas[1], elapsed.as_secs_f64()),
    );
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_09_noisy_area_generalizes_to_extremes() {
    const N_BOOT: usize = 25;
    const MIN_AUC: f64 = 0.9;
    const SEED: u64 = 9;
    let _g = serial();
    // no planted band: the label-feature relation is linear everywhere
    let data = generate_synthetic(2000, 5, 0.0, 1.0, SEED).unwrap();
    let c = threshold_median(data.target()).unwrap();
    let spec = discretize_with(&data, c, Some(ThresholdMethod::Median)).unwrap();
    let limit = estimate_noisy_area(&data, c, 5.0, SEED).unwrap().limit_pct().unwrap();
    let area = noisy_area_at(data.target(), c, limit);
    let ext = extremes(data.target(), 0.1).unwrap();
    let rows = area.rows(data.target());
    let labels: Vec<Class> = rows.iter().map(|&i| spec.labels[i]).collect();
    let params = tune(
        ClassifierKind::RandomForest,
        &data.features().select_rows(&rows),
        &labels,
        &TuningGrid::default(),
        SEED,
    )
    .unwrap();
    let res = noisy_to_extremes_experiment(&data, &spec, &area, &ext, &params, N_BOOT, SEED).unwrap();
    verdict(
        9,
        "random forest trained on the noisy area separates the extremes",
        res.median_auc >= MIN_AUC,
        format!("median AUC {:.4} from {} noisy rows, limit {limit}%", res.median_auc, res.n_noisy),
    );
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_dominant_feature_ranks_do_not_shift() {
    const RUNS: u64 = 100;
    const REQUIRED: usize = 95;
    const N: usize = 600;
    const N_BOOT: usize = 20;
    const N_REP: usize = 100;
    const WEIGHTS: [f64; 5] = [3.0, 1.5, 0.7, 0.0, 0.0];
    let _g = serial();
    let start = Instant::now();
    let names: Vec<String> = (1..=5).map(|j| format!("x{j}")).collect();
    let mut zero_runs = 0;
    let mut significant = 0;
    for seed in 0..RUNS {
        let data = generate_with_weights(N, &WEIGHTS, 10.0, 1.0, seed).unwrap();
        let c = threshold_median(data.target()).unwrap();
        let spec = discretize_with(&data, c, Some(ThresholdMethod::Median)).unwrap();
        let noisy = estimate_noisy_area(&data, c, 5.0, seed).unwrap();
        let points = incremental_analysis(&data, &spec, &noisy, ClassifierKind::LogisticRegression, N_BOOT, seed).unwrap();
        let interp = interpretation_impact(&points, &names, 3, N_REP, seed, false).unwrap();
        if (1..=3).all(|k| interp.rank_shift[&k] == 0.0) {
            zero_runs += 1;
        }
        significant += usize::from(interp.overall_p <= 0.05);
    }
    verdict(
        10,
        "top-3 rank-shift likelihoods vanish with a dominant feature",
        zero_runs >= REQUIRED,
        format!(
            "{zero_runs}/{RUNS} runs with zero top-3 shift, overall rank test significant in {significant}, {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 11

fn bundled_data() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic.csv")
}

#[test]
fn criterion_11_analyze_is_deterministic_and_fast() {
    const BUDGET: Duration = Duration::from_secs(300);
    let _g = serial();
    let dir = tempfile::tempdir().unwrap();
    // identical config includes the output directory, which the report echoes
    let out = dir.path().join("out");
    let run = || {
        let args = [
            "noisegate".into(),
            "analyze".into(),
            "--input".into(),
            bundled_data().into_os_string(),
            "--target".into(),
            "y".into(),
            "--out".into(),
            out.clone().into_os_string(),
        ];
        let start = Instant::now();
        let code = cli::run(args, &mut Vec::new());
        let elapsed = start.elapsed();
        (code, std::fs::read(out.join("report.json")).unwrap(), elapsed)
    };
    let (code_a, report_a, elapsed) = run();
    let (code_b, report_b, _) = run();
    let identical = report_a == report_b;
    verdict(
        11,
        "default analyze is byte-identical across runs and within budget",
        code_a == 0 && code_b == 0 && identical && elapsed < BUDGET,
        format!("exit {code_a}/{code_b}, identical {identical}, {:.1}s per run", elapsed.as_secs_f64()),
    );
}
