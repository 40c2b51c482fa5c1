//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

#[path = "../../core/tests/common/dip_lp.rs"]
mod dip_lp;
#[path = "../../core/tests/common/pair_count.rs"]
mod pair_count;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use sigtest::baseline::dip_statistic;
use sigtest::bench::{
    run_cluster_benchmark, run_test_benchmark_with, ClusterBenchOutput, TestBenchConfig,
    TestBenchRecord, TestMethod, DEFAULT_SEPARATIONS,
};
use sigtest::cluster::ClusterMethod;
use sigtest::io::DatasetManifest;
use sigtest::metrics::{ari, vi, Partition};
use sigtest::rng::{derive_seed, substream};
use sigtest::stats::sorted_abs;
use sigtest::synth::{gen_two_clusters, standard_normal, TwoClusterSpec};
use sigtest::{SampleVector, SigtestConfig, Variant};

const SEED: u64 = 0;

const EXPECTED_RATES: [(TestMethod, [f64; 5]); 5] = [
    (TestMethod::Sigtest1, [69.0, 97.0, 100.0, 100.0, 100.0]),
    (TestMethod::Sigtest2, [56.0, 93.0, 99.0, 100.0, 100.0]),
    (
        TestMethod::AndersonDarling,
        [29.0, 76.0, 97.0, 100.0, 100.0],
    ),
    (TestMethod::Lilliefors, [10.0, 37.0, 74.0, 95.0, 100.0]),
    (TestMethod::Dip, [3.0, 8.0, 21.0, 82.0, 94.0]),
];

struct Verdict {
    id: &'static str,
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn new(id: &'static str, pass: bool, summary: impl Into<String>, details: Vec<String>) -> Self {
        Self {
            id,
            pass,
            summary: summary.into(),
            details,
        }
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn sample(v: Vec<f64>) -> SampleVector {
    SampleVector::new(v).unwrap()
}

fn rate_config(timing: bool) -> TestBenchConfig {
    TestBenchConfig {
        runs: 100,
        seed: SEED,
        timing,
        ..TestBenchConfig::default()
    }
}

fn rates(records: &[TestBenchRecord], m: TestMethod) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.method == m)
        .map(|r| r.success_rate)
        .collect()
}

fn ac1(records: &[TestBenchRecord]) -> Verdict {
    let mut details = Vec::new();
    let mut worst = 0.0f64;
    let mut ok = true;
    for (m, want) in EXPECTED_RATES {
        let got = rates(records, m);
        let dev: Vec<f64> = got.iter().zip(want).map(|(g, w)| g - w).collect();
        let row_ok = dev.iter().all(|d| d.abs() <= 10.0);
        ok &= row_ok;
        worst = dev.iter().fold(worst, |a, d| a.max(d.abs()));
        details.push(format!(
            "{:<9} got {:?} want {:?} {}",
            m.label(),
            got,
            want,
            if row_ok { "ok" } else { "outside ±10" }
        ));
    }
    Verdict::new(
        "AC-1",
        ok,
        format!("two-cluster success rates within ±10 points (worst deviation {worst:.0})"),
        details,
    )
}

fn ac2(records: &[TestBenchRecord]) -> Verdict {
    let mean_time = |m: TestMethod| {
        let t: Vec<f64> = records
            .iter()
            .filter(|r| r.method == m)
            .filter_map(|r| r.mean_time_s)
            .collect();
        t.iter().sum::<f64>() / t.len() as f64
    };
    let sig = mean_time(TestMethod::Sigtest1).max(mean_time(TestMethod::Sigtest2));
    let ad = mean_time(TestMethod::AndersonDarling);
    let ks = mean_time(TestMethod::Lilliefors);
    let dip = mean_time(TestMethod::Dip);
    let ordered = sig < ad && ad < ks && ks < dip;
    let ratio = ad / sig;
    let details = vec![
        format!(
            "sigtest1 {:.3e}s sigtest2 {:.3e}s AD {ad:.3e}s KS {ks:.3e}s dip {dip:.3e}s",
            mean_time(TestMethod::Sigtest1),
            mean_time(TestMethod::Sigtest2)
        ),
        format!(
            "ordering Sigtest < AD < KS < dip: {ordered}; AD/Sigtest = {ratio:.2} (need >= 10)"
        ),
    ];
    Verdict::new(
        "AC-2",
        ordered && ratio >= 10.0,
        format!("timing order and >= 10x speedup over AD (ratio {ratio:.2})"),
        details,
    )
}

fn ac3() -> Verdict {
    let cfg = SigtestConfig::default();
    let runs = 500u64;
    let kept = (0..runs)
        .into_par_iter()
        .filter(|&r| {
            let y = sample(standard_normal(200, derive_seed(SEED, &[3, r])));
            !sigtest::sigtest(&y, &cfg).unwrap().split
        })
        .count();
    let share = kept as f64 / runs as f64;
    Verdict::new(
        "AC-3",
        share >= 0.9,
        format!(
            "no split on single Gaussians in {kept}/{runs} runs ({:.1}%, need >= 90%)",
            100.0 * share
        ),
        vec![],
    )
}

fn ac4() -> Verdict {
    let (n, runs) = (1000usize, 100u64);
    let sorted: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|r| sorted_abs(&sample(standard_normal(n, derive_seed(SEED, &[4, r])))).into_inner())
        .collect();
    let small = (0..n)
        .filter(|&i| {
            let col: Vec<f64> = sorted.iter().map(|s| s[i]).collect();
            let mean = col.iter().sum::<f64>() / runs as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
            var <= 0.1
        })
        .count();
    let share = small as f64 / n as f64;
    Verdict::new(
        "AC-4",
        share >= 0.95,
        format!(
            "{small}/{n} sorted |x| indices have across-run variance <= 0.1 ({:.1}%, need >= 95%)",
            100.0 * share
        ),
        vec![],
    )
}

fn ac5() -> Verdict {
    let mut worst_dip = 0.0f64;
    let mut dip_cases = 0;
    for case in 0..200u64 {
        let mut rng = substream(SEED, &[5, case]);
        let n = 4 + (case as usize % 5);
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let u: f64 = rng.random();
                match case % 3 {
                    0 => u,
                    1 => 20.0 * u - 10.0,
                    _ => u + if i % 2 == 0 { 3.0 } else { 0.0 },
                }
            })
            .collect();
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        if s.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        dip_cases += 1;
        let got = dip_statistic(&sample(v.clone())).unwrap();
        worst_dip = worst_dip.max((got - dip_lp::dip_by_lp(&v)).abs());
    }

    let mut worst_ari = 0.0f64;
    for case in 0..500u64 {
        let mut rng = substream(SEED, &[55, case]);
        let n = rng.random_range(2..=12);
        let ka = rng.random_range(1..=n);
        let kb = rng.random_range(1..=n);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        let got = ari(&Partition::new(&a).unwrap(), &Partition::new(&b).unwrap()).unwrap();
        worst_ari = worst_ari.max((got - pair_count::ari_by_pairs(&a, &b)).abs());
    }

    let mut vi_exact = true;
    let mut vi_lines = Vec::new();
    for n in [2usize, 3, 7, 12, 150, 1000] {
        let singletons = Partition::new(&(0..n).collect::<Vec<_>>()).unwrap();
        let block = Partition::new(&vec![0; n]).unwrap();
        let got = vi(&singletons, &block).unwrap();
        vi_exact &= got == (n as f64).ln();
        vi_lines.push(format!("N={n}: {got}"));
    }
    let pass = worst_dip <= 1e-12 && worst_ari <= 1e-12 && vi_exact;
    Verdict::new(
        "AC-5",
        pass,
        "dip vs exact oracle, ARI vs pair counting, VI(singletons, one block) = ln N",
        vec![
            format!(
                "dip: {dip_cases} samples of size 4..8, max |error| {worst_dip:.2e} (<= 1e-12)"
            ),
            format!("ARI: 500 partition pairs with N <= 12, max |error| {worst_ari:.2e}"),
            format!("VI exact: {vi_exact} ({})", vi_lines.join(", ")),
        ],
    )
}

fn ac6() -> Verdict {
    let maps: [(f64, f64); 6] = [
        (-1.0, 0.0),
        (2.0, 0.0),
        (-3.7, 12.5),
        (0.25, -40.0),
        (9.5, 17.3),
        (-0.6, 3.0),
    ];
    let mut sig_mismatch = 0;
    let mut sig_checks = 0;
    let mut worst_dip = 0.0f64;
    let mut dyadic_exact = true;
    for case in 0..200u64 {
        let mut rng = substream(SEED, &[6, case]);
        let n = rng.random_range(20..=300);
        let v: Vec<f64> = match case % 3 {
            0 => standard_normal(n, derive_seed(SEED, &[6, case, 0])),
            1 => (0..n).map(|_| rng.random::<f64>()).collect(),
            _ => {
                let spec = TwoClusterSpec {
                    n_per_cluster: n / 2,
                    ..TwoClusterSpec::new(2.5, derive_seed(SEED, &[6, case, 1]))
                };
                gen_two_clusters(&spec).unwrap().column(0)
            }
        };
        let mut shuffled = v.clone();
        shuffled.shuffle(&mut rng);
        for variant in [Variant::Signature1, Variant::Signature2] {
            let cfg = SigtestConfig::with_variant(variant);
            let base = sigtest::sigtest(&sample(v.clone()), &cfg).unwrap();
            sig_checks += 1;
            if sigtest::sigtest(&sample(shuffled.clone()), &cfg).unwrap() != base {
                sig_mismatch += 1;
            }
            for (a, b) in maps {
                let out =
                    sigtest::sigtest(&sample(v.iter().map(|x| a * x + b).collect()), &cfg).unwrap();
                sig_checks += 1;
                if out.c != base.c || out.split != base.split {
                    sig_mismatch += 1;
                }
            }
        }
        let d = dip_statistic(&sample(v.clone())).unwrap();
        for (a, b) in maps {
            let moved = dip_statistic(&sample(v.iter().map(|x| a * x + b).collect())).unwrap();
            worst_dip = worst_dip.max((moved - d).abs());
        }
        dyadic_exact &= dip_statistic(&sample(v.iter().map(|x| 4.0 * x).collect())).unwrap() == d;
    }

    let mut relabel_mismatch = 0;
    for case in 0..300u64 {
        let mut rng = substream(SEED, &[66, case]);
        let n = rng.random_range(2..=200);
        let k = rng.random_range(1..=10);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut rng);
        let a2: Vec<usize> = a.iter().map(|&c| perm[c] + 100).collect();
        let (pa, pb, pa2) = (
            Partition::new(&a).unwrap(),
            Partition::new(&b).unwrap(),
            Partition::new(&a2).unwrap(),
        );
        if vi(&pa, &pb).unwrap() != vi(&pa2, &pb).unwrap()
            || ari(&pa, &pb).unwrap() != ari(&pa2, &pb).unwrap()
        {
            relabel_mismatch += 1;
        }
    }

    let pass = sig_mismatch == 0 && relabel_mismatch == 0 && dyadic_exact && worst_dip <= 1e-12;
    Verdict::new(
        "AC-6",
        pass,
        "invariance of sigtest, VI/ARI and dip",
        vec![
            format!("sigtest C and decision: {sig_mismatch} mismatches in {sig_checks} permuted/affine checks"),
            format!("VI/ARI relabelling: {relabel_mismatch} mismatches in 300 pairs"),
            format!(
                "dip: bitwise equal under x -> 4x: {dyadic_exact}; max |change| under other affine maps {worst_dip:.2e} (<= 1e-12)"
            ),
        ],
    )
}

fn summary_line(out: &ClusterBenchOutput, expected_k: usize) -> (usize, f64, String) {
    let hits = out.runs.iter().filter(|r| r.k == expected_k).count();
    let ks: Vec<usize> = out.runs.iter().map(|r| r.k).collect();
    let s = &out.summary[0];
    let ari_mean = s.ari_mean.unwrap_or(f64::NAN);
    let line = format!(
        "{} {}: k = {expected_k} in {hits}/{} runs (k values {:?}), mean ARI {ari_mean:.3}, mean VI {:.3}",
        s.dataset,
        s.method,
        out.runs.len(),
        ks,
        s.vi_mean.unwrap_or(f64::NAN)
    );
    (hits, ari_mean, line)
}

fn ac7() -> Verdict {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, method, target) in [
        ("iris", ClusterMethod::GMeansPlus, 0.58),
        ("seeds", ClusterMethod::DipMeansPlus, 0.71),
    ] {
        let manifest = DatasetManifest::builtin(name, &data_dir()).unwrap();
        match run_cluster_benchmark(std::slice::from_ref(&manifest), &[method], 20, SEED) {
            Ok(out) => {
                let (hits, mean_ari, line) = summary_line(&out, 3);
                let ok = hits >= 18 && (mean_ari - target).abs() <= 0.15;
                pass &= ok;
                details.push(format!(
                    "{line}; need >= 18/20 and ARI {target}±0.15: {}",
                    if ok { "ok" } else { "fail" }
                ));
                let standardized = DatasetManifest {
                    standardize: true,
                    ..manifest
                };
                if let Ok(out) = run_cluster_benchmark(&[standardized], &[method], 20, SEED) {
                    details.push(format!(
                        "  for reference, standardized: {}",
                        summary_line(&out, 3).2
                    ));
                }
            }
            Err(e) => {
                pass = false;
                details.push(format!("{name} {method}: unavailable ({e})"));
            }
        }
    }
    Verdict::new(
        "AC-7",
        pass,
        "clustering on Iris (G-means+) and Seeds (dip-means+)",
        details,
    )
}

fn without_timing(records: &[TestBenchRecord]) -> Vec<TestBenchRecord> {
    records
        .iter()
        .map(|r| TestBenchRecord {
            mean_time_s: None,
            ..r.clone()
        })
        .collect()
}

fn cluster_bytes(out: &ClusterBenchOutput) -> String {
    let mut runs = out.runs.clone();
    runs.iter_mut().for_each(|r| r.time_s = 0.0);
    let mut summary = out.summary.clone();
    summary.iter_mut().for_each(|s| s.mean_time_s = 0.0);
    serde_json::to_string(&(summary, runs)).unwrap()
}

fn ac8(first: &[TestBenchRecord]) -> Verdict {
    let again = run_test_benchmark_with(&rate_config(false)).unwrap();
    let table_same = serde_json::to_string(&without_timing(first)).unwrap()
        == serde_json::to_string(&again).unwrap();
    let iris = || {
        run_cluster_benchmark(
            &[DatasetManifest::builtin("iris", &data_dir()).unwrap()],
            &ClusterMethod::ALL,
            5,
            SEED,
        )
        .unwrap()
    };
    let cluster_same = cluster_bytes(&iris()) == cluster_bytes(&iris());
    Verdict::new(
        "AC-8",
        table_same && cluster_same,
        "reruns with the same seed are byte-identical apart from timings",
        vec![
            format!("test benchmark (5 methods x 5 separations x 100 runs): {table_same}"),
            format!("cluster benchmark (iris, 4 methods x 5 runs): {cluster_same}"),
        ],
    )
}

fn main() -> ExitCode {
    assert_eq!(DEFAULT_SEPARATIONS.len(), 5);
    let table = run_test_benchmark_with(&rate_config(true)).expect("test benchmark");
    let verdicts = [
        ac1(&table),
        ac2(&table),
        ac3(),
        ac4(),
        ac5(),
        ac6(),
        ac7(),
        ac8(&table),
    ];
    println!();
    for v in &verdicts {
        println!(
            "{} {} {}",
            v.id,
            if v.pass { "PASS" } else { "FAIL" },
            v.summary
        );
        for d in &v.details {
            println!("     {d}");
        }
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("acceptance: {passed}/{} criteria passed", verdicts.len());
    if passed == verdicts.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
