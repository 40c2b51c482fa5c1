//! Benchmark drivers: rejection rates and per-call times of the unimodality
//! tests on two-cluster synthetic data, and cluster-count estimation on
//! labelled datasets.
//!
//! Statistical columns depend only on the master seed. Each run draws its data
//! and any bootstrap from its own substream, so runs execute in parallel.
//! Timings are taken in a separate serial pass on a one-thread pool.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{anderson_darling, dip_test, ks_lilliefors, DEFAULT_BOOTSTRAP};
use crate::cluster::ClusterMethod;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::io::{load_csv, DatasetManifest};
use crate::metrics::{ari, vi, Partition};
use crate::rng::derive_seed;
use crate::sigtest::{sigtest, SigtestConfig, Variant};
use crate::stats::SampleVector;
use crate::synth::{gen_two_clusters, TwoClusterSpec};

pub const DEFAULT_SEPARATIONS: [f64; 5] = [2.0, 2.25, 2.5, 2.8, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestMethod {
    #[serde(rename = "sigtest1")]
    Sigtest1,
    #[serde(rename = "sigtest2")]
    Sigtest2,
    #[serde(rename = "AD")]
    AndersonDarling,
    #[serde(rename = "KS")]
    Lilliefors,
    #[serde(rename = "dip")]
    Dip,
}

impl TestMethod {
    pub const ALL: [TestMethod; 5] = [
        TestMethod::Sigtest1,
        TestMethod::Sigtest2,
        TestMethod::AndersonDarling,
        TestMethod::Lilliefors,
        TestMethod::Dip,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TestMethod::Sigtest1 => "sigtest1",
            TestMethod::Sigtest2 => "sigtest2",
            TestMethod::AndersonDarling => "AD",
            TestMethod::Lilliefors => "KS",
            TestMethod::Dip => "dip",
        }
    }

    /// Case-insensitive; accepts the labels plus `ad`, `ks`, `lilliefors`.
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "sigtest1" | "sigtest" => Some(TestMethod::Sigtest1),
            "sigtest2" => Some(TestMethod::Sigtest2),
            "ad" | "anderson-darling" => Some(TestMethod::AndersonDarling),
            "ks" | "lilliefors" => Some(TestMethod::Lilliefors),
            "dip" => Some(TestMethod::Dip),
            _ => None,
        }
    }

    /// Applies the test. `seed` drives the dip bootstrap and is ignored by
    /// the other methods.
    pub fn run(self, y: &SampleVector, params: &TestParams, seed: u64) -> Result<TestReport> {
        let report = |statistic, p_value, split| TestReport {
            method: self,
            n: y.len(),
            statistic,
            p_value,
            split,
        };
        Ok(match self {
            TestMethod::Sigtest1 | TestMethod::Sigtest2 => {
                let variant = if self == TestMethod::Sigtest1 {
                    Variant::Signature1
                } else {
                    Variant::Signature2
                };
                let out = sigtest(y, &params.sigtest(variant))?;
                report(out.c, None, out.split)
            }
            TestMethod::AndersonDarling => {
                let d = anderson_darling(y, params.ad_alpha)?;
                report(d.statistic, d.p_value, d.reject_unimodal)
            }
            TestMethod::Lilliefors => {
                let d = ks_lilliefors(y, params.ks_alpha)?;
                report(d.statistic, d.p_value, d.reject_unimodal)
            }
            TestMethod::Dip => {
                let d = dip_test(y, params.dip_bootstrap, seed)?;
                report(d.statistic, d.p_value, d.reject_unimodal)
            }
        })
    }
}

impl std::fmt::Display for TestMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome of one test call. For Sigtest the statistic is the violation
/// fraction `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: TestMethod,
    pub n: usize,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub split: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestParams {
    pub gamma: f64,
    pub threshold: f64,
    pub min_samples: usize,
    pub ad_alpha: f64,
    pub ks_alpha: f64,
    pub dip_bootstrap: usize,
}

impl Default for TestParams {
    fn default() -> Self {
        let s = SigtestConfig::default();
        Self {
            gamma: s.gamma,
            threshold: s.threshold,
            min_samples: s.min_samples,
            ad_alpha: 0.0001,
            ks_alpha: 0.05,
            dip_bootstrap: DEFAULT_BOOTSTRAP,
        }
    }
}

impl TestParams {
    pub fn sigtest(&self, variant: Variant) -> SigtestConfig {
        SigtestConfig {
            gamma: self.gamma,
            threshold: self.threshold,
            variant,
            min_samples: self.min_samples,
        }
    }
}

/// Mean seconds per call of `f` over `inputs`. The first input is also used
/// for one untimed warm-up call.
pub fn time_method<I, R>(inputs: &[I], mut f: impl FnMut(&I) -> Result<R>) -> Result<f64> {
    let first = inputs.first().ok_or(Error::EmptyInput)?;
    std::hint::black_box(f(first)?);
    let start = Instant::now();
    for input in inputs {
        std::hint::black_box(f(input)?);
    }
    Ok(start.elapsed().as_secs_f64() / inputs.len() as f64)
}

fn serial<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestBenchConfig {
    pub separations: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    pub methods: Vec<TestMethod>,
    pub params: TestParams,
    pub n_per_cluster: usize,
    pub sigma: f64,
    /// Points are generated in this many dimensions and tested on the first
    /// coordinate, the axis through both centers.
    pub dimension: usize,
    pub timing: bool,
}

impl Default for TestBenchConfig {
    fn default() -> Self {
        Self {
            separations: DEFAULT_SEPARATIONS.to_vec(),
            runs: 100,
            seed: 0,
            methods: TestMethod::ALL.to_vec(),
            params: TestParams::default(),
            n_per_cluster: 100,
            sigma: 1.0,
            dimension: 1,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestBenchRecord {
    pub method: TestMethod,
    pub separation: f64,
    /// Percentage of runs that rejected unimodality.
    pub success_rate: f64,
    pub mean_time_s: Option<f64>,
    pub runs: usize,
    pub seed: u64,
}

fn separation_inputs(config: &TestBenchConfig, s: usize) -> Result<Vec<SampleVector>> {
    (0..config.runs)
        .into_par_iter()
        .map(|r| {
            let spec = TwoClusterSpec {
                n_per_cluster: config.n_per_cluster,
                sigma: config.sigma,
                separation: config.separations[s],
                dimension: config.dimension,
                seed: derive_seed(config.seed, &[s as u64, r as u64]),
            };
            SampleVector::new(gen_two_clusters(&spec)?.column(0))
        })
        .collect()
}

fn method_seed(config: &TestBenchConfig, s: usize, r: usize, m: TestMethod) -> u64 {
    derive_seed(config.seed, &[s as u64, r as u64, 1_000 + m as u64])
}

pub fn run_test_benchmark(
    separations: &[f64],
    runs: usize,
    seed: u64,
) -> Result<Vec<TestBenchRecord>> {
    run_test_benchmark_with(&TestBenchConfig {
        separations: separations.to_vec(),
        runs,
        seed,
        ..TestBenchConfig::default()
    })
}

/// Every method sees the same data for a given separation and run.
pub fn run_test_benchmark_with(config: &TestBenchConfig) -> Result<Vec<TestBenchRecord>> {
    if config.runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    let mut records = Vec::new();
    for &method in &config.methods {
        for (s, &separation) in config.separations.iter().enumerate() {
            let inputs = separation_inputs(config, s)?;
            let splits: Vec<bool> = inputs
                .par_iter()
                .enumerate()
                .map(|(r, y)| {
                    method
                        .run(y, &config.params, method_seed(config, s, r, method))
                        .map(|t| t.split)
                })
                .collect::<Result<_>>()?;
            let mean_time_s = if config.timing {
                let seed = method_seed(config, s, 0, method);
                Some(serial(|| {
                    time_method(&inputs, |y| method.run(y, &config.params, seed))
                })??)
            } else {
                None
            };
            records.push(TestBenchRecord {
                method,
                separation,
                success_rate: 100.0 * splits.iter().filter(|&&b| b).count() as f64
                    / config.runs as f64,
                mean_time_s,
                runs: config.runs,
                seed: config.seed,
            });
        }
    }
    Ok(records)
}

/// One clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRunRecord {
    pub dataset: String,
    pub method: ClusterMethod,
    pub run: usize,
    pub seed: u64,
    pub standardized: bool,
    pub k: usize,
    /// Absent when the dataset has no labels.
    pub vi: Option<f64>,
    pub ari: Option<f64>,
    pub time_s: f64,
}

/// Mean and population standard deviation over the runs of one
/// dataset/method pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterBenchRecord {
    pub dataset: String,
    pub method: ClusterMethod,
    pub expected_k: Option<usize>,
    pub k_mean: f64,
    pub k_std: f64,
    pub vi_mean: Option<f64>,
    pub vi_std: Option<f64>,
    pub ari_mean: Option<f64>,
    pub ari_std: Option<f64>,
    pub mean_time_s: f64,
    pub runs: usize,
    pub seed: u64,
    pub standardized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterBenchOutput {
    pub summary: Vec<ClusterBenchRecord>,
    pub runs: Vec<ClusterRunRecord>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn dataset_seed(seed: u64, name: &str) -> u64 {
    let path: Vec<u64> = name.bytes().map(u64::from).collect();
    derive_seed(seed, &path)
}

fn cluster_runs(
    data: &Dataset,
    standardized: bool,
    method: ClusterMethod,
    runs: usize,
    seed: u64,
) -> Result<Vec<ClusterRunRecord>> {
    let truth = data
        .label_ids()
        .map(|ids| Partition::new(&ids))
        .transpose()?;
    let criterion = method.default_criterion();
    let base = derive_seed(dataset_seed(seed, &data.name), &[method as u64]);
    (0..runs)
        .map(|run| {
            let run_seed = derive_seed(base, &[run as u64]);
            let start = Instant::now();
            let result = method.run(data, &criterion, run_seed)?;
            let time_s = start.elapsed().as_secs_f64();
            let found = Partition::new(&result.assignment)?;
            let (vi, ari) = match &truth {
                Some(t) => (Some(vi(&found, t)?), Some(ari(&found, t)?)),
                None => (None, None),
            };
            Ok(ClusterRunRecord {
                dataset: data.name.clone(),
                method,
                run,
                seed: run_seed,
                standardized,
                k: result.k,
                vi,
                ari,
                time_s,
            })
        })
        .collect()
}

fn summarize(
    expected_k: Option<usize>,
    runs: &[ClusterRunRecord],
    seed: u64,
) -> ClusterBenchRecord {
    let ks: Vec<f64> = runs.iter().map(|r| r.k as f64).collect();
    let (k_mean, k_std) = mean_std(&ks);
    let optional = |f: fn(&ClusterRunRecord) -> Option<f64>| {
        runs.iter()
            .map(f)
            .collect::<Option<Vec<f64>>>()
            .map(|v| mean_std(&v))
    };
    let vi = optional(|r| r.vi);
    let ari = optional(|r| r.ari);
    let times: Vec<f64> = runs.iter().map(|r| r.time_s).collect();
    ClusterBenchRecord {
        dataset: runs[0].dataset.clone(),
        method: runs[0].method,
        expected_k,
        k_mean,
        k_std,
        vi_mean: vi.map(|v| v.0),
        vi_std: vi.map(|v| v.1),
        ari_mean: ari.map(|v| v.0),
        ari_std: ari.map(|v| v.1),
        mean_time_s: mean_std(&times).0,
        runs: runs.len(),
        seed,
        standardized: runs[0].standardized,
    }
}

/// Runs every method on every dataset `runs` times. All datasets are loaded
/// before any clustering starts, so a load failure yields no records.
pub fn run_cluster_benchmark(
    manifests: &[DatasetManifest],
    methods: &[ClusterMethod],
    runs: usize,
    seed: u64,
) -> Result<ClusterBenchOutput> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    let datasets: Vec<Dataset> = manifests
        .iter()
        .map(|m| {
            load_csv(m).map_err(|e| Error::Dataset {
                name: m.name.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut out = ClusterBenchOutput {
        summary: Vec::new(),
        runs: Vec::new(),
    };
    for (manifest, data) in manifests.iter().zip(&datasets) {
        for &method in methods {
            let records =
                cluster_runs(data, manifest.standardize, method, runs, seed).map_err(|e| {
                    Error::Dataset {
                        name: manifest.name.clone(),
                        source: Box::new(e),
                    }
                })?;
            out.summary
                .push(summarize(manifest.expected_k, &records, seed));
            out.runs.extend(records);
        }
    }
    Ok(out)
}
