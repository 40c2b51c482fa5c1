use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sigtest::bench::{
    run_cluster_benchmark, run_test_benchmark_with, TestBenchConfig, TestMethod, TestParams,
    DEFAULT_SEPARATIONS,
};
use sigtest::cluster::{project_split, ClusterMethod, HierarchyOptions, SplitCriterion};
use sigtest::io::{load_csv, write_results, DatasetManifest, Delimiter, LabelColumn, OutputFormat};
use sigtest::metrics::{ari, vi, Partition};
use sigtest::{Dataset, Error, SampleVector};

mod report;

const OUTPUT_DIR_ENV: &str = "SIGTEST_OUTPUT_DIR";
const DATA_DIR_ENV: &str = "SIGTEST_DATA_DIR";

const EXIT_SPLIT: u8 = 3;
const EXIT_USAGE: u8 = 2;

/// Unimodality tests and cluster-count estimation.
#[derive(Parser)]
#[command(name = "sigtest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a one-dimensional sample for unimodality. Exits 0 when unimodal, 3 on split.
    Test(TestArgs),
    /// Estimate the number of clusters in a dataset.
    Cluster(ClusterArgs),
    /// Rejection rates and call times of every test on two-cluster data.
    BenchTests(BenchTestsArgs),
    /// Cluster-count estimation over repeated seeded runs on labelled datasets.
    BenchCluster(BenchClusterArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Sigtest1,
    Sigtest2,
    Ad,
    Ks,
    Dip,
}

impl From<MethodArg> for TestMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sigtest1 => TestMethod::Sigtest1,
            MethodArg::Sigtest2 => TestMethod::Sigtest2,
            MethodArg::Ad => TestMethod::AndersonDarling,
            MethodArg::Ks => TestMethod::Lilliefors,
            MethodArg::Dip => TestMethod::Dip,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClusterArg {
    Gmeans,
    #[value(name = "gmeans+")]
    GmeansPlus,
    Dipmeans,
    #[value(name = "dipmeans+")]
    DipmeansPlus,
}

impl From<ClusterArg> for ClusterMethod {
    fn from(m: ClusterArg) -> Self {
        match m {
            ClusterArg::Gmeans => ClusterMethod::GMeans,
            ClusterArg::GmeansPlus => ClusterMethod::GMeansPlus,
            ClusterArg::Dipmeans => ClusterMethod::DipMeans,
            ClusterArg::DipmeansPlus => ClusterMethod::DipMeansPlus,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Args, Clone)]
struct TestParamArgs {
    /// Sigtest band half-width in standard deviations.
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    /// Sigtest splits when the violation fraction exceeds this.
    #[arg(long, default_value_t = 0.4)]
    threshold: f64,
    #[arg(long, default_value_t = 8)]
    min_samples: usize,
    /// Anderson-Darling significance level.
    #[arg(long, default_value_t = 0.0001)]
    ad_alpha: f64,
    /// Lilliefors significance level.
    #[arg(long, default_value_t = 0.05)]
    ks_alpha: f64,
    /// Dip test bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
}

impl TestParamArgs {
    fn params(&self) -> TestParams {
        TestParams {
            gamma: self.gamma,
            threshold: self.threshold,
            min_samples: self.min_samples,
            ad_alpha: self.ad_alpha,
            ks_alpha: self.ks_alpha,
            dip_bootstrap: self.bootstrap,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Zero-based index, header name, or `last`. Omit for unlabelled files.
    #[arg(long)]
    label_column: Option<String>,
    /// Single-character field delimiter.
    #[arg(long, default_value = ",", conflicts_with = "whitespace")]
    delimiter: char,
    /// Split fields on runs of whitespace.
    #[arg(long)]
    whitespace: bool,
    /// The first line is a header.
    #[arg(long)]
    header: bool,
    /// Rescale every feature to mean 0 and standard deviation 1.
    #[arg(long)]
    standardize: bool,
}

impl InputArgs {
    fn manifest(&self, path: &Path) -> DatasetManifest {
        let name = path
            .file_stem()
            .map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
        DatasetManifest {
            label_column: self
                .label_column
                .as_deref()
                .map(|s| s.parse::<LabelColumn>().unwrap_or_else(|e| match e {})),
            delimiter: if self.whitespace {
                Delimiter::Whitespace
            } else {
                Delimiter::Char(self.delimiter)
            },
            has_header: self.header,
            standardize: self.standardize,
            ..DatasetManifest::new(name, path)
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write records here. Defaults to a file in $SIGTEST_OUTPUT_DIR when that is set.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

impl OutputArgs {
    fn path(&self, stem: &str) -> Option<PathBuf> {
        self.output.clone().or_else(|| {
            let dir = std::env::var_os(OUTPUT_DIR_ENV)?;
            let ext = match self.format {
                FormatArg::Json => "json",
                FormatArg::Csv => "csv",
            };
            Some(Path::new(&dir).join(format!("{stem}.{ext}")))
        })
    }
}

#[derive(Args)]
struct TestArgs {
    /// Delimited text file of samples.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "sigtest1")]
    method: MethodArg,
    #[command(flatten)]
    params: TestParamArgs,
    /// Seed for the dip bootstrap.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Test this zero-based feature column of a multi-column file.
    #[arg(long, conflicts_with_all = ["centroid1", "centroid2"])]
    column: Option<usize>,
    /// Project multi-column rows onto the axis from CENTROID2 to CENTROID1 (comma separated).
    #[arg(
        long,
        requires = "centroid2",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    centroid1: Option<Vec<f64>>,
    #[arg(
        long,
        requires = "centroid1",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    centroid2: Option<Vec<f64>>,
    #[command(flatten)]
    input_format: InputArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ClusterArgs {
    /// Delimited text file. Use --dataset for a known benchmark file instead.
    #[arg(required_unless_present = "dataset", conflicts_with = "dataset")]
    input: Option<PathBuf>,
    /// Known dataset name (iris, seeds, optdigits, pendigits, leukemia).
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
    data_dir: PathBuf,
    #[arg(long, value_enum, default_value = "gmeans+")]
    method: ClusterArg,
    #[command(flatten)]
    params: TestParamArgs,
    /// dip-means splits when more than this fraction of viewers reject.
    #[arg(long, default_value_t = 0.01)]
    viewer_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    input_format: InputArgs,
    #[command(flatten)]
    out: OutputArgs,
    /// Print the split log.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct BenchTestsArgs {
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Center distances in units of sigma.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEPARATIONS)]
    separations: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Sigtest1, MethodArg::Sigtest2, MethodArg::Ad, MethodArg::Ks, MethodArg::Dip])]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 100)]
    n_per_cluster: usize,
    #[arg(long, default_value_t = 1)]
    dimension: usize,
    /// Skip the serial timing pass.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    params: TestParamArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BenchClusterArgs {
    #[arg(long, value_delimiter = ',', default_value = "iris,seeds")]
    datasets: Vec<String>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ClusterArg::Gmeans, ClusterArg::GmeansPlus, ClusterArg::Dipmeans, ClusterArg::DipmeansPlus])]
    methods: Vec<ClusterArg>,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
    data_dir: PathBuf,
    #[arg(long)]
    standardize: bool,
    /// Also write one record per run to this file.
    #[arg(long)]
    runs_output: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::BenchTests(a) => cmd_bench_tests(a),
        Command::BenchCluster(a) => cmd_bench_cluster(a),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), Error> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

fn sample_from(args: &TestArgs, data: &Dataset) -> Result<SampleVector, Failure> {
    match (&args.centroid1, &args.centroid2, args.column) {
        (Some(c1), Some(c2), _) => Ok(project_split(data, c1, c2)?),
        (_, _, Some(j)) if j < data.dim() => Ok(SampleVector::new(data.column(j))?),
        (_, _, Some(j)) => Err(Failure::Usage(format!(
            "--column {j} is out of range: the input has {} feature columns",
            data.dim()
        ))),
        _ if data.dim() == 1 => Ok(SampleVector::new(data.column(0))?),
        _ => Err(Failure::Usage(format!(
            "the test is defined on one-dimensional data but the input has {} feature columns; \
             pick one with --column or project with --centroid1/--centroid2",
            data.dim()
        ))),
    }
}

#[derive(Serialize)]
pub(crate) struct TestOutput {
    pub(crate) method: TestMethod,
    pub(crate) input: PathBuf,
    pub(crate) n: usize,
    pub(crate) statistic: f64,
    pub(crate) p_value: Option<f64>,
    pub(crate) split: bool,
    pub(crate) decision: &'static str,
    pub(crate) seed: u64,
    #[serde(flatten)]
    pub(crate) params: TestParams,
}

fn cmd_test(args: TestArgs) -> Outcome {
    let data = load_csv(&args.input_format.manifest(&args.input))?;
    let y = sample_from(&args, &data)?;
    let method = TestMethod::from(args.method);
    let params = args.params.params();
    let t = method.run(&y, &params, args.seed)?;
    let out = TestOutput {
        method,
        input: args.input.clone(),
        n: t.n,
        statistic: t.statistic,
        p_value: t.p_value,
        split: t.split,
        decision: if t.split { "split" } else { "unimodal" },
        seed: args.seed,
        params,
    };
    report::print_test(&out);
    if let Some(path) = args.out.path("test") {
        write_results(std::slice::from_ref(&out), &path, args.out.format.into())?;
    }
    Ok(if t.split {
        ExitCode::from(EXIT_SPLIT)
    } else {
        ExitCode::SUCCESS
    })
}

fn criterion_for(method: ClusterMethod, params: &TestParams) -> SplitCriterion {
    match method {
        ClusterMethod::GMeans => SplitCriterion::AndersonDarling {
            alpha: params.ad_alpha,
        },
        ClusterMethod::DipMeans => SplitCriterion::Dip {
            bootstrap: params.dip_bootstrap,
        },
        ClusterMethod::GMeansPlus | ClusterMethod::DipMeansPlus => {
            SplitCriterion::Sigtest(params.sigtest(sigtest::Variant::Signature1))
        }
    }
}

#[derive(Serialize)]
pub(crate) struct ClusterOutput<'a> {
    pub(crate) dataset: &'a str,
    pub(crate) method: ClusterMethod,
    pub(crate) criterion: SplitCriterion,
    pub(crate) options: HierarchyOptions,
    pub(crate) seed: u64,
    pub(crate) standardized: bool,
    pub(crate) n: usize,
    pub(crate) d: usize,
    pub(crate) expected_k: Option<usize>,
    pub(crate) k: usize,
    pub(crate) vi: Option<f64>,
    pub(crate) ari: Option<f64>,
    pub(crate) result: &'a sigtest::cluster::ClusteringResult,
}

#[derive(Serialize)]
struct AssignmentRow<'a> {
    index: usize,
    cluster: usize,
    label: Option<&'a str>,
}

fn cmd_cluster(args: ClusterArgs) -> Outcome {
    let manifest = match (&args.dataset, &args.input) {
        (Some(name), _) => {
            let mut m = DatasetManifest::builtin(name, &args.data_dir).ok_or_else(|| {
                Failure::Usage(format!(
                    "unknown dataset {name:?}; known: {}",
                    DatasetManifest::BUILTIN.join(", ")
                ))
            })?;
            m.standardize = args.input_format.standardize;
            m
        }
        (None, Some(path)) => args.input_format.manifest(path),
        (None, None) => unreachable!("clap requires an input"),
    };
    let data = load_csv(&manifest)?;
    let method = ClusterMethod::from(args.method);
    let params = args.params.params();
    let criterion = criterion_for(method, &params);
    let options = HierarchyOptions {
        viewer_fraction: args.viewer_fraction,
        ..HierarchyOptions::default()
    };
    let result = match method {
        ClusterMethod::GMeans | ClusterMethod::GMeansPlus => {
            sigtest::cluster::gmeans_with_options(&data, &criterion, &options, args.seed)?
        }
        ClusterMethod::DipMeans | ClusterMethod::DipMeansPlus => {
            sigtest::cluster::dipmeans_with_options(&data, &criterion, &options, args.seed)?
        }
    };
    let (vi, ari) = match data.label_ids() {
        Some(ids) => {
            let truth = Partition::new(&ids)?;
            let found = Partition::new(&result.assignment)?;
            (Some(vi(&found, &truth)?), Some(ari(&found, &truth)?))
        }
        None => (None, None),
    };
    let out = ClusterOutput {
        dataset: &manifest.name,
        method,
        criterion,
        options,
        seed: args.seed,
        standardized: manifest.standardize,
        n: data.len(),
        d: data.dim(),
        expected_k: manifest.expected_k,
        k: result.k,
        vi,
        ari,
        result: &result,
    };
    report::print_cluster(&out);
    if args.verbose {
        report::print_split_log(&result.split_log);
    }
    if let Some(path) = args.out.path("cluster") {
        match args.out.format {
            FormatArg::Json => write_json(&out, &path)?,
            FormatArg::Csv => {
                let labels = data.labels();
                let rows: Vec<AssignmentRow> = result
                    .assignment
                    .iter()
                    .enumerate()
                    .map(|(index, &cluster)| AssignmentRow {
                        index,
                        cluster,
                        label: labels.map(|l| l[index].as_str()),
                    })
                    .collect();
                write_results(&rows, &path, OutputFormat::Csv)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench_tests(args: BenchTestsArgs) -> Outcome {
    let config = TestBenchConfig {
        separations: args.separations.clone(),
        runs: args.runs,
        seed: args.seed,
        methods: args.methods.iter().map(|&m| m.into()).collect(),
        params: args.params.params(),
        n_per_cluster: args.n_per_cluster,
        sigma: 1.0,
        dimension: args.dimension,
        timing: !args.no_timing,
    };
    let records = run_test_benchmark_with(&config)?;
    report::print_test_bench(&config, &records);
    if let Some(path) = args.out.path("bench-tests") {
        write_results(&records, &path, args.out.format.into())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench_cluster(args: BenchClusterArgs) -> Outcome {
    let manifests = args
        .datasets
        .iter()
        .map(|name| {
            let mut m = DatasetManifest::builtin(name, &args.data_dir).ok_or_else(|| {
                Failure::Usage(format!(
                    "unknown dataset {name:?}; known: {}",
                    DatasetManifest::BUILTIN.join(", ")
                ))
            })?;
            m.standardize = args.standardize;
            Ok(m)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let methods: Vec<ClusterMethod> = args.methods.iter().map(|&m| m.into()).collect();
    let out = run_cluster_benchmark(&manifests, &methods, args.runs, args.seed)?;
    report::print_cluster_bench(args.runs, args.seed, args.standardize, &out.summary);
    if let Some(path) = args.out.path("bench-cluster") {
        write_results(&out.summary, &path, args.out.format.into())?;
    }
    if let Some(path) = &args.runs_output {
        write_results(&out.runs, path, args.out.format.into())?;
    }
    Ok(ExitCode::SUCCESS)
}
