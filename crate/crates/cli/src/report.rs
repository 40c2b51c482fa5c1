use sigtest::bench::{
    ClusterBenchRecord, TestBenchConfig, TestBenchRecord, TestMethod, TestParams,
};
use sigtest::cluster::{SplitCriterion, SplitRecord};

use crate::{ClusterOutput, TestOutput};

fn params_line(p: &TestParams) -> String {
    format!(
        "gamma={} threshold={} min_samples={} ad_alpha={} ks_alpha={} bootstrap={}",
        p.gamma, p.threshold, p.min_samples, p.ad_alpha, p.ks_alpha, p.dip_bootstrap
    )
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

pub(crate) fn print_test(out: &TestOutput) {
    let what = match out.method {
        TestMethod::Sigtest1 | TestMethod::Sigtest2 => "violation fraction C",
        TestMethod::AndersonDarling => "A*^2",
        TestMethod::Lilliefors => "D",
        TestMethod::Dip => "dip",
    };
    println!("method      {}", out.method);
    println!("input       {}", out.input.display());
    println!("n           {}", out.n);
    println!("statistic   {:.6} ({what})", out.statistic);
    println!("p-value     {}", opt(out.p_value));
    println!("decision    {}", out.decision);
    println!("parameters  {} seed={}", params_line(&out.params), out.seed);
}

fn criterion_line(c: &SplitCriterion) -> String {
    match c {
        SplitCriterion::Sigtest(cfg) => format!(
            "sigtest variant={} gamma={} threshold={} min_samples={}",
            cfg.variant.label(),
            cfg.gamma,
            cfg.threshold,
            cfg.min_samples
        ),
        SplitCriterion::AndersonDarling { alpha } => format!("AD alpha={alpha}"),
        SplitCriterion::Dip { bootstrap } => format!("dip bootstrap={bootstrap} level=0"),
    }
}

pub(crate) fn print_cluster(out: &ClusterOutput) {
    println!(
        "dataset     {} (n={}, d={}, standardized={})",
        out.dataset, out.n, out.d, out.standardized
    );
    println!("method      {}", out.method);
    println!("criterion   {}", criterion_line(&out.criterion));
    match out.expected_k {
        Some(m) => println!("k           {} (expected {m})", out.k),
        None => println!("k           {}", out.k),
    }
    if out.vi.is_some() {
        println!("VI          {}", opt(out.vi));
        println!("ARI         {}", opt(out.ari));
    }
    println!(
        "parameters  seed={} viewer_fraction={} full_viewer_limit={} sampled_viewers={} restarts={}",
        out.seed,
        out.options.viewer_fraction,
        out.options.full_viewer_limit,
        out.options.sampled_viewers,
        out.options.restarts
    );
}

pub(crate) fn print_split_log(log: &[SplitRecord]) {
    println!("round  cluster  size  statistic  decision");
    for r in log {
        println!(
            "{:>5}  {:>7}  {:>4}  {:>9}  {:?}",
            r.round,
            r.cluster,
            r.size,
            r.statistic
                .map_or_else(|| "-".into(), |s| format!("{s:.4}")),
            r.decision
        );
    }
}

pub(crate) fn print_test_bench(config: &TestBenchConfig, records: &[TestBenchRecord]) {
    println!(
        "Success rates (%) over {} runs, seed {}, {} points per cluster, sigma {}, d={}",
        config.runs, config.seed, config.n_per_cluster, config.sigma, config.dimension
    );
    println!("parameters: {}", params_line(&config.params));
    print!("{:<10}", "method");
    for s in &config.separations {
        print!("{:>8}", format!("{s}σ"));
    }
    println!("{:>16}", "avg time (s)");
    for &method in &config.methods {
        print!("{:<10}", method.label());
        let rows: Vec<&TestBenchRecord> = records.iter().filter(|r| r.method == method).collect();
        for r in &rows {
            print!("{:>8}", format!("{:.0}", r.success_rate));
        }
        let times: Vec<f64> = rows.iter().filter_map(|r| r.mean_time_s).collect();
        if times.is_empty() {
            println!("{:>16}", "-");
        } else {
            println!("{:>16.3e}", times.iter().sum::<f64>() / times.len() as f64);
        }
    }
}

fn pm(mean: Option<f64>, std: Option<f64>) -> String {
    match (mean, std) {
        (Some(m), Some(s)) => format!("{m:.2}±{s:.2}"),
        _ => "-".into(),
    }
}

pub(crate) fn print_cluster_bench(
    runs: usize,
    seed: u64,
    standardized: bool,
    summary: &[ClusterBenchRecord],
) {
    println!("Mean ± std over {runs} runs, seed {seed}, standardized={standardized}");
    println!(
        "{:<10} {:<10} {:>10} {:>12} {:>12} {:>12} {:>12}",
        "dataset", "method", "m*", "k", "VI", "ARI", "time (s)"
    );
    for r in summary {
        println!(
            "{:<10} {:<10} {:>10} {:>12} {:>12} {:>12} {:>12.3e}",
            r.dataset,
            r.method.label(),
            r.expected_k.map_or_else(|| "-".into(), |k| k.to_string()),
            pm(Some(r.k_mean), Some(r.k_std)),
            pm(r.vi_mean, r.vi_std),
            pm(r.ari_mean, r.ari_std),
            r.mean_time_s
        );
    }
}
