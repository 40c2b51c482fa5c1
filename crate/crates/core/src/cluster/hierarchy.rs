use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans, lloyd, sq_dist, ClusteringResult, SplitDecision, SplitRecord};
use crate::baseline::{
    anderson_darling, dip_null_distribution, dip_test_with_null, DEFAULT_BOOTSTRAP,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream};
use crate::sigtest::{sigtest, SigtestConfig};
use crate::stats::SampleVector;

/// Minimum cluster size for criteria without their own setting.
pub const DEFAULT_MIN_SAMPLES: usize = 8;

/// The one-dimensional test a hierarchical wrapper applies to decide whether
/// to bisect a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitCriterion {
    Sigtest(SigtestConfig),
    AndersonDarling { alpha: f64 },
    Dip { bootstrap: usize },
}

impl SplitCriterion {
    pub fn min_samples(&self) -> usize {
        match self {
            SplitCriterion::Sigtest(cfg) => cfg.min_samples,
            _ => DEFAULT_MIN_SAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SplitCriterion::Sigtest(cfg) => cfg.validate(),
            SplitCriterion::AndersonDarling { alpha } if !(alpha > 0.0 && alpha < 1.0) => Err(
                Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")),
            ),
            SplitCriterion::Dip { bootstrap } if bootstrap < 100 => Err(Error::InvalidParameter(
                format!("bootstrap size must be >= 100, got {bootstrap}"),
            )),
            _ => Ok(()),
        }
    }

    /// Statistic and rejection of unimodality, or `None` when the sample is
    /// degenerate (all values equal).
    fn evaluate(&self, y: &SampleVector, null_seed: u64) -> Result<Option<(f64, bool)>> {
        let out = match *self {
            SplitCriterion::Sigtest(cfg) => sigtest(y, &cfg).map(|o| (o.c, o.split)),
            SplitCriterion::AndersonDarling { alpha } => {
                anderson_darling(y, alpha).map(|d| (d.statistic, d.reject_unimodal))
            }
            SplitCriterion::Dip { bootstrap } => {
                let null = dip_null_distribution(y.len(), bootstrap, null_seed);
                dip_test_with_null(y, &null).map(|d| (d.statistic, d.reject_unimodal))
            }
        };
        match out {
            Ok(v) => Ok(Some(v)),
            Err(Error::DegenerateInput(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Projection onto the unit axis through two centroids: `<x_i, v>` with
/// `v = (c1 - c2) / |c1 - c2|`.
pub fn project_split(points: &Dataset, c1: &[f64], c2: &[f64]) -> Result<SampleVector> {
    if c1.len() != points.dim() || c2.len() != points.dim() {
        return Err(Error::LengthMismatch {
            left: c1.len().max(c2.len()),
            right: points.dim(),
        });
    }
    let axis: Vec<f64> = c1.iter().zip(c2).map(|(a, b)| a - b).collect();
    let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::IdenticalCentroids);
    }
    let v: Vec<f64> = axis.iter().map(|a| a / norm).collect();
    SampleVector::new(
        points
            .rows()
            .map(|x| x.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyOptions {
    /// dip-means splits a cluster when more than this fraction of its
    /// viewers reject unimodality.
    pub viewer_fraction: f64,
    /// Clusters with more members than this test a random subset of viewers.
    pub full_viewer_limit: usize,
    pub sampled_viewers: usize,
    /// Seeded 2-means restarts per bisection; the lowest cost wins.
    pub restarts: usize,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        Self {
            viewer_fraction: 0.01,
            full_viewer_limit: 500,
            sampled_viewers: 100,
            restarts: 2,
        }
    }
}

impl HierarchyOptions {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.viewer_fraction) {
            return Err(Error::InvalidParameter(format!(
                "viewer_fraction must lie in [0, 1), got {}",
                self.viewer_fraction
            )));
        }
        if self.restarts == 0 || self.sampled_viewers == 0 {
            return Err(Error::InvalidParameter(
                "restarts and sampled_viewers must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Wrapper {
    GMeans,
    DipMeans,
}

struct Verdict {
    statistic: Option<f64>,
    decision: SplitDecision,
    children: Option<[Vec<f64>; 2]>,
}

fn bisect(sub: &Dataset, options: &HierarchyOptions, seed: u64) -> Result<ClusteringResult> {
    let mut best: Option<ClusteringResult> = None;
    for r in 0..options.restarts {
        let run = kmeans(sub, 2, derive_seed(seed, &[r as u64]))?;
        if best.as_ref().is_none_or(|b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn children_if_large(two: ClusteringResult, min_samples: usize) -> Option<[Vec<f64>; 2]> {
    let left = two.assignment.iter().filter(|&&c| c == 0).count();
    let right = two.assignment.len() - left;
    if left < min_samples || right < min_samples {
        return None;
    }
    let mut it = two.centroids.into_iter();
    Some([it.next()?, it.next()?])
}

fn gmeans_verdict(
    sub: &Dataset,
    criterion: &SplitCriterion,
    options: &HierarchyOptions,
    seed: u64,
    null_seed: u64,
) -> Result<Verdict> {
    let two = bisect(sub, options, seed)?;
    let y = match project_split(sub, &two.centroids[0], &two.centroids[1]) {
        Ok(y) => y,
        Err(Error::IdenticalCentroids) => {
            return Ok(Verdict {
                statistic: None,
                decision: SplitDecision::Untestable,
                children: None,
            })
        }
        Err(e) => return Err(e),
    };
    let Some((statistic, reject)) = criterion.evaluate(&y, null_seed)? else {
        return Ok(Verdict {
            statistic: None,
            decision: SplitDecision::Untestable,
            children: None,
        });
    };
    if !reject {
        return Ok(Verdict {
            statistic: Some(statistic),
            decision: SplitDecision::Keep,
            children: None,
        });
    }
    let children = children_if_large(two, criterion.min_samples());
    Ok(Verdict {
        statistic: Some(statistic),
        decision: if children.is_some() {
            SplitDecision::Split
        } else {
            SplitDecision::ChildTooSmall
        },
        children,
    })
}

fn dipmeans_verdict(
    sub: &Dataset,
    criterion: &SplitCriterion,
    options: &HierarchyOptions,
    seed: u64,
    null_seed: u64,
) -> Result<Verdict> {
    let m = sub.len();
    let viewers: Vec<usize> = if m > options.full_viewer_limit {
        let mut rng = substream(seed, &[u64::MAX]);
        let mut v = sample(&mut rng, m, options.sampled_viewers.min(m)).into_vec();
        v.sort_unstable();
        v
    } else {
        (0..m).collect()
    };
    let votes: Vec<Option<bool>> = viewers
        .par_iter()
        .map(|&v| {
            let origin = sub.row(v);
            let distances = (0..m)
                .filter(|&j| j != v)
                .map(|j| sq_dist(sub.row(j), origin).sqrt())
                .collect();
            let y = SampleVector::new(distances)?;
            Ok(criterion.evaluate(&y, null_seed)?.map(|(_, reject)| reject))
        })
        .collect::<Result<_>>()?;
    let tested = votes.iter().flatten().count();
    if tested == 0 {
        return Ok(Verdict {
            statistic: None,
            decision: SplitDecision::Untestable,
            children: None,
        });
    }
    let score = votes.iter().flatten().filter(|&&r| r).count() as f64 / tested as f64;
    if score <= options.viewer_fraction {
        return Ok(Verdict {
            statistic: Some(score),
            decision: SplitDecision::Keep,
            children: None,
        });
    }
    let children = children_if_large(bisect(sub, options, seed)?, criterion.min_samples());
    Ok(Verdict {
        statistic: Some(score),
        decision: if children.is_some() {
            SplitDecision::Split
        } else {
            SplitDecision::ChildTooSmall
        },
        children,
    })
}

fn grow(
    data: &Dataset,
    criterion: &SplitCriterion,
    options: &HierarchyOptions,
    seed: u64,
    wrapper: Wrapper,
) -> Result<ClusteringResult> {
    criterion.validate()?;
    options.validate()?;
    let min_samples = criterion.min_samples();
    if data.len() < 2 * min_samples {
        return Err(Error::TooFewSamples {
            needed: 2 * min_samples,
            got: data.len(),
        });
    }
    let max_k = data.len() / min_samples;
    let null_seed = derive_seed(seed, &[u64::MAX]);
    let mut state = kmeans(data, 1, seed)?;
    let mut log = Vec::new();
    for round in 0.. {
        let members: Vec<Vec<usize>> = (0..state.k)
            .map(|c| {
                (0..data.len())
                    .filter(|&i| state.assignment[i] == c)
                    .collect()
            })
            .collect();
        let verdicts: Vec<Option<Verdict>> = members
            .par_iter()
            .enumerate()
            .map(|(c, idx)| {
                if idx.len() < 2 * min_samples {
                    return Ok(None);
                }
                let sub = data.select(idx);
                let cluster_seed = derive_seed(seed, &[round as u64, c as u64]);
                let verdict = match wrapper {
                    Wrapper::GMeans => {
                        gmeans_verdict(&sub, criterion, options, cluster_seed, null_seed)
                    }
                    Wrapper::DipMeans => {
                        dipmeans_verdict(&sub, criterion, options, cluster_seed, null_seed)
                    }
                }?;
                Ok(Some(verdict))
            })
            .collect::<Result<_>>()?;

        let mut centroids = state.centroids.clone();
        let mut appended = Vec::new();
        for (c, verdict) in verdicts.into_iter().enumerate() {
            let Some(mut verdict) = verdict else { continue };
            if verdict.decision == SplitDecision::Split && centroids.len() + appended.len() >= max_k
            {
                verdict.decision = SplitDecision::ChildTooSmall;
                verdict.children = None;
            }
            log.push(SplitRecord {
                round,
                cluster: c,
                size: members[c].len(),
                statistic: verdict.statistic,
                decision: verdict.decision,
            });
            if let Some([a, b]) = verdict.children {
                centroids[c] = a;
                appended.push(b);
            }
        }
        if appended.is_empty() {
            break;
        }
        centroids.extend(appended);
        state = lloyd(data, centroids);
    }
    state.split_log = log;
    Ok(state)
}

/// G-means style growth: bisect each cluster with 2-means, project its
/// members on the child axis and split when the criterion rejects.
pub fn gmeans_family(
    data: &Dataset,
    criterion: &SplitCriterion,
    seed: u64,
) -> Result<ClusteringResult> {
    gmeans_with_options(data, criterion, &HierarchyOptions::default(), seed)
}

pub fn gmeans_with_options(
    data: &Dataset,
    criterion: &SplitCriterion,
    options: &HierarchyOptions,
    seed: u64,
) -> Result<ClusteringResult> {
    grow(data, criterion, options, seed, Wrapper::GMeans)
}

/// dip-means style growth: every member of a cluster tests its distances to
/// the other members, and the cluster is bisected when enough of them reject.
pub fn dipmeans_family(
    data: &Dataset,
    criterion: &SplitCriterion,
    seed: u64,
) -> Result<ClusteringResult> {
    dipmeans_with_options(data, criterion, &HierarchyOptions::default(), seed)
}

pub fn dipmeans_with_options(
    data: &Dataset,
    criterion: &SplitCriterion,
    options: &HierarchyOptions,
    seed: u64,
) -> Result<ClusteringResult> {
    grow(data, criterion, options, seed, Wrapper::DipMeans)
}

/// The four wrapper/criterion pairings compared in the benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClusterMethod {
    #[serde(rename = "gmeans")]
    GMeans,
    #[serde(rename = "gmeans+")]
    GMeansPlus,
    #[serde(rename = "dipmeans")]
    DipMeans,
    #[serde(rename = "dipmeans+")]
    DipMeansPlus,
}

impl ClusterMethod {
    pub const ALL: [ClusterMethod; 4] = [
        ClusterMethod::GMeans,
        ClusterMethod::GMeansPlus,
        ClusterMethod::DipMeans,
        ClusterMethod::DipMeansPlus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ClusterMethod::GMeans => "gmeans",
            ClusterMethod::GMeansPlus => "gmeans+",
            ClusterMethod::DipMeans => "dipmeans",
            ClusterMethod::DipMeansPlus => "dipmeans+",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label() == name)
    }

    /// AD at level 1e-4 for G-means, a level-zero dip bootstrap for
    /// dip-means, default Sigtest for the `+` variants.
    pub fn default_criterion(self) -> SplitCriterion {
        match self {
            ClusterMethod::GMeans => SplitCriterion::AndersonDarling { alpha: 0.0001 },
            ClusterMethod::DipMeans => SplitCriterion::Dip {
                bootstrap: DEFAULT_BOOTSTRAP,
            },
            ClusterMethod::GMeansPlus | ClusterMethod::DipMeansPlus => {
                SplitCriterion::Sigtest(SigtestConfig::default())
            }
        }
    }

    pub fn run(
        self,
        data: &Dataset,
        criterion: &SplitCriterion,
        seed: u64,
    ) -> Result<ClusteringResult> {
        match self {
            ClusterMethod::GMeans | ClusterMethod::GMeansPlus => {
                gmeans_family(data, criterion, seed)
            }
            ClusterMethod::DipMeans | ClusterMethod::DipMeansPlus => {
                dipmeans_family(data, criterion, seed)
            }
        }
    }
}

impl std::fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}
