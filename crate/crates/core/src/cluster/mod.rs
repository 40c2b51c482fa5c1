//! k-means and the hierarchical wrappers that grow the number of clusters by
//! bisecting whichever clusters a unimodality criterion rejects.

mod hierarchy;
mod kmeans;

pub use hierarchy::{
    dipmeans_family, dipmeans_with_options, gmeans_family, gmeans_with_options, project_split,
    ClusterMethod, HierarchyOptions, SplitCriterion, DEFAULT_MIN_SAMPLES,
};
pub use kmeans::{kmeans, lloyd, ClusteringResult, SplitDecision, SplitRecord, MAX_ITERATIONS};
