//! Comparison tests: Anderson-Darling and Lilliefors normality tests, and
//! Hartigan's dip test of unimodality.

mod ad;
mod dip;
mod lilliefors;

use serde::{Deserialize, Serialize};

pub use ad::{ad_statistic, anderson_darling, anderson_darling_with_table, AdCriticalTable};
pub use dip::{
    dip_null_distribution, dip_statistic, dip_test, dip_test_with_null, DEFAULT_BOOTSTRAP,
};
pub use lilliefors::{
    ks_lilliefors, ks_statistic, lilliefors_critical_value, LILLIEFORS_REPLICATES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineMethod {
    #[serde(rename = "AD")]
    AndersonDarling,
    #[serde(rename = "KS")]
    Lilliefors,
    #[serde(rename = "dip")]
    Dip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineDecision {
    pub statistic: f64,
    /// Absent for Anderson-Darling, which compares against a critical value.
    pub p_value: Option<f64>,
    pub reject_unimodal: bool,
    pub method: BaselineMethod,
}
