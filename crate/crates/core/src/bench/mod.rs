//! Numerical checks of the constructive steps behind the exponent bounds.

mod audit;
mod cuboid;
mod distance_claim;
mod fluctuation;
mod segments;
mod tails;

pub use audit::{paired_survival, projection_bound_audit, slab_body, PairedSurvival, ProjectionAudit};
pub use cuboid::{build_inner_cuboid, Hypercuboid, InnerCuboid};
pub use distance_claim::{check_distance_claim, DistanceClaim, DistanceRow};
pub use fluctuation::{
    check_fluctuation, check_kolmogorov, fluctuation_probability, shape_slope, truncated_second_moment,
    FluctuationReport, KolmogorovReport,
};
pub use segments::{
    build_segment_sets, check_lemma_inclusions, inclusion_row, inclusion_threshold, scaled_intersection,
    InclusionRow, SegmentParams, SegmentSets, MAX_LEVEL,
};
pub use tails::{check_directed_rv, check_hlms_ratio, directed_tail_constant, DirectedRv, FarSet, HlmsRow};

/// One line of a check report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub parameters: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Signed distance to the threshold; positive when passing.
    pub margin: f64,
}

impl CheckRow {
    /// Row for `statistic ≥ threshold`.
    pub fn at_least(check: &str, parameters: String, statistic: f64, threshold: f64) -> Self {
        let margin = statistic - threshold;
        CheckRow { check: check.into(), parameters, statistic, threshold, pass: margin >= 0.0, margin }
    }

    /// Row for `statistic ≤ threshold`.
    pub fn at_most(check: &str, parameters: String, statistic: f64, threshold: f64) -> Self {
        let margin = threshold - statistic;
        CheckRow { check: check.into(), parameters, statistic, threshold, pass: margin >= 0.0, margin }
    }
}
