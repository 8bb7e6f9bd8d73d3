//! Numerical certificates: sampled bi-Lipschitz lower bounds, refutation
//! of claimed constants, quasi-isometry and density checks, drift along
//! witness sequences and graph estimates of length metrics.
//!
//! All sampling is driven by seeded ChaCha8 streams (see [`stream`]), and
//! parallel work is reduced in stream order, so results are bit-identical
//! for a given configuration regardless of thread count.

mod bilip;
mod drift;
mod geodesic;
mod qi;
mod sampler;
pub mod stream;

pub use bilip::{
    bilip_lower_bound, falsify_bilip_bound, pair_ratio, BilipEstimate, WorstPair, CLAIM_TOLERANCE,
    MIN_SEPARATION,
};
pub use drift::{
    drift_profile, drift_verdict, max_rotation, psi_drift_witnesses, ray_witnesses,
    spiral_drift_witnesses, DriftReport, DriftVerdict, PsiWitnesses, SpiralWitnesses,
    GROWTH_WINDOW,
};
pub use geodesic::{
    circle_cloud, connecting_eps, ellipse_cloud, epsilon_graph, geodesic_estimate,
    metric_equivalence_ratio, ratio_histogram, sampled_geodesic_ratios, sphere_cloud, EpsGraph,
    HistogramBin, MetricRatio, PointCloud,
};
pub use qi::{c_density, c_density_on, grid_points, qi_embedding_check, Metric, QiCheck, QiParams};
pub(crate) use sampler::tangent as sampler_tangent;
pub use sampler::{
    pair_chunk, sample_points, PairMix, Region, SamplePair, SamplerConfig, DEFAULT_LOCAL_SCALE,
};

use serde::{Deserialize, Serialize};

/// Exported record of one estimator run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub op: String,
    /// Canonical text of the map.
    pub map: String,
    pub seed: u64,
    pub n_pairs: usize,
    pub lambda_lower: f64,
    pub worst_pair: Option<WorstPair>,
    pub elapsed_ms: u64,
}

impl EstimateRecord {
    pub fn from_estimate(
        map: &crate::maps::MapExpr,
        est: &BilipEstimate,
        n_pairs: usize,
        elapsed_ms: u64,
    ) -> Self {
        Self {
            op: "bilip_lower_bound".into(),
            map: crate::maps::to_text(map),
            seed: est.seed,
            n_pairs,
            lambda_lower: est.lambda_lower,
            worst_pair: est.worst_pair.clone(),
            elapsed_ms,
        }
    }
}
