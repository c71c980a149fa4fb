//! Critical-point detection, stratum classification, singular-set fitting,
//! and the continuity verdict, together with the sampling profiles that
//! back it up.

mod checks;
mod linalg;
mod cluster;
mod critical;
mod geometry;
mod manifold;
mod profiles;
mod sampling;
mod verdict;

pub use checks::{local_structure_checks, transverse_max_point, LocalStructure};
pub use cluster::{cluster_singular_times, TimeCluster};
pub use critical::{classify_stratum, find_critical_points, CriticalPoint, Stratum};
pub use geometry::{frame_check_residuals, geometry_probe, probe_near, GeometryProbe};
pub use manifold::{fit_singular_manifold, hessian_tangent_lipschitz, LipschitzOutcome, ManifoldComponent};
pub use profiles::{
    cone_continuity_profile, normal_alignment_profile, rescaled_profile, ConeProfile, ConeSpec,
    AlignmentProfile, RescaledProfile,
};
pub use sampling::ShellSampler;
pub use verdict::{c2_verdict, AnalyzerParams, ConditionOutcome, SingularSetReport, Verdict};

/// Full analysis pipeline over an arrival field: detect, classify, cluster,
/// fit, profile, and render the verdict.
pub fn analyze_field(
    u: &crate::arrival::ArrivalField,
    params: &AnalyzerParams,
) -> crate::error::Result<SingularSetReport> {
    verdict::run_analysis(u, params)
}
