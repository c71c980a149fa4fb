//! Assembling the continuity verdict.
//!
//! The arrival time can only have a continuous second derivative when the
//! singular structure is as rigid as possible: one singular time, one closed
//! connected singular manifold of uniform stratum, tangent to the Hessian
//! kernels, with u constant along it. The verdict checks exactly those
//! conditions on the detected critical set and names the violated ones.

use crate::analyze::checks::{local_structure_checks, transverse_max_point, LocalStructure};
use crate::analyze::cluster::{cluster_singular_times, TimeCluster};
use crate::analyze::critical::{find_critical_points, CriticalPoint};
use crate::analyze::linalg;
use crate::analyze::manifold::{
    fit_singular_manifold, hessian_tangent_lipschitz, LipschitzOutcome, ManifoldComponent,
};
use crate::analyze::profiles::{
    cone_continuity_profile, normal_alignment_profile, rescaled_profile, AlignmentProfile,
    ConeProfile, ConeSpec, RescaledProfile,
};
use crate::analyze::sampling::ShellSampler;
use crate::arrival::ArrivalField;
use crate::error::{Error, Result};
use crate::field::Idx;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    C2,
    NotC2,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::C2 => "C2",
            Verdict::NotC2 => "notC2",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Analyzer tolerances; every knob is echoed into reports.
#[derive(Debug, Clone)]
pub struct AnalyzerParams {
    /// Critical-point seed threshold on |grad u|; None resolves to one grid
    /// spacing (a node adjacent to a critical point sees |grad u| up to
    /// ~0.71 h, so the floor must sit above that).
    pub tau: Option<f64>,
    /// Cylindrical classification tolerance.
    pub tol: f64,
    /// Singular-time tolerance as a fraction of the extinction time.
    pub time_tol_frac: f64,
    pub angle_tol_deg: f64,
    pub grad_floor: f64,
    pub cone_aperture: f64,
    /// Strictly decreasing shell radii for the profiles.
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    /// Transverse-slice search scale as a fraction of the domain radius.
    pub epsilon_search_frac: f64,
    pub seed: u64,
}

impl Default for AnalyzerParams {
    fn default() -> Self {
        Self {
            tau: None,
            tol: 0.1,
            time_tol_frac: 0.01,
            angle_tol_deg: 5.0,
            grad_floor: 0.05,
            cone_aperture: 1.0,
            radii: vec![0.2, 0.1, 0.05],
            samples_per_radius: 64,
            epsilon_search_frac: 0.1,
            seed: 42,
        }
    }
}

impl AnalyzerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol", self.tol),
            ("time_tol_frac", self.time_tol_frac),
            ("angle_tol_deg", self.angle_tol_deg),
            ("grad_floor", self.grad_floor),
            ("cone_aperture", self.cone_aperture),
            ("epsilon_search_frac", self.epsilon_search_frac),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) {
                return Err(Error::Config("tau must be positive".into()));
            }
        }
        if self.radii.is_empty() || self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("radii must be strictly decreasing".into()));
        }
        if self.samples_per_radius == 0 {
            return Err(Error::Config("samples_per_radius must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ConditionOutcome {
    pub condition: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SingularSetReport {
    pub verdict: Verdict,
    pub verdict_reasons: Vec<ConditionOutcome>,
    pub extinction_time: f64,
    pub extinction_node: Idx,
    /// Max |du|/h over adjacent masked pairs (reported, never asserted).
    pub lipschitz_estimate: f64,
    pub points: Vec<CriticalPoint>,
    pub unclassified: usize,
    pub time_clusters: Vec<TimeCluster>,
    pub manifolds: Vec<ManifoldComponent>,
    /// Strata found mixed within one component, if the fit refused.
    pub mixed_stratum: Option<Vec<usize>>,
    pub cone_profile: Option<ConeProfile>,
    pub alignment_profile: Option<AlignmentProfile>,
    pub rescaled: Option<RescaledProfile>,
    pub hessian_tangent_ratio: Option<LipschitzOutcome>,
    pub local_structure: Option<LocalStructure>,
    /// Transverse slice maximum near the representative point, if found.
    pub transverse_point: Option<[f64; 3]>,
    pub notes: Vec<String>,
    pub time_tol_abs: f64,
    pub params: AnalyzerParams,
}

/// Inputs that decide the verdict; separated out so the rule is testable on
/// synthetic summaries.
#[derive(Debug, Clone)]
pub struct VerdictInputs {
    pub n_detections: usize,
    pub n_unclassified: usize,
    pub n_clusters: usize,
    /// (k, closed, max tangency deg, u spread) per fitted component.
    pub components: Vec<(usize, bool, f64, f64)>,
    pub mixed_stratum: Option<Vec<usize>>,
    pub angle_tol_deg: f64,
    pub time_tol_abs: f64,
}

/// The continuity rule: C2 requires one singular time and one closed
/// connected uniform-stratum component tangent to the kernels with constant
/// arrival time; an unclassified fraction above 10% is inconclusive.
pub fn c2_verdict(inputs: &VerdictInputs) -> (Verdict, Vec<ConditionOutcome>) {
    let mut reasons = Vec::new();
    let detected = inputs.n_detections > 0;
    reasons.push(ConditionOutcome {
        condition: "critical points detected",
        passed: detected,
        detail: format!("{} detections", inputs.n_detections),
    });
    let classified_ok = detected
        && (inputs.n_unclassified as f64) <= 0.10 * inputs.n_detections as f64;
    reasons.push(ConditionOutcome {
        condition: "classified fraction at least 90%",
        passed: classified_ok,
        detail: format!(
            "{} of {} unclassified",
            inputs.n_unclassified, inputs.n_detections
        ),
    });

    let single_time = inputs.n_clusters == 1;
    reasons.push(ConditionOutcome {
        condition: "single singular time",
        passed: single_time,
        detail: format!("{} time clusters", inputs.n_clusters),
    });

    let no_mixed = inputs.mixed_stratum.is_none();
    let single_component = no_mixed && inputs.components.len() == 1;
    reasons.push(ConditionOutcome {
        condition: "single connected singular component",
        passed: single_component,
        detail: match &inputs.mixed_stratum {
            Some(ks) => format!("component mixes strata {ks:?}"),
            None => format!("{} components", inputs.components.len()),
        },
    });

    let uniform_k = no_mixed
        && inputs
            .components
            .windows(2)
            .all(|w| w[0].0 == w[1].0);
    reasons.push(ConditionOutcome {
        condition: "uniform stratum",
        passed: uniform_k,
        detail: match &inputs.mixed_stratum {
            Some(ks) => format!("strata {ks:?} in one component"),
            None => {
                let ks: Vec<usize> = inputs.components.iter().map(|c| c.0).collect();
                format!("strata {ks:?}")
            }
        },
    });

    let closed = !inputs.components.is_empty() && inputs.components.iter().all(|c| c.1);
    reasons.push(ConditionOutcome {
        condition: "closed singular manifold",
        passed: closed,
        detail: format!(
            "{} of {} components closed",
            inputs.components.iter().filter(|c| c.1).count(),
            inputs.components.len()
        ),
    });

    let worst_angle = inputs
        .components
        .iter()
        .map(|c| c.2)
        .fold(0.0f64, f64::max);
    let tangency = worst_angle <= inputs.angle_tol_deg;
    reasons.push(ConditionOutcome {
        condition: "singular set tangent to Hessian kernels",
        passed: tangency,
        detail: format!(
            "max tangency {worst_angle:.3} deg vs tolerance {:.3} deg",
            inputs.angle_tol_deg
        ),
    });

    let worst_spread = inputs
        .components
        .iter()
        .map(|c| c.3)
        .fold(0.0f64, f64::max);
    let constancy = worst_spread <= inputs.time_tol_abs;
    reasons.push(ConditionOutcome {
        condition: "arrival time constant on the singular set",
        passed: constancy,
        detail: format!(
            "max u spread {worst_spread:.3e} vs tolerance {:.3e}",
            inputs.time_tol_abs
        ),
    });

    let verdict = if !detected || !classified_ok {
        Verdict::Inconclusive
    } else if single_time && single_component && uniform_k && closed && tangency && constancy {
        Verdict::C2
    } else {
        Verdict::NotC2
    };
    (verdict, reasons)
}

/// Detect, classify, cluster, fit, profile, and judge.
pub fn run_analysis(u: &ArrivalField, params: &AnalyzerParams) -> Result<SingularSetReport> {
    params.validate()?;
    let (extinction_time, extinction_node) = u.extinction_time()?;
    let lipschitz_estimate = u.lipschitz_constant();
    let h = u.spec.spacing;
    let tau = params.tau.unwrap_or(h);
    let time_tol_abs = params.time_tol_frac * extinction_time;
    let sampler = ShellSampler::new(params.seed);
    let mut notes = Vec::new();

    let points = find_critical_points(u, tau, params.tol)?;
    let unclassified = points.iter().filter(|p| !p.is_classified()).count();
    let classified_ids: Vec<usize> = (0..points.len())
        .filter(|&i| points[i].is_classified())
        .collect();

    // clustering over classified points, members remapped to global indices
    let time_clusters = if classified_ids.is_empty() {
        Vec::new()
    } else {
        let subset: Vec<CriticalPoint> = classified_ids
            .iter()
            .map(|&i| points[i].clone())
            .collect();
        cluster_singular_times(&subset, time_tol_abs)?
            .into_iter()
            .map(|c| TimeCluster {
                time: c.time,
                members: c.members.iter().map(|&m| classified_ids[m]).collect(),
            })
            .collect()
    };

    let (manifolds, mixed_stratum) = if classified_ids.is_empty() {
        (Vec::new(), None)
    } else {
        match fit_singular_manifold(&points, h) {
            Ok(m) => (m, None),
            Err(Error::MixedStratum(ks)) => (Vec::new(), Some(ks)),
            Err(e) => return Err(e),
        }
    };

    // representative: first member of the earliest cluster
    let representative = time_clusters.first().map(|c| c.members[0]);

    let mut cone_profile = None;
    let mut alignment_profile = None;
    let mut rescaled = None;
    let mut local_structure = None;
    let mut transverse_point = None;
    if let Some(rep) = representative {
        let rep_point = &points[rep];
        let cone = ConeSpec {
            aperture: params.cone_aperture,
            radii: params.radii.clone(),
            samples_per_radius: params.samples_per_radius,
        };
        match cone_continuity_profile(u, rep_point, &cone, &sampler) {
            Ok(p) => cone_profile = Some(p),
            Err(e) => notes.push(format!("cone profile unavailable: {e}")),
        }
        if rep_point.k().unwrap_or(0) >= 1 {
            match normal_alignment_profile(
                u,
                rep_point,
                &params.radii,
                params.samples_per_radius,
                params.grad_floor,
                &sampler,
            ) {
                Ok(p) => alignment_profile = Some(p),
                Err(e) => notes.push(format!("alignment profile unavailable: {e}")),
            }
            match rescaled_profile(
                u,
                rep_point,
                &params.radii,
                params.samples_per_radius,
                params.cone_aperture,
                params.grad_floor,
                &sampler,
            ) {
                Ok(p) => rescaled = Some(p),
                Err(e) => notes.push(format!("rescaled profile unavailable: {e}")),
            }
            // transverse slice maximum a few spacings along the axis
            let eps_search = params.epsilon_search_frac * domain_radius(u);
            let kernel0 = rep_point.stratum.as_ref().unwrap().kernel[0];
            let offset = linalg::scale(&kernel0, (3.0 * h).min(0.5 * eps_search));
            match transverse_max_point(u, rep_point, &offset, eps_search, 0.05) {
                Ok(q) => transverse_point = Some(q),
                Err(e) => notes.push(format!("transverse maximum not certified: {e}")),
            }
        }
        let delta = (5.0 * h).max(params.radii.last().copied().unwrap_or(5.0 * h));
        match local_structure_checks(u, rep_point, delta, time_tol_abs) {
            Ok(l) => local_structure = Some(l),
            Err(e) => notes.push(format!("local structure checks unavailable: {e}")),
        }
    }

    let hessian_tangent_ratio = manifolds
        .iter()
        .find(|c| c.k >= 1 && c.members.len() >= 8)
        .and_then(|c| match hessian_tangent_lipschitz(&points, c) {
            Ok(o) => Some(o),
            Err(e) => {
                notes.push(format!("hessian-tangent ratio unavailable: {e}"));
                None
            }
        });

    let inputs = VerdictInputs {
        n_detections: points.len(),
        n_unclassified: unclassified,
        n_clusters: time_clusters.len(),
        components: manifolds
            .iter()
            .map(|c| (c.k, c.closed, c.max_tangency_deg, c.u_spread))
            .collect(),
        mixed_stratum: mixed_stratum.clone(),
        angle_tol_deg: params.angle_tol_deg,
        time_tol_abs,
    };
    let (verdict, verdict_reasons) = c2_verdict(&inputs);

    Ok(SingularSetReport {
        verdict,
        verdict_reasons,
        extinction_time,
        extinction_node,
        lipschitz_estimate,
        points,
        unclassified,
        time_clusters,
        manifolds,
        mixed_stratum,
        cone_profile,
        alignment_profile,
        rescaled,
        hessian_tangent_ratio,
        local_structure,
        transverse_point,
        notes,
        time_tol_abs,
        params: params.clone(),
    })
}

fn domain_radius(u: &ArrivalField) -> f64 {
    (0..u.spec.dim)
        .map(|a| u.spec.extent(a))
        .fold(0.0f64, f64::max)
        / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_inputs() -> VerdictInputs {
        VerdictInputs {
            n_detections: 100,
            n_unclassified: 0,
            n_clusters: 1,
            components: vec![(1, true, 0.5, 1e-5)],
            mixed_stratum: None,
            angle_tol_deg: 5.0,
            time_tol_abs: 1e-3,
        }
    }

    #[test]
    fn clean_ring_is_c2() {
        let (v, reasons) = c2_verdict(&base_inputs());
        assert_eq!(v, Verdict::C2);
        assert!(reasons.iter().all(|r| r.passed));
    }

    #[test]
    fn two_times_is_not_c2_with_witness() {
        let mut inp = base_inputs();
        inp.n_clusters = 2;
        inp.components.push((0, true, 0.0, 0.0));
        let (v, reasons) = c2_verdict(&inp);
        assert_eq!(v, Verdict::NotC2);
        let cond = reasons
            .iter()
            .find(|r| r.condition == "single singular time")
            .unwrap();
        assert!(!cond.passed);
        assert!(cond.detail.contains("2 time clusters"));
    }

    #[test]
    fn unclassified_overflow_is_inconclusive() {
        let mut inp = base_inputs();
        inp.n_unclassified = 15;
        let (v, _) = c2_verdict(&inp);
        assert_eq!(v, Verdict::Inconclusive);
    }

    #[test]
    fn tangency_violation_named() {
        let mut inp = base_inputs();
        inp.components[0].2 = 12.0;
        let (v, reasons) = c2_verdict(&inp);
        assert_eq!(v, Verdict::NotC2);
        assert!(reasons
            .iter()
            .any(|r| r.condition.contains("tangent") && !r.passed));
    }

    #[test]
    fn mixed_stratum_fails_component_conditions() {
        let mut inp = base_inputs();
        inp.mixed_stratum = Some(vec![0, 1]);
        inp.components.clear();
        let (v, reasons) = c2_verdict(&inp);
        assert_eq!(v, Verdict::NotC2);
        assert!(reasons
            .iter()
            .any(|r| !r.passed && r.detail.contains("mixes strata")));
    }
}
