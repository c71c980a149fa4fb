//! Shell-sampling profiles around a critical point.
//!
//! Three views of the local structure, all sampled on shrinking spheres with
//! deterministic low-discrepancy directions:
//!
//! * cone continuity: Hessian deviation from the critical point's Hessian,
//!   restricted to the transverse cone |P_axis(x - p)| <= C |P(x - p)|.
//!   Continuity of the second derivative transverse to the kernel shows up
//!   as this sequence decaying with the radius.
//! * normal alignment: how much the level-set normal at regular points leans
//!   into the kernel directions. Decay is what a continuous Hessian forces;
//!   values near one witness the opposite.
//! * rescaled profile: cylinder-likeness of the rescaled flow (radial
//!   normal alignment, the normalized speed (n-k)|grad u|/rho, the spectrum
//!   of -A/H on the tangent space, and the scale-free tangential speed
//!   gradient).

use crate::analyze::critical::CriticalPoint;
use crate::analyze::linalg;
use crate::analyze::sampling::ShellSampler;
use crate::arrival::ArrivalField;
use crate::error::{Error, Result};
use crate::symmetric::SymmetricMatrix;

/// Sampling geometry for the transverse cone around a critical point.
#[derive(Debug, Clone)]
pub struct ConeSpec {
    /// Aperture C: keep samples with |P_axis(x-p)| <= C |P(x-p)|.
    pub aperture: f64,
    /// Strictly decreasing shell radii.
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
}

impl ConeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.aperture > 0.0) {
            return Err(Error::InvalidParameter("cone aperture must be positive".into()));
        }
        if self.radii.is_empty() || self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter(
                "cone radii must be strictly decreasing".into(),
            ));
        }
        if self.radii.iter().any(|&r| r <= 0.0) {
            return Err(Error::InvalidParameter("cone radii must be positive".into()));
        }
        if self.samples_per_radius == 0 {
            return Err(Error::InvalidParameter("need at least one sample".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ConeProfile {
    pub radii: Vec<f64>,
    /// Max Frobenius deviation of Hess u from the apex Hessian per shell.
    pub max_deviation: Vec<f64>,
    pub n_samples: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct AlignmentProfile {
    pub radii: Vec<f64>,
    /// Max |P_axis(n)| over regular samples per shell.
    pub max_axis_alignment: Vec<f64>,
    pub n_samples: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RescaledProfile {
    pub radii: Vec<f64>,
    /// Mean |<n, rho_hat>|: alignment of the normal with the radial direction
    /// from the axis line.
    pub radial_alignment: Vec<f64>,
    /// Mean (n-k) |grad u| / rho; tends to one on a cylinder.
    pub speed_ratio: Vec<f64>,
    /// Mean sorted spectrum of -A/H on the tangent space.
    pub shape_spectrum: Vec<Vec<f64>>,
    /// Max deviation of that spectrum from {0 x k, 1/(n-k) x (n-k)}.
    pub spectrum_deviation: Vec<f64>,
    /// Mean scale-free tangential speed gradient |P_tan grad |grad u||.
    pub grad_speed_ratio: Vec<f64>,
    pub n_samples: Vec<usize>,
}

fn stratum_of(p: &CriticalPoint) -> Result<&crate::analyze::critical::Stratum> {
    p.stratum.as_ref().ok_or_else(|| {
        Error::InvalidParameter("profile apex must be a classified critical point".into())
    })
}

/// Max Hessian deviation over cone-restricted shells; the sequence should
/// sink toward zero as the shells shrink whenever the second derivative is
/// continuous transverse to the kernel.
pub fn cone_continuity_profile(
    u: &ArrivalField,
    apex: &CriticalPoint,
    cone: &ConeSpec,
    sampler: &ShellSampler,
) -> Result<ConeProfile> {
    cone.validate()?;
    let stratum = stratum_of(apex)?;
    let dim = u.ambient_dim();
    let mut max_deviation = Vec::with_capacity(cone.radii.len());
    let mut n_samples = Vec::with_capacity(cone.radii.len());
    for (ri, &r) in cone.radii.iter().enumerate() {
        let dirs = sampler.directions(dim, cone.samples_per_radius, ri as u64);
        let mut worst: Option<f64> = None;
        let mut kept = 0usize;
        for d in dirs {
            let x = linalg::add(&apex.position, &linalg::scale(&d, r));
            let axis_part = linalg::norm(&stratum.axis_projector.apply(&d));
            let trans_part = linalg::norm(&stratum.complement_projector.apply(&d));
            if axis_part > cone.aperture * trans_part {
                continue;
            }
            let Ok(hess) = u.hessian_at_pos(&x) else { continue };
            let dev = hess.sub(&apex.hess).frobenius_norm();
            worst = Some(worst.map_or(dev, |w: f64| w.max(dev)));
            kept += 1;
        }
        let Some(w) = worst else {
            return Err(Error::EmptyShell(r));
        };
        max_deviation.push(w);
        n_samples.push(kept);
    }
    Ok(ConeProfile {
        radii: cone.radii.clone(),
        max_deviation,
        n_samples,
    })
}

/// Max kernel-component of the unit normal over regular points per shell.
/// The regularity floor scales with the radius, matching the linear decay of
/// |grad u| toward the critical point. The kernel poles are always included
/// among the sampled directions.
pub fn normal_alignment_profile(
    u: &ArrivalField,
    p: &CriticalPoint,
    radii: &[f64],
    samples_per_radius: usize,
    grad_floor: f64,
    sampler: &ShellSampler,
) -> Result<AlignmentProfile> {
    let stratum = stratum_of(p)?;
    if stratum.k == 0 {
        return Err(Error::InvalidParameter(
            "normal alignment profile needs a stratum with k >= 1".into(),
        ));
    }
    let dim = u.ambient_dim();
    let mut out_vals = Vec::with_capacity(radii.len());
    let mut out_counts = Vec::with_capacity(radii.len());
    for (ri, &r) in radii.iter().enumerate() {
        let mut dirs = sampler.directions(dim, samples_per_radius, 1000 + ri as u64);
        for kvec in &stratum.kernel {
            dirs.push(*kvec);
            dirs.push(linalg::scale(kvec, -1.0));
        }
        let mut worst: Option<f64> = None;
        let mut kept = 0usize;
        for d in dirs {
            let x = linalg::add(&p.position, &linalg::scale(&d, r));
            let Ok((n, gn)) = u.normal_at_pos(&x) else { continue };
            if gn < grad_floor * r {
                continue; // not a regular point at this scale
            }
            let align = linalg::norm(&stratum.axis_projector.apply(&n));
            worst = Some(worst.map_or(align, |w: f64| w.max(align)));
            kept += 1;
        }
        let Some(w) = worst else {
            return Err(Error::EmptyShell(r));
        };
        out_vals.push(w);
        out_counts.push(kept);
    }
    Ok(AlignmentProfile {
        radii: radii.to_vec(),
        max_axis_alignment: out_vals,
        n_samples: out_counts,
    })
}

/// Cylinder-likeness of the rescaled flow around a k >= 1 critical point,
/// averaged over transverse-cone samples per shell.
pub fn rescaled_profile(
    u: &ArrivalField,
    p: &CriticalPoint,
    radii: &[f64],
    samples_per_radius: usize,
    aperture: f64,
    grad_floor: f64,
    sampler: &ShellSampler,
) -> Result<RescaledProfile> {
    let stratum = stratum_of(p)?;
    if stratum.k == 0 {
        return Err(Error::InvalidParameter(
            "rescaled profile needs a stratum with k >= 1".into(),
        ));
    }
    let dim = u.ambient_dim();
    let n_surf = u.surface_dim();
    let k = stratum.k;
    let n_minus_k = (n_surf - k) as f64;
    // target spectrum of -A/H: k zeros and (n-k) copies of 1/(n-k), ascending
    let mut target: Vec<f64> = vec![0.0; k];
    target.extend(std::iter::repeat(1.0 / n_minus_k).take(n_surf - k));
    target.sort_by(f64::total_cmp);

    let mut prof = RescaledProfile {
        radii: radii.to_vec(),
        radial_alignment: Vec::new(),
        speed_ratio: Vec::new(),
        shape_spectrum: Vec::new(),
        spectrum_deviation: Vec::new(),
        grad_speed_ratio: Vec::new(),
        n_samples: Vec::new(),
    };
    for (ri, &r) in radii.iter().enumerate() {
        let dirs = sampler.directions(dim, samples_per_radius, 2000 + ri as u64);
        let mut acc_align = 0.0;
        let mut acc_speed = 0.0;
        let mut acc_spec = vec![0.0; n_surf];
        let mut acc_grad_h = 0.0;
        let mut kept = 0usize;
        for d in dirs {
            let axis_part = linalg::norm(&stratum.axis_projector.apply(&d));
            let trans_part = linalg::norm(&stratum.complement_projector.apply(&d));
            if axis_part > aperture * trans_part {
                continue;
            }
            let x = linalg::add(&p.position, &linalg::scale(&d, r));
            let Ok((n, gn)) = u.normal_at_pos(&x) else { continue };
            if gn < grad_floor * r {
                continue;
            }
            let offset = linalg::sub(&x, &p.position);
            let radial = stratum.complement_projector.apply(&offset);
            let rho = linalg::norm(&radial);
            if rho < 1e-12 {
                continue;
            }
            let rho_hat = linalg::scale(&radial, 1.0 / rho);
            let Ok(jn) = u.normal_jacobian_at_pos(&x) else { continue };
            let Ok(grad_gn) = u.gradnorm_gradient_at_pos(&x) else { continue };

            // tangent basis of the level set at x
            let tangent = linalg::complement_basis(&n, dim);
            // -A/H = -(P J_n P) |grad u| on the tangent space
            let a_tan = SymmetricMatrix::from_fn(n_surf, |i, j| {
                let (ti, tj) = (&tangent[i], &tangent[j]);
                let mut jt = [0.0; 3];
                for (row, jrow) in jn.iter().enumerate() {
                    jt[row] = jrow[0] * tj[0] + jrow[1] * tj[1] + jrow[2] * tj[2];
                }
                -gn * 0.5
                    * (linalg::dot(ti, &jt) + {
                        let mut jt2 = [0.0; 3];
                        for (row, jrow) in jn.iter().enumerate() {
                            jt2[row] = jrow[0] * ti[0] + jrow[1] * ti[1] + jrow[2] * ti[2];
                        }
                        linalg::dot(tj, &jt2)
                    })
            });
            let spec = a_tan.eigen().values;
            // tangential part of grad |grad u| (the scale-free |grad H|/H^2)
            let normal_comp = linalg::dot(&grad_gn, &n);
            let tangential =
                linalg::sub(&grad_gn, &linalg::scale(&n, normal_comp));

            acc_align += linalg::dot(&n, &rho_hat).abs();
            acc_speed += n_minus_k * gn / rho;
            for (a, s) in acc_spec.iter_mut().zip(&spec) {
                *a += s;
            }
            acc_grad_h += linalg::norm(&tangential);
            kept += 1;
        }
        if kept == 0 {
            return Err(Error::EmptyShell(r));
        }
        let inv = 1.0 / kept as f64;
        let spec_mean: Vec<f64> = acc_spec.iter().map(|s| s * inv).collect();
        let dev = spec_mean
            .iter()
            .zip(&target)
            .map(|(s, t)| (s - t).abs())
            .fold(0.0f64, f64::max);
        prof.radial_alignment.push(acc_align * inv);
        prof.speed_ratio.push(acc_speed * inv);
        prof.shape_spectrum.push(spec_mean);
        prof.spectrum_deviation.push(dev);
        prof.grad_speed_ratio.push(acc_grad_h * inv);
        prof.n_samples.push(kept);
    }
    Ok(prof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyze::critical::{classify_stratum, find_critical_points};
    use crate::field::GridSpec;
    use crate::scenarios;

    fn exact_sphere_3d(n: usize) -> ArrivalField {
        let spec = GridSpec::new(3, &[n, n, n], &[-0.8; 3], 1.6 / (n - 1) as f64, false).unwrap();
        ArrivalField::from_oracle(spec, |p| scenarios::exact_arrival_sphere(1.0, 2, p).ok())
    }

    fn exact_cylinder_3d(n: usize) -> ArrivalField {
        let spec = GridSpec::new(3, &[n, n, n], &[-0.8; 3], 1.6 / (n - 1) as f64, false).unwrap();
        ArrivalField::from_oracle(spec, |p| {
            let rho = (p[1] * p[1] + p[2] * p[2]).sqrt();
            scenarios::exact_arrival_cylinder(1.0, 2, 1, rho).ok()
        })
    }

    /// Critical point at the origin of the exact cylinder field.
    fn cylinder_point() -> CriticalPoint {
        let hess = SymmetricMatrix::from_diagonal(&[0.0, -1.0, -1.0]);
        let stratum = classify_stratum(&hess, 2, 0.1).unwrap();
        CriticalPoint {
            position: [0.0; 3],
            u_value: 0.5,
            hess,
            grad_norm: 0.0,
            stratum,
        }
    }

    #[test]
    fn constant_hessian_gives_zero_deviation() {
        let u = exact_sphere_3d(41);
        let pts = find_critical_points(&u, u.spec.spacing, 0.1).unwrap();
        let cone = ConeSpec {
            aperture: 1.0,
            radii: vec![0.3, 0.2, 0.1],
            samples_per_radius: 32,
        };
        let prof = cone_continuity_profile(&u, &pts[0], &cone, &ShellSampler::new(1)).unwrap();
        for d in prof.max_deviation {
            assert!(d < 1e-7, "deviation {d}");
        }
    }

    #[test]
    fn rejects_nondecreasing_radii() {
        let cone = ConeSpec {
            aperture: 1.0,
            radii: vec![0.1, 0.1],
            samples_per_radius: 8,
        };
        assert!(cone.validate().is_err());
    }

    #[test]
    fn cylinder_alignment_is_zero() {
        let u = exact_cylinder_3d(41);
        let p = cylinder_point();
        let prof = normal_alignment_profile(
            &u,
            &p,
            &[0.3, 0.2, 0.1],
            64,
            0.05,
            &ShellSampler::new(1),
        )
        .unwrap();
        for v in prof.max_axis_alignment {
            // the normal is purely radial; only interpolation noise remains
            assert!(v < 1e-8, "alignment {v}");
        }
    }

    #[test]
    fn alignment_requires_positive_k() {
        let u = exact_sphere_3d(33);
        let pts = find_critical_points(&u, u.spec.spacing, 0.1).unwrap();
        assert!(normal_alignment_profile(
            &u,
            &pts[0],
            &[0.2],
            16,
            0.05,
            &ShellSampler::new(1)
        )
        .is_err());
    }

    #[test]
    fn exact_cylinder_rescaled_rows() {
        let u = exact_cylinder_3d(65);
        let p = cylinder_point();
        let prof = rescaled_profile(
            &u,
            &p,
            &[0.4, 0.3, 0.2],
            64,
            1.0,
            0.05,
            &ShellSampler::new(1),
        )
        .unwrap();
        for i in 0..prof.radii.len() {
            assert!((prof.radial_alignment[i] - 1.0).abs() < 1e-6);
            assert!((prof.speed_ratio[i] - 1.0).abs() < 1e-6);
            assert!(prof.spectrum_deviation[i] < 5e-3, "spec dev {}", prof.spectrum_deviation[i]);
            assert!(prof.grad_speed_ratio[i] < 5e-3, "grad ratio {}", prof.grad_speed_ratio[i]);
        }
    }

    #[test]
    fn rescaled_rejects_k0() {
        let u = exact_sphere_3d(33);
        let pts = find_critical_points(&u, u.spec.spacing, 0.1).unwrap();
        assert!(rescaled_profile(
            &u,
            &pts[0],
            &[0.2],
            16,
            1.0,
            0.05,
            &ShellSampler::new(1)
        )
        .is_err());
    }

    #[test]
    fn empty_shell_reported() {
        let u = exact_cylinder_3d(33);
        let p = cylinder_point();
        // radius beyond the mask: every sample dies
        let cone = ConeSpec {
            aperture: 1.0,
            radii: vec![5.0],
            samples_per_radius: 16,
        };
        assert!(matches!(
            cone_continuity_profile(&u, &p, &cone, &ShellSampler::new(1)),
            Err(Error::EmptyShell(_))
        ));
    }
}
