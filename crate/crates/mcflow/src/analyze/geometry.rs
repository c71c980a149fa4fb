//! Cross-validation of arrival-time Hessians against level-set geometry.
//!
//! With n = grad u / |grad u| pointing toward later arrival and the speed
//! form H = 1/|grad u| (so div n = -H on the level sets), the second
//! derivatives of u split along the level-set frame:
//!
//!   Hess_u(e_i, e_j) = A(e_i, e_j) / H
//!   Hess_u(n, n)     = grad_n |grad u|
//!   Hess_u(e_i, n)   = grad_{e_i} |grad u|
//!
//! where A is the tangential Jacobian of n. The probe computes both sides
//! through independent stencils and reports the three residuals.

use crate::analyze::critical::CriticalPoint;
use crate::analyze::linalg;
use crate::arrival::ArrivalField;
use crate::error::{Error, Result};
use crate::field::Idx;
use crate::symmetric::SymmetricMatrix;

#[derive(Debug, Clone)]
pub struct GeometryProbe {
    pub position: [f64; 3],
    /// Unit normal toward increasing arrival time.
    pub normal: [f64; 3],
    /// Speed form H = 1/|grad u|.
    pub speed_form: f64,
    /// A/H on the tangent space (order n), which should match the
    /// tangential Hessian.
    pub a_over_h: SymmetricMatrix,
    /// Residuals of the three frame identities.
    pub frame_checks: [f64; 3],
}

pub fn geometry_probe(u: &ArrivalField, idx: Idx, grad_floor: f64) -> Result<GeometryProbe> {
    // reject degenerate inputs: the identities presume the equation holds
    let residual = u.residual(idx, grad_floor)?;
    if residual.abs() > 0.5 {
        return Err(Error::DegenerateProbe { index: idx, residual });
    }
    let pos = u.spec.position(idx);
    let dim = u.ambient_dim();
    let n_surf = u.surface_dim();

    let (normal, grad_norm) = u.normal_at_pos(&pos)?;
    let hess = u.hessian_at_pos(&pos)?;
    let jn = u.normal_jacobian_at_pos(&pos)?;
    let grad_of_speed = u.gradnorm_gradient_at_pos(&pos)?;

    let tangent = linalg::complement_basis(&normal, dim);
    debug_assert_eq!(tangent.len(), n_surf);

    let apply_j = |v: &[f64; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for (row, jrow) in jn.iter().enumerate() {
            out[row] = jrow[0] * v[0] + jrow[1] * v[1] + jrow[2] * v[2];
        }
        out
    };

    // A/H = |grad u| * tangential Jacobian of n, symmetrized
    let a_over_h = SymmetricMatrix::from_fn(n_surf, |i, j| {
        let ji = apply_j(&tangent[j]);
        let jj = apply_j(&tangent[i]);
        grad_norm * 0.5 * (linalg::dot(&tangent[i], &ji) + linalg::dot(&tangent[j], &jj))
    });
    let tangential_hess = SymmetricMatrix::from_fn(n_surf, |i, j| {
        let hv = hess.apply(&tangent[j]);
        linalg::dot(&tangent[i], &hv)
    });
    let check_tangential = tangential_hess.sub(&a_over_h).frobenius_norm();

    let hess_nn = {
        let hv = hess.apply(&normal);
        linalg::dot(&normal, &hv)
    };
    let check_normal = (hess_nn - linalg::dot(&grad_of_speed, &normal)).abs();

    let mut check_mixed: f64 = 0.0;
    for e in &tangent {
        let hv = hess.apply(e);
        let lhs = linalg::dot(&normal, &hv);
        let rhs = linalg::dot(&grad_of_speed, e);
        check_mixed = check_mixed.max((lhs - rhs).abs());
    }

    Ok(GeometryProbe {
        position: pos,
        normal,
        speed_form: 1.0 / grad_norm,
        a_over_h,
        frame_checks: [check_tangential, check_normal, check_mixed],
    })
}

/// Convenience for scanning a field: frame-check residuals over all regular
/// stencil-complete nodes with |grad u| above the floor.
pub fn frame_check_residuals(u: &ArrivalField, grad_floor: f64) -> Vec<(Idx, [f64; 3])> {
    let mut out = Vec::new();
    for idx in u.spec.indexes() {
        if !u.stencil_ok(idx) {
            continue;
        }
        // the probe differentiates node normals, so neighbors need stencils
        let ok_ring = (0..u.spec.dim).all(|a| {
            u.spec
                .offset(idx, a, 1)
                .map(|i| u.stencil_ok(i))
                .unwrap_or(false)
                && u.spec
                    .offset(idx, a, -1)
                    .map(|i| u.stencil_ok(i))
                    .unwrap_or(false)
        });
        if !ok_ring {
            continue;
        }
        if let Ok(probe) = geometry_probe(u, idx, grad_floor) {
            out.push((idx, probe.frame_checks));
        }
    }
    out
}

/// The probe evaluated at a critical point makes no sense; this helper
/// documents that contract for callers holding a point.
pub fn probe_near(u: &ArrivalField, p: &CriticalPoint, grad_floor: f64) -> Result<GeometryProbe> {
    let spec = &u.spec;
    let inplane = if spec.axisymmetric {
        let rho = (p.position[1] * p.position[1] + p.position[2] * p.position[2]).sqrt();
        [p.position[0], rho, 0.0]
    } else {
        p.position
    };
    let mut idx = [0usize; 3];
    for a in 0..spec.dim {
        idx[a] = ((inplane[a] - spec.origin[a]) / spec.spacing).round() as usize;
    }
    geometry_probe(u, idx, grad_floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    /// Fine local patch of the exact planar disk arrival time around
    /// |x| = 0.5. Cross-route differencing converges at second order, so a
    /// very small spacing pushes all three residuals under 1e-8.
    #[test]
    fn circle_frame_identities_at_fine_h() {
        let h = 5e-5;
        let n = 17;
        let spec = GridSpec::new(
            2,
            &[n, n],
            &[0.5 - 8.0 * h, -8.0 * h],
            h,
            false,
        )
        .unwrap();
        // shifted so second differences sit far from the cancellation floor;
        // the frame identities only see derivatives of u
        let u = ArrivalField::from_oracle(spec, |p| {
            Some((1.0 - p[0] * p[0] - p[1] * p[1]) / 2.0 - 0.375)
        });
        let probe = geometry_probe(&u, [8, 8, 0], 0.05).unwrap();
        // at (0.5, 0): n = -x_hat, H = 1/|x| = 2, A(e,e)/H = -1
        assert!((probe.normal[0] + 1.0).abs() < 1e-10);
        assert!((probe.speed_form - 2.0).abs() < 1e-8);
        assert!((probe.a_over_h.get(0, 0) + 1.0).abs() < 1e-6);
        for (i, c) in probe.frame_checks.iter().enumerate() {
            assert!(*c <= 1e-8, "frame check {i} = {c:.3e}");
        }
    }

    #[test]
    fn cylinder_tangential_spectrum() {
        let h = 1e-3;
        let n = 13;
        // 3D patch around (0, 0.5, 0), just off the cylinder axis
        let spec = GridSpec::new(
            3,
            &[n, n, n],
            &[-6.0 * h, 0.5 - 6.0 * h, -6.0 * h],
            h,
            false,
        )
        .unwrap();
        let u = ArrivalField::from_oracle(spec, |p| {
            Some((1.0 - p[1] * p[1] - p[2] * p[2]) / 2.0)
        });
        let probe = geometry_probe(&u, [6, 6, 6], 0.05).unwrap();
        let eig = probe.a_over_h.eigen().values;
        // tangential Hessian eigenvalues {-1, 0}: curved around the cylinder,
        // flat along the axis
        assert!((eig[0] + 1.0).abs() < 1e-4, "eig {eig:?}");
        assert!(eig[1].abs() < 1e-4, "eig {eig:?}");
        for c in probe.frame_checks {
            assert!(c <= 1e-4, "frame check {c:.3e}");
        }
    }

    #[test]
    fn affine_field_rejected_as_degenerate() {
        let spec = GridSpec::new(2, &[17, 17], &[-1.0, -1.0], 0.125, false).unwrap();
        let u = ArrivalField::from_oracle(spec, |p| Some(0.3 * p[0] + 0.1 * p[1]));
        assert!(matches!(
            geometry_probe(&u, [8, 8, 0], 0.05),
            Err(Error::DegenerateProbe { .. })
        ));
    }

    #[test]
    fn near_critical_node_rejected() {
        let spec = GridSpec::new(2, &[33, 33], &[-1.5, -1.5], 3.0 / 32.0, false).unwrap();
        let u = ArrivalField::from_oracle(spec, |p| {
            Some((1.0 - p[0] * p[0] - p[1] * p[1]) / 2.0)
        });
        assert!(matches!(
            geometry_probe(&u, [16, 16, 0], 0.05),
            Err(Error::NearCritical { .. })
        ));
    }
}
