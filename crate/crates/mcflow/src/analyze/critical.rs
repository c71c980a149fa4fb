//! Critical points of the arrival time and their cylindrical classification.
//!
//! A critical point of stratum k has a Hessian with a k-dimensional kernel
//! and eigenvalue -1/(n-k) on the orthogonal complement. The classifier
//! tries every admissible k, measures the Frobenius distance to that model,
//! and keeps the best fit when it clears the tolerance.
//!
//! Detection runs in the grid's own plane; on axisymmetric grids an off-axis
//! detection stands for a whole circle of singular points, which is
//! materialized by rotating the point (and its Hessian) around the axis so
//! downstream fitting sees the actual ambient singular set.

use crate::analyze::linalg;
use crate::arrival::ArrivalField;
use crate::error::{Error, Result};
use crate::field::Idx;
use crate::symmetric::SymmetricMatrix;

/// Classified cylindrical structure at a critical point.
#[derive(Debug, Clone)]
pub struct Stratum {
    /// Dimension of the Hessian kernel (the cylinder's Euclidean factor).
    pub k: usize,
    /// Frobenius distance to the model Hessian -1/(n-k) * complement projector.
    pub cylinder_residual: f64,
    /// Orthonormal kernel basis (k vectors).
    pub kernel: Vec<[f64; 3]>,
    /// Orthonormal complement basis (n + 1 - k vectors).
    pub complement: Vec<[f64; 3]>,
    /// Projector onto the kernel ("axis" directions).
    pub axis_projector: SymmetricMatrix,
    /// Projector onto the complement.
    pub complement_projector: SymmetricMatrix,
}

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    /// Ambient position (3 components; trailing zero in the plane).
    pub position: [f64; 3],
    pub u_value: f64,
    /// Ambient Hessian of u at the point, order n+1.
    pub hess: SymmetricMatrix,
    /// |grad u| at the refined position, for merge bookkeeping.
    pub grad_norm: f64,
    /// None when no cylindrical model fits within tolerance.
    pub stratum: Option<Stratum>,
}

impl CriticalPoint {
    pub fn k(&self) -> Option<usize> {
        self.stratum.as_ref().map(|s| s.k)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.hess.eigen().values
    }

    pub fn is_classified(&self) -> bool {
        self.stratum.is_some()
    }
}

/// Fit the cylindrical Hessian model for every candidate k in 0..n and keep
/// the best one if its residual clears `tol`. Ties resolve to smaller k.
pub fn classify_stratum(
    hess: &SymmetricMatrix,
    n: usize,
    tol: f64,
) -> Result<Option<Stratum>> {
    let m = n + 1;
    if hess.order() != m {
        return Err(Error::InvalidParameter(format!(
            "hessian order {} does not match ambient dimension {m}",
            hess.order()
        )));
    }
    if !(tol > 0.0 && tol < 1.0 / (2.0 * n as f64)) {
        return Err(Error::InvalidParameter(format!(
            "classification tolerance must lie in (0, 1/(2n)) = (0, {})",
            1.0 / (2.0 * n as f64)
        )));
    }
    let eig = hess.eigen();
    // order eigenpairs by |lambda| ascending: candidates for the kernel first
    let mut by_abs: Vec<usize> = (0..m).collect();
    by_abs.sort_by(|&a, &b| eig.values[a].abs().total_cmp(&eig.values[b].abs()));

    let mut best: Option<(f64, usize)> = None;
    for k in 0..n {
        let target = -1.0 / (n - k) as f64;
        let mut res2 = 0.0;
        for (rank, &e) in by_abs.iter().enumerate() {
            let lam = eig.values[e];
            if rank < k {
                res2 += lam * lam; // kernel candidates should vanish
            } else {
                res2 += (lam - target) * (lam - target);
            }
        }
        let res = res2.sqrt();
        if best.map(|(b, _)| res < b).unwrap_or(true) {
            best = Some((res, k));
        }
    }
    let (residual, k) = best.expect("n >= 1 yields at least one candidate");
    if residual > tol {
        return Ok(None);
    }
    let kernel: Vec<[f64; 3]> = by_abs[..k].iter().map(|&e| eig.vectors[e]).collect();
    let complement: Vec<[f64; 3]> = by_abs[k..].iter().map(|&e| eig.vectors[e]).collect();
    let axis_projector = SymmetricMatrix::projector(m, &kernel);
    let complement_projector = SymmetricMatrix::identity(m).sub(&axis_projector);
    Ok(Some(Stratum {
        k,
        cylinder_residual: residual,
        kernel,
        complement,
        axis_projector,
        complement_projector,
    }))
}

/// In-plane gradient-norm field over stencil-complete masked nodes.
fn gradient_norms(u: &ArrivalField) -> Vec<Option<f64>> {
    (0..u.spec.n_nodes())
        .map(|lin| {
            let idx = u.spec.unravel(lin);
            if !u.stencil_ok(idx) {
                return None;
            }
            u.node_gradient(idx)
                .ok()
                .map(|g| (g.iter().map(|v| v * v).sum::<f64>()).sqrt())
        })
        .collect()
}

fn interp_grad_norm(u: &ArrivalField, pos: &[f64; 3]) -> Option<f64> {
    let g = [
        interp_quantity(u, pos, 0)?,
        interp_quantity(u, pos, 1)?,
        if u.spec.dim == 3 {
            interp_quantity(u, pos, 2)?
        } else {
            0.0
        },
    ];
    Some((g.iter().map(|v| v * v).sum::<f64>()).sqrt())
}

fn interp_quantity(u: &ArrivalField, pos: &[f64; 3], comp: usize) -> Option<f64> {
    // gradient components interpolated at an in-plane position
    let spec = &u.spec;
    let mut base = [0usize; 3];
    let mut w = [0.0f64; 3];
    for a in 0..spec.dim {
        let t = (pos[a] - spec.origin[a]) / spec.spacing;
        if !((-1e-9)..=(spec.counts[a] - 1) as f64 + 1e-9).contains(&t) {
            return None;
        }
        let i = (t.floor().max(0.0) as usize).min(spec.counts[a] - 2);
        base[a] = i;
        w[a] = (t - i as f64).clamp(0.0, 1.0);
    }
    let mut acc = 0.0;
    for c in 0..(1usize << spec.dim) {
        let mut idx = base;
        let mut weight = 1.0;
        for a in 0..spec.dim {
            if c & (1 << a) != 0 {
                idx[a] += 1;
                weight *= w[a];
            } else {
                weight *= 1.0 - w[a];
            }
        }
        if weight == 0.0 {
            continue;
        }
        acc += weight * u.node_gradient(idx).ok()?[comp];
    }
    Some(acc)
}

/// Locate, refine, merge, and classify the critical points of u.
///
/// Seeds are masked nodes where |grad u| dips under `tau` and is a local
/// minimum of |grad u| over the 3^d neighborhood. Each seed takes one damped
/// Newton step on grad u restricted to the numerically nonsingular part of
/// the Hessian; duplicates within one grid spacing merge, keeping the
/// smaller |grad u|.
pub fn find_critical_points(
    u: &ArrivalField,
    tau: f64,
    tol: f64,
) -> Result<Vec<CriticalPoint>> {
    if u.partial {
        return Err(Error::PartialField);
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let spec = &u.spec;
    let h = spec.spacing;
    let norms = gradient_norms(u);

    // seed selection
    let mut seeds: Vec<Idx> = Vec::new();
    'node: for lin in 0..norms.len() {
        let Some(gn) = norms[lin] else { continue };
        if gn > tau {
            continue;
        }
        let idx = spec.unravel(lin);
        // local minimum of |grad u| over available neighbors (ties allowed)
        let reach: &[isize] = &[-1, 0, 1];
        for &dx in reach {
            for &dy in reach {
                let dzs: &[isize] = if spec.dim == 3 { reach } else { &[0] };
                for &dz in dzs {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let nb = spec
                        .offset(idx, 0, dx)
                        .and_then(|i| spec.offset(i, 1, dy))
                        .and_then(|i| if spec.dim == 3 { spec.offset(i, 2, dz) } else { Some(i) });
                    if let Some(nb) = nb {
                        if let Some(gn_nb) = norms[spec.linear(nb)] {
                            if gn_nb < gn {
                                continue 'node;
                            }
                        }
                    }
                }
            }
        }
        seeds.push(idx);
    }

    // one damped Newton step per seed, restricted to the nonsingular part
    // (the floor sits under the ~0.1 kernel eigenvalue a just-pinched neck
    // shows at reachable resolutions, so symmetric seed pairs still contract)
    let newton_floor = 0.05;
    struct Candidate {
        pos: [f64; 3], // in-plane
        grad_norm: f64,
    }
    let mut candidates: Vec<Candidate> = Vec::new();
    for idx in seeds {
        let pos0 = spec.position(idx);
        let g = u.node_gradient(idx)?;
        let hess = u.node_hessian(idx)?;
        let eig = hess.eigen();
        let mut delta = [0.0f64; 3];
        for (lam, q) in eig.values.iter().zip(&eig.vectors) {
            if lam.abs() >= newton_floor {
                let coeff = -linalg::dot(&g, q) / lam;
                delta = linalg::add(&delta, &linalg::scale(q, coeff));
            }
        }
        let dn = linalg::norm(&delta);
        if dn > 2.0 * h {
            delta = linalg::scale(&delta, 2.0 * h / dn);
        }
        let mut pos = linalg::add(&pos0, &delta);
        if spec.axisymmetric {
            pos[1] = pos[1].max(0.0);
        }
        let grad_norm = interp_grad_norm(u, &pos).unwrap_or(linalg::norm(&g));
        candidates.push(Candidate { pos, grad_norm });
    }

    // merge duplicates within h, preferring smaller residual gradient
    candidates.sort_by(|a, b| {
        a.grad_norm
            .total_cmp(&b.grad_norm)
            .then_with(|| a.pos[0].total_cmp(&b.pos[0]))
            .then_with(|| a.pos[1].total_cmp(&b.pos[1]))
            .then_with(|| a.pos[2].total_cmp(&b.pos[2]))
    });
    let mut kept: Vec<Candidate> = Vec::new();
    // the tolerance keeps exact h-spaced symmetric pairs from straddling the
    // merge boundary by one ulp
    let merge_radius = h * (1.0 + 1e-9);
    for c in candidates {
        if kept
            .iter()
            .all(|k| linalg::norm(&linalg::sub(&k.pos, &c.pos)) > merge_radius)
        {
            kept.push(c);
        }
    }

    // ambient assembly + classification (+ azimuthal unrolling off-axis)
    let n_surface = u.surface_dim();
    let mut points = Vec::new();
    for c in kept {
        let frame_pos = [c.pos[0], c.pos[1], if spec.dim == 3 { c.pos[2] } else { 0.0 }];
        let u_val = match u.value_at(&frame_pos) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let hess = match u.hessian_at_pos(&frame_pos) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let stratum = classify_stratum(&hess, n_surface, tol)?;

        let off_axis = spec.axisymmetric && c.pos[1] > 2.0 * h;
        if !off_axis {
            let position = if spec.axisymmetric {
                [c.pos[0], 0.0, 0.0]
            } else {
                frame_pos
            };
            points.push(CriticalPoint {
                position,
                u_value: u_val,
                hess,
                grad_norm: c.grad_norm,
                stratum,
            });
        } else {
            // an off-axis critical point of an axisymmetric field is a whole
            // circle; materialize it densely enough for the 3h neighbor graph
            let rho = c.pos[1];
            let m = ((std::f64::consts::TAU * rho / (1.5 * h)).ceil() as usize).max(24);
            for j in 0..m {
                let theta = std::f64::consts::TAU * j as f64 / m as f64;
                let (s, co) = theta.sin_cos();
                let position = [c.pos[0], rho * co, rho * s];
                let hess_rot = hess.rotated_about_x(theta);
                let stratum_rot = match &stratum {
                    Some(_) => classify_stratum(&hess_rot, n_surface, tol)?,
                    None => None,
                };
                points.push(CriticalPoint {
                    position,
                    u_value: u_val,
                    hess: hess_rot,
                    grad_norm: c.grad_norm,
                    stratum: stratum_rot,
                });
            }
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use crate::scenarios;

    #[test]
    fn classify_sphere_point() {
        let h = SymmetricMatrix::from_diagonal(&[-0.5, -0.5, -0.5]);
        let s = classify_stratum(&h, 2, 0.1).unwrap().unwrap();
        assert_eq!(s.k, 0);
        assert!(s.cylinder_residual < 1e-14);
        assert_eq!(s.kernel.len(), 0);
        assert_eq!(s.complement.len(), 3);
    }

    #[test]
    fn classify_neckpinch_cylinder() {
        let h = SymmetricMatrix::from_diagonal(&[-1.0, -1.0, 0.0]);
        let s = classify_stratum(&h, 2, 0.1).unwrap().unwrap();
        assert_eq!(s.k, 1);
        assert!(s.cylinder_residual < 1e-14);
        // kernel spans the zero eigenvalue's direction (z)
        assert!((s.kernel[0][2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_zero_matrix_unclassified() {
        let h = SymmetricMatrix::zeros(3);
        assert!(classify_stratum(&h, 2, 0.1).unwrap().is_none());
    }

    #[test]
    fn classify_validates_tolerance() {
        let h = SymmetricMatrix::zeros(3);
        assert!(classify_stratum(&h, 2, 0.3).is_err()); // tol >= 1/(2n)
        assert!(classify_stratum(&h, 2, 0.0).is_err());
    }

    #[test]
    fn projector_algebra_exact() {
        let h = SymmetricMatrix::from_fn(3, |i, j| {
            // a rotated cylinder Hessian
            let t = [0.6, 0.0, 0.8];
            -(if i == j { 1.0 } else { 0.0 } - t[i] * t[j])
        });
        let s = classify_stratum(&h, 2, 0.1).unwrap().unwrap();
        assert_eq!(s.k, 1);
        let sum = s.axis_projector.add(&s.complement_projector);
        let id = SymmetricMatrix::identity(3);
        assert!(sum.sub(&id).frobenius_norm() < 1e-10);
        // P_axis P = 0 and P_axis^2 = P_axis
        let v = [0.3, -0.5, 0.7];
        let pv = s.axis_projector.apply(&s.complement_projector.apply(&v));
        assert!(linalg::norm(&pv) < 1e-10);
        let twice = s.axis_projector.apply(&s.axis_projector.apply(&v));
        let once = s.axis_projector.apply(&v);
        assert!(linalg::norm(&linalg::sub(&twice, &once)) < 1e-10);
        assert!((s.axis_projector.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exact_sphere_field_collapses_to_center() {
        // u = (1 - |x|^2)/4 on a 3D grid with the origin as a node
        let n = 33;
        let spec = GridSpec::new(3, &[n, n, n], &[-0.8; 3], 1.6 / (n - 1) as f64, false).unwrap();
        let u = ArrivalField::from_oracle(spec, |p| scenarios::exact_arrival_sphere(1.0, 2, p).ok());
        let h = u.spec.spacing;
        let pts = find_critical_points(&u, h, 0.1).unwrap();
        assert_eq!(pts.len(), 1, "expected a single critical point");
        let p = &pts[0];
        assert!(linalg::norm(&p.position) < 1e-6);
        assert!((p.u_value - 0.25).abs() < 1e-10);
        assert_eq!(p.k(), Some(0));
        for lam in p.eigenvalues() {
            assert!((lam + 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn exact_circle_field_in_plane() {
        let n = 65;
        let spec = GridSpec::new(2, &[n, n], &[-1.5, -1.5], 3.0 / (n - 1) as f64, false).unwrap();
        let u = ArrivalField::from_oracle(spec, |p| scenarios::exact_arrival_sphere(1.0, 1, p).ok());
        let pts = find_critical_points(&u, u.spec.spacing, 0.1).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].k(), Some(0));
        assert!((pts[0].u_value - 0.5).abs() < 1e-10);
        let eig = pts[0].eigenvalues();
        assert!((eig[0] + 1.0).abs() < 1e-8 && (eig[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn partial_field_rejected() {
        let spec = GridSpec::new(2, &[16, 16], &[-1.0, -1.0], 0.1, false).unwrap();
        let mut u = ArrivalField::from_oracle(spec, |p| Some(p[0]));
        u.partial = true;
        assert!(matches!(
            find_critical_points(&u, 0.05, 0.1),
            Err(Error::PartialField)
        ));
    }
}
