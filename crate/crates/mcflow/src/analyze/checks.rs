//! Pointwise structural checks at a critical point: the transverse slice
//! maximum and the local extinction tests.

use crate::analyze::critical::CriticalPoint;
use crate::analyze::linalg;
use crate::arrival::ArrivalField;
use crate::error::{Error, Result};

/// Maximize u over the discrete slice (p + offset + K^perp), hill-climbing
/// from the point on the axis. A genuine transverse maximum has vanishing
/// in-slice gradient; leaving the search region or failing the alignment
/// check reports no interior maximum.
pub fn transverse_max_point(
    u: &ArrivalField,
    p: &CriticalPoint,
    offset: &[f64; 3],
    epsilon_search: f64,
    align_tol: f64,
) -> Result<[f64; 3]> {
    let stratum = p
        .stratum
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("transverse slice needs a classified point".into()))?;
    if stratum.k == 0 {
        return Err(Error::InvalidParameter(
            "transverse slice needs a stratum with k >= 1".into(),
        ));
    }
    let off_len = linalg::norm(offset);
    if off_len > epsilon_search {
        return Err(Error::InvalidParameter(format!(
            "offset length {off_len:.4} exceeds the search scale {epsilon_search:.4}"
        )));
    }
    // keep only the kernel component of the requested offset
    let axial = stratum.axis_projector.apply(offset);
    let start = linalg::add(&p.position, &axial);
    let h = u.spec.spacing;
    if u.value_at(&start).is_err() {
        return Err(Error::NoInteriorMax(
            "slice start lies outside the swept mask".into(),
        ));
    }

    let r_walk = (10.0 * h).max(4.0 * linalg::norm(&axial)) + h;
    let mut q = start;
    let mut best = u.value_at(&q)?;
    for level in 0..4 {
        let step = h / (1 << level) as f64;
        let mut moved = true;
        let mut iterations = 0;
        while moved {
            moved = false;
            iterations += 1;
            if iterations > 400 {
                break;
            }
            for dir in &stratum.complement {
                for sgn in [1.0, -1.0] {
                    let cand = linalg::add(&q, &linalg::scale(dir, sgn * step));
                    if linalg::norm(&linalg::sub(&cand, &start)) > r_walk {
                        continue;
                    }
                    if let Ok(v) = u.value_at(&cand) {
                        if v > best {
                            best = v;
                            q = cand;
                            moved = true;
                        }
                    }
                }
            }
        }
    }
    if linalg::norm(&linalg::sub(&q, &start)) >= r_walk - h {
        return Err(Error::NoInteriorMax("hill climb hit the search region".into()));
    }
    let g = u
        .gradient_at_pos(&q)
        .map_err(|_| Error::NoInteriorMax("slice gradient unavailable at the maximum".into()))?;
    let in_slice = linalg::norm(&stratum.complement_projector.apply(&g));
    if in_slice > align_tol {
        return Err(Error::NoInteriorMax(format!(
            "in-slice gradient {in_slice:.4} exceeds {align_tol:.4}"
        )));
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalStructure {
    /// sup of u over the delta-ball does not exceed u(p) (within time_tol).
    pub local_max: bool,
    /// No later-swept point sits on the transverse plane through p: every
    /// node with u > u(p) + time_tol keeps |P_axis(x - p)| > h.
    pub separation: bool,
}

/// Scan the delta-ball around a critical point for violations of the local
/// extinction picture.
pub fn local_structure_checks(
    u: &ArrivalField,
    p: &CriticalPoint,
    delta: f64,
    time_tol: f64,
) -> Result<LocalStructure> {
    let h = u.spec.spacing;
    if delta < 3.0 * h {
        return Err(Error::InvalidParameter(format!(
            "delta {delta:.4} below 3h = {:.4}",
            3.0 * h
        )));
    }
    let spec = &u.spec;
    // in-plane footprint of the critical point
    let center = if spec.axisymmetric {
        let rho = (p.position[1] * p.position[1] + p.position[2] * p.position[2]).sqrt();
        [p.position[0], rho, 0.0]
    } else {
        p.position
    };
    let mut local_max = true;
    let mut separation = true;
    for idx in spec.indexes() {
        let Some(val) = u.at(idx) else { continue };
        if val <= p.u_value + time_tol {
            continue;
        }
        let node = spec.position(idx);
        let d_inplane = {
            let mut s = 0.0;
            for a in 0..spec.dim {
                s += (node[a] - center[a]) * (node[a] - center[a]);
            }
            s.sqrt()
        };
        if d_inplane > delta {
            continue;
        }
        // a strictly later node inside the ball
        local_max = false;
        if !separation {
            continue;
        }
        let within_slab = match (&p.stratum, spec.axisymmetric) {
            (Some(s), true) => {
                // minimize |P_axis(q(theta) - p)| over the node's azimuth
                // circle intersected with the delta-ball
                let rho = node[1];
                let mut best: Option<f64> = None;
                for j in 0..128 {
                    let theta = std::f64::consts::TAU * j as f64 / 128.0;
                    let (sn, cs) = theta.sin_cos();
                    let q = [node[0], rho * cs, rho * sn];
                    let diff = linalg::sub(&q, &p.position);
                    if linalg::norm(&diff) > delta {
                        continue;
                    }
                    let a = linalg::norm(&s.axis_projector.apply(&diff));
                    best = Some(best.map_or(a, |b: f64| b.min(a)));
                }
                best.map(|b| b <= h).unwrap_or(false)
            }
            (Some(s), false) => {
                let diff = linalg::sub(&node, &p.position);
                linalg::norm(&s.axis_projector.apply(&diff)) <= h
            }
            // unclassified or k = 0: the axis projector vanishes, so any
            // violator in the ball sits on the transverse plane
            (None, _) => true,
        };
        if within_slab {
            separation = false;
        }
    }
    Ok(LocalStructure {
        local_max,
        separation,
    })
}
