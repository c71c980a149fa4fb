//! Fitting the singular set as a manifold.
//!
//! Critical points within three grid spacings are considered neighbors. On
//! each connected component the local singular set is fitted, per point, as
//! an affine graph over the Hessian kernel; the angle between the fitted
//! tangent plane and the kernel measures how far the set is from being
//! tangent to the cylinder axes, and the u-spread measures failure of
//! constancy along the component.

use nalgebra::DMatrix;

use crate::analyze::critical::CriticalPoint;
use crate::analyze::linalg;
use crate::error::{Error, Result};
use crate::symmetric::SymmetricMatrix;

#[derive(Debug, Clone)]
pub struct ManifoldComponent {
    pub k: usize,
    /// Indices into the critical-point list.
    pub members: Vec<usize>,
    /// Adjacency in member-local indexing.
    pub adjacency: Vec<Vec<usize>>,
    /// For k = 1: every member has at least two neighbors. Dimension-0
    /// components are closed by convention.
    pub closed: bool,
    /// Largest principal angle between fitted tangents and Hessian kernels.
    pub max_tangency_deg: f64,
    /// Max minus min arrival time over the component.
    pub u_spread: f64,
    /// Fitted orthonormal tangent basis per member (k vectors each).
    pub tangents: Vec<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipschitzOutcome {
    MaxRatio(f64),
    /// Every pair had (numerically) identical tangent planes.
    NoVariation,
}

fn neighbor_graph(points: &[CriticalPoint], ids: &[usize], radius: f64) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); ids.len()];
    for a in 0..ids.len() {
        for b in a + 1..ids.len() {
            let d = linalg::norm(&linalg::sub(
                &points[ids[a]].position,
                &points[ids[b]].position,
            ));
            if d <= radius {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    adj
}

fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Largest principal angle (radians) between two k-dimensional subspaces
/// given by orthonormal bases.
fn principal_angle(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let k = a.len();
    if k == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(k, k, |i, j| linalg::dot(&a[i], &b[j]));
    let svd = m.svd(false, false);
    let sigma_min = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |acc, &s| acc.min(s));
    sigma_min.clamp(0.0, 1.0).acos()
}

/// Least-squares affine graph over the kernel at one point; returns the
/// fitted orthonormal tangent basis.
fn fit_tangent(
    points: &[CriticalPoint],
    center: usize,
    neighbor_ids: &[usize],
) -> Vec<[f64; 3]> {
    let stratum = points[center].stratum.as_ref().expect("classified");
    let k = stratum.k;
    let kernel = &stratum.kernel;
    let complement = &stratum.complement;
    // rows: the point itself at the origin plus each neighbor
    let n_rows = neighbor_ids.len() + 1;
    if n_rows < k + 1 {
        // underdetermined: fall back to the kernel itself
        return kernel.clone();
    }
    let mut design = DMatrix::zeros(n_rows, k + 1);
    let mut targets = DMatrix::zeros(n_rows, complement.len());
    design[(0, 0)] = 1.0;
    for (r, &nb) in neighbor_ids.iter().enumerate() {
        let d = linalg::sub(&points[nb].position, &points[center].position);
        design[(r + 1, 0)] = 1.0;
        for c in 0..k {
            design[(r + 1, c + 1)] = linalg::dot(&d, &kernel[c]);
        }
        for (w, comp) in complement.iter().enumerate() {
            targets[(r + 1, w)] = linalg::dot(&d, comp);
        }
    }
    let svd = design.svd(true, true);
    let Ok(beta) = svd.solve(&targets, 1e-12) else {
        return kernel.clone();
    };
    // tangent direction c: kernel[c] + sum_w beta[(c+1, w)] * complement[w]
    let mut raw = Vec::with_capacity(k);
    for c in 0..k {
        let mut t = kernel[c];
        for (w, comp) in complement.iter().enumerate() {
            t = linalg::add(&t, &linalg::scale(comp, beta[(c + 1, w)]));
        }
        raw.push(t);
    }
    let ortho = linalg::orthonormalize(&raw);
    if ortho.len() == k {
        ortho
    } else {
        kernel.clone()
    }
}

/// Group classified critical points into connected components and fit each
/// as a graph over the common kernel. A component mixing strata is an error
/// (and downstream, a witness against continuity).
pub fn fit_singular_manifold(
    points: &[CriticalPoint],
    h: f64,
) -> Result<Vec<ManifoldComponent>> {
    let ids: Vec<usize> = (0..points.len())
        .filter(|&i| points[i].is_classified())
        .collect();
    if ids.is_empty() {
        return Err(Error::NoCriticalPoints);
    }
    let adj = neighbor_graph(points, &ids, 3.0 * h);
    let comps = components(&adj);

    let mut out = Vec::new();
    for comp in comps {
        let ks: Vec<usize> = comp
            .iter()
            .map(|&l| points[ids[l]].k().expect("classified"))
            .collect();
        let k = ks[0];
        if ks.iter().any(|&x| x != k) {
            let mut seen: Vec<usize> = ks.clone();
            seen.sort_unstable();
            seen.dedup();
            return Err(Error::MixedStratum(seen));
        }
        if k == 0 {
            // dimension-0 strata: each point is its own closed component
            for &l in &comp {
                out.push(ManifoldComponent {
                    k: 0,
                    members: vec![ids[l]],
                    adjacency: vec![Vec::new()],
                    closed: true,
                    max_tangency_deg: 0.0,
                    u_spread: 0.0,
                    tangents: vec![Vec::new()],
                });
            }
            continue;
        }
        let members: Vec<usize> = comp.iter().map(|&l| ids[l]).collect();
        let local_adj: Vec<Vec<usize>> = comp
            .iter()
            .map(|&l| {
                adj[l]
                    .iter()
                    .map(|g| comp.binary_search(g).expect("component member"))
                    .collect()
            })
            .collect();
        let mut max_angle: f64 = 0.0;
        let mut tangents = Vec::with_capacity(members.len());
        for (local, &pid) in members.iter().enumerate() {
            let nb_ids: Vec<usize> = local_adj[local].iter().map(|&l| members[l]).collect();
            let tangent = fit_tangent(points, pid, &nb_ids);
            let kernel = &points[pid].stratum.as_ref().unwrap().kernel;
            max_angle = max_angle.max(principal_angle(&tangent, kernel));
            tangents.push(tangent);
        }
        let u_min = members
            .iter()
            .map(|&i| points[i].u_value)
            .fold(f64::INFINITY, f64::min);
        let u_max = members
            .iter()
            .map(|&i| points[i].u_value)
            .fold(f64::NEG_INFINITY, f64::max);
        let closed = local_adj.iter().all(|nbs| nbs.len() >= 2);
        out.push(ManifoldComponent {
            k,
            members,
            adjacency: local_adj,
            closed,
            max_tangency_deg: max_angle.to_degrees(),
            u_spread: u_max - u_min,
            tangents,
        });
    }
    // deterministic ordering: by first member index
    out.sort_by_key(|c| c.members[0]);
    Ok(out)
}

/// Largest ratio of Hessian variation to tangent-plane variation over pairs
/// within five neighbor hops of a fitted component. The corresponding bound
/// controls Hessian continuity along the singular set.
pub fn hessian_tangent_lipschitz(
    points: &[CriticalPoint],
    component: &ManifoldComponent,
) -> Result<LipschitzOutcome> {
    if component.k == 0 {
        return Err(Error::InvalidParameter(
            "lipschitz ratio needs a k >= 1 component".into(),
        ));
    }
    if component.members.len() < 8 {
        return Err(Error::InsufficientData {
            needed: 8,
            got: component.members.len(),
        });
    }
    let n = component.members.len();
    // hop-limited BFS from each member
    let mut best: Option<f64> = None;
    let mut any_pair = false;
    for start in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            if dist[v] == 5 {
                continue;
            }
            for &w in &component.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for other in start + 1..n {
            if dist[other] == usize::MAX {
                continue;
            }
            any_pair = true;
            let pa = SymmetricMatrix::projector(3, &component.tangents[start]);
            let pb = SymmetricMatrix::projector(3, &component.tangents[other]);
            let den = pa.sub(&pb).operator_norm();
            if den < 1e-6 {
                continue;
            }
            let num = points[component.members[start]]
                .hess
                .sub(&points[component.members[other]].hess)
                .frobenius_norm();
            let ratio = num / den;
            if best.map(|b| ratio > b).unwrap_or(true) {
                best = Some(ratio);
            }
        }
    }
    if !any_pair {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(match best {
        Some(r) => LipschitzOutcome::MaxRatio(r),
        None => LipschitzOutcome::NoVariation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyze::critical::classify_stratum;

    /// Ring of radius 1 in the z = 0 plane with exact cylinder Hessians.
    fn synthetic_ring(count: usize, gap_from: Option<usize>) -> Vec<CriticalPoint> {
        let mut pts = Vec::new();
        for j in 0..count {
            if let Some(g) = gap_from {
                // carve two antipodal gaps to split the ring
                if j % (count / 2) >= g {
                    continue;
                }
            }
            let theta = std::f64::consts::TAU * j as f64 / count as f64;
            let (s, c) = theta.sin_cos();
            let tangent = [-s, c, 0.0];
            let hess = SymmetricMatrix::from_fn(3, |a, b| {
                let id = if a == b { 1.0 } else { 0.0 };
                -(id - tangent[a] * tangent[b])
            });
            let stratum = classify_stratum(&hess, 2, 0.1).unwrap();
            pts.push(CriticalPoint {
                position: [c, s, 0.0],
                u_value: 0.5,
                hess,
                grad_norm: 0.0,
                stratum,
            });
        }
        pts
    }

    #[test]
    fn ring_fits_as_one_closed_component() {
        let pts = synthetic_ring(64, None);
        // spacing 2 pi / 64 ~ 0.098; choose h so 3h comfortably links neighbors
        let comps = fit_singular_manifold(&pts, 0.05).unwrap();
        assert_eq!(comps.len(), 1);
        let c = &comps[0];
        assert_eq!(c.k, 1);
        assert!(c.closed);
        assert_eq!(c.members.len(), 64);
        assert!(c.max_tangency_deg.to_radians() <= 1e-6, "angle {}", c.max_tangency_deg);
        assert!(c.u_spread.abs() < 1e-15);
    }

    #[test]
    fn gapped_arcs_split_and_open() {
        let pts = synthetic_ring(64, Some(22));
        let comps = fit_singular_manifold(&pts, 0.05).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| !c.closed));
    }

    #[test]
    fn mixed_strata_rejected() {
        let mut pts = synthetic_ring(8, None);
        // drop a k=0 point next to a ring member
        let hess = SymmetricMatrix::from_diagonal(&[-0.5, -0.5, -0.5]);
        let stratum = classify_stratum(&hess, 2, 0.1).unwrap();
        pts.push(CriticalPoint {
            position: [1.01, 0.0, 0.0],
            u_value: 0.5,
            hess,
            grad_norm: 0.0,
            stratum,
        });
        // ring spacing ~0.78 here, so use a large h to connect everything
        assert!(matches!(
            fit_singular_manifold(&pts, 0.3),
            Err(Error::MixedStratum(_))
        ));
    }

    #[test]
    fn ring_lipschitz_ratio_is_sqrt2() {
        let pts = synthetic_ring(64, None);
        let comps = fit_singular_manifold(&pts, 0.05).unwrap();
        match hessian_tangent_lipschitz(&pts, &comps[0]).unwrap() {
            LipschitzOutcome::MaxRatio(r) => {
                assert!(r <= 2.0, "ratio {r}");
                assert!((r - std::f64::consts::SQRT_2).abs() < 0.05, "ratio {r}");
            }
            LipschitzOutcome::NoVariation => panic!("ring tangents vary"),
        }
    }

    #[test]
    fn collinear_points_have_no_variation() {
        // straight string of cylinder points sharing one axis
        let hess = SymmetricMatrix::from_diagonal(&[0.0, -1.0, -1.0]);
        let stratum = classify_stratum(&hess, 2, 0.1).unwrap();
        let pts: Vec<CriticalPoint> = (0..10)
            .map(|i| CriticalPoint {
                position: [0.1 * i as f64, 0.0, 0.0],
                u_value: 0.25,
                hess: hess.clone(),
                grad_norm: 0.0,
                stratum: stratum.clone(),
            })
            .collect();
        let comps = fit_singular_manifold(&pts, 0.05).unwrap();
        assert_eq!(comps.len(), 1);
        assert!(!comps[0].closed, "endpoints have a single neighbor");
        assert_eq!(
            hessian_tangent_lipschitz(&pts, &comps[0]).unwrap(),
            LipschitzOutcome::NoVariation
        );
    }

    #[test]
    fn too_few_points_rejected() {
        let pts = synthetic_ring(6, None);
        let comps = fit_singular_manifold(&pts, 0.2).unwrap();
        assert!(matches!(
            hessian_tangent_lipschitz(&pts, &comps[0]),
            Err(Error::InsufficientData { .. })
        ));
    }
}
