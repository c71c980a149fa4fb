//! Single-linkage clustering of singular times.

use crate::analyze::critical::CriticalPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TimeCluster {
    /// Mean arrival time of the members.
    pub time: f64,
    /// Indices into the critical-point list, sorted by time.
    pub members: Vec<usize>,
}

/// Chain critical values whose gaps stay within `time_tol`; clusters come
/// back sorted by time.
pub fn cluster_singular_times(
    points: &[CriticalPoint],
    time_tol: f64,
) -> Result<Vec<TimeCluster>> {
    if points.is_empty() {
        return Err(Error::NoCriticalPoints);
    }
    if !(time_tol > 0.0) {
        return Err(Error::InvalidParameter("time_tol must be positive".into()));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].u_value.total_cmp(&points[b].u_value));

    let mut clusters = Vec::new();
    let mut current = vec![order[0]];
    for w in order.windows(2) {
        let gap = points[w[1]].u_value - points[w[0]].u_value;
        if gap > time_tol {
            clusters.push(std::mem::take(&mut current));
        }
        current.push(w[1]);
    }
    clusters.push(current);

    Ok(clusters
        .into_iter()
        .map(|members| {
            let time =
                members.iter().map(|&i| points[i].u_value).sum::<f64>() / members.len() as f64;
            TimeCluster { time, members }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric::SymmetricMatrix;

    fn point_at(u: f64) -> CriticalPoint {
        CriticalPoint {
            position: [0.0; 3],
            u_value: u,
            hess: SymmetricMatrix::zeros(3),
            grad_norm: 0.0,
            stratum: None,
        }
    }

    #[test]
    fn tight_values_form_one_cluster() {
        let pts: Vec<_> = [0.500, 0.501, 0.499].iter().map(|&u| point_at(u)).collect();
        let clusters = cluster_singular_times(&pts, 0.01).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].members.len(), 3);
        assert!((clusters[0].time - 0.5).abs() < 1e-12);
    }

    #[test]
    fn separated_times_split() {
        let pts: Vec<_> = [0.011, 0.012, 0.12, 0.121].iter().map(|&u| point_at(u)).collect();
        let clusters = cluster_singular_times(&pts, 0.02).unwrap();
        assert_eq!(clusters.len(), 2);
        assert!(clusters[0].time < clusters[1].time);
    }

    #[test]
    fn chaining_is_single_linkage() {
        let pts: Vec<_> = [0.1, 0.2, 0.3].iter().map(|&u| point_at(u)).collect();
        let clusters = cluster_singular_times(&pts, 0.15).unwrap();
        assert_eq!(clusters.len(), 1, "adjacent gaps within tol must chain");
    }

    #[test]
    fn empty_list_rejected() {
        assert!(matches!(
            cluster_singular_times(&[], 0.1),
            Err(Error::NoCriticalPoints)
        ));
    }
}
