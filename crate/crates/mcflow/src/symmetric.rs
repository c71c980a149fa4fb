//! Small symmetric matrices (order 1..=3) with a sorted eigen-decomposition.
//!
//! These hold Hessians of the arrival time and the projectors derived from
//! them, so the API is geared toward eigenstructure queries rather than
//! general linear algebra. The decomposition is a cyclic Jacobi iteration:
//! for these orders it converges in a handful of sweeps and keeps the
//! reconstruction near the rounding floor.

/// Dense symmetric matrix of order 1, 2 or 3. Entries are stored as the full
/// square for simple indexing; symmetry is maintained by the constructors.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    // row-major 3x3 backing store, only the leading `order` block is used
    m: [f64; 9],
}

/// Eigen-decomposition with eigenvalues sorted ascending and matching
/// orthonormal eigenvectors (each padded to 3 components).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<[f64; 3]>,
}

impl SymmetricMatrix {
    pub fn zeros(order: usize) -> Self {
        assert!((1..=3).contains(&order), "order must be 1..=3");
        Self { order, m: [0.0; 9] }
    }

    pub fn identity(order: usize) -> Self {
        let mut s = Self::zeros(order);
        for i in 0..order {
            s.m[i * 3 + i] = 1.0;
        }
        s
    }

    /// Build from a callback on (row, col); the strict upper triangle is
    /// mirrored so the result is symmetric regardless of the callback.
    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut s = Self::zeros(order);
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                s.m[i * 3 + j] = v;
                s.m[j * 3 + i] = v;
            }
        }
        s
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut s = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            s.m[i * 3 + i] = v;
        }
        s
    }

    /// Rank-deficient projector onto the span of the given orthonormal
    /// vectors.
    pub fn projector(order: usize, span: &[[f64; 3]]) -> Self {
        Self::from_fn(order, |i, j| span.iter().map(|q| q[i] * q[j]).sum())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.order && j < self.order);
        self.m[i * 3 + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.order && j < self.order);
        self.m[i * 3 + j] = v;
        self.m[j * 3 + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_fn(self.order, |i, j| c * self.get(i, j))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order);
        Self::from_fn(self.order, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order);
        Self::from_fn(self.order, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..self.order {
            for j in 0..self.order {
                out[i] += self.get(i, j) * v[j];
            }
        }
        out
    }

    /// v^T A v
    pub fn quadratic_form(&self, v: &[f64; 3]) -> f64 {
        let av = self.apply(v);
        (0..self.order).map(|i| v[i] * av[i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.order {
            for j in 0..self.order {
                s += self.get(i, j) * self.get(i, j);
            }
        }
        s.sqrt()
    }

    /// Operator (spectral) norm; exact for symmetric matrices via the
    /// eigenvalues.
    pub fn operator_norm(&self) -> f64 {
        self.eigen()
            .values
            .iter()
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Eigenvalues ascending with orthonormal eigenvectors.
    pub fn eigen(&self) -> EigenDecomposition {
        let n = self.order;
        if n == 1 {
            return EigenDecomposition {
                values: vec![self.get(0, 0)],
                vectors: vec![[1.0, 0.0, 0.0]],
            };
        }
        let mut a = self.m;
        let mut v = [[0.0f64; 3]; 3];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let pairs_2 = [(0usize, 1usize)];
        let pairs_3 = [(0usize, 1usize), (0, 2), (1, 2)];
        let pairs: &[(usize, usize)] = if n == 2 { &pairs_2 } else { &pairs_3 };
        let scale = self
            .m
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        // rotations below the rounding floor only stir noise into V
        let floor = 1e-17 * scale;
        for _sweep in 0..40 {
            let mut rotated = false;
            for &(p, q) in pairs {
                let apq = a[p * 3 + q];
                if apq.abs() <= floor {
                    continue;
                }
                rotated = true;
                // classic Jacobi rotation choosing the smaller angle
                let theta = (a[q * 3 + q] - a[p * 3 + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * 3 + p];
                    let akq = a[k * 3 + q];
                    a[k * 3 + p] = c * akp - s * akq;
                    a[k * 3 + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * 3 + k];
                    let aqk = a[q * 3 + k];
                    a[p * 3 + k] = c * apk - s * aqk;
                    a[q * 3 + k] = s * apk + c * aqk;
                }
                // keep perfect symmetry against rounding drift
                a[p * 3 + q] = 0.0;
                a[q * 3 + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
            if !rotated {
                break;
            }
        }
        // Rayleigh polish: rotation roundoff accumulates in the diagonal, so
        // re-evaluate each eigenvalue against the original entries
        let mut rayleigh = [0.0f64; 3];
        for (i, r) in rayleigh.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for row in 0..n {
                for col in 0..n {
                    acc += v[row][i] * self.m[row * 3 + col] * v[col][i];
                }
            }
            *r = acc;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| rayleigh[x].total_cmp(&rayleigh[y]));
        let values = order.iter().map(|&i| rayleigh[i]).collect();
        let vectors = order
            .iter()
            .map(|&i| {
                let mut col = [0.0; 3];
                for (r, row) in v.iter().enumerate().take(n) {
                    col[r] = row[i];
                }
                col
            })
            .collect();
        EigenDecomposition { values, vectors }
    }

    /// Rotate a 3x3 matrix about the first axis by `theta`; used to carry
    /// Hessians expressed in an axisymmetric frame around the axis.
    pub fn rotated_about_x(&self, theta: f64) -> Self {
        assert_eq!(self.order, 3);
        let (s, c) = theta.sin_cos();
        // R maps frame coordinates (x, radial, azimuthal) to fixed (x, y, z)
        let r = [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]];
        Self::from_fn(3, |i, j| {
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += r[i][a] * self.get(a, b) * r[j][b];
                }
            }
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diagonal_eigen_sorted() {
        let m = SymmetricMatrix::from_diagonal(&[-1.0, 0.0, -1.0]);
        let e = m.eigen();
        assert_eq!(e.values, vec![-1.0, -1.0, 0.0]);
    }

    #[test]
    fn projector_identity_split() {
        let t = [0.6, 0.8, 0.0];
        let p = SymmetricMatrix::projector(3, &[t]);
        let q = SymmetricMatrix::identity(3).sub(&p);
        // P + Q = I, PQ = 0, P^2 = P
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((p.get(i, j) + q.get(i, j) - id).abs() < 1e-15);
            }
        }
        let pv = p.apply(&q.apply(&[1.0, 2.0, 3.0]));
        assert!(pv.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn rotation_preserves_spectrum() {
        let m = SymmetricMatrix::from_fn(3, |i, j| ((i + 1) * (j + 1)) as f64 * 0.1);
        let r = m.rotated_about_x(0.7);
        let (ev_a, ev_b) = (m.eigen().values, r.eigen().values);
        for (a, b) in ev_a.iter().zip(&ev_b) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_reconstructs_large_entries() {
        // representative matrices with entries of magnitude 1e3 rebuild
        // within 1e-12
        let t = [0.6, 0.0, 0.8];
        let cases = [
            SymmetricMatrix::from_diagonal(&[-1e3, 5e2, 1e3]),
            SymmetricMatrix::from_fn(3, |i, j| {
                -1e3 * (if i == j { 1.0 } else { 0.0 } - t[i] * t[j])
            }),
            SymmetricMatrix::from_fn(3, |i, j| 1e3 / (1.0 + (i + j) as f64)),
        ];
        for m in cases {
            let e = m.eigen();
            let rebuilt = SymmetricMatrix::from_fn(3, |i, j| {
                (0..3)
                    .map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j])
                    .sum()
            });
            let err = m.sub(&rebuilt).frobenius_norm();
            assert!(err <= 1e-12, "reconstruction error {err:.3e}");
        }
    }

    proptest! {
        // reconstruction within 1e-12 plus the f64 rounding floor: a
        // backward-stable solve cannot beat a few ulps of the matrix norm,
        // which crosses 1e-12 for adversarial norms near the 1e3 entry cap
        #[test]
        fn eigen_reconstructs(entries in proptest::collection::vec(-1e3f64..1e3, 6)) {
            let m = SymmetricMatrix::from_fn(3, |i, j| {
                let (i, j) = (i.min(j), i.max(j));
                entries[i * 3 + j - i * (i + 1) / 2]
            });
            let e = m.eigen();
            let rebuilt = SymmetricMatrix::from_fn(3, |i, j| {
                (0..3).map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j]).sum()
            });
            let err = m.sub(&rebuilt).frobenius_norm();
            let bound = 1e-12 + 16.0 * f64::EPSILON * m.frobenius_norm();
            prop_assert!(err <= bound, "reconstruction error {err:.3e} vs {bound:.3e}");
            // orthonormality of the returned eigenvectors
            for a in 0..3 {
                for b in a..3 {
                    let dot: f64 = (0..3).map(|i| e.vectors[a][i] * e.vectors[b][i]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-13);
                }
            }
        }
    }
}
