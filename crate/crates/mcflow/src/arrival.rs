//! The arrival-time field and its derivative probes.
//!
//! `u` is defined on the nodes swept by the front (the mask); the extinction
//! time is its maximum. Where the arrival time solves the stationary
//! level-set equation classically, the residual
//! `1 + lap u - (grad u, Hess u grad u)/|grad u|^2` vanishes; it is left
//! undefined near critical points where the equation degenerates.
//!
//! Axisymmetric fields represent rotationally symmetric data in three-space.
//! All "ambient" accessors below evaluate in that three-dimensional sense:
//! the Laplacian picks up (d_rho u)/rho, Hessians gain an azimuthal
//! eigenvalue u_rho/rho, and sample positions are genuine 3-vectors that get
//! folded into the (x, rho) half-plane.

use crate::error::{Error, Result};
use crate::field::{FieldLabel, GridSpec, Idx, NodeField, ScalarField};
use crate::ops;
use crate::symmetric::SymmetricMatrix;

pub const DEFAULT_GRAD_FLOOR: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct ArrivalField {
    pub spec: GridSpec,
    /// Arrival times; NaN outside the mask.
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    /// Set when the sweep hit its time cap with positive nodes remaining.
    pub partial: bool,
}

impl NodeField for ArrivalField {
    fn grid(&self) -> &GridSpec {
        &self.spec
    }
    fn node(&self, idx: Idx) -> Option<f64> {
        let lin = self.spec.linear(idx);
        self.mask[lin].then(|| self.values[lin])
    }
}

/// First-passage time from a sign change: linear interpolation between the
/// last positive sample and the first non-positive one.
pub fn crossing_time(v_prev: f64, v_next: f64, t_prev: f64, t_next: f64) -> Result<f64> {
    if !(v_prev > 0.0 && v_next <= 0.0 && t_prev < t_next) {
        return Err(Error::InvalidCrossing {
            v_prev,
            v_next,
            t_prev,
            t_next,
        });
    }
    Ok(t_prev + (t_next - t_prev) * v_prev / (v_prev - v_next))
}

impl ArrivalField {
    pub fn new(spec: GridSpec, values: Vec<f64>, partial: bool) -> Result<Self> {
        if values.len() != spec.n_nodes() {
            return Err(Error::InvalidParameter(
                "arrival values do not match grid size".into(),
            ));
        }
        let mask = values.iter().map(|v| v.is_finite()).collect();
        Ok(Self {
            spec,
            values,
            mask,
            partial,
        })
    }

    /// Inject an analytic arrival time; nodes where the oracle is undefined
    /// are left out of the mask. Used to obtain stencil-precision fixtures.
    pub fn from_oracle(spec: GridSpec, oracle: impl Fn(&[f64; 3]) -> Option<f64>) -> Self {
        let values: Vec<f64> = (0..spec.n_nodes())
            .map(|lin| {
                oracle(&spec.position(spec.unravel(lin))).unwrap_or(f64::NAN)
            })
            .collect();
        let mask = values.iter().map(|v| v.is_finite()).collect();
        Self {
            spec,
            values,
            mask,
            partial: false,
        }
    }

    pub fn is_masked(&self, idx: Idx) -> bool {
        self.mask[self.spec.linear(idx)]
    }

    pub fn at(&self, idx: Idx) -> Option<f64> {
        self.node(idx)
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Ambient dimension: axisymmetric half-plane data stands for R^3.
    pub fn ambient_dim(&self) -> usize {
        if self.spec.axisymmetric {
            3
        } else {
            self.spec.dim
        }
    }

    /// Dimension n of the evolving hypersurface.
    pub fn surface_dim(&self) -> usize {
        self.ambient_dim() - 1
    }

    /// Full second-order stencil available and entirely masked.
    pub fn stencil_ok(&self, idx: Idx) -> bool {
        if !self.spec.has_stencil(idx) {
            return false;
        }
        let mut steps = [[0isize; 3]; 27];
        let mut count = 0;
        let dim = self.spec.dim;
        let reach: &[isize] = &[-1, 0, 1];
        for &dx in reach {
            for &dy in reach {
                if dim == 2 {
                    steps[count] = [dx, dy, 0];
                    count += 1;
                } else {
                    for &dz in reach {
                        steps[count] = [dx, dy, dz];
                        count += 1;
                    }
                }
            }
        }
        steps[..count].iter().all(|s| {
            let mut cur = Some(idx);
            for a in 0..dim {
                cur = cur.and_then(|c| self.spec.offset(c, a, s[a]));
            }
            cur.map(|c| self.is_masked(c)).unwrap_or(false)
        })
    }

    /// Extinction time: the maximum of u with the first attaining node in
    /// row-major order.
    pub fn extinction_time(&self) -> Result<(f64, Idx)> {
        if self.partial {
            return Err(Error::PartialField);
        }
        let mut best: Option<(f64, usize)> = None;
        for (lin, (&v, &m)) in self.values.iter().zip(&self.mask).enumerate() {
            if m && best.map(|(bv, _)| v > bv).unwrap_or(true) {
                best = Some((v, lin));
            }
        }
        let (t, lin) = best.ok_or(Error::InvalidParameter("empty mask".into()))?;
        Ok((t, self.spec.unravel(lin)))
    }

    /// Largest |u(a) - u(b)|/h over face-adjacent masked pairs: the computable
    /// stand-in for the Lipschitz constant. Reported, not asserted.
    pub fn lipschitz_constant(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in self.spec.indexes() {
            let Some(v) = self.node(idx) else { continue };
            for a in 0..self.spec.dim {
                if let Some(w) = self.neighbor(idx, a, 1) {
                    worst = worst.max((v - w).abs() / self.spec.spacing);
                }
            }
        }
        worst
    }

    pub fn node_gradient(&self, idx: Idx) -> Result<[f64; 3]> {
        ops::gradient_at(self, idx)
    }

    pub fn node_hessian(&self, idx: Idx) -> Result<SymmetricMatrix> {
        ops::hessian_at(self, idx)
    }

    fn rho_of(&self, idx: Idx) -> f64 {
        self.spec.position(idx)[1]
    }

    /// Residual of the stationary arrival-time equation at a node, in the
    /// ambient sense. Degenerate (error) below the gradient floor.
    pub fn residual(&self, idx: Idx, grad_floor: f64) -> Result<f64> {
        let g = self.node_gradient(idx)?;
        let h = self.node_hessian(idx)?;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let gn = g2.sqrt();
        if gn < grad_floor {
            return Err(Error::NearCritical {
                grad: gn,
                floor: grad_floor,
            });
        }
        let mut lap = h.trace();
        if self.spec.axisymmetric {
            if idx[1] == 0 {
                lap += h.get(1, 1);
            } else {
                lap += g[1] / self.rho_of(idx);
            }
        }
        Ok(1.0 + lap - h.quadratic_form(&g) / g2)
    }

    /// Residuals over all stencil-complete masked nodes above the floor.
    pub fn residual_map(&self, grad_floor: f64) -> Vec<(Idx, f64)> {
        let mut out = Vec::new();
        for idx in self.spec.indexes() {
            if !self.stencil_ok(idx) {
                continue;
            }
            if let Ok(r) = self.residual(idx, grad_floor) {
                out.push((idx, r));
            }
        }
        out
    }

    // ---- position-level evaluation ------------------------------------

    /// Fold an ambient position into in-plane coordinates plus the azimuth.
    fn to_inplane(&self, p: &[f64; 3]) -> ([f64; 3], f64) {
        if self.spec.axisymmetric {
            let rho = (p[1] * p[1] + p[2] * p[2]).sqrt();
            let theta = p[2].atan2(p[1]);
            ([p[0], rho, 0.0], theta)
        } else {
            (*p, 0.0)
        }
    }

    /// Multilinear interpolation of a node quantity at an in-plane position.
    /// Every participating corner must evaluate.
    fn interp<Q: Fn(Idx) -> Result<f64>>(&self, p: &[f64; 3], q: Q) -> Result<f64> {
        let spec = &self.spec;
        let dim = spec.dim;
        let mut base = [0usize; 3];
        let mut w = [0.0f64; 3];
        for a in 0..dim {
            let t = (p[a] - spec.origin[a]) / spec.spacing;
            if t < -1e-9 || t > (spec.counts[a] - 1) as f64 + 1e-9 {
                return Err(Error::OutOfStencil(base));
            }
            let i = (t.floor().max(0.0) as usize).min(spec.counts[a] - 2);
            base[a] = i;
            w[a] = (t - i as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        let corners = 1usize << dim;
        for c in 0..corners {
            let mut idx = base;
            let mut weight = 1.0;
            for a in 0..dim {
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
            acc += weight * q(idx)?;
        }
        Ok(acc)
    }

    /// Arrival time at an ambient position.
    pub fn value_at(&self, p: &[f64; 3]) -> Result<f64> {
        let (q, _) = self.to_inplane(p);
        self.interp(&q, |idx| self.node(idx).ok_or(Error::OutOfStencil(idx)))
    }

    /// Whether a position interpolates entirely inside the mask.
    pub fn position_masked(&self, p: &[f64; 3]) -> bool {
        self.value_at(p).is_ok()
    }

    /// Ambient gradient at a position (axisymmetric fields rotate the
    /// in-plane gradient to the sample's azimuth; the azimuthal component is
    /// zero by symmetry).
    pub fn gradient_at_pos(&self, p: &[f64; 3]) -> Result<[f64; 3]> {
        let (q, theta) = self.to_inplane(p);
        let gx = self.interp(&q, |i| self.node_gradient(i).map(|g| g[0]))?;
        let gy = self.interp(&q, |i| self.node_gradient(i).map(|g| g[1]))?;
        if self.spec.axisymmetric {
            let (s, c) = theta.sin_cos();
            Ok([gx, gy * c, gy * s])
        } else if self.spec.dim == 2 {
            Ok([gx, gy, 0.0])
        } else {
            let gz = self.interp(&q, |i| self.node_gradient(i).map(|g| g[2]))?;
            Ok([gx, gy, gz])
        }
    }

    /// Ambient Hessian at a position. For axisymmetric fields this is the
    /// in-plane block plus the azimuthal eigenvalue u_rho/rho (u_rhorho on
    /// the axis), rotated to the sample's azimuth.
    pub fn hessian_at_pos(&self, p: &[f64; 3]) -> Result<SymmetricMatrix> {
        let (q, theta) = self.to_inplane(p);
        if !self.spec.axisymmetric {
            let dim = self.spec.dim;
            let mut m = SymmetricMatrix::zeros(dim);
            for i in 0..dim {
                for j in i..dim {
                    let v = self.interp(&q, |idx| self.node_hessian(idx).map(|h| h.get(i, j)))?;
                    m.set(i, j, v);
                }
            }
            return Ok(m);
        }
        let hxx = self.interp(&q, |i| self.node_hessian(i).map(|h| h.get(0, 0)))?;
        let hxr = self.interp(&q, |i| self.node_hessian(i).map(|h| h.get(0, 1)))?;
        let hrr = self.interp(&q, |i| self.node_hessian(i).map(|h| h.get(1, 1)))?;
        let rho = q[1];
        // u_rho vanishes on the axis, so the azimuthal curvature u_rho/rho
        // tends to u_rhorho there (and must equal it: the field is isotropic
        // transverse to the axis)
        let azim = if rho < 0.5 * self.spec.spacing {
            hrr
        } else {
            self.interp(&q, |i| self.node_gradient(i).map(|g| g[1]))? / rho
        };
        let mut frame = SymmetricMatrix::zeros(3);
        frame.set(0, 0, hxx);
        frame.set(0, 1, hxr);
        frame.set(1, 1, hrr);
        frame.set(2, 2, azim);
        Ok(frame.rotated_about_x(theta))
    }

    /// Unit normal n = grad u / |grad u| and |grad u| at a position.
    pub fn normal_at_pos(&self, p: &[f64; 3]) -> Result<([f64; 3], f64)> {
        let g = self.gradient_at_pos(p)?;
        let gn = (g.iter().map(|v| v * v).sum::<f64>()).sqrt();
        if gn == 0.0 {
            return Err(Error::NearCritical {
                grad: 0.0,
                floor: f64::MIN_POSITIVE,
            });
        }
        Ok(([g[0] / gn, g[1] / gn, g[2] / gn], gn))
    }

    fn node_normal(&self, idx: Idx) -> Result<[f64; 3]> {
        let g = self.node_gradient(idx)?;
        let gn = (g.iter().map(|v| v * v).sum::<f64>()).sqrt();
        if gn < 1e-14 {
            return Err(Error::NearCritical {
                grad: gn,
                floor: 1e-14,
            });
        }
        Ok([g[0] / gn, g[1] / gn, g[2] / gn])
    }

    fn node_normal_jacobian_inplane(&self, idx: Idx) -> Result<[[f64; 3]; 3]> {
        let spec = &self.spec;
        let two_h = 2.0 * spec.spacing;
        let mut j = [[0.0; 3]; 3];
        for col in 0..spec.dim {
            let plus = spec.offset(idx, col, 1).ok_or(Error::OutOfStencil(idx))?;
            let minus = spec.offset(idx, col, -1).ok_or(Error::OutOfStencil(idx))?;
            let np = self.node_normal(plus)?;
            let nm = self.node_normal(minus)?;
            for row in 0..spec.dim {
                j[row][col] = (np[row] - nm[row]) / two_h;
            }
        }
        Ok(j)
    }

    /// Ambient Jacobian of the unit normal field at a position; feeds the
    /// level-set shape operator.
    pub fn normal_jacobian_at_pos(&self, p: &[f64; 3]) -> Result<[[f64; 3]; 3]> {
        let (q, theta) = self.to_inplane(p);
        let dim = self.spec.dim;
        let mut j = [[0.0; 3]; 3];
        for row in 0..dim {
            for col in 0..dim {
                j[row][col] = self.interp(&q, |i| {
                    self.node_normal_jacobian_inplane(i).map(|m| m[row][col])
                })?;
            }
        }
        if !self.spec.axisymmetric {
            return Ok(j);
        }
        // azimuthal diagonal entry n_rho / rho, regularized near the axis
        let rho_eval = q[1].max(0.5 * self.spec.spacing);
        let probe = [q[0], rho_eval, 0.0];
        let n_r = self.interp(&probe, |i| self.node_normal(i).map(|n| n[1]))?;
        let azim = n_r / rho_eval;
        // rotate the frame tensor diag(J2, azim) about the x axis
        let (s, c) = theta.sin_cos();
        let r = [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]];
        let mut frame = [[0.0; 3]; 3];
        for row in 0..2 {
            for col in 0..2 {
                frame[row][col] = j[row][col];
            }
        }
        frame[2][2] = azim;
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                let mut acc = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        acc += r[i][a] * frame[a][b] * r[k][b];
                    }
                }
                out[i][k] = acc;
            }
        }
        Ok(out)
    }

    /// Ambient gradient of the speed field |grad u| at a position.
    pub fn gradnorm_gradient_at_pos(&self, p: &[f64; 3]) -> Result<[f64; 3]> {
        let (q, theta) = self.to_inplane(p);
        let spec = &self.spec;
        let two_h = 2.0 * spec.spacing;
        let gradnorm = |i: Idx| -> Result<f64> {
            let g = self.node_gradient(i)?;
            Ok((g.iter().map(|v| v * v).sum::<f64>()).sqrt())
        };
        let mut d = [0.0; 3];
        for a in 0..spec.dim {
            d[a] = self.interp(&q, |i| {
                let plus = spec.offset(i, a, 1).ok_or(Error::OutOfStencil(i))?;
                let minus = spec.offset(i, a, -1).ok_or(Error::OutOfStencil(i))?;
                Ok((gradnorm(plus)? - gradnorm(minus)?) / two_h)
            })?;
        }
        if self.spec.axisymmetric {
            let (s, c) = theta.sin_cos();
            Ok([d[0], d[1] * c, d[1] * s])
        } else {
            Ok(d)
        }
    }

    /// Convert back to a plain scalar field (masked-out nodes become NaN).
    pub fn to_scalar(&self) -> ScalarField {
        ScalarField {
            spec: self.spec.clone(),
            values: self.values.clone(),
            label: FieldLabel::Arrival,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use crate::scenarios;
    use proptest::prelude::*;

    #[test]
    fn crossing_time_interpolates() {
        assert!((crossing_time(0.3, -0.1, 1.0, 1.1).unwrap() - 1.075).abs() < 1e-15);
        assert!((crossing_time(0.5, 0.0, 2.0, 2.5).unwrap() - 2.5).abs() < 1e-15);
        assert!(crossing_time(0.1, 0.1, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn crossing_time_stays_bracketed(
            v_prev in 1e-9f64..1e3,
            v_next in -1e3f64..0.0,
            t_prev in -10.0f64..10.0,
            dt in 1e-9f64..10.0,
        ) {
            let t = crossing_time(v_prev, v_next, t_prev, t_prev + dt).unwrap();
            prop_assert!(t >= t_prev && t <= t_prev + dt);
        }
    }

    fn circle_field(n: usize) -> ArrivalField {
        let spec = GridSpec::new(2, &[n, n], &[-1.5, -1.5], 3.0 / (n - 1) as f64, false).unwrap();
        ArrivalField::from_oracle(spec, |p| scenarios::exact_arrival_sphere(1.0, 1, p).ok())
    }

    #[test]
    fn residual_vanishes_on_exact_circle_field() {
        let u = circle_field(129);
        // node at |x| ~ 0.5
        for idx in u.spec.indexes() {
            if !u.stencil_ok(idx) {
                continue;
            }
            let p = u.spec.position(idx);
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if (r - 0.5).abs() > 0.1 {
                continue;
            }
            let res = u.residual(idx, 0.05).unwrap();
            assert!(res.abs() <= 1e-10, "residual {res:.2e} at r={r:.3}");
        }
    }

    #[test]
    fn residual_vanishes_on_exact_cylinder_field() {
        // 3D cylinder u = (1 - (y^2+z^2))/2, the n=2, k=1 model
        let n = 33;
        let spec = GridSpec::new(3, &[n, n, n], &[-0.8; 3], 1.6 / (n - 1) as f64, false).unwrap();
        let u = ArrivalField::from_oracle(spec, |p| {
            let rho = (p[1] * p[1] + p[2] * p[2]).sqrt();
            scenarios::exact_arrival_cylinder(1.0, 2, 1, rho).ok()
        });
        let mut checked = 0;
        for idx in u.spec.indexes() {
            if !u.stencil_ok(idx) {
                continue;
            }
            let p = u.spec.position(idx);
            let rho = (p[1] * p[1] + p[2] * p[2]).sqrt();
            if (rho - 0.5).abs() > 0.05 {
                continue;
            }
            let res = u.residual(idx, 0.05).unwrap();
            assert!(res.abs() <= 1e-10, "residual {res:.2e}");
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn residual_degenerates_at_center() {
        let u = circle_field(65);
        // center node has |grad u| = 0
        assert!(matches!(
            u.residual([32, 32, 0], 0.05),
            Err(Error::NearCritical { .. })
        ));
    }

    #[test]
    fn extinction_of_exact_field() {
        let u = circle_field(65);
        let (t, idx) = u.extinction_time().unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        assert_eq!(idx, [32, 32, 0]);
    }

    #[test]
    fn partial_field_rejected() {
        let mut u = circle_field(65);
        u.partial = true;
        assert!(matches!(u.extinction_time(), Err(Error::PartialField)));
    }

    #[test]
    fn axisymmetric_ambient_hessian_of_sphere() {
        // u = (1 - x^2 - rho^2)/4: ambient Hessian is -I/2 everywhere,
        // including the azimuthal direction
        let n = 65;
        let h = 3.0 / (n - 1) as f64;
        let counts_rho = (1.5 / h).ceil() as usize + 1;
        let spec = GridSpec::new(2, &[n, counts_rho], &[-1.5, 0.0], h, true).unwrap();
        let u = ArrivalField::from_oracle(spec, |p| scenarios::exact_arrival_sphere(1.0, 2, p).ok());
        for p in [
            [0.3, 0.4, 0.1],
            [-0.2, 0.0, 0.5],
            [0.0, 0.6, 0.0],
            [0.5, 0.0, 0.0],
        ] {
            let h3 = u.hessian_at_pos(&p).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { -0.5 } else { 0.0 };
                    assert!(
                        (h3.get(i, j) - want).abs() < 1e-9,
                        "H[{i}{j}] = {} at {p:?}",
                        h3.get(i, j)
                    );
                }
            }
        }
    }

    #[test]
    fn ambient_gradient_rotates_with_azimuth() {
        let n = 65;
        let h = 3.0 / (n - 1) as f64;
        let counts_rho = (1.5 / h).ceil() as usize + 1;
        let spec = GridSpec::new(2, &[n, counts_rho], &[-1.5, 0.0], h, true).unwrap();
        let u = ArrivalField::from_oracle(spec, |p| scenarios::exact_arrival_sphere(1.0, 2, p).ok());
        // grad u = -x/2 in ambient coordinates
        let p = [0.2, 0.3, 0.4];
        let g = u.gradient_at_pos(&p).unwrap();
        for a in 0..3 {
            assert!((g[a] + 0.5 * p[a]).abs() < 1e-9);
        }
    }

    #[test]
    fn lipschitz_constant_of_circle_field() {
        let u = circle_field(129);
        let lip = u.lipschitz_constant();
        // |grad u| = |x| <= 1 inside the disk
        assert!(lip <= 1.05 && lip > 0.8, "lip = {lip}");
    }
}
