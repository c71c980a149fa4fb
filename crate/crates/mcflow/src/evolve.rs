//! Explicit time-marching of the level-set flow and first-crossing capture.
//!
//! Forward Euler on the regularized curvature operator, with homogeneous
//! Neumann boundaries realized by copying the nearest interior neighbor.
//! The front never reaches the domain boundary (the sampler enforces a
//! margin), so the copies only feed the far field.
//!
//! Each node's first sign change is interpolated linearly in time and frozen;
//! a node never records a second crossing. The resulting first-passage table
//! is the arrival-time field.

use crate::arrival::{crossing_time, ArrivalField};
use crate::error::{Error, Result};
use crate::field::{FieldLabel, GridSpec, ScalarField};
use crate::ops;

#[derive(Debug, Clone)]
pub struct EvolveParams {
    /// Curvature regularization; resolved to a tenth of the grid spacing
    /// when None. Where |grad v| falls under epsilon the operator turns into
    /// the plain Laplacian, which over-speeds the front near critical points
    /// by (n+1)/n; that bias scales as (epsilon/h)^2 in the recovered
    /// arrival-time Hessian and is resolution-independent at fixed ratio, so
    /// the ratio must stay well under one.
    pub epsilon: Option<f64>,
    pub cfl: f64,
    pub t_max: f64,
    /// Diagnostic snapshot cadence in steps.
    pub record_stride: usize,
    /// 0 disables reinitialization (the default keeps crossings unperturbed).
    pub reinit_stride: usize,
}

impl Default for EvolveParams {
    fn default() -> Self {
        Self {
            epsilon: None,
            cfl: 0.4,
            t_max: 1.0,
            record_stride: 50,
            reinit_stride: 0,
        }
    }
}

impl EvolveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter("cfl must be in (0, 1]".into()));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::InvalidParameter("t_max must be positive".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be >= 1".into()));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return Err(Error::InvalidParameter("epsilon must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn epsilon_for(&self, spec: &GridSpec) -> f64 {
        self.epsilon.unwrap_or(0.1 * spec.spacing)
    }
}

/// Parabolic stability limit: cfl * h^2 / (2 d_eff), with one extra effective
/// dimension in axisymmetric mode for the (d_rho v)/rho term.
pub fn stable_dt(spec: &GridSpec, params: &EvolveParams) -> f64 {
    let d_eff = spec.dim + usize::from(spec.axisymmetric);
    params.cfl * spec.spacing * spec.spacing / (2.0 * d_eff as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub t: f64,
    pub positive_nodes: usize,
    pub max_v: f64,
    pub min_v: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DiagnosticsLog {
    pub rows: Vec<DiagnosticsRow>,
}

/// Per-node first-crossing table. `record` keeps only the first sign change.
#[derive(Debug, Clone)]
pub struct CrossingRecorder {
    crossing: Vec<f64>, // NaN = not yet crossed
}

impl CrossingRecorder {
    pub fn new(n_nodes: usize) -> Self {
        Self {
            crossing: vec![f64::NAN; n_nodes],
        }
    }

    /// Record a crossing for a node unless one is already present.
    /// Returns whether the value was stored.
    pub fn record(&mut self, lin: usize, t: f64) -> bool {
        if self.crossing[lin].is_nan() {
            self.crossing[lin] = t;
            true
        } else {
            false
        }
    }

    pub fn crossed(&self, lin: usize) -> bool {
        !self.crossing[lin].is_nan()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.crossing
    }
}

pub struct EvolveOutput {
    pub field: ArrivalField,
    pub diagnostics: DiagnosticsLog,
    pub steps: usize,
}

/// One explicit Euler step; the public, allocation-per-call variant.
pub fn step(field: &ScalarField, dt: f64, params: &EvolveParams) -> Result<ScalarField> {
    let limit = stable_dt(&field.spec, params);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::UnstableTimestep { dt, limit });
    }
    let eps = params.epsilon_for(&field.spec);
    let mut dst = field.values.clone();
    step_into(&field.spec, &field.values, &mut dst, dt, eps, 0)?;
    ScalarField::new(field.spec.clone(), dst, field.label)
}

/// Interior update plus boundary copy. Returns the number of positive nodes
/// after the step.
fn step_into(
    spec: &GridSpec,
    src: &[f64],
    dst: &mut [f64],
    dt: f64,
    eps: f64,
    step_no: usize,
) -> Result<usize> {
    let mut positives = 0usize;
    if spec.dim == 2 {
        positives += step_2d(spec, src, dst, dt, eps, step_no)?;
    } else {
        positives += step_generic(spec, src, dst, dt, eps, step_no)?;
    }
    positives += copy_boundaries(spec, dst);
    Ok(positives)
}

fn step_2d(
    spec: &GridSpec,
    src: &[f64],
    dst: &mut [f64],
    dt: f64,
    eps: f64,
    step_no: usize,
) -> Result<usize> {
    let (n0, n1) = (spec.counts[0], spec.counts[1]);
    let h = spec.spacing;
    let (inv_2h, inv_h2, inv_4h2) = (0.5 / h, 1.0 / (h * h), 0.25 / (h * h));
    let eps2 = eps * eps;
    let axisym = spec.axisymmetric;
    let j_lo = if axisym { 0 } else { 1 };
    let mut positives = 0usize;
    for i in 1..n0 - 1 {
        let row = i * n1;
        for j in j_lo..n1 - 1 {
            let s = row + j;
            let vc = src[s];
            let vxp = src[s + n1];
            let vxm = src[s - n1];
            let vyp = src[s + 1];
            // ghost mirror across the axis row in axisymmetric mode
            let (vym, vpm, vmm) = if j == 0 {
                (src[s + 1], src[s + n1 + 1], src[s - n1 + 1])
            } else {
                (src[s - 1], src[s + n1 - 1], src[s - n1 - 1])
            };
            let vpp = src[s + n1 + 1];
            let vmp = src[s - n1 + 1];

            let gx = (vxp - vxm) * inv_2h;
            let gy = (vyp - vym) * inv_2h;
            let hxx = (vxp - 2.0 * vc + vxm) * inv_h2;
            let hyy = (vyp - 2.0 * vc + vym) * inv_h2;
            let hxy = (vpp - vpm - vmp + vmm) * inv_4h2;

            let rhs = if axisym && j == 0 {
                // the mirrored gradient hides radial slope on the axis; the
                // one-sided slope keeps the quadratic form on the branch that
                // off-axis continuity selects (see ops::curvature_rhs)
                let radial = (vyp - vc) / h;
                let g2 = gx * gx + radial * radial;
                let q = gx * gx * hxx + radial * radial * hyy;
                hxx + 2.0 * hyy - q / (g2 + eps2)
            } else {
                let g2 = gx * gx + gy * gy;
                let q = gx * gx * hxx + 2.0 * gx * gy * hxy + gy * gy * hyy;
                let mut rhs = hxx + hyy - q / (g2 + eps2);
                if axisym {
                    rhs += gy / (j as f64 * h);
                }
                rhs
            };
            let v_new = vc + dt * rhs;
            if !v_new.is_finite() {
                return Err(Error::NumericalBlowup {
                    step: step_no,
                    index: [i, j, 0],
                });
            }
            dst[s] = v_new;
            if v_new > 0.0 {
                positives += 1;
            }
        }
    }
    Ok(positives)
}

fn step_generic(
    spec: &GridSpec,
    src: &[f64],
    dst: &mut [f64],
    dt: f64,
    eps: f64,
    step_no: usize,
) -> Result<usize> {
    let view = ScalarField {
        spec: spec.clone(),
        values: src.to_vec(),
        label: FieldLabel::LevelSet,
    };
    let mut positives = 0usize;
    for idx in spec.indexes() {
        if !spec.has_stencil(idx) {
            continue;
        }
        let lin = spec.linear(idx);
        let v_new = src[lin] + dt * ops::curvature_rhs(&view, idx, eps)?;
        if !v_new.is_finite() {
            return Err(Error::NumericalBlowup {
                step: step_no,
                index: idx,
            });
        }
        dst[lin] = v_new;
        if v_new > 0.0 {
            positives += 1;
        }
    }
    Ok(positives)
}

/// Homogeneous Neumann: every boundary node copies its nearest evolved
/// neighbor (the axisymmetric axis row is evolved, not copied). Returns the
/// number of positive boundary nodes.
fn copy_boundaries(spec: &GridSpec, dst: &mut [f64]) -> usize {
    let mut positives = 0usize;
    let dim = spec.dim;
    for idx in spec.indexes() {
        let mut interior = true;
        let mut tgt = idx;
        for a in 0..dim {
            let skip_low = spec.axisymmetric && a == 1;
            if idx[a] == 0 && !skip_low {
                tgt[a] = 1;
                interior = false;
            } else if idx[a] == spec.counts[a] - 1 {
                tgt[a] = spec.counts[a] - 2;
                interior = false;
            }
        }
        if !interior {
            let v = dst[spec.linear(tgt)];
            dst[spec.linear(idx)] = v;
            if v > 0.0 {
                positives += 1;
            }
        }
    }
    positives
}

/// A few pseudo-time iterations of sign(v) (1 - |grad v|) smoothing, used to
/// push the field back toward unit slope. Perturbs crossing times, so it is
/// off by default.
fn reinit_pass(spec: &GridSpec, v: &mut Vec<f64>) {
    let h = spec.spacing;
    let d_tau = 0.3 * h;
    let sign: Vec<f64> = v.iter().map(|&x| x / (x * x + h * h).sqrt()).collect();
    for _ in 0..3 {
        let src = v.clone();
        let view = ScalarField {
            spec: spec.clone(),
            values: src,
            label: FieldLabel::LevelSet,
        };
        for idx in spec.indexes() {
            if !spec.has_stencil(idx) {
                continue;
            }
            let lin = spec.linear(idx);
            if let Ok(g) = ops::gradient_at(&view, idx) {
                let gn = (g.iter().map(|x| x * x).sum::<f64>()).sqrt();
                v[lin] += d_tau * sign[lin] * (1.0 - gn);
            }
        }
        copy_boundaries(spec, v);
    }
}

/// March the front until extinction (no positive nodes) or `t_max`, recording
/// per-node first crossings. A capped run comes back flagged partial rather
/// than as an error so the artifacts survive.
pub fn evolve(v0: &ScalarField, params: &EvolveParams) -> Result<EvolveOutput> {
    params.validate()?;
    if v0.label != FieldLabel::LevelSet {
        return Err(Error::InvalidParameter(
            "evolve expects a level-set field".into(),
        ));
    }
    let spec = v0.spec.clone();
    let eps = params.epsilon_for(&spec);
    let dt_nominal = stable_dt(&spec, params);
    let n = spec.n_nodes();

    let initially_positive: Vec<bool> = v0.values.iter().map(|&v| v > 0.0).collect();
    if !initially_positive.iter().any(|&p| p) {
        return Err(Error::InvalidParameter(
            "initial field has no positive region".into(),
        ));
    }

    let mut recorder = CrossingRecorder::new(n);
    let mut cur = v0.values.clone();
    let mut next = v0.values.clone();
    let mut t = 0.0;
    let mut step_no = 0usize;
    let mut diagnostics = DiagnosticsLog::default();
    let mut positives = cur.iter().filter(|&&v| v > 0.0).count();
    push_diag(&mut diagnostics, step_no, t, positives, &cur);

    while positives > 0 && t < params.t_max {
        let dt = dt_nominal.min(params.t_max - t);
        positives = step_into(&spec, &cur, &mut next, dt, eps, step_no)?;
        let t_next = t + dt;
        for lin in 0..n {
            if cur[lin] > 0.0 && next[lin] <= 0.0 {
                recorder.record(lin, crossing_time(cur[lin], next[lin], t, t_next)?);
            }
        }
        std::mem::swap(&mut cur, &mut next);
        t = t_next;
        step_no += 1;
        if params.reinit_stride > 0 && step_no % params.reinit_stride == 0 {
            let before: Vec<f64> = cur.clone();
            reinit_pass(&spec, &mut cur);
            for lin in 0..n {
                if before[lin] > 0.0 && cur[lin] <= 0.0 {
                    recorder.record(lin, t);
                }
            }
            positives = cur.iter().filter(|&&v| v > 0.0).count();
        }
        if step_no % params.record_stride == 0 || positives == 0 {
            push_diag(&mut diagnostics, step_no, t, positives, &cur);
        }
    }

    let partial = positives > 0;
    let crossings = recorder.into_values();
    let values: Vec<f64> = crossings
        .iter()
        .zip(&initially_positive)
        .map(|(&c, &was_pos)| if was_pos && c.is_finite() { c } else { f64::NAN })
        .collect();
    let field = ArrivalField::new(spec, values, partial)?;
    Ok(EvolveOutput {
        field,
        diagnostics,
        steps: step_no,
    })
}

fn push_diag(log: &mut DiagnosticsLog, step: usize, t: f64, positives: usize, v: &[f64]) {
    let (mut max_v, mut min_v) = (f64::NEG_INFINITY, f64::INFINITY);
    for &x in v {
        max_v = max_v.max(x);
        min_v = min_v.min(x);
    }
    log.rows.push(DiagnosticsRow {
        step,
        t,
        positive_nodes: positives,
        max_v,
        min_v,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample_implicit, GridSpec};
    use crate::scenarios;

    fn circle_setup(n: usize) -> ScalarField {
        let spec = GridSpec::new(2, &[n, n], &[-1.5, -1.5], 3.0 / (n - 1) as f64, false).unwrap();
        sample_implicit(&scenarios::make_circle(1.0), &spec).unwrap()
    }

    fn sphere_setup(n: usize) -> ScalarField {
        let h = 3.0 / (n - 1) as f64;
        let counts_rho = (1.5 / h).ceil() as usize + 1;
        let spec = GridSpec::new(2, &[n, counts_rho], &[-1.5, 0.0], h, true).unwrap();
        sample_implicit(&scenarios::make_sphere(1.0), &spec).unwrap()
    }

    #[test]
    fn stable_dt_formula() {
        let p = EvolveParams {
            cfl: 0.5,
            ..Default::default()
        };
        let flat = GridSpec::new(2, &[16, 16], &[0.0, 0.0], 0.01, false).unwrap();
        assert!((stable_dt(&flat, &p) - 1.25e-5).abs() < 1e-18);
        let axi = GridSpec::new(2, &[16, 16], &[0.0, 0.0], 0.01, true).unwrap();
        assert!((stable_dt(&axi, &p) - 0.5 * 1e-4 / 6.0).abs() < 1e-18);
        let p1 = EvolveParams {
            cfl: 1.0,
            ..Default::default()
        };
        let cube = GridSpec::new(3, &[8, 8, 8], &[0.0; 3], 0.1, false).unwrap();
        assert!((stable_dt(&cube, &p1) - 0.01 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn step_rejects_unstable_dt() {
        let f = circle_setup(33);
        let p = EvolveParams::default();
        let dt = 2.0 * stable_dt(&f.spec, &p);
        assert!(matches!(
            step(&f, dt, &p),
            Err(Error::UnstableTimestep { .. })
        ));
    }

    #[test]
    fn affine_field_unchanged_in_interior() {
        let spec = GridSpec::new(2, &[17, 17], &[-1.0, -1.0], 0.125, false).unwrap();
        let f = ScalarField::from_fn(spec, FieldLabel::LevelSet, |p| 0.4 * p[0] - 0.1 * p[1]);
        let p = EvolveParams::default();
        let g = step(&f, stable_dt(&f.spec, &p), &p).unwrap();
        for idx in f.spec.indexes() {
            if f.spec.has_stencil(idx) {
                assert!((g.at(idx) - f.at(idx)).abs() < 1e-14);
            }
        }
        // boundary copies its interior neighbor
        assert_eq!(g.at([0, 5, 0]), g.at([1, 5, 0]));
    }

    /// Front radius along a grid row through the center, by sign change.
    fn front_radius_on_row(f: &ScalarField, row: usize) -> f64 {
        let n1 = f.spec.counts[1];
        let jc = if f.spec.axisymmetric { 0 } else { n1 / 2 };
        // walk outward in +x from the row center
        let mut last = None;
        for i in f.spec.counts[0] / 2..f.spec.counts[0] {
            let v = f.at([i, row, 0]);
            if v <= 0.0 {
                let prev = f.at([i - 1, row, 0]);
                let x_prev = f.spec.position([i - 1, row, 0])[0];
                let frac = prev / (prev - v);
                let x = x_prev + frac * f.spec.spacing;
                let y = f.spec.position([i, jc, 0])[1];
                last = Some((x * x + y * y).sqrt());
                break;
            }
        }
        last.expect("front not found on row")
    }

    #[test]
    fn circle_front_tracks_exact_radius() {
        let mut f = circle_setup(129);
        let p = EvolveParams::default();
        let dt = stable_dt(&f.spec, &p);
        let h = f.spec.spacing;
        let mut t = 0.0;
        // exact shrinking circle: r(t) = sqrt(1 - 2t)
        for target in [0.2, 0.4] {
            while t < target {
                f = step(&f, dt.min(target - t), &p).unwrap();
                t += dt.min(target - t);
            }
            let r = front_radius_on_row(&f, 64);
            let exact = (1.0 - 2.0 * t).sqrt();
            assert!(
                (r - exact).abs() <= 3.0 * h,
                "t={t}: r={r:.4} vs exact {exact:.4}"
            );
        }
    }

    #[test]
    fn axisymmetric_sphere_tracks_exact_radius() {
        let mut f = sphere_setup(129);
        let p = EvolveParams::default();
        let dt = stable_dt(&f.spec, &p);
        let h = f.spec.spacing;
        let mut t = 0.0;
        // sphere in R^3: r(t) = sqrt(1 - 4t)
        for target in [0.1, 0.2] {
            while t < target {
                f = step(&f, dt.min(target - t), &p).unwrap();
                t += dt.min(target - t);
            }
            let r = front_radius_on_row(&f, 0);
            let exact = (1.0 - 4.0 * t).sqrt();
            assert!(
                (r - exact).abs() <= 3.0 * h,
                "t={t}: r={r:.4} vs exact {exact:.4}"
            );
        }
    }

    #[test]
    fn recorder_keeps_first_crossing() {
        let mut rec = CrossingRecorder::new(4);
        assert!(rec.record(2, 1.5));
        assert!(!rec.record(2, 2.5)); // wobble: second crossing ignored
        assert!(rec.crossed(2));
        assert!(!rec.crossed(0));
        assert_eq!(rec.into_values()[2], 1.5);
    }

    #[test]
    fn evolve_circle_extinction_and_monotone_sweep() {
        let f = circle_setup(129);
        let out = evolve(&f, &EvolveParams::default()).unwrap();
        assert!(!out.field.partial);
        let (t_ext, idx) = out.field.extinction_time().unwrap();
        assert!((t_ext - 0.5).abs() < 0.02, "T = {t_ext}");
        let p = out.field.spec.position(idx);
        assert!(p[0].abs() < 0.05 && p[1].abs() < 0.05);
        // positive-region node count never grows; max v never grows
        for w in out.diagnostics.rows.windows(2) {
            assert!(w[1].positive_nodes <= w[0].positive_nodes);
            assert!(w[1].max_v <= w[0].max_v + 1e-12);
        }
    }

    #[test]
    fn evolve_flags_partial_on_early_stop() {
        let f = circle_setup(65);
        let params = EvolveParams {
            t_max: 0.01,
            ..Default::default()
        };
        let out = evolve(&f, &params).unwrap();
        assert!(out.field.partial);
        assert!(out.field.masked_count() > 0);
        assert!(matches!(
            out.field.extinction_time(),
            Err(Error::PartialField)
        ));
    }

    #[test]
    fn epsilon_halving_shifts_extinction_below_percent() {
        let f = circle_setup(129);
        let h = f.spec.spacing;
        let run = |eps: f64| {
            let params = EvolveParams {
                epsilon: Some(eps),
                ..Default::default()
            };
            evolve(&f, &params).unwrap().field.extinction_time().unwrap().0
        };
        let (t_full, t_half) = (run(h), run(h / 2.0));
        assert!(
            (t_full - t_half).abs() / t_full <= 0.01,
            "T(eps=h)={t_full:.5} vs T(eps=h/2)={t_half:.5}"
        );
    }

    #[test]
    fn reinit_smoke() {
        let f = circle_setup(65);
        let params = EvolveParams {
            reinit_stride: 200,
            ..Default::default()
        };
        let out = evolve(&f, &params).unwrap();
        let (t_ext, _) = out.field.extinction_time().unwrap();
        assert!((t_ext - 0.5).abs() < 0.05, "T with reinit = {t_ext}");
    }
}
