//! Implicit-function scenario library.
//!
//! Each shape provides an implicit function (positive inside), a suggested
//! bounding box, an optional exact arrival-time oracle, and the expected
//! analysis outcome where one is known: a convex front vanishes at a point,
//! a thin torus of revolution vanishes along a circle, and a dumbbell pinches
//! at the neck before the bulbs go extinct.

use crate::analyze::Verdict;
use crate::error::{Error, Result};

type ImplicitFn = Box<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;
type OracleFn = Box<dyn Fn(&[f64; 3]) -> Option<f64> + Send + Sync>;

/// Known outcome for a scenario, used by the acceptance checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedOutcome {
    pub verdict: Verdict,
    pub stratum_k: usize,
    pub n_singular_times: usize,
    /// Exact extinction time where a closed form exists; approximate for the
    /// torus (local cylinder model r0^2/2).
    pub extinction_time: Option<f64>,
}

pub struct Shape {
    name: String,
    axisymmetric: bool,
    implicit: ImplicitFn,
    oracle: Option<OracleFn>,
    /// Suggested domain per axis: [[x_min, x_max], [y_min, y_max]].
    pub bbox: [[f64; 2]; 2],
    pub expected: Option<ExpectedOutcome>,
    /// Set when a torus violates the thinness heuristic r0 < R0/3.
    pub thin_warning: bool,
}

impl Shape {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn axisymmetric(&self) -> bool {
        self.axisymmetric
    }

    pub fn implicit(&self, p: &[f64; 3]) -> f64 {
        (self.implicit)(p)
    }

    /// Exact arrival time at a position, when this scenario has one.
    pub fn oracle(&self, p: &[f64; 3]) -> Option<f64> {
        self.oracle.as_ref().and_then(|f| f(p))
    }

    pub fn has_oracle(&self) -> bool {
        self.oracle.is_some()
    }

    /// Free-form shape for tests.
    pub fn custom(
        name: &str,
        axisymmetric: bool,
        f: impl Fn(&[f64; 3]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Shape {
            name: name.into(),
            axisymmetric,
            implicit: Box::new(f),
            oracle: None,
            bbox: [[-1.5, 1.5], [-1.5, 1.5]],
            expected: None,
            thin_warning: false,
        }
    }
}

/// Arrival time of a round sphere of dimension n and radius R shrinking by
/// mean curvature: u(x) = (R^2 - |x|^2) / (2n).
pub fn exact_arrival_sphere(radius: f64, n: usize, x: &[f64; 3]) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter("sphere dimension n must be >= 1".into()));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 > radius * radius * (1.0 + 1e-12) {
        return Err(Error::OutsideDomain(*x));
    }
    Ok((radius * radius - r2) / (2.0 * n as f64))
}

/// Arrival time of the shrinking cylinder S^{n-k} x R^k at distance rho from
/// the axis: u = (R^2 - rho^2) / (2(n - k)). Its ambient Hessian is
/// -1/(n-k) times the projector onto the axis complement.
pub fn exact_arrival_cylinder(radius: f64, n: usize, k: usize, rho: f64) -> Result<f64> {
    if n < 1 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "cylinder needs 0 <= k <= n-1, got n={n}, k={k}"
        )));
    }
    if rho > radius * (1.0 + 1e-12) || rho < 0.0 {
        return Err(Error::OutsideDomain([rho, 0.0, 0.0]));
    }
    Ok((radius * radius - rho * rho) / (2.0 * (n - k) as f64))
}

/// Planar circle: front vanishes at the center at T = R^2/2.
pub fn make_circle(radius: f64) -> Shape {
    assert!(radius > 0.0);
    let r = radius;
    Shape {
        name: "circle".into(),
        axisymmetric: false,
        implicit: Box::new(move |p| r - (p[0] * p[0] + p[1] * p[1]).sqrt()),
        oracle: Some(Box::new(move |p| exact_arrival_sphere(r, 1, p).ok())),
        bbox: [[-1.5 * radius, 1.5 * radius], [-1.5 * radius, 1.5 * radius]],
        expected: Some(ExpectedOutcome {
            verdict: Verdict::C2,
            stratum_k: 0,
            n_singular_times: 1,
            extinction_time: Some(radius * radius / 2.0),
        }),
        thin_warning: false,
    }
}

/// Round sphere handled in axisymmetric (x, rho) coordinates; T = R^2/4.
pub fn make_sphere(radius: f64) -> Shape {
    assert!(radius > 0.0);
    let r = radius;
    Shape {
        name: "sphere".into(),
        axisymmetric: true,
        implicit: Box::new(move |p| r - (p[0] * p[0] + p[1] * p[1]).sqrt()),
        oracle: Some(Box::new(move |p| exact_arrival_sphere(r, 2, p).ok())),
        bbox: [[-1.5 * radius, 1.5 * radius], [0.0, 1.5 * radius]],
        expected: Some(ExpectedOutcome {
            verdict: Verdict::C2,
            stratum_k: 0,
            n_singular_times: 1,
            extinction_time: Some(radius * radius / 4.0),
        }),
        thin_warning: false,
    }
}

/// Convex but non-round planar example; no closed-form extinction time.
/// The implicit is a normalized pseudo-distance sqrt(ab) (1 - sqrt(q)) so it
/// stays within a factor ~sqrt(a/b) of true distance near the boundary.
pub fn make_ellipse(a: f64, b: f64) -> Shape {
    assert!(a > 0.0 && b > 0.0);
    let scale = (a * b).sqrt();
    Shape {
        name: "ellipse".into(),
        axisymmetric: false,
        implicit: Box::new(move |p| {
            let q = (p[0] / a).powi(2) + (p[1] / b).powi(2);
            scale * (1.0 - q.sqrt())
        }),
        oracle: None,
        bbox: [[-1.5 * a, 1.5 * a], [-1.5 * a, 1.5 * a]],
        expected: Some(ExpectedOutcome {
            verdict: Verdict::C2,
            stratum_k: 0,
            n_singular_times: 1,
            extinction_time: None,
        }),
        thin_warning: false,
    }
}

/// Thin torus of revolution ("marriage ring"): the tube section in the
/// (x, rho) half-plane is a disc of radius r0 centered at rho = R0. Expected
/// to vanish along a circle at roughly the cylinder time r0^2/2.
pub fn make_torus(major_radius: f64, tube_radius: f64) -> Result<Shape> {
    if !(major_radius > 0.0 && tube_radius > 0.0 && tube_radius < major_radius) {
        return Err(Error::InvalidParameter(
            "torus needs 0 < r0 < R0".into(),
        ));
    }
    let (r0, rr) = (major_radius, tube_radius);
    let thin = rr < r0 / 3.0;
    let expected = thin.then_some(ExpectedOutcome {
        verdict: Verdict::C2,
        stratum_k: 1,
        n_singular_times: 1,
        extinction_time: Some(rr * rr / 2.0),
    });
    Ok(Shape {
        name: "torus".into(),
        axisymmetric: true,
        implicit: Box::new(move |p| {
            rr - (p[0] * p[0] + (p[1] - r0) * (p[1] - r0)).sqrt()
        }),
        oracle: None,
        bbox: [
            [-(rr + 2.0 * rr.max(0.25 * r0)), rr + 2.0 * rr.max(0.25 * r0)],
            [0.0, r0 + 2.0 * rr],
        ],
        expected,
        thin_warning: !thin,
    })
}

/// Rotationally symmetric dumbbell: two bulbs joined by a neck with a flat
/// cylindrical waist and cosh flanks. The waist pinches near the cylinder
/// time neck_r^2/2, long before the bulbs vanish, so the arrival time has
/// two singular times.
///
/// Two geometric constraints shape the construction. The waist must be a
/// genuine cylinder segment: a flank that flares right at x = 0 leaves its
/// own (neck_r/scale)^2 imprint in the axial second derivative of the
/// arrival time, drowning the cylindrical spectrum the pinch should show.
/// And the flank must meet the bulb profile tangentially: a transversal
/// crossing is a reentrant (hence mean-concave) junction that no bounded
/// smoothing can repair, so the cosh scale is bisected for tangency. Inside
/// the junction the implicit is the profile graph; past the bulb equator it
/// is the exact bulb distance, with a C1 blend between.
pub fn make_dumbbell(bulb_r: f64, neck_r: f64, sep: f64) -> Result<Shape> {
    if !(neck_r > 0.0 && neck_r < bulb_r / 2.0) {
        return Err(Error::InvalidParameter(
            "dumbbell needs 0 < neck_r < bulb_r / 2".into(),
        ));
    }
    if !(sep > bulb_r) {
        return Err(Error::InvalidParameter("dumbbell needs sep > bulb_r".into()));
    }
    let sphere_profile = move |x: f64| -> f64 {
        let dx = x - sep;
        if dx.abs() >= bulb_r {
            0.0
        } else {
            (bulb_r * bulb_r - dx * dx).sqrt()
        }
    };
    // flat waist, capped so the flank starts before the bulb's x-range
    let x_flat = (2.0 * neck_r).min(0.8 * (sep - bulb_r));
    // clearance(s) > 0 iff the bulb profile pokes above the flank somewhere;
    // monotone in s, so the zero is the tangency scale
    let clearance = |s: f64| -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..=600 {
            let x = sep * i as f64 / 600.0;
            let flank = neck_r * ((x - x_flat).max(0.0) / s).cosh();
            best = best.max(sphere_profile(x) - flank);
        }
        best
    };
    let scale = {
        let (mut lo, mut hi) = (1.001 * neck_r, 20.0 * neck_r);
        if clearance(hi) <= 0.0 {
            return Err(Error::InvalidParameter(
                "dumbbell neck never meets the bulbs".into(),
            ));
        }
        if clearance(lo) > 0.0 {
            hi = lo;
        } else {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if clearance(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        0.5 * (lo + hi)
    };
    let neck_profile = move |x: f64| neck_r * ((x - x_flat).max(0.0) / scale).cosh();
    // tangency point: maximize bulb - neck, coarse scan plus golden section
    let x_join = {
        let gap = |x: f64| sphere_profile(x) - neck_profile(x);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=600 {
            let x = sep * i as f64 / 600.0;
            if gap(x) > best.0 {
                best = (gap(x), x);
            }
        }
        let (mut lo, mut hi) = (best.1 - sep / 600.0, best.1 + sep / 600.0);
        let inv_phi = 0.618_033_988_749_894_9;
        let (mut a, mut b) = (hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo));
        for _ in 0..90 {
            if gap(a) < gap(b) {
                lo = a;
                a = b;
                b = lo + inv_phi * (hi - lo);
            } else {
                hi = b;
                b = a;
                a = hi - inv_phi * (hi - lo);
            }
        }
        0.5 * (lo + hi)
    };
    if !(x_join > 0.0 && x_join < sep) {
        return Err(Error::InvalidParameter(
            "dumbbell neck never meets the bulbs".into(),
        ));
    }

    let implicit = move |p: &[f64; 3]| -> f64 {
        let (x, rho) = (p[0], p[1]);
        let ax = x.abs();
        if ax <= x_join {
            return neck_profile(ax) - rho;
        }
        let sdf = bulb_r - ((ax - sep) * (ax - sep) + rho * rho).sqrt();
        if ax >= sep {
            return sdf;
        }
        // C1 blend from the profile graph to the bulb distance; both vanish
        // exactly on the sphere here, and the smoothstep has zero slope at
        // the ends, so the implicit stays C1 across the seams
        let t = (ax - x_join) / (sep - x_join);
        let w = 1.0 - t * t * (3.0 - 2.0 * t);
        w * (sphere_profile(ax) - rho) + (1.0 - w) * sdf
    };

    // Mean-convexity gate: sample the t = 0 surface and require the inward
    // normal's divergence to stay non-positive (up to finite-difference slack).
    let x_end = sep + bulb_r;
    let fd = 1e-4;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=400 {
        let x = -x_end + 2.0 * x_end * (i as f64 / 400.0) * 0.999;
        // bisect for the surface height at this x (implicit decreasing in rho)
        let mut lo = 0.0;
        let mut hi = bulb_r + neck_r;
        if implicit(&[x, lo, 0.0]) <= 0.0 {
            continue; // outside the solid's x-range
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if implicit(&[x, mid, 0.0]) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let rho = 0.5 * (lo + hi);
        let f = |dx: f64, dr: f64| implicit(&[x + dx, rho + dr, 0.0]);
        let gx = (f(fd, 0.0) - f(-fd, 0.0)) / (2.0 * fd);
        let gr = (f(0.0, fd) - f(0.0, -fd)) / (2.0 * fd);
        let hxx = (f(fd, 0.0) - 2.0 * f(0.0, 0.0) + f(-fd, 0.0)) / (fd * fd);
        let hrr = (f(0.0, fd) - 2.0 * f(0.0, 0.0) + f(0.0, -fd)) / (fd * fd);
        let hxr = (f(fd, fd) - f(fd, -fd) - f(-fd, fd) + f(-fd, -fd)) / (4.0 * fd * fd);
        let g2 = gx * gx + gr * gr;
        if g2 < 1e-12 {
            continue;
        }
        let q = gx * gx * hxx + 2.0 * gx * gr * hxr + gr * gr * hrr;
        let div_n = (hxx + hrr - q / g2 + gr / rho.max(1e-9)) / g2.sqrt();
        worst = worst.max(div_n);
    }
    if worst > 0.05 {
        return Err(Error::NotMeanConvex(worst));
    }

    Ok(Shape {
        name: "dumbbell".into(),
        axisymmetric: true,
        implicit: Box::new(implicit),
        oracle: None,
        bbox: [
            [-(x_end + 0.35), x_end + 0.35],
            [0.0, bulb_r + 0.35],
        ],
        expected: Some(ExpectedOutcome {
            verdict: Verdict::NotC2,
            stratum_k: 1,
            n_singular_times: 2,
            extinction_time: None,
        }),
        thin_warning: false,
    })
}

/// Scenario parameters addressable from the CLI configuration.
#[derive(Debug, Clone)]
pub struct ScenarioParams {
    pub radius: f64,
    pub ellipse_a: f64,
    pub ellipse_b: f64,
    pub major_radius: f64,
    pub tube_radius: f64,
    pub bulb_r: f64,
    pub neck_r: f64,
    pub sep: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            radius: 1.0,
            ellipse_a: 1.0,
            ellipse_b: 0.6,
            major_radius: 1.0,
            tube_radius: 0.25,
            bulb_r: 0.5,
            neck_r: 0.15,
            sep: 0.75,
        }
    }
}

pub const SCENARIO_NAMES: &[&str] = &["circle", "ellipse", "sphere", "torus", "dumbbell"];

pub fn make(name: &str, p: &ScenarioParams) -> Result<Shape> {
    match name {
        "circle" => Ok(make_circle(p.radius)),
        "ellipse" => Ok(make_ellipse(p.ellipse_a, p.ellipse_b)),
        "sphere" => Ok(make_sphere(p.radius)),
        "torus" => make_torus(p.major_radius, p.tube_radius),
        "dumbbell" => make_dumbbell(p.bulb_r, p.neck_r, p.sep),
        other => Err(Error::Config(format!(
            "unknown scenario '{other}' (available: {})",
            SCENARIO_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_oracle_values() {
        assert!((exact_arrival_sphere(1.0, 1, &[0.0; 3]).unwrap() - 0.5).abs() < 1e-15);
        assert!((exact_arrival_sphere(1.0, 2, &[0.0; 3]).unwrap() - 0.25).abs() < 1e-15);
        assert!(exact_arrival_sphere(1.0, 2, &[1.0, 0.0, 0.0]).unwrap().abs() < 1e-15);
        assert!(exact_arrival_sphere(1.0, 2, &[1.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn cylinder_oracle_values() {
        assert!((exact_arrival_cylinder(1.0, 2, 1, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(exact_arrival_cylinder(1.0, 2, 1, 1.0).unwrap().abs() < 1e-15);
        assert!(exact_arrival_cylinder(1.0, 2, 1, 1.5).is_err());
        assert!(exact_arrival_cylinder(1.0, 2, 2, 0.5).is_err());
    }

    #[test]
    fn circle_implicit_center() {
        assert!((make_circle(1.0).implicit(&[0.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_expectations() {
        let s = make_sphere(1.0);
        let e = s.expected.unwrap();
        assert_eq!(e.verdict, Verdict::C2);
        assert_eq!(e.stratum_k, 0);
        assert_eq!(e.n_singular_times, 1);
        assert!((e.extinction_time.unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ellipse_has_no_time_oracle() {
        let s = make_ellipse(1.0, 0.5);
        assert_eq!(s.expected.as_ref().unwrap().extinction_time, None);
        assert!(!s.has_oracle());
    }

    #[test]
    fn torus_tube_center_and_thinness() {
        let t = make_torus(1.0, 0.25).unwrap();
        assert!((t.implicit(&[0.0, 1.0, 0.0]) - 0.25).abs() < 1e-15);
        assert!(!t.thin_warning);
        let e = t.expected.unwrap();
        assert!((e.extinction_time.unwrap() - 0.03125).abs() < 1e-15);

        let fat = make_torus(1.0, 0.5).unwrap();
        assert!(fat.thin_warning);
        assert!(fat.expected.is_none());
    }


    #[test]
    fn dumbbell_rejects_fat_neck() {
        assert!(make_dumbbell(0.5, 0.4, 0.6).is_err());
    }

    #[test]
    fn dumbbell_canonical_is_mean_convex() {
        let d = make_dumbbell(0.5, 0.15, 0.75).unwrap();
        assert!(d.implicit(&[0.0, 0.0, 0.0]) > 0.0); // inside the neck
        assert!(d.implicit(&[0.75, 0.0, 0.0]) > 0.0); // bulb center
        assert!(d.implicit(&[0.0, 0.6, 0.0]) < 0.0); // above the neck
        assert!(d.implicit(&[1.6, 0.0, 0.0]) < 0.0); // beyond the bulbs
        assert_eq!(d.expected.as_ref().unwrap().n_singular_times, 2);
    }

    #[test]
    fn implicits_track_distance_near_zero_set() {
        // pseudo-distance property: near the zero set the implicit changes at
        // a unit-order rate, |grad f| in [1/2, 2], so |implicit| stays within
        // a factor 2 of true distance there and crossing interpolation is
        // well conditioned
        let shapes = [
            make_circle(1.0),
            make_ellipse(1.0, 0.5),
            make_sphere(1.0),
            make_torus(1.0, 0.25).unwrap(),
            make_dumbbell(0.5, 0.15, 0.75).unwrap(),
        ];
        let fd = 1e-5;
        for shape in &shapes {
            let mut checked = 0;
            for i in 0..400 {
                let ang = std::f64::consts::PI * i as f64 / 400.0;
                for anchor in [
                    [-0.75, 0.0, 0.0],
                    [0.0, 0.0, 0.0],
                    [0.75, 0.0, 0.0],
                    [0.0, 1.0, 0.0], // tube center for ring-like shapes
                ] {
                    // ray from an interior anchor; skip anchors outside
                    if shape.implicit(&anchor) <= 0.0 {
                        continue;
                    }
                    let dir = [ang.cos(), ang.sin(), 0.0];
                    let f_of = |t: f64| {
                        shape.implicit(&[
                            anchor[0] + t * dir[0],
                            (anchor[1] + t * dir[1]).abs(),
                            0.0,
                        ])
                    };
                    let (mut lo, mut hi) = (0.0, 4.0);
                    if f_of(hi) > 0.0 {
                        continue;
                    }
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if f_of(mid) > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let t0 = 0.5 * (lo + hi);
                    let p = [anchor[0] + t0 * dir[0], (anchor[1] + t0 * dir[1]).abs(), 0.0];
                    let gx = (shape.implicit(&[p[0] + fd, p[1], 0.0])
                        - shape.implicit(&[p[0] - fd, p[1], 0.0]))
                        / (2.0 * fd);
                    let gy = (shape.implicit(&[p[0], p[1] + fd, 0.0])
                        - shape.implicit(&[p[0], (p[1] - fd).abs(), 0.0]))
                        / (2.0 * fd);
                    let slope = (gx * gx + gy * gy).sqrt();
                    assert!(
                        (0.5..=2.0).contains(&slope),
                        "{}: |grad implicit| = {slope:.3} at {:?}",
                        shape.name(),
                        &p[..2]
                    );
                    checked += 1;
                }
            }
            assert!(checked > 100, "{}: too few surface samples", shape.name());
        }
    }
}
