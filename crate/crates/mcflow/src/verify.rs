//! The acceptance suite behind `mcflow verify` and the `acceptance` test
//! target: nine criteria pinning the solver and analyzer to their oracles at
//! fixed resolutions. Heavy runs are computed once and shared.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use crate::analyze::{frame_check_residuals, Verdict};
use crate::arrival::ArrivalField;
use crate::config::RunConfig;
use crate::error::Result;
use crate::evolve::CrossingRecorder;
use crate::field::GridSpec;
use crate::pipeline::{execute_run, RunOutput};
use crate::report::report_json;
use crate::scenarios;
use crate::{analyze, mcaf, report};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: usize, name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            id,
            name,
            passed,
            detail,
        }
    }
}

pub struct HeavyRun {
    pub cfg: RunConfig,
    pub out: RunOutput,
    pub elapsed_s: f64,
}

type Shared = Arc<std::result::Result<HeavyRun, String>>;

fn run_shared(cfg: RunConfig) -> Shared {
    let t = Instant::now();
    let result = execute_run(&cfg)
        .map_err(|e| e.to_string())
        .and_then(|out| {
            if out.field.partial {
                Err("sweep incomplete".into())
            } else {
                Ok(out)
            }
        })
        .map(|out| HeavyRun {
            cfg,
            out,
            elapsed_s: t.elapsed().as_secs_f64(),
        });
    Arc::new(result)
}

fn circle_cfg(n: usize) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.scenario = "circle".into();
    cfg.grid_n = n;
    cfg.quiet = true;
    cfg
}

pub fn circle128() -> Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    CELL.get_or_init(|| run_shared(circle_cfg(128))).clone()
}

pub fn circle256() -> Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    CELL.get_or_init(|| run_shared(circle_cfg(256))).clone()
}

pub fn sphere256() -> Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut cfg = RunConfig::default();
        cfg.scenario = "sphere".into();
        cfg.grid_n = 256;
        cfg.quiet = true;
        run_shared(cfg)
    })
    .clone()
}

pub fn torus256() -> Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut cfg = RunConfig::default();
        cfg.scenario = "torus".into();
        cfg.grid_n = 256;
        cfg.quiet = true;
        run_shared(cfg)
    })
    .clone()
}

pub fn dumbbell256() -> Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut cfg = RunConfig::default();
        cfg.scenario = "dumbbell".into();
        cfg.grid_n = 256;
        cfg.quiet = true;
        // the neck's kernel eigenvalue carries a 1/|ln h| bias at reachable
        // resolutions, so the cylindrical fit needs the wider (still
        // admissible) tolerance; shells shrink to fit inside the neck tube
        cfg.analyzer.tol = 0.2;
        cfg.analyzer.radii = vec![0.1, 0.05, 0.025];
        run_shared(cfg)
    })
    .clone()
}

fn fail(id: usize, name: &'static str, msg: &str) -> CriterionResult {
    CriterionResult::new(id, name, false, msg.to_string())
}

/// Criterion 1: stencil-precision residuals of the exact sphere and cylinder
/// arrival times on N = 128 grids.
pub fn criterion_1() -> CriterionResult {
    let name = "exact-solution residual";
    let t = Instant::now();
    let n = 128;
    let h = 2.4 / (n - 1) as f64;
    let spec3 = match GridSpec::new(3, &[n, n, n], &[-1.2; 3], h, false) {
        Ok(s) => s,
        Err(e) => return fail(1, name, &e.to_string()),
    };
    let sphere = ArrivalField::from_oracle(spec3.clone(), |p| {
        scenarios::exact_arrival_sphere(1.0, 2, p).ok()
    });
    let cylinder = ArrivalField::from_oracle(spec3, |p| {
        let rho = (p[1] * p[1] + p[2] * p[2]).sqrt();
        scenarios::exact_arrival_cylinder(1.0, 2, 1, rho).ok()
    });
    let median = |u: &ArrivalField| -> f64 {
        let mut vals: Vec<f64> = u
            .residual_map(0.05)
            .into_iter()
            .map(|(_, r)| r.abs())
            .collect();
        let mid = vals.len() / 2;
        *vals
            .select_nth_unstable_by(mid, |a, b| a.total_cmp(b))
            .1
    };
    let (med_s, med_c) = (median(&sphere), median(&cylinder));
    let passed = med_s <= 1e-8 && med_c <= 1e-8;
    CriterionResult::new(
        1,
        name,
        passed,
        format!(
            "median |residual|: sphere {med_s:.2e}, cylinder {med_c:.2e} (<= 1e-8); {:.2} s",
            t.elapsed().as_secs_f64()
        ),
    )
}

fn circle_linf_error(run: &HeavyRun) -> f64 {
    let u = &run.out.field;
    let mut worst: f64 = 0.0;
    for idx in u.spec.indexes() {
        let Some(v) = u.at(idx) else { continue };
        let p = u.spec.position(idx);
        let r2 = p[0] * p[0] + p[1] * p[1];
        if r2 > 0.81 {
            continue;
        }
        let exact = (1.0 - r2) / 2.0;
        worst = worst.max((v - exact).abs());
    }
    worst
}

/// Criterion 2: circle extinction time and field accuracy at N = 256.
pub fn criterion_2() -> CriterionResult {
    let name = "circle extinction";
    let shared = circle256();
    let run = match shared.as_ref() {
        Ok(r) => r,
        Err(e) => return fail(2, name, e),
    };
    let report = run.out.report.as_ref().expect("complete run has a report");
    let t_err = (report.extinction_time - 0.5).abs();
    let linf = circle_linf_error(run);
    let passed = t_err <= 0.01 && linf <= 0.01;
    CriterionResult::new(
        2,
        name,
        passed,
        format!(
            "|T - 0.5| = {t_err:.4} (<= 0.01), Linf(u - exact) on r<=0.9 = {linf:.4} (<= 0.01); {:.0} s",
            run.elapsed_s
        ),
    )
}

/// Criterion 3: axisymmetric sphere: extinction, Hessian eigenvalues at the
/// critical point, k = 0, verdict C2 with a dimension-0 singular set.
pub fn criterion_3() -> CriterionResult {
    let name = "sphere via axisymmetric mode";
    let shared = sphere256();
    let run = match shared.as_ref() {
        Ok(r) => r,
        Err(e) => return fail(3, name, e),
    };
    let report = run.out.report.as_ref().unwrap();
    let t_err = (report.extinction_time - 0.25).abs();
    let mut detail = format!("|T - 0.25| = {t_err:.4}");
    let mut passed = t_err <= 0.01;

    if report.points.len() != 1 {
        passed = false;
        detail.push_str(&format!("; expected 1 critical point, got {}", report.points.len()));
    }
    if let Some(p) = report.points.first() {
        let eig = p.eigenvalues();
        let eig_ok = eig.len() == 3 && eig.iter().all(|&l| (-0.55..=-0.45).contains(&l));
        passed &= eig_ok;
        detail.push_str(&format!(
            "; eigenvalues [{}]",
            eig.iter()
                .map(|l| format!("{l:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        passed &= p.k() == Some(0);
        detail.push_str(&format!("; k = {:?}", p.k()));
    }
    passed &= report.verdict == Verdict::C2;
    let dim0 = report.manifolds.len() == 1 && report.manifolds[0].k == 0;
    passed &= dim0;
    detail.push_str(&format!(
        "; verdict {} with {} component(s) of k = {:?}; {:.0} s",
        report.verdict,
        report.manifolds.len(),
        report.manifolds.first().map(|m| m.k),
        run.elapsed_s
    ));
    CriterionResult::new(3, name, passed, detail)
}

/// Criterion 4: marriage ring: one singular time, a closed connected k = 1
/// circle tangent to the kernels, verdict C2, extinction near r0^2/2.
pub fn criterion_4() -> CriterionResult {
    let name = "marriage ring (torus)";
    let shared = torus256();
    let run = match shared.as_ref() {
        Ok(r) => r,
        Err(e) => return fail(4, name, e),
    };
    let report = run.out.report.as_ref().unwrap();
    let mut passed = true;
    let mut notes = Vec::new();

    if report.time_clusters.len() != 1 {
        passed = false;
    }
    notes.push(format!("{} cluster(s)", report.time_clusters.len()));

    let all_k1 = report
        .points
        .iter()
        .filter_map(|p| p.k())
        .all(|k| k == 1);
    passed &= all_k1 && report.unclassified == 0;
    notes.push(format!(
        "all classified k=1: {all_k1}, unclassified {}",
        report.unclassified
    ));

    if report.manifolds.len() == 1 {
        let m = &report.manifolds[0];
        passed &= m.closed && m.max_tangency_deg <= 5.0 && m.u_spread <= 0.005;
        notes.push(format!(
            "closed {} tangency {:.3} deg spread {:.2e}",
            m.closed, m.max_tangency_deg, m.u_spread
        ));
    } else {
        passed = false;
        notes.push(format!("{} components", report.manifolds.len()));
    }

    passed &= report.verdict == Verdict::C2;
    let t_ok = (report.extinction_time - 0.03125).abs() <= 0.25 * 0.03125;
    passed &= t_ok;
    notes.push(format!(
        "verdict {}, T = {:.5} vs 0.03125 +- 25%; {:.0} s",
        report.verdict, report.extinction_time, run.elapsed_s
    ));
    CriterionResult::new(4, name, passed, notes.join("; "))
}

/// Criterion 5: dumbbell: at least two singular times, verdict notC2 with
/// the multiple-times witness, neck classified k = 1 with the cylinder
/// spectrum.
pub fn criterion_5() -> CriterionResult {
    let name = "dumbbell (neck pinch)";
    let shared = dumbbell256();
    let run = match shared.as_ref() {
        Ok(r) => r,
        Err(e) => return fail(5, name, e),
    };
    let report = run.out.report.as_ref().unwrap();
    let mut passed = report.time_clusters.len() >= 2;
    let mut notes = vec![format!("{} time clusters", report.time_clusters.len())];

    passed &= report.verdict == Verdict::NotC2;
    let witness = report
        .verdict_reasons
        .iter()
        .find(|r| r.condition == "single singular time")
        .map(|r| !r.passed)
        .unwrap_or(false);
    passed &= witness;
    notes.push(format!(
        "verdict {} with multiple-singular-times witness: {witness}",
        report.verdict
    ));

    // the earliest cluster holds the neck
    match report
        .time_clusters
        .first()
        .map(|c| &report.points[c.members[0]])
    {
        Some(neck) => {
            passed &= neck.k() == Some(1);
            let eig = neck.eigenvalues();
            // ascending: {-1, -1, 0}
            let eig_ok = eig.len() == 3
                && (eig[0] + 1.0).abs() <= 0.15
                && (eig[1] + 1.0).abs() <= 0.15
                && eig[2].abs() <= 0.15;
            passed &= eig_ok;
            notes.push(format!(
                "neck k = {:?}, eigenvalues [{}] vs {{-1,-1,0}} +- 0.15",
                neck.k(),
                eig.iter()
                    .map(|l| format!("{l:.3}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        None => {
            passed = false;
            notes.push("no clusters".into());
        }
    }
    notes.push(format!("{:.0} s", run.elapsed_s));
    CriterionResult::new(5, name, passed, notes.join("; "))
}

fn non_increasing(seq: &[f64], slack: f64) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Criterion 6: transverse cone continuity on the torus ring (decaying to
/// <= 0.1) and monotone behavior at the dumbbell neck.
pub fn criterion_6() -> CriterionResult {
    let name = "cone continuity profiles";
    let torus = torus256();
    let dumbbell = dumbbell256();
    let (torus, dumbbell) = match (torus.as_ref(), dumbbell.as_ref()) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(6, name, e),
    };
    let mut passed = true;
    let mut notes = Vec::new();
    match &torus.out.report.as_ref().unwrap().cone_profile {
        Some(p) => {
            let mono = non_increasing(&p.max_deviation, 0.02);
            let last = *p.max_deviation.last().unwrap();
            passed &= mono && last <= 0.1;
            notes.push(format!(
                "torus deviations [{}] non-increasing {mono}, final {last:.3} (<= 0.1)",
                p.max_deviation
                    .iter()
                    .map(|d| format!("{d:.3}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        None => {
            passed = false;
            notes.push("torus cone profile missing".into());
        }
    }
    match &dumbbell.out.report.as_ref().unwrap().cone_profile {
        Some(p) => {
            let mono = non_increasing(&p.max_deviation, 0.02);
            passed &= mono;
            notes.push(format!(
                "dumbbell deviations [{}] non-increasing {mono}",
                p.max_deviation
                    .iter()
                    .map(|d| format!("{d:.3}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        None => {
            passed = false;
            notes.push("dumbbell cone profile missing".into());
        }
    }
    CriterionResult::new(6, name, passed, notes.join("; "))
}

/// Criterion 7: normal alignment: decay on the torus, an axial value near 1
/// on the dumbbell at small radius.
pub fn criterion_7() -> CriterionResult {
    let name = "normal alignment profiles";
    let torus = torus256();
    let dumbbell = dumbbell256();
    let (torus, dumbbell) = match (torus.as_ref(), dumbbell.as_ref()) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(7, name, e),
    };
    let mut passed = true;
    let mut notes = Vec::new();
    match &torus.out.report.as_ref().unwrap().alignment_profile {
        Some(p) => {
            let mono = non_increasing(&p.max_axis_alignment, 0.02);
            let last = *p.max_axis_alignment.last().unwrap();
            passed &= mono && last <= 0.15;
            notes.push(format!(
                "torus alignment [{}] decreasing {mono}, final {last:.3} (<= 0.15)",
                p.max_axis_alignment
                    .iter()
                    .map(|d| format!("{d:.3}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        None => {
            passed = false;
            notes.push("torus alignment profile missing".into());
        }
    }
    match &dumbbell.out.report.as_ref().unwrap().alignment_profile {
        Some(p) => {
            let witness = p
                .radii
                .iter()
                .zip(&p.max_axis_alignment)
                .any(|(&r, &v)| r <= 0.1 && v >= 0.9);
            passed &= witness;
            notes.push(format!(
                "dumbbell axial alignment [{}] has value >= 0.9 at radius <= 0.1: {witness}",
                p.max_axis_alignment
                    .iter()
                    .map(|d| format!("{d:.3}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        None => {
            passed = false;
            notes.push("dumbbell alignment profile missing".into());
        }
    }
    CriterionResult::new(7, name, passed, notes.join("; "))
}

fn frame_medians(u: &ArrivalField) -> [f64; 3] {
    let rows = frame_check_residuals(u, 0.2);
    let mut out = [0.0; 3];
    for c in 0..3 {
        let mut vals: Vec<f64> = rows.iter().map(|(_, checks)| checks[c]).collect();
        let mid = vals.len() / 2;
        out[c] = *vals
            .select_nth_unstable_by(mid, |a, b| a.total_cmp(b))
            .1;
    }
    out
}

/// Criterion 8: frame identities on circle-run regular nodes: medians under
/// 0.05 at N = 256 and smaller than at N = 128.
pub fn criterion_8() -> CriterionResult {
    let name = "frame identities";
    let fine = circle256();
    let coarse = circle128();
    let (fine, coarse) = match (fine.as_ref(), coarse.as_ref()) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(8, name, e),
    };
    let med_fine = frame_medians(&fine.out.field);
    let med_coarse = frame_medians(&coarse.out.field);
    let small = med_fine.iter().all(|&m| m <= 0.05);
    let shrinking = med_fine
        .iter()
        .zip(&med_coarse)
        .all(|(&f, &c)| f < c);
    CriterionResult::new(
        8,
        name,
        small && shrinking,
        format!(
            "medians at 256 [{}] (<= 0.05), at 128 [{}], all decreased: {shrinking}",
            med_fine
                .iter()
                .map(|m| format!("{m:.4}"))
                .collect::<Vec<_>>()
                .join(", "),
            med_coarse
                .iter()
                .map(|m| format!("{m:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

/// Criterion 9: property umbrella: projector algebra, crossing uniqueness,
/// monotone sweep, byte-level determinism, convergence factor, and the
/// overall runtime budget.
pub fn criterion_9() -> CriterionResult {
    let name = "property suite";
    let runs: Vec<(&str, Shared)> = vec![
        ("circle128", circle128()),
        ("circle256", circle256()),
        ("sphere", sphere256()),
        ("torus", torus256()),
        ("dumbbell", dumbbell256()),
    ];
    let mut passed = true;
    let mut notes = Vec::new();
    let mut total_elapsed = 0.0;

    // projector algebra on every classified point of every run
    let mut checked_points = 0usize;
    for (label, shared) in &runs {
        match shared.as_ref() {
            Ok(run) => {
                total_elapsed += run.elapsed_s;
                let report = run.out.report.as_ref().unwrap();
                for p in &report.points {
                    let Some(s) = &p.stratum else { continue };
                    checked_points += 1;
                    let m = s.axis_projector.order();
                    let sum = s.axis_projector.add(&s.complement_projector);
                    let id = crate::symmetric::SymmetricMatrix::identity(m);
                    let e1 = sum.sub(&id).frobenius_norm();
                    let v = [0.381, -0.73, 0.55];
                    let pv = s.axis_projector.apply(&s.complement_projector.apply(&v));
                    let e2 = (pv[0] * pv[0] + pv[1] * pv[1] + pv[2] * pv[2]).sqrt();
                    let rank_err = (s.axis_projector.trace() - s.k as f64).abs();
                    if e1 > 1e-10 || e2 > 1e-10 || rank_err > 1e-10 {
                        passed = false;
                        notes.push(format!(
                            "projector algebra violated on {label}: {e1:.1e} {e2:.1e} {rank_err:.1e}"
                        ));
                    }
                }
                // discrete monotone sweep from the recorded diagnostics
                if let Some(diag) = &run.out.diagnostics {
                    if !diag
                        .rows
                        .windows(2)
                        .all(|w| w[1].positive_nodes <= w[0].positive_nodes)
                    {
                        passed = false;
                        notes.push(format!("{label}: positive-node count grew"));
                    }
                }
            }
            Err(e) => {
                passed = false;
                notes.push(format!("{label}: {e}"));
            }
        }
    }
    notes.push(format!(
        "projector algebra exact on {checked_points} points; sweeps monotone"
    ));

    // crossing uniqueness is structural; exercise the recorder's contract
    let mut rec = CrossingRecorder::new(2);
    let first = rec.record(0, 1.0);
    let second = rec.record(0, 2.0);
    if !(first && !second) {
        passed = false;
        notes.push("crossing recorder accepted a second crossing".into());
    }

    // determinism: analyzing a stored field reproduces the report bytes
    if let Ok(run) = torus256().as_ref() {
        let bytes = mcaf::encode_arrival(&run.out.field);
        match mcaf::decode(&bytes) {
            Ok(mcaf::McafContent::Arrival(back)) => {
                let again = analyze::analyze_field(&back, &run.cfg.analyzer);
                match again {
                    Ok(r2) => {
                        let echo = run.cfg.echo();
                        let a = report_json(run.out.report.as_ref().unwrap(), &echo);
                        let b = report_json(&r2, &echo);
                        let csv_a = run
                            .out
                            .report
                            .as_ref()
                            .unwrap()
                            .cone_profile
                            .as_ref()
                            .map(report::cone_profile_csv);
                        let csv_b = r2.cone_profile.as_ref().map(report::cone_profile_csv);
                        if a != b || csv_a != csv_b {
                            passed = false;
                            notes.push("round-trip analysis not byte-identical".into());
                        } else {
                            notes.push("stored-field analysis byte-identical".into());
                        }
                    }
                    Err(e) => {
                        passed = false;
                        notes.push(format!("re-analysis failed: {e}"));
                    }
                }
            }
            _ => {
                passed = false;
                notes.push("MCAF round-trip failed".into());
            }
        }
    }

    // resolution convergence on the circle
    match (circle128().as_ref(), circle256().as_ref()) {
        (Ok(coarse), Ok(fine)) => {
            let (e_coarse, e_fine) = (circle_linf_error(coarse), circle_linf_error(fine));
            let factor = e_coarse / e_fine;
            if factor < 1.7 {
                passed = false;
            }
            notes.push(format!(
                "Linf error {e_coarse:.5} -> {e_fine:.5}, factor {factor:.2} (>= 1.7)"
            ));
        }
        _ => passed = false,
    }

    let budget_ok = total_elapsed <= 600.0;
    passed &= budget_ok;
    notes.push(format!(
        "evolution wall time {total_elapsed:.0} s (<= 600 s)"
    ));
    CriterionResult::new(9, name, passed, notes.join("; "))
}

/// Run every criterion, printing one pass/fail line each unless quiet.
pub fn run_all(quiet: bool) -> Vec<CriterionResult> {
    let criteria: Vec<fn() -> CriterionResult> = vec![
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut results = Vec::new();
    for c in criteria {
        let r = c();
        if !quiet {
            println!(
                "[{}] criterion {}: {} -- {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.id,
                r.name,
                r.detail
            );
        }
        results.push(r);
    }
    results
}

/// verify subcommand: exit 0 when every criterion passes, 6 otherwise.
pub fn cmd_verify(quiet: bool) -> i32 {
    let t = Instant::now();
    let results = run_all(quiet);
    let n_pass = results.iter().filter(|r| r.passed).count();
    if !quiet {
        println!(
            "{n_pass}/{} criteria passed in {:.0} s",
            results.len(),
            t.elapsed().as_secs_f64()
        );
    }
    if n_pass == results.len() {
        0
    } else {
        6
    }
}

/// Verify with a different seed: outcomes must not depend on the sampling
/// phase (used by the acceptance tests).
pub fn verdicts_with_seed(seed: u64) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    for scenario in ["sphere", "torus", "dumbbell"] {
        let mut cfg = RunConfig::default();
        cfg.scenario = scenario.into();
        cfg.grid_n = 128;
        cfg.quiet = true;
        cfg.analyzer.seed = seed;
        if scenario == "dumbbell" {
            cfg.analyzer.tol = 0.2;
            cfg.analyzer.radii = vec![0.1, 0.05, 0.025];
        }
        let run = execute_run(&cfg)?;
        out.push(run.report.map(|r| r.verdict).unwrap_or(Verdict::Inconclusive));
    }
    Ok(out)
}
