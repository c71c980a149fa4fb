//! scratch diagnostics for calibration

use mcflow::analyze::{cone_continuity_profile, ConeSpec, ShellSampler};
use mcflow::config::RunConfig;
use mcflow::pipeline::execute_run;

fn main() -> mcflow::Result<()> {
    // dumbbell: dump every detection with its spectrum
    let mut cfg = RunConfig::default();
    cfg.scenario = "dumbbell".into();
    cfg.grid_n = 192;
    cfg.quiet = true;
    cfg.analyzer.tol = 0.2;
    cfg.analyzer.radii = vec![0.1, 0.05, 0.025];
    let out = execute_run(&cfg)?;
    let r = out.report.as_ref().unwrap();
    println!(
        "dumbbell: {} detections, {} unclassified, {} clusters, verdict {}",
        r.points.len(),
        r.unclassified,
        r.time_clusters.len(),
        r.verdict
    );
    for p in &r.points {
        let eig: Vec<String> = p.eigenvalues().iter().map(|l| format!("{l:+.4}")).collect();
        println!(
            "  pos [{:+.4}, {:+.4}, {:+.4}] u={:.5} k={:?} eig=[{}] |g|={:.2e}",
            p.position[0], p.position[1], p.position[2], p.u_value, p.k(), eig.join(", "), p.grad_norm
        );
    }

    // torus: per-sample cone deviations at the largest radius
    let mut cfg = RunConfig::default();
    cfg.scenario = "torus".into();
    cfg.grid_n = 192;
    cfg.quiet = true;
    let out = execute_run(&cfg)?;
    let r = out.report.as_ref().unwrap();
    let apex = &r.points[r.time_clusters[0].members[0]];
    println!(
        "\ntorus apex at [{:+.4}, {:+.4}, {:+.4}], eig {:?}",
        apex.position[0],
        apex.position[1],
        apex.position[2],
        apex.eigenvalues().iter().map(|l| (l * 1e3).round() / 1e3).collect::<Vec<_>>()
    );
    let sampler = ShellSampler::new(42);
    for radius in [0.2, 0.1, 0.05] {
        let cone = ConeSpec {
            aperture: 1.0,
            radii: vec![radius],
            samples_per_radius: 64,
        };
        let prof = cone_continuity_profile(&out.field, apex, &cone, &sampler)?;
        println!("  r={radius}: max dev {:.4} over {} samples", prof.max_deviation[0], prof.n_samples[0]);
    }
    // manual scan of the worst sample at r = 0.2
    let stratum = apex.stratum.as_ref().unwrap();
    let dirs = sampler.directions_3d(64, 0);
    let mut worst = (0.0f64, [0.0; 3]);
    for d in dirs {
        let ax = stratum.axis_projector.apply(&d);
        let tr = stratum.complement_projector.apply(&d);
        let na = (ax.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let nt = (tr.iter().map(|v| v * v).sum::<f64>()).sqrt();
        if na > nt {
            continue;
        }
        let x = [
            apex.position[0] + 0.2 * d[0],
            apex.position[1] + 0.2 * d[1],
            apex.position[2] + 0.2 * d[2],
        ];
        if let Ok(h) = out.field.hessian_at_pos(&x) {
            let dev = h.sub(&apex.hess).frobenius_norm();
            if dev > worst.0 {
                worst = (dev, x);
            }
        }
    }
    let (dev, x) = worst;
    println!("  worst sample at [{:+.4}, {:+.4}, {:+.4}]: dev {dev:.4}", x[0], x[1], x[2]);
    let h = out.field.hessian_at_pos(&x)?;
    for i in 0..3 {
        println!(
            "    H row {i}: [{:+.4}, {:+.4}, {:+.4}]",
            h.get(i, 0),
            h.get(i, 1),
            h.get(i, 2)
        );
    }
    println!(
        "    apex H diag: [{:+.4}, {:+.4}, {:+.4}]",
        apex.hess.get(0, 0),
        apex.hess.get(1, 1),
        apex.hess.get(2, 2)
    );
    let rho = (x[1] * x[1] + x[2] * x[2]).sqrt();
    println!("    sample rho = {rho:.4}, distance from tube center circle = {:.4}",
        ((x[0]).powi(2) + (rho - 1.0).powi(2)).sqrt());
    Ok(())
}
