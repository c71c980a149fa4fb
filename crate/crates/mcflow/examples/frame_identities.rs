//! Cross-validation of arrival-time Hessians against level-set geometry:
//! with n = grad u/|grad u| and speed form H = 1/|grad u|, the tangential
//! Hessian equals A/H (A the shape operator), the normal-normal entry is the
//! normal derivative of |grad u|, and the mixed entries are the tangential
//! derivatives of |grad u|. Two independent stencil routes, three residuals.
//!
//!     cargo run --release --example frame_identities

use mcflow::analyze::{frame_check_residuals, geometry_probe};
use mcflow::config::RunConfig;
use mcflow::pipeline::execute_run;

fn main() -> mcflow::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.scenario = "circle".into();
    cfg.grid_n = 128;
    cfg.quiet = true;

    println!("circle run...");
    let out = execute_run(&cfg)?;
    let u = &out.field;

    let rows = frame_check_residuals(u, 0.2);
    println!("{} regular nodes probed (|grad u| >= 0.2)", rows.len());
    for c in 0..3 {
        let mut vals: Vec<f64> = rows.iter().map(|(_, r)| r[c]).collect();
        let mid = vals.len() / 2;
        let med = *vals.select_nth_unstable_by(mid, |a, b| a.total_cmp(b)).1;
        let max = vals.iter().fold(0.0f64, |a, &b| a.max(b));
        let name = ["tangential Hess vs A/H", "Hess(n,n) vs grad_n|grad u|", "Hess(e,n) vs grad_e|grad u|"][c];
        println!("  {name}: median {med:.5}, max {max:.5}");
    }

    // one probe in detail, at a node near |x| = 0.5
    let idx = {
        let n = u.spec.counts[0];
        [n / 2 + n / 6, n / 2, 0]
    };
    let probe = geometry_probe(u, idx, 0.05)?;
    println!(
        "\nprobe at {:?}: H = {:.4}, normal = [{:+.3}, {:+.3}], A/H = {:+.4}",
        &probe.position[..2],
        probe.speed_form,
        probe.normal[0],
        probe.normal[1],
        probe.a_over_h.get(0, 0)
    );
    println!(
        "frame residuals: [{:.2e}, {:.2e}, {:.2e}]",
        probe.frame_checks[0], probe.frame_checks[1], probe.frame_checks[2]
    );
    Ok(())
}
