//! A round sphere handled in axisymmetric (x, rho) coordinates: the flow
//! vanishes at a single point at T = R^2/4 and the arrival-time Hessian
//! there is -1/2 times the identity (a stratum-0 critical point).
//!
//!     cargo run --release --example sphere_extinction

use mcflow::config::RunConfig;
use mcflow::pipeline::execute_run;

fn main() -> mcflow::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.scenario = "sphere".into();
    cfg.grid_n = 128;
    cfg.quiet = true;

    println!("evolving the unit sphere (axisymmetric {} nodes in x)...", cfg.grid_n);
    let out = execute_run(&cfg)?;
    let report = out.report.expect("complete run");

    println!("extinction time T = {:.5}   (exact 0.25)", report.extinction_time);
    println!("critical points: {}", report.points.len());
    for p in &report.points {
        let eig: Vec<String> = p.eigenvalues().iter().map(|l| format!("{l:+.4}")).collect();
        println!(
            "  at {:?}: u = {:.5}, k = {:?}, eigenvalues [{}]",
            p.position.map(|x| (x * 1e4).round() / 1e4),
            p.u_value,
            p.k(),
            eig.join(", ")
        );
    }
    println!("verdict: {} (singular set is a point when the flow is convex)", report.verdict);
    Ok(())
}
