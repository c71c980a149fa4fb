//! A rotationally symmetric dumbbell: the neck pinches long before the bulbs
//! vanish, so the flow has two singular times and the arrival time cannot be
//! twice continuously differentiable. The neck is still a cylindrical k = 1
//! point with eigenvalues near {0, -1, -1}.
//!
//!     cargo run --release --example dumbbell_pinch

use mcflow::config::RunConfig;
use mcflow::pipeline::execute_run;

fn main() -> mcflow::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.scenario = "dumbbell".into(); // bulbs 0.5 at +-0.75, neck 0.15
    cfg.grid_n = 192;
    cfg.quiet = true;
    cfg.analyzer.tol = 0.2;
    cfg.analyzer.radii = vec![0.1, 0.05, 0.025];

    println!("evolving the (0.5, 0.15, 0.75) dumbbell...");
    let out = execute_run(&cfg)?;
    let report = out.report.expect("complete run");

    println!("singular-time clusters:");
    for c in &report.time_clusters {
        println!("  t = {:.5} with {} point(s)", c.time, c.members.len());
    }
    if let Some(neck) = report
        .time_clusters
        .first()
        .map(|c| &report.points[c.members[0]])
    {
        let eig: Vec<String> = neck.eigenvalues().iter().map(|l| format!("{l:+.3}")).collect();
        println!(
            "neck point at x = {:+.4}: k = {:?}, eigenvalues [{}]",
            neck.position[0],
            neck.k(),
            eig.join(", ")
        );
    }
    if let Some(l) = &report.local_structure {
        println!(
            "local structure at the neck: local_max = {} (bulbs outlive the pinch), separation = {}",
            l.local_max, l.separation
        );
    }
    println!("verdict: {}", report.verdict);
    for r in report.verdict_reasons.iter().filter(|r| !r.passed) {
        println!("  witness: {} ({})", r.condition, r.detail);
    }
    Ok(())
}
