//! Evolve a unit circle by curvature and compare the recovered arrival time
//! with the exact solution u = (1 - |x|^2)/2, extinction at T = 0.5.
//!
//!     cargo run --release --example shrinking_circle

use mcflow::config::RunConfig;
use mcflow::pipeline::execute_run;

fn main() -> mcflow::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.scenario = "circle".into();
    cfg.grid_n = 128;
    cfg.quiet = true;

    println!("evolving a unit circle on a {0}x{0} grid...", cfg.grid_n);
    let out = execute_run(&cfg)?;
    let u = &out.field;
    let report = out.report.as_ref().expect("complete run");

    let (t_ext, node) = u.extinction_time()?;
    println!("extinction time  T = {t_ext:.5}   (exact 0.5)");
    println!(
        "extinction node  {:?} at {:?}",
        &node[..2],
        &u.spec.position(node)[..2]
    );

    let mut linf: f64 = 0.0;
    for idx in u.spec.indexes() {
        let Some(v) = u.at(idx) else { continue };
        let p = u.spec.position(idx);
        let r2 = p[0] * p[0] + p[1] * p[1];
        if r2 <= 0.81 {
            linf = linf.max((v - (1.0 - r2) / 2.0).abs());
        }
    }
    println!("Linf(u - exact) over the 0.9-disk: {linf:.5}");
    println!("discrete Lipschitz constant: {:.4}", u.lipschitz_constant());
    println!("verdict: {}", report.verdict);
    for r in &report.verdict_reasons {
        println!("  [{}] {} ({})", if r.passed { "ok" } else { "xx" }, r.condition, r.detail);
    }
    Ok(())
}
