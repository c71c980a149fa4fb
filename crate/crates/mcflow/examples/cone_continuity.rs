//! Second-derivative continuity transverse to the singular axis: sampling
//! shrinking spheres around a critical point inside the transverse cone
//! |P_axis(x-p)| <= C |P(x-p)|, the max Hessian deviation from the critical
//! point's Hessian must sink, even at the dumbbell neck where the arrival
//! time fails to be C2 along the axis.
//!
//!     cargo run --release --example cone_continuity

use mcflow::analyze::{cone_continuity_profile, normal_alignment_profile, ConeSpec, ShellSampler};
use mcflow::config::RunConfig;
use mcflow::pipeline::execute_run;

fn main() -> mcflow::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.scenario = "torus".into();
    cfg.grid_n = 192;
    cfg.quiet = true;

    println!("torus run...");
    let out = execute_run(&cfg)?;
    let report = out.report.expect("complete run");
    let ring_point = &report.points[report.time_clusters[0].members[0]];
    let sampler = ShellSampler::new(42);

    let cone = ConeSpec {
        aperture: 1.0,
        radii: vec![0.2, 0.1, 0.05],
        samples_per_radius: 64,
    };
    let prof = cone_continuity_profile(&out.field, ring_point, &cone, &sampler)?;
    println!("cone continuity at a ring point (aperture 1):");
    for i in 0..prof.radii.len() {
        println!(
            "  r = {:.3}: max |Hess u(x) - Hess u(p)| = {:.4} over {} samples",
            prof.radii[i], prof.max_deviation[i], prof.n_samples[i]
        );
    }

    let align = normal_alignment_profile(
        &out.field,
        ring_point,
        &[0.2, 0.1, 0.05],
        64,
        0.05,
        &sampler,
    )?;
    println!("normal alignment with the ring tangent (should sink):");
    for i in 0..align.radii.len() {
        println!(
            "  r = {:.3}: max |P_axis(n)| = {:.4} over {} samples",
            align.radii[i], align.max_axis_alignment[i], align.n_samples[i]
        );
    }
    Ok(())
}
