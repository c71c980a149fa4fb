//! Persistence round trip: write an arrival field as MCAF, read it back,
//! re-analyze, and confirm the report is byte-identical — sampling positions
//! come from the seed, so stored fields reproduce their reports exactly.
//!
//!     cargo run --release --example fields_on_disk

use mcflow::analyze::analyze_field;
use mcflow::config::RunConfig;
use mcflow::pipeline::execute_run;
use mcflow::report::report_json;
use mcflow::{mcaf, Error};

fn main() -> mcflow::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.scenario = "circle".into();
    cfg.grid_n = 96;
    cfg.quiet = true;

    let out = execute_run(&cfg)?;
    let dir = std::env::temp_dir().join("mcflow_fields_on_disk");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("u.mcaf");
    mcaf::write_arrival(&path, &out.field)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!("wrote {} ({bytes} bytes)", path.display());

    let back = mcaf::read_arrival(&path)?;
    assert_eq!(back.values, out.field.values, "bit-exact payload");

    let report_a = report_json(out.report.as_ref().unwrap(), &cfg.echo());
    let report_b = report_json(&analyze_field(&back, &cfg.analyzer)?, &cfg.echo());
    println!(
        "re-analysis byte-identical: {}",
        if report_a == report_b { "yes" } else { "NO" }
    );

    // the format police: an arrival consumer must reject level-set files
    let levelset = mcflow::ScalarField::from_fn(
        back.spec.clone(),
        mcflow::FieldLabel::LevelSet,
        |p| 1.0 - p[0].hypot(p[1]),
    );
    let ls_path = dir.join("v.mcaf");
    mcaf::write_levelset(&ls_path, &levelset)?;
    match mcaf::read_arrival(&ls_path) {
        Err(Error::Format(msg)) => println!("level-set file correctly rejected: {msg}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
