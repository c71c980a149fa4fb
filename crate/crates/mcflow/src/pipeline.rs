//! End-to-end orchestration: sample, evolve, analyze, persist.
//!
//! Every run writes its resolved configuration, the arrival field (MCAF),
//! the singular-set report (JSON), profile tables (CSV), heatmaps (PGM), and
//! a manifest with content digests for all of them. A sweep that hits its
//! time cap still persists everything it produced, under a `.partial`
//! suffix.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::analyze::{analyze_field, SingularSetReport};
use crate::arrival::ArrivalField;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evolve::{evolve, DiagnosticsLog};
use crate::field::sample_implicit;
use crate::{mcaf, report};

#[derive(Debug, Clone, Default)]
pub struct StageTimings {
    pub sample_s: f64,
    pub evolve_s: f64,
    pub analyze_s: f64,
    pub write_s: f64,
}

pub struct RunOutput {
    pub field: ArrivalField,
    pub diagnostics: Option<DiagnosticsLog>,
    pub report: Option<SingularSetReport>,
    pub config_echo: String,
    pub timings: StageTimings,
}

/// sample -> evolve -> analyze. A partial sweep skips analysis and leaves
/// `report` empty; the caller decides how loudly to fail.
pub fn execute_run(cfg: &RunConfig) -> Result<RunOutput> {
    let mut timings = StageTimings::default();
    let shape = cfg.shape()?;
    if shape.thin_warning && !cfg.quiet {
        eprintln!(
            "warning: torus violates the thinness heuristic r0 < R0/3; no expected outcome attached"
        );
    }
    let spec = cfg.grid(&shape)?;

    let t0 = Instant::now();
    let v0 = sample_implicit(&shape, &spec)?;
    timings.sample_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let out = evolve(&v0, &cfg.evolve)?;
    timings.evolve_s = t1.elapsed().as_secs_f64();

    let report = if out.field.partial {
        None
    } else {
        let t2 = Instant::now();
        let r = analyze_field(&out.field, &cfg.analyzer)?;
        timings.analyze_s = t2.elapsed().as_secs_f64();
        Some(r)
    };

    Ok(RunOutput {
        field: out.field,
        diagnostics: Some(out.diagnostics),
        report,
        config_echo: cfg.echo(),
        timings,
    })
}

/// Analyze a stored arrival field with the config's analyzer settings.
pub fn execute_analyze(field_path: &Path, cfg: &RunConfig) -> Result<RunOutput> {
    let mut timings = StageTimings::default();
    let field = mcaf::read_arrival(field_path)?;
    if field.partial {
        return Err(Error::PartialField);
    }
    let t = Instant::now();
    let report = analyze_field(&field, &cfg.analyzer)?;
    timings.analyze_s = t.elapsed().as_secs_f64();
    Ok(RunOutput {
        field,
        diagnostics: None,
        report: Some(report),
        config_echo: cfg.echo(),
        timings,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

struct ArtifactWriter {
    dir: PathBuf,
    suffix: &'static str,
    files: Vec<(String, usize, String)>, // name, bytes, sha256
}

impl ArtifactWriter {
    fn new(dir: &Path, partial: bool) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            suffix: if partial { ".partial" } else { "" },
            files: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let full = format!("{name}{}", self.suffix);
        fs::write(self.dir.join(&full), bytes)?;
        self.files.push((full, bytes.len(), sha256_hex(bytes)));
        Ok(())
    }

    fn manifest(&mut self, config_echo: &str, timings: &StageTimings) -> Result<()> {
        let mut s = String::from("{\n");
        s.push_str(&format!(
            "  \"version\": \"{}\",\n",
            env!("CARGO_PKG_VERSION")
        ));
        s.push_str(&format!(
            "  \"timings\": {{\"sample_s\": {}, \"evolve_s\": {}, \"analyze_s\": {}, \"write_s\": {}}},\n",
            report::fmt_f64(timings.sample_s),
            report::fmt_f64(timings.evolve_s),
            report::fmt_f64(timings.analyze_s),
            report::fmt_f64(timings.write_s),
        ));
        s.push_str("  \"files\": [\n");
        for (i, (name, bytes, digest)) in self.files.iter().enumerate() {
            s.push_str(&format!(
                "    {{\"path\": \"{name}\", \"bytes\": {bytes}, \"sha256\": \"{digest}\"}}{}\n",
                if i + 1 < self.files.len() { "," } else { "" }
            ));
        }
        s.push_str("  ],\n");
        let escaped: String = config_echo
            .replace('\\', "\\\\")
            .replace('"', "\\\"")
            .replace('\n', "\\n");
        s.push_str(&format!("  \"config\": \"{escaped}\"\n"));
        s.push_str("}\n");
        let full = format!("manifest.json{}", self.suffix);
        fs::write(self.dir.join(&full), s.as_bytes())?;
        Ok(())
    }
}

/// Persist a run's artifacts and the manifest into `dir`.
pub fn write_artifacts(out: &mut RunOutput, dir: &Path) -> Result<()> {
    let t = Instant::now();
    let mut w = ArtifactWriter::new(dir, out.field.partial)?;
    w.put("config.txt", out.config_echo.as_bytes())?;
    w.put("u.mcaf", &mcaf::encode_arrival(&out.field))?;
    if let Some(log) = &out.diagnostics {
        w.put("diagnostics.csv", report::diagnostics_csv(log).as_bytes())?;
    }
    if let Some(r) = &out.report {
        w.put(
            "report.json",
            report::report_json(r, &out.config_echo).as_bytes(),
        )?;
        if let Some(p) = &r.cone_profile {
            w.put("cone_continuity.csv", report::cone_profile_csv(p).as_bytes())?;
        }
        if let Some(p) = &r.alignment_profile {
            w.put(
                "normal_alignment.csv",
                report::alignment_profile_csv(p).as_bytes(),
            )?;
        }
        if let Some(p) = &r.rescaled {
            w.put("rescaled.csv", report::rescaled_profile_csv(p).as_bytes())?;
        }
        let floor = r.params.grad_floor;
        w.put(
            "residuals.csv",
            report::residual_csv(&out.field, floor).as_bytes(),
        )?;
        let comments = vec![format!("arrival field, verdict {}", r.verdict)];
        w.put("u_heatmap.pgm", &report::arrival_heatmap(&out.field, &comments))?;
        w.put(
            "residual_heatmap.pgm",
            &report::residual_heatmap(&out.field, floor, &comments),
        )?;
    } else {
        // partial run: persist the field image without analysis products
        let comments = vec![String::from("arrival field (partial sweep)")];
        w.put("u_heatmap.pgm", &report::arrival_heatmap(&out.field, &comments))?;
    }
    out.timings.write_s = t.elapsed().as_secs_f64();
    w.manifest(&out.config_echo, &out.timings)?;
    Ok(())
}

/// Dump a stored field as CSV + heatmap without analysis.
pub fn execute_export(field_path: &Path, dir: &Path) -> Result<()> {
    let content = mcaf::read(field_path)?;
    fs::create_dir_all(dir)?;
    let (spec, values, label) = match &content {
        mcaf::McafContent::Arrival(u) => (&u.spec, &u.values, "arrival"),
        mcaf::McafContent::LevelSet(f) => (&f.spec, &f.values, "levelset"),
    };
    let dim = spec.dim;
    let mut csv = String::from(if dim == 2 {
        "index,x,y,value\n"
    } else {
        "index,x,y,z,value\n"
    });
    for lin in 0..values.len() {
        let p = spec.position(spec.unravel(lin));
        let coords: Vec<String> = (0..dim).map(|a| report::fmt_f64(p[a])).collect();
        csv.push_str(&format!(
            "{},{},{}\n",
            lin,
            coords.join(","),
            report::fmt_f64(values[lin])
        ));
    }
    fs::write(dir.join("field.csv"), csv.as_bytes())?;
    if dim == 2 {
        let (n0, n1) = (spec.counts[0], spec.counts[1]);
        let img = report::pgm_heatmap(
            n1,
            n0,
            |row, col| values[row * n1 + col],
            &[format!("{label} field export")],
        );
        fs::write(dir.join("field.pgm"), img)?;
    }
    Ok(())
}

/// run subcommand: returns the process exit code.
pub fn cmd_run(cfg: &RunConfig) -> i32 {
    match execute_run(cfg) {
        Ok(mut out) => {
            let partial = out.field.partial;
            if let Err(e) = write_artifacts(&mut out, &cfg.out_dir.clone()) {
                eprintln!("run: write stage failed: {e}");
                return e.exit_code();
            }
            if partial {
                eprintln!(
                    "run: sweep incomplete at t_max = {}; partial artifacts in {}",
                    cfg.evolve.t_max,
                    cfg.out_dir.display()
                );
                return 4;
            }
            if !cfg.quiet {
                if let Some(r) = &out.report {
                    println!(
                        "verdict {} with {} critical points, T = {:.6}",
                        r.verdict,
                        r.points.len(),
                        r.extinction_time
                    );
                }
                println!("artifacts in {}", cfg.out_dir.display());
            }
            0
        }
        Err(e) => {
            eprintln!("run: {e}");
            e.exit_code()
        }
    }
}

pub fn cmd_analyze(field_path: &Path, cfg: &RunConfig) -> i32 {
    match execute_analyze(field_path, cfg) {
        Ok(mut out) => {
            if let Err(e) = write_artifacts(&mut out, &cfg.out_dir.clone()) {
                eprintln!("analyze: write stage failed: {e}");
                return e.exit_code();
            }
            if !cfg.quiet {
                if let Some(r) = &out.report {
                    println!("verdict {}", r.verdict);
                }
                println!("artifacts in {}", cfg.out_dir.display());
            }
            0
        }
        Err(e) => {
            eprintln!("analyze: {e}");
            e.exit_code()
        }
    }
}

pub fn cmd_export(field_path: &Path, dir: &Path, quiet: bool) -> i32 {
    match execute_export(field_path, dir) {
        Ok(()) => {
            if !quiet {
                println!("exported to {}", dir.display());
            }
            0
        }
        Err(e) => {
            eprintln!("export: {e}");
            e.exit_code()
        }
    }
}
