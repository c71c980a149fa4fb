//! Line-oriented run configuration: `key = value` with dotted keys.
//!
//! Unknown keys are errors, `#` starts a comment, later assignments win, and
//! `--set key=value` overrides stack on top of the file. The resolved
//! configuration is echoed verbatim into every report and manifest.

use std::path::{Path, PathBuf};

use crate::analyze::AnalyzerParams;
use crate::error::{Error, Result};
use crate::evolve::EvolveParams;
use crate::field::GridSpec;
use crate::scenarios::{Shape, ScenarioParams};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: String,
    pub scenario_params: ScenarioParams,
    /// Node count along the first axis; the other axes match the spacing.
    pub grid_n: usize,
    pub evolve: EvolveParams,
    pub analyzer: AnalyzerParams,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "circle".into(),
            scenario_params: ScenarioParams::default(),
            grid_n: 256,
            evolve: EvolveParams::default(),
            analyzer: AnalyzerParams::default(),
            out_dir: PathBuf::from("out"),
            quiet: false,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got '{value}'")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected an integer, got '{value}'")))
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn assign(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "scenario.name" => self.scenario = v.to_string(),
            "scenario.radius" => self.scenario_params.radius = parse_f64(key, v)?,
            "scenario.a" => self.scenario_params.ellipse_a = parse_f64(key, v)?,
            "scenario.b" => self.scenario_params.ellipse_b = parse_f64(key, v)?,
            "scenario.R0" => self.scenario_params.major_radius = parse_f64(key, v)?,
            "scenario.r0" => self.scenario_params.tube_radius = parse_f64(key, v)?,
            "scenario.bulb_r" => self.scenario_params.bulb_r = parse_f64(key, v)?,
            "scenario.neck_r" => self.scenario_params.neck_r = parse_f64(key, v)?,
            "scenario.sep" => self.scenario_params.sep = parse_f64(key, v)?,
            "grid.n" => self.grid_n = parse_usize(key, v)?,
            "evolve.epsilon" => {
                self.evolve.epsilon = if v == "auto" {
                    None
                } else {
                    Some(parse_f64(key, v)?)
                }
            }
            "evolve.cfl" => self.evolve.cfl = parse_f64(key, v)?,
            "evolve.t_max" => self.evolve.t_max = parse_f64(key, v)?,
            "evolve.record_stride" => self.evolve.record_stride = parse_usize(key, v)?,
            "evolve.reinit_stride" => self.evolve.reinit_stride = parse_usize(key, v)?,
            "analyze.tau" => {
                self.analyzer.tau = if v == "auto" {
                    None
                } else {
                    Some(parse_f64(key, v)?)
                }
            }
            "analyze.tol" => self.analyzer.tol = parse_f64(key, v)?,
            "analyze.time_tol" => self.analyzer.time_tol_frac = parse_f64(key, v)?,
            "analyze.angle_tol" => self.analyzer.angle_tol_deg = parse_f64(key, v)?,
            "analyze.grad_floor" => self.analyzer.grad_floor = parse_f64(key, v)?,
            "analyze.cone_c" => self.analyzer.cone_aperture = parse_f64(key, v)?,
            "analyze.radii" => {
                let radii: Result<Vec<f64>> =
                    v.split(',').map(|s| parse_f64(key, s.trim())).collect();
                self.analyzer.radii = radii?;
            }
            "analyze.samples" => self.analyzer.samples_per_radius = parse_usize(key, v)?,
            "analyze.esearch" => self.analyzer.epsilon_search_frac = parse_f64(key, v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            "seed" => {
                self.analyzer.seed = v
                    .parse()
                    .map_err(|_| Error::Config(format!("seed: expected an integer, got '{v}'")))?
            }
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn parse_text(&mut self, text: &str) -> Result<()> {
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    ln + 1
                )));
            };
            self.assign(key.trim(), value)?;
        }
        Ok(())
    }

    /// Load defaults, then a config file (optional), then `--set` overrides.
    pub fn resolve(path: Option<&Path>, sets: &[String]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            cfg.parse_text(&text)?;
        }
        for s in sets {
            let Some((key, value)) = s.split_once('=') else {
                return Err(Error::Config(format!(
                    "--set expects key=value, got '{s}'"
                )));
            };
            cfg.assign(key.trim(), value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 8 {
            return Err(Error::Config("grid.n must be at least 8".into()));
        }
        self.evolve
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.analyzer.validate()?;
        Ok(())
    }

    pub fn shape(&self) -> Result<Shape> {
        crate::scenarios::make(&self.scenario, &self.scenario_params)
    }

    /// Grid for the scenario's bounding box: `grid.n` nodes along the first
    /// axis, the second axis extended to cover its box at the same spacing.
    pub fn grid(&self, shape: &Shape) -> Result<GridSpec> {
        let bbox = shape.bbox;
        let extent0 = bbox[0][1] - bbox[0][0];
        if !(extent0 > 0.0) {
            return Err(Error::Config("degenerate scenario bounding box".into()));
        }
        let h = extent0 / (self.grid_n - 1) as f64;
        let extent1 = bbox[1][1] - bbox[1][0];
        let counts1 = (extent1 / h).ceil() as usize + 1;
        GridSpec::new(
            2,
            &[self.grid_n, counts1],
            &[bbox[0][0], bbox[1][0]],
            h,
            shape.axisymmetric(),
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    /// Canonical echo of every resolved key, one per line.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("scenario.name", self.scenario.clone());
        put("scenario.radius", format!("{}", self.scenario_params.radius));
        put("scenario.a", format!("{}", self.scenario_params.ellipse_a));
        put("scenario.b", format!("{}", self.scenario_params.ellipse_b));
        put("scenario.R0", format!("{}", self.scenario_params.major_radius));
        put("scenario.r0", format!("{}", self.scenario_params.tube_radius));
        put("scenario.bulb_r", format!("{}", self.scenario_params.bulb_r));
        put("scenario.neck_r", format!("{}", self.scenario_params.neck_r));
        put("scenario.sep", format!("{}", self.scenario_params.sep));
        put("grid.n", format!("{}", self.grid_n));
        put(
            "evolve.epsilon",
            self.evolve
                .epsilon
                .map_or("auto".into(), |e| format!("{e}")),
        );
        put("evolve.cfl", format!("{}", self.evolve.cfl));
        put("evolve.t_max", format!("{}", self.evolve.t_max));
        put(
            "evolve.record_stride",
            format!("{}", self.evolve.record_stride),
        );
        put(
            "evolve.reinit_stride",
            format!("{}", self.evolve.reinit_stride),
        );
        put(
            "analyze.tau",
            self.analyzer.tau.map_or("auto".into(), |t| format!("{t}")),
        );
        put("analyze.tol", format!("{}", self.analyzer.tol));
        put("analyze.time_tol", format!("{}", self.analyzer.time_tol_frac));
        put(
            "analyze.angle_tol",
            format!("{}", self.analyzer.angle_tol_deg),
        );
        put(
            "analyze.grad_floor",
            format!("{}", self.analyzer.grad_floor),
        );
        put(
            "analyze.cone_c",
            format!("{}", self.analyzer.cone_aperture),
        );
        put(
            "analyze.radii",
            self.analyzer
                .radii
                .iter()
                .map(|r| format!("{r}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "analyze.samples",
            format!("{}", self.analyzer.samples_per_radius),
        );
        put(
            "analyze.esearch",
            format!("{}", self.analyzer.epsilon_search_frac),
        );
        put("output.dir", self.out_dir.display().to_string());
        put("seed", format!("{}", self.analyzer.seed));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn parse_and_override() {
        let mut cfg = RunConfig::default();
        cfg.parse_text(
            "# comment\nscenario.name = torus\nscenario.R0 = 2.0  # trailing\n\ngrid.n = 128\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, "torus");
        assert_eq!(cfg.scenario_params.major_radius, 2.0);
        assert_eq!(cfg.grid_n, 128);
        cfg.assign("analyze.radii", "0.3, 0.2, 0.1").unwrap();
        assert_eq!(cfg.analyzer.radii, vec![0.3, 0.2, 0.1]);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut cfg = RunConfig::default();
        assert!(matches!(
            cfg.assign("scenario.nme", "circle"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn tiny_grid_rejected() {
        let cfg = {
            let mut c = RunConfig::default();
            c.grid_n = 4;
            c
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn echo_roundtrips() {
        let mut cfg = RunConfig::default();
        cfg.assign("scenario.name", "dumbbell").unwrap();
        cfg.assign("seed", "7").unwrap();
        let echo = cfg.echo();
        let mut back = RunConfig::default();
        back.parse_text(&echo).unwrap();
        assert_eq!(back.scenario, "dumbbell");
        assert_eq!(back.analyzer.seed, 7);
        assert_eq!(back.echo(), echo);
    }

    #[test]
    fn grid_covers_scenario_box() {
        let cfg = {
            let mut c = RunConfig::default();
            c.assign("scenario.name", "sphere").unwrap();
            c.grid_n = 64;
            c
        };
        let shape = cfg.shape().unwrap();
        let spec = cfg.grid(&shape).unwrap();
        assert!(spec.axisymmetric);
        assert_eq!(spec.counts[0], 64);
        // rho axis covers [0, 1.5] at the same spacing
        assert!(spec.extent(1) >= 1.5 - 1e-12);
        assert_eq!(spec.origin[1], 0.0);
    }
}
