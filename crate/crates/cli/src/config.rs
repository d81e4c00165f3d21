//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Command-line flags are applied on top through [`RunConfig::set`],
//! so a file and a flag go through the same validation.

use std::path::{Path, PathBuf};

use drumshape_core::features::parse_grid;
use drumshape_core::optimizer::OptimizerConfig;
use drumshape_core::{parse_norm, Norm};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "DRUMSHAPE_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    fn parse(s: &str) -> Option<Format> {
        match s {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub norm: String,
    /// Support angles for the optimizer.
    pub k: usize,
    /// Optimizer grid levels.
    pub grid_levels: usize,
    /// Extrapolation levels for λ.
    pub levels: usize,
    pub seed: u64,
    pub starts: usize,
    pub max_iters: usize,
    pub tol_f: f64,
    pub step0: f64,
    pub base_cells: usize,
    /// Directions printed by `eval-norm` and used for Wulff shapes.
    pub directions: usize,
    pub pairs: usize,
    pub gradient_tol: f64,
    pub scaling_tol: f64,
    /// Rectangle family parameter.
    pub n: f64,
    pub a_grid: String,
    pub shape: Option<String>,
    pub dump_eigenfunction: bool,
    pub formats: Vec<Format>,
    pub timings: bool,
    /// Not echoed, so manifests written to different places compare equal.
    #[serde(skip)]
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        RunConfig {
            norm: "p:2".into(),
            k: opt.k_angles,
            grid_levels: opt.grid_levels,
            levels: 3,
            seed: opt.seed,
            starts: opt.n_starts,
            max_iters: opt.max_iters,
            tol_f: opt.tol_f,
            step0: opt.step0,
            base_cells: opt.base_cells,
            directions: 256,
            pairs: 100,
            gradient_tol: 0.05,
            scaling_tol: 0.002,
            n: 3.0,
            a_grid: "0.5:0.25:4".into(),
            shape: None,
            dump_eigenfunction: false,
            formats: vec![Format::Json, Format::Csv, Format::Svg],
            timings: false,
            out: std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| CliError::Config(format!("bad value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Defaults, then the file (if any); call [`RunConfig::set`] for overrides
    /// and [`RunConfig::validate`] once done.
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            cfg.apply_text(&text)?;
        }
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {}", i + 1, e.detail())))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "norm" => self.norm = value.to_string(),
            "k" => self.k = parse_value(key, value)?,
            "grid_levels" => self.grid_levels = parse_value(key, value)?,
            "levels" => self.levels = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "starts" => self.starts = parse_value(key, value)?,
            "max_iters" => self.max_iters = parse_value(key, value)?,
            "tol_f" => self.tol_f = parse_value(key, value)?,
            "step0" => self.step0 = parse_value(key, value)?,
            "base_cells" => self.base_cells = parse_value(key, value)?,
            "directions" => self.directions = parse_value(key, value)?,
            "pairs" => self.pairs = parse_value(key, value)?,
            "gradient_tol" => self.gradient_tol = parse_value(key, value)?,
            "scaling_tol" => self.scaling_tol = parse_value(key, value)?,
            "n" => self.n = parse_value(key, value)?,
            "a_grid" => self.a_grid = value.to_string(),
            "shape" => self.shape = (!value.is_empty()).then(|| value.to_string()),
            "dump_eigenfunction" => self.dump_eigenfunction = parse_value(key, value)?,
            "timings" => self.timings = parse_value(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "formats" => {
                let mut formats = Vec::new();
                for f in value.split(',').map(str::trim).filter(|f| !f.is_empty()) {
                    let f = Format::parse(f).ok_or_else(|| CliError::Config(format!("unknown format `{f}`")))?;
                    if !formats.contains(&f) {
                        formats.push(f);
                    }
                }
                self.formats = formats;
            }
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.norm()?;
        self.optimizer().validate()?;
        parse_grid(&self.a_grid)?;
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.levels < 2 {
            return bad("levels must be at least 2");
        }
        if self.directions < 8 {
            return bad("directions must be at least 8");
        }
        if !(self.gradient_tol > 0.0) || !(self.scaling_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.n >= 1.0) || !self.n.is_finite() {
            return bad("n must be a finite number >= 1");
        }
        Ok(())
    }

    pub fn norm(&self) -> Result<Norm> {
        Ok(parse_norm(&self.norm)?)
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            k_angles: self.k,
            grid_levels: self.grid_levels,
            max_iters: self.max_iters,
            step0: self.step0,
            tol_f: self.tol_f,
            n_starts: self.starts,
            seed: self.seed,
            base_cells: self.base_cells,
            final_levels: self.levels,
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}
