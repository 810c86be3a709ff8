//! Experiment configuration: a flat key-value file, flag overrides, and a
//! canonical serialization whose hash stamps every emitted artifact.

use std::fmt::Write as _;
use std::path::PathBuf;

use oscillab_core::io::{config_hash, fmt_float, parse_float};

/// Errors that must surface as exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// All tunables of a run. Serializes to `key = value` lines in a fixed key
/// order; parsing that text reproduces the struct exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Example name or `synthetic:<spec>` for the coefficient/solution pair.
    pub field: String,
    /// Ambient dimension for field construction.
    pub dimension: usize,
    /// Oscillation exponent.
    pub p: f64,
    /// Radius grid: `auto`, `dyadic:<base>:<kmin>:<kmax>`, or `list:v1,v2,…`.
    pub radii: String,
    /// `sup-over-centers` or `origin-only`.
    pub estimator: String,
    /// `product-polar`, `grid`, or `lowdisc`.
    pub quadrature: String,
    /// Per-ball node budget; 0 selects the automatic per-radius rule.
    pub quad_points: usize,
    pub seed: u64,
    /// Cells per box side for the finite-element grids (power of two).
    pub cells: usize,
    /// Conjugate-gradient relative tolerance.
    pub tol: f64,
    pub max_iterations: usize,
    /// Deepest cascade level.
    pub kmax: usize,
    /// Constant placed inside the weighted functional's exponential.
    pub c_value: f64,
    /// Candidate-constant grid for estimate fits.
    pub c_grid: Vec<f64>,
    /// Outer radius for functionals and estimate sweeps.
    pub big_r: f64,
    /// Modulus spec for the `dini` subcommand.
    pub modulus: String,
    /// Estimate selector for `report`: est1 | est2 | est3 | hrep.
    pub estimate: String,
    /// Number of dyadic scales `r = 4⁻¹ … 4⁻ᵈ` in estimate sweeps.
    pub depth: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            field: "prop-c1".into(),
            dimension: 2,
            p: 2.0,
            radii: "auto".into(),
            estimator: "sup-over-centers".into(),
            quadrature: "product-polar".into(),
            quad_points: 0,
            seed: 0,
            cells: 256,
            tol: 1e-10,
            max_iterations: 20_000,
            kmax: 5,
            c_value: 1.0,
            c_grid: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            big_r: 2.0,
            modulus: "powlog:1".into(),
            estimate: "est3".into(),
            depth: 6,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Canonical text form; the basis for the config hash and for files
    /// written with `--emit-config`-style tooling.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "field = {}", self.field);
        let _ = writeln!(s, "dimension = {}", self.dimension);
        let _ = writeln!(s, "p = {}", fmt_float(self.p));
        let _ = writeln!(s, "radii = {}", self.radii);
        let _ = writeln!(s, "estimator = {}", self.estimator);
        let _ = writeln!(s, "quadrature = {}", self.quadrature);
        let _ = writeln!(s, "quad-points = {}", self.quad_points);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "cells = {}", self.cells);
        let _ = writeln!(s, "tol = {}", fmt_float(self.tol));
        let _ = writeln!(s, "max-iterations = {}", self.max_iterations);
        let _ = writeln!(s, "kmax = {}", self.kmax);
        let _ = writeln!(s, "c-value = {}", fmt_float(self.c_value));
        let grid: Vec<String> = self.c_grid.iter().map(|&c| fmt_float(c)).collect();
        let _ = writeln!(s, "c-grid = {}", grid.join(","));
        let _ = writeln!(s, "big-r = {}", fmt_float(self.big_r));
        let _ = writeln!(s, "modulus = {}", self.modulus);
        let _ = writeln!(s, "estimate = {}", self.estimate);
        let _ = writeln!(s, "depth = {}", self.depth);
        let _ = writeln!(s, "out-dir = {}", self.out_dir.display());
        s
    }

    /// FNV hash of the canonical form, stamped into every CSV header.
    /// The output directory is excluded: the hash identifies the experiment
    /// parameters, not where the artifacts land, so reruns into different
    /// directories produce byte-identical data files.
    pub fn hash(&self) -> u64 {
        let kv: String = self
            .to_kv()
            .lines()
            .filter(|line| !line.starts_with("out-dir"))
            .map(|line| format!("{line}\n"))
            .collect();
        config_hash(&kv)
    }

    /// Parses `key = value` lines (`#` comments and blank lines ignored).
    /// Unknown keys are rejected so typos cannot silently fall back to
    /// defaults.
    pub fn from_kv(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            cfg.set(key, value)
                .map_err(|e| ConfigError(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    /// Applies one key; shared by the file parser and flag overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |what: &str| ConfigError(format!("key `{key}`: invalid {what} `{value}`"));
        match key {
            "field" => self.field = value.to_string(),
            "dimension" => self.dimension = value.parse().map_err(|_| bad("integer"))?,
            "p" => self.p = parse_float(value).map_err(|_| bad("number"))?,
            "radii" => self.radii = value.to_string(),
            "estimator" => {
                if !matches!(value, "sup-over-centers" | "origin-only") {
                    return Err(bad("estimator (sup-over-centers|origin-only)"));
                }
                self.estimator = value.to_string();
            }
            "quadrature" => {
                if !matches!(value, "product-polar" | "grid" | "lowdisc") {
                    return Err(bad("rule (product-polar|grid|lowdisc)"));
                }
                self.quadrature = value.to_string();
            }
            "quad-points" => self.quad_points = value.parse().map_err(|_| bad("integer"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
            "cells" => self.cells = value.parse().map_err(|_| bad("integer"))?,
            "tol" => self.tol = parse_float(value).map_err(|_| bad("number"))?,
            "max-iterations" => {
                self.max_iterations = value.parse().map_err(|_| bad("integer"))?
            }
            "kmax" => self.kmax = value.parse().map_err(|_| bad("integer"))?,
            "c-value" => self.c_value = parse_float(value).map_err(|_| bad("number"))?,
            "c-grid" => {
                let mut grid = Vec::new();
                for part in value.split(',') {
                    grid.push(parse_float(part.trim()).map_err(|_| bad("number list"))?);
                }
                if grid.is_empty() {
                    return Err(bad("number list"));
                }
                self.c_grid = grid;
            }
            "big-r" => self.big_r = parse_float(value).map_err(|_| bad("number"))?,
            "modulus" => self.modulus = value.to_string(),
            "estimate" => {
                if !matches!(value, "est1" | "est2" | "est3" | "hrep") {
                    return Err(bad("estimate (est1|est2|est3|hrep)"));
                }
                self.estimate = value.to_string();
            }
            "depth" => self.depth = value.parse().map_err(|_| bad("integer"))?,
            "out-dir" => self.out_dir = PathBuf::from(value),
            other => {
                return Err(ConfigError(format!("unknown configuration key `{other}`")));
            }
        }
        Ok(())
    }

    /// Expands the radii spec. `auto` resolves to `fallback`.
    pub fn radii_list(&self, fallback: &str) -> Result<Vec<f64>, ConfigError> {
        let spec = if self.radii == "auto" {
            fallback
        } else {
            self.radii.as_str()
        };
        parse_radii_spec(spec)
    }
}

/// `dyadic:<base>:<kmin>:<kmax>` → `base⁻ᵏ` for `k = kmin..=kmax`, or
/// `list:v1,v2,…` (strictly decreasing after parsing).
pub fn parse_radii_spec(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = |msg: String| ConfigError(format!("radii spec `{spec}`: {msg}"));
    if let Some(rest) = spec.strip_prefix("dyadic:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected dyadic:<base>:<kmin>:<kmax>".into()));
        }
        let base: f64 = parse_float(parts[0]).map_err(|_| bad("bad base".into()))?;
        let kmin: i32 = parts[1].parse().map_err(|_| bad("bad kmin".into()))?;
        let kmax: i32 = parts[2].parse().map_err(|_| bad("bad kmax".into()))?;
        if !(base > 1.0) || kmin > kmax || kmin < 0 {
            return Err(bad("need base > 1 and 0 <= kmin <= kmax".into()));
        }
        Ok((kmin..=kmax).map(|k| base.powi(-k)).collect())
    } else if let Some(rest) = spec.strip_prefix("list:") {
        let mut vals = Vec::new();
        for part in rest.split(',') {
            let v = parse_float(part.trim()).map_err(|_| bad(format!("bad entry `{part}`")))?;
            if !(v > 0.0) {
                return Err(bad(format!("radius {v} must be positive")));
            }
            vals.push(v);
        }
        if vals.is_empty() {
            return Err(bad("empty list".into()));
        }
        if vals.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("list must be strictly decreasing".into()));
        }
        Ok(vals)
    } else {
        Err(bad("expected dyadic:… or list:…".into()))
    }
}
