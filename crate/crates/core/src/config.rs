//! Resolved settings for the experiment commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FOLDQUANT_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub levels: usize,
    pub range: (f64, f64),
    pub lambda: f64,
    pub a_grid: Vec<f64>,
    /// σ values of the μ = 0 heatmap.
    pub sigma_grid: Vec<f64>,
    /// μ values of the σ = 1 heatmap.
    pub mu_grid: Vec<f64>,
    /// θ points per row of the folded-density dump.
    pub theta_points: usize,
    /// Tail mass allowed when truncating folded series.
    pub series_tol: f64,
    pub lloyd_tol: f64,
    pub lloyd_max_iter: usize,
    pub pipeline_seeds: usize,
    pub pipeline_gain: f64,
    pub oversampling: usize,
    pub unfold_order: usize,
    pub anchors: usize,
    pub coefficient_std: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 20_190_531,
            n_samples: 1_000_000,
            levels: 256,
            range: (-5.0, 5.0),
            lambda: 1.0,
            a_grid: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            sigma_grid: vec![0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0],
            mu_grid: vec![-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0],
            theta_points: 201,
            series_tol: 1e-13,
            lloyd_tol: 1e-10,
            lloyd_max_iter: 500_000,
            pipeline_seeds: 20,
            pipeline_gain: 4.0,
            oversampling: 16,
            unfold_order: 2,
            anchors: 256,
            coefficient_std: 2.0,
            out_dir: std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
        }
    }
}

impl ExperimentConfig {
    /// Apply one `key = value` setting. List values are comma separated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "seed" => self.seed = parse(key, value)?,
            "n" | "n_samples" => self.n_samples = parse(key, value)?,
            "levels" => self.levels = parse(key, value)?,
            "range" => {
                let v: Vec<f64> = parse_list(key, value)?;
                if v.len() != 2 {
                    return Err(Error::Config(format!("range needs two values, got {value:?}")));
                }
                self.range = (v[0], v[1]);
            }
            "lambda" => self.lambda = parse(key, value)?,
            "a_grid" => self.a_grid = parse_list(key, value)?,
            "sigma_grid" => self.sigma_grid = parse_list(key, value)?,
            "mu_grid" => self.mu_grid = parse_list(key, value)?,
            "theta_points" => self.theta_points = parse(key, value)?,
            "series_tol" => self.series_tol = parse(key, value)?,
            "lloyd_tol" => self.lloyd_tol = parse(key, value)?,
            "lloyd_max_iter" => self.lloyd_max_iter = parse(key, value)?,
            "pipeline_seeds" => self.pipeline_seeds = parse(key, value)?,
            "pipeline_gain" => self.pipeline_gain = parse(key, value)?,
            "oversampling" => self.oversampling = parse(key, value)?,
            "unfold_order" => self.unfold_order = parse(key, value)?,
            "anchors" => self.anchors = parse(key, value)?,
            "coefficient_std" => self.coefficient_std = parse(key, value)?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Apply a flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_samples", self.n_samples),
            ("levels", self.levels),
            ("theta_points", self.theta_points),
            ("lloyd_max_iter", self.lloyd_max_iter),
            ("pipeline_seeds", self.pipeline_seeds),
            ("oversampling", self.oversampling),
            ("unfold_order", self.unfold_order),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        if self.anchors < 2 {
            return Err(Error::Config("anchors must be >= 2".into()));
        }
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("range must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        let positive = [
            ("lambda", self.lambda),
            ("series_tol", self.series_tol),
            ("lloyd_tol", self.lloyd_tol),
            ("pipeline_gain", self.pipeline_gain),
            ("coefficient_std", self.coefficient_std),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, grid) in [("a_grid", &self.a_grid), ("sigma_grid", &self.sigma_grid), ("mu_grid", &self.mu_grid)] {
            if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a non-empty list of finite values")));
            }
        }
        if self.a_grid.iter().chain(&self.sigma_grid).any(|&v| v <= 0.0) {
            return Err(Error::Config("a_grid and sigma_grid entries must be > 0".into()));
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.levels, 256);
        assert_eq!(cfg.range, (-5.0, 5.0));
    }

    #[test]
    fn text_overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("# comment\nseed = 9\nrange = -2, 2\na-grid = 1 2 3  # trailing\n\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.range, (-2.0, 2.0));
        assert_eq!(cfg.a_grid, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn bad_input_is_a_config_error() {
        let mut cfg = ExperimentConfig::default();
        assert!(matches!(cfg.apply_text("nope = 1"), Err(Error::Config(_))));
        assert!(matches!(cfg.apply_text("seed"), Err(Error::Config(_))));
        assert!(matches!(cfg.set("levels", "many"), Err(Error::Config(_))));
        cfg.set("levels", "0").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = ExperimentConfig::default();
        cfg.set("range", "3 1").unwrap();
        assert!(cfg.validate().is_err());
    }
}
