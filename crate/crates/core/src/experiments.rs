//! Experiment drivers behind the command-line tool. Each returns plain data;
//! the `write_*` functions turn it into CSV and JSON files.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::fold::{theta_grid, FoldParams, FoldedDistribution};
use crate::metric::{w1_folded_to_uniform, w2_closed_form, w2_exponential_tabulated, wr_between};
use crate::montecarlo;
use crate::quant::{expected_distortion, lloyd_max, ratio, to_db, LloydMax, LloydMaxConfig, Quantizer};
use crate::signal::{run_pipeline, PipelineConfig};
use crate::VERSION;

/// Reference NMSE values (dB) for the mismatch table: label, distribution,
/// Gaussian-designed quantizer, uniform quantizer. Exponential parameters
/// are scales, so `p = 2` has rate 1/2.
pub fn table2_rows() -> Vec<(&'static str, Distribution, f64, f64)> {
    let n = |m, s| Distribution::normal(m, s).unwrap();
    let u = |a, b| Distribution::uniform(a, b).unwrap();
    let e = |p: f64| Distribution::exponential(1.0 / p).unwrap();
    let l = |m, s| Distribution::lognormal(m, s).unwrap();
    vec![
        ("Normal mu=0 sigma=1", n(0.0, 1.0), -43.9, -38.6),
        ("Normal mu=0 sigma=0.5", n(0.0, 0.5), -39.8, -32.2),
        ("Normal mu=0 sigma=2", n(0.0, 2.0), -23.3, -26.2),
        ("Uniform a=-5 b=5", u(-5.0, 5.0), -20.0, -48.1),
        ("Uniform a=-3 b=3", u(-3.0, 3.0), -44.8, -43.6),
        ("Uniform a=-1 b=1", u(-1.0, 1.0), -41.0, -33.7),
        ("Exponential p=1", e(1.0), -31.4, -21.8),
        ("Exponential p=0.5", e(0.5), -38.1, -34.5),
        ("Exponential p=2", e(2.0), -10.0, -10.9),
        ("Lognormal mu=0 sigma=1", l(0.0, 1.0), -6.08, -6.43),
        ("Lognormal mu=0 sigma=0.5", l(0.0, 0.5), -30.7, -32.5),
        ("Lognormal mu=0 sigma=2", l(0.0, 2.0), -0.09, -0.09),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Row {
    pub label: String,
    pub distribution: Distribution,
    pub qn_db: f64,
    pub qn_reference_db: f64,
    pub qu_db: f64,
    pub qu_reference_db: f64,
    /// Expected NMSE from quadrature, when the tail integrals converge.
    pub qn_analytic_db: Option<f64>,
    pub qu_analytic_db: Option<f64>,
}

impl Table2Row {
    pub fn qn_delta(&self) -> f64 {
        self.qn_db - self.qn_reference_db
    }

    pub fn qu_delta(&self) -> f64 {
        self.qu_db - self.qu_reference_db
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2 {
    pub rows: Vec<Table2Row>,
    pub lloyd_iterations: usize,
    pub lloyd_converged: bool,
    #[serde(skip)]
    pub gaussian_quantizer: Quantizer,
    #[serde(skip)]
    pub uniform_quantizer: Quantizer,
}

fn lloyd_config(cfg: &ExperimentConfig) -> LloydMaxConfig {
    LloydMaxConfig {
        levels: cfg.levels,
        lo: cfg.range.0,
        hi: cfg.range.1,
        tol: cfg.lloyd_tol,
        max_iter: cfg.lloyd_max_iter,
    }
}

/// Lloyd-Max design for the standard normal on the configured range.
pub fn gaussian_quantizer(cfg: &ExperimentConfig) -> Result<LloydMax> {
    lloyd_max(&Distribution::normal(0.0, 1.0)?, &lloyd_config(cfg))
}

fn row_seed(seed: u64, row: usize) -> u64 {
    seed.wrapping_add((row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Monte Carlo NMSE in dB; both quantizers see the same draws.
fn measured_db(d: &Distribution, seed: u64, n: usize, qn: &Quantizer, qu: &Quantizer) -> Result<(f64, f64)> {
    let (en, energy) = montecarlo::error_energy(d, seed, n, |x| qn.quantize(x));
    let (eu, _) = montecarlo::error_energy(d, seed, n, |x| qu.quantize(x));
    Ok((to_db(ratio(en, energy)?), to_db(ratio(eu, energy)?)))
}

fn analytic_db(q: &Quantizer, d: &Distribution) -> Option<f64> {
    let e = expected_distortion(q, d, 2).ok()?;
    let v = to_db(e / d.second_moment());
    v.is_finite().then_some(v)
}

pub fn table2(cfg: &ExperimentConfig) -> Result<Table2> {
    cfg.validate()?;
    let design = gaussian_quantizer(cfg)?;
    let qn = design.quantizer.clone();
    let qu = Quantizer::uniform(cfg.levels, cfg.range.0, cfg.range.1)?;
    let rows = table2_rows()
        .into_iter()
        .enumerate()
        .map(|(i, (label, d, pn, pu))| {
            let (qn_db, qu_db) = measured_db(&d, row_seed(cfg.seed, i), cfg.n_samples, &qn, &qu)?;
            Ok(Table2Row {
                label: label.to_string(),
                distribution: d,
                qn_db,
                qn_reference_db: pn,
                qu_db,
                qu_reference_db: pu,
                qn_analytic_db: analytic_db(&qn, &d),
                qu_analytic_db: analytic_db(&qu, &d),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table2 {
        rows,
        lloyd_iterations: design.iterations,
        lloyd_converged: design.converged,
        gaussian_quantizer: qn,
        uniform_quantizer: qu,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    pub a: f64,
    pub theta: f64,
    pub density: f64,
}

/// Folded density of `base` on the θ-grid for every gain in the a-grid.
pub fn fold_pdf(cfg: &ExperimentConfig, base: &Distribution) -> Result<Vec<DensityPoint>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.a_grid.len() * cfg.theta_points);
    for &a in &cfg.a_grid {
        let folded = FoldedDistribution::new(*base, FoldParams::new(a, cfg.lambda)?, cfg.series_tol)?;
        out.extend(theta_grid(cfg.lambda, cfg.theta_points).map(|theta| DensityPoint {
            a,
            theta,
            density: folded.pdf(theta),
        }));
    }
    Ok(out)
}

/// W₁ from folded Gaussians to the uniform law; rows follow the parameter
/// grid, columns the a-grid.
#[derive(Debug, Clone, Serialize)]
pub struct Heatmaps {
    pub a_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub mu_grid: Vec<f64>,
    /// μ = 0, one row per σ.
    pub by_sigma: Vec<Vec<f64>>,
    /// σ = 1, one row per μ.
    pub by_mu: Vec<Vec<f64>>,
}

fn heatmap_rows(cfg: &ExperimentConfig, bases: Vec<Distribution>) -> Result<Vec<Vec<f64>>> {
    bases
        .par_iter()
        .map(|base| {
            cfg.a_grid
                .iter()
                .map(|&a| w1_folded_to_uniform(base, &FoldParams::new(a, cfg.lambda)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

pub fn w1_heatmap(cfg: &ExperimentConfig) -> Result<Heatmaps> {
    cfg.validate()?;
    let by_sigma = cfg.sigma_grid.iter().map(|&s| Distribution::normal(0.0, s)).collect::<Result<Vec<_>>>()?;
    let by_mu = cfg.mu_grid.iter().map(|&m| Distribution::normal(m, 1.0)).collect::<Result<Vec<_>>>()?;
    Ok(Heatmaps {
        a_grid: cfg.a_grid.clone(),
        sigma_grid: cfg.sigma_grid.clone(),
        mu_grid: cfg.mu_grid.clone(),
        by_sigma: heatmap_rows(cfg, by_sigma)?,
        by_mu: heatmap_rows(cfg, by_mu)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub nmse_folded_db: Option<f64>,
    pub nmse_direct_db: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Some(Summary { mean, std: var.sqrt() })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    pub settings: PipelineConfig,
    pub folded_db: Option<Summary>,
    pub direct_db: Option<Summary>,
    pub success_rate: f64,
    /// Seeds where the folded path had the lower NMSE.
    pub folded_wins: usize,
    pub seeds: Vec<SeedOutcome>,
}

/// The pipeline settings derived from the experiment config; the Nyquist
/// period is one time unit.
pub fn pipeline_config(cfg: &ExperimentConfig) -> Result<PipelineConfig> {
    Ok(PipelineConfig {
        fold: FoldParams::new(cfg.pipeline_gain, cfg.lambda)?,
        levels: cfg.levels,
        oversampling: cfg.oversampling,
        order: cfg.unfold_order,
        bandwidth: PI,
        anchors: cfg.anchors,
        coefficients: Distribution::normal(0.0, cfg.coefficient_std)?,
    })
}

/// Run the pipeline for `pipeline_seeds` consecutive seeds. Per-seed
/// failures are recorded, not propagated.
pub fn pipeline(cfg: &ExperimentConfig) -> Result<PipelineSummary> {
    cfg.validate()?;
    let settings = pipeline_config(cfg)?;
    let seeds: Vec<SeedOutcome> = (0..cfg.pipeline_seeds as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            match run_pipeline(&settings, seed) {
                Ok(r) => SeedOutcome {
                    seed,
                    nmse_folded_db: Some(to_db(r.nmse_folded)),
                    nmse_direct_db: Some(to_db(r.nmse_direct)),
                    error: None,
                },
                Err(e) => SeedOutcome { seed, nmse_folded_db: None, nmse_direct_db: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let ok: Vec<&SeedOutcome> = seeds.iter().filter(|s| s.error.is_none()).collect();
    let folded: Vec<f64> = ok.iter().filter_map(|s| s.nmse_folded_db).collect();
    let direct: Vec<f64> = ok.iter().filter_map(|s| s.nmse_direct_db).collect();
    let folded_wins = folded.iter().zip(&direct).filter(|(f, d)| f < d).count();
    Ok(PipelineSummary {
        settings,
        folded_db: Summary::of(&folded),
        direct_db: Summary::of(&direct),
        success_rate: ok.len() as f64 / seeds.len() as f64,
        folded_wins,
        seeds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WassersteinReport {
    pub x: Distribution,
    pub y: Distribution,
    pub order: u32,
    pub closed_form: Option<f64>,
    pub numeric: f64,
    pub abs_diff: Option<f64>,
    pub note: Option<String>,
}

/// W_r between two catalog laws, with the closed form when one exists.
pub fn wasserstein(x: &Distribution, y: &Distribution, order: u32) -> Result<WassersteinReport> {
    let numeric = wr_between(x, y, order)?;
    let closed_form = if order == 2 { w2_closed_form(x, y) } else { None };
    let note = match (x, y) {
        (Distribution::Exponential { rate: r1 }, Distribution::Exponential { rate: r2 }) if order == 2 => {
            Some(format!(
                "commonly tabulated as |1/p1 - 1/p2| = {}; the quantile integral gives sqrt(2) times that",
                w2_exponential_tabulated(*r1, *r2)
            ))
        }
        _ => None,
    };
    Ok(WassersteinReport {
        x: *x,
        y: *y,
        order,
        closed_form,
        numeric,
        abs_diff: closed_form.map(|c| (c - numeric).abs()),
        note,
    })
}

/// Lloyd-Max design for `d` on the configured range and level count.
pub fn lloyd(cfg: &ExperimentConfig, d: &Distribution) -> Result<LloydMax> {
    cfg.validate()?;
    lloyd_max(d, &lloyd_config(cfg))
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    config: &'a ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<&'a Distribution>,
    result: &'a T,
}

fn write_json<T: Serialize>(
    path: &Path,
    command: &str,
    cfg: &ExperimentConfig,
    base: Option<&Distribution>,
    result: &T,
) -> Result<()> {
    let env = Envelope { command, version: VERSION, config: cfg, base, result };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip text, in exponent form for very small or large magnitudes.
fn num(v: f64) -> String {
    let m = v.abs();
    if m != 0.0 && !(1e-4..1e15).contains(&m) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn db3(v: f64) -> String {
    format!("{v:.3}")
}

fn opt_db3(v: Option<f64>) -> String {
    v.map(db3).unwrap_or_default()
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(cfg.out_dir.join(name))
}

pub fn write_table2(cfg: &ExperimentConfig, t: &Table2) -> Result<Vec<PathBuf>> {
    let csv_path = out_path(cfg, "table2.csv")?;
    write_csv(
        &csv_path,
        &[
            "distribution",
            "qn_db",
            "qn_reference_db",
            "qn_delta_db",
            "qu_db",
            "qu_reference_db",
            "qu_delta_db",
            "qn_analytic_db",
            "qu_analytic_db",
        ],
        t.rows.iter().map(|r| {
            vec![
                r.label.clone(),
                db3(r.qn_db),
                db3(r.qn_reference_db),
                db3(r.qn_delta()),
                db3(r.qu_db),
                db3(r.qu_reference_db),
                db3(r.qu_delta()),
                opt_db3(r.qn_analytic_db),
                opt_db3(r.qu_analytic_db),
            ]
        }),
    )?;
    let json_path = out_path(cfg, "table2.json")?;
    write_json(&json_path, "table2", cfg, None, t)?;
    Ok(vec![csv_path, json_path])
}

pub fn write_fold_pdf(cfg: &ExperimentConfig, base: &Distribution, points: &[DensityPoint]) -> Result<Vec<PathBuf>> {
    let csv_path = out_path(cfg, "fold_pdf.csv")?;
    write_csv(
        &csv_path,
        &["a", "theta", "density"],
        points.iter().map(|p| vec![num(p.a), num(p.theta), num(p.density)]),
    )?;
    let json_path = out_path(cfg, "fold_pdf.json")?;
    let rows = cfg.a_grid.len();
    write_json(&json_path, "fold-pdf", cfg, Some(base), &serde_json::json!({ "rows": rows, "points": points.len() }))?;
    Ok(vec![csv_path, json_path])
}

fn grid_csv(path: &Path, name: &str, params: &[f64], a_grid: &[f64], values: &[Vec<f64>]) -> Result<()> {
    let mut header = vec![name.to_string()];
    header.extend(a_grid.iter().map(|a| format!("a={}", num(*a))));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        path,
        &header,
        params.iter().zip(values).map(|(p, row)| std::iter::once(num(*p)).chain(row.iter().map(|v| num(*v))).collect()),
    )
}

pub fn write_w1_heatmap(cfg: &ExperimentConfig, h: &Heatmaps) -> Result<Vec<PathBuf>> {
    let sigma_path = out_path(cfg, "w1_sigma_a.csv")?;
    grid_csv(&sigma_path, "sigma", &h.sigma_grid, &h.a_grid, &h.by_sigma)?;
    let mu_path = out_path(cfg, "w1_mu_a.csv")?;
    grid_csv(&mu_path, "mu", &h.mu_grid, &h.a_grid, &h.by_mu)?;
    let json_path = out_path(cfg, "w1_heatmap.json")?;
    write_json(&json_path, "w1-heatmap", cfg, None, h)?;
    Ok(vec![sigma_path, mu_path, json_path])
}

pub fn write_pipeline(cfg: &ExperimentConfig, s: &PipelineSummary) -> Result<Vec<PathBuf>> {
    let path = out_path(cfg, "pipeline.json")?;
    write_json(&path, "pipeline", cfg, None, s)?;
    Ok(vec![path])
}

pub fn write_wasserstein(cfg: &ExperimentConfig, w: &WassersteinReport) -> Result<Vec<PathBuf>> {
    let path = out_path(cfg, "wasserstein.json")?;
    write_json(&path, "wasserstein", cfg, None, w)?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct LloydSummary {
    iterations: usize,
    converged: bool,
    final_distortion: Option<f64>,
    boundaries: Vec<f64>,
    levels: Vec<f64>,
}

pub fn write_lloyd(cfg: &ExperimentConfig, base: &Distribution, l: &LloydMax) -> Result<Vec<PathBuf>> {
    let q = &l.quantizer;
    let c = q.boundaries();
    let csv_path = out_path(cfg, "lloyd.csv")?;
    write_csv(
        &csv_path,
        &["cell", "lower", "upper", "level"],
        q.levels().iter().enumerate().map(|(i, b)| vec![i.to_string(), num(c[i]), num(c[i + 1]), num(*b)]),
    )?;
    let json_path = out_path(cfg, "lloyd.json")?;
    let summary = LloydSummary {
        iterations: l.iterations,
        converged: l.converged,
        final_distortion: l.distortion.last().copied(),
        boundaries: c.to_vec(),
        levels: q.levels().to_vec(),
    };
    write_json(&json_path, "lloyd", cfg, Some(base), &summary)?;
    Ok(vec![csv_path, json_path])
}
