//! Bandlimited test signals, sampling, sinc reconstruction and unfolding of
//! modulo-folded sample sequences.

use std::f64::consts::PI;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::fold::{wrap, FoldParams};
use crate::quant::{ratio, Quantizer};

/// sin(πv)/(πv) with exact argument reduction, so it is exactly 1 at 0
/// and accurate near every integer.
pub fn sinc(v: f64) -> f64 {
    if v == 0.0 {
        return 1.0;
    }
    sin_pi(v) / (PI * v)
}

fn sin_pi(v: f64) -> f64 {
    let k = v.round();
    let r = v - k;
    let s = (PI * r).sin();
    if (k as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// x(t) = Σₖ cₖ · sinc(ω_M (t − k·T_N) / π) with Nyquist spacing T_N = π/ω_M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedSignal {
    bandwidth: f64,
    coefficients: Vec<f64>,
}

impl BandlimitedSignal {
    pub fn new(bandwidth: f64, coefficients: Vec<f64>) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::domain(format!("bandwidth must be > 0, got {bandwidth}")));
        }
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("need at least one finite coefficient"));
        }
        Ok(BandlimitedSignal { bandwidth, coefficients })
    }

    /// `anchors` coefficients drawn from `coefficients`.
    pub fn generate<R: RngCore + ?Sized>(
        bandwidth: f64,
        anchors: usize,
        coefficients: &Distribution,
        rng: &mut R,
    ) -> Result<Self> {
        BandlimitedSignal::new(bandwidth, coefficients.sample(rng, anchors)?)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn nyquist_period(&self) -> f64 {
        PI / self.bandwidth
    }

    /// Time span covered by the anchors.
    pub fn duration(&self) -> f64 {
        (self.coefficients.len() - 1) as f64 * self.nyquist_period()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        BandlimitedSignal {
            bandwidth: self.bandwidth,
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = t / self.nyquist_period();
        self.coefficients.iter().enumerate().map(|(k, c)| c * sinc(u - k as f64)).sum()
    }

    /// Samples `x(origin + n·period)` for `n < count`. Periods longer than
    /// the Nyquist period are rejected unless `allow_aliasing` is set.
    pub fn sample(&self, period: f64, origin: f64, count: usize, allow_aliasing: bool) -> Result<SampledSignal> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::domain(format!("sampling period must be > 0, got {period}")));
        }
        let nyquist = self.nyquist_period();
        if period > nyquist * (1.0 + 1e-12) && !allow_aliasing {
            return Err(Error::domain(format!("sampling period {period} exceeds the Nyquist period {nyquist}")));
        }
        let samples = (0..count).map(|n| self.eval(origin + n as f64 * period)).collect();
        SampledSignal::new(samples, period, origin)
    }

    /// The anchor window sampled `oversampling` times faster than Nyquist.
    pub fn sample_oversampled(&self, oversampling: usize) -> Result<SampledSignal> {
        if oversampling == 0 {
            return Err(Error::domain("oversampling factor must be >= 1"));
        }
        let count = (self.coefficients.len() - 1) * oversampling + 1;
        self.sample(self.nyquist_period() / oversampling as f64, 0.0, count, false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    samples: Vec<f64>,
    period: f64,
    origin: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, period: f64, origin: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("sampled signal must be non-empty"));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::domain(format!("sampling period must be > 0, got {period}")));
        }
        Ok(SampledSignal { samples, period, origin })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.origin + n as f64 * self.period
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledSignal {
        self.with_samples(self.samples.iter().map(|&x| f(x)).collect())
    }
}

impl SampledSignal {
    fn with_samples(&self, samples: Vec<f64>) -> SampledSignal {
        SampledSignal { samples, period: self.period, origin: self.origin }
    }
}

/// Truncated Shannon reconstruction at time `t`.
///
/// At the Nyquist rate (`period·ω_M = π`) this is the textbook
/// Σ x[n]·sin(ω_M(t−nT))/(ω_M(t−nT)). When oversampled, the kernel bandwidth
/// follows the sampling rate (π/T) instead of ω_M, which keeps the sum an
/// interpolation of the samples.
pub fn sinc_reconstruct(ss: &SampledSignal, bandwidth: f64, t: f64) -> f64 {
    let at_nyquist = ((ss.period * bandwidth) / PI - 1.0).abs() < 1e-12;
    let scale = if at_nyquist { bandwidth / PI } else { 1.0 / ss.period };
    let u = (t - ss.origin) * scale;
    let step = ss.period * scale;
    ss.samples.iter().enumerate().map(|(n, x)| x * sinc(u - n as f64 * step)).sum()
}

/// The Nyquist-rate formula applied verbatim at any sampling period. Only
/// an interpolation when `period·ω_M = π`.
pub fn sinc_reconstruct_fixed_bandwidth(ss: &SampledSignal, bandwidth: f64, t: f64) -> f64 {
    ss.samples.iter().enumerate().map(|(n, x)| x * sinc(bandwidth * (t - ss.time(n)) / PI)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnfoldConfig {
    pub half_range: f64,
    /// Order K of the finite differences.
    pub order: usize,
    /// Oversampling factor; enables the out-of-band consistency check when >= 2.
    pub oversampling: usize,
    /// Known bound on |x| in folded units. Without it, wrong counts that
    /// only add slow drift cannot be told apart from the signal.
    pub amplitude_bound: Option<f64>,
}

impl UnfoldConfig {
    pub fn new(half_range: f64, order: usize, oversampling: usize) -> Self {
        UnfoldConfig { half_range, order, oversampling, amplitude_bound: None }
    }
}

/// Forward differences applied `order` times.
pub fn difference(xs: &[f64], order: usize) -> Vec<f64> {
    let mut v = xs.to_vec();
    for _ in 0..order {
        v = v.windows(2).map(|w| w[1] - w[0]).collect();
    }
    v
}

/// Recover samples from their folded values using modulo-reduced K-th
/// differences.
///
/// The result equals the unfolded sequence up to a single global multiple of
/// 2λ; the first sample is taken as unfolded. Requires `|ΔᴷX| < λ` for the
/// true sequence (including any quantization noise).
///
/// Wrong counts are caught by a refolding check, an out-of-band residual
/// check (when `oversampling >= 2`) and the optional amplitude bound. At low
/// oversampling a wrong solution can itself look bandlimited, so detection
/// there is not guaranteed.
pub fn unfold(folded: &SampledSignal, cfg: &UnfoldConfig) -> Result<SampledSignal> {
    let lambda = cfg.half_range;
    let k = cfg.order;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain("half-range must be > 0"));
    }
    if !(1..=6).contains(&k) {
        return Err(Error::domain(format!("difference order must be in 1..=6, got {k}")));
    }
    let y = folded.samples();
    if y.len() <= k {
        return Err(Error::domain(format!("need more than {k} samples to unfold")));
    }
    if y.iter().any(|v| !(-lambda..=lambda).contains(v)) {
        return Err(Error::domain("folded samples must lie in [−λ, λ]"));
    }
    let period = 2.0 * lambda;

    // Δᴷ(counts) = −⌊(Δᴷy + λ)/2λ⌋, where x = y + 2λ·counts.
    let mut counts: Vec<i64> = difference(y, k).iter().map(|d| -((d + lambda) / period).floor() as i64).collect();
    // Anti-difference K times with zero initial conditions.
    for _ in 0..k {
        let mut acc = 0i64;
        let mut next = Vec::with_capacity(counts.len() + 1);
        next.push(0);
        for c in &counts {
            acc += c;
            next.push(acc);
        }
        counts = next;
    }

    // The zero initial conditions leave an integer polynomial of degree < K;
    // remove it by rounding least-squares coefficients, highest degree first.
    let mut x: Vec<f64> = y.iter().zip(&counts).map(|(v, c)| v + period * *c as f64).collect();
    for degree in (1..k).rev() {
        let coeffs = polyfit(&x, degree);
        // Leading monomial coefficient of C(n, degree) is 1/degree!.
        let fact: f64 = (1..=degree).map(|i| i as f64).product();
        let steps = (coeffs[degree] * fact / period).round();
        if steps != 0.0 {
            for (n, v) in x.iter_mut().enumerate() {
                *v -= period * steps * binomial(n as f64, degree);
            }
        }
    }

    check_folded_consistency(&x, y, lambda)?;
    if cfg.oversampling >= 2 {
        check_in_band(&x, cfg.oversampling, lambda)?;
    }
    if let Some(bound) = cfg.amplitude_bound {
        let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if hi - lo > 2.0 * bound {
            return Err(Error::Unfolding(format!(
                "recovered range {:.3} exceeds the amplitude bound 2·{bound}",
                hi - lo
            )));
        }
    }
    Ok(folded.with_samples(x))
}

fn binomial(n: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i as f64) / (i + 1) as f64)
}

/// Least-squares polynomial coefficients in the sample index n (ascending powers).
fn polyfit(x: &[f64], degree: usize) -> Vec<f64> {
    let m = degree + 1;
    let scale = (x.len().max(2) - 1) as f64;
    // Normal equations in s = n/scale for conditioning.
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    let mut powers = vec![0.0; 2 * m];
    for (n, &v) in x.iter().enumerate() {
        let s = n as f64 / scale;
        let mut p = 1.0;
        for slot in powers.iter_mut() {
            *slot = p;
            p *= s;
        }
        for i in 0..m {
            atb[i] += powers[i] * v;
            for j in 0..m {
                ata[i][j] += powers[i + j];
            }
        }
    }
    let coeffs = solve(ata, atb);
    coeffs.iter().enumerate().map(|(j, c)| c / scale.powi(j as i32)).collect()
}

/// Gaussian elimination with partial pivoting for the small normal equations.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (top, rest) = a.split_at_mut(col + 1);
        let p = &top[col];
        for (k, r) in rest.iter_mut().enumerate() {
            let f = r[col] / p[col];
            for (x, y) in r[col..].iter_mut().zip(&p[col..]) {
                *x -= f * y;
            }
            b[col + 1 + k] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|j| a[row][j] * x[j]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn check_folded_consistency(x: &[f64], y: &[f64], lambda: f64) -> Result<()> {
    let tol = 1e-9 * lambda.max(x.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    for (n, (&xv, &yv)) in x.iter().zip(y).enumerate() {
        let d = (wrap(xv, lambda) - yv).abs();
        if d > tol && (d - 2.0 * lambda).abs() > tol {
            return Err(Error::Unfolding(format!("sample {n} does not refold to its input")));
        }
    }
    Ok(())
}

/// A wrong fold count leaves a 2λ step or ramp in the recovered sequence,
/// which shows up outside the signal band. Low-pass with a Blackman-windowed
/// sinc and require the out-of-band residual to stay below λ/2.
fn check_in_band(x: &[f64], oversampling: usize, lambda: f64) -> Result<()> {
    let half = 8 * oversampling;
    if x.len() <= 2 * half + 1 {
        return Ok(());
    }
    let cutoff = 1.5 / (2.0 * oversampling as f64);
    let taps: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let m = i as f64 - half as f64;
            let w = 0.42 - 0.5 * (PI * i as f64 / half as f64).cos() + 0.08 * (2.0 * PI * i as f64 / half as f64).cos();
            2.0 * cutoff * sinc(2.0 * cutoff * m) * w
        })
        .collect();
    let gain: f64 = taps.iter().sum();
    for n in half..x.len() - half {
        let low: f64 = taps.iter().enumerate().map(|(i, t)| t * x[n + i - half]).sum::<f64>() / gain;
        if (x[n] - low).abs() > 0.5 * lambda {
            return Err(Error::Unfolding(format!(
                "out-of-band residual {:.3} at sample {n} indicates a wrong fold count",
                (x[n] - low).abs()
            )));
        }
    }
    Ok(())
}

/// Configuration of the fold → quantize → unfold experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub fold: FoldParams,
    pub levels: usize,
    pub oversampling: usize,
    pub order: usize,
    pub bandwidth: f64,
    pub anchors: usize,
    pub coefficients: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub truth: Vec<f64>,
    pub recovered: Vec<f64>,
    /// Global offset removed from the unfolded sequence, in folded units (a multiple of 2λ).
    pub global_offset: f64,
    pub nmse_folded: f64,
    pub nmse_direct: f64,
}

/// Generate a signal from `seed` and run [`pipeline`] on it.
pub fn run_pipeline(cfg: &PipelineConfig, seed: u64) -> Result<PipelineReport> {
    let mut rng = crate::montecarlo::substream(seed, 0);
    let signal = BandlimitedSignal::generate(cfg.bandwidth, cfg.anchors, &cfg.coefficients, &mut rng)?;
    pipeline(&signal, cfg)
}

/// Sample, fold, quantize on [−λ, λ), unfold, and de-scale; compare with
/// quantizing the raw samples on the same quantizer.
pub fn pipeline(signal: &BandlimitedSignal, cfg: &PipelineConfig) -> Result<PipelineReport> {
    let lambda = cfg.fold.half_range();
    let a = cfg.fold.gain();
    let truth = signal.sample_oversampled(cfg.oversampling)?;
    let q = Quantizer::uniform(cfg.levels, -lambda, lambda)?;
    let folded = truth.map(|x| q.quantize(cfg.fold.fold(x)));
    let x = truth.samples();
    // Recovery assumes the peak amplitude is known.
    let peak = a * x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let unfold_cfg =
        UnfoldConfig { amplitude_bound: Some(peak + lambda), ..UnfoldConfig::new(lambda, cfg.order, cfg.oversampling) };
    let unfolded = unfold(&folded, &unfold_cfg)?;

    let z = unfolded.samples();
    let mean_gap = z.iter().zip(x).map(|(zv, xv)| zv - a * xv).sum::<f64>() / x.len() as f64;
    let global_offset = 2.0 * lambda * (mean_gap / (2.0 * lambda)).round();
    let recovered: Vec<f64> = z.iter().map(|v| (v - global_offset) / a).collect();

    let energy: f64 = x.iter().map(|v| v * v).sum();
    let err_folded: f64 = x.iter().zip(&recovered).map(|(t, r)| (t - r) * (t - r)).sum();
    let err_direct: f64 = x.iter().map(|&t| (t - q.quantize(t)).powi(2)).sum();
    Ok(PipelineReport {
        truth: x.to_vec(),
        recovered,
        global_offset,
        nmse_folded: ratio(err_folded, energy)?,
        nmse_direct: ratio(err_direct, energy)?,
    })
}
