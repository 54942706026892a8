//! Scale-and-modulo folding and the law of the folded variable.
//!
//! For `M(x) = (a·x + λ) mod 2λ − λ` the folded variable lives on `[−λ, λ)`.
//! Its CDF and density are periodized sums of the base CDF/density; this
//! module evaluates them with a certified truncation, plus closed forms for
//! the Gaussian, exponential and uniform families.

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::special::std_normal_pdf;

/// Gain `a` and folding half-range `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldParams {
    gain: f64,
    half_range: f64,
}

impl FoldParams {
    pub fn new(gain: f64, half_range: f64) -> Result<Self> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::domain(format!("fold gain must be finite and > 0, got {gain}")));
        }
        if !(half_range.is_finite() && half_range > 0.0) {
            return Err(Error::domain(format!("fold half-range must be finite and > 0, got {half_range}")));
        }
        Ok(FoldParams { gain, half_range })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    pub fn fold(&self, x: f64) -> f64 {
        fold(x, self)
    }

    /// Index `m` of the period containing `x`: `a·x = 2mλ + fold(x)`.
    pub fn period_index(&self, x: f64) -> f64 {
        ((self.gain * x + self.half_range) / (2.0 * self.half_range)).floor()
    }
}

/// `(a·x + λ) mod 2λ − λ`, always in `[−λ, λ)`.
pub fn fold(x: f64, p: &FoldParams) -> f64 {
    wrap(p.gain * x, p.half_range)
}

/// Centered modulo reduction of `v` into `[−λ, λ)`.
pub fn wrap(v: f64, lambda: f64) -> f64 {
    if (-lambda..lambda).contains(&v) {
        return v;
    }
    let period = 2.0 * lambda;
    let mut r = (v + lambda).rem_euclid(period);
    // rem_euclid can round up to the modulus for tiny negative inputs.
    if r >= period {
        r = 0.0;
    }
    r - lambda
}

/// Number of sigmas covered by the initial truncation guess.
const SIGMA_COVER: f64 = 10.0;
const MAX_TERMS: i64 = 1 << 40;

/// The law of `M_{a,λ}(X)` for a catalog base distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldedDistribution {
    base: Distribution,
    params: FoldParams,
    terms: i64,
    tol: f64,
}

impl FoldedDistribution {
    /// Choose the truncation half-width `M` so that the omitted tail mass is
    /// at most `tol`.
    pub fn new(base: Distribution, params: FoldParams, tol: f64) -> Result<Self> {
        let a = params.gain;
        let lambda = params.half_range;
        let (mean, sd) = base.moments();
        let guess = ((a * (mean.abs() + SIGMA_COVER * sd) + lambda) / (2.0 * lambda)).ceil();
        let mut terms = (guess as i64).clamp(1, MAX_TERMS);
        loop {
            let tail = Self::tail_mass(&base, &params, terms);
            if tol > 0.0 && tail <= tol {
                return Ok(FoldedDistribution { base, params, terms, tol });
            }
            if terms >= MAX_TERMS || tol <= 0.0 || !tol.is_finite() {
                return Err(Error::Truncation { tol, tail, terms });
            }
            terms *= 2;
        }
    }

    fn tail_mass(base: &Distribution, p: &FoldParams, terms: i64) -> f64 {
        let scale = p.half_range / p.gain;
        let m = terms as f64;
        base.cdf((-2.0 * m - 1.0) * scale) + base.sf((2.0 * m - 1.0) * scale)
    }

    pub fn base(&self) -> &Distribution {
        &self.base
    }

    pub fn params(&self) -> &FoldParams {
        &self.params
    }

    /// Truncation half-width `M`; the sums run over `m = −M..=M`.
    pub fn terms(&self) -> i64 {
        self.terms
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Σₘ P((2m−1)λ/a < X ≤ (2mλ+θ)/a), clamped to [0, 1].
    ///
    /// Values of θ outside `[−λ, λ)` follow the CDF's extension (0 below, 1 at or above λ).
    pub fn cdf(&self, theta: f64) -> f64 {
        let lambda = self.params.half_range;
        if theta < -lambda {
            return 0.0;
        }
        if theta >= lambda {
            return 1.0;
        }
        let a = self.params.gain;
        let (lo, hi) = self.base.support();
        let mut sum = 0.0;
        for m in -self.terms..=self.terms {
            let m = m as f64;
            let left = (2.0 * m - 1.0) * lambda / a;
            let right = (2.0 * m * lambda + theta) / a;
            if right <= lo || left >= hi {
                continue;
            }
            sum += self.base.interval_mass(left, right);
        }
        sum.clamp(0.0, 1.0)
    }

    /// (1/a) Σₘ f_X((2mλ+θ)/a).
    pub fn pdf(&self, theta: f64) -> f64 {
        let lambda = self.params.half_range;
        if !(-lambda..lambda).contains(&theta) {
            return 0.0;
        }
        let a = self.params.gain;
        let mut sum = 0.0;
        for m in -self.terms..=self.terms {
            sum += self.base.pdf((2.0 * m as f64 * lambda + theta) / a);
        }
        sum / a
    }

    /// max over a grid of |f(θ) − 1/(2λ)|.
    pub fn max_uniform_deviation(&self, grid: usize) -> f64 {
        let lambda = self.params.half_range;
        theta_grid(lambda, grid).map(|t| (self.pdf(t) - 0.5 / lambda).abs()).fold(0.0, f64::max)
    }
}

/// `n` evenly spaced points on `[−λ, λ)`.
pub fn theta_grid(lambda: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = 2.0 * lambda / n as f64;
    (0..n).map(move |i| -lambda + i as f64 * step)
}

/// Folded Gaussian density, summed outward from the dominant period until
/// the terms stop contributing.
pub fn folded_pdf_gaussian(mean: f64, std_dev: f64, p: &FoldParams, theta: f64) -> Result<f64> {
    if !(std_dev > 0.0 && std_dev.is_finite()) {
        return Err(Error::domain(format!("std_dev must be > 0, got {std_dev}")));
    }
    let lambda = p.half_range;
    if !(-lambda..lambda).contains(&theta) {
        return Ok(0.0);
    }
    let a = p.gain;
    let scale = a * std_dev;
    let center = ((a * mean - theta) / (2.0 * lambda)).round();
    let term = |m: f64| std_normal_pdf((2.0 * m * lambda + theta - a * mean) / scale);
    let mut sum = term(center);
    for side in [-1.0, 1.0] {
        let mut k = 1.0;
        loop {
            let t = term(center + side * k);
            sum += t;
            // Terms decrease monotonically away from the peak.
            if t <= sum * 1e-18 {
                break;
            }
            k += 1.0;
        }
    }
    Ok(sum / scale)
}

/// F(θ) − (θ + λ)/(2λ) for a folded Gaussian, from the Fourier series of
/// the periodized density:
/// Σₖ ρₖ/(πk) [sin(πk(θ − aμ)/λ) + sin(πk(λ + aμ)/λ)], ρₖ = exp(−(πkaσ/λ)²/2).
///
/// Converges fast when aσ/λ is not small and has no cancellation against
/// the uniform CDF, so tiny deviations keep their relative accuracy.
pub fn folded_gaussian_cdf_deviation(mean: f64, std_dev: f64, p: &FoldParams, theta: f64) -> Result<f64> {
    if !(std_dev > 0.0 && std_dev.is_finite()) {
        return Err(Error::domain(format!("std_dev must be > 0, got {std_dev}")));
    }
    let lambda = p.half_range;
    if !(-lambda..lambda).contains(&theta) {
        return Ok(0.0);
    }
    let width = std::f64::consts::PI * p.gain * std_dev / lambda;
    if width < 1e-2 {
        return Err(Error::domain("Fourier form needs a·σ/λ >= 0.01/π; use the series"));
    }
    // Phases reduced modulo one period (2 in units of λ).
    let u = ((theta - p.gain * mean) / lambda).rem_euclid(2.0);
    let v = ((lambda + p.gain * mean) / lambda).rem_euclid(2.0);
    let first = (-0.5 * width * width).exp();
    let mut sum = 0.0;
    let mut k = 1.0f64;
    loop {
        let rho = (-0.5 * (width * k).powi(2)).exp();
        if rho == 0.0 || rho < 1e-18 * first {
            break;
        }
        let pk = std::f64::consts::PI * k;
        sum += rho / pk * ((pk * u).sin() + (pk * v).sin());
        k += 1.0;
    }
    Ok(sum)
}

/// Folded exponential CDF in closed form, written with negative exponents only.
pub fn folded_cdf_exponential(rate: f64, p: &FoldParams, theta: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!("rate must be > 0, got {rate}")));
    }
    let lambda = p.half_range;
    if theta < -lambda {
        return Ok(0.0);
    }
    if theta >= lambda {
        return Ok(1.0);
    }
    let q = rate / p.gain;
    // (e^{qλ} − e^{−qθ}) / (e^{2qλ} − 1) = e^{−qλ}(1 − e^{−q(θ+λ)}) / (1 − e^{−2qλ})
    let wrapped = (-q * lambda).exp() * (-q * (theta + lambda)).exp_m1() / (-2.0 * q * lambda).exp_m1();
    Ok(if theta < 0.0 { wrapped } else { wrapped - (-q * theta).exp_m1() })
}

/// Folded uniform density, piecewise constant with period-index cases.
pub fn folded_pdf_uniform(lo: f64, hi: f64, p: &FoldParams, theta: f64) -> Result<f64> {
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
    }
    let lambda = p.half_range;
    if !(-lambda..lambda).contains(&theta) {
        return Ok(0.0);
    }
    let beta = 1.0 / (hi - lo);
    let a = p.gain;
    let m1 = p.period_index(lo);
    let m2 = p.period_index(hi);
    let lo_folded = fold(lo, p);
    let hi_folded = fold(hi, p);
    let indicator = |inside: bool| if inside { 1.0 } else { 0.0 };
    if m1 == m2 {
        Ok(beta / a * indicator(lo_folded <= theta && theta <= hi_folded))
    } else {
        let left = indicator(lo_folded <= theta && theta < lambda);
        let right = indicator(-lambda <= theta && theta <= hi_folded);
        Ok(beta / a * (left + right + m2 - m1 - 1.0))
    }
}
