//! Scalar quantizers, Lloyd-Max design and distortion measures.

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_from_neg_infinity, integrate_to_infinity, Tolerance};

/// N cells with N+1 ascending boundaries and one level per cell.
///
/// Cell `i` is `(c_i, c_{i+1}]`; inputs below `c_0` or above `c_N`
/// saturate to the first or last level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    boundaries: Vec<f64>,
    levels: Vec<f64>,
}

impl Quantizer {
    pub fn new(boundaries: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || boundaries.len() != levels.len() + 1 {
            return Err(Error::domain(format!(
                "need N >= 1 levels and N+1 boundaries, got {} levels and {} boundaries",
                levels.len(),
                boundaries.len()
            )));
        }
        if boundaries.iter().chain(&levels).any(|v| !v.is_finite()) {
            return Err(Error::domain("quantizer boundaries and levels must be finite"));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("quantizer boundaries must be strictly increasing"));
        }
        for (i, &b) in levels.iter().enumerate() {
            if !(boundaries[i] < b && b <= boundaries[i + 1]) {
                return Err(Error::domain(format!(
                    "level {b} lies outside its cell ({}, {}]",
                    boundaries[i],
                    boundaries[i + 1]
                )));
            }
        }
        Ok(Quantizer { boundaries, levels })
    }

    /// `n` equal cells on `[lo, hi]` with midpoint levels.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("uniform quantizer needs at least one level"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::domain(format!("uniform quantizer needs lo < hi, got [{lo}, {hi}]")));
        }
        let step = (hi - lo) / n as f64;
        let mut boundaries: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
        boundaries[n] = hi;
        let levels = boundaries.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Quantizer::new(boundaries, levels)
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.boundaries[0], self.boundaries[self.levels.len()])
    }

    /// Cell sizes `c_{i+1} − c_i`.
    pub fn steps(&self) -> Vec<f64> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Index of the cell holding `x`; boundary points go to the lower cell.
    pub fn cell(&self, x: f64) -> usize {
        let interior = &self.boundaries[1..self.levels.len()];
        interior.partition_point(|&c| c < x)
    }

    pub fn quantize(&self, x: f64) -> f64 {
        self.levels[self.cell(x)]
    }

    pub fn quantize_slice(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.quantize(x)).collect()
    }
}

/// Σ|x − Q(x)|² / Σ|x|².
pub fn nmse(signal: &[f64], q: &Quantizer) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::domain("nmse needs a non-empty signal"));
    }
    let (err, energy) = signal.iter().fold((0.0, 0.0), |(e, p), &x| {
        let d = x - q.quantize(x);
        (e + d * d, p + x * x)
    });
    ratio(err, energy)
}

pub(crate) fn ratio(err: f64, energy: f64) -> Result<f64> {
    if energy == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(err / energy)
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// E|X − Q(X)|^r under `d`, by adaptive quadrature cell by cell including
/// the saturated tails.
pub fn expected_distortion(q: &Quantizer, d: &Distribution, r: u32) -> Result<f64> {
    if r == 0 {
        return Err(Error::domain("distortion order r must be >= 1"));
    }
    let tol = Tolerance { abs: 1e-18, rel: 1e-11, max_intervals: 2000 };
    let (s_lo, s_hi) = d.support();
    let integrand = |b: f64| move |u: f64| (u - b).abs().powi(r as i32) * d.pdf(u);
    let mut total = 0.0;
    let n = q.len();
    for i in 0..n {
        let b = q.levels[i];
        let a0 = q.boundaries[i].max(s_lo);
        let a1 = q.boundaries[i + 1].min(s_hi);
        if a1 <= a0 {
            continue;
        }
        // Split at the level so |u − b|^r is smooth on each piece.
        if a0 < b && b < a1 {
            total += integrate(integrand(b), a0, b, tol)?;
            total += integrate(integrand(b), b, a1, tol)?;
        } else {
            total += integrate(integrand(b), a0, a1, tol)?;
        }
    }
    let (lo, hi) = q.range();
    if s_lo < lo {
        let f = integrand(q.levels[0]);
        total += if s_lo.is_finite() { integrate(f, s_lo, lo, tol)? } else { integrate_from_neg_infinity(f, lo, tol)? };
    }
    if s_hi > hi {
        let f = integrand(q.levels[n - 1]);
        total += if s_hi.is_finite() { integrate(f, hi, s_hi, tol)? } else { integrate_to_infinity(f, hi, tol)? };
    }
    Ok(total)
}

/// Distortion upper bound `(E_Y^{1/r} + W_r)^r` for a mismatched input.
pub fn mismatch_bound(e_y: f64, w: f64, r: u32) -> Result<f64> {
    if !(e_y >= 0.0 && w >= 0.0) || r == 0 {
        return Err(Error::domain("mismatch bound needs E_Y >= 0, W >= 0, r >= 1"));
    }
    let r = r as f64;
    Ok((e_y.powf(1.0 / r) + w).powf(r))
}

/// The Gaussian-input bound for the N-level uniform quantizer on [−½, ½],
/// in closed form. The quantity `σ² + 1/12 − σ/√π` plays the
/// role of the squared W₂ distance between N(0, σ) and U[−½, ½].
pub fn gaussian_uniform_bound(sigma: f64, n: usize) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) || n == 0 {
        return Err(Error::domain("gaussian_uniform_bound needs sigma > 0 and N >= 1"));
    }
    let w2_sq = sigma * sigma + 1.0 / 12.0 - sigma / std::f64::consts::PI.sqrt();
    // Minimum over sigma is 1/12 − 1/(4π) > 0.
    if w2_sq < 0.0 {
        return Err(Error::domain(format!("negative squared distance {w2_sq}")));
    }
    let n = n as f64;
    Ok(w2_sq + 1.0 / (12.0 * n * n) + 2.0 * w2_sq.sqrt() / (n * 12f64.sqrt()))
}

/// Inverse-quantile compander `F_target⁻¹(F_source(x))`.
///
/// Works from the upper tail when `x` is above the source median so that
/// far-tail inputs keep full precision.
pub fn compander(x: f64, source: &Distribution, target: &Distribution) -> f64 {
    const FLOOR: f64 = f64::MIN_POSITIVE;
    let upper = source.sf(x);
    if upper < 0.5 {
        target.quantile_upper(upper.max(FLOOR)).expect("tail probability clamped into (0,1)")
    } else {
        let lower = source.cdf(x).clamp(FLOOR, 0.5);
        target.quantile(lower).expect("probability clamped into (0,1)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LloydMaxConfig {
    pub levels: usize,
    pub lo: f64,
    pub hi: f64,
    /// Stop once no level moves by more than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl LloydMaxConfig {
    pub fn new(levels: usize, lo: f64, hi: f64) -> Self {
        LloydMaxConfig { levels, lo, hi, tol: 1e-10, max_iter: 500_000 }
    }
}

#[derive(Debug, Clone)]
pub struct LloydMax {
    pub quantizer: Quantizer,
    pub iterations: usize,
    pub converged: bool,
    /// Expected squared error after each iteration (index 0 is the start point).
    pub distortion: Vec<f64>,
}

// 10-point Gauss–Legendre on [−1, 1].
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

/// Mean squared error of the given cells and levels; end cells extend to ±∞.
struct CellDistortion<'a> {
    d: &'a Distribution,
    support: (f64, f64),
    kinks: Vec<f64>,
    /// Widest piece integrated by a single rule.
    piece: f64,
}

impl<'a> CellDistortion<'a> {
    fn new(d: &'a Distribution) -> Self {
        let support = d.support();
        let kinks = [support.0, support.1].into_iter().filter(|v| v.is_finite()).collect();
        let iqr = d.quantile_unchecked(0.75) - d.quantile_unchecked(0.25);
        CellDistortion { d, support, kinks, piece: 0.1 * iqr }
    }

    fn gauss_legendre(&self, a: f64, b: f64, level: f64) -> f64 {
        let pieces = ((b - a) / self.piece).ceil().clamp(1.0, 256.0) as usize;
        let width = (b - a) / pieces as f64;
        let mut total = 0.0;
        for k in 0..pieces {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == pieces { b } else { lo + width };
            let c = 0.5 * (lo + hi);
            let h = 0.5 * (hi - lo);
            let mut s = 0.0;
            for (x, w) in GL_X.iter().zip(GL_W) {
                for u in [c - h * x, c + h * x] {
                    let e = u - level;
                    s += w * e * e * self.d.pdf(u);
                }
            }
            total += s * h;
        }
        total
    }

    /// ∫ₐᵇ (u − level)² f(u) du for finite a < b, split at support edges.
    fn finite(&self, a: f64, b: f64, level: f64) -> f64 {
        let a = a.max(self.support.0);
        let b = b.min(self.support.1);
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let mut left = a;
        for &k in &self.kinks {
            if left < k && k < b {
                total += self.gauss_legendre(left, k, level);
                left = k;
            }
        }
        total + self.gauss_legendre(left, b, level)
    }

    fn total(&self, boundaries: &[f64], levels: &[f64]) -> f64 {
        let n = levels.len();
        let mut sum = 0.0;
        for i in 0..n {
            sum += self.finite(boundaries[i], boundaries[i + 1], levels[i]);
        }
        let tol = Tolerance { abs: 1e-20, rel: 1e-13, max_intervals: 2000 };
        let (lo, hi) = (boundaries[0], boundaries[n]);
        if self.support.0 < lo {
            let b = levels[0];
            sum += integrate_from_neg_infinity(|u| (u - b) * (u - b) * self.d.pdf(u), lo, tol).unwrap_or(f64::NAN);
        }
        if self.support.1 > hi {
            let b = levels[n - 1];
            sum += integrate_to_infinity(|u| (u - b) * (u - b) * self.d.pdf(u), hi, tol).unwrap_or(f64::NAN);
        }
        sum
    }
}

/// Alternate centroid and midpoint updates from the uniform quantizer on
/// `[lo, hi]`. The outer boundaries stay fixed; probability mass beyond them
/// belongs to the end cells.
pub fn lloyd_max(d: &Distribution, cfg: &LloydMaxConfig) -> Result<LloydMax> {
    let start = Quantizer::uniform(cfg.levels, cfg.lo, cfg.hi)?;
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::domain("lloyd_max tolerance must be > 0"));
    }
    let n = cfg.levels;
    let mut c = start.boundaries;
    let mut b = start.levels;
    let mut mass = vec![0.0; n];
    let cells = CellDistortion::new(d);
    let mut history = vec![cells.total(&c, &b)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let left = if i == 0 { f64::NEG_INFINITY } else { c[i] };
            let right = if i == n - 1 { f64::INFINITY } else { c[i + 1] };
            let p = d.interval_mass(left, right);
            mass[i] = p;
            let next = if p > 0.0 {
                let centroid = d.partial_expectation(left, right) / p;
                // Keep the level inside (c_i, c_{i+1}]; exact when the
                // centroid already lies there.
                centroid.min(c[i + 1]).max(c[i].next_up())
            } else {
                0.5 * (c[i] + c[i + 1])
            };
            moved = moved.max((next - b[i]).abs());
            b[i] = next;
        }
        for i in 1..n {
            c[i] = 0.5 * (b[i - 1] + b[i]);
        }
        history.push(cells.total(&c, &b));
        if moved < cfg.tol {
            converged = true;
            break;
        }
    }

    respread_empty_runs(&mut c, &mut b, &mass);
    let quantizer = Quantizer::new(c, b)?;
    Ok(LloydMax { quantizer, iterations, converged, distortion: history })
}

/// Runs of zero-mass cells are re-spaced uniformly over their joint span.
fn respread_empty_runs(c: &mut [f64], b: &mut [f64], mass: &[f64]) {
    let n = b.len();
    let mut i = 0;
    while i < n {
        if mass[i] > 0.0 {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && mass[i] == 0.0 {
            i += 1;
        }
        let (lo, hi) = (c[start], c[i]);
        let run = (i - start) as f64;
        for k in start..i {
            let j = (k - start) as f64;
            if k > start {
                c[k] = lo + (hi - lo) * j / run;
            }
            b[k] = lo + (hi - lo) * (j + 0.5) / run;
        }
    }
}
