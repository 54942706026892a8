//! The amplitude distributions used throughout the crate.
//!
//! Every family exposes exact pdf/cdf/quantile evaluation and draws samples
//! by inverse transform, so a sample stream depends only on the uniform
//! variates fed to [`Distribution::quantile`].

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Distribution {
    Normal { mean: f64, std_dev: f64 },
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Lognormal { mu: f64, sigma: f64 },
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {v}")))
    }
}

impl Distribution {
    pub fn normal(mean: f64, std_dev: f64) -> Result<Self> {
        finite("mean", mean)?;
        finite("std_dev", std_dev)?;
        if std_dev <= 0.0 {
            return Err(Error::domain(format!("normal std_dev must be > 0, got {std_dev}")));
        }
        Ok(Distribution::Normal { mean, std_dev })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        finite("lo", lo)?;
        finite("hi", hi)?;
        if lo >= hi {
            return Err(Error::domain(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Distribution::Uniform { lo, hi })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        finite("rate", rate)?;
        if rate <= 0.0 {
            return Err(Error::domain(format!("exponential rate must be > 0, got {rate}")));
        }
        Ok(Distribution::Exponential { rate })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        finite("mu", mu)?;
        finite("sigma", sigma)?;
        if sigma <= 0.0 {
            return Err(Error::domain(format!("lognormal sigma must be > 0, got {sigma}")));
        }
        Ok(Distribution::Lognormal { mu, sigma })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, std_dev } => std_normal_pdf((x - mean) / std_dev) / std_dev,
            Distribution::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Distribution::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Distribution::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_pdf((x.ln() - mu) / sigma) / (sigma * x)
                }
            }
        }
    }

    /// P(X ≤ x). Accepts ±∞.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, std_dev } => std_normal_cdf((x - mean) / std_dev),
            Distribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Distribution::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu) / sigma)
                }
            }
        }
    }

    /// P(X > x), computed without cancellation in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, std_dev } => std_normal_sf((x - mean) / std_dev),
            Distribution::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Distribution::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    std_normal_sf((x.ln() - mu) / sigma)
                }
            }
        }
    }

    /// F⁻¹(u) for u strictly inside (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0,1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, std_dev } => mean + std_dev * std_normal_quantile(u),
            Distribution::Uniform { lo, hi } => lo + (hi - lo) * u,
            Distribution::Exponential { rate } => -(-u).ln_1p() / rate,
            Distribution::Lognormal { mu, sigma } => (mu + sigma * std_normal_quantile(u)).exp(),
        }
    }

    /// F⁻¹(1 − s), accurate for small upper-tail probabilities `s`.
    pub fn quantile_upper(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!("tail probability must lie in (0,1), got {s}")));
        }
        Ok(self.quantile_upper_unchecked(s))
    }

    pub(crate) fn quantile_upper_unchecked(&self, s: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, std_dev } => mean - std_dev * std_normal_quantile(s),
            Distribution::Uniform { lo, hi } => hi - (hi - lo) * s,
            Distribution::Exponential { rate } => -s.ln() / rate,
            Distribution::Lognormal { mu, sigma } => (mu - sigma * std_normal_quantile(s)).exp(),
        }
    }

    /// Exact (mean, standard deviation).
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            Distribution::Normal { mean, std_dev } => (mean, std_dev),
            Distribution::Uniform { lo, hi } => ((lo + hi) / 2.0, (hi - lo) / 12f64.sqrt()),
            Distribution::Exponential { rate } => (1.0 / rate, 1.0 / rate),
            Distribution::Lognormal { mu, sigma } => {
                let s2 = sigma * sigma;
                let mean = (mu + s2 / 2.0).exp();
                (mean, mean * s2.exp_m1().sqrt())
            }
        }
    }

    /// E[X²].
    pub fn second_moment(&self) -> f64 {
        match *self {
            Distribution::Normal { mean, std_dev } => mean * mean + std_dev * std_dev,
            Distribution::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
            Distribution::Exponential { rate } => 2.0 / (rate * rate),
            Distribution::Lognormal { mu, sigma } => (2.0 * mu + 2.0 * sigma * sigma).exp(),
        }
    }

    /// Closure of the support, possibly infinite at either end.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Distribution::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Distribution::Uniform { lo, hi } => (lo, hi),
            Distribution::Exponential { .. } | Distribution::Lognormal { .. } => (0.0, f64::INFINITY),
        }
    }

    /// A finite interval outside of which each tail carries at most `tail` mass.
    ///
    /// Starts from mean ± 12 standard deviations and widens geometrically.
    pub fn effective_support(&self, tail: f64) -> (f64, f64) {
        let (lo_s, hi_s) = self.support();
        let (mean, sd) = self.moments();
        let mut lo = (mean - 12.0 * sd).max(lo_s);
        let mut hi = (mean + 12.0 * sd).min(hi_s);
        let mut step = 12.0 * sd;
        while self.cdf(lo) > tail {
            step *= 2.0;
            lo = (mean - step).max(lo_s);
        }
        let mut step = 12.0 * sd;
        while self.sf(hi) > tail {
            step *= 2.0;
            hi = (mean + step).min(hi_s);
        }
        (lo, hi)
    }

    /// P(a < X ≤ b) for a ≤ b, ends may be infinite.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        // Subtract survival functions when the whole interval sits above the median.
        let (mean, _) = self.moments();
        let m = match *self {
            Distribution::Lognormal { mu, .. } => mu.exp(),
            _ => mean,
        };
        let p = if a >= m { self.sf(a) - self.sf(b) } else { self.cdf(b) - self.cdf(a) };
        p.max(0.0)
    }

    /// E[X · 1{a < X ≤ b}] in closed form.
    pub fn partial_expectation(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match *self {
            Distribution::Normal { mean, std_dev } => {
                let za = (a - mean) / std_dev;
                let zb = (b - mean) / std_dev;
                mean * self.interval_mass(a, b) + std_dev * (std_normal_pdf(za) - std_normal_pdf(zb))
            }
            Distribution::Uniform { lo, hi } => {
                let a = a.max(lo);
                let b = b.min(hi);
                if b <= a {
                    0.0
                } else {
                    (b - a) * (a + b) / (2.0 * (hi - lo))
                }
            }
            Distribution::Exponential { rate } => {
                let a = a.max(0.0);
                if b <= a {
                    return 0.0;
                }
                let term = |x: f64| {
                    if x.is_infinite() {
                        0.0
                    } else {
                        (x + 1.0 / rate) * (-rate * x).exp()
                    }
                };
                term(a) - term(b)
            }
            Distribution::Lognormal { mu, sigma } => {
                let a = a.max(0.0);
                if b <= a {
                    return 0.0;
                }
                let shifted = Distribution::Normal { mean: mu + sigma * sigma, std_dev: sigma };
                (mu + sigma * sigma / 2.0).exp() * shifted.interval_mass(a.ln(), b.ln())
            }
        }
    }

    /// Draw `n` samples by inverse transform.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::domain("sample count must be at least 1"));
        }
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }

    /// A single inverse-transform draw.
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile_unchecked(open_unit(rng))
    }

    pub fn family(&self) -> &'static str {
        match self {
            Distribution::Normal { .. } => "normal",
            Distribution::Uniform { .. } => "uniform",
            Distribution::Exponential { .. } => "exponential",
            Distribution::Lognormal { .. } => "lognormal",
        }
    }

    /// Parse `family p1 [p2]` tokens, e.g. `["normal", "0", "1"]` or `["exp", "2"]`.
    pub fn parse_tokens(tokens: &[&str]) -> Result<Self> {
        let nums = tokens
            .iter()
            .skip(1)
            .map(|t| t.parse::<f64>().map_err(|_| Error::Config(format!("not a number: {t}"))))
            .collect::<Result<Vec<_>>>()?;
        let arity = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::Config(format!("{} expects {k} parameter(s), got {}", tokens[0], nums.len())))
            }
        };
        let family = tokens.first().map(|s| s.to_ascii_lowercase()).unwrap_or_default();
        let d = match family.as_str() {
            "normal" | "gaussian" | "n" => {
                arity(2)?;
                Distribution::normal(nums[0], nums[1])
            }
            "uniform" | "u" => {
                arity(2)?;
                Distribution::uniform(nums[0], nums[1])
            }
            "exponential" | "exp" => {
                arity(1)?;
                Distribution::exponential(nums[0])
            }
            "lognormal" | "lognorm" => {
                arity(2)?;
                Distribution::lognormal(nums[0], nums[1])
            }
            other => return Err(Error::Config(format!("unknown distribution family '{other}'"))),
        };
        d.map_err(|e| Error::Config(e.to_string()))
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Normal { mean, std_dev } => write!(f, "Normal({mean}, {std_dev})"),
            Distribution::Uniform { lo, hi } => write!(f, "Uniform({lo}, {hi})"),
            Distribution::Exponential { rate } => write!(f, "Exponential(rate={rate})"),
            Distribution::Lognormal { mu, sigma } => write!(f, "Lognormal({mu}, {sigma})"),
        }
    }
}

/// Uniform variate strictly inside (0, 1) built from 53 random bits.
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
