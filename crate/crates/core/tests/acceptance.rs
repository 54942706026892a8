//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use foldquant::config::ExperimentConfig;
use foldquant::dist::Distribution;
use foldquant::experiments;
use foldquant::fold::{
    folded_cdf_exponential, folded_pdf_gaussian, folded_pdf_uniform, theta_grid, wrap, FoldParams, FoldedDistribution,
};
use foldquant::metric::{w2_between, w2_exponential, w2_gaussian, w2_numeric, w2_uniform_exponential};
use foldquant::montecarlo;
use foldquant::quant::{expected_distortion, lloyd_max, mismatch_bound, LloydMaxConfig, Quantizer};
use foldquant::signal::{unfold, BandlimitedSignal, UnfoldConfig};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn fp(a: f64, lambda: f64) -> FoldParams {
    FoldParams::new(a, lambda).unwrap()
}

fn table2_reproduction() -> Outcome {
    let cfg = ExperimentConfig::default();
    let start = Instant::now();
    let t = experiments::table2(&cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let mut misses = Vec::new();
    for r in &t.rows {
        for (col, got, want) in [("Q_N", r.qn_db, r.qn_reference_db), ("Q_U", r.qu_db, r.qu_reference_db)] {
            let flag = if (got - want).abs() <= 1.0 { "ok" } else { "MISS" };
            println!(
                "    {:<26} {col} measured {got:>8.3}  ref {want:>7.2}  delta {:>+7.3}  {flag}",
                r.label,
                got - want
            );
            if flag == "MISS" {
                misses.push(format!("{}/{col}", r.label));
            }
        }
    }
    let cell = |label: &str, qn: bool| {
        let r = t.rows.iter().find(|r| r.label == label).unwrap();
        if qn {
            r.qn_db
        } else {
            r.qu_db
        }
    };
    let pinned = [
        ("Uniform a=-5 b=5", false, -48.1, 0.2),
        ("Normal mu=0 sigma=2", false, -26.2, 0.3),
        ("Exponential p=1", false, -21.8, 0.3),
        ("Normal mu=0 sigma=1", true, -43.9, 0.5),
    ];
    let mut pinned_ok = true;
    for (label, qn, want, tol) in pinned {
        let got = cell(label, qn);
        let ok = (got - want).abs() <= tol;
        pinned_ok &= ok;
        println!(
            "    pinned {label} {}: {got:.3} vs {want} ± {tol} {}",
            if qn { "Q_N" } else { "Q_U" },
            if ok { "ok" } else { "MISS" }
        );
    }
    // The reference Q_N entries of the Uniform(-5,5) and Exponential p=1 rows
    // read as swapped; show the comparison with the two values exchanged.
    let u = cell("Uniform a=-5 b=5", true);
    let e = cell("Exponential p=1", true);
    println!("    swapped reading: Uniform(-5,5)/Q_N {u:.3} vs -31.4, Exponential p=1/Q_N {e:.3} vs -20.0");
    println!("    runtime {elapsed:.1} s");
    let pass = misses.is_empty() && pinned_ok && elapsed < 120.0;
    outcome(
        pass,
        format!(
            "{} of 24 cells outside ±1 dB {:?}; pinned rows {}",
            misses.len(),
            misses,
            if pinned_ok { "ok" } else { "off" }
        ),
    )
}

fn uniform_distortion_exact() -> Outcome {
    let d = Distribution::uniform(-0.5, 0.5).unwrap();
    let mut worst: f64 = 0.0;
    for n in [2usize, 10, 100, 256] {
        let q = Quantizer::uniform(n, -0.5, 0.5).unwrap();
        let want = 1.0 / (12.0 * (n * n) as f64);
        worst = worst.max(((expected_distortion(&q, &d, 2).unwrap() - want) / want).abs());
    }
    outcome(worst <= 1e-3, format!("worst relative error {worst:.2e}"))
}

fn w2_closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [-2.0, -1.0, 0.0, 0.5, 2.0] {
        for s in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let x = Distribution::normal(0.3, 1.2).unwrap();
            let y = Distribution::normal(m, s).unwrap();
            let numeric = w2_between(&x, &y).unwrap();
            worst = worst.max((numeric - w2_gaussian(0.3, 1.2, m, s).unwrap()).abs());
        }
    }
    for c in [0.5, 1.0, 2.0, 3.0, 5.0] {
        for p in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let x = Distribution::uniform(0.0, c).unwrap();
            let y = Distribution::exponential(p).unwrap();
            let numeric = w2_between(&x, &y).unwrap();
            worst = worst.max((numeric - w2_uniform_exponential(c, p).unwrap()).abs());
        }
    }
    let mut exp_worst: f64 = 0.0;
    for (p1, p2) in [(1.0, 2.0), (0.5, 3.0), (4.0, 0.25), (1.5, 1.6)] {
        let x = Distribution::exponential(p1).unwrap();
        let y = Distribution::exponential(p2).unwrap();
        let numeric = w2_numeric(|u| -(-u).ln_1p() / p1, |u| -(-u).ln_1p() / p2).unwrap();
        let want = 2f64.sqrt() * (1.0 / p1 - 1.0 / p2).abs();
        exp_worst = exp_worst.max((numeric - want).abs()).max((w2_between(&x, &y).unwrap() - want).abs());
        exp_worst = exp_worst.max((w2_exponential(p1, p2).unwrap() - want).abs());
    }
    outcome(
        worst <= 1e-6 && exp_worst <= 1e-6,
        format!("closed forms vs numeric {worst:.2e}; exp-exp vs sqrt2|1/p1-1/p2| {exp_worst:.2e}"),
    )
}

/// 99 interior points, offset by a quarter step so none sits on a kink of
/// the folded CDF (the exponential has one at θ = 0).
fn interior_points(lambda: f64) -> impl Iterator<Item = f64> {
    (1..100).map(move |k| -lambda + 2.0 * lambda * (k as f64 + 0.25) / 100.0)
}

fn derivative_interchange() -> Outcome {
    let bases = [
        Distribution::normal(0.0, 1.0).unwrap(),
        Distribution::exponential(1.0).unwrap(),
        Distribution::uniform(-0.37, 0.81).unwrap(),
    ];
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for d in &bases {
        for a in [1.0, 5.0, 25.0] {
            let f = FoldedDistribution::new(*d, fp(a, 1.0), 1e-15).unwrap();
            for t in interior_points(1.0) {
                let slope = (f.cdf(t + h) - f.cdf(t - h)) / (2.0 * h);
                worst = worst.max((slope - f.pdf(t)).abs());
            }
        }
    }
    outcome(worst <= 1e-6, format!("max |dF/dθ − f| = {worst:.2e}"))
}

fn closed_forms_match_series() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut note = Vec::new();
    for a in [0.5, 1.0, 3.0, 10.0] {
        let p = fp(a, 1.0);
        let g = FoldedDistribution::new(Distribution::normal(0.4, 0.8).unwrap(), p, 1e-15).unwrap();
        let e = FoldedDistribution::new(Distribution::exponential(1.3).unwrap(), p, 1e-15).unwrap();
        for t in theta_grid(1.0, 101) {
            worst = worst.max((folded_pdf_gaussian(0.4, 0.8, &p, t).unwrap() - g.pdf(t)).abs());
            worst = worst.max((folded_cdf_exponential(1.3, &p, t).unwrap() - e.cdf(t)).abs());
        }
    }
    // Same period index at both ends, then ends in different periods.
    for (lo, hi, a) in [(-0.3, 0.4, 1.0), (-0.37, 0.81, 5.0), (-0.37, 0.81, 1.7)] {
        let p = fp(a, 1.0);
        let m = |x: f64| ((a * x + 1.0) / 2.0).floor();
        note.push(format!("U({lo},{hi}) a={a}: m1{}m2", if m(lo) == m(hi) { "=" } else { "≠" }));
        let u = FoldedDistribution::new(Distribution::uniform(lo, hi).unwrap(), p, 1e-15).unwrap();
        for t in theta_grid(1.0, 101) {
            worst = worst.max((folded_pdf_uniform(lo, hi, &p, t).unwrap() - u.pdf(t)).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max pointwise gap {worst:.2e}; {}", note.join(", ")))
}

fn uniformization() -> Outcome {
    let f = FoldedDistribution::new(Distribution::normal(0.0, 1.0).unwrap(), fp(100.0, 1.0), 1e-15).unwrap();
    let flat = f.max_uniform_deviation(2001);
    let h = experiments::w1_heatmap(&ExperimentConfig::default()).unwrap();
    let rising = h.by_sigma.iter().chain(&h.by_mu).filter(|row| row.windows(2).any(|w| w[1] > w[0])).count();
    outcome(
        flat <= 1e-4 && rising == 0,
        format!("max |f − 1/2λ| at a=100: {flat:.2e}; rows increasing somewhere: {rising}"),
    )
}

fn folded_monte_carlo() -> Outcome {
    let n = 10_000_000;
    let bins = 100;
    let lambda = 1.0;
    let seed = ExperimentConfig::default().seed;
    let bases = [
        Distribution::normal(0.0, 1.0).unwrap(),
        Distribution::exponential(1.0).unwrap(),
        Distribution::uniform(-0.37, 0.81).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut exceed = 0;
    let mut total = 0;
    let mut chi2 = Vec::new();
    for d in &bases {
        for a in [1.0, 4.0] {
            let p = fp(a, lambda);
            let f = FoldedDistribution::new(*d, p, 1e-15).unwrap();
            let hist = montecarlo::chunked(seed, n, |rng, len| {
                let mut h = vec![0u64; bins];
                for _ in 0..len {
                    let t = p.fold(d.draw(rng));
                    let b = ((t + lambda) / (2.0 * lambda) * bins as f64).floor() as usize;
                    h[b.min(bins - 1)] += 1;
                }
                h
            })
            .into_iter()
            .fold(vec![0u64; bins], |mut acc, h| {
                acc.iter_mut().zip(h).for_each(|(x, y)| *x += y);
                acc
            });
            let edges: Vec<f64> = (0..=bins).map(|i| -lambda + 2.0 * lambda * i as f64 / bins as f64).collect();
            let mut stat = 0.0;
            let mut used = 0;
            for i in 0..bins {
                let prob = f.cdf(edges[i + 1]) - f.cdf(edges[i]);
                if prob == 0.0 {
                    if hist[i] > 0 {
                        worst = f64::INFINITY;
                    }
                    continue;
                }
                used += 1;
                let expected = n as f64 * prob;
                stat += (hist[i] as f64 - expected).powi(2) / expected;
                let se = (n as f64 * prob * (1.0 - prob)).sqrt();
                let z = (hist[i] as f64 - n as f64 * prob).abs() / se;
                worst = worst.max(z);
                total += 1;
                if z > 3.0 {
                    exceed += 1;
                }
            }
            chi2.push(format!("{:.2}", stat / (used - 1) as f64));
        }
    }
    let expected = total as f64 * 0.0027;
    outcome(
        worst <= 3.0,
        format!(
            "max deviation {worst:.2} SE over {total} bins; {exceed} above 3 SE (≈{expected:.1} expected by chance); \
             chi²/dof per case [{}]",
            chi2.join(", ")
        ),
    )
}

fn lloyd_max_sanity() -> Outcome {
    let n01 = Distribution::normal(0.0, 1.0).unwrap();
    let lm = lloyd_max(&n01, &LloydMaxConfig::new(256, -5.0, 5.0)).unwrap();
    let increases = lm.distortion.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-12)).count();
    let panter_dite = 3f64.sqrt() * PI / 2.0 / (256.0 * 256.0);
    let d256 = *lm.distortion.last().unwrap();
    let pd_gap = (d256 - panter_dite).abs() / panter_dite;

    let two = lloyd_max(&n01, &LloydMaxConfig::new(2, -5.0, 5.0)).unwrap();
    let want = (2.0 / PI).sqrt();
    let lv = two.quantizer.levels();
    let fixed = (lv[0] + want).abs().max((lv[1] - want).abs());
    let two_increases = two.distortion.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-12)).count();
    outcome(
        increases == 0 && two_increases == 0 && fixed <= 1e-6 && pd_gap <= 0.05,
        format!(
            "{} iterations, {increases} increases; N=2 levels off by {fixed:.1e}; N=256 vs Panter–Dite {:.2}%",
            lm.iterations,
            100.0 * pd_gap
        ),
    )
}

fn random_catalog<R: Rng>(rng: &mut R) -> Distribution {
    match rng.random_range(0..4) {
        0 => Distribution::normal(rng.random_range(-1.0..1.0), rng.random_range(0.3..2.0)).unwrap(),
        1 => {
            let lo = rng.random_range(-2.0..0.5);
            Distribution::uniform(lo, lo + rng.random_range(0.5..4.0)).unwrap()
        }
        2 => Distribution::exponential(rng.random_range(0.5..3.0)).unwrap(),
        _ => Distribution::lognormal(rng.random_range(-0.5..0.5), rng.random_range(0.2..0.8)).unwrap(),
    }
}

fn mismatch_bound_validity() -> Outcome {
    let seed = ExperimentConfig::default().seed;
    let mut rng = montecarlo::substream(seed, 9);
    let mut worst_ratio: f64 = 0.0;
    for i in 0..20u64 {
        let x = random_catalog(&mut rng);
        let y = random_catalog(&mut rng);
        let lo = y.quantile(1e-3).unwrap();
        let hi = y.quantile(1.0 - 1e-3).unwrap();
        let cfg = LloydMaxConfig { tol: 1e-9, max_iter: 50_000, ..LloydMaxConfig::new(16, lo, hi) };
        let q = lloyd_max(&y, &cfg).unwrap().quantizer;
        let e_y = expected_distortion(&q, &y, 2).unwrap();
        let bound = mismatch_bound(e_y, w2_between(&x, &y).unwrap(), 2).unwrap();
        let n = 1_000_000;
        let (err, _) = montecarlo::error_energy(&x, seed.wrapping_add(i), n, |v| q.quantize(v));
        let measured = err / n as f64;
        worst_ratio = worst_ratio.max(measured / bound);
    }
    outcome(worst_ratio <= 1.0, format!("largest measured/bound ratio {worst_ratio:.3}"))
}

fn pipeline_end_to_end() -> Outcome {
    let lambda = 1.0;
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = montecarlo::substream(seed, 0);
        let s = BandlimitedSignal::generate(PI, 128, &Distribution::normal(0.0, 1.0).unwrap(), &mut rng).unwrap();
        let xs = s.sample_oversampled(16).unwrap();
        let peak = xs.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let xs = xs.map(|v| v * 3.0 * lambda / peak);
        let out = unfold(&xs.map(|v| wrap(v, lambda)), &UnfoldConfig::new(lambda, 2, 16)).unwrap();
        let gap = out.samples().iter().zip(xs.samples()).map(|(r, t)| r - t).sum::<f64>() / xs.len() as f64;
        let offset = 2.0 * lambda * (gap / (2.0 * lambda)).round();
        for (r, t) in out.samples().iter().zip(xs.samples()) {
            worst = worst.max((r - offset - t).abs());
        }
    }
    let summary = experiments::pipeline(&ExperimentConfig::default()).unwrap();
    let (f, d) = (summary.folded_db.unwrap(), summary.direct_db.unwrap());
    outcome(
        worst <= 1e-9 && summary.folded_wins >= 19,
        format!(
            "unquantized error {worst:.1e}; folded wins {}/{} (folded {:.1} dB, direct {:.1} dB, success {:.0}%)",
            summary.folded_wins,
            summary.seeds.len(),
            f.mean,
            d.mean,
            100.0 * summary.success_rate
        ),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let commands: [&[&str]; 6] = [
        &["table2"],
        &["fold-pdf"],
        &["w1-heatmap"],
        &["pipeline"],
        &["wasserstein", "exp", "1", "exp", "2"],
        &["lloyd"],
    ];
    let run = || {
        for args in commands {
            let status = Command::new(env!("CARGO_BIN_EXE_foldquant"))
                .args(args)
                .args(["--out", out])
                .env_remove("FOLDQUANT_OUT")
                .stdout(std::process::Stdio::null())
                .status()
                .unwrap();
            assert!(status.success(), "{args:?}");
        }
        snapshot(dir.path())
    };
    let first = run();
    let second = run();
    let differing: Vec<&str> = first.iter().zip(&second).filter(|(a, b)| a != b).map(|(a, _)| a.0.as_str()).collect();
    outcome(
        first.len() == second.len() && differing.is_empty(),
        format!("{} files compared, differing: {differing:?}", first.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 mismatch table reproduction", table2_reproduction),
        ("2 uniform-on-uniform distortion", uniform_distortion_exact),
        ("3 W2 closed forms vs quadrature", w2_closed_forms),
        ("4 derivative of folded CDF", derivative_interchange),
        ("5 folded closed forms vs series", closed_forms_match_series),
        ("6 uniformization with gain", uniformization),
        ("7 folded Monte Carlo histogram", folded_monte_carlo),
        ("8 Lloyd-Max sanity", lloyd_max_sanity),
        ("9 mismatch bound validity", mismatch_bound_validity),
        ("10 fold/quantize/unfold pipeline", pipeline_end_to_end),
        ("11 determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {verdict} ({}) [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
