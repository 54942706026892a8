use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use foldquant::config::ExperimentConfig;
use foldquant::experiments;
use foldquant::{Distribution, Error, Result};

#[derive(Parser)]
#[command(name = "foldquant", version, about = "Modulo-folding quantization experiments")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Flags {
    /// Flat `key = value` file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Quantizer levels.
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Quantizer range.
    #[arg(long, global = true, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    range: Option<Vec<f64>>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Comma-separated gains.
    #[arg(long, global = true, value_delimiter = ',')]
    a_grid: Option<Vec<f64>>,
    /// Output directory (default: $FOLDQUANT_OUT or ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// NMSE of the Gaussian-designed and uniform quantizers on the mismatch table.
    Table2,
    /// Folded density over θ for each gain.
    FoldPdf {
        /// Base law, e.g. `normal 0 1` or `exp 1`.
        #[arg(long, num_args = 1.., default_values = ["normal", "0", "1"], allow_negative_numbers = true)]
        base: Vec<String>,
    },
    /// W1 from folded Gaussians to the uniform law over (σ, a) and (μ, a).
    W1Heatmap,
    /// Fold, quantize and unfold oversampled bandlimited signals.
    Pipeline,
    /// W_r between two laws, e.g. `normal 0 1 normal 0 2`.
    Wasserstein {
        #[arg(num_args = 2.., allow_negative_numbers = true, required = true)]
        specs: Vec<String>,
        #[arg(long, short = 'r', default_value_t = 2)]
        order: u32,
    },
    /// Lloyd-Max design dumped as boundaries and levels.
    Lloyd {
        #[arg(long, num_args = 1.., default_values = ["normal", "0", "1"], allow_negative_numbers = true)]
        base: Vec<String>,
    },
}

fn resolve(flags: &Flags) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &flags.config {
        cfg.apply_file(path)?;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.n {
        cfg.n_samples = v;
    }
    if let Some(v) = flags.levels {
        cfg.levels = v;
    }
    if let Some(v) = &flags.range {
        cfg.range = (v[0], v[1]);
    }
    if let Some(v) = flags.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = &flags.a_grid {
        cfg.a_grid = v.clone();
    }
    if let Some(v) = &flags.out {
        cfg.out_dir = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_base(tokens: &[String]) -> Result<Distribution> {
    let t: Vec<&str> = tokens.iter().map(String::as_str).collect();
    Distribution::parse_tokens(&t)
}

/// Split `family p.. family p..` at the second family name.
fn parse_pair(tokens: &[String]) -> Result<(Distribution, Distribution)> {
    let split = tokens
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, t)| t.parse::<f64>().is_err())
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Config("expected two distributions, e.g. `normal 0 1 exp 2`".into()))?;
    Ok((parse_base(&tokens[..split])?, parse_base(&tokens[split..])?))
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let cfg = resolve(&cli.flags)?;
    match cli.command {
        Command::Table2 => {
            let t = experiments::table2(&cfg)?;
            for r in &t.rows {
                println!(
                    "{:<26} Q_N {:>8.3} (ref {:>6.2})   Q_U {:>8.3} (ref {:>6.2})",
                    r.label, r.qn_db, r.qn_reference_db, r.qu_db, r.qu_reference_db
                );
            }
            experiments::write_table2(&cfg, &t)
        }
        Command::FoldPdf { base } => {
            let base = parse_base(&base)?;
            let points = experiments::fold_pdf(&cfg, &base)?;
            experiments::write_fold_pdf(&cfg, &base, &points)
        }
        Command::W1Heatmap => {
            let h = experiments::w1_heatmap(&cfg)?;
            experiments::write_w1_heatmap(&cfg, &h)
        }
        Command::Pipeline => {
            let s = experiments::pipeline(&cfg)?;
            if let (Some(f), Some(d)) = (s.folded_db, s.direct_db) {
                println!("folded path {:.3} ± {:.3} dB", f.mean, f.std);
                println!("direct path {:.3} ± {:.3} dB", d.mean, d.std);
            }
            println!("unfolding success rate {:.3}", s.success_rate);
            experiments::write_pipeline(&cfg, &s)
        }
        Command::Wasserstein { specs, order } => {
            let (x, y) = parse_pair(&specs)?;
            let w = experiments::wasserstein(&x, &y, order)?;
            match w.closed_form {
                Some(c) => println!("closed form {c}"),
                None => println!("closed form n/a"),
            }
            println!("numeric     {}", w.numeric);
            if let Some(d) = w.abs_diff {
                println!("abs diff    {d:e}");
            }
            if let Some(note) = &w.note {
                println!("note: {note}");
            }
            experiments::write_wasserstein(&cfg, &w)
        }
        Command::Lloyd { base } => {
            let base = parse_base(&base)?;
            let l = experiments::lloyd(&cfg, &base)?;
            println!("{} iterations, converged: {}", l.iterations, l.converged);
            experiments::write_lloyd(&cfg, &base, &l)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("foldquant: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
