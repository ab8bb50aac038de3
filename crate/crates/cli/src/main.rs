use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use leray_cli::commands::{self, Format, Grid, KernelQuery, RunConfig};
use leray_cli::spec::{load, DomainSpec, MeasureSpec};
use leray_cli::CliError;
use leray_core::spectrum::{OperatorKind, PIECE_TOL};
use num_complex::Complex64;

#[derive(Parser)]
#[command(name = "leray", version, about = "Spectral data of the Leray transform on convex Reinhardt domains")]
struct Cli {
    /// Domain spec: a JSON file or inline JSON.
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Measure spec: a JSON file or inline JSON. Defaults to w = 1.
    #[arg(long, global = true)]
    measure: Option<String>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Relative tolerance of the piece integrals.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Lstarl,
    Ks,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Square,
    Diagonal,
    Column,
}

#[derive(Subcommand)]
enum Command {
    /// Class, endpoint exponents, scales and curvature extremes.
    DomainInfo,
    /// Sweep of the piece norms.
    PieceNorms {
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        #[arg(long, value_enum, default_value = "square")]
        grid: GridArg,
        /// Fixed first index of a column sweep.
        #[arg(long, default_value_t = 0)]
        n0: u32,
    },
    /// Essential spectrum of L*L or of the Kerzman-Stein operator.
    Spectrum {
        #[arg(long, value_enum, default_value = "lstarl")]
        kind: KindArg,
        #[arg(long, default_value_t = leray_core::spectrum::DEFAULT_REPORT_N)]
        report_n: usize,
    },
    /// Polar domain, dual measure and a piece-norm comparison.
    Dual {
        /// Side of the square grid compared.
        #[arg(long, default_value_t = commands::DUAL_GRID)]
        n_max: u32,
    },
    /// Admissibility of order-q measures.
    Admissible {
        /// Comma-separated q values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
        /// `start:stop:step`, inclusive of `stop`.
        #[arg(long, allow_hyphen_values = true)]
        q_range: Option<String>,
    },
    /// Transform of a monomial at an interior point, and the kernel density.
    KernelEval {
        /// Interior point as `re1,im1,re2,im2`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        w: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Boundary point `s,theta1,theta2` for the kernel density.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
    },
}

fn parse_range(r: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::spec(format!("q range must be start:stop:step, got {r}"));
    let parts: Vec<f64> = r.split(':').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [a, b, h] = parts[..] else { return Err(bad()) };
    if !(h > 0.0 && b >= a) || (b - a) / h > 1e6 {
        return Err(bad());
    }
    let k = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=k).map(|i| a + i as f64 * h).collect())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let domain_arg = cli.domain.as_deref().ok_or_else(|| CliError::spec("--domain is required"))?;
    let dspec: DomainSpec = load(domain_arg, "domain")?;
    let domain = Arc::new(dspec.build()?);
    let mspec: MeasureSpec = match &cli.measure {
        Some(m) => load(m, "measure")?,
        None => MeasureSpec::Mu0,
    };
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::spec(format!("--tol must lie in (0, 1), got {t}")));
        }
    }
    let default_format = match cli.command {
        Command::PieceNorms { .. } | Command::Admissible { .. } => Format::Csv,
        _ => Format::Json,
    };
    let format = match cli.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => default_format,
    };
    let mut cfg = RunConfig::new("", &domain, format);
    let mut status = ExitCode::SUCCESS;
    let text = match cli.command {
        Command::DomainInfo => {
            cfg.command = "domain-info";
            commands::domain_info(&domain, &cfg)?
        }
        Command::PieceNorms { n_max, grid, n0 } => {
            let grid = match grid {
                GridArg::Square => Grid::Square,
                GridArg::Diagonal => Grid::Diagonal,
                GridArg::Column => Grid::Column,
            };
            cfg.command = "piece-norms";
            cfg.measure = Some(mspec);
            cfg.n_max = Some(n_max);
            cfg.grid = Some(grid);
            cfg.n0 = (grid == Grid::Column).then_some(n0);
            cfg.tol = Some(cli.tol.unwrap_or(PIECE_TOL));
            commands::piece_norms(&mspec.build(domain), &cfg)?
        }
        Command::Spectrum { kind, report_n } => {
            cfg.command = "spectrum";
            cfg.measure = Some(mspec);
            cfg.report_n = Some(report_n);
            let kind = match kind {
                KindArg::Lstarl => OperatorKind::LstarL,
                KindArg::Ks => OperatorKind::KerzmanStein,
            };
            cfg.kind = Some(if kind == OperatorKind::LstarL { "lstarl" } else { "ks" });
            commands::spectrum(&mspec.build(domain), kind, &cfg)?
        }
        Command::Dual { n_max } => {
            cfg.command = "dual";
            cfg.measure = Some(mspec);
            cfg.n_max = Some(n_max);
            let (text, passed) = commands::dual(Arc::new(mspec.build(domain)), &cfg)?;
            if !passed {
                eprintln!("error: duality check exceeded tolerance");
                status = ExitCode::from(leray_cli::error::EXIT_NUMERICAL as u8);
            }
            text
        }
        Command::Admissible { q, q_range } => {
            let mut qs = q;
            if let Some(r) = q_range {
                qs.extend(parse_range(&r)?);
            }
            let named = cli.measure.is_some().then_some(mspec);
            if qs.is_empty() && named.is_none() {
                return Err(CliError::spec("admissible needs --q, --q-range or --measure"));
            }
            cfg.command = "admissible";
            cfg.measure = named;
            cfg.q_values = Some(qs.clone());
            commands::admissible(domain, &qs, named, &cfg)?
        }
        Command::KernelEval { w, n, m, at } => {
            cfg.command = "kernel-eval";
            if w.len() != 4 || at.as_ref().is_some_and(|a| a.len() != 3) {
                return Err(CliError::spec("--w takes re1,im1,re2,im2 and --at takes s,theta1,theta2"));
            }
            let query = KernelQuery {
                w1: Complex64::new(w[0], w[1]),
                w2: Complex64::new(w[2], w[3]),
                n,
                m,
                at: at.map(|a| (a[0], a[1], a[2])),
            };
            commands::kernel_eval(&domain, &query, &cfg)?
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(status)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
