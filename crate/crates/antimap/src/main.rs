use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use antimap::cli::{self, CommandKind, EmitKind, OutputFormat, RunConfig};
use antimap::{Error, DEFAULT_TOL};

/// Optimal physical approximations of the transposition map.
#[derive(Parser)]
#[command(name = "antimap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Absolute tolerance for pass/fail residual checks.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tolerance: f64,
    /// Number of random samples for sampled checks.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Seed for all pseudo-random draws.
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal transposition machine for a finite dimension.
    Finite {
        /// Hilbert-space dimension.
        #[arg(long)]
        dim: usize,
        /// Matrix payloads to include in the report.
        #[arg(long, value_enum)]
        emit: Vec<EmitArg>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Unitary three-system realization and its ancilla.
    Dilate {
        /// Hilbert-space dimension (at least 2).
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum)]
        emit: Vec<EmitArg>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Continuous-variable machine at a finite Fock cutoff.
    Cv {
        /// Fock cutoff (number of levels).
        #[arg(long, default_value_t = 20)]
        cutoff: usize,
        /// Seed state: `vacuum`, `coherent:<re>,<im>` or `squeezed:<r>`.
        #[arg(long, default_value = "vacuum")]
        seed: String,
        #[arg(long, value_enum)]
        emit: Vec<EmitArg>,
        /// Treat leakage warnings as failures.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the full invariant suite (dims 1-6, cutoff 15).
    Verify {
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Choi,
    Kraus,
    Isometry,
    Unitary,
    Ancilla,
    Chi,
}

impl From<EmitArg> for EmitKind {
    fn from(value: EmitArg) -> Self {
        match value {
            EmitArg::Choi => EmitKind::Choi,
            EmitArg::Kraus => EmitKind::Kraus,
            EmitArg::Isometry => EmitKind::Isometry,
            EmitArg::Unitary => EmitKind::Unitary,
            EmitArg::Ancilla => EmitKind::Ancilla,
            EmitArg::Chi => EmitKind::Chi,
        }
    }
}

fn build_config(command: Command) -> RunConfig {
    let apply_common = |cfg: &mut RunConfig, common: &CommonOpts| {
        cfg.tolerance = common.tolerance;
        cfg.samples = common.samples;
        cfg.rng_seed = common.rng_seed;
        cfg.output_format = common.format.into();
        cfg.output_path = common.out.as_ref().map(|p| p.display().to_string());
    };
    match command {
        Command::Finite { dim, emit, common } => {
            let mut cfg = RunConfig::defaults(CommandKind::Finite);
            cfg.dim = Some(dim);
            cfg.emit = emit.into_iter().map(Into::into).collect();
            apply_common(&mut cfg, &common);
            cfg
        }
        Command::Dilate { dim, emit, common } => {
            let mut cfg = RunConfig::defaults(CommandKind::Dilate);
            cfg.dim = Some(dim);
            cfg.emit = emit.into_iter().map(Into::into).collect();
            apply_common(&mut cfg, &common);
            cfg
        }
        Command::Cv { cutoff, seed, emit, strict, common } => {
            let mut cfg = RunConfig::defaults(CommandKind::Cv);
            cfg.cutoff = cutoff;
            cfg.seed_spec = seed;
            cfg.strict = strict;
            cfg.emit = emit.into_iter().map(Into::into).collect();
            apply_common(&mut cfg, &common);
            cfg
        }
        Command::Verify { common } => {
            let mut cfg = RunConfig::defaults(CommandKind::Verify);
            apply_common(&mut cfg, &common);
            cfg
        }
    }
}

fn main() -> ExitCode {
    cli::init_thread_pool();
    let parsed = Cli::parse();
    let cfg = build_config(parsed.command);
    let report = match cli::execute(&cfg) {
        Ok(report) => report,
        Err(err @ (Error::Usage(_) | Error::SeedSpec(_))) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(1);
        }
    };
    let rendered = report.render(cfg.output_format);
    if let Some(path) = &cfg.output_path {
        if let Err(err) = std::fs::write(path, rendered) {
            eprintln!("error: cannot write {path}: {err}");
            return ExitCode::from(1);
        }
    } else {
        let mut stdout = std::io::stdout().lock();
        if stdout.write_all(rendered.as_bytes()).is_err() {
            return ExitCode::from(1);
        }
    }
    let code = cli::exit_code(&cfg, &report);
    if code != 0 {
        if let Some(failure) = report.first_failure() {
            eprintln!(
                "verification failed: {} (residual {:.3e} > tolerance {:.3e})",
                failure.name, failure.residual, cfg.tolerance
            );
        } else if !report.warnings.is_empty() {
            eprintln!("strict mode: {}", report.warnings.join("; "));
        }
    }
    ExitCode::from(code as u8)
}
