//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or validation errors, 2 when a
//! quadrature failed to converge (the affected rows are written as `NA`).

mod sweep;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use sweep::{
    format_significant, sweep_rows, write_csv, CsvRow, Quantity, Scale, SweepSpec, CSV_HEADER,
    SIGNIFICANT_DIGITS,
};

use crate::analytic::{gmi_closed_form, matched_coefficient, s_hat, theorem_rate};
use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};
use crate::montecarlo::{codebook_size, run_random_coding, CodingResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;

pub const CODING_CSV_HEADER: &str = "eps_s,a,rate,n,codebook_size,trials,errors,error_rate,seed";

#[derive(Debug, Parser)]
#[command(
    name = "poisson-gmi",
    version,
    about = "Capacity lower bounds for the discrete-time Poisson channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    /// Evaluate a single energy instead of a sweep.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    eps_min: f64,
    #[arg(long, default_value_t = 100.0)]
    eps_max: f64,
    #[arg(long, default_value_t = 40)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Scale::Log)]
    scale: Scale,
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report rates in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Debug, Clone, Args)]
struct McArgs {
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep any combination of bounds and estimators over energies.
    Bounds {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "theorem-rate,gmi,lm,lapidoth-moser,exact-mi"
        )]
        quantities: Vec<Quantity>,
        /// Gamma shape used by exact-mi.
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Closed-form GMI at one energy.
    Gmi {
        #[arg(long)]
        eps: f64,
        /// Metric coefficient (default 1 + 1/eps).
        #[arg(long)]
        a: Option<f64>,
        /// Tilt (default: the cancellation tilt).
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        bits: bool,
    },
    /// Exact mutual information of a gamma input.
    Mi {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Weighted rate with a = 1 at its cancellation tilt (or --s).
    Lm {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        s: Option<f64>,
    },
    /// Random-coding experiment with the minimum-distance decoder.
    Simulate {
        #[arg(long)]
        eps: f64,
        /// Metric coefficient (default 1 + 1/eps).
        #[arg(long)]
        a: Option<f64>,
        /// Code rate in nats per channel use.
        #[arg(long)]
        rate: f64,
        /// Comma-separated blocklengths.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the GMI.
    McGmi {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
    },
    /// Monte Carlo estimate of the weighted rate.
    McLm {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        s: Option<f64>,
    },
}

impl GridArgs {
    fn spec(&self, quantities: Vec<Quantity>) -> SweepSpec {
        match self.eps {
            Some(eps) => SweepSpec::single(eps, quantities),
            None => SweepSpec {
                eps_min: self.eps_min,
                eps_max: self.eps_max,
                points: self.points,
                scale: self.scale,
                quantities,
                ..SweepSpec::default()
            },
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(CliError::Invalid(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

enum CliError {
    Invalid(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Invalid(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn dispatch(
    command: Command,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::result::Result<i32, CliError> {
    match command {
        Command::Bounds {
            grid,
            output,
            mc,
            quantities,
            nu,
            tol,
        } => {
            let spec = SweepSpec {
                nu,
                tol,
                samples: mc.samples,
                seed: mc.seed,
                ..grid.spec(quantities)
            };
            cmd_bounds(&spec, &output, out, err)
        }
        Command::Gmi { eps, a, s, bits } => {
            cmd_gmi(eps, a, s, bits, out)?;
            Ok(EXIT_OK)
        }
        Command::Mi {
            grid,
            output,
            nu,
            tol,
        } => {
            let spec = SweepSpec {
                nu,
                tol,
                ..grid.spec(vec![Quantity::ExactMi])
            };
            cmd_bounds(&spec, &output, out, err)
        }
        Command::Lm { grid, output, s } => {
            let spec = SweepSpec {
                s,
                ..grid.spec(vec![Quantity::Lm])
            };
            cmd_bounds(&spec, &output, out, err)
        }
        Command::McGmi {
            grid,
            output,
            mc,
            a,
            s,
        } => {
            let spec = SweepSpec {
                a,
                s,
                samples: mc.samples,
                seed: mc.seed,
                ..grid.spec(vec![Quantity::McGmi])
            };
            cmd_bounds(&spec, &output, out, err)
        }
        Command::McLm {
            grid,
            output,
            mc,
            s,
        } => {
            let spec = SweepSpec {
                s,
                samples: mc.samples,
                seed: mc.seed,
                ..grid.spec(vec![Quantity::McLm])
            };
            cmd_bounds(&spec, &output, out, err)
        }
        Command::Simulate {
            eps,
            a,
            rate,
            n,
            trials,
            seed,
            out: path,
        } => {
            let rows = cmd_simulate(eps, a, rate, &n, trials, seed)?;
            let mut sink = open_sink(path.as_ref(), out)?;
            write_coding_csv(&rows, &mut sink)?;
            sink.flush()?;
            Ok(EXIT_OK)
        }
    }
}

fn open_sink<'a>(
    path: Option<&PathBuf>,
    out: &'a mut dyn Write,
) -> io::Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(out),
    })
}

fn cmd_bounds(
    spec: &SweepSpec,
    output: &OutputArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::result::Result<i32, CliError> {
    let rows = sweep_rows(spec)?;
    let failures = rows.iter().filter(|r| r.value.is_none()).count();
    match &output.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            write_csv(&rows, &mut file, output.bits)?;
            file.flush()?;
            writeln!(
                out,
                "wrote {} rows ({} grid points x {} quantities) to {}",
                rows.len(),
                spec.grid().len(),
                spec.quantities.len(),
                path.display()
            )?;
        }
        None => write_csv(&rows, out, output.bits)?,
    }
    if failures > 0 {
        writeln!(
            err,
            "warning: {failures} evaluation(s) did not converge and are marked NA"
        )?;
        return Ok(EXIT_NO_CONVERGENCE);
    }
    Ok(EXIT_OK)
}

/// Single-point GMI report. Defaults follow `a = 1 + 1/eps`, `s = s_hat`.
pub fn cmd_gmi(
    eps: f64,
    a: Option<f64>,
    s: Option<f64>,
    bits: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let eps = ensure_positive("eps", eps)?;
    let a = match a {
        Some(a) => ensure_positive("a", a)?,
        None => matched_coefficient(eps),
    };
    let s = match s {
        Some(s) => ensure_nonnegative("s", s)?,
        None => s_hat(eps, a),
    };
    let unit = if bits { std::f64::consts::LN_2 } else { 1.0 };
    let fmt = |v: f64| format_significant(v, SIGNIFICANT_DIGITS);
    let label = if bits { "bits" } else { "nats" };
    let report = format!(
        "eps_s        {}\na            {}\ns            {}\ngmi          {} {label}\ntheorem_rate {} {label}\n",
        fmt(eps),
        fmt(a),
        fmt(s),
        fmt(gmi_closed_form(eps, a, s) / unit),
        fmt(theorem_rate(eps) / unit),
    );
    out.write_all(report.as_bytes())
        .map_err(|_| crate::error::invalid("output", f64::NAN, "failed to write report"))
}

/// One random-coding run per blocklength. Every blocklength is checked against
/// the codebook limit before any simulation starts.
pub fn cmd_simulate(
    eps: f64,
    a: Option<f64>,
    rate: f64,
    ns: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<CodingResult>> {
    let eps = ensure_positive("eps", eps)?;
    let a = match a {
        Some(a) => ensure_positive("a", a)?,
        None => matched_coefficient(eps),
    };
    for &n in ns {
        codebook_size(rate, n)?;
    }
    ns.iter()
        .map(|&n| run_random_coding(eps, a, rate, n, trials, seed))
        .collect()
}

pub fn write_coding_csv<W: Write + ?Sized>(rows: &[CodingResult], w: &mut W) -> io::Result<()> {
    writeln!(w, "{CODING_CSV_HEADER}")?;
    let fmt = |v: f64| format_significant(v, SIGNIFICANT_DIGITS);
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt(r.eps_s),
            fmt(r.a),
            fmt(r.rate),
            r.n,
            r.codebook_size,
            r.trials,
            r.errors,
            fmt(r.error_rate()),
            r.seed
        )?;
    }
    Ok(())
}
