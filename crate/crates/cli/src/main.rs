//! `sphavg`: reproducible experiment runs over the spherical-average kernels.
//!
//! Exit status: 0 on success, 1 when a tolerance check fails, 2 on bad input.

mod config;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sphavg::analysis::{bound_probe, stein_growth_probe, FamilySpec, SteinProbe};
use sphavg::averages::{
    average_direct, maximal_over, DyadicScaleSet, GeometricGrid, Method, SlicedAverager,
};
use sphavg::freqdecomp::{linear_decay_probe, DecayProbe};
use sphavg::pushforward::{density, PushforwardSpec};
use sphavg::region::{emit_figure, FigureFormat, OperatorKind, RegionSpec};
use sphavg::spherequad::{product_rule, sample_sphere, QuadratureRule};
use sphavg::verify::{self, Tolerances, VerifyOptions};
use sphavg::{Error, FunctionTuple, Seed};

use config::{load, AverageConfig, MaximalConfig, MethodConfig, ScalesConfig, SweepConfig};

/// A failed run: the message goes to stderr, the code becomes the exit status.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn tolerance(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TooCoarse(_) => Failure::tolerance(format!("tolerance check failed: {e}")),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            // reader went away (e.g. `| head`); nothing left to report
            return Failure {
                code: 0,
                message: String::new(),
            };
        }
        Failure::input(format!("i/o error: {e}"))
    }
}

type Run<T = ()> = Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "sphavg", version, about = "Multilinear spherical averages: kernels, probes and exponent regions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "SPHAVG_JOBS")]
    jobs: Option<usize>,
    /// Tolerance override NAME=VALUE (repeatable).
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate A_t(f_1, ..., f_n) at points from a JSON config.
    Average {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a lacunary or geometric-grid maximal function.
    Maximal {
        #[arg(long)]
        config: PathBuf,
    },
    /// Tabulate the push-forward density on a lattice.
    Density {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Lattice pitch.
        #[arg(long)]
        grid: f64,
    },
    /// Bound probe over an input family; writes per-member ratios.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Littlewood-Paley decay of single-band sphere averages.
    LpDecay {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        max_level: Option<u32>,
        #[arg(long)]
        fit_from: Option<u32>,
        #[arg(long)]
        lowpass: bool,
    },
    /// Classify an exponent region and emit CSV or SVG.
    Region {
        #[arg(long, value_enum)]
        operator: RegionOperator,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Verify {
        /// Comma-separated subset of criteria.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u32>>,
        /// Emit the JSON report instead of the table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RegionOperator {
    Average,
    Lacunary,
    #[value(name = "full-maximal", alias = "full_maximal")]
    FullMaximal,
}

impl From<RegionOperator> for OperatorKind {
    fn from(o: RegionOperator) -> Self {
        match o {
            RegionOperator::Average => OperatorKind::Average,
            RegionOperator::Lacunary => OperatorKind::Lacunary,
            RegionOperator::FullMaximal => OperatorKind::FullMaximal,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

/// Tolerance overrides split by consumer.
struct Overrides {
    verify: Tolerances,
    refine_tol: Option<f64>,
}

fn parse_overrides(raw: &[String]) -> Run<Overrides> {
    let mut o = Overrides {
        verify: Tolerances::default(),
        refine_tol: None,
    };
    for item in raw {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("--tol expects NAME=VALUE, got {item:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::input(format!("--tol {name}: {value:?} is not a number")))?;
        match name.trim() {
            "refine_tol" if value > 0.0 => o.refine_tol = Some(value),
            "refine_tol" => return Err(Failure::input("--tol refine_tol must be positive")),
            other => o.verify.set(other, value).map_err(|e| {
                Failure::input(format!("{e} (or refine_tol for sweep)"))
            })?,
        }
    }
    Ok(o)
}

fn open_out(path: Option<&Path>) -> Run<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::input(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Run {
    serde_json::to_writer_pretty(&mut *out, value)
        .map_err(|e| Failure::input(format!("cannot serialize output: {e}")))?;
    writeln!(out)?;
    Ok(())
}

fn csv_header(prefix: &str, count: usize, tail: &[&str]) -> String {
    let mut cols: Vec<String> = (1..=count).map(|i| format!("{prefix}_{i}")).collect();
    cols.extend(tail.iter().map(|s| s.to_string()));
    cols.join(",")
}

/// Lattice coordinate `j * pitch` without binary round-off noise.
fn lattice_coord(j: i64, pitch: f64) -> f64 {
    let v = j as f64 * pitch;
    format!("{v:.12}").parse().unwrap_or(v)
}

fn row(coords: &[f64], tail: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in coords.iter().chain(tail).enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

fn check_points(points: &[Vec<f64>], d: usize) -> Run {
    if points.is_empty() {
        return Err(Failure::input("points: need at least one evaluation point"));
    }
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Failure::input(format!(
            "points: {p:?} has {} coordinates, functions live in dimension {d}",
            p.len()
        )));
    }
    Ok(())
}

enum Evaluator {
    Sliced(SlicedAverager),
    Rule(QuadratureRule),
}

impl Evaluator {
    fn new(method: MethodConfig, functions: &FunctionTuple, seed: Seed) -> Run<Self> {
        let m = functions.arity() * functions.dim();
        Ok(match method {
            MethodConfig::Sliced {
                lambda_order,
                base_order,
            } => Evaluator::Sliced(SlicedAverager::new(functions.dim(), lambda_order, base_order)?),
            MethodConfig::Product { order } => Evaluator::Rule(product_rule(m, order)?),
            MethodConfig::MonteCarlo { count } => Evaluator::Rule(sample_sphere(m, count, seed)?),
        })
    }

    fn method(&self) -> Method<'_> {
        match self {
            Evaluator::Sliced(s) => Method::Sliced(s),
            Evaluator::Rule(r) => Method::Direct(r),
        }
    }
}

fn cmd_average(cfg: &Path, g: &Global, out: &mut dyn Write) -> Run {
    let c: AverageConfig = load(cfg)?;
    let d = c.functions.dim();
    check_points(&c.points, d)?;
    let ev = Evaluator::new(c.method, &c.functions, Seed(g.seed))?;
    let factors = c.functions.factors();
    let with_error = matches!(c.method, MethodConfig::MonteCarlo { .. });
    let tail: &[&str] = if with_error { &["value", "std_error"] } else { &["value"] };
    writeln!(out, "{}", csv_header("x", d, tail))?;
    for x in &c.points {
        let vals = match &ev {
            Evaluator::Sliced(s) => vec![s.eval(&factors, c.t, x)?],
            Evaluator::Rule(r) => {
                let e = average_direct(&factors, c.t, x, r)?;
                if with_error {
                    vec![e.value, e.std_error]
                } else {
                    vec![e.value]
                }
            }
        };
        writeln!(out, "{}", row(x, &vals))?;
    }
    Ok(())
}

fn cmd_maximal(cfg: &Path, g: &Global, out: &mut dyn Write) -> Run {
    let c: MaximalConfig = load(cfg)?;
    let d = c.functions.dim();
    check_points(&c.points, d)?;
    let scales = match c.scales {
        ScalesConfig::Lacunary { n } => DyadicScaleSet::new(n).scales(),
        ScalesConfig::Geometric { t_min, t_max, k } => GeometricGrid::new(t_min, t_max, k)?.scales(),
    };
    let ev = Evaluator::new(c.method, &c.functions, Seed(g.seed))?;
    let factors = c.functions.factors();
    writeln!(out, "{}", csv_header("x", d, &["value"]))?;
    for x in &c.points {
        let v = maximal_over(&factors, x, &scales, ev.method())?;
        writeln!(out, "{}", row(x, &[v]))?;
    }
    Ok(())
}

fn cmd_density(n: usize, d: usize, pitch: f64, out: &mut dyn Write) -> Run {
    let spec = PushforwardSpec::new(n, d)?;
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(Failure::input("--grid must be a positive pitch"));
    }
    let k = spec.difference_dim();
    let half = spec.support_half_width();
    let m = (half / pitch).floor() as i64;
    let side = (2 * m + 1) as usize;
    let rows = (side as f64).powi(k as i32);
    if rows > 2e7 {
        return Err(Failure::input(format!(
            "--grid {pitch} gives {rows:.0} rows in dimension {k}; use a coarser pitch"
        )));
    }
    writeln!(out, "{}", csv_header("z", k, &["density"]))?;
    let mut z = vec![0.0; k];
    for idx in 0..side.pow(k as u32) {
        let mut r = idx;
        for c in z.iter_mut().rev() {
            *c = lattice_coord((r % side) as i64 - m, pitch);
            r /= side;
        }
        let v = density(spec, &z)?;
        writeln!(out, "{}", row(&z, &[v]))?;
    }
    Ok(())
}

fn cmd_sweep(cfg: &Path, overrides: &Overrides, out: &mut dyn Write) -> Run {
    let c: SweepConfig = load(cfg)?;
    if let FamilySpec::Stein { d, levels } = c.family {
        let probe = SteinProbe {
            d,
            levels,
            ..SteinProbe::standard()
        };
        let r = stein_growth_probe(&probe)?;
        writeln!(out, "level,norm,maximal,ratio")?;
        for i in 0..r.levels.len() {
            writeln!(
                out,
                "{},{},{},{}",
                r.levels[i], r.norms[i], r.maximal[i], r.ratios[i]
            )?;
        }
        return Ok(());
    }
    let operator = c
        .operator
        .ok_or_else(|| Failure::input("sweep: missing operator"))?;
    let exponents = c
        .exponents
        .ok_or_else(|| Failure::input("sweep: missing exponents"))?;
    let res = bound_probe(
        operator,
        &exponents,
        &c.family,
        c.options.options(overrides.refine_tol),
    )?;
    writeln!(out, "member,ratio,output_norm,input_norm")?;
    for (i, r) in res.ratios.iter().enumerate() {
        writeln!(out, "{i},{r},{},{}", res.output_norms[i], res.input_norms[i])?;
    }
    Ok(())
}

fn cmd_lp_decay(
    d: usize,
    max_level: Option<u32>,
    fit_from: Option<u32>,
    lowpass: bool,
    out: &mut dyn Write,
) -> Run {
    if d != 2 && d != 3 {
        return Err(Failure::input(format!("lp-decay supports d = 2 or 3, got {d}")));
    }
    let base = DecayProbe::standard(d);
    let mut p = DecayProbe { lowpass, ..base };
    if let Some(top) = max_level {
        // keep the top band just below Nyquist
        p.max_level = top;
        p.half_width = 0.9 * p.resolution as f64 / (4.0 * 2f64.powi(top as i32 + 1));
    }
    if let Some(f) = fit_from {
        p.fit_from = f;
    }
    if p.fit_from >= p.max_level {
        return Err(Failure::input("--fit-from must be below --max-level"));
    }
    let r = linear_decay_probe(&p)?;
    writeln!(out, "i,log2_ratio,fitted_slope")?;
    for (i, v) in r.levels.iter().zip(&r.log2_ratio) {
        writeln!(out, "{i},{v},{}", r.slope)?;
    }
    Ok(())
}

fn cmd_region(op: RegionOperator, n: usize, d: usize, format: Format, out: &mut dyn Write) -> Run {
    let spec = RegionSpec::new(op.into(), n, d)?;
    let format = match format {
        Format::Csv => FigureFormat::Csv,
        Format::Svg => FigureFormat::Svg,
    };
    emit_figure(&spec, format, out)?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a verify::VerifyReport,
}

fn cmd_verify(
    criteria: Option<Vec<u32>>,
    json: bool,
    g: &Global,
    overrides: &Overrides,
    out: &mut dyn Write,
) -> Run {
    let opts = VerifyOptions {
        seed: Seed(g.seed),
        tolerances: overrides.verify,
        only: criteria,
    };
    let report = verify::run(&opts)?;
    for c in &report.criteria {
        eprintln!("criterion {:>2} finished in {:.1?}", c.id, c.elapsed);
    }
    if json {
        write_json(
            out,
            &VerifyDocument {
                schema_version: config::SCHEMA_VERSION,
                report: &report,
            },
        )?;
    } else {
        out.write_all(report.render().as_bytes())?;
    }
    out.flush()?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .criteria
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.id, c.title))
            .collect();
        Err(Failure::tolerance(format!(
            "failed criteria: {}",
            failed.join(", ")
        )))
    }
}

fn run(cli: Cli) -> Run {
    let overrides = parse_overrides(&cli.global.tol)?;
    let g = &cli.global;
    let mut out = open_out(g.out.as_deref())?;
    match cli.command {
        Command::Average { config } => cmd_average(&config, g, &mut *out)?,
        Command::Maximal { config } => cmd_maximal(&config, g, &mut *out)?,
        Command::Density { n, d, grid } => cmd_density(n, d, grid, &mut *out)?,
        Command::Sweep { config } => cmd_sweep(&config, &overrides, &mut *out)?,
        Command::LpDecay {
            d,
            max_level,
            fit_from,
            lowpass,
        } => cmd_lp_decay(d, max_level, fit_from, lowpass, &mut *out)?,
        Command::Region {
            operator,
            n,
            d,
            format,
        } => cmd_region(operator, n, d, format, &mut *out)?,
        Command::Verify { criteria, json } => {
            cmd_verify(criteria, json, g, &overrides, &mut *out)?
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli
        .global
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    match sphavg::par::with_jobs(jobs, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
