//! `bdm`: spectra, boundary data maps, Green's functions, spectral point masses,
//! Weyl–Titchmarsh matrices and an identity-check suite from a JSON problem file.

mod config;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bdm_core::bdmap::{bdmap_general, measure_point_mass, DEFAULT_EPS};
use bdm_core::potential::PotentialSpec;
use bdm_core::resolvent::Solutions;
use bdm_core::spectrum::{eig_rectangle, eig_selfadjoint, Rect, SpectrumResult};
use bdm_core::traces::AngleQuad;
use bdm_core::verify::{run_suite, Criterion, VerifyProblem};
use bdm_core::weyl::wt_matrix;
use bdm_core::{Complex64, Error, Mat2, DEFAULT_TOL};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use config::{ConfigError, ProblemConfig};

#[derive(Parser, Debug)]
#[command(name = "bdm", version, about = "Boundary data maps for Schrödinger operators on an interval")]
struct Cli {
    /// Worker threads for z-grid tasks (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration tolerance; overrides the config file and BDM_TOL.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct ZArgs {
    /// Spectral parameter `re` or `re,im`; repeatable. Overrides the config grid.
    #[arg(long = "z", value_parser = parse_complex, allow_hyphen_values = true)]
    z: Vec<Complex64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues: the lowest N (real problems) or all inside a rectangle.
    Eig {
        #[command(flatten)]
        common: Common,
        /// Number of eigenvalues from the bottom of the spectrum.
        #[arg(long, conflicts_with = "rect")]
        n: Option<usize>,
        /// Rectangle `re_min,re_max,im_min,im_max`.
        #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
        rect: Option<Rect>,
    },
    /// Boundary data map entries over the z grid (Robin map unless theta_prime is set).
    Map {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        z: ZArgs,
    },
    /// Green's function on a uniform (x, x') grid for each z.
    Green {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        z: ZArgs,
        /// Grid points per variable on [0, R].
        #[arg(long, default_value_t = 5)]
        points: usize,
    },
    /// Point masses of the spectral measure at the lowest N eigenvalues.
    Measure {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Weyl–Titchmarsh matrices M_alpha(z, x0) over the z grid.
    Wtm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        z: ZArgs,
        /// Reference point; defaults to R/2.
        #[arg(long)]
        x0: Option<f64>,
        /// Angle alpha in [0, pi).
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
    /// Run the identity-check suite and print a pass/fail table.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c, d] => Rect::new(*a, *b, *c, *d).map_err(|e| e.to_string()),
        _ => Err("expected re_min,re_max,im_min,im_max".into()),
    }
}

/// Process outcome, mapped to the exit status.
enum Failure {
    Config(String),
    Numerical(String),
    Verification,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::InvalidPotential(_) | Error::Unsupported(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Problem {
    cfg: ProblemConfig,
    v: PotentialSpec,
    tol: f64,
}

fn env_tol() -> Outcome<Option<f64>> {
    match std::env::var("BDM_TOL") {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(Some(t)),
            _ => Err(Failure::Config(format!("BDM_TOL must be a positive number, got {s:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn load(common: &Common) -> Outcome<Problem> {
    let cfg = ProblemConfig::load(&common.config)?;
    let v = cfg.potential()?;
    let tol = match (common.tol, cfg.tol) {
        (Some(t), _) if !(t > 0.0 && t.is_finite()) => {
            return Err(Failure::Config(format!("--tol must be positive, got {t}")))
        }
        (Some(t), _) => t,
        (None, Some(t)) => t,
        (None, None) => env_tol()?.unwrap_or(DEFAULT_TOL),
    };
    Ok(Problem { cfg, v, tol })
}

fn z_points(p: &Problem, z: &ZArgs) -> Outcome<Vec<Complex64>> {
    if !z.z.is_empty() {
        return Ok(z.z.clone());
    }
    match &p.cfg.z_grid {
        Some(g) => {
            let pts = g.points();
            if pts.is_empty() {
                return Err(Failure::Config("z_grid is empty".into()));
            }
            Ok(pts)
        }
        None => Err(Failure::Config("no z values: pass --z or set z_grid".into())),
    }
}

/// Run a per-z task on the worker pool, keeping grid order.
fn par_map<T: Send, F>(zs: &[Complex64], f: F) -> Outcome<Vec<T>>
where
    F: Fn(Complex64) -> bdm_core::Result<T> + Sync,
{
    let out: Vec<bdm_core::Result<T>> = zs.par_iter().map(|&z| f(z)).collect();
    Ok(out.into_iter().collect::<bdm_core::Result<Vec<T>>>()?)
}

struct Csv {
    w: csv::Writer<Box<dyn Write>>,
}

impl Csv {
    fn open(out: &Option<PathBuf>, header: &[String]) -> Outcome<Self> {
        let mut sink: Box<dyn Write> = match out {
            Some(path) => Box::new(io::BufWriter::new(std::fs::File::create(path)?)),
            None => Box::new(io::BufWriter::new(io::stdout())),
        };
        writeln!(sink, "# bdm {}", env!("CARGO_PKG_VERSION"))?;
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(header)?;
        Ok(Csv { w })
    }

    fn row(&mut self, fields: Vec<String>) -> Outcome<()> {
        self.w.write_record(&fields)?;
        Ok(())
    }

    fn finish(mut self) -> Outcome<()> {
        self.w.flush()?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cplx(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn cols(name: &str) -> [String; 2] {
    [format!("{name}_re"), format!("{name}_im")]
}

fn mat_header(prefix: &str) -> Vec<String> {
    ["11", "12", "21", "22"].iter().flat_map(|ij| cols(&format!("{prefix}{ij}"))).collect()
}

fn mat_fields(m: &Mat2) -> Vec<String> {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]].iter().flat_map(|&c| cplx(c)).collect()
}

fn write_spectrum(out: &Option<PathBuf>, s: &SpectrumResult) -> Outcome<()> {
    let mut header = vec!["index".to_string()];
    header.extend(cols("lambda"));
    header.extend(["residual".to_string(), "multiplicity".to_string()]);
    let mut csv = Csv::open(out, &header)?;
    for (i, ((z, r), m)) in s.eigenvalues.iter().zip(&s.residuals).zip(&s.multiplicities).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(cplx(*z));
        row.extend([num(*r), m.to_string()]);
        csv.row(row)?;
    }
    csv.finish()
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Eig { common, n, rect } => {
            let p = load(&common)?;
            let pair = p.cfg.pair();
            let s = match (n, rect) {
                (_, Some(rect)) => eig_rectangle(&p.v, &pair, &rect, p.tol)?,
                (Some(n), None) => eig_selfadjoint(&p.v, &pair, n, p.tol)?,
                (None, None) => return Err(Failure::Config("eig needs --n or --rect".into())),
            };
            write_spectrum(&common.out, &s)
        }
        Command::Map { common, z } => {
            let p = load(&common)?;
            let zs = z_points(&p, &z)?;
            let quad = match p.cfg.primed() {
                Some(primed) => AngleQuad::new(p.cfg.pair(), primed),
                None => AngleQuad::robin(p.cfg.pair()),
            };
            let maps = par_map(&zs, |z| Ok(bdmap_general(&p.v, &quad, z, p.tol)?.matrix))?;
            let mut header: Vec<String> = cols("z").to_vec();
            header.extend(mat_header("l"));
            let mut csv = Csv::open(&common.out, &header)?;
            for (z, m) in zs.iter().zip(&maps) {
                let mut row = cplx(*z).to_vec();
                row.extend(mat_fields(m));
                csv.row(row)?;
            }
            csv.finish()
        }
        Command::Green { common, z, points } => {
            let p = load(&common)?;
            if points < 2 {
                return Err(Failure::Config("--points must be at least 2".into()));
            }
            let zs = z_points(&p, &z)?;
            let pair = p.cfg.pair();
            let xs: Vec<f64> = (0..points).map(|i| p.v.r * i as f64 / (points - 1) as f64).collect();
            let values = par_map(&zs, |z| {
                let s = Solutions::new(&p.v, &pair, z, p.tol)?;
                let mut vals = Vec::with_capacity(xs.len() * xs.len());
                for &x in &xs {
                    for &xp in &xs {
                        vals.push(s.green(x, xp)?.value);
                    }
                }
                Ok(vals)
            })?;
            let mut header: Vec<String> = cols("z").to_vec();
            header.extend(["x".to_string(), "xp".to_string()]);
            header.extend(cols("g"));
            let mut csv = Csv::open(&common.out, &header)?;
            for (z, vals) in zs.iter().zip(&values) {
                let mut k = 0;
                for &x in &xs {
                    for &xp in &xs {
                        let mut row = cplx(*z).to_vec();
                        row.extend([num(x), num(xp)]);
                        row.extend(cplx(vals[k]));
                        csv.row(row)?;
                        k += 1;
                    }
                }
            }
            csv.finish()
        }
        Command::Measure { common, n } => {
            let p = load(&common)?;
            let pair = p.cfg.pair();
            let quad = AngleQuad::new(pair, p.cfg.primed().unwrap_or_else(|| pair.quarter_turn()));
            let s = eig_selfadjoint(&p.v, &pair, n, p.tol)?;
            let lambdas: Vec<Complex64> = s.eigenvalues.clone();
            let masses = par_map(&lambdas, |l| measure_point_mass(&p.v, &quad, l.re, &DEFAULT_EPS, p.tol))?;
            let mut header = vec!["lambda".to_string()];
            header.extend(mat_header("mass"));
            let mut csv = Csv::open(&common.out, &header)?;
            for (l, m) in lambdas.iter().zip(&masses) {
                let mut row = vec![num(l.re)];
                row.extend(mat_fields(m));
                csv.row(row)?;
            }
            csv.finish()
        }
        Command::Wtm { common, z, x0, alpha } => {
            let p = load(&common)?;
            let zs = z_points(&p, &z)?;
            let x0 = x0.unwrap_or(0.5 * p.v.r);
            let pair = p.cfg.pair();
            let ms = par_map(&zs, |z| Ok(wt_matrix(&p.v, z, x0, &pair, alpha, p.tol)?.matrix))?;
            let mut header: Vec<String> = cols("z").to_vec();
            header.extend(mat_header("m"));
            let mut csv = Csv::open(&common.out, &header)?;
            for (z, m) in zs.iter().zip(&ms) {
                let mut row = cplx(*z).to_vec();
                row.extend(mat_fields(m));
                csv.row(row)?;
            }
            csv.finish()
        }
        Command::Verify { common } => {
            let p = load(&common)?;
            let problem = VerifyProblem {
                potential: p.v.clone(),
                pair: p.cfg.pair(),
                primed: p.cfg.primed(),
                tol: p.tol,
            };
            let report = run_suite(&problem);
            let mut out: Box<dyn Write> = match &common.out {
                Some(path) => Box::new(io::BufWriter::new(std::fs::File::create(path)?)),
                None => Box::new(io::stdout().lock()),
            };
            writeln!(out, "{:<30} {:<6} {:>12} {:>12} {:>8}", "identity", "status", "value", "threshold", "samples")?;
            for c in &report.checks {
                let op = match c.criterion {
                    Criterion::Below => "<",
                    Criterion::Above => ">",
                };
                writeln!(
                    out,
                    "{:<30} {:<6} {:>12.3e} {:>1}{:>11.1e} {:>8}",
                    c.name,
                    c.status(),
                    c.value,
                    op,
                    c.threshold,
                    c.samples
                )?;
                if let Some(note) = &c.note {
                    writeln!(out, "    {note}")?;
                }
            }
            out.flush()?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(3)
        }
    }
}
