use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use henon::bottcher::{bottcher, green_via_bottcher};
use henon::error::Error;
use henon::grid::{evaluate_green, green_pgm, mask_pgm, write_csv, GridSpec, Slice, Window};
use henon::henon::{Direction, Point2};
use henon::mapfile::load_map;
use henon::onedim::{beardon_sigma, classify_1d, green_1d_with, PolyMap1D};
use henon::poly::{format_complex, parse_complex, parse_polynomial_in, DEFAULT_TERM_CAP};
use henon::rigidity::{
    commutator_diagonal, degree_matches, delta_minus_power, delta_plus_from_coeffs, iterate_match_capped,
};
use henon::witness::{reinhardt_witness, DEFAULT_WITNESS_SEED};

/// Green's functions, Böttcher coordinates and rigidity checks for Hénon maps.
#[derive(Parser)]
#[command(name = "henon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Error tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Iteration cap for escape classification.
    #[arg(long = "max-iter", default_value_t = 200)]
    max_iter: u32,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output path (file prefix for grid commands); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long)]
    map: PathBuf,
    /// `x=<complex>`, `y=<complex>` or `real`.
    #[arg(long, default_value = "x=0", allow_hyphen_values = true)]
    slice: String,
    /// `min1,max1,min2,max2`.
    #[arg(long, default_value = "-2,2,-2,2", allow_hyphen_values = true)]
    window: String,
    #[arg(long, default_value_t = 64)]
    res: usize,
    #[arg(long, value_enum, default_value_t = Dir::Forward)]
    dir: Dir,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Forward,
    Backward,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Forward => Direction::Forward,
            Dir::Backward => Direction::Backward,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render the Green's function on a grid as CSV and PGM.
    Green {
        #[command(flatten)]
        grid: GridArgs,
        /// Value mapped to white; defaults to the observed maximum.
        #[arg(long)]
        gmax: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Render the sub-level set {G < c} as a PGM mask.
    Mask {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        c: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the Böttcher coordinate at one point.
    Bottcher {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, value_enum, default_value_t = Dir::Forward)]
        dir: Dir,
        #[command(flatten)]
        common: Common,
    },
    /// Test F∘H = C∘H∘F for a diagonal unimodular C.
    Commute {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        h: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Search for F^m = σ∘H^n with σ affine.
    Match {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        h: PathBuf,
        /// Largest m and n tried.
        #[arg(long, default_value_t = 6)]
        max: u32,
        /// Largest number of terms an iterate may have before the search gives up.
        #[arg(long, default_value_t = DEFAULT_TERM_CAP)]
        term_cap: usize,
        #[command(flatten)]
        common: Common,
    },
    /// One-variable Green's function and the P∘Q = σ∘Q∘P test.
    Onedim {
        /// Polynomial in z.
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        /// Point at which to evaluate the Green's function of P.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Search for a bounded point whose rotation in x escapes.
    Witness {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 16)]
        theta: usize,
        #[arg(long, default_value_t = DEFAULT_WITNESS_SEED)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Lib(Error),
    Io(io::Error),
    Negative(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Syntax { .. }
        | Error::NegativeExponent { .. }
        | Error::InvalidFactor { .. }
        | Error::MapFile(_)
        | Error::Precondition(_)
        | Error::NotInFiltration => 2,
        Error::Overflow
        | Error::TermExplosion { .. }
        | Error::IterateCap { .. }
        | Error::CoefficientMismatch { .. }
        | Error::RadiusSearchFailed { .. }
        | Error::ToleranceUnreachable { .. }
        | Error::BranchDomainViolation { .. } => 3,
    }
}

fn text_sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn grid_spec(g: &GridArgs) -> Result<GridSpec, Error> {
    GridSpec::new(g.slice.parse::<Slice>()?, g.window.parse::<Window>()?, g.res)
}

fn run_green(grid: &GridArgs, gmax: Option<f64>, common: &Common) -> Outcome {
    let map = load_map(&grid.map)?;
    let spec = grid_spec(grid)?;
    let samples = evaluate_green(&map, &spec, grid.dir.into(), common.tol, common.max_iter)?;
    match &common.out {
        Some(prefix) => {
            let mut csv = BufWriter::new(File::create(with_extension(prefix, "csv"))?);
            write_csv(&mut csv, &samples)?;
            csv.flush()?;
            std::fs::write(with_extension(prefix, "pgm"), green_pgm(&samples, spec.res, gmax))?;
        }
        None => {
            let mut out = text_sink(&None)?;
            write_csv(&mut out, &samples)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run_mask(grid: &GridArgs, c: f64, common: &Common) -> Outcome {
    if !(c > 0.0) {
        return Err(Error::Precondition("mask needs c > 0".into()).into());
    }
    let map = load_map(&grid.map)?;
    let spec = grid_spec(grid)?;
    let samples = evaluate_green(&map, &spec, grid.dir.into(), common.tol, common.max_iter)?;
    let bytes = mask_pgm(&samples, spec.res, c);
    match &common.out {
        Some(prefix) => std::fs::write(with_extension(prefix, "pgm"), bytes)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run_bottcher(map: &Path, x: &str, y: &str, dir: Dir, common: &Common) -> Outcome {
    let map = load_map(map)?;
    let z = Point2::new(parse_complex(x)?, parse_complex(y)?);
    let phi = bottcher(&map, z, dir.into(), common.tol)?;
    let g = green_via_bottcher(&map, z, dir.into(), common.tol)?;
    let mut out = text_sink(&common.out)?;
    writeln!(out, "phi: {}", format_complex(phi.value))?;
    writeln!(out, "relative error bound: {:e}", phi.error_bound)?;
    writeln!(out, "iterations: {}", phi.iterations)?;
    writeln!(out, "green: {} (error bound {:e})", g.value, g.error_bound)?;
    out.flush()?;
    Ok(())
}

fn run_commute(f: &Path, h: &Path, common: &Common) -> Outcome {
    let f = load_map(f)?;
    let h = load_map(h)?;
    let report = commutator_diagonal(&f, &h)?;
    let mut out = text_sink(&common.out)?;
    writeln!(out, "{report}")?;
    writeln!(
        out,
        "delta_plus from leading coefficients: {}",
        format_complex(delta_plus_from_coeffs(&f, &h))
    )?;
    writeln!(
        out,
        "delta_minus^{} from leading coefficients: {}",
        f.degree() * h.degree(),
        format_complex(delta_minus_power(&f, &h))
    )?;
    out.flush()?;
    match report.witness {
        Some(_) => Ok(()),
        None => Err(Failure::Negative("no diagonal unimodular C with F∘H = C∘H∘F".into())),
    }
}

fn run_match(f: &Path, h: &Path, max: u32, term_cap: usize, common: &Common) -> Outcome {
    let f = load_map(f)?;
    let h = load_map(h)?;
    if degree_matches(f.degree(), h.degree(), max, max).is_empty() {
        return Err(Failure::Negative("no (m,n) with d_F^m = d_H^n".into()));
    }
    match iterate_match_capped(&f, &h, max, max, term_cap)? {
        Some(m) => {
            let mut out = text_sink(&common.out)?;
            writeln!(out, "m0: {}", m.m0)?;
            writeln!(out, "n0: {}", m.n0)?;
            writeln!(out, "sigma: {}", m.sigma)?;
            writeln!(out, "residual: {:e}", m.residual)?;
            out.flush()?;
            Ok(())
        }
        None => Err(Failure::Negative(
            "no affine sigma with F^m = sigma∘H^n for any admissible (m,n)".into(),
        )),
    }
}

fn run_onedim(p: &str, q: Option<&str>, z: Option<&str>, common: &Common) -> Outcome {
    let p = PolyMap1D::new(parse_polynomial_in(p, 'z')?)?;
    let mut out = text_sink(&common.out)?;
    writeln!(out, "escape radius: {}", p.escape_radius())?;
    if let Some(z) = z {
        let z = parse_complex(z)?;
        let class = classify_1d(&p, z, common.max_iter)?;
        let g = green_1d_with(&p, z, common.tol, common.max_iter)?;
        writeln!(out, "class: {}", class.label())?;
        writeln!(out, "green: {} (error bound {:e})", g.value, g.error_bound)?;
    }
    let mut negative = None;
    if let Some(q) = q {
        let q = PolyMap1D::new(parse_polynomial_in(q, 'z')?)?;
        match beardon_sigma(&p, &q) {
            Some(s) => writeln!(out, "sigma: {s}")?,
            None => negative = Some("no sigma(z) = az + b with |a| = 1 and P∘Q = sigma∘Q∘P".to_string()),
        }
    }
    out.flush()?;
    match negative {
        Some(m) => Err(Failure::Negative(m)),
        None => Ok(()),
    }
}

fn run_witness(map: &Path, samples: usize, theta: usize, seed: u64, common: &Common) -> Outcome {
    let map = load_map(map)?;
    match reinhardt_witness(&map, samples, theta, common.max_iter, seed)? {
        Some(w) => {
            let mut out = text_sink(&common.out)?;
            writeln!(out, "point: {}", w.point)?;
            writeln!(out, "theta: {}", w.theta)?;
            writeln!(out, "rotated: {}", w.rotated)?;
            writeln!(out, "rotated orbit enters V+ at step {}", w.escape_step)?;
            writeln!(out, "samples used: {}", w.samples_used)?;
            out.flush()?;
            Ok(())
        }
        None => Err(Failure::Negative("no witness found".into())),
    }
}

fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Green { grid, gmax, common } => run_green(grid, *gmax, common),
        Command::Mask { grid, c, common } => run_mask(grid, *c, common),
        Command::Bottcher { map, x, y, dir, common } => run_bottcher(map, x, y, *dir, common),
        Command::Commute { f, h, common } => run_commute(f, h, common),
        Command::Match { f, h, max, term_cap, common } => run_match(f, h, *max, *term_cap, common),
        Command::Onedim { p, q, z, common } => run_onedim(p, q.as_deref(), z.as_deref(), common),
        Command::Witness { map, samples, theta, seed, common } => {
            run_witness(map, *samples, *theta, *seed, common)
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Green { common, .. }
        | Command::Mask { common, .. }
        | Command::Bottcher { common, .. }
        | Command::Commute { common, .. }
        | Command::Match { common, .. }
        | Command::Onedim { common, .. }
        | Command::Witness { common, .. } => common,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = common(&cli.command).threads;
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative(msg)) => {
            println!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
