//! Command-line front end. Every number printed comes from a library call.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on usage or
//! parameter errors.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::emmap::{classify, critical_data, region_boundaries, regions_present, Region};
use crate::error::Error;
use crate::model::Params;
use crate::orbits::{collision_orbits, periodic_orbit, verify_theorems, CollisionPoint, OrbitSpec};
use crate::parallel::Execution;
use crate::periods::{
    atlas, linspace, modulus_data, rotation_number, solve_g, w_range, TorusSelector,
};
use crate::sturmian::{
    canonical_rational_word, enumerate_syzygy_words, family_word, is_balanced, orbit_count,
    sturmian_exponents, word_from_exponents, Family, Grid, Rational, SlopeIntercept, Symbol,
    SymbolWord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "two-centers",
    version,
    about = "Syzygy words and rotation numbers of the two fixed center problem"
)]
pub struct Cli {
    /// Mass of the center at (-1, 0).
    #[arg(
        long,
        global = true,
        default_value_t = 0.5,
        allow_negative_numbers = true
    )]
    pub m1: f64,
    /// Mass of the center at (1, 0).
    #[arg(
        long,
        global = true,
        default_value_t = 0.5,
        allow_negative_numbers = true
    )]
    pub m2: f64,
    /// Run sweeps on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region, torus count, critical values and boundaries at (g, h).
    Classify {
        #[arg(long, allow_negative_numbers = true)]
        h: f64,
        #[arg(long, allow_negative_numbers = true)]
        g: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// CSV grid of region, periods and rotation number.
    Atlas {
        /// `gmin:gmax:n,hmin:hmax:n`.
        #[arg(
            long,
            default_value = "-1.5:1.5:61,-1.5:-0.05:59",
            allow_hyphen_values = true
        )]
        grid: GridSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Periods, rotation number and moduli at (g, h).
    Periods {
        #[arg(long, allow_negative_numbers = true)]
        h: f64,
        #[arg(long, allow_negative_numbers = true)]
        g: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Sturmian exponents and words.
    Word(WordArgs),
    /// Integrate a periodic orbit and print its syzygy word.
    Orbit {
        #[command(flatten)]
        torus: TorusArgs,
        /// Torus angles `theta_nu,theta_lambda` in [0, 1).
        #[arg(long, default_value = "0.1,0.05")]
        phases: PhasePair,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Collision-collision orbits of a torus.
    Collision {
        #[command(flatten)]
        torus: TorusArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check integrated words against the predictions.
    Verify {
        #[arg(long, allow_negative_numbers = true)]
        h: f64,
        /// Comma-separated rotation numbers.
        #[arg(
            long = "W",
            value_delimiter = ',',
            default_value = "1,2,3,1/2,2/3,3/2,5/2"
        )]
        w: Vec<Rational>,
        /// Phases per torus.
        #[arg(long, default_value_t = 8)]
        phases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the cyclic syzygy words up to a length.
    Enumerate {
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct TorusArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub h: f64,
    /// Separation constant; alternative to `--W` with `--region`.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "w")]
    pub g: Option<f64>,
    /// Rational rotation number `p/q`.
    #[arg(long = "W")]
    pub w: Option<Rational>,
    #[arg(long)]
    pub region: Option<Region>,
    #[arg(long, default_value = "first")]
    pub torus: TorusSelector,
}

#[derive(Debug, Args)]
pub struct WordArgs {
    /// Slope: a rational `p/q` or a decimal.
    #[arg(long = "W")]
    pub w: String,
    /// Torus family (`L`, `S1`, `S2`, `P`) for a syzygy word; V/H word if absent.
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long, default_value = "unit")]
    pub grid: Grid,
    /// Intercept for a decimal slope.
    #[arg(long, default_value_t = 0.15)]
    pub intercept: f64,
    /// Vertical crossings to generate for a decimal slope.
    #[arg(long, default_value_t = 8)]
    pub max_len: usize,
}

/// `gmin:gmax:n,hmin:hmax:n` with both resolutions at least 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub g: (f64, f64, usize),
    pub h: (f64, f64, usize),
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let axis = |t: &str| -> Result<(f64, f64, usize), String> {
            let parts: Vec<&str> = t.split(':').collect();
            let [a, b, n] = parts[..] else {
                return Err(format!("axis {t:?} is not lo:hi:n"));
            };
            let lo: f64 = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
            let hi: f64 = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
            let n: usize = n.trim().parse().map_err(|_| format!("bad count {n:?}"))?;
            if n < 2 || lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(format!("axis {t:?} needs lo < hi and n >= 2"));
            }
            Ok((lo, hi, n))
        };
        let (g, h) = s
            .split_once(',')
            .ok_or_else(|| format!("grid {s:?} is not g-axis,h-axis"))?;
        let spec = GridSpec {
            g: axis(g)?,
            h: axis(h)?,
        };
        if spec.h.1 >= 0.0 {
            return Err("the h-range must lie below 0".into());
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePair(pub f64, pub f64);

impl FromStr for PhasePair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("phases {s:?} are not a,b"))?;
        let a: f64 = a.trim().parse().map_err(|_| format!("bad phase {a:?}"))?;
        let b: f64 = b.trim().parse().map_err(|_| format!("bad phase {b:?}"))?;
        Ok(PhasePair(a, b))
    }
}

/// Failure of a command, mapped onto an exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
    /// The reader went away; not an error.
    Closed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return CliError::Closed;
        }
        CliError::Failed(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if let csv::ErrorKind::Io(io) = e.kind() {
            if io.kind() == io::ErrorKind::BrokenPipe {
                return CliError::Closed;
            }
        }
        CliError::Failed(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

type CliResult = Result<i32, CliError>;

fn json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

/// Parse `args` and run the command, writing to `out`. Returns the exit status.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Failed(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_FAILED
        }
        Err(CliError::Closed) => EXIT_OK,
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Auto
    };
    let params = |h: f64| Params::new(cli.m1, cli.m2, h);
    match &cli.command {
        Command::Classify { h, g, format } => cmd_classify(&params(*h)?, *g, *format, out),
        Command::Atlas { grid, out: path } => {
            cmd_atlas(cli.m1, cli.m2, grid, path.as_deref(), exec, out)
        }
        Command::Periods { h, g, format } => cmd_periods(&params(*h)?, *g, *format, out),
        Command::Word(args) => cmd_word(args, out),
        Command::Orbit {
            torus,
            phases,
            out: path,
            format,
        } => cmd_orbit(
            &params(torus.h)?,
            torus,
            *phases,
            path.as_deref(),
            *format,
            out,
        ),
        Command::Collision { torus, format } => {
            cmd_collision(&params(torus.h)?, torus, *format, out)
        }
        Command::Verify {
            h,
            w,
            phases,
            seed,
            out: path,
        } => cmd_verify(&params(*h)?, w, *phases, *seed, path.as_deref(), exec, out),
        Command::Enumerate { max_len, format } => cmd_enumerate(*max_len, *format, out),
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    g: f64,
    h: f64,
    region: Region,
    torus_count: usize,
    critical: crate::emmap::CriticalData,
    boundaries: Vec<crate::emmap::Boundary>,
    regions_present: Vec<Region>,
}

fn cmd_classify(p: &Params, g: f64, format: Format, out: &mut dyn Write) -> CliResult {
    let region = classify(g, p);
    let report = ClassifyReport {
        g,
        h: p.h,
        region,
        torus_count: region.torus_count(),
        critical: critical_data(p),
        boundaries: region_boundaries(p),
        regions_present: regions_present(p),
    };
    if format == Format::Json {
        json(out, &report)?;
        return Ok(EXIT_OK);
    }
    let c = &report.critical;
    writeln!(out, "region {}", report.region)?;
    writeln!(out, "tori {}", report.torus_count)?;
    writeln!(
        out,
        "h_star {} h_lambda {} h_nu {}",
        c.h_star, c.h_lambda, c.h_nu
    )?;
    writeln!(
        out,
        "kappa_-- {} kappa_-+ {} kappa_++ {} chi_- {} chi_+ {}",
        c.kappa_mm, c.kappa_mp, c.kappa_pp, c.chi_m, c.chi_p
    )?;
    for b in &report.boundaries {
        let labels: Vec<&str> = b.curves.iter().map(|c| c.label()).collect();
        writeln!(out, "boundary {} {}", b.g, labels.join("="))?;
    }
    let names: Vec<&str> = report.regions_present.iter().map(|r| r.name()).collect();
    writeln!(out, "regions {}", names.join(" "))?;
    Ok(EXIT_OK)
}

fn cmd_atlas(
    m1: f64,
    m2: f64,
    grid: &GridSpec,
    path: Option<&Path>,
    exec: Execution,
    out: &mut dyn Write,
) -> CliResult {
    let gs = linspace(grid.g.0, grid.g.1, grid.g.2);
    let hs = linspace(grid.h.0, grid.h.1, grid.h.2);
    let rows = atlas(m1, m2, &gs, &hs, exec)?;
    let sink: Box<dyn Write + '_> = match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(&mut *out),
    };
    let mut wr = csv::Writer::from_writer(sink);
    for row in &rows {
        wr.serialize(row)?;
    }
    wr.flush()?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PeriodsReport {
    #[serde(flatten)]
    torus: crate::periods::TorusData,
    moduli: crate::periods::ModulusData,
}

fn cmd_periods(p: &Params, g: f64, format: Format, out: &mut dyn Write) -> CliResult {
    let torus = rotation_number(g, p)?;
    let report = PeriodsReport {
        torus,
        moduli: modulus_data(g, p),
    };
    if format == Format::Json {
        json(out, &report)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "region {}", torus.region)?;
    writeln!(
        out,
        "T_lambda {} ({})",
        torus.t_lambda,
        torus.lambda_branch.label()
    )?;
    writeln!(out, "T_nu {} ({})", torus.t_nu, torus.nu_branch.label())?;
    writeln!(out, "W {}", torus.w)?;
    Ok(EXIT_OK)
}

fn parse_family(s: &str) -> Result<Family, CliError> {
    match s.to_ascii_uppercase().as_str() {
        "L" => Ok(Family::L),
        "P" => Ok(Family::P),
        "S" | "S1" => Ok(Family::S(Symbol::One)),
        "S2" => Ok(Family::S(Symbol::Two)),
        _ => Err(CliError::Usage(format!(
            "unknown family {s:?}; use L, S1, S2 or P"
        ))),
    }
}

fn cmd_word(args: &WordArgs, out: &mut dyn Write) -> CliResult {
    if let Ok(r) = args.w.parse::<Rational>() {
        let word = match &args.region {
            Some(f) => family_word(parse_family(f)?, r),
            None => canonical_rational_word(r, args.grid),
        };
        let bal = is_balanced(&word);
        writeln!(out, "{word}")?;
        writeln!(out, "length {}", word.len())?;
        if let (Some(a), Some(b)) = (bal.min_run, bal.max_run) {
            writeln!(out, "runs {a}..{b}")?;
        }
        return Ok(EXIT_OK);
    }
    let m: f64 = args
        .w
        .parse()
        .map_err(|_| CliError::Usage(format!("bad slope {:?}", args.w)))?;
    let si = SlopeIntercept::new(m, args.intercept)?;
    let e = sturmian_exponents(&si, args.max_len)?;
    let word = match &args.region {
        Some(f) => match parse_family(f)? {
            Family::L => word_from_exponents(&e, &[Symbol::One, Symbol::Two], Symbol::Three),
            Family::S(s) => word_from_exponents(&e, &[s], Symbol::Three),
            Family::P => return Err(CliError::Usage("P words need a rational slope".into())),
        },
        None => word_from_exponents(&e, &[Symbol::V], Symbol::H),
    };
    writeln!(out, "exponents {e}")?;
    writeln!(out, "{word}")?;
    Ok(EXIT_OK)
}

fn orbit_spec(t: &TorusArgs, p: &Params, phases: (f64, f64)) -> Result<OrbitSpec, CliError> {
    match (t.g, t.w, t.region) {
        (Some(g), w, region) => {
            let w = match w {
                Some(w) => w,
                None => return Err(CliError::Usage("a periodic orbit needs --W".into())),
            };
            Ok(OrbitSpec {
                g: Some(g),
                region,
                w: Some(w),
                phases,
                torus: t.torus,
            })
        }
        (None, Some(w), Some(region)) => Ok(OrbitSpec::from_w(region, w, phases, t.torus)),
        (None, Some(w), None) => {
            // The first region at this energy whose range contains W.
            let region = regions_present(p)
                .into_iter()
                .find(|&r| w_range(r, p).is_ok_and(|(lo, hi)| w.value() > lo && w.value() < hi))
                .ok_or_else(|| CliError::Usage(format!("no region at h = {} has W = {w}", p.h)))?;
            Ok(OrbitSpec::from_w(region, w, phases, t.torus))
        }
        (None, None, _) => Err(CliError::Usage("give --W (with --region) or --g".into())),
    }
}

fn cmd_orbit(
    p: &Params,
    t: &TorusArgs,
    phases: PhasePair,
    path: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
) -> CliResult {
    let spec = orbit_spec(t, p, (phases.0, phases.1))?;
    let orbit = periodic_orbit(&spec, p)?;
    if let Some(path) = path {
        let mut f = create(path)?;
        match format {
            Format::Svg => f.write_all(orbit.trajectory.to_svg().as_bytes())?,
            Format::Json => serde_json::to_writer_pretty(&mut f, &orbit)?,
            Format::Csv | Format::Text => orbit.trajectory.write_csv(&mut f)?,
        }
    }
    writeln!(out, "{}", SymbolWord::new(orbit.word.canonical(), true))?;
    Ok(EXIT_OK)
}

fn cmd_collision(p: &Params, t: &TorusArgs, format: Format, out: &mut dyn Write) -> CliResult {
    let g = match (t.g, t.w, t.region) {
        (Some(g), _, _) => g,
        (None, Some(w), Some(region)) => solve_g(region, w.value(), p)?.g,
        _ => return Err(CliError::Usage("give --g, or --W with --region".into())),
    };
    let orbits = collision_orbits(g, p, t.torus)?;
    if format == Format::Json {
        json(out, &orbits)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "g {g}")?;
    for o in &orbits {
        let end = o.end.expect("collision orbits end at a center");
        writeln!(
            out,
            "center {} ({}) -> center {} ({}) residual {:e} tau {}",
            o.start.center,
            momentum_signs(&o.start),
            end.center,
            momentum_signs(&end),
            o.end_residual.unwrap_or(f64::NAN),
            o.trajectory.end().tau
        )?;
    }
    writeln!(out, "count {}", orbits.len())?;
    Ok(EXIT_OK)
}

fn momentum_signs(c: &CollisionPoint) -> String {
    let sign = |b: bool| if b { '+' } else { '-' };
    format!(
        "p_lambda {}, p_nu {}",
        sign(c.p_lambda_positive),
        sign(c.p_nu_positive)
    )
}

fn cmd_verify(
    p: &Params,
    ws: &[Rational],
    phases: usize,
    seed: u64,
    path: Option<&Path>,
    exec: Execution,
    out: &mut dyn Write,
) -> CliResult {
    let report = verify_theorems(p, ws, phases, seed, exec);
    match path {
        Some(path) => {
            let mut f = create(path)?;
            serde_json::to_writer_pretty(&mut f, &report)?;
            for (name, ok) in &report.checks {
                writeln!(out, "{} {name}", if *ok { "PASS" } else { "FAIL" })?;
            }
        }
        None => json(out, &report)?,
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct EnumerateReport {
    max_len: usize,
    words: Vec<String>,
    count: usize,
    orbit_count: usize,
}

fn cmd_enumerate(max_len: usize, format: Format, out: &mut dyn Write) -> CliResult {
    let words = enumerate_syzygy_words(max_len);
    let report = EnumerateReport {
        max_len,
        count: words.len(),
        words: words.iter().map(|w| w.to_string()).collect(),
        orbit_count: orbit_count(max_len),
    };
    if format == Format::Json {
        json(out, &report)?;
        return Ok(EXIT_OK);
    }
    for w in &report.words {
        writeln!(out, "{w}")?;
    }
    writeln!(out, "count {}", report.count)?;
    writeln!(out, "orbit classes {}", report.orbit_count)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_from(
            std::iter::once("two-centers").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap() + &String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn grid_spec_parsing() {
        let g: GridSpec = "-1:1:5,-2:-0.5:3".parse().unwrap();
        assert_eq!(g.g, (-1.0, 1.0, 5));
        assert!("-1:1:1,-2:-0.5:3".parse::<GridSpec>().is_err());
        assert!("-1:1:4,-2:0.5:3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn classify_text() {
        let (code, text) = run(&["classify", "--h", "-0.23", "--g", "0.4"]);
        assert_eq!(code, 0);
        assert!(
            text.contains("region L") && text.contains("tori 1"),
            "{text}"
        );
        let (_, text) = run(&["classify", "--h", "-0.23", "--g", "0.77"]);
        assert!(text.contains("region Critical"), "{text}");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(&["classify", "--h", "-0.23"]).0, EXIT_USAGE);
        assert_eq!(run(&["periods", "--h", "-0.23", "--g", "5"]).0, EXIT_USAGE);
        assert_eq!(
            run(&["--m1", "-1", "classify", "--h", "-0.23", "--g", "0"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn word_commands() {
        let (code, text) = run(&[
            "word",
            "--W",
            "0.3183098861837907",
            "--intercept",
            "0.15",
            "--max-len",
            "5",
        ]);
        assert_eq!(code, 0);
        assert!(
            text.contains("exponents 0,0,1,0,") && text.contains("VVVHVV"),
            "{text}"
        );
        let (_, text) = run(&["word", "--W", "2", "--region", "L"]);
        assert!(text.starts_with("133233"), "{text}");
    }
}
