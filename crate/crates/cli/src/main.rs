//! `dwave`: batch front end for the delay-waves library.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 guard or certificate
//! failure, 3 numerical failure.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use delay_waves::charpoly::{winding_count, ExponentialPolynomial, Rectangle};
use delay_waves::green::{green_table, principal_roots, OperatorParams};
use delay_waves::models::{GridSpec, ModelSpec};
use delay_waves::simulate::{run_with_observer, suggest_dtime, validation_dx, wave_speed_estimate, PdeState, Trajectory};
use delay_waves::waves::{iterate, validate_wave, IterationReport, VerificationReport, WaveValidation};
use delay_waves::{Error, ErrorClass};
use serde::Serialize;

use config::{need, RunConfig};

const SCHEMA_SOLVE: &str = "delay-waves/solve-report/v1";
const SCHEMA_SIMULATE: &str = "delay-waves/simulate-report/v1";
const SCHEMA_VERIFY: &str = "delay-waves/verify-report/v1";
const SCHEMA_GREEN: &str = "delay-waves/green-report/v1";

/// Half-height of the root-counting rectangles.
const STRIP_HEIGHT: f64 = 50.0;

#[derive(Debug, Parser)]
#[command(name = "dwave", version, about = "Traveling fronts of delayed reaction-diffusion equations")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Principal characteristic roots over a range of delays, with strip root counts.
    Roots(RunConfig),
    /// Tabulate the Green function and check its sign.
    Green(RunConfig),
    /// Compute a wave by monotone iteration.
    Solve(RunConfig),
    /// Integrate the PDE from the computed wave and measure its speed.
    Simulate(RunConfig),
    /// Check the upper and lower solutions of a model.
    Verify(RunConfig),
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Lib(e) => match e.class() {
                ErrorClass::Io => 1,
                ErrorClass::Guard => 2,
                ErrorClass::Numerical => 3,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Outcome {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let (name, flags) = match &cli.command {
        Command::Roots(c) => ("roots", c),
        Command::Green(c) => ("green", c),
        Command::Solve(c) => ("solve", c),
        Command::Simulate(c) => ("simulate", c),
        Command::Verify(c) => ("verify", c),
    };
    file.check_command(name)?;
    let cfg = flags.over(&file);
    let out = Output::new(&cfg, name)?;
    match cli.command {
        Command::Roots(_) => roots(&cfg, &out),
        Command::Green(_) => green(&cfg, &out),
        Command::Solve(_) => solve(&cfg, &out),
        Command::Simulate(_) => simulate(&cfg, &out),
        Command::Verify(_) => verify(&cfg, &out),
    }
}

/// Output directory plus the CSV metadata line.
struct Output {
    dir: PathBuf,
    meta: Option<String>,
}

impl Output {
    fn new(cfg: &RunConfig, command: &str) -> Result<Self, Failure> {
        let dir = cfg.out_dir();
        std::fs::create_dir_all(&dir)?;
        let meta = (!cfg.no_meta).then(|| {
            let stamp = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            format!("# dwave {} {command} unix_time={stamp}", env!("CARGO_PKG_VERSION"))
        });
        Ok(Self { dir, meta })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Opens a CSV and writes the metadata line.
    fn csv(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), Failure> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path)?);
        if let Some(m) = &self.meta {
            writeln!(w, "{m}")?;
        }
        Ok((path, w))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, Failure> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
        writeln!(w)?;
        w.flush()?;
        Ok(path)
    }
}

fn roots(cfg: &RunConfig, out: &Output) -> Outcome {
    let (a, b) = (need(cfg.a, "a")?, need(cfg.b, "b")?);
    let r_max = cfg.r_max.unwrap_or(0.1);
    let steps = cfg.r_steps.unwrap_or(10).max(1);
    if !(r_max >= 0.0) {
        return Err(Failure::Usage(format!("--r-max must be nonnegative (got {r_max})")));
    }
    let (l1, l2) = delay_waves::charpoly::roots_nodelay(a, b)?;
    let right = Rectangle::new(0.0, 2.0 * l1, -STRIP_HEIGHT, STRIP_HEIGHT)?;
    let left = Rectangle::new(2.0 * l2, 0.0, -STRIP_HEIGHT, STRIP_HEIGHT)?;

    let (roots_path, mut rw) = out.csv("roots.csv")?;
    let (counts_path, mut cw) = out.csv("strip_counts.csv")?;
    writeln!(rw, "r (delay),eta1 (1/time),eta2 (1/time)")?;
    writeln!(cw, "r (delay),right_strip (roots),left_strip (roots)")?;
    let mut all_single = true;
    for j in 0..=steps {
        let r = r_max * j as f64 / steps as f64;
        let eta = principal_roots(&OperatorParams::unit(a, b, r)?)?;
        writeln!(rw, "{r:e},{:e},{:e}", eta.eta1, eta.eta2)?;
        let p = ExponentialPolynomial::characteristic(a, b, r);
        let (nr, nl) = (winding_count(&p, &right, 1e-9)?, winding_count(&p, &left, 1e-9)?);
        all_single &= nr == 1 && nl == 1;
        writeln!(cw, "{r:e},{nr},{nl}")?;
    }
    rw.flush()?;
    cw.flush()?;
    println!("wrote {} and {}", roots_path.display(), counts_path.display());
    if !all_single {
        return Err(Error::MissingCertificate("a strip holds other than one root; see strip_counts.csv".into()).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct GreenReport<'a> {
    schema: &'static str,
    params: OperatorParams,
    eta1: f64,
    eta2: f64,
    hyperbolicity_margin: f64,
    negativity_certified: bool,
    first_violation: Option<f64>,
    max_value: f64,
    envelope: &'a delay_waves::green::Envelope,
}

fn green(cfg: &RunConfig, out: &Output) -> Outcome {
    let params = OperatorParams::unit(need(cfg.a, "a")?, need(cfg.b, "b")?, cfg.r.unwrap_or(0.0))?;
    let (t_min, t_max) = (cfg.t_min.unwrap_or(-10.0), cfg.t_max.unwrap_or(10.0));
    let table = green_table(&params, t_min, t_max, cfg.dt.unwrap_or(0.01))?;
    let (path, mut w) = out.csv("green.csv")?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let report = GreenReport {
        schema: SCHEMA_GREEN,
        params,
        eta1: table.eta.eta1,
        eta2: table.eta.eta2,
        hyperbolicity_margin: table.margin,
        negativity_certified: table.negativity_certified,
        first_violation: table.first_violation,
        max_value: table.max_value(),
        envelope: &table.envelope,
    };
    let json = out.json("green.json", &report)?;
    println!(
        "wrote {} and {}; G < 0 on all {} samples: {}",
        path.display(),
        json.display(),
        table.values.len(),
        table.negativity_certified
    );
    match table.first_violation {
        Some(t) => Err(Error::MissingCertificate(format!("negativity of G fails at t = {t}")).into()),
        None => Ok(()),
    }
}

fn build(cfg: &RunConfig) -> Result<(ModelSpec, GridSpec, delay_waves::models::Candidates), Failure> {
    let spec = cfg.model_spec()?;
    let grid = cfg.grid();
    let cand = spec.build(&grid)?;
    Ok((spec, grid, cand))
}

#[derive(Serialize)]
struct SolveReport<'a> {
    schema: &'static str,
    model: ModelSpec,
    grid: GridSpec,
    tol: f64,
    iteration: &'a IterationReport,
    validation: &'a WaveValidation,
}

const PLOT_SCRIPT: &str = "\
set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
set xlabel 't (wave coordinate)'
set ylabel 'concentration'
set terminal pngcairo size 900,600
set output 'profile.png'
";

fn solve(cfg: &RunConfig, out: &Output) -> Outcome {
    let (spec, grid, cand) = build(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let (phi, rep) = iterate(&cand.model, &cand.upper, &cand.lower, tol, cfg.max_iter.unwrap_or(200))?;
    let validation = validate_wave(&cand.model, &phi)?;

    let (csv, mut w) = out.csv("profile.csv")?;
    phi.write_csv(&mut w)?;
    w.flush()?;
    let report = SolveReport {
        schema: SCHEMA_SOLVE,
        model: spec,
        grid,
        tol,
        iteration: &rep,
        validation: &validation,
    };
    let json = out.json("report.json", &report)?;
    let plot = out.path("plot.gp");
    let mut script = String::from(PLOT_SCRIPT);
    let curves: Vec<String> = (0..phi.m()).map(|i| format!("'profile.csv' using 1:{} with lines", i + 2)).collect();
    script.push_str(&format!("plot {}\n", curves.join(", ")));
    std::fs::write(&plot, script)?;
    println!(
        "converged in {} steps (last delta {:.2e}); residual {:.2e}; wrote {}, {}, {}",
        rep.iterations,
        rep.deltas.last().copied().unwrap_or(0.0),
        validation.residual,
        csv.display(),
        json.display(),
        plot.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    schema: &'static str,
    model: ModelSpec,
    dx: f64,
    dtime: f64,
    x_min: f64,
    x_max: f64,
    t_end: f64,
    expected_speed: f64,
    measured_speed: f64,
    distance_to_wave: f64,
    trajectory: &'a Trajectory,
}

fn simulate(cfg: &RunConfig, out: &Output) -> Outcome {
    let (spec, _, cand) = build(cfg)?;
    let (phi, _) = iterate(&cand.model, &cand.upper, &cand.lower, cfg.tol.unwrap_or(1e-6), cfg.max_iter.unwrap_or(200))?;
    let model = &cand.model;
    let t_end = cfg.t_end.unwrap_or(5.0);
    let dx = cfg.dx.unwrap_or_else(|| validation_dx(model));
    let dtime = suggest_dtime(model, dx)?;
    let (x_min, x_max) = (-80.0 - model.c * t_end, 80.0);
    let init = PdeState::from_profile(model, &phi, x_min, x_max, dx, dtime)?;
    let stride = cfg.stride.unwrap_or(10);

    let (csv, mut w) = out.csv("trajectory.csv")?;
    let mut first = true;
    let (end, traj) = run_with_observer(model, init, t_end, cfg.output_interval.unwrap_or(0.5), |s| {
        s.write_snapshot(&mut w, first, stride)?;
        first = false;
        Ok(())
    })?;
    w.flush()?;
    let speed = wave_speed_estimate(&traj)?;
    let report = SimulateReport {
        schema: SCHEMA_SIMULATE,
        model: spec,
        dx,
        dtime,
        x_min,
        x_max,
        t_end,
        expected_speed: model.c,
        measured_speed: speed,
        distance_to_wave: end.distance_to_wave(&phi, model.c),
        trajectory: &traj,
    };
    let json = out.json("simulate.json", &report)?;
    println!(
        "measured speed {speed:.6} (c = {}), distance to translated wave {:.2e}; wrote {}, {}",
        model.c,
        report.distance_to_wave,
        csv.display(),
        json.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema: &'static str,
    model: ModelSpec,
    grid: GridSpec,
    upper: &'a VerificationReport,
    lower: &'a VerificationReport,
}

fn verify(cfg: &RunConfig, out: &Output) -> Outcome {
    let (spec, grid, cand) = build(cfg)?;
    let report = VerifyReport {
        schema: SCHEMA_VERIFY,
        model: spec,
        grid,
        upper: &cand.upper_report,
        lower: &cand.lower_report,
    };
    let json = out.json("verify.json", &report)?;
    println!(
        "upper: worst {:.2e} over {} points; lower: worst {:.2e} over {} points; wrote {}",
        cand.upper_report.worst_value,
        cand.upper_report.checked_points,
        cand.lower_report.worst_value,
        cand.lower_report.checked_points,
        json.display()
    );
    Ok(())
}
