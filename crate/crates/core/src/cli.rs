//! Command-line front end.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::grover::{
    apply_iteration, phase_matching_angle, run, Kernel, PhaseSchedule, ProblemSpec, ScheduleKind,
};
use crate::hillfit::{fit_hill, fit_secondary, ModelId};
use crate::pipeline::{self, compare, scan, DEFAULT_TARGET_N};
use crate::sweep::{
    cross_section, csv_error, grid, robustness_interval, Dependence, SampleSet,
    DEFAULT_CROSS_SECTION_SAMPLES, DEFAULT_DELTA, DEFAULT_GRID_SIZE,
};
use crate::verify::{run_suite, Suite};

#[derive(Debug, Parser)]
#[command(
    name = "phaselab",
    version,
    about = "Phase-error robustness of Grover search variants"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the success probability for one phase pair.
    Simulate(SimulateArgs),
    /// Sample p along one dependence and write phi,omega,p rows.
    Sweep(SweepArgs),
    /// Sample p on a phi x omega grid (rows index phi).
    Grid(GridArgs),
    /// Fit a model to a CSV file and write a JSON document.
    Fit(FitArgs),
    /// Hill-fit every dependence for a range of register sizes.
    Scan(ScanArgs),
    /// Secondary fits, extrapolation and ranking from scan records.
    Report(ReportArgs),
    /// Run the built-in consistency suites.
    Verify(VerifyArgs),
    /// Phase giving deterministic success under phase matching.
    PhaseMatch(ProblemArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Register size N.
    #[arg(long)]
    pub n: usize,
    /// Number of solutions M.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// oph, spm, acsp, acbp, hidp or custom.
    #[arg(long, default_value = "oph")]
    pub schedule: ScheduleKind,
    /// Override the schedule's kernel (plus or minus).
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<Kernel>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Oracle phase in radians; `pi` is accepted.
    #[arg(long, value_parser = parse_angle, default_value = "pi", allow_hyphen_values = true)]
    pub phi: f64,
    /// Diffusion phase in radians; `pi` is accepted.
    #[arg(long, value_parser = parse_angle, default_value = "pi", allow_hyphen_values = true)]
    pub omega: f64,
    /// Iteration count [default: floor(pi/4 * sqrt(N/M)), at least 1].
    #[arg(long)]
    pub iters: Option<usize>,
    /// Per-iteration phi,omega pairs for the custom schedule.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// omega-eq-phi, omega-eq-2pi-minus-phi, omega-eq-pi or phi-eq-pi.
    #[arg(long, default_value = "omega-eq-phi")]
    pub dependence: Dependence,
    /// Points on [0, 2pi], endpoints included.
    #[arg(long, default_value_t = DEFAULT_CROSS_SECTION_SAMPLES)]
    pub samples: usize,
    /// Also print the robustness interval for this relative tolerance.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Nodes along phi.
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub rows: usize,
    /// Nodes along omega.
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub cols: usize,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// phi,omega,p samples for hill; N,value rows for the secondary models.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// hill, sat-exp or logistic-offset.
    #[arg(long, default_value = "hill")]
    pub model: ModelId,
    /// Output document [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluate the fitted secondary model at this register size.
    #[arg(long)]
    pub extrapolate: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// oph, spm, acsp, acbp or hidp.
    #[arg(long, default_value = "oph")]
    pub schedule: ScheduleKind,
    /// Override the schedule's kernel (plus or minus).
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<Kernel>,
    /// Number of solutions M.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Smallest register size.
    #[arg(long, default_value_t = pipeline::DEFAULT_N_MIN)]
    pub n_min: usize,
    /// Largest register size.
    #[arg(long, default_value_t = pipeline::DEFAULT_N_MAX)]
    pub n_max: usize,
    /// Comma-separated dependences [default: all four].
    #[arg(long, value_delimiter = ',')]
    pub dependences: Vec<Dependence>,
    /// Points per cross-section.
    #[arg(long, default_value_t = DEFAULT_CROSS_SECTION_SAMPLES)]
    pub samples: usize,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Record tables written by scan; repeat for several schedules.
    #[arg(long = "in", required = true)]
    pub input: Vec<PathBuf>,
    /// Register size to extrapolate to.
    #[arg(long, default_value_t = DEFAULT_TARGET_N)]
    pub extrapolate: usize,
    /// Output document [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suites to run [default: all]: closed-form, oracle, duality,
    /// analytic-n9, equivalences, phase-match.
    #[arg(long)]
    pub suite: Vec<Suite>,
}

/// Radians, or multiples and fractions of `pi` such as `pi`, `2pi`, `3pi/2`, `-pi/4`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("angle must be finite, got {s:?}"))
        };
    }
    let bad = || format!("expected radians or a multiple of pi, got {s:?}");
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coeff = num
        .strip_suffix("pi")
        .ok_or_else(bad)?
        .trim_end_matches('*');
    let coeff = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(coeff * PI / den)
}

fn parse_kernel(s: &str) -> std::result::Result<Kernel, String> {
    match s {
        "plus" => Ok(Kernel::Plus),
        "minus" => Ok(Kernel::Minus),
        _ => Err(format!("expected plus or minus, got {s:?}")),
    }
}

fn load_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["phi", "omega"] {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: "expected header phi,omega".into(),
        });
    }
    reader
        .deserialize::<(f64, f64)>()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

fn build_schedule(
    args: &ScheduleArgs,
    phi: f64,
    omega: f64,
    pairs: Option<&Path>,
) -> Result<PhaseSchedule> {
    let mut schedule = match (args.schedule, pairs) {
        (ScheduleKind::Custom, Some(path)) => PhaseSchedule::custom_pairs(load_pairs(path)?),
        (ScheduleKind::Custom, None) => {
            return Err(Error::InvalidArgument(
                "the custom schedule needs --pairs".into(),
            ))
        }
        (kind, None) => PhaseSchedule::new(kind, phi, omega),
        (kind, Some(_)) => {
            return Err(Error::InvalidArgument(format!(
                "--pairs only applies to the custom schedule, not {kind}"
            )))
        }
    };
    if let Some(kernel) = args.kernel {
        schedule = schedule.with_kernel(kernel);
    }
    Ok(schedule)
}

fn write_document(value: &Value, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn load_series(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    reader.headers().map_err(|e| csv_error(path, e))?;
    reader
        .deserialize::<(usize, f64)>()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let spec = ProblemSpec::new(args.problem.n, args.problem.m)?;
    let schedule = build_schedule(&args.schedule, args.phi, args.omega, args.pairs.as_deref())?;
    let p = run(&spec, &schedule, args.iters)?;
    println!("{p:.12}");
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let spec = ProblemSpec::new(args.problem.n, args.problem.m)?;
    let schedule = build_schedule(&args.schedule, 0.0, 0.0, None)?;
    let samples = cross_section(&spec, &schedule, args.dependence, args.samples)?;
    samples.save_csv(&args.out)?;
    if let Some(delta) = args.delta {
        println!("epsilon {:.12}", robustness_interval(&samples, delta)?);
    }
    Ok(())
}

fn grid_cmd(args: GridArgs) -> Result<()> {
    let spec = ProblemSpec::new(args.problem.n, args.problem.m)?;
    let schedule = build_schedule(&args.schedule, 0.0, 0.0, None)?;
    grid(&spec, &schedule, args.rows, args.cols)?.save_csv(&args.out)
}

fn fit(args: FitArgs) -> Result<()> {
    if args.model == ModelId::Hill {
        if args.extrapolate.is_some() {
            return Err(Error::InvalidArgument(
                "--extrapolate applies to secondary models only".into(),
            ));
        }
        let samples = SampleSet::load_csv(&args.input)?;
        let mut doc = fit_hill(&samples)?.to_document();
        doc.insert(
            "epsilon".into(),
            Value::from(robustness_interval(&samples, DEFAULT_DELTA)?),
        );
        return write_document(&Value::Object(doc), args.out.as_deref());
    }
    let result = fit_secondary(&load_series(&args.input)?, args.model)?;
    let mut doc = result.to_document();
    if let Some(n) = args.extrapolate {
        doc.insert("target_n".into(), Value::from(n));
        doc.insert(
            "extrapolated".into(),
            Value::from(result.evaluate(n as f64)),
        );
    }
    write_document(&Value::Object(doc), args.out.as_deref())
}

fn scan_cmd(args: ScanArgs) -> Result<()> {
    let deps = if args.dependences.is_empty() {
        Dependence::ALL.to_vec()
    } else {
        args.dependences
    };
    if args.schedule == ScheduleKind::Custom {
        return Err(Error::InvalidArgument("scan needs a named schedule".into()));
    }
    let mut template = PhaseSchedule::new(args.schedule, 0.0, 0.0);
    if let Some(kernel) = args.kernel {
        template = template.with_kernel(kernel);
    }
    let out = scan(
        args.n_min..=args.n_max,
        args.m,
        &template,
        &deps,
        args.samples,
    )?;
    pipeline::save_records(&out.records, &args.out)?;
    let failed = out.records.iter().filter(|r| !r.converged).count();
    println!(
        "{} records, {} unconverged; iteration count grows at N = {:?}",
        out.records.len(),
        failed,
        out.iteration_steps
    );
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let mut records = Vec::new();
    for path in &args.input {
        records.extend(pipeline::load_records(path)?);
    }
    let report = compare(&records, args.extrapolate)?;
    match &args.out {
        Some(path) => pipeline::save_report(&report, path),
        None => write_document(
            &serde_json::to_value(&report).expect("reports serialize"),
            None,
        ),
    }
}

/// Runs the suites and prints one line each; true when all pass.
fn verify(args: VerifyArgs) -> Result<bool> {
    let suites = if args.suite.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suite
    };
    let mut all = true;
    for suite in suites {
        let r = run_suite(suite, apply_iteration)?;
        all &= r.passed();
        println!(
            "{:<13} {} {}/{} passed, max error {:.3e}{}",
            suite.name(),
            if r.passed() { "ok  " } else { "FAIL" },
            r.checks - r.failures,
            r.checks,
            r.max_error,
            r.notes.iter().map(|n| format!("; {n}")).collect::<String>()
        );
    }
    Ok(all)
}

fn phase_match(args: ProblemArgs) -> Result<()> {
    let spec = ProblemSpec::new(args.n, args.m)?;
    let pm = phase_matching_angle(&spec)?;
    let doc = serde_json::json!({
        "phi": pm.phi,
        "omega_spm": pm.omega_spm,
        "j": pm.j,
        "iterations": pm.iterations,
        "probability": pm.probability,
        "branch": pm.branch,
    });
    write_document(&doc, None)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(a) => simulate(a)?,
        Command::Sweep(a) => sweep(a)?,
        Command::Grid(a) => grid_cmd(a)?,
        Command::Fit(a) => fit(a)?,
        Command::Scan(a) => scan_cmd(a)?,
        Command::Report(a) => report(a)?,
        Command::Verify(a) => return verify(a),
        Command::PhaseMatch(a) => phase_match(a)?,
    }
    Ok(true)
}

/// Exit status 0 on success, 1 on runtime errors or failed checks, 2 on invalid input.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
