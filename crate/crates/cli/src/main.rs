//! `parelim` command-line front end.

mod plot;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use parelim::eliminate::{eliminate, EliminantFile, EliminantSystem, EliminationOptions, DEFAULT_DEGREE_MAX, DEFAULT_RANK_TOL};
use parelim::front::{recover_decisions, recover_weights, RecoverOptions, WeightRecovery};
use parelim::oracle::{
    attach_eliminant_residuals, read_csv_objectives, sample_front, sample_interior_front, simplex_grid, write_csv, GRID_EPS,
};
use parelim::problem::{build_pf_system, load_problem};
use parelim::sysid::{build_misfit_latency_pf, latency_misfit_scalarized};
use parelim::Error;

#[derive(Parser, Debug)]
#[command(name = "parelim", version, about = "Implicit Pareto fronts by numerical elimination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the PF system of a problem and extract its eliminant.
    Eliminate {
        problem: PathBuf,
        #[command(flatten)]
        elim: ElimFlags,
        /// Write the eliminant here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample the front by weighted sums on a simplex grid (CSV).
    Sample {
        problem: PathBuf,
        #[command(flatten)]
        sampling: SampleFlags,
        /// Add eliminant residuals from this file.
        #[arg(long)]
        eliminant: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate an eliminant at sampled front points.
    Verify {
        problem: PathBuf,
        eliminant: PathBuf,
        #[command(flatten)]
        sampling: SampleFlags,
        /// Largest accepted residual.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also sample the grid weights clamped to the simplex boundary.
        #[arg(long)]
        boundary: bool,
    },
    /// Weights at a point of the front and, given the problem, its decisions.
    Recover {
        eliminant: PathBuf,
        /// Objective values, comma separated.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = true)]
        at: Vec<f64>,
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Tolerance of the nonnegativity test on the weights.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        sampling: SampleFlags,
    },
    /// Misfit-versus-latency trade-off of an autonomous AR model.
    Sysid {
        /// JSON file `{"y": [...], "n_a": k}`; overrides --y and --na.
        input: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        y: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        na: usize,
        #[command(flatten)]
        elim: ElimFlags,
        #[command(flatten)]
        sampling: SampleFlags,
    },
    /// SVG of sampled points and, for two objectives, the eliminant curve.
    Plot {
        points: PathBuf,
        eliminant: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct ElimFlags {
    #[arg(long, default_value_t = DEFAULT_DEGREE_MAX)]
    degree_max: usize,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    /// Scale Macaulay rows to unit norm before factorizing.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    row_scaling: bool,
}

impl ElimFlags {
    fn options(&self) -> EliminationOptions {
        EliminationOptions {
            rank_tol: self.rank_tol,
            degree_max: self.degree_max,
            row_scaling: self.row_scaling,
            ..Default::default()
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct SampleFlags {
    /// Points per edge of the weight simplex grid.
    #[arg(long, default_value_t = 21)]
    grid: usize,
    /// Random Newton starts per weight.
    #[arg(long, default_value_t = 64)]
    starts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl SampleFlags {
    fn options(&self) -> RecoverOptions {
        RecoverOptions {
            starts: self.starts,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Flag values echoed into every output.
#[derive(Serialize, Default)]
struct Metadata {
    command: &'static str,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    degree_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    row_scaling: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    starts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl Metadata {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            ..Default::default()
        }
    }

    fn elim(mut self, f: &ElimFlags) -> Self {
        self.degree_max = Some(f.degree_max);
        self.rank_tol = Some(f.rank_tol);
        self.row_scaling = Some(f.row_scaling);
        self
    }

    fn sampling(mut self, f: &SampleFlags) -> Self {
        self.grid = Some(f.grid);
        self.starts = Some(f.starts);
        self.seed = Some(f.seed);
        self
    }
}

#[derive(Serialize)]
struct EliminantOutput<'a> {
    #[serde(flatten)]
    eliminant: EliminantFile,
    metadata: &'a Metadata,
}

/// A failure with its exit code: 1 usage, 2 numerical, 3 I/O or schema.
#[derive(Debug)]
struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            kind: "Usage".into(),
            message: message.into(),
        }
    }

    fn numerical(kind: &str, message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: kind.into(),
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = format!("{e:?}");
        let kind = kind.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string();
        let code = match &e {
            e if e.is_numerical() => 2,
            Error::Size(_) | Error::DegreeTooLow { .. } => 1,
            _ => 3,
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e).into()
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::usage(e.to_string().trim_end());
            report(&f);
            return ExitCode::from(f.code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f);
            ExitCode::from(f.code)
        }
    }
}

fn report(f: &Failure) {
    let body = json!({ "error": f.kind, "message": f.message, "exit_code": f.code });
    eprintln!("{body}");
}

fn writer(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_eliminant(path: &Path) -> CliResult<EliminantSystem> {
    let text = std::fs::read_to_string(path)?;
    Ok(EliminantSystem::from_json(&text)?)
}

fn eliminant_json(t: &EliminantSystem, meta: &Metadata) -> serde_json::Value {
    serde_json::to_value(EliminantOutput {
        eliminant: t.to_file(),
        metadata: meta,
    })
    .expect("eliminant serializes")
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Eliminate { problem, elim, output } => {
            let p = load_problem(&problem)?;
            let sys = build_pf_system(&p, p.weight_mode());
            let t = eliminate(&sys, &elim.options())?;
            let meta = Metadata::new("eliminate").elim(&elim);
            let mut out = writer(output.as_deref())?;
            serde_json::to_writer_pretty(&mut out, &eliminant_json(&t, &meta))?;
            writeln!(out)?;
            out.flush()?;
        }
        Command::Sample {
            problem,
            sampling,
            eliminant,
            output,
        } => {
            let p = load_problem(&problem)?;
            let mut sample = sample_front(&p, sampling.grid, &sampling.options())?;
            if let Some(path) = eliminant {
                let t = load_eliminant(&path)?;
                check_objective_count(&t, p.num_objectives())?;
                attach_eliminant_residuals(&mut sample.points, &t);
            }
            let mut out = writer(output.as_deref())?;
            writeln!(
                out,
                "# parelim sample grid={} starts={} seed={} failed={} dominated={}",
                sampling.grid, sampling.starts, sampling.seed, sample.failed, sample.dominated
            )?;
            write_csv(&mut out, &sample.points, p.num_objectives())?;
            out.flush()?;
        }
        Command::Verify {
            problem,
            eliminant,
            sampling,
            tol,
            boundary,
        } => {
            let p = load_problem(&problem)?;
            let t = load_eliminant(&eliminant)?;
            check_objective_count(&t, p.num_objectives())?;
            let mut sample = if boundary {
                sample_front(&p, sampling.grid, &sampling.options())?
            } else {
                sample_interior_front(&p, sampling.grid, &sampling.options())?
            };
            attach_eliminant_residuals(&mut sample.points, &t);
            let max = sample
                .points
                .iter()
                .filter_map(|pt| pt.residuals.eliminant)
                .fold(0.0, f64::max);
            let pass = !sample.points.is_empty() && max <= tol;
            let report = json!({
                "points": sample.points.len(),
                "failed": sample.failed,
                "dominated": sample.dominated,
                "max_residual": max,
                "tol": tol,
                "pass": pass,
                "boundary": boundary,
                "metadata": Metadata::new("verify").sampling(&sampling),
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !pass {
                return Err(Failure::numerical(
                    "VerificationFailed",
                    format!("max residual {max:e} over {} points exceeds {tol:e}", sample.points.len()),
                ));
            }
        }
        Command::Recover {
            eliminant,
            at,
            problem,
            tol,
            sampling,
        } => {
            let t = load_eliminant(&eliminant)?;
            if at.len() != t.num_objectives() {
                return Err(Failure::usage(format!(
                    "--at has {} values but the eliminant has {} objectives",
                    at.len(),
                    t.num_objectives()
                )));
            }
            let recovery = recover_weights(&t, &at, tol)?;
            let mut report = json!({
                "s": at,
                "eliminant_residual": t.max_residual(&at),
                "metadata": Metadata::new("recover").sampling(&sampling),
            });
            match &recovery {
                WeightRecovery::Feasible(w) => report["weights"] = json!(w),
                WeightRecovery::Infeasible { distance } => {
                    report["weights"] = serde_json::Value::Null;
                    report["infeasible_distance"] = json!(distance);
                }
            }
            if let (Some(path), Some(w)) = (problem, recovery.weights()) {
                let p = load_problem(&path)?;
                check_objective_count(&t, p.num_objectives())?;
                let pts = recover_decisions(&p, w, &[], &sampling.options())?;
                report["decisions"] = json!(pts
                    .iter()
                    .map(|c| json!({
                        "x": c.x,
                        "lambda": c.lambda,
                        "s": c.s,
                        "kkt_residual": c.kkt_residual,
                        "weighted_objective": c.weighted_objective,
                    }))
                    .collect::<Vec<_>>());
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Sysid {
            input,
            y,
            na,
            elim,
            sampling,
        } => sysid(input, y, na, elim, sampling)?,
        Command::Plot {
            points,
            eliminant,
            output,
        } => {
            let pts = read_csv_objectives(BufReader::new(File::open(&points)?))?;
            let t = eliminant.as_deref().map(load_eliminant).transpose()?;
            let svg = plot::render(&pts, t.as_ref()).map_err(Failure::usage)?;
            let mut out = writer(output.as_deref())?;
            out.write_all(svg.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn check_objective_count(t: &EliminantSystem, m: usize) -> CliResult {
    if t.num_objectives() != m {
        return Err(Error::InvalidProblem(format!(
            "eliminant has {} objective variables, problem has {m} objectives",
            t.num_objectives()
        ))
        .into());
    }
    Ok(())
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SysidInput {
    y: Vec<f64>,
    n_a: usize,
}

fn sysid(input: Option<PathBuf>, y: Vec<f64>, na: usize, elim: ElimFlags, sampling: SampleFlags) -> CliResult {
    let (y, n_a) = match input {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let inp: SysidInput = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidProblem(format!("schema violation: {e}")))?;
            (inp.y, inp.n_a)
        }
        None if y.is_empty() => return Err(Failure::usage("give an input file or --y")),
        None => (y, na),
    };
    let pf = build_misfit_latency_pf(&y, n_a)?;
    let opts = sampling.options();
    let mut front = Vec::new();
    let mut failed = 0;
    for w in simplex_grid(2, sampling.grid, GRID_EPS) {
        match latency_misfit_scalarized(&y, n_a, w[0], &opts) {
            Ok(fit) => front.push(json!({
                "alpha": fit.alpha,
                "s1": fit.s1,
                "s2": fit.s2,
                "a": fit.a,
                "kkt_residual": fit.kkt_residual,
            })),
            Err(e) if e.is_numerical() => failed += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let meta = Metadata::new("sysid").elim(&elim).sampling(&sampling);
    let elimination = eliminate(&pf.system, &elim.options());
    let mut report = json!({
        "y": y,
        "n_a": n_a,
        "block_equations": pf.block_equations,
        "stated_equations": pf.stated_equations,
        "system": pf.system.to_file(),
        "front": front,
        "front_failed": failed,
        "metadata": meta,
    });
    if let Ok(t) = &elimination {
        report["eliminant"] = eliminant_json(t, &meta);
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    elimination.map(|_| ()).map_err(Failure::from)
}
