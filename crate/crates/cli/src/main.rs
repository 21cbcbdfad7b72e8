//! `occupancy`: exact, approximate and simulated occupancy statistics.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use occupancy::approx::{self, bound_report, is_applicable, BoundKind};
use occupancy::corpus::{certify_corpus, verification_corpus, BoundRow};
use occupancy::exact::exact_moments;
use occupancy::model::parse_profile_spec;
use occupancy::report::{self, Table};
use occupancy::sim::{self, default_figure1_grid, figure1_data, summary_rows, DEFAULT_REPLICATES};
use occupancy::{AllocationModel, Error, SimConfig};

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_APPLICABILITY: u8 = 3;

#[derive(Parser)]
#[command(name = "occupancy", version, about = "Occupancy statistics for balls in weighted boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact means, variances and covariances of the occupancy proportions.
    Exact(ModelArgs),
    /// Poisson-type expansions to order 1/n.
    Approx(ModelArgs),
    /// Remainders of the expansions against their certified bounds.
    Bounds {
        #[command(flatten)]
        model: ModelArgs,
        /// Exit with status 3 when the bounds do not apply (q₁ > 1/4).
        #[arg(long)]
        strict: bool,
    },
    /// Monte Carlo estimates next to exact and approximate values.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Empty-box mean and variance curves for equiprobable boxes.
    Figure1 {
        #[arg(long, default_value_t = 100)]
        boxes: usize,
        /// Ball counts; defaults to 10, 15, …, 100.
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<usize>>,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Certify every bound on the built-in verification corpus.
    Verify {
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// `equi:N`, `powerlaw:N:s` or `file:PATH`.
    #[arg(long)]
    profile: String,
    /// Number of balls.
    #[arg(long)]
    n: usize,
    /// Occupancy indices; defaults to 0..=min(n, 10).
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<usize>>,
    /// Second indices for covariance terms.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<usize>>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Config(String),
    Applicability(String),
    Violations(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Applicability { .. } => Failure::Applicability(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn emit(table: &Table, out: &OutputArgs) -> Result<(), Failure> {
    let io_err = |e: io::Error| Failure::Config(format!("cannot write output: {e}"));
    let mut sink: Box<dyn Write> = match &out.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(io_err)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match out.format {
        Format::Csv => table.write_csv(&mut sink),
        Format::Json => table.write_json(&mut sink),
    }
    .and_then(|()| sink.flush())
    .map_err(io_err)
}

struct Resolved {
    id: String,
    model: AllocationModel,
    rs: Vec<usize>,
    ts: Vec<usize>,
}

fn resolve(args: &ModelArgs) -> Result<Resolved, Failure> {
    let spec = parse_profile_spec(&args.profile)?;
    let model = AllocationModel::new(args.n, spec.build()?);
    let n = args.n;
    let rs = args.r.clone().unwrap_or_else(|| (0..=n.min(10)).collect());
    let ts = args.t.clone().unwrap_or_default();
    if let Some(&bad) = rs.iter().chain(&ts).find(|&&k| k > n) {
        return Err(Failure::Config(format!("index {bad} exceeds n = {n}")));
    }
    Ok(Resolved { id: spec.to_string(), model, rs, ts })
}

fn pairs(rs: &[usize], ts: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = rs
        .iter()
        .flat_map(|&r| ts.iter().filter(move |&&t| t != r).map(move |&t| (r.min(t), r.max(t))))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn run_exact(args: &ModelArgs) -> Result<(), Failure> {
    let m = resolve(args)?;
    let mut set = exact_moments(&m.model, &m.rs)?;
    set.covariances.clear();
    for (r, t) in pairs(&m.rs, &m.ts) {
        set.covariances.insert((r, t), occupancy::exact::exact_covariance(&m.model, r, t)?);
    }
    emit(&report::moment_table(&m.id, &set), &args.out)
}

fn run_approx(args: &ModelArgs) -> Result<(), Failure> {
    let m = resolve(args)?;
    let mut rows = Vec::new();
    for &r in &m.rs {
        rows.push((r, None, "mean", approx::mean_expansion(&m.model, r)?));
        rows.push((r, None, "variance", approx::variance_expansion(&m.model, r)?));
    }
    for (r, t) in pairs(&m.rs, &m.ts) {
        rows.push((r, Some(t), "covariance", approx::covariance_expansion(&m.model, r, t)?));
    }
    let table = report::expansion_table(&m.id, m.model.ball_count(), m.model.box_count(), &rows);
    emit(&table, &args.out)
}

fn run_bounds(args: &ModelArgs, strict: bool) -> Result<(), Failure> {
    let m = resolve(args)?;
    let row = |kind, r, t: Option<usize>| -> Result<BoundRow, Failure> {
        Ok(BoundRow {
            model_id: m.id.clone(),
            n: m.model.ball_count(),
            box_count: m.model.box_count(),
            r,
            t,
            kind,
            report: bound_report(&m.model, kind, r, t.unwrap_or(r))?,
        })
    };
    let mut rows = Vec::new();
    for &r in &m.rs {
        rows.push(row(BoundKind::R0, r, None)?);
        rows.push(row(BoundKind::R1, r, None)?);
        rows.push(row(BoundKind::R2Var, r, Some(r))?);
    }
    for (r, t) in pairs(&m.rs, &m.ts) {
        rows.push(row(BoundKind::R2Cov, r, Some(t))?);
    }
    emit(&report::bound_table(&rows), &args.out)?;
    if strict && !is_applicable(&m.model) {
        return Err(Failure::Applicability(format!(
            "largest weight {} exceeds {}",
            m.model.largest_weight(),
            approx::APPLICABILITY_LIMIT
        )));
    }
    Ok(())
}

fn run_simulate(args: &ModelArgs, sim_args: &SimArgs) -> Result<(), Failure> {
    let m = resolve(args)?;
    let config = SimConfig {
        replicates: sim_args.replicates,
        seed: sim_args.seed,
        workers: sim_args.workers,
        indices: Some(m.rs.clone()),
    };
    let summary = sim::simulate_with(&m.model, &config)?;
    emit(&report::occupancy_table(&summary_rows(&summary)?), &args.out)
}

fn run_figure1(boxes: usize, n_values: Option<&[usize]>, s: &SimArgs, out: &OutputArgs) -> Result<(), Failure> {
    let grid = n_values.map_or_else(default_figure1_grid, <[usize]>::to_vec);
    let rows = figure1_data(boxes, &grid, s.replicates, s.seed, s.workers)?;
    emit(&report::occupancy_table(&rows), out)
}

fn run_verify(workers: usize, out: &OutputArgs) -> Result<(), Failure> {
    let rows = certify_corpus(&verification_corpus(), workers)?;
    emit(&report::bound_table(&rows), out)?;
    let checked = rows.iter().filter(|r| r.report.applicable).count();
    let violated = rows.iter().filter(|r| r.report.violated()).count();
    eprintln!("verify: {checked} applicable bounds checked, {violated} violated");
    if violated > 0 {
        return Err(Failure::Violations(violated));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Exact(args) => run_exact(args),
        Command::Approx(args) => run_approx(args),
        Command::Bounds { model, strict } => run_bounds(model, *strict),
        Command::Simulate { model, sim } => run_simulate(model, sim),
        Command::Figure1 { boxes, n_values, sim, out } => run_figure1(*boxes, n_values.as_deref(), sim, out),
        Command::Verify { workers, out } => run_verify(*workers, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Applicability(msg)) => {
            eprintln!("not applicable: {msg}");
            ExitCode::from(EXIT_APPLICABILITY)
        }
        Err(Failure::Violations(k)) => {
            eprintln!("{k} certified bounds violated");
            ExitCode::from(EXIT_VIOLATION)
        }
    }
}
