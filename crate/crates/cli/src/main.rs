mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qcompat::acceptance::{run_suite, SuiteConfig, DEFAULT_DIMS};
use qcompat::io::{MapFile, MatrixFile, MeasureReport, SymmetryFile, VectorFile};
use qcompat::linalg::{validate_density, DEFAULT_MEMBERSHIP_TOL, DEFAULT_RANK_TOL};
use qcompat::measure::{self, DEFAULT_FEAS_TOL, DEFAULT_RESTARTS};
use qcompat::preserver::{verify_map, verify_theorem_with, wigner_reconstruct, DEFAULT_SYMMETRY_TOL};
use qcompat::sample::{random_density, random_pure, random_symmetry};
use qcompat::strength::{strength_oracle, strength_with, ORACLE_DEFAULT_TOL};
use qcompat::{DensityOperator, Error, Execution, MeasureConfig, Operator, PureState, PureStateMap, SymmetryOp};
use serde_json::json;

use report::{Context, Failure, Outcome, Report, ErrorReport, EXIT_NOT_SYMMETRY, EXIT_OK, EXIT_SELFTEST, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "qcompat", version, about = "Compatibility of quantum states, strengths and symmetry reconstruction")]
struct Cli {
    /// Run batch work (restarts, samples) on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Strength of a state along a ray.
    Strength(StrengthArgs),
    /// Whether two states share a pure state in their supports.
    Compat(PairArgs),
    /// Lower bound on the decomposition measure, with certificate.
    Measure(MeasureArgs),
    /// Rebuild the symmetry behind a pure-state map.
    Reconstruct(ReconstructArgs),
    /// Check that a symmetry file or a map acts as A -> U A U*.
    Verify(VerifyArgs),
    /// Run the built-in acceptance suite.
    Selftest(SelftestArgs),
    /// Write a seeded random input file to stdout.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct StrengthArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    vector: PathBuf,
    /// Relative eigenvalue cutoff for the support.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol_rank: f64,
    /// Largest kernel weight still counted as in range.
    #[arg(long, default_value_t = DEFAULT_MEMBERSHIP_TOL)]
    tol_mem: f64,
    /// Cross-check against bisection on the smallest eigenvalue.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = ORACLE_DEFAULT_TOL)]
    oracle_tol: f64,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol_rank: f64,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Cap on shared pure states [default: 2 * dim]
    #[arg(long)]
    components: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, env = "QCOMPAT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_FEAS_TOL)]
    feas_tol: f64,
    /// Run both argument orders and keep the better one.
    #[arg(long)]
    symmetric: bool,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SYMMETRY_TOL)]
    tol: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "map", required_unless_present = "map")]
    symmetry: Option<PathBuf>,
    #[arg(long)]
    map: Option<PathBuf>,
    /// Random mixed states checked besides the probes (symmetry files only).
    #[arg(long)]
    n_mixed: Option<usize>,
    #[arg(long, env = "QCOMPAT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SYMMETRY_TOL)]
    tol: f64,
}

const DEFAULT_N_MIXED: usize = 16;

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, env = "QCOMPAT_SEED", default_value_t = 0)]
    seed: u64,
    /// Dimensions as a range `2..6` or a list `2,4,5`.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    /// Smaller sample counts.
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    kind: GenerateKind,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Density matrix with the given rank.
    State {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, env = "QCOMPAT_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Unit vector.
    Vector {
        #[arg(long)]
        dim: usize,
        #[arg(long, env = "QCOMPAT_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Unitary or antiunitary symmetry.
    Symmetry {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        antiunitary: bool,
        #[arg(long, env = "QCOMPAT_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Probe map of a random symmetry.
    Map {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        antiunitary: bool,
        #[arg(long, env = "QCOMPAT_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone)]
struct Dims(Vec<usize>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad dimension {t:?}: {e}"));
    let dims = if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    Ok(Dims(dims))
}

fn load_state(ctx: &mut Context, role: &str, path: &Path, tol_rank: f64) -> Result<DensityOperator, Failure> {
    let m = ctx.load::<MatrixFile>(role, path, "matrix")?.to_matrix()?;
    Ok(validate_density(m, tol_rank)?)
}

fn execution(sequential: bool) -> Execution {
    if sequential { Execution::Sequential } else { Execution::Parallel }
}

fn cmd_strength(args: &StrengthArgs, ctx: &mut Context) -> Result<Outcome, Failure> {
    ctx.set("tol_rank", args.tol_rank);
    ctx.set("tol_mem", args.tol_mem);
    ctx.set("oracle", args.oracle);
    if args.oracle {
        ctx.set("oracle_tol", args.oracle_tol);
    }
    let state = load_state(ctx, "state", &args.state, args.tol_rank)?;
    let phi = PureState::new(ctx.load::<VectorFile>("vector", &args.vector, "vector")?.to_vector()?)?;
    let s = strength_with(&state, &phi, args.tol_mem)?;
    let mut result = json!({
        "value": s.value,
        "in_range": s.in_range,
        "near_boundary": s.near_boundary,
        "kernel_weight": s.kernel_weight,
    });
    if args.oracle {
        let oracle = strength_oracle(&state, &phi, args.oracle_tol)?;
        result["oracle"] = json!({ "value": oracle, "difference": (s.value - oracle).abs() });
    }
    Ok(Outcome::ok(result))
}

fn cmd_compat(args: &PairArgs, ctx: &mut Context) -> Result<Outcome, Failure> {
    ctx.set("tol_rank", args.tol_rank);
    let a = load_state(ctx, "a", &args.a, args.tol_rank)?;
    let b = load_state(ctx, "b", &args.b, args.tol_rank)?;
    let dim = measure::intersection_dim(&a, &b)?;
    Ok(Outcome::ok(json!({
        "compatible": dim > 0,
        "intersection_dim": dim,
        "rank_a": a.numerical_rank(),
        "rank_b": b.numerical_rank(),
    })))
}

fn cmd_measure(args: &MeasureArgs, exec: Execution, ctx: &mut Context) -> Result<Outcome, Failure> {
    let cfg = MeasureConfig {
        components: args.components,
        restarts: args.restarts,
        seed: args.seed,
        feas_tol: args.feas_tol,
        rank_tol: args.pair.tol_rank,
        execution: exec,
    };
    ctx.set("restarts", cfg.restarts);
    ctx.set("seed", cfg.seed);
    ctx.set("feas_tol", cfg.feas_tol);
    ctx.set("tol_rank", cfg.rank_tol);
    ctx.set("symmetric", args.symmetric);
    ctx.set("execution", exec);
    let a = load_state(ctx, "a", &args.pair.a, cfg.rank_tol)?;
    let b = load_state(ctx, "b", &args.pair.b, cfg.rank_tol)?;
    ctx.set("components", cfg.components_for(a.dim()));
    let r = if args.symmetric { measure::measure_symmetric(&a, &b, &cfg)? } else { measure::example_measure(&a, &b, &cfg)? };
    Ok(Outcome::ok(MeasureReport::from(&r)))
}

fn cmd_reconstruct(args: &ReconstructArgs, ctx: &mut Context) -> Result<Outcome, Failure> {
    ctx.set("tol", args.tol);
    let map = ctx.load::<MapFile>("map", &args.map, "pure-state map")?.to_map()?;
    let s = wigner_reconstruct(&map, map.dim(), args.tol)?;
    Ok(Outcome::ok(SymmetryFile::from_symmetry(&s)))
}

fn cmd_verify(args: &VerifyArgs, exec: Execution, ctx: &mut Context) -> Result<Outcome, Failure> {
    ctx.set("tol", args.tol);
    ctx.set("seed", args.seed);
    let outcome = if let Some(path) = &args.symmetry {
        let n_mixed = args.n_mixed.unwrap_or(DEFAULT_N_MIXED);
        ctx.set("n_mixed", n_mixed);
        ctx.set("execution", exec);
        let s: SymmetryOp = ctx.load::<SymmetryFile>("symmetry", path, "symmetry")?.to_symmetry()?;
        verify_theorem_with(&s, s.dim(), n_mixed, args.seed, args.tol, exec)?
    } else {
        // a stored map only fixes images of pure states
        if args.n_mixed.is_some_and(|n| n > 0) {
            return Err(Error::InvalidConfig("--n-mixed needs --symmetry; a map has no mixed-state images".into()).into());
        }
        ctx.set("n_mixed", 0);
        let path = args.map.as_ref().expect("clap enforces one target");
        let map: PureStateMap = ctx.load::<MapFile>("map", path, "pure-state map")?.to_map()?;
        verify_map(&map, args.tol)?
    };
    let mut out = Outcome::ok(json!({
        "verdict": outcome.verdict,
        "max_error": outcome.max_error,
        "strength_agreement": outcome.strength_agreement,
        "states_checked": outcome.states_checked,
        "symmetry": outcome.symmetry.as_ref().map(SymmetryFile::from_symmetry),
    }));
    if !outcome.verdict {
        out.exit = EXIT_NOT_SYMMETRY;
        out.error = Some(ErrorReport {
            kind: "not_a_symmetry",
            message: "transform differs from the reconstructed symmetry on a checked state".into(),
            probe: Some(if outcome.strength_agreement { "mixed-state sample".into() } else { "strength on sampled rays".into() }),
            deviation: Some(outcome.max_error),
        });
    }
    Ok(out)
}

fn cmd_selftest(args: &SelftestArgs, exec: Execution, ctx: &mut Context) -> Result<Outcome, Failure> {
    let cfg = SuiteConfig {
        seed: args.seed,
        dims: args.dims.as_ref().map_or_else(|| DEFAULT_DIMS.to_vec(), |d| d.0.clone()),
        quick: args.quick,
        execution: exec,
    };
    ctx.set("seed", cfg.seed);
    ctx.set("dims", &cfg.dims);
    ctx.set("quick", cfg.quick);
    ctx.set("execution", exec);
    let suite = run_suite(&cfg)?;
    for line in suite.lines() {
        eprintln!("{line}");
    }
    let passed = suite.all_passed();
    let mut out = Outcome::ok(json!({ "all_passed": passed, "criteria": suite.outcomes }));
    out.timings = Some(report::to_value(&suite.timings));
    if !passed {
        out.exit = EXIT_SELFTEST;
    }
    Ok(out)
}

fn cmd_generate(kind: &GenerateKind) -> Result<String, Failure> {
    use qcompat::io::to_text;
    Ok(match *kind {
        GenerateKind::State { dim, rank, seed } => {
            let a = random_density(dim, rank.unwrap_or(dim), seed)?;
            to_text(&MatrixFile::from_matrix(a.matrix()))
        }
        GenerateKind::Vector { dim, seed } => {
            if dim == 0 {
                return Err(Error::InvalidRank { rank: 1, dim }.into());
            }
            to_text(&VectorFile::from_vector(random_pure(dim, seed).vector()))
        }
        GenerateKind::Symmetry { dim, antiunitary, seed } => {
            to_text(&SymmetryFile::from_symmetry(&checked_symmetry(dim, antiunitary, seed)?))
        }
        GenerateKind::Map { dim, antiunitary, seed } => {
            let s = checked_symmetry(dim, antiunitary, seed)?;
            to_text(&MapFile::from_map(&PureStateMap::probes_of(&s)?))
        }
    })
}

fn checked_symmetry(dim: usize, antiunitary: bool, seed: u64) -> Result<SymmetryOp, Error> {
    if dim < 2 {
        return Err(Error::UnsupportedDimension { dim, min: 2, max: usize::MAX });
    }
    Ok(random_symmetry(dim, antiunitary, seed))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK });
        }
    };
    let exec = execution(cli.sequential);

    if let Command::Generate(args) = &cli.command {
        return match cmd_generate(&args.kind) {
            Ok(text) => {
                emit(&text);
                ExitCode::SUCCESS
            }
            Err(f) => {
                eprintln!("error: {}", f.report().message);
                ExitCode::from(f.exit_code())
            }
        };
    }

    let start = Instant::now();
    let mut ctx = Context::default();
    let (name, outcome) = match &cli.command {
        Command::Strength(a) => ("strength", cmd_strength(a, &mut ctx)),
        Command::Compat(a) => ("compat", cmd_compat(a, &mut ctx)),
        Command::Measure(a) => ("measure", cmd_measure(a, exec, &mut ctx)),
        Command::Reconstruct(a) => ("reconstruct", cmd_reconstruct(a, &mut ctx)),
        Command::Verify(a) => ("verify", cmd_verify(a, exec, &mut ctx)),
        Command::Selftest(a) => ("selftest", cmd_selftest(a, exec, &mut ctx)),
        Command::Generate(_) => unreachable!("handled above"),
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let (report, exit) = Report::new(name, ctx, outcome, elapsed_ms);
    if let Some(e) = &report.error {
        eprintln!("error: {}", e.message);
    }
    emit(&serde_json::to_string_pretty(&report).expect("report serializes"));
    ExitCode::from(exit)
}

#[cfg(test)]
mod tests {
    use super::parse_dims;

    #[test]
    fn dims_syntax() {
        assert_eq!(parse_dims("2..6").unwrap().0, vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_dims("2..=3").unwrap().0, vec![2, 3]);
        assert_eq!(parse_dims("5, 2").unwrap().0, vec![5, 2]);
        assert!(parse_dims("6..2").is_err());
        assert!(parse_dims("two").is_err());
    }
}
