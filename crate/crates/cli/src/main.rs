use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use repstab::sweep::{cell_seed, run_sweep, summarize, write_csv, SweepConfig};
use repstab::{context_for, load_graph, read_json, resolve_lambda, CliError, CliResult};
use repstab_core::graph_of_groups::{perturb, AlmostRep, AlmostRepJson, PerturbMode, PRESET_NAMES};
use repstab_core::group_core::{irrep_table, FiniteGroup, GroupSpec};
use repstab_core::stabilizer::{realize, stabilize, DEFAULT_GUARD};

#[derive(Parser)]
#[command(
    name = "repstab",
    version,
    about = "Stabilize almost-representations of graphs of finite groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the irreducible representations of a finite group.
    Irreps(IrrepsArgs),
    /// Build an exact representation with given multiplicities.
    Realize(RealizeArgs),
    /// Perturb a stored representation.
    Perturb(PerturbArgs),
    /// Correct an almost-representation and write a report.
    Stabilize(StabilizeArgs),
    /// Run a seeded grid of realize, perturb and stabilize.
    Sweep(SweepArgs),
    /// List built-in graphs of groups.
    Presets,
}

#[derive(Args)]
struct GraphArgs {
    /// Built-in graph of groups.
    #[arg(long)]
    preset: Option<String>,
    /// Graph of groups JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl GraphArgs {
    fn load(&self) -> CliResult<repstab_core::graph_of_groups::GraphOfGroups> {
        load_graph(self.preset.as_deref(), self.config.as_deref())
    }
}

#[derive(Args)]
struct IrrepsArgs {
    /// Group preset such as Z4, S3, D5, Q8.
    #[arg(long)]
    preset: Option<String>,
    /// Group JSON file with "order" and "mult".
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RealizeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Multiplicities as JSON, inline or a file path.
    #[arg(long)]
    lambda: Option<String>,
    /// Target dimension for the default multiplicities.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Representation JSON written by realize.
    #[arg(long)]
    rep: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value = "edges-and-conjugate-vertices")]
    mode: PerturbMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StabilizeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Almost-representation JSON; without it one is realized and perturbed.
    #[arg(long)]
    rep: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value = "edges-and-conjugate-vertices")]
    mode: PerturbMode,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    guard: f64,
    /// Include input and output matrices in the report.
    #[arg(long)]
    dump_matrices: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Graph presets (repeatable).
    #[arg(long)]
    preset: Vec<String>,
    /// Dimensions (repeatable).
    #[arg(long)]
    dim: Vec<usize>,
    /// Perturbation sizes (repeatable).
    #[arg(long)]
    eps: Vec<f64>,
    /// Schatten exponents (repeatable).
    #[arg(long)]
    p: Vec<f64>,
    #[arg(long)]
    seeds: Option<usize>,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    guard: f64,
    #[arg(long, default_value = "edges-and-conjugate-vertices")]
    mode: PerturbMode,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell medians as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Input(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn to_json_text<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Input(format!("json: {e}")))
}

fn cmd_irreps(args: &IrrepsArgs) -> CliResult<()> {
    let group = match (&args.preset, &args.config) {
        (Some(name), None) => FiniteGroup::preset(name)?,
        (None, Some(path)) => read_json::<GroupSpec>(path)?.build()?,
        _ => {
            return Err(CliError::Input(
                "give exactly one of --preset or --config".into(),
            ))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let table = irrep_table(&Arc::new(group), &mut rng)?;
    let dims = table.dims();
    let sum_sq: usize = dims.iter().map(|d| d * d).sum();
    let order = table.group().order();
    let report = json!({
        "order": order,
        "dims": dims,
        "sum_of_squares": sum_sq,
        "sum_of_squares_matches_order": sum_sq == order,
        "table": table.to_json(),
    });
    write_output(args.out.as_deref(), &to_json_text(&report)?)
}

fn cmd_realize(args: &RealizeArgs) -> CliResult<()> {
    let gog = args.graph.load()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let ctx = context_for(gog, 2.0, DEFAULT_GUARD, &mut rng)?;
    let lambda = resolve_lambda(&ctx, args.lambda.as_deref(), args.dim)?;
    let rho = realize(&lambda, &ctx, &mut rng)?;
    write_output(args.out.as_deref(), &to_json_text(&rho.to_json(&ctx.gog))?)
}

fn cmd_perturb(args: &PerturbArgs) -> CliResult<()> {
    let gog = args.graph.load()?;
    let rho = AlmostRep::from_json(&read_json::<AlmostRepJson>(&args.rep)?, &gog)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let noisy = perturb(&rho, args.eps, args.mode, &mut rng)?;
    write_output(args.out.as_deref(), &to_json_text(&noisy.to_json(&gog))?)
}

fn cmd_stabilize(args: &StabilizeArgs) -> CliResult<()> {
    let gog = args.graph.load()?;
    // irrep bases and the realize/perturb draws use separate streams
    let mut table_rng = ChaCha8Rng::seed_from_u64(cell_seed(args.seed, &[0]));
    let ctx = context_for(gog, args.p, args.guard, &mut table_rng)?;
    let input = match &args.rep {
        Some(path) => {
            if args.lambda.is_some() || args.dim.is_some() {
                return Err(CliError::Input(
                    "--rep cannot be combined with --lambda or --dim".into(),
                ));
            }
            AlmostRep::from_json(&read_json::<AlmostRepJson>(path)?, &ctx.gog)?
        }
        None => {
            let lambda = resolve_lambda(&ctx, args.lambda.as_deref(), args.dim)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let exact = realize(&lambda, &ctx, &mut rng).map_err(|e| e.at("realize"))?;
            perturb(&exact, args.eps, args.mode, &mut rng).map_err(|e| e.at("perturb"))?
        }
    };
    let (output, report) = stabilize(&input, &ctx)?;
    let mut value =
        serde_json::to_value(&report).map_err(|e| CliError::Input(format!("json: {e}")))?;
    value["preset"] = json!(ctx.gog.name());
    value["epsilon_in"] = json!(args.rep.is_none().then_some(args.eps));
    if args.dump_matrices {
        value["input"] = serde_json::to_value(input.to_json(&ctx.gog)).expect("matrices serialize");
        value["output"] =
            serde_json::to_value(output.to_json(&ctx.gog)).expect("matrices serialize");
    }
    write_output(args.out.as_deref(), &to_json_text(&value)?)
}

fn or_default<T: Clone>(given: &[T], fallback: Vec<T>) -> Vec<T> {
    if given.is_empty() {
        fallback
    } else {
        given.to_vec()
    }
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let defaults = SweepConfig::default();
    let config = SweepConfig {
        presets: or_default(&args.preset, defaults.presets.clone()),
        dims: or_default(&args.dim, defaults.dims.clone()),
        eps: or_default(&args.eps, defaults.eps.clone()),
        p: or_default(&args.p, defaults.p.clone()),
        seeds: args.seeds.unwrap_or(defaults.seeds),
        master_seed: args.seed,
        guard: args.guard,
        mode: args.mode,
    };
    let outcomes = run_sweep(&config)?;
    let rows: Vec<_> = outcomes.into_iter().map(|o| o.row).collect();
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            write_csv(rows.iter().cloned(), file)?;
        }
        None => write_csv(rows.iter().cloned(), std::io::stdout().lock())?,
    }
    if let Some(path) = &args.summary {
        write_output(Some(path), &to_json_text(&summarize(&rows))?)?;
    }
    eprintln!("{} cells, {failures} failed", rows.len());
    Ok(())
}

fn cmd_presets() -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    for name in PRESET_NAMES {
        let gog = repstab_core::graph_of_groups::preset(name)?;
        let vertices: Vec<String> = gog
            .vertex_names()
            .iter()
            .zip(gog.vertex_groups())
            .map(|(v, g)| format!("{v}:{}", g.name().unwrap_or("?")))
            .collect();
        writeln!(out, "{name}\tvertices {}", vertices.join(" ")).ok();
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Irreps(a) => cmd_irreps(a),
        Command::Realize(a) => cmd_realize(a),
        Command::Perturb(a) => cmd_perturb(a),
        Command::Stabilize(a) => cmd_stabilize(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Presets => cmd_presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
