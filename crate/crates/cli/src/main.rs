use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sparsemm_cli::experiment::{run_experiment, write_outputs, ExperimentSpec};
use sparsemm_cli::generate::{generate, GeneratorKind, GeneratorSpec};
use sparsemm_cli::graph::{count_triangles_exhaustive, parse_edge_list, symmetric_pattern, vertex_count};
use sparsemm_cli::resolve_schedule;
use sparsemm_core::algorithms::{count_triangles, multiply, DenseEngine, PipelineConfig};
use sparsemm_core::oracle::check_output;
use sparsemm_core::{Semiring, SparsePattern, TriInstance};

#[derive(Parser)]
#[command(
    name = "sparsemm",
    version,
    about = "Sparse matrix multiplication on a simulated low-bandwidth network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Multiply one instance, or run an experiment sweep.
    Run(RunArgs),
    /// Multiply one instance and compare against the direct product.
    Verify(VerifyArgs),
    /// Count triangles made of red edges in a graph.
    CountTriangles(CountArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// `table1`, `table2`, `simplified`, or a file of `eps1 eps2 delta` rows.
    #[arg(long, default_value = "table2")]
    schedule: String,
    #[arg(long, default_value = "semiring3d")]
    engine: DenseEngine,
    /// Small-component exponent (defaults to the schedule's).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Round budget for the whole run.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    /// Record every message and write `trace.csv`.
    #[arg(long)]
    trace: bool,
    /// Color count for the small component.
    #[arg(long)]
    colors: Option<usize>,
    /// Skip the decomposition and route every triangle directly.
    #[arg(long)]
    brute_force: bool,
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let config = PipelineConfig {
            schedule: resolve_schedule(&self.schedule)?,
            engine: self.engine,
            small_eps: self.eps,
            seed: self.seed,
            budget: self.budget,
            trace: self.trace,
            colors: self.colors,
            brute_force_only: self.brute_force,
            ..PipelineConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output directory.
    #[arg(long, env = "SPARSEMM_OUT", default_value = "sparsemm-out")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "random-uniform")]
    kind: GeneratorKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    #[arg(long, default_value = "integer")]
    semiring: Semiring,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File name inside the output directory.
    #[arg(long, default_value = "instance.txt")]
    file: String,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Instance file.
    #[arg(required_unless_present = "experiment", conflicts_with = "experiment")]
    instance: Option<PathBuf>,
    /// Experiment file (TOML); its pipeline section replaces the flags.
    #[arg(long)]
    experiment: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct CountArgs {
    /// Edge list, one `u v` pair per line.
    graph: PathBuf,
    /// Red edges; every graph edge is red when omitted.
    #[arg(long)]
    red: Option<PathBuf>,
    /// Also count by exhaustive enumeration and compare.
    #[arg(long)]
    check: bool,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn load_instance(path: &Path) -> Result<TriInstance> {
    TriInstance::parse(&read(path)?).with_context(|| format!("invalid instance {}", path.display()))
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let spec = GeneratorSpec {
        kind: args.kind,
        n: args.n,
        d: args.d,
        density: args.density,
        semiring: args.semiring,
        seed: args.seed,
    };
    let inst = generate(&spec)?;
    let path = args.out.out.join(&args.file);
    write(&path, &inst.to_text())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<bool> {
    let out = &args.out.out;
    if let Some(path) = &args.experiment {
        let spec = ExperimentSpec::from_toml(&read(path)?)?;
        let result = run_experiment(&spec)?;
        let paths = write_outputs(&spec, &result, out)?;
        println!("{}", serde_json::to_string_pretty(&result.summary)?);
        for p in [&paths.csv, &paths.summary, &paths.plot] {
            println!("wrote {}", p.display());
        }
        return Ok(result.all_ok());
    }
    let path = args.instance.as_deref().expect("clap requires an instance");
    let inst = load_instance(path)?;
    let result = multiply(&inst, &args.pipeline.config()?)?;
    print!("{}", result.report);
    write(&out.join("rounds.csv"), &result.report.to_csv())?;
    write(&out.join("output.txt"), &output_text(&inst, &result.values))?;
    if let Some(trace) = &result.trace {
        let mut csv = String::from("round,src,dst,tag\n");
        for e in trace {
            csv.push_str(&format!("{},{},{},{}\n", e.round, e.src, e.dst, e.tag));
        }
        write(&out.join("trace.csv"), &csv)?;
    }
    println!("wrote results to {}", out.display());
    Ok(true)
}

fn output_text(inst: &TriInstance, values: &std::collections::BTreeMap<(u32, u32), i64>) -> String {
    let mut s = String::new();
    for (&(i, k), &v) in values {
        s.push_str(&format!("{i} {k} {}\n", inst.semiring.format_value(v)));
    }
    s
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let inst = load_instance(&args.instance)?;
    let result = multiply(&inst, &args.pipeline.config()?)?;
    let (mismatches, full) = check_output(&inst, &result.values, args.pipeline.seed);
    let verdict = match (mismatches, full) {
        (0, true) => "exact-match",
        (0, false) => "spot-match",
        _ => "mismatch",
    };
    println!(
        "{verdict}: {mismatches} mismatching entries, {} rounds",
        result.report.total_rounds
    );
    Ok(mismatches == 0)
}

fn load_graph(path: &Path, n: Option<usize>) -> Result<SparsePattern> {
    let edges = parse_edge_list(&read(path)?).with_context(|| format!("invalid graph {}", path.display()))?;
    let n = n.unwrap_or_else(|| vertex_count(&edges));
    Ok(symmetric_pattern(n, &edges)?)
}

fn cmd_count(args: CountArgs) -> Result<bool> {
    let graph = load_graph(&args.graph, None)?;
    let red = match &args.red {
        Some(p) => load_graph(p, Some(graph.n))?,
        None => graph.clone(),
    };
    let (count, report) = count_triangles(&graph, &red, &args.pipeline.config()?)?;
    println!("{count} triangles ({} rounds)", report.total_rounds);
    if args.check {
        let expected = count_triangles_exhaustive(&red);
        if expected != count {
            bail!("exhaustive enumeration finds {expected} triangles");
        }
        println!("matches exhaustive enumeration");
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a).map(|_| true),
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::CountTriangles(a) => cmd_count(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
