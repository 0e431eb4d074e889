use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::json;

use localdense::global::{global_density, global_guarantee_bound};
use localdense::io::{
    generate_planted, load_edge_list, parse_id_list, write_edge_list, Mode, PlantedConfig,
    ResultDocument,
};
use localdense::local::{local_density, local_guarantee_bound, seed_scan};
use localdense::oracle::{exact_densest, top_eigenvalue, OracleError, DEFAULT_SIDE_CAP};
use localdense::verify::{run_suite, Status, SuiteOptions, PROPERTIES};
use localdense::{BipartiteGraph, Side, VertexId};

/// Dense subgraph discovery on bipartite and directed graphs.
#[derive(Parser)]
#[command(name = "localdense", version)]
struct Cli {
    /// Read input files as directed arc lists (src dst [weight]).
    #[arg(long, global = true)]
    directed: bool,
    /// Write records to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Add wall_time_ms to result records (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print n, m, Δ, max fanout and average degree.
    Stats { file: PathBuf },
    /// Grow a dense subgraph around one seed vertex.
    Local(LocalArgs),
    /// Approximate the densest subgraph of the whole graph.
    Global(GlobalArgs),
    /// Exact densest subgraph by enumeration of the smaller side.
    Exact {
        file: PathBuf,
        /// Refuse graphs whose smaller side is larger than this.
        #[arg(long, default_value_t = DEFAULT_SIDE_CAP)]
        side_cap: usize,
    },
    /// Run the local search from many seeds and keep the best distinct results.
    Scan(ScanArgs),
    /// Check invariants and guarantees; exits 3 if any property fails.
    Verify(VerifyArgs),
    /// Write a synthetic planted instance as an edge list.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum SideChoice {
    /// Left side if the label exists there, otherwise right.
    #[default]
    Auto,
    Left,
    Right,
    /// Scan seeds on both sides (left first).
    Both,
}

#[derive(Args)]
struct LocalArgs {
    file: PathBuf,
    /// Seed vertex label.
    #[arg(long)]
    seed: String,
    #[arg(long, value_enum, default_value_t)]
    side: SideChoice,
    /// Target size K.
    #[arg(long)]
    target_size: usize,
    /// Report the guarantee θ/(8·log2(16ΔK)) for this θ.
    #[arg(long)]
    theta: Option<f64>,
    /// Attach the full growth trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct GlobalArgs {
    file: PathBuf,
    #[arg(long)]
    trace: bool,
    /// Power iteration tolerance for λ̂.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

#[derive(Args)]
struct ScanArgs {
    file: PathBuf,
    /// `all`, or a file with one seed label per line.
    #[arg(long)]
    seeds: String,
    #[arg(long, value_enum, default_value_t)]
    side: SideChoice,
    #[arg(long)]
    target_size: usize,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// Fixed θ for the growth lemma check; also the good-set threshold.
    #[arg(long)]
    theta: Option<f64>,
    /// Files listing the planted S (left) and T (right) labels.
    #[arg(long, num_args = 2, value_names = ["S_FILE", "T_FILE"])]
    planted: Option<Vec<PathBuf>>,
    /// K for local runs (default: planted size, else 8).
    #[arg(long)]
    target_size: Option<usize>,
    /// Left seeds checked when no planted set is given.
    #[arg(long, default_value_t = 32)]
    max_seeds: usize,
    /// Largest smaller side for the exact comparison.
    #[arg(long, default_value_t = 16)]
    exact_cap: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n_left: usize,
    #[arg(long)]
    n_right: usize,
    #[arg(long, default_value_t = 0)]
    noise_edges: usize,
    #[arg(long)]
    block_left: usize,
    #[arg(long)]
    block_right: usize,
    #[arg(long, default_value_t = 1.0)]
    density_factor: f64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Keep noise edges off the block vertices.
    #[arg(long)]
    isolate_block: bool,
    /// Also write the planted sets to PREFIX.S and PREFIX.T.
    #[arg(long, value_name = "PREFIX")]
    planted_out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Verify(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Verify(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Data(e.to_string())
}

type Out = Box<dyn Write>;

fn open_out(path: &Option<PathBuf>) -> Result<Out, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(out: &mut Out, line: &str) -> Result<(), Failure> {
    writeln!(out, "{line}").map_err(data)
}

fn resolve(g: &BipartiteGraph, label: &str, side: SideChoice) -> Result<VertexId, Failure> {
    let found = match side {
        SideChoice::Left => g.find(Side::Left, label),
        SideChoice::Right => g.find(Side::Right, label),
        SideChoice::Auto | SideChoice::Both => g
            .find(Side::Left, label)
            .or_else(|| g.find(Side::Right, label)),
    };
    found.ok_or_else(|| Failure::Data(format!("unknown vertex {label:?}")))
}

fn resolve_side(g: &BipartiteGraph, labels: &[String], side: Side) -> Result<Vec<VertexId>, Failure> {
    labels
        .iter()
        .map(|l| {
            g.find(side, l)
                .ok_or_else(|| Failure::Data(format!("unknown {side} vertex {l:?}")))
        })
        .collect()
}

fn read_labels(path: &PathBuf) -> Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(parse_id_list(&text))
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mode = cli.directed.then_some(Mode::Directed);
    let load = |p: &PathBuf| load_edge_list(p, mode).map_err(data);
    let timing = cli.timing;
    let mut out = open_out(&cli.out)?;

    match cli.command {
        Command::Stats { file } => {
            let g = load(&file)?;
            let s = g.degree_stats();
            let rec = json!({
                "kind": "stats",
                "n": s.n,
                "n_left": g.left_count(),
                "n_right": g.right_count(),
                "m": s.m,
                "total_weight": g.total_weight(),
                "max_degree": s.max_degree,
                "max_fanout": s.max_fanout,
                "avg_degree": s.avg_degree,
            });
            emit(&mut out, &rec.to_string())?;
        }
        Command::Local(a) => {
            let g = load(&a.file)?;
            let v = resolve(&g, &a.seed, a.side)?;
            let clock = Instant::now();
            let r = local_density(&g, v, a.target_size, a.trace).map_err(data)?;
            let elapsed = millis(clock);
            let mut doc = ResultDocument::from_result("local", &g, &r, a.trace);
            doc.seed = Some(a.seed.clone());
            doc.target_size = Some(a.target_size);
            if let Some(theta) = a.theta {
                doc.bound = Some(
                    local_guarantee_bound(theta, g.max_degree(), a.target_size).map_err(data)?,
                );
            }
            if timing {
                doc.wall_time_ms = Some(elapsed);
            }
            emit(&mut out, &doc.to_json_line())?;
        }
        Command::Global(a) => {
            let g = load(&a.file)?;
            let clock = Instant::now();
            let r = global_density(&g, a.trace).map_err(data)?;
            let elapsed = millis(clock);
            let eig = match top_eigenvalue(&g, a.tol, a.max_iters) {
                Ok(e) => e,
                Err(OracleError::NoConvergence { estimate }) => {
                    eprintln!(
                        "{}",
                        json!({"kind": "warning", "message": "power iteration did not converge",
                               "iterations": estimate.iterations, "residual": estimate.residual})
                    );
                    *estimate
                }
                Err(e) => return Err(data(e)),
            };
            let mut doc = ResultDocument::from_result("global", &g, &r, a.trace);
            doc.lambda = Some(eig.value);
            doc.lambda_residual = Some(eig.residual);
            doc.bound = global_guarantee_bound(eig.value, g.vertex_count()).ok();
            if timing {
                doc.wall_time_ms = Some(elapsed);
            }
            emit(&mut out, &doc.to_json_line())?;
        }
        Command::Exact { file, side_cap } => {
            let g = load(&file)?;
            let clock = Instant::now();
            let sub = exact_densest(&g, side_cap).map_err(data)?;
            let mut doc = ResultDocument::from_subgraph("exact", &g, &sub);
            if timing {
                doc.wall_time_ms = Some(millis(clock));
            }
            emit(&mut out, &doc.to_json_line())?;
        }
        Command::Scan(a) => {
            let g = load(&a.file)?;
            let seeds: Vec<VertexId> = if a.seeds == "all" {
                match a.side {
                    SideChoice::Auto | SideChoice::Left => g.left_vertices().collect(),
                    SideChoice::Right => g.right_vertices().collect(),
                    SideChoice::Both => g.left_vertices().chain(g.right_vertices()).collect(),
                }
            } else {
                read_labels(&PathBuf::from(&a.seeds))?
                    .iter()
                    .map(|l| resolve(&g, l, a.side))
                    .collect::<Result<_, _>>()?
            };
            if seeds.is_empty() {
                return Err(Failure::Data("no seeds".into()));
            }
            let workers = a.parallel.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            let clock = Instant::now();
            let outcome = seed_scan(&g, &seeds, a.target_size, a.top, workers);
            let elapsed = millis(clock);
            for (seed, err) in &outcome.failures {
                eprintln!(
                    "{}",
                    json!({"kind": "seed_failure", "seed": g.label(*seed), "error": err.to_string()})
                );
            }
            for hit in &outcome.hits {
                let mut doc = ResultDocument::from_result("scan", &g, &hit.result, false);
                doc.seed = Some(g.label(hit.seed).to_owned());
                doc.target_size = Some(a.target_size);
                if timing {
                    doc.wall_time_ms = Some(elapsed);
                }
                emit(&mut out, &doc.to_json_line())?;
            }
        }
        Command::Verify(a) => {
            let g = load(&a.file)?;
            let planted = match &a.planted {
                Some(files) => {
                    let s = resolve_side(&g, &read_labels(&files[0])?, Side::Left)?;
                    let t = resolve_side(&g, &read_labels(&files[1])?, Side::Right)?;
                    if s.is_empty() || t.is_empty() {
                        return Err(Failure::Data("planted sets must be nonempty".into()));
                    }
                    Some((s, t))
                }
                None => None,
            };
            if let Some(th) = a.theta {
                if !(th > 0.0 && th.is_finite()) {
                    return Err(Failure::Usage(format!("--theta must be positive, got {th}")));
                }
            }
            let opts = SuiteOptions {
                theta: a.theta,
                planted,
                target_size: a.target_size,
                max_seeds: a.max_seeds,
                exact_cap: a.exact_cap,
            };
            let outcomes = run_suite(&g, &opts);
            let mut failed = 0;
            let mut skipped = 0;
            for o in &outcomes {
                failed += usize::from(o.status == Status::Fail);
                skipped += usize::from(o.status == Status::Skip);
                emit(&mut out, &serde_json::to_string(o).map_err(data)?)?;
            }
            let summary = json!({
                "kind": "verify_summary",
                "passed": outcomes.len() - failed - skipped,
                "failed": failed,
                "skipped": skipped,
            });
            emit(&mut out, &summary.to_string())?;
            out.flush().map_err(data)?;
            if failed > 0 {
                return Err(Failure::Verify(format!("{failed} properties failed")));
            }
        }
        Command::Generate(a) => {
            let inst = generate_planted(&PlantedConfig {
                n_left: a.n_left,
                n_right: a.n_right,
                noise_edges: a.noise_edges,
                block_left: a.block_left,
                block_right: a.block_right,
                density_factor: a.density_factor,
                seed: a.rng_seed,
                isolate_block: a.isolate_block,
            })
            .map_err(data)?;
            write!(out, "{}", write_edge_list(&inst.graph)).map_err(data)?;
            if let Some(prefix) = a.planted_out {
                let g = &inst.graph;
                for (ext, set) in [("S", &inst.planted_left), ("T", &inst.planted_right)] {
                    let mut path = prefix.clone().into_os_string();
                    path.push(format!(".{ext}"));
                    let body: String = set.iter().map(|&v| format!("{}\n", g.label(v))).collect();
                    std::fs::write(&path, body).map_err(data)?;
                }
            }
        }
    }
    out.flush().map_err(data)
}

fn command() -> clap::Command {
    let list: String = PROPERTIES
        .iter()
        .map(|(name, what)| format!("  {name:<28} {what}\n"))
        .collect();
    Cli::command().mut_subcommand("verify", |c| {
        c.after_help(format!("Properties:\n{list}"))
    })
}

fn main() -> ExitCode {
    let cli = match command()
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("{}", json!({"kind": "error", "code": 1, "error": e.kind().to_string()}));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({"kind": "error", "code": f.code(), "error": f.message()}));
            ExitCode::from(f.code())
        }
    }
}
