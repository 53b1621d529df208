//! Command-line front end: construct catalog graphs, search symmetries,
//! build and apply fast GFT plans, and benchmark them against dense and
//! approximate transforms.
//!
//! Machine output (JSON/CSV) goes to --out when given, otherwise stdout;
//! human-readable notes go to stderr. `bench` is the exception: its table is
//! the primary output and prints to stdout, with JSON behind --out.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 numerical validation
//! failure (non-orthogonal plan, eigensolver breakdown).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fastgft::baseline::{delta_error, epsilon_error, haar_plus_approx, truncated_jacobi};
use fastgft::gallery::{gallery, gallery_entry};
use fastgft::graph::laplacian;
use fastgft::plan::{dense_plan, plan_fast_gft, PlanStage, PlanStrategy};
use fastgft::spectral::{eigenvalue_clusters, gft};
use fastgft::symmetry::{is_phi_symmetric, search_involutions, search_involutions_tree};
use fastgft::{FastGftPlan, Graph, Involution};

#[derive(Parser)]
#[command(name = "fastgft", version, about = "Fast graph Fourier transforms from graph symmetry")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List catalog graphs or emit one as graph JSON.
    Gallery {
        #[command(subcommand)]
        action: GalleryCmd,
    },
    /// Find symmetry involutions of a graph.
    Search {
        /// Catalog name or path to a graph JSON file.
        graph: String,
        /// Backtracking budget for the exhaustive search.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a fast transform plan for a graph.
    Plan {
        /// Catalog name or path to a graph JSON file.
        graph: String,
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        /// Maximum recursion depth of the planner.
        #[arg(long, default_value_t = 16)]
        max_depth: usize,
        /// Sub-graphs at or below this size become dense blocks.
        #[arg(long, default_value_t = 2)]
        min_leaf: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a plan to signals (CSV, one signal per row).
    Apply {
        plan: PathBuf,
        signals: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time fast plans against dense transforms on random signals.
    Bench {
        /// Catalog names or graph JSON paths; empty list prints an empty
        /// report.
        graphs: Vec<String>,
        #[arg(long, default_value_t = 20_000)]
        signals: usize,
        /// Repetitions per measurement; the median is reported.
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit runtime/error curves for exact, hybrid, and approximate
    /// transforms (CSV).
    Compare {
        /// Catalog name or path to a graph JSON file.
        graph: String,
        /// Rotation layer counts for the approximate variants.
        #[arg(long, value_delimiter = ',', default_value = "0,5,10,20,40")]
        layers: Vec<usize>,
        #[arg(long, default_value_t = 20_000)]
        signals: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GalleryCmd {
    /// Print all catalog entries.
    List,
    /// Write one catalog graph as JSON.
    Emit {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures carry the process exit code: 2 for usage/input problems, 3 for
/// numerical validation failures.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError { code: 2, message: message.into() }
    }
}

impl From<fastgft::Error> for CliError {
    fn from(e: fastgft::Error) -> CliError {
        let code = match &e {
            fastgft::Error::Numerical(_)
            | fastgft::Error::NoConvergence(_)
            | fastgft::Error::NotSymmetric(_) => 3,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Gallery { action } => match action {
            GalleryCmd::List => {
                for entry in gallery() {
                    let labels: Vec<&str> =
                        entry.involutions.iter().map(|(label, _)| *label).collect();
                    println!(
                        "{:<12} n={:<3} edges={:<4} {} (involutions: {})",
                        entry.name,
                        entry.graph.n(),
                        entry.graph.edge_count(),
                        entry.description,
                        labels.join(", ")
                    );
                }
                Ok(())
            }
            GalleryCmd::Emit { name, out } => {
                let entry = gallery_entry(&name)
                    .ok_or_else(|| CliError::usage(format!("no catalog graph named '{name}'")))?;
                emit(out.as_deref(), &entry.graph.to_json())
            }
        },
        Cmd::Search { graph, budget, out } => cmd_search(&graph, budget, out.as_deref()),
        Cmd::Plan { graph, budget, max_depth, min_leaf, out } => {
            cmd_plan(&graph, budget, max_depth, min_leaf, out.as_deref())
        }
        Cmd::Apply { plan, signals, threads, out } => {
            cmd_apply(&plan, &signals, threads, out.as_deref())
        }
        Cmd::Bench { graphs, signals, reps, seed, threads, out } => {
            cmd_bench(&graphs, signals, reps, seed, threads, out.as_deref())
        }
        Cmd::Compare { graph, layers, signals, reps, seed, threads, budget, out } => {
            cmd_compare(&graph, &layers, signals, reps, seed, threads, budget, out.as_deref())
        }
    }
}

/// Resolve a positional graph argument: catalog name first, then file path.
fn load_graph(arg: &str) -> Result<(String, Graph, Vec<Involution>), CliError> {
    if let Some(entry) = gallery_entry(arg) {
        return Ok((entry.name.to_string(), entry.graph.clone(), entry.hints()));
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| CliError::usage(format!("cannot read graph '{arg}': {e}")))?;
    let g = Graph::from_json(&text)?;
    let name = Path::new(arg)
        .file_stem()
        .map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((name, g, Vec::new()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(CliError::from),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_search(graph: &str, budget: usize, out: Option<&Path>) -> Result<(), CliError> {
    let (name, g, _) = load_graph(graph)?;
    let outcome = search_involutions(&g, budget);
    let mut found = outcome.involutions;
    if let Ok(tree_found) = search_involutions_tree(&g) {
        for phi in tree_found {
            if !found.contains(&phi) {
                found.push(phi);
            }
        }
        found.sort_by(|a, b| {
            b.pair_count().cmp(&a.pair_count()).then(a.as_slice().cmp(b.as_slice()))
        });
    }
    if outcome.truncated {
        eprintln!("note: search budget exhausted; the list may be incomplete");
    }
    eprintln!("{name}: {} involution(s) found", found.len());
    for phi in &found {
        eprintln!("  pairs={:<3} {:?}", phi.pair_count(), phi.as_slice());
    }
    let phis: Vec<serde_json::Value> = found
        .iter()
        .map(|phi| serde_json::json!({ "phi": phi.as_slice() }))
        .collect();
    let doc = serde_json::json!({ "involutions": phis, "truncated": outcome.truncated });
    emit(out, &doc.to_string())
}

fn describe_stage(stage: &PlanStage) -> String {
    match stage {
        PlanStage::Haar(st) => format!("haar   {} pair(s)", st.pairs.len()),
        PlanStage::Permutation(_) => "perm".to_string(),
        PlanStage::DenseLeaf { offset, matrix } => {
            format!("dense  {}x{} at offset {offset}", matrix.n_rows(), matrix.n_rows())
        }
        PlanStage::Scale(f) => {
            format!("scale  {} non-unit factor(s)", f.iter().filter(|&&v| v != 1.0).count())
        }
        PlanStage::Givens(rots) => format!("givens {} rotation(s)", rots.len()),
    }
}

fn cmd_plan(
    graph: &str,
    budget: usize,
    max_depth: usize,
    min_leaf: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (name, g, hints) = load_graph(graph)?;
    let strategy = PlanStrategy { search_budget: budget, max_depth, min_leaf, hints };
    let plan = plan_fast_gft(&g, &strategy)?;
    let ops = plan.op_count();
    let dense_ops = dense_plan(&g)?.op_count();
    eprintln!("{name}: n={}, {} stage(s)", plan.n, plan.stages.len());
    for stage in &plan.stages {
        eprintln!("  {}", describe_stage(stage));
    }
    eprintln!(
        "ops: {} adds + {} mults (dense: {} adds + {} mults)",
        ops.additions, ops.multiplications, dense_ops.additions, dense_ops.multiplications
    );
    if plan.haar_stage_count() == 0 {
        eprintln!("note: no symmetry found; the plan is a single dense transform");
    }
    emit(out, &plan.to_json())
}

fn read_signals(path: &Path, n: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read signals '{}': {e}", path.display())))?;
    let mut signals = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> =
            line.split(',').map(|cell| cell.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| {
            CliError::usage(format!("signals line {}: {e}", lineno + 1))
        })?;
        if row.len() != n {
            return Err(CliError::usage(format!(
                "signals line {}: expected {n} values, got {}",
                lineno + 1,
                row.len()
            )));
        }
        signals.push(row);
    }
    Ok(signals)
}

fn format_csv(rows: &[Vec<f64>]) -> String {
    let mut text = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    text
}

/// Apply the plan to every signal, fanning out over `threads` scoped worker
/// threads. Chunking preserves order and each signal is processed exactly as
/// in the sequential path, so results are bit-identical for any thread
/// count.
fn batch_apply(
    plan: &FastGftPlan,
    signals: &[Vec<f64>],
    threads: usize,
) -> Result<Vec<Vec<f64>>, CliError> {
    if let Some(bad) = signals.iter().find(|x| x.len() != plan.n) {
        return Err(CliError::usage(format!(
            "signal length {} does not match plan size {}",
            bad.len(),
            plan.n
        )));
    }
    if threads <= 1 || signals.len() <= 1 {
        return Ok(plan.apply_batch(signals)?);
    }
    let chunk = signals.len().div_ceil(threads);
    let mut out: Vec<Vec<f64>> = vec![Vec::new(); signals.len()];
    std::thread::scope(|scope| {
        for (in_chunk, out_chunk) in signals.chunks(chunk).zip(out.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (x, slot) in in_chunk.iter().zip(out_chunk.iter_mut()) {
                    *slot = plan.apply(x).expect("lengths validated above");
                }
            });
        }
    });
    Ok(out)
}

fn cmd_apply(
    plan_path: &Path,
    signals_path: &Path,
    threads: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(plan_path)
        .map_err(|e| CliError::usage(format!("cannot read plan: {e}")))?;
    let plan = FastGftPlan::from_json(&text)?;
    let signals = read_signals(signals_path, plan.n)?;
    let coeffs = batch_apply(&plan, &signals, threads)?;
    eprintln!("applied plan (n={}) to {} signal(s)", plan.n, signals.len());
    emit(out, &format_csv(&coeffs))
}

fn uniform_signals(rng: &mut ChaCha8Rng, count: usize, n: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// Median wall time of `reps` timed batch applications, in seconds.
fn median_batch_seconds(
    plan: &FastGftPlan,
    signals: &[Vec<f64>],
    reps: usize,
    threads: usize,
) -> Result<f64, CliError> {
    let reps = reps.max(1);
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        let coeffs = batch_apply(plan, signals, threads)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(&coeffs);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(times[times.len() / 2])
}

/// Largest per-cluster coefficient-energy difference between two transforms
/// of the same signals: |‖a‖ − ‖b‖| with norms taken inside each eigenvalue
/// cluster. Insensitive to basis choice within degenerate eigenspaces.
fn max_cluster_deviation(
    eigenvalues: &[f64],
    fast: &[Vec<f64>],
    dense: &[Vec<f64>],
) -> f64 {
    let clusters = eigenvalue_clusters(eigenvalues, 1e-8);
    let mut worst: f64 = 0.0;
    for (a, b) in fast.iter().zip(dense) {
        for &(lo, hi) in &clusters {
            let na: f64 = a[lo..hi].iter().map(|v| v * v).sum::<f64>().sqrt();
            let nb: f64 = b[lo..hi].iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max((na - nb).abs());
        }
    }
    worst
}

fn cmd_bench(
    graphs: &[String],
    signal_count: usize,
    reps: usize,
    seed: u64,
    threads: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if signal_count < 10 {
        eprintln!("note: {signal_count} signal(s) gives high-variance timings");
    }
    if reps < 5 {
        eprintln!("note: fewer than 5 repetitions gives an unstable median");
    }
    println!(
        "{:<12} {:>4} {:>12} {:>12} {:>10} {:>12}",
        "graph", "n", "dense a/m", "fast a/m", "reduction", "deviation"
    );
    let mut rows = Vec::new();
    for arg in graphs {
        let (name, g, hints) = load_graph(arg)?;
        let strategy = PlanStrategy { hints, ..Default::default() };
        let fast = plan_fast_gft(&g, &strategy)?;
        let dense = dense_plan(&g)?;
        let fast_ops = fast.op_count();
        let dense_ops = dense.op_count();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signals = uniform_signals(&mut rng, signal_count, g.n());
        let fast_time = median_batch_seconds(&fast, &signals, reps, threads)?;
        let dense_time = median_batch_seconds(&dense, &signals, reps, threads)?;
        let reduction = 100.0 * (1.0 - fast_time / dense_time);

        let fast_coeffs = batch_apply(&fast, &signals, threads)?;
        let dense_coeffs = batch_apply(&dense, &signals, threads)?;
        let deviation = max_cluster_deviation(&fast.eigenvalues, &fast_coeffs, &dense_coeffs);

        println!(
            "{:<12} {:>4} {:>12} {:>12} {:>9.1}% {:>12.2e}",
            name,
            g.n(),
            format!("{}/{}", dense_ops.additions, dense_ops.multiplications),
            format!("{}/{}", fast_ops.additions, fast_ops.multiplications),
            reduction,
            deviation
        );
        rows.push(serde_json::json!({
            "name": name,
            "n": g.n(),
            "dense_additions": dense_ops.additions,
            "dense_multiplications": dense_ops.multiplications,
            "fast_additions": fast_ops.additions,
            "fast_multiplications": fast_ops.multiplications,
            "fast_seconds": fast_time,
            "dense_seconds": dense_time,
            "reduction_percent": reduction,
            "max_cluster_deviation": deviation,
        }));
    }
    if let Some(path) = out {
        let doc = serde_json::json!({ "signals": signal_count, "seed": seed, "rows": rows });
        std::fs::write(path, doc.to_string())?;
    }
    Ok(())
}

/// Pick the involution a hybrid plan should split on: valid hints first
/// (most pairs, then lexicographic), otherwise the best search result.
fn best_involution(g: &Graph, hints: &[Involution], budget: usize) -> Option<Involution> {
    let mut valid: Vec<&Involution> = hints
        .iter()
        .filter(|phi| {
            phi.len() == g.n()
                && !phi.is_identity()
                && is_phi_symmetric(g, phi, fastgft::WEIGHT_REL_TOL)
        })
        .collect();
    if !valid.is_empty() {
        valid.sort_by(|a, b| {
            b.pair_count().cmp(&a.pair_count()).then(a.as_slice().cmp(b.as_slice()))
        });
        return Some(valid[0].clone());
    }
    if let Ok(found) = search_involutions_tree(g) {
        if let Some(first) = found.into_iter().next() {
            return Some(first);
        }
    }
    search_involutions(g, budget).involutions.into_iter().next()
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    graph: &str,
    layer_counts: &[usize],
    signal_count: usize,
    reps: usize,
    seed: u64,
    threads: usize,
    budget: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (name, g, hints) = load_graph(graph)?;
    let dense = dense_plan(&g)?;
    let reference = gft(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signals = uniform_signals(&mut rng, signal_count, g.n());

    let mut csv = String::from("implementation,layers,additions,multiplications,runtime_ms,delta,epsilon\n");
    let mut add_row = |label: &str,
                       layers: Option<usize>,
                       plan: &FastGftPlan|
     -> Result<(), CliError> {
        let ops = plan.op_count();
        let seconds = median_batch_seconds(plan, &signals, reps, threads)?;
        let basis = plan.realized_basis()?;
        let delta = delta_error(&basis, &reference.eigenvectors)?;
        let epsilon = epsilon_error(&basis, &reference.eigenvectors, &signals)?;
        let layers = layers.map_or(String::new(), |j| j.to_string());
        writeln!(
            csv,
            "{label},{layers},{},{},{:.6},{delta},{epsilon}",
            ops.additions,
            ops.multiplications,
            seconds * 1e3
        )
        .expect("string write");
        Ok(())
    };

    add_row("matrix", None, &dense)?;
    let phi = best_involution(&g, &hints, budget);
    match &phi {
        Some(phi) => {
            let strategy = PlanStrategy {
                search_budget: budget,
                max_depth: 1,
                min_leaf: 2,
                hints: vec![phi.clone()],
            };
            add_row("haar+matrix", None, &plan_fast_gft(&g, &strategy)?)?;
        }
        None => eprintln!("note: {name} has no symmetry involution; skipping hybrid variants"),
    }
    let l = laplacian(&g);
    for &j in layer_counts {
        add_row("approx", Some(j), &truncated_jacobi(&l, j)?.to_fast_plan())?;
    }
    if let Some(phi) = &phi {
        for &j in layer_counts {
            add_row("haar+approx", Some(j), &haar_plus_approx(&g, phi, j)?)?;
        }
    }
    emit(out, &csv)
}
