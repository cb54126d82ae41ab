//! Command-line front end for shell-code searches.
//!
//! Subcommands cover the whole pipeline: enumerate shells, partition them
//! into orbits under a prescribed group, solve the weighted clique problem,
//! and turn the result into verified witness files and bound records; plus
//! verification, embedding, sphere-level unions, catalog rendering, and a
//! sweep driver for parameter grids.  Exit codes: 0 success or proven
//! optimal, 2 stopped by budget (bound still valid), 3 skipped by a resource
//! cap, 1 error.

mod config;
mod manifest;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use num::rational::Ratio;

use latshell::assembler::{
    assemble, builtin_orthogonal, embed_scale, merge_records, parse_ratio, read_matrix,
    read_records, read_witness, render_table, spherical_params, union_scaled, validate_record,
    verify_shell_code, write_records, write_spherical, write_witness, BoundRecord,
};
use latshell::cliquesolve::{max_weight_clique, SolveBudget};
use latshell::orbitgraph::{
    build_graph_with_limits, read_graph_cache, write_graph_cache, BuildLimits,
};
use latshell::shellgeom::{
    aut_orbit_reps, enumerate_shell_capped, write_vectors, CodeSpec, LatticeVector, ShellId,
    DEFAULT_SHELL_CAP,
};
use latshell::symgroup::{group_order, parse_group, partition_orbits_capped};
use latshell::{Error, Result};

use config::Config;
use manifest::{
    sha256_file, sha256_hex, BudgetStats, GraphStats, GroupStats, OutcomeStats, OutputPaths,
    RunManifest, ShellStats, Timings,
};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_SKIPPED: u8 = 3;

const CACHE_DIR_ENV: &str = "LATSHELL_CACHE_DIR";

#[derive(Parser)]
#[command(
    name = "latshell",
    version,
    about = "Search for large codes in shells of the integer lattice"
)]
struct Cli {
    /// Cap worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Config file with key=value defaults; flags override.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Emit machine-readable JSON where the subcommand supports it.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the vectors of a shell, or one representative per symmetry class.
    Shell {
        n: usize,
        k: u32,
        /// Print one representative per class under coordinate permutations
        /// and sign changes instead of the full shell.
        #[arg(long)]
        reps_only: bool,
        /// Write to a file instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Search one shell for a large code under a prescribed symmetry group.
    Search {
        n: usize,
        k: u32,
        t: i64,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Re-check a witness file from scratch.
    Verify {
        witness: PathBuf,
    },
    /// Scale a witness through an orthogonal-row integer matrix.
    Embed {
        witness: PathBuf,
        /// Matrix file (`c=<c>` header plus rows).
        #[arg(long, conflicts_with = "c")]
        matrix: Option<PathBuf>,
        /// Use the built-in matrix with this squared row norm.
        #[arg(long)]
        c: Option<u64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Glue witness files on the unit sphere under an exact cosine bound.
    Union {
        /// Witness files; every vector of each file becomes a unit point.
        #[arg(required = true)]
        parts: Vec<PathBuf>,
        /// Cosine bound as a fraction `p/q` (or an integer).
        #[arg(long)]
        tmax: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Merge bound records and render them as a table per dimension.
    Catalog {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Restrict the rendering to one dimension.
        #[arg(long)]
        n: Option<usize>,
        /// Re-verify every witness referenced by the records.
        #[arg(long)]
        validate: bool,
    },
    /// Export the orbit compatibility graph in DIMACS-like text.
    Graph {
        n: usize,
        k: u32,
        t: i64,
        #[arg(long)]
        group: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limits: LimitFlags,
    },
    /// Run searches over a k-range and a list of groups, collecting records.
    Sweep {
        n: usize,
        t: i64,
        /// Comma-separated group descriptions to try per shell.
        #[arg(long)]
        groups: String,
        #[arg(long, default_value_t = 4)]
        kmin: u32,
        /// Default: 15 for n <= 11, else 26 - n.
        #[arg(long)]
        kmax: Option<u32>,
        #[command(flatten)]
        search: SearchFlags,
    },
}

#[derive(Args)]
struct SearchFlags {
    /// Group description: `aut`, `negacyclic`, `s2:negacyclic`, `p2`,
    /// `eblock`, `block2`, `prod:full@3+cyclic@3`, `file:<path>`, ...
    #[arg(long)]
    group: Option<String>,
    /// Wall-clock limit for the clique solve, in seconds.
    #[arg(long)]
    budget_secs: Option<u64>,
    /// Node limit for the clique solve.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Stop as soon as this weight is reached (bound, not proof).
    #[arg(long)]
    target: Option<u64>,
    /// Seed for the randomized greedy seeding phase.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for witnesses, records, and manifests.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitFlags,
}

#[derive(Args)]
struct LimitFlags {
    /// Cap on admissible orbit count before skipping.
    #[arg(long)]
    max_vertices: Option<usize>,
    /// Cap on pairwise member comparisons before skipping.
    #[arg(long)]
    pair_scan_budget: Option<u128>,
    /// Cap on shell size before skipping.
    #[arg(long)]
    shell_cap: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let (cfg, config_hash) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            (Config::parse(&text)?, Some(sha256_hex(text.as_bytes())))
        }
        None => (Config::default(), None),
    };
    if let Some(t) = cli.threads.or(cfg.threads) {
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let json = cli.json;
    match cli.cmd {
        Cmd::Shell { n, k, reps_only, out } => cmd_shell(n, k, reps_only, out, &cfg),
        Cmd::Search { n, k, t, search } => {
            let args = resolve_search(n, k, t, &search, &cfg, config_hash, json)?;
            let (code, _) = search_one(&args)?;
            Ok(code)
        }
        Cmd::Verify { witness } => cmd_verify(&witness, json),
        Cmd::Embed { witness, matrix, c, out } => cmd_embed(&witness, matrix, c, &out, json),
        Cmd::Union { parts, tmax, out } => cmd_union(&parts, &tmax, out, json),
        Cmd::Catalog { records, n, validate } => cmd_catalog(&records, n, validate, json),
        Cmd::Graph { n, k, t, group, out, limits } => {
            cmd_graph(n, k, t, &group, out, &limits, &cfg)
        }
        Cmd::Sweep { n, t, groups, kmin, kmax, search } => {
            cmd_sweep(n, t, &groups, kmin, kmax, &search, &cfg, config_hash, json)
        }
    }
}

fn cmd_shell(n: usize, k: u32, reps_only: bool, out: Option<PathBuf>, cfg: &Config) -> Result<u8> {
    let shell = ShellId::new(n, k)?;
    let vectors = if reps_only {
        aut_orbit_reps(shell)
    } else {
        enumerate_shell_capped(shell, cfg.shell_cap.unwrap_or(DEFAULT_SHELL_CAP))?
    };
    match out {
        Some(path) => {
            let what = if reps_only { "class representatives" } else { "vectors" };
            write_vectors(&path, &vectors, Some(&format!("{} {what} of {shell}", vectors.len())))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            for v in &vectors {
                writeln!(w, "{v}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// Everything one search run needs, resolved from flags and config.
struct SearchArgs {
    n: usize,
    k: u32,
    t: i64,
    group_text: String,
    budget: SolveBudget,
    limits: BuildLimits,
    shell_cap: u64,
    out_dir: PathBuf,
    cache_dir: Option<PathBuf>,
    command: Vec<String>,
    config_hash: Option<String>,
    json: bool,
    quiet: bool,
}

fn resolve_limits(flags: &LimitFlags, cfg: &Config) -> (BuildLimits, u64) {
    let defaults = BuildLimits::default();
    let limits = BuildLimits {
        max_vertices: flags
            .max_vertices
            .or(cfg.max_vertices)
            .unwrap_or(defaults.max_vertices),
        pair_scan_budget: flags
            .pair_scan_budget
            .or(cfg.pair_scan_budget)
            .unwrap_or(defaults.pair_scan_budget),
    };
    let shell_cap = flags.shell_cap.or(cfg.shell_cap).unwrap_or(DEFAULT_SHELL_CAP);
    (limits, shell_cap)
}

fn resolve_search(
    n: usize,
    k: u32,
    t: i64,
    flags: &SearchFlags,
    cfg: &Config,
    config_hash: Option<String>,
    json: bool,
) -> Result<SearchArgs> {
    let group_text = flags
        .group
        .clone()
        .ok_or_else(|| Error::InvalidParameter("search needs --group".into()))?;
    let budget = SolveBudget {
        time_limit: Duration::from_secs(
            flags.budget_secs.or(cfg.budget_secs).unwrap_or(3600),
        ),
        node_limit: flags.node_limit.or(cfg.node_limit).unwrap_or(u64::MAX),
        target_weight: flags.target.or(cfg.target_weight),
        rng_seed: flags.seed.or(cfg.seed).unwrap_or(1),
    };
    let (limits, shell_cap) = resolve_limits(&flags.limits, cfg);
    let cache_dir = cfg
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from));
    Ok(SearchArgs {
        n,
        k,
        t,
        group_text,
        budget,
        limits,
        shell_cap,
        out_dir: flags.out_dir.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from(".")),
        cache_dir,
        command: std::env::args().collect(),
        config_hash,
        json,
        quiet: false,
    })
}

/// Filesystem-safe slug of a group description.
fn sanitize_label(text: &str) -> String {
    let mut out = String::new();
    let mut dash = false;
    for ch in text.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
            dash = false;
        } else if !dash && !out.is_empty() {
            out.push('-');
            dash = true;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        "group".into()
    } else {
        out
    }
}

/// Run the full pipeline for one `(n, k, t, group)` cell: partition, build
/// the graph, solve, assemble, verify, and write the witness, the record,
/// and the manifest.  Returns the exit code and the record when one was
/// produced.
fn search_one(a: &SearchArgs) -> Result<(u8, Option<BoundRecord>)> {
    let started = Instant::now();
    let shell = ShellId::new(a.n, a.k)?;
    CodeSpec::new(shell, a.t)?;
    let group = parse_group(&a.group_text, a.n)?;

    let mut input_hashes = BTreeMap::new();
    if let Some(path) = a.group_text.strip_prefix("file:") {
        input_hashes.insert(path.to_string(), sha256_file(Path::new(path))?);
    }

    let label = sanitize_label(&a.group_text);
    let stem = format!("n{}_k{}_t{}_{}", a.n, a.k, a.t, label);
    std::fs::create_dir_all(&a.out_dir)?;
    let manifest_path = a.out_dir.join(format!("{stem}.manifest.json"));

    let budget_stats = BudgetStats {
        time_limit_secs: a.budget.time_limit.as_secs(),
        node_limit: a.budget.node_limit,
        target_weight: a.budget.target_weight,
        seed: a.budget.rng_seed,
    };
    let group_stats = |orbits: usize| GroupStats {
        text: a.group_text.clone(),
        label: group.label.clone(),
        tag: group.tag_string(),
        order: group_order(&group).to_string(),
        generators: group.generators().len(),
        orbits,
    };

    // A resource cap is a clean skip: record why, exit 3.
    let skip = |reason: String,
                    partition_ms: u128,
                    shell_vectors: u64,
                    orbits: usize|
     -> Result<(u8, Option<BoundRecord>)> {
        let manifest = RunManifest {
            command: a.command.clone(),
            config_hash: a.config_hash.clone(),
            input_hashes: input_hashes.clone(),
            t: a.t,
            shell: ShellStats { n: a.n, k: a.k, vectors: shell_vectors },
            group: group_stats(orbits),
            graph: GraphStats { vertices: 0, edges: 0, from_cache: false },
            budget: budget_stats.clone(),
            outcome: OutcomeStats {
                bound: 0,
                proven_optimal: false,
                nodes_explored: 0,
                clique: Vec::new(),
                exit_code: EXIT_SKIPPED,
                skip_reason: Some(reason.clone()),
            },
            outputs: OutputPaths { witness: None, records: None },
            timings: Timings {
                partition_ms,
                total_ms: started.elapsed().as_millis(),
                ..Timings::default()
            },
        };
        manifest.write(&manifest_path)?;
        if a.json {
            println!(
                "{}",
                serde_json::json!({
                    "n": a.n, "k": a.k, "t": a.t, "group": a.group_text,
                    "skipped": reason, "exit": EXIT_SKIPPED,
                })
            );
        } else if !a.quiet {
            println!("skipped: {reason}");
        }
        Ok((EXIT_SKIPPED, None))
    };

    let partition_started = Instant::now();
    let table = match partition_orbits_capped(shell, &group, a.shell_cap) {
        Ok(table) => table,
        Err(e @ Error::CapExceeded { .. }) => {
            return skip(e.to_string(), partition_started.elapsed().as_millis(), 0, 0)
        }
        Err(e) => return Err(e),
    };
    let partition_ms = partition_started.elapsed().as_millis();
    let shell_vectors = table.total_vectors();
    let orbit_count = table.orbit_count();

    let graph_started = Instant::now();
    let mut from_cache = false;
    let graph = match &a.cache_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            match read_graph_cache(dir, &table, a.t)? {
                Some(g) => {
                    from_cache = true;
                    g
                }
                None => match build_graph_with_limits(&table, a.t, &a.limits) {
                    Ok(g) => {
                        write_graph_cache(dir, &table, &g)?;
                        g
                    }
                    Err(e @ Error::CapExceeded { .. }) => {
                        return skip(e.to_string(), partition_ms, shell_vectors, orbit_count)
                    }
                    Err(e) => return Err(e),
                },
            }
        }
        None => match build_graph_with_limits(&table, a.t, &a.limits) {
            Ok(g) => g,
            Err(e @ Error::CapExceeded { .. }) => {
                return skip(e.to_string(), partition_ms, shell_vectors, orbit_count)
            }
            Err(e) => return Err(e),
        },
    };
    let graph_ms = graph_started.elapsed().as_millis();

    let solve_started = Instant::now();
    let result = max_weight_clique(&graph, &a.budget);
    let solve_ms = solve_started.elapsed().as_millis();

    let code = assemble(&table, &graph, &result.vertices)?;
    let witness_name = format!("{stem}.code");
    write_witness(&a.out_dir.join(&witness_name), &code)?;

    let record = BoundRecord {
        n: a.n,
        t: a.t,
        k: a.k,
        bound: result.weight,
        construction_tag: group.tag_string(),
        witness: Some(witness_name.clone()),
    };
    let records_path = a.out_dir.join("records.jsonl");
    let mut records = if records_path.exists() {
        read_records(&records_path)?
    } else {
        Vec::new()
    };
    records.push(record.clone());
    write_records(&records_path, &records)?;

    let exit_code = if result.proven_optimal { EXIT_OK } else { EXIT_BUDGET };
    let manifest = RunManifest {
        command: a.command.clone(),
        config_hash: a.config_hash.clone(),
        input_hashes,
        t: a.t,
        shell: ShellStats { n: a.n, k: a.k, vectors: shell_vectors },
        group: group_stats(orbit_count),
        graph: GraphStats {
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
            from_cache,
        },
        budget: budget_stats,
        outcome: OutcomeStats {
            bound: result.weight,
            proven_optimal: result.proven_optimal,
            nodes_explored: result.nodes_explored,
            clique: result.vertices.clone(),
            exit_code,
            skip_reason: None,
        },
        outputs: OutputPaths {
            witness: Some(witness_name.clone()),
            records: Some("records.jsonl".into()),
        },
        timings: Timings {
            partition_ms,
            graph_ms,
            solve_ms,
            total_ms: started.elapsed().as_millis(),
        },
    };
    manifest.write(&manifest_path)?;

    if a.json {
        println!(
            "{}",
            serde_json::json!({
                "n": a.n, "k": a.k, "t": a.t, "group": a.group_text,
                "bound": result.weight,
                "proven_optimal": result.proven_optimal,
                "nodes": result.nodes_explored,
                "vertices": graph.vertex_count(),
                "witness": witness_name,
                "exit": exit_code,
            })
        );
    } else if !a.quiet {
        let status = if result.proven_optimal { "optimal" } else { "budget-limited" };
        println!(
            "bound {} ({status}) for {} with max inner product {}, group {}",
            result.weight, shell, a.t, group.label
        );
        println!("witness: {}", a.out_dir.join(&witness_name).display());
    }
    Ok((exit_code, Some(record)))
}

fn cmd_verify(witness: &Path, json: bool) -> Result<u8> {
    let code = read_witness(witness)?;
    let report = verify_shell_code(&code);
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{report}");
        if let (false, Some((i, j))) = (report.passes(), report.worst_pair) {
            if report.max_inner.is_some_and(|m| m > report.t) {
                println!("  offending pair:");
                println!("    {}", code.vectors[i]);
                println!("    {}", code.vectors[j]);
            }
        }
    }
    Ok(if report.passes() { EXIT_OK } else { EXIT_ERROR })
}

fn cmd_embed(
    witness: &Path,
    matrix: Option<PathBuf>,
    c: Option<u64>,
    out: &Path,
    json: bool,
) -> Result<u8> {
    let code = read_witness(witness)?;
    let m = match (matrix, c) {
        (Some(path), None) => read_matrix(&path)?,
        (None, Some(c)) => builtin_orthogonal(c, code.spec.shell.n)?,
        _ => {
            return Err(Error::InvalidParameter(
                "embed needs exactly one of --matrix or --c".into(),
            ))
        }
    };
    let scaled = embed_scale(&code, &m)?;
    let report = verify_shell_code(&scaled);
    if !report.passes() {
        return Err(Error::VerificationFailed(format!(
            "scaled code fails verification: {report}"
        )));
    }
    write_witness(out, &scaled)?;
    if json {
        println!(
            "{}",
            serde_json::json!({
                "n": scaled.spec.shell.n,
                "k": scaled.spec.shell.k,
                "t": scaled.spec.t,
                "size": scaled.len(),
                "witness": out.display().to_string(),
            })
        );
    } else {
        println!(
            "scaled {} vectors into {} with max inner product {}",
            scaled.len(),
            scaled.spec.shell,
            scaled.spec.t
        );
    }
    Ok(EXIT_OK)
}

fn cmd_union(parts: &[PathBuf], tmax: &str, out: Option<PathBuf>, json: bool) -> Result<u8> {
    let bound: Ratio<i64> = parse_ratio(tmax)
        .ok_or_else(|| Error::InvalidParameter(format!("bad cosine bound {tmax:?}")))?;
    let mut points: Vec<(LatticeVector, u32)> = Vec::new();
    for path in parts {
        let code = read_witness(path)?;
        let k = code.spec.shell.k;
        points.extend(code.vectors.into_iter().map(|v| (v, k)));
    }
    let sphere = union_scaled(&points, bound)?;
    if let Some(path) = &out {
        write_spherical(path, &sphere)?;
    }
    let (n, size, max, angles) = spherical_params(&sphere);
    if json {
        println!(
            "{}",
            serde_json::json!({
                "n": n,
                "size": size,
                "max_cosine": max.map(|m| m.to_string()),
                "angles": angles.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "out": out.as_ref().map(|p| p.display().to_string()),
            })
        );
    } else {
        println!(
            "{size} unit points in dimension {n}, max cosine {}, {} distinct angles",
            max.map_or("none".into(), |m| m.to_string()),
            angles.len()
        );
    }
    Ok(EXIT_OK)
}

fn cmd_catalog(files: &[PathBuf], n: Option<usize>, validate: bool, json: bool) -> Result<u8> {
    let mut all = Vec::new();
    let mut failures = 0usize;
    for path in files {
        let records = read_records(path)?;
        if validate {
            let base = path.parent().unwrap_or(Path::new("."));
            for rec in &records {
                if rec.witness.is_none() {
                    continue;
                }
                match validate_record(rec, base) {
                    Ok(()) => {}
                    Err(e) => {
                        failures += 1;
                        eprintln!(
                            "invalid record ({}, {}, {}) in {}: {e}",
                            rec.n,
                            rec.t,
                            rec.k,
                            path.display()
                        );
                    }
                }
            }
        }
        all.extend(records);
    }
    let merged = merge_records(&all);
    if json {
        println!("{}", serde_json::to_string_pretty(&merged).expect("records serialize"));
    } else {
        let dims: Vec<usize> = match n {
            Some(n) => vec![n],
            None => {
                let mut dims: Vec<usize> = merged.iter().map(|r| r.n).collect();
                dims.sort_unstable();
                dims.dedup();
                dims
            }
        };
        for dim in dims {
            let mut ts: Vec<i64> = merged.iter().filter(|r| r.n == dim).map(|r| r.t).collect();
            ts.sort_unstable();
            ts.dedup();
            let mut ks: Vec<u32> = merged.iter().filter(|r| r.n == dim).map(|r| r.k).collect();
            ks.sort_unstable();
            ks.dedup();
            if ks.is_empty() {
                continue;
            }
            let (lo, hi) = (*ks.first().unwrap(), *ks.last().unwrap());
            let ks: Vec<u32> = (lo..=hi).collect();
            print!("{}", render_table(&merged, dim, &ts, &ks));
        }
    }
    if failures > 0 {
        eprintln!("{failures} invalid record(s)");
        return Ok(EXIT_ERROR);
    }
    Ok(EXIT_OK)
}

fn cmd_graph(
    n: usize,
    k: u32,
    t: i64,
    group_text: &str,
    out: Option<PathBuf>,
    limit_flags: &LimitFlags,
    cfg: &Config,
) -> Result<u8> {
    let shell = ShellId::new(n, k)?;
    CodeSpec::new(shell, t)?;
    let group = parse_group(group_text, n)?;
    let (limits, shell_cap) = resolve_limits(limit_flags, cfg);
    let table = match partition_orbits_capped(shell, &group, shell_cap) {
        Ok(table) => table,
        Err(e @ Error::CapExceeded { .. }) => {
            eprintln!("skipped: {e}");
            return Ok(EXIT_SKIPPED);
        }
        Err(e) => return Err(e),
    };
    let graph = match build_graph_with_limits(&table, t, &limits) {
        Ok(g) => g,
        Err(e @ Error::CapExceeded { .. }) => {
            eprintln!("skipped: {e}");
            return Ok(EXIT_SKIPPED);
        }
        Err(e) => return Err(e),
    };
    match out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            graph.write_dimacs(std::io::BufWriter::new(file))?;
        }
        None => {
            let stdout = std::io::stdout();
            graph.write_dimacs(stdout.lock())?;
        }
    }
    Ok(EXIT_OK)
}

/// The largest `k` the standard grids use for a given dimension.
fn default_kmax(n: usize) -> u32 {
    if n <= 11 {
        15
    } else {
        (26 - n.min(25)) as u32
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    n: usize,
    t: i64,
    groups: &str,
    kmin: u32,
    kmax: Option<u32>,
    flags: &SearchFlags,
    cfg: &Config,
    config_hash: Option<String>,
    json: bool,
) -> Result<u8> {
    let kmax = kmax.unwrap_or_else(|| default_kmax(n));
    let group_list: Vec<String> = groups
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if group_list.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one group".into()));
    }
    let out_dir = flags
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("sweep"));

    for k in kmin..=kmax {
        if i64::from(k) <= t {
            // No pair of distinct shell vectors can exceed k-1, and a bound
            // of k or more is vacuous; skip nonsensical cells.
            continue;
        }
        for group_text in &group_list {
            let mut args = resolve_search(
                n,
                k,
                t,
                &SearchFlags {
                    group: Some(group_text.clone()),
                    out_dir: Some(out_dir.clone()),
                    budget_secs: flags.budget_secs.or(Some(60)),
                    node_limit: flags.node_limit,
                    target: flags.target,
                    seed: flags.seed,
                    limits: LimitFlags {
                        max_vertices: flags.limits.max_vertices,
                        pair_scan_budget: flags.limits.pair_scan_budget,
                        shell_cap: flags.limits.shell_cap,
                    },
                },
                cfg,
                config_hash.clone(),
                json,
            )?;
            args.quiet = true;
            match search_one(&args) {
                Ok((code, Some(record))) => {
                    if !json {
                        let status = match code {
                            EXIT_OK => "optimal",
                            EXIT_BUDGET => "budget-limited",
                            _ => "done",
                        };
                        println!(
                            "k={k:2} group {group_text:<20} bound {:5} ({status})",
                            record.bound
                        );
                    }
                }
                Ok((_, None)) => {
                    if !json {
                        println!("k={k:2} group {group_text:<20} skipped (cap)");
                    }
                }
                Err(e) => {
                    if !json {
                        println!("k={k:2} group {group_text:<20} failed: {e}");
                    }
                }
            }
        }
    }

    let records_path = out_dir.join("records.jsonl");
    if records_path.exists() && !json {
        let records = read_records(&records_path)?;
        let ks: Vec<u32> = (kmin..=kmax).collect();
        print!("{}", render_table(&records, n, &[t], &ks));
    }
    Ok(EXIT_OK)
}
