use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use treedist::approx::stt_approx;
use treedist::canon::is_isomorphic;
use treedist::deg3::degree3_representation;
use treedist::gadget::{build_gadget, cover_cost, cover_to_script, planted_instance, x3c_bruteforce, X3CInstance};
use treedist::oracle::{exact_stt_distance, random_phylogeny, Distance, DEFAULT_BUDGET};
use treedist::script::{read_script, write_script};
use treedist::shared::{check_preconditions, nonshared_bruteforce, nonshared_edges, Mode, SharedEdgeReport};
use treedist::stt::replay;
use treedist::{parse_newick_with, serialize_newick, NewickOptions, Phylogeny, Tree};

mod bench;
mod report;

use report::{ApproxSummary, ComparisonReport, InputDigest};

#[derive(Parser)]
#[command(name = "treedist", version, about = "Compare phylogenies by non-shared edges and subtree transfer distance")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Read branch lengths as edge weights.
    #[arg(long, global = true)]
    weighted: bool,
    /// Contract degree-2 nodes in the input instead of rejecting them.
    #[arg(long, global = true)]
    normalize: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Labels,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::Labels => Mode::LeafLabels,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify every edge of both trees as shared or non-shared.
    Nonshared {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        /// Use the quadratic method when the fast path's preconditions fail.
        #[arg(long)]
        fallback_bruteforce: bool,
        /// Always use the quadratic method.
        #[arg(long)]
        bruteforce: bool,
        /// List the leaf splits of the non-shared edges.
        #[arg(long)]
        list: bool,
        /// Include the elapsed time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Approximate the unweighted subtree transfer distance.
    SttApprox {
        a: PathBuf,
        b: PathBuf,
        /// Write the transformation script to this file.
        #[arg(long)]
        emit_script: Option<PathBuf>,
        #[arg(long)]
        timing: bool,
    },
    /// Exact unweighted subtree transfer distance by breadth-first search.
    SttExact {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u32,
    },
    /// Degree-3 representation of a weighted tree.
    Deg3Rep {
        x: PathBuf,
        #[arg(long)]
        emit_script: Option<PathBuf>,
    },
    /// Replay a script file on a tree.
    Apply { tree: PathBuf, script: PathBuf },
    /// Hardness gadgets from exact cover instances.
    Gadget {
        #[command(subcommand)]
        command: GadgetCommand,
    },
    /// Generate inputs.
    Gen {
        #[command(subcommand)]
        command: GenCommand,
    },
    /// Time the fast and quadratic non-shared edge methods; prints CSV.
    Bench {
        #[arg(long, default_value_t = 10)]
        min_exp: u32,
        #[arg(long, default_value_t = 17)]
        max_exp: u32,
        #[arg(long, default_value_t = 8)]
        brute_min_exp: u32,
        #[arg(long, default_value_t = 12)]
        brute_max_exp: u32,
        #[arg(long, default_value_t = 3)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// Write the trees T and T' for an instance.
    Build {
        instance: PathBuf,
        #[arg(long = "out-T")]
        out_t: Option<PathBuf>,
        #[arg(long = "out-Tprime")]
        out_tprime: Option<PathBuf>,
    },
    /// Build and check the script for an exact cover (1-based subset indices).
    Script {
        instance: PathBuf,
        #[arg(long, value_delimiter = ',')]
        cover: Option<Vec<usize>>,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// A seeded random phylogeny in Newick format.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
    },
    /// A seeded exact cover instance with a planted cover.
    X3c {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: String, source: treedist::Error },
    #[error(transparent)]
    Domain(#[from] treedist::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        use treedist::Error as E;
        let e = match self {
            CliError::Io { .. } => return "io",
            CliError::Usage(_) => return "usage",
            CliError::Input { source, .. } | CliError::Domain(source) => source,
        };
        match e {
            E::Syntax { .. } => "syntax",
            E::DuplicateLabel(_) => "duplicate-label",
            E::DegreeTooLow { .. } | E::DegreeTooHigh { .. } => "degree",
            E::InvalidTree(_) => "invalid-tree",
            E::InvalidWeight(_) => "invalid-weight",
            E::UnknownEdge(..) | E::UnknownNode(_) | E::InvalidOperation(_) => "invalid-operation",
            E::LabelMismatch(_) | E::MultisetMismatch { .. } | E::Precondition(_) => "precondition",
            E::Script { .. } => "script",
            E::Unsupported(_) => "unsupported",
            E::InvalidInstance(_) => "invalid-instance",
            _ => "internal",
        }
    }
}

type CliResult<T> = Result<T, CliError>;

struct Ctx {
    json: bool,
    opts: NewickOptions,
    seed: u64,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(ctx: &Ctx, path: &Path) -> CliResult<(Phylogeny, InputDigest)> {
    let text = read(path)?;
    let p = parse_newick_with(&text, ctx.opts).map_err(|source| CliError::Input {
        path: path.display().to_string(),
        source,
    })?;
    Ok((p, InputDigest::new(&path.display().to_string(), &text)))
}

fn emit(ctx: &Ctx, value: serde_json::Value, text: String) {
    if ctx.json {
        println!("{}", serde_json::to_string_pretty(&value).unwrap());
    } else {
        print!("{text}");
    }
}

/// Leaf labels on the side of each non-shared edge away from the least label.
fn splits(tree: &Tree, r: &SharedEdgeReport, side: usize) -> Vec<Vec<String>> {
    let least = tree.leaves().filter_map(|v| tree.label(v)).min().unwrap_or_default().to_string();
    let mut out: Vec<Vec<String>> = r
        .nonshared(side)
        .map(|(u, v)| {
            let s = tree.side_labels(u, v);
            if s.contains(&least) {
                tree.side_labels(v, u)
            } else {
                s
            }
        })
        .collect();
    out.sort();
    out
}

fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Ctx {
        json: cli.json,
        opts: NewickOptions {
            weighted: cli.weighted,
            normalize: cli.normalize,
            degree_bound: None,
        },
        seed: cli.seed,
    };
    match cli.command {
        Command::Nonshared {
            a,
            b,
            mode,
            fallback_bruteforce,
            bruteforce,
            list,
            timing,
        } => {
            let ((t, da), (tp, db)) = (load(&ctx, &a)?, load(&ctx, &b)?);
            let mode = Mode::from(mode);
            let start = Instant::now();
            let brute = bruteforce || (fallback_bruteforce && check_preconditions(t.tree(), tp.tree(), mode).is_err());
            let r = if brute {
                nonshared_bruteforce(t.tree(), tp.tree(), mode)
            } else {
                nonshared_edges(t.tree(), tp.tree(), mode)?
            };
            let elapsed = start.elapsed().as_secs_f64();
            let report = ComparisonReport {
                version: version(),
                inputs: vec![da, db],
                mode: serde_json::to_value(mode).unwrap().as_str().unwrap().to_string(),
                method: if brute { "bruteforce" } else { "partition-labeling" }.into(),
                b: r.b(),
                b_prime: r.b_prime(),
                shared: [r.left.len() - r.b(), r.right.len() - r.b_prime()],
                nonshared_splits: list.then(|| [splits(t.tree(), &r, 0), splits(tp.tree(), &r, 1)]),
                approx: None,
                elapsed_seconds: timing.then_some(elapsed),
            };
            emit(&ctx, serde_json::to_value(&report).unwrap(), report.text());
        }
        Command::SttApprox {
            a,
            b,
            emit_script,
            timing,
        } => {
            let ((t, da), (tp, db)) = (load(&ctx, &a)?, load(&ctx, &b)?);
            let start = Instant::now();
            let ap = stt_approx(&t, &tp)?;
            let elapsed = start.elapsed().as_secs_f64();
            if let Some(path) = emit_script {
                write(&path, &write_script(t.tree(), &ap.script)?)?;
            }
            let c = &ap.certificate;
            let report = ComparisonReport {
                version: version(),
                inputs: vec![da, db],
                mode: "leaf-labels".into(),
                method: "partition-labeling".into(),
                b: c.b,
                b_prime: c.b_prime,
                shared: [t.tree().edge_count() - c.b, tp.tree().edge_count() - c.b_prime],
                nonshared_splits: None,
                approx: Some(ApproxSummary {
                    cost: c.cost,
                    lower_bound: c.lower_bound,
                    ratio_bound: c.ratio_bound,
                    degree_bound: c.degree_bound,
                    operations: ap.script.len(),
                }),
                elapsed_seconds: timing.then_some(elapsed),
            };
            emit(&ctx, serde_json::to_value(&report).unwrap(), report.text());
        }
        Command::SttExact { a, b, budget } => {
            let ((t, _), (tp, _)) = (load(&ctx, &a)?, load(&ctx, &b)?);
            let d = exact_stt_distance(t.tree(), tp.tree(), budget)?;
            let (value, text) = match d {
                Distance::Exact(k) => (json!({ "distance": k, "budget": budget }), format!("distance {k}\n")),
                Distance::Exceeded => (
                    json!({ "distance": null, "exceeded": true, "budget": budget }),
                    format!("distance > {budget}\n"),
                ),
            };
            emit(&ctx, value, text);
        }
        Command::Deg3Rep { x, emit_script } => {
            let (p, _) = load(&ctx, &x)?;
            let tree = p.tree().to_weighted();
            let rep = degree3_representation(&tree)?;
            if let Some(path) = emit_script {
                write(&path, &write_script(&tree, &rep.script)?)?;
            }
            let nwk = serialize_newick(&rep.tree, None);
            emit(
                &ctx,
                json!({
                    "newick": nwk,
                    "added_nodes": rep.script.len(),
                    "cost": rep.script.total().to_string(),
                }),
                format!("{nwk}\n"),
            );
        }
        Command::Apply { tree, script } => {
            let (p, _) = load(&ctx, &tree)?;
            let text = read(&script)?;
            let s = read_script(p.tree(), &text)?;
            let (end, cost) = replay(p.tree(), &s)?;
            let nwk = serialize_newick(&end, None);
            emit(
                &ctx,
                json!({ "newick": nwk, "cost": cost.to_string(), "operations": s.len() }),
                format!("{nwk}\ncost {cost}\n"),
            );
        }
        Command::Gadget { command } => gadget(&ctx, command)?,
        Command::Gen { command } => match command {
            GenCommand::Random { n, d } => {
                if n < 3 || d < 3 {
                    return Err(CliError::Usage("need n >= 3 and d >= 3".into()));
                }
                let p = random_phylogeny(n, d, ctx.opts.weighted, ctx.seed);
                println!("{}", serialize_newick(p.tree(), None));
            }
            GenCommand::X3c { q, n } => {
                let (inst, cover) = planted_instance(q, n, ctx.seed)?;
                let c: Vec<String> = cover.iter().map(|i| (i + 1).to_string()).collect();
                print!("# cover {}\n{inst}", c.join(","));
            }
        },
        Command::Bench {
            min_exp,
            max_exp,
            brute_min_exp,
            brute_max_exp,
            trials,
        } => {
            let rows = bench::run(&bench::BenchConfig {
                min_exp,
                max_exp,
                brute_min_exp,
                brute_max_exp,
                trials,
                seed: ctx.seed,
            });
            let slope = |alg: &str| {
                let pts: Vec<(usize, f64)> = rows.iter().filter(|r| r.algorithm == alg).map(|r| (r.n, r.seconds)).collect();
                (pts.len() >= 2).then(|| bench::loglog_slope(&pts))
            };
            let rows_json: Vec<_> = rows
                .iter()
                .map(|r| json!({ "algorithm": r.algorithm, "n": r.n, "seconds": r.seconds }))
                .collect();
            emit(
                &ctx,
                json!({ "rows": rows_json, "slope_fast": slope("fast"), "slope_bruteforce": slope("bruteforce") }),
                bench::csv(&rows),
            );
        }
    }
    Ok(())
}

fn gadget(ctx: &Ctx, command: GadgetCommand) -> CliResult<()> {
    let load_inst = |path: &Path| -> CliResult<X3CInstance> {
        read(path)?.parse().map_err(|source| CliError::Input {
            path: path.display().to_string(),
            source,
        })
    };
    match command {
        GadgetCommand::Build {
            instance,
            out_t,
            out_tprime,
        } => {
            let inst = load_inst(&instance)?;
            let g = build_gadget(&inst)?;
            let (t, tp) = (serialize_newick(&g.t, None), serialize_newick(&g.t_prime, None));
            let mut text = String::new();
            match out_t {
                Some(p) => write(&p, &format!("{t}\n"))?,
                None => text += &format!("{t}\n"),
            }
            match out_tprime {
                Some(p) => write(&p, &format!("{tp}\n"))?,
                None => text += &format!("{tp}\n"),
            }
            text += &format!("degree_bound {}\nthreshold {}\n", g.degree_bound, g.threshold);
            emit(
                ctx,
                json!({
                    "n": inst.n(), "q": inst.q(),
                    "degree_bound": g.degree_bound, "threshold": g.threshold,
                    "leaves": g.t.leaf_count(),
                }),
                text,
            );
        }
        GadgetCommand::Script { instance, cover } => {
            let inst = load_inst(&instance)?;
            let cover = match cover {
                Some(c) => {
                    if c.iter().any(|&i| i == 0 || i > inst.n()) {
                        return Err(CliError::Usage(format!("cover indices must lie in 1..={}", inst.n())));
                    }
                    c.into_iter().map(|i| i - 1).collect()
                }
                None => x3c_bruteforce(&inst)
                    .ok_or_else(|| treedist::Error::InvalidInstance("no exact cover exists".into()))?,
            };
            let g = build_gadget(&inst)?;
            let s = cover_to_script(&g, &cover)?;
            let (end, cost) = replay(&g.t, &s)?;
            if is_isomorphic(&end, &g.t_prime).is_none() {
                return Err(treedist::Error::Internal("script result differs from T'".into()).into());
            }
            let one_based: Vec<usize> = cover.iter().map(|i| i + 1).collect();
            let c: Vec<String> = one_based.iter().map(ToString::to_string).collect();
            emit(
                ctx,
                json!({
                    "cover": one_based, "cost": cost.to_string(), "expected": cover_cost(&inst),
                    "threshold": g.threshold, "operations": s.len(), "isomorphic": true,
                }),
                format!(
                    "cover {}\ncost {cost}\nthreshold {}\noperations {}\nresult isomorphic to T'\n",
                    c.join(","),
                    g.threshold,
                    s.len()
                ),
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(if matches!(e, CliError::Usage(_)) { 2 } else { 1 })
        }
    }
}
