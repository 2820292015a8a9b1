mod fail;
mod human;
mod load;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use baire_core::conditions::{validate_axioms, AxiomBudget};
use baire_core::games::{
    play, random_strategy, solve_finite, strategy_i_from_bperfect, strategy_ii_from_cover, strategy_to_bperfect, strategy_to_cover,
    transcript, CoverBudgetSpec, ExploreBudget, GameConfig, PlayHistory, Side, Strategy, Verdict,
};
use baire_core::smallness::{
    cantor_bendixson, is_b_nowhere_dense, is_sigma_bounded, is_superperfect, validate_bperfect, verify_b_meager_cover, CoverBudget, JBudget,
    NdBudget, NdMode, Witness,
};
use baire_core::tree::RegularTree;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use fail::{Fail, Outcome};
use human::Human;

#[derive(Parser)]
#[command(name = "baire-games", version, about = "Trees on the Baire space, small-set checks and the games that decide them")]
struct Cli {
    /// Worker threads for the parallel checks (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide a property of a tree (or of a B-perfect tree). Exit 1 if it fails.
    Check(CheckArgs),
    /// Split a tree into its superperfect kernel and finitely branching pieces.
    Decompose {
        tree: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check the condition-set axioms on every short sequence.
    ValidateCs {
        selector: String,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value_t = 4)]
        letter_cap: u32,
        #[arg(long, default_value_t = 8)]
        cond_limit: usize,
        /// Refuse sets that can only be sampled.
        #[arg(long)]
        exact: bool,
    },
    /// Play one game between two strategies and print the transcript.
    Play(PlayArgs),
    /// Solve the truncated game; `--out` writes the winner's certificate.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play a side yourself against a strategy.
    Repl {
        #[command(flatten)]
        game: GameArgs,
        /// The side you play.
        #[arg(long, value_enum, default_value = "ii")]
        human: SideArg,
        /// Strategy for the other side.
        #[arg(long, default_value = "solver")]
        opponent: String,
    },
    /// Render a tree or a B-perfect tree (JSON) as Graphviz DOT.
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    I,
    Ii,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::I => Side::I,
            SideArg::Ii => Side::II,
        }
    }
}

#[derive(Args, Clone)]
struct GameArgs {
    #[arg(long, default_value = "ex63")]
    cs: String,
    /// Payoff tree; the full tree over the set's alphabet if omitted.
    #[arg(long)]
    payoff: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    horizon: usize,
    #[arg(long, default_value_t = 2)]
    move_len_cap: usize,
    #[arg(long, default_value_t = 4)]
    letter_cap: u32,
    #[arg(long, default_value_t = 4)]
    cond_limit: usize,
    /// Tree over paired letters; switches to the witness game.
    #[arg(long)]
    witness_payoff: Option<PathBuf>,
    /// Seed for `random` strategies given without one.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PlayArgs {
    #[command(flatten)]
    game: GameArgs,
    /// from-bperfect:<file> | solver | random[:<seed>] | repl
    #[arg(long = "I")]
    strat_i: Option<String>,
    /// from-cover:<dir> | solver | random[:<seed>] | repl
    #[arg(long = "II")]
    strat_ii: Option<String>,
    /// A human takes whichever side has no strategy (II if both are free).
    #[arg(long)]
    repl: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Property {
    FinitelyBranching,
    Superperfect,
    SigmaBounded,
    NowhereDense,
    MeagerCover,
    Bperfect,
}

#[derive(Args)]
struct CheckArgs {
    /// Tree file, or B-perfect JSON for `--property bperfect`.
    file: PathBuf,
    #[arg(long, value_enum)]
    property: Property,
    #[arg(long, default_value = "ex63")]
    cs: String,
    /// Pieces for `meager-cover`.
    #[arg(long)]
    cover: Option<PathBuf>,
    /// Search a per-node witness within the budget instead of deciding exactly.
    #[arg(long)]
    bounded: bool,
    /// Node depth for bounded searches and cover coverage.
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 3)]
    ext_depth: usize,
    #[arg(long, default_value_t = 4)]
    letter_cap: u32,
    #[arg(long, default_value_t = 8)]
    cond_limit: usize,
}

impl CheckArgs {
    fn nd(&self) -> NdBudget {
        NdBudget {
            node_depth: self.depth,
            cond_limit: self.cond_limit,
            ext_depth: self.ext_depth,
            letter_cap: self.letter_cap,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("input error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Check(a) => cmd_check(a, cli.json),
        Cmd::Decompose { tree, out } => cmd_decompose(tree, out, cli.json),
        Cmd::ValidateCs {
            selector,
            max_len,
            letter_cap,
            cond_limit,
            exact,
        } => cmd_validate_cs(selector, *max_len, *letter_cap, *cond_limit, *exact, cli.json),
        Cmd::Play(a) => cmd_play(a, cli.json),
        Cmd::Solve { game, out } => cmd_solve(game, out.as_deref(), cli.json),
        Cmd::Repl { game, human, opponent } => {
            let side = Side::from(*human);
            let (i, ii) = match side {
                Side::I => ("repl".to_string(), opponent.clone()),
                Side::II => (opponent.clone(), "repl".to_string()),
            };
            let a = PlayArgs {
                game: game.clone(),
                strat_i: Some(i),
                strat_ii: Some(ii),
                repl: false,
            };
            cmd_play(&a, cli.json)
        }
        Cmd::ExportDot { file, out } => cmd_export_dot(file, out.as_deref()),
    }
}

fn print_json(v: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

/* check */

fn cmd_check(a: &CheckArgs, as_json: bool) -> Outcome {
    let cs = || load::condition_set(&a.cs, a.letter_cap);
    let (holds, detail): (bool, serde_json::Value) = match a.property {
        Property::Bperfect => {
            let j = load::bperfect(&a.file)?;
            let cs = cs()?;
            let budget = JBudget {
                cond_limit: a.cond_limit,
                ext_depth: a.ext_depth,
                letter_cap: a.letter_cap,
            };
            let r = validate_bperfect(&j, cs.as_ref(), budget);
            (r.is_empty(), serde_json::to_value(&r).unwrap())
        }
        Property::FinitelyBranching => (load::tree(&a.file)?.is_finitely_branching(), json!(null)),
        Property::Superperfect => (is_superperfect(&load::tree(&a.file)?), json!(null)),
        Property::SigmaBounded => match is_sigma_bounded(&load::tree(&a.file)?) {
            Some(pieces) => {
                let anchors: Vec<_> = pieces.iter().map(|p| json!({"state": p.state, "anchor": p.anchor})).collect();
                (true, json!({ "pieces": anchors }))
            }
            None => (false, json!(null)),
        },
        Property::NowhereDense => {
            let t = load::tree(&a.file)?;
            let cs = cs()?;
            let mode = if a.bounded { NdMode::Bounded(a.nd()) } else { NdMode::Exact };
            match is_b_nowhere_dense(&t, cs.as_ref(), mode)? {
                Some(w) => (true, serde_json::to_value(&w).unwrap()),
                None => (false, json!(null)),
            }
        }
        Property::MeagerCover => {
            let t = load::tree(&a.file)?;
            let cs = cs()?;
            let dir = a.cover.as_ref().ok_or_else(|| Fail::Input("meager-cover needs --cover <dir>".into()))?;
            let cover = load::cover_dir(dir)?;
            let budget = CoverBudget {
                depth: a.depth,
                letter_cap: a.letter_cap,
                nd: a.nd(),
            };
            let r = verify_b_meager_cover(&t, &cover.pieces, cs.as_ref(), budget)?;
            (r.holds(), serde_json::to_value(&r).unwrap())
        }
    };
    let name = a.property.to_possible_value().unwrap().get_name().to_string();
    if as_json {
        print_json(&json!({ "property": name, "holds": holds, "detail": detail }));
    } else {
        println!("{name}: {}", if holds { "yes" } else { "no" });
        if !detail.is_null() {
            println!("{detail}");
        }
    }
    if holds {
        Ok(())
    } else {
        Err(Fail::Check(format!("{} does not have property {name}", a.file.display())))
    }
}

/* decompose */

#[derive(Serialize, Deserialize)]
struct PieceEntry {
    file: String,
    iteration: usize,
    state: u32,
    anchor: baire_core::tree::FinSeq,
}

#[derive(Serialize, Deserialize)]
struct TraceFile {
    trace: baire_core::smallness::KernelTrace,
    pieces: Vec<PieceEntry>,
}

fn cmd_decompose(tree: &Path, out: &Path, as_json: bool) -> Outcome {
    let t = load::tree(tree)?;
    let d = cantor_bendixson(&t);
    fs::create_dir_all(out).map_err(|e| Fail::io(out, e))?;
    load::write(&out.join("kernel.tree"), &d.kernel.to_text())?;
    let mut entries = Vec::new();
    for (i, p) in d.pieces.iter().enumerate() {
        let file = format!("piece_{i}.tree");
        load::write(&out.join(&file), &p.tree.to_text())?;
        entries.push(PieceEntry {
            file,
            iteration: p.iteration,
            state: p.state,
            anchor: p.anchor.clone(),
        });
    }
    let trace = TraceFile {
        trace: d.trace.clone(),
        pieces: entries,
    };
    load::write(&out.join("trace.json"), &(serde_json::to_string_pretty(&trace).unwrap() + "\n"))?;
    let (n, m, k) = (d.kernel.state_count(), d.pieces.len(), d.trace.len());
    if as_json {
        print_json(&json!({ "kernel_states": n, "pieces": m, "iterations": k }));
    } else {
        println!("kernel_states={n} pieces={m} iterations={k}");
    }
    Ok(())
}

/* validate-cs */

fn cmd_validate_cs(sel: &str, max_len: usize, letter_cap: u32, cond_limit: usize, exact: bool, as_json: bool) -> Outcome {
    let cs = load::condition_set(sel, letter_cap)?;
    if exact && cs.bounded_only() {
        return Err(Fail::Input(format!("`{sel}` is a table set and can only be checked on samples")));
    }
    let report = validate_axioms(
        cs.as_ref(),
        AxiomBudget {
            max_len,
            letter_cap,
            cond_limit,
        },
    )?;
    if as_json {
        print_json(&report);
    } else {
        println!(
            "{}: {} violations (max_len {max_len}, letter_cap {letter_cap}, cond_limit {cond_limit})",
            report.condition_set, report.total_violations
        );
        for v in &report.violations {
            println!("  {v}");
        }
    }
    match report.violations.first() {
        None => Ok(()),
        Some(v) => Err(Fail::Check(v.to_string())),
    }
}

/* play, solve, repl */

fn game_config(g: &GameArgs) -> Outcome<GameConfig> {
    let cs = load::condition_set(&g.cs, g.letter_cap)?;
    let payoff = match &g.payoff {
        Some(p) => load::tree(p)?,
        None => RegularTree::full(cs.alphabet()),
    };
    let mut cfg = GameConfig::new(cs, payoff, g.horizon).with_caps(g.move_len_cap, g.letter_cap, g.cond_limit);
    if let Some(w) = &g.witness_payoff {
        cfg = cfg.with_witness_payoff(load::tree(w)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cover_nd_budget(cfg: &GameConfig) -> NdBudget {
    NdBudget {
        node_depth: cfg.horizon + 1,
        cond_limit: cfg.cond_limit,
        ext_depth: cfg.move_len_cap,
        letter_cap: cfg.letter_cap,
    }
}

fn strategy(spec: &str, side: Side, cfg: &GameConfig, seed: u64) -> Outcome<Box<dyn Strategy>> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let wrong_side = || Fail::Input(format!("`{kind}` strategies play for the other side"));
    match kind {
        "from-bperfect" => {
            if side != Side::I {
                return Err(wrong_side());
            }
            let j = load::bperfect(Path::new(arg))?;
            Ok(Box::new(strategy_i_from_bperfect(j, cfg.cs.clone())))
        }
        "from-cover" => {
            if side != Side::II {
                return Err(wrong_side());
            }
            let cover = load::cover_dir(Path::new(arg))?;
            let ws = load::cover_witnesses(&cover, cfg.cs.as_ref(), cover_nd_budget(cfg))?;
            Ok(Box::new(strategy_ii_from_cover(cover.pieces, ws, cfg.cs.clone())?))
        }
        "solver" => {
            let sol = solve_finite(cfg)?;
            Ok(Box::new(if sol.winner == side { sol.strategy } else { sol.other }))
        }
        "random" => {
            let seed = if arg.is_empty() {
                seed
            } else {
                arg.parse().map_err(|_| Fail::Input(format!("`{arg}` is not a seed")))?
            };
            Ok(Box::new(random_strategy(side, seed, cfg)))
        }
        "repl" => Ok(Box::new(Human { side, cfg: cfg.clone() })),
        _ => Err(Fail::Input(format!("unknown strategy `{spec}`"))),
    }
}

#[derive(Serialize, Deserialize)]
pub struct PlayRecord {
    pub history: PlayHistory,
    pub verdict: Verdict,
}

fn cmd_play(a: &PlayArgs, as_json: bool) -> Outcome {
    let cfg = game_config(&a.game)?;
    let (si, sii) = match (&a.strat_i, &a.strat_ii, a.repl) {
        (Some(i), Some(ii), _) => (i.clone(), ii.clone()),
        (Some(i), None, true) => (i.clone(), "repl".into()),
        (None, Some(ii), true) => ("repl".into(), ii.clone()),
        (None, None, true) => return Err(Fail::Input("--repl needs a strategy for the other side".into())),
        _ => return Err(Fail::Input("give both --I and --II, or one of them with --repl".into())),
    };
    let strat_i = strategy(&si, Side::I, &cfg, a.game.seed)?;
    let strat_ii = strategy(&sii, Side::II, &cfg, a.game.seed)?;
    let (h, v) = play(&cfg, strat_i.as_ref(), strat_ii.as_ref())?;
    if as_json {
        print_json(&PlayRecord { history: h, verdict: v });
    } else {
        print!("{}", transcript(&h, &v));
    }
    Ok(())
}

fn cmd_solve(g: &GameArgs, out: Option<&Path>, as_json: bool) -> Outcome {
    let cfg = game_config(g)?;
    let sol = solve_finite(&cfg)?;
    let mut written = Vec::new();
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Fail::io(dir, e))?;
        match sol.winner {
            Side::I => {
                let budget = ExploreBudget {
                    rounds: cfg.horizon,
                    cond_limit: cfg.cond_limit,
                };
                let j = strategy_to_bperfect(&sol.strategy, cfg.cs.as_ref(), budget)?;
                let path = dir.join("bperfect.json");
                load::write(&path, &(serde_json::to_string_pretty(&j).unwrap() + "\n"))?;
                written.push(path);
            }
            Side::II => {
                let spec = CoverBudgetSpec {
                    prefix_depth: cfg.horizon * cfg.move_len_cap,
                };
                let pieces = strategy_to_cover(&sol.strategy, &cfg, spec)?;
                for (i, p) in pieces.iter().enumerate() {
                    let path = dir.join(format!("piece_{i}.tree"));
                    load::write(&path, &p.tree.to_text())?;
                    written.push(path);
                }
                let ws: Vec<Witness> = pieces.into_iter().map(|p| p.witness).collect();
                let path = dir.join("witnesses.json");
                load::write(&path, &(serde_json::to_string_pretty(&ws).unwrap() + "\n"))?;
                written.push(path);
            }
        }
    }
    if as_json {
        print_json(&json!({ "winner": sol.winner, "visited": sol.visited, "written": written }));
    } else {
        println!("winner={} visited={}", sol.winner, sol.visited);
        for p in written {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

/* export-dot */

fn cmd_export_dot(file: &Path, out: Option<&Path>) -> Outcome {
    let text = load::read(file)?;
    let dot = if text.contains("\"vertices\"") {
        load::bperfect_dot(&load::bperfect(file)?)
    } else {
        RegularTree::parse(&text).map_err(Fail::in_file(file))?.to_dot()
    };
    match out {
        Some(p) => load::write(p, &dot),
        None => {
            print!("{dot}");
            Ok(())
        }
    }
}
