use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use sdm::graph::{canonical_form, GraphDoc, TypedGraph};
use sdm::model::{load_model, load_story_diagram, StoryDiagram};
use sdm::oracle::{cross_check, OracleOptions, DEFAULT_LOOP_BOUND, DEFAULT_SIZE_BOUND};
use sdm::spo::{enumerate_language, RuleDoc};
use sdm::step::{Configuration, MatchOrder, Status, Strategy, DEFAULT_MAX_STEPS};
use sdm::syntax::{syntax_grammar, syntax_rules};
use sdm::{LoadError, OracleError};

const OK: u8 = 0;
const DISAGREE: u8 = 1;
const INVALID: u8 = 2;
const IO: u8 = 3;
const PATTERN_FAILED: u8 = 4;
const BUDGET: u8 = 5;
const REFUSED: u8 = 6;

#[derive(Parser)]
#[command(name = "sdm", version, about = "Validate, run and cross-check story diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a diagram's control flow, patterns and binding marks.
    Validate { diagram: PathBuf },
    /// Execute a diagram on a model.
    Run {
        diagram: PathBuf,
        model: PathBuf,
        #[command(flatten)]
        exec: ExecArgs,
        /// Where to write the final model.
        #[arg(long, default_value = "final.json")]
        out: PathBuf,
        #[arg(long, default_value = "trace.jsonl")]
        trace: PathBuf,
        /// Also write the final interpreter state.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// List the valid control-flow graphs with at most N nodes.
    Enumerate {
        #[arg(long)]
        max_nodes: usize,
    },
    /// Run a diagram and compare the result with the set semantics.
    Oracle {
        diagram: PathBuf,
        model: PathBuf,
        #[command(flatten)]
        exec: ExecArgs,
        #[arg(long, default_value_t = DEFAULT_SIZE_BOUND)]
        size_bound: usize,
        #[arg(long, default_value_t = DEFAULT_LOOP_BOUND)]
        loop_bound: usize,
    },
    /// Write the control-flow grammar's rules as rule documents.
    SyntaxRules {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct ExecArgs {
    /// Model node bound to `this`.
    #[arg(long)]
    this: String,
    #[arg(long, value_enum, default_value_t = StrategyArg::Conservative)]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = OrderArg::Lex)]
    match_order: OrderArg,
    /// Seed for `--match-order random`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Conservative,
    Optimistic,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Lex,
    Random,
}

/// An exit code with the message explaining it.
struct Failure(u8, String);

impl Failure {
    fn new(code: u8, msg: impl Display) -> Self {
        Failure(code, msg.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { IO } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Validate { diagram } => validate(&diagram),
        Command::Run {
            diagram,
            model,
            exec,
            out,
            trace,
            state,
        } => run(&diagram, &model, &exec, &out, &trace, state.as_deref()),
        Command::Enumerate { max_nodes } => enumerate(max_nodes),
        Command::Oracle {
            diagram,
            model,
            exec,
            size_bound,
            loop_bound,
        } => oracle(&diagram, &model, &exec, OracleOptions { size_bound, loop_bound }),
        Command::SyntaxRules { out } => export_rules(&out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(IO, format!("{}: {e}", path.display())))
}

fn load_error(path: &Path, e: LoadError) -> Failure {
    let code = match e {
        LoadError::InvalidCfg(_) | LoadError::Diagram(_) | LoadError::Binding(_) => INVALID,
        LoadError::Parse(_) | LoadError::Graph { .. } | LoadError::Rule { .. } => IO,
    };
    Failure::new(code, format!("{}: {e}", path.display()))
}

fn load(diagram: &Path, model: &Path) -> Result<(Arc<StoryDiagram>, TypedGraph), Failure> {
    let d = load_story_diagram(&read(diagram)?).map_err(|e| load_error(diagram, e))?;
    let m = load_model(&read(model)?, &d).map_err(|e| load_error(model, e))?;
    Ok((Arc::new(d), m))
}

fn start(d: Arc<StoryDiagram>, model: TypedGraph, args: &ExecArgs) -> Result<Configuration, Failure> {
    let order = match (args.match_order, args.seed) {
        (OrderArg::Lex, None) => MatchOrder::Lex,
        (OrderArg::Random, Some(seed)) => MatchOrder::Random { seed },
        (OrderArg::Lex, Some(_)) => return Err(Failure::new(IO, "--seed requires --match-order random")),
        (OrderArg::Random, None) => return Err(Failure::new(IO, "--match-order random requires --seed")),
    };
    let strategy = match args.strategy {
        StrategyArg::Conservative => Strategy::Conservative,
        StrategyArg::Optimistic => Strategy::Optimistic,
    };
    Configuration::initialize(d, model, &args.this, strategy, order).map_err(|e| Failure::new(IO, e))
}

fn validate(path: &Path) -> Outcome {
    let d = load_story_diagram(&read(path)?).map_err(|e| load_error(path, e))?;
    let cfg = d.cfg();
    println!("valid: {} story nodes", cfg.classification().len());
    for (n, class) in cfg.classification().iter() {
        println!("  {n}: {class}");
    }
    let witness = serde_json::to_string_pretty(cfg.derivation()).expect("derivations serialize");
    println!("derivation:\n{witness}");
    Ok(OK)
}

fn run(diagram: &Path, model: &Path, args: &ExecArgs, out: &Path, trace: &Path, state: Option<&Path>) -> Outcome {
    if args.max_steps == 0 {
        return Err(Failure::new(IO, "--max-steps must be positive"));
    }
    let (d, m) = load(diagram, model)?;
    let mut c = start(d, m, args)?;
    let t = c.run(args.max_steps).map_err(|e| Failure::new(IO, e))?;
    write(trace, &t.to_jsonl())?;
    write(out, &sdm::graph::serialize_graph(c.model()))?;
    if let Some(p) = state {
        write(p, &c.to_state_json())?;
    }
    println!(
        "{} after {} steps, model revision {}",
        c.status(),
        c.steps_taken(),
        c.model_rev()
    );
    match c.status() {
        Status::Error { node } => Err(Failure::new(PATTERN_FAILED, format!("pattern failed at node {node}"))),
        Status::Nonterminating => Err(Failure::new(
            BUDGET,
            format!("step budget of {} exhausted", args.max_steps),
        )),
        _ => Ok(OK),
    }
}

fn enumerate(max_nodes: usize) -> Outcome {
    if max_nodes < 3 {
        return Err(Failure::new(IO, "--max-nodes must be at least 3"));
    }
    let lang = enumerate_language(&syntax_grammar(), max_nodes).map_err(|e| Failure::new(IO, e))?;
    for w in &lang.warnings {
        eprintln!("warning: {w}");
    }
    for g in &lang.members {
        let canon = canonical_form(g).relabel(g);
        println!("{}", serde_json::to_string(&GraphDoc::from_graph(&canon)).expect("graphs serialize"));
    }
    println!("count: {}", lang.len());
    Ok(OK)
}

fn oracle(diagram: &Path, model: &Path, args: &ExecArgs, opts: OracleOptions) -> Outcome {
    let (d, m) = load(diagram, model)?;
    if m.node_count() > opts.size_bound {
        let e = OracleError::Oversized {
            nodes: m.node_count(),
            bound: opts.size_bound,
        };
        return Err(Failure::new(REFUSED, e));
    }
    let mut c = start(d.clone(), m.clone(), args)?;
    let t = c.run(args.max_steps).map_err(|e| Failure::new(IO, e))?;
    let check = cross_check(&d, &m, &args.this, &t, opts).map_err(|e| match e {
        OracleError::Oversized { .. } | OracleError::Unsupported(_) => Failure::new(REFUSED, e),
        e => Failure::new(IO, e),
    })?;
    println!("run: {} after {} steps", c.status(), c.steps_taken());
    for n in &check.notes {
        println!("  {n}");
    }
    println!(
        "set semantics: {} output(s){}",
        check.outputs,
        if check.complete { "" } else { ", incomplete" }
    );
    println!("{}", check.verdict);
    Ok(if check.verdict.is_disagreement() { DISAGREE } else { OK })
}

fn export_rules(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::new(IO, format!("{}: {e}", dir.display())))?;
    for r in syntax_rules() {
        let mut doc = RuleDoc::from_rule(&r.rule);
        doc.provisional = true;
        let text = serde_json::to_string_pretty(&doc).expect("rules serialize") + "\n";
        write(&dir.join(format!("{}.json", r.rule.name())), &text)?;
    }
    Ok(OK)
}
