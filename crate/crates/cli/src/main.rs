use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use belnap::debug::{
    build_tree, serve_tcp, Answer, DebugError, DebugOutcome, DebugTree, Diagnosis, JsonOracle, Message, NodeClass, Oracle,
    ReplayOracle, StoredOracle,
};
use belnap::engine::{analyze_depthk, lfp, EngineError, DEFAULT_MAX_ITERS};
use belnap::interp::{CompiledProgram, ExtensionalInterpretation, InterpError, PatternInterpretation};
use belnap::models::{check_model, ModelError, Relation};
use belnap::modes::{check_well_moded, ModeError};
use belnap::sld::{SldError, DEFAULT_BUDGET};
use belnap::speccheck::{check_against_spec, SpecError, Specification};
use belnap::states::{check_step_monotonicity, parse_goal, selectable, successor, StateError, StepVerdict};
use belnap::syntax::{parse_term, UniverseError, DEFAULT_CAP};
use belnap::{parse_program, Atom, Program, TruthValue4, Universe};

#[derive(Parser)]
#[command(name = "belnap", version, about = "Four-valued semantics and debugging for pure Prolog programs")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "text")]
    format: Format,
    /// Another program file to load with the main one.
    #[arg(long = "include", global = true, value_name = "FILE")]
    include: Vec<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Clone)]
struct CarrierOpts {
    /// Depth bound of the carrier.
    #[arg(short = 'd', long = "depth", default_value_t = 3)]
    depth: usize,
    /// Largest carrier allowed.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Extra function symbol for the carrier, as name/arity.
    #[arg(long = "functor", value_name = "NAME/ARITY")]
    functors: Vec<String>,
}

#[derive(Args)]
struct InterpSource {
    /// Pattern interpretation file.
    #[arg(long, conflicts_with = "dump")]
    interp: Option<PathBuf>,
    /// Interpretation dump, one `atom value` per line.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Least fixed point of the immediate consequence operator.
    Lfp {
        program: PathBuf,
        #[command(flatten)]
        carrier: CarrierOpts,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Only print these atoms.
        #[arg(long = "atom")]
        atoms: Vec<String>,
        /// Write the result as a dump file.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Check an interpretation against a model relation.
    Check {
        program: PathBuf,
        #[command(flatten)]
        source: InterpSource,
        #[arg(long, default_value = "info_geq4")]
        relation: Relation,
        #[command(flatten)]
        carrier: CarrierOpts,
    },
    /// Mode checking of every group assignment.
    Modes { program: PathBuf },
    /// Depth-k approximation of the least fixed point.
    Analyze {
        program: PathBuf,
        #[arg(short = 'k', default_value_t = 3)]
        k: usize,
    },
    /// Check a program against a specification.
    Spec {
        program: PathBuf,
        spec: PathBuf,
        #[command(flatten)]
        carrier: CarrierOpts,
    },
    /// Declarative debugging of a wrong or missing answer.
    Debug {
        program: PathBuf,
        query: String,
        #[arg(long, value_enum, default_value = "wrong")]
        kind: Kind,
        /// Answer from an intended interpretation.
        #[arg(long, conflicts_with_all = ["answers", "serve", "json"])]
        intended: Option<PathBuf>,
        /// Replay answers from a transcript.
        #[arg(long, conflicts_with_all = ["serve", "json"])]
        answers: Option<PathBuf>,
        /// Speak the JSON protocol on a local TCP port.
        #[arg(long, value_name = "PORT", conflicts_with = "json")]
        serve: Option<u16>,
        /// Speak the JSON protocol on stdin and stdout.
        #[arg(long)]
        json: bool,
        /// Seconds to wait for each answer in serve mode.
        #[arg(long)]
        timeout: Option<u64>,
        /// Write the dialogue as JSON lines.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Computation steps from a goal, checked against a model.
    Step {
        program: PathBuf,
        goal: String,
        /// Literal to select, as disjunct.literal; defaults to the first
        /// selectable literal.
        #[arg(long = "select", value_name = "I.J")]
        selections: Vec<String>,
        /// Number of steps when no selections are given.
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[command(flatten)]
        source: InterpSource,
        /// Check against the least fixed point.
        #[arg(long, conflicts_with_all = ["interp", "dump"])]
        lfp: bool,
        #[command(flatten)]
        carrier: CarrierOpts,
        /// Drop disjuncts with a false ground equation after each step.
        #[arg(long)]
        simplify: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Wrong,
    Missing,
}

impl From<Kind> for Diagnosis {
    fn from(k: Kind) -> Diagnosis {
        match k {
            Kind::Wrong => Diagnosis::WrongAnswer,
            Kind::Missing => Diagnosis::MissingAnswer,
        }
    }
}

/// Exit codes.
const PASS: u8 = 0;
const FAIL: u8 = 1;
const RESOURCE: u8 = 2;
const USAGE: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("belnap: {:#}", e);
            ExitCode::from(if is_resource(&e) { RESOURCE } else { USAGE })
        }
    }
}

fn universe_resource(e: &UniverseError) -> bool {
    matches!(e, UniverseError::CapExceeded { .. })
}

fn interp_resource(e: &InterpError) -> bool {
    match e {
        InterpError::TooLarge { .. } => true,
        InterpError::Universe(u) => universe_resource(u),
        _ => false,
    }
}

fn sld_resource(e: &SldError) -> bool {
    matches!(e, SldError::BudgetExceeded)
}

fn is_resource(e: &anyhow::Error) -> bool {
    for cause in e.chain() {
        let hit = if let Some(x) = cause.downcast_ref::<UniverseError>() {
            universe_resource(x)
        } else if let Some(x) = cause.downcast_ref::<InterpError>() {
            interp_resource(x)
        } else if let Some(x) = cause.downcast_ref::<SldError>() {
            sld_resource(x)
        } else if let Some(x) = cause.downcast_ref::<EngineError>() {
            match x {
                EngineError::Interp(i) => interp_resource(i),
                EngineError::TooManyPatterns(..) => true,
                _ => false,
            }
        } else if let Some(x) = cause.downcast_ref::<ModeError>() {
            match x {
                ModeError::TooManyAssignments(_) => true,
                ModeError::Interp(i) => interp_resource(i),
                _ => false,
            }
        } else if let Some(x) = cause.downcast_ref::<SpecError>() {
            match x {
                SpecError::Interp(i) => interp_resource(i),
                SpecError::Engine(EngineError::Interp(i)) => interp_resource(i),
                SpecError::Engine(EngineError::TooManyPatterns(..)) => true,
                _ => false,
            }
        } else if let Some(x) = cause.downcast_ref::<DebugError>() {
            match x {
                DebugError::Interp(i) => interp_resource(i),
                DebugError::Sld(s) => sld_resource(s),
                DebugError::Timeout => true,
                _ => false,
            }
        } else if let Some(x) = cause.downcast_ref::<StateError>() {
            match x {
                StateError::TooMany(_) => true,
                StateError::Interp(i) => interp_resource(i),
                _ => false,
            }
        } else {
            false
        };
        if hit {
            return true;
        }
    }
    false
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_file(path: &Path) -> Result<Program> {
    parse_program(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_program(path: &Path, include: &[PathBuf]) -> Result<Program> {
    let mut p = parse_file(path)?;
    for extra in include {
        p.extend(parse_file(extra)?).with_context(|| format!("adding {}", extra.display()))?;
    }
    Ok(p)
}

fn parse_atom(src: &str) -> Result<Atom> {
    let t = parse_term(src).with_context(|| format!("parsing {}", src))?;
    Atom::from_term(&t).ok_or_else(|| anyhow!("{} is not an atom", src))
}

impl CarrierOpts {
    fn alphabet(&self, p: &Program) -> Result<std::collections::BTreeSet<(String, usize)>> {
        let mut a = p.alphabet();
        for f in &self.functors {
            let (name, arity) = f.rsplit_once('/').ok_or_else(|| anyhow!("expected name/arity, got {}", f))?;
            let arity: usize = arity.parse().with_context(|| format!("bad arity in {}", f))?;
            a.insert((name.to_string(), arity));
        }
        Ok(a)
    }

    fn build(&self, a: &std::collections::BTreeSet<(String, usize)>, overflow: bool) -> Result<Arc<Universe>> {
        if self.depth == 0 || self.cap == 0 {
            bail!("depth and cap must be positive");
        }
        let overflow = overflow && a.iter().any(|(_, n)| *n > 0);
        Ok(Arc::new(Universe::build(a, self.depth, overflow, self.cap)?))
    }
}

fn load_interp(
    src: &InterpSource,
    p: &Program,
    opts: &CarrierOpts,
) -> Result<Option<ExtensionalInterpretation>> {
    let preds = p.predicates();
    if let Some(path) = &src.interp {
        let pi = PatternInterpretation::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        let mut a = opts.alphabet(p)?;
        a.extend(pi.alphabet());
        let u = opts.build(&a, true)?;
        return Ok(Some(pi.materialize(u, &preds)?));
    }
    if let Some(path) = &src.dump {
        let u = opts.build(&opts.alphabet(p)?, true)?;
        let i = ExtensionalInterpretation::parse_dump(&read(path)?, u, &preds)
            .with_context(|| format!("parsing {}", path.display()))?;
        return Ok(Some(i));
    }
    Ok(None)
}

fn run(cli: &Cli) -> Result<u8> {
    let json = cli.format == Format::Json;
    match &cli.cmd {
        Cmd::Lfp { program, carrier, max_iters, atoms, save } => {
            let p = load_program(program, &cli.include)?;
            let u = carrier.build(&carrier.alphabet(&p)?, true)?;
            let cp = CompiledProgram::new(&p, u)?;
            let r = lfp(&cp, *max_iters)?;
            let shown: Vec<(String, TruthValue4)> = if atoms.is_empty() {
                let mut v: Vec<_> = r.result.entries().map(|(a, v)| (a.to_string(), v)).collect();
                v.sort();
                v
            } else {
                atoms
                    .iter()
                    .map(|s| {
                        let a = parse_atom(s)?;
                        let (pi, args) = r.result.locate(&a)?;
                        Ok((a.to_string(), r.result.get(pi, &args)))
                    })
                    .collect::<Result<_>>()?
            };
            if json {
                let table: serde_json::Map<String, serde_json::Value> =
                    shown.iter().map(|(a, v)| (a.clone(), json!(v))).collect();
                let out = json!({
                    "stable": r.stable,
                    "iterations": r.iterations,
                    "depth_bound": r.depth_bound,
                    "boundary_negation": r.boundary_negation,
                    "atoms": table,
                });
                println!("{}", out);
            } else {
                for (a, v) in &shown {
                    println!("{} {}", a, v);
                }
                println!(
                    "% {} after {} iterations at depth {}{}",
                    if r.stable { "stable" } else { "not stable" },
                    r.iterations,
                    r.depth_bound,
                    if r.boundary_negation { "; negation near the depth bound" } else { "" }
                );
            }
            if let Some(path) = save {
                std::fs::write(path, r.result.dump()).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if r.stable { PASS } else { RESOURCE })
        }
        Cmd::Check { program, source, relation, carrier } => {
            let p = load_program(program, &cli.include)?;
            let i = load_interp(source, &p, carrier)?.ok_or_else(|| anyhow!("give --interp or --dump"))?;
            let v = match check_model(&p, &i, *relation) {
                Err(e @ ModelError::OutsideDomain { .. }) => {
                    if json {
                        println!("{}", json!({ "relation": relation, "holds": false, "outside_domain": e.to_string() }));
                    } else {
                        println!("{}: not a model ({}, outside its values)", relation, e);
                    }
                    return Ok(FAIL);
                }
                r => r?,
            };
            if json {
                println!("{}", serde_json::to_string(&v)?);
            } else {
                println!("{}", v);
            }
            Ok(if v.holds { PASS } else { FAIL })
        }
        Cmd::Modes { program } => {
            let p = load_program(program, &cli.include)?;
            let r = check_well_moded(&p)?;
            if json {
                println!("{}", serde_json::to_string(&r)?);
            } else {
                for a in &r.assignments {
                    let choice: Vec<String> = a.choices.iter().map(|(k, c)| format!("{}: {}", k, c)).collect();
                    println!("{} {}", if a.passes() { "pass" } else { "fail" }, choice.join(", "));
                    for v in &a.violations {
                        println!("    {}", v);
                    }
                }
                for c in &r.coverage {
                    println!("{} {} {}", c.pred, c.group, if c.covered { "covered" } else { "not covered" });
                }
                println!("{}", if r.well_moded { "well-moded" } else { "not well-moded" });
            }
            Ok(if r.well_moded { PASS } else { FAIL })
        }
        Cmd::Analyze { program, k } => {
            let p = load_program(program, &cli.include)?;
            let a = analyze_depthk(&p, *k)?;
            if json {
                let show = |v: &[Atom]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>();
                let out = json!({
                    "k": a.k,
                    "iterations": a.iterations,
                    "true": show(&a.true_atoms),
                    "false": show(&a.false_atoms),
                });
                println!("{}", out);
            } else {
                print!("{}", a);
            }
            Ok(PASS)
        }
        Cmd::Spec { program, spec, carrier } => {
            let p = load_program(program, &cli.include)?;
            let s = Specification::parse(&read(spec)?).with_context(|| format!("parsing {}", spec.display()))?;
            let mut a = carrier.alphabet(&p)?;
            a.extend(s.delta.alphabet());
            let u = carrier.build(&a, false)?;
            let r = check_against_spec(&p, &s, u)?;
            if json {
                println!("{}", serde_json::to_string(&r)?);
            } else {
                println!("{}", r.model);
                println!("refines the least fixed point: {}", if r.refines_lfp { "yes" } else { "no" });
                for d in &r.disagreements {
                    println!("    {}: specified {} computed {}", d.atom, d.spec, d.lfp);
                }
                println!("% depth {}", r.depth_bound);
            }
            Ok(if r.passes() { PASS } else { FAIL })
        }
        Cmd::Debug { program, query, kind, intended, answers, serve, json: stdio, timeout, transcript, budget } => {
            let p = load_program(program, &cli.include)?;
            let q = parse_atom(query)?;
            let kind: Diagnosis = (*kind).into();
            let tree = build_tree(&p, &q, kind, *budget)?;
            let (outcome, dialogue) = if let Some(port) = serve {
                let timeout = timeout.map(Duration::from_secs);
                serve_tcp(("127.0.0.1", *port), &tree, kind, timeout, |addr| {
                    eprintln!("listening on {}", addr);
                })?
            } else if *stdio {
                let stdin = io::stdin();
                JsonOracle::new(stdin.lock(), io::stdout()).run(&tree, kind)?
            } else if let Some(path) = answers {
                let mut o = ReplayOracle::parse(&read(path)?)?;
                session(&tree, &mut o, kind)?
            } else if let Some(path) = intended {
                let pi = PatternInterpretation::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
                let mut o = StoredOracle { intended: &pi };
                session(&tree, &mut o, kind)?
            } else {
                let mut o = Terminal { input: BufReader::new(io::stdin()) };
                session(&tree, &mut o, kind)?
            };
            if let Some(path) = transcript {
                let text: String = dialogue.iter().map(|m| m.to_line() + "\n").collect();
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            if !*stdio && serve.is_none() {
                report(&outcome, json);
            }
            Ok(match outcome {
                DebugOutcome::Bug(_) => FAIL,
                DebugOutcome::NoBug { .. } => PASS,
            })
        }
        Cmd::Step { program, goal, selections, steps, source, lfp: use_lfp, carrier, simplify } => {
            let p = load_program(program, &cli.include)?;
            let m = if *use_lfp {
                let u = carrier.build(&carrier.alphabet(&p)?, true)?;
                Some(lfp(&CompiledProgram::new(&p, u)?, DEFAULT_MAX_ITERS)?.result)
            } else {
                load_interp(source, &p, carrier)?
            };
            let picks: Vec<Option<(usize, usize)>> = if selections.is_empty() {
                vec![None; *steps]
            } else {
                selections.iter().map(|s| parse_selection(s).map(Some)).collect::<Result<_>>()?
            };
            let mut s = parse_goal(goal).with_context(|| format!("parsing {}", goal))?;
            let mut trace = vec![json!({ "state": s.to_string() })];
            if !json {
                println!("0: {}", s);
            }
            let mut ok = true;
            for (n, pick) in picks.iter().enumerate() {
                let (i, j) = match pick {
                    Some(ij) => *ij,
                    None => match selectable(&s).first() {
                        Some(ij) => *ij,
                        None => break,
                    },
                };
                let mut next = successor(&s, i, j, &p)?;
                if *simplify {
                    next = next.simplify();
                }
                let verdict = m.as_ref().map(|m| check_step_monotonicity(m, &p, &s, &next)).transpose()?;
                if json {
                    let mut e = json!({ "select": [i, j], "state": next.to_string() });
                    if let Some(v) = &verdict {
                        e["monotone"] = json!(v.holds());
                        e["model"] = json!(v.is_model);
                        e["violations"] = json!(violations(v));
                    }
                    trace.push(e);
                } else {
                    println!("{}: {}", n + 1, next);
                    if let Some(v) = &verdict {
                        print_verdict(v);
                    }
                }
                ok &= verdict.is_none_or(|v| v.holds());
                s = next;
            }
            if json {
                println!("{}", serde_json::Value::Array(trace));
            }
            Ok(if ok { PASS } else { FAIL })
        }
    }
}

fn parse_selection(s: &str) -> Result<(usize, usize)> {
    let (i, j) = s.split_once('.').ok_or_else(|| anyhow!("expected I.J, got {}", s))?;
    Ok((i.parse().with_context(|| format!("bad selection {}", s))?, j.parse().with_context(|| format!("bad selection {}", s))?))
}

fn violations(v: &StepVerdict) -> Vec<serde_json::Value> {
    v.violations
        .iter()
        .map(|x| {
            let theta: serde_json::Map<String, serde_json::Value> =
                x.theta.iter().map(|(k, t)| (k.clone(), json!(t.to_string()))).collect();
            json!({ "theta": theta, "before": x.before, "after": x.after })
        })
        .collect()
}

fn print_verdict(v: &StepVerdict) {
    if !v.is_model {
        println!("   % the interpretation is not a ⊒4-model of the program");
    }
    if v.holds() {
        println!("   % no gain in information over {} groundings", v.groundings);
    }
    for x in &v.violations {
        let theta: Vec<String> = x.theta.iter().map(|(k, t)| format!("{}={}", k, t)).collect();
        println!("   % {}: {} before, {} after", theta.join(", "), x.before, x.after);
    }
}

fn session(tree: &DebugTree, oracle: &mut dyn Oracle, kind: Diagnosis) -> Result<(DebugOutcome, Vec<Message>)> {
    let mut s = belnap::debug::Session::new(oracle, kind);
    let outcome = s.find_bug(tree)?;
    Ok((outcome, std::mem::take(&mut s.transcript)))
}

fn report(outcome: &DebugOutcome, json: bool) {
    if json {
        println!("{}", Message::outcome(outcome).to_line());
        return;
    }
    match outcome {
        DebugOutcome::NoBug { inadmissible: true } => println!("no bug: the query is inadmissible"),
        DebugOutcome::NoBug { inadmissible: false } => println!("no bug: the query is correct"),
        DebugOutcome::Bug(r) => {
            match r.line {
                Some(l) => println!("{} at line {}: {}", r.kind, l, r.atom),
                None => println!("{}: {}", r.kind, r.atom),
            }
            println!("    {}", r.instance);
            for c in &r.children {
                println!("    {} {}", c.class, c.atom);
            }
            if let Some(pat) = belnap::debug::pattern(r) {
                println!("    {}", pat);
            }
        }
    }
}

/// Questions on stderr, answers from stdin.
struct Terminal<R> {
    input: R,
}

impl<R: BufRead> Oracle for Terminal<R> {
    fn ask(&mut self, node: &DebugTree, kind: Diagnosis) -> Result<Answer, DebugError> {
        let question = match kind {
            Diagnosis::WrongAnswer => "should this succeed",
            Diagnosis::MissingAnswer => "should this fail",
        };
        loop {
            eprint!("{} {}? [c]orrect [e]rroneous [x] inadmissible, or t/f/i/u: ", node.literal(), question);
            io::stderr().flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Err(DebugError::Disconnected);
            }
            let a = line.trim();
            let class = match a {
                "c" | "correct" => Some(NodeClass::Correct),
                "e" | "erroneous" => Some(NodeClass::Erroneous),
                "x" | "inadmissible" => Some(NodeClass::Inadmissible),
                _ => None,
            };
            if let Some(c) = class {
                return Ok(Answer::Class(c));
            }
            if let Ok(v) = a.parse::<TruthValue4>() {
                return Ok(Answer::Value(v));
            }
            eprintln!("unrecognised answer {:?}", a);
        }
    }
}
