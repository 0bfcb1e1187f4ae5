//! `deltaeq`: decisions and verifications for operator-system equivalence, emitted as JSON
//! certificates that the `verify` subcommands can re-consume.
//!
//! Exit codes: 0 computed (the verdict may be negative), 1 a verification failed,
//! 2 invalid input, 3 a size cap or search limit was hit.

mod input;

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use deltaeq_core::cstar::{
    block_decompose, center, generated_algebra, irreducibility_probe, multiplier_algebra, IrreducibilityVerdict,
    OperatorSystem,
};
use deltaeq_core::funcsys::{centre_system, toeplitz_system};
use deltaeq_core::matcore::Tolerance;
use deltaeq_core::morita::{induce_rep, roundtrip_unitary, Representation};
use deltaeq_core::ncgraph::{
    decide_delta_graphs, graph_env_embedding, graph_system, synthesize_graph_tro, twin_quotient, DeltaDecision,
    Graph,
};
use deltaeq_core::tro::{
    verify_bihom_context, verify_cohomomorphism, verify_delta_context, verify_tro_equivalence, ContextBundle,
    KrausFamily, Tro, VerificationReport,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use input::{check_ambient, space_at, system_of, Inputs};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Limit(String),
    Failed(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Limit(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Limit(m) | CliError::Failed(m) => m,
        }
    }
}

impl From<deltaeq_core::Error> for CliError {
    fn from(e: deltaeq_core::Error) -> Self {
        use deltaeq_core::Error as E;
        match e {
            E::LimitExceeded(_) => CliError::Limit(e.to_string()),
            E::Numerical(_) => CliError::Failed(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "deltaeq", version, about = "Morita/TRO equivalence of operator systems and graph systems")]
struct Cli {
    /// Numerical tolerance
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for randomized subroutines
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Highest matrix level for sampled complete positivity and the irreducibility probe
    #[arg(long, global = true, default_value_t = 3)]
    level_cap: usize,
    /// Write the certificate here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON list of argument lists, run independently; output is a JSON array in order
    #[arg(long)]
    batch: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Graph operator systems
    #[command(subcommand)]
    Graph(GraphOp),
    /// Structure of a single operator system
    #[command(subcommand)]
    Sys(SysOp),
    /// Check a claimed equivalence, cohomomorphism or context axiom by axiom
    #[command(subcommand)]
    Verify(VerifyOp),
    /// Induce a representation of T from one of S through the TRO
    Induce(InduceArgs),
    /// Induce through M and back through M*, and build the unitary onto the original space
    Roundtrip(InduceArgs),
    /// The Toeplitz operator system of size n
    Toeplitz {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
enum GraphOp {
    /// Twin quotient and class map
    Quotient { g: String },
    /// Decide Δ-equivalence of the graph systems
    DeltaEq { g: String, h: String },
    /// Decide and synthesize the pattern TRO with both systems
    TroWitness { g: String, h: String },
    /// Equivalent union of components of h for the whole of g
    EmbedEnv { g: String, h: String },
}

#[derive(Subcommand, Debug)]
enum SysOp {
    /// Generated C*-algebra and its block structure
    Algebra { s: String },
    /// Multiplier algebra
    Multiplier { s: String },
    /// Centre Z(C*(S)) ∩ S
    Center { s: String },
    /// Whether the multiplier algebra is the scalars
    Rigid { s: String },
    /// Irreducible-action probe up to the level cap
    Irreducible { s: String },
}

#[derive(Subcommand, Debug)]
enum VerifyOp {
    /// `s t m`, or one `graph tro-witness` certificate
    TroEq {
        #[arg(num_args = 1..=3, required = true)]
        files: Vec<String>,
    },
    /// Kraus family `k` from T to S
    Cohom { k: String, t: String, s: String },
    DeltaContext { bundle: String },
    BihomContext { bundle: String },
}

#[derive(clap::Args, Debug)]
struct InduceArgs {
    /// TRO inside M_{d_T, d_S}
    m: String,
    s: String,
    t: String,
    /// Representation of S; the inclusion of S when omitted
    #[arg(long)]
    rep: Option<String>,
}

/// Process result: exit code, stdout and stderr text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Serialize)]
struct Certificate {
    command: String,
    inputs_digest: String,
    verdict: String,
    witness: Value,
    residuals: Value,
    tol: f64,
    seed: u64,
    level_cap: usize,
    version: &'static str,
    assumptions: &'static [&'static str],
    timestamp: String,
}

/// Modelling choices every certificate is subject to.
const ASSUMPTIONS: &[&str] = &[
    "multiplier algebras are computed inside C*(S), exact for graph systems and for systems passing the irreducibility probe",
    "graph pullbacks are taken along surjective maps only",
];

struct Computed {
    verdict: String,
    witness: Value,
    residuals: Value,
    failed: bool,
}

impl Computed {
    fn ok(verdict: &str, witness: Value) -> Self {
        Computed { verdict: verdict.into(), witness, residuals: json!({}), failed: false }
    }

    fn report(report: &VerificationReport, extra: Value) -> Self {
        let residuals: serde_json::Map<String, Value> =
            report.entries.iter().map(|e| (e.axiom.clone(), json!(e.residual))).collect();
        let mut witness = json!({ "report": report });
        if let (Some(w), Value::Object(x)) = (witness.as_object_mut(), extra) {
            w.extend(x);
        }
        let failed = !report.passed();
        Computed { verdict: if failed { "fail" } else { "pass" }.into(), witness, residuals: Value::Object(residuals), failed }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run(argv: &[String], stdin: &mut dyn Read) -> Outcome {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    if let Some(manifest) = &cli.batch {
        return run_batch(manifest, &cli, stdin);
    }
    let Some(command) = &cli.command else {
        return Outcome { code: 2, stdout: String::new(), stderr: "no subcommand given (see --help)\n".into() };
    };
    let tol = match Tolerance::new(cli.tol, cli.seed) {
        Ok(t) => t,
        Err(e) => return Outcome { code: 2, stdout: String::new(), stderr: format!("{e}\n") },
    };
    if cli.level_cap == 0 {
        return Outcome { code: 2, stdout: String::new(), stderr: "level cap must be positive\n".into() };
    }
    let mut inputs = Inputs::new(stdin);
    let result = execute(command, &cli, tol, &mut inputs);
    let computed = match result {
        Ok(c) => c,
        Err(e) => return Outcome { code: e.code(), stdout: String::new(), stderr: format!("error: {}\n", e.message()) },
    };
    let cert = Certificate {
        command: command_name(command),
        inputs_digest: inputs.digest(),
        verdict: computed.verdict,
        witness: computed.witness,
        residuals: computed.residuals,
        tol: cli.tol,
        seed: cli.seed,
        level_cap: cli.level_cap,
        version: VERSION,
        assumptions: ASSUMPTIONS,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let text = serde_json::to_string_pretty(&cert).expect("serializable") + "\n";
    let code = i32::from(computed.failed);
    let stderr = if computed.failed { format!("verification failed: {}\n", cert.verdict) } else { String::new() };
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr },
            Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("{}: {e}\n", path.display()) },
        },
        None => Outcome { code, stdout: text, stderr },
    }
}

fn run_batch(manifest: &str, cli: &Cli, stdin: &mut dyn Read) -> Outcome {
    let mut inputs = Inputs::new(stdin);
    let jobs: Vec<Vec<String>> = match inputs.json(manifest).and_then(|v| {
        serde_json::from_value(v).map_err(|e| CliError::Input(format!("manifest must be a list of argument lists: {e}")))
    }) {
        Ok(j) => j,
        Err(e) => return Outcome { code: e.code(), stdout: String::new(), stderr: format!("error: {}\n", e.message()) },
    };
    let results: Vec<(Vec<String>, Outcome)> = jobs
        .into_par_iter()
        .map(|mut args| {
            args.insert(0, "deltaeq".into());
            for (flag, value) in [("--tol", cli.tol.to_string()), ("--seed", cli.seed.to_string()), ("--level-cap", cli.level_cap.to_string())] {
                if !args.iter().any(|a| a == flag) {
                    args.push(flag.into());
                    args.push(value);
                }
            }
            let out = run(&args, &mut std::io::empty());
            (args, out)
        })
        .collect();
    let code = results.iter().map(|(_, o)| o.code).max().unwrap_or(0);
    let items: Vec<Value> = results
        .iter()
        .map(|(args, o)| {
            let cert = serde_json::from_str::<Value>(&o.stdout).unwrap_or(Value::Null);
            json!({"args": args[1..], "exit": o.code, "certificate": cert, "stderr": o.stderr})
        })
        .collect();
    let text = serde_json::to_string_pretty(&items).expect("serializable") + "\n";
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("{}: {e}\n", path.display()) },
        },
        None => Outcome { code, stdout: text, stderr: String::new() },
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Graph(op) => format!(
            "graph {}",
            match op {
                GraphOp::Quotient { .. } => "quotient",
                GraphOp::DeltaEq { .. } => "delta-eq",
                GraphOp::TroWitness { .. } => "tro-witness",
                GraphOp::EmbedEnv { .. } => "embed-env",
            }
        ),
        Command::Sys(op) => format!(
            "sys {}",
            match op {
                SysOp::Algebra { .. } => "algebra",
                SysOp::Multiplier { .. } => "multiplier",
                SysOp::Center { .. } => "center",
                SysOp::Rigid { .. } => "rigid",
                SysOp::Irreducible { .. } => "irreducible",
            }
        ),
        Command::Verify(op) => format!(
            "verify {}",
            match op {
                VerifyOp::TroEq { .. } => "tro-eq",
                VerifyOp::Cohom { .. } => "cohom",
                VerifyOp::DeltaContext { .. } => "delta-context",
                VerifyOp::BihomContext { .. } => "bihom-context",
            }
        ),
        Command::Induce(_) => "induce".into(),
        Command::Roundtrip(_) => "roundtrip".into(),
        Command::Toeplitz { .. } => "toeplitz".into(),
    }
}

/// A system from JSON (subspace, graph, or certificate) or from edge-list text.
fn load_system(inputs: &mut Inputs, source: &str, tol: Tolerance) -> Result<OperatorSystem, CliError> {
    let (text, pointer) = inputs.text(source)?;
    if pointer.is_none() && !text.trim_start().starts_with('{') {
        let g: Graph = text.parse().map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        if g.n() > input::MAX_VERTICES {
            return Err(CliError::Limit(format!("graph on {} vertices exceeds the cap of {}", g.n(), input::MAX_VERTICES)));
        }
        return Ok(graph_system(&g, tol));
    }
    let mut v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
    if let Some(p) = pointer {
        v = v.pointer(&p).cloned().ok_or_else(|| CliError::Input(format!("{source}: no value at {p}")))?;
    }
    system_of(&v, tol)
}

fn load_tro(inputs: &mut Inputs, source: &str, tol: Tolerance) -> Result<Tro, CliError> {
    let v = inputs.json(source)?;
    Ok(Tro::new(space_at(&v, "m", tol)?)?)
}

fn execute(command: &Command, cli: &Cli, tol: Tolerance, inputs: &mut Inputs) -> Result<Computed, CliError> {
    match command {
        Command::Graph(op) => graph_command(op, tol, inputs),
        Command::Sys(op) => sys_command(op, cli, tol, inputs),
        Command::Verify(op) => verify_command(op, cli, tol, inputs),
        Command::Induce(args) => {
            let (m, s, t, rep) = induce_inputs(args, tol, inputs)?;
            let ind = induce_rep(&m, &t, &rep)?;
            let mut c = Computed::ok("computed", to_value(&ind));
            c.residuals = json!({"descent": ind.descent_residual});
            let _ = s;
            Ok(c)
        }
        Command::Roundtrip(args) => {
            let (m, _, t, rep) = induce_inputs(args, tol, inputs)?;
            let rt = roundtrip_unitary(&m, &t, &rep)?;
            let ok = rt.residual <= 10.0 * tol.eps;
            Ok(Computed {
                verdict: if ok { "pass" } else { "fail" }.into(),
                witness: to_value(&rt),
                residuals: json!({"unitarity": rt.unitarity_residual, "intertwining": rt.intertwining_residual}),
                failed: !ok,
            })
        }
        Command::Toeplitz { n } => {
            check_ambient(*n, "toeplitz")?;
            let s = toeplitz_system(*n, tol)?;
            let rigid = multiplier_algebra(&s).dim() == 1;
            Ok(Computed::ok("computed", json!({"n": n, "dim": s.dim(), "rigid": rigid, "system": s})))
        }
    }
}

fn induce_inputs(
    args: &InduceArgs,
    tol: Tolerance,
    inputs: &mut Inputs,
) -> Result<(Tro, OperatorSystem, OperatorSystem, Representation), CliError> {
    let m = load_tro(inputs, &args.m, tol)?;
    let s = load_system(inputs, &args.s, tol)?;
    let t = load_system(inputs, &args.t, tol)?;
    let rep = match &args.rep {
        None => Representation::identity(&s),
        Some(source) => {
            let v = inputs.json(source)?;
            let rep: Representation = serde_json::from_value(v).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
            check_ambient(rep.dim(), "representation")?;
            if !rep.system().space().equals(s.space())?.0 {
                return Err(CliError::Input("representation is not of the given system".into()));
            }
            rep
        }
    };
    Ok((m, s, t, rep))
}

fn graph_command(op: &GraphOp, tol: Tolerance, inputs: &mut Inputs) -> Result<Computed, CliError> {
    match op {
        GraphOp::Quotient { g } => {
            let g = inputs.graph(g)?;
            let (q, f) = twin_quotient(&g);
            Ok(Computed::ok("computed", json!({"quotient": q, "map": f, "classes": f.fibers()})))
        }
        GraphOp::DeltaEq { g, h } => {
            let (g, h) = (inputs.graph(g)?, inputs.graph(h)?);
            let d = decide_delta_graphs(&g, &h)?;
            let verdict = if d.is_equivalent() { "equivalent" } else { "not_equivalent" };
            Ok(Computed::ok(verdict, to_value(&d)))
        }
        GraphOp::TroWitness { g, h } => {
            let (g, h) = (inputs.graph(g)?, inputs.graph(h)?);
            match decide_delta_graphs(&g, &h)? {
                DeltaDecision::Equivalent { witness } => {
                    let m = synthesize_graph_tro(&witness, tol)?;
                    let (s, t) = (graph_system(&g, tol), graph_system(&h, tol));
                    let report = verify_tro_equivalence(&s, &t, m.space());
                    let mut c = Computed::report(&report, json!({"pullback": witness, "s": s, "t": t, "m": m.space()}));
                    if !c.failed {
                        c.verdict = "equivalent".into();
                    }
                    Ok(c)
                }
                d => Ok(Computed::ok("not_equivalent", to_value(&d))),
            }
        }
        GraphOp::EmbedEnv { g, h } => {
            let (g, h) = (inputs.graph(g)?, inputs.graph(h)?);
            Ok(match graph_env_embedding(&g, &h)? {
                Some(e) => Computed::ok("embeds", to_value(&e)),
                None => Computed::ok("no_embedding", Value::Null),
            })
        }
    }
}

fn sys_command(op: &SysOp, cli: &Cli, tol: Tolerance, inputs: &mut Inputs) -> Result<Computed, CliError> {
    let source = match op {
        SysOp::Algebra { s } | SysOp::Multiplier { s } | SysOp::Center { s } | SysOp::Rigid { s } | SysOp::Irreducible { s } => s,
    };
    let s = load_system(inputs, source, tol)?;
    match op {
        SysOp::Algebra { .. } => {
            let a = generated_algebra(&s);
            let dec = block_decompose(&a)?;
            let residual = dec.pattern_residual(a.space().basis());
            let mut c = Computed::ok(
                "computed",
                json!({"dim": a.dim(), "blocks": dec.blocks, "centre_dim": center(&a).dim(), "algebra": a.space(), "unitary": dec.unitary}),
            );
            c.residuals = json!({"block_pattern": residual});
            Ok(c)
        }
        SysOp::Multiplier { .. } => {
            let a = multiplier_algebra(&s);
            let dec = block_decompose(&a)?;
            let mut c = Computed::ok("computed", json!({"dim": a.dim(), "blocks": dec.blocks, "algebra": a.space()}));
            c.residuals = json!({"block_pattern": dec.pattern_residual(a.space().basis())});
            Ok(c)
        }
        SysOp::Center { .. } => {
            let z = centre_system(&s);
            let mut c = Computed::ok("computed", json!({"dim": z.centre.dim(), "certificate": z}));
            c.residuals = json!({"commutator": z.worst_commutator});
            Ok(c)
        }
        SysOp::Rigid { .. } => {
            let dim = multiplier_algebra(&s).dim();
            let rigid = dim == 1;
            Ok(Computed::ok(if rigid { "rigid" } else { "not_rigid" }, json!({"rigid": rigid, "multiplier_dim": dim})))
        }
        SysOp::Irreducible { .. } => {
            let v = irreducibility_probe(&s, cli.level_cap);
            let verdict = match &v {
                IrreducibilityVerdict::Irreducible { .. } => "irreducible",
                IrreducibilityVerdict::Reducible { .. } => "reducible",
                IrreducibilityVerdict::Unknown { .. } => "unknown",
            };
            Ok(Computed::ok(verdict, to_value(&v)))
        }
    }
}

fn verify_command(op: &VerifyOp, cli: &Cli, tol: Tolerance, inputs: &mut Inputs) -> Result<Computed, CliError> {
    match op {
        VerifyOp::TroEq { files } => {
            let (s, t, m) = match files.as_slice() {
                [one] => {
                    let v = inputs.json(one)?;
                    let w = v.get("witness").unwrap_or(&v);
                    let get = |k: &str| w.get(k).ok_or_else(|| CliError::Input(format!("{one}: no {k} field")));
                    (system_of(get("s")?, tol)?, system_of(get("t")?, tol)?, space_at(get("m")?, "m", tol)?)
                }
                [s, t, m] => {
                    let (s, t) = (load_system(inputs, s, tol)?, load_system(inputs, t, tol)?);
                    let v = inputs.json(m)?;
                    (s, t, space_at(&v, "m", tol)?)
                }
                _ => return Err(CliError::Usage("verify tro-eq takes one certificate or three files s t m".into())),
            };
            Ok(Computed::report(&verify_tro_equivalence(&s, &t, &m), Value::Null))
        }
        VerifyOp::Cohom { k, t, s } => {
            let v = inputs.json(k)?;
            // a bare list, a Kraus witness (its `a` family), or a certificate carrying either
            let inner = v.get("witness").and_then(|w| w.get("kraus")).or_else(|| v.get("a")).cloned();
            let v = inner.unwrap_or(v);
            let k: KrausFamily = serde_json::from_value(v).map_err(|e| CliError::Input(format!("kraus family: {e}")))?;
            let (t, s) = (load_system(inputs, t, tol)?, load_system(inputs, s, tol)?);
            Ok(Computed::report(&verify_cohomomorphism(&k, &t, &s), Value::Null))
        }
        VerifyOp::DeltaContext { bundle } | VerifyOp::BihomContext { bundle } => {
            let v = inputs.json(bundle)?;
            let mut ctx: ContextBundle =
                serde_json::from_value(v).map_err(|e| CliError::Input(format!("context bundle: {e}")))?;
            check_ambient(ctx.s.size().max(ctx.t.size()), "context")?;
            ctx.s = ctx.s.with_tol(tol);
            ctx.t = ctx.t.with_tol(tol);
            ctx.carrier = ctx.carrier.with_tol(tol);
            ctx.level_cap = ctx.level_cap.min(cli.level_cap);
            let report = if matches!(op, VerifyOp::DeltaContext { .. }) {
                verify_delta_context(&ctx)
            } else {
                verify_bihom_context(&ctx)
            };
            Ok(Computed::report(&report, Value::Null))
        }
    }
}
