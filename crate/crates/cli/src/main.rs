use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use ordsep::engine::{separate, EngineConfig, EngineError};
use ordsep::graphs::{component, verify_fpc_free_axioms, verify_hnn_free_axioms, ActionGraph, ComponentKind, FpcLabels, GraphJson, HnnLabels};
use ordsep::instance::{Instance, InstanceError, InstanceSpec, Presentation};
use ordsep::oracle::{oracle_separate, OracleConfig};
use ordsep::surgery::{delta_fpc, delta_hnn, Side};
use ordsep::witness::{verify_certificate, Certificate, TranscriptEntry};
use ordsep::words::hnn::{hnn_conjugate, hnn_cyclically_reduce, same_associated_coset};

const EXIT_REJECTED: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_EXCLUDED: u8 = 4;
const EXIT_BUDGET: u8 = 5;

#[derive(Parser)]
#[command(name = "ordsep", version, about = "Finite quotients that separate element orders")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Hnn,
    Fpc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    A,
    B,
    M,
    N,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate an instance and report conjugacy and case information.
    Check { input: PathBuf },
    /// Run the separation engine and write a certificate.
    Separate {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Largest permutation degree for the starting quotient.
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a certificate against an instance.
    Verify { cert: PathBuf, input: PathBuf },
    /// Brute-force quotient search.
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_degree: usize,
        #[arg(long, default_value_t = 20_000)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply one surgery to a graph and re-check the axioms.
    Surgery {
        graph: PathBuf,
        /// Instance file supplying the presentation.
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        component: Kind,
        /// Any vertex of the component.
        #[arg(long, default_value_t = 0)]
        vertex: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emit a graph as Graphviz DOT or normalized JSON.
    Export {
        graph: PathBuf,
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
    },
}

struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Fail { code, message: message.into() }
    }
}

type Res = Result<(), Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("{}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Res {
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Check { input } => cmd_check(&input),
        Cmd::Separate { input, mode, max_iter, max_degree, out } => {
            let mut cfg = EngineConfig { seed, ..EngineConfig::default() };
            if let Some(m) = max_iter {
                cfg.max_iterations = m;
            }
            if let Some(d) = max_degree {
                cfg.gamma0_max_degree = d;
            }
            cmd_separate(&input, mode, &cfg, out.as_deref())
        }
        Cmd::Verify { cert, input } => cmd_verify(&cert, &input),
        Cmd::Oracle { input, max_degree, budget, out } => {
            let cfg = OracleConfig { max_degree, budget, seed, ..OracleConfig::default() };
            cmd_oracle(&input, &cfg, out.as_deref())
        }
        Cmd::Surgery { graph, instance, component, vertex, n, out } => {
            cmd_surgery(&graph, &instance, component, vertex, n, out.as_deref())
        }
        Cmd::Export { graph, dot, .. } => cmd_export(&graph, dot),
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::new(EXIT_SCHEMA, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(InstanceSpec, Instance), Fail> {
    let spec = InstanceSpec::parse(&read(path)?).map_err(|e| instance_fail(path, e))?;
    let inst = spec.build().map_err(|e| instance_fail(path, e))?;
    Ok((spec, inst))
}

fn instance_fail(path: &Path, e: InstanceError) -> Fail {
    let code = match e {
        InstanceError::Schema(_) => EXIT_SCHEMA,
        InstanceError::Invariant(_) => EXIT_INVARIANT,
    };
    Fail::new(code, format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Res {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Fail::new(EXIT_SCHEMA, format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("serializable")
}

fn cmd_check(input: &Path) -> Res {
    let (spec, inst) = load(input)?;
    println!("instance: {}", spec.hash());
    match &inst {
        Instance::Hnn { p, u, v } => {
            let g = p.base();
            println!("type: hnn, base order {}, |A| = {}", g.order(), p.a_sub().len());
            let v_inv = v.inverse(g);
            println!("u ~ v: {}", hnn_conjugate(p, u, v));
            println!("u ~ v^-1: {}", hnn_conjugate(p, u, &v_inv));
            let (ru, _) = hnn_cyclically_reduce(p, u);
            let (rv, _) = hnn_cyclically_reduce(p, v);
            println!("cyclic t-length: u {}, v {}", ru.tail_len(), rv.tail_len());
            let excluded = same_associated_coset(p, u, v) || same_associated_coset(p, u, &v_inv);
            println!("associated coset shape: {excluded}");
        }
        Instance::Fpc { p, u, v } => {
            println!("type: fpc, |A| = {}, |B| = {}, |M| = {}, |N| = {}", p.a_grp().order(), p.b_grp().order(), p.m_sub().len(), p.n_sub().len());
            let v_inv = p.inverse(v);
            println!("u ~ v: {}", p.fpc_conjugate(u, v));
            println!("u ~ v^-1: {}", p.fpc_conjugate(u, &v_inv));
            match p.classify_case_fpc(u, v) {
                Ok(case) => println!("case: {case:?}"),
                Err(e) => println!("case: none ({e})"),
            }
        }
    }
    Ok(())
}

fn engine_fail(e: EngineError) -> Fail {
    let partial = |t: &[TranscriptEntry]| json!({"error": e.to_string(), "transcript": t}).to_string();
    match &e {
        EngineError::Conjugate | EngineError::ExcludedShape | EngineError::CaseMismatch { .. } => {
            Fail::new(EXIT_EXCLUDED, e.to_string())
        }
        EngineError::IterationBudgetExceeded { transcript }
        | EngineError::VertexBudgetExceeded { transcript, .. }
        | EngineError::PropertyViolation { transcript, .. } => Fail::new(EXIT_BUDGET, partial(transcript)),
        EngineError::Gamma0NotFound { .. } | EngineError::NotSeparableAtScale(_) | EngineError::WitnessNotFound { .. } => {
            Fail::new(EXIT_BUDGET, partial(&[]))
        }
        EngineError::Precondition(_) | EngineError::OrdersEqual(_) | EngineError::Surgery(_) | EngineError::WitnessRejected(_) => {
            Fail::new(EXIT_INVARIANT, e.to_string())
        }
    }
}

fn cmd_separate(input: &Path, mode: Option<Mode>, cfg: &EngineConfig, out: Option<&Path>) -> Res {
    let (_, inst) = load(input)?;
    match (mode, &inst) {
        (Some(Mode::Hnn), Instance::Fpc { .. }) | (Some(Mode::Fpc), Instance::Hnn { .. }) => {
            return Err(Fail::new(EXIT_SCHEMA, "--mode does not match the presentation type"));
        }
        _ => {}
    }
    let w = separate(&inst, cfg).map_err(engine_fail)?;
    println!("order_u: {}", w.order_u);
    println!("order_v: {}", w.order_v);
    let engine = json!({"engine": "surgery", "config": cfg});
    let cert = Certificate::new(&inst, w, engine);
    emit(out, &to_json(&cert))
}

fn cmd_verify(cert: &Path, input: &Path) -> Res {
    let cert: Certificate = serde_json::from_str(&read(cert)?)
        .map_err(|e| Fail::new(EXIT_SCHEMA, format!("{}: {e}", cert.display())))?;
    let (_, inst) = load(input)?;
    match verify_certificate(&cert, &inst) {
        Ok(()) => {
            println!("valid: order_u {}, order_v {}", cert.order_u, cert.order_v);
            Ok(())
        }
        Err(v) => Err(Fail::new(EXIT_REJECTED, format!("invalid: {v}"))),
    }
}

fn cmd_oracle(input: &Path, cfg: &OracleConfig, out: Option<&Path>) -> Res {
    let (_, inst) = load(input)?;
    match oracle_separate(&inst, cfg) {
        Ok(w) => {
            println!("order_u: {}", w.order_u);
            println!("order_v: {}", w.order_v);
            let cert = Certificate::new(&inst, w, json!({"engine": "oracle", "config": cfg}));
            emit(out, &to_json(&cert))
        }
        Err(nf) => Err(Fail::new(
            EXIT_BUDGET,
            json!({"error": "no witness found", "candidates": nf.candidates, "max_degree": cfg.max_degree}).to_string(),
        )),
    }
}

fn load_graph(path: &Path) -> Result<ActionGraph, Fail> {
    let j: GraphJson = serde_json::from_str(&read(path)?)
        .map_err(|e| Fail::new(EXIT_SCHEMA, format!("{}: {e}", path.display())))?;
    ActionGraph::from_json(&j).map_err(|e| Fail::new(EXIT_INVARIANT, format!("{}: {e}", path.display())))
}

fn cmd_surgery(graph: &Path, instance: &Path, kind: Kind, vertex: usize, n: usize, out: Option<&Path>) -> Res {
    let g = load_graph(graph)?;
    let (spec, _) = load(instance)?;
    let pres = spec.presentation.build().map_err(|e| instance_fail(instance, e))?;
    if vertex >= g.vertex_count() {
        return Err(Fail::new(EXIT_INVARIANT, format!("vertex {vertex} out of range")));
    }
    let invariant = |e: String| Fail::new(EXIT_INVARIANT, e);
    let result = match (&pres, kind) {
        (Presentation::Hnn(p), Kind::A | Kind::B) => {
            verify_hnn_free_axioms(&g, p).map_err(|v| invariant(v.to_string()))?;
            let labels = HnnLabels::new(&g, p);
            let (k, side) = match kind {
                Kind::A => (component(&g, vertex, &labels.a, ComponentKind::A), Side::From),
                _ => (component(&g, vertex, &labels.b, ComponentKind::B), Side::Into),
            };
            delta_hnn(&g, p, &k, side, n)
        }
        (Presentation::Fpc(p), Kind::M | Kind::N) => {
            verify_fpc_free_axioms(&g, p).map_err(|v| invariant(v.to_string()))?;
            let labels = FpcLabels::new(&g, p);
            let r = match kind {
                Kind::M => component(&g, vertex, &labels.m, ComponentKind::M),
                _ => component(&g, vertex, &labels.n, ComponentKind::N),
            };
            delta_fpc(&g, p, &r, n)
        }
        _ => return Err(Fail::new(EXIT_SCHEMA, "component kind does not match the presentation type")),
    };
    let s = result.map_err(|e| invariant(e.to_string()))?;
    eprintln!("vertices: {}, rewired edges: {}", s.graph.vertex_count(), s.cut.len());
    emit(out, &to_json(&s.graph.to_json()))
}

fn cmd_export(graph: &Path, dot: bool) -> Res {
    let g = load_graph(graph)?;
    if dot {
        print!("{}", g.to_dot());
    } else {
        println!("{}", to_json(&g.to_json()));
    }
    Ok(())
}
