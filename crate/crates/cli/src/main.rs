//! Command-line front end: closure verification, objective classification
//! and compilation, model evaluation, dual optimization runs, sweeps and
//! the primal oracle.
//!
//! Exit codes: 0 success, 1 verification/compilation failure, 2 input
//! error, 3 runtime divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use lagvae_core::dual_optimizer::{
    primal_oracle, run_infovae_baseline, run_lagvae, run_sweep, select_epsilon, DualConfig,
    OptimError, SweepConfig,
};
use lagvae_core::objective_language::{
    builtin_matrix, parse_objective, parse_objective_json, BuiltinMatrix, LagrangianObjective,
};
use lagvae_core::tabular_engine::{
    elbo, eval_objective, mi_bounds, mutual_information, EvalOptions, KernelSpec, TabularModel,
};
use lagvae_core::term_algebra::format_rational;
use lagvae_core::tractability_compiler::{
    classify, compile, verify_closure, verify_closure_with, ClosureMatrices, CompileError,
    TractabilityClass,
};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lagvae",
    version,
    about = "Exact objective algebra and dual optimization for latent-variable generative models",
    after_help = "Environment: LAGVAE_WORKERS caps sweep parallelism (default 4)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the closure-theorem dimension table (expects 13, 13, 17, 17, 18, 18)
    VerifyClosure(VerifyArgs),
    /// Classify an objective into its computability class
    Classify(ObjectiveArgs),
    /// Rewrite an objective as tractable terms plus a null witness
    Compile(CompileArgs),
    /// Evaluate an objective on a tabular model
    Eval(EvalArgs),
    /// Run dual optimization (or the fixed-multiplier baseline) from a config
    Optimize(RunArgs),
    /// Run a sweep of dual/baseline points and report Pareto dominance
    Sweep(SweepArgs),
    /// Solve the constrained primal by brute force
    Oracle(RunArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Write the report as JSON here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dump all frozen matrices into this directory for external audit
    #[arg(long)]
    emit_bases: Option<PathBuf>,
    /// Corrupt one matrix entry first (negative self-test of the check)
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct ObjectiveArgs {
    /// Objective in the text grammar
    #[arg(long, conflicts_with = "file", allow_hyphen_values = true)]
    text: Option<String>,
    /// Objective file (.json maps atom names to coefficients; anything
    /// else is read as the text grammar)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Write a JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Target class (defaults to the objective's own class)
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Model file (JSON with q_x, p_z, theta_q, theta_p)
    #[arg(long)]
    model: PathBuf,
    /// Gaussian kernel bandwidth for MMD atoms
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for trace, artifacts and manifest
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Parallel workers (overrides LAGVAE_WORKERS)
    #[arg(long)]
    workers: Option<usize>,
}

/// A fatal error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

fn optim_failure(e: OptimError) -> Failure {
    let code = match &e {
        OptimError::Diverged { .. } | OptimError::Infeasible { .. } => EXIT_DIVERGED,
        _ => EXIT_INPUT,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::VerifyClosure(args) => cmd_verify_closure(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Compile(args) => cmd_compile(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load_objective(args: &ObjectiveArgs) -> Result<(LagrangianObjective, String), Failure> {
    let (source, is_json) = match (&args.text, &args.file) {
        (Some(t), None) => (t.clone(), false),
        (None, Some(p)) => {
            let json = p.extension().is_some_and(|e| e == "json");
            (read_to_string(p)?, json)
        }
        _ => {
            return Err(Failure::input(
                "provide exactly one of --text or --file",
            ))
        }
    };
    let parsed = if is_json {
        parse_objective_json(&source)
    } else {
        parse_objective(&source)
    };
    parsed
        .map(|obj| (obj, source.clone()))
        .map_err(|e| Failure::input(e.to_string()))
}

fn digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("sha256:{}", hex_string(&hasher.finalize()))
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn manifest_json(command: &str, config_digest: &str, seed: u64, outputs: &[&Path]) -> String {
    let v = serde_json::json!({
        "command": command,
        "config_digest": config_digest,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&v).expect("manifest serializes")
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Failure::input(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_verify_closure(args: VerifyArgs) -> CmdResult {
    let report = if args.inject_fault {
        let mut m = ClosureMatrices::standard();
        let two = lagvae_core::term_algebra::rat_int(2);
        m.p.set(0, 0, two);
        verify_closure_with(&m)
    } else {
        verify_closure()
    };
    println!("closure dimension table (expected 13 13 17 17 18 18):");
    println!("  dim(S_betaVAE + S_VMI + P)      = {}", report.family_lb);
    println!("  dim((T_lb  + P) ∩ (R + P))      = {}", report.intersect_lb);
    println!("  dim(S_InfoGAN + S_InfoVAE + P)  = {}", report.family_ulf);
    println!("  dim((T_ulf + P) ∩ (R + P))      = {}", report.intersect_ulf);
    println!("  dim(S_InfoBiGAN + S_InfoVAE + P) = {}", report.family_blf);
    println!("  dim((T_blf + P) ∩ (R + P))      = {}", report.intersect_blf);
    println!("verdict: {}", if report.pass { "PASS" } else { "FAIL" });

    if let Some(dir) = &args.emit_bases {
        for kind in BuiltinMatrix::ALL {
            let m = builtin_matrix(kind);
            let rows: Vec<Vec<String>> = (0..m.rows())
                .map(|r| (0..m.cols()).map(|c| format_rational(m.get(r, c))).collect())
                .collect();
            let body = serde_json::to_string_pretty(&rows).expect("matrix serializes");
            write_file(&dir.join(format!("{}.json", kind.name())), &body)?;
        }
        println!("frozen matrices written to {}", dir.display());
    }
    if let Some(out) = &args.out {
        let body = serde_json::to_string_pretty(&report).expect("report serializes");
        write_file(out, &body)?;
        let manifest = manifest_json("verify-closure", &digest(&body), 0, &[out]);
        write_file(&out.with_extension("manifest.json"), &manifest)?;
    }
    Ok(if report.pass { 0 } else { EXIT_CHECK_FAILED })
}

fn class_from_flag(flag: &Option<String>) -> Result<Option<TractabilityClass>, Failure> {
    match flag {
        None => Ok(None),
        Some(name) => TractabilityClass::from_name(name)
            .map(Some)
            .ok_or_else(|| {
                Failure::input(format!(
                    "unknown class {name:?}; expected likelihood_based, \
                     unary_likelihood_free or binary_likelihood_free"
                ))
            }),
    }
}

fn cmd_classify(args: ObjectiveArgs) -> CmdResult {
    let (obj, source) = load_objective(&args)?;
    let class = classify(&obj);
    println!("objective: {obj}");
    println!("class: {class}");
    if let Some(out) = &args.out {
        let body = serde_json::to_string_pretty(&serde_json::json!({
            "objective": obj.to_string(),
            "class": class.name(),
        }))
        .expect("report serializes");
        write_file(out, &body)?;
        let manifest = manifest_json("classify", &digest(&source), 0, &[out]);
        write_file(&out.with_extension("manifest.json"), &manifest)?;
    }
    Ok(0)
}

fn cmd_compile(args: CompileArgs) -> CmdResult {
    let (obj, source) = load_objective(&args.objective)?;
    let class = classify(&obj);
    let target = class_from_flag(&args.target)?.unwrap_or(class);
    match compile(&obj, target) {
        Ok(d) => {
            println!("objective: {obj}");
            println!("class: {}", d.class);
            println!("tractable form ({target}):");
            for (term, coeff) in &d.tractable_coeffs {
                println!("  {:>10} * {term}", format_rational(coeff));
            }
            if d.tractable_coeffs.is_empty() {
                println!("  (zero)");
            }
            println!(
                "null witness: [{}]",
                d.null_witness
                    .iter()
                    .map(format_rational)
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            for atom in &d.atom_passthrough {
                println!("atom passthrough: {} * {atom}", format_rational(&atom.weight));
            }
            if let Some(out) = &args.objective.out {
                let body = serde_json::to_string_pretty(&serde_json::json!({
                    "objective": obj.to_string(),
                    "class": d.class.name(),
                    "target": target.name(),
                    "tractable_coeffs": d.tractable_coeffs.iter()
                        .map(|(t, c)| (t.to_string(), format_rational(c)))
                        .collect::<Vec<_>>(),
                    "null_witness": d.null_witness.iter()
                        .map(format_rational).collect::<Vec<_>>(),
                    "atoms": d.atom_passthrough.iter()
                        .map(|a| format!("{} * {a}", format_rational(&a.weight)))
                        .collect::<Vec<_>>(),
                }))
                .expect("report serializes");
                write_file(out, &body)?;
                let manifest = manifest_json("compile", &digest(&source), 0, &[out]);
                write_file(&out.with_extension("manifest.json"), &manifest)?;
            }
            Ok(0)
        }
        Err(CompileError::NotRepresentable { target, residual }) => {
            println!("objective: {obj}");
            println!("not compilable to {target}");
            let coords: Vec<String> = residual.coords().iter().map(format_rational).collect();
            println!("residual off col([T P]): [{}]", coords.join(", "));
            Ok(EXIT_CHECK_FAILED)
        }
        Err(CompileError::AtomOutsideClass { atom, target }) => {
            println!("objective: {obj}");
            println!("not compilable to {target}: atom {atom} has no tractable pattern there");
            Ok(EXIT_CHECK_FAILED)
        }
    }
}

fn cmd_eval(args: EvalArgs) -> CmdResult {
    let (obj, source) = load_objective(&args.objective)?;
    let model_text = read_to_string(&args.model)?;
    let model = TabularModel::from_json(&model_text)
        .map_err(|e| Failure::input(format!("invalid model: {e}")))?;
    let opts = EvalOptions {
        kernel: KernelSpec::Gaussian { sigma: args.sigma },
        ..Default::default()
    };
    let value = eval_objective(&model, &obj, &opts)
        .map_err(|e| Failure::input(format!("cannot evaluate: {e}")))?;
    let b = mi_bounds(&model);
    println!("objective: {obj}");
    println!("value: {value}");
    println!(
        "i_q: {}  i_q_upper: {}  i_q_lower: {}  i_p: {}",
        b.i_q,
        b.i_q_upper,
        b.i_q_lower,
        mutual_information(&model, lagvae_core::objective_language::Family::P)
    );
    println!("elbo: {}", elbo(&model));
    if let Some(out) = &args.objective.out {
        let body = serde_json::to_string_pretty(&serde_json::json!({
            "objective": obj.to_string(),
            "value": value,
            "i_q": b.i_q,
            "i_q_upper": b.i_q_upper,
            "i_q_lower": b.i_q_lower,
            "elbo": elbo(&model),
        }))
        .expect("report serializes");
        write_file(out, &body)?;
        let manifest = manifest_json("eval", &digest(&(source + &model_text)), 0, &[out]);
        write_file(&out.with_extension("manifest.json"), &manifest)?;
    }
    Ok(0)
}

fn cmd_optimize(args: RunArgs) -> CmdResult {
    let config_text = read_to_string(&args.config)?;
    let mut cfg = DualConfig::from_json(&config_text).map_err(optim_failure)?;
    if cfg.wants_selection() {
        let sel = select_epsilon(&cfg).map_err(optim_failure)?;
        println!(
            "selected budgets: hat = {:?}, eps = {:?}",
            sel.hat, sel.epsilons
        );
        for (c, e) in cfg.constraints.iter_mut().zip(&sel.epsilons) {
            c.epsilon = Some(*e);
        }
    }
    let baseline = cfg.baseline_lambdas.is_some();
    let trace = if baseline {
        run_infovae_baseline(&cfg)
    } else {
        run_lagvae(&cfg)
    }
    .map_err(optim_failure)?;
    let last = trace.final_row();
    println!(
        "{} finished: f = {}, i_q = {}, elbo = {}, D = {:?}, lambda = {:?}",
        if baseline { "baseline" } else { "dual ascent" },
        last.f,
        last.i_q,
        last.elbo,
        last.constraints,
        last.lambdas
    );
    let trace_path = args.out_dir.join("trace.csv");
    let model_path = args.out_dir.join("final_model.json");
    let manifest_path = args.out_dir.join("manifest.json");
    write_file(&trace_path, &trace.to_csv())?;
    write_file(&model_path, &trace.final_model.to_json())?;
    let manifest = manifest_json(
        "optimize",
        &digest(&config_text),
        cfg.seed,
        &[&trace_path, &model_path],
    );
    write_file(&manifest_path, &manifest)?;
    println!("trace written to {}", trace_path.display());
    Ok(0)
}

fn worker_count(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("LAGVAE_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(4)
    .max(1)
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let config_text = read_to_string(&args.run.config)?;
    let cfg = SweepConfig::from_json(&config_text).map_err(optim_failure)?;
    let workers = worker_count(args.workers);
    let outcome = run_sweep(&cfg, workers).map_err(optim_failure)?;
    println!(
        "{} runs complete ({} dual-ascent, {} baseline), workers = {workers}",
        outcome.rows.len(),
        cfg.lagvae_points.len(),
        cfg.infovae_points.len()
    );
    for d in &outcome.dominations {
        println!(
            "dominated: {} beats {} by {:.4} nats info, {:.4} nats elbo",
            d.infovae_id, d.lagvae_id, d.info_margin, d.elbo_margin
        );
    }
    println!("pareto verdict: {}", if outcome.pass { "PASS" } else { "FAIL" });
    let csv_path = args.run.out_dir.join("sweep.csv");
    let verdict_path = args.run.out_dir.join("verdict.json");
    let manifest_path = args.run.out_dir.join("manifest.json");
    write_file(&csv_path, &outcome.to_csv())?;
    let verdict_body = serde_json::to_string_pretty(&serde_json::json!({
        "pass": outcome.pass,
        "dominations": outcome.dominations,
    }))
    .expect("verdict serializes");
    write_file(&verdict_path, &verdict_body)?;
    let manifest = manifest_json(
        "sweep",
        &digest(&config_text),
        cfg.base.seed,
        &[&csv_path, &verdict_path],
    );
    write_file(&manifest_path, &manifest)?;
    println!("results written to {}", args.run.out_dir.display());
    Ok(if outcome.pass { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_oracle(args: RunArgs) -> CmdResult {
    let config_text = read_to_string(&args.config)?;
    let cfg = DualConfig::from_json(&config_text).map_err(optim_failure)?;
    let result = primal_oracle(&cfg).map_err(optim_failure)?;
    println!(
        "oracle optimum: f = {}, restart spread = {:.3e} over {} feasible restarts",
        result.f,
        result.spread,
        result.restart_values.len()
    );
    let result_path = args.out_dir.join("oracle.json");
    let model_path = args.out_dir.join("oracle_model.json");
    let manifest_path = args.out_dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&serde_json::json!({
        "f": result.f,
        "spread": result.spread,
        "restart_values": result.restart_values,
    }))
    .expect("result serializes");
    write_file(&result_path, &body)?;
    write_file(&model_path, &result.model.to_json())?;
    let manifest = manifest_json(
        "oracle",
        &digest(&config_text),
        cfg.seed,
        &[&result_path, &model_path],
    );
    write_file(&manifest_path, &manifest)?;
    Ok(0)
}
