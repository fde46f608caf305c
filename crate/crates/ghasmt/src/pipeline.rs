//! The commands behind each subcommand, returning text and exit codes so
//! they can be tested without spawning the binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ghasmt_core::flatten::flatten_gha;
use ghasmt_core::fr::derive_fr;
use ghasmt_core::oracle::{validate_witness, WitnessCheck};
use ghasmt_core::parse::parse_model;
use ghasmt_core::print::print_model;
use ghasmt_core::props::{compile_property, negate_for_bmc, parse_properties, PropertyFile, Requirement};
use ghasmt_core::sim::{simulate, Input, SimConfig, Trace};
use ghasmt_core::smt::{check_document, emit_smt};
use ghasmt_core::unroll::{unroll, ConstraintSystem};
use ghasmt_core::validate::{has_errors, validate_model};
use ghasmt_core::verdict::{interpret, BmcAnswer};
use ghasmt_core::Gha;

use crate::error::{CliError, Result, Stage};
use crate::inputs::parse_inputs;
use crate::report::{render_report, write_trace_csv, Answer, PropertyReport};
use crate::search::{falsify, SearchConfig, SearchOutcome};
use crate::solver::{run_solver, SolverCommand};

fn read(path: &Path, stage: Stage) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::new(stage, format!("{}: {e}", path.display())))
}

/// Parses and validates a model file. Warnings are returned alongside.
pub fn load_model(path: &Path) -> Result<(Gha, Vec<String>)> {
    let text = read(path, Stage::Parse)?;
    let m = parse_model(&text).map_err(|e| CliError::new(Stage::Parse, format!("{}: {e}", path.display())))?;
    let diags = validate_model(&m);
    if has_errors(&diags) {
        let lines: Vec<String> = diags.iter().map(ToString::to_string).collect();
        return Err(CliError::new(Stage::Validate, lines.join("\n")));
    }
    Ok((m, diags.iter().map(ToString::to_string).collect()))
}

pub fn load_properties(path: &Path) -> Result<PropertyFile> {
    let text = read(path, Stage::Props)?;
    parse_properties(&text).map_err(|e| CliError::new(Stage::Props, format!("{}: {e}", path.display())))
}

pub fn load_inputs(path: Option<&Path>) -> Result<BTreeMap<String, Input>> {
    match path {
        Some(p) => parse_inputs(&read(p, Stage::Parse)?)
            .map_err(|e| CliError::new(Stage::Parse, format!("{}: {e}", p.display()))),
        None => Ok(BTreeMap::new()),
    }
}

/// Diagnostics of `validate`; errors make the command fail.
pub fn cmd_validate(path: &Path) -> Result<String> {
    let text = read(path, Stage::Parse)?;
    let m = parse_model(&text).map_err(|e| CliError::new(Stage::Parse, format!("{}: {e}", path.display())))?;
    let diags = validate_model(&m);
    let lines: String = diags.iter().map(|d| format!("{d}\n")).collect();
    if has_errors(&diags) {
        return Err(CliError::new(Stage::Validate, lines.trim_end()));
    }
    Ok(lines)
}

pub fn cmd_flatten(path: &Path) -> Result<String> {
    let (m, _) = load_model(path)?;
    let flat = flatten_gha(&m).map_err(CliError::at(Stage::Flatten))?;
    Ok(print_model(&flat))
}

/// Flow relations of every state, then the updates of every transition.
pub fn cmd_frs(path: &Path) -> Result<String> {
    let (m, _) = load_model(path)?;
    let flat = flatten_gha(&m).map_err(CliError::at(Stage::Flatten))?;
    let mut out = String::new();
    for fs in derive_fr(&flat).map_err(CliError::at(Stage::Fr))? {
        out.push_str(&fs.to_string());
    }
    for t in &flat.transitions {
        let _ = writeln!(out, "transition {} -> {} when {}", t.src, t.dst, t.cond.to_prefix());
        for (v, e) in &t.actions {
            let _ = writeln!(out, "  {v} := {}", e.to_prefix());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Encoding {
    pub cs: ConstraintSystem,
    pub smt: String,
}

/// Unrolls `m` for `k` steps and emits the solver document. With a
/// requirement, the document asserts its negation.
pub fn encode(
    m: &Gha,
    req: Option<(&PropertyFile, &Requirement)>,
    k: usize,
    delta: f64,
    dwell_max: f64,
) -> Result<Encoding> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(CliError::new(Stage::Emit, "precision must be positive"));
    }
    if dwell_max.is_nan() || dwell_max <= 0.0 {
        return Err(CliError::new(Stage::Unroll, "dwell-max must be positive"));
    }
    let flat = flatten_gha(m).map_err(CliError::at(Stage::Flatten))?;
    let flows = derive_fr(&flat).map_err(CliError::at(Stage::Fr))?;
    let mut cs = unroll(&flat, &flows, k, dwell_max).map_err(CliError::at(Stage::Unroll))?;
    let query = match req {
        Some((file, r)) => {
            let c = compile_property(&mut cs, file, r).map_err(CliError::at(Stage::Props))?;
            Some(negate_for_bmc(&c.formula))
        }
        None => None,
    };
    let smt = emit_smt(&cs, query.as_ref(), delta);
    check_document(&smt).map_err(CliError::at(Stage::Emit))?;
    Ok(Encoding { cs, smt })
}

fn pick<'a>(file: &'a PropertyFile, name: Option<&str>) -> Result<Vec<&'a Requirement>> {
    match name {
        Some(n) => file
            .requirement(n)
            .map(|r| vec![r])
            .ok_or_else(|| CliError::new(Stage::Props, format!("no requirement named {n}"))),
        None if file.requirements.is_empty() => Err(CliError::new(Stage::Props, "property file has no requirements")),
        None => Ok(file.requirements.iter().collect()),
    }
}

/// The document for `model`, or for one requirement of `props`.
pub fn cmd_translate(
    model: &Path,
    props: Option<&Path>,
    property: Option<&str>,
    k: usize,
    delta: f64,
    dwell_max: f64,
) -> Result<String> {
    let (m, _) = load_model(model)?;
    match props {
        None => Ok(encode(&m, None, k, delta, dwell_max)?.smt),
        Some(p) => {
            let file = load_properties(p)?;
            let reqs = pick(&file, property)?;
            if reqs.len() > 1 {
                return Err(CliError::new(Stage::Props, "several requirements; choose one with --property"));
            }
            Ok(encode(&m, Some((&file, reqs[0])), k, delta, dwell_max)?.smt)
        }
    }
}

pub fn cmd_simulate(model: &Path, inputs: Option<&Path>, cfg: &SimConfig) -> Result<Trace> {
    let (m, _) = load_model(model)?;
    let inputs = load_inputs(inputs)?;
    simulate(&m, &inputs, cfg).map_err(CliError::at(Stage::Solve))
}

pub fn trace_csv(tr: &Trace) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_trace_csv(tr, &mut buf).map_err(CliError::at(Stage::Solve))?;
    Ok(buf)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: PathBuf,
    pub props: PathBuf,
    pub property: Option<String>,
    pub k: usize,
    pub delta: f64,
    pub dwell_max: f64,
    pub solver: Option<SolverCommand>,
    pub out: PathBuf,
    pub seed: u64,
    pub choose_first: bool,
    pub inputs: Option<PathBuf>,
    /// Step size of the falsification search.
    pub dt: f64,
    /// Simulated time per search run; `k * dwell_max` when absent.
    pub horizon: Option<f64>,
    pub trials: usize,
}

impl RunConfig {
    pub fn new(model: impl Into<PathBuf>, props: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            model: model.into(),
            props: props.into(),
            property: None,
            k: 20,
            delta: 0.001,
            dwell_max: 10.0,
            solver: None,
            out: out.into(),
            seed: 0,
            choose_first: false,
            inputs: None,
            dt: 1e-3,
            horizon: None,
            trials: 32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub reports: Vec<PropertyReport>,
    pub report_text: String,
    pub exit_code: i32,
}

fn write(path: &Path, bytes: &[u8], stage: Stage) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::new(stage, format!("{}: {e}", path.display())))
}

/// Runs the whole pipeline for each selected requirement, writing
/// `<name>.smt2`, `<name>.csv` for counterexamples, and `report.txt`.
pub fn cmd_check(cfg: &RunConfig) -> Result<CheckOutcome> {
    let (m, _) = load_model(&cfg.model)?;
    let file = load_properties(&cfg.props)?;
    let given = load_inputs(cfg.inputs.as_deref())?;
    let reqs = pick(&file, cfg.property.as_deref())?;
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::new(Stage::Emit, format!("{}: {e}", cfg.out.display())))?;
    let mut reports = Vec::new();
    for req in reqs {
        let start = Instant::now();
        let enc = encode(&m, Some((&file, req)), cfg.k, cfg.delta, cfg.dwell_max)?;
        let smt_path = cfg.out.join(format!("{}.smt2", req.name));
        write(&smt_path, enc.smt.as_bytes(), Stage::Emit)?;
        let mut notes = Vec::new();
        let mut trace = None;
        let (engine, verdict, answer) = match &cfg.solver {
            Some(cmd) => {
                let v = run_solver(&smt_path, cmd);
                let answer = match interpret(&v, cfg.k) {
                    BmcAnswer::HoldsUpTo(k) => Answer::HoldsUpTo(k),
                    BmcAnswer::Inconclusive => Answer::Inconclusive,
                    BmcAnswer::CandidateCounterexample(None) => {
                        notes.push("solver gave no witness".into());
                        Answer::Candidate
                    }
                    BmcAnswer::CandidateCounterexample(Some(w)) => {
                        match validate_witness(&w, &m, &enc.cs, &file, req, cfg.delta) {
                            Ok(WitnessCheck::Confirmed(tr)) => {
                                trace = Some(tr);
                                Answer::Confirmed
                            }
                            Ok(WitnessCheck::Spurious { residual, reason }) => {
                                notes.push(format!("witness not confirmed by simulation: {reason} (residual {residual})"));
                                Answer::Candidate
                            }
                            Err(e) => {
                                notes.push(CliError::new(Stage::Witness, e).to_string());
                                Answer::Candidate
                            }
                        }
                    }
                };
                (cmd.program.display().to_string(), v.to_string(), answer)
            }
            None => {
                let search = SearchConfig {
                    trials: cfg.trials,
                    seed: cfg.seed,
                    horizon: cfg.horizon.unwrap_or(cfg.k as f64 * cfg.dwell_max),
                    dt: cfg.dt,
                    dwell_max: cfg.dwell_max,
                    choose_first: cfg.choose_first,
                    eps: 1e-4,
                    cuts: 16,
                };
                let outcome = falsify(&m, &enc.cs, &file, req, &given, &search).map_err(CliError::at(Stage::Solve))?;
                let answer = match outcome {
                    SearchOutcome::Found(c) => {
                        notes.push(format!("violating run found by simulation in trial {}", c.trial));
                        for (n, x) in &c.constants {
                            notes.push(format!("constant {n} = {x}"));
                        }
                        trace = Some(c.trace);
                        Answer::Candidate
                    }
                    SearchOutcome::Exhausted { trials } => {
                        notes.push(format!("no violation in {trials} simulated runs"));
                        Answer::Inconclusive
                    }
                };
                ("simulation-search".to_string(), "none".to_string(), answer)
            }
        };
        let trace_path = match &trace {
            Some(tr) => {
                let p = cfg.out.join(format!("{}.csv", req.name));
                write(&p, &trace_csv(tr)?, Stage::Witness)?;
                Some(p.display().to_string())
            }
            None => None,
        };
        reports.push(PropertyReport {
            property: req.name.clone(),
            requirement: req.to_string(),
            k: cfg.k,
            delta: cfg.delta,
            dwell_max: cfg.dwell_max,
            smt: smt_path.display().to_string(),
            engine,
            verdict,
            answer,
            notes,
            trace: trace_path,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    let report_text = render_report(&reports);
    write(&cfg.out.join("report.txt"), report_text.as_bytes(), Stage::Emit)?;
    let exit_code = Answer::worst(reports.iter().map(|r| r.answer)).map_or(0, Answer::exit_code);
    Ok(CheckOutcome { reports, report_text, exit_code })
}
