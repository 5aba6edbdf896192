//! JSON-driven command-line front end.
//!
//! A problem file defines the ambient dimension, the algebra (through
//! generators; an empty list means the full matrix algebra), a list of named
//! densities, and optional tolerance and grid overrides. Every command emits
//! a single report, JSON by default, with a fixed field order so identical
//! inputs produce byte-identical output.
//!
//! Exit codes: 0 = property holds / command succeeded, 1 = mathematically
//! negative verdict, 2 = input or usage error, 3 = internal consistency
//! violation.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{center, generate_algebra, is_abelian, Algebra};
use crate::broadcasting::{broadcastable, feasibility_search, verify_channel, FeasibilityOutcome};
use crate::cocycles::{connes_cocycle, verify_chain_rule, verify_cocycle_identity};
use crate::commutativity::{
    commutes_jointly, commutes_pairwise, convexity_harness, counterexample_qubit,
    definition_consistency, pairwise_family,
};
use crate::error::{Error, Result};
use crate::linalg_core::CMatrix;
use crate::states::{
    make_state, verify_midpoint_identity, verify_omega1_identity, State,
};
use crate::tolerances::{default_t_grid, Tolerances, MAX_AMBIENT_DIM};

/// On-disk problem description. Unknown fields are rejected.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub ambient_dim: usize,
    /// Generators of the algebra; empty means the full matrix algebra.
    #[serde(default)]
    pub generators: Vec<CMatrix>,
    pub states: Vec<NamedDensity>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedDensity {
    pub name: String,
    pub density: CMatrix,
}

/// A parsed and validated problem: algebra, states, grid, tolerances.
pub struct Problem {
    pub algebra: Arc<Algebra>,
    pub states: Vec<State>,
    pub grid: Vec<f64>,
    pub tol: Tolerances,
}

impl Problem {
    pub fn state(&self, name: &str) -> Result<&State> {
        self.states
            .iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownState {
                name: name.to_string(),
            })
    }
}

/// Load a problem file, applying command-line overrides.
pub fn load_problem(
    path: &str,
    tol_override: Option<f64>,
    grid_override: Option<&[f64]>,
) -> Result<Problem> {
    let text = std::fs::read_to_string(path)?;
    let file: ProblemFile =
        serde_json::from_str(&text).map_err(|e| Error::InvalidProblem {
            reason: e.to_string(),
        })?;
    let mut tol = file.tolerances.unwrap_or_default();
    if let Some(eps) = tol_override {
        tol.eps_eq = eps;
    }
    let grid = grid_override
        .map(|g| g.to_vec())
        .or(file.t_grid)
        .unwrap_or_else(default_t_grid);
    if grid.is_empty() {
        return Err(Error::InvalidProblem {
            reason: "t_grid must not be empty".into(),
        });
    }
    let n = file.ambient_dim;
    if n == 0 {
        return Err(Error::InvalidProblem {
            reason: "ambient_dim must be positive".into(),
        });
    }
    if n > MAX_AMBIENT_DIM {
        eprintln!(
            "warning: ambient dimension {n} exceeds the default maximum {MAX_AMBIENT_DIM}; \
             commutant solves cost O(n^6) and will be slow"
        );
    }
    let algebra = if file.generators.is_empty() {
        Arc::new(Algebra::full(n, tol))
    } else {
        Arc::new(generate_algebra(&file.generators, n, &tol)?)
    };
    let mut states = Vec::with_capacity(file.states.len());
    let mut seen = std::collections::BTreeSet::new();
    for nd in &file.states {
        if !seen.insert(nd.name.clone()) {
            return Err(Error::InvalidProblem {
                reason: format!("duplicate state name '{}'", nd.name),
            });
        }
        states.push(make_state(&algebra, &nd.density, nd.name.clone())?);
    }
    if states.is_empty() {
        return Err(Error::InvalidProblem {
            reason: "problem file defines no states".into(),
        });
    }
    Ok(Problem {
        algebra,
        states,
        grid,
        tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "modular-lab",
    about = "Modular flows, Connes cocycles, state commutativity, and broadcast channels on matrix algebras",
    version
)]
struct Cli {
    /// Override the operator-norm equality tolerance eps_eq.
    #[arg(long, value_name = "EPS")]
    tol: Option<f64>,
    /// Comma-separated flow-parameter grid, e.g. "-1.0,-0.5,0.5,1.0".
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    t_grid: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Seed for randomized constructions (recorded in the report).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Algebra dimension, center, abelianness, and the state roster.
    Info { file: String },
    /// Pairwise commutativity of one state against a faithful base.
    CheckPairwise {
        file: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        base: String,
    },
    /// Joint commutativity of the whole family.
    CheckJoint { file: String },
    /// Evaluate the Connes cocycle at one flow parameter.
    Cocycle {
        file: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        base: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Residual table for the five pairwise-equivalence conditions.
    VerifyPt {
        file: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        base: String,
    },
    /// Evaluate every identity the toolkit guarantees on this family.
    VerifyIdentities { file: String },
    /// Construct and verify a broadcast channel for the family.
    Broadcast {
        file: String,
        /// Write the channel (Kraus form) as JSON to this path.
        #[arg(long, value_name = "OUT")]
        emit_channel: Option<String>,
    },
    /// Dykstra feasibility search for a broadcast channel.
    Feasibility {
        file: String,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        /// Convergence gap for the alternating projections.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Packaged demonstrations.
    Counterexample {
        #[command(subcommand)]
        which: CounterexampleKind,
    },
    /// Randomized verification harnesses.
    Harness {
        #[command(subcommand)]
        which: HarnessKind,
    },
}

#[derive(Debug, Subcommand)]
enum CounterexampleKind {
    /// The qubit family {trace, ground projection, plus projection}.
    Qubit,
}

#[derive(Debug, Subcommand)]
enum HarnessKind {
    /// Convex sampling: pairwise and joint conditions must agree.
    Convexity {
        file: String,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Args)]
struct PairArgs {}

/// The single report schema shared by every command.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub verdict: Option<bool>,
    pub residuals: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub t_grid: Vec<f64>,
    pub details: Value,
}

fn error_report(command: &str, err: &Error) -> Report {
    Report {
        command: command.to_string(),
        verdict: None,
        residuals: BTreeMap::new(),
        seed: None,
        tolerances: Tolerances::default(),
        t_grid: Vec::new(),
        details: json!({ "error": err.to_string() }),
    }
}

fn render<W: Write>(report: &Report, format: Format, out: &mut W) {
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(report).expect("report serializes");
            let _ = writeln!(out, "{text}");
        }
        Format::Text => {
            let _ = writeln!(out, "command: {}", report.command);
            match report.verdict {
                Some(v) => {
                    let _ = writeln!(out, "verdict: {v}");
                }
                None => {
                    let _ = writeln!(out, "verdict: n/a");
                }
            }
            for (k, v) in &report.residuals {
                let _ = writeln!(out, "residual {k}: {v:.3e}");
            }
            if let Some(seed) = report.seed {
                let _ = writeln!(out, "seed: {seed}");
            }
            let _ = writeln!(
                out,
                "details: {}",
                serde_json::to_string(&report.details).expect("details serialize")
            );
        }
    }
}

fn parse_grid(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| Error::InvalidProblem {
                reason: format!("bad t_grid entry '{s}': {e}"),
            })
        })
        .collect()
}

/// Run the CLI against an argument vector, writing the report to `out`.
/// Returns the process exit code.
pub fn run_with_writer<W: Write>(argv: &[String], out: &mut W) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let err = Error::InvalidProblem {
                reason: e.to_string().lines().next().unwrap_or("usage").to_string(),
            };
            render(&error_report("usage", &err), Format::Json, out);
            return 2;
        }
    };
    let format = cli.format;
    let command_name = command_name(&cli.command).to_string();
    match dispatch(cli) {
        Ok((report, code)) => {
            render(&report, format, out);
            code
        }
        Err(e) => {
            render(&error_report(&command_name, &e), format, out);
            e.exit_code()
        }
    }
}

/// Run against std{out}; the thin binary calls this.
pub fn run(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with_writer(argv, &mut lock)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Info { .. } => "info",
        Command::CheckPairwise { .. } => "check-pairwise",
        Command::CheckJoint { .. } => "check-joint",
        Command::Cocycle { .. } => "cocycle",
        Command::VerifyPt { .. } => "verify-pt",
        Command::VerifyIdentities { .. } => "verify-identities",
        Command::Broadcast { .. } => "broadcast",
        Command::Feasibility { .. } => "feasibility",
        Command::Counterexample { .. } => "counterexample",
        Command::Harness { .. } => "harness",
    }
}

fn dispatch(cli: Cli) -> Result<(Report, i32)> {
    let grid_override = match &cli.t_grid {
        Some(list) => Some(parse_grid(list)?),
        None => None,
    };
    let load = |path: &str| load_problem(path, cli.tol, grid_override.as_deref());
    let name = command_name(&cli.command).to_string();
    let seed = cli.seed;

    match cli.command {
        Command::Info { file } => {
            let p = load(&file)?;
            let z = center(&p.algebra)?;
            let (abelian, residual) = is_abelian(&p.algebra);
            let report = Report {
                command: name,
                verdict: None,
                residuals: BTreeMap::from([("abelian_residual".to_string(), residual)]),
                seed: Some(seed),
                tolerances: p.tol,
                t_grid: p.grid.clone(),
                details: json!({
                    "ambient_dim": p.algebra.ambient_dim(),
                    "algebra_dim": p.algebra.dim(),
                    "center_dim": z.dim(),
                    "abelian": abelian,
                    "states": p.states.iter().map(|s| s.name().to_string()).collect::<Vec<_>>(),
                }),
            };
            Ok((report, 0))
        }
        Command::CheckPairwise { file, state, base } => {
            let p = load(&file)?;
            let phi = p.state(&state)?;
            let omega = p.state(&base)?;
            let v = commutes_pairwise(phi, omega, &p.grid)?;
            let mut residuals = v.residuals.clone();
            residuals.insert("oracle".to_string(), v.oracle_commutator);
            let code = if v.commutes { 0 } else { 1 };
            let report = Report {
                command: name,
                verdict: Some(v.commutes),
                residuals,
                seed: Some(seed),
                tolerances: p.tol,
                t_grid: p.grid.clone(),
                details: json!({ "state": state, "base": base }),
            };
            Ok((report, code))
        }
        Command::CheckJoint { file } => {
            let p = load(&file)?;
            let v = commutes_jointly(&p.states, &p.grid)?;
            let code = if v.commutes { 0 } else { 1 };
            let report = Report {
                command: name,
                verdict: Some(v.commutes),
                residuals: BTreeMap::from([
                    ("max_commutator".to_string(), v.max_commutator),
                    ("oracle_max_commutator".to_string(), v.oracle_max_commutator),
                ]),
                seed: Some(seed),
                tolerances: p.tol,
                t_grid: p.grid.clone(),
                details: json!({
                    "cocycle_algebra_dim": v.cocycle_algebra_dim,
                    "offending_pair": v.offending_pair,
                }),
            };
            Ok((report, code))
        }
        Command::Cocycle {
            file,
            state,
            base,
            t,
        } => {
            let p = load(&file)?;
            let u = connes_cocycle(p.state(&state)?, p.state(&base)?, t)?;
            let report = Report {
                command: name,
                verdict: None,
                residuals: BTreeMap::new(),
                seed: Some(seed),
                tolerances: p.tol,
                t_grid: p.grid.clone(),
                details: json!({
                    "state": state,
                    "base": base,
                    "t": t,
                    "cocycle": serde_json::to_value(&u)?,
                }),
            };
            Ok((report, 0))
        }
        Command::VerifyPt { file, state, base } => {
            let p = load(&file)?;
            let v = commutes_pairwise(p.state(&state)?, p.state(&base)?, &p.grid)?;
            let mut residuals = v.residuals.clone();
            residuals.insert("oracle".to_string(), v.oracle_commutator);
            let conditions: BTreeMap<String, bool> = v
                .residuals
                .iter()
                .map(|(k, &r)| (k.clone(), r <= p.tol.eps_eq))
                .collect();
            let code = if v.commutes { 0 } else { 1 };
            let report = Report {
                command: name,
                verdict: Some(v.commutes),
                residuals,
                seed: Some(seed),
                tolerances: p.tol,
                t_grid: p.grid.clone(),
                details: json!({
                    "state": state,
                    "base": base,
                    "conditions": conditions,
                }),
            };
            Ok((report, code))
        }
        Command::VerifyIdentities { file } => {
            let p = load(&file)?;
            verify_identities(&p, name, seed)
        }
        Command::Broadcast { file, emit_channel } => {
            let p = load(&file)?;
            let outcome = broadcastable(&p.states, &p.grid, seed)?;
            if !outcome.broadcastable {
                let report = Report {
                    command: name,
                    verdict: Some(false),
                    residuals: BTreeMap::from([(
                        "oracle_max_commutator".to_string(),
                        outcome.joint.oracle_max_commutator,
                    )]),
                    seed: Some(seed),
                    tolerances: p.tol,
                    t_grid: p.grid.clone(),
                    details: json!({ "offending_pair": outcome.joint.offending_pair }),
                };
                return Ok((report, 1));
            }
            let channel = outcome.channel.expect("broadcastable carries a channel");
            let rep = outcome.report.expect("broadcastable carries a report");
            if let Some(path) = emit_channel {
                std::fs::write(&path, serde_json::to_string_pretty(&channel)? + "\n")?;
            }
            let report = Report {
                command: name,
                verdict: Some(true),
                residuals: BTreeMap::from([
                    ("max_marginal_residual".to_string(), rep.max_marginal_residual),
                    ("unitality_residual".to_string(), rep.unitality_residual),
                    ("choi_min_eigenvalue".to_string(), rep.choi_min_eigenvalue),
                    ("range_residual".to_string(), rep.range_residual),
                ]),
                seed: Some(seed),
                tolerances: p.tol,
                t_grid: p.grid.clone(),
                details: json!({ "kraus_count": channel.kraus().len() }),
            };
            Ok((report, 0))
        }
        Command::Feasibility {
            file,
            max_iter,
            tol,
        } => {
            let p = load(&file)?;
            match feasibility_search(&p.states, max_iter, tol)? {
                FeasibilityOutcome::Converged {
                    channel,
                    gap,
                    iterations,
                } => {
                    let rep = verify_channel(&channel, &p.states)?;
                    let report = Report {
                        command: name,
                        verdict: Some(true),
                        residuals: BTreeMap::from([
                            ("gap".to_string(), gap),
                            ("max_marginal_residual".to_string(), rep.max_marginal_residual),
                            ("unitality_residual".to_string(), rep.unitality_residual),
                        ]),
                        seed: Some(seed),
                        tolerances: p.tol,
                        t_grid: p.grid.clone(),
                        details: json!({
                            "iterations": iterations,
                            "kraus_count": channel.kraus().len(),
                        }),
                    };
                    Ok((report, 0))
                }
                FeasibilityOutcome::Stalled { gap, iterations } => {
                    let report = Report {
                        command: name,
                        verdict: Some(false),
                        residuals: BTreeMap::from([("gap".to_string(), gap)]),
                        seed: Some(seed),
                        tolerances: p.tol,
                        t_grid: p.grid.clone(),
                        details: json!({
                            "iterations": iterations,
                            "note": "stalled gap is evidence of infeasibility, not a proof",
                        }),
                    };
                    Ok((report, 1))
                }
            }
        }
        Command::Counterexample { which } => match which {
            CounterexampleKind::Qubit => {
                let grid = grid_override.unwrap_or_else(default_t_grid);
                let (_, rep) = counterexample_qubit(&grid)?;
                let as_predicted = rep.raw_pairwise
                    && !rep.raw_joint
                    && !rep.convex_pairwise
                    && !rep.convex_joint
                    && (rep.oracle_max_commutator - 0.5).abs() <= 1e-12
                    && (rep.midpoint_witness_commutator - 0.25).abs() <= 1e-12;
                if !as_predicted {
                    return Err(Error::EquivalenceViolation {
                        details: "counterexample family deviates from the predicted pattern".into(),
                    });
                }
                let report = Report {
                    command: name,
                    verdict: Some(true),
                    residuals: BTreeMap::from([
                        ("oracle_max_commutator".to_string(), rep.oracle_max_commutator),
                        (
                            "midpoint_witness_commutator".to_string(),
                            rep.midpoint_witness_commutator,
                        ),
                    ]),
                    seed: Some(rep.seed),
                    tolerances: Tolerances::default(),
                    t_grid: grid,
                    details: serde_json::to_value(&rep)?,
                };
                Ok((report, 0))
            }
        },
        Command::Harness { which } => match which {
            HarnessKind::Convexity {
                file,
                samples,
                seed: harness_seed,
            } => {
                let p = load(&file)?;
                let used_seed = harness_seed.unwrap_or(seed);
                let rep = convexity_harness(&p.states, samples, used_seed, &p.grid)?;
                let report = Report {
                    command: name,
                    verdict: Some(rep.equivalence_holds),
                    residuals: BTreeMap::new(),
                    seed: Some(used_seed),
                    tolerances: p.tol,
                    t_grid: p.grid.clone(),
                    details: serde_json::to_value(&rep)?,
                };
                Ok((report, 0))
            }
        },
    }
}

/// Evaluate every identity on the loaded family: the regularized-functional
/// identity, the cocycle identity, the chain rule on commuting triples, the
/// midpoint construction on commuting pairs, and the independence of the
/// joint-commutativity definition from the faithful anchor. Identities are
/// theorems; a residual above contract exits 3, not 1.
fn verify_identities(p: &Problem, name: String, seed: u64) -> Result<(Report, i32)> {
    let grid = &p.grid;
    let mut residuals = BTreeMap::new();
    let mut evaluated = Vec::new();
    let mut skipped = Vec::new();

    let faithful: Vec<&State> = p.states.iter().filter(|s| s.is_faithful()).collect();

    // omega1: A ranges over functions of each faithful density
    let mut omega1 = 0.0f64;
    let mut omega1_count = 0usize;
    for omega in &faithful {
        let h = omega.density();
        let candidates = vec![
            h.clone(),
            h * h,
            CMatrix::identity(h.dim()),
        ];
        for a in &candidates {
            for x in p.algebra.basis().iter().take(8) {
                omega1 = omega1.max(verify_omega1_identity(omega, a, x)?);
                omega1_count += 1;
            }
        }
    }
    if omega1_count > 0 {
        residuals.insert("omega1".to_string(), omega1);
        evaluated.push("omega1");
    } else {
        skipped.push(("omega1", "no faithful state"));
    }

    // cocycle identity on all (state, faithful) pairs over grid pairs
    let mut cocycle_id = 0.0f64;
    let mut cocycle_count = 0usize;
    for omega in &faithful {
        for phi in &p.states {
            for &s in grid.iter().take(4) {
                for &t in grid.iter().rev().take(4) {
                    cocycle_id = cocycle_id.max(verify_cocycle_identity(phi, omega, s, t)?);
                    cocycle_count += 1;
                }
            }
        }
    }
    if cocycle_count > 0 {
        residuals.insert("cocycle_identity".to_string(), cocycle_id);
        evaluated.push("cocycle_identity");
    } else {
        skipped.push(("cocycle_identity", "no faithful state"));
    }

    // chain rule on commuting triples only (the paper's hypothesis)
    let mut chain = 0.0f64;
    let mut chain_count = 0usize;
    for omega in &faithful {
        for phi in &faithful {
            for rho in &p.states {
                for &t in grid.iter().take(3) {
                    let check = verify_chain_rule(rho, phi, omega, t)?;
                    if check.pairwise_commuting {
                        chain = chain.max(check.chain_residual.max(check.inverse_residual));
                        chain_count += 1;
                    }
                }
            }
        }
    }
    if chain_count > 0 {
        residuals.insert("chain_rule".to_string(), chain);
        evaluated.push("chain_rule");
    } else {
        skipped.push(("chain_rule", "no commuting triple with two faithful states"));
    }

    // midpoint identity on commuting (rho, omega) pairs
    let mut mid_state = 0.0f64;
    let mut mid_cocycle = 0.0f64;
    let mut mid_count = 0usize;
    for omega in &faithful {
        for rho in &p.states {
            let v = commutes_pairwise(rho, omega, grid)?;
            if v.commutes {
                let rep = verify_midpoint_identity(rho, omega, grid)?;
                mid_state = mid_state.max(rep.residual_state);
                mid_cocycle = mid_cocycle.max(rep.residual_cocycle);
                mid_count += 1;
            }
        }
    }
    if mid_count > 0 {
        residuals.insert("midpoint_state".to_string(), mid_state);
        residuals.insert("midpoint_cocycle".to_string(), mid_cocycle);
        evaluated.push("midpoint");
    } else {
        skipped.push(("midpoint", "no commuting pair with a faithful base"));
    }

    // definition consistency needs a jointly commuting family and 2 faithful anchors
    if faithful.len() >= 2 {
        let joint = commutes_jointly(&p.states, grid)?;
        if joint.commutes {
            let d = definition_consistency(&p.states, faithful[0], faithful[1], grid)?;
            residuals.insert("definition_consistency".to_string(), d);
            evaluated.push("definition_consistency");
        } else {
            skipped.push(("definition_consistency", "family does not commute jointly"));
        }
    } else {
        skipped.push(("definition_consistency", "fewer than two faithful states"));
    }

    let contracts: &[(&str, f64)] = &[
        ("omega1", 1e-10),
        ("cocycle_identity", 1e-9),
        ("chain_rule", 1e-9),
        ("midpoint_state", 1e-9),
        ("midpoint_cocycle", 1e-9),
        ("definition_consistency", 1e-8),
    ];
    let mut breaches = Vec::new();
    for (key, bound) in contracts {
        if let Some(&r) = residuals.get(*key) {
            if r > *bound {
                breaches.push(format!("{key}: {r:.3e} > {bound:.1e}"));
            }
        }
    }
    if !breaches.is_empty() {
        return Err(Error::EquivalenceViolation {
            details: format!("identity contract breached: {}", breaches.join("; ")),
        });
    }
    let report = Report {
        command: name,
        verdict: Some(true),
        residuals,
        seed: Some(seed),
        tolerances: p.tol,
        t_grid: grid.clone(),
        details: json!({
            "evaluated": evaluated,
            "skipped": skipped.iter().map(|(k, why)| json!({"identity": k, "reason": why})).collect::<Vec<_>>(),
            "pairwise_summary": pairwise_family(&p.states, grid)?.0,
        }),
    };
    Ok((report, 0))
}
