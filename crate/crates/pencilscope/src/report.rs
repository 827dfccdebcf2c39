//! The analysis commands, each producing a JSON report and a list of flags.
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use pencilscope_core::branches::{crossings_in, BranchFamily, CrossingEvent};
use pencilscope_core::evans::{Contour, EvansKrein};
use pencilscope_core::index::{
    canonical_lower_bound, conservation_check, full_symmetry_count, pencil_index, unstable_count, IndexReport,
    PencilIndex, ZCounts,
};
use pencilscope_core::krein::{chains_from_branch_derivatives, gram_indices, recombine_chains, root_chains, KreinReport};
use pencilscope_core::pencil::{characteristic_values_with, real_characteristic_values, spectral_bound, MatrixPencil};
use pencilscope_core::{Error, Tolerances, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error as ThisError;

use crate::output::write_branch_csv;
use crate::problem::{kind_name, LoadedProblem, Problem};
use crate::sweep::run_sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Branches,
    Signatures,
    Chains,
    Evans,
    Index,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Branches => "branches",
            Command::Signatures => "signatures",
            Command::Chains => "chains",
            Command::Evans => "evans",
            Command::Index => "index",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub steps: Option<usize>,
    pub csv: Option<PathBuf>,
    pub contours: Vec<Vec<C64>>,
    pub seed: Option<u64>,
    pub tol: Tolerances,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            lambda_min: None,
            lambda_max: None,
            steps: None,
            csv: None,
            contours: Vec::new(),
            seed: None,
            tol: Tolerances::default(),
        }
    }
}

/// A flagged ambiguity: the analysis ran but some decision could not be made cleanly.
#[derive(Debug, Clone, PartialEq)]
pub struct Flag {
    pub code: String,
    pub message: String,
}

impl Flag {
    fn from_error(e: &Error, context: &str) -> Self {
        Flag { code: e.code().to_string(), message: format!("{context}: {e}") }
    }

    fn to_json(&self) -> Value {
        json!({"code": self.code, "message": self.message})
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub flags: Vec<Flag>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.flags.is_empty() {
            0
        } else {
            2
        }
    }
}

#[derive(Debug, ThisError)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{context}: {source}")]
    Analysis { context: String, source: Error },
}

impl RunError {
    pub fn code(&self) -> &'static str {
        match self {
            RunError::Usage(_) => "usage",
            RunError::Io { .. } => "io_error",
            RunError::Analysis { source, .. } => source.code(),
        }
    }
}

/// Outcomes a tolerance-based decision could not settle. These become flags with exit
/// code 2; every other error means the input does not fit the command.
pub fn is_ambiguity(e: &Error) -> bool {
    matches!(
        e,
        Error::MatchingAmbiguous { .. }
            | Error::OrderUndetermined { .. }
            | Error::FlagDegenerate { .. }
            | Error::DegenerateGram { .. }
            | Error::DerivativeBelowNoise { .. }
            | Error::ComplexRootsDetected { .. }
            | Error::RootOnContour
            | Error::PhaseStepTooLarge
            | Error::Inconsistent { .. }
            | Error::Borderline { .. }
            | Error::NoConvergence { .. }
    )
}

fn fatal(context: &str) -> impl Fn(Error) -> RunError + '_ {
    move |source| RunError::Analysis { context: context.to_string(), source }
}

/// Turn an ambiguity into a flag and `None`; pass other errors up.
fn soft<T>(r: Result<T, Error>, context: &str, flags: &mut Vec<Flag>) -> Result<Option<T>, RunError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if is_ambiguity(&e) => {
            flags.push(Flag::from_error(&e, context));
            Ok(None)
        }
        Err(e) => Err(fatal(context)(e)),
    }
}

fn error_json(e: &Error) -> Value {
    json!({"code": e.code(), "message": e.to_string()})
}

fn pencil_of(problem: &LoadedProblem, cmd: Command) -> Result<MatrixPencil, RunError> {
    match &problem.problem {
        Problem::Sweep { .. } => {
            Err(RunError::Usage(format!("{} does not apply to a sweep problem; use the sweep command", cmd.name())))
        }
        Problem::Canonical(c) => c
            .to_system()
            .map(|s| pencilscope_core::pencil::pencil_from_hamiltonian(&s))
            .map_err(fatal("canonical system")),
        p => Ok(p.pencil().expect("non-sweep problems have a pencil")),
    }
}

const DEFAULT_STEPS: usize = 400;
const DELAY_WINDOW: (f64, f64) = (-10.0, 10.0);

fn window(problem: &LoadedProblem, pencil: &MatrixPencil, opts: &Options) -> Result<(f64, f64), RunError> {
    let (lo, hi) = match problem.window {
        Some(w) => w,
        None if pencil.is_polynomial() => {
            let r = spectral_bound(pencil).map_err(fatal("spectral bound"))?;
            let w = 1.1 * r + 0.1;
            (-w, w)
        }
        None => DELAY_WINDOW,
    };
    let lo = opts.lambda_min.unwrap_or(lo);
    let hi = opts.lambda_max.unwrap_or(hi);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(RunError::Usage(format!("invalid window [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

fn steps(problem: &LoadedProblem, opts: &Options) -> Result<usize, RunError> {
    let s = opts.steps.or(problem.steps).unwrap_or(DEFAULT_STEPS);
    if s == 0 {
        return Err(RunError::Usage("steps must be positive".to_string()));
    }
    Ok(s)
}

fn header(problem: &LoadedProblem, cmd: Command) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(cmd.name()));
    m.insert("kind".into(), json!(kind_name(problem.problem.kind())));
    if let Some(n) = &problem.name {
        m.insert("name".into(), json!(n));
    }
    m
}

fn finish(mut m: serde_json::Map<String, Value>, flags: Vec<Flag>) -> Outcome {
    m.insert("status".into(), json!(if flags.is_empty() { "ok" } else { "flagged" }));
    m.insert("flags".into(), Value::Array(flags.iter().map(Flag::to_json).collect()));
    Outcome { report: Value::Object(m), flags }
}

pub fn run(cmd: Command, problem: &LoadedProblem, opts: &Options) -> Result<Outcome, RunError> {
    let mut opts = opts.clone();
    opts.tol = problem.tolerances(opts.tol);
    if opts.contours.is_empty() {
        opts.contours = problem.contours.clone();
    }
    match cmd {
        Command::Branches => branches(problem, &opts),
        Command::Signatures => signatures(problem, &opts),
        Command::Chains => chains(problem, &opts),
        Command::Evans => evans(problem, &opts),
        Command::Index => index(problem, &opts),
        Command::Sweep => run_sweep(problem, &opts),
    }
}

struct Crossings {
    pencil: MatrixPencil,
    window: (f64, f64),
    family: BranchFamily,
    events: Vec<CrossingEvent>,
}

fn crossings(problem: &LoadedProblem, cmd: Command, opts: &Options) -> Result<Crossings, RunError> {
    let pencil = pencil_of(problem, cmd)?;
    let window = window(problem, &pencil, opts)?;
    let steps = steps(problem, opts)?;
    let (family, events) =
        crossings_in(&pencil, window.0, window.1, steps, &opts.tol).map_err(fatal("branch sampling"))?;
    if let Some(path) = &opts.csv {
        let f = File::create(path).map_err(|e| RunError::Io { path: path.display().to_string(), message: e.to_string() })?;
        write_branch_csv(&family, BufWriter::new(f))
            .map_err(|e| RunError::Io { path: path.display().to_string(), message: e.to_string() })?;
    }
    Ok(Crossings { pencil, window, family, events })
}

fn event_json(ev: &CrossingEvent) -> Value {
    let branches: Vec<Value> = ev
        .branches
        .iter()
        .map(|b| match &b.result {
            Ok(v) => json!({"branch": b.branch, "order": v.order, "eta": v.eta, "derivative": v.derivative}),
            Err(e) => json!({"branch": b.branch, "error": error_json(e)}),
        })
        .collect();
    json!({
        "lambda": ev.lambda,
        "k": ev.k(),
        "alpha": ev.alpha().ok(),
        "branches": branches,
    })
}

fn window_json(c: &Crossings) -> Value {
    json!({"lambda_min": c.window.0, "lambda_max": c.window.1, "steps": c.family.grid.len() - 1})
}

fn branches(problem: &LoadedProblem, opts: &Options) -> Result<Outcome, RunError> {
    let c = crossings(problem, Command::Branches, opts)?;
    let mut flags = Vec::new();
    for ev in &c.events {
        if let Err(e) = ev.orders() {
            flags.push(Flag::from_error(&e, &format!("crossing near lambda = {}", ev.lambda)));
        }
    }
    let mut m = header(problem, Command::Branches);
    m.insert("window".into(), window_json(&c));
    m.insert("n_branches".into(), json!(c.family.n_branches()));
    m.insert("min_overlap".into(), json!(c.family.min_overlap));
    m.insert("crossings".into(), Value::Array(c.events.iter().map(event_json).collect()));
    Ok(finish(m, flags))
}

fn signature_row(pencil: &MatrixPencil, ev: &CrossingEvent, tol: &Tolerances) -> (Value, Vec<Flag>) {
    let mut flags = Vec::new();
    let context = format!("crossing near lambda = {}", ev.lambda);
    let graphical = match KreinReport::from_event(ev) {
        Ok(r) => r,
        Err(e) => {
            flags.push(Flag::from_error(&e, &context));
            return (json!({"lambda": ev.lambda, "k": ev.k(), "error": error_json(&e)}), flags);
        }
    };
    let mut row = json!({
        "lambda": ev.lambda,
        "k": ev.k(),
        "alpha": graphical.alpha(),
        "kappa_plus": graphical.kappa_plus,
        "kappa_minus": graphical.kappa_minus,
        "kappa": graphical.kappa(),
    });
    if pencil.is_polynomial() {
        let gram = root_chains(pencil, ev.lambda, tol).and_then(|ch| gram_indices(pencil, ev.lambda, &ch, tol));
        row["gram"] = match gram {
            Ok(g) => {
                let agree = (g.kappa_plus, g.kappa_minus) == (graphical.kappa_plus, graphical.kappa_minus);
                if !agree {
                    flags.push(Flag {
                        code: "gram_mismatch".into(),
                        message: format!(
                            "{context}: Gram indices ({}, {}) differ from graphical ({}, {})",
                            g.kappa_plus, g.kappa_minus, graphical.kappa_plus, graphical.kappa_minus
                        ),
                    });
                }
                json!({"kappa_plus": g.kappa_plus, "kappa_minus": g.kappa_minus, "agree": agree})
            }
            Err(e) => {
                flags.push(Flag::from_error(&e, &context));
                json!({"error": error_json(&e)})
            }
        };
    }
    (row, flags)
}

fn signatures(problem: &LoadedProblem, opts: &Options) -> Result<Outcome, RunError> {
    let c = crossings(problem, Command::Signatures, opts)?;
    let rows: Vec<(Value, Vec<Flag>)> = c.events.par_iter().map(|ev| signature_row(&c.pencil, ev, &opts.tol)).collect();
    let mut flags = Vec::new();
    let mut table = Vec::new();
    for (row, f) in rows {
        table.push(row);
        flags.extend(f);
    }
    let mut m = header(problem, Command::Signatures);
    m.insert("window".into(), window_json(&c));
    m.insert("values".into(), Value::Array(table));
    Ok(finish(m, flags))
}

fn chains(problem: &LoadedProblem, opts: &Options) -> Result<Outcome, RunError> {
    let pencil = pencil_of(problem, Command::Chains)?;
    if !pencil.is_polynomial() {
        return Err(RunError::Usage("chains needs a polynomial pencil".into()));
    }
    let tol = &opts.tol;
    let all = characteristic_values_with(&pencil, tol).map_err(fatal("characteristic values"))?;
    let reals = real_characteristic_values(&all, tol);
    let mut rng = opts.seed.map(ChaCha8Rng::seed_from_u64);
    let mut flags = Vec::new();
    let mut rows = Vec::new();
    for (x, alpha) in reals {
        let context = format!("lambda = {x}");
        let Some(set) = soft(root_chains(&pencil, x, tol), &context, &mut flags)? else {
            rows.push(json!({"lambda": x, "multiplicity": alpha, "error": "flag undetermined"}));
            continue;
        };
        let mut row = json!({
            "lambda": x,
            "multiplicity": alpha,
            "lengths": set.lengths(),
            "alpha": set.alpha(),
            "residuals": set.chains.iter().map(|c| c.residual).collect::<Vec<_>>(),
        });
        if set.alpha() != alpha {
            flags.push(Flag {
                code: "multiplicity_mismatch".into(),
                message: format!("{context}: chain lengths sum to {}, spectrum gives {alpha}", set.alpha()),
            });
        }
        row["from_branches"] = match chains_from_branch_derivatives(&pencil, x, tol) {
            Ok(b) => json!({"lengths": b.lengths(), "residual": b.residual()}),
            Err(e) => {
                if is_ambiguity(&e) {
                    flags.push(Flag::from_error(&e, &context));
                }
                json!({"error": error_json(&e)})
            }
        };
        if let Some(r) = rng.as_mut() {
            let base = gram_indices(&pencil, x, &set, tol);
            let mixed = recombine_chains(&set, || C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            let other = gram_indices(&pencil, x, &mixed, tol);
            row["recombined"] = match (base, other) {
                (Ok(a), Ok(b)) => {
                    let agree = (a.kappa_plus, a.kappa_minus) == (b.kappa_plus, b.kappa_minus);
                    json!({
                        "kappa": [a.kappa_plus, a.kappa_minus],
                        "recombined_kappa": [b.kappa_plus, b.kappa_minus],
                        "agree": agree,
                    })
                }
                (Err(e), _) | (_, Err(e)) => {
                    if is_ambiguity(&e) {
                        flags.push(Flag::from_error(&e, &context));
                    }
                    json!({"error": error_json(&e)})
                }
            };
        }
        rows.push(row);
    }
    let mut m = header(problem, Command::Chains);
    if let Some(s) = opts.seed {
        m.insert("seed".into(), json!(s));
    }
    m.insert("values".into(), Value::Array(rows));
    Ok(finish(m, flags))
}

fn evans_row(ek: &EvansKrein, ev: &CrossingEvent, tol: &Tolerances, flags: &mut Vec<Flag>) -> Value {
    let context = format!("crossing near lambda = {}", ev.lambda);
    let orders = match ev.orders() {
        Ok(o) => o,
        Err(e) => {
            flags.push(Flag::from_error(&e, &context));
            return json!({"lambda": ev.lambda, "error": error_json(&e)});
        }
    };
    let x = ev.lambda;
    let graphical: i64 = orders.iter().map(|&(m, eta)| {
        let (p, q) = pencilscope_core::krein::graphical_indices(m, eta);
        p as i64 - q as i64
    }).sum();
    let mut row = json!({"lambda": x, "k": orders.len(), "orders": orders.iter().map(|o| o.0).collect::<Vec<_>>(), "kappa_graphical": graphical});
    if orders.len() == 1 && orders[0].0 == 1 {
        let (d, e) = ek.first_partials(x, tol);
        row["d_prime"] = json!(d.value);
        row["e_mu"] = json!(e.value);
        match ek.signature(x, tol) {
            Ok(k) => {
                let agree = k as i64 == graphical;
                if !agree {
                    flags.push(Flag {
                        code: "evans_mismatch".into(),
                        message: format!("{context}: Evans signature {k} differs from graphical {graphical}"),
                    });
                }
                row["kappa_evans"] = json!(k);
                row["agree"] = json!(agree);
                row["sign_d_prime_only"] = json!(-d.sign() as i64);
            }
            Err(e) => {
                flags.push(Flag::from_error(&e, &context));
                row["error"] = error_json(&e);
            }
        }
    } else if orders.len() == 1 {
        let m = orders[0].0;
        match ek.high_order_derivative_gm1(x, m, tol) {
            Ok(dm) => {
                row["derivative_order"] = json!(m);
                row["branch_derivative"] = json!(dm);
                row["sign_matches_branch"] = json!(dm.signum() as i64 == orders[0].1 as i64);
            }
            Err(e) => {
                flags.push(Flag::from_error(&e, &context));
                row["error"] = error_json(&e);
            }
        }
    } else if orders.iter().all(|o| o.0 == 1) {
        match ek.semisimple_slopes(x, tol) {
            Ok(s) => row["slopes"] = json!(s),
            Err(e) => {
                flags.push(Flag::from_error(&e, &context));
                row["error"] = error_json(&e);
            }
        }
    } else {
        row["note"] = json!("mixed multiplicities are outside the Evans specializations");
    }
    row
}

fn evans(problem: &LoadedProblem, opts: &Options) -> Result<Outcome, RunError> {
    let c = crossings(problem, Command::Evans, opts)?;
    let ek = EvansKrein::new(&c.pencil);
    let tol = &opts.tol;
    let mut flags = Vec::new();
    let rows: Vec<Value> = c.events.iter().map(|ev| evans_row(&ek, ev, tol, &mut flags)).collect();
    let mut winding = Vec::new();
    for (i, verts) in opts.contours.iter().enumerate() {
        let contour = Contour::polygon(verts.clone(), 64).map_err(fatal("contour"))?;
        let vs: Vec<[f64; 2]> = contour.vertices.iter().map(|z| [z.re, z.im]).collect();
        let count = soft(ek.winding_number(&contour, 0.0, tol), &format!("contour {i}"), &mut flags)?;
        winding.push(json!({"vertices": vs, "count": count}));
    }
    let mut m = header(problem, Command::Evans);
    m.insert("window".into(), window_json(&c));
    m.insert("values".into(), Value::Array(rows));
    m.insert("winding".into(), Value::Array(winding));
    Ok(finish(m, flags))
}

fn z_json(z: &ZCounts) -> Value {
    json!({
        "down_plus": z.down_plus,
        "down_minus": z.down_minus,
        "up_plus": z.up_plus,
        "up_minus": z.up_minus,
        "plus": z.plus,
        "minus": z.minus,
    })
}

fn pencil_index_json(p: &PencilIndex) -> Value {
    json!({
        "n": p.n,
        "degree": p.degree,
        "n_minus_l0": p.n_minus_l0,
        "n_plus_lp": p.n_plus_lp,
        "n_minus_lp": p.n_minus_lp,
        "z": z_json(&p.z),
        "values": p.values.iter().map(|r| json!({
            "lambda": r.lambda0,
            "kappa_plus": r.kappa_plus,
            "kappa_minus": r.kappa_minus,
            "kappa": r.kappa(),
        })).collect::<Vec<_>>(),
        "kappa_sum_pos": p.kappa_sum_pos,
        "kappa_sum_neg": p.kappa_sum_neg,
        "n_plus_pencil": p.n_plus_pencil,
        "n_minus_pencil": p.n_minus_pencil,
        "conservation_residual": p.residual,
        "inequality_plus": p.inequality_plus,
        "inequality_minus": p.inequality_minus,
    })
}

fn index_json(r: &IndexReport) -> Value {
    json!({
        "pencil": pencil_index_json(&r.pencil),
        "gker": r.gker,
        "ker_l": r.ker_l,
        "n_minus_l": r.n_minus_l,
        "zeta": r.zeta,
        "kappa_plus_pos": r.kappa_plus_pos,
        "kappa_minus_neg": r.kappa_minus_neg,
        "n_u": r.n_u,
        "n_u_direct": r.n_u_direct,
        "n_s": r.n_s,
        "consistent": r.consistent(),
    })
}

fn hamiltonian_index(
    sys: &pencilscope_core::pencil::HamiltonianSystem,
    tol: &Tolerances,
    m: &mut serde_json::Map<String, Value>,
    flags: &mut Vec<Flag>,
) -> Result<(), RunError> {
    if let Some(r) = soft(unstable_count(sys, tol), "unstable count", flags)? {
        if r.pencil.residual != 0 {
            flags.push(Flag {
                code: "conservation_residual".into(),
                message: format!("conservation residual {}", r.pencil.residual),
            });
        }
        m.insert("index".into(), index_json(&r));
    }
    match full_symmetry_count(sys, None, tol) {
        Ok(s) => {
            m.insert(
                "full_symmetry".into(),
                json!({
                    "n_u": s.n_u,
                    "zeta": s.zeta,
                    "kappa_plus_pos": s.kappa_plus_pos,
                    "parity_ok": s.parity_ok,
                    "mirror_ok": s.mirror_ok,
                }),
            );
        }
        Err(Error::NotReal) => {
            m.insert("full_symmetry".into(), Value::Null);
        }
        Err(e) if is_ambiguity(&e) => flags.push(Flag::from_error(&e, "full symmetry count")),
        Err(e) => return Err(fatal("full symmetry count")(e)),
    }
    Ok(())
}

fn index(problem: &LoadedProblem, opts: &Options) -> Result<Outcome, RunError> {
    let tol = &opts.tol;
    let mut flags = Vec::new();
    let mut m = header(problem, Command::Index);
    match &problem.problem {
        Problem::Hamiltonian(sys) => hamiltonian_index(sys, tol, &mut m, &mut flags)?,
        Problem::Canonical(c) => {
            let sys = c.to_system().map_err(fatal("canonical system"))?;
            hamiltonian_index(&sys, tol, &mut m, &mut flags)?;
            let b = canonical_lower_bound(c, tol).map_err(fatal("lower bound"))?;
            m.insert("lower_bound".into(), json!({"bound": b.bound, "n_real": b.n_real, "satisfied": b.satisfied}));
        }
        Problem::Polynomial(p) => {
            if let Some(idx) = soft(pencil_index(p, tol), "pencil index", &mut flags)? {
                m.insert("index".into(), pencil_index_json(&idx));
            }
            if p.degree().is_some_and(|d| d % 2 == 1) {
                if let Some(res) = soft(conservation_check(p, tol), "conservation", &mut flags)? {
                    if res != 0 {
                        flags.push(Flag { code: "conservation_residual".into(), message: format!("residual {res}") });
                    }
                    m.insert("conservation_residual".into(), json!(res));
                }
            }
        }
        Problem::Dde { .. } => return Err(RunError::Usage("index needs a polynomial pencil or Hamiltonian".into())),
        Problem::Sweep { .. } => {
            return Err(RunError::Usage("index does not apply to a sweep problem; use the sweep command".into()))
        }
    }
    Ok(finish(m, flags))
}

pub(crate) fn header_for(problem: &LoadedProblem, cmd: Command) -> serde_json::Map<String, Value> {
    header(problem, cmd)
}

pub(crate) fn finish_with(m: serde_json::Map<String, Value>, flags: Vec<Flag>) -> Outcome {
    finish(m, flags)
}

pub(crate) fn flag_from(e: &Error, context: &str) -> Flag {
    Flag::from_error(e, context)
}

pub(crate) fn fatal_error(context: &str, e: Error) -> RunError {
    fatal(context)(e)
}
