//! Parameter sweeps L(t) = A + tB of a linearized Hamiltonian with fixed J.
use pencilscope_core::krein::value_signature;
use pencilscope_core::pencil::{
    characteristic_values_with, pencil_from_hamiltonian, real_characteristic_values, HamiltonianSystem,
};
use pencilscope_core::{CMatrix, Error, Tolerances, C64};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::problem::{LoadedProblem, Problem};
use crate::report::{fatal_error, finish_with, flag_from, header_for, is_ambiguity, Command, Flag, Options, Outcome, RunError};

pub const SAME: &str = "same-signature (harmless)";
pub const OPPOSITE: &str = "opposite-signature (Hopf-capable)";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepValue {
    pub lambda: f64,
    pub multiplicity: usize,
    /// (κ⁺, κ⁻), or the error that prevented it.
    pub krein: Result<(usize, usize), Error>,
}

impl SweepValue {
    pub fn kappa(&self) -> Option<i64> {
        self.krein.as_ref().ok().map(|&(p, m)| p as i64 - m as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collision {
    pub lower: f64,
    pub upper: f64,
    pub kappa_lower: Option<i64>,
    pub kappa_upper: Option<i64>,
    pub label: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepStep {
    pub t: f64,
    /// Every characteristic value is real.
    pub all_real: bool,
    pub total: usize,
    pub values: Vec<SweepValue>,
    pub collisions: Vec<Collision>,
}

fn label(a: Option<i64>, b: Option<i64>) -> &'static str {
    match (a, b) {
        (Some(x), Some(y)) if x * y > 0 => SAME,
        (Some(_), Some(_)) => OPPOSITE,
        // an undetermined signature cannot rule out a Hopf-capable pair
        _ => OPPOSITE,
    }
}

/// Real characteristic values of L(t) - λK with signatures, and the near-collisions among them.
pub fn sweep_step(a: &CMatrix, b: &CMatrix, j: &CMatrix, t: f64, tol: &Tolerances) -> Result<SweepStep, Error> {
    let mut l = a.clone();
    l.axpy(C64::new(t, 0.0), b);
    let sys = HamiltonianSystem::with_tol(j.clone(), l.hermitian_part(), tol)?;
    let pencil = pencil_from_hamiltonian(&sys);
    let all = characteristic_values_with(&pencil, tol)?;
    let total: usize = all.iter().map(|v| v.1).sum();
    let reals = real_characteristic_values(&all, tol);
    let n_real: usize = reals.iter().map(|v| v.1).sum();
    let values: Vec<SweepValue> = reals
        .iter()
        .map(|&(x, m)| SweepValue {
            lambda: x,
            multiplicity: m,
            krein: value_signature(&pencil, x, tol).map(|r| (r.kappa_plus, r.kappa_minus)),
        })
        .collect();
    let mut collisions = Vec::new();
    for w in values.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let scale = 1.0 + p.lambda.abs().max(q.lambda.abs());
        if q.lambda - p.lambda < tol.collision * scale {
            collisions.push(Collision {
                lower: p.lambda,
                upper: q.lambda,
                kappa_lower: p.kappa(),
                kappa_upper: q.kappa(),
                label: label(p.kappa(), q.kappa()),
            });
        }
    }
    Ok(SweepStep { t, all_real: n_real == total, total, values, collisions })
}

fn step_json(s: &SweepStep) -> Value {
    json!({
        "t": s.t,
        "all_real": s.all_real,
        "total": s.total,
        "values": s.values.iter().map(|v| match &v.krein {
            Ok((p, m)) => json!({
                "lambda": v.lambda,
                "multiplicity": v.multiplicity,
                "kappa_plus": p,
                "kappa_minus": m,
                "kappa": *p as i64 - *m as i64,
            }),
            Err(e) => json!({
                "lambda": v.lambda,
                "multiplicity": v.multiplicity,
                "error": {"code": e.code(), "message": e.to_string()},
            }),
        }).collect::<Vec<_>>(),
        "collisions": s.collisions.iter().map(|c| collision_json(s.t, c)).collect::<Vec<_>>(),
    })
}

fn collision_json(t: f64, c: &Collision) -> Value {
    json!({
        "t": t,
        "lambda_lower": c.lower,
        "lambda_upper": c.upper,
        "gap": c.upper - c.lower,
        "kappa_lower": c.kappa_lower,
        "kappa_upper": c.kappa_upper,
        "type": c.label,
    })
}

pub fn run_sweep(problem: &LoadedProblem, opts: &Options) -> Result<Outcome, RunError> {
    let Problem::Sweep { a, b, j, t_values } = &problem.problem else {
        return Err(RunError::Usage("sweep needs a sweep problem".into()));
    };
    let tol = &opts.tol;
    let steps: Vec<Result<SweepStep, Error>> = t_values.par_iter().map(|&t| sweep_step(a, b, j, t, tol)).collect();
    let mut flags: Vec<Flag> = Vec::new();
    let mut rows = Vec::new();
    let mut log = Vec::new();
    for (t, s) in t_values.iter().zip(steps) {
        let s = match s {
            Ok(s) => s,
            Err(e) if is_ambiguity(&e) => {
                flags.push(flag_from(&e, &format!("t = {t}")));
                rows.push(json!({"t": t, "error": {"code": e.code(), "message": e.to_string()}}));
                continue;
            }
            Err(e) => return Err(fatal_error(&format!("t = {t}"), e)),
        };
        for v in &s.values {
            if let Err(e) = &v.krein {
                flags.push(flag_from(e, &format!("t = {t}, lambda = {}", v.lambda)));
            }
        }
        log.extend(s.collisions.iter().map(|c| collision_json(s.t, c)));
        rows.push(step_json(&s));
    }
    let mut m = header_for(problem, Command::Sweep);
    m.insert("rows".into(), Value::Array(rows));
    m.insert("collision_log".into(), Value::Array(log));
    Ok(finish_with(m, flags))
}
