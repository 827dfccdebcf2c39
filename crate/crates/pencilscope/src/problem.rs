//! Problem files: JSON, schema version 1, complex entries as `[re, im]` pairs.
use std::fs;
use std::path::Path;

use pencilscope_core::pencil::{dde_pencil, CanonicalHamiltonian, HamiltonianSystem, MatrixPencil};
use pencilscope_core::{CMatrix, Tolerances, C64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// A matrix as rows of `[re, im]` pairs.
pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error in field \"{field}\": {message}")]
    Schema { field: String, message: String },
    #[error("invariant violated by field \"{field}\": {message}")]
    Invariant { field: String, message: String },
}

impl LoadError {
    pub fn field(&self) -> Option<&str> {
        match self {
            LoadError::Schema { field, .. } | LoadError::Invariant { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            LoadError::Io { .. } => "io_error",
            LoadError::Parse { .. } => "parse_error",
            LoadError::Schema { .. } => "schema_error",
            LoadError::Invariant { .. } => "invariant_violation",
        }
    }
}

fn schema(field: &str, message: impl Into<String>) -> LoadError {
    LoadError::Schema { field: field.to_string(), message: message.into() }
}

fn invariant(field: &str, message: impl Into<String>) -> LoadError {
    LoadError::Invariant { field: field.to_string(), message: message.into() }
}

/// Problem kinds accepted in the `kind` field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Hamiltonian,
    PolynomialPencil,
    DdePencil,
    CanonicalHamiltonian,
    Sweep,
}

/// Tolerance overrides; absent fields keep the profile value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evans_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winding_margin: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        let mut t = base;
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut t.crossing, self.crossing);
        set(&mut t.kernel, self.kernel);
        set(&mut t.rank, self.rank);
        set(&mut t.evans_step, self.evans_step);
        set(&mut t.noise_factor, self.noise_factor);
        set(&mut t.re, self.re);
        set(&mut t.collision, self.collision);
        set(&mut t.winding_margin, self.winding_margin);
        t
    }

    fn check(&self) -> Result<(), LoadError> {
        let fields = [
            ("crossing", self.crossing),
            ("kernel", self.kernel),
            ("rank", self.rank),
            ("evans_step", self.evans_step),
            ("noise_factor", self.noise_factor),
            ("re", self.re),
            ("collision", self.collision),
            ("winding_margin", self.winding_margin),
        ];
        for (name, v) in fields {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(invariant(&format!("tolerances.{name}"), "must be finite and positive"));
                }
            }
        }
        Ok(())
    }
}

/// On-disk layout. Which matrix fields are required depends on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<RawMatrix>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<RawMatrix>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<RawMatrix>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(rename = "L_plus", default, skip_serializing_if = "Option::is_none")]
    pub l_plus: Option<RawMatrix>,
    #[serde(rename = "L_minus", default, skip_serializing_if = "Option::is_none")]
    pub l_minus: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    /// Closed polygons for winding counts, each a list of `[re, im]` vertices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contours: Option<Vec<Vec<[f64; 2]>>>,
}

/// The mathematical content of a problem file.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Hamiltonian(HamiltonianSystem),
    Polynomial(MatrixPencil),
    Dde { a: CMatrix, b: CMatrix, tau: f64, pencil: MatrixPencil },
    Canonical(CanonicalHamiltonian),
    Sweep { a: CMatrix, b: CMatrix, j: CMatrix, t_values: Vec<f64> },
}

impl Problem {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::Hamiltonian(_) => ProblemKind::Hamiltonian,
            Problem::Polynomial(_) => ProblemKind::PolynomialPencil,
            Problem::Dde { .. } => ProblemKind::DdePencil,
            Problem::Canonical(_) => ProblemKind::CanonicalHamiltonian,
            Problem::Sweep { .. } => ProblemKind::Sweep,
        }
    }

    /// The pencil analysed by the branch, signature, chain and Evans commands.
    /// Sweeps have one pencil per parameter value and return `None`.
    pub fn pencil(&self) -> Option<MatrixPencil> {
        match self {
            Problem::Hamiltonian(sys) => Some(pencilscope_core::pencil::pencil_from_hamiltonian(sys)),
            Problem::Polynomial(p) => Some(p.clone()),
            Problem::Dde { pencil, .. } => Some(pencil.clone()),
            Problem::Canonical(c) => c.to_system().ok().map(|s| pencilscope_core::pencil::pencil_from_hamiltonian(&s)),
            Problem::Sweep { .. } => None,
        }
    }
}

/// A validated problem together with its analysis settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProblem {
    pub name: Option<String>,
    pub problem: Problem,
    pub window: Option<(f64, f64)>,
    pub steps: Option<usize>,
    pub tolerances: ToleranceOverrides,
    pub contours: Vec<Vec<C64>>,
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<LoadedProblem, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| LoadError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_problem(&text)
}

pub fn parse_problem(text: &str) -> Result<LoadedProblem, LoadError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| LoadError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    check_version(&value)?;
    let file: ProblemFile = serde_json::from_value(value).map_err(|e| {
        let message = e.to_string();
        schema(&field_in_message(&message).unwrap_or_else(|| "(root)".to_string()), message)
    })?;
    validate(&file)
}

fn check_version(value: &serde_json::Value) -> Result<(), LoadError> {
    match value.get("schema_version") {
        None => Err(schema("schema_version", "missing")),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => Ok(()),
        Some(v) => Err(schema("schema_version", format!("unsupported version {v}, expected {SCHEMA_VERSION}"))),
    }
}

// serde names the field in backticks: "missing field `J`", "unknown field `foo`".
fn field_in_message(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

fn matrix(field: &str, raw: &RawMatrix) -> Result<CMatrix, LoadError> {
    let n = raw.len();
    if n == 0 {
        return Err(schema(field, "matrix is empty"));
    }
    for (i, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(schema(field, format!("row {i} has {} entries, expected {n} (matrices are square)", row.len())));
        }
        if row.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invariant(field, format!("row {i} has a non-finite entry")));
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(raw[i][j][0], raw[i][j][1])))
}

fn required<'a, T>(field: &str, v: &'a Option<T>, kind: ProblemKind) -> Result<&'a T, LoadError> {
    v.as_ref().ok_or_else(|| schema(field, format!("required for kind {}", kind_name(kind))))
}

pub fn kind_name(kind: ProblemKind) -> &'static str {
    match kind {
        ProblemKind::Hamiltonian => "hamiltonian",
        ProblemKind::PolynomialPencil => "polynomial_pencil",
        ProblemKind::DdePencil => "dde_pencil",
        ProblemKind::CanonicalHamiltonian => "canonical_hamiltonian",
        ProblemKind::Sweep => "sweep",
    }
}

fn same_dim(field: &str, m: &CMatrix, n: usize) -> Result<(), LoadError> {
    if m.rows() != n {
        return Err(schema(field, format!("dimension {} does not match {n}", m.rows())));
    }
    Ok(())
}

fn hermitian(field: &str, m: &CMatrix, tol: &Tolerances) -> Result<(), LoadError> {
    let d = m.hermitian_defect();
    if d > tol.hermitian * m.frobenius_norm() {
        return Err(invariant(field, format!("not Hermitian (defect {d:.3e})")));
    }
    Ok(())
}

fn hamiltonian_system(j: CMatrix, l: CMatrix, tol: &Tolerances) -> Result<HamiltonianSystem, LoadError> {
    let n = j.rows();
    same_dim("L", &l, n)?;
    if n % 2 != 0 {
        return Err(invariant("J", format!("dimension {n} is odd")));
    }
    let d = j.skew_defect();
    if d > tol.hermitian * j.frobenius_norm() {
        return Err(invariant("J", format!("not skew-Hermitian (defect {d:.3e})")));
    }
    hermitian("L", &l, tol)?;
    HamiltonianSystem::with_tol(j, l, tol).map_err(|e| invariant("J", e.to_string()))
}

fn no_extra(file: &ProblemFile) -> Result<(), LoadError> {
    let present: [(&str, bool); 9] = [
        ("J", file.j.is_some()),
        ("L", file.l.is_some()),
        ("coefficients", file.coefficients.is_some()),
        ("A", file.a.is_some()),
        ("B", file.b.is_some()),
        ("tau", file.tau.is_some()),
        ("L_plus", file.l_plus.is_some()),
        ("L_minus", file.l_minus.is_some()),
        ("t_values", file.t_values.is_some()),
    ];
    let allowed: &[&str] = match file.kind {
        ProblemKind::Hamiltonian => &["J", "L"],
        ProblemKind::PolynomialPencil => &["coefficients"],
        ProblemKind::DdePencil => &["A", "B", "tau"],
        ProblemKind::CanonicalHamiltonian => &["L_plus", "L_minus"],
        ProblemKind::Sweep => &["A", "B", "J", "t_values"],
    };
    for (name, there) in present {
        if there && !allowed.contains(&name) {
            return Err(schema(name, format!("not used by kind {}", kind_name(file.kind))));
        }
    }
    Ok(())
}

fn validate(file: &ProblemFile) -> Result<LoadedProblem, LoadError> {
    no_extra(file)?;
    let tol = Tolerances::default();
    let kind = file.kind;
    let problem = match kind {
        ProblemKind::Hamiltonian => {
            let j = matrix("J", required("J", &file.j, kind)?)?;
            let l = matrix("L", required("L", &file.l, kind)?)?;
            Problem::Hamiltonian(hamiltonian_system(j, l, &tol)?)
        }
        ProblemKind::PolynomialPencil => {
            let raw = required("coefficients", &file.coefficients, kind)?;
            if raw.is_empty() {
                return Err(schema("coefficients", "needs at least one matrix"));
            }
            let mut coeffs = Vec::with_capacity(raw.len());
            for (k, m) in raw.iter().enumerate() {
                let field = format!("coefficients[{k}]");
                let m = matrix(&field, m)?;
                if let Some(first) = coeffs.first() {
                    same_dim(&field, &m, CMatrix::rows(first))?;
                }
                coeffs.push(m);
            }
            let pencil = MatrixPencil::polynomial(coeffs).map_err(|e| invariant("coefficients", e.to_string()))?;
            Problem::Polynomial(pencil)
        }
        ProblemKind::DdePencil => {
            let a = matrix("A", required("A", &file.a, kind)?)?;
            let b = matrix("B", required("B", &file.b, kind)?)?;
            same_dim("B", &b, a.rows())?;
            let tau = *required("tau", &file.tau, kind)?;
            if !(tau.is_finite() && tau > 0.0) {
                return Err(invariant("tau", "delay must be finite and positive"));
            }
            let pencil = dde_pencil(&a, &b, tau).map_err(|e| invariant("A", e.to_string()))?;
            Problem::Dde { a, b, tau, pencil }
        }
        ProblemKind::CanonicalHamiltonian => {
            let lp = matrix("L_plus", required("L_plus", &file.l_plus, kind)?)?;
            let lm = matrix("L_minus", required("L_minus", &file.l_minus, kind)?)?;
            same_dim("L_minus", &lm, lp.rows())?;
            hermitian("L_plus", &lp, &tol)?;
            hermitian("L_minus", &lm, &tol)?;
            Problem::Canonical(CanonicalHamiltonian::new(lp, lm).map_err(|e| invariant("L_plus", e.to_string()))?)
        }
        ProblemKind::Sweep => {
            let a = matrix("A", required("A", &file.a, kind)?)?;
            let b = matrix("B", required("B", &file.b, kind)?)?;
            let j = matrix("J", required("J", &file.j, kind)?)?;
            same_dim("B", &b, a.rows())?;
            same_dim("J", &j, a.rows())?;
            hermitian("A", &a, &tol)?;
            hermitian("B", &b, &tol)?;
            hamiltonian_system(j.clone(), a.clone(), &tol)?;
            let t_values = required("t_values", &file.t_values, kind)?.clone();
            if t_values.is_empty() {
                return Err(schema("t_values", "needs at least one parameter value"));
            }
            if t_values.iter().any(|t| !t.is_finite()) {
                return Err(invariant("t_values", "non-finite parameter value"));
            }
            Problem::Sweep { a, b, j, t_values }
        }
    };
    let window = match file.window {
        Some([lo, hi]) if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
            return Err(invariant("window", "need finite lambda_min < lambda_max"));
        }
        Some([lo, hi]) => Some((lo, hi)),
        None => None,
    };
    if file.steps == Some(0) {
        return Err(invariant("steps", "must be positive"));
    }
    let tolerances = file.tolerances.clone().unwrap_or_default();
    tolerances.check()?;
    let mut contours = Vec::new();
    for (i, c) in file.contours.iter().flatten().enumerate() {
        if c.len() < 3 {
            return Err(schema(&format!("contours[{i}]"), "a contour needs at least three vertices"));
        }
        if c.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invariant(&format!("contours[{i}]"), "non-finite vertex"));
        }
        contours.push(c.iter().map(|v| C64::new(v[0], v[1])).collect());
    }
    Ok(LoadedProblem { name: file.name.clone(), problem, window, steps: file.steps, tolerances, contours })
}

fn raw(m: &CMatrix) -> RawMatrix {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

impl LoadedProblem {
    /// The file that loads back to this problem.
    pub fn to_file(&self) -> ProblemFile {
        let mut f = ProblemFile {
            schema_version: SCHEMA_VERSION,
            kind: self.problem.kind(),
            name: self.name.clone(),
            j: None,
            l: None,
            coefficients: None,
            a: None,
            b: None,
            tau: None,
            l_plus: None,
            l_minus: None,
            t_values: None,
            window: self.window.map(|(a, b)| [a, b]),
            steps: self.steps,
            tolerances: if self.tolerances == ToleranceOverrides::default() { None } else { Some(self.tolerances.clone()) },
            contours: if self.contours.is_empty() {
                None
            } else {
                Some(self.contours.iter().map(|c| c.iter().map(|z| [z.re, z.im]).collect()).collect())
            },
        };
        match &self.problem {
            Problem::Hamiltonian(sys) => {
                f.j = Some(raw(sys.j()));
                f.l = Some(raw(sys.l()));
            }
            Problem::Polynomial(p) => {
                f.coefficients = p.coeffs().map(|c| c.iter().map(raw).collect());
            }
            Problem::Dde { a, b, tau, .. } => {
                f.a = Some(raw(a));
                f.b = Some(raw(b));
                f.tau = Some(*tau);
            }
            Problem::Canonical(c) => {
                f.l_plus = Some(raw(&c.l_plus));
                f.l_minus = Some(raw(&c.l_minus));
            }
            Problem::Sweep { a, b, j, t_values } => {
                f.a = Some(raw(a));
                f.b = Some(raw(b));
                f.j = Some(raw(j));
                f.t_values = Some(t_values.clone());
            }
        }
        f
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("problem files always serialize")
    }

    pub fn tolerances(&self, base: Tolerances) -> Tolerances {
        self.tolerances.apply(base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HAM: &str = r#"{"schema_version": 1, "kind": "hamiltonian",
        "J": [[[0,0],[1,0]],[[-1,0],[0,0]]],
        "L": [[[1,0],[0,0]],[[0,0],[2,0]]]}"#;

    #[test]
    fn loads_a_hamiltonian() {
        let p = parse_problem(HAM).unwrap();
        assert_eq!(p.problem.kind(), ProblemKind::Hamiltonian);
        let back = parse_problem(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn names_the_offending_field() {
        let bad = HAM.replace("[[-1,0],[0,0]]", "[[1,0],[0,0]]");
        let e = parse_problem(&bad).unwrap_err();
        assert!(matches!(e, LoadError::Invariant { .. }), "{e}");
        assert_eq!(e.field(), Some("J"));
        let e = parse_problem(&HAM.replace("\"L\"", "\"M\"")).unwrap_err();
        assert_eq!(e.code(), "schema_error");
        let e = parse_problem(&HAM.replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap_err();
        assert_eq!(e.field(), Some("schema_version"));
        let e = parse_problem("{\"schema_version\": 1,\n \"kind\": }").unwrap_err();
        assert!(matches!(e, LoadError::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn ragged_rows_are_schema_errors() {
        let bad = HAM.replace("[[1,0],[0,0]],[[0,0],[2,0]]", "[[1,0],[0,0]],[[0,0]]");
        let e = parse_problem(&bad).unwrap_err();
        assert_eq!(e.field(), Some("L"));
        assert_eq!(e.code(), "schema_error");
    }
}
