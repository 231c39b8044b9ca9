//! Scenario files: a JSON description of an algebra, an action and the
//! tasks to run on it, plus the built-in gallery and report emission.

mod gallery;
mod report;

pub use gallery::{gallery, gallery_item, GALLERY_NAMES};
pub use report::{
    emit, run, CertifyResult, MeanResult, OutputFormat, PropertiesResult, Report, TaskOutcome, TaskResult,
    TaskStatus, REPORT_SCHEMA_VERSION,
};

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{self, Operator, TracialAlgebra, WireMatrix};
use crate::dynamics::{FolnerScheme, Picture, SemigroupAction};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::maps::{self, SuperOperator, Verdict};
use crate::neveu::{self, NeveuOptions};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Decompose,
    Mean,
    Certify,
    Stochastic,
    /// Structural checks: commutation, semigroup law, Lamperti property,
    /// declared invariant state.
    GalleryItem,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Decompose => "decompose",
            Task::Mean => "mean",
            Task::Certify => "certify",
            Task::Stochastic => "stochastic",
            Task::GalleryItem => "gallery-item",
        }
    }

    fn randomized(self) -> bool {
        matches!(self, Task::Decompose | Task::Stochastic | Task::GalleryItem)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub blocks: Vec<usize>,
    /// Per-block trace weights; uniform when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub normalized: bool,
}

fn yes() -> bool {
    true
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<TracialAlgebra> {
        let weights = match &self.weights {
            Some(w) => w.clone(),
            None if self.normalized => {
                let total: usize = self.blocks.iter().sum();
                vec![1.0 / total.max(1) as f64; self.blocks.len()]
            }
            None => vec![1.0; self.blocks.len()],
        };
        TracialAlgebra::new(self.blocks.clone(), weights, self.normalized)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    /// Payload: list of `N × N` Kraus matrices, `x ↦ Σ K* x K`.
    Kraus,
    /// Payload: the `D × D` matrix in vectorized coordinates.
    Matrix,
    /// Payload: row-substochastic kernel on a commutative algebra.
    ClassicalKernel,
    /// Payload: a unitary algebra element `U`, `x ↦ U x U*`.
    Conjugation,
    /// Payload: `{hamiltonian, jumps}` as `N × N` matrices.
    Lindblad,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub source: SourceKind,
    pub payload: Value,
    /// Picture the payload is written in; it is dualized when Schrödinger.
    #[serde(default = "heisenberg", skip_serializing_if = "is_heisenberg")]
    pub form: Picture,
}

fn heisenberg() -> Picture {
    Picture::Heisenberg
}

fn is_heisenberg(p: &Picture) -> bool {
    *p == Picture::Heisenberg
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LindbladPayload {
    hamiltonian: WireMatrix,
    #[serde(default)]
    jumps: Vec<WireMatrix>,
}

fn parse_at<T: DeserializeOwned>(value: &Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        Error::schema(path, e.into_inner().to_string())
    })
}

fn wire_matrix(rows: &WireMatrix, path: &str) -> Result<CMat> {
    algebra::matrix_from_wire(rows).map_err(|m| Error::schema(path, m))
}

impl GeneratorSpec {
    pub fn new(source: SourceKind, payload: Value) -> Self {
        Self {
            source,
            payload,
            form: Picture::Heisenberg,
        }
    }

    pub fn kraus(kraus: &[CMat]) -> Self {
        let wire: Vec<WireMatrix> = kraus.iter().map(algebra::matrix_to_wire).collect();
        Self::new(SourceKind::Kraus, serde_json::to_value(wire).expect("plain data"))
    }

    pub fn classical(kernel: &[Vec<f64>]) -> Self {
        Self::new(SourceKind::ClassicalKernel, serde_json::to_value(kernel).expect("plain data"))
    }

    pub fn conjugation(u: &Operator) -> Self {
        Self::new(SourceKind::Conjugation, serde_json::to_value(u).expect("plain data"))
    }

    pub fn lindblad(hamiltonian: &CMat, jumps: &[CMat]) -> Self {
        let value = serde_json::json!({
            "hamiltonian": algebra::matrix_to_wire(hamiltonian),
            "jumps": jumps.iter().map(algebra::matrix_to_wire).collect::<Vec<_>>(),
        });
        Self::new(SourceKind::Lindblad, value)
    }

    pub fn in_form(mut self, form: Picture) -> Self {
        self.form = form;
        self
    }

    /// The Heisenberg map described by this entry; `path` prefixes errors.
    pub fn build(&self, alg: &TracialAlgebra, path: &str) -> Result<SuperOperator> {
        let payload = format!("{path}.payload");
        let map = match self.source {
            SourceKind::Kraus => {
                let wire: Vec<WireMatrix> = parse_at(&self.payload, &payload)?;
                let kraus = wire
                    .iter()
                    .enumerate()
                    .map(|(i, w)| wire_matrix(w, &format!("{payload}[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                maps::from_kraus(alg, &kraus)?
            }
            SourceKind::Matrix => {
                let wire: WireMatrix = parse_at(&self.payload, &payload)?;
                SuperOperator::from_matrix(alg, wire_matrix(&wire, &payload)?)?
            }
            SourceKind::ClassicalKernel => {
                let kernel: Vec<Vec<f64>> = parse_at(&self.payload, &payload)?;
                maps::from_classical(alg, &kernel)?
            }
            SourceKind::Conjugation => {
                let u: Operator = parse_at(&self.payload, &payload)?;
                maps::from_conjugation(alg, &u)?
            }
            SourceKind::Lindblad => {
                let p: LindbladPayload = parse_at(&self.payload, &payload)?;
                let h = wire_matrix(&p.hamiltonian, &format!("{payload}.hamiltonian"))?;
                let jumps = p
                    .jumps
                    .iter()
                    .enumerate()
                    .map(|(i, w)| wire_matrix(w, &format!("{payload}.jumps[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                maps::from_lindblad(alg, &h, &jumps)?
            }
        };
        Ok(match self.form {
            Picture::Heisenberg => map,
            // A Schrödinger payload γ describes the Heisenberg map γ*.
            Picture::Schrodinger => map.dual(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub picture: Picture,
    pub scheme: FolnerScheme,
    pub generators: Vec<GeneratorSpec>,
    /// Inverse maps, required by `z-symmetric-box`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverses: Option<Vec<GeneratorSpec>>,
}

impl ActionSpec {
    pub fn build(&self, alg: &TracialAlgebra) -> Result<SemigroupAction> {
        let gens = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| g.build(alg, &format!("action.generators[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let count = |d: usize| {
            if d == gens.len() {
                Ok(())
            } else {
                Err(Error::shape(format!("{d} generators for scheme.d"), gens.len()))
            }
        };
        match &self.scheme {
            FolnerScheme::ZplusBox { d } => {
                count(*d)?;
                SemigroupAction::discrete(self.picture, gens)
            }
            FolnerScheme::ZSymmetricBox { d } => {
                count(*d)?;
                let inv = self
                    .inverses
                    .as_ref()
                    .ok_or_else(|| Error::schema("action.inverses", "z-symmetric-box needs inverses"))?
                    .iter()
                    .enumerate()
                    .map(|(i, g)| g.build(alg, &format!("action.inverses[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                SemigroupAction::group(self.picture, gens, inv)
            }
            FolnerScheme::FiniteGroup { table } => SemigroupAction::finite_group(self.picture, gens, table.clone()),
            FolnerScheme::RPlusCube { d } => {
                count(*d)?;
                SemigroupAction::continuous(self.picture, gens)
            }
        }
    }
}

/// Numerical settings; every field has a default so files stay short.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_fixed: f64,
    pub decay_tol: f64,
    pub tail_window: usize,
    pub eps: f64,
    pub delta: f64,
    pub delta_tol: f64,
    pub uniqueness_probes: usize,
    pub lamperti_trials: usize,
    /// Orbit budget `a` for the convex-hull residual.
    pub hull_budget: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_fixed: tol::FIXED_SPACE,
            decay_tol: tol::DECAY,
            tail_window: tol::TAIL_WINDOW,
            eps: 0.05,
            delta: 0.1,
            delta_tol: tol::DELTA,
            uniqueness_probes: 1,
            lamperti_trials: maps::DEFAULT_TRIALS,
            hull_budget: 2,
        }
    }
}

/// Optional task inputs. Defaults: the uniform density for stochastic runs
/// and the last diagonal matrix unit for certificates.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<Operator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Operator>,
    /// A density claimed invariant under the action, verified by
    /// `gallery-item`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_state: Option<Operator>,
}

/// Verdicts a scenario expects for checks whose failure is the point.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expectations {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lamperti: Option<Verdict>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub algebra: AlgebraSpec,
    pub action: ActionSpec,
    pub tasks: Vec<Task>,
    #[serde(default = "neveu::default_schedule")]
    pub schedule: Vec<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub expect: Expectations,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Scenario {
    /// Checks the scenario-level invariants (not the generators).
    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::schema("tasks", "at least one task is required"));
        }
        neveu::check_schedule(&self.schedule).map_err(|e| Error::schema("schedule", e.to_string()))?;
        if self.seed.is_none() && self.tasks.iter().any(|t| t.randomized()) {
            return Err(Error::schema("seed", "randomized tasks require a seed"));
        }
        let t = &self.tolerances;
        if !(t.eps > 0.0) {
            return Err(Error::schema("tolerances.eps", "must be positive"));
        }
        if !(t.delta > 0.0 && t.delta < 1.0) {
            return Err(Error::schema("tolerances.delta", "must lie in (0, 1)"));
        }
        for (name, v) in [("tol_fixed", t.tol_fixed), ("decay_tol", t.decay_tol), ("delta_tol", t.delta_tol)] {
            if !(v > 0.0) {
                return Err(Error::schema(format!("tolerances.{name}"), "must be positive"));
            }
        }
        if t.tail_window < 2 || t.hull_budget == 0 {
            return Err(Error::schema("tolerances", "tail_window ≥ 2 and hull_budget ≥ 1 required"));
        }
        Ok(())
    }

    /// Validates and builds the algebra and the action.
    pub fn build(&self) -> Result<(TracialAlgebra, SemigroupAction)> {
        self.validate()?;
        let alg = self.algebra.build()?;
        let action = self.action.build(&alg)?;
        for (name, x) in [
            ("observable", &self.inputs.observable),
            ("density", &self.inputs.density),
            ("invariant_state", &self.inputs.invariant_state),
        ] {
            if let Some(x) = x {
                alg.check(x).map_err(|e| Error::schema(format!("inputs.{name}"), e.to_string()))?;
            }
        }
        Ok((alg, action))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn neveu_options(&self) -> NeveuOptions {
        NeveuOptions {
            tol_fixed: self.tolerances.tol_fixed,
            decay_tol: self.tolerances.decay_tol,
            schedule: self.schedule.clone(),
            tail_window: self.tolerances.tail_window,
            uniqueness_probes: self.tolerances.uniqueness_probes,
            seed: self.seed(),
        }
    }

    /// Keeps schedule entries up to `n_max`; falls back to powers of two.
    pub fn truncate_schedule(&mut self, n_max: usize) {
        self.schedule.retain(|&a| a <= n_max);
        if self.schedule.is_empty() {
            self.schedule = (0..usize::BITS).map(|k| 1usize << k).take_while(|&a| a <= n_max.max(1)).collect();
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }
}

/// Parses a scenario or a report (whose echoed scenario is replayed), then
/// validates it.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    if text.trim().is_empty() {
        return Err(Error::schema("$", "empty document"));
    }
    let value: Value = serde_json::from_str(text).map_err(|e| Error::schema("$", e.to_string()))?;
    let scenario: Scenario = match value.get("schema_version") {
        Some(version) => {
            let version = version
                .as_str()
                .ok_or_else(|| Error::schema("schema_version", "expected a string"))?;
            let major = version.split('.').next().unwrap_or_default();
            let ours = REPORT_SCHEMA_VERSION.split('.').next().unwrap_or_default();
            if major != ours {
                return Err(Error::schema(
                    "schema_version",
                    format!("unsupported report schema {version} (expected {ours}.x)"),
                ));
            }
            let inner = value
                .get("scenario")
                .ok_or_else(|| Error::schema("scenario", "report carries no scenario"))?;
            parse_at(inner, "scenario")?
        }
        None => parse_at(&value, "$")?,
    };
    scenario.build()?;
    Ok(scenario)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(kernel: &str) -> String {
        format!(
            r#"{{"name": "t", "algebra": {{"blocks": [1, 1]}},
                "action": {{"picture": "heisenberg", "scheme": {{"kind": "zplus-box", "d": 1}},
                            "generators": [{{"source": "classical-kernel", "payload": {kernel}}}]}},
                "tasks": ["mean"]}}"#
        )
    }

    #[test]
    fn parses_minimal_scenario() {
        let s = parse_scenario(&minimal("[[1.0, 0.0], [0.5, 0.5]]")).unwrap();
        assert_eq!(s.schedule, neveu::default_schedule());
        assert!(s.algebra.normalized);
    }

    #[test]
    fn empty_document_is_a_schema_error() {
        assert!(matches!(parse_scenario("  \n"), Err(Error::Schema { .. })));
    }

    #[test]
    fn bad_kernel_row_is_named() {
        match parse_scenario(&minimal("[[1.0, 0.0], [1.0, 0.5]]")) {
            Err(Error::InvalidKernel { row, .. }) => assert_eq!(row, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_paths() {
        let text = minimal("[[1.0, 0.0], [0.5, 0.5]]").replace("\"mean\"", "\"average\"");
        match parse_scenario(&text) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "$.tasks[0]"),
            other => panic!("{other:?}"),
        }
        let text = minimal("[[1.0, \"x\"]]");
        match parse_scenario(&text) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "action.generators[0].payload.[0][1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_mismatch_prints_both_shapes() {
        let text = minimal("[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]");
        let err = parse_scenario(&text).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::ShapeMismatch { .. }), "{msg}");
        assert!(msg.contains('2') && msg.contains('3'), "{msg}");
    }

    #[test]
    fn randomized_tasks_need_a_seed() {
        let text = minimal("[[1.0, 0.0], [0.5, 0.5]]").replace("\"mean\"", "\"decompose\"");
        assert!(matches!(parse_scenario(&text), Err(Error::Schema { path, .. }) if path == "seed"));
    }

    #[test]
    fn schedule_must_increase() {
        let text = minimal("[[1.0, 0.0], [0.5, 0.5]]").replace("\"tasks\"", "\"schedule\": [1, 4, 4], \"tasks\"");
        assert!(matches!(parse_scenario(&text), Err(Error::Schema { path, .. }) if path == "schedule"));
    }

    #[test]
    fn truncation_keeps_prefix() {
        let mut s = parse_scenario(&minimal("[[1.0, 0.0], [0.5, 0.5]]")).unwrap();
        s.truncate_schedule(10);
        assert_eq!(s.schedule, vec![1, 2, 4, 8]);
        s.schedule = vec![16, 32];
        s.truncate_schedule(5);
        assert_eq!(s.schedule, vec![1, 2, 4]);
    }
}
