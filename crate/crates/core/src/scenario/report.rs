//! Running scenarios and writing their reports.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::{Scenario, Task};
use crate::algebra::{self, Operator, TracialAlgebra};
use crate::convergence::{self, BauCertificate, HullResidual, MeasureCertificate, StochasticReport};
use crate::dynamics::SemigroupAction;
use crate::error::{Error, Result};
use crate::maps::{self, CheckReport, Verdict};
use crate::neveu::{self, DecayReport, NeveuDecomposition, ProjectionValidation};

/// Major version bumps on incompatible layout changes.
pub const REPORT_SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskStatus {
    Completed,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanResult {
    pub fixed_dims: Vec<usize>,
    pub idempotency_residual: f64,
    pub invariance_residual: f64,
    pub validation: ProjectionValidation,
    /// `E(1)` in the Heisenberg picture.
    pub unit_image: Operator,
    /// `E_*(uniform density)`.
    pub density_image: Operator,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertifyResult {
    pub observable: Operator,
    pub limit: Operator,
    pub measure: MeasureCertificate,
    pub bau: BauCertificate,
    /// Absent for continuous actions.
    pub hull: Option<HullResidual>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertiesResult {
    pub commuting: CheckReport,
    pub semigroup_law: CheckReport,
    pub contractions: Vec<CheckReport>,
    /// One check per Schrödinger generator (time-one map when continuous).
    pub lamperti: Vec<CheckReport>,
    pub lamperti_verdict: Verdict,
    pub lamperti_expected: Option<Verdict>,
    pub invariant_state: Option<CheckReport>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum TaskResult {
    Decompose(Box<NeveuDecomposition>),
    Mean(Box<MeanResult>),
    Certify(Box<CertifyResult>),
    Stochastic(Box<StochasticReport>),
    Properties(Box<PropertiesResult>),
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskOutcome {
    pub task: Task,
    pub status: TaskStatus,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<TaskResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEntry {
    pub generator: usize,
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub generator: String,
    pub scenario: Scenario,
    /// Commutation (or group law) and per-generator contraction checks.
    pub action_checks: Vec<CheckReport>,
    pub spectrum: Vec<SpectrumEntry>,
    pub tasks: Vec<TaskOutcome>,
    pub verdict: Verdict,
}

impl Report {
    pub fn outcome(&self, task: Task) -> Option<&TaskOutcome> {
        self.tasks.iter().find(|t| t.task == task)
    }

    pub fn decomposition(&self) -> Option<&NeveuDecomposition> {
        self.tasks.iter().find_map(|t| match &t.result {
            Some(TaskResult::Decompose(d)) => Some(d.as_ref()),
            _ => None,
        })
    }

    pub fn decay(&self) -> Option<&DecayReport> {
        self.decomposition().map(|d| &d.decay)
    }

    pub fn all_pass(&self) -> bool {
        self.verdict.is_pass()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn worst(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Pass;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Unknown => out = Verdict::Unknown,
            Verdict::Pass => {}
        }
    }
    out
}

fn non_fail(v: Verdict) -> Verdict {
    Verdict::from_bool(!v.is_fail())
}

fn default_observable(alg: &TracialAlgebra) -> Operator {
    let b = alg.blocks().len() - 1;
    let n = alg.blocks()[b];
    alg.unit(b, n - 1, n - 1)
}

fn spectrum(action: &SemigroupAction) -> Vec<SpectrumEntry> {
    let mut out = Vec::new();
    for (g, map) in action.generators().iter().enumerate() {
        let (_, t) = nalgebra::Schur::new(map.matrix().clone()).unpack();
        let mut eig: Vec<_> = t.diagonal().iter().copied().collect();
        eig.sort_by(|a, b| {
            b.norm()
                .total_cmp(&a.norm())
                .then(b.re.total_cmp(&a.re))
                .then(b.im.total_cmp(&a.im))
        });
        out.extend(eig.into_iter().enumerate().map(|(index, z)| SpectrumEntry {
            generator: g,
            index,
            re: z.re,
            im: z.im,
            modulus: z.norm(),
        }));
    }
    out
}

fn mean_task(scenario: &Scenario, action: &SemigroupAction) -> Result<MeanResult> {
    let tol_fixed = scenario.tolerances.tol_fixed;
    let alg = action.algebra();
    let own = neveu::mean_ergodic_projection(action, tol_fixed)?;
    let heis = neveu::mean_ergodic_projection(&action.heisenberg(), tol_fixed)?;
    let schr = neveu::mean_ergodic_projection(&action.schrodinger(), tol_fixed)?;
    Ok(MeanResult {
        fixed_dims: own.fixed_dims.clone(),
        idempotency_residual: own.idempotency_residual,
        invariance_residual: own.invariance_residual,
        verdict: non_fail(own.validation.verdict),
        validation: own.validation,
        unit_image: heis.apply(&alg.identity())?,
        density_image: schr.apply(&alg.uniform_density())?,
    })
}

fn certify_task(scenario: &Scenario, action: &SemigroupAction) -> Result<CertifyResult> {
    let heis = action.heisenberg();
    let alg = heis.algebra();
    let t = &scenario.tolerances;
    let x = scenario.inputs.observable.clone().unwrap_or_else(|| default_observable(alg));
    let limit = neveu::mean_ergodic_projection(&heis, t.tol_fixed)?.apply(&x)?;
    let seq = scenario
        .schedule
        .iter()
        .map(|&a| Ok((a, heis.average(&x, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let measure = convergence::measure_certify(alg, &seq, &limit, t.eps, t.delta_tol)?;
    let bau = convergence::bau_certify(alg, &seq, &limit, t.delta, scenario.schedule[0], t.eps)?;
    let hull = if heis.is_continuous() {
        None
    } else {
        Some(convergence::convex_hull_residual(&heis, &x, t.hull_budget)?)
    };
    Ok(CertifyResult {
        verdict: worst([measure.verdict, bau.verdict]),
        observable: x,
        limit,
        measure,
        bau,
        hull,
    })
}

fn properties_task(scenario: &Scenario, action: &SemigroupAction) -> Result<PropertiesResult> {
    let seed = scenario.seed();
    let t = &scenario.tolerances;
    let semigroup_law = action.check_semigroup_law(t.lamperti_trials.min(8), seed)?;
    let contractions = action.check_contractions();
    let schr = action.schrodinger();
    let lamperti: Vec<CheckReport> = schr
        .discrete_maps()
        .iter()
        .map(|g| match maps::check_lamperti(g, t.lamperti_trials, seed) {
            Ok(r) => r,
            Err(e) => {
                let mut r = CheckReport::failed("lamperti", e.to_string());
                r.verdict = Verdict::Unknown;
                r
            }
        })
        .collect();
    let lamperti_verdict = worst(lamperti.iter().map(|r| r.verdict));
    let invariant_state = match &scenario.inputs.invariant_state {
        Some(y) => Some(invariant_state_check(&schr, y)?),
        None => None,
    };
    let expected = scenario.expect.lamperti;
    let lamperti_ok = expected.is_none_or(|e| e == lamperti_verdict);
    let verdict = worst(
        [action.commuting.verdict, semigroup_law.verdict]
            .into_iter()
            .chain(contractions.iter().map(|r| r.verdict))
            .chain(invariant_state.iter().map(|r| r.verdict))
            .map(non_fail)
            .chain([Verdict::from_bool(lamperti_ok)]),
    );
    Ok(PropertiesResult {
        commuting: action.commuting.clone(),
        semigroup_law,
        contractions,
        lamperti,
        lamperti_verdict,
        lamperti_expected: expected,
        invariant_state,
        verdict,
    })
}

/// `Y ≥ 0`, `τ(Y) = 1` and `‖γ(Y) − Y‖₁` small for every Schrödinger map.
fn invariant_state_check(schr: &SemigroupAction, y: &Operator) -> Result<CheckReport> {
    let alg = schr.algebra();
    let mut r = CheckReport::passed("invariant-state", "");
    r.detail = None;
    r.tolerance = 1e-10;
    if !y.is_positive() {
        r.verdict = Verdict::Fail;
        r.detail = Some("state density is not positive".into());
        r.witness = vec![y.clone()];
        return Ok(r);
    }
    let mass = algebra::trace(alg, y)?.re;
    r.measured = (mass - 1.0).abs();
    r.samples = 1;
    for g in schr.discrete_maps() {
        let dev = algebra::trace_norm(alg, &(&g.apply(y)? - y));
        r.measured = r.measured.max(dev);
        r.samples += 1;
    }
    if r.measured > r.tolerance {
        r.verdict = Verdict::Fail;
        r.witness = vec![y.clone()];
    }
    Ok(r)
}

fn outcome(task: Task, result: Result<TaskResult>) -> TaskOutcome {
    match result {
        Ok(res) => {
            let verdict = match &res {
                TaskResult::Decompose(d) => d.verdict,
                TaskResult::Mean(m) => m.verdict,
                TaskResult::Certify(c) => c.verdict,
                TaskResult::Stochastic(s) => s.verdict,
                TaskResult::Properties(p) => p.verdict,
            };
            TaskOutcome {
                task,
                status: TaskStatus::Completed,
                verdict,
                reason: None,
                result: Some(res),
            }
        }
        Err(e) => TaskOutcome {
            task,
            status: TaskStatus::Failed,
            verdict: Verdict::Fail,
            reason: Some(e.to_string()),
            result: None,
        },
    }
}

/// Runs every task in order. Task failures are recorded and do not stop
/// later tasks; only an invalid scenario aborts.
pub fn run(scenario: &Scenario) -> Result<Report> {
    let (_, action) = scenario.build()?;
    let mut action_checks = vec![action.commuting.clone()];
    action_checks.extend(action.check_contractions());
    let mut decomposition: Option<NeveuDecomposition> = None;
    let mut tasks = Vec::with_capacity(scenario.tasks.len());
    for &task in &scenario.tasks {
        if task != Task::GalleryItem && !action.is_commuting() {
            tasks.push(TaskOutcome {
                task,
                status: TaskStatus::Skipped,
                verdict: Verdict::Fail,
                reason: Some(format!(
                    "generators do not commute (deviation {:.3e})",
                    action.commuting.measured
                )),
                result: None,
            });
            continue;
        }
        let result = match task {
            Task::Decompose => neveu::neveu_decompose(&action, &scenario.neveu_options()).map(|d| {
                decomposition = Some(d.clone());
                TaskResult::Decompose(Box::new(d))
            }),
            Task::Mean => mean_task(scenario, &action).map(|m| TaskResult::Mean(Box::new(m))),
            Task::Certify => certify_task(scenario, &action).map(|c| TaskResult::Certify(Box::new(c))),
            Task::Stochastic => stochastic_task(scenario, &action, &mut decomposition),
            Task::GalleryItem => properties_task(scenario, &action).map(|p| TaskResult::Properties(Box::new(p))),
        };
        tasks.push(outcome(task, result));
    }
    let verdict = worst(
        action_checks
            .iter()
            .map(|r| non_fail(r.verdict))
            .chain(tasks.iter().map(|t| non_fail(t.verdict))),
    );
    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        generator: format!("nc-ergodic {}", env!("CARGO_PKG_VERSION")),
        scenario: scenario.clone(),
        action_checks,
        spectrum: spectrum(&action),
        tasks,
        verdict,
    })
}

fn stochastic_task(
    scenario: &Scenario,
    action: &SemigroupAction,
    decomposition: &mut Option<NeveuDecomposition>,
) -> Result<TaskResult> {
    if decomposition.is_none() {
        *decomposition = Some(neveu::neveu_decompose(action, &scenario.neveu_options())?);
    }
    let dec = decomposition.as_ref().expect("set above");
    let x = scenario
        .inputs
        .density
        .clone()
        .unwrap_or_else(|| action.algebra().uniform_density());
    let t = &scenario.tolerances;
    let r = convergence::stochastic_run(action, dec, &x, &scenario.schedule, t.eps, t.delta)?;
    Ok(TaskResult::Stochastic(Box::new(r)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    ReportJson,
    DecayCsv,
    SpectrumCsv,
}

impl OutputFormat {
    pub const ALL: [OutputFormat; 3] = [OutputFormat::ReportJson, OutputFormat::DecayCsv, OutputFormat::SpectrumCsv];

    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::ReportJson => "report-json",
            OutputFormat::DecayCsv => "decay-csv",
            OutputFormat::SpectrumCsv => "spectrum-csv",
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            OutputFormat::ReportJson => "report.json",
            OutputFormat::DecayCsv => "decay.csv",
            OutputFormat::SpectrumCsv => "spectrum.csv",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        OutputFormat::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown format {s:?} (expected report-json, decay-csv or spectrum-csv)"))
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub(crate) fn render(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::ReportJson => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        OutputFormat::DecayCsv => {
            let mut s = String::from("a,norm\n");
            for (a, norm) in report.decay().map(|d| d.points.as_slice()).unwrap_or_default() {
                s.push_str(&format!("{a},{norm:.16e}\n"));
            }
            s
        }
        OutputFormat::SpectrumCsv => {
            let mut s = String::from("generator,index,re,im,modulus\n");
            for e in &report.spectrum {
                s.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{:.16e}\n",
                    e.generator, e.index, e.re, e.im, e.modulus
                ));
            }
            s
        }
    }
}

/// Writes `<name>.<suffix>` into `dir` via a temporary file and a rename.
pub fn emit(report: &Report, format: OutputFormat, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.{}", file_stem(&report.scenario.name), format.suffix()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(render(report, format).as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
    Ok(path)
}
