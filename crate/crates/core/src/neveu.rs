//! Mean ergodic projection, invariant states and the decomposition of the
//! unit into an invariant-state part `e₁` and a weakly wandering part `e₂`.

use serde::{Deserialize, Serialize};

use crate::algebra::{self, Operator, Projection, TracialAlgebra};
use crate::dynamics::{FolnerScheme, Picture, SemigroupAction};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ONE};
use crate::maps::{self, CheckReport, SuperOperator, Verdict};
use crate::random::Sampler;
use crate::tol;

/// Schedule points `1, 2, 4, …, 64`.
pub fn default_schedule() -> Vec<usize> {
    (0..=6).map(|k| 1usize << k).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NeveuOptions {
    pub tol_fixed: f64,
    pub decay_tol: f64,
    pub schedule: Vec<usize>,
    pub tail_window: usize,
    /// Random faithful densities used to re-derive `e₁`.
    pub uniqueness_probes: usize,
    pub seed: u64,
}

impl Default for NeveuOptions {
    fn default() -> Self {
        Self {
            tol_fixed: tol::FIXED_SPACE,
            decay_tol: tol::DECAY,
            schedule: default_schedule(),
            tail_window: tol::TAIL_WINDOW,
            uniqueness_probes: 1,
            seed: 0,
        }
    }
}

/// Orthonormal basis (in vectorized coordinates) of the joint fixed space.
///
/// Uses `Γ_i − I` for discrete generators, every element for finite groups,
/// and `L_i` itself for continuous generators.
pub fn fixed_space(action: &SemigroupAction, tol_fixed: f64) -> Result<Vec<Operator>> {
    require_commuting(action)?;
    let alg = action.algebra();
    let d = alg.dim();
    let blocks: Vec<CMat> = kernel_operators(action);
    let scale = action
        .generators()
        .iter()
        .map(SuperOperator::superop_norm)
        .fold(1.0, f64::max);
    let mut stacked = CMat::zeros(d * blocks.len(), d);
    for (i, b) in blocks.iter().enumerate() {
        stacked.view_mut((i * d, 0), (d, d)).copy_from(b);
    }
    let basis = linalg::null_space(&stacked, tol_fixed * scale);
    basis
        .column_iter()
        .map(|col| Operator::from_vector(alg, &col.into_owned()))
        .collect()
}

fn kernel_operators(action: &SemigroupAction) -> Vec<CMat> {
    let d = action.algebra().dim();
    let id = CMat::identity(d, d);
    if action.is_continuous() {
        action.generators().iter().map(|l| l.matrix().clone()).collect()
    } else {
        action.generators().iter().map(|g| g.matrix() - &id).collect()
    }
}

fn require_commuting(action: &SemigroupAction) -> Result<()> {
    if !action.is_commuting() {
        return Err(Error::Precondition(format!(
            "generators fail the {} check (residual {:.3e})",
            action.commuting.check, action.commuting.measured
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionValidation {
    /// `(a, ‖A_a − E‖)` for the cross-check indices.
    pub norms: Vec<(usize, f64)>,
    /// `C` in the envelope `C/a`, fitted at the first index.
    pub fitted_c: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct MeanErgodicProjection {
    pub superoperator: SuperOperator,
    pub fixed_basis: Vec<Operator>,
    pub fixed_dims: Vec<usize>,
    pub idempotency_residual: f64,
    /// `max_i max(‖EΓ_i − E‖, ‖Γ_iE − E‖)`.
    pub invariance_residual: f64,
    pub validation: ProjectionValidation,
}

impl MeanErgodicProjection {
    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        self.superoperator.apply(x)
    }
}

/// Indices at which the algebraic projection is compared with Cesàro
/// averages.
const VALIDATION_INDICES: [usize; 2] = [16, 64];

/// `E = E₁⋯E_d` where `E_i` is the spectral projection of `Γ_i` at 1 (of
/// `L_i` at 0 for continuous actions), cross-checked against `A_16`, `A_64`.
pub fn mean_ergodic_projection(action: &SemigroupAction, tol_fixed: f64) -> Result<MeanErgodicProjection> {
    require_commuting(action)?;
    let alg = action.algebra();
    let d = alg.dim();
    let gens = action.generators();

    let mut fixed_dims = Vec::new();
    let matrix = if let FolnerScheme::FiniteGroup { .. } = action.scheme() {
        let avg = action.average_super(1)?;
        fixed_dims.push(rank_of_projection(avg.matrix()));
        avg.matrix().clone()
    } else {
        let lambda = if action.is_continuous() { c(0.0) } else { ONE };
        let mut acc = CMat::identity(d, d);
        for g in gens {
            let thr = tol_fixed * g.superop_norm().max(1.0);
            let p = linalg::riesz_projection(g.matrix(), lambda, thr)?;
            fixed_dims.push(rank_of_projection(&p));
            acc = p * acc;
        }
        acc
    };
    let e = gens[0].with_matrix(matrix);

    let norm_e = e.superop_norm().max(1.0);
    let idempotency_residual = linalg::spectral_norm(&(e.matrix() * e.matrix() - e.matrix()));
    let mut invariance_residual: f64 = 0.0;
    for g in action.discrete_maps() {
        let left = linalg::spectral_norm(&(e.matrix() * g.matrix() - e.matrix()));
        let right = linalg::spectral_norm(&(g.matrix() * e.matrix() - e.matrix()));
        invariance_residual = invariance_residual.max(left).max(right);
    }
    let bound = tol::FIXED_SPACE * norm_e;
    if idempotency_residual > bound || invariance_residual > bound {
        return Err(Error::Validation(format!(
            "projection residuals too large: ‖E² − E‖ = {idempotency_residual:.3e}, invariance {invariance_residual:.3e}"
        )));
    }

    let mut norms = Vec::new();
    for a in VALIDATION_INDICES {
        let avg = action.average_super(a)?;
        norms.push((a, linalg::spectral_norm(&(avg.matrix() - e.matrix()))));
    }
    let (a0, r0) = norms[0];
    let fitted_c = a0 as f64 * r0;
    let ok = norms
        .iter()
        .all(|&(a, r)| r <= 10.0 * fitted_c / a as f64 + 1e-8);
    if !ok {
        return Err(Error::Validation(format!(
            "Cesàro averages disagree with the spectral projection: {norms:?} (C = {fitted_c:.3e})"
        )));
    }

    let fixed_basis = fixed_space(action, tol_fixed)?;
    Ok(MeanErgodicProjection {
        superoperator: positive_projection(e, action),
        fixed_basis,
        fixed_dims,
        idempotency_residual,
        invariance_residual,
        validation: ProjectionValidation {
            norms,
            fitted_c,
            verdict: Verdict::Pass,
        },
    })
}

fn positive_projection(mut e: SuperOperator, action: &SemigroupAction) -> SuperOperator {
    // A limit of averages of positive maps is positive.
    let maps = action.discrete_maps();
    if maps.iter().all(|m| m.attestations.is_positive()) {
        e.attestations.positivity_sampled = maps::Attestation {
            verdict: Verdict::Pass,
            witness: None,
        };
    }
    e
}

fn rank_of_projection(p: &CMat) -> usize {
    // Trace of an idempotent is its rank.
    p.trace().re.round().max(0.0) as usize
}

/// `Y = E_*(φ₀)/τ(E_*(φ₀))`, or `None` when no invariant normal state exists.
///
/// `e_star` must be the Schrödinger-picture mean ergodic projection.
pub fn invariant_state_from(alg: &TracialAlgebra, e_star: &SuperOperator, phi0: &Operator) -> Result<Option<Operator>> {
    alg.check(phi0)?;
    if !phi0.is_positive() {
        return Err(Error::NotPositive {
            min_eigenvalue: algebra::min_eigenvalue(&phi0.hermitian_part()),
        });
    }
    let min = algebra::min_eigenvalue(phi0);
    if min <= tol::POSITIVE * algebra::op_norm(phi0) {
        return Err(Error::NotFaithful { min_eigenvalue: min });
    }
    let image = e_star.apply(phi0)?.hermitian_part();
    let mass = algebra::trace_unchecked(alg, &image).re;
    if mass <= tol::ABSENT_STATE {
        return Ok(None);
    }
    Ok(Some(image.scale(1.0 / mass)))
}

/// Invariant density obtained from a faithful initial density `φ₀`.
pub fn invariant_state(action: &SemigroupAction, phi0: &Operator, tol_fixed: f64) -> Result<Option<Operator>> {
    let schr = action.schrodinger();
    let e = mean_ergodic_projection(&schr, tol_fixed)?;
    invariant_state_from(action.algebra(), &e.superoperator, phi0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    /// `(a, ‖A_a(x)‖)` over the schedule.
    pub points: Vec<(usize, f64)>,
    /// Log-log slope over the tail window, when defined.
    pub slope: Option<f64>,
    pub tail_decreasing: bool,
    pub final_norm: f64,
    pub decay_tol: f64,
    pub verdict: Verdict,
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(_, y)| !(y > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|&(a, _)| (a as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Evaluates `‖A_a(x)‖` (Heisenberg picture) on the schedule and decides
/// whether `x` is weakly wandering.
pub fn weakly_wandering_certificate(
    action: &SemigroupAction,
    x: &Operator,
    schedule: &[usize],
    decay_tol: f64,
    tail_window: usize,
) -> Result<DecayReport> {
    let alg = action.algebra();
    alg.check(x)?;
    if !x.is_positive() {
        return Err(Error::NotPositive {
            min_eigenvalue: algebra::min_eigenvalue(&x.hermitian_part()),
        });
    }
    check_schedule(schedule)?;
    let heis = action.heisenberg();
    let mut points = Vec::with_capacity(schedule.len());
    for &a in schedule {
        points.push((a, algebra::op_norm(&heis.average(x, a)?)));
    }
    Ok(decay_verdict(points, decay_tol, tail_window))
}

pub(crate) fn decay_verdict(points: Vec<(usize, f64)>, decay_tol: f64, tail_window: usize) -> DecayReport {
    let final_norm = points.last().map_or(0.0, |p| p.1);
    let tail = &points[points.len().saturating_sub(tail_window.max(2))..];
    let slope = loglog_slope(tail);
    let tail_decreasing = tail.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
    let ok = final_norm <= decay_tol || (tail_decreasing && slope.is_some_and(|s| s <= tol::DECAY_SLOPE));
    DecayReport {
        points,
        slope,
        tail_decreasing,
        final_norm,
        decay_tol,
        verdict: Verdict::from_bool(ok),
    }
}

pub(crate) fn check_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation(format!(
            "schedule must be non-empty, positive and strictly increasing: {schedule:?}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub probes: usize,
    pub ranks_agree: bool,
    pub max_deviation: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NeveuDecomposition {
    pub e1: Projection,
    pub e2: Projection,
    /// Invariant density with support `e₁`; absent when `e₁ = 0`.
    pub invariant_density: Option<Operator>,
    pub wandering_witness: Operator,
    pub decay: DecayReport,
    pub uniqueness: UniquenessReport,
    pub checks: Vec<CheckReport>,
    pub tol_fixed: f64,
    pub verdict: Verdict,
}

fn bound_check(name: &str, measured: f64, tolerance: f64) -> CheckReport {
    let mut r = CheckReport::passed(name, "");
    r.detail = None;
    r.measured = measured;
    r.tolerance = tolerance;
    r.samples = 1;
    r.verdict = Verdict::from_bool(measured <= tolerance);
    r
}

fn e1_from(alg: &TracialAlgebra, e_star: &SuperOperator, phi: &Operator) -> Result<(Projection, Option<Operator>)> {
    match invariant_state_from(alg, e_star, phi)? {
        Some(y) => Ok((algebra::support(alg, &y)?, Some(y))),
        None => Ok((Projection::zero(alg), None)),
    }
}

/// Splits the unit as `e₁ + e₂` with `e₁` the support of the maximal
/// invariant state and `e₂` weakly wandering.
pub fn neveu_decompose(action: &SemigroupAction, options: &NeveuOptions) -> Result<NeveuDecomposition> {
    require_commuting(action)?;
    check_schedule(&options.schedule)?;
    let alg = action.algebra().clone();
    let heis = action.heisenberg();
    let schr = action.schrodinger();

    let mut checks = Vec::new();
    for (i, r) in heis.check_contractions().into_iter().enumerate() {
        if r.verdict.is_fail() {
            return Err(Error::Precondition(format!(
                "generator {i} is not a contraction (measured {:.6})",
                r.measured
            )));
        }
        let mut r = r;
        r.check = format!("contraction[{i}]");
        checks.push(r);
    }

    let e_heis = mean_ergodic_projection(&heis, options.tol_fixed)?;
    let e_star = maps::dual(&e_heis.superoperator);

    let phi0 = alg.uniform_density();
    let (e1, y) = e1_from(&alg, &e_star, &phi0)?;
    let e2 = e1.complement(&alg);
    let x0 = e2.as_operator().clone();

    let decay = weakly_wandering_certificate(&heis, &x0, &options.schedule, options.decay_tol, options.tail_window)?;

    let mut sampler = Sampler::new(options.seed);
    let mut ranks_agree = true;
    let mut max_deviation: f64 = 0.0;
    for _ in 0..options.uniqueness_probes {
        let phi = sampler.faithful_density(&alg);
        let (other, _) = e1_from(&alg, &e_star, &phi)?;
        ranks_agree &= other.ranks() == e1.ranks();
        max_deviation = max_deviation.max(algebra::op_norm(&(other.as_operator() - e1.as_operator())));
    }
    let uniqueness = UniquenessReport {
        probes: options.uniqueness_probes,
        ranks_agree,
        max_deviation,
        verdict: Verdict::from_bool(ranks_agree && max_deviation <= tol::UNIQUENESS),
    };

    let schr_maps = schr.discrete_maps();
    let heis_maps = heis.discrete_maps();
    if let Some(y) = &y {
        let dev = schr_maps
            .iter()
            .map(|g| algebra::op_norm(&(&g.apply_unchecked(y) - y)))
            .fold(0.0, f64::max);
        checks.push(bound_check("invariant-density", dev, tol::INVARIANCE));
        let tr = (algebra::trace_unchecked(&alg, y) - ONE).norm();
        checks.push(bound_check("density-normalized", tr, tol::INVARIANCE));
        let pairing = algebra::pairing(&alg, y, &x0).norm();
        checks.push(bound_check("state-annihilates-witness", pairing, 1e-10));
    }
    let overlap = algebra::op_norm(&(e1.as_operator() * &x0));
    checks.push(bound_check("supports-orthogonal", overlap, 1e-10));
    let e_of_e2 = algebra::op_norm(&e_heis.apply(&x0)?);
    checks.push(bound_check("projection-kills-e2", e_of_e2, tol::INVARIANCE));

    let mut corner: f64 = 0.0;
    let mut overshoot: f64 = 0.0;
    for g in &heis_maps {
        let img = g.apply_unchecked(&x0);
        let inside = &(&x0 * &img) * &x0;
        corner = corner.max(algebra::op_norm(&(&img - &inside)));
        overshoot = overshoot.max(algebra::op_norm(&img) - 1.0);
    }
    checks.push(bound_check("e2-corner-invariant", corner, tol::INVARIANCE));
    checks.push(bound_check("e2-image-bounded", overshoot.max(0.0), tol::CONTRACTION));

    let mut leak: f64 = 0.0;
    let mut probe = Sampler::new(options.seed ^ 0x9e37_79b9);
    let e1op = e1.as_operator();
    for _ in 0..4 {
        let x = probe.positive(&alg);
        let corner_x = &(e1op * &x) * e1op;
        for g in &schr_maps {
            let img = g.apply_unchecked(&corner_x);
            let outside = &(&x0 * &img) * &x0;
            leak = leak.max(algebra::op_norm(&outside) / algebra::op_norm(&x).max(1.0));
        }
    }
    checks.push(bound_check("e1-corner-preserved", leak, tol::INVARIANCE));

    let verdict = Verdict::from_bool(
        decay.verdict.is_pass() && uniqueness.verdict.is_pass() && checks.iter().all(|r| !r.verdict.is_fail()),
    );
    Ok(NeveuDecomposition {
        e1,
        e2,
        invariant_density: y,
        wandering_witness: x0,
        decay,
        uniqueness,
        checks,
        tol_fixed: options.tol_fixed,
        verdict,
    })
}

/// `min_{1≤a≤a_max} τ(φ · A_a(p))` and the minimizing `a`.
pub fn inf_profile(action: &SemigroupAction, phi: &Operator, p: &Projection, a_max: usize) -> Result<(f64, usize)> {
    let alg = action.algebra();
    alg.check(phi)?;
    if a_max == 0 {
        return Err(Error::Precondition("a_max must be at least 1".into()));
    }
    let heis = action.heisenberg();
    let mut best = (f64::INFINITY, 1);
    for a in 1..=a_max {
        let v = algebra::pairing(alg, phi, &heis.average(p.as_operator(), a)?).re;
        if v < best.0 {
            best = (v, a);
        }
    }
    Ok(best)
}

/// `Σ_j w_j q_j` with default weights `w_j = 2^{−j}` (`j ≥ 1`).
pub fn wandering_sum(alg: &TracialAlgebra, projections: &[Projection], weights: Option<&[f64]>) -> Result<Operator> {
    if let Some(w) = weights {
        if w.len() != projections.len() {
            return Err(Error::shape(format!("{} weights", projections.len()), w.len()));
        }
    }
    let mut acc = alg.zero();
    for (j, q) in projections.iter().enumerate() {
        alg.check(q.as_operator())?;
        let w = weights.map_or(0.5f64.powi(j as i32 + 1), |w| w[j]);
        acc = &acc + &q.as_operator().scale(w);
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WanderingSum {
    pub sum: Operator,
    pub individual: Vec<DecayReport>,
    pub combined: DecayReport,
    /// False when every summand certifies but the sum does not.
    pub consistent: bool,
}

/// [`wandering_sum`] with a decay certificate for each summand and for the
/// sum.
pub fn wandering_sum_certified(
    action: &SemigroupAction,
    projections: &[Projection],
    schedule: &[usize],
    decay_tol: f64,
    tail_window: usize,
) -> Result<WanderingSum> {
    let alg = action.algebra();
    let sum = wandering_sum(alg, projections, None)?;
    let individual = projections
        .iter()
        .map(|q| weakly_wandering_certificate(action, q.as_operator(), schedule, decay_tol, tail_window))
        .collect::<Result<Vec<_>>>()?;
    let combined = weakly_wandering_certificate(action, &sum, schedule, decay_tol, tail_window)?;
    let all = individual.iter().all(|r| r.verdict.is_pass());
    Ok(WanderingSum {
        consistent: !all || combined.verdict.is_pass(),
        sum,
        individual,
        combined,
    })
}

/// Convenience: the decomposition of a Heisenberg-picture action built from
/// a single generator.
pub fn decompose_single(map: SuperOperator, options: &NeveuOptions) -> Result<NeveuDecomposition> {
    let action = SemigroupAction::discrete(Picture::Heisenberg, vec![map])?;
    neveu_decompose(&action, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::maps::{amplitude_damping_kraus, from_classical, from_conjugation, from_kraus};

    fn ad_action(g: f64) -> SemigroupAction {
        let alg = TracialAlgebra::matrix(2);
        SemigroupAction::discrete(Picture::Heisenberg, vec![from_kraus(&alg, &amplitude_damping_kraus(g)).unwrap()])
            .unwrap()
    }

    fn identity_action(alg: &TracialAlgebra) -> SemigroupAction {
        SemigroupAction::discrete(Picture::Heisenberg, vec![SuperOperator::identity(alg)]).unwrap()
    }

    #[test]
    fn fixed_space_dimensions() {
        let m2 = TracialAlgebra::matrix(2);
        assert_eq!(fixed_space(&identity_action(&m2), 1e-9).unwrap().len(), 4);
        let z = Operator::from_diagonal(&m2, &[1.0, -1.0]).unwrap();
        let act = SemigroupAction::discrete(Picture::Heisenberg, vec![from_conjugation(&m2, &z).unwrap()]).unwrap();
        assert_eq!(fixed_space(&act, 1e-9).unwrap().len(), 2);
        let basis = fixed_space(&ad_action(0.5), 1e-9).unwrap();
        assert_eq!(basis.len(), 1);
        let b = &basis[0];
        let ratio = b.block(0)[(0, 0)];
        assert!(b.max_abs_diff(&m2.identity().scale_complex(ratio)) < 1e-12);
    }

    #[test]
    fn mean_projection_examples() {
        let m2 = TracialAlgebra::matrix(2);
        let e = mean_ergodic_projection(&identity_action(&m2), 1e-9).unwrap();
        assert!(linalg::max_abs_diff(e.superoperator.matrix(), &CMat::identity(4, 4)) < 1e-12);

        let z = Operator::from_diagonal(&m2, &[1.0, -1.0]).unwrap();
        let act = SemigroupAction::discrete(Picture::Heisenberg, vec![from_conjugation(&m2, &z).unwrap()]).unwrap();
        let e = mean_ergodic_projection(&act, 1e-9).unwrap();
        assert!(algebra::op_norm(&e.apply(&m2.unit(0, 0, 1)).unwrap()) < 1e-12);
        assert!(e.apply(&m2.unit(0, 1, 1)).unwrap().max_abs_diff(&m2.unit(0, 1, 1)) < 1e-12);

        let e = mean_ergodic_projection(&ad_action(0.5), 1e-9).unwrap();
        assert!(algebra::op_norm(&e.apply(&m2.unit(0, 1, 1)).unwrap()) < 1e-12);
        assert!(e.apply(&m2.unit(0, 0, 0)).unwrap().max_abs_diff(&m2.identity()) < 1e-12);
        assert!(e.idempotency_residual < 1e-9 && e.invariance_residual < 1e-9);
    }

    #[test]
    fn invariant_state_examples() {
        let m2 = TracialAlgebra::matrix(2);
        let y = invariant_state(&identity_action(&m2), &m2.uniform_density(), 1e-9)
            .unwrap()
            .unwrap();
        assert!(y.max_abs_diff(&m2.uniform_density()) < 1e-12);
        let y = invariant_state(&ad_action(0.5), &m2.uniform_density(), 1e-9).unwrap().unwrap();
        // Ground state density with τ(Y) = 1 on normalized M₂.
        assert!(y.max_abs_diff(&m2.unit(0, 0, 0).scale(2.0)) < 1e-12);

        let c2 = TracialAlgebra::commutative(2);
        let leaking = from_classical(&c2, &[vec![0.0, 0.5], vec![0.0, 0.0]]).unwrap();
        let act = SemigroupAction::discrete(Picture::Heisenberg, vec![leaking]).unwrap();
        assert!(invariant_state(&act, &c2.uniform_density(), 1e-9).unwrap().is_none());
    }

    #[test]
    fn invariant_state_rejects_non_faithful_density() {
        let m2 = TracialAlgebra::matrix(2);
        let r = invariant_state(&ad_action(0.5), &m2.unit(0, 0, 0).scale(2.0), 1e-9);
        assert!(matches!(r, Err(Error::NotFaithful { .. })));
    }

    #[test]
    fn decomposition_of_identity() {
        let m2 = TracialAlgebra::matrix(2);
        let d = neveu_decompose(&identity_action(&m2), &NeveuOptions::default()).unwrap();
        assert_eq!(d.e1.rank(), 2);
        assert!(d.e2.is_zero());
        assert!(d.decay.points.iter().all(|&(_, n)| n == 0.0));
        assert!(d.verdict.is_pass(), "{:?}", d.checks);
    }

    #[test]
    fn decomposition_of_amplitude_damping() {
        let m2 = TracialAlgebra::matrix(2);
        let d = neveu_decompose(&ad_action(0.5), &NeveuOptions::default()).unwrap();
        assert!(d.e1.as_operator().max_abs_diff(&m2.unit(0, 0, 0)) < 1e-12);
        assert!(d.e2.as_operator().max_abs_diff(&m2.unit(0, 1, 1)) < 1e-12);
        let (_, n8) = d.decay.points[3];
        assert!((n8 - (1.0 - 0.5f64.powi(8)) / 4.0).abs() < 1e-12);
        assert!(d.decay.verdict.is_pass());
        assert!(d.verdict.is_pass(), "{:?}", d.checks);
    }

    #[test]
    fn decomposition_of_transient_chain() {
        let c3 = TracialAlgebra::commutative(3);
        let k = from_classical(&c3, &[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let d = decompose_single(k, &NeveuOptions::default()).unwrap();
        let expect = Operator::from_diagonal(&c3, &[1.0, 0.0, 1.0]).unwrap();
        assert!(d.e1.as_operator().max_abs_diff(&expect) < 1e-12);
        assert!(d.verdict.is_pass());
    }

    #[test]
    fn weakly_wandering_examples() {
        let act = ad_action(0.5);
        let alg = act.algebra().clone();
        let sched = default_schedule();
        let zero = weakly_wandering_certificate(&act, &alg.zero(), &sched, 1e-6, 5).unwrap();
        assert!(zero.verdict.is_pass());
        let fixed = weakly_wandering_certificate(&act, &alg.identity(), &sched, 1e-6, 5).unwrap();
        assert!(fixed.verdict.is_fail());
        let e11 = weakly_wandering_certificate(&act, &alg.unit(0, 1, 1), &sched, 1e-6, 5).unwrap();
        assert!(e11.verdict.is_pass());
        assert!((e11.slope.unwrap() + 1.0).abs() < 0.05);
        for &(a, n) in &e11.points {
            assert!((n - (1.0 - 0.5f64.powi(a as i32)) / (a as f64 * 0.5)).abs() < 1e-10);
        }
        assert!(weakly_wandering_certificate(&act, &alg.identity().scale(-1.0), &sched, 1e-6, 5).is_err());
    }

    #[test]
    fn inf_profile_examples() {
        let act = ad_action(0.5);
        let alg = act.algebra().clone();
        let phi = alg.uniform_density();
        let e11 = Projection::from_operator(&alg, alg.unit(0, 1, 1)).unwrap();
        let (v, a) = inf_profile(&act, &phi, &e11, 40).unwrap();
        assert_eq!(a, 40);
        assert!(v < 0.05);
        let one = Projection::identity(&alg);
        let (v, _) = inf_profile(&identity_action(&alg), &phi, &one, 5).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wandering_sum_examples() {
        let alg = TracialAlgebra::commutative(3);
        let q1 = Projection::from_operator(&alg, Operator::from_diagonal(&alg, &[1.0, 0.0, 0.0]).unwrap()).unwrap();
        let q2 = Projection::from_operator(&alg, Operator::from_diagonal(&alg, &[0.0, 1.0, 0.0]).unwrap()).unwrap();
        let s = wandering_sum(&alg, std::slice::from_ref(&q1), None).unwrap();
        assert!(s.max_abs_diff(&q1.as_operator().scale(0.5)) < 1e-15);
        let s = wandering_sum(&alg, &[q1, q2], None).unwrap();
        let supp = algebra::support(&alg, &s).unwrap();
        assert_eq!(supp.rank(), 2);

        let act = ad_action(0.5);
        let m2 = act.algebra().clone();
        let e11 = Projection::from_operator(&m2, m2.unit(0, 1, 1)).unwrap();
        let w = wandering_sum_certified(&act, &[e11], &default_schedule(), 1e-6, 5).unwrap();
        assert!(w.combined.verdict.is_pass() && w.consistent);
    }

    #[test]
    fn non_commuting_actions_are_refused() {
        let m2 = TracialAlgebra::matrix(2);
        let x = Operator::from_blocks(&m2, vec![CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])]).unwrap();
        let h = Operator::from_blocks(
            &m2,
            vec![CMat::from_row_slice(2, 2, &[ONE, ONE, ONE, -ONE]) * c(1.0 / 2f64.sqrt())],
        )
        .unwrap();
        let act = SemigroupAction::discrete(
            Picture::Heisenberg,
            vec![from_conjugation(&m2, &x).unwrap(), from_conjugation(&m2, &h).unwrap()],
        )
        .unwrap();
        assert!(!act.is_commuting());
        assert!(matches!(neveu_decompose(&act, &NeveuOptions::default()), Err(Error::Precondition(_))));
    }
}
