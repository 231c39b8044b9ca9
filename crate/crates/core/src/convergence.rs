//! Certificates for convergence in measure and bilateral almost uniform
//! (b.a.u.) convergence, built from explicit spectral projections.

use serde::{Deserialize, Serialize};

use crate::algebra::{self, Interval, Operator, Projection, TracialAlgebra};
use crate::dynamics::{FolnerScheme, FolnerSet, SemigroupAction};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::maps::{self, CheckReport, Verdict};
use crate::neveu::{self, NeveuDecomposition};
use crate::tol;

/// Slack added to `ε` when re-verifying an emitted `(e, ε)` pair.
const SOUNDNESS_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub a: usize,
    /// `δ_a = τ(1 − e_a)`.
    pub delta: f64,
    pub rank: usize,
    /// `‖e_a D_a e_a‖`.
    pub norm: f64,
    #[serde(skip)]
    pub projection: Option<Projection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureCertificate {
    pub eps: f64,
    pub delta_tol: f64,
    pub records: Vec<MeasureRecord>,
    /// First index after which every `δ_a ≤ δ_tol`.
    pub n0: Option<usize>,
    /// Largest `‖e_a D_a e_a‖ − ε` seen on re-verification (≤ 0 when sound).
    pub soundness_margin: f64,
    pub verdict: Verdict,
}

/// `e = χ_[0,ε)(|D|)`: the part of the spectrum strictly below `ε`.
fn small_part(d: &Operator, eps: f64) -> Projection {
    let abs = algebra::abs(d);
    algebra::eigen_filter(&abs, |v| Interval::below(eps).contains(v))
}

fn check_sequence(alg: &TracialAlgebra, sequence: &[(usize, Operator)], limit: &Operator) -> Result<()> {
    alg.check(limit)?;
    for (_, x) in sequence {
        alg.check(x)?;
    }
    if sequence.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Validation("sequence indices must be strictly increasing".into()));
    }
    Ok(())
}

/// Convergence in measure: for each `a`, the projection
/// `e_a = χ_[0,ε)(|D_a|)` with `D_a = X_a − X` satisfies `‖e_a D_a e_a‖ < ε`,
/// and `δ_a = τ(1 − e_a)` must vanish (≤ `δ_tol`) along the tail.
pub fn measure_certify(
    alg: &TracialAlgebra,
    sequence: &[(usize, Operator)],
    limit: &Operator,
    eps: f64,
    delta_tol: f64,
) -> Result<MeasureCertificate> {
    if !(eps > 0.0) {
        return Err(Error::Precondition("ε must be positive".into()));
    }
    check_sequence(alg, sequence, limit)?;
    let mut records = Vec::with_capacity(sequence.len());
    let mut margin = f64::NEG_INFINITY;
    for (a, x) in sequence {
        let d = x - limit;
        let e = small_part(&d, eps);
        let eo = e.as_operator();
        let norm = algebra::op_norm(&(&(eo * &d) * eo));
        margin = margin.max(norm - eps);
        records.push(MeasureRecord {
            a: *a,
            delta: e.complement(alg).trace(alg),
            rank: e.rank(),
            norm,
            projection: Some(e),
        });
    }
    let n0 = tail_start(&records, |r| r.delta <= delta_tol);
    let sound = margin <= SOUNDNESS_SLACK;
    Ok(MeasureCertificate {
        eps,
        delta_tol,
        records,
        n0,
        soundness_margin: margin,
        verdict: Verdict::from_bool(sound && n0.is_some()),
    })
}

/// Index of the first record after which `ok` holds throughout.
fn tail_start(records: &[MeasureRecord], ok: impl Fn(&MeasureRecord) -> bool) -> Option<usize> {
    let k = records.iter().rposition(|r| !ok(r)).map_or(0, |k| k + 1);
    records.get(k).map(|r| r.a)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BauCertificate {
    pub e: Projection,
    /// `τ(1 − e)`.
    pub complement_trace: f64,
    pub n0: usize,
    pub theta: f64,
    pub eps: f64,
    /// `(t, sup_{a ≥ t} ‖e D_a e‖)` for each tail start `t ≥ n0`.
    pub tail_sups: Vec<(usize, f64)>,
    pub verdict: Verdict,
}

impl BauCertificate {
    /// First tail start whose sup is below `ε`.
    pub fn burn_in(&self) -> Option<usize> {
        self.tail_sups
            .iter()
            .find(|(_, s)| *s < self.eps - tol::INTERVAL_EDGE)
            .map(|(t, _)| *t)
    }
}

/// b.a.u. convergence: a single projection `e = χ_[0,θ](S)` with
/// `S = Σ_k 2^{−k} |D_{a_k}|` over the tail `a_k ≥ n0` (k counts schedule
/// positions), `θ` minimal with `τ(1 − e) ≤ budget`. Passes when the tail
/// sups of `‖e D_a e‖` drop below `ε`.
pub fn bau_certify(
    alg: &TracialAlgebra,
    sequence: &[(usize, Operator)],
    limit: &Operator,
    delta_budget: f64,
    n0: usize,
    eps: f64,
) -> Result<BauCertificate> {
    if !(delta_budget > 0.0 && delta_budget < 1.0) {
        return Err(Error::Precondition(format!("budget {delta_budget} outside (0, 1)")));
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition("ε must be positive".into()));
    }
    check_sequence(alg, sequence, limit)?;
    let tail: Vec<(usize, Operator)> = sequence
        .iter()
        .filter(|(a, _)| *a >= n0)
        .map(|(a, x)| (*a, x - limit))
        .collect();
    if tail.is_empty() {
        return Err(Error::Precondition(format!("no sequence terms at or after n0 = {n0}")));
    }
    let mut s = alg.zero();
    for (k, (_, d)) in tail.iter().enumerate() {
        s = &s + &algebra::abs(d).scale(0.5f64.powi(k as i32));
    }
    let s = s.hermitian_part();
    let theta = minimal_threshold(alg, &s, delta_budget)?;
    let e = algebra::eigen_filter(&s, |v| v <= theta);
    let eo = e.as_operator();
    let norms: Vec<f64> = tail
        .iter()
        .map(|(_, d)| algebra::op_norm(&(&(eo * d) * eo)))
        .collect();
    let mut tail_sups = Vec::with_capacity(tail.len());
    let mut running: f64 = 0.0;
    for (k, (a, _)) in tail.iter().enumerate().rev() {
        running = running.max(norms[k]);
        tail_sups.push((*a, running));
    }
    tail_sups.reverse();
    let last = tail_sups.last().map_or(0.0, |t| t.1);
    Ok(BauCertificate {
        complement_trace: e.complement(alg).trace(alg),
        e,
        n0,
        theta,
        eps,
        verdict: Verdict::from_bool(last < eps - tol::INTERVAL_EDGE),
        tail_sups,
    })
}

/// Smallest eigenvalue `θ` of `s` (or 0) whose upper spectral mass
/// `τ(χ_(θ,∞)(s))` fits the budget.
fn minimal_threshold(alg: &TracialAlgebra, s: &Operator, budget: f64) -> Result<f64> {
    let mut spectrum: Vec<(f64, f64)> = Vec::new();
    for (b, w) in s.blocks().iter().zip(alg.weights()) {
        spectrum.extend(linalg::eigh(b).0.into_iter().map(|v| (v.max(0.0), *w)));
    }
    spectrum.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut candidates = vec![0.0];
    candidates.extend(spectrum.iter().map(|p| p.0));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for theta in candidates {
        let mass: f64 = spectrum.iter().filter(|p| p.0 > theta).map(|p| p.1).sum();
        if mass <= budget + 1e-15 {
            return Ok(theta);
        }
    }
    Err(Error::BudgetInfeasible(format!("no threshold meets budget {budget}")))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StochasticRow {
    pub a: usize,
    /// `τ(1 − r_a)` with `r_a = p + q_a`.
    pub complement_trace: f64,
    /// `‖r_a e₁A_a(X)e₂ r_a‖`.
    pub cross_norm: f64,
    pub cross_bound: f64,
    /// Whether `a` lies past both burn-ins, so the bound is asserted.
    pub asserted: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StochasticReport {
    pub eps: f64,
    pub delta: f64,
    /// `X̄ = E_*(X)`.
    pub limit: Operator,
    /// `‖E_*(X) − E_*(e₁Xe₁)‖₁`; zero when the corners do not mix.
    pub corner_limit_gap: f64,
    pub bau: BauCertificate,
    pub measure: MeasureCertificate,
    pub burn_in: Option<usize>,
    pub rows: Vec<StochasticRow>,
    /// Pass/Fail when `X ≥ 0`; Unknown otherwise (the bound needs positivity).
    pub cross_term: Verdict,
    pub violations: usize,
    pub corner_checks: Vec<CheckReport>,
    pub verdict: Verdict,
}

/// Runs the stochastic ergodic theorem on the corners of `e₁ + e₂ = 1`:
/// the `e₁` corner converges b.a.u. to `X̄`, the `e₂` corner converges to 0
/// in measure, and the off-diagonal corner is controlled by the projections
/// `r_a = p + q_a`.
pub fn stochastic_run(
    action: &SemigroupAction,
    decomposition: &NeveuDecomposition,
    x: &Operator,
    schedule: &[usize],
    eps: f64,
    delta: f64,
) -> Result<StochasticReport> {
    neveu::check_schedule(schedule)?;
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition("need ε > 0 and δ ∈ (0, 1)".into()));
    }
    let schr = action.schrodinger();
    let alg = schr.algebra().clone();
    alg.check(x)?;
    let e1 = decomposition.e1.as_operator();
    let e2 = decomposition.e2.as_operator();
    alg.check(e1)?;

    let mut corner_checks = Vec::new();
    if !schr.is_continuous() && all_lamperti(&schr)? {
        for i in 0..schr.generators().len() {
            let r = corner_compatibility(&schr, decomposition, x, i)?;
            if r.verdict.is_fail() {
                return Err(Error::Validation(format!(
                    "corner compatibility fails for Lamperti generator {i} (deviation {:.3e})",
                    r.measured
                )));
            }
            corner_checks.push(r);
        }
    }

    let e_star = neveu::mean_ergodic_projection(&schr, decomposition.tol_fixed)?.superoperator;
    let limit = e_star.apply(x)?;
    let corner_limit = e_star.apply(&(&(e1 * x) * e1))?;
    let corner_limit_gap = algebra::trace_norm(&alg, &(&limit - &corner_limit));

    let mut c11 = Vec::with_capacity(schedule.len());
    let mut c22 = Vec::with_capacity(schedule.len());
    let mut c12 = Vec::with_capacity(schedule.len());
    for &a in schedule {
        let avg = schr.average(x, a)?;
        c11.push((a, &(e1 * &avg) * e1));
        c22.push((a, &(e2 * &avg) * e2));
        c12.push((a, &(e1 * &avg) * e2));
    }
    let limit11 = &(e1 * &limit) * e1;

    let bau = bau_certify(&alg, &c11, &limit11, delta / 2.0, schedule[0], eps)?;
    let measure = measure_certify(&alg, &c22, &alg.zero(), eps, delta / 2.0)?;

    // p = e·e₁ = e₁ − (1 − e), since 1 − e sits inside the e₁ corner.
    let p = Projection::from_operator(&alg, &(e1 + bau.e.as_operator()) - &alg.identity())?;
    let pbar = algebra::op_norm(&(&(p.as_operator() * &limit) * p.as_operator()));
    let bound = (eps * (eps + pbar)).sqrt() + 1e-10;
    let positive = x.is_positive();
    let burn_in = match (bau.burn_in(), measure.n0) {
        (Some(b), Some(m)) => Some(b.max(m)),
        _ => None,
    };

    let mut rows = Vec::with_capacity(schedule.len());
    let mut violations = 0;
    let mut complement_ok = true;
    for (k, rec) in measure.records.iter().enumerate() {
        let e_a = rec.projection.as_ref().expect("kept in memory");
        let q = Projection::from_operator(&alg, &(e2 + e_a.as_operator()) - &alg.identity())?;
        let r = p.orthogonal_sum(&q)?;
        let ro = r.as_operator();
        let cross_norm = algebra::op_norm(&(&(ro * &c12[k].1) * ro));
        let asserted = burn_in.is_some_and(|b| rec.a >= b);
        let complement_trace = r.complement(&alg).trace(&alg);
        if asserted {
            complement_ok &= complement_trace < delta + 1e-12;
            if positive && cross_norm > bound {
                violations += 1;
            }
        }
        rows.push(StochasticRow {
            a: rec.a,
            complement_trace,
            cross_norm,
            cross_bound: bound,
            asserted,
        });
    }
    let cross_term = if positive {
        Verdict::from_bool(violations == 0)
    } else {
        Verdict::Unknown
    };
    let verdict = Verdict::from_bool(
        bau.verdict.is_pass()
            && measure.verdict.is_pass()
            && burn_in.is_some()
            && complement_ok
            && !cross_term.is_fail(),
    );
    Ok(StochasticReport {
        eps,
        delta,
        limit,
        corner_limit_gap,
        bau,
        measure,
        burn_in,
        rows,
        cross_term,
        violations,
        corner_checks,
        verdict,
    })
}

/// Whether every Schrödinger generator is a positive Lamperti map.
fn all_lamperti(schr: &SemigroupAction) -> Result<bool> {
    for g in schr.generators() {
        if g.attestations.lamperti.verdict.is_pass() {
            continue;
        }
        if !g.attestations.is_positive() {
            return Ok(false);
        }
        let r = maps::check_lamperti(g, maps::DEFAULT_TRIALS, maps::DEFAULT_CHECK_SEED)?;
        if !r.verdict.is_pass() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `e_i γ(X) e_i = γ(e_i X e_i)` for `i ∈ {1, 2}` and the `idx`-th
/// Schrödinger generator `γ`, which must be Lamperti.
pub fn corner_compatibility(
    action: &SemigroupAction,
    decomposition: &NeveuDecomposition,
    x: &Operator,
    idx: usize,
) -> Result<CheckReport> {
    let schr = action.schrodinger();
    let alg = schr.algebra();
    alg.check(x)?;
    let maps_ = schr.discrete_maps();
    let gamma = maps_
        .get(idx)
        .ok_or_else(|| Error::Precondition(format!("no generator {idx}")))?;
    let lamperti = maps::check_lamperti(gamma, maps::DEFAULT_TRIALS, maps::DEFAULT_CHECK_SEED)?;
    if !lamperti.verdict.is_pass() {
        return Err(Error::Precondition(format!(
            "generator {idx} is not Lamperti on densities (‖γ(p)γ(q)‖ = {:.3e})",
            lamperti.measured
        )));
    }
    let scale = algebra::trace_norm(alg, x);
    let mut r = CheckReport::passed("corner-compatibility", "");
    r.detail = None;
    r.tolerance = 1e-9 * scale;
    let gx = gamma.apply(x)?;
    for e in [&decomposition.e1, &decomposition.e2] {
        let eo = e.as_operator();
        let lhs = &(eo * &gx) * eo;
        let rhs = gamma.apply(&(&(eo * x) * eo))?;
        let dev = algebra::trace_norm(alg, &(&lhs - &rhs));
        r.samples += 1;
        if dev > r.measured {
            r.measured = dev;
        }
        if dev > r.tolerance {
            r.verdict = Verdict::Fail;
            r.witness = vec![x.clone(), eo.clone()];
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HullResidual {
    /// Operator-norm distance `‖Σ λ_g α_g(x) − E(x)‖`.
    pub residual: f64,
    /// Hilbert–Schmidt objective at the returned weights.
    pub objective: f64,
    pub weights: Vec<f64>,
    pub orbit_size: usize,
    pub iterations: usize,
    pub converged: bool,
}

const HULL_MAX_ITER: usize = 10_000;
const HULL_REL_DECREMENT: f64 = 1e-10;
/// Frank–Wolfe gap tolerance, relative to the objective and absolute.
const HULL_GAP: f64 = 1e-12;
const HULL_GAP_FLOOR: f64 = 1e-28;

/// Distance from `E(x)` to the convex hull of the orbit sample
/// `{α_g(x) : g ∈ K}`.
///
/// For `ℤ₊^d` the sample uses exponents `0..=a` on every axis, `{−a, …, a}^d`
/// for `ℤ^d`, and the whole group for finite groups. Solved by accelerated
/// projected gradient on the simplex from the barycenter.
pub fn convex_hull_residual(action: &SemigroupAction, x: &Operator, a: usize) -> Result<HullResidual> {
    if action.is_continuous() {
        return Err(Error::Unsupported("convex hull residual needs a discrete action".into()));
    }
    let alg = action.algebra();
    alg.check(x)?;
    let set = match action.scheme() {
        FolnerScheme::ZplusBox { .. } => crate::dynamics::folner_set(action.scheme(), a + 1)?,
        _ => crate::dynamics::folner_set(action.scheme(), a)?,
    };
    let orbit: Vec<Operator> = match &set {
        FolnerSet::Points(points) => points
            .iter()
            .map(|g| action.element(g)?.apply(x))
            .collect::<Result<_>>()?,
        FolnerSet::Elements(elems) => elems
            .iter()
            .map(|&g| action.generators()[g].apply(x))
            .collect::<Result<_>>()?,
        FolnerSet::Cube { .. } => unreachable!("continuous actions rejected above"),
    };
    let target = neveu::mean_ergodic_projection(action, tol::FIXED_SPACE)?.apply(x)?;

    let n = orbit.len();
    let d = alg.dim();
    let mut v = CMat::zeros(d, n);
    for (k, o) in orbit.iter().enumerate() {
        v.set_column(k, &o.vectorize());
    }
    let t = target.vectorize();
    let gram = (v.adjoint() * &v).map(|z| z.re);
    let b = (v.adjoint() * &t).map(|z| z.re);
    let tt = t.norm_squared();
    let objective = |l: &nalgebra::DVector<f64>| (&v * l.map(linalg::c) - &t).norm_squared();
    let lip = 2.0 * nalgebra::SymmetricEigen::new(gram.clone()).eigenvalues.max().max(f64::MIN_POSITIVE);

    let mut lambda = nalgebra::DVector::from_element(n, 1.0 / n as f64);
    let mut y = lambda.clone();
    let mut momentum = 1.0f64;
    let mut best = (objective(&lambda), lambda.clone());
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=HULL_MAX_ITER {
        iterations = it;
        let grad = (&gram * &y - &b) * 2.0;
        let next = project_simplex(&(&y - grad / lip));
        let f_next = objective(&next);
        let next_momentum = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        y = &next + (&next - &lambda) * ((momentum - 1.0) / next_momentum);
        momentum = next_momentum;
        lambda = next;
        let previous = best.0;
        if f_next < best.0 {
            best = (f_next, lambda.clone());
        }
        if best.0 <= 1e-30 * (tt + 1.0) {
            converged = true;
            break;
        }
        if f_next > previous {
            // Adaptive restart keeps the iteration monotone in the best value.
            y = best.1.clone();
            momentum = 1.0;
            continue;
        }
        if previous - f_next <= HULL_REL_DECREMENT * previous && previous - f_next >= 0.0 && it > 1 {
            converged = true;
            break;
        }
    }
    let (weights, polish_iterations, gap_closed) = pairwise_polish(&gram, &b, tt, best.1);
    iterations += polish_iterations;
    converged |= gap_closed;
    let objective_value = objective(&weights);
    let combo = Operator::from_vector(alg, &(&v * weights.map(linalg::c)))?;
    Ok(HullResidual {
        residual: algebra::op_norm(&(&combo - &target)),
        objective: objective_value,
        weights: weights.iter().copied().collect(),
        orbit_size: n,
        iterations,
        converged,
    })
}

/// Pairwise Frank–Wolfe steps with exact line search on
/// `f(λ) = λᵀGλ − 2bᵀλ + ‖t‖²`, run after the accelerated phase. Optima on
/// low-dimensional faces (a vertex, typically) are reached in finitely many
/// drain steps, where projected gradient only creeps. Stops once the
/// Frank–Wolfe gap, an upper bound on `f(λ) − f*`, is negligible.
fn pairwise_polish(
    gram: &nalgebra::DMatrix<f64>,
    b: &nalgebra::DVector<f64>,
    tt: f64,
    mut lambda: nalgebra::DVector<f64>,
) -> (nalgebra::DVector<f64>, usize, bool) {
    let n = lambda.len();
    for it in 0..HULL_MAX_ITER {
        let grad = (gram * &lambda - b) * 2.0;
        let value = (lambda.dot(&(gram * &lambda)) - 2.0 * b.dot(&lambda) + tt).max(0.0);
        let toward = grad.argmin().0;
        let gap = grad.dot(&lambda) - grad[toward];
        if gap <= HULL_GAP * value + HULL_GAP_FLOOR * (tt + 1.0) {
            return (lambda, it, true);
        }
        let away = (0..n)
            .filter(|&k| lambda[k] > 0.0)
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]))
            .expect("weights sum to one");
        if away == toward {
            return (lambda, it, true);
        }
        // Direction e_toward − e_away.
        let slope = grad[toward] - grad[away];
        let curvature = gram[(toward, toward)] + gram[(away, away)] - 2.0 * gram[(toward, away)];
        let step = if curvature > 0.0 { -slope / (2.0 * curvature) } else { f64::INFINITY };
        let step = step.min(lambda[away]);
        if !(step > 0.0) {
            return (lambda, it, false);
        }
        lambda[toward] += step;
        lambda[away] -= step;
        if lambda[away] < 1e-300 {
            lambda[away] = 0.0;
        }
    }
    (lambda, HULL_MAX_ITER, false)
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if x - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.map(|x| (x - shift).max(0.0))
}

/// The truncated typewriter sequence on `ℂ^{2^levels}` with uniform weights:
/// at level `k` an indicator of `2^{levels−k}` consecutive sites sweeps the
/// line in `2^k` steps. Converges to 0 in measure (the bump shrinks) yet the
/// last sweep visits every site with height 1.
pub fn moving_bump(levels: usize) -> (TracialAlgebra, Vec<(usize, Operator)>) {
    let n = 1usize << levels;
    let alg = TracialAlgebra::commutative(n);
    let mut seq = Vec::new();
    let mut a = 1;
    for k in 1..=levels {
        let width = n >> k;
        for pos in 0..(1 << k) {
            let diag: Vec<f64> = (0..n)
                .map(|i| if i / width == pos { 1.0 } else { 0.0 })
                .collect();
            seq.push((a, Operator::from_diagonal(&alg, &diag).expect("diagonal fits")));
            a += 1;
        }
    }
    (alg, seq)
}
