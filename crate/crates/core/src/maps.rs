//! Linear maps on a tracial algebra, stored as dense superoperators.
//!
//! A [`SuperOperator`] acts on vectorized operators (block-major,
//! column-stacked inside each block, see [`crate::algebra`]). Positivity and
//! contractivity are tracked as attestations: constructors that are positive
//! by construction say so, and everything else is checked by sampling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{self, Interval, Operator, Projection, TracialAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, ONE, ZERO};
use crate::random::Sampler;
use crate::tol;

/// Default seed for randomized checks that are not given one explicitly.
pub const DEFAULT_CHECK_SEED: u64 = 0x006e_6576_6575;
/// Default number of random samples in positivity / Lamperti checks.
pub const DEFAULT_TRIALS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }
}

/// Outcome of a structural check on one or more maps.
///
/// A `Fail` always carries witness operators that reproduce the violation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    pub witness: Vec<Operator>,
    /// The quantity compared against `tolerance` (worst case found).
    pub measured: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckReport {
    fn new(check: &str, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            verdict: Verdict::Unknown,
            witness: Vec::new(),
            measured: 0.0,
            tolerance,
            samples: 0,
            seed: None,
            detail: None,
        }
    }

    pub fn passed(check: &str, detail: &str) -> Self {
        let mut r = Self::new(check, 0.0);
        r.verdict = Verdict::Pass;
        r.detail = Some(detail.to_string());
        r
    }

    pub fn failed(check: &str, detail: impl Into<String>) -> Self {
        let mut r = Self::new(check, 0.0);
        r.verdict = Verdict::Fail;
        r.detail = Some(detail.into());
        r
    }
}

#[derive(Clone, Debug)]
pub enum Source {
    /// Heisenberg-form Kraus map `x ↦ Σ K_j* x K_j`; operators are `N × N`.
    Kraus(Vec<CMat>),
    Matrix,
    ClassicalKernel(Vec<Vec<f64>>),
    /// `x ↦ U x U*`.
    Conjugation(Operator),
    /// Generator `x ↦ i[H, x] + Σ (J* x J − ½{J*J, x})`.
    Lindblad,
    /// Result of composing, averaging, dualizing or exponentiating maps.
    Derived,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Kraus(_) => "kraus",
            Source::Matrix => "matrix",
            Source::ClassicalKernel(_) => "classical-kernel",
            Source::Conjugation(_) => "conjugation",
            Source::Lindblad => "lindblad",
            Source::Derived => "derived",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Attestation {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Operator>,
}

impl Attestation {
    fn unknown() -> Self {
        Self {
            verdict: Verdict::Unknown,
            witness: None,
        }
    }

    fn pass() -> Self {
        Self {
            verdict: Verdict::Pass,
            witness: None,
        }
    }

    fn from_report(r: &CheckReport) -> Self {
        Self {
            verdict: r.verdict,
            witness: r.witness.first().cloned(),
        }
    }

    fn both(a: &Attestation, b: &Attestation) -> Self {
        if a.verdict.is_pass() && b.verdict.is_pass() {
            Self::pass()
        } else {
            Self::unknown()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Attestations {
    pub complete_positivity: Attestation,
    pub positivity_sampled: Attestation,
    pub subunital: Attestation,
    pub l1_contractive: Attestation,
    pub lamperti: Attestation,
}

impl Attestations {
    fn unknown() -> Self {
        Self {
            complete_positivity: Attestation::unknown(),
            positivity_sampled: Attestation::unknown(),
            subunital: Attestation::unknown(),
            l1_contractive: Attestation::unknown(),
            lamperti: Attestation::unknown(),
        }
    }

    /// Positive either by construction or by a passed sampling check.
    pub fn is_positive(&self) -> bool {
        self.complete_positivity.verdict.is_pass() || self.positivity_sampled.verdict.is_pass()
    }
}

#[derive(Clone, Debug)]
pub struct SuperOperator {
    algebra: TracialAlgebra,
    matrix: CMat,
    source: Source,
    pub attestations: Attestations,
}

impl SuperOperator {
    /// Wraps a raw `D × D` matrix. Nothing is attested.
    pub fn from_matrix(alg: &TracialAlgebra, matrix: CMat) -> Result<Self> {
        let d = alg.dim();
        if matrix.shape() != (d, d) {
            return Err(Error::shape(
                format!("{d}x{d} superoperator"),
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        Ok(Self {
            algebra: alg.clone(),
            matrix,
            source: Source::Matrix,
            attestations: Attestations::unknown(),
        })
    }

    fn derived(alg: &TracialAlgebra, matrix: CMat, attestations: Attestations) -> Self {
        Self {
            algebra: alg.clone(),
            matrix,
            source: Source::Derived,
            attestations,
        }
    }

    pub fn identity(alg: &TracialAlgebra) -> Self {
        let d = alg.dim();
        let mut s = Self::derived(
            alg,
            CMat::identity(d, d),
            Attestations {
                complete_positivity: Attestation::pass(),
                positivity_sampled: Attestation::pass(),
                subunital: Attestation::pass(),
                l1_contractive: Attestation::pass(),
                lamperti: Attestation::pass(),
            },
        );
        s.source = Source::Matrix;
        s
    }

    /// Builds the matrix of `f` by applying it to the matrix-unit basis.
    fn tabulate(alg: &TracialAlgebra, f: impl Fn(&Operator) -> Result<Operator>) -> Result<CMat> {
        let d = alg.dim();
        let mut m = CMat::zeros(d, d);
        for (col, (b, r, cc)) in alg.basis_indices().into_iter().enumerate() {
            let image = f(&alg.unit(b, r, cc))?;
            m.set_column(col, &image.vectorize());
        }
        Ok(m)
    }

    pub fn algebra(&self) -> &TracialAlgebra {
        &self.algebra
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        self.algebra.check(x)?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Operator) -> Operator {
        Operator::from_vector(&self.algebra, &(&self.matrix * x.vectorize())).expect("dimension fixed")
    }

    pub(crate) fn apply_vec(&self, v: &CVec) -> CVec {
        &self.matrix * v
    }

    fn same_algebra(&self, other: &SuperOperator) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &SuperOperator) -> Result<SuperOperator> {
        self.same_algebra(other)?;
        let a = &self.attestations;
        let b = &other.attestations;
        let positive_outer = a.is_positive();
        let att = Attestations {
            complete_positivity: Attestation::both(&a.complete_positivity, &b.complete_positivity),
            positivity_sampled: if a.is_positive() && b.is_positive() {
                Attestation::pass()
            } else {
                Attestation::unknown()
            },
            subunital: if positive_outer {
                Attestation::both(&a.subunital, &b.subunital)
            } else {
                Attestation::unknown()
            },
            l1_contractive: Attestation::both(&a.l1_contractive, &b.l1_contractive),
            lamperti: Attestation::both(&a.lamperti, &b.lamperti),
        };
        Ok(Self::derived(&self.algebra, &self.matrix * &other.matrix, att))
    }

    /// `Σ λ_k Γ_k` for convex weights `λ`.
    pub fn convex_combination(maps: &[SuperOperator], weights: &[f64]) -> Result<SuperOperator> {
        let first = maps
            .first()
            .ok_or_else(|| Error::Precondition("empty convex combination".into()))?;
        if maps.len() != weights.len() {
            return Err(Error::shape(format!("{} weights", maps.len()), weights.len()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition("weights must be a probability vector".into()));
        }
        let d = first.algebra.dim();
        let mut m = CMat::zeros(d, d);
        for (g, &w) in maps.iter().zip(weights) {
            first.same_algebra(g)?;
            m += &g.matrix * c(w);
        }
        let all = |f: fn(&Attestations) -> &Attestation| {
            if maps.iter().all(|g| f(&g.attestations).verdict.is_pass()) {
                Attestation::pass()
            } else {
                Attestation::unknown()
            }
        };
        let positive = maps.iter().all(|g| g.attestations.is_positive());
        let att = Attestations {
            complete_positivity: all(|a| &a.complete_positivity),
            positivity_sampled: if positive {
                Attestation::pass()
            } else {
                Attestation::unknown()
            },
            subunital: all(|a| &a.subunital),
            l1_contractive: all(|a| &a.l1_contractive),
            lamperti: Attestation::unknown(),
        };
        Ok(Self::derived(&first.algebra, m, att))
    }

    pub fn power(&self, k: usize) -> SuperOperator {
        let mut acc = SuperOperator::identity(&self.algebra);
        for _ in 0..k {
            acc = self.compose(&acc).expect("same algebra");
        }
        acc
    }

    /// Inverse map. Exact for conjugations, a matrix inverse otherwise.
    pub fn inverse(&self) -> Result<SuperOperator> {
        if let Source::Conjugation(u) = &self.source {
            return from_conjugation(&self.algebra, &u.adjoint());
        }
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Precondition("map is not invertible".into()))?;
        Ok(Self::derived(&self.algebra, inv, Attestations::unknown()))
    }

    /// `e^{tL}` for a generator `L`. Lindblad generators give completely
    /// positive unital semigroups.
    pub fn exp(&self, t: f64) -> SuperOperator {
        let m = linalg::expm(&(&self.matrix * c(t)));
        let att = if matches!(self.source, Source::Lindblad) {
            Attestations {
                complete_positivity: Attestation::pass(),
                positivity_sampled: Attestation::pass(),
                subunital: Attestation::pass(),
                l1_contractive: Attestation::unknown(),
                lamperti: Attestation::unknown(),
            }
        } else {
            Attestations::unknown()
        };
        Self::derived(&self.algebra, m, att)
    }

    /// Spectral norm of the matrix (Hilbert–Schmidt operator norm).
    pub fn superop_norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }

    /// `Λ(1)`.
    pub fn unit_image(&self) -> Operator {
        self.apply_unchecked(&self.algebra.identity())
    }

    pub fn dual(&self) -> SuperOperator {
        dual(self)
    }

    pub(crate) fn with_matrix(&self, matrix: CMat) -> SuperOperator {
        Self::derived(&self.algebra, matrix, Attestations::unknown())
    }
}

/// Heisenberg-form map `x ↦ Σ K_j* x K_j` for `N × N` Kraus operators.
///
/// The image of every algebra element must stay block diagonal.
pub fn from_kraus(alg: &TracialAlgebra, kraus: &[CMat]) -> Result<SuperOperator> {
    let n = alg.size();
    if kraus.is_empty() {
        return Err(Error::Precondition("no Kraus operators".into()));
    }
    if let Some(k) = kraus.iter().find(|k| k.shape() != (n, n)) {
        return Err(Error::shape(format!("{n}x{n}"), format!("{}x{}", k.nrows(), k.ncols())));
    }
    let matrix = SuperOperator::tabulate(alg, |x| {
        let dense = x.to_dense();
        let mut acc = CMat::zeros(n, n);
        for k in kraus {
            acc += k.adjoint() * &dense * k;
        }
        let (img, off) = Operator::split_dense(alg, &acc);
        if off > tol::OFF_BLOCK * acc.norm().max(1.0) {
            return Err(Error::LeavesAlgebra { deviation: off });
        }
        Ok(img)
    })?;
    let mut map = SuperOperator {
        algebra: alg.clone(),
        matrix,
        source: Source::Kraus(kraus.to_vec()),
        attestations: Attestations::unknown(),
    };
    map.attestations.complete_positivity = Attestation::pass();
    map.attestations.positivity_sampled = Attestation::pass();
    let sub = check_subunital(&map);
    map.attestations.subunital = Attestation::from_report(&sub);
    Ok(map)
}

/// Diagonal-algebra map `(Λf)(i) = Σ_j k_ij f(j)` for a row-substochastic
/// kernel.
pub fn from_classical(alg: &TracialAlgebra, kernel: &[Vec<f64>]) -> Result<SuperOperator> {
    if !alg.is_commutative() {
        return Err(Error::Precondition("classical kernels need a commutative algebra".into()));
    }
    let n = alg.size();
    if kernel.len() != n {
        return Err(Error::shape(format!("{n} kernel rows"), kernel.len()));
    }
    for (i, row) in kernel.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidKernel {
                row: i,
                reason: format!("{} entries, expected {n}", row.len()),
            });
        }
        if let Some(j) = row.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidKernel {
                row: i,
                reason: format!("entry {j} = {} is negative or not finite", row[j]),
            });
        }
        let sum: f64 = row.iter().sum();
        if sum > 1.0 + tol::KERNEL_ROW {
            return Err(Error::InvalidKernel {
                row: i,
                reason: format!("row sum {sum} exceeds 1"),
            });
        }
    }
    let matrix = CMat::from_fn(n, n, |i, j| c(kernel[i][j]));
    Ok(SuperOperator {
        algebra: alg.clone(),
        matrix,
        source: Source::ClassicalKernel(kernel.to_vec()),
        attestations: Attestations {
            complete_positivity: Attestation::pass(),
            positivity_sampled: Attestation::pass(),
            subunital: Attestation::pass(),
            l1_contractive: Attestation::unknown(),
            lamperti: Attestation::unknown(),
        },
    })
}

/// `x ↦ U x U*` for a unitary `U` of the algebra.
pub fn from_conjugation(alg: &TracialAlgebra, u: &Operator) -> Result<SuperOperator> {
    alg.check(u)?;
    let deviation = algebra::op_norm(&(&(&u.adjoint() * u) - &alg.identity()));
    if deviation > tol::UNITARY {
        return Err(Error::NotUnitary { deviation });
    }
    let d = alg.dim();
    let mut matrix = CMat::zeros(d, d);
    for (o, b) in alg.vec_offsets().into_iter().zip(u.blocks()) {
        let k = b.map(|z| z.conj()).kronecker(b);
        let s = k.nrows();
        matrix.view_mut((o, o), (s, s)).copy_from(&k);
    }
    Ok(SuperOperator {
        algebra: alg.clone(),
        matrix,
        source: Source::Conjugation(u.clone()),
        attestations: Attestations {
            complete_positivity: Attestation::pass(),
            positivity_sampled: Attestation::pass(),
            subunital: Attestation::pass(),
            l1_contractive: Attestation::pass(),
            lamperti: Attestation::pass(),
        },
    })
}

/// Heisenberg-picture Lindblad generator
/// `L(x) = i[H, x] + Σ_j (J_j* x J_j − ½{J_j* J_j, x})` with `N × N` inputs.
pub fn from_lindblad(alg: &TracialAlgebra, hamiltonian: &CMat, jumps: &[CMat]) -> Result<SuperOperator> {
    let n = alg.size();
    for m in std::iter::once(hamiltonian).chain(jumps) {
        if m.shape() != (n, n) {
            return Err(Error::shape(format!("{n}x{n}"), format!("{}x{}", m.nrows(), m.ncols())));
        }
    }
    if linalg::hermitian_deviation(hamiltonian) > tol::HERMITIAN * hamiltonian.norm().max(1.0) {
        return Err(Error::NotHermitian {
            deviation: linalg::hermitian_deviation(hamiltonian),
        });
    }
    let i = Complex64::new(0.0, 1.0);
    let matrix = SuperOperator::tabulate(alg, |x| {
        let xd = x.to_dense();
        let mut acc = (hamiltonian * &xd - &xd * hamiltonian) * i;
        for j in jumps {
            let jj = j.adjoint() * j;
            acc += j.adjoint() * &xd * j - (&jj * &xd + &xd * &jj) * c(0.5);
        }
        let (img, off) = Operator::split_dense(alg, &acc);
        if off > tol::OFF_BLOCK * acc.norm().max(1.0) {
            return Err(Error::LeavesAlgebra { deviation: off });
        }
        Ok(img)
    })?;
    Ok(SuperOperator {
        algebra: alg.clone(),
        matrix,
        source: Source::Lindblad,
        attestations: Attestations::unknown(),
    })
}

/// Adjoint with respect to the trace pairing: the unique `Γ*` with
/// `τ(Γ*(X) y) = τ(X Γ(y))`.
///
/// With `T` the vectorized transpose and `W` the per-entry trace weights,
/// `Γ* = T W⁻¹ Γᵀ W T`.
pub fn dual(map: &SuperOperator) -> SuperOperator {
    let alg = &map.algebra;
    let perm = transpose_permutation(alg);
    let w = alg.vec_weights();
    let d = alg.dim();
    let g = &map.matrix;
    let matrix = CMat::from_fn(d, d, |i, j| g[(perm[j], perm[i])] * (w[j] / w[i]));
    let a = &map.attestations;
    let attestations = Attestations {
        complete_positivity: a.complete_positivity.clone(),
        positivity_sampled: a.positivity_sampled.clone(),
        subunital: a.l1_contractive.clone(),
        l1_contractive: a.subunital.clone(),
        // Conjugations are automorphisms in both pictures.
        lamperti: match map.source {
            Source::Conjugation(_) => a.lamperti.clone(),
            _ => Attestation::unknown(),
        },
    };
    let source = match &map.source {
        Source::Conjugation(u) => Source::Conjugation(u.adjoint()),
        Source::Lindblad => Source::Lindblad,
        _ => Source::Derived,
    };
    SuperOperator {
        algebra: alg.clone(),
        matrix,
        source,
        attestations,
    }
}

/// Index permutation sending vec(X) to vec(Xᵀ).
pub(crate) fn transpose_permutation(alg: &TracialAlgebra) -> Vec<usize> {
    let mut perm = Vec::with_capacity(alg.dim());
    for (o, &n) in alg.vec_offsets().into_iter().zip(alg.blocks()) {
        for col in 0..n {
            for row in 0..n {
                perm.push(o + row * n + col);
            }
        }
    }
    perm
}

fn check_subunital(map: &SuperOperator) -> CheckReport {
    let alg = &map.algebra;
    let img = map.unit_image();
    let mut r = CheckReport::new("subunital", tol::CONTRACTION);
    let herm = img.hermitian_part();
    let top = algebra::max_eigenvalue(&herm);
    r.measured = top;
    r.samples = 1;
    let ok = algebra::order_leq(alg, &herm, &alg.identity()).unwrap_or(false);
    r.verdict = Verdict::from_bool(ok);
    if !ok {
        r.witness.push(alg.identity());
    }
    r
}

/// Contraction check on `(M, ‖·‖)`: exact for completely positive maps,
/// sampled otherwise.
pub fn check_contraction(map: &SuperOperator) -> CheckReport {
    check_contraction_seeded(map, DEFAULT_CHECK_SEED, DEFAULT_TRIALS)
}

pub fn check_contraction_seeded(map: &SuperOperator, seed: u64, samples: usize) -> CheckReport {
    let alg = &map.algebra;
    let one = alg.identity();
    let unit_norm = algebra::op_norm(&map.unit_image());
    let mut r = CheckReport::new("contraction", tol::CONTRACTION);
    r.measured = unit_norm;
    if unit_norm > 1.0 + tol::CONTRACTION {
        r.verdict = Verdict::Fail;
        r.witness.push(one);
        r.samples = 1;
        r.detail = Some(format!("‖Λ(1)‖ = {unit_norm}"));
        return r;
    }
    if map.attestations.complete_positivity.verdict.is_pass() {
        r.verdict = Verdict::Pass;
        r.samples = 1;
        r.detail = Some("completely positive: ‖Λ‖ = ‖Λ(1)‖".into());
        return r;
    }

    r.seed = Some(seed);
    let mut s = Sampler::new(seed);
    for _ in 0..samples {
        let x = s.positive(alg);
        let y = map.apply_unchecked(&x);
        let dev = algebra::hermitian_deviation_rel(&y);
        let min = algebra::min_eigenvalue(&y.hermitian_part());
        r.samples += 1;
        if dev > tol::POSITIVE || min < -tol::POSITIVE * algebra::op_norm(&y).max(1.0) {
            r.verdict = Verdict::Fail;
            r.witness.push(x);
            r.detail = Some(format!("positive input mapped to min eigenvalue {min:.3e}"));
            return r;
        }
    }

    // Power iteration on hermitian inputs, tracking the operator-norm ratio.
    let mut h = s.hermitian(alg);
    let mut worst = unit_norm;
    for _ in 0..samples.max(8) {
        let hn = algebra::op_norm(&h);
        if hn == 0.0 {
            break;
        }
        let img = map.apply_unchecked(&h);
        let ratio = algebra::op_norm(&img) / hn;
        r.samples += 1;
        if ratio > worst {
            worst = ratio;
        }
        if ratio > 1.0 + tol::CONTRACTION {
            r.verdict = Verdict::Fail;
            r.measured = ratio;
            r.witness.push(h);
            r.detail = Some(format!("‖Λ(h)‖/‖h‖ = {ratio}"));
            return r;
        }
        let back = Operator::from_vector(alg, &(map.matrix.adjoint() * img.vectorize())).expect("dims");
        h = back.hermitian_part();
        let n = algebra::op_norm(&h);
        if n > 0.0 {
            h = h.scale(1.0 / n);
        }
    }
    r.measured = worst;
    r.verdict = Verdict::Unknown;
    r.detail = Some("sampled positivity and norm passed; no certificate for a non-CP map".into());
    r
}

/// Runs the sampled positivity check and records it on the map.
pub fn attest_sampled_positivity(map: &mut SuperOperator, seed: u64, samples: usize) -> CheckReport {
    let alg = map.algebra.clone();
    let mut s = Sampler::new(seed);
    let mut r = CheckReport::new("positivity-sampled", tol::POSITIVE);
    r.seed = Some(seed);
    r.verdict = Verdict::Pass;
    for _ in 0..samples {
        let x = if s.chance(0.5) {
            s.positive(&alg)
        } else {
            s.positive_low_rank(&alg, 1)
        };
        let y = map.apply_unchecked(&x);
        let min = algebra::min_eigenvalue(&y.hermitian_part());
        r.samples += 1;
        r.measured = r.measured.min(min);
        let bad = algebra::hermitian_deviation_rel(&y) > tol::POSITIVE
            || min < -tol::POSITIVE * algebra::op_norm(&y).max(1.0);
        if bad {
            r.verdict = Verdict::Fail;
            r.witness.push(x);
            break;
        }
    }
    map.attestations.positivity_sampled = Attestation::from_report(&r);
    r
}

/// Randomized Lamperti check: images of orthogonal projections must stay
/// orthogonal, `‖Γ(p) Γ(q)‖ ≤ 1e−9`.
///
/// Covers the diagonal matrix units first, then `trials` random spectral
/// splittings `(p, 1−p)` and all pairs of minimal projections in a random
/// orthonormal basis.
pub fn check_lamperti(map: &SuperOperator, trials: usize, seed: u64) -> Result<CheckReport> {
    if !map.attestations.is_positive() {
        return Err(Error::Precondition("Lamperti check needs a positive map".into()));
    }
    let alg = &map.algebra;
    let mut r = CheckReport::new("lamperti", tol::LAMPERTI);
    r.seed = Some(seed);

    let test = |p: &Operator, q: &Operator, r: &mut CheckReport| -> bool {
        let prod = &map.apply_unchecked(p) * &map.apply_unchecked(q);
        let v = algebra::op_norm(&prod);
        r.samples += 1;
        r.measured = r.measured.max(v);
        if v > tol::LAMPERTI {
            r.verdict = Verdict::Fail;
            r.witness = vec![p.clone(), q.clone()];
            return false;
        }
        true
    };

    let diag_units: Vec<Operator> = alg
        .blocks()
        .iter()
        .enumerate()
        .flat_map(|(b, &n)| (0..n).map(move |k| (b, k)))
        .map(|(b, k)| alg.unit(b, k, k))
        .collect();
    for i in 0..diag_units.len() {
        for j in (i + 1)..diag_units.len() {
            if !test(&diag_units[i], &diag_units[j], &mut r) {
                return Ok(r);
            }
        }
    }

    let mut s = Sampler::new(seed);
    for _ in 0..trials {
        let h = s.hermitian(alg);
        let p = algebra::spectral_projection(alg, &h, Interval::at_least(0.0))?;
        let q = p.complement(alg);
        if !test(p.as_operator(), q.as_operator(), &mut r) {
            return Ok(r);
        }
    }

    let u = s.unitary(alg);
    let minimal: Vec<Operator> = alg
        .blocks()
        .iter()
        .enumerate()
        .flat_map(|(b, &n)| (0..n).map(move |k| (b, k)))
        .map(|(b, k)| {
            let mut cols: Vec<CMat> = alg.blocks().iter().map(|&n| CMat::zeros(n, 0)).collect();
            cols[b] = u.block(b).columns(k, 1).into_owned();
            Projection::from_columns(cols).into_operator()
        })
        .collect();
    for i in 0..minimal.len() {
        for j in (i + 1)..minimal.len() {
            if !test(&minimal[i], &minimal[j], &mut r) {
                return Ok(r);
            }
        }
    }
    r.verdict = Verdict::Pass;
    r.detail = Some("no violation found (randomized)".into());
    Ok(r)
}

/// Records a Lamperti check on the map.
pub fn attest_lamperti(map: &mut SuperOperator, trials: usize, seed: u64) -> Result<CheckReport> {
    let r = check_lamperti(map, trials, seed)?;
    map.attestations.lamperti = Attestation::from_report(&r);
    Ok(r)
}

/// Pairwise commutator norms `‖Γ_iΓ_j − Γ_jΓ_i‖ ≤ 1e−10`.
pub fn check_commuting(maps: &[SuperOperator]) -> Result<CheckReport> {
    if maps.len() < 2 {
        return Err(Error::Precondition("commutation check needs at least two maps".into()));
    }
    for m in &maps[1..] {
        maps[0].same_algebra(m)?;
    }
    let alg = &maps[0].algebra;
    let mut r = CheckReport::new("commuting", tol::COMMUTING);
    let mut worst: Option<CMat> = None;
    for i in 0..maps.len() {
        for j in (i + 1)..maps.len() {
            let comm = &maps[i].matrix * &maps[j].matrix - &maps[j].matrix * &maps[i].matrix;
            let v = linalg::spectral_norm(&comm);
            r.samples += 1;
            if v > r.measured {
                r.measured = v;
                worst = Some(comm);
            }
        }
    }
    r.verdict = Verdict::from_bool(r.measured <= tol::COMMUTING);
    if r.verdict.is_fail() {
        // Top right singular vector of the worst commutator.
        let svd = worst.expect("set on failure").svd(false, true);
        let k = (0..svd.singular_values.len())
            .max_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .expect("nonempty");
        let v_t = svd.v_t.expect("v_t requested");
        let v = CVec::from_iterator(v_t.ncols(), v_t.row(k).iter().map(|z| z.conj()));
        r.witness.push(Operator::from_vector(alg, &v)?);
    }
    Ok(r)
}

/// Kadison–Schwarz residual on a hermitian input: min eigenvalue of
/// `Γ(x²) − Γ(x)²` (non-negative for unital-or-subunital CP maps).
pub fn schwarz_gap(map: &SuperOperator, x: &Operator) -> f64 {
    let gx = map.apply_unchecked(x);
    let gxx = map.apply_unchecked(&(x * x));
    algebra::min_eigenvalue(&(&gxx - &(&gx * &gx)).hermitian_part())
}

/// Dense `n × n` identity as a Kraus operator.
pub fn identity_kraus(n: usize) -> Vec<CMat> {
    vec![CMat::identity(n, n)]
}

/// Kraus operators of amplitude damping with decay `g` on `M₂`:
/// `K₀ = diag(1, √(1−g))`, `K₁ = √g |0⟩⟨1|`.
pub fn amplitude_damping_kraus(g: f64) -> Vec<CMat> {
    let k0 = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c((1.0 - g).sqrt())]);
    let k1 = CMat::from_row_slice(2, 2, &[ZERO, c(g.sqrt()), ZERO, ZERO]);
    vec![k0, k1]
}

/// Kraus operators of `x ↦ tr(x)/n · 1` on `M_n`, i.e. `τ(x)·1`.
pub fn depolarizing_kraus(n: usize) -> Vec<CMat> {
    let s = c(1.0 / (n as f64).sqrt());
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut k = DMatrix::zeros(n, n);
            k[(i, j)] = s;
            out.push(k);
        }
    }
    out
}

/// Dephasing on `M₂`: coherences scaled by `1 − 2p`.
pub fn dephasing_kraus(p: f64) -> Vec<CMat> {
    let k0 = CMat::identity(2, 2) * c((1.0 - p).sqrt());
    let k1 = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0)]) * c(p.sqrt());
    vec![k0, k1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pairing, trace};

    fn ad(g: f64) -> SuperOperator {
        from_kraus(&TracialAlgebra::matrix(2), &amplitude_damping_kraus(g)).unwrap()
    }

    #[test]
    fn identity_kraus_gives_identity_map() {
        let alg = TracialAlgebra::matrix(3);
        let m = from_kraus(&alg, &identity_kraus(3)).unwrap();
        assert!(linalg::max_abs_diff(m.matrix(), &CMat::identity(9, 9)) < 1e-15);
        assert!(m.attestations.subunital.verdict.is_pass());
    }

    #[test]
    fn amplitude_damping_is_unital_heisenberg() {
        let k = amplitude_damping_kraus(0.5);
        let sum: CMat = k.iter().map(|k| k.adjoint() * k).sum();
        assert!(linalg::max_abs_diff(&sum, &CMat::identity(2, 2)) < 1e-15);
        let m = ad(0.5);
        assert!(m.attestations.subunital.verdict.is_pass());
        let alg = m.algebra().clone();
        assert!(m.unit_image().max_abs_diff(&alg.identity()) < 1e-15);
        // α(E11) = (1−g) E11
        let img = m.apply(&alg.unit(0, 1, 1)).unwrap();
        assert!(img.max_abs_diff(&alg.unit(0, 1, 1).scale(0.5)) < 1e-15);
    }

    #[test]
    fn scaled_identity_kraus_fails_subunital_with_identity_witness() {
        let alg = TracialAlgebra::matrix(2);
        let m = from_kraus(&alg, &[CMat::identity(2, 2) * c(2.0)]).unwrap();
        assert!(m.attestations.subunital.verdict.is_fail());
        let w = m.attestations.subunital.witness.as_ref().unwrap();
        assert!(w.max_abs_diff(&alg.identity()) == 0.0);
    }

    #[test]
    fn kraus_application_matches_source_form() {
        let alg = TracialAlgebra::matrix(2);
        let kraus = amplitude_damping_kraus(0.3);
        let m = from_kraus(&alg, &kraus).unwrap();
        let mut s = Sampler::new(1);
        for _ in 0..10 {
            let x = s.operator(&alg);
            let xd = x.to_dense();
            let direct: CMat = kraus.iter().map(|k| k.adjoint() * &xd * k).sum();
            assert!(linalg::max_abs_diff(&m.apply(&x).unwrap().to_dense(), &direct) < 1e-12);
        }
    }

    #[test]
    fn kraus_rejects_maps_leaving_the_algebra() {
        let alg = TracialAlgebra::commutative(2);
        let h = CMat::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(-1.0)]) * c(1.0 / 2f64.sqrt());
        assert!(matches!(from_kraus(&alg, &[h]), Err(Error::LeavesAlgebra { .. })));
        let m3 = TracialAlgebra::matrix(3);
        assert!(matches!(
            from_kraus(&m3, &identity_kraus(2)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn classical_constructor_examples() {
        let c2 = TracialAlgebra::commutative(2);
        let id = from_classical(&c2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(linalg::max_abs_diff(id.matrix(), &CMat::identity(2, 2)) < 1e-15);
        let swap = from_classical(&c2, &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let f = Operator::from_diagonal(&c2, &[2.0, 5.0]).unwrap();
        let g = swap.apply(&f).unwrap();
        assert!(g.max_abs_diff(&Operator::from_diagonal(&c2, &[5.0, 2.0]).unwrap()) < 1e-15);
        let c3 = TracialAlgebra::commutative(3);
        let chain = from_classical(
            &c3,
            &[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!(chain.unit_image().max_abs_diff(&c3.identity()) < 1e-15);
    }

    #[test]
    fn classical_rejects_bad_rows() {
        let c2 = TracialAlgebra::commutative(2);
        match from_classical(&c2, &[vec![0.5, 0.5], vec![1.0, 0.5]]) {
            Err(Error::InvalidKernel { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(from_classical(&c2, &[vec![-0.1, 0.5], vec![0.0, 0.5]]).is_err());
        assert!(from_classical(&TracialAlgebra::matrix(2), &[vec![1.0]]).is_err());
    }

    #[test]
    fn conjugation_examples() {
        let alg = TracialAlgebra::matrix(2);
        let id = from_conjugation(&alg, &alg.identity()).unwrap();
        assert!(linalg::max_abs_diff(id.matrix(), &CMat::identity(4, 4)) < 1e-15);
        let swap = Operator::from_blocks(&alg, vec![CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])]).unwrap();
        let m = from_conjugation(&alg, &swap).unwrap();
        let img = m.apply(&alg.unit(0, 0, 1)).unwrap();
        assert!(img.max_abs_diff(&alg.unit(0, 1, 0)) < 1e-15);
        let bad = alg.identity().scale(2.0);
        assert!(matches!(from_conjugation(&alg, &bad), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn conjugation_preserves_trace() {
        let alg = TracialAlgebra::new(vec![3, 2], vec![0.1, 0.35], true).unwrap();
        let mut s = Sampler::new(9);
        let m = from_conjugation(&alg, &s.unitary(&alg)).unwrap();
        for _ in 0..5 {
            let x = s.operator(&alg);
            let d = trace(&alg, &m.apply(&x).unwrap()).unwrap() - trace(&alg, &x).unwrap();
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn dual_examples() {
        let alg = TracialAlgebra::matrix(2);
        let id = SuperOperator::identity(&alg);
        assert!(linalg::max_abs_diff(id.dual().matrix(), id.matrix()) < 1e-15);
        let mut s = Sampler::new(2);
        let u = s.unitary(&alg);
        let m = from_conjugation(&alg, &u).unwrap();
        let inv = from_conjugation(&alg, &u.adjoint()).unwrap();
        assert!(linalg::max_abs_diff(m.dual().matrix(), inv.matrix()) < 1e-12);
    }

    #[test]
    fn dual_of_amplitude_damping_is_schrodinger_form() {
        let alg = TracialAlgebra::matrix(2);
        let kraus = amplitude_damping_kraus(0.5);
        let heis = from_kraus(&alg, &kraus).unwrap();
        let schr = heis.dual();
        let mut s = Sampler::new(4);
        for _ in 0..100 {
            let x = s.operator(&alg);
            let y = s.operator(&alg);
            let lhs = pairing(&alg, &schr.apply(&x).unwrap(), &y);
            let rhs = pairing(&alg, &x, &heis.apply(&y).unwrap());
            assert!((lhs - rhs).norm() <= 1e-10 * x.hs_norm() * y.hs_norm());
            // Schrödinger form is Σ K ρ K*.
            let xd = x.to_dense();
            let direct: CMat = kraus.iter().map(|k| k * &xd * k.adjoint()).sum();
            assert!(linalg::max_abs_diff(&schr.apply(&x).unwrap().to_dense(), &direct) < 1e-12);
        }
    }

    #[test]
    fn dual_is_an_involution_with_weights() {
        let alg = TracialAlgebra::new(vec![2, 1, 1], vec![0.1, 0.5, 0.3], true).unwrap();
        let mut s = Sampler::new(8);
        let m = SuperOperator::from_matrix(&alg, s.gaussian(alg.dim(), alg.dim())).unwrap();
        assert!(linalg::max_abs_diff(m.dual().dual().matrix(), m.matrix()) <= 1e-12);
    }

    #[test]
    fn contraction_examples() {
        let alg = TracialAlgebra::matrix(2);
        assert!(check_contraction(&SuperOperator::identity(&alg)).verdict.is_pass());
        let two = SuperOperator::from_matrix(&alg, CMat::identity(4, 4) * c(2.0)).unwrap();
        let r = check_contraction(&two);
        assert!(r.verdict.is_fail());
        assert_eq!(r.witness[0].max_abs_diff(&alg.identity()), 0.0);
        assert!(check_contraction(&ad(0.5)).verdict.is_pass());
    }

    #[test]
    fn contraction_of_unattested_map_is_unknown_or_fail() {
        let alg = TracialAlgebra::matrix(2);
        // Transpose: positive, unital, not CP.
        let perm = transpose_permutation(&alg);
        let t = CMat::from_fn(4, 4, |i, j| if perm[j] == i { ONE } else { ZERO });
        let map = SuperOperator::from_matrix(&alg, t).unwrap();
        assert_eq!(check_contraction(&map).verdict, Verdict::Unknown);
        // A non-positive map is caught by sampling.
        let neg = SuperOperator::from_matrix(&alg, CMat::identity(4, 4) * c(-0.5)).unwrap();
        assert!(check_contraction(&neg).verdict.is_fail());
    }

    #[test]
    fn lamperti_examples() {
        let c3 = TracialAlgebra::commutative(3);
        let perm = Operator::from_blocks(
            &TracialAlgebra::matrix(3),
            vec![CMat::from_row_slice(3, 3, &[ZERO, ONE, ZERO, ZERO, ZERO, ONE, ONE, ZERO, ZERO])],
        )
        .unwrap();
        let m3 = TracialAlgebra::matrix(3);
        let r = check_lamperti(&from_conjugation(&m3, &perm).unwrap(), 16, 1).unwrap();
        assert!(r.verdict.is_pass());
        let k = from_classical(&c3, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(check_lamperti(&k, 16, 1).unwrap().verdict.is_pass());

        let m2 = TracialAlgebra::matrix(2);
        let dep = from_kraus(&m2, &depolarizing_kraus(2)).unwrap();
        let r = check_lamperti(&dep, 16, 1).unwrap();
        assert!(r.verdict.is_fail());
        assert_eq!(r.witness.len(), 2);
        assert_eq!(r.witness[0].max_abs_diff(&m2.unit(0, 0, 0)), 0.0);
        assert_eq!(r.witness[1].max_abs_diff(&m2.unit(0, 1, 1)), 0.0);
    }

    #[test]
    fn lamperti_on_classical_kernels() {
        let c3 = TracialAlgebra::commutative(3);
        let deterministic =
            from_classical(&c3, &[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(check_lamperti(&deterministic, 8, 3).unwrap().verdict.is_pass());
        let mixing =
            from_classical(&c3, &[vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(check_lamperti(&mixing, 8, 3).unwrap().verdict.is_fail());
    }

    #[test]
    fn lamperti_requires_positive_attestation() {
        let alg = TracialAlgebra::matrix(2);
        let m = SuperOperator::from_matrix(&alg, CMat::identity(4, 4)).unwrap();
        assert!(matches!(check_lamperti(&m, 4, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn commuting_examples() {
        let alg = TracialAlgebra::matrix(2);
        let a = ad(0.5);
        assert!(check_commuting(&[a.clone(), a.clone()]).unwrap().verdict.is_pass());
        let z = Operator::from_diagonal(&alg, &[1.0, -1.0]).unwrap();
        let s = Operator::from_blocks(&alg, vec![CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, Complex64::new(0.0, 1.0)])]).unwrap();
        let r = check_commuting(&[from_conjugation(&alg, &z).unwrap(), from_conjugation(&alg, &s).unwrap()]).unwrap();
        assert!(r.verdict.is_pass());
        let x = Operator::from_blocks(&alg, vec![CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])]).unwrap();
        let r = check_commuting(&[from_conjugation(&alg, &x).unwrap(), from_conjugation(&alg, &s).unwrap()]).unwrap();
        assert!(r.verdict.is_fail());
        assert_eq!(r.witness.len(), 1);
        assert!(check_commuting(&[a]).is_err());
    }

    #[test]
    fn kadison_schwarz_for_cp_unital_maps() {
        let alg = TracialAlgebra::matrix(2);
        let maps = [ad(0.3), from_kraus(&alg, &depolarizing_kraus(2)).unwrap()];
        let mut s = Sampler::new(12);
        for m in &maps {
            for _ in 0..20 {
                let x = s.hermitian(&alg);
                assert!(schwarz_gap(m, &x) >= -1e-10 * algebra::op_norm(&x).powi(2));
            }
        }
    }

    #[test]
    fn lindblad_generator_annihilates_identity() {
        let alg = TracialAlgebra::matrix(2);
        let h = CMat::from_row_slice(2, 2, &[c(0.5), ZERO, ZERO, c(-0.5)]);
        let j = CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let l = from_lindblad(&alg, &h, &[j]).unwrap();
        assert!(algebra::op_norm(&l.unit_image()) < 1e-15);
        let t1 = l.exp(1.0);
        assert!(t1.attestations.complete_positivity.verdict.is_pass());
        assert!(check_contraction(&t1).verdict.is_pass());
    }
}
