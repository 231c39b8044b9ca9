//! Semigroup actions generated by commuting maps, Følner boxes and ergodic
//! averages.
//!
//! Generators are always supplied as Heisenberg maps `α_i` on the algebra.
//! An action in the Schrödinger picture works with the trace duals
//! `γ_i = α_i*` on densities; both lists are kept so switching pictures is
//! free.

use serde::{Deserialize, Serialize};

use crate::algebra::{Operator, TracialAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::maps::{self, Attestation, CheckReport, SuperOperator, Verdict};
use crate::random::Sampler;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Picture {
    /// Maps act on the algebra.
    Heisenberg,
    /// Maps act on densities (the predual).
    Schrodinger,
}

impl Picture {
    pub fn flip(self) -> Self {
        match self {
            Picture::Heisenberg => Picture::Schrodinger,
            Picture::Schrodinger => Picture::Heisenberg,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FolnerScheme {
    /// Boxes `{0, …, a−1}^d` in `ℤ₊^d`.
    ZplusBox { d: usize },
    /// Boxes `{−a, …, a}^d` in `ℤ^d`.
    ZSymmetricBox { d: usize },
    /// The whole group at every index. `table[g][h]` is the index of `gh`.
    FiniteGroup { table: Vec<Vec<usize>> },
    /// Cubes `[0, a]^d` in `ℝ₊^d`.
    RPlusCube { d: usize },
}

impl FolnerScheme {
    pub fn name(&self) -> &'static str {
        match self {
            FolnerScheme::ZplusBox { .. } => "zplus-box",
            FolnerScheme::ZSymmetricBox { .. } => "z-symmetric-box",
            FolnerScheme::FiniteGroup { .. } => "finite-group",
            FolnerScheme::RPlusCube { .. } => "r-plus-cube",
        }
    }

    /// Number of generators (axes), or the group order.
    pub fn dimension(&self) -> usize {
        match self {
            FolnerScheme::ZplusBox { d } | FolnerScheme::ZSymmetricBox { d } | FolnerScheme::RPlusCube { d } => *d,
            FolnerScheme::FiniteGroup { table } => table.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FolnerSet {
    Points(Vec<Vec<i64>>),
    Elements(Vec<usize>),
    Cube { d: usize, side: f64 },
}

impl FolnerSet {
    pub fn len(&self) -> usize {
        match self {
            FolnerSet::Points(p) => p.len(),
            FolnerSet::Elements(e) => e.len(),
            FolnerSet::Cube { .. } => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Enumerates the `a`-th Følner set of the scheme.
pub fn folner_set(scheme: &FolnerScheme, a: usize) -> Result<FolnerSet> {
    if a == 0 {
        return Err(Error::Unsupported("Følner index must be at least 1".into()));
    }
    let boxed = |d: usize, lo: i64, hi: i64| {
        let mut points = vec![Vec::new()];
        for _ in 0..d {
            points = points
                .into_iter()
                .flat_map(|p: Vec<i64>| {
                    (lo..=hi).map(move |k| {
                        let mut q = p.clone();
                        q.push(k);
                        q
                    })
                })
                .collect();
        }
        points
    };
    let a_i = a as i64;
    Ok(match scheme {
        FolnerScheme::ZplusBox { d } => FolnerSet::Points(boxed(*d, 0, a_i - 1)),
        FolnerScheme::ZSymmetricBox { d } => FolnerSet::Points(boxed(*d, -a_i, a_i)),
        FolnerScheme::FiniteGroup { table } => FolnerSet::Elements((0..table.len()).collect()),
        FolnerScheme::RPlusCube { d } => FolnerSet::Cube { d: *d, side: a as f64 },
    })
}

/// `m(K_a Δ (K_a + g)) / m(K_a)` for a shift `g`.
///
/// For a box of side `L` this is `2(L^d − Π(L − |g_i|)⁺) / L^d`; finite groups
/// give 0.
pub fn folner_ratio(scheme: &FolnerScheme, a: usize, shift: &[f64]) -> Result<f64> {
    let (d, side) = match scheme {
        FolnerScheme::FiniteGroup { .. } => return Ok(0.0),
        FolnerScheme::ZplusBox { d } | FolnerScheme::RPlusCube { d } => (*d, a as f64),
        FolnerScheme::ZSymmetricBox { d } => (*d, 2.0 * a as f64 + 1.0),
    };
    if shift.len() != d {
        return Err(Error::shape(format!("shift of length {d}"), shift.len()));
    }
    if a == 0 {
        return Err(Error::Unsupported("Følner index must be at least 1".into()));
    }
    let full = side.powi(d as i32);
    let overlap: f64 = shift.iter().map(|g| (side - g.abs()).max(0.0)).product();
    Ok(2.0 * (full - overlap) / full)
}

#[derive(Clone, Debug)]
pub struct SemigroupAction {
    algebra: TracialAlgebra,
    picture: Picture,
    scheme: FolnerScheme,
    heisenberg: Vec<SuperOperator>,
    schrodinger: Vec<SuperOperator>,
    heisenberg_inverses: Option<Vec<SuperOperator>>,
    schrodinger_inverses: Option<Vec<SuperOperator>>,
    /// Pairwise commutation (or group law, for finite groups).
    pub commuting: CheckReport,
}

impl SemigroupAction {
    fn build(
        picture: Picture,
        scheme: FolnerScheme,
        generators: Vec<SuperOperator>,
        inverses: Option<Vec<SuperOperator>>,
    ) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::Precondition("an action needs at least one generator".into()))?;
        let algebra = first.algebra().clone();
        for g in generators.iter().chain(inverses.iter().flatten()) {
            if g.algebra() != &algebra {
                return Err(Error::AlgebraMismatch);
            }
        }
        let commuting = match &scheme {
            FolnerScheme::FiniteGroup { table } => group_law_report(&generators, table),
            _ if generators.len() == 1 => CheckReport::passed("commuting", "single generator"),
            _ => maps::check_commuting(&generators)?,
        };
        let schrodinger = generators.iter().map(maps::dual).collect();
        let schrodinger_inverses = inverses.as_ref().map(|v| v.iter().map(maps::dual).collect());
        Ok(Self {
            algebra,
            picture,
            scheme,
            heisenberg: generators,
            schrodinger,
            heisenberg_inverses: inverses,
            schrodinger_inverses,
            commuting,
        })
    }

    /// `ℤ₊^d` action generated by `d` commuting Heisenberg maps.
    pub fn discrete(picture: Picture, generators: Vec<SuperOperator>) -> Result<Self> {
        let d = generators.len();
        Self::build(picture, FolnerScheme::ZplusBox { d }, generators, None)
    }

    /// `ℤ^d` action; every generator comes with its inverse.
    pub fn group(picture: Picture, generators: Vec<SuperOperator>, inverses: Vec<SuperOperator>) -> Result<Self> {
        if inverses.len() != generators.len() {
            return Err(Error::shape(format!("{} inverses", generators.len()), inverses.len()));
        }
        for (i, (g, h)) in generators.iter().zip(&inverses).enumerate() {
            let d = g.algebra().dim();
            let dev = linalg::max_abs_diff(&(g.matrix() * h.matrix()), &CMat::identity(d, d))
                .max(linalg::max_abs_diff(&(h.matrix() * g.matrix()), &CMat::identity(d, d)));
            if dev > tol::UNITARY {
                return Err(Error::Validation(format!(
                    "inverse of generator {i} is off by {dev:.3e}"
                )));
            }
        }
        let d = generators.len();
        Self::build(picture, FolnerScheme::ZSymmetricBox { d }, generators, Some(inverses))
    }

    /// Finite group action: one Heisenberg map per element with
    /// `α_g ∘ α_h = α_{table[g][h]}`.
    pub fn finite_group(picture: Picture, elements: Vec<SuperOperator>, table: Vec<Vec<usize>>) -> Result<Self> {
        validate_group_table(&table)?;
        if elements.len() != table.len() {
            return Err(Error::shape(format!("{} group elements", table.len()), elements.len()));
        }
        Self::build(picture, FolnerScheme::FiniteGroup { table }, elements, None)
    }

    /// `ℝ₊^d` action `t ↦ Π e^{t_i L_i}` for commuting Heisenberg generators.
    pub fn continuous(picture: Picture, generators: Vec<SuperOperator>) -> Result<Self> {
        let d = generators.len();
        Self::build(picture, FolnerScheme::RPlusCube { d }, generators, None)
    }

    pub fn algebra(&self) -> &TracialAlgebra {
        &self.algebra
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn scheme(&self) -> &FolnerScheme {
        &self.scheme
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.scheme, FolnerScheme::RPlusCube { .. })
    }

    pub fn is_commuting(&self) -> bool {
        self.commuting.verdict.is_pass()
    }

    /// Generators in the action's picture (generator matrices `L_i` for
    /// continuous actions).
    pub fn generators(&self) -> &[SuperOperator] {
        match self.picture {
            Picture::Heisenberg => &self.heisenberg,
            Picture::Schrodinger => &self.schrodinger,
        }
    }

    pub fn heisenberg_generators(&self) -> &[SuperOperator] {
        &self.heisenberg
    }

    pub fn schrodinger_generators(&self) -> &[SuperOperator] {
        &self.schrodinger
    }

    pub fn inverses(&self) -> Option<&[SuperOperator]> {
        match self.picture {
            Picture::Heisenberg => self.heisenberg_inverses.as_deref(),
            Picture::Schrodinger => self.schrodinger_inverses.as_deref(),
        }
    }

    /// Same action, viewed in the other picture.
    pub fn dual(&self) -> SemigroupAction {
        let mut out = self.clone();
        out.picture = self.picture.flip();
        out
    }

    pub fn heisenberg(&self) -> SemigroupAction {
        self.in_picture(Picture::Heisenberg)
    }

    pub fn schrodinger(&self) -> SemigroupAction {
        self.in_picture(Picture::Schrodinger)
    }

    pub fn in_picture(&self, picture: Picture) -> SemigroupAction {
        let mut out = self.clone();
        out.picture = picture;
        out
    }

    /// Multiplication table in the current picture. The predual of a left
    /// action composes in the opposite order.
    fn table(&self) -> Option<Vec<Vec<usize>>> {
        match &self.scheme {
            FolnerScheme::FiniteGroup { table } => Some(match self.picture {
                Picture::Heisenberg => table.clone(),
                Picture::Schrodinger => {
                    let n = table.len();
                    (0..n).map(|g| (0..n).map(|h| table[h][g]).collect()).collect()
                }
            }),
            _ => None,
        }
    }

    /// Maps whose common fixed points are the invariants of the action:
    /// the generators (every element for finite groups) or, for continuous
    /// actions, the time-one maps.
    pub fn discrete_maps(&self) -> Vec<SuperOperator> {
        if self.is_continuous() {
            self.generators().iter().map(|l| l.exp(1.0)).collect()
        } else {
            self.generators().to_vec()
        }
    }

    /// The map of a discrete group element `g ∈ ℤ₊^d` or `ℤ^d`.
    pub fn element(&self, g: &[i64]) -> Result<SuperOperator> {
        match &self.scheme {
            FolnerScheme::ZplusBox { d } | FolnerScheme::ZSymmetricBox { d } => {
                if g.len() != *d {
                    return Err(Error::shape(format!("element of length {d}"), g.len()));
                }
                let mut acc = SuperOperator::identity(&self.algebra);
                for (i, &k) in g.iter().enumerate() {
                    let base = if k >= 0 {
                        &self.generators()[i]
                    } else {
                        self.inverses()
                            .map(|inv| &inv[i])
                            .ok_or_else(|| Error::Unsupported("negative exponents need inverses".into()))?
                    };
                    acc = base.power(k.unsigned_abs() as usize).compose(&acc)?;
                }
                Ok(acc)
            }
            FolnerScheme::FiniteGroup { table } => {
                let [k] = g else {
                    return Err(Error::shape("a single group index", g.len()));
                };
                let k = usize::try_from(*k)
                    .ok()
                    .filter(|&k| k < table.len())
                    .ok_or_else(|| Error::Unsupported(format!("no group element {k}")))?;
                Ok(self.generators()[k].clone())
            }
            FolnerScheme::RPlusCube { .. } => {
                let t: Vec<f64> = g.iter().map(|&k| k as f64).collect();
                self.flow(&t)
            }
        }
    }

    /// `Π e^{t_i L_i}` for a continuous action.
    pub fn flow(&self, t: &[f64]) -> Result<SuperOperator> {
        let FolnerScheme::RPlusCube { d } = self.scheme else {
            return Err(Error::Unsupported("flow needs an r-plus-cube action".into()));
        };
        if t.len() != d {
            return Err(Error::shape(format!("time of length {d}"), t.len()));
        }
        let mut acc = SuperOperator::identity(&self.algebra);
        for (l, &ti) in self.generators().iter().zip(t) {
            acc = l.exp(ti).compose(&acc)?;
        }
        Ok(acc)
    }

    /// Spot-checks `Λ_g ∘ Λ_h = Λ_{g+h}` (or the group table) on random
    /// inputs.
    pub fn check_semigroup_law(&self, trials: usize, seed: u64) -> Result<CheckReport> {
        let mut s = Sampler::new(seed);
        let mut r = CheckReport::passed("semigroup-law", "");
        r.tolerance = 1e-10;
        r.seed = Some(seed);
        r.detail = None;
        for _ in 0..trials {
            let x = s.operator(&self.algebra);
            let (lhs, rhs) = match &self.scheme {
                FolnerScheme::FiniteGroup { .. } => {
                    let table = self.table().expect("finite group");
                    let n = table.len();
                    let (g, h) = (s.index(n), s.index(n));
                    let gens = self.generators();
                    (
                        gens[g].apply(&gens[h].apply(&x)?)?,
                        gens[table[g][h]].apply(&x)?,
                    )
                }
                FolnerScheme::RPlusCube { d } => {
                    let g: Vec<f64> = (0..*d).map(|_| s.uniform(0.0, 2.0)).collect();
                    let h: Vec<f64> = (0..*d).map(|_| s.uniform(0.0, 2.0)).collect();
                    let gh: Vec<f64> = g.iter().zip(&h).map(|(a, b)| a + b).collect();
                    (
                        self.flow(&g)?.apply(&self.flow(&h)?.apply(&x)?)?,
                        self.flow(&gh)?.apply(&x)?,
                    )
                }
                FolnerScheme::ZplusBox { d } | FolnerScheme::ZSymmetricBox { d } => {
                    let lo = if self.inverses().is_some() { -2 } else { 0 };
                    let mut draw = || -> Vec<i64> { (0..*d).map(|_| lo + s.index((3 - lo) as usize) as i64).collect() };
                    let g = draw();
                    let h = draw();
                    let gh: Vec<i64> = g.iter().zip(&h).map(|(a, b)| a + b).collect();
                    (
                        self.element(&g)?.apply(&self.element(&h)?.apply(&x)?)?,
                        self.element(&gh)?.apply(&x)?,
                    )
                }
            };
            let dev = lhs.max_abs_diff(&rhs) / x.hs_norm().max(1.0);
            r.samples += 1;
            r.measured = r.measured.max(dev);
            if dev > r.tolerance {
                r.verdict = Verdict::Fail;
                r.witness = vec![x];
                break;
            }
        }
        Ok(r)
    }

    /// Contraction reports for every generator (time-one maps for continuous
    /// actions), in the action's picture.
    pub fn check_contractions(&self) -> Vec<CheckReport> {
        self.discrete_maps().iter().map(maps::check_contraction).collect()
    }

    /// `A_a(x)`, evaluated axis by axis with `O(d·a)` map applications.
    pub fn average(&self, x: &Operator, a: usize) -> Result<Operator> {
        self.algebra.check(x)?;
        if a == 0 {
            return Err(Error::Unsupported("average index must be at least 1".into()));
        }
        match &self.scheme {
            FolnerScheme::FiniteGroup { .. } | FolnerScheme::RPlusCube { .. } => {
                self.average_super(a)?.apply(x)
            }
            FolnerScheme::ZplusBox { .. } => {
                let mut v = x.vectorize();
                for g in self.generators() {
                    v = cesaro_vec(g, &v, a);
                }
                Operator::from_vector(&self.algebra, &v)
            }
            FolnerScheme::ZSymmetricBox { .. } => {
                let inv = self.inverses().expect("group actions carry inverses");
                let mut v = x.vectorize();
                for (g, h) in self.generators().iter().zip(inv) {
                    v = symmetric_vec(g, h, &v, a);
                }
                Operator::from_vector(&self.algebra, &v)
            }
        }
    }

    /// The superoperator `A_a` (same product formula as [`Self::average`]).
    pub fn average_super(&self, a: usize) -> Result<SuperOperator> {
        self.average_super_steps(a, DEFAULT_STEPS).map(|(m, _)| m)
    }

    /// As [`Self::average_super`], also returning the quadrature error
    /// estimate for continuous actions (0 otherwise).
    pub fn average_super_steps(&self, a: usize, steps: usize) -> Result<(SuperOperator, f64)> {
        if a == 0 {
            return Err(Error::Unsupported("average index must be at least 1".into()));
        }
        let d = self.algebra.dim();
        let gens = self.generators();
        let mut err = 0.0;
        let matrix = match &self.scheme {
            FolnerScheme::FiniteGroup { .. } => {
                let mut acc = CMat::zeros(d, d);
                for g in gens {
                    acc += g.matrix();
                }
                acc * c(1.0 / gens.len() as f64)
            }
            FolnerScheme::ZplusBox { .. } => {
                let mut acc = CMat::identity(d, d);
                for g in gens {
                    acc = cesaro_matrix(g.matrix(), a) * acc;
                }
                acc
            }
            FolnerScheme::ZSymmetricBox { .. } => {
                let inv = self.inverses().expect("group actions carry inverses");
                let mut acc = CMat::identity(d, d);
                for (g, h) in gens.iter().zip(inv) {
                    acc = symmetric_matrix(g.matrix(), h.matrix(), a) * acc;
                }
                acc
            }
            FolnerScheme::RPlusCube { .. } => {
                let mut acc = CMat::identity(d, d);
                for l in gens {
                    let (m, e) = axis_integral(l.matrix(), a as f64, steps);
                    err += e;
                    acc = m * acc;
                }
                acc
            }
        };
        let mut out = gens[0].with_matrix(matrix);
        out.attestations = average_attestations(&self.discrete_maps());
        Ok((out, err))
    }

    /// Literal average over the Følner set, for cross-validation.
    pub fn brute_force_average(&self, x: &Operator, a: usize) -> Result<Operator> {
        self.algebra.check(x)?;
        let set = folner_set(&self.scheme, a)?;
        let mut acc = CVec::zeros(self.algebra.dim());
        let v = x.vectorize();
        match &set {
            FolnerSet::Points(points) => {
                for g in points {
                    acc += self.element(g)?.apply_vec(&v);
                }
            }
            FolnerSet::Elements(elems) => {
                for &g in elems {
                    acc += self.generators()[g].apply_vec(&v);
                }
            }
            FolnerSet::Cube { .. } => {
                return Err(Error::Unsupported("no enumeration for continuous actions".into()))
            }
        }
        Operator::from_vector(&self.algebra, &(acc * c(1.0 / set.len() as f64)))
    }

    /// `(1/a^d) ∫_{[0,a]^d} α_t(x) dt` with `steps` Simpson panels when the
    /// generators are not safely diagonalizable. Returns the quadrature error
    /// estimate alongside.
    pub fn continuous_average(&self, x: &Operator, a: f64, steps: usize) -> Result<(Operator, f64)> {
        if !self.is_continuous() {
            return Err(Error::Unsupported("continuous_average needs an r-plus-cube action".into()));
        }
        if !self.is_commuting() {
            return Err(Error::Precondition("generators do not commute".into()));
        }
        if !(a > 0.0) {
            return Err(Error::Precondition("averaging horizon must be positive".into()));
        }
        self.algebra.check(x)?;
        let mut v = x.vectorize();
        let mut err = 0.0;
        for l in self.generators() {
            let (m, e) = axis_integral(l.matrix(), a, steps);
            err += e;
            v = m * v;
        }
        Ok((Operator::from_vector(&self.algebra, &v)?, err))
    }
}

/// Simpson panels used when a continuous generator is not diagonalized.
pub const DEFAULT_STEPS: usize = 256;
/// Eigenvector condition number above which quadrature replaces the closed
/// form.
const MAX_EIGEN_CONDITION: f64 = 1e8;

fn average_attestations(maps: &[SuperOperator]) -> maps::Attestations {
    let all = |f: fn(&maps::Attestations) -> &Attestation| maps.iter().all(|m| f(&m.attestations).verdict.is_pass());
    let verdict = |ok: bool| Attestation {
        verdict: if ok { Verdict::Pass } else { Verdict::Unknown },
        witness: None,
    };
    let positive = maps.iter().all(|m| m.attestations.is_positive());
    maps::Attestations {
        complete_positivity: verdict(all(|a| &a.complete_positivity)),
        positivity_sampled: verdict(positive),
        subunital: verdict(positive && all(|a| &a.subunital)),
        l1_contractive: verdict(positive && all(|a| &a.l1_contractive)),
        lamperti: verdict(false),
    }
}

fn cesaro_vec(g: &SuperOperator, v: &CVec, a: usize) -> CVec {
    let mut sum = CVec::zeros(v.len());
    let mut p = v.clone();
    for k in 0..a {
        sum += &p;
        if k + 1 < a {
            p = g.apply_vec(&p);
        }
    }
    sum * c(1.0 / a as f64)
}

fn symmetric_vec(g: &SuperOperator, h: &SuperOperator, v: &CVec, a: usize) -> CVec {
    let mut negative = Vec::with_capacity(a);
    let mut p = v.clone();
    for _ in 0..a {
        p = h.apply_vec(&p);
        negative.push(p.clone());
    }
    let mut sum = CVec::zeros(v.len());
    for q in negative.iter().rev() {
        sum += q;
    }
    let mut p = v.clone();
    sum += &p;
    for _ in 0..a {
        p = g.apply_vec(&p);
        sum += &p;
    }
    sum * c(1.0 / (2 * a + 1) as f64)
}

fn cesaro_matrix(g: &CMat, a: usize) -> CMat {
    let n = g.nrows();
    let mut sum = CMat::zeros(n, n);
    let mut p = CMat::identity(n, n);
    for k in 0..a {
        sum += &p;
        if k + 1 < a {
            p = g * p;
        }
    }
    sum * c(1.0 / a as f64)
}

fn symmetric_matrix(g: &CMat, h: &CMat, a: usize) -> CMat {
    let n = g.nrows();
    let mut negative = Vec::with_capacity(a);
    let mut p = CMat::identity(n, n);
    for _ in 0..a {
        p = h * p;
        negative.push(p.clone());
    }
    let mut sum = CMat::zeros(n, n);
    for q in negative.iter().rev() {
        sum += q;
    }
    let mut p = CMat::identity(n, n);
    sum += &p;
    for _ in 0..a {
        p = g * p;
        sum += &p;
    }
    sum * c(1.0 / (2 * a + 1) as f64)
}

/// `(1/a) ∫₀ᵃ e^{tL} dt` and an error estimate.
///
/// Uses `V φ₁(aΛ) V⁻¹` with `φ₁(z) = (e^z − 1)/z` when `L` has a well
/// conditioned eigenbasis, composite Simpson with a Richardson estimate
/// otherwise.
pub fn axis_integral(l: &CMat, a: f64, steps: usize) -> (CMat, f64) {
    let n = l.nrows();
    if let Some((vals, v)) = linalg::eig_general(l) {
        if linalg::condition_number(&v) <= MAX_EIGEN_CONDITION {
            if let Some(v_inv) = v.clone().try_inverse() {
                let recon = &v * CMat::from_diagonal(&CVec::from_vec(vals.clone())) * &v_inv;
                let err = linalg::max_abs_diff(&recon, l) * a;
                let phi = CVec::from_iterator(n, vals.iter().map(|&z| linalg::phi1(z * c(a))));
                return (&v * CMat::from_diagonal(&phi) * v_inv, err);
            }
        }
    }
    let steps = steps.max(2).next_multiple_of(2);
    let fine = simpson(l, a, steps);
    let coarse = simpson(l, a, steps / 2);
    let err = linalg::max_abs_diff(&fine, &coarse) / 15.0;
    (fine, err)
}

fn simpson(l: &CMat, a: f64, steps: usize) -> CMat {
    let n = l.nrows();
    let h = a / steps as f64;
    let step = linalg::expm(&(l * c(h)));
    let mut p = CMat::identity(n, n);
    let mut sum = CMat::zeros(n, n);
    for k in 0..=steps {
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += &p * c(w);
        if k < steps {
            p = &step * p;
        }
    }
    sum * c(h / 3.0 / a)
}

/// `(1/n) Σ_{k<n} U^k ξ`.
pub fn orbit_average_vector(u: &CMat, xi: &CVec, n: usize) -> Result<CVec> {
    if u.nrows() != u.ncols() || u.ncols() != xi.len() {
        return Err(Error::shape(
            format!("{0}x{0} unitary for a vector of length {0}", xi.len()),
            format!("{}x{}", u.nrows(), u.ncols()),
        ));
    }
    if n == 0 {
        return Err(Error::Precondition("orbit length must be at least 1".into()));
    }
    let mut sum = CVec::zeros(xi.len());
    let mut p = xi.clone();
    for k in 0..n {
        sum += &p;
        if k + 1 < n {
            p = u * p;
        }
    }
    Ok(sum * c(1.0 / n as f64))
}

fn validate_group_table(table: &[Vec<usize>]) -> Result<()> {
    let n = table.len();
    if n == 0 {
        return Err(Error::Validation("empty group table".into()));
    }
    for (g, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Validation(format!("group table row {g} has {} entries, expected {n}", row.len())));
        }
        let mut seen = vec![false; n];
        for &h in row {
            if h >= n || std::mem::replace(&mut seen[h], true) {
                return Err(Error::Validation(format!("group table row {g} is not a permutation")));
            }
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
        .ok_or_else(|| Error::Validation("group table has no identity".into()))?;
    let _ = identity;
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                if table[table[a][b]][cc] != table[a][table[b][cc]] {
                    return Err(Error::Validation(format!("group table is not associative at ({a}, {b}, {cc})")));
                }
            }
        }
    }
    Ok(())
}

fn group_law_report(elements: &[SuperOperator], table: &[Vec<usize>]) -> CheckReport {
    let mut r = CheckReport::passed("group-law", "");
    r.detail = None;
    r.tolerance = tol::COMMUTING;
    for (g, row) in table.iter().enumerate() {
        for (h, &gh) in row.iter().enumerate() {
            let prod = elements[g].matrix() * elements[h].matrix();
            let dev = linalg::max_abs_diff(&prod, elements[gh].matrix());
            r.samples += 1;
            r.measured = r.measured.max(dev);
        }
    }
    if r.measured > r.tolerance {
        r.verdict = Verdict::Fail;
        r.detail = Some("maps do not follow the group table".into());
    }
    r
}
