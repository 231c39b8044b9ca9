//! Finite-dimensional tracial von Neumann algebras.
//!
//! An algebra is a direct sum `M_{n_1} ⊕ … ⊕ M_{n_k}` with trace
//! `τ(x) = Σ_i w_i tr(x_i)`. Elements are stored block by block; the same
//! [`Operator`] type represents bounded elements of `M` and densities in
//! `L¹(M, τ)`, the distinction being only which norm is applied.
//!
//! Vectorization (used by superoperators) is block-major, and inside each
//! block column-stacked, i.e. the nalgebra storage order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, ZERO};
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracialAlgebra {
    blocks: Vec<usize>,
    weights: Vec<f64>,
    normalized: bool,
}

impl TracialAlgebra {
    pub fn new(blocks: Vec<usize>, weights: Vec<f64>, normalized: bool) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        if blocks.len() != weights.len() {
            return Err(Error::InvalidAlgebra(format!(
                "{} blocks but {} weights",
                blocks.len(),
                weights.len()
            )));
        }
        if let Some(i) = blocks.iter().position(|&n| n == 0) {
            return Err(Error::InvalidAlgebra(format!("block {i} has dimension 0")));
        }
        if let Some(i) = weights.iter().position(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidAlgebra(format!(
                "weight {i} = {} is not strictly positive",
                weights[i]
            )));
        }
        if normalized {
            let total: f64 = blocks.iter().zip(&weights).map(|(&n, &w)| n as f64 * w).sum();
            if (total - 1.0).abs() > tol::NORMALIZATION {
                return Err(Error::InvalidAlgebra(format!(
                    "normalized flag set but τ(1) = {total}"
                )));
            }
        }
        Ok(Self {
            blocks,
            weights,
            normalized,
        })
    }

    /// Direct sum of the given blocks with the uniform normalized trace `tr/N`.
    pub fn normalized(blocks: Vec<usize>) -> Self {
        let total: usize = blocks.iter().sum();
        let w = 1.0 / total as f64;
        let weights = vec![w; blocks.len()];
        Self::new(blocks, weights, true).expect("uniform weights are valid")
    }

    /// `M_n` with `τ = tr/n`.
    pub fn matrix(n: usize) -> Self {
        Self::normalized(vec![n])
    }

    /// `ℂⁿ` (diagonal matrices) with the uniform probability trace.
    pub fn commutative(n: usize) -> Self {
        Self::normalized(vec![1; n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    /// Vector-space dimension `Σ n_i²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Size `Σ n_i` of the matrices the algebra embeds into.
    pub fn size(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Offsets of each block inside the vectorization.
    pub(crate) fn vec_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.blocks
            .iter()
            .map(|n| {
                let o = acc;
                acc += n * n;
                o
            })
            .collect()
    }

    /// Offsets of each block along the diagonal of the embedding `M_N`.
    pub(crate) fn diag_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.blocks
            .iter()
            .map(|n| {
                let o = acc;
                acc += n;
                o
            })
            .collect()
    }

    /// `τ(1)`.
    pub fn unit_trace(&self) -> f64 {
        self.blocks.iter().zip(&self.weights).map(|(&n, &w)| n as f64 * w).sum()
    }

    /// Per-entry weight of the vectorization (the `W` of the trace pairing).
    pub(crate) fn vec_weights(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .zip(&self.weights)
            .flat_map(|(&n, &w)| std::iter::repeat_n(w, n * n))
            .collect()
    }

    pub fn identity(&self) -> Operator {
        Operator::from_blocks_unchecked(self.blocks.iter().map(|&n| CMat::identity(n, n)).collect())
    }

    pub fn zero(&self) -> Operator {
        Operator::from_blocks_unchecked(self.blocks.iter().map(|&n| CMat::zeros(n, n)).collect())
    }

    /// The faithful density of the normalized trace, `1 / τ(1)`.
    pub fn uniform_density(&self) -> Operator {
        self.identity().scale(1.0 / self.unit_trace())
    }

    pub(crate) fn check(&self, x: &Operator) -> Result<()> {
        let shapes: Vec<usize> = x.blocks.iter().map(|b| b.nrows()).collect();
        let square = x.blocks.iter().all(|b| b.is_square());
        if !square || shapes != self.blocks {
            return Err(Error::shape(
                format!("blocks {:?}", self.blocks),
                format!(
                    "blocks {:?}",
                    x.blocks.iter().map(|b| b.shape()).collect::<Vec<_>>()
                ),
            ));
        }
        Ok(())
    }

    /// Elementary matrix unit `E_{rc}` in block `block`.
    pub fn unit(&self, block: usize, row: usize, col: usize) -> Operator {
        let mut x = self.zero();
        x.blocks[block][(row, col)] = linalg::ONE;
        x
    }

    /// Enumerates `(block, row, col)` in vectorization order.
    pub(crate) fn basis_indices(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for (b, &n) in self.blocks.iter().enumerate() {
            for col in 0..n {
                for row in 0..n {
                    out.push((b, row, col));
                }
            }
        }
        out
    }
}

/// An element of a [`TracialAlgebra`], stored as per-block matrices.
pub struct Operator {
    blocks: Vec<CMat>,
    hermitian: OnceLock<bool>,
    positive: OnceLock<bool>,
}

impl Clone for Operator {
    fn clone(&self) -> Self {
        Self {
            blocks: self.blocks.clone(),
            hermitian: self.hermitian.clone(),
            positive: self.positive.clone(),
        }
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator").field("blocks", &self.blocks).finish()
    }
}

impl Operator {
    pub(crate) fn from_blocks_unchecked(blocks: Vec<CMat>) -> Self {
        Self {
            blocks,
            hermitian: OnceLock::new(),
            positive: OnceLock::new(),
        }
    }

    pub fn from_blocks(alg: &TracialAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        let x = Self::from_blocks_unchecked(blocks);
        alg.check(&x)?;
        Ok(x)
    }

    /// Real diagonal operator; `diag` runs over all `Σ n_i` diagonal slots.
    pub fn from_diagonal(alg: &TracialAlgebra, diag: &[f64]) -> Result<Self> {
        if diag.len() != alg.size() {
            return Err(Error::shape(
                format!("{} diagonal entries", alg.size()),
                format!("{} entries", diag.len()),
            ));
        }
        let mut x = alg.zero();
        let offsets = alg.diag_offsets();
        for (b, &n) in alg.blocks().iter().enumerate() {
            for k in 0..n {
                x.blocks[b][(k, k)] = c(diag[offsets[b] + k]);
            }
        }
        Ok(x)
    }

    /// Restricts a full `N × N` matrix to the block diagonal, rejecting
    /// off-block mass above `tol::OFF_BLOCK · max(1, ‖m‖)`.
    pub fn from_dense(alg: &TracialAlgebra, m: &CMat) -> Result<Self> {
        let n = alg.size();
        if m.shape() != (n, n) {
            return Err(Error::shape(format!("{n}x{n}"), format!("{}x{}", m.nrows(), m.ncols())));
        }
        let (x, off) = Self::split_dense(alg, m);
        if off > tol::OFF_BLOCK * m.norm().max(1.0) {
            return Err(Error::LeavesAlgebra { deviation: off });
        }
        Ok(x)
    }

    pub(crate) fn split_dense(alg: &TracialAlgebra, m: &CMat) -> (Self, f64) {
        let offsets = alg.diag_offsets();
        let blocks: Vec<CMat> = alg
            .blocks()
            .iter()
            .zip(&offsets)
            .map(|(&n, &o)| m.view((o, o), (n, n)).into_owned())
            .collect();
        // Sum the off-block entries directly; subtracting block norms from
        // the total cancels catastrophically.
        let mut owner = Vec::with_capacity(m.nrows());
        for (i, &n) in alg.blocks().iter().enumerate() {
            owner.extend(std::iter::repeat_n(i, n));
        }
        let mut off = 0.0;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if owner[i] != owner[j] {
                    off += m[(i, j)].norm_sqr();
                }
            }
        }
        (Self::from_blocks_unchecked(blocks), off.sqrt())
    }

    /// Embeds the operator block-diagonally into `M_N`.
    pub fn to_dense(&self) -> CMat {
        let n: usize = self.blocks.iter().map(|b| b.nrows()).sum();
        let mut m = CMat::zeros(n, n);
        let mut o = 0;
        for b in &self.blocks {
            let k = b.nrows();
            m.view_mut((o, o), (k, k)).copy_from(b);
            o += k;
        }
        m
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn vectorize(&self) -> CVec {
        let len: usize = self.blocks.iter().map(|b| b.len()).sum();
        let mut v = CVec::zeros(len);
        let mut o = 0;
        for b in &self.blocks {
            v.rows_mut(o, b.len()).copy_from_slice(b.as_slice());
            o += b.len();
        }
        v
    }

    pub fn from_vector(alg: &TracialAlgebra, v: &CVec) -> Result<Self> {
        if v.len() != alg.dim() {
            return Err(Error::shape(
                format!("vector of length {}", alg.dim()),
                format!("length {}", v.len()),
            ));
        }
        let mut o = 0;
        let blocks = alg
            .blocks()
            .iter()
            .map(|&n| {
                let b = CMat::from_column_slice(n, n, &v.as_slice()[o..o + n * n]);
                o += n * n;
                b
            })
            .collect();
        Ok(Self::from_blocks_unchecked(blocks))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_blocks_unchecked(self.blocks.iter().map(|b| b.adjoint()).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_complex(c(s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self::from_blocks_unchecked(self.blocks.iter().map(|b| b * s).collect())
    }

    pub fn hermitian_part(&self) -> Self {
        Self::from_blocks_unchecked(self.blocks.iter().map(linalg::hermitian_part).collect())
    }

    /// Frobenius (unweighted Hilbert–Schmidt) norm.
    pub fn hs_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    /// `‖x − x*‖ ≤ 1e−12·‖x‖`, computed once.
    pub fn is_hermitian(&self) -> bool {
        *self.hermitian.get_or_init(|| {
            let dev = self
                .blocks
                .iter()
                .map(linalg::hermitian_deviation)
                .fold(0.0, f64::max);
            dev <= tol::HERMITIAN * op_norm(self).max(f64::MIN_POSITIVE)
        })
    }

    /// Hermitian with min eigenvalue ≥ −1e−10·‖x‖, computed once.
    pub fn is_positive(&self) -> bool {
        *self.positive.get_or_init(|| {
            self.is_hermitian() && min_eigenvalue(self) >= -tol::POSITIVE * op_norm(self)
        })
    }

    fn zip_with(&self, other: &Operator, f: impl Fn(&CMat, &CMat) -> CMat) -> Operator {
        assert_eq!(
            self.blocks.len(),
            other.blocks.len(),
            "operators from different algebras"
        );
        Operator::from_blocks_unchecked(
            self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        )
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

// Blocks serialize as arrays of row-major matrices of [re, im] pairs.
pub(crate) type WireMatrix = Vec<Vec<[f64; 2]>>;

pub(crate) fn matrix_to_wire(m: &CMat) -> WireMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn matrix_from_wire(rows: &WireMatrix) -> std::result::Result<CMat, String> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if let Some(i) = rows.iter().position(|r| r.len() != m) {
        return Err(format!("row {i} has {} entries, expected {m}", rows[i].len()));
    }
    Ok(CMat::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire: Vec<WireMatrix> = self.blocks.iter().map(matrix_to_wire).collect();
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire: Vec<WireMatrix> = Vec::deserialize(d)?;
        let blocks = wire
            .iter()
            .map(matrix_from_wire)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        if let Some(b) = blocks.iter().find(|b| !b.is_square()) {
            return Err(serde::de::Error::custom(format!(
                "block of shape {}x{} is not square",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Operator::from_blocks_unchecked(blocks))
    }
}

/// A self-adjoint idempotent, with its rank in each block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Projection {
    op: Operator,
    ranks: Vec<usize>,
}

impl Projection {
    /// Validates `e² = e`, `e = e*` and the {0, 1} spectrum.
    pub fn from_operator(alg: &TracialAlgebra, op: Operator) -> Result<Self> {
        alg.check(&op)?;
        let sq = &op * &op;
        let idem = sq.max_abs_diff(&op);
        let herm = op.max_abs_diff(&op.adjoint());
        if idem > tol::PROJECTION || herm > tol::PROJECTION {
            return Err(Error::Validation(format!(
                "not a projection: ‖e²−e‖ = {idem:.3e}, ‖e−e*‖ = {herm:.3e}"
            )));
        }
        let mut ranks = Vec::with_capacity(op.blocks.len());
        for b in &op.blocks {
            let (vals, _) = linalg::eigh(b);
            let mut r = 0;
            for v in vals {
                if (v - 1.0).abs() <= tol::PROJECTION_SPECTRUM {
                    r += 1;
                } else if v.abs() > tol::PROJECTION_SPECTRUM {
                    return Err(Error::Validation(format!("projection eigenvalue {v}")));
                }
            }
            ranks.push(r);
        }
        Ok(Self { op, ranks })
    }

    /// Projection onto the span of orthonormal columns, block by block.
    pub(crate) fn from_columns(per_block: Vec<CMat>) -> Self {
        let ranks = per_block.iter().map(|v| v.ncols()).collect();
        let blocks = per_block.iter().map(|v| v * v.adjoint()).collect();
        Self {
            op: Operator::from_blocks_unchecked(blocks),
            ranks,
        }
    }

    pub fn zero(alg: &TracialAlgebra) -> Self {
        Self {
            op: alg.zero(),
            ranks: vec![0; alg.blocks().len()],
        }
    }

    pub fn identity(alg: &TracialAlgebra) -> Self {
        Self {
            op: alg.identity(),
            ranks: alg.blocks().to_vec(),
        }
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    /// `1 − e`.
    pub fn complement(&self, alg: &TracialAlgebra) -> Self {
        // Blocks where e is 0 or 1 get an exact complement, so that a zero
        // projection never carries rounding noise.
        let blocks = self
            .op
            .blocks
            .iter()
            .zip(&self.ranks)
            .map(|(b, &r)| {
                let n = b.nrows();
                if r == 0 {
                    CMat::identity(n, n)
                } else if r == n {
                    CMat::zeros(n, n)
                } else {
                    CMat::identity(n, n) - b
                }
            })
            .collect();
        Self {
            op: Operator::from_blocks_unchecked(blocks),
            ranks: alg.blocks().iter().zip(&self.ranks).map(|(n, r)| n - r).collect(),
        }
    }

    /// `τ(e) = Σ w_i rank_i`.
    pub fn trace(&self, alg: &TracialAlgebra) -> f64 {
        self.ranks.iter().zip(alg.weights()).map(|(&r, &w)| r as f64 * w).sum()
    }

    /// Sum of two orthogonal projections.
    pub fn orthogonal_sum(&self, other: &Projection) -> Result<Self> {
        let overlap = op_norm(&(&self.op * &other.op));
        if overlap > tol::PROJECTION {
            return Err(Error::Validation(format!(
                "projections are not orthogonal (‖pq‖ = {overlap:.3e})"
            )));
        }
        Ok(Self {
            op: &self.op + &other.op,
            ranks: self.ranks.iter().zip(&other.ranks).map(|(a, b)| a + b).collect(),
        })
    }

    /// `e ≤ f` in the projection order.
    pub fn is_below(&self, other: &Projection) -> bool {
        let fe = &other.op * &self.op;
        fe.max_abs_diff(&self.op) <= tol::PROJECTION * 10.0
    }
}

/// Half-open real interval `[lo, hi)`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn at_least(lo: f64) -> Self {
        Self::new(lo, f64::INFINITY)
    }

    pub fn below(hi: f64) -> Self {
        Self::new(f64::NEG_INFINITY, hi)
    }

    /// Membership with endpoint snapping: values within `INTERVAL_EDGE` of an
    /// endpoint count as sitting on it.
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo - tol::INTERVAL_EDGE && v < self.hi - tol::INTERVAL_EDGE
    }
}

pub fn trace(alg: &TracialAlgebra, x: &Operator) -> Result<Complex64> {
    alg.check(x)?;
    Ok(trace_unchecked(alg, x))
}

pub(crate) fn trace_unchecked(alg: &TracialAlgebra, x: &Operator) -> Complex64 {
    x.blocks
        .iter()
        .zip(alg.weights())
        .map(|(b, &w)| b.trace() * w)
        .fold(ZERO, |a, b| a + b)
}

/// `τ(x y)` without forming the product.
pub fn pairing(alg: &TracialAlgebra, x: &Operator, y: &Operator) -> Complex64 {
    let mut acc = ZERO;
    for ((a, b), &w) in x.blocks.iter().zip(&y.blocks).zip(alg.weights()) {
        let n = a.nrows();
        let mut t = ZERO;
        for i in 0..n {
            for k in 0..n {
                t += a[(i, k)] * b[(k, i)];
            }
        }
        acc += t * w;
    }
    acc
}

/// `‖x‖₁ = τ(|x|)`.
pub fn trace_norm(alg: &TracialAlgebra, x: &Operator) -> f64 {
    x.blocks
        .iter()
        .zip(alg.weights())
        .map(|(b, &w)| w * linalg::singular_values(b).iter().sum::<f64>())
        .sum()
}

/// Operator norm: largest singular value over all blocks.
pub fn op_norm(x: &Operator) -> f64 {
    x.blocks.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
}

fn check_hermitian(x: &Operator) -> Result<()> {
    if x.is_hermitian() {
        return Ok(());
    }
    let deviation = x
        .blocks
        .iter()
        .map(linalg::hermitian_deviation)
        .fold(0.0, f64::max);
    Err(Error::NotHermitian { deviation })
}

/// Hermiticity deviation relative to the operator norm.
pub(crate) fn hermitian_deviation_rel(x: &Operator) -> f64 {
    let dev = x
        .blocks
        .iter()
        .map(linalg::hermitian_deviation)
        .fold(0.0, f64::max);
    dev / op_norm(x).max(f64::MIN_POSITIVE)
}

pub(crate) fn min_eigenvalue(x: &Operator) -> f64 {
    x.blocks
        .iter()
        .filter_map(|b| linalg::eigh(b).0.first().copied())
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn max_eigenvalue(x: &Operator) -> f64 {
    x.blocks
        .iter()
        .filter_map(|b| linalg::eigh(b).0.last().copied())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Eigenvalues of a hermitian operator paired with their spectral
/// projections, ascending. Eigenvalues closer than `1e−10·‖h‖` are merged.
pub fn spectral_decompose(alg: &TracialAlgebra, h: &Operator) -> Result<Vec<(f64, Projection)>> {
    alg.check(h)?;
    check_hermitian(h)?;
    let gap = tol::CLUSTER_GAP * op_norm(h);
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    let mut vectors = Vec::with_capacity(h.blocks.len());
    for (b, block) in h.blocks.iter().enumerate() {
        let (vals, vecs) = linalg::eigh(block);
        entries.extend(vals.iter().enumerate().map(|(k, &v)| (v, b, k)));
        vectors.push(vecs);
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut clusters: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for e in entries {
        match clusters.last_mut() {
            Some(cl) if e.0 - cl.last().unwrap().0 <= gap => cl.push(e),
            _ => clusters.push(vec![e]),
        }
    }

    Ok(clusters
        .into_iter()
        .map(|cl| {
            let value = cl.iter().map(|e| e.0).sum::<f64>() / cl.len() as f64;
            let per_block = alg
                .blocks()
                .iter()
                .enumerate()
                .map(|(b, &n)| {
                    let cols: Vec<usize> = cl.iter().filter(|e| e.1 == b).map(|e| e.2).collect();
                    let mut m = CMat::zeros(n, cols.len());
                    for (dst, &k) in cols.iter().enumerate() {
                        m.set_column(dst, &vectors[b].column(k));
                    }
                    m
                })
                .collect();
            (value, Projection::from_columns(per_block))
        })
        .collect())
}

/// `χ_I(h)` for a half-open interval `I`.
pub fn spectral_projection(alg: &TracialAlgebra, h: &Operator, interval: Interval) -> Result<Projection> {
    let parts = spectral_decompose(alg, h)?;
    let mut acc = Projection::zero(alg);
    for (value, p) in parts {
        if interval.contains(value) {
            acc = Projection {
                op: &acc.op + &p.op,
                ranks: acc.ranks.iter().zip(&p.ranks).map(|(a, b)| a + b).collect(),
            };
        }
    }
    Ok(acc)
}

/// Projection onto the eigenvectors of `h` (block by block) whose
/// eigenvalues satisfy `keep`. No clustering; used where the caller already
/// fixes the threshold.
pub(crate) fn eigen_filter(h: &Operator, keep: impl Fn(f64) -> bool) -> Projection {
    let per_block = h
        .blocks
        .iter()
        .map(|b| {
            let (vals, vecs) = linalg::eigh(b);
            let cols: Vec<usize> = (0..vals.len()).filter(|&k| keep(vals[k])).collect();
            let mut m = CMat::zeros(b.nrows(), cols.len());
            for (dst, &k) in cols.iter().enumerate() {
                m.set_column(dst, &vecs.column(k));
            }
            m
        })
        .collect();
    Projection::from_columns(per_block)
}

/// Support projection `s(x)` of a positive operator: the spectral projection
/// above `θ = 1e−10·max(λ_max, 1)`.
pub fn support(alg: &TracialAlgebra, x: &Operator) -> Result<Projection> {
    alg.check(x)?;
    check_hermitian(x)?;
    if !x.is_positive() {
        return Err(Error::NotPositive {
            min_eigenvalue: min_eigenvalue(x),
        });
    }
    let top = max_eigenvalue(x).max(1.0);
    let threshold = tol::SUPPORT * top;
    Ok(eigen_filter(x, |v| v > threshold))
}

/// `|x| = (x*x)^{1/2}`, computed from the SVD of each block.
pub fn abs(x: &Operator) -> Operator {
    let blocks = x
        .blocks
        .iter()
        .map(|b| {
            if b.is_empty() {
                return b.clone();
            }
            let svd = b.clone().svd(false, true);
            let v_t = svd.v_t.expect("v_t requested");
            let s = CMat::from_diagonal(&svd.singular_values.map(c));
            let m = v_t.adjoint() * s * &v_t;
            linalg::hermitian_part(&m)
        })
        .collect();
    Operator::from_blocks_unchecked(blocks)
}

/// `τ(χ_{(ε,∞)}(|x|))`: the trace of the part of `|x|` strictly above `ε`.
pub fn distribution(alg: &TracialAlgebra, x: &Operator, eps: f64) -> f64 {
    x.blocks
        .iter()
        .zip(alg.weights())
        .map(|(b, &w)| w * linalg::singular_values(b).iter().filter(|&&s| s > eps).count() as f64)
        .sum()
}

/// `x ≤ y` in the operator order, up to `1e−9·(‖x‖ + ‖y‖ + 1)`.
pub fn order_leq(alg: &TracialAlgebra, x: &Operator, y: &Operator) -> Result<bool> {
    alg.check(x)?;
    alg.check(y)?;
    check_hermitian(x)?;
    check_hermitian(y)?;
    let slack = tol::ORDER * (op_norm(x) + op_norm(y) + 1.0);
    Ok(min_eigenvalue(&(y - x)) >= -slack)
}
