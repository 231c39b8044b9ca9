//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entrywise deviation from hermiticity.
pub(crate) fn hermitian_deviation(m: &CMat) -> f64 {
    let mut dev = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows().saturating_sub(1)) {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

/// Eigen-decomposition of a hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first so tiny antihermitian noise does not leak
/// into the eigenvectors.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    // nalgebra's SVD does not terminate on non-finite input.
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return vec![f64::NAN; m.nrows().min(m.ncols())];
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis (as columns) of the right null space of `m`.
///
/// Singular values at or below `threshold` count as zero. Wide matrices are
/// padded with zero rows so the SVD exposes the whole kernel.
pub fn null_space(m: &CMat, threshold: f64) -> CMat {
    let (r, cols) = m.shape();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    let padded;
    let a = if r < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (r, cols)).copy_from(m);
        padded = p;
        &padded
    } else {
        m
    };
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let picked: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= threshold)
        .collect();
    let mut basis = CMat::zeros(cols, picked.len());
    for (dst, &k) in picked.iter().enumerate() {
        let row = v_t.row(k);
        for i in 0..cols {
            basis[(i, dst)] = row[i].conj();
        }
    }
    basis
}

/// Spectral (Riesz) projection of `a` onto the eigenvalue `lambda`, assuming
/// the eigenvalue is semisimple.
///
/// Built from right and left kernels of `a - λ`: `P = V (Wᴴ V)⁻¹ Wᴴ`.
pub fn riesz_projection(a: &CMat, lambda: Complex64, threshold: f64) -> Result<CMat> {
    let n = a.nrows();
    let shifted = a - CMat::identity(n, n) * lambda;
    let right = null_space(&shifted, threshold);
    let left = null_space(&shifted.adjoint(), threshold);
    if right.ncols() != left.ncols() {
        return Err(Error::Validation(format!(
            "eigenvalue {lambda} has {} right but {} left eigenvectors",
            right.ncols(),
            left.ncols()
        )));
    }
    if right.ncols() == 0 {
        return Ok(CMat::zeros(n, n));
    }
    let gram = left.adjoint() * &right;
    let inv = gram.clone().try_inverse().ok_or_else(|| {
        Error::Validation(format!("eigenvalue {lambda} is not semisimple (singular Gram matrix)"))
    })?;
    Ok(&right * inv * left.adjoint())
}

pub fn expm(m: &CMat) -> CMat {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.exp()
}

/// Eigen-decomposition of a general square matrix through its complex Schur
/// form. Returns `None` when the eigenvector matrix is numerically singular.
pub fn eig_general(m: &CMat) -> Option<(Vec<Complex64>, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Some((Vec::new(), CMat::zeros(0, 0)));
    }
    let (q, t) = m.clone().try_schur(1e-14, 10_000)?.unpack();
    let scale = t.norm().max(1.0);
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut acc = ZERO;
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < 1e-14 * scale {
                denom = Complex64::new(1e-14 * scale, 0.0);
            }
            y[(i, k)] = -acc / denom;
        }
        let norm = y.column(k).norm();
        y.column_mut(k).unscale_mut(norm);
    }
    let vectors = q * y;
    if vectors.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    let values = (0..n).map(|k| t[(k, k)]).collect();
    Some((values, vectors))
}

/// 2-norm condition number.
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// `(e^{z} - 1) / z`, with the removable singularity at zero filled in.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        // 1 + z/2 + z²/6 + z³/24
        ONE + z * (c(0.5) + z * (c(1.0 / 6.0) + z * c(1.0 / 24.0)))
    } else {
        (z.exp() - ONE) / z
    }
}

pub(crate) fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_projection_of_diagonal_matrix() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.5), c(1.0)]));
        let p = riesz_projection(&a, ONE, 1e-9).unwrap();
        let expected = CMat::from_diagonal(&CVec::from_vec(vec![ONE, ZERO, ONE]));
        assert!(max_abs_diff(&p, &expected) < 1e-12);
    }

    #[test]
    fn riesz_projection_is_oblique_for_nonnormal_input() {
        // [[1, 1], [0, 0.5]] has eigenvalue 1 with right vector e0, left vector (1, 2).
        let a = CMat::from_row_slice(2, 2, &[c(1.0), c(1.0), ZERO, c(0.5)]);
        let p = riesz_projection(&a, ONE, 1e-9).unwrap();
        assert!(max_abs_diff(&(&p * &p), &p) < 1e-12);
        assert!(max_abs_diff(&(&a * &p), &p) < 1e-12);
        assert!((p[(0, 1)] - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn general_eigendecomposition_reconstructs() {
        let a = CMat::from_row_slice(
            3,
            3,
            &[c(0.0), c(1.0), c(0.0), c(-1.0), c(0.0), c(0.0), c(0.0), c(0.3), c(-0.5)],
        );
        let (vals, vecs) = eig_general(&a).unwrap();
        let lam = CMat::from_diagonal(&CVec::from_vec(vals));
        let recon = &vecs * lam * vecs.clone().try_inverse().unwrap();
        assert!(max_abs_diff(&recon, &a) < 1e-10);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = CMat::from_row_slice(1, 3, &[ONE, ONE, ZERO]);
        let ns = null_space(&a, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!((a * ns).norm() < 1e-12);
    }

    #[test]
    fn phi1_matches_closed_form() {
        let v = phi1(c(-2.0));
        assert!((v.re - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
        assert!((phi1(ZERO) - ONE).norm() < 1e-15);
    }
}
