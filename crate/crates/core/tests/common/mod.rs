#![allow(dead_code)]

use nc_ergodic::linalg::{self, CMat};
use nc_ergodic::maps::{self, SuperOperator};
use nc_ergodic::random::Sampler;
use nc_ergodic::{Operator, Picture, SemigroupAction, TracialAlgebra};
use num_complex::Complex64;

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Random direct sum of up to three blocks of size ≤ 3, with random
/// weights and normalized or not.
pub fn random_algebra(s: &mut Sampler) -> TracialAlgebra {
    let k = 1 + s.index(3);
    let blocks: Vec<usize> = (0..k).map(|_| 1 + s.index(3)).collect();
    let mut weights: Vec<f64> = (0..k).map(|_| s.uniform(0.2, 2.0)).collect();
    let normalized = s.chance(0.5);
    if normalized {
        let total: f64 = blocks.iter().zip(&weights).map(|(&n, &w)| n as f64 * w).sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }
    TracialAlgebra::new(blocks, weights, normalized).unwrap()
}

/// Random block-diagonal Kraus family with `Σ K* K ≤ scale · 1`.
pub fn random_kraus(alg: &TracialAlgebra, s: &mut Sampler, count: usize, scale: f64) -> Vec<CMat> {
    let ks: Vec<CMat> = (0..count).map(|_| s.operator(alg).to_dense()).collect();
    let n = alg.size();
    let mut sum = CMat::zeros(n, n);
    for k in &ks {
        sum += k.adjoint() * k;
    }
    let norm = linalg::spectral_norm(&sum);
    ks.into_iter().map(|k| k * c((scale / norm).sqrt())).collect()
}

/// Random completely positive subunital Heisenberg map.
pub fn random_cp(alg: &TracialAlgebra, s: &mut Sampler) -> SuperOperator {
    let count = 1 + s.index(3);
    let scale = s.uniform(0.6, 1.0);
    maps::from_kraus(alg, &random_kraus(alg, s, count, scale)).unwrap()
}

/// Random unital CP map: Kraus operators normalized by `(Σ K*K)^{-1/2}`.
pub fn random_unital_cp(alg: &TracialAlgebra, s: &mut Sampler) -> SuperOperator {
    let count = 1 + s.index(3);
    let ks: Vec<CMat> = (0..count).map(|_| s.operator(alg).to_dense()).collect();
    let n = alg.size();
    let mut sum = CMat::zeros(n, n);
    for k in &ks {
        sum += k.adjoint() * k;
    }
    let (vals, vecs) = linalg::eigh(&sum);
    let inv_sqrt = &vecs * CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, vals.iter().map(|v| c(v.powf(-0.5))))) * vecs.adjoint();
    let ks: Vec<CMat> = ks.into_iter().map(|k| k * &inv_sqrt).collect();
    maps::from_kraus(alg, &ks).unwrap()
}

/// Random row-substochastic kernel: each row sums to 1 with probability
/// `p_full`, otherwise to a value in `(0.5, 1)`; entries are sparse.
pub fn random_kernel(s: &mut Sampler, n: usize, p_full: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..n).map(|_| if s.chance(0.4) { s.uniform(0.0, 1.0) } else { 0.0 }).collect();
            if row.iter().all(|&v| v == 0.0) {
                row[s.index(n)] = 1.0;
            }
            let total: f64 = row.iter().sum();
            let target = if s.chance(p_full) { 1.0 } else { s.uniform(0.5, 1.0) };
            row.iter_mut().for_each(|v| *v *= target / total);
            row
        })
        .collect()
}

pub fn conjugated_amplitude_damping(s: &mut Sampler, g: f64) -> SuperOperator {
    let alg = TracialAlgebra::matrix(2);
    let v = s.unitary_matrix(2);
    let ks: Vec<CMat> = maps::amplitude_damping_kraus(g)
        .into_iter()
        .map(|k| &v * k * v.adjoint())
        .collect();
    maps::from_kraus(&alg, &ks).unwrap()
}

/// One of several single-generator action families, chosen by the sampler:
/// random unital channels, rotated amplitude damping, classical chains.
pub fn random_action(s: &mut Sampler) -> SemigroupAction {
    let gen = match s.index(3) {
        0 => {
            let alg = random_algebra(s);
            random_unital_cp(&alg, s)
        }
        1 => {
            let g = s.uniform(0.2, 0.9);
            conjugated_amplitude_damping(s, g)
        }
        _ => {
            let n = 2 + s.index(4);
            let alg = TracialAlgebra::commutative(n);
            maps::from_classical(&alg, &random_kernel(s, n, 0.7)).unwrap()
        }
    };
    SemigroupAction::discrete(Picture::Heisenberg, vec![gen]).unwrap()
}

pub fn permutation_matrix(perm: &[usize]) -> CMat {
    let n = perm.len();
    let mut m = CMat::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        m[(i, j)] = c(1.0);
    }
    m
}

pub fn random_permutation(s: &mut Sampler, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, s.index(i + 1));
    }
    p
}

pub fn operator(alg: &TracialAlgebra, m: CMat) -> Operator {
    Operator::from_blocks(alg, vec![m]).unwrap()
}

/// States carried by some stationary distribution `μK = μ`, from the null
/// space of `Kᵀ − I` (real SVD, independent of the library's spectral code).
///
/// For a substochastic kernel `|μ|` is stationary whenever `μ` is, so the
/// union of supports over the null space is the joint support.
pub fn stationary_support_eigen(kernel: &[Vec<f64>]) -> Vec<bool> {
    let n = kernel.len();
    let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| kernel[j][i] - if i == j { 1.0 } else { 0.0 });
    let svd = m.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let null: Vec<usize> = (0..n).filter(|&k| svd.singular_values[k] < 1e-9).collect();
    (0..n)
        .map(|i| null.iter().map(|&k| v_t[(k, i)].powi(2)).sum::<f64>().sqrt() > 1e-8)
        .collect()
}

/// The same support from the transition graph: states in closed
/// communicating classes whose rows keep all their mass.
pub fn stationary_support_graph(kernel: &[Vec<f64>]) -> Vec<bool> {
    let n = kernel.len();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        reach[i][i] = true;
        for j in 0..n {
            if kernel[i][j] > 0.0 {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
            let closed = (0..n).all(|j| !reach[i][j] || reach[j][i]);
            let conservative = class.iter().all(|&j| (kernel[j].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            closed && conservative
        })
        .collect()
}
