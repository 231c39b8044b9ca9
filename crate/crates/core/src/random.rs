//! Seeded random elements for randomized checks and tests.
//!
//! Everything is driven by a ChaCha8 stream so a seed fully determines the
//! sample sequence.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{self, Operator, TracialAlgebra};
use crate::linalg::{c, CMat, CVec};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn gaussian(&mut self, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| Complex64::new(self.normal(), self.normal()))
    }

    pub fn gaussian_vector(&mut self, n: usize) -> CVec {
        CVec::from_fn(n, |_, _| Complex64::new(self.normal(), self.normal()))
    }

    /// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
    pub fn unitary_matrix(&mut self, n: usize) -> CMat {
        let qr = self.gaussian(n, n).qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
            let mut col = q.column_mut(j);
            col *= phase;
        }
        q
    }

    pub fn operator(&mut self, alg: &TracialAlgebra) -> Operator {
        let blocks = alg.blocks().iter().map(|&n| self.gaussian(n, n)).collect();
        Operator::from_blocks(alg, blocks).expect("shapes match")
    }

    pub fn hermitian(&mut self, alg: &TracialAlgebra) -> Operator {
        self.operator(alg).hermitian_part()
    }

    /// `g g*` for a Gaussian `g`: almost surely full rank.
    pub fn positive(&mut self, alg: &TracialAlgebra) -> Operator {
        let g = self.operator(alg);
        &g * &g.adjoint()
    }

    /// Positive operator of rank at most `rank` in each block.
    pub fn positive_low_rank(&mut self, alg: &TracialAlgebra, rank: usize) -> Operator {
        let blocks = alg
            .blocks()
            .iter()
            .map(|&n| {
                let g = self.gaussian(n, rank.min(n));
                &g * g.adjoint()
            })
            .collect();
        Operator::from_blocks(alg, blocks).expect("shapes match")
    }

    /// Positive density with `τ(ρ) = 1`.
    pub fn density(&mut self, alg: &TracialAlgebra) -> Operator {
        let p = self.positive(alg);
        let t = algebra::trace(alg, &p).expect("shapes match").re;
        p.scale(1.0 / t)
    }

    /// Density bounded below by a multiple of the identity, hence faithful.
    pub fn faithful_density(&mut self, alg: &TracialAlgebra) -> Operator {
        let p = &self.positive(alg) + &alg.identity().scale(0.1 + self.uniform(0.0, 0.5));
        let t = algebra::trace(alg, &p).expect("shapes match").re;
        p.scale(1.0 / t)
    }

    /// Unitary element of the algebra (Haar in every block).
    pub fn unitary(&mut self, alg: &TracialAlgebra) -> Operator {
        let blocks = alg.blocks().iter().map(|&n| self.unitary_matrix(n)).collect();
        Operator::from_blocks(alg, blocks).expect("shapes match")
    }
}
