//! Closed-form and brute-force checks against hand-computable examples.

mod common;

use common::*;
use nc_ergodic::algebra;
use nc_ergodic::dynamics::{folner_ratio, folner_set, FolnerScheme, FolnerSet};
use nc_ergodic::linalg;
use nc_ergodic::maps;
use nc_ergodic::neveu::{self, NeveuOptions};
use nc_ergodic::random::Sampler;
use nc_ergodic::scenario::gallery_item;
use nc_ergodic::{Picture, SemigroupAction, TracialAlgebra};

fn amplitude_damping(g: f64) -> SemigroupAction {
    let alg = TracialAlgebra::matrix(2);
    let gen = maps::from_kraus(&alg, &maps::amplitude_damping_kraus(g)).unwrap();
    SemigroupAction::discrete(Picture::Heisenberg, vec![gen]).unwrap()
}

#[test]
fn amplitude_damping_geometric_series() {
    for g in [0.1, 0.5, 0.9] {
        let action = amplitude_damping(g);
        let dec = neveu::neveu_decompose(&action, &NeveuOptions::default()).unwrap();
        assert_eq!(dec.e1.ranks(), &[1]);
        let e2 = dec.e2.as_operator();
        for a in 1..=64 {
            let expected = (1.0 - (1.0 - g).powi(a as i32)) / (a as f64 * g);
            let got = algebra::op_norm(&action.average(e2, a).unwrap());
            assert!((got - expected).abs() < 1e-10, "g = {g}, a = {a}: {got} vs {expected}");
        }
    }
    let at_ten = algebra::op_norm(&amplitude_damping(0.5).average(&TracialAlgebra::matrix(2).unit(0, 1, 1), 10).unwrap());
    assert!((at_ten - 0.199_805).abs() < 1e-6);
}

#[test]
fn classical_support_matches_both_oracles() {
    let mut s = Sampler::new(41);
    for _ in 0..40 {
        let n = 2 + s.index(6);
        let kernel = random_kernel(&mut s, n, 0.7);
        let eigen = stationary_support_eigen(&kernel);
        assert_eq!(eigen, stationary_support_graph(&kernel), "{kernel:?}");

        let alg = TracialAlgebra::commutative(n);
        let gen = maps::from_classical(&alg, &kernel).unwrap();
        let action = SemigroupAction::discrete(Picture::Heisenberg, vec![gen]).unwrap();
        let dec = neveu::neveu_decompose(&action, &NeveuOptions::default()).unwrap();
        for (i, &inside) in eigen.iter().enumerate() {
            let entry = dec.e1.as_operator().block(i)[(0, 0)].re;
            assert!((entry - if inside { 1.0 } else { 0.0 }).abs() < 1e-8, "{kernel:?}");
        }
    }
}

#[test]
fn transient_chain_corners() {
    let s = gallery_item("classical-transient-chain").unwrap();
    let (_, action) = s.build().unwrap();
    let dec = neveu::neveu_decompose(&action, &s.neveu_options()).unwrap();
    let diag: Vec<f64> = (0..3).map(|i| dec.e1.as_operator().block(i)[(0, 0)].re).collect();
    assert_eq!(diag, [0.0, 1.0, 0.0]);
    // Starting at 0 or 2 the walk is still transient after k steps with
    // probability 2^{−k}, so ‖A_a(e₂)‖ = (1 − 2^{−a}) · 2 / a.
    for a in [1, 4, 16, 64] {
        let expected = 2.0 * (1.0 - 0.5f64.powi(a as i32)) / a as f64;
        let got = algebra::op_norm(&action.average(dec.e2.as_operator(), a).unwrap());
        assert!((got - expected).abs() < 1e-12, "a = {a}");
    }
}

#[test]
fn lindblad_average_of_the_excited_projection() {
    let s = gallery_item("lindblad-rplus").unwrap();
    let (alg, action) = s.build().unwrap();
    let e11 = alg.unit(0, 1, 1);
    for a in [1usize, 2, 5, 10, 40] {
        let got = action.average(&e11, a).unwrap();
        // Population decays as e^{−t}; coherences are absent.
        let expected = e11.scale((1.0 - (-(a as f64)).exp()) / a as f64);
        assert!(got.max_abs_diff(&expected) < 1e-8, "a = {a}: {got:?}");
    }
}

#[test]
fn swap_state_is_invariant() {
    let s = gallery_item("swap-automorphism").unwrap();
    let (alg, action) = s.build().unwrap();
    let y = s.inputs.invariant_state.clone().unwrap();
    let gen = &action.heisenberg_generators()[0];
    let mut sampler = Sampler::new(5);
    for _ in 0..16 {
        let x = sampler.operator(&alg);
        let diff = algebra::pairing(&alg, &y, &gen.apply(&x).unwrap()) - algebra::pairing(&alg, &y, &x);
        assert!(diff.norm() <= 1e-12 * algebra::op_norm(&x));
    }
    // The state weights ε = (0.3, 0.7) on the swap eigenvectors.
    let dense = y.block(0).map(|z| z * alg.weights()[0]);
    let mut vals = linalg::eigh(&dense).0;
    vals.sort_by(f64::total_cmp);
    assert!((vals[0] - 0.3).abs() < 1e-12 && (vals[1] - 0.7).abs() < 1e-12);
}

#[test]
fn zplus2_generators_commute() {
    let s = gallery_item("zplus2-two-channels").unwrap();
    let (_, action) = s.build().unwrap();
    let g = action.heisenberg_generators();
    let comm = g[0].matrix() * g[1].matrix() - g[1].matrix() * g[0].matrix();
    assert!(comm.norm() < 1e-14);
    assert!(maps::check_commuting(g).unwrap().verdict.is_pass());
}

#[test]
fn folner_ratio_against_enumeration() {
    let scheme = FolnerScheme::ZplusBox { d: 2 };
    for a in [1usize, 3, 7, 10] {
        for shift in [[1i64, 0], [0, 1], [2, 1], [5, 5]] {
            let FolnerSet::Points(points) = folner_set(&scheme, a).unwrap() else { panic!() };
            let shifted: Vec<Vec<i64>> = points.iter().map(|p| vec![p[0] + shift[0], p[1] + shift[1]]).collect();
            let sym = points.iter().filter(|p| !shifted.contains(p)).count()
                + shifted.iter().filter(|p| !points.contains(p)).count();
            let expected = sym as f64 / points.len() as f64;
            let got = folner_ratio(&scheme, a, &[shift[0] as f64, shift[1] as f64]).unwrap();
            assert!((got - expected).abs() < 1e-15, "a = {a}, shift {shift:?}");
        }
    }
    assert_eq!(folner_ratio(&FolnerScheme::ZplusBox { d: 2 }, 10, &[1.0, 0.0]).unwrap(), 0.2);
    assert_eq!(folner_ratio(&FolnerScheme::RPlusCube { d: 1 }, 4, &[0.5]).unwrap(), 0.25);
}

#[test]
fn depolarizing_projects_onto_the_trace() {
    let s = gallery_item("depolarizing").unwrap();
    let (alg, action) = s.build().unwrap();
    let e = neveu::mean_ergodic_projection(&action, 1e-9).unwrap();
    let x = Sampler::new(9).operator(&alg);
    let tr = algebra::trace(&alg, &x).unwrap();
    let expected = alg.identity().scale_complex(tr);
    assert!(e.apply(&x).unwrap().max_abs_diff(&expected) < 1e-12);
}
