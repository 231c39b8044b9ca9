//! Built-in scenarios.

use num_complex::Complex64;

use super::{ActionSpec, AlgebraSpec, Expectations, GeneratorSpec, Inputs, Scenario, Task, Tolerances};
use crate::algebra::{Operator, TracialAlgebra};
use crate::dynamics::{FolnerScheme, Picture};
use crate::linalg::{c, CMat, ONE, ZERO};
use crate::maps::{self, Verdict};
use crate::neveu;

pub const GALLERY_NAMES: [&str; 8] = [
    "identity",
    "amplitude-damping",
    "depolarizing",
    "swap-automorphism",
    "classical-transient-chain",
    "zplus2-two-channels",
    "lindblad-rplus",
    "non-lamperti-witness",
];

const SEED: u64 = 20_240_611;

const ALL_TASKS: [Task; 5] = [Task::GalleryItem, Task::Mean, Task::Decompose, Task::Certify, Task::Stochastic];

fn base(name: &str, description: &str, blocks: Vec<usize>, scheme: FolnerScheme, gens: Vec<GeneratorSpec>) -> Scenario {
    Scenario {
        name: name.into(),
        description: Some(description.into()),
        algebra: AlgebraSpec {
            blocks,
            weights: None,
            normalized: true,
        },
        action: ActionSpec {
            picture: Picture::Heisenberg,
            scheme,
            generators: gens,
            inverses: None,
        },
        tasks: ALL_TASKS.to_vec(),
        schedule: neveu::default_schedule(),
        tolerances: Tolerances::default(),
        inputs: Inputs::default(),
        expect: Expectations::default(),
        seed: Some(SEED),
    }
}

fn one_generator(name: &str, description: &str, n: usize, g: GeneratorSpec) -> Scenario {
    base(name, description, vec![n], FolnerScheme::ZplusBox { d: 1 }, vec![g])
}

/// `M₂` with normalized trace, where a state `ρ` has density `2ρ`.
fn m2() -> TracialAlgebra {
    TracialAlgebra::matrix(2)
}

fn identity() -> Scenario {
    one_generator(
        "identity",
        "Trivial action on M_2: everything is invariant, e1 = 1.",
        2,
        GeneratorSpec::kraus(&maps::identity_kraus(2)),
    )
}

fn amplitude_damping() -> Scenario {
    let mut s = one_generator(
        "amplitude-damping",
        "Amplitude damping with g = 0.5 on M_2: the ground state carries every invariant state.",
        2,
        GeneratorSpec::kraus(&maps::amplitude_damping_kraus(0.5)),
    );
    s.inputs.observable = Some(m2().unit(0, 1, 1));
    s
}

fn depolarizing() -> Scenario {
    one_generator(
        "depolarizing",
        "Completely depolarizing channel on M_2: unital, e1 = 1, not Lamperti.",
        2,
        GeneratorSpec::kraus(&maps::depolarizing_kraus(2)),
    )
    .with_expected_lamperti(Verdict::Fail)
}

/// Eigenvectors `(1, ±1)/√2` of the swap, weighted by `ε = (0.3, 0.7)`.
fn swap_state(alg: &TracialAlgebra) -> Operator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CMat::from_row_slice(2, 1, &[c(h), c(h)]);
    let minus = CMat::from_row_slice(2, 1, &[c(h), c(-h)]);
    let rho = &plus * plus.adjoint() * c(0.3) + &minus * minus.adjoint() * c(0.7);
    let w = alg.weights()[0];
    Operator::from_blocks(alg, vec![rho.map(|z| z / w)]).expect("2x2 block")
}

fn swap_automorphism() -> Scenario {
    let alg = m2();
    let swap = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let u = Operator::from_blocks(&alg, vec![swap]).expect("2x2 block");
    let mut s = one_generator(
        "swap-automorphism",
        "Ad_U for the swap U on M_2 with the invariant state built from U's eigenbasis.",
        2,
        GeneratorSpec::conjugation(&u),
    );
    s.inputs.invariant_state = Some(swap_state(&alg));
    s.inputs.observable = Some(alg.unit(0, 0, 0));
    s.with_expected_lamperti(Verdict::Pass)
}

fn classical_transient_chain() -> Scenario {
    let kernel = vec![vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.5, 0.5]];
    let mut s = base(
        "classical-transient-chain",
        "Three-state chain absorbed at the middle state: e1 = {1}, e2 = {0, 2}.",
        vec![1, 1, 1],
        FolnerScheme::ZplusBox { d: 1 },
        vec![GeneratorSpec::classical(&kernel)],
    );
    let alg = TracialAlgebra::commutative(3);
    s.inputs.observable = Some(Operator::from_diagonal(&alg, &[1.0, 0.0, 1.0]).expect("diagonal"));
    // The transient mass leaves at rate 1/2, so the corner averages need
    // a ≈ 100 to drop below ε = 0.05.
    s.schedule = (0..=8).map(|k| 1 << k).collect();
    s
}

fn zplus2_two_channels() -> Scenario {
    let mut s = base(
        "zplus2-two-channels",
        "Commuting pair on M_2: amplitude damping (g = 0.5) and dephasing (p = 0.25).",
        vec![2],
        FolnerScheme::ZplusBox { d: 2 },
        vec![
            GeneratorSpec::kraus(&maps::amplitude_damping_kraus(0.5)),
            GeneratorSpec::kraus(&maps::dephasing_kraus(0.25)),
        ],
    );
    s.inputs.observable = Some(m2().unit(0, 1, 1));
    s
}

fn lindblad_rplus() -> Scenario {
    let h = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5), c(-0.5)]));
    let mut lower = CMat::zeros(2, 2);
    lower[(0, 1)] = Complex64::new(1.0, 0.0);
    let mut s = base(
        "lindblad-rplus",
        "Decay semigroup e^{tL} on M_2 with H = sigma_z/2 and one jump sigma_minus (rate 1).",
        vec![2],
        FolnerScheme::RPlusCube { d: 1 },
        vec![GeneratorSpec::lindblad(&h, &[lower])],
    );
    s.inputs.observable = Some(m2().unit(0, 1, 1));
    s
}

fn non_lamperti_witness() -> Scenario {
    let kernel = vec![vec![0.5, 0.5, 0.0], vec![0.5, 0.5, 0.0], vec![0.2, 0.3, 0.4]];
    base(
        "non-lamperti-witness",
        "Substochastic kernel whose predual merges disjoint supports; the Lamperti check fails with a witness pair.",
        vec![1, 1, 1],
        FolnerScheme::ZplusBox { d: 1 },
        vec![GeneratorSpec::classical(&kernel)],
    )
    .with_expected_lamperti(Verdict::Fail)
}

impl Scenario {
    fn with_expected_lamperti(mut self, v: Verdict) -> Self {
        self.expect.lamperti = Some(v);
        self
    }
}

/// The built-in scenarios, in a fixed order.
pub fn gallery() -> Vec<Scenario> {
    vec![
        identity(),
        amplitude_damping(),
        depolarizing(),
        swap_automorphism(),
        classical_transient_chain(),
        zplus2_two_channels(),
        lindblad_rplus(),
        non_lamperti_witness(),
    ]
}

pub fn gallery_item(name: &str) -> Option<Scenario> {
    gallery().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra;

    #[test]
    fn names_match_items() {
        let names: Vec<String> = gallery().into_iter().map(|s| s.name).collect();
        assert_eq!(names, GALLERY_NAMES);
    }

    #[test]
    fn every_item_builds() {
        for s in gallery() {
            let (_, action) = s.build().unwrap_or_else(|e| panic!("{}: {e}", s.name));
            assert!(action.is_commuting(), "{}", s.name);
        }
    }

    #[test]
    fn swap_state_is_a_density() {
        let alg = m2();
        let y = swap_state(&alg);
        assert!(y.is_positive());
        assert!((algebra::trace(&alg, &y).unwrap().re - 1.0).abs() < 1e-15);
    }
}
