use std::sync::Arc;

use proptest::prelude::*;

use nmsse::basis::{BasisChoice, BasisSet};
use nmsse::bath::{is_critical, BathSpec, DiscreteMode, SpectralDensity};
use nmsse::hierarchy::{FockSpace, Formulation, Hierarchy, TimeGrid, Truncation};
use nmsse::models::{SystemModel, TransferCoupling};
use nmsse::noise::{discretize, trajectory_rng, NoiseEvaluator, NoiseRealization};
use nmsse::oracle::{exact_discrete, EdConfig};
use nmsse::C64;

fn brownian(reorganization: f64, damping: f64, beta: f64) -> BathSpec {
    BathSpec::new(
        SpectralDensity::Brownian {
            reorganization,
            frequency: 1.0,
            damping,
        },
        beta,
    )
    .unwrap()
}

fn max_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fock_offsets_round_trip(caps in prop::collection::vec(0usize..4, 1..5), tri in prop::option::of(0usize..6)) {
        let trunc = tri.map_or(Truncation::Hypercube, Truncation::Triangular);
        let space = FockSpace::new(caps.clone(), trunc).unwrap();
        prop_assert_eq!(space.offset(&vec![0; caps.len()]), Some(0));
        for off in 0..space.len() {
            let n: Vec<usize> = space.occupation(off).iter().map(|&x| x as usize).collect();
            prop_assert!(n.iter().zip(&caps).all(|(a, c)| a <= c));
            if let Some(l) = tri {
                prop_assert!(n.iter().sum::<usize>() <= l);
            }
            prop_assert_eq!(space.offset(&n), Some(off));
        }
    }

    #[test]
    fn brownian_basis_reproduces_abcf(lambda in 0.1f64..2.0, zeta in 0.2f64..6.0, beta in 0.1f64..5.0) {
        let bath = brownian(lambda, zeta, beta);
        let basis = BasisSet::build(&bath, BasisChoice::Auto).unwrap();
        for k in 0..=40 {
            let t = 0.5 * k as f64;
            let err = (basis.reconstruct_abcf(t) - bath.abcf(t).unwrap()).norm();
            prop_assert!(err < 1e-10, "t = {t}: {err}");
        }
        let r = basis.validate(&[0.0, 1.0, 5.0, 20.0]);
        prop_assert!(r.ode_closed_form < 1e-8 && r.propagator < 1e-9);
    }

    #[test]
    fn formulations_agree_per_trajectory(zeta in 0.5f64..4.0, seed in 0u64..1000, cap in 1usize..5) {
        let bath = brownian(1.0, zeta, 1.0);
        let model = SystemModel::transfer(1.0, 0.0, 1.0, 0.5, TransferCoupling::Acceptor);
        let grid = Arc::new(discretize(&bath.sd, 256, 30.0));
        let nr = NoiseRealization::sample(grid, bath.beta, &mut trajectory_rng(seed, 0));
        let tg = TimeGrid::new(0.01, 3.0, 30).unwrap();
        let run = |basis: &BasisSet, space: &FockSpace, f: Formulation| {
            let t = Hierarchy::new(&model, basis, space, f).unwrap().propagate(&nr, &tg).unwrap();
            [t.forward, t.backward].concat()
        };
        let auto = BasisSet::build(&bath, BasisChoice::Auto).unwrap();
        let hyper = FockSpace::uniform(2, cap, Truncation::Hypercube).unwrap();
        let rescaled = run(&auto, &hyper, Formulation::ExtendedRescaled);
        let unscaled = run(&auto, &hyper, Formulation::ExtendedUnscaled);
        prop_assert!(max_dist(&rescaled, &unscaled) < 1e-8);
        // Near critical damping the exponential amplitudes diverge like 1/|zeta - 2|.
        if !is_critical(1.0, zeta) && (zeta - 2.0).abs() > 0.05 {
            let exp = BasisSet::build(&bath, BasisChoice::ForceExponential).unwrap();
            let tri = FockSpace::uniform(2, cap, Truncation::Triangular(cap)).unwrap();
            let a = run(&auto, &tri, Formulation::ExtendedRescaled);
            let b = run(&exp, &tri, Formulation::ExtendedRescaled);
            let c = run(&exp, &tri, Formulation::ExponentialRescaledD);
            prop_assert!(max_dist(&a, &b) < 1e-8);
            prop_assert!(max_dist(&b, &c) < 1e-8);
        }
    }

    #[test]
    fn fast_and_direct_noise_evaluation_agree(alpha in 0.01f64..0.5, cutoff in 0.5f64..8.0, modes in 64usize..600, seed in 0u64..100) {
        let sd = SpectralDensity::OhmicExp { alpha, cutoff };
        let grid = Arc::new(discretize(&sd, modes, 20.0 * cutoff));
        let nr = NoiseRealization::sample(grid.clone(), 2.0, &mut trajectory_rng(seed, 3));
        let fast = NoiseEvaluator::new(&grid, 0.0, 0.005, 401);
        prop_assert!(fast.uses_chirp_z());
        let a = fast.evaluate(&nr);
        let b = NoiseEvaluator::direct(0.0, 0.005, 401).evaluate(&nr);
        let scale = b.plus.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(max_dist(&a.plus, &b.plus) < 1e-10 * scale);
        prop_assert!(max_dist(&a.minus, &b.minus) < 1e-10 * scale);
        for m in [0usize, 17, 400] {
            let (p, q) = nr.eval(m as f64 * 0.005);
            prop_assert!((a.plus[m] - p).norm() < 1e-10 * scale && (a.minus[m] - q).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn trajectory_streams_are_reproducible(master in any::<u64>(), index in any::<u64>()) {
        let grid = Arc::new(discretize(&SpectralDensity::single_mode(0.3, 1.2), 1, 1.0));
        let a = NoiseRealization::sample(grid.clone(), 1.0, &mut trajectory_rng(master, index));
        let b = NoiseRealization::sample(grid.clone(), 1.0, &mut trajectory_rng(master, index));
        let c = NoiseRealization::sample(grid, 1.0, &mut trajectory_rng(master, index.wrapping_add(1)));
        prop_assert_eq!(&a, &b);
        prop_assert_ne!(&a, &c);
    }

    #[test]
    fn exact_diagonalization_preserves_trace(c in 0.0f64..0.6, w in 0.5f64..2.0, beta in 1.0f64..4.0, eps in -1.0f64..1.0) {
        let r = exact_discrete(&EdConfig {
            model: SystemModel::spin_boson(eps, 0.5),
            mode: DiscreteMode::new(c, w),
            beta,
            n_boson: 24,
            dt: 0.25,
            t_final: 10.0,
        })
        .unwrap();
        for (tr, p) in r.trace.iter().zip(&r.populations) {
            prop_assert!((tr - 1.0).abs() < 1e-10);
            prop_assert!(p.iter().all(|x| (-1e-12..=1.0 + 1e-12).contains(x)));
        }
    }
}

#[test]
fn rho_estimator_is_hermitian_on_average() {
    use nmsse::hierarchy::{run_ensemble, EnsembleConfig};
    let bath = BathSpec::new(SpectralDensity::single_mode(0.2, 1.0), 1.0).unwrap();
    let basis = BasisSet::build(&bath, BasisChoice::Auto).unwrap();
    let space = FockSpace::uniform(2, 3, Truncation::Hypercube).unwrap();
    let h = Hierarchy::new(&SystemModel::spin_boson(0.0, 0.5), &basis, &space, Formulation::ExtendedRescaled).unwrap();
    let r = run_ensemble(
        &[h],
        &EnsembleConfig {
            n_traj: 400,
            master_seed: 12,
            grid: TimeGrid::new(0.01, 5.0, 50).unwrap(),
            noise: Arc::new(discretize(&bath.sd, 1, 1.0)),
            beta: 1.0,
        },
    )
    .unwrap()
    .remove(0);
    // rho - rho^dagger vanishes in expectation; allow a few raw population SEs.
    for (k, herm) in r.hermiticity.iter().enumerate() {
        let se = r.raw_population_se[k].iter().fold(0.0, |a: f64, b| a.max(*b));
        assert!(*herm <= 10.0 * se + 1e-12, "t index {k}: {herm} vs se {se}");
    }
}
