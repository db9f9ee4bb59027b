use eqlab::distinguish::{self, MeasurementSet};
use eqlab::dynamics::{self, DensityOperator, TimeAverageConvention};
use eqlab::equilibration;
use eqlab::harness::{self, ExperimentConfig};
use eqlab::matrixkit::{
    self, eig_hermitian, identity, max_abs, max_abs_diff, operator_norm, partial_trace, tensor, CMatrix, Keep,
};
use eqlab::random;
use eqlab::spectral::{self, random_hamiltonian, Ensemble, Hamiltonian};
use eqlab::subsystem::{self, BipartiteSplit};
use eqlab::universality;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn gue(d: usize, seed: u64) -> Hamiltonian {
    random_hamiltonian(d, Ensemble::Gue, seed).unwrap()
}

fn state(d: usize, rng: &mut ChaCha20Rng) -> DensityOperator {
    if rng.random_bool(0.5) {
        DensityOperator::haar_pure(d, rng)
    } else {
        let rank = rng.random_range(1..=d);
        DensityOperator::random_mixed(d, rank, rng)
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn eigen_reconstruction(seed in any::<u64>(), d in 1usize..=64) {
        let m = random::random_hermitian(d, &mut rng(seed));
        let e = eig_hermitian(&m).unwrap();
        let mut back = CMatrix::zeros(d, d);
        for (i, &l) in e.values.iter().enumerate() {
            let v = e.vectors.column(i).into_owned();
            back += matrixkit::outer(&v).scale(l);
        }
        prop_assert!(max_abs_diff(&back, &m) <= 1e-10);
    }

    #[test]
    fn operator_norm_submultiplicative(seed in any::<u64>(), d in 1usize..=12) {
        let mut r = rng(seed);
        let a = random::ginibre(d, &mut r);
        let b = random::ginibre(d, &mut r);
        prop_assert!(operator_norm(&(&a * &b)) <= operator_norm(&a) * operator_norm(&b) * (1.0 + 1e-12));
    }

    #[test]
    fn partial_trace_preserves_trace_and_is_linear(seed in any::<u64>(), d_s in 1usize..=4, d_b in 1usize..=4) {
        let mut r = rng(seed);
        let d = d_s * d_b;
        let x = random::ginibre(d, &mut r);
        let y = random::ginibre(d, &mut r);
        let (a, b) = (random::complex_normal(&mut r), random::complex_normal(&mut r));
        for keep in [Keep::S, Keep::B] {
            let px = partial_trace(&x, d_s, d_b, keep).unwrap();
            prop_assert!((px.trace() - x.trace()).norm() <= 1e-12);
            let combo = partial_trace(&(x.scale(1.0) * a + &y * b), d_s, d_b, keep).unwrap();
            let py = partial_trace(&y, d_s, d_b, keep).unwrap();
            prop_assert!(max_abs_diff(&combo, &(px * a + py * b)) <= 1e-12);
        }
    }

    #[test]
    fn tensor_is_associative(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3, dc in 1usize..=3) {
        let mut r = rng(seed);
        let (a, b, cm) = (random::ginibre(da, &mut r), random::ginibre(db, &mut r), random::ginibre(dc, &mut r));
        let left = tensor(&tensor(&a, &b), &cm);
        let right = tensor(&a, &tensor(&b, &cm));
        prop_assert_eq!(left.nrows(), da * db * dc);
        prop_assert!(max_abs_diff(&left, &right) <= 1e-15);
    }

    #[test]
    fn projectors_are_complete(seed in any::<u64>(), d in 2usize..=24) {
        let h = gue(d, seed);
        let sum = h.levels().iter().fold(CMatrix::zeros(d, d), |acc, l| acc + &l.projector);
        prop_assert!(max_abs_diff(&sum, &identity(d)) <= 1e-9);
    }

    #[test]
    fn adapted_basis_reproduces_evolution(seed in any::<u64>(), d in 2usize..=10) {
        let h = gue(d, seed);
        let mut r = rng(seed ^ 1);
        let psi = random::haar_state(d, &mut r);
        let basis = spectral::adapted_eigenbasis(&h, &psi).unwrap();
        for _ in 0..100 {
            let t = r.random_range(0.0..100.0);
            let direct = h.propagator(t) * &psi;
            prop_assert!((direct - basis.evolve(t)).camax() <= 1e-9);
        }
    }

    #[test]
    fn dephasing_invariants(seed in any::<u64>(), d in 2usize..=10) {
        let h = gue(d, seed);
        let mut r = rng(seed ^ 2);
        let rho = state(d, &mut r);
        let omega = dynamics::dephase(&h, &rho).unwrap();
        let twice = dynamics::dephase(&h, &omega).unwrap();
        prop_assert!(max_abs_diff(twice.matrix(), omega.matrix()) <= 1e-10);
        prop_assert!(max_abs(&matrixkit::commutator(omega.matrix(), &h.matrix())) <= 1e-10);
        let t = r.random_range(0.0..50.0);
        let moved = dynamics::evolve(&h, &omega, t).unwrap();
        prop_assert!(max_abs_diff(moved.matrix(), omega.matrix()) <= 1e-10);
        let occ = dynamics::level_occupations(&h, &rho).unwrap();
        let max_occ = occ.iter().cloned().fold(0.0, f64::max);
        prop_assert!(1.0 / dynamics::effective_dimension(&h, &rho).unwrap() <= max_occ + 1e-12);
    }

    #[test]
    fn variance_is_shift_invariant(seed in any::<u64>(), d in 2usize..=8) {
        let h = gue(d, seed);
        let mut r = rng(seed ^ 3);
        let rho = state(d, &mut r);
        let a = random::ginibre(d, &mut r);
        let shift = random::complex_normal(&mut r) * 3.0;
        let s0 = equilibration::sigma_sq_exact(&h, &rho, &a).unwrap();
        let s1 = equilibration::sigma_sq_exact(&h, &rho, &(&a - identity(d) * shift)).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-9);
    }

    #[test]
    fn theorem1_chain(seed in any::<u64>(), d in 2usize..=10) {
        let h = gue(d, seed);
        let mut r = rng(seed ^ 4);
        let rho = state(d, &mut r);
        let a = random::ginibre(d, &mut r);
        let rep = equilibration::theorem1_report(&h, &rho, &a).unwrap();
        prop_assert!(rep.chain_holds, "{:?}", rep);
    }

    #[test]
    fn purified_and_direct_paths_agree(seed in any::<u64>(), d in 2usize..=8) {
        let h = gue(d, seed);
        let mut r = rng(seed ^ 5);
        let psi = random::haar_state(d, &mut r);
        let a = random::ginibre(d, &mut r);
        let pure = DensityOperator::pure(psi.clone()).unwrap();
        let direct = equilibration::sigma_sq_exact(&h, &pure, &a).unwrap();
        let as_mixed = DensityOperator::new(matrixkit::outer(&psi)).unwrap();
        let p = dynamics::purify(&as_mixed).unwrap();
        let lifted = p.lift_hamiltonian(&h);
        let via = equilibration::sigma_sq_exact(&lifted, &p.state(), &p.lift_operator(&a)).unwrap();
        prop_assert!((direct - via).abs() <= 1e-9);
    }

    #[test]
    fn hermitian_delta_is_spectral_range(seed in any::<u64>(), d in 1usize..=16) {
        let a = random::random_hermitian(d, &mut rng(seed));
        let ev = matrixkit::eigenvalues_hermitian(&a).unwrap();
        let range = ev[ev.len() - 1] - ev[0];
        prop_assert!((equilibration::delta(&a).unwrap() - range).abs() <= 1e-10);
    }

    #[test]
    fn measurement_bounds(seed in any::<u64>(), d in 2usize..=5, k in 1usize..=5) {
        let mut r = rng(seed);
        let p = distinguish::random_povm(d, k, &mut r);
        for o in &p.outcomes {
            let delta = equilibration::delta(&o.matrix).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-9).contains(&delta));
        }
        let (a, b) = (state(d, &mut r), state(d, &mut r));
        prop_assert!(distinguish::d_povm(&p, &a, &b).unwrap() <= distinguish::trace_distance(&a, &b).unwrap() + 1e-9);
    }

    #[test]
    fn lifted_basis_norms(d_s in 2usize..=5, d_b in 1usize..=4) {
        let b = subsystem::schwinger_basis(d_s).unwrap();
        for k in 0..b.len() {
            let n = operator_norm(&b.lifted_adjoint(k, d_b));
            prop_assert!((n - 1.0 / (d_s as f64).sqrt()).abs() <= 1e-10);
        }
    }

    #[test]
    fn equilibrium_states_are_stationary(seed in any::<u64>(), d in 3usize..=10) {
        let h = gue(d, seed);
        let cut = 0.5 * (h.levels()[0].energy + h.levels()[1].energy);
        let p = universality::microcanonical_partition(&h, &[cut]).unwrap();
        let t = rng(seed).random_range(0.0..100.0);
        for k in 0..p.len() {
            let omega_k = universality::equilibrium_state(&p, k).unwrap();
            let moved = dynamics::evolve(&h, &omega_k, t).unwrap();
            prop_assert!(max_abs_diff(moved.matrix(), omega_k.matrix()) <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn helstrom_guessing_frequency(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let (a, b) = (state(d, &mut r), state(d, &mut r));
        let p = distinguish::helstrom_povm(&a, &b).unwrap();
        let pa = p.probabilities(&a).unwrap();
        let pb = p.probabilities(&b).unwrap();
        let n = 20_000;
        let mut wins = 0;
        for _ in 0..n {
            let first = r.random_bool(0.5);
            let probs = if first { &pa } else { &pb };
            let outcome = if r.random::<f64>() < probs[0] { 0 } else { 1 };
            if (outcome == 0) == first {
                wins += 1;
            }
        }
        let expected = 0.5 * (1.0 + distinguish::trace_distance(&a, &b).unwrap());
        let sd = (expected * (1.0 - expected) / n as f64).sqrt().max(1e-4);
        prop_assert!((wins as f64 / n as f64 - expected).abs() <= 4.0 * sd);
    }

    #[test]
    fn coefficient_variances_match_exact(seed in any::<u64>(), d_b in 1usize..=4) {
        let split = BipartiteSplit::new(2, d_b).unwrap();
        let d = split.dim();
        let h = gue(d, seed);
        let rho = DensityOperator::haar_pure(d, &mut rng(seed ^ 6));
        let conv = TimeAverageConvention::for_hamiltonian(&h, 4000, seed);
        let sampled = subsystem::coefficient_variances(&h, &rho, split, &conv).unwrap();
        let basis = subsystem::schwinger_basis(2).unwrap();
        for (k, est) in sampled.iter().enumerate() {
            let exact = equilibration::sigma_sq_exact(&h, &rho, &basis.lifted_adjoint(k, d_b)).unwrap();
            let tol = (4.0 * est.stderr).max(0.05 * exact).max(1e-12);
            prop_assert!((est.estimate - exact).abs() <= tol, "k={} {} vs {}", k, est.estimate, exact);
        }
    }

    #[test]
    fn universality_chain_pieces(seed in any::<u64>()) {
        let h = random_hamiltonian(6, Ensemble::SpacedSpectrum, seed).unwrap();
        let cut = 0.5 * (h.levels()[2].energy + h.levels()[3].energy);
        let p = universality::microcanonical_partition(&h, &[cut]).unwrap();
        let mut r = rng(seed);
        let set: MeasurementSet = universality::perturbed_band_set(&p, 0.02, 2, &mut r).unwrap();
        let v = &p.projectors[0] * random::haar_state(6, &mut r);
        let rho = DensityOperator::pure(v.unscale(v.norm())).unwrap();
        let conv = TimeAverageConvention::for_hamiltonian(&h, 800, seed);
        let rep = universality::universality_report(&set, &h, &rho, &p, 0, &conv).unwrap();
        prop_assert!(rep.omega_to_equilibrium <= rep.epsilon + 1e-9);
        let slack = 1e-9 + 3.0 * (rep.stderr + rep.to_omega_stderr);
        prop_assert!(rep.empirical_avg <= rep.to_omega_avg + rep.omega_to_equilibrium + slack);
        prop_assert!(rep.holds);
    }

    #[test]
    fn config_and_seed_fix_the_report(seed in any::<u64>()) {
        let text = format!(r#"{{
            "mode": "corollary", "seed": {seed},
            "hamiltonian": {{"ensemble": {{"kind": "gue", "dim": 5}}}},
            "state": {{"random_mixed": {{"rank": 2}}}},
            "measurements": [{{"random": {{"outcomes": 3}}}}, "energy"],
            "time_average": {{"n_samples": 300}}
        }}"#);
        let config = ExperimentConfig::from_json(&text).unwrap();
        let a = harness::run(&config).unwrap().report.to_json().unwrap();
        let b = harness::run(&config).unwrap().report.to_json().unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn counterexample_purification_changes_purity() {
    let (h, rho0, _) = harness::counterexample_system(5).unwrap();
    let omega = dynamics::dephase(&h, &rho0).unwrap();
    let p = dynamics::purify(&rho0).unwrap();
    let lifted = p.lift_hamiltonian(&h);
    let omega_lifted = dynamics::dephase(&lifted, &p.state()).unwrap();
    assert!((omega_lifted.purity() - omega.purity()).abs() > 1e-3);
}
