//! Property suites for the phase-space core, the allocation bound, and the
//! overlap oracle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use qcrb_core::allocation::haar_unitary;
use qcrb_core::fisher::{gamma_inv_diagonal_entry, qfi_full};
use qcrb_core::gaussian::{
    check_purity, make_squeezed_bank, symplectic_eigenvalues, symplectic_from_unitary,
    transform_state, GaussianState, SqueezerBank, SymplecticTransform,
};
use qcrb_core::oracle::{overlap_closed_form, overlap_grid, random_single_mode_state};

fn bank_strategy(max_modes: usize) -> impl Strategy<Value = SqueezerBank> {
    prop::collection::vec(0.05f64..4.0, 1..=max_modes)
        .prop_map(|v| SqueezerBank::new(v).unwrap())
}

fn unitary_of(m: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    haar_unitary(m, &mut rng)
}

/// Random symplectic transform: passive · squeeze · passive.
fn random_symplectic(m: usize, seed: u64) -> SymplecticTransform {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let o1 = qcrb_core::gaussian::embed_complex(&haar_unitary(m, &mut rng));
    let o2 = qcrb_core::gaussian::embed_complex(&haar_unitary(m, &mut rng));
    use rand::Rng;
    let mut diag = DVector::zeros(2 * m);
    for i in 0..m {
        let r: f64 = rng.gen_range(0.3..3.0);
        diag[i] = r;
        diag[m + i] = 1.0 / r;
    }
    let s = DMatrix::from_diagonal(&diag);
    SymplecticTransform::new(o1 * s * o2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn squeezed_banks_stay_pure_under_transform_chains(
        bank in bank_strategy(4),
        seeds in prop::collection::vec(any::<u64>(), 1..4),
    ) {
        let mut state = make_squeezed_bank(&bank);
        for seed in seeds {
            let u = unitary_of(bank.len(), seed);
            let t = symplectic_from_unitary(&u).unwrap();
            state = transform_state(&state, &t).unwrap();
            prop_assert!(check_purity(&state).pure);
        }
    }

    #[test]
    fn symplectic_spectrum_is_unit_and_preserved(bank in bank_strategy(3), seed in any::<u64>()) {
        let state = make_squeezed_bank(&bank);
        for v in symplectic_eigenvalues(state.cov()).unwrap() {
            prop_assert!((v - 1.0).abs() < 1e-9);
        }
        let t = random_symplectic(bank.len(), seed);
        let moved = transform_state(&state, &t).unwrap();
        for v in symplectic_eigenvalues(moved.cov()).unwrap() {
            prop_assert!((v - 1.0).abs() < 1e-8, "eigenvalue {v}");
        }
    }

    #[test]
    fn transform_roundtrip_recovers_state(bank in bank_strategy(3), seed in any::<u64>()) {
        let state = make_squeezed_bank(&bank);
        let t = random_symplectic(bank.len(), seed);
        let fwd = transform_state(&state, &t).unwrap();
        let back = transform_state(&fwd, &t.inverse()).unwrap();
        prop_assert!((back.cov() - state.cov()).amax() < 1e-10);
        prop_assert!((back.mean() - state.mean()).amax() < 1e-10);
    }

    #[test]
    fn passive_transforms_preserve_ordinary_eigenvalues(bank in bank_strategy(3), seed in any::<u64>()) {
        let state = make_squeezed_bank(&bank);
        let t = symplectic_from_unitary(&unitary_of(bank.len(), seed)).unwrap();
        let moved = transform_state(&state, &t).unwrap();
        let mut before: Vec<f64> =
            state.cov().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut after: Vec<f64> =
            moved.cov().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        before.sort_by(|a, b| a.partial_cmp(b).unwrap());
        after.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn gamma_inv_diagonal_never_beats_spectral_radius(bank in bank_strategy(4), seed in any::<u64>()) {
        let t = symplectic_from_unitary(&unitary_of(bank.len(), seed)).unwrap();
        let state = transform_state(&make_squeezed_bank(&bank), &t).unwrap();
        let radius = 1.0 / bank.effective_sigma_min_sq();
        for k in 0..2 * bank.len() {
            let g = gamma_inv_diagonal_entry(state.cov(), k).unwrap();
            prop_assert!(g <= radius + 1e-10, "diag {g} exceeds spectral radius {radius}");
        }
    }

    #[test]
    fn mean_information_is_basis_invariant(bank in bank_strategy(3), seed in any::<u64>(), mean_seed in any::<u64>()) {
        let m = bank.len();
        let state = make_squeezed_bank(&bank);
        let mut rng = ChaCha12Rng::seed_from_u64(mean_seed);
        use rand::Rng;
        let mean_prime = DVector::from_fn(2 * m, |_, _| rng.gen_range(-3.0..3.0));
        let (i0, _) = qfi_full(&mean_prime, state.cov(), &DMatrix::zeros(2 * m, 2 * m)).unwrap();
        prop_assume!(i0 > 1e-9);
        let t = symplectic_from_unitary(&unitary_of(m, seed)).unwrap();
        let moved = transform_state(&state, &t).unwrap();
        let mp = t.matrix() * &mean_prime;
        let (i1, _) = qfi_full(&mp, moved.cov(), &DMatrix::zeros(2 * m, 2 * m)).unwrap();
        prop_assert!((i0 - i1).abs() <= 1e-8 * i0);
    }

    #[test]
    fn overlap_is_symmetric_in_unit_range_and_transform_invariant(
        s1 in any::<u64>(),
        s2 in any::<u64>(),
        ts in any::<u64>(),
    ) {
        let a = random_single_mode_state(s1);
        let b = random_single_mode_state(s2);
        let ab = overlap_closed_form(&a, &b).unwrap().overlap_sq;
        let ba = overlap_closed_form(&b, &a).unwrap().overlap_sq;
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0 + 1e-10).contains(&ab));

        let t = random_symplectic(1, ts);
        let at = transform_state(&a, &t).unwrap();
        let bt = transform_state(&b, &t).unwrap();
        let moved = overlap_closed_form(&at, &bt).unwrap().overlap_sq;
        prop_assert!((ab - moved).abs() < 1e-10, "overlap {ab} vs transformed {moved}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_form_overlap_matches_grid_integration(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_single_mode_state(s1);
        let b = random_single_mode_state(s2);
        let closed = overlap_closed_form(&a, &b).unwrap().overlap_sq;
        let mut half = 0.0f64;
        for s in [&a, &b] {
            for axis in 0..2 {
                half = half.max(s.mean()[axis].abs() + 8.0 * s.cov()[(axis, axis)].sqrt());
            }
        }
        let grid = overlap_grid(&a, &b, half, 256).unwrap().overlap_sq;
        prop_assert!((closed - grid).abs() < 1e-6, "closed {closed} vs grid {grid}");
    }
}

#[test]
fn identical_random_states_have_unit_overlap() {
    for seed in 0..20 {
        let s = random_single_mode_state(seed);
        let o = overlap_closed_form(&s, &s).unwrap().overlap_sq;
        assert!((o - 1.0).abs() < 1e-10);
    }
}

#[test]
fn bures_route_reproduces_the_bound() {
    // metric route: δθ = (2√Q · s/h)⁻¹ with s the Bures distance at step h
    let grid = qcrb_core::modes::Grid::uniform(-8.0, 8.0, 1024).unwrap();
    let family = qcrb_core::models::PhaseFamily::new(100.0, 1.0).unwrap();
    let path = qcrb_core::pipeline::StatePath::new(&family, &grid, &[0.0, 1e-3]).unwrap();
    let s0 = path.state_at(0.0).unwrap();
    let sh = path.state_at(1e-3).unwrap();
    let bures = overlap_closed_form(&s0, &sh).unwrap().bures_distance;
    let delta_theta = 1.0 / (2.0 * (bures / 1e-3));
    let report =
        qcrb_core::pipeline::bound_report(&family, &grid, qcrb_core::models::DerivKind::Analytic, 1)
            .unwrap();
    assert!(
        (delta_theta - report.delta_theta_min).abs() < 1e-3 * report.delta_theta_min,
        "bures route {delta_theta} vs bound {}",
        report.delta_theta_min
    );
}

#[test]
fn thermal_state_is_rejected_by_purity_gate() {
    let thermal =
        GaussianState::new(DVector::zeros(2), DMatrix::from_diagonal_element(2, 2, 2.0), 1)
            .unwrap();
    assert!(!check_purity(&thermal).pure);
    assert!(overlap_closed_form(&thermal, &GaussianState::vacuum(1)).is_err());
}
