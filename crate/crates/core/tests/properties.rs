use etaspec::construction::{
    apply_hat_hamiltonian, build_equivalence_map, diagonalize_pseudo, equivalent_hermitian, DiagonalizeOptions,
};
use etaspec::discretize::{
    algebraic_model, build_hamiltonian, build_momentum, random_hermitian, random_log_uniform, Grid, ModelParams,
    Stencil,
};
use etaspec::evolve::{equivalence_check, propagate_pseudo, time_grid};
use etaspec::metric::{eta_gram, eta_gram_schmidt, eta_inner, eta_inner_via_rho, gram_deviation, make_metric, pseudo_hermiticity_residual, MetricOperator};
use etaspec::numcore::{
    general_eigen, hermitian_eigen, positive_sqrt, spectral_propagator, ComplexMatrix, ComplexVector,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vector(n: usize, r: &mut ChaCha8Rng) -> ComplexVector {
    (0..n)
        .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect::<Vec<_>>()
        .into()
}

fn random_positive(n: usize, r: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = random_hermitian(n, r);
    &(&a * &a.adjoint()) + &ComplexMatrix::identity(n).scale(Complex64::new(0.1, 0.0))
}

/// Algebraic instance `(h_ref, H, η)`; the metric is diagonal or, for odd
/// seeds, a dense rotation of it.
fn instance(n: usize, seed: u64) -> (ComplexMatrix, ComplexMatrix, MetricOperator) {
    let mut r = rng(seed);
    let h_ref = random_hermitian(n, &mut r);
    let rho = random_log_uniform(n, 0.1, 10.0, &mut r).unwrap();
    let (h, eta) = algebraic_model(&h_ref, &rho).unwrap();
    (h_ref, h, make_metric(&eta).unwrap())
}

fn sorted_multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    // both inputs are sorted by (re, im); nearest matching without reuse
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn hermitian_reconstruction(n in 1usize..=30, seed in any::<u64>()) {
        let a = random_hermitian(n, &mut rng(seed));
        let eig = hermitian_eigen(&a).unwrap();
        let diff = (&eig.reconstruct() - &a).frobenius_norm();
        prop_assert!(diff <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn square_root_squares_back(n in 1usize..=20, seed in any::<u64>()) {
        let a = random_positive(n, &mut rng(seed));
        let s = positive_sqrt(&a, 1e-13).unwrap();
        prop_assert!((&(&s * &s) - &a).frobenius_norm() <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn propagator_is_unitary(n in 1usize..=20, seed in any::<u64>(), t in -20.0f64..20.0) {
        let eig = hermitian_eigen(&random_hermitian(n, &mut rng(seed))).unwrap();
        let u = spectral_propagator(&eig, t);
        let g = &u.adjoint() * &u;
        prop_assert!(gram_deviation(&g) <= 1e-12);
    }

    #[test]
    fn spectrum_is_similarity_invariant(n in 2usize..=12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        // S = I + small perturbation is well conditioned
        let p = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(r.random_range(-0.2..0.2), r.random_range(-0.2..0.2)));
        let s = &ComplexMatrix::identity(n) + &p.scale(Complex64::new(1.0 / n as f64, 0.0));
        let s_inv = {
            // invert via the Hermitian square root of S†S: S⁻¹ = (S†S)⁻¹S†
            let sts = &s.adjoint() * &s;
            let m = make_metric(&sts).unwrap();
            &(m.rho_inv() * m.rho_inv()) * &s.adjoint()
        };
        let b = &(&s * &a) * &s_inv;
        let ea = general_eigen(&a).unwrap();
        let eb = general_eigen(&b).unwrap();
        prop_assert!(sorted_multiset_distance(&ea.values, &eb.values) <= 1e-8 * a.frobenius_norm());
    }

    #[test]
    fn momentum_is_exactly_hermitian(n in 2usize..200, second in any::<bool>()) {
        let stencil = if second { Stencil::Second } else { Stencil::Fourth };
        let g = Grid::new(-5.0, 5.0, n).unwrap().with_stencil(stencil);
        prop_assert_eq!(build_momentum(&g).hermiticity_residual().unwrap(), 0.0);
        let h0 = build_hamiltonian(&g, &ModelParams::harmonic(0.0, 1.3).unwrap());
        prop_assert_eq!(h0.hermiticity_residual().unwrap(), 0.0);
    }

    #[test]
    fn algebraic_model_is_exact(n in 1usize..=20, seed in any::<u64>()) {
        let (_, h, m) = instance(n, seed);
        prop_assert!(pseudo_hermiticity_residual(&h, &m).unwrap() <= 1e-12);
    }

    #[test]
    fn inner_product_axioms(n in 1usize..=15, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = make_metric(&random_positive(n, &mut r)).unwrap();
        let phi = random_vector(n, &mut r);
        let psi = random_vector(n, &mut r);
        let a = eta_inner(&phi, &psi, &m, None).unwrap();
        let b = eta_inner(&psi, &phi, &m, None).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        let self_ip = eta_inner(&psi, &psi, &m, None).unwrap();
        prop_assert!(self_ip.re > 0.0);
        prop_assert!(self_ip.im.abs() <= 1e-12 * self_ip.re);
    }

    #[test]
    fn inner_product_two_routes(n in 1usize..=15, seed in any::<u64>(), dense in any::<bool>()) {
        let mut r = rng(seed);
        let m = if dense {
            make_metric(&random_positive(n, &mut r)).unwrap()
        } else {
            let d = random_log_uniform(n, 0.01, 100.0, &mut r).unwrap();
            make_metric(&ComplexMatrix::from_real_diagonal(&d)).unwrap()
        };
        let phi = random_vector(n, &mut r);
        let psi = random_vector(n, &mut r);
        let a = eta_inner(&phi, &psi, &m, None).unwrap();
        let b = eta_inner_via_rho(&phi, &psi, &m, None).unwrap();
        let scale = m.apply_rho(&phi).norm() * m.apply_rho(&psi).norm();
        prop_assert!((a - b).norm() <= 1e-12 * scale);
    }

    #[test]
    fn pseudo_hermitian_h_is_eta_symmetric(n in 1usize..=20, seed in any::<u64>()) {
        let (_, h, m) = instance(n, seed);
        let mut r = rng(seed ^ 1);
        let phi = random_vector(n, &mut r);
        let psi = random_vector(n, &mut r);
        let lhs = eta_inner(&phi, &h.apply(&psi), &m, None).unwrap();
        let rhs = eta_inner(&h.apply(&phi), &psi, &m, None).unwrap();
        let scale = h.frobenius_norm() * m.norm(&phi) * m.norm(&psi);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale);
    }

    #[test]
    fn gram_schmidt_is_orthonormal(n in 1usize..=15, k in 1usize..=15, seed in any::<u64>()) {
        let k = k.min(n);
        let mut r = rng(seed);
        let m = make_metric(&random_positive(n, &mut r)).unwrap();
        let vs: Vec<_> = (0..k).map(|_| random_vector(n, &mut r)).collect();
        let q = eta_gram_schmidt(&vs, &m).unwrap();
        prop_assert!(gram_deviation(&eta_gram(&q, &m, None).unwrap()) <= 1e-10);
    }

    #[test]
    fn physical_basis_invariants(n in 2usize..=20, seed in any::<u64>()) {
        let (_, h, m) = instance(n, seed);
        let opts = DiagonalizeOptions::algebraic();
        let basis = diagonalize_pseudo(&h, &m, &opts).unwrap();
        prop_assert!(basis.diagnostics().max_imaginary <= opts.real_tol);
        prop_assert!(basis.gram_deviation() <= 1e-8);

        let eq = equivalent_hermitian(&h, &m).unwrap();
        let eh = hermitian_eigen(&eq.matrix).unwrap();
        let scale = h.frobenius_norm();
        for (a, b) in basis.energies().iter().zip(&eh.values) {
            prop_assert!((a - b).abs() <= 1e-8 * scale);
        }

        let map = build_equivalence_map(&basis, &m).unwrap();
        prop_assert!(map.column_orthonormality <= 1e-8);
        prop_assert!(map.isometry <= 1e-10);

        let mut r = rng(seed ^ 2);
        let a: Vec<Complex64> = random_vector(basis.len(), &mut r).into_inner();
        let spectral = apply_hat_hamiltonian(&basis, &a).unwrap();
        let direct = h.apply(&basis.synthesize(&a).unwrap());
        let via = basis.synthesize(&spectral).unwrap();
        prop_assert!((&via - &direct).norm() <= 1e-8 * scale * basis.synthesize(&a).unwrap().norm());
    }

    #[test]
    fn dynamics_invariants(n in 2usize..=20, seed in any::<u64>()) {
        let (_, h, m) = instance(n, seed);
        let basis = diagonalize_pseudo(&h, &m, &DiagonalizeOptions::algebraic()).unwrap();
        let eq = equivalent_hermitian(&h, &m).unwrap();
        let psi0 = random_vector(n, &mut rng(seed ^ 3));
        let times = time_grid(10.0, 21);
        let traj = propagate_pseudo(&basis, &psi0, &times, false).unwrap();
        prop_assert!(traj.eta_drift() <= 1e-10);
        prop_assert!(equivalence_check(&basis, &m, &eq.matrix, &psi0, &times).unwrap() <= 1e-10);
    }
}
