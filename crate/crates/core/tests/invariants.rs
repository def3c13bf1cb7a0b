//! Property tests over seeded random instances.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use dfsusc::channel::{apply_channel, completeness_residual, extract_kraus};
use dfsusc::codes::{encoded_ghz, pair_code, singlet_triplet_code};
use dfsusc::fidelity::{bures_distance_sq, uhlmann_fidelity};
use dfsusc::linalg::{kron, matrix_exp, partial_trace_bath, psd_sqrt, ComplexMatrix, DensityMatrix};
use dfsusc::lindblad::{evolve, liouvillian_matrix};
use dfsusc::operators::{assemble_joint_hamiltonian, CouplingOperator, CouplingTerm, PauliString};
use dfsusc::random::{
    random_density, random_hermitian, random_lindblad, random_matrix, random_model, random_state,
    random_system_operator, rng_for,
};
use dfsusc::susceptibility::{chi_analytic, cross_term_profile, variance};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hermitian_exponential_is_unitary(seed in any::<u64>(), dim in 1usize..12, t in -3.0f64..3.0) {
        let h = random_hermitian(&mut rng_for(seed, 0), dim);
        let u = matrix_exp(&h, c(0.0, -t)).unwrap();
        prop_assert!(u.adjoint().matmul(&u).max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-10);
    }

    #[test]
    fn psd_sqrt_squares_back(seed in any::<u64>(), dim in 1usize..16, rank_frac in 0.1f64..1.0) {
        let mut rng = rng_for(seed, 0);
        let rank = ((dim as f64 * rank_frac).ceil() as usize).max(1);
        let x = random_matrix(&mut rng, dim, rank);
        let m = x.matmul(&x.adjoint());
        let r = psd_sqrt(&m).unwrap();
        prop_assert!(r.matmul(&r).max_abs_diff(&m) <= 1e-10 * m.max_abs().max(1.0));
        prop_assert!(r.hermiticity_residual() <= 1e-12 * r.max_abs().max(1.0));
    }

    #[test]
    fn partial_trace_is_linear_and_trace_preserving(seed in any::<u64>(), ds in 1usize..4, db in 1usize..4) {
        let mut rng = rng_for(seed, 0);
        let a = random_matrix(&mut rng, ds * db, ds * db);
        let b = random_matrix(&mut rng, ds * db, ds * db);
        let z = c(0.3, -1.1);
        let ta = partial_trace_bath(&a, ds, db).unwrap();
        let tb = partial_trace_bath(&b, ds, db).unwrap();
        let combined = partial_trace_bath(&(&a + &b.scale(z)), ds, db).unwrap();
        prop_assert!(combined.max_abs_diff(&(&ta + &tb.scale(z))) <= 1e-12);
        prop_assert!((ta.trace() - a.trace()).norm() <= 1e-12);
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), p in 1usize..4, q in 1usize..4) {
        let mut rng = rng_for(seed, 0);
        let (a, cm) = (random_matrix(&mut rng, p, p), random_matrix(&mut rng, p, p));
        let (b, d) = (random_matrix(&mut rng, q, q), random_matrix(&mut rng, q, q));
        let lhs = kron(&a, &b).matmul(&kron(&cm, &d));
        prop_assert!(lhs.max_abs_diff(&kron(&a.matmul(&cm), &b.matmul(&d))) <= 1e-12);
    }

    #[test]
    fn pauli_words_square_to_identity(word in "[IXYZ]{1,6}") {
        let p: PauliString = word.parse().unwrap();
        let m = p.to_dense().unwrap();
        prop_assert!(m.matmul(&m).max_abs_diff(&ComplexMatrix::identity(m.rows())) == 0.0);
        prop_assert!(m.hermiticity_residual() == 0.0);
    }

    #[test]
    fn termwise_application_matches_dense(seed in any::<u64>(), n in 1usize..8, terms in 1usize..6) {
        let mut rng = rng_for(seed, 0);
        let op = random_system_operator(&mut rng, n, terms).unwrap();
        let psi = random_state(&mut rng, 1 << n);
        let dense = op.to_dense().unwrap().mul_vec(psi.amplitudes());
        prop_assert!(max_diff(&dense, &op.apply(psi.amplitudes()).unwrap()) <= 1e-12);
    }

    #[test]
    fn assembled_hamiltonian_is_hermitian(seed in any::<u64>(), idx in 0u64..1000, eps in -1.0f64..1.0) {
        let r = random_model(seed, idx).unwrap();
        let h = assemble_joint_hamiltonian(&r.spec, eps).unwrap();
        prop_assert!(h.hermiticity_residual() <= 1e-12 * h.max_abs());
        // finite difference in ε recovers V
        let step = 1e-3;
        let hp = assemble_joint_hamiltonian(&r.spec, eps + step).unwrap();
        let fd = (&hp - &h).scale_real(1.0 / step);
        prop_assert!(fd.max_abs_diff(&r.spec.v_dense().unwrap()) <= 1e-9);
    }

    #[test]
    fn single_term_coupling_is_a_kronecker_product(seed in any::<u64>(), n in 1usize..4, db in 1usize..4) {
        let mut rng = rng_for(seed, 0);
        let s = random_system_operator(&mut rng, n, 3).unwrap();
        let b = random_hermitian(&mut rng, db);
        let v = CouplingOperator::new(n, db, vec![CouplingTerm { system: s.clone(), bath: b.clone() }]).unwrap();
        prop_assert_eq!(v.dense(4096).unwrap(), kron(&s.to_dense().unwrap(), &b));
    }

    #[test]
    fn kraus_sets_are_complete_and_positive(seed in any::<u64>(), idx in 0u64..1000, eps in -0.5f64..0.5, t in 0.0f64..2.0) {
        let r = random_model(seed, idx).unwrap();
        let kraus = extract_kraus(&r.spec, eps, t).unwrap();
        prop_assert!(completeness_residual(&kraus) <= 1e-10);
        let rho = DensityMatrix::from_pure(&random_state(&mut rng_for(seed, idx + 1), r.spec.system_dim()));
        let out = apply_channel(&kraus, &rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(out.matrix().eigh().unwrap().values[0] >= -1e-10);
    }

    #[test]
    fn chi_is_nonnegative_and_ignores_the_unperturbed_hamiltonian(seed in any::<u64>(), idx in 0u64..1000) {
        let r = random_model(seed, idx).unwrap();
        let chi = chi_analytic(&r.psi0, r.spec.v(), r.spec.bath_initial()).unwrap();
        prop_assert!(chi >= -1e-10);
        let mut rng = rng_for(seed, idx + 7);
        let n = r.spec.n_qubits();
        let changed = r.spec.with_h_s(random_system_operator(&mut rng, n, 2).unwrap()).unwrap();
        let changed = changed.with_h_sb(CouplingOperator::zero(n, r.spec.bath_dim())).unwrap();
        prop_assert_eq!(chi_analytic(&r.psi0, changed.v(), changed.bath_initial()).unwrap(), chi);
    }

    #[test]
    fn single_term_chi_is_bath_moment_times_variance(seed in any::<u64>(), n in 1usize..5, db in 1usize..5) {
        let mut rng = rng_for(seed, 0);
        let s = random_system_operator(&mut rng, n, 3).unwrap();
        let b = random_hermitian(&mut rng, db);
        let phi = random_state(&mut rng, db);
        let psi = random_state(&mut rng, 1 << n);
        let v = CouplingOperator::new(n, db, vec![CouplingTerm { system: s.clone(), bath: b.clone() }]).unwrap();
        let bphi = b.mul_vec(phi.amplitudes());
        let moment: f64 = bphi.iter().map(|z| z.norm_sqr()).sum();
        let want = moment * variance(&psi, &s).unwrap();
        let got = chi_analytic(&psi, &v, &phi).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn cross_term_buckets_sum_to_chi(seed in any::<u64>(), blocks in 1usize..4, four in any::<bool>(), db in 1usize..4) {
        let code = if four { singlet_triplet_code() } else { pair_code() };
        let psi = encoded_ghz(&code, blocks).unwrap();
        let n = psi.n_total;
        let mut rng = rng_for(seed, 0);
        let terms = (0..2)
            .map(|_| CouplingTerm { system: random_system_operator(&mut rng, n, 3).unwrap(), bath: random_hermitian(&mut rng, db) })
            .collect();
        let v = CouplingOperator::new(n, db, terms).unwrap();
        let phi = random_state(&mut rng, db);
        let p = cross_term_profile(&psi, &v, &phi).unwrap();
        let chi = chi_analytic(&psi.vector, &v, &phi).unwrap();
        prop_assert!((p.intra + p.inter + p.straddling - chi).abs() <= 1e-10 * chi.max(1.0));
        prop_assert!((p.total - chi).abs() <= 1e-10 * chi.max(1.0));
    }

    #[test]
    fn lindblad_evolution_preserves_trace_and_positivity(seed in any::<u64>(), idx in 0u64..1000, eps in -0.3f64..0.3, t in 0.0f64..1.0) {
        let r = random_lindblad(seed, idx).unwrap();
        let out = evolve(&r.model, eps, &r.rho0, t).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(out.matrix().eigh().unwrap().values[0] >= -1e-9);
    }

    #[test]
    fn liouvillian_is_quadratic_in_eps(seed in any::<u64>(), idx in 0u64..1000, e in 0.1f64..2.0) {
        let r = random_lindblad(seed, idx).unwrap();
        let l = |x: f64| liouvillian_matrix(&r.model, x).unwrap();
        let (l0, lp, lm) = (l(0.0), l(1.0), l(-1.0));
        // L(e) = L0 + e (L+ − L−)/2 + e² ((L+ + L−)/2 − L0)
        let lin = (&lp - &lm).scale_real(0.5 * e);
        let quad = (&(&lp + &lm).scale_real(0.5) - &l0).scale_real(e * e);
        let predicted = &(&l0 + &lin) + &quad;
        prop_assert!(predicted.max_abs_diff(&l(e)) <= 1e-10 * l(e).max_abs().max(1.0));
    }

    #[test]
    fn fidelity_is_symmetric_bounded_and_consistent_with_bures(seed in any::<u64>(), dim in 2usize..5, r1 in 1usize..5, r2 in 1usize..5) {
        let mut rng = rng_for(seed, 0);
        let a = random_density(&mut rng, dim, r1.min(dim)).unwrap();
        let b = random_density(&mut rng, dim, r2.min(dim)).unwrap();
        let f = uhlmann_fidelity(&a, &b).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        if r1 >= dim && r2 >= dim {
            prop_assert!((f - uhlmann_fidelity(&b, &a).unwrap()).abs() <= 1e-9);
        }
        prop_assert!((bures_distance_sq(&a, &b).unwrap() - 2.0 * (1.0 - f.sqrt())).abs() <= 1e-12);
        prop_assert!((uhlmann_fidelity(&a, &a).unwrap() - 1.0).abs() <= 1e-9);
    }
}
