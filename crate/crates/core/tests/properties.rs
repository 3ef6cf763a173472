mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use vcsqse::channels::{
    lift_to_register, single_qubit_channel, ChannelKind, ChannelSpec, KrausChannel,
};
use vcsqse::experiment::{ExperimentConfig, ExperimentKind};
use vcsqse::linalg::{generalized_eigensolve, hermitian_eigensolve, ComplexMatrix};
use vcsqse::molecule::{fci_sector, parse_fcidump, render_fcidump, MolecularIntegrals};
use vcsqse::operators::{
    jordan_wigner, pauli_to_dense, symmetry_operator, FermionOperator, Ladder, SymmetryKind,
};
use vcsqse::qse::{
    build_subspace_direct, fermionic_basis, solve_subspace, ExcitationFilter, QSE_METRIC_CUTOFF,
};
use vcsqse::random::{random_density, random_hermitian, random_state, random_unitary};
use vcsqse::rdm::{compute_rdms, cumulants_from_rdms, reconstruct_rdms, wedge, RdmSource};
use vcsqse::vcs::{transform_hamiltonian, Penalty, VcsSolver};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_fermion_operator(m: usize, terms: usize, rng: &mut impl Rng) -> FermionOperator {
    let mut op = FermionOperator::zero(m);
    for _ in 0..terms {
        let len = rng.random_range(0..=4);
        let ladders: Vec<Ladder> = (0..len)
            .map(|_| {
                let mode = rng.random_range(0..m);
                if rng.random_bool(0.5) {
                    Ladder::create(mode)
                } else {
                    Ladder::annihilate(mode)
                }
            })
            .collect();
        let coeff = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        op = op
            .add(&FermionOperator::term(m, &ladders, coeff).unwrap())
            .unwrap();
    }
    op
}

fn random_integrals(norb: usize, nelec: usize, rng: &mut impl Rng) -> MolecularIntegrals {
    let mut ints = MolecularIntegrals::zeros(norb, nelec, 0);
    ints.core_energy = rng.random_range(-1.0..1.0);
    for p in 0..norb {
        for q in 0..=p {
            ints.set_one_body(p, q, rng.random_range(-1.0..1.0));
        }
    }
    for p in 0..norb {
        for q in 0..norb {
            for r in 0..norb {
                for s in 0..norb {
                    if ints.two_body(p, q, r, s) == 0.0 {
                        ints.set_two_body(p, q, r, s, rng.random_range(-0.5..0.5));
                    }
                }
            }
        }
    }
    ints
}

fn sector_reference(
    h: &ComplexMatrix,
    nelec: usize,
    rng: &mut impl Rng,
) -> vcsqse::linalg::StateVector {
    // Random superposition of the lowest few sector eigenstates
    let spec = fci_sector(h, nelec).unwrap();
    let k = spec.eigenvalues.len().min(3);
    let mut v = vcsqse::linalg::StateVector::zeros(h.dim());
    for j in 0..k {
        v += spec.eigenvector(j) * c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let n = v.norm();
    v / c(n, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigensolver_residuals_are_bounded(seed in any::<u64>(), dim in 2usize..=64) {
        let a = random_hermitian(dim, &mut rng(seed));
        let spec = hermitian_eigensolve(&a).unwrap();
        let norm = a.as_dmatrix().norm();
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        for k in 0..dim {
            let v = spec.eigenvector(k);
            let r = a.mul_vec(&v) - &v * c(spec.eigenvalues[k], 0.0);
            prop_assert!(r.norm() <= 1e-10 * norm.max(1.0));
        }
        let gram = spec.eigenvectors.adjoint() * &spec.eigenvectors;
        prop_assert!((gram - DMatrix::identity(dim, dim)).norm() < 1e-10);
    }

    #[test]
    fn channels_are_trace_preserving_and_positive(
        seed in any::<u64>(),
        kind in prop::sample::select(vec![ChannelKind::Dephasing, ChannelKind::AmplitudePhase, ChannelKind::Depolarizing]),
        r1 in 0.0f64..1.0,
        r2 in 0.0f64..1.0,
    ) {
        let r2 = if kind == ChannelKind::AmplitudePhase { r2.max(0.5 * r1) } else { r2 };
        let ch = lift_to_register(&single_qubit_channel(&ChannelSpec::new(kind, r1, r2)).unwrap(), 2).unwrap();
        let rho = random_density(4, 1 + (seed % 4) as usize, &mut rng(seed));
        let out = ch.apply(&rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.trace().im.abs() < 1e-12);
        let min = hermitian_eigensolve(&out.hermitian_part()).unwrap().eigenvalues[0];
        prop_assert!(min >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generalized_spectrum_is_congruence_invariant(seed in any::<u64>(), dim in 2usize..=8) {
        let mut r = rng(seed);
        let h = random_hermitian(dim, &mut r);
        let s = &ComplexMatrix::identity(dim) + &random_density(dim, dim, &mut r).scale_real(dim as f64);
        let m = random_unitary(dim, &mut r).as_dmatrix() * DMatrix::from_fn(dim, dim, |i, j| {
            if i == j { c(1.0 + i as f64 * 0.3, 0.0) } else { c(0.0, 0.0) }
        });
        let a = generalized_eigensolve(&h, &s, 1e-12).unwrap();
        let b = generalized_eigensolve(&h.congruence(&m), &s.congruence(&m), 1e-12).unwrap();
        prop_assert_eq!(a.eigenvalues.len(), b.eigenvalues.len());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }

    #[test]
    fn unitary_channel_keeps_spectrum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_hermitian(8, &mut r);
        let ch = KrausChannel::new(vec![random_unitary(8, &mut r)], "unitary").unwrap();
        let a = hermitian_eigensolve(&h).unwrap();
        let b = hermitian_eigensolve(&transform_hamiltonian(&h, &ch).unwrap()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn jordan_wigner_is_multiplicative(seed in any::<u64>(), m in 1usize..=4) {
        let mut r = rng(seed);
        let a = random_fermion_operator(m, 3, &mut r);
        let b = random_fermion_operator(m, 3, &mut r);
        let lhs = pauli_to_dense(&jordan_wigner(&a.mul(&b).unwrap())).unwrap();
        let da = pauli_to_dense(&jordan_wigner(&a)).unwrap();
        let db = pauli_to_dense(&jordan_wigner(&b)).unwrap();
        prop_assert!(lhs.max_abs_diff(&(&da * &db)) < 1e-12);
    }

    #[test]
    fn normal_ordering_preserves_the_matrix(seed in any::<u64>(), m in 1usize..=4) {
        let a = random_fermion_operator(m, 4, &mut rng(seed));
        let before = a.to_dense().unwrap();
        let after = a.normal_order().to_dense().unwrap();
        prop_assert!(before.max_abs_diff(&after) < 1e-12);
        prop_assert!(a.adjoint().adjoint().distance(&a).unwrap() < 1e-14);
    }

    #[test]
    fn fcidump_round_trip(seed in any::<u64>(), norb in 1usize..=3) {
        let ints = random_integrals(norb, norb, &mut rng(seed));
        let back = parse_fcidump(&render_fcidump(&ints)).unwrap();
        prop_assert!((back.core_energy - ints.core_energy).abs() < 1e-12);
        for p in 0..norb {
            for q in 0..norb {
                prop_assert!((back.one_body(p, q) - ints.one_body(p, q)).abs() < 1e-12);
                for r in 0..norb {
                    for s in 0..norb {
                        prop_assert!((back.two_body(p, q, r, s) - ints.two_body(p, q, r, s)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn assembled_hamiltonian_conserves_symmetries(seed in any::<u64>(), norb in 1usize..=3) {
        let ints = random_integrals(norb, 1, &mut rng(seed));
        let h = vcsqse::molecule::assemble_hamiltonian(&ints).to_dense().unwrap();
        for (_, o) in symmetry_dense(2 * norb) {
            let comm = &(&h * &o) - &(&o * &h);
            prop_assert!(comm.max_abs() < 1e-10);
        }
    }

    #[test]
    fn channel_action_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut r = rng(seed);
        let ch = lift_to_register(
            &single_qubit_channel(&ChannelSpec::new(ChannelKind::AmplitudePhase, 0.2, 0.3)).unwrap(),
            2,
        )
        .unwrap();
        let (x, y) = (random_hermitian(4, &mut r), random_hermitian(4, &mut r));
        let lhs = ch.apply(&(&x.scale_real(a) + &y.scale_real(b))).unwrap();
        let rhs = &ch.apply(&x).unwrap().scale_real(a) + &ch.apply(&y).unwrap().scale_real(b);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn kraus_remixing_keeps_vcs_minimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ch = lift_to_register(
            &single_qubit_channel(&ChannelSpec::new(ChannelKind::Depolarizing, 0.05, 0.3)).unwrap(),
            2,
        )
        .unwrap();
        let n = ch.kraus_ops().len();
        let u = random_unitary(n, &mut r);
        let mixed: Vec<ComplexMatrix> = (0..n)
            .map(|i| {
                ch.kraus_ops()
                    .iter()
                    .enumerate()
                    .fold(ComplexMatrix::zeros(4), |acc, (j, k)| &acc + &k.scale(u.get(i, j)))
            })
            .collect();
        let remixed = KrausChannel::new(mixed, "remixed").unwrap();
        let h = random_hermitian(4, &mut r);
        let a = hermitian_eigensolve(&transform_hamiltonian(&h, &ch).unwrap()).unwrap().ground_energy();
        let b = hermitian_eigensolve(&transform_hamiltonian(&h, &remixed).unwrap()).unwrap().ground_energy();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn rdm_tensor_symmetries(seed in any::<u64>(), rank in 1usize..=16) {
        let rho = random_density(16, rank, &mut rng(seed));
        let rdms = compute_rdms(RdmSource::Mixed(&rho), 3).unwrap();
        let number = symmetry_dense(4)["number"].trace_product(&rho).re;
        prop_assert!((rdms.require(1).unwrap().trace().re - number).abs() < 1e-10);
        for k in 1..=3 {
            let t = rdms.require(k).unwrap();
            prop_assert!(t.hermitian_defect() < 1e-12);
            prop_assert!(t.antisymmetry_defect() < 1e-12);
        }
    }

    #[test]
    fn pure_and_rank_one_rdms_agree(seed in any::<u64>()) {
        let psi = random_state(16, &mut rng(seed));
        let rho = ComplexMatrix::outer(&psi);
        let a = compute_rdms(RdmSource::Pure(&psi), 4).unwrap();
        let b = compute_rdms(RdmSource::Mixed(&rho), 4).unwrap();
        for k in 1..=4 {
            prop_assert!(a.require(k).unwrap().max_abs_diff(b.require(k).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn two_rdm_partial_trace(seed in any::<u64>(), nelec in 1usize..=3) {
        let mut r = rng(seed);
        let h = random_hermitian(16, &mut r);
        // A random N-eigenstate: random combination within the N sector
        let psi = sector_reference(&h, nelec, &mut r);
        let rdms = compute_rdms(RdmSource::Pure(&psi), 2).unwrap();
        let (d1, d2) = (rdms.require(1).unwrap(), rdms.require(2).unwrap());
        let factor = (nelec as f64 - 1.0) / 2.0;
        for i in 0..4 {
            for k in 0..4 {
                let sum: Complex64 = (0..4).map(|j| d2.get(&[i, j, k, j])).sum();
                prop_assert!((sum - d1.get(&[i, k]) * factor).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn full_cumulants_rebuild_higher_rdms(seed in any::<u64>()) {
        let psi = random_state(16, &mut rng(seed));
        let rdms = compute_rdms(RdmSource::Pure(&psi), 4).unwrap();
        let cum = cumulants_from_rdms(&rdms).unwrap();
        let back = reconstruct_rdms(&cum, 4, 4).unwrap();
        for k in 1..=4 {
            prop_assert!(back.require(k).unwrap().max_abs_diff(rdms.require(k).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn wedge_is_antisymmetric_and_commutes_for_even_factors(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = compute_rdms(RdmSource::Pure(&random_state(16, &mut r)), 2).unwrap();
        let b = compute_rdms(RdmSource::Pure(&random_state(16, &mut r)), 2).unwrap();
        let (a1, b1, b2) = (a.require(1).unwrap(), b.require(1).unwrap(), b.require(2).unwrap());
        let ab = wedge(a1, b1).unwrap();
        prop_assert!(ab.antisymmetry_defect() < 1e-12);
        prop_assert!(wedge(a1, b2).unwrap().antisymmetry_defect() < 1e-12);
        // Each factor has an equal number of upper and lower indices, so the wedge is commutative
        prop_assert!(ab.max_abs_diff(&wedge(b1, a1).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn subspace_hierarchy_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ints = random_integrals(2, 2, &mut r);
        let h = vcsqse::molecule::assemble_hamiltonian(&ints).to_dense().unwrap();
        let psi = sector_reference(&h, 2, &mut r);
        let e_ref = h.expectation(&psi);
        let mut lowest = Vec::new();
        for order in [1, 2] {
            let basis = fermionic_basis(4, order, true, ExcitationFilter::All).unwrap();
            let prob = build_subspace_direct(&basis, &h, RdmSource::Pure(&psi), &symmetry_dense(4)).unwrap();
            let spec = solve_subspace(&prob, QSE_METRIC_CUTOFF).unwrap();
            for k in 0..spec.eigenvalues.len() {
                let n = prob.expectation(&spec, k, "number").unwrap();
                prop_assert!((n - 2.0).abs() < 1e-10, "order {} level {}: N = {}", order, k, n);
            }
            lowest.push(spec.ground_energy());
        }
        prop_assert!(lowest[1] <= lowest[0] + 1e-10);
        prop_assert!(lowest[0] <= e_ref + 1e-10);
    }

    #[test]
    fn penalties_reduce_deviation_monotonically(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = vcsqse::molecule::assemble_hamiltonian(&random_integrals(2, 2, &mut r)).to_dense().unwrap();
        let ch = lift_to_register(
            &single_qubit_channel(&ChannelSpec::new(ChannelKind::AmplitudePhase, 0.05, 0.05)).unwrap(),
            4,
        )
        .unwrap();
        let target = r.random_range(0..=2) as f64;
        let mut last = f64::INFINITY;
        for weight in [0.0, 1.0, 10.0, 100.0] {
            let penalty = Penalty::symmetry(SymmetryKind::Number, 4, target, weight).unwrap();
            let dev = penalty.deviation_squared();
            let sol = VcsSolver::new(h.clone(), ch.clone()).unwrap().with_penalty(penalty).unwrap().solve(None).unwrap();
            let d = dev.expectation(&sol.input_state);
            prop_assert!(d <= last + 1e-8, "weight {}: {} > {}", weight, d, last);
            last = d;
        }
    }

    #[test]
    fn config_round_trip(
        kind in prop::sample::select(vec![
            ExperimentKind::FidelitySweep,
            ExperimentKind::Spectrum,
            ExperimentKind::QseRepair,
            ExperimentKind::GroundChannels,
            ExperimentKind::ApproxSpectrum,
        ]),
        t1 in 0.0f64..1.0,
        weight in 0.0f64..200.0,
        order in 1usize..=2,
    ) {
        let mut cfg = ExperimentConfig::new(kind);
        cfg.sweep_manifest = Some("/data/sweep.txt".into());
        cfg.output = Some("/data/out.csv".into());
        cfg.tp_over_t1 = t1;
        cfg.tp_over_t2 = t1;
        cfg.subspace.order = order;
        cfg.penalties = vec![vcsqse::experiment::PenaltySpec { kind: SymmetryKind::SSquared, target: 0.0, weight }];
        let text = cfg.to_config_string();
        let back = ExperimentConfig::parse(&text, std::path::Path::new("/")).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_config_string(), text);
    }
}

#[test]
fn spin_operator_commutes_with_number_and_sz() {
    let s2 = symmetry_operator(SymmetryKind::SSquared, 4)
        .unwrap()
        .to_dense()
        .unwrap();
    for kind in [SymmetryKind::Number, SymmetryKind::Sz] {
        let o = symmetry_operator(kind, 4).unwrap().to_dense().unwrap();
        assert!((&(&s2 * &o) - &(&o * &s2)).max_abs() < 1e-12);
    }
}

#[test]
fn ladder_images_are_adjoint_and_anticommute() {
    let m = 4;
    let dense = |op: FermionOperator| pauli_to_dense(&jordan_wigner(&op)).unwrap();
    for p in 0..m {
        let cp = dense(FermionOperator::create(m, p).unwrap());
        let ap = dense(FermionOperator::annihilate(m, p).unwrap());
        assert!(cp.adjoint().max_abs_diff(&ap) < 1e-14);
        for q in 0..m {
            let cq = dense(FermionOperator::create(m, q).unwrap());
            let anti = &(&ap * &cq) + &(&cq * &ap);
            let want = if p == q {
                ComplexMatrix::identity(1 << m)
            } else {
                ComplexMatrix::zeros(1 << m)
            };
            assert!(anti.max_abs_diff(&want) < 1e-14);
        }
    }
}

#[test]
fn sector_spectrum_is_invariant_under_orbital_relabeling() {
    for point in sweep("h2_sto6g").iter().step_by(7) {
        let mut swapped = point.integrals.clone();
        let n = swapped.norb;
        for p in 0..n {
            for q in 0..n {
                swapped.set_one_body(n - 1 - p, n - 1 - q, point.integrals.one_body(p, q));
                for r in 0..n {
                    for s in 0..n {
                        let v = point.integrals.two_body(p, q, r, s);
                        swapped.set_two_body(n - 1 - p, n - 1 - q, n - 1 - r, n - 1 - s, v);
                    }
                }
            }
        }
        let a = fci_sector(&dense_hamiltonian(point), 2).unwrap();
        let h = vcsqse::molecule::assemble_hamiltonian(&swapped)
            .to_dense()
            .unwrap();
        let b = fci_sector(&h, 2).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
