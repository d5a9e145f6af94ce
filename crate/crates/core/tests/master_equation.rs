mod common;

use oqs_core::eigenops::{decompose, default_degeneracy_tol, eigenoperators};
use oqs_core::jc::{build_jc, build_jc_with, JcOptions, JcParams};
use oqs_core::linalg::{self, c, r, CMat, I};
use oqs_core::master::{
    apply_t0_filter, build_dissipator, build_lamb_shift, diagonalize_entry, diagonalize_gamma, integrate, integrate_with,
    lindblad_dissipator, validate_detailed_balance, IntegratorOptions, MasterEquation, SpectralCorrelationTensor,
    TemperatureMode, TensorEntry,
};
use oqs_core::ops::{make_atom_ops, make_cavity_ops, DensityMatrix, HilbertSpace, KetState};
use oqs_core::Error;
use proptest::prelude::*;

fn entry(omega: f64, gamma: CMat) -> TensorEntry {
    TensorEntry { omega, gamma, lamb: None }
}

fn scalar(x: f64) -> CMat {
    CMat::from_element(1, 1, r(x))
}

/// Single damped mode `H = ω n`, coupling `a + a†`, rate `gamma` at ω.
fn damped_mode(n_max: usize, omega: f64, gamma: f64) -> (MasterEquation, HilbertSpace) {
    let space = HilbertSpace::new(vec![n_max + 1]).unwrap();
    let cav = make_cavity_ops(&space, 0).unwrap();
    let h = cav.n_op.scale(r(omega));
    let x = cav.a.add(&cav.a_dag).unwrap();
    let decomp = decompose(&h, default_degeneracy_tol(&h)).unwrap();
    let tensor = SpectralCorrelationTensor::new(1, vec![entry(omega, scalar(gamma))]).unwrap();
    let me = MasterEquation::new(h, vec![eigenoperators(&x, &decomp, 0)], tensor, TemperatureMode::Zero).unwrap();
    (me, space)
}

fn sandwich(a: &CMat, rho: &CMat, b_adj: &CMat) -> CMat {
    (a * rho) * b_adj
}

fn anti(x: &CMat, rho: &CMat) -> CMat {
    x * rho + rho * x
}

/// Four-term common-bath dissipator written out by hand.
fn four_term(p: &JcParams, space: &HilbertSpace, rho: &CMat, literal_cross: bool) -> CMat {
    let atom = make_atom_ops(space, 0).unwrap();
    let cav = make_cavity_ops(space, 1).unwrap();
    let (sm, sp) = (atom.s_minus.matrix(), atom.s_plus.matrix());
    let (a, ad) = (cav.a.matrix(), cav.a_dag.matrix());
    let g22 = p.g22 + p.k_mirror;
    let mut d = (sandwich(sm, rho, sp) - anti(&(sp * sm), rho) * r(0.5)) * r(p.g11);
    d += (sandwich(a, rho, ad) - anti(&(ad * a), rho) * r(0.5)) * r(g22);
    // the literal cross terms pair αρS₊ with {α†S₋, ρ}; the general form has {S₊α, ρ}
    let (x12, x21) = if literal_cross { (ad * sm, sp * a) } else { (sp * a, ad * sm) };
    d += (sandwich(a, rho, sp) - anti(&x12, rho) * r(0.5)) * p.g12;
    d += (sandwich(sm, rho, ad) - anti(&x21, rho) * r(0.5)) * p.g12.conj();
    d
}

#[test]
fn generator_hygiene_on_random_hermitian_inputs() {
    let p = JcParams { g11: 0.02, g22: 0.03, g12: c(0.01, 0.015), k_mirror: 0.01, ..JcParams::default() };
    let lamb = CMat::from_row_slice(2, 2, &[r(0.001), c(0.0005, 0.0002), c(0.0005, -0.0002), r(0.002)]);
    let model = build_jc_with(p, JcOptions { lamb: Some(lamb), ..JcOptions::default() }).unwrap();
    let mut rng = common::rng(1);
    for _ in 0..100 {
        let rho = common::random_hermitian(&mut rng, model.dim());
        let d = model.master.rhs(&rho);
        assert!(linalg::trace(&d).norm() <= 1e-11);
        assert!(linalg::fro(&(&d - d.adjoint())) <= 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn dissipator_is_hermitian_and_traceless(g11 in 0.0f64..0.1, g22 in 0.0f64..0.1, frac in 0.0f64..1.0, phase in -3.2f64..3.2, seed in any::<u64>()) {
        let g12 = C64::from_polar(frac * (g11 * g22).sqrt(), phase);
        let model = build_jc(JcParams { g11, g22, g12, ..JcParams::default() }).unwrap();
        let rho = common::random_density(&mut common::rng(seed), model.dim());
        let d = build_dissipator(&model.master).apply(&rho);
        prop_assert!(linalg::trace(&d).norm() < 1e-12);
        prop_assert!(linalg::hermitian_deviation(&d) < 1e-12);
    }
}

use oqs_core::Complex64 as C64;

#[test]
fn zero_rates_give_zero_dissipator() {
    let model = build_jc(JcParams { g11: 0.0, g22: 0.0, g12: c(0.0, 0.0), ..JcParams::default() }).unwrap();
    let rho = common::random_density(&mut common::rng(2), model.dim());
    assert_eq!(build_dissipator(&model.master).apply(&rho), CMat::zeros(model.dim(), model.dim()));
}

#[test]
fn literal_four_term_dissipator_real_cross_rate() {
    let p = JcParams { g11: 0.01, g22: 0.02, g12: c(0.012, 0.0), ..JcParams::default() };
    let model = build_jc(p).unwrap();
    let mut rng = common::rng(3);
    for _ in 0..10 {
        let rho = common::random_density(&mut rng, model.dim());
        let d = model.master.dissipator().apply(&rho);
        assert!(linalg::max_abs_diff(&d, &four_term(&p, &model.space, &rho, true)) < 1e-14);
    }
}

#[test]
fn general_form_with_complex_cross_rate() {
    let p = JcParams { g11: 0.01, g22: 0.02, g12: c(0.006, 0.009), ..JcParams::default() };
    let model = build_jc(p).unwrap();
    let rho = common::random_density(&mut common::rng(4), model.dim());
    let d = model.master.dissipator().apply(&rho);
    assert!(linalg::max_abs_diff(&d, &four_term(&p, &model.space, &rho, false)) < 1e-14);
    // the literal cross anticommutators differ once g12 has an imaginary part
    assert!(linalg::max_abs_diff(&d, &four_term(&p, &model.space, &rho, true)) > 1e-6);
}

#[test]
fn mirror_loss_adds_only_cavity_damping() {
    let base = JcParams { g11: 0.01, g22: 0.02, g12: c(0.01, 0.0), ..JcParams::default() };
    let k = 0.05;
    let m0 = build_jc(base).unwrap();
    let m1 = build_jc(JcParams { k_mirror: k, ..base }).unwrap();
    let (a, ad) = (m0.cavity.a.matrix(), m0.cavity.a_dag.matrix());
    let mut rng = common::rng(5);
    for _ in 0..10 {
        let rho = common::random_density(&mut rng, m0.dim());
        let diff = m1.master.dissipator().apply(&rho) - m0.master.dissipator().apply(&rho);
        let expected = (sandwich(a, &rho, ad) - anti(&(ad * a), &rho) * r(0.5)) * r(k);
        assert!(linalg::max_abs_diff(&diff, &expected) < 1e-14);
    }
}

#[test]
fn jc_dissipator_matches_generic_assembly() {
    let p = JcParams { g11: 0.01, g22: 0.02, g12: c(0.01, 0.004), ..JcParams::default() };
    let model = build_jc(p).unwrap();
    let atom = make_atom_ops(&model.space, 0).unwrap();
    let cav = make_cavity_ops(&model.space, 1).unwrap();
    let bare = atom.s_z.scale(r(0.5)).add(&cav.n_op).unwrap();
    let decomp = decompose(&bare, default_degeneracy_tol(&bare)).unwrap();
    let couplings = vec![
        eigenoperators(&atom.s_plus.add(&atom.s_minus).unwrap(), &decomp, 0),
        eigenoperators(&cav.a.add(&cav.a_dag).unwrap(), &decomp, 1),
    ];
    let tensor = SpectralCorrelationTensor::new(2, vec![entry(1.0, p.gamma_matrix())]).unwrap();
    let me = MasterEquation::new(model.master.hamiltonian().clone(), couplings, tensor, TemperatureMode::Zero).unwrap();
    let rho = common::random_density(&mut common::rng(6), model.dim());
    assert!(linalg::max_abs_diff(&me.dissipator().apply(&rho), &model.master.dissipator().apply(&rho)) < 1e-14);
}

#[test]
fn psd_violation_reports_eigenvalue() {
    let gamma = CMat::from_row_slice(2, 2, &[r(0.01), r(0.02), r(0.02), r(0.01)]);
    match SpectralCorrelationTensor::new(2, vec![entry(1.0, gamma)]) {
        Err(Error::NotPositive { eigenvalue, .. }) => assert!((eigenvalue + 0.01).abs() < 1e-12),
        other => panic!("expected a positivity error, got {other:?}"),
    }
    let skew = CMat::from_row_slice(2, 2, &[r(0.01), c(0.0, 0.001), c(0.0, 0.001), r(0.01)]);
    assert!(matches!(SpectralCorrelationTensor::new(2, vec![entry(1.0, skew)]), Err(Error::TensorNotHermitian { .. })));
}

#[test]
fn lamb_shift_examples() {
    let space = HilbertSpace::new(vec![2]).unwrap();
    let atom = make_atom_ops(&space, 0).unwrap();
    let h = atom.s_z.scale(r(0.5));
    let decomp = decompose(&h, default_degeneracy_tol(&h)).unwrap();
    let couplings = vec![eigenoperators(&atom.s_plus.add(&atom.s_minus).unwrap(), &decomp, 0)];
    let with = |s: f64| {
        SpectralCorrelationTensor::new(1, vec![TensorEntry { omega: 1.0, gamma: scalar(0.1), lamb: Some(scalar(s)) }]).unwrap()
    };
    let zero = build_lamb_shift(&space, &couplings, &with(0.0)).unwrap();
    assert_eq!(zero.matrix(), &CMat::zeros(2, 2));
    let shift = build_lamb_shift(&space, &couplings, &with(0.3)).unwrap();
    let expected = atom.s_plus.mul(&atom.s_minus).unwrap().scale(r(0.3));
    assert!(linalg::max_abs_diff(shift.matrix(), expected.matrix()) < 1e-15);
    assert!(shift.is_hermitian(0.0));
    let missing = SpectralCorrelationTensor::new(1, vec![entry(1.0, scalar(0.1))]).unwrap();
    assert_eq!(build_lamb_shift(&space, &couplings, &missing).unwrap_err(), Error::MissingLambShift(1.0));
}

#[test]
fn neglected_lamb_shift_is_first_order_in_shift() {
    // cross-coefficient S₁₂ renormalizes the coupling, so populations move at O(s/ε)
    let p = JcParams { g11: 0.005, g22: 0.005, g12: c(0.0, 0.0), ..JcParams::default() };
    let grid = common::uniform(std::f64::consts::PI / p.eps.re, 60);
    let run = |s: f64| {
        let lamb = CMat::from_row_slice(2, 2, &[r(0.0), r(s), r(s), r(0.0)]);
        let opts = JcOptions { lamb: (s != 0.0).then_some(lamb), ..JcOptions::default() };
        let model = build_jc_with(p, opts).unwrap();
        let rho0 = model.initial_state(&oqs_core::jc::BlockInitial::Upper).unwrap();
        let out = integrate(&model.master, &rho0, &grid).unwrap();
        (out.iter().map(|rho| model.excited_population(rho.matrix())).collect::<Vec<_>>(), model.master.lamb_commutator_norm())
    };
    let (plain, _) = run(0.0);
    let diff = |s: f64| {
        let (shifted, comm) = run(s);
        // this shift commutes with H_S and still moves the populations
        assert!(comm < 1e-12);
        plain.iter().zip(&shifted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let s = 1e-3;
    let (d1, d2) = (diff(s), diff(2.0 * s));
    let scale = s / p.eps.re;
    assert!(d1 > 0.1 * scale && d1 < 10.0 * scale, "d1 = {d1}, s/ε = {scale}");
    assert!((d2 / d1 - 2.0).abs() < 0.2, "ratio {}", d2 / d1);
}

#[test]
fn zero_temperature_filter() {
    let g = CMat::from_row_slice(2, 2, &[r(0.01), r(0.005), r(0.005), r(0.01)]);
    let tensor = SpectralCorrelationTensor::new(2, vec![entry(-1.0, g.clone() * r(0.3)), entry(1.0, g.clone())]).unwrap();
    assert!(tensor.has_negative_frequencies());
    let filtered = apply_t0_filter(&tensor);
    assert_eq!(filtered.entries().len(), 1);
    assert_eq!(filtered.entries()[0].omega, 1.0);
    assert_eq!(apply_t0_filter(&filtered), filtered);
}

#[test]
fn filtered_jc_tensor_reduces_to_four_terms() {
    let p = JcParams { g11: 0.01, g22: 0.02, g12: c(0.01, 0.0), ..JcParams::default() };
    let model = build_jc(p).unwrap();
    let tensor = SpectralCorrelationTensor::new(2, vec![entry(-1.0, p.gamma_matrix() * r(0.5)), entry(1.0, p.gamma_matrix())]).unwrap();
    let filtered = apply_t0_filter(&tensor);
    let me = MasterEquation::new(model.master.hamiltonian().clone(), model.master.couplings().to_vec(), filtered, TemperatureMode::Zero).unwrap();
    let rho = common::random_density(&mut common::rng(7), model.dim());
    assert!(linalg::max_abs_diff(&me.dissipator().apply(&rho), &four_term(&p, &model.space, &rho, true)) < 1e-14);
    // without the filter the absorption terms are present
    let unfiltered = MasterEquation::new(model.master.hamiltonian().clone(), model.master.couplings().to_vec(), tensor, TemperatureMode::Zero).unwrap();
    assert!(linalg::max_abs_diff(&unfiltered.dissipator().apply(&rho), &four_term(&p, &model.space, &rho, true)) > 1e-4);
}

#[test]
fn detailed_balance_examples() {
    let zero_t = SpectralCorrelationTensor::new(1, vec![entry(1.0, scalar(0.2))]).unwrap();
    assert!(validate_detailed_balance(&zero_t, f64::INFINITY).passed);
    let absorbing = SpectralCorrelationTensor::new(1, vec![entry(-1.0, scalar(0.01)), entry(1.0, scalar(0.2))]).unwrap();
    let report = validate_detailed_balance(&absorbing, f64::INFINITY);
    assert!(!report.passed);
    assert_eq!(report.max_violation, 0.01);

    let e1 = (-1.0f64).exp();
    let balanced = SpectralCorrelationTensor::new(1, vec![entry(-2.0, scalar(1.0)), entry(2.0, scalar(e1))]).unwrap();
    let report = validate_detailed_balance(&balanced, 0.5);
    assert!(report.passed, "{report:?}");
    assert!(report.max_violation < 1e-15);
    let off = SpectralCorrelationTensor::new(1, vec![entry(-2.0, scalar(1.0)), entry(2.0, scalar(0.4))]).unwrap();
    let report = validate_detailed_balance(&off, 0.5);
    assert!(!report.passed);
    assert!((report.max_violation - (0.4 - e1)).abs() < 1e-15);
}

#[test]
fn detailed_balance_random_pair_reports_worst_entry() {
    let mut rng = common::rng(8);
    let beta = 0.7;
    let omega = 1.3;
    for _ in 0..20 {
        let g = common::random_density(&mut rng, 3);
        let h = common::random_density(&mut rng, 3);
        let tensor = SpectralCorrelationTensor::new(3, vec![entry(-omega, g.clone()), entry(omega, h.clone())]).unwrap();
        let expected = linalg::max_abs_diff(&h, &(g * r((-beta * omega).exp())));
        let report = validate_detailed_balance(&tensor, beta);
        assert!(!report.passed);
        assert!((report.max_violation - expected).abs() < 1e-15);
    }
}

#[test]
fn finite_temperature_mode_validates_on_assembly() {
    let (zero_me, _) = damped_mode(2, 1.0, 0.1);
    let h = zero_me.hamiltonian().clone();
    let couplings = zero_me.couplings().to_vec();
    let bad = SpectralCorrelationTensor::new(1, vec![entry(-1.0, scalar(1.0)), entry(1.0, scalar(1.0))]).unwrap();
    let err = MasterEquation::new(h.clone(), couplings.clone(), bad, TemperatureMode::ValidatedFinite { beta: 1.0 }).unwrap_err();
    assert!(matches!(err, Error::DetailedBalance(_)));
    let good = SpectralCorrelationTensor::new(1, vec![entry(-1.0, scalar(1.0)), entry(1.0, scalar((-1.0f64).exp()))]).unwrap();
    assert!(MasterEquation::new(h, couplings, good, TemperatureMode::ValidatedFinite { beta: 1.0 }).is_ok());
}

#[test]
fn free_precession() {
    let space = HilbertSpace::new(vec![2]).unwrap();
    let atom = make_atom_ops(&space, 0).unwrap();
    let omega0 = 1.0;
    let h = atom.s_z.scale(r(0.5 * omega0));
    let tensor = SpectralCorrelationTensor::new(0, vec![]).unwrap();
    let me = MasterEquation::new(h, vec![], tensor, TemperatureMode::Zero).unwrap();
    let plus = KetState::normalized(space.clone(), oqs_core::CVec::from_vec(vec![r(1.0), r(1.0)])).unwrap();
    let rho0 = plus.projector();
    let grid = common::uniform(20.0, 40);
    let out = integrate(&me, &rho0, &grid).unwrap();
    // ρ₊₋ = ⟨+|ρ|−⟩ rotates as e^{−iω₀t}
    for (t, rho) in grid.iter().zip(&out) {
        let expected = rho0.matrix()[(1, 0)] * (-I * omega0 * *t).exp();
        assert!((rho.matrix()[(1, 0)] - expected).norm() < 1e-8, "t = {t}");
    }
}

#[test]
fn damped_mode_number_decay() {
    let gamma = 0.2;
    let (me, space) = damped_mode(4, 1.0, gamma);
    let rho0 = KetState::basis(&space, &[2]).projector();
    let n_op = make_cavity_ops(&space, 0).unwrap().n_op;
    let grid = common::uniform(15.0, 30);
    let out = integrate(&me, &rho0, &grid).unwrap();
    for (t, rho) in grid.iter().zip(&out) {
        let n = rho.expectation(&n_op).re;
        let exact = 2.0 * (-gamma * t).exp();
        assert!(((n - exact) / exact).abs() < 1e-6, "t = {t}");
        let hyg = rho.hygiene();
        assert!((hyg.trace - 1.0).abs() < 1e-8);
        assert!(hyg.hermitian_deviation < 1e-8);
        assert!(hyg.min_eigenvalue > -1e-7);
    }
}

#[test]
fn halving_the_step_changes_little() {
    let p = JcParams { g11: 0.01, g22: 0.02, g12: c(0.01, 0.0), n_exc: 2, n_max: 4, ..JcParams::default() };
    let model = build_jc(p).unwrap();
    let rho0 = model.initial_state(&oqs_core::jc::BlockInitial::Upper).unwrap();
    let grid = common::uniform(30.0, 30);
    let coarse = integrate(&model.master, &rho0, &grid).unwrap();
    let fine = integrate_with(&model.master, &rho0, &grid, IntegratorOptions { step_fraction: 0.5 * oqs_core::master::DEFAULT_STEP_FRACTION }).unwrap();
    let worst = coarse.iter().zip(&fine).map(|(a, b)| linalg::max_abs_diff(a.matrix(), b.matrix())).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn stiff_input_reports_underflow_time() {
    let (me, space) = damped_mode(2, 1.0, 1e12);
    let rho0 = KetState::basis(&space, &[1]).projector();
    match integrate(&me, &rho0, &[0.0, 0.5, 1.0]) {
        Err(Error::StepUnderflow { time, .. }) => assert_eq!(time, 0.0),
        other => panic!("expected underflow, got {:?}", other.map(|v| v.len())),
    }
}

#[test]
fn lindblad_form_matches_on_matrix_units() {
    for p in [
        JcParams { g11: 0.01, g22: 0.02, g12: c(0.006, 0.009), k_mirror: 0.01, ..JcParams::default() },
        JcParams::default(),
    ] {
        let model = build_jc(p).unwrap();
        let channels = diagonalize_gamma(&model.master).unwrap();
        let n = model.dim();
        for i in 0..n {
            for j in 0..n {
                let mut e = CMat::zeros(n, n);
                e[(i, j)] = r(1.0);
                let d = model.master.dissipator().apply(&e);
                assert!(linalg::max_abs_diff(&d, &lindblad_dissipator(&channels, &e)) < 1e-12);
            }
        }
    }
}

#[test]
fn diagonal_tensor_gives_scaled_couplings() {
    let p = JcParams { g11: 0.03, g22: 0.02, g12: c(0.0, 0.0), ..JcParams::default() };
    let model = build_jc(p).unwrap();
    let channels = diagonalize_gamma(&model.master).unwrap();
    assert_eq!(channels.len(), 2);
    let atom_jump = model.atom.s_minus.matrix() * r(0.03f64.sqrt());
    let cavity_jump = model.cavity.a.matrix() * r(0.02f64.sqrt());
    // eigenvectors are fixed up to a phase, so compare L ρ L†-invariant products
    let close = |l: &CMat, target: &CMat| linalg::max_abs_diff(&(l.adjoint() * l), &(target.adjoint() * target)) < 1e-14;
    assert!(close(&channels[0].op, &atom_jump));
    assert!(close(&channels[1].op, &cavity_jump));
    assert!((channels[0].op[(model.index(0, false), model.index(0, true))].norm() - 0.03f64.sqrt()).abs() < 1e-15);
}

#[test]
fn dfs_tensor_has_one_collective_jump() {
    let g = 0.01;
    let model = build_jc(JcParams { g11: g, g22: g, g12: c(g, 0.0), ..JcParams::default() }).unwrap();
    let channels = diagonalize_gamma(&model.master).unwrap();
    assert_eq!(channels.len(), 1);
    assert!((channels[0].rate - 2.0 * g).abs() < 1e-15);
    let collective = (model.atom.s_minus.matrix() + model.cavity.a.matrix()) * r(g.sqrt());
    let l = &channels[0].op;
    // L = e^{iθ}(S₋ + a)√γ
    let k = (model.index(0, false), model.index(0, true));
    let phase = l[k] / collective[k];
    assert!((phase.norm() - 1.0).abs() < 1e-12);
    assert!(linalg::max_abs_diff(l, &(collective * phase)) < 1e-14);
}

#[test]
fn emitted_channels_equal_tensor_rank() {
    let mut rng = common::rng(9);
    for rank in 0..=3usize {
        let mut gamma = CMat::zeros(3, 3);
        for _ in 0..rank {
            let v = common::random_matrix(&mut rng, 3).column(0).into_owned();
            gamma += &v * v.adjoint();
        }
        gamma = (&gamma + gamma.adjoint()) * r(0.5);
        assert_eq!(diagonalize_entry(&gamma, 1.0).unwrap().len(), rank);
    }
}

#[test]
fn density_matrix_outputs_are_valid() {
    let model = build_jc(JcParams { g11: 0.02, g22: 0.01, g12: c(0.005, 0.01), ..JcParams::default() }).unwrap();
    let rho0 = model.initial_state(&oqs_core::jc::BlockInitial::Mixture { upper_weight: 0.3 }).unwrap();
    let out = integrate(&model.master, &rho0, &common::uniform(100.0, 50)).unwrap();
    for rho in out {
        DensityMatrix::new(rho.space().clone(), rho.matrix().clone(), 1e-8).unwrap();
    }
}
