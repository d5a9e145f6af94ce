mod common;

use oqs_core::eigenops::{component_at, decompose, default_degeneracy_tol, eigenoperators, verify_rwa_conservation};
use oqs_core::linalg::{self, expm, r, CMat, I};
use oqs_core::ops::{make_atom_ops, make_cavity_ops, HilbertSpace, Operator};
use rand::Rng;

fn jc_hamiltonian(n_max: usize, omega0: f64, eps: f64) -> (HilbertSpace, Operator, Operator, Operator) {
    let space = HilbertSpace::atom_cavity(n_max);
    let atom = make_atom_ops(&space, 0).unwrap();
    let cav = make_cavity_ops(&space, 1).unwrap();
    let h = atom
        .s_z
        .scale(r(0.5 * omega0))
        .add(&cav.n_op.scale(r(omega0)))
        .unwrap()
        .add(&atom.s_plus.mul(&cav.a).unwrap().add(&cav.a_dag.mul(&atom.s_minus).unwrap()).unwrap().scale(r(eps)))
        .unwrap();
    let a1 = atom.s_plus.add(&atom.s_minus).unwrap();
    let a2 = cav.a.add(&cav.a_dag).unwrap();
    (space, h, a1, a2)
}

#[test]
fn ladder_identities_and_adjoint_pairs() {
    for eps in [0.0, 0.1] {
        let (_, h, a1, a2) = jc_hamiltonian(3, 1.0, eps);
        let decomp = decompose(&h, default_degeneracy_tol(&h)).unwrap();
        for a in [&a1, &a2] {
            let comps = eigenoperators(a, &decomp, 0);
            for e in &comps {
                let lhs = linalg::commutator(h.matrix(), e.op.matrix());
                let rhs = e.op.matrix() * r(-e.frequency);
                assert!(linalg::fro(&(lhs - rhs)) <= 1e-9 * linalg::fro(e.op.matrix()).max(1.0));
                // [H, A†(ω)] = +ω A†(ω)
                let adj = e.op.matrix().adjoint();
                let lhs = linalg::commutator(h.matrix(), &adj);
                assert!(linalg::fro(&(lhs - &adj * r(e.frequency))) <= 1e-9 * linalg::fro(&adj).max(1.0));
                let partner = component_at(&comps, -e.frequency, 1e-8).expect("negative-frequency partner");
                assert!(linalg::max_abs_diff(&adj, partner.op.matrix()) < 1e-10);
            }
            let mut sum = CMat::zeros(a.dim(), a.dim());
            for e in &comps {
                sum += e.op.matrix();
            }
            assert!(linalg::max_abs_diff(&sum, a.matrix()) < 1e-10);
        }
    }
}

#[test]
fn interaction_picture_phase() {
    let (_, h, a1, _) = jc_hamiltonian(3, 1.0, 0.1);
    let decomp = decompose(&h, default_degeneracy_tol(&h)).unwrap();
    let comps = eigenoperators(&a1, &decomp, 0);
    let mut rng = common::rng(5);
    for _ in 0..5 {
        let t: f64 = rng.random_range(0.0..30.0);
        let u = expm(&(h.matrix() * (-I * t)));
        for e in &comps {
            let rotated = u.adjoint() * e.op.matrix() * &u;
            let expected = e.op.matrix() * (-I * e.frequency * t).exp();
            let rel = linalg::fro(&(rotated - &expected)) / linalg::fro(&expected);
            assert!(rel < 1e-8, "t = {t}, ω = {}, rel = {rel}", e.frequency);
        }
    }
}

#[test]
fn projectors_resolve_identity() {
    let (_, h, _, _) = jc_hamiltonian(4, 1.0, 0.1);
    let decomp = decompose(&h, default_degeneracy_tol(&h)).unwrap();
    let n = h.dim();
    let mut sum = CMat::zeros(n, n);
    for (i, p) in decomp.projectors.iter().enumerate() {
        sum += p.matrix();
        for (j, q) in decomp.projectors.iter().enumerate() {
            let prod = p.matrix() * q.matrix();
            let expected = if i == j { p.matrix().clone() } else { CMat::zeros(n, n) };
            assert!(linalg::max_abs_diff(&prod, &expected) < 1e-10);
        }
    }
    assert!(linalg::max_abs_diff(&sum, &CMat::identity(n, n)) < 1e-10);
    for w in decomp.eigenvalues.windows(2) {
        assert!(w[1] - w[0] > decomp.degeneracy_tol);
    }
}

#[test]
fn dressed_one_excitation_splitting() {
    let eps = 0.1;
    let (_, h, _, _) = jc_hamiltonian(3, 1.0, eps);
    let decomp = decompose(&h, default_degeneracy_tol(&h)).unwrap();
    // one-excitation block [[ω₀/2, ε], [ε, ω₀/2]] splits to ω₀/2 ± ε
    for target in [-0.5, 0.5 - eps, 0.5 + eps] {
        assert!(decomp.eigenvalues.iter().any(|&e| (e - target).abs() < 1e-12), "missing {target}");
    }
}

#[test]
fn field_quadrature_against_bare_hamiltonian() {
    let (_, h, _, a2) = jc_hamiltonian(3, 1.0, 0.0);
    let space = h.space().clone();
    let cav = make_cavity_ops(&space, 1).unwrap();
    let decomp = decompose(&h, default_degeneracy_tol(&h)).unwrap();
    let comps = eigenoperators(&a2, &decomp, 1);
    assert_eq!(comps.len(), 2);
    assert!(linalg::max_abs_diff(component_at(&comps, 1.0, 1e-8).unwrap().op.matrix(), cav.a.matrix()) < 1e-12);
    assert!(linalg::max_abs_diff(component_at(&comps, -1.0, 1e-8).unwrap().op.matrix(), cav.a_dag.matrix()) < 1e-12);
}

fn toy_bath(omega_b: f64) -> (Operator, Operator, Operator, Operator, Operator, Operator) {
    let qs = HilbertSpace::new(vec![2]).unwrap();
    let qb = HilbertSpace::new(vec![3]).unwrap();
    let atom = make_atom_ops(&qs, 0).unwrap();
    let mode = make_cavity_ops(&qb, 0).unwrap();
    let h_s = atom.s_z.scale(r(0.5));
    let h_b = mode.n_op.scale(r(omega_b));
    (h_s, h_b, atom.s_minus, atom.s_plus, mode.a, mode.a_dag)
}

#[test]
fn rwa_pairs_conserve_free_energy() {
    let (h_s, h_b, sm, sp, b, bd) = toy_bath(1.0);
    let resonant = verify_rwa_conservation(&h_s, &h_b, &[(sm.clone(), bd.clone()), (sp.clone(), b.clone())]).unwrap();
    assert!(resonant < 1e-12);
    let counter = verify_rwa_conservation(&h_s, &h_b, &[(sm, bd.clone()), (sp.clone(), b), (sp, bd)]).unwrap();
    assert!(counter > 0.1);
}

#[test]
fn detuned_residual_matches_direct_commutator() {
    let (h_s, h_b, sm, sp, b, bd) = toy_bath(1.3);
    let residual = verify_rwa_conservation(&h_s, &h_b, &[(sm.clone(), bd.clone()), (sp.clone(), b.clone())]).unwrap();
    let h = linalg::kron(h_s.matrix(), &CMat::identity(3, 3)) + linalg::kron(&CMat::identity(2, 2), h_b.matrix());
    let hi = linalg::kron(sm.matrix(), bd.matrix()) + linalg::kron(sp.matrix(), b.matrix());
    let direct = linalg::fro(&linalg::commutator(&h, &hi));
    assert!((residual - direct).abs() < 1e-12);
    let expected = 0.3 * (linalg::fro(&linalg::kron(sm.matrix(), bd.matrix())).powi(2) + linalg::fro(&linalg::kron(sp.matrix(), b.matrix())).powi(2)).sqrt();
    assert!((residual - expected).abs() < 1e-12);
}
