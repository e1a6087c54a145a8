use super::*;

fn unit() -> SystemParams {
    SystemParams::new(1.0, 1.0).unwrap()
}

fn mode(k: f64, n: u32) -> ModeIndex {
    ModeIndex::new(k, n).unwrap()
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn mixing_angle_examples() {
    let p = unit();
    let a = mixing_angle(&p, &mode(2.0, 1), 3.0 * 2f64.ln()).unwrap();
    assert!((a.theta.tanh() - 1.625 / 2.375).abs() < 1e-14);
    assert!((a.theta - 0.8369882).abs() < 1e-7);
    assert!((a.omega_0 - 2.375).abs() < 1e-14 && (a.omega_1 + 1.625).abs() < 1e-14);
    assert_eq!(mixing_angle_for(2.0, 4.0).unwrap(), 0.0);
    let window = lifetime_domains::recording_window(&p, &mode(2.0, 1)).unwrap();
    assert!(matches!(
        mixing_angle(&p, &mode(2.0, 1), window),
        Err(FockError::Lifetime(LifetimeError::ModeDead { .. }))
    ));
    let near = mixing_angle(&p, &mode(2.0, 1), window * (1.0 - 1e-9)).unwrap();
    assert!(near.theta > 8.0);
}

#[test]
fn omega_difference_identity() {
    for &(r, w2) in &[(2.0, 0.75), (0.3, 5.0), (7.0, 1e-3)] {
        let (w0, w1) = mixing_frequencies(r, w2);
        assert!((w0 * w0 - w1 * w1 - 4.0 * w2).abs() < 1e-12 * w0 * w0);
    }
}

#[test]
fn bogoliubov_coefficient_examples() {
    assert_eq!(bogoliubov_theta_coeffs(0.0), (1.0, 0.0));
    let (ch, sh) = bogoliubov_theta_coeffs(2.0);
    assert!((ch - 1.5430806).abs() < 1e-7 && (sh - 1.1752012).abs() < 1e-7);
    assert_eq!(bogoliubov_time_coeffs(0.3, 0.0), (1.0, 0.0));
    let (c3, s3) = bogoliubov_time_coeffs(0.5, 3.0);
    let (c1, s1) = bogoliubov_time_coeffs(0.5, 1.0);
    let (c2, s2) = bogoliubov_time_coeffs(0.5, 2.0);
    assert!((c1 - 0.5f64.cosh()).abs() < 1e-15 && (s1 - 0.5f64.sinh()).abs() < 1e-15);
    assert!((c2 - 1f64.cosh()).abs() < 1e-15 && (s2 - 1f64.sinh()).abs() < 1e-15);
    assert!((c1 * c2 + s1 * s2 - c3).abs() < 1e-12 * c3);
    assert!((s1 * c2 + c1 * s2 - s3).abs() < 1e-12 * s3);
}

#[test]
fn squeezed_vacuum_examples() {
    let v = squeezed_vacuum(0.5, 0.0, 10).unwrap();
    assert_eq!(v.coeffs[0], c(1.0));
    assert!(v.coeffs[1..].iter().all(|x| *x == Complex64::ZERO));
    assert_eq!(expected_pair_number(&v), (0.0, 0.0));

    let cutoff = default_cutoff(1.0);
    assert!(cutoff >= 40);
    let s = squeezed_vacuum(0.5, 2.0, cutoff).unwrap();
    let (na, nt) = expected_pair_number(&s);
    assert!((na - 1f64.sinh().powi(2)).abs() < 1e-10);
    assert_eq!(na - nt, 0.0);
    assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    assert!(matches!(squeezed_vacuum(0.5, 2.0, 40), Err(FockError::CutoffTooSmall { .. })));
    assert!(squeezed_vacuum(f64::NAN, 1.0, 10).is_err());
}

#[test]
fn cutoff_policy() {
    assert_eq!(default_cutoff(0.0), MIN_CUTOFF);
    assert_eq!(default_cutoff(1.0), 51);
    assert!(squeeze_tail(1.0, default_cutoff(1.0)) <= STATE_TAIL_LIMIT);
    assert!(squeeze_tail(1.0, default_cutoff(1.0) - 5) > STATE_TAIL_LIMIT);
    assert_eq!(default_cutoff(10.0), MAX_CUTOFF);
}

#[test]
fn overlap_examples() {
    assert_eq!(vacuum_overlap(&[0.5, 0.9], 1.3, 1.3).unwrap(), 1.0);
    let one = vacuum_overlap(&[0.5], 2.0, 0.0).unwrap();
    assert!((one - 0.6480543).abs() < 1e-7);
    let hundred = vacuum_overlap(&[0.5; 100], 2.0, 0.0).unwrap();
    assert!((hundred / one.powi(100) - 1.0).abs() < 1e-12);
    assert!(hundred > 1e-19 && hundred < 2e-19);
    let a = squeezed_vacuum(0.5, 2.0, 60).unwrap();
    let b = squeezed_vacuum(0.5, 0.0, 60).unwrap();
    assert!((b.inner(&a).re - one).abs() < 1e-10);
}

#[test]
fn decay_rate_approaches_gamma() {
    let g = 0.5;
    let rate = vacuum_decay_rate(g, 10.0).unwrap();
    assert!((rate / g - 1.0).abs() < 0.02);
    let literal = -log_vacuum_overlap(&[g], 10.0, 0.0).unwrap() / 10.0;
    assert!((literal / g - 1.0).abs() > 0.1);
}

#[test]
fn hamiltonians_are_self_adjoint_and_commute() {
    let p = unit();
    let h = build_hamiltonians(&p, &mode(2.0, 1), 1.0, 12).unwrap();
    for op in [&h.h0, &h.hi1, &h.hi2, &h.h0_prime] {
        assert!(op.hermiticity_defect() < 1e-14);
    }
    assert!(h.h0.is_real() && h.hi1.is_real() && !h.hi2.is_real());
    let interior = 10;
    let scale = h.h0_prime.max_abs() * h.hi2.max_abs();
    assert!(h.h0_prime.commutator(&h.hi2).max_abs_within(interior) <= 1e-10 * scale);
    assert!(h.h0.commutator(&h.hi2).max_abs_within(interior) <= 1e-10 * scale);
    assert!(h.hi1.commutator(&h.hi2).max_abs_within(interior) <= 1e-10 * h.hi1.max_abs() * h.hi2.max_abs());
    assert!(h.h0.commutator(&h.hi1).max_abs_within(interior) > 0.1);
    assert!(build_hamiltonians(&p, &mode(2.0, 1), 1.0, 3).is_err());
    assert!(build_hamiltonians(&p, &mode(2.0, 1), 10.0, 12).is_err());
}

#[test]
fn rotated_vacuum_is_annihilated_by_h0_plus_hi1() {
    let p = unit();
    let cutoff = 40;
    let h = build_hamiltonians(&p, &mode(2.0, 1), 0.0, cutoff).unwrap();
    let psi = rotated_vacuum(h.angle.theta, cutoff).unwrap();
    let sum = h.h0.add_scaled(&h.hi1, Complex64::ONE);
    let hpsi = sum.apply(&psi);
    let energy: Complex64 = psi.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum();
    assert!(energy.norm() < 1e-8);
    let residual = hpsi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    assert!(residual < 1e-6, "residual {residual}");
}

#[test]
fn k2_generator_structure() {
    let k = k2_generator(8).unwrap();
    assert_eq!(k.label(), OperatorLabel::K2);
    assert!(k.hermiticity_defect() < 1e-14);
    assert_eq!(k.trace(), Complex64::ZERO);
    assert!(k2_generator(3).is_err());
}

#[test]
fn squeeze_conjugation_reproduces_mixing() {
    for &theta in &[0.0, 1.0, -0.7] {
        let cutoff = 40;
        let f = SqueezeFactor::new(theta, cutoff).unwrap();
        let t = f.conjugated_ladder(cutoff);
        let a = single_ladder(cutoff);
        let (ch, sh) = bogoliubov_theta_coeffs(theta);
        let want = &a * ch + a.transpose() * sh;
        let err = (t - want).view((0, 0), (cutoff - 1, cutoff - 1)).abs().max();
        assert!(err < 1e-8, "theta {theta}: {err}");
    }
}

#[test]
fn squeeze_factor_matches_two_mode_generator() {
    let (theta, cutoff) = (0.6, 6);
    let k = k2_generator(cutoff).unwrap();
    let dense = expm(&(k.to_dense() * Complex64::new(0.0, -theta)));
    let u = single_squeeze_unitary(theta, cutoff);
    let side = cutoff + 1;
    for i in 0..side * side {
        for j in 0..side * side {
            let want = u[(i / side, j / side)] * u[(i % side, j % side)];
            assert!((dense[(i, j)] - want).norm() < 1e-12);
        }
    }
}

#[test]
fn brute_force_matches_closed_form() {
    let g = 0.5;
    let cutoff = 48;
    let hi2 = pair_hamiltonian(g, cutoff);
    let vac = TwoModeState::vacuum(cutoff);
    assert_eq!(brute_force_evolve(&hi2, 0.0, &vac).unwrap(), vac);
    for &t in &[0.5, 1.0] {
        let evolved = brute_force_evolve(&hi2, t, &vac).unwrap();
        let closed = squeezed_vacuum(g, t, cutoff).unwrap();
        let err = evolved.coeffs.iter().zip(&closed.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "t = {t}: {err}");
        assert!((evolved.norm_sqr() - 1.0).abs() < 1e-10);
        assert!((evolved.gamma_t - g * t).abs() < 1e-15);
    }
    assert!(matches!(brute_force_evolve(&hi2, 3.0, &vac), Err(FockError::CutoffTooSmall { .. })));
}

#[test]
fn non_pairing_generator_is_reported() {
    let cutoff = 16;
    let k = k2_generator(cutoff).unwrap();
    let vac = TwoModeState::vacuum(cutoff);
    let got = brute_force_evolve(&k, 0.3, &vac);
    assert!(matches!(got, Err(FockError::PairingBroken(_))), "{got:?}");
}

#[test]
fn hi2_expectation_is_constant() {
    let g = 0.5;
    let cutoff = 80;
    let hi2 = pair_hamiltonian(g, cutoff);
    let values: Vec<f64> = [0.0, 0.5, 1.0, 2.0]
        .iter()
        .map(|&t| {
            let psi = squeezed_vacuum(g, t, cutoff).unwrap().to_full();
            let hpsi = hi2.apply(&psi);
            psi.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
        })
        .collect();
    let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-9);
}
