use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{LN_2, SQRT_2};

fn setup(omega0: f64, n: u32) -> (SystemParams, ModeIndex) {
    let p = SystemParams::new(1.0, 1.0).unwrap();
    (p, ModeIndex::new(p.momentum_for(omega0), n).unwrap())
}

fn window(p: &SystemParams, m: &ModeIndex) -> f64 {
    m.grade() / p.damping() * (2.0 * p.omega0(m.k) / p.damping()).ln()
}

#[test]
fn omega_mode_examples() {
    let (p, m) = setup(2.0, 1);
    assert_eq!(omega_mode(&p, &m, 0.0).unwrap(), 2.0);
    assert!((omega_mode(&p, &m, 3.0 * LN_2).unwrap() - 1.0).abs() < 1e-15);
    let big = ModeIndex::new(2.0, 1_000_000).unwrap();
    assert!((omega_mode(&p, &big, 5.0).unwrap() - 2.0).abs() / 2.0 < 1e-5);
    assert!(omega_mode(&p, &m, -1.0).is_err());
    assert!(omega_mode(&p, &m, f64::NAN).is_err());
}

#[test]
fn common_frequency_examples() {
    let (p, m) = setup(2.0, 1);
    assert!((common_frequency(&p, &m, 0.0).unwrap() - 3.75f64.sqrt()).abs() < 1e-15);
    assert!(common_frequency(&p, &m, 3.0 * 4f64.ln()).unwrap() < 1e-7);
    assert!((common_frequency(&p, &m, 3.0 * LN_2).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
    assert!(matches!(common_frequency(&p, &m, 5.0), Err(DynamicsError::RealityViolation { .. })));
}

#[test]
fn closed_form_at_origin_is_bessel_at_epsilon() {
    let (p, m) = setup(2.0, 3);
    let sub = SubstitutionParams::new(&p, &m);
    let (u, v) = closed_form_pair(&p, &m, &BesselMix::default(), 0.0).unwrap();
    let j = special_fns::sph_j(3, sub.epsilon).unwrap();
    assert_eq!(u, j);
    assert_eq!(v, j);
}

#[test]
fn closed_form_n0_matches_sinc_and_integrator() {
    let (p, m) = setup(2.0, 0);
    let coeffs = BesselMix::default();
    let grid = uniform_grid(3.0, 300);
    let init = PairState::matching_closed_form(&p, &m, &coeffs, 0.0).unwrap();
    let ode = integrate_pair(&p, &m, &init, &grid, 1e-10).unwrap();
    for (i, &t) in grid.iter().enumerate() {
        let (u, _) = closed_form_pair(&p, &m, &coeffs, t).unwrap();
        let z = 2.0 * (-t).exp();
        let sinc = z.sin() / z * (-t).exp();
        assert!((u - sinc).abs() < 1e-14, "t={t}");
        assert!((u - ode.u[i]).abs() < 1e-6, "t={t}");
    }
}

#[test]
fn linear_in_coefficients() {
    let (p, m) = setup(2.0, 2);
    let one = BesselMix::new(0.7, -0.3).unwrap();
    let two = BesselMix::new(1.4, -0.6).unwrap();
    for &t in &[0.0, 0.5, 2.0] {
        let (u1, v1) = closed_form_pair(&p, &m, &one, t).unwrap();
        let (u2, v2) = closed_form_pair(&p, &m, &two, t).unwrap();
        assert_eq!(u2, 2.0 * u1);
        assert_eq!(v2, 2.0 * v1);
    }
    assert_eq!(BesselMix::new(0.0, 0.0), Err(DynamicsError::ZeroCoefficients));
}

#[test]
fn radius_examples() {
    let (p, m) = setup(2.0, 1);
    let c = BesselMix::default();
    let sub = SubstitutionParams::new(&p, &m);
    let r0 = parametric_radius(&p, &m, &c, 0.0).unwrap();
    assert_eq!(r0, SQRT_2 * special_fns::sph_j(1, sub.epsilon).unwrap());
    let a = parametric_radius(&p, &m, &c, 2.0).unwrap();
    let b = parametric_radius_from_v(&p, &m, &c, 2.0).unwrap();
    assert!((a - b).abs() <= 1e-10 * a.abs());
}

#[test]
fn radius_solves_parametric_oscillator() {
    let (p, m) = setup(2.0, 1);
    let c = BesselMix::new(1.0, 0.4).unwrap();
    let t_end = window(&p, &m);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-3;
    let r = |t: f64| parametric_radius(&p, &m, &c, t).unwrap();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let t = rng.gen_range(2.0 * h..t_end - 2.0 * h);
        let d2 = (-r(t + 2.0 * h) + 16.0 * r(t + h) - 30.0 * r(t) + 16.0 * r(t - h) - r(t - 2.0 * h)) / (12.0 * h * h);
        let omega_sq = common_frequency_sq(&p, &m, t).unwrap();
        worst = worst.max((d2 + omega_sq * r(t)).abs());
    }
    assert!(worst <= 1e-8, "worst residual {worst}");
}

#[test]
fn zero_data_stays_zero() {
    let (p, m) = setup(2.0, 1);
    let zero = PairState { u: 0.0, du: 0.0, v: 0.0, dv: 0.0 };
    let traj = integrate_pair(&p, &m, &zero, &uniform_grid(4.0, 40), 1e-9).unwrap();
    assert!(traj.u.iter().chain(&traj.v).all(|&x| x == 0.0));
    assert_eq!(residual(&p, &m, &closed_like_zero(&traj)).unwrap(), (0.0, 0.0));
}

fn closed_like_zero(t: &Trajectory) -> Trajectory {
    let times = uniform_grid(1.0, 200);
    Trajectory { u: vec![0.0; times.len()], v: vec![0.0; times.len()], r: vec![0.0; times.len()], times, ..t.clone() }
}

#[test]
fn time_reversal_maps_v_equation_onto_u_equation() {
    let (p, m) = setup(2.0, 1);
    let c = BesselMix::default();
    let l = p.damping();
    let t_end = window(&p, &m);
    let forward = uniform_grid(t_end, 100);
    let backward: Vec<f64> = forward.iter().map(|t| -t).collect();
    let init = PairState::matching_closed_form(&p, &m, &c, 0.0).unwrap();
    let rate = 2.0 * l / m.grade();
    let w_sq = |t: f64| 4.0 * (-rate * t).exp();
    let v = integrate_oscillator(-l, w_sq, init.v, init.dv, &forward, 1e-10).unwrap();
    // ũ(τ) = v(−τ) obeys the damped equation with frequency ω(−τ).
    let u_rev = integrate_oscillator(l, |tau| w_sq(-tau), init.v, -init.dv, &backward, 1e-10).unwrap();
    for (a, b) in v.iter().zip(&u_rev) {
        assert!((a.0 - b.0).abs() <= 1e-6);
    }
}

#[test]
fn closed_form_residual_on_fine_grid() {
    let (p, m) = setup(2.0, 0);
    let traj = closed_form_trajectory(&p, &m, &BesselMix::default(), &uniform_grid(3.0, 2000)).unwrap();
    let (ru, rv) = residual(&p, &m, &traj).unwrap();
    assert!(ru <= 1e-8 && rv <= 1e-8, "{ru} {rv}");
}

#[test]
fn corrupted_sample_is_localised() {
    let (p, m) = setup(2.0, 0);
    let mut traj = closed_form_trajectory(&p, &m, &BesselMix::default(), &uniform_grid(3.0, 2000)).unwrap();
    traj.u[1000] += 1e-3;
    let profile = residual_profile(&p, &m, &traj).unwrap();
    let (worst_t, worst) =
        profile.iter().fold((0.0, 0.0_f64), |acc, &(t, ru, _)| if ru.abs() > acc.1 { (t, ru.abs()) } else { acc });
    assert!(worst > 1e-3);
    assert!((worst_t - traj.times[1000]).abs() <= 2.0 * 1.5e-3 + 1e-12);
    for &(t, ru, _) in &profile {
        if (t - traj.times[1000]).abs() > 3.0 * 1.5e-3 {
            assert!(ru.abs() < 1e-8);
        }
    }
}

#[test]
fn residual_rejects_bad_grids() {
    let (p, m) = setup(2.0, 0);
    let c = BesselMix::default();
    let short = closed_form_trajectory(&p, &m, &c, &uniform_grid(1.0, 3)).unwrap();
    assert_eq!(residual(&p, &m, &short), Err(DynamicsError::TooFewPoints(4)));
    let coarse = closed_form_trajectory(&p, &m, &c, &uniform_grid(3.0, 100)).unwrap();
    assert!(matches!(residual(&p, &m, &coarse), Err(DynamicsError::GridTooCoarse { .. })));
    let mut ragged = uniform_grid(0.1, 100);
    ragged[50] += 1e-4;
    let ragged = closed_form_trajectory(&p, &m, &c, &ragged).unwrap();
    assert_eq!(residual(&p, &m, &ragged), Err(DynamicsError::NonUniformGrid));
}

#[test]
fn substitution_identity_for_low_orders() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 0..=10 {
        let (p, m) = setup(2.0, n);
        let c = BesselMix::new(1.0, 0.25).unwrap();
        let t_end = window(&p, &m);
        for _ in 0..200 {
            let t = rng.gen_range(0.0..t_end);
            let jet = closed_form_jet(&p, &m, &c, t).unwrap();
            let w = omega_mode(&p, &m, t).unwrap();
            let ru = jet.u[2] + p.damping() * jet.u[1] + w * w * jet.u[0];
            let rv = jet.v[2] - p.damping() * jet.v[1] + w * w * jet.v[0];
            assert!(ru.abs() <= 1e-8 * (1.0 + jet.u[0].abs()), "n={n} t={t} ru={ru}");
            assert!(rv.abs() <= 1e-8 * (1.0 + jet.v[0].abs()), "n={n} t={t} rv={rv}");
        }
    }
}

#[test]
fn substitution_recovers_n_independent_constants() {
    // Division round-trips (2n+1)/((2n+1)/L) are exact to within an ulp or two.
    for &(l, w0) in &[(1.0, 2.0), (0.3, 7.1), (2.7, 1.9)] {
        let p = SystemParams::new(l, 1.0).unwrap();
        for n in 0..200 {
            let sub = SubstitutionParams::new(&p, &ModeIndex::new(w0, n).unwrap());
            assert!((sub.damping() - l).abs() <= 2.0 * f64::EPSILON * l);
            assert!((sub.omega0() - w0).abs() <= 2.0 * f64::EPSILON * w0);
        }
    }
}

#[test]
fn frequency_grows_with_openness() {
    let p = SystemParams::new(1.0, 1.0).unwrap();
    for &t in &[0.1, 1.0, 10.0] {
        let ws: Vec<f64> = (0..20).map(|n| omega_mode(&p, &ModeIndex::new(2.0, n).unwrap(), t).unwrap()).collect();
        assert!(ws.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn radius_wronskian_is_constant() {
    let (p, m) = setup(2.0, 2);
    let l = p.damping();
    let radius_jet = |c: &BesselMix, t: f64| {
        let jet = closed_form_jet(&p, &m, c, t).unwrap();
        let e = SQRT_2 * (l * t / 2.0).exp();
        (e * jet.u[0], e * (jet.u[1] + l / 2.0 * jet.u[0]))
    };
    let first = BesselMix::new(1.0, 0.0).unwrap();
    let second = BesselMix::new(0.0, 1.0).unwrap();
    let w = |t: f64| {
        let (r1, d1) = radius_jet(&first, t);
        let (r2, d2) = radius_jet(&second, t);
        r1 * d2 - d1 * r2
    };
    let w0 = w(0.0);
    for i in 1..50 {
        let t = window(&p, &m) * i as f64 / 50.0;
        assert!((w(t) - w0).abs() <= 1e-8 * w0.abs(), "t={t}");
    }
}

#[test]
fn product_of_branches_is_half_radius_squared() {
    let (p, m) = setup(2.0, 1);
    let traj = closed_form_trajectory(&p, &m, &BesselMix::default(), &uniform_grid(4.0, 80)).unwrap();
    for i in 0..traj.len() {
        let lhs = traj.u[i] * traj.v[i];
        let rhs = traj.r[i] * traj.r[i] / 2.0;
        assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1e-300));
    }
}

#[test]
fn growing_branch_is_refused() {
    let (p, m) = setup(2.0, 1);
    assert_eq!(SubstitutionParams::for_branch(&p, &m, Branch::Growing), Err(DynamicsError::UnsupportedBranch));
    assert!(SubstitutionParams::for_branch(&p, &m, Branch::Decaying).is_ok());
}

#[test]
fn integrator_rejects_tolerance_out_of_range() {
    let (p, m) = setup(2.0, 1);
    let zero = PairState { u: 1.0, du: 0.0, v: 1.0, dv: 0.0 };
    let err = integrate_pair(&p, &m, &zero, &uniform_grid(1.0, 4), 1e-14).unwrap_err();
    assert_eq!(err, DynamicsError::Integrator(IntegratorError::InvalidTolerance(1e-14)));
}
