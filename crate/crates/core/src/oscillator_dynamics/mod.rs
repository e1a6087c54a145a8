//! The classical layer: the damped/amplified oscillator pair
//!
//! ```text
//! ü + L u̇ + ω_n²(t) u = 0,    v̈ − L v̇ + ω_n²(t) v = 0,    ω_n(t) = ω₀ e^{−Lt/(2n+1)}
//! ```
//!
//! solved in closed form through the spherical Bessel equation of order `n`
//! with `x = e^{−t/α_n}`, `z = ε_n x`, `α_n = (2n+1)/L`, `ε_n = ω₀ α_n`:
//! `u = M_n(z) x^{n+1}` and `v = M_n(z) x^{−n}` with `M_n = a j_n + b y_n`.
//! Both reduce to the single parametric oscillator `r̈ + Ω_n²(t) r = 0` with
//! `u = r e^{−Lt/2}/√2`, `v = r e^{Lt/2}/√2`.

pub mod integrator;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{ModeIndex, SystemParams};
use crate::special_fns::{self, BesselError, BesselKind};
use integrator::{IntegratorError, Settings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("common frequency is imaginary at t = {t} (Ω² = {omega_sq}): over-damped regime")]
    RealityViolation { t: f64, omega_sq: f64 },
    #[error("Bessel mixing coefficients (a, b) must not both vanish")]
    ZeroCoefficients,
    #[error("the n → −(n+1) branch has growing frequencies and is not supported")]
    UnsupportedBranch,
    #[error("trajectory needs at least 5 samples, got {0}")]
    TooFewPoints(usize),
    #[error("grid spacing {spacing} exceeds the stencil limit {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("finite-difference residuals need a uniform time grid")]
    NonUniformGrid,
}

/// Which root of `l(l+1) = n(n+1)` labels the solution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `l ∈ {n, −(n+1)}` with decaying frequency `ω₀ e^{−Lt/(2n+1)}`.
    Decaying,
    /// `n → −(n+1)`: exponentially growing frequency.
    Growing,
}

/// The change of variables taking the Bessel equation of order `n` into
/// the oscillator pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstitutionParams {
    pub n: u32,
    /// `α_n = (2n+1)/L`.
    pub alpha: f64,
    /// `ε_n = ω₀ α_n`.
    pub epsilon: f64,
}

impl SubstitutionParams {
    pub fn new(params: &SystemParams, mode: &ModeIndex) -> Self {
        let alpha = mode.grade() / params.damping();
        Self { n: mode.n, alpha, epsilon: params.omega0(mode.k) * alpha }
    }

    pub fn for_branch(params: &SystemParams, mode: &ModeIndex, branch: Branch) -> Result<Self, DynamicsError> {
        match branch {
            Branch::Decaying => Ok(Self::new(params, mode)),
            Branch::Growing => Err(DynamicsError::UnsupportedBranch),
        }
    }

    /// `x(t) = e^{−t/α}`.
    pub fn x(&self, t: f64) -> f64 {
        (-t / self.alpha).exp()
    }

    /// Bessel argument `z(t) = ε x(t)`.
    pub fn z(&self, t: f64) -> f64 {
        self.epsilon * self.x(t)
    }

    /// `(2n+1)/α_n`; equals `L` independently of `n`.
    pub fn damping(&self) -> f64 {
        f64::from(2 * self.n + 1) / self.alpha
    }

    /// `ε_n/α_n`; equals `ω₀` independently of `n`.
    pub fn omega0(&self) -> f64 {
        self.epsilon / self.alpha
    }
}

/// Coefficients of `M_n = a j_n + b y_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselMix {
    pub a: f64,
    pub b: f64,
}

impl Default for BesselMix {
    /// First kind only: bounded as `z → 0`, i.e. at late times.
    fn default() -> Self {
        Self { a: 1.0, b: 0.0 }
    }
}

impl BesselMix {
    pub fn new(a: f64, b: f64) -> Result<Self, DynamicsError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(DynamicsError::NonFinite("mixing coefficients"));
        }
        if a == 0.0 && b == 0.0 {
            return Err(DynamicsError::ZeroCoefficients);
        }
        Ok(Self { a, b })
    }

    /// `(M, M', M'')` at `z`.
    pub fn jet(&self, n: u32, z: f64) -> Result<(f64, f64, f64), BesselError> {
        let mut acc = (0.0, 0.0, 0.0);
        for (c, kind) in [(self.a, BesselKind::FirstKind), (self.b, BesselKind::SecondKind)] {
            if c != 0.0 {
                let (f, d1, d2) = special_fns::sph_jet(kind, n, z)?;
                acc.0 += c * f;
                acc.1 += c * d1;
                acc.2 += c * d2;
            }
        }
        Ok(acc)
    }
}

fn check_time(t: f64) -> Result<(), DynamicsError> {
    if !t.is_finite() {
        return Err(DynamicsError::NonFinite("time"));
    }
    if t < 0.0 {
        return Err(DynamicsError::NegativeTime(t));
    }
    Ok(())
}

/// `ω_n(t) = ω₀,k e^{−Lt/(2n+1)}`.
pub fn omega_mode(params: &SystemParams, mode: &ModeIndex, t: f64) -> Result<f64, DynamicsError> {
    check_time(t)?;
    Ok(params.omega0(mode.k) * (-params.damping() * t / mode.grade()).exp())
}

/// `Ω_n²(t) = ω_n²(t) − L²/4`, negative outside the reality window.
pub fn common_frequency_sq(params: &SystemParams, mode: &ModeIndex, t: f64) -> Result<f64, DynamicsError> {
    let w = omega_mode(params, mode, t)?;
    let l = params.damping();
    Ok(w * w - l * l / 4.0)
}

/// `Ω_n(t) = √(ω_n²(t) − L²/4)`.
pub fn common_frequency(params: &SystemParams, mode: &ModeIndex, t: f64) -> Result<f64, DynamicsError> {
    let omega_sq = common_frequency_sq(params, mode, t)?;
    if omega_sq < 0.0 {
        return Err(DynamicsError::RealityViolation { t, omega_sq });
    }
    Ok(omega_sq.sqrt())
}

/// Values and time derivatives of both branches at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairJet {
    pub u: [f64; 3],
    pub v: [f64; 3],
}

/// `u`, `v` and their first two time derivatives from the closed form.
///
/// With `w = M(z) x^p`: `ẇ = −(z M' + p M) x^p / α` and
/// `ẅ = (z² M'' + (2p+1) z M' + p² M) x^p / α²`.
pub fn closed_form_jet(
    params: &SystemParams,
    mode: &ModeIndex,
    coeffs: &BesselMix,
    t: f64,
) -> Result<PairJet, DynamicsError> {
    check_time(t)?;
    let sub = SubstitutionParams::new(params, mode);
    let z = sub.z(t);
    let (m, dm, ddm) = coeffs.jet(mode.n, z)?;
    let branch = |p: f64| {
        let xp = (-p * t / sub.alpha).exp();
        let a = sub.alpha;
        [m * xp, -(z * dm + p * m) * xp / a, (z * z * ddm + (2.0 * p + 1.0) * z * dm + p * p * m) * xp / (a * a)]
    };
    let n = f64::from(mode.n);
    Ok(PairJet { u: branch(n + 1.0), v: branch(-n) })
}

/// `(u(t), v(t))` for `M_n = a j_n + b y_n`.
pub fn closed_form_pair(
    params: &SystemParams,
    mode: &ModeIndex,
    coeffs: &BesselMix,
    t: f64,
) -> Result<(f64, f64), DynamicsError> {
    check_time(t)?;
    let sub = SubstitutionParams::new(params, mode);
    let z = sub.z(t);
    let m = coeffs.a * if coeffs.a != 0.0 { special_fns::sph_j(mode.n, z)? } else { 0.0 }
        + coeffs.b * if coeffs.b != 0.0 { special_fns::sph_y(mode.n, z)? } else { 0.0 };
    let n = f64::from(mode.n);
    let u = m * (-(n + 1.0) * t / sub.alpha).exp();
    let v = m * (n * t / sub.alpha).exp();
    Ok((u, v))
}

/// `r_n(t) = √2 u(t) e^{Lt/2}`.
pub fn parametric_radius(
    params: &SystemParams,
    mode: &ModeIndex,
    coeffs: &BesselMix,
    t: f64,
) -> Result<f64, DynamicsError> {
    let (u, _) = closed_form_pair(params, mode, coeffs, t)?;
    Ok(std::f64::consts::SQRT_2 * u * (params.damping() * t / 2.0).exp())
}

/// `r_n(t) = √2 v(t) e^{−Lt/2}`; agrees with [`parametric_radius`].
pub fn parametric_radius_from_v(
    params: &SystemParams,
    mode: &ModeIndex,
    coeffs: &BesselMix,
    t: f64,
) -> Result<f64, DynamicsError> {
    let (_, v) = closed_form_pair(params, mode, coeffs, t)?;
    Ok(std::f64::consts::SQRT_2 * v * (-params.damping() * t / 2.0).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    Integrated,
}

/// Time-sampled oscillator values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub r: Vec<f64>,
    pub mode: ModeIndex,
    pub method: Method,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn radius_from_u(params: &SystemParams, t: f64, u: f64) -> f64 {
    std::f64::consts::SQRT_2 * u * (params.damping() * t / 2.0).exp()
}

/// Samples the closed form on `times`.
pub fn closed_form_trajectory(
    params: &SystemParams,
    mode: &ModeIndex,
    coeffs: &BesselMix,
    times: &[f64],
) -> Result<Trajectory, DynamicsError> {
    let mut u = Vec::with_capacity(times.len());
    let mut v = Vec::with_capacity(times.len());
    for &t in times {
        let (ut, vt) = closed_form_pair(params, mode, coeffs, t)?;
        u.push(ut);
        v.push(vt);
    }
    let r = times.iter().zip(&u).map(|(&t, &ut)| radius_from_u(params, t, ut)).collect();
    Ok(Trajectory { times: times.to_vec(), u, v, r, mode: *mode, method: Method::ClosedForm })
}

/// Initial data `(u₀, u̇₀, v₀, v̇₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub u: f64,
    pub du: f64,
    pub v: f64,
    pub dv: f64,
}

impl PairState {
    /// Initial data reproducing the closed form at `t`.
    pub fn matching_closed_form(
        params: &SystemParams,
        mode: &ModeIndex,
        coeffs: &BesselMix,
        t: f64,
    ) -> Result<Self, DynamicsError> {
        let jet = closed_form_jet(params, mode, coeffs, t)?;
        Ok(Self { u: jet.u[0], du: jet.u[1], v: jet.v[0], dv: jet.v[1] })
    }
}

/// Solves `ÿ + damping·ẏ + ω²(t) y = 0` on `grid` (forwards or backwards)
/// from `(y, ẏ)` at `grid[0]`.
pub fn integrate_oscillator<W>(
    damping: f64,
    omega_sq: W,
    y0: f64,
    dy0: f64,
    grid: &[f64],
    rel_tol: f64,
) -> Result<Vec<(f64, f64)>, DynamicsError>
where
    W: Fn(f64) -> f64,
{
    let settings = Settings::new(rel_tol)?;
    let states = integrator::integrate(
        |t, y: &[f64; 2]| [y[1], -damping * y[1] - omega_sq(t) * y[0]],
        [y0, dy0],
        grid,
        &settings,
    )?;
    Ok(states.into_iter().map(|s| (s[0], s[1])).collect())
}

/// Integrates both lines of the pair directly with adaptive step control.
pub fn integrate_pair(
    params: &SystemParams,
    mode: &ModeIndex,
    init: &PairState,
    t_grid: &[f64],
    rel_tol: f64,
) -> Result<Trajectory, DynamicsError> {
    if let Some(&t0) = t_grid.first() {
        check_time(t0)?;
    }
    let l = params.damping();
    let w0 = params.omega0(mode.k);
    let rate = 2.0 * l / mode.grade();
    let omega_sq = |t: f64| w0 * w0 * (-rate * t).exp();
    let u = integrate_oscillator(l, omega_sq, init.u, init.du, t_grid, rel_tol)?;
    let v = integrate_oscillator(-l, omega_sq, init.v, init.dv, t_grid, rel_tol)?;
    let u: Vec<f64> = u.into_iter().map(|s| s.0).collect();
    let v: Vec<f64> = v.into_iter().map(|s| s.0).collect();
    let r = t_grid.iter().zip(&u).map(|(&t, &ut)| radius_from_u(params, t, ut)).collect();
    Ok(Trajectory { times: t_grid.to_vec(), u, v, r, mode: *mode, method: Method::Integrated })
}

/// Pointwise residuals of both equations at interior samples, from
/// 4th-order central differences. Entries are `(t, res_u, res_v)`.
pub fn residual_profile(
    params: &SystemParams,
    mode: &ModeIndex,
    trajectory: &Trajectory,
) -> Result<Vec<(f64, f64, f64)>, DynamicsError> {
    let times = &trajectory.times;
    let len = times.len();
    if len < 5 {
        return Err(DynamicsError::TooFewPoints(len));
    }
    let h = (times[len - 1] - times[0]) / (len - 1) as f64;
    let uniform = times.iter().enumerate().all(|(i, &t)| (t - (times[0] + i as f64 * h)).abs() <= 1e-6 * h.abs());
    if !uniform || h <= 0.0 {
        return Err(DynamicsError::NonUniformGrid);
    }
    let limit = 1e-2 * SubstitutionParams::new(params, mode).alpha;
    if h > limit {
        return Err(DynamicsError::GridTooCoarse { spacing: h, limit });
    }

    let l = params.damping();
    let d1 = |f: &[f64], i: usize| (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    let d2 =
        |f: &[f64], i: usize| (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) / (12.0 * h * h);
    (2..len - 2)
        .map(|i| {
            let t = times[i];
            let w = omega_mode(params, mode, t)?;
            let (u, v) = (&trajectory.u, &trajectory.v);
            let ru = d2(u, i) + l * d1(u, i) + w * w * u[i];
            let rv = d2(v, i) - l * d1(v, i) + w * w * v[i];
            Ok((t, ru, rv))
        })
        .collect()
}

/// Maximum absolute residual of the `u` and `v` equations.
pub fn residual(params: &SystemParams, mode: &ModeIndex, trajectory: &Trajectory) -> Result<(f64, f64), DynamicsError> {
    let profile = residual_profile(params, mode, trajectory)?;
    Ok(profile.iter().fold((0.0_f64, 0.0_f64), |(mu, mv), &(_, ru, rv)| (mu.max(ru.abs()), mv.max(rv.abs()))))
}

/// `n + 1` uniformly spaced samples on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals).map(|i| t_max * i as f64 / intervals as f64).collect()
}

#[cfg(test)]
mod tests;
