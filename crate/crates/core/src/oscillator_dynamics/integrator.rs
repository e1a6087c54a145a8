//! Embedded Runge–Kutta 5(4) pair (Dormand–Prince) with PI step control.
//!
//! Steps are clipped to land exactly on every requested output time, so no
//! dense output is needed and results are reproducible bit for bit.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegratorError {
    #[error("relative tolerance {0} outside [1e-13, 1e-3]")]
    InvalidTolerance(f64),
    #[error("output grid must be strictly monotone and finite")]
    BadGrid,
    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub safety: f64,
    /// Largest factor a rejected step is allowed to keep.
    pub reject_backoff: f64,
    pub max_steps: usize,
}

impl Settings {
    pub fn new(rel_tol: f64) -> Result<Self, IntegratorError> {
        if !(1e-13..=1e-3).contains(&rel_tol) {
            return Err(IntegratorError::InvalidTolerance(rel_tol));
        }
        Ok(Self { rel_tol, abs_tol: rel_tol, safety: 0.9, reject_backoff: 0.5, max_steps: 5_000_000 })
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrates `y' = f(t, y)` from `(grid[0], y0)` and returns the state at
/// every grid point. The grid may run forwards or backwards in time.
pub fn integrate<const N: usize, F>(
    f: F,
    y0: [f64; N],
    grid: &[f64],
    settings: &Settings,
) -> Result<Vec<[f64; N]>, IntegratorError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(IntegratorError::BadGrid);
    }
    let mut out = Vec::with_capacity(grid.len());
    if grid.is_empty() {
        return Ok(out);
    }
    out.push(y0);
    if grid.len() == 1 {
        return Ok(out);
    }
    let dir = (grid[1] - grid[0]).signum();
    if dir == 0.0 || grid.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
        return Err(IntegratorError::BadGrid);
    }

    const EXPO1: f64 = 0.2 - 0.04 * 0.75;
    const BETA: f64 = 0.04;
    let span = (grid[grid.len() - 1] - grid[0]).abs();
    let mut t = grid[0];
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = dir * (span * 1e-3).min((grid[1] - grid[0]).abs());
    let mut err_old = 1e-4_f64;
    let mut steps = 0usize;

    for &target in &grid[1..] {
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > settings.max_steps {
                return Err(IntegratorError::TooManySteps(settings.max_steps));
            }
            let remaining = target - t;
            let landing = h.abs() >= remaining.abs();
            let step = if landing { remaining } else { h };
            if step.abs() < 16.0 * f64::EPSILON * t.abs().max(1.0) && !landing {
                return Err(IntegratorError::StepSizeUnderflow { t, h: step });
            }

            let k2 = f(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
            let k3 = f(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * step, &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * step, &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(t + step, &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = axpy(&y, step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(t + step, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = settings.abs_tol + settings.rel_tol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();

            if err <= 1.0 {
                let fac = err.max(1e-10).powf(EXPO1) / err_old.powf(BETA);
                let grow = (settings.safety / fac).clamp(0.2, 10.0);
                err_old = err.max(1e-4);
                t = if landing { target } else { t + step };
                y = y_new;
                k1 = k7;
                // A clipped landing step says nothing about the natural step size.
                if !landing {
                    h = step * grow;
                } else {
                    h = h.abs().max(step.abs() * grow) * dir;
                }
            } else {
                let shrink = (settings.safety * err.powf(-0.2)).clamp(0.1, settings.reject_backoff);
                h = step * shrink;
                if h.abs() < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    return Err(IntegratorError::StepSizeUnderflow { t, h });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let s = Settings::new(1e-10).unwrap();
        let ys = integrate(|_, y: &[f64; 1]| [-y[0]], [1.0], &grid, &s).unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_backwards() {
        let grid: Vec<f64> = (0..=20).map(|i| -(i as f64) * 0.3).collect();
        let s = Settings::new(1e-11).unwrap();
        let ys = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], [0.0, 1.0], &grid, &s).unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(Settings::new(1e-2).unwrap_err(), IntegratorError::InvalidTolerance(1e-2));
        let s = Settings::new(1e-8).unwrap();
        let r = integrate(|_, y: &[f64; 1]| [y[0]], [1.0], &[0.0, 1.0, 0.5], &s);
        assert_eq!(r.unwrap_err(), IntegratorError::BadGrid);
    }

    #[test]
    fn blow_up_underflows() {
        // y' = y² reaches infinity at t = 1.
        let s = Settings::new(1e-8).unwrap();
        let r = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], &[0.0, 2.0], &s);
        assert!(matches!(r, Err(IntegratorError::StepSizeUnderflow { .. }) | Err(IntegratorError::TooManySteps(_))));
    }
}
