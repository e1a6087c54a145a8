//! Spherical Bessel functions of the first and second kind.
//!
//! `j_n` is evaluated with Miller's downward recurrence normalised by the
//! sum rule `Σ (2k+1) j_k(z)² = 1`; `y_n` with the (stable) upward
//! recurrence seeded by the closed forms of `y_0` and `y_1`. Derivatives use
//! `f_n' = f_{n-1} - (n+1)/z · f_n`, applied twice for the second derivative.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum BesselError {
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("argument must be non-negative, got {0}")]
    Negative(f64),
    #[error("second-kind functions are singular at z = 0")]
    SingularAtOrigin,
}

/// Which family of solutions of the spherical Bessel equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BesselKind {
    /// `j_n`, regular at the origin.
    FirstKind,
    /// `y_n`, singular at the origin.
    SecondKind,
}

fn check_arg(z: f64) -> Result<(), BesselError> {
    if !z.is_finite() {
        return Err(BesselError::NonFinite(z));
    }
    if z < 0.0 {
        return Err(BesselError::Negative(z));
    }
    Ok(())
}

/// Highest order the downward recurrence starts from.
///
/// At least `n + max(20, ⌈1.5 z⌉)`; the extra `z` keeps the neglected
/// dominant-solution contamination below 1e-15 for mid-range arguments.
fn miller_start(n_max: u32, z: f64) -> usize {
    let zc = z.ceil() as usize;
    n_max as usize + zc + usize::max(20, (z / 2.0).ceil() as usize)
}

const SERIES_BELOW: f64 = 1e-3;

/// Three leading terms of the power series; truncation error is below
/// `z⁶/48` relative for `z ≤ 1e-3`.
fn small_argument_j(n: u32, z: f64) -> f64 {
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= z / f64::from(2 * i + 1);
    }
    let a = f64::from(2 * n + 3);
    let b = f64::from(2 * n + 5);
    let z2 = z * z;
    lead * (1.0 - z2 / (2.0 * a) + z2 * z2 / (8.0 * a * b))
}

/// `j_0, ..., j_{n_max}` at `z`.
pub fn sph_j_orders(n_max: u32, z: f64) -> Result<Vec<f64>, BesselError> {
    check_arg(z)?;
    let len = n_max as usize + 1;
    if z == 0.0 {
        let mut out = vec![0.0; len];
        out[0] = 1.0;
        return Ok(out);
    }
    if z <= SERIES_BELOW {
        return Ok((0..=n_max).map(|n| small_argument_j(n, z)).collect());
    }

    const RESCALE_AT: f64 = 1e100;
    let start = miller_start(n_max, z);
    // Orders 0 and 1 are always kept: they carry the sign reference.
    let mut out = vec![0.0; len.max(2)];
    let mut above = 0.0_f64; // f_{k+1}
    let mut current = 1.0_f64; // f_k
    let mut norm = 0.0_f64;
    for k in (0..=start).rev() {
        if k < out.len() {
            out[k] = current;
        }
        norm += (2 * k + 1) as f64 * current * current;
        if current.abs() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            current *= s;
            above *= s;
            norm *= s * s;
            out.iter_mut().skip(k).for_each(|v| *v *= s);
        }
        if k > 0 {
            let below = (2 * k + 1) as f64 / z * current - above;
            above = current;
            current = below;
        }
    }

    // The sum rule fixes the magnitude; the closed form of j_0 or j_1
    // (whichever is further from a zero) fixes the sign.
    let (sin, cos) = z.sin_cos();
    let j0 = sin / z;
    let j1 = sin / (z * z) - cos / z;
    let (reference, raw) = if j0.abs() >= j1.abs() { (j0, out[0]) } else { (j1, out[1]) };
    let mut scale = 1.0 / norm.sqrt();
    if (raw < 0.0) != (reference < 0.0) {
        scale = -scale;
    }
    out.truncate(len);
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// Spherical Bessel function of the first kind `j_n(z)`.
pub fn sph_j(n: u32, z: f64) -> Result<f64, BesselError> {
    Ok(sph_j_orders(n, z)?[n as usize])
}

/// `y_0, ..., y_{n_max}` at `z > 0`.
pub fn sph_y_orders(n_max: u32, z: f64) -> Result<Vec<f64>, BesselError> {
    check_arg(z)?;
    if z == 0.0 {
        return Err(BesselError::SingularAtOrigin);
    }
    let len = n_max as usize + 1;
    let (sin, cos) = z.sin_cos();
    let mut out = Vec::with_capacity(len);
    out.push(-cos / z);
    if len > 1 {
        out.push(-cos / (z * z) - sin / z);
    }
    for k in 1..len.saturating_sub(1) {
        let next = (2 * k + 1) as f64 / z * out[k] - out[k - 1];
        out.push(next);
    }
    Ok(out)
}

/// Spherical Bessel function of the second kind `y_n(z)`.
pub fn sph_y(n: u32, z: f64) -> Result<f64, BesselError> {
    Ok(sph_y_orders(n, z)?[n as usize])
}

/// `f_0, ..., f_{n_max}` of the selected kind.
pub fn sph_orders(kind: BesselKind, n_max: u32, z: f64) -> Result<Vec<f64>, BesselError> {
    match kind {
        BesselKind::FirstKind => sph_j_orders(n_max, z),
        BesselKind::SecondKind => sph_y_orders(n_max, z),
    }
}

pub fn sph(kind: BesselKind, n: u32, z: f64) -> Result<f64, BesselError> {
    Ok(sph_orders(kind, n, z)?[n as usize])
}

fn deriv_from(f: &[f64], n: usize, z: f64) -> f64 {
    if n == 0 {
        -f[1]
    } else {
        f[n - 1] - (n + 1) as f64 / z * f[n]
    }
}

/// `d/dz` of `j_n` or `y_n`.
pub fn sph_deriv(kind: BesselKind, n: u32, z: f64) -> Result<f64, BesselError> {
    check_arg(z)?;
    if z == 0.0 && kind == BesselKind::FirstKind {
        return Ok(if n == 1 { 1.0 / 3.0 } else { 0.0 });
    }
    let f = sph_orders(kind, n + 1, z)?;
    Ok(deriv_from(&f, n as usize, z))
}

/// `d²/dz²` of `j_n` or `y_n`, from the derivative recurrence applied twice
/// (never from the differential equation itself).
pub fn sph_deriv2(kind: BesselKind, n: u32, z: f64) -> Result<f64, BesselError> {
    Ok(sph_jet(kind, n, z)?.2)
}

/// Value, first and second derivative of `f_n` in one pass.
pub fn sph_jet(kind: BesselKind, n: u32, z: f64) -> Result<(f64, f64, f64), BesselError> {
    check_arg(z)?;
    if z == 0.0 && kind == BesselKind::FirstKind {
        let second = match n {
            0 => -1.0 / 3.0,
            2 => 2.0 / 15.0,
            _ => 0.0,
        };
        return Ok((sph(kind, n, 0.0)?, sph_deriv(kind, n, 0.0)?, second));
    }
    let f = sph_orders(kind, n + 2, z)?;
    let n = n as usize;
    let d_n = deriv_from(&f, n, z);
    let m = (n + 1) as f64;
    let d2 = if n == 0 { -deriv_from(&f, 1, z) } else { deriv_from(&f, n - 1, z) - m / z * d_n + m / (z * z) * f[n] };
    Ok((f[n], d_n, d2))
}
