//! Recording windows, momentum thresholds, infrared cut-offs and mode
//! life-times.
//!
//! A mode `(k, n)` takes part in recording while its common frequency is
//! real, i.e. for `0 ≤ t < T_{k,n} = ((2n+1)/L) ln(2ω₀,k/L)`. Its life-time
//! `Λ_{k,n}(t)` starts at zero and diverges at `T_{k,n}`:
//!
//! ```text
//! e^{−2Λ} = e^{−γt} sinh(γ(T − t)) / sinh(γT),    γ = L/(2n+1)
//! ```
//!
//! and `Ω(t) = Ω(0) e^{−Λ(t)}` holds identically.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

use crate::oscillator_dynamics::{self, DynamicsError};
use crate::params::{ModeIndex, SystemParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LifetimeError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("mode k = {k}, n = {n} is never recordable: 2ω₀,k = {two_omega0} < L = {damping}")]
    NeverRecordable { k: f64, n: u32, two_omega0: f64, damping: f64 },
    #[error("mode k = {k}, n = {n} is dead at t = {t} (window closes at {window})")]
    ModeDead { k: f64, n: u32, t: f64, window: f64 },
    #[error("time must be finite and non-negative, got {0}")]
    BadTime(f64),
    #[error("invalid figure spec: {0}")]
    InvalidSpec(String),
}

fn check_time(t: f64) -> Result<(), LifetimeError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(LifetimeError::BadTime(t))
    }
}

/// `γ = L/(2n+1)`, the grading rate of mode order `n`.
fn grading_rate(params: &SystemParams, n: u32) -> f64 {
    params.damping() / f64::from(2 * n + 1)
}

/// `ln sinh x` for `x > 0` without overflow or cancellation.
fn ln_sinh(x: f64) -> f64 {
    x - LN_2 + (-(-2.0 * x).exp_m1()).ln()
}

/// Upper bound `T_{k,n}` of the recording window.
///
/// Zero when `2ω₀,k = L`; an error when the mode is below threshold from
/// the start.
pub fn recording_window(params: &SystemParams, mode: &ModeIndex) -> Result<f64, LifetimeError> {
    let two_omega0 = 2.0 * params.omega0(mode.k);
    if two_omega0 < params.damping() {
        return Err(LifetimeError::NeverRecordable { k: mode.k, n: mode.n, two_omega0, damping: params.damping() });
    }
    Ok((two_omega0 / params.damping()).ln() / grading_rate(params, mode.n))
}

/// `k̃(n, t) = k₀ e^{Lt/(2n+1)}`: the smallest momentum still recordable at `t`.
pub fn momentum_threshold(params: &SystemParams, n: u32, t: f64) -> Result<f64, LifetimeError> {
    check_time(t)?;
    Ok(params.k0() * (grading_rate(params, n) * t).exp())
}

/// Infrared cut-off `λ̃ = 2π / k̃(n, t)`, the largest coherent domain size.
pub fn domain_size(params: &SystemParams, n: u32, t: f64) -> Result<f64, LifetimeError> {
    Ok(2.0 * PI / momentum_threshold(params, n, t)?)
}

/// True while `t < T_{k,n}`.
pub fn mode_alive(params: &SystemParams, mode: &ModeIndex, t: f64) -> bool {
    match recording_window(params, mode) {
        Ok(window) => t >= 0.0 && t < window,
        Err(_) => false,
    }
}

fn live_window(params: &SystemParams, mode: &ModeIndex, t: f64) -> Result<f64, LifetimeError> {
    check_time(t)?;
    let window = recording_window(params, mode)?;
    if t >= window {
        return Err(LifetimeError::ModeDead { k: mode.k, n: mode.n, t, window });
    }
    Ok(window)
}

/// Life-time `Λ_{k,n}(t)` for `0 ≤ t < T_{k,n}`.
pub fn lambda_lifetime(params: &SystemParams, mode: &ModeIndex, t: f64) -> Result<f64, LifetimeError> {
    let window = live_window(params, mode, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let g = grading_rate(params, mode.n);
    let log_ratio = -g * t + ln_sinh(g * (window - t)) - ln_sinh(g * window);
    Ok((-0.5 * log_ratio).max(0.0))
}

/// Inverse of [`lambda_lifetime`]: the time at which `Λ` reaches `lambda`.
pub fn time_at_lambda(params: &SystemParams, mode: &ModeIndex, lambda: f64) -> Result<f64, LifetimeError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(LifetimeError::InvalidSpec(format!("life-time level must be finite and ≥ 0, got {lambda}")));
    }
    let window = recording_window(params, mode)?;
    let g = grading_rate(params, mode.n);
    let gt = g * window;
    // e^{−2γt} = e^{−2γT} (1 + 2 sinh(γT) e^{γT} e^{−2Λ}) rearranged in logs.
    let log_y = -2.0 * gt + (2.0 * ((ln_sinh(gt) + gt - 2.0 * lambda).exp())).ln_1p();
    Ok((-log_y / (2.0 * g)).clamp(0.0, window))
}

/// `Ω(0) e^{−Λ(t)}`; identical to the common frequency inside the window.
pub fn frequency_from_lambda(params: &SystemParams, mode: &ModeIndex, t: f64) -> Result<f64, LifetimeError> {
    let lambda = lambda_lifetime(params, mode, t)?;
    let omega_at_start = oscillator_dynamics::common_frequency(params, mode, 0.0)?;
    Ok(omega_at_start * (-lambda).exp())
}

/// Samples of `Λ` for one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeProfile {
    pub mode: ModeIndex,
    pub window: f64,
    pub samples: Vec<(f64, f64)>,
}

/// `Λ` on `points` uniform samples from 0 up to the time it reaches `ceiling`.
pub fn lifetime_profile(
    params: &SystemParams,
    mode: &ModeIndex,
    ceiling: f64,
    points: usize,
) -> Result<LifetimeProfile, LifetimeError> {
    if points < 2 {
        return Err(LifetimeError::InvalidSpec(format!("need at least 2 points per curve, got {points}")));
    }
    if !(ceiling.is_finite() && ceiling > 0.0) {
        return Err(LifetimeError::InvalidSpec(format!("ceiling must be finite and > 0, got {ceiling}")));
    }
    let window = recording_window(params, mode)?;
    if window <= 0.0 {
        return Err(LifetimeError::NeverRecordable {
            k: mode.k,
            n: mode.n,
            two_omega0: 2.0 * params.omega0(mode.k),
            damping: params.damping(),
        });
    }
    let t_end = time_at_lambda(params, mode, ceiling)?;
    let samples = (0..points)
        .map(|i| {
            let t = if i + 1 == points { t_end } else { t_end * i as f64 / (points - 1) as f64 };
            lambda_lifetime(params, mode, t).map(|l| (t, l))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LifetimeProfile { mode: *mode, window, samples })
}

/// Which modes survive at `(n, t)` and how large their domains may be.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSnapshot {
    pub n: u32,
    pub t: f64,
    pub k_threshold: f64,
    pub lambda_cutoff: f64,
    pub alive_modes: Vec<f64>,
}

pub fn domain_snapshot(params: &SystemParams, n: u32, t: f64, query: &[f64]) -> Result<DomainSnapshot, LifetimeError> {
    let k_threshold = momentum_threshold(params, n, t)?;
    let alive_modes = query
        .iter()
        .copied()
        .filter(|&k| k > 0.0 && k >= k_threshold && ModeIndex::new(k, n).is_ok_and(|m| mode_alive(params, &m, t)))
        .collect();
    Ok(DomainSnapshot { n, t, k_threshold, lambda_cutoff: 2.0 * PI / k_threshold, alive_modes })
}

/// The four life-time figures, plus user-defined mode sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Fixed `n = 1`, growing `k` with `k₁ = k₃/10`, `k₂ = k₄/10`.
    Fig1,
    /// Fixed `k`, `n = 1..5`.
    Fig2,
    /// Small `k` (near `k₀`), growing `n`.
    Fig3,
    /// Large `k`, growing `n`.
    Fig4,
    Custom,
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = LifetimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "custom" => Ok(Figure::Custom),
            other => Err(LifetimeError::InvalidSpec(format!("unknown figure {other:?} (expected fig1..fig4)"))),
        }
    }
}

pub const DEFAULT_CEILING: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 2000;

/// Everything needed to regenerate one figure's table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub figure: Figure,
    /// `(k, n)` pairs, one curve each.
    pub modes: Vec<(f64, u32)>,
    pub ceiling: f64,
    pub points: usize,
}

impl FigureSpec {
    /// Default mode sets, tuned for `L = 1`, `c = 1` (`k₀ = 0.5`).
    pub fn default_for(figure: Figure) -> Self {
        let growing_n = [1, 3, 5, 7, 9];
        let modes = match figure {
            Figure::Fig1 => vec![(0.6, 1), (0.8, 1), (6.0, 1), (8.0, 1)],
            Figure::Fig2 => (1..=5).map(|n| (2.0, n)).collect(),
            Figure::Fig3 => growing_n.iter().map(|&n| (0.55, n)).collect(),
            Figure::Fig4 => growing_n.iter().map(|&n| (55.0, n)).collect(),
            Figure::Custom => Vec::new(),
        };
        Self { figure, modes, ceiling: DEFAULT_CEILING, points: DEFAULT_POINTS }
    }
}

/// One `(curve_id, t, Λ)` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub curve_id: String,
    pub t: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub curve_id: String,
    pub k: f64,
    pub n: u32,
    pub window: f64,
    /// Abscissa of the last sample, where `Λ` reaches the ceiling.
    pub blow_up: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub spec: FigureSpec,
    pub curves: Vec<CurveSummary>,
    pub rows: Vec<CurveRow>,
}

pub fn curve_id(k: f64, n: u32) -> String {
    format!("k{k}_n{n:02}")
}

/// Tabulates `Λ(t)` for every mode of `spec`. Curves come out sorted by id,
/// rows within a curve by time.
pub fn curve_table(params: &SystemParams, spec: &FigureSpec) -> Result<CurveTable, LifetimeError> {
    if spec.modes.is_empty() {
        return Err(LifetimeError::InvalidSpec("figure has no modes".into()));
    }
    let modes = spec
        .modes
        .iter()
        .map(|&(k, n)| ModeIndex::new(k, n).map_err(|e| LifetimeError::InvalidSpec(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut profiles = modes
        .par_iter()
        .map(|m| lifetime_profile(params, m, spec.ceiling, spec.points))
        .collect::<Result<Vec<_>, _>>()?;
    profiles.sort_by_key(|p| curve_id(p.mode.k, p.mode.n));

    let mut curves = Vec::with_capacity(profiles.len());
    let mut rows = Vec::with_capacity(profiles.len() * spec.points);
    for p in profiles {
        let id = curve_id(p.mode.k, p.mode.n);
        let blow_up = p.samples.last().map_or(0.0, |s| s.0);
        curves.push(CurveSummary { curve_id: id.clone(), k: p.mode.k, n: p.mode.n, window: p.window, blow_up });
        rows.extend(p.samples.into_iter().map(|(t, lambda)| CurveRow { curve_id: id.clone(), t, lambda }));
    }
    Ok(CurveTable { spec: spec.clone(), curves, rows })
}
