//! The doubled-mode quantum layer in a truncated two-mode Fock space.
//!
//! Per mode `k` the Hamiltonian splits as `H = H0 + HI1 + HI2` with
//!
//! ```text
//! H0  =  ½ Ω₀ (A†A − Ã†Ã)
//! HI1 = −¼ Ω₁ [(A² + A†²) − (Ã² + Ã†²)]
//! HI2 =  i Γ (A†Ã† − AÃ),        Γ = L/2
//! ```
//!
//! and `Ω₀,₁ = ω₀ (Ω²/ω₀² ± 1)`. The rotation `S(θ) = exp(−iθK₂)` with
//! `tanh θ = −Ω₁/Ω₀` removes `HI1`, and `HI2` then squeezes the vacuum into
//! `|0(θ,t)⟩ = Σ_m tanh^m(Γt)/cosh(Γt) |m, m⟩`.
//!
//! `K₂ = (i/4)[(A² − A†²) + (Ã² − Ã†²)]` splits into two commuting
//! single-mode parts, so `S(θ)` is a tensor product of two copies of
//! `exp(θ(a² − a†²)/4)`. Those copies are computed in a padded working space
//! because the truncated generator reflects off the top level.

mod expm;
pub mod operators;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;
use thiserror::Error;

use crate::lifetime_domains::{self, LifetimeError};
use crate::oscillator_dynamics::{self, DynamicsError};
use crate::params::{ModeIndex, SystemParams};
pub use expm::expm;
pub use operators::{Factor, Ladders, OperatorLabel, OperatorMatrix};

/// Largest normalization tail a constructed state may drop.
pub const STATE_TAIL_LIMIT: f64 = 1e-12;
/// Largest weight the brute-force oracle may leave in the top two levels.
pub const LEAKAGE_LIMIT: f64 = 1e-8;
pub const MIN_CUTOFF: usize = 8;
pub const MAX_CUTOFF: usize = 256;
const MAX_WORK_CUTOFF: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error(transparent)]
    Lifetime(#[from] LifetimeError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("cutoff {cutoff} is below the minimum {min}")]
    InvalidCutoff { cutoff: usize, min: usize },
    #[error("cutoff {cutoff} too small: truncated weight {weight:e} exceeds {limit:e}")]
    CutoffTooSmall { cutoff: usize, weight: f64, limit: f64 },
    #[error("state has length {got}, operator expects {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("evolved state left the paired subspace (weight {0:e} off |m, m⟩)")]
    PairingBroken(f64),
    #[error("squeeze factor did not converge below working cutoff {0}")]
    NotConverged(usize),
}

fn finite(x: f64, what: &'static str) -> Result<f64, FockError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(FockError::NonFinite(what))
    }
}

/// `θ_k(t)` together with the two frequencies that define it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeAngle {
    pub theta: f64,
    pub mode: ModeIndex,
    pub t: f64,
    /// `Ω₀ = Ω²/ω₀ + ω₀`.
    pub omega_0: f64,
    /// `Ω₁ = Ω²/ω₀ − ω₀`.
    pub omega_1: f64,
}

/// `(Ω₀, Ω₁)` for common frequency squared `omega_sq` and reference `omega_ref`.
pub fn mixing_frequencies(omega_ref: f64, omega_sq: f64) -> (f64, f64) {
    let base = omega_sq / omega_ref;
    (base + omega_ref, base - omega_ref)
}

/// `θ = atanh(−Ω₁/Ω₀)` for an arbitrary reference frequency. Zero exactly
/// when `Ω² = ω_ref²`.
pub fn mixing_angle_for(omega_ref: f64, omega_sq: f64) -> Result<f64, FockError> {
    finite(omega_ref, "reference frequency")?;
    finite(omega_sq, "Ω²")?;
    if omega_ref <= 0.0 {
        return Err(FockError::NonFinite("reference frequency must be positive"));
    }
    let (w0, w1) = mixing_frequencies(omega_ref, omega_sq);
    let ratio = -w1 / w0;
    if !(omega_sq > 0.0 && ratio.abs() < 1.0) {
        return Err(FockError::Dynamics(DynamicsError::RealityViolation { t: f64::NAN, omega_sq }));
    }
    Ok(ratio.atanh())
}

/// Mixing angle of mode `(k, n)` at `t`, with `ω₀,k = k·c` as reference.
pub fn mixing_angle(params: &SystemParams, mode: &ModeIndex, t: f64) -> Result<SqueezeAngle, FockError> {
    finite(t, "time")?;
    let window = lifetime_domains::recording_window(params, mode)?;
    if t >= window {
        return Err(LifetimeError::ModeDead { k: mode.k, n: mode.n, t, window }.into());
    }
    let omega_sq = oscillator_dynamics::common_frequency_sq(params, mode, t)?;
    let omega_ref = params.omega0(mode.k);
    let theta = mixing_angle_for(omega_ref, omega_sq)?;
    let (omega_0, omega_1) = mixing_frequencies(omega_ref, omega_sq);
    Ok(SqueezeAngle { theta, mode: *mode, t, omega_0, omega_1 })
}

/// `(cosh(θ/2), sinh(θ/2))`: the coefficients of `A ↦ A cosh + A† sinh`.
pub fn bogoliubov_theta_coeffs(theta: f64) -> (f64, f64) {
    ((0.5 * theta).cosh(), (0.5 * theta).sinh())
}

/// `(cosh Γt, sinh Γt)`: the coefficients of `A(θ,t) = A cosh − Ã† sinh`.
pub fn bogoliubov_time_coeffs(gamma: f64, t: f64) -> (f64, f64) {
    let x = gamma * t;
    (x.cosh(), x.sinh())
}

/// Truncated two-mode squeezed vacuum, stored on the paired states `|m, m⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoModeState {
    pub cutoff: usize,
    pub coeffs: Vec<Complex64>,
    /// Squeeze parameter `Γt`; advanced only by `HI2` flows.
    pub gamma_t: f64,
}

impl TwoModeState {
    pub fn vacuum(cutoff: usize) -> Self {
        let mut coeffs = vec![Complex64::ZERO; cutoff + 1];
        coeffs[0] = Complex64::ONE;
        Self { cutoff, coeffs, gamma_t: 0.0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    /// Embeds into the full `(cutoff+1)²` basis.
    pub fn to_full(&self) -> Vec<Complex64> {
        let side = self.cutoff + 1;
        let mut v = vec![Complex64::ZERO; side * side];
        for (m, &c) in self.coeffs.iter().enumerate() {
            v[m * side + m] = c;
        }
        v
    }

    /// Projects a full-basis vector onto `|m, m⟩`; also returns the weight
    /// found elsewhere.
    pub fn from_full(cutoff: usize, v: &[Complex64], gamma_t: f64) -> (Self, f64) {
        let side = cutoff + 1;
        let coeffs = (0..side).map(|m| v[m * side + m]).collect::<Vec<_>>();
        let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let paired: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        (Self { cutoff, coeffs, gamma_t }, (total - paired).max(0.0))
    }
}

/// Smallest cutoff whose dropped weight `tanh^{2(m+1)}(Γt)` is below
/// `10^{−digits}`, clamped to `[MIN_CUTOFF, MAX_CUTOFF]`.
pub fn cutoff_for_tail(gamma_t: f64, digits: f64) -> usize {
    let t2 = gamma_t.tanh().powi(2);
    if t2 == 0.0 {
        return MIN_CUTOFF;
    }
    if t2 >= 1.0 {
        return MAX_CUTOFF;
    }
    let m = (digits * LN_10 / -t2.ln()).ceil();
    (m as usize).clamp(MIN_CUTOFF, MAX_CUTOFF)
}

/// Default cutoff: dropped weight below `STATE_TAIL_LIMIT`.
pub fn default_cutoff(gamma_t: f64) -> usize {
    cutoff_for_tail(gamma_t, -STATE_TAIL_LIMIT.log10())
}

/// Weight the closed form puts above `cutoff`: `tanh^{2(cutoff+1)}(Γt)`.
pub fn squeeze_tail(gamma_t: f64, cutoff: usize) -> f64 {
    gamma_t.tanh().abs().powi(2 * (cutoff as i32 + 1))
}

/// `|0(θ,t)⟩ = Σ_m tanh^m(Γt)/cosh(Γt) |m, m⟩` truncated at `cutoff`.
pub fn squeezed_vacuum(gamma: f64, t: f64, cutoff: usize) -> Result<TwoModeState, FockError> {
    let gt = finite(finite(gamma, "Γ")? * finite(t, "time")?, "Γt")?;
    if cutoff < 1 {
        return Err(FockError::InvalidCutoff { cutoff, min: 1 });
    }
    let tail = squeeze_tail(gt, cutoff);
    if tail > STATE_TAIL_LIMIT {
        return Err(FockError::CutoffTooSmall { cutoff, weight: tail, limit: STATE_TAIL_LIMIT });
    }
    let (th, sech) = (gt.tanh(), 1.0 / gt.cosh());
    let coeffs = (0..=cutoff as i32).map(|m| Complex64::new(th.powi(m) * sech, 0.0)).collect();
    Ok(TwoModeState { cutoff, coeffs, gamma_t: gt })
}

/// `(N_A, N_Ã)`; equal by construction of the paired basis.
pub fn expected_pair_number(state: &TwoModeState) -> (f64, f64) {
    let weights = state.coeffs.iter().enumerate().map(|(m, c)| m as f64 * c.norm_sqr());
    let n_a: f64 = weights.clone().sum();
    let n_tilde: f64 = weights.sum();
    (n_a, n_tilde)
}

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln ⟨0(θ,t')|0(θ,t)⟩ = −Σ ln cosh(Γ_k (t − t'))` over the supplied modes.
pub fn log_vacuum_overlap(gammas: &[f64], t: f64, t_prime: f64) -> Result<f64, FockError> {
    finite(t, "time")?;
    finite(t_prime, "time")?;
    let dt = t - t_prime;
    gammas.iter().try_for_each(|&g| finite(g, "Γ").map(drop))?;
    Ok(-gammas.par_iter().map(|&g| ln_cosh(g * dt)).sum::<f64>())
}

/// Product over modes of `1/cosh(Γ_k (t − t'))`.
pub fn vacuum_overlap(gammas: &[f64], t: f64, t_prime: f64) -> Result<f64, FockError> {
    Ok(log_vacuum_overlap(gammas, t, t_prime)?.exp())
}

/// Instantaneous decay rate `−d/dt ln⟨0(θ,t)|0(θ)⟩` of a single mode,
/// measured by a central difference of the log-overlap.
pub fn vacuum_decay_rate(gamma: f64, t: f64) -> Result<f64, FockError> {
    let h = 1e-5 * (1.0 + t.abs());
    let up = log_vacuum_overlap(&[gamma], t + h, 0.0)?;
    let down = log_vacuum_overlap(&[gamma], t - h, 0.0)?;
    Ok(-(up - down) / (2.0 * h))
}

/// The Hamiltonian pieces of one mode at time `t`.
pub struct Hamiltonians {
    pub h0: OperatorMatrix,
    pub hi1: OperatorMatrix,
    pub hi2: OperatorMatrix,
    /// `Ω (A†A − Ã†Ã)`, the rotated free part.
    pub h0_prime: OperatorMatrix,
    pub angle: SqueezeAngle,
}

pub fn build_hamiltonians(
    params: &SystemParams,
    mode: &ModeIndex,
    t: f64,
    cutoff: usize,
) -> Result<Hamiltonians, FockError> {
    if cutoff < 4 {
        return Err(FockError::InvalidCutoff { cutoff, min: 4 });
    }
    let angle = mixing_angle(params, mode, t)?;
    let omega = oscillator_dynamics::common_frequency(params, mode, t)?;
    let l = Ladders::new(cutoff);
    let diff = l.number_difference();
    let h0 = diff.scale(Complex64::new(0.5 * angle.omega_0, 0.0)).with_label(OperatorLabel::H0, 0.5 * angle.omega_0);
    let h0_prime = diff.scale(Complex64::new(omega, 0.0)).with_label(OperatorLabel::H0Prime, omega);
    let c1 = -0.25 * angle.omega_1;
    let hi1 = l.quadrature_difference().scale(Complex64::new(c1, 0.0)).with_label(OperatorLabel::HI1, c1);
    let hi2 = pair_hamiltonian(params.gamma(), cutoff);
    Ok(Hamiltonians { h0, hi1, hi2, h0_prime, angle })
}

/// `HI2 = iΓ(A†Ã† − AÃ)`.
pub fn pair_hamiltonian(gamma: f64, cutoff: usize) -> OperatorMatrix {
    Ladders::new(cutoff).pair_difference().scale(Complex64::new(0.0, gamma)).with_label(OperatorLabel::HI2, gamma)
}

/// `K₂ = (i/4)[(A² − A†²) + (Ã² − Ã†²)]`.
pub fn k2_generator(cutoff: usize) -> Result<OperatorMatrix, FockError> {
    if cutoff < 4 {
        return Err(FockError::InvalidCutoff { cutoff, min: 4 });
    }
    Ok(Ladders::new(cutoff).squeeze_sum().scale(Complex64::new(0.0, 0.25)).with_label(OperatorLabel::K2, 1.0))
}

/// Groups basis indices into connected blocks of the operator's graph.
fn connected_blocks(op: &OperatorMatrix, seeds: &[usize]) -> Vec<Vec<usize>> {
    let dim = op.dimension();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for i in 0..dim {
        for &(j, _) in op.row(i) {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
    }
    let mut seen = vec![false; dim];
    let mut blocks = Vec::new();
    for &s in seeds {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut block = vec![s];
        let mut next = 0;
        while next < block.len() {
            let i = block[next];
            next += 1;
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    block.push(j);
                }
            }
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

/// `exp(−i t G)|ψ⟩` on the full two-mode basis, one dense exponential per
/// connected block touched by the initial state.
pub fn evolve_full(generator: &OperatorMatrix, t: f64, init: &[Complex64]) -> Result<Vec<Complex64>, FockError> {
    finite(t, "time")?;
    let dim = generator.dimension();
    if init.len() != dim {
        return Err(FockError::DimensionMismatch { got: init.len(), want: dim });
    }
    let seeds: Vec<usize> = (0..dim).filter(|&i| init[i] != Complex64::ZERO).collect();
    let mut out = vec![Complex64::ZERO; dim];
    let step = Complex64::new(0.0, -t);
    for block in connected_blocks(generator, &seeds) {
        let pos: std::collections::HashMap<usize, usize> = block.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let n = block.len();
        let mut g = DMatrix::<Complex64>::zeros(n, n);
        for (p, &i) in block.iter().enumerate() {
            for &(j, x) in generator.row(i) {
                g[(p, pos[&j])] = x * step;
            }
        }
        let psi = DVector::from_iterator(n, block.iter().map(|&i| init[i]));
        let evolved = if g.iter().all(|x| x.im == 0.0) {
            let u = expm(&g.map(|x| x.re));
            u.map(|x| Complex64::new(x, 0.0)) * psi
        } else {
            expm(&g) * psi
        };
        for (p, &i) in block.iter().enumerate() {
            out[i] = evolved[p];
        }
    }
    Ok(out)
}

/// Weight on states with either occupation in the top two levels.
pub fn boundary_leakage(cutoff: usize, v: &[Complex64]) -> f64 {
    let side = cutoff + 1;
    v.iter()
        .enumerate()
        .filter(|(i, _)| i / side + 2 > cutoff || i % side + 2 > cutoff)
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

/// Matrix-exponential oracle: evolves a paired state under `generator` for
/// time `t` and projects back onto `|m, m⟩`.
pub fn brute_force_evolve(generator: &OperatorMatrix, t: f64, init: &TwoModeState) -> Result<TwoModeState, FockError> {
    if generator.cutoff() != init.cutoff {
        return Err(FockError::DimensionMismatch { got: init.cutoff + 1, want: generator.cutoff() + 1 });
    }
    let full = evolve_full(generator, t, &init.to_full())?;
    let leakage = boundary_leakage(init.cutoff, &full);
    if leakage > LEAKAGE_LIMIT {
        return Err(FockError::CutoffTooSmall { cutoff: init.cutoff, weight: leakage, limit: LEAKAGE_LIMIT });
    }
    let gamma_t = match generator.label() {
        OperatorLabel::HI2 => init.gamma_t + generator.coupling() * t,
        _ => init.gamma_t,
    };
    let (state, off_pair) = TwoModeState::from_full(init.cutoff, &full, gamma_t);
    if off_pair > 1e-10 * init.norm_sqr().max(1.0) {
        return Err(FockError::PairingBroken(off_pair));
    }
    Ok(state)
}

/// Single-mode factor `exp(θ(a² − a†²)/4)` of `S(θ)`, resolved on levels
/// `0..=keep` by growing a working truncation until that block settles.
#[derive(Debug, Clone)]
pub struct SqueezeFactor {
    pub theta: f64,
    pub work_cutoff: usize,
    unitary: DMatrix<f64>,
}

fn single_ladder(cutoff: usize) -> DMatrix<f64> {
    DMatrix::from_fn(cutoff + 1, cutoff + 1, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

fn single_squeeze_unitary(theta: f64, work: usize) -> DMatrix<f64> {
    let a = single_ladder(work);
    let a2 = &a * &a;
    let gen = (&a2 - a2.transpose()) * (0.25 * theta);
    expm(&gen)
}

impl SqueezeFactor {
    pub fn new(theta: f64, keep: usize) -> Result<Self, FockError> {
        finite(theta, "θ")?;
        let mut work = (2 * keep).max(32);
        let mut prev = single_squeeze_unitary(theta, work);
        loop {
            let next_work = work + work / 2;
            if next_work > MAX_WORK_CUTOFF {
                return Err(FockError::NotConverged(MAX_WORK_CUTOFF));
            }
            let next = single_squeeze_unitary(theta, next_work);
            let f_prev = Self { theta, work_cutoff: work, unitary: prev };
            let f_next = Self { theta, work_cutoff: next_work, unitary: next };
            let diff = (f_prev.conjugated_ladder(keep) - f_next.conjugated_ladder(keep)).abs().max();
            let vac_diff = (f_prev.vacuum(keep) - f_next.vacuum(keep)).abs().max();
            if diff <= 1e-13 && vac_diff <= 1e-15 {
                return Ok(f_next);
            }
            work = next_work;
            prev = f_next.unitary;
        }
    }

    /// `S a S⁻¹` on levels `0..=keep`.
    pub fn conjugated_ladder(&self, keep: usize) -> DMatrix<f64> {
        let a = single_ladder(self.work_cutoff);
        let full = &self.unitary * a * self.unitary.transpose();
        full.view((0, 0), (keep + 1, keep + 1)).into_owned()
    }

    /// `S|0⟩` on levels `0..=keep`.
    pub fn vacuum(&self, keep: usize) -> DVector<f64> {
        self.unitary.view((0, 0), (keep + 1, 1)).column(0).into_owned()
    }
}

/// `|0(θ)⟩ = S(θ)|0, 0⟩` on the full `(cutoff+1)²` basis.
pub fn rotated_vacuum(theta: f64, cutoff: usize) -> Result<Vec<Complex64>, FockError> {
    let v = SqueezeFactor::new(theta, cutoff)?.vacuum(cutoff);
    let mut out = Vec::with_capacity((cutoff + 1) * (cutoff + 1));
    for &x in v.iter() {
        out.extend(v.iter().map(|&y| Complex64::new(x * y, 0.0)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
