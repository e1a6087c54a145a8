//! Memory domains in the dissipative quantum model of brain with
//! exponentially time-dependent frequencies.
//!
//! The crate is layered bottom-up:
//!
//! * [`special_fns`] evaluates spherical Bessel functions of both kinds.
//! * [`oscillator_dynamics`] builds the damped/amplified oscillator pair
//!   from those functions and carries an adaptive integrator used as an
//!   independent check.
//! * [`lifetime_domains`] derives recording windows, momentum thresholds,
//!   infrared cut-offs and mode life-times, and tabulates the life-time
//!   curves.
//! * [`fock_quantization`] represents the doubled-mode quantum system in a
//!   truncated two-mode Fock space: Hamiltonians, Bogoliubov rotations,
//!   squeezed-vacuum evolution and a brute-force matrix-exponential oracle.
//! * [`memory_codes`] records, degrades and recalls memory codes.
//!
//! All quantities are adimensional with ħ = 1.

pub mod fock_quantization;
pub mod lifetime_domains;
pub mod memory_codes;
pub mod oscillator_dynamics;
pub mod params;
pub mod special_fns;

pub use fock_quantization::{FockError, OperatorLabel, OperatorMatrix, SqueezeAngle, TwoModeState};
pub use lifetime_domains::{
    CurveRow, CurveSummary, CurveTable, DomainSnapshot, Figure, FigureSpec, LifetimeError, LifetimeProfile,
};
pub use memory_codes::{
    CodeStatus, Component, MemoryCode, MemoryError, RecallOutcome, RecallResult, Registry, StimulusSpectrum,
};
pub use oscillator_dynamics::{DynamicsError, Method, Trajectory};
pub use params::{ModeIndex, ParamError, SystemParams};
pub use special_fns::{BesselError, BesselKind};
