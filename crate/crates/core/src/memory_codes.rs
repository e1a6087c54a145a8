//! Memory codes: spectra `{N_k}` recorded while their modes are alive,
//! degraded as modes die, and recalled by comparing a replication signal
//! against the stored spectra.
//!
//! Time is absolute: a mode recorded at any `t_rec` dies at its own
//! recording-window end `T_{k,n}`, because the frequencies decay from `t = 0`
//! regardless of when a code was written.
//!
//! The similarity measure (cosine of the spectra over the union of their
//! supports) and the match threshold of 0.5 are modelling choices.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::lifetime_domains::{self, LifetimeError};
use crate::params::{ModeIndex, SystemParams};

pub const SCHEMA_VERSION: u32 = 1;
pub const MATCH_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MemoryError {
    #[error(transparent)]
    Lifetime(#[from] LifetimeError),
    #[error("invalid stimulus: {0}")]
    InvalidStimulus(String),
    #[error("time must be finite and non-negative, got {0}")]
    BadTime(f64),
    #[error("every component was rejected; nothing recorded")]
    EmptyCode { rejected: Vec<Rejection> },
    #[error("decay time {t} precedes the previous sweep at {last}")]
    NonMonotoneTime { last: f64, t: f64 },
    #[error("no code with id {0}")]
    UnknownCode(u64),
    #[error("code {0} is forgotten and cannot be refreshed")]
    AlreadyForgotten(u64),
    #[error("unsupported registry schema {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("registry JSON: {0}")]
    Json(String),
}

fn check_time(t: f64) -> Result<f64, MemoryError> {
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(MemoryError::BadTime(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub k: f64,
    pub n: u32,
    pub intensity: f64,
}

/// An external input: intensities over `(k, n)` modes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StimulusSpectrum {
    pub components: Vec<Component>,
}

impl StimulusSpectrum {
    pub fn new(components: Vec<Component>) -> Result<Self, MemoryError> {
        let s = Self { components };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), MemoryError> {
        let mut seen = Vec::with_capacity(self.components.len());
        for c in &self.components {
            if !(c.k.is_finite() && c.k > 0.0) {
                return Err(MemoryError::InvalidStimulus(format!("momentum must be finite and > 0, got {}", c.k)));
            }
            if !(c.intensity.is_finite() && c.intensity >= 0.0) {
                return Err(MemoryError::InvalidStimulus(format!(
                    "intensity must be finite and ≥ 0, got {} at k = {}",
                    c.intensity, c.k
                )));
            }
            if seen.contains(&c.k) {
                return Err(MemoryError::InvalidStimulus(format!("momentum {} appears twice", c.k)));
            }
            seen.push(c.k);
        }
        Ok(())
    }
}

/// One stored mode: `k → (N_k, n, t_rec)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeEntry {
    pub k: f64,
    pub strength: f64,
    pub n: u32,
    pub t_rec: f64,
}

impl CodeEntry {
    fn mode(&self) -> ModeIndex {
        ModeIndex { k: self.k, n: self.n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeStatus {
    Intact,
    Degraded,
    Forgotten,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryCode {
    pub id: u64,
    /// Sorted by `k`.
    pub entries: Vec<CodeEntry>,
    pub status: CodeStatus,
    /// Entry count at recording (or at the last refresh).
    pub recorded_entries: usize,
}

impl MemoryCode {
    /// A code built directly from entries; mostly useful for comparisons.
    pub fn from_entries(id: u64, mut entries: Vec<CodeEntry>) -> Self {
        entries.sort_by(|a, b| a.k.total_cmp(&b.k));
        let recorded_entries = entries.len();
        let status = if entries.is_empty() { CodeStatus::Forgotten } else { CodeStatus::Intact };
        Self { id, entries, status, recorded_entries }
    }

    fn spectrum(&self) -> BTreeMap<u64, f64> {
        self.entries.iter().map(|e| (e.k.to_bits(), e.strength)).collect()
    }

    fn alive_at(&self, t: f64, params: &SystemParams) -> impl Iterator<Item = &CodeEntry> {
        let params = *params;
        self.entries.iter().filter(move |e| lifetime_domains::mode_alive(&params, &e.mode(), t))
    }
}

/// Cosine similarity of two `k → N` spectra; 0 if either has no weight.
fn cosine(a: &BTreeMap<u64, f64>, b: &BTreeMap<u64, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Cosine similarity of the `N`-spectra over the union of `k` supports.
pub fn similarity(a: &MemoryCode, b: &MemoryCode) -> f64 {
    cosine(&a.spectrum(), &b.spectrum())
}

/// True when every entry's mode is dead at `t` (and for empty codes).
pub fn is_forgotten(code: &MemoryCode, t: f64, params: &SystemParams) -> bool {
    code.alive_at(t, params).next().is_none()
}

/// Time at which the last entry dies: the largest `T_{k,n}` over entries.
pub fn forgetting_time(code: &MemoryCode, params: &SystemParams) -> Option<f64> {
    code.entries.iter().filter_map(|e| lifetime_domains::recording_window(params, &e.mode()).ok()).reduce(f64::max)
}

/// Spatial extent `2π/k̄` of a code, with `k̄` the `N`-weighted mean
/// momentum (plain mean when all weights vanish). For a single-mode code
/// this is the mode's wavelength.
pub fn domain_extent(code: &MemoryCode) -> Option<f64> {
    if code.entries.is_empty() {
        return None;
    }
    let weight: f64 = code.entries.iter().map(|e| e.strength).sum();
    let k_mean = if weight > 0.0 {
        code.entries.iter().map(|e| e.k * e.strength).sum::<f64>() / weight
    } else {
        code.entries.iter().map(|e| e.k).sum::<f64>() / code.entries.len() as f64
    };
    Some(2.0 * std::f64::consts::PI / k_mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    /// `2ω₀,k < L`: the mode never takes part in recording.
    BelowThreshold,
    /// The mode's recording window has already closed.
    WindowClosed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub k: f64,
    pub n: u32,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recorded {
    pub code: MemoryCode,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecallOutcome {
    Recalled,
    DifficultyRecalling,
    NoMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecallResult {
    pub matched: Option<u64>,
    pub score: f64,
    pub outcome: RecallOutcome,
    /// `c·k̃(n_min, t)` of the matched code.
    pub energy_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub degraded: Vec<u64>,
    pub forgotten: Vec<u64>,
    pub removed_entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub schema: u32,
    pub next_id: u64,
    /// Time of the latest decay sweep.
    pub clock: Option<f64>,
    pub codes: Vec<MemoryCode>,
}

impl Default for Registry {
    fn default() -> Self {
        Self { schema: SCHEMA_VERSION, next_id: 0, clock: None, codes: Vec::new() }
    }
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: u64) -> Option<&MemoryCode> {
        self.codes.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, MemoryError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| MemoryError::Json(e.to_string()))?;
        match value.get("schema").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => return Err(MemoryError::Schema(v as u32)),
            None => return Err(MemoryError::Json("missing field `schema`".into())),
        }
        serde_json::from_value(value).map_err(|e| MemoryError::Json(e.to_string()))
    }

    /// Records the live components of `stimulus` at `t` as a new code.
    /// Nothing changes when every component is rejected.
    pub fn record(
        &mut self,
        stimulus: &StimulusSpectrum,
        t: f64,
        params: &SystemParams,
    ) -> Result<Recorded, MemoryError> {
        check_time(t)?;
        stimulus.validate()?;
        let mut entries = Vec::new();
        let mut rejected = Vec::new();
        for c in &stimulus.components {
            let mode = ModeIndex::new(c.k, c.n).map_err(|e| MemoryError::InvalidStimulus(e.to_string()))?;
            let reason = match lifetime_domains::recording_window(params, &mode) {
                Err(LifetimeError::NeverRecordable { .. }) => Some(RejectReason::BelowThreshold),
                Err(e) => return Err(e.into()),
                Ok(window) if t >= window || c.k < lifetime_domains::momentum_threshold(params, c.n, t)? => {
                    Some(RejectReason::WindowClosed)
                }
                Ok(_) => None,
            };
            match reason {
                Some(reason) => rejected.push(Rejection { k: c.k, n: c.n, reason }),
                None => entries.push(CodeEntry { k: c.k, strength: c.intensity, n: c.n, t_rec: t }),
            }
        }
        if entries.is_empty() {
            return Err(MemoryError::EmptyCode { rejected });
        }
        let code = MemoryCode::from_entries(self.next_id, entries);
        self.next_id += 1;
        self.codes.push(code.clone());
        Ok(Recorded { code, rejected })
    }

    /// Drops entries whose modes are dead at `t`. Idempotent at fixed `t`.
    pub fn decay_codes(&mut self, t: f64, params: &SystemParams) -> Result<DecayReport, MemoryError> {
        check_time(t)?;
        if let Some(last) = self.clock {
            if t < last {
                return Err(MemoryError::NonMonotoneTime { last, t });
            }
        }
        self.clock = Some(t);
        let mut report = DecayReport::default();
        for code in &mut self.codes {
            let before = code.entries.len();
            code.entries.retain(|e| lifetime_domains::mode_alive(params, &e.mode(), t));
            let removed = before - code.entries.len();
            report.removed_entries += removed;
            let status = if code.entries.is_empty() {
                CodeStatus::Forgotten
            } else if code.entries.len() < code.recorded_entries {
                CodeStatus::Degraded
            } else {
                CodeStatus::Intact
            };
            if removed > 0 {
                match status {
                    CodeStatus::Forgotten => report.forgotten.push(code.id),
                    CodeStatus::Degraded => report.degraded.push(code.id),
                    CodeStatus::Intact => {}
                }
            }
            code.status = status;
        }
        Ok(report)
    }

    /// Brushes up code `id` at `t`: its surviving entries are stamped with
    /// `t` and become the new intact baseline.
    pub fn refresh(&mut self, id: u64, t: f64, params: &SystemParams) -> Result<&MemoryCode, MemoryError> {
        check_time(t)?;
        let code = self.codes.iter_mut().find(|c| c.id == id).ok_or(MemoryError::UnknownCode(id))?;
        code.entries.retain(|e| lifetime_domains::mode_alive(params, &e.mode(), t));
        if code.entries.is_empty() {
            code.status = CodeStatus::Forgotten;
            return Err(MemoryError::AlreadyForgotten(id));
        }
        code.entries.iter_mut().for_each(|e| e.t_rec = t);
        code.recorded_entries = code.entries.len();
        code.status = CodeStatus::Intact;
        Ok(code)
    }

    /// Compares `signal` with every code's entries alive at `t`; the best
    /// match (lowest id on ties) is recalled when its score reaches
    /// [`MATCH_THRESHOLD`] and `energy ≥ c·k̃(n_min, t)`.
    pub fn recall(
        &self,
        signal: &StimulusSpectrum,
        energy: f64,
        t: f64,
        params: &SystemParams,
    ) -> Result<RecallResult, MemoryError> {
        check_time(t)?;
        signal.validate()?;
        if !energy.is_finite() {
            return Err(MemoryError::InvalidStimulus(format!("energy must be finite, got {energy}")));
        }
        let probe: BTreeMap<u64, f64> = signal.components.iter().map(|c| (c.k.to_bits(), c.intensity)).collect();
        let mut best: Option<(f64, &MemoryCode, u32)> = None;
        for code in &self.codes {
            let alive: Vec<&CodeEntry> = code.alive_at(t, params).collect();
            let Some(n_min) = alive.iter().map(|e| e.n).min() else { continue };
            let spectrum = alive.iter().map(|e| (e.k.to_bits(), e.strength)).collect();
            let score = cosine(&probe, &spectrum);
            let better = match best {
                None => true,
                Some((s, b, _)) => score > s || (score == s && code.id < b.id),
            };
            if better {
                best = Some((score, code, n_min));
            }
        }
        let Some((score, code, n_min)) = best.filter(|b| b.0 >= MATCH_THRESHOLD) else {
            let score = best.map_or(0.0, |b| b.0);
            return Ok(RecallResult { matched: None, score, outcome: RecallOutcome::NoMatch, energy_threshold: None });
        };
        let threshold = params.speed() * lifetime_domains::momentum_threshold(params, n_min, t)?;
        let outcome = if energy >= threshold { RecallOutcome::Recalled } else { RecallOutcome::DifficultyRecalling };
        Ok(RecallResult { matched: Some(code.id), score, outcome, energy_threshold: Some(threshold) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SystemParams {
        SystemParams::new(1.0, 1.0).unwrap()
    }

    fn stim(parts: &[(f64, u32, f64)]) -> StimulusSpectrum {
        StimulusSpectrum::new(parts.iter().map(|&(k, n, intensity)| Component { k, n, intensity }).collect()).unwrap()
    }

    #[test]
    fn record_examples() {
        let p = unit();
        let mut reg = Registry::new();
        match reg.record(&stim(&[(0.4, 1, 1.0)]), 0.0, &p) {
            Err(MemoryError::EmptyCode { rejected }) => assert_eq!(rejected[0].reason, RejectReason::BelowThreshold),
            other => panic!("{other:?}"),
        }
        match reg.record(&stim(&[(2.0, 1, 1.0)]), 5.0, &p) {
            Err(MemoryError::EmptyCode { rejected }) => assert_eq!(rejected[0].reason, RejectReason::WindowClosed),
            other => panic!("{other:?}"),
        }
        assert_eq!(reg, Registry::new());
        let rec = reg.record(&stim(&[(2.0, 1, 3.5), (0.4, 1, 1.0)]), 1.0, &p).unwrap();
        assert_eq!(rec.code.entries, vec![CodeEntry { k: 2.0, strength: 3.5, n: 1, t_rec: 1.0 }]);
        assert_eq!(rec.rejected.len(), 1);
        assert_eq!(reg.codes.len(), 1);
    }

    #[test]
    fn invalid_stimuli() {
        let dup = StimulusSpectrum { components: vec![Component { k: 1.0, n: 1, intensity: 1.0 }; 2] };
        assert!(matches!(dup.validate(), Err(MemoryError::InvalidStimulus(_))));
        let neg = StimulusSpectrum { components: vec![Component { k: 1.0, n: 1, intensity: -1.0 }] };
        assert!(neg.validate().is_err());
        let mut reg = Registry::new();
        assert!(reg.record(&stim(&[(1.0, 0, 1.0)]), -1.0, &unit()).is_err());
    }

    #[test]
    fn decay_examples() {
        let p = unit();
        let mut reg = Registry::new();
        reg.record(&stim(&[(0.6, 1, 1.0), (6.0, 1, 1.0)]), 0.0, &p).unwrap();
        let before = reg.clone();
        reg.decay_codes(0.0, &p).unwrap();
        assert_eq!(reg.codes, before.codes);

        let t1 = 3.0 * 1.2f64.ln();
        let report = reg.decay_codes(t1 + 1e-9, &p).unwrap();
        assert_eq!(report.degraded, vec![0]);
        assert_eq!(reg.codes[0].status, CodeStatus::Degraded);
        assert_eq!(reg.codes[0].entries.len(), 1);
        assert_eq!(reg.codes[0].entries[0].k, 6.0);
        let again = reg.clone();
        reg.decay_codes(t1 + 1e-9, &p).unwrap();
        assert_eq!(reg.codes, again.codes);

        reg.decay_codes(3.0 * 12f64.ln() + 1e-9, &p).unwrap();
        assert_eq!(reg.codes[0].status, CodeStatus::Forgotten);
        assert!(reg.codes[0].entries.is_empty());
        assert!(matches!(reg.decay_codes(1.0, &p), Err(MemoryError::NonMonotoneTime { .. })));
    }

    #[test]
    fn recall_examples() {
        let p = unit();
        let mut reg = Registry::new();
        let s = stim(&[(2.0, 1, 1.0), (3.0, 2, 2.0)]);
        reg.record(&s, 0.5, &p).unwrap();

        let hit = reg.recall(&s, 100.0, 0.5, &p).unwrap();
        assert_eq!(hit.outcome, RecallOutcome::Recalled);
        assert!((hit.score - 1.0).abs() < 1e-15);
        assert_eq!(hit.matched, Some(0));
        let thr = hit.energy_threshold.unwrap();
        assert!((thr - lifetime_domains::momentum_threshold(&p, 1, 0.5).unwrap()).abs() < 1e-15);

        assert_eq!(reg.recall(&s, 0.0, 0.5, &p).unwrap().outcome, RecallOutcome::DifficultyRecalling);
        assert_eq!(reg.recall(&s, thr, 0.5, &p).unwrap().outcome, RecallOutcome::Recalled);

        let miss = reg.recall(&stim(&[(9.0, 1, 1.0)]), 100.0, 0.5, &p).unwrap();
        assert_eq!(miss.outcome, RecallOutcome::NoMatch);
        assert_eq!(miss.score, 0.0);
        assert_eq!(miss.matched, None);
    }

    #[test]
    fn recall_ties_pick_lowest_id() {
        let p = unit();
        let mut reg = Registry::new();
        let s = stim(&[(2.0, 1, 1.0)]);
        reg.record(&s, 0.0, &p).unwrap();
        reg.record(&s, 0.1, &p).unwrap();
        assert_eq!(reg.recall(&s, 10.0, 0.2, &p).unwrap().matched, Some(0));
    }

    #[test]
    fn similarity_examples() {
        let e = |k: f64, s: f64| CodeEntry { k, strength: s, n: 1, t_rec: 0.0 };
        let a = MemoryCode::from_entries(0, vec![e(1.0, 1.0), e(2.0, 1.0)]);
        assert!((similarity(&a, &a) - 1.0).abs() < 1e-15);
        let b = MemoryCode::from_entries(1, vec![e(3.0, 1.0)]);
        assert_eq!(similarity(&a, &b), 0.0);
        let remnant = MemoryCode::from_entries(2, vec![e(2.0, 1.0)]);
        assert!((similarity(&a, &remnant) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
        assert_eq!(similarity(&a, &remnant), similarity(&remnant, &a));
        assert_eq!(similarity(&a, &MemoryCode::from_entries(3, vec![])), 0.0);
    }

    #[test]
    fn forgotten_examples() {
        let p = unit();
        let mut reg = Registry::new();
        let code = reg.record(&stim(&[(0.6, 1, 1.0), (6.0, 1, 1.0)]), 0.1, &p).unwrap().code;
        assert!(!is_forgotten(&code, 0.1, &p));
        assert!(is_forgotten(&code, 3.0 * 12f64.ln() + 1e-6, &p));
        assert!(is_forgotten(&MemoryCode::from_entries(9, vec![]), 0.0, &p));
    }

    #[test]
    fn extent_and_forgetting_time() {
        let p = unit();
        let code = MemoryCode::from_entries(
            0,
            vec![
                CodeEntry { k: 0.6, strength: 1.0, n: 1, t_rec: 0.0 },
                CodeEntry { k: 6.0, strength: 1.0, n: 1, t_rec: 0.0 },
            ],
        );
        assert!((forgetting_time(&code, &p).unwrap() - 3.0 * 12f64.ln()).abs() < 1e-12);
        assert!((domain_extent(&code).unwrap() - 2.0 * std::f64::consts::PI / 3.3).abs() < 1e-12);
        let empty = MemoryCode::from_entries(1, vec![]);
        assert_eq!(forgetting_time(&empty, &p), None);
        assert_eq!(domain_extent(&empty), None);
    }

    #[test]
    fn refresh_resets_baseline() {
        let p = unit();
        let mut reg = Registry::new();
        reg.record(&stim(&[(0.6, 1, 1.0), (6.0, 1, 1.0)]), 0.0, &p).unwrap();
        reg.decay_codes(1.0, &p).unwrap();
        assert_eq!(reg.codes[0].status, CodeStatus::Degraded);
        let code = reg.refresh(0, 2.0, &p).unwrap();
        assert_eq!(code.status, CodeStatus::Intact);
        assert_eq!(code.entries[0].t_rec, 2.0);
        assert!(matches!(reg.refresh(7, 2.0, &p), Err(MemoryError::UnknownCode(7))));
        assert!(matches!(reg.refresh(0, 100.0, &p), Err(MemoryError::AlreadyForgotten(0))));
    }

    #[test]
    fn json_round_trip() {
        let p = unit();
        let mut reg = Registry::new();
        reg.record(&stim(&[(2.0, 1, 1.5), (0.7, 0, 0.25)]), 0.3, &p).unwrap();
        reg.decay_codes(0.4, &p).unwrap();
        let text = reg.to_json();
        assert!(text.contains("\"schema\": 1"));
        let back = Registry::from_json(&text).unwrap();
        assert_eq!(back, reg);
        assert_eq!(back.to_json(), text);
        let wrong = text.replace("\"schema\": 1", "\"schema\": 2");
        assert!(matches!(Registry::from_json(&wrong), Err(MemoryError::Schema(2))));
        assert!(Registry::from_json("{").is_err());
    }
}
