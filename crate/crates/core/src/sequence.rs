//! Pulse trains: the drive of a gate as a list of square pulses, plus the
//! reduced parametrizations used during search.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One square pulse of the walking-wave drive. Times are in units of
/// `1/omega_c`, the amplitude in units of `omega_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    pub t_start: f64,
    pub duration: f64,
    /// Signed amplitude; a negative value is a pi phase flip.
    pub amplitude: f64,
    /// Difference frequency of the two beams during this pulse.
    pub omega: f64,
    /// Phase offset relative to the optical phase.
    pub dphi: f64,
}

impl Pulse {
    pub fn new(t_start: f64, duration: f64, amplitude: f64, omega: f64, dphi: f64) -> Self {
        Self {
            t_start,
            duration,
            amplitude,
            omega,
            dphi,
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }

    /// The same waveform displaced later in time by `dt`. The carrier phase is
    /// carried along so that the drive at `t + dt` equals the old drive at `t`.
    pub fn translated(&self, dt: f64) -> Self {
        Self {
            t_start: self.t_start + dt,
            dphi: self.dphi - self.omega * dt,
            ..*self
        }
    }

    /// Phase of the carrier at the start of the pulse, `omega t_n + dphi_n`.
    pub fn start_phase(&self) -> f64 {
        self.omega * self.t_start + self.dphi
    }
}

/// How a sequence was built; determines its free-parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Parametrization {
    /// Independent timing, amplitude, frequency and phase per pulse.
    #[default]
    General,
    /// Shared frequency, all phase offsets zero.
    FixedOmega,
    /// Shared frequency, zero phase offsets, time-symmetric profile.
    Symmetric,
    /// Contiguous segments with a shared frequency: a single shaped pulse.
    Shaped,
    /// Symmetric with every pulse at the same amplitude.
    EqualAmplitude,
}

impl Parametrization {
    /// Number of free parameters of an `n`-pulse sequence once the start time,
    /// phase origin and overall amplitude scale are removed.
    pub fn parameter_count(self, n: usize) -> usize {
        match self {
            Parametrization::General => (5 * n).saturating_sub(3),
            Parametrization::FixedOmega => (3 * n).saturating_sub(1),
            Parametrization::Symmetric => (3 * n).div_ceil(2),
            Parametrization::Shaped => 2 * n,
            Parametrization::EqualAmplitude => n + 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parametrization::General => "general",
            Parametrization::FixedOmega => "fixed-omega",
            Parametrization::Symmetric => "symmetric",
            Parametrization::Shaped => "shaped",
            Parametrization::EqualAmplitude => "equal-amplitude",
        }
    }
}

/// A validated pulse train: ordered, non-overlapping, first pulse at `t = 0`,
/// phase offsets in `[0, 2pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pulses: Vec<Pulse>,
    parametrization: Parametrization,
}

const CONTIGUITY_SLACK: f64 = 1e-12;

impl PulseSequence {
    /// Checks ordering and positivity, moves the first pulse to `t = 0` and
    /// wraps the phase offsets.
    pub fn new(pulses: Vec<Pulse>, parametrization: Parametrization) -> Result<Self> {
        validate(pulses, parametrization)
    }

    pub fn empty() -> Self {
        Self {
            pulses: Vec::new(),
            parametrization: Parametrization::General,
        }
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn parametrization(&self) -> Parametrization {
        self.parametrization
    }

    pub fn with_parametrization(mut self, parametrization: Parametrization) -> Self {
        self.parametrization = parametrization;
        self
    }

    /// Total gate time `t_N + tau_N - t_1`.
    pub fn duration(&self) -> f64 {
        match (self.pulses.first(), self.pulses.last()) {
            (Some(first), Some(last)) => last.t_end() - first.t_start,
            _ => 0.0,
        }
    }

    /// Gate time in units of the COM period.
    pub fn duration_over_period(&self) -> f64 {
        self.duration() / TAU
    }

    pub fn total_area(&self) -> f64 {
        total_area(&self.pulses)
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.amplitude).collect()
    }

    /// Copy with every amplitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let pulses = self
            .pulses
            .iter()
            .map(|p| Pulse {
                amplitude: p.amplitude * s,
                ..*p
            })
            .collect();
        Self {
            pulses,
            parametrization: self.parametrization,
        }
    }

    /// Copy with the given per-pulse amplitudes.
    pub fn with_amplitudes(&self, amplitudes: &[f64]) -> Result<Self> {
        if amplitudes.len() != self.pulses.len() {
            return Err(Error::InconsistentCounts(format!(
                "{} amplitudes for {} pulses",
                amplitudes.len(),
                self.pulses.len()
            )));
        }
        let pulses = self
            .pulses
            .iter()
            .zip(amplitudes)
            .map(|(p, &a)| Pulse { amplitude: a, ..*p })
            .collect();
        Ok(Self {
            pulses,
            parametrization: self.parametrization,
        })
    }

    /// Copy with every pulse at frequency `omega`. Start phases of the pulses
    /// are unchanged only when all `t_n` are zero; the phase offsets are kept.
    pub fn with_omega(&self, omega: f64) -> Self {
        let pulses = self.pulses.iter().map(|p| Pulse { omega, ..*p }).collect();
        Self {
            pulses,
            parametrization: self.parametrization,
        }
    }

    /// Copy with each pulse's timing, amplitude or frequency transformed.
    pub fn map_pulses(&self, f: impl FnMut(&Pulse) -> Pulse) -> Result<Self> {
        let pulses = self.pulses.iter().map(f).collect();
        validate(pulses, self.parametrization)
    }

    /// Pulses in reverse time order mirrored about the midpoint.
    pub fn time_reversed(&self) -> Result<Self> {
        let tau = self.duration();
        let pulses = self
            .pulses
            .iter()
            .rev()
            .map(|p| Pulse {
                t_start: tau - p.t_end(),
                ..*p
            })
            .collect();
        validate(pulses, self.parametrization)
    }
}

/// Sum of `|Omega_n| tau_n`.
pub fn total_area(pulses: &[Pulse]) -> f64 {
    pulses.iter().map(|p| p.amplitude.abs() * p.duration).sum()
}

/// Enforces the pulse-train invariants. The start time is arbitrary, so the
/// train is translated (waveform and all) to begin at zero.
pub fn validate(mut pulses: Vec<Pulse>, parametrization: Parametrization) -> Result<PulseSequence> {
    for (index, p) in pulses.iter().enumerate() {
        let finite = p.t_start.is_finite()
            && p.duration.is_finite()
            && p.amplitude.is_finite()
            && p.omega.is_finite()
            && p.dphi.is_finite();
        if !finite {
            return Err(Error::NonFinite("pulse parameters"));
        }
        if p.duration <= 0.0 {
            return Err(Error::NonPositiveDuration {
                index,
                duration: p.duration,
            });
        }
    }
    for index in 1..pulses.len() {
        let prev_end = pulses[index - 1].t_end();
        let start = pulses[index].t_start;
        let slack = CONTIGUITY_SLACK * prev_end.abs().max(1.0);
        if start < prev_end - slack {
            return Err(Error::Overlap {
                index,
                start,
                prev_end,
            });
        }
        if start < prev_end {
            pulses[index].t_start = prev_end;
        }
    }
    if let Some(t0) = pulses.first().map(|p| p.t_start) {
        if t0 != 0.0 {
            for p in pulses.iter_mut() {
                *p = p.translated(-t0);
            }
            pulses[0].t_start = 0.0;
        }
    }
    for p in pulses.iter_mut() {
        p.dphi = p.dphi.rem_euclid(TAU);
        if p.dphi >= TAU {
            p.dphi = 0.0;
        }
    }
    Ok(PulseSequence {
        pulses,
        parametrization,
    })
}

/// Half of a time-symmetric sequence: durations and gaps in the order
/// `tau_1, g_1, tau_2, g_2, ...`, and one amplitude per distinct pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetricParams {
    pub durations: Vec<f64>,
    pub gaps: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub omega: f64,
}

impl SymmetricParams {
    pub fn new(durations: Vec<f64>, gaps: Vec<f64>, amplitudes: Vec<f64>, omega: f64) -> Self {
        Self {
            durations,
            gaps,
            amplitudes,
            omega,
        }
    }

    /// Number of pulses of the expanded sequence implied by the half lengths.
    pub fn n_pulses(&self) -> usize {
        if self.durations.len() > self.gaps.len() {
            2 * self.durations.len() - 1
        } else {
            2 * self.durations.len()
        }
    }
}

/// Mirrors the half sequence about its last element. For odd `n` the central
/// pulse is its own mirror image; for even `n` the last gap is the central gap.
pub fn expand_symmetric(p: &SymmetricParams, n_pulses: usize) -> Result<PulseSequence> {
    let n_dur = n_pulses.div_ceil(2);
    let n_gap = n_pulses / 2;
    if n_pulses == 0
        || p.durations.len() != n_dur
        || p.gaps.len() != n_gap
        || p.amplitudes.len() != n_dur
    {
        return Err(Error::InconsistentCounts(format!(
            "N = {n_pulses} needs {n_dur} durations, {n_gap} gaps and {n_dur} amplitudes; got {}, {}, {}",
            p.durations.len(),
            p.gaps.len(),
            p.amplitudes.len()
        )));
    }
    for (index, &d) in p.durations.iter().enumerate() {
        if !(d > 0.0) {
            return Err(Error::NonPositiveDuration { index, duration: d });
        }
    }
    if let Some(&g) = p.gaps.iter().find(|&&g| !(g >= 0.0)) {
        return Err(Error::NegativeGap(g));
    }

    // (is_pulse, length, amplitude) for the first half including the centre
    let mut half = Vec::with_capacity(n_dur + n_gap);
    for i in 0..n_dur {
        half.push((true, p.durations[i], p.amplitudes[i]));
        if i < n_gap {
            half.push((false, p.gaps[i], 0.0));
        }
    }
    let mirrored = half.iter().rev().skip(1).copied();
    let full: Vec<_> = half.iter().copied().chain(mirrored).collect();

    let mut t = 0.0;
    let mut pulses = Vec::with_capacity(n_pulses);
    for (is_pulse, len, amp) in full {
        if is_pulse {
            pulses.push(Pulse::new(t, len, amp, p.omega, 0.0));
        }
        t += len;
    }
    let tag = if p.amplitudes.windows(2).all(|w| w[0] == w[1]) && n_pulses > 1 {
        Parametrization::EqualAmplitude
    } else {
        Parametrization::Symmetric
    };
    validate(pulses, tag)
}

/// Contiguous segments sharing one frequency and zero phase offsets.
pub fn expand_shaped(durations: &[f64], amplitudes: &[f64], omega: f64) -> Result<PulseSequence> {
    if durations.is_empty() {
        return Err(Error::EmptySegments);
    }
    if durations.len() != amplitudes.len() {
        return Err(Error::InconsistentCounts(format!(
            "{} segment durations, {} amplitudes",
            durations.len(),
            amplitudes.len()
        )));
    }
    let mut t = 0.0;
    let mut pulses = Vec::with_capacity(durations.len());
    for (index, (&d, &a)) in durations.iter().zip(amplitudes).enumerate() {
        if !(d > 0.0) {
            return Err(Error::NonPositiveDuration { index, duration: d });
        }
        pulses.push(Pulse::new(t, d, a, omega, 0.0));
        t += d;
    }
    validate(pulses, Parametrization::Shaped)
}

/// A symmetric shaped pulse: the segments are mirrored about the last one, so
/// `k` half segments give `2k - 1` contiguous sections.
pub fn expand_shaped_symmetric(
    half_durations: &[f64],
    half_amplitudes: &[f64],
    omega: f64,
) -> Result<PulseSequence> {
    if half_durations.is_empty() {
        return Err(Error::EmptySegments);
    }
    let k = half_durations.len();
    let params = SymmetricParams::new(
        half_durations.to_vec(),
        vec![0.0; k - 1],
        half_amplitudes.to_vec(),
        omega,
    );
    Ok(expand_symmetric(&params, 2 * k - 1)?.with_parametrization(Parametrization::Shaped))
}
