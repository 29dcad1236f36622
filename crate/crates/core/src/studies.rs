//! Reproduction harnesses: the single-pulse scan, evaluation of the published
//! example sequences and the area-versus-time envelope of found solutions.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::{drive_for, normalize_psi, spin_echo, ConditionResiduals, GateAnalysis};
use crate::optimizer::{anneal_search, SearchConfig, Solution};
use crate::phasespace::orbit_trajectory;
use crate::sequence::{
    expand_shaped, expand_shaped_symmetric, expand_symmetric, Parametrization, Pulse, PulseSequence,
    SymmetricParams,
};
use crate::trap::{CouplingTable, Mode, SpinState, TrapConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanVariant {
    /// One pulse of duration `tau`.
    Single,
    /// Two pulses of `tau / 2` with a spin flip between them.
    SpinEcho,
}

impl ScanVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanVariant::Single => "single",
            ScanVariant::SpinEcho => "spin-echo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub tau_over_period: f64,
    pub variant: ScanVariant,
    /// `NaN` when no frequency in the window gave a positive `<Psi>`.
    pub omega_opt: f64,
    pub eps_avg: f64,
    pub eps_phi0: f64,
    /// Total pulse area of the normalized drive at `omega_opt`.
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn curve(&self, variant: ScanVariant) -> Vec<ScanRow> {
        self.rows.iter().filter(|r| r.variant == variant).copied().collect()
    }

    /// Interior local minima of `eps_avg` along one curve.
    pub fn local_minima(&self, variant: ScanVariant) -> Vec<ScanRow> {
        let c = self.curve(variant);
        c.windows(3)
            .filter(|w| w[1].eps_avg < w[0].eps_avg && w[1].eps_avg <= w[2].eps_avg)
            .map(|w| w[1])
            .collect()
    }
}

/// Frequency search window and resolution for [`single_pulse_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub omega_min: f64,
    pub omega_max: f64,
    /// Coarse grid points per `2 pi / tau` of frequency.
    pub oversample: f64,
    /// Coarse minima refined by golden-section search.
    pub refine: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            omega_min: 0.02,
            omega_max: 12.0,
            oversample: 16.0,
            refine: 6,
        }
    }
}

/// `(<eps>, eps(phi_o = 0), area)` of the normalized gate, `None` if
/// `<Psi> <= 0`.
fn scan_point(
    variant: ScanVariant,
    tau: f64,
    omega: f64,
    trap: &TrapConfig,
    coupling: &CouplingTable,
) -> Option<(f64, f64, f64)> {
    let analysis = match variant {
        ScanVariant::Single => {
            let seq = PulseSequence::new(vec![Pulse::new(0.0, tau, 1.0, omega, 0.0)], Parametrization::General).ok()?;
            GateAnalysis::new(&seq, trap, coupling)
        }
        ScanVariant::SpinEcho => {
            let seq =
                PulseSequence::new(vec![Pulse::new(0.0, 0.5 * tau, 1.0, omega, 0.0)], Parametrization::General).ok()?;
            spin_echo(&seq, trap, coupling, 0.0).ok()?.analysis
        }
    };
    let psi = analysis.mean_psi();
    if !(psi > 0.0 && psi.is_finite()) {
        return None;
    }
    let scale = (PI / psi).sqrt();
    let a = analysis.scaled(scale);
    Some((a.averaged_epsilon().total, a.metrics_at(0.0).epsilon, scale * tau))
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if b - a < 1e-12 * b.abs().max(1.0) {
            break;
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn optimize_omega(
    variant: ScanVariant,
    tau_over_period: f64,
    trap: &TrapConfig,
    coupling: &CouplingTable,
    opts: &ScanOptions,
) -> ScanRow {
    let tau = tau_over_period * TAU;
    let eps = |w: f64| scan_point(variant, tau, w, trap, coupling).map_or(f64::INFINITY, |v| v.0);
    let step = TAU / (tau * opts.oversample);
    let n = (((opts.omega_max - opts.omega_min) / step).ceil() as usize).max(2);
    let grid: Vec<f64> = (0..=n)
        .map(|k| opts.omega_min + (opts.omega_max - opts.omega_min) * k as f64 / n as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&w| eps(w)).collect();
    let mut minima: Vec<usize> = (0..=n)
        .filter(|&i| {
            let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
            let right = if i == n { f64::INFINITY } else { values[i + 1] };
            values[i].is_finite() && values[i] <= left && values[i] <= right
        })
        .collect();
    minima.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    minima.truncate(opts.refine);
    let mut best = (f64::NAN, f64::INFINITY);
    for i in minima {
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(n)];
        let (w, v) = golden(eps, lo, hi);
        let cand = if v <= values[i] { (w, v) } else { (grid[i], values[i]) };
        if cand.1 < best.1 {
            best = cand;
        }
    }
    let (omega_opt, eps_avg, eps_phi0, area) = match scan_point(variant, tau, best.0, trap, coupling) {
        Some((a, z, ar)) if best.0.is_finite() => (best.0, a, z, ar),
        _ => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
    };
    ScanRow {
        tau_over_period,
        variant,
        omega_opt,
        eps_avg,
        eps_phi0,
        area,
    }
}

/// For each gate time (in COM periods) the carrier frequency minimizing the
/// averaged infidelity of a single normalized pulse, and of the spin-echo
/// pair of half-length pulses.
pub fn single_pulse_scan(
    tau_grid: &[f64],
    trap: &TrapConfig,
    coupling: &CouplingTable,
    opts: &ScanOptions,
) -> ScanResult {
    let rows = tau_grid
        .par_iter()
        .flat_map_iter(|&t| {
            [ScanVariant::Single, ScanVariant::SpinEcho]
                .map(|v| optimize_omega(v, t, trap, coupling, opts))
        })
        .collect();
    ScanResult { rows }
}

/// Pulse area measured in units of the COM force amplitude `eta_c Omega / 2`
/// rather than the drive amplitude.
pub fn force_area(area: f64, trap: &TrapConfig) -> f64 {
    0.5 * trap.eta_c * area
}

/// Uniform grid `start, start + step, ...` up to and including `stop`, each
/// point rounded to 12 decimals so nominal values print as given.
pub fn tau_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| ((start + step * k as f64) * 1e12).round() / 1e12).collect()
}

/// Sampled orbit of the reference spin state on one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: Mode,
    pub phi_o: f64,
    pub points: Vec<(f64, num_complex::Complex64)>,
}

impl Trajectory {
    /// Endpoint distance from the origin relative to the largest excursion.
    pub fn closure(&self) -> f64 {
        let max = self.points.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
        let end = self.points.last().map_or(0.0, |p| p.1.norm());
        if max == 0.0 {
            0.0
        } else {
            end / max
        }
    }
}

/// Orbits of the reference states of both modes at the given optical phases.
pub fn trajectories(
    seq: &PulseSequence,
    trap: &TrapConfig,
    coupling: &CouplingTable,
    phases: &[f64],
    samples_per_pulse: usize,
) -> Vec<Trajectory> {
    let mut out = Vec::new();
    for &phi_o in phases {
        for mode in Mode::ALL {
            let g = coupling.force(SpinState::reference_for(mode), mode);
            let factors = vec![g; seq.len()];
            let (pulses, amps) = drive_for(seq.pulses(), &factors, -0.5 * trap.eta(mode));
            out.push(Trajectory {
                mode,
                phi_o,
                points: orbit_trajectory(&pulses, trap.freq(mode), &amps, phi_o, samples_per_pulse),
            });
        }
    }
    out
}

/// One evaluated example sequence.
#[derive(Debug, Clone)]
pub struct PublishedEntry {
    pub label: &'static str,
    pub description: &'static str,
    /// As printed (relative amplitudes).
    pub raw: PulseSequence,
    pub normalized: PulseSequence,
    /// Amplitude factor that set `<Psi> = pi`.
    pub scale: f64,
    pub psi_raw: f64,
    pub eps_avg: f64,
    /// `max - min` of `eps(phi_o)` over 64 phases.
    pub eps_spread: f64,
    pub residuals: ConditionResiduals,
    pub tau_over_period: f64,
    pub area: f64,
    /// Orbits at `phi_o = 0` and `pi/2`.
    pub trajectories: Vec<Trajectory>,
}

#[derive(Debug, Clone)]
pub struct PublishedReport {
    pub entries: Vec<PublishedEntry>,
    /// Label of the reading of the shaped example adopted as headline.
    pub shaped_headline: Option<&'static str>,
}

impl PublishedReport {
    pub fn get(&self, label: &str) -> Option<&PublishedEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// The example sequences with the parameters printed for them.
pub fn published_sequences() -> Result<Vec<(&'static str, &'static str, PulseSequence)>> {
    Ok(vec![
        (
            "four-pulse",
            "symmetric N=4, equal amplitudes, omega = 4.0376",
            expand_symmetric(
                &SymmetricParams::new(vec![0.524696, 1.02264], vec![2.60288, 2.60407], vec![1.0, 1.0], 4.0376),
                4,
            )?,
        ),
        (
            "five-pulse",
            "symmetric N=5, omega = 20.4761",
            expand_symmetric(
                &SymmetricParams::new(
                    vec![0.0953071, 0.288972, 0.269998],
                    vec![0.0305622, 0.272151],
                    vec![1.0, 2.91057, 3.59685],
                    20.4761,
                ),
                5,
            )?,
        ),
        (
            "six-pulse",
            "symmetric N=6, omega = 1.36603; timings read as tau1, g1, tau2, g2, tau3, central gap",
            expand_symmetric(
                &SymmetricParams::new(
                    vec![0.984464, 1.04219, 1.0990],
                    vec![1.6124, 0.00031, 1.7475],
                    vec![0.6786, -0.4002, -0.5528],
                    1.36603,
                ),
                6,
            )?,
        ),
        (
            "shaped-three",
            "shaped pulse, the three listed segments in order, omega = 2.60258",
            expand_shaped(&[1.0168, 2.3997, 1.5416], &[0.5415, 0.9561, 1.1280], 2.60258)?,
        ),
        (
            "shaped-five",
            "shaped pulse, the listed segments mirrored about the last one (5 sections), omega = 2.60258",
            expand_shaped_symmetric(&[1.0168, 2.3997, 1.5416], &[0.5415, 0.9561, 1.1280], 2.60258)?,
        ),
    ])
}

/// Normalizes and evaluates one sequence.
pub fn evaluate_sequence(
    label: &'static str,
    description: &'static str,
    raw: PulseSequence,
    trap: &TrapConfig,
    coupling: &CouplingTable,
) -> Result<PublishedEntry> {
    let norm = normalize_psi(&raw, trap, coupling)?;
    let analysis = GateAnalysis::new(&norm.sequence, trap, coupling);
    let grid: Vec<f64> = (0..64).map(|k| analysis.metrics_at(TAU * k as f64 / 64.0).epsilon).collect();
    let spread = grid.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - grid.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Ok(PublishedEntry {
        label,
        description,
        eps_avg: analysis.averaged_epsilon().total,
        eps_spread: spread,
        residuals: analysis.residuals(),
        tau_over_period: norm.sequence.duration_over_period(),
        area: norm.sequence.total_area(),
        trajectories: trajectories(&norm.sequence, trap, coupling, &[0.0, PI / 2.0], 64),
        psi_raw: norm.psi_before,
        scale: norm.scale,
        normalized: norm.sequence,
        raw,
    })
}

/// Builds, normalizes and evaluates every example sequence. The shaped example
/// is evaluated under both readings of its segment list; the headline is the
/// first reading with `<eps> < 1e-4`.
pub fn evaluate_published(trap: &TrapConfig, coupling: &CouplingTable) -> Result<PublishedReport> {
    let entries = published_sequences()?
        .into_iter()
        .map(|(label, description, seq)| evaluate_sequence(label, description, seq, trap, coupling))
        .collect::<Result<Vec<_>>>()?;
    let shaped_headline = entries
        .iter()
        .filter(|e| matches!(e.label, "shaped-three" | "shaped-five"))
        .find(|e| e.eps_avg < 1e-4)
        .map(|e| e.label);
    Ok(PublishedReport {
        entries,
        shaped_headline,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub n_pulses: usize,
    pub tau_over_period: f64,
    pub area: f64,
    pub eps: f64,
    pub parametrization: Parametrization,
}

impl From<&Solution> for ParetoRow {
    fn from(s: &Solution) -> Self {
        Self {
            n_pulses: s.sequence.len(),
            tau_over_period: s.tau_over_period(),
            area: s.area,
            eps: s.epsilon,
            parametrization: s.parametrization,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoResult {
    /// Every input row, sorted by gate time.
    pub rows: Vec<ParetoRow>,
    /// Rows not beaten in area by any faster row.
    pub envelope: Vec<ParetoRow>,
    /// Least-squares slope of `ln(area)` against `ln(tau)` over the envelope
    /// rows faster than `fit_below` periods.
    pub slope: f64,
    pub intercept: f64,
    pub fit_points: usize,
    pub fit_below: f64,
}

/// Lower envelope of area against gate time and its log-log slope in the
/// fast region (`tau / T_c < fit_below`).
pub fn pareto_area_vs_tau(rows: &[ParetoRow], fit_below: f64) -> Result<ParetoResult> {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| a.tau_over_period.total_cmp(&b.tau_over_period).then(a.area.total_cmp(&b.area)));
    let fast = rows.iter().filter(|r| r.tau_over_period < fit_below).count();
    if fast < 5 {
        return Err(Error::InsufficientData(format!(
            "{fast} solutions faster than {fit_below} periods; at least 5 are needed"
        )));
    }
    let mut envelope: Vec<ParetoRow> = Vec::new();
    for r in &rows {
        if envelope.last().is_none_or(|e| r.area < e.area) {
            envelope.push(r.clone());
        }
    }
    let pts: Vec<(f64, f64)> = envelope
        .iter()
        .filter(|r| r.tau_over_period < fit_below)
        .map(|r| ((r.tau_over_period * TAU).ln(), r.area.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} envelope points faster than {fit_below} periods; at least 2 are needed",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("envelope points share one gate time".into()));
    }
    let slope = sxy / sxx;
    Ok(ParetoResult {
        rows,
        envelope,
        slope,
        intercept: my - slope * mx,
        fit_points: pts.len(),
        fit_below,
    })
}

/// Symmetric five-pulse search for gates shorter than one COM period.
pub fn fast_five_pulse_config(restarts: usize, seed: u64) -> SearchConfig {
    SearchConfig {
        n_pulses: 5,
        parametrization: Parametrization::Symmetric,
        omega_bounds: [10.0, 25.0],
        duration_bounds: [0.02, 0.5],
        gap_bounds: [0.0, 0.5],
        max_duration: Some(TAU),
        restarts,
        seed,
        ..SearchConfig::default()
    }
}

/// Symmetric four-pulse search for gates of about two COM periods.
pub fn four_pulse_config(restarts: usize, seed: u64) -> SearchConfig {
    SearchConfig {
        n_pulses: 4,
        parametrization: Parametrization::Symmetric,
        omega_bounds: [0.5, 12.0],
        duration_bounds: [0.05, 3.0],
        gap_bounds: [0.0, 3.0],
        max_duration: Some(2.5 * TAU),
        restarts,
        seed,
        ..SearchConfig::default()
    }
}

/// Search windows used to populate the area-versus-time plot: symmetric
/// sequences of four to six pulses with the total time capped at several
/// values below two COM periods.
pub fn pareto_campaign_configs(seed: u64, restarts: usize) -> Vec<SearchConfig> {
    let mut out = Vec::new();
    for (n, caps) in [(5usize, &[0.35, 0.5, 0.75, 1.0, 1.5, 2.0][..]), (6, &[0.5, 1.0, 2.0][..]), (4, &[2.0][..])] {
        for &cap in caps {
            let tau = cap * TAU;
            out.push(SearchConfig {
                n_pulses: n,
                parametrization: Parametrization::Symmetric,
                omega_bounds: [0.5, 25.0],
                duration_bounds: [0.01, tau / 2.0],
                gap_bounds: [0.0, tau / 2.0],
                max_duration: Some(tau),
                restarts,
                seed: seed.wrapping_add(out.len() as u64),
                ..SearchConfig::default()
            });
        }
    }
    out
}

/// Runs every configuration of [`pareto_campaign_configs`] and merges the
/// solutions.
pub fn pareto_campaign(
    seed: u64,
    restarts: usize,
    trap: &TrapConfig,
    coupling: &CouplingTable,
) -> Result<Vec<Solution>> {
    let mut all = Vec::new();
    for c in pareto_campaign_configs(seed, restarts) {
        all.extend(anneal_search(&c, trap, coupling)?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_files_match_builders() {
        let read = |name: &str| -> SearchConfig {
            let path = format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"));
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
        };
        assert_eq!(read("n5_symmetric.json"), fast_five_pulse_config(8, 7));
        assert_eq!(read("n4_symmetric.json"), four_pulse_config(8, 7));
    }

    #[test]
    fn grid_is_inclusive() {
        let g = tau_grid(1.0, 2.0, 0.25);
        assert_eq!(g.len(), 5);
        assert!((g[4] - 2.0).abs() < 1e-12);
        assert!(tau_grid(1.0, 0.5, 0.1).is_empty());
    }

    #[test]
    fn empty_scan() {
        let r = single_pulse_scan(&[], &TrapConfig::default(), &CouplingTable::canonical(), &ScanOptions::default());
        assert!(r.rows.is_empty());
    }

    #[test]
    fn envelope_is_non_increasing() {
        let rows: Vec<ParetoRow> = [(0.3, 900.0), (0.5, 500.0), (0.4, 950.0), (0.8, 200.0), (1.0, 250.0), (1.5, 90.0)]
            .iter()
            .map(|&(t, a)| ParetoRow {
                n_pulses: 5,
                tau_over_period: t,
                area: a,
                eps: 1e-9,
                parametrization: Parametrization::Symmetric,
            })
            .collect();
        let p = pareto_area_vs_tau(&rows, 2.0).unwrap();
        assert!(p.envelope.windows(2).all(|w| w[1].area < w[0].area));
        assert_eq!(p.envelope.len(), 4);
        assert!(p.slope < 0.0);
        assert!(pareto_area_vs_tau(&rows[..3], 2.0).is_err());
    }

    #[test]
    fn exact_power_law_slope() {
        let rows: Vec<ParetoRow> = (1..=6)
            .map(|k| {
                let t = 0.25 * k as f64;
                ParetoRow {
                    n_pulses: 5,
                    tau_over_period: t,
                    area: 7.0 * (t * TAU).powf(-1.5),
                    eps: 0.0,
                    parametrization: Parametrization::Symmetric,
                }
            })
            .collect();
        let p = pareto_area_vs_tau(&rows, 2.0).unwrap();
        assert!((p.slope + 1.5).abs() < 1e-12);
    }
}
