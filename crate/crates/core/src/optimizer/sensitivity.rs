use serde::{Deserialize, Serialize};

use super::retune::retune_frequency;
use crate::error::{Error, Result};
use crate::fidelity::averaged_epsilon;
use crate::sequence::{Pulse, PulseSequence};
use crate::trap::{CouplingTable, TrapConfig};

/// Which parameter a sensitivity scan perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamSelector {
    /// Every pulse duration, gaps unchanged.
    Durations,
    /// Every pulse amplitude.
    Amplitudes,
    /// Every gap between pulses.
    Gaps,
    Omega,
    Duration(usize),
    Amplitude(usize),
}

impl ParamSelector {
    pub fn label(&self) -> String {
        match self {
            ParamSelector::Durations => "durations".into(),
            ParamSelector::Amplitudes => "amplitudes".into(),
            ParamSelector::Gaps => "gaps".into(),
            ParamSelector::Omega => "omega".into(),
            ParamSelector::Duration(n) => format!("duration-{n}"),
            ParamSelector::Amplitude(n) => format!("amplitude-{n}"),
        }
    }
}

/// Copy of `seq` with the selected parameter multiplied by `factor`. Timings
/// are rebuilt so that the unselected durations and gaps stay fixed.
pub fn perturb(seq: &PulseSequence, selector: ParamSelector, factor: f64) -> Result<PulseSequence> {
    let pulses = seq.pulses();
    let n = pulses.len();
    let check = |k: usize| {
        if k < n {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("pulse index {k} out of range for {n} pulses")))
        }
    };
    match selector {
        ParamSelector::Amplitudes => return Ok(seq.scaled(factor)),
        ParamSelector::Amplitude(k) => {
            check(k)?;
            let mut amps = seq.amplitudes();
            amps[k] *= factor;
            return seq.with_amplitudes(&amps);
        }
        ParamSelector::Omega => return Ok(seq.with_omega(pulses.first().map_or(0.0, |p| p.omega) * factor)),
        ParamSelector::Duration(k) => check(k)?,
        ParamSelector::Durations | ParamSelector::Gaps => {}
    }
    let mut out: Vec<Pulse> = Vec::with_capacity(n);
    let mut t = 0.0;
    for (i, p) in pulses.iter().enumerate() {
        if i > 0 {
            let gap = p.t_start - pulses[i - 1].t_end();
            t += if selector == ParamSelector::Gaps { gap * factor } else { gap };
        }
        let d = match selector {
            ParamSelector::Durations => p.duration * factor,
            ParamSelector::Duration(k) if k == i => p.duration * factor,
            _ => p.duration,
        };
        out.push(Pulse {
            t_start: t,
            duration: d,
            ..*p
        });
        t += d;
    }
    PulseSequence::new(out, seq.parametrization())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityFit {
    pub selector: ParamSelector,
    pub baseline: f64,
    /// `(sigma, <eps>)` per probe.
    pub points: Vec<(f64, f64)>,
    /// Curvature in `<eps> - baseline = c sigma^2`.
    pub c: f64,
    pub r_squared: f64,
    /// `r_squared >= 0.99`.
    pub quadratic: bool,
}

/// Half width of the retuning window in units of `sigma * omega`.
pub const RETUNE_WINDOW: f64 = 5.0;

/// Perturbs the selected parameter by each fractional `sigma`, re-evaluates
/// the averaged infidelity and fits `<eps> = baseline + c sigma^2` by least
/// squares. With `retune` the shared carrier frequency is moved to the zero of
/// `theta+` nearest to it (within `RETUNE_WINDOW * sigma` fractionally), as one
/// would in the laboratory; the move is kept only if it lowers `<eps>`.
pub fn sensitivity_scan(
    seq: &PulseSequence,
    trap: &TrapConfig,
    coupling: &CouplingTable,
    selector: ParamSelector,
    sigmas: &[f64],
    retune: bool,
) -> Result<SensitivityFit> {
    let baseline = averaged_epsilon(seq, trap, coupling);
    let mut points = Vec::with_capacity(sigmas.len());
    for &s in sigmas {
        let p = perturb(seq, selector, 1.0 + s)?;
        let mut eps = averaged_epsilon(&p, trap, coupling);
        if retune && s != 0.0 && selector != ParamSelector::Omega && !p.is_empty() {
            let w = p.pulses()[0].omega;
            let half = RETUNE_WINDOW * s.abs() * w;
            if let Ok(r) = retune_frequency(&p, trap, coupling, [w - half, w + half]) {
                eps = eps.min(averaged_epsilon(&p.with_omega(r.omega), trap, coupling));
            }
        }
        points.push((s, eps));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(s, _)| *s != 0.0)
        .map(|&(s, e)| (s * s, e - baseline))
        .collect();
    if xy.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "sensitivity fit needs two non-zero sigmas, got {}",
            xy.len()
        )));
    }
    let sxx: f64 = xy.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = xy.iter().map(|(x, y)| x * y).sum();
    let c = sxy / sxx;
    let mean = xy.iter().map(|(_, y)| y).sum::<f64>() / xy.len() as f64;
    let ss_res: f64 = xy.iter().map(|(x, y)| (y - c * x).powi(2)).sum();
    let ss_tot: f64 = xy.iter().map(|(_, y)| (y - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(SensitivityFit {
        selector,
        baseline,
        points,
        c,
        r_squared,
        quadratic: r_squared >= 0.99,
    })
}
