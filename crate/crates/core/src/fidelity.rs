//! Gate-level bookkeeping: per spin state phases, the conditional phase `Psi`,
//! single-qubit angles, the small-error infidelity and its optical-phase
//! average.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phasespace::{accumulate_totals, lightshift_theta_plus, OrbitTotals};
use crate::sequence::{Pulse, PulseSequence};
use crate::trap::{CouplingTable, Mode, SpinState, TrapConfig};

/// Infidelity values above this are outside the small-error expansion.
pub const INDICATIVE_EPSILON: f64 = 0.1;

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Effective pulses and amplitudes seen by one (state, mode) pair. A complex
/// coupling factor's argument is folded into the pulse phase offsets.
pub(crate) fn drive_for(pulses: &[Pulse], factors: &[Complex64], scale: f64) -> (Vec<Pulse>, Vec<f64>) {
    let mut out_pulses = Vec::with_capacity(pulses.len());
    let mut amps = Vec::with_capacity(pulses.len());
    for (p, g) in pulses.iter().zip(factors) {
        if g.im == 0.0 {
            out_pulses.push(*p);
            amps.push(scale * g.re * p.amplitude);
        } else {
            out_pulses.push(Pulse {
                dphi: p.dphi + g.arg(),
                ..*p
            });
            amps.push(scale * g.norm() * p.amplitude);
        }
    }
    (out_pulses, amps)
}

/// The common value of `f(0..n)` when every entry is equal (zero when `n = 0`).
fn uniform(n: usize, f: impl Fn(usize) -> Complex64) -> Option<Complex64> {
    if n == 0 {
        return Some(Complex64::default());
    }
    let g = f(0);
    (1..n).all(|k| f(k) == g).then_some(g)
}

/// Closed-form optical-phase independent results for every spin state.
#[derive(Debug, Clone)]
pub struct GateAnalysis {
    trap: TrapConfig,
    /// `orbits[state][mode]`
    pub orbits: [[OrbitTotals; 2]; 4],
    /// Light-shift amplitude `theta+` per state.
    pub theta_plus: [Complex64; 4],
}

/// Breakdown of the optical-phase averaged infidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedEpsilon {
    pub displacement: f64,
    /// `(<Psi> - pi)^2 / 9`
    pub psi_bias: f64,
    /// `Var(Psi) / 9`
    pub psi_variance: f64,
    /// `(Var(theta1) + Var(theta2)) / 5`
    pub single_qubit: f64,
    pub total: f64,
}

impl GateAnalysis {
    pub fn new(seq: &PulseSequence, trap: &TrapConfig, coupling: &CouplingTable) -> Self {
        Self::with_state_map(seq.pulses(), trap, coupling, |_, m| m)
    }

    /// General form: pulse `n` couples state `m` as if it were state
    /// `state_map(n, m)` (used for spin echoes).
    pub fn with_state_map(
        pulses: &[Pulse],
        trap: &TrapConfig,
        coupling: &CouplingTable,
        state_map: impl Fn(usize, SpinState) -> SpinState,
    ) -> Self {
        let n = pulses.len();
        // orbit per mode at unit coupling, shared by every state whose
        // coupling is one constant factor across the train
        let mut unit: [Option<OrbitTotals>; 2] = [None, None];
        let mut unit_ls: Option<Complex64> = None;
        let mut orbits = [[OrbitTotals::default(); 2]; 4];
        let mut theta_plus = [Complex64::default(); 4];
        let mut amps = vec![0.0; n];
        for m in SpinState::ALL {
            for mode in Mode::ALL {
                let factor = |k: usize| coupling.force(state_map(k, m), mode);
                let scale = -0.5 * trap.eta(mode);
                orbits[m.index()][mode.index()] = match uniform(n, factor) {
                    Some(g) if g == Complex64::default() => OrbitTotals::default(),
                    Some(g) => {
                        let base = unit[mode.index()].get_or_insert_with(|| {
                            for (a, p) in amps.iter_mut().zip(pulses) {
                                *a = scale * p.amplitude;
                            }
                            accumulate_totals(pulses, trap.freq(mode), &amps)
                        });
                        if g.im == 0.0 {
                            base.scaled(g.re)
                        } else {
                            base.rotated(g.arg()).scaled(g.norm())
                        }
                    }
                    None => {
                        let factors: Vec<Complex64> = (0..n).map(factor).collect();
                        let (p, a) = drive_for(pulses, &factors, scale);
                        accumulate_totals(&p, trap.freq(mode), &a)
                    }
                };
            }
            let ls = |k: usize| coupling.light_shift(state_map(k, m));
            theta_plus[m.index()] = match uniform(n, ls) {
                Some(g) if g == Complex64::default() => Complex64::default(),
                Some(g) => {
                    let base = *unit_ls.get_or_insert_with(|| {
                        for (a, p) in amps.iter_mut().zip(pulses) {
                            *a = p.amplitude;
                        }
                        lightshift_theta_plus(pulses, &amps)
                    });
                    g * base
                }
                None => {
                    let factors: Vec<Complex64> = (0..n).map(ls).collect();
                    let (p, a) = drive_for(pulses, &factors, 1.0);
                    lightshift_theta_plus(&p, &a)
                }
            };
        }
        Self {
            trap: *trap,
            orbits,
            theta_plus,
        }
    }

    /// Analysis of the same train with every amplitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            trap: self.trap,
            orbits: self.orbits.map(|o| [o[0].scaled(s), o[1].scaled(s)]),
            theta_plus: self.theta_plus.map(|t| t * s),
        }
    }

    pub fn orbit(&self, state: SpinState, mode: Mode) -> &OrbitTotals {
        &self.orbits[state.index()][mode.index()]
    }

    /// Optical-phase mean of the orbit phase of `state`.
    fn mean_phase(&self, state: SpinState) -> f64 {
        Mode::ALL.iter().map(|&l| self.orbit(state, l).i0.im).sum()
    }

    /// Coefficients `(c, K, L)` of a weighted combination of state phases,
    /// `f(phi) = c + Im[e^{2i phi} K] + 2 Re[e^{i phi} L]`.
    fn harmonics(&self, weight: impl Fn(SpinState) -> f64) -> (f64, Complex64, Complex64) {
        let mut c = 0.0;
        let mut k = Complex64::default();
        let mut l = Complex64::default();
        for m in SpinState::ALL {
            let w = weight(m);
            if w == 0.0 {
                continue;
            }
            c += w * self.mean_phase(m);
            for mode in Mode::ALL {
                k += w * self.orbit(m, mode).area_residual();
            }
            l += w * self.theta_plus[m.index()];
        }
        (c, k, l)
    }

    /// `<Psi>` over the optical phase.
    pub fn mean_psi(&self) -> f64 {
        self.harmonics(SpinState::psi_sign).0
    }

    pub fn averaged_epsilon(&self) -> AveragedEpsilon {
        let mut displacement = 0.0;
        for m in SpinState::ALL {
            for mode in Mode::ALL {
                let w = (1.0 + 2.0 * self.trap.nbar(mode)) / 4.0;
                displacement += w * self.orbit(m, mode).mean_sq_displacement();
            }
        }
        let var = |k: Complex64, l: Complex64| 0.5 * k.norm_sqr() + 2.0 * l.norm_sqr();
        let (psi_mean, kp, lp) = self.harmonics(SpinState::psi_sign);
        let (_, k1, l1) = self.harmonics(|m| m.theta_weights().0);
        let (_, k2, l2) = self.harmonics(|m| m.theta_weights().1);
        let psi_bias = (psi_mean - PI).powi(2) / 9.0;
        let psi_variance = var(kp, lp) / 9.0;
        let single_qubit = (var(k1, l1) + var(k2, l2)) / 5.0;
        AveragedEpsilon {
            displacement,
            psi_bias,
            psi_variance,
            single_qubit,
            total: displacement + psi_bias + psi_variance + single_qubit,
        }
    }

    pub fn metrics_at(&self, phi_o: f64) -> GateMetrics {
        let mut delta_alpha = [[Complex64::default(); 2]; 4];
        let mut phi = [0.0; 4];
        let mut displacement = 0.0;
        for m in SpinState::ALL {
            let mut total = 0.0;
            for mode in Mode::ALL {
                let (da, area_phase) = self.orbit(m, mode).compose(phi_o);
                delta_alpha[m.index()][mode.index()] = da;
                displacement += (1.0 + 2.0 * self.trap.nbar(mode)) / 4.0 * da.norm_sqr();
                total += area_phase;
            }
            total += 2.0 * (cis(phi_o) * self.theta_plus[m.index()]).re;
            phi[m.index()] = total;
        }
        let combine = |w: &dyn Fn(SpinState) -> f64| -> f64 {
            SpinState::ALL.iter().map(|&m| w(m) * phi[m.index()]).sum()
        };
        let psi = combine(&SpinState::psi_sign);
        let theta1 = combine(&|m: SpinState| m.theta_weights().0);
        let theta2 = combine(&|m: SpinState| m.theta_weights().1);
        let theta1_mean = self.harmonics(|m| m.theta_weights().0).0;
        let theta2_mean = self.harmonics(|m| m.theta_weights().1).0;
        let d_psi = psi - PI;
        let dt1 = theta1 - theta1_mean;
        let dt2 = theta2 - theta2_mean;
        let epsilon = displacement + d_psi * d_psi / 9.0 + (dt1 * dt1 + dt2 * dt2) / 5.0;
        GateMetrics {
            phi_o,
            delta_alpha,
            phi,
            psi,
            theta1,
            theta2,
            d_psi,
            epsilon,
        }
    }

    /// The seven complex numbers that must vanish, evaluated for the
    /// reference states (`UpUp` for COM and light shift, `UpDown` for stretch).
    pub fn residuals(&self) -> ConditionResiduals {
        let c = self.orbit(SpinState::reference_for(Mode::Com), Mode::Com);
        let s = self.orbit(SpinState::reference_for(Mode::Stretch), Mode::Stretch);
        ConditionResiduals {
            dac_plus: c.delta_alpha_plus,
            dac_minus: c.delta_alpha_minus,
            das_plus: s.delta_alpha_plus,
            das_minus: s.delta_alpha_minus,
            theta_plus: self.theta_plus[SpinState::UpUp.index()],
            area_c: c.area_residual(),
            area_s: s.area_residual(),
        }
    }
}

/// Gate quantities at one optical phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateMetrics {
    pub phi_o: f64,
    /// `delta_alpha[state][mode]`
    pub delta_alpha: [[Complex64; 2]; 4],
    /// Total phase per state: orbit areas plus light shift.
    pub phi: [f64; 4],
    pub psi: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub d_psi: f64,
    pub epsilon: f64,
}

impl GateMetrics {
    pub fn phase(&self, state: SpinState) -> f64 {
        self.phi[state.index()]
    }

    /// True when the value lies outside the small-error regime.
    pub fn indicative(&self) -> bool {
        self.epsilon > INDICATIVE_EPSILON
    }
}

/// Displacement, light-shift and area conditions for optical-phase
/// insensitivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionResiduals {
    pub dac_plus: Complex64,
    pub dac_minus: Complex64,
    pub das_plus: Complex64,
    pub das_minus: Complex64,
    pub theta_plus: Complex64,
    pub area_c: Complex64,
    pub area_s: Complex64,
}

impl ConditionResiduals {
    pub fn as_array(&self) -> [Complex64; 7] {
        [
            self.dac_plus,
            self.dac_minus,
            self.das_plus,
            self.das_minus,
            self.theta_plus,
            self.area_c,
            self.area_s,
        ]
    }

    pub fn names() -> [&'static str; 7] {
        ["dac_plus", "dac_minus", "das_plus", "das_minus", "theta_plus", "area_c", "area_s"]
    }

    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest residual ignoring the light-shift condition.
    pub fn max_abs_without_light_shift(&self) -> f64 {
        let mut a = self.as_array();
        a[4] = Complex64::default();
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn gate_metrics(
    seq: &PulseSequence,
    trap: &TrapConfig,
    coupling: &CouplingTable,
    phi_o: f64,
) -> GateMetrics {
    GateAnalysis::new(seq, trap, coupling).metrics_at(phi_o)
}

/// Closed-form uniform optical-phase average of the infidelity.
pub fn averaged_epsilon(seq: &PulseSequence, trap: &TrapConfig, coupling: &CouplingTable) -> f64 {
    GateAnalysis::new(seq, trap, coupling).averaged_epsilon().total
}

pub fn condition_residuals(
    seq: &PulseSequence,
    trap: &TrapConfig,
    coupling: &CouplingTable,
) -> ConditionResiduals {
    GateAnalysis::new(seq, trap, coupling).residuals()
}

/// A sequence rescaled so that `<Psi> = pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub sequence: PulseSequence,
    /// Amplitude factor applied; orbit phases scale as its square, light-shift
    /// amplitudes linearly.
    pub scale: f64,
    pub psi_before: f64,
}

pub fn normalize_psi(seq: &PulseSequence, trap: &TrapConfig, coupling: &CouplingTable) -> Result<Normalized> {
    let psi = GateAnalysis::new(seq, trap, coupling).mean_psi();
    if !(psi.is_finite() && psi > 0.0) {
        return Err(Error::NotNormalizable(psi));
    }
    let scale = (PI / psi).sqrt();
    Ok(Normalized {
        sequence: seq.scaled(scale),
        scale,
        psi_before: psi,
    })
}

/// A sequence applied twice with an instantaneous spin flip in between.
#[derive(Debug, Clone)]
pub struct SpinEcho {
    /// Both passes; the second is the first translated by `tau + gap`.
    pub pulses: Vec<Pulse>,
    pub n_first: usize,
    pub duration: f64,
    pub analysis: GateAnalysis,
}

impl SpinEcho {
    pub fn averaged_epsilon(&self) -> f64 {
        self.analysis.averaged_epsilon().total
    }

    pub fn metrics_at(&self, phi_o: f64) -> GateMetrics {
        self.analysis.metrics_at(phi_o)
    }

    /// Residual set of the composite; the light-shift condition is not part of
    /// it and is reported as zero.
    pub fn residuals(&self) -> ConditionResiduals {
        ConditionResiduals {
            theta_plus: Complex64::default(),
            ..self.analysis.residuals()
        }
    }
}

pub fn spin_echo(seq: &PulseSequence, trap: &TrapConfig, coupling: &CouplingTable, gap: f64) -> Result<SpinEcho> {
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(Error::NegativeGap(gap));
    }
    let tau = seq.duration();
    let shift = tau + gap;
    let n_first = seq.len();
    let pulses: Vec<Pulse> = seq
        .pulses()
        .iter()
        .copied()
        .chain(seq.pulses().iter().map(|p| p.translated(shift)))
        .collect();
    let analysis = GateAnalysis::with_state_map(&pulses, trap, coupling, |n, m| {
        if n < n_first {
            m
        } else {
            m.flip()
        }
    });
    Ok(SpinEcho {
        pulses,
        n_first,
        duration: if n_first == 0 { 0.0 } else { 2.0 * tau + gap },
        analysis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{expand_symmetric, Parametrization, SymmetricParams};
    use std::f64::consts::TAU;

    fn five_pulse() -> PulseSequence {
        expand_symmetric(
            &SymmetricParams::new(
                vec![0.0953071, 0.288972, 0.269998],
                vec![0.0305622, 0.272151],
                vec![1.0, 2.91057, 3.59685],
                20.4761,
            ),
            5,
        )
        .unwrap()
    }

    fn generic() -> PulseSequence {
        PulseSequence::new(
            vec![
                Pulse::new(0.0, 1.1, 4.0, 2.3, 0.0),
                Pulse::new(1.4, 0.6, -7.0, 2.3, 0.5),
                Pulse::new(2.5, 0.9, 3.0, 2.9, 1.0),
            ],
            Parametrization::General,
        )
        .unwrap()
    }

    #[test]
    fn zero_drive_epsilon_is_pi_squared_over_nine() {
        let seq = PulseSequence::new(vec![Pulse::new(0.0, 1.0, 0.0, 3.0, 0.0)], Parametrization::General).unwrap();
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let m = gate_metrics(&seq, &trap, &c, 0.7);
        assert!((m.epsilon - PI * PI / 9.0).abs() < 1e-15);
        assert!((averaged_epsilon(&seq, &trap, &c) - PI * PI / 9.0).abs() < 1e-15);
        assert!(condition_residuals(&seq, &trap, &c).max_abs() == 0.0);
        let empty = PulseSequence::empty();
        assert!((averaged_epsilon(&empty, &trap, &c) - PI * PI / 9.0).abs() < 1e-15);
    }

    #[test]
    fn psi_and_theta_definitions() {
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let m = gate_metrics(&generic(), &trap, &c, 0.4);
        let p = |s: SpinState| m.phase(s);
        use SpinState::*;
        let psi = p(UpUp) + p(DownDown) - p(UpDown) - p(DownUp);
        assert!((m.psi - psi).abs() < 1e-12);
        let t1 = ((p(UpUp) - p(DownDown)) + (p(UpDown) - p(DownUp))) / 2.0;
        let t2 = ((p(UpUp) - p(DownDown)) - (p(UpDown) - p(DownUp))) / 2.0;
        assert!((m.theta1 - t1).abs() < 1e-12 && (m.theta2 - t2).abs() < 1e-12);
        assert!(m.epsilon >= 0.0);
    }

    #[test]
    fn averaged_matches_grid_mean() {
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let seq = generic();
        let a = GateAnalysis::new(&seq, &trap, &c);
        let n = 64;
        let mean: f64 = (0..n).map(|k| a.metrics_at(TAU * k as f64 / n as f64).epsilon).sum::<f64>() / n as f64;
        let closed = a.averaged_epsilon().total;
        assert!((mean - closed).abs() < 1e-8 * closed.max(1.0), "{mean} {closed}");
    }

    #[test]
    fn theta_means_vanish_for_canonical_table() {
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let a = GateAnalysis::new(&generic(), &trap, &c);
        let n = 64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 0..n {
            let m = a.metrics_at(TAU * k as f64 / n as f64);
            s1 += m.theta1;
            s2 += m.theta2;
        }
        assert!((s1 / n as f64).abs() < 1e-12);
        assert!((s2 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn normalization_scales() {
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let seq = five_pulse();
        let n = normalize_psi(&seq, &trap, &c).unwrap();
        let after = GateAnalysis::new(&n.sequence, &trap, &c).mean_psi();
        assert!((after - PI).abs() < 1e-12);
        let again = normalize_psi(&n.sequence, &trap, &c).unwrap();
        assert!((again.scale - 1.0).abs() < 1e-12);
        // <Psi> = pi/4 -> s = 2
        let quarter = n.sequence.scaled(0.5);
        let q = normalize_psi(&quarter, &trap, &c).unwrap();
        assert!((q.psi_before - PI / 4.0).abs() < 1e-12);
        assert!((q.scale - 2.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_rejects_nonpositive_psi() {
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let zero = PulseSequence::new(vec![Pulse::new(0.0, 1.0, 0.0, 3.0, 0.0)], Parametrization::General).unwrap();
        assert!(matches!(normalize_psi(&zero, &trap, &c), Err(Error::NotNormalizable(_))));
    }

    #[test]
    fn spin_echo_duration_and_light_shift_cancellation() {
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let seq = normalize_psi(&five_pulse(), &trap, &c).unwrap().sequence;
        let single = GateAnalysis::new(&seq, &trap, &c);
        assert!(single.theta_plus[0].norm() > 1e-3);
        let echo = spin_echo(&seq, &trap, &c, 0.37).unwrap();
        assert!((echo.duration - (2.0 * seq.duration() + 0.37)).abs() < 1e-14);
        for k in 0..32 {
            let m = echo.metrics_at(TAU * k as f64 / 32.0);
            let ls_part = |s: SpinState| 2.0 * (cis(m.phi_o) * echo.analysis.theta_plus[s.index()]).re;
            assert!(ls_part(SpinState::UpUp).abs() < 1e-12);
            assert!(ls_part(SpinState::DownDown).abs() < 1e-12);
        }
        assert_eq!(echo.residuals().theta_plus, Complex64::default());
    }

    #[test]
    fn complex_coupling_phase_equals_rotated_summary() {
        let trap = TrapConfig::default();
        let phase = 0.83;
        let g = cis(phase);
        let zero = Complex64::default();
        let mut force = [[zero; 2]; 4];
        force[0][0] = g;
        let table = CouplingTable::new(force, [zero; 4]);
        let seq = generic();
        let a = GateAnalysis::new(&seq, &trap, &table);
        let real = GateAnalysis::new(&seq, &trap, &CouplingTable::canonical());
        let expected = real.orbit(SpinState::UpUp, Mode::Com).rotated(phase);
        let got = a.orbit(SpinState::UpUp, Mode::Com);
        assert!((got.delta_alpha_plus - expected.delta_alpha_plus).norm() < 1e-12);
        assert!((got.i_plus - expected.i_plus).norm() < 1e-12);
        assert!((got.i0 - expected.i0).norm() < 1e-12);
    }
}
