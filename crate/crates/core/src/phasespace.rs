//! Closed-form phase-space kinematics of a square-pulse train acting on one
//! motional mode.
//!
//! For a mode of frequency `w0` driven at `omega` the displacement splits into
//! co- and counter-rotating parts, `da = e^{i phi} da+ + e^{-i phi} da-`,
//! with beat frequencies `d± = w0 ± omega`. Everything here is evaluated per
//! pulse and accumulated with prefix sums; gaps contribute nothing.

use num_complex::Complex64;

use crate::sequence::Pulse;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Circle function `(1 - e^{i omega tau}) / omega`, the integral of one square
/// pulse. Written with half-angle sines so that it stays accurate as
/// `omega -> 0`, where it tends to `-i tau`.
pub fn circle_fn(omega: f64, tau: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(0.0, -tau);
    }
    let x = omega * tau;
    let h = (0.5 * x).sin();
    Complex64::new(2.0 * h * h / omega, -x.sin() / omega)
}

/// `(C(delta) + i tau) / delta`: the self-area of one cycloid arch per unit
/// amplitude squared. Finite at `delta = 0` (value `tau^2 / 2`).
#[cfg(test)]
fn arch_area(delta: f64, tau: f64) -> Complex64 {
    if delta == 0.0 {
        return Complex64::new(0.5 * tau * tau, 0.0);
    }
    let x = delta * tau;
    let h = (0.5 * x).sin() / delta;
    let re = 2.0 * h * h;
    // (x - sin x) / delta^2 loses digits for small x
    let im = if x.abs() < 0.1 {
        let x2 = x * x;
        tau * tau * x * (1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 * (1.0 / 362880.0 - x2 / 39916800.0))))
    } else {
        (x - x.sin()) / (delta * delta)
    };
    Complex64::new(re, im)
}

/// Difference quotient `(C(a - h) - C(a)) / h`. Two algebraically equal forms
/// are available; the one with the larger denominator (`h` or `a - h`) is used
/// so neither removable singularity is ever approached.
#[cfg(test)]
fn cross_area(a: f64, h: f64, tau: f64) -> Complex64 {
    let a_minus_h = a - h;
    if h.abs() >= a_minus_h.abs() {
        (circle_fn(a_minus_h, tau) - circle_fn(a, tau)) / h
    } else {
        (circle_fn(a, tau) - cis(a * tau) * circle_fn(-h, tau)) / a_minus_h
    }
}

/// Circle function of one beat frequency together with the pieces the orbit
/// integrals reuse.
struct Beat {
    d: f64,
    tau: f64,
    /// `sin(d tau / 2)` and `sin(d tau)`
    half: f64,
    full: f64,
    /// `C(d)`
    c: Complex64,
    /// `e^{i d tau}`
    e: Complex64,
}

impl Beat {
    fn new(d: f64, tau: f64) -> Self {
        let x = d * tau;
        let half = (0.5 * x).sin();
        let full = x.sin();
        let c = if d == 0.0 {
            Complex64::new(0.0, -tau)
        } else {
            Complex64::new(2.0 * half * half / d, -full / d)
        };
        Self {
            d,
            tau,
            half,
            full,
            c,
            e: Complex64::new(1.0 - 2.0 * half * half, full),
        }
    }

    /// Same value as [`arch_area`].
    fn arch(&self) -> Complex64 {
        let (d, tau) = (self.d, self.tau);
        if d == 0.0 {
            return Complex64::new(0.5 * tau * tau, 0.0);
        }
        let x = d * tau;
        let h = self.half / d;
        let im = if x.abs() < 0.1 {
            let x2 = x * x;
            tau * tau * x * (1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 * (1.0 / 362880.0 - x2 / 39916800.0))))
        } else {
            (x - self.full) / (d * d)
        };
        Complex64::new(2.0 * h * h, im)
    }
}

/// Co- and counter-rotating displacement of `pulse` at time `t`, measured from
/// the pulse start, for a mode of frequency `mode_freq`. `amplitude` is the
/// effective per-mode force amplitude. The expression continues analytically
/// past the end of the pulse.
pub fn pulse_a_pm(pulse: &Pulse, amplitude: f64, mode_freq: f64, t: f64) -> (Complex64, Complex64) {
    if amplitude == 0.0 {
        return (Complex64::default(), Complex64::default());
    }
    let s = t - pulse.t_start;
    let dp = mode_freq + pulse.omega;
    let dm = mode_freq - pulse.omega;
    let a_plus = I * amplitude * cis(dp * pulse.t_start + pulse.dphi) * circle_fn(dp, s);
    let a_minus = -I * amplitude * cis(dm * pulse.t_start - pulse.dphi) * circle_fn(dm, s);
    (a_plus, a_minus)
}

/// Physical displacement of a single pulse at optical phase `phi_o`.
pub fn pulse_delta_alpha(pulse: &Pulse, amplitude: f64, mode_freq: f64, t: f64, phi_o: f64) -> Complex64 {
    let (ap, am) = pulse_a_pm(pulse, amplitude, mode_freq, t);
    cis(phi_o) * ap + cis(-phi_o) * am
}

/// Per-mode closed-form summary of a pulse train.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSummary {
    pub mode_freq: f64,
    /// Whole-pulse displacements `A_n±`.
    pub a_plus: Vec<Complex64>,
    pub a_minus: Vec<Complex64>,
    /// Prefix sums `alpha_n± = sum_{j<n} A_j±`.
    pub alpha_plus: Vec<Complex64>,
    pub alpha_minus: Vec<Complex64>,
    pub delta_alpha_plus: Complex64,
    pub delta_alpha_minus: Complex64,
    /// Optical-phase independent part of the orbit integral.
    pub i0: Complex64,
    pub i_plus: Complex64,
    pub i_minus: Complex64,
}

impl OrbitSummary {
    /// Summary of the same drive with an extra constant phase `phase` on the
    /// force (a complex coupling factor).
    pub fn rotated(&self, phase: f64) -> Self {
        let r = cis(phase);
        let rc = r.conj();
        let r2 = r * r;
        Self {
            mode_freq: self.mode_freq,
            a_plus: self.a_plus.iter().map(|a| a * r).collect(),
            a_minus: self.a_minus.iter().map(|a| a * rc).collect(),
            alpha_plus: self.alpha_plus.iter().map(|a| a * r).collect(),
            alpha_minus: self.alpha_minus.iter().map(|a| a * rc).collect(),
            delta_alpha_plus: self.delta_alpha_plus * r,
            delta_alpha_minus: self.delta_alpha_minus * rc,
            i0: self.i0,
            i_plus: self.i_plus * r2,
            i_minus: self.i_minus * r2.conj(),
        }
    }

    /// Summary of the same drive with every amplitude multiplied by `s`:
    /// displacements scale by `s`, orbit integrals by `s^2`.
    pub fn scaled(&self, s: f64) -> Self {
        let s2 = s * s;
        Self {
            mode_freq: self.mode_freq,
            a_plus: self.a_plus.iter().map(|a| a * s).collect(),
            a_minus: self.a_minus.iter().map(|a| a * s).collect(),
            alpha_plus: self.alpha_plus.iter().map(|a| a * s).collect(),
            alpha_minus: self.alpha_minus.iter().map(|a| a * s).collect(),
            delta_alpha_plus: self.delta_alpha_plus * s,
            delta_alpha_minus: self.delta_alpha_minus * s,
            i0: self.i0 * s2,
            i_plus: self.i_plus * s2,
            i_minus: self.i_minus * s2,
        }
    }

    pub fn totals(&self) -> OrbitTotals {
        OrbitTotals {
            delta_alpha_plus: self.delta_alpha_plus,
            delta_alpha_minus: self.delta_alpha_minus,
            i0: self.i0,
            i_plus: self.i_plus,
            i_minus: self.i_minus,
        }
    }

    /// `I+ - conj(I-)`: vanishes iff the enclosed area is optical-phase independent.
    pub fn area_residual(&self) -> Complex64 {
        self.i_plus - self.i_minus.conj()
    }

    /// `<|da|^2>` over a uniformly distributed optical phase.
    pub fn mean_sq_displacement(&self) -> f64 {
        self.delta_alpha_plus.norm_sqr() + self.delta_alpha_minus.norm_sqr()
    }
}

/// Per-pulse contributions: `(A+, A-, B0, B+, B-)`.
fn pulse_terms(p: &Pulse, amp: f64, mode_freq: f64) -> [Complex64; 5] {
    let tau = p.duration;
    let dp = mode_freq + p.omega;
    let dm = mode_freq - p.omega;
    let bp = Beat::new(dp, tau);
    let bm = Beat::new(dm, tau);
    let b2 = Beat::new(dp - dm, tau);
    let e_phase = cis(p.start_phase());
    let e_mode = cis(mode_freq * p.t_start);
    let ap = I * amp * e_mode * e_phase * bp.c;
    let am = -I * amp * e_mode * e_phase.conj() * bm.c;

    // (C(a - h) - C(a)) / h, or the equivalent form over a - h
    let cross = |a: &Beat, h: &Beat, a_minus_h: Complex64, neg_h: Complex64| {
        let d = a.d - h.d;
        if h.d.abs() >= d.abs() {
            (a_minus_h - a.c) / h.d
        } else {
            (a.c - a.e * neg_h) / d
        }
    };
    let amp2 = amp * amp;
    let e2 = e_phase * e_phase;
    let b0 = amp2 * (bp.arch() + bm.arch());
    let b_plus = amp2 * e2 * cross(&bp, &bm, b2.c, -bm.c.conj());
    let b_minus = amp2 * e2.conj() * cross(&bm, &bp, -b2.c.conj(), -bp.c.conj());
    [ap, am, b0, b_plus, b_minus]
}

/// Whole-train displacements and orbit integrals without the per-pulse
/// breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OrbitTotals {
    pub delta_alpha_plus: Complex64,
    pub delta_alpha_minus: Complex64,
    pub i0: Complex64,
    pub i_plus: Complex64,
    pub i_minus: Complex64,
}

impl OrbitTotals {
    pub fn rotated(&self, phase: f64) -> Self {
        let r = cis(phase);
        let r2 = r * r;
        Self {
            delta_alpha_plus: self.delta_alpha_plus * r,
            delta_alpha_minus: self.delta_alpha_minus * r.conj(),
            i0: self.i0,
            i_plus: self.i_plus * r2,
            i_minus: self.i_minus * r2.conj(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let s2 = s * s;
        Self {
            delta_alpha_plus: self.delta_alpha_plus * s,
            delta_alpha_minus: self.delta_alpha_minus * s,
            i0: self.i0 * s2,
            i_plus: self.i_plus * s2,
            i_minus: self.i_minus * s2,
        }
    }

    /// `I+ - conj(I-)`: vanishes iff the enclosed area is optical-phase independent.
    pub fn area_residual(&self) -> Complex64 {
        self.i_plus - self.i_minus.conj()
    }

    /// `<|da|^2>` over a uniformly distributed optical phase.
    pub fn mean_sq_displacement(&self) -> f64 {
        self.delta_alpha_plus.norm_sqr() + self.delta_alpha_minus.norm_sqr()
    }

    /// Net displacement and orbit phase `Im[I]` at optical phase `phi_o`.
    pub fn compose(&self, phi_o: f64) -> (Complex64, f64) {
        let da = cis(phi_o) * self.delta_alpha_plus + cis(-phi_o) * self.delta_alpha_minus;
        let integral = self.i0 + cis(2.0 * phi_o) * self.i_plus + cis(-2.0 * phi_o) * self.i_minus;
        (da, integral.im)
    }
}

/// Allocation-free version of [`accumulate_orbit`] returning only the totals.
pub fn accumulate_totals(pulses: &[Pulse], mode_freq: f64, eff_amplitudes: &[f64]) -> OrbitTotals {
    assert_eq!(pulses.len(), eff_amplitudes.len(), "one amplitude per pulse");
    let mut out = OrbitTotals::default();
    for (p, &amp) in pulses.iter().zip(eff_amplitudes) {
        if amp == 0.0 {
            continue;
        }
        let [ap, am, b0, b_plus, b_minus] = pulse_terms(p, amp, mode_freq);
        out.i0 += out.delta_alpha_plus.conj() * ap + out.delta_alpha_minus.conj() * am + b0;
        out.i_plus += out.delta_alpha_minus.conj() * ap + b_plus;
        out.i_minus += out.delta_alpha_plus.conj() * am + b_minus;
        out.delta_alpha_plus += ap;
        out.delta_alpha_minus += am;
    }
    out
}

/// Accumulates displacements and orbit-area integrals over the train.
/// `eff_amplitudes[n]` is the effective force amplitude of pulse `n` on this
/// mode (already including Lamb-Dicke and coupling factors).
pub fn accumulate_orbit(pulses: &[Pulse], mode_freq: f64, eff_amplitudes: &[f64]) -> OrbitSummary {
    assert_eq!(pulses.len(), eff_amplitudes.len(), "one amplitude per pulse");
    let n = pulses.len();
    let mut out = OrbitSummary {
        mode_freq,
        a_plus: Vec::with_capacity(n),
        a_minus: Vec::with_capacity(n),
        alpha_plus: Vec::with_capacity(n),
        alpha_minus: Vec::with_capacity(n),
        delta_alpha_plus: Complex64::default(),
        delta_alpha_minus: Complex64::default(),
        i0: Complex64::default(),
        i_plus: Complex64::default(),
        i_minus: Complex64::default(),
    };
    let mut ap_sum = Complex64::default();
    let mut am_sum = Complex64::default();
    for (p, &amp) in pulses.iter().zip(eff_amplitudes) {
        out.alpha_plus.push(ap_sum);
        out.alpha_minus.push(am_sum);
        if amp == 0.0 {
            out.a_plus.push(Complex64::default());
            out.a_minus.push(Complex64::default());
            continue;
        }
        let [ap, am, b0, b_plus, b_minus] = pulse_terms(p, amp, mode_freq);
        out.a_plus.push(ap);
        out.a_minus.push(am);
        out.i0 += ap_sum.conj() * ap + am_sum.conj() * am + b0;
        out.i_plus += am_sum.conj() * ap + b_plus;
        out.i_minus += ap_sum.conj() * am + b_minus;
        ap_sum += ap;
        am_sum += am;
    }
    out.delta_alpha_plus = ap_sum;
    out.delta_alpha_minus = am_sum;
    out
}

/// Complex amplitude `theta+` of the optical-phase dependent light-shift
/// phase; the phase itself is `e^{i phi_o} theta+ + c.c.`.
pub fn lightshift_theta_plus(pulses: &[Pulse], ls_amplitudes: &[f64]) -> Complex64 {
    assert_eq!(pulses.len(), ls_amplitudes.len(), "one amplitude per pulse");
    pulses
        .iter()
        .zip(ls_amplitudes)
        .filter(|(_, &a)| a != 0.0)
        .map(|(p, &a)| -0.5 * I * a * cis(p.start_phase()) * circle_fn(p.omega, p.duration))
        .sum()
}

/// Net displacement and orbit phase `Im[I]` at optical phase `phi_o`.
pub fn compose_at_phase(summary: &OrbitSummary, phi_o: f64) -> (Complex64, f64) {
    summary.totals().compose(phi_o)
}

/// Sampled orbit `alpha(t)` at optical phase `phi_o`, starting from
/// `alpha(0) = 0`. Each pulse contributes `samples_per_pulse` points after its
/// start; across gaps the orbit is constant.
pub fn orbit_trajectory(
    pulses: &[Pulse],
    mode_freq: f64,
    eff_amplitudes: &[f64],
    phi_o: f64,
    samples_per_pulse: usize,
) -> Vec<(f64, Complex64)> {
    assert_eq!(pulses.len(), eff_amplitudes.len(), "one amplitude per pulse");
    let samples = samples_per_pulse.max(2);
    let mut out = Vec::with_capacity(1 + pulses.len() * (samples + 1));
    let t0 = pulses.first().map_or(0.0, |p| p.t_start);
    out.push((t0, Complex64::default()));
    let mut alpha = Complex64::default();
    let mut t_last = t0;
    for (p, &amp) in pulses.iter().zip(eff_amplitudes) {
        if p.t_start > t_last {
            out.push((p.t_start, alpha));
        }
        for k in 1..=samples {
            let t = p.t_start + p.duration * k as f64 / samples as f64;
            out.push((t, alpha + pulse_delta_alpha(p, amp, mode_freq, t, phi_o)));
        }
        alpha += pulse_delta_alpha(p, amp, mode_freq, p.t_end(), phi_o);
        t_last = p.t_end();
    }
    out
}
