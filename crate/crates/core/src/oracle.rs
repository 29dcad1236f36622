//! Brute-force reference values by adaptive Gauss-Kronrod quadrature of the
//! defining integrals. Nothing here calls the closed forms of
//! [`crate::phasespace`] except the explicitly labelled analytic-path mode.

#![allow(clippy::excessive_precision)]

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fidelity::GateAnalysis;
use crate::phasespace::pulse_delta_alpha;
use crate::sequence::{Pulse, PulseSequence};
use crate::trap::{CouplingTable, TrapConfig};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077800534744180,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// 10-point Gauss weights on XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Stopping rule for [`integrate`]: the summed error estimate must fall below
/// `tol` times the integral of `|f|` (so cancellation does not force
/// unreachable absolute accuracy).
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Result of a vector-valued quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Quad<const K: usize> {
    pub value: [Complex64; K],
    pub error: f64,
    pub l1: f64,
    pub evaluations: usize,
}

struct Panel<const K: usize> {
    a: f64,
    b: f64,
    value: [Complex64; K],
    error: f64,
    l1: f64,
}

fn gk21<const K: usize>(f: &mut impl FnMut(f64) -> [Complex64; K], a: f64, b: f64) -> Panel<K> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let zero = [Complex64::default(); K];
    let mut kron = zero;
    let mut gauss = zero;
    let mut l1 = 0.0;
    let fc = f(center);
    for k in 0..K {
        kron[k] += WGK[10] * fc[k];
        l1 += WGK[10] * fc[k].norm();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..K {
            let s = f1[k] + f2[k];
            kron[k] += WGK[j] * s;
            l1 += WGK[j] * (f1[k].norm() + f2[k].norm());
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut error = 0.0;
    for k in 0..K {
        kron[k] *= half;
        gauss[k] *= half;
        error += (kron[k] - gauss[k]).norm();
    }
    Panel {
        a,
        b,
        value: kron,
        error,
        l1: l1 * half.abs(),
    }
}

/// Globally adaptive 21-point Gauss-Kronrod integration of a vector of
/// complex functions over `[a, b]`, bisecting the worst panel until the
/// summed `|K21 - G10|` estimate meets the tolerance.
pub fn integrate<const K: usize>(
    mut f: impl FnMut(f64) -> [Complex64; K],
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<Quad<K>> {
    if a == b {
        return Ok(Quad {
            value: [Complex64::default(); K],
            error: 0.0,
            l1: 0.0,
            evaluations: 0,
        });
    }
    let mut panels = vec![gk21(&mut f, a, b)];
    let mut evaluations = 21;
    loop {
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let l1: f64 = panels.iter().map(|p| p.l1).sum();
        if error <= opts.tol * l1 || error == 0.0 {
            let mut value = [Complex64::default(); K];
            for p in &panels {
                for k in 0..K {
                    value[k] += p.value[k];
                }
            }
            return Ok(Quad {
                value,
                error,
                l1,
                evaluations,
            });
        }
        if panels.len() >= opts.max_subdivisions {
            return Err(Error::QuadratureTolerance {
                tol: opts.tol,
                estimate: error / l1.max(f64::MIN_POSITIVE),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("non-empty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk21(&mut f, p.a, mid));
        panels.push(gk21(&mut f, mid, p.b));
        evaluations += 42;
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar(f: impl Fn(f64) -> Complex64, a: f64, b: f64, opts: QuadOptions) -> Result<Complex64> {
    Ok(integrate(|t| [f(t)], a, b, opts)?.value[0])
}

/// Piecewise-constant force profile on one mode: pulse `n` has effective
/// amplitude `amplitudes[n]`, carrier `omega_n` and offset `dphi_n`.
#[derive(Debug, Clone)]
pub struct ForceSpec {
    pub pulses: Vec<Pulse>,
    pub amplitudes: Vec<f64>,
    pub mode_freq: f64,
}

impl ForceSpec {
    pub fn new(pulses: &[Pulse], amplitudes: &[f64], mode_freq: f64) -> Self {
        assert_eq!(pulses.len(), amplitudes.len(), "one amplitude per pulse");
        Self {
            pulses: pulses.to_vec(),
            amplitudes: amplitudes.to_vec(),
            mode_freq,
        }
    }

    /// Index of the pulse whose support `(t_n, t_n + tau_n]` contains `t`.
    pub fn active(&self, t: f64) -> Option<usize> {
        self.pulses.iter().position(|p| t > p.t_start && t <= p.t_end())
    }

    /// Envelope `Omega(t)`; zero outside every pulse.
    pub fn profile(&self, t: f64) -> f64 {
        self.active(t).map_or(0.0, |n| self.amplitudes[n])
    }

    /// `(i / 2 M w0 x0) e^{i w0 t} f(t)` with `f = 4 M w0 x0 Omega sin(omega t + phi)`
    /// inside pulse `n`.
    fn eq4_integrand(&self, n: usize, t: f64, phi_o: f64) -> Complex64 {
        let p = &self.pulses[n];
        let force = 2.0 * self.amplitudes[n] * (p.omega * t + phi_o + p.dphi).sin();
        Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, self.mode_freq * t) * force
    }

    /// Co/counter-rotating integrands `(+Omega e^{i(d+ t + dphi)}, -Omega e^{i(d- t - dphi)})`.
    fn split_integrand(&self, n: usize, t: f64) -> [Complex64; 2] {
        let p = &self.pulses[n];
        let a = self.amplitudes[n];
        let dp = self.mode_freq + p.omega;
        let dm = self.mode_freq - p.omega;
        [
            Complex64::from_polar(a, dp * t + p.dphi),
            -Complex64::from_polar(a, dm * t - p.dphi),
        ]
    }
}

/// Displacement `alpha(t_end) - alpha(0)` at optical phase `phi_o` from the
/// forced-oscillator integral, one panel set per pulse.
pub fn quad_delta_alpha(spec: &ForceSpec, phi_o: f64, t_end: f64, tol: f64) -> Result<Complex64> {
    check_tol(tol)?;
    let opts = QuadOptions::with_tol(tol);
    let mut total = Complex64::default();
    for (n, p) in spec.pulses.iter().enumerate() {
        let b = p.t_end().min(t_end);
        if b <= p.t_start {
            continue;
        }
        total += integrate_scalar(|t| spec.eq4_integrand(n, t, phi_o), p.t_start, b, opts)?;
    }
    Ok(total)
}

fn check_tol(tol: f64) -> Result<()> {
    if (1e-13..=1e-6).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("quadrature tolerance {tol:e} outside [1e-13, 1e-6]")))
    }
}

/// Quadrature values of the split displacements and orbit integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOrbit {
    pub delta_alpha_plus: Complex64,
    pub delta_alpha_minus: Complex64,
    pub i0: Complex64,
    pub i_plus: Complex64,
    pub i_minus: Complex64,
}

/// `da±`, `I0 = int (da+* dda+ + da-* dda-)`, `I+ = int da-* dda+` and
/// `I- = int da+* dda-` by nested quadrature: the running displacements at
/// each outer node come from an inner quadrature, never from a closed form.
pub fn quad_orbit_integrals(spec: &ForceSpec, tol: f64) -> Result<QuadOrbit> {
    check_tol(tol)?;
    let opts = QuadOptions::with_tol(tol);
    let inner_opts = QuadOptions::with_tol((tol * 0.1).max(1e-14));
    let mut prefix = [Complex64::default(); 2];
    let mut i0 = Complex64::default();
    let mut i_plus = Complex64::default();
    let mut i_minus = Complex64::default();
    for (n, p) in spec.pulses.iter().enumerate() {
        if spec.amplitudes[n] == 0.0 {
            continue;
        }
        let t0 = p.t_start;
        let mut failure = None;
        let outer = integrate(
            |t| {
                let running = match integrate(|s| spec.split_integrand(n, s), t0, t, inner_opts) {
                    Ok(q) => q.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                        [Complex64::default(); 2]
                    }
                };
                let ap = prefix[0] + running[0];
                let am = prefix[1] + running[1];
                let [dp, dm] = spec.split_integrand(n, t);
                [ap.conj() * dp + am.conj() * dm, am.conj() * dp, ap.conj() * dm]
            },
            t0,
            p.t_end(),
            opts,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        i0 += outer.value[0];
        i_plus += outer.value[1];
        i_minus += outer.value[2];
        let whole = integrate(|s| spec.split_integrand(n, s), t0, p.t_end(), inner_opts)?;
        prefix[0] += whole.value[0];
        prefix[1] += whole.value[1];
    }
    Ok(QuadOrbit {
        delta_alpha_plus: prefix[0],
        delta_alpha_minus: prefix[1],
        i0,
        i_plus,
        i_minus,
    })
}

/// How the running orbit `alpha(t)` is obtained inside the area integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// Inner quadrature of the force integral.
    Pure,
    /// Per-pulse analytic cycloid from the phase-space module; only the area
    /// integral itself is numerical.
    Analytic,
}

/// Orbit phase `Im int alpha* d alpha` at optical phase `phi_o`.
pub fn quad_orbit_phase(spec: &ForceSpec, phi_o: f64, tol: f64, mode: PathMode) -> Result<f64> {
    check_tol(tol)?;
    let opts = QuadOptions::with_tol(tol);
    let inner_opts = QuadOptions::with_tol((tol * 0.1).max(1e-14));
    let mut prefix = Complex64::default();
    let mut total = 0.0;
    for (n, p) in spec.pulses.iter().enumerate() {
        if spec.amplitudes[n] == 0.0 {
            continue;
        }
        let t0 = p.t_start;
        let mut failure = None;
        let running = |t: f64, failure: &mut Option<Error>| -> Complex64 {
            match mode {
                PathMode::Pure => {
                    match integrate_scalar(|s| spec.eq4_integrand(n, s, phi_o), t0, t, inner_opts) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            Complex64::default()
                        }
                    }
                }
                PathMode::Analytic => pulse_delta_alpha(p, spec.amplitudes[n], spec.mode_freq, t, phi_o),
            }
        };
        let q = integrate(
            |t| {
                let alpha = prefix + running(t, &mut failure);
                [Complex64::new((alpha.conj() * spec.eq4_integrand(n, t, phi_o)).im, 0.0)]
            },
            t0,
            p.t_end(),
            opts,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        total += q.value[0].re;
        prefix += running(p.t_end(), &mut failure);
    }
    Ok(total)
}

/// Light-shift amplitude `theta+ = -int (Omega_LS / 2) e^{i(omega t + dphi)} dt`.
pub fn quad_theta_plus(pulses: &[Pulse], ls_amplitudes: &[f64], tol: f64) -> Result<Complex64> {
    check_tol(tol)?;
    let opts = QuadOptions::with_tol(tol);
    let mut total = Complex64::default();
    for (p, &a) in pulses.iter().zip(ls_amplitudes) {
        if a == 0.0 {
            continue;
        }
        total += integrate_scalar(
            |t| -0.5 * Complex64::from_polar(a, p.omega * t + p.dphi),
            p.t_start,
            p.t_end(),
            opts,
        )?;
    }
    Ok(total)
}

/// Mean of the fixed-phase infidelity over `n_phi` uniformly spaced optical
/// phases.
pub fn grid_average_epsilon(
    seq: &PulseSequence,
    trap: &TrapConfig,
    coupling: &CouplingTable,
    n_phi: usize,
) -> Result<f64> {
    if n_phi < 16 {
        return Err(Error::InvalidConfig(format!("phase grid needs at least 16 points, got {n_phi}")));
    }
    let analysis = GateAnalysis::new(seq, trap, coupling);
    let sum: f64 = (0..n_phi)
        .map(|k| analysis.metrics_at(TAU * k as f64 / n_phi as f64).epsilon)
        .sum();
    Ok(sum / n_phi as f64)
}


#[cfg(test)]
mod cross_checks {
    use super::*;
    use crate::phasespace::{accumulate_orbit, compose_at_phase, lightshift_theta_plus};
    use std::time::Instant;

    fn pulses() -> (Vec<Pulse>, Vec<f64>) {
        (
            vec![
                Pulse::new(0.0, 1.1, 1.0, 2.3, 0.0),
                Pulse::new(1.4, 0.6, 1.0, 1.7, 0.5),
                Pulse::new(2.0, 0.9, 1.0, 1.0, 1.0),
                Pulse::new(3.5, 0.4, 1.0, 9.0, -2.0),
            ],
            vec![0.4, -0.7, 0.3, 1.2],
        )
    }

    #[test]
    fn orbit_integrals_match_closed_form() {
        let (p, a) = pulses();
        for w in [1.0, 3f64.sqrt(), 2.3] {
            let spec = ForceSpec::new(&p, &a, w);
            let t = Instant::now();
            let q = quad_orbit_integrals(&spec, 1e-12).unwrap();
            eprintln!("quad orbit {:?}", t.elapsed());
            let c = accumulate_orbit(&p, w, &a);
            let area: f64 = p.iter().zip(&a).map(|(p, a)| p.duration * a.abs()).sum();
            let s2 = area * area;
            for (x, y, s) in [
                (q.delta_alpha_plus, c.delta_alpha_plus, area),
                (q.delta_alpha_minus, c.delta_alpha_minus, area),
                (q.i0, c.i0, s2),
                (q.i_plus, c.i_plus, s2),
                (q.i_minus, c.i_minus, s2),
            ] {
                assert!((x - y).norm() < 1e-10 * s, "{x} {y}");
            }
            for phi in [0.0, 0.9, 4.0] {
                let (da, ph) = compose_at_phase(&c, phi);
                let qa = quad_delta_alpha(&spec, phi, 10.0, 1e-12).unwrap();
                assert!((qa - da).norm() < 1e-10 * area, "{qa} {da}");
                let qp = quad_orbit_phase(&spec, phi, 1e-12, PathMode::Pure).unwrap();
                let qp2 = quad_orbit_phase(&spec, phi, 1e-12, PathMode::Analytic).unwrap();
                assert!((qp - ph).abs() < 1e-10 * s2, "{qp} {ph}");
                assert!((qp2 - ph).abs() < 1e-10 * s2, "{qp2} {ph}");
            }
        }
        let th = quad_theta_plus(&p, &a, 1e-12).unwrap();
        let tc = lightshift_theta_plus(&p, &a);
        assert!((th - tc).norm() < 1e-11, "{th} {tc}");
    }
}
