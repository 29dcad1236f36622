//! Invariants of the closed-form kinematics, the infidelity and the search.

mod common;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use common::{build, raw_pulse, rel, train};
use fastgate::optimizer::{anneal_search, SearchConfig};
use fastgate::oracle::{quad_delta_alpha, quad_orbit_integrals, ForceSpec};
use fastgate::phasespace::{accumulate_totals, pulse_delta_alpha};
use fastgate::sequence::{expand_symmetric, validate, SymmetricParams};
use fastgate::studies::four_pulse_config;
use fastgate::{spin_echo, CouplingTable, GateAnalysis, Mode, Parametrization, PulseSequence, TrapConfig};

fn trap() -> TrapConfig {
    TrapConfig::default()
}

const MODES: [f64; 2] = [1.0, 1.7320508075688772];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ellipse_decomposition_matches_direct_integral(seq in train(), phi in 0.0f64..TAU) {
        let amps = seq.amplitudes();
        for w0 in MODES {
            let totals = accumulate_totals(seq.pulses(), w0, &amps);
            let spec = ForceSpec::new(seq.pulses(), &amps, w0);
            let direct = quad_delta_alpha(&spec, phi, seq.duration(), 1e-13).unwrap();
            let (ellipse, _) = totals.compose(phi);
            let scale = totals.delta_alpha_plus.norm() + totals.delta_alpha_minus.norm();
            prop_assert!(rel(ellipse, direct, scale) < 1e-12, "{ellipse} vs {direct}");
        }
    }

    #[test]
    fn mean_square_displacement_grid_identity(seq in train()) {
        let amps = seq.amplitudes();
        for w0 in MODES {
            let t = accumulate_totals(seq.pulses(), w0, &amps);
            let n = 64;
            let grid: f64 = (0..n).map(|k| t.compose(TAU * k as f64 / n as f64).0.norm_sqr()).sum::<f64>() / n as f64;
            let closed = t.mean_sq_displacement();
            prop_assert!((grid - closed).abs() <= 1e-10 * closed.max(1e-300));
        }
    }

    #[test]
    fn phase_variance_identity(seq in train()) {
        let amps = seq.amplitudes();
        for w0 in MODES {
            let t = accumulate_totals(seq.pulses(), w0, &amps);
            let n = 64;
            let phases: Vec<f64> = (0..n).map(|k| t.compose(TAU * k as f64 / n as f64).1).collect();
            let mean = phases.iter().sum::<f64>() / n as f64;
            let var = phases.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n as f64;
            let closed = 0.5 * t.area_residual().norm_sqr();
            let scale = t.i_plus.norm().max(t.i_minus.norm()).powi(2) + t.i0.im.abs().powi(2);
            prop_assert!((mean - t.i0.im).abs() <= 1e-10 * scale.sqrt().max(1e-300));
            prop_assert!((var - closed).abs() <= 1e-10 * scale.max(1e-300), "{var} vs {closed}");
        }
    }

    #[test]
    fn phase_shift_is_a_time_shift((d, _, a, w, p) in raw_pulse(), phi in 0.0f64..TAU, frac in 0.0f64..1.0) {
        let pulse = fastgate::Pulse::new(0.4, d, a, w, p);
        for w0 in MODES {
            let t = pulse.t_start + frac * d;
            let td = phi / w;
            let rot = Complex64::from_polar(1.0, -w0 * td);
            let lhs = pulse_delta_alpha(&pulse, a, w0, t, phi);
            let rhs = rot * (pulse_delta_alpha(&pulse, a, w0, t + td, 0.0)
                - pulse_delta_alpha(&pulse, a, w0, pulse.t_start + td, 0.0));
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn spin_echo_cancels_light_shift(seq in train(), gap in 0.0f64..2.0) {
        let echo = spin_echo(&seq, &trap(), &CouplingTable::canonical(), gap).unwrap();
        let single = GateAnalysis::new(&seq, &trap(), &CouplingTable::canonical());
        let scale = single.theta_plus.iter().map(|t| t.norm()).fold(1.0, f64::max);
        for t in echo.analysis.theta_plus {
            prop_assert!(t.norm() <= 1e-12 * scale);
        }
        // the light-shift part of every state phase vanishes at each grid phase
        for k in 0..16 {
            let phi = TAU * k as f64 / 16.0;
            for t in echo.analysis.theta_plus {
                prop_assert!((2.0 * (Complex64::from_polar(1.0, phi) * t).re).abs() <= 2e-12 * scale);
            }
        }
    }

    #[test]
    fn conditional_phase_is_quadratic_in_amplitude(seq in train(), s in 0.05f64..20.0) {
        let c = CouplingTable::canonical();
        let psi = GateAnalysis::new(&seq, &trap(), &c).mean_psi();
        let psi_s = GateAnalysis::new(&seq.scaled(s), &trap(), &c).mean_psi();
        prop_assert!((psi_s - s * s * psi).abs() <= 1e-12 * (s * s * psi).abs().max(1e-300) * 10.0);
        let via = GateAnalysis::new(&seq, &trap(), &c).scaled(s).mean_psi();
        prop_assert!((via - psi_s).abs() <= 1e-12 * psi_s.abs().max(1e-300) * 10.0);
    }

    #[test]
    fn infidelity_is_time_translation_covariant(seq in train(), shift in -20.0f64..20.0) {
        let c = CouplingTable::canonical();
        let moved: Vec<_> = seq.pulses().iter().map(|p| p.translated(shift)).collect();
        let a = GateAnalysis::new(&seq, &trap(), &c);
        let b = GateAnalysis::with_state_map(&moved, &trap(), &c, |_, m| m);
        let (ea, eb) = (a.averaged_epsilon().total, b.averaged_epsilon().total);
        prop_assert!((ea - eb).abs() <= 1e-10 * ea.max(1e-300));
        let phi = 0.7;
        let (ma, mb) = (a.metrics_at(phi).epsilon, b.metrics_at(phi).epsilon);
        prop_assert!((ma - mb).abs() <= 1e-9 * ma.max(1e-300));
        prop_assert!((seq.total_area() - validate(moved, Parametrization::General).unwrap().total_area()).abs() <= 1e-12 * seq.total_area());
    }

    #[test]
    fn reversal_keeps_area_and_symmetric_profiles(
        half in prop::collection::vec((0.05f64..1.5, 0.0f64..1.0, -2.0f64..2.0), 1..=3),
        odd in any::<bool>(),
        w in 0.5f64..25.0,
    ) {
        let n_dur = half.len();
        let n = if odd { 2 * n_dur - 1 } else { 2 * n_dur };
        let gaps: Vec<f64> = half.iter().take(n / 2).map(|h| h.1).collect();
        let p = SymmetricParams::new(half.iter().map(|h| h.0).collect(), gaps, half.iter().map(|h| h.2).collect(), w);
        let seq = expand_symmetric(&p, n).unwrap();
        let rev = seq.time_reversed().unwrap();
        prop_assert_eq!(rev.len(), seq.len());
        for (a, b) in seq.pulses().iter().zip(rev.pulses()) {
            prop_assert!((a.duration - b.duration).abs() < 1e-12);
            prop_assert!((a.amplitude - b.amplitude).abs() < 1e-12);
            prop_assert!((a.t_start - b.t_start).abs() < 1e-10);
        }
        prop_assert!((rev.total_area() - seq.total_area()).abs() <= 1e-12 * seq.total_area());
    }

    #[test]
    fn validation_is_idempotent(raw in prop::collection::vec(raw_pulse(), 1..=6), t0 in -5.0f64..5.0) {
        let seq = build(&raw);
        let moved: Vec<_> = seq.pulses().iter().map(|p| p.translated(t0)).collect();
        let once = validate(moved, Parametrization::General).unwrap();
        let twice = validate(once.pulses().to_vec(), Parametrization::General).unwrap();
        prop_assert_eq!(once, twice);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Halving the requested tolerance never moves the result by more than
    /// the looser tolerance promised, and both agree with the closed form.
    #[test]
    fn quadrature_tolerance_is_honest(seq in train()) {
        let amps = seq.amplitudes();
        let closed = accumulate_totals(seq.pulses(), 1.0, &amps);
        let spec = ForceSpec::new(seq.pulses(), &amps, 1.0);
        for tol in [1e-8, 1e-10] {
            let loose = quad_orbit_integrals(&spec, tol).unwrap();
            let tight = quad_orbit_integrals(&spec, tol / 2.0).unwrap();
            let s = closed.i0.norm().max(closed.i_plus.norm()).max(closed.i_minus.norm()).max(1e-300);
            for (a, b) in [(loose.i0, closed.i0), (loose.i_plus, closed.i_plus), (tight.i0, closed.i0)] {
                prop_assert!(rel(a, b, s) <= 10.0 * tol, "{a} vs {b} at tol {tol}");
            }
            prop_assert!(rel(loose.i_minus, tight.i_minus, s) <= 10.0 * tol);
        }
    }
}

#[test]
fn mode_table_is_consistent() {
    assert_eq!(trap().freq(Mode::Stretch), MODES[1]);
    assert_eq!(trap().freq(Mode::Com), MODES[0]);
}

#[test]
fn empty_train_has_no_effect() {
    let a = GateAnalysis::new(&PulseSequence::empty(), &trap(), &CouplingTable::canonical());
    assert_eq!(a.mean_psi(), 0.0);
    let e = a.averaged_epsilon();
    assert_eq!(e.displacement, 0.0);
    assert!((e.total - PI * PI / 9.0).abs() < 1e-15);
}

#[test]
fn optimizer_is_deterministic() {
    let config = SearchConfig {
        threshold: Some(1e-4),
        ..four_pulse_config(2, 7)
    };
    let c = CouplingTable::canonical();
    let a = anneal_search(&config, &trap(), &c).unwrap();
    let b = anneal_search(&config, &trap(), &c).unwrap();
    assert_eq!(a, b);
    assert!(!a.is_empty());
    let bits = |v: &[fastgate::optimizer::Solution]| -> Vec<u64> {
        v.iter().flat_map(|s| s.sequence.pulses().iter().flat_map(|p| [p.t_start, p.duration, p.amplitude, p.omega].map(f64::to_bits))).collect()
    };
    assert_eq!(bits(&a), bits(&b));
}
