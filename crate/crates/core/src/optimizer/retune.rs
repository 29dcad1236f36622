use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fidelity::GateAnalysis;
use crate::sequence::PulseSequence;
use crate::trap::{CouplingTable, SpinState, TrapConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retuned {
    pub omega: f64,
    pub theta_plus: Complex64,
    pub theta_plus_before: Complex64,
}

fn theta_plus(seq: &PulseSequence, trap: &TrapConfig, coupling: &CouplingTable) -> Complex64 {
    GateAnalysis::new(seq, trap, coupling).theta_plus[SpinState::UpUp.index()]
}

/// Golden-section minimization of `|theta+|^2` over a shared carrier
/// frequency inside `window`, every other parameter held fixed.
pub fn retune_frequency(
    seq: &PulseSequence,
    trap: &TrapConfig,
    coupling: &CouplingTable,
    window: [f64; 2],
) -> Result<Retuned> {
    let [lo, hi] = window;
    if !(lo < hi) || seq.is_empty() {
        return Err(Error::InvalidConfig(format!("empty retuning window [{lo}, {hi}]")));
    }
    let current = seq.pulses()[0].omega;
    if !(lo <= current && current <= hi) {
        return Err(Error::InvalidConfig(format!("window [{lo}, {hi}] does not bracket omega = {current}")));
    }
    let before = theta_plus(seq, trap, coupling);
    let f = |w: f64| theta_plus(&seq.with_omega(w), trap, coupling).norm_sqr();

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > 1e-14 * (a.abs() + b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let omega = 0.5 * (a + b);
    let edge = 1e-9 * (hi - lo);
    let f_star = f(omega);
    if omega - lo < edge || hi - omega < edge || f_star > f(lo) || f_star > f(hi) {
        return Err(Error::NoInteriorMinimum { lo, hi });
    }
    // keep the current value when it is already at least as good
    let (omega, theta) = if f(current) <= f_star {
        (current, before)
    } else {
        (omega, theta_plus(&seq.with_omega(omega), trap, coupling))
    };
    Ok(Retuned {
        omega,
        theta_plus: theta,
        theta_plus_before: before,
    })
}
