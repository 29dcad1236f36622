//! Compares the closed-form orbit quantities with direct adaptive quadrature
//! on random pulse trains.
//!
//! `cargo run --release --example oracle_check -- [count] [seed]`

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fastgate::oracle::{quad_orbit_integrals, quad_theta_plus, ForceSpec};
use fastgate::phasespace::{accumulate_totals, lightshift_theta_plus};
use fastgate::{Parametrization, Pulse, PulseSequence};

fn rel(a: num_complex::Complex64, b: num_complex::Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

fn main() -> fastgate::Result<()> {
    let count = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = rng.gen_range(1..=6);
        let mut t = 0.0;
        let mut pulses = Vec::new();
        for _ in 0..n {
            let d = rng.gen_range(0.05..1.5);
            pulses.push(Pulse::new(t, d, rng.gen_range(-1.0..1.0), rng.gen_range(0.5..25.0), rng.gen_range(0.0..6.3)));
            t += d + rng.gen_range(0.0..1.0);
        }
        let seq = PulseSequence::new(pulses, Parametrization::General)?;
        let amps = seq.amplitudes();
        for mode_freq in [1.0, 3f64.sqrt()] {
            let closed = accumulate_totals(seq.pulses(), mode_freq, &amps);
            let quad = quad_orbit_integrals(&ForceSpec::new(seq.pulses(), &amps, mode_freq), 1e-12)?;
            let s1 = closed.delta_alpha_plus.norm().max(closed.delta_alpha_minus.norm());
            let s2 = closed.i0.norm().max(closed.i_plus.norm()).max(closed.i_minus.norm());
            let e = [
                rel(closed.delta_alpha_plus, quad.delta_alpha_plus, s1),
                rel(closed.delta_alpha_minus, quad.delta_alpha_minus, s1),
                rel(closed.i0, quad.i0, s2),
                rel(closed.i_plus, quad.i_plus, s2),
                rel(closed.i_minus, quad.i_minus, s2),
            ];
            worst = e.iter().fold(worst, |a, &b| a.max(b));
        }
        let th = lightshift_theta_plus(seq.pulses(), &amps);
        let tq = quad_theta_plus(seq.pulses(), &amps, 1e-12)?;
        worst = worst.max(rel(th, tq, th.norm()));
        if k < 5 {
            println!("sequence {k}: {n} pulses, theta+ closed {th:.6e} quadrature {tq:.6e}");
        }
    }
    println!("{count} sequences, worst relative difference {worst:.2e}, {:.1?}", start.elapsed());
    Ok(())
}
