#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fastgate::{Parametrization, Pulse, PulseSequence};

/// Pulse parameters `(duration, gap_before, amplitude, omega, dphi)`.
pub type Raw = (f64, f64, f64, f64, f64);

pub fn build(raw: &[Raw]) -> PulseSequence {
    let mut t = 0.0;
    let mut pulses = Vec::with_capacity(raw.len());
    for (k, &(d, g, a, w, p)) in raw.iter().enumerate() {
        if k > 0 {
            t += g;
        }
        pulses.push(Pulse::new(t, d, a, w, p));
        t += d;
    }
    PulseSequence::new(pulses, Parametrization::General).expect("generated trains are valid")
}

pub fn raw_pulse() -> impl Strategy<Value = Raw> {
    (0.05f64..1.5, 0.0f64..1.0, -1.0f64..1.0, 0.5f64..25.0, 0.0f64..std::f64::consts::TAU)
}

/// Random train of one to six pulses.
pub fn train() -> impl Strategy<Value = PulseSequence> {
    prop::collection::vec(raw_pulse(), 1..=6).prop_map(|r| build(&r))
}

/// Seeded random train with the same ranges as [`train`].
pub fn seeded_train(rng: &mut ChaCha8Rng) -> PulseSequence {
    let n = rng.gen_range(1..=6);
    let raw: Vec<Raw> = (0..n)
        .map(|_| {
            (
                rng.gen_range(0.05..1.5),
                rng.gen_range(0.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.5..25.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    build(&raw)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: num_complex::Complex64, b: num_complex::Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(1e-300)
}
