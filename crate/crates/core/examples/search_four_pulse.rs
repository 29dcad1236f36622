//! Four-pulse symmetric gates of about two COM periods, plus the
//! equal-amplitude variant.
//!
//! `cargo run --release --example search_four_pulse -- [restarts] [seed]`

use fastgate::optimizer::anneal_search;
use fastgate::sequence::Parametrization;
use fastgate::studies::four_pulse_config;
use fastgate::{CouplingTable, TrapConfig};

fn main() -> fastgate::Result<()> {
    let restarts = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let seed = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    let trap = TrapConfig::default();
    let coupling = CouplingTable::canonical();
    for par in [Parametrization::Symmetric, Parametrization::EqualAmplitude] {
        let config = fastgate::optimizer::SearchConfig {
            parametrization: par,
            ..four_pulse_config(restarts, seed)
        };
        let found = anneal_search(&config, &trap, &coupling)?;
        println!("{}: {} solutions", par.as_str(), found.len());
        for s in &found {
            let half: Vec<String> = s.sequence.pulses()[..2]
                .iter()
                .map(|p| format!("({:.5}, {:.5})", p.duration, p.amplitude))
                .collect();
            println!(
                "  tau/2pi {:.4}  area {:8.3}  <eps> {:.2e}  omega {:.5}  first pulses (duration, amplitude) {}",
                s.tau_over_period(),
                s.area,
                s.epsilon,
                s.sequence.pulses()[0].omega,
                half.join(" ")
            );
        }
    }
    Ok(())
}
