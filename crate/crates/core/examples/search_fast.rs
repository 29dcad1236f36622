//! Searches for fast symmetric five-pulse gates (total time under one COM
//! period) and prints the solutions found.
//!
//! `cargo run --release --example search_fast -- [restarts] [seed]`

use std::time::Instant;

use fastgate::optimizer::anneal_search;
use fastgate::studies::fast_five_pulse_config;
use fastgate::{CouplingTable, TrapConfig};

fn main() -> fastgate::Result<()> {
    let restarts = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let seed = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    let config = fast_five_pulse_config(restarts, seed);
    let start = Instant::now();
    let found = anneal_search(&config, &TrapConfig::default(), &CouplingTable::canonical())?;
    println!("{} solutions in {:.1?}", found.len(), start.elapsed());
    for s in &found {
        println!(
            "tau/2pi = {:.4}  area = {:.3}  <eps> = {:.2e}  omega = {:.4}  restart {} ({} evals, {} steps)",
            s.tau_over_period(),
            s.area,
            s.epsilon,
            s.sequence.pulses()[0].omega,
            s.provenance.restart,
            s.provenance.evaluations,
            s.provenance.anneal_steps
        );
    }
    Ok(())
}
