//! Area against gate time for the four- and five-pulse searches and the
//! fitted power law of the lower envelope.
//!
//! `cargo run --release --example pareto -- [restarts] [seed]`

use std::f64::consts::TAU;

use fastgate::optimizer::anneal_search;
use fastgate::studies::{fast_five_pulse_config, force_area, four_pulse_config, pareto_area_vs_tau, ParetoRow};
use fastgate::{CouplingTable, TrapConfig};

fn main() -> fastgate::Result<()> {
    let restarts = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let seed = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    let trap = TrapConfig::default();
    let coupling = CouplingTable::canonical();
    let mut rows: Vec<ParetoRow> = Vec::new();
    for config in [fast_five_pulse_config(restarts, seed), four_pulse_config(restarts, seed)] {
        rows.extend(anneal_search(&config, &trap, &coupling)?.iter().map(ParetoRow::from));
    }
    let fit = pareto_area_vs_tau(&rows, 2.0)?;
    println!("N  tau/T_c   area      force area  <eps>");
    for r in &fit.envelope {
        println!(
            "{}  {:.4}  {:9.3}  {:9.3}  {:.2e}",
            r.n_pulses,
            r.tau_over_period,
            r.area,
            force_area(r.area, &trap),
            r.eps
        );
    }
    println!(
        "area ~ {:.3} tau^{:.3} over {} envelope points (tau < {} T_c, tau in units of 1/omega_c)",
        fit.intercept.exp(),
        fit.slope,
        fit.fit_points,
        fit.fit_below
    );
    let slowest = fit.envelope.last().map_or(0.0, |r| r.tau_over_period * TAU);
    println!("slowest envelope point at tau = {slowest:.3}");
    Ok(())
}
