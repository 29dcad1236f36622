//! Quadratic sensitivity of a found four-pulse gate to fractional errors in
//! the pulse durations and amplitudes, with and without retuning the carrier
//! frequency to cancel the light-shift term.

use fastgate::cli::default_sigmas;
use fastgate::optimizer::{anneal_search, sensitivity_scan, ParamSelector};
use fastgate::studies::four_pulse_config;
use fastgate::{CouplingTable, TrapConfig};

fn main() -> fastgate::Result<()> {
    let trap = TrapConfig::default();
    let coupling = CouplingTable::canonical();
    let found = anneal_search(&four_pulse_config(8, 7), &trap, &coupling)?;
    let sigmas = default_sigmas();
    for s in &found {
        println!("tau/T_c {:.4}  <eps> {:.2e}", s.tau_over_period(), s.epsilon);
        for sel in [ParamSelector::Durations, ParamSelector::Amplitudes] {
            for retune in [false, true] {
                let fit = sensitivity_scan(&s.sequence, &trap, &coupling, sel, &sigmas, retune)?;
                println!(
                    "  {:<10} retune {:<5}  c = {:10.3}  R^2 = {:.5}",
                    sel.label(),
                    retune,
                    fit.c,
                    fit.r_squared
                );
            }
        }
    }
    Ok(())
}
