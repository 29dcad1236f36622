//! Phase-space orbits of the four-pulse example at two optical phases, as
//! CSV on stdout, with the closure of each orbit on stderr.

use std::f64::consts::PI;

use fastgate::cli::orbit_csv;
use fastgate::studies::{published_sequences, trajectories};
use fastgate::{normalize_psi, CouplingTable, TrapConfig};

fn main() -> fastgate::Result<()> {
    let trap = TrapConfig::default();
    let coupling = CouplingTable::canonical();
    let (_, _, raw) = published_sequences()?.remove(0);
    let seq = normalize_psi(&raw, &trap, &coupling)?.sequence;
    for t in trajectories(&seq, &trap, &coupling, &[0.0, PI / 2.0], 64) {
        let max = t.points.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
        eprintln!(
            "mode {} phi_o {:.4}: max |alpha| {:.4}, end/max {:.2e}",
            t.mode.label(),
            t.phi_o,
            max,
            t.closure()
        );
    }
    print!("{}", orbit_csv(&seq, &trap, &[0.0, PI / 2.0], 64));
    Ok(())
}
