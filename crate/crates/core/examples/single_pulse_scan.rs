//! Infidelity of a single pulse, and of a two-pulse spin echo, against gate
//! time with the carrier frequency optimized at each point.
//!
//! `cargo run --release --example single_pulse_scan -- [from] [to] [step]`

use std::time::Instant;

use fastgate::studies::{single_pulse_scan, tau_grid, ScanOptions, ScanVariant};
use fastgate::{CouplingTable, TrapConfig};

fn main() {
    let arg = |i: usize, d: f64| std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let grid = tau_grid(arg(1, 1.0), arg(2, 20.0), arg(3, 0.05));
    let start = Instant::now();
    let scan = single_pulse_scan(&grid, &TrapConfig::default(), &CouplingTable::canonical(), &ScanOptions::default());
    println!("{} grid points in {:.1?}", grid.len(), start.elapsed());
    for v in [ScanVariant::Single, ScanVariant::SpinEcho] {
        println!("{} local minima below 1e-2:", v.as_str());
        for m in scan.local_minima(v).iter().filter(|m| m.eps_avg < 1e-2) {
            println!(
                "  tau/T_c {:6.2}  omega {:.4}  <eps> {:.3e}  eps(0) {:.3e}",
                m.tau_over_period, m.omega_opt, m.eps_avg, m.eps_phi0
            );
        }
        let first = scan.curve(v).into_iter().find(|r| r.eps_avg <= 1e-4);
        match first {
            Some(r) => println!("  first <eps> <= 1e-4 at tau/T_c = {:.2}", r.tau_over_period),
            None => println!("  <eps> stays above 1e-4"),
        }
    }
}
