//! A five-pulse example gate run as a spin echo: the light-shift term cancels
//! between the two passes at the cost of twice the gate time.

use std::f64::consts::FRAC_1_SQRT_2;

use fastgate::studies::published_sequences;
use fastgate::{normalize_psi, spin_echo, CouplingTable, GateAnalysis, TrapConfig};

fn main() -> fastgate::Result<()> {
    let trap = TrapConfig::default();
    let coupling = CouplingTable::canonical();
    let (_, _, raw) = published_sequences()?.remove(1);
    let single = normalize_psi(&raw, &trap, &coupling)?.sequence;
    let a = GateAnalysis::new(&single, &trap, &coupling);
    let eps = a.averaged_epsilon();
    println!(
        "single pass: tau/T_c {:.4}  <eps> {:.3e}  (single-qubit part {:.3e})  |theta+| {:.3e}",
        single.duration_over_period(),
        eps.total,
        eps.single_qubit,
        a.residuals().theta_plus.norm()
    );
    // two passes double the conditional phase, so each runs at 1/sqrt(2)
    let echo = spin_echo(&single.scaled(FRAC_1_SQRT_2), &trap, &coupling, 0.0)?;
    let e = echo.analysis.averaged_epsilon();
    println!(
        "spin echo:   tau/T_c {:.4}  <eps> {:.3e}  (single-qubit part {:.3e})  <Psi> {:.6}",
        echo.duration / std::f64::consts::TAU,
        e.total,
        e.single_qubit,
        echo.analysis.mean_psi()
    );
    let worst = echo.analysis.theta_plus.iter().map(|t| t.norm()).fold(0.0, f64::max);
    println!("largest light-shift amplitude left after the echo: {worst:.1e}");
    Ok(())
}
