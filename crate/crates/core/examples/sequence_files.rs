//! Writes an example sequence in the on-disk JSON format, reads it back and
//! evaluates it as the `evaluate` subcommand would.

use fastgate::cli::{evaluate_file, SequenceFile};
use fastgate::sequence::{expand_symmetric, SymmetricParams};
use fastgate::{normalize_psi, CouplingTable, TrapConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trap = TrapConfig::default();
    let params = SymmetricParams::new(
        vec![0.0953071, 0.288972, 0.269998],
        vec![0.0305622, 0.272151],
        vec![1.0, 2.91057, 3.59685],
        20.4761,
    );
    let raw = expand_symmetric(&params, 5)?;
    let norm = normalize_psi(&raw, &trap, &CouplingTable::canonical())?;
    let scaled = SymmetricParams {
        amplitudes: params.amplitudes.iter().map(|a| a * norm.scale).collect(),
        ..params
    };
    let file = SequenceFile::new(&norm.sequence, &trap, Some(scaled));
    let text = file.to_json();
    println!("{text}");
    let back = SequenceFile::from_json(&text)?;
    assert_eq!(back, file);
    let report = evaluate_file(&back, Some(16), None, false, 1e-4)?;
    println!("{report}");
    Ok(())
}
