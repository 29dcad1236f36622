use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::phasespace::{circle_fn, pulse_a_pm};
use crate::sequence::Pulse;
use crate::trap::{CouplingTable, Mode, SpinState, TrapConfig};

/// A complex closure condition that is linear in the pulse amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    ComPlus,
    ComMinus,
    StretchPlus,
    StretchMinus,
    LightShift,
}

/// Default row order for the inner solve.
pub const DEFAULT_CONSTRAINTS: [Constraint; 3] = [Constraint::ComPlus, Constraint::ComMinus, Constraint::LightShift];

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSolution {
    /// One amplitude per pulse; group 0 carries the reference value.
    pub amplitudes: Vec<f64>,
    /// Amplitude per group.
    pub group_amplitudes: Vec<f64>,
    pub unknowns: usize,
    pub rows_used: usize,
    pub rank: usize,
    /// The selected rows did not determine every unknown; the minimum-norm
    /// solution was returned.
    pub degenerate: bool,
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Value of `constraint` contributed by `pulse` at unit amplitude.
fn unit_coefficient(c: Constraint, pulse: &Pulse, trap: &TrapConfig, coupling: &CouplingTable) -> Complex64 {
    let force = |mode: Mode, plus: bool| {
        let g = coupling.force(SpinState::reference_for(mode), mode);
        let (ap, am) = pulse_a_pm(pulse, 1.0, trap.freq(mode), pulse.t_end());
        let scale = -0.5 * trap.eta(mode) * g.norm();
        if plus {
            scale * cis(g.arg()) * ap
        } else {
            scale * cis(-g.arg()) * am
        }
    };
    match c {
        Constraint::ComPlus => force(Mode::Com, true),
        Constraint::ComMinus => force(Mode::Com, false),
        Constraint::StretchPlus => force(Mode::Stretch, true),
        Constraint::StretchMinus => force(Mode::Stretch, false),
        Constraint::LightShift => {
            let g = coupling.light_shift(SpinState::UpUp);
            Complex64::new(0.0, -0.5) * g * cis(pulse.start_phase()) * circle_fn(pulse.omega, pulse.duration)
        }
    }
}

/// Row selection for [`solve_amplitudes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rows {
    /// Every non-zero row; the system is solved in the least-squares sense.
    All,
    /// Rows in order, skipping any that is linearly dependent on those already
    /// kept, up to this many.
    Independent(usize),
}

/// Solves the selected closure conditions for the pulse amplitudes.
///
/// Pulse `n` has amplitude `x[groups[n]]`; group 0 is held at `reference` and
/// the remaining groups are unknowns. Real and imaginary parts of the
/// constraints (in the given order) become rows, filtered by `rows`. The
/// system is solved in the least-squares, minimum-norm sense by SVD.
pub fn solve_amplitudes(
    pulses: &[Pulse],
    groups: &[usize],
    trap: &TrapConfig,
    coupling: &CouplingTable,
    constraints: &[Constraint],
    rows: Rows,
    reference: f64,
) -> AmplitudeSolution {
    assert_eq!(pulses.len(), groups.len(), "one group per pulse");
    let n_groups = groups.iter().max().map_or(0, |g| g + 1);
    let unknowns = n_groups.saturating_sub(1);
    let finish = |group_amplitudes: Vec<f64>, rows_used, rank| AmplitudeSolution {
        amplitudes: groups.iter().map(|&g| group_amplitudes[g]).collect(),
        group_amplitudes,
        unknowns,
        rows_used,
        rank,
        degenerate: rank < unknowns,
    };
    if n_groups == 0 {
        return finish(Vec::new(), 0, 0);
    }
    if unknowns == 0 {
        return finish(vec![reference], 0, 0);
    }

    // candidate rows: [reference coefficient, unknown coefficients...]
    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(2 * constraints.len());
    for &c in constraints {
        let mut re = vec![0.0; n_groups];
        let mut im = vec![0.0; n_groups];
        for (p, &g) in pulses.iter().zip(groups) {
            let v = unit_coefficient(c, p, trap, coupling);
            re[g] += v.re;
            im[g] += v.im;
        }
        candidates.push(re);
        candidates.push(im);
    }

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<&Vec<f64>> = Vec::new();
    let limit = match rows {
        Rows::All => usize::MAX,
        Rows::Independent(k) => k,
    };
    for row in &candidates {
        if kept.len() == limit {
            break;
        }
        if rows == Rows::All {
            if row[1..].iter().any(|&x| x != 0.0) {
                kept.push(row);
            }
            continue;
        }
        let mut r: Vec<f64> = row[1..].to_vec();
        let norm0 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for b in &basis {
            let d: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 * norm0 {
            r.iter_mut().for_each(|x| *x /= norm);
            basis.push(r);
            kept.push(row);
        }
    }
    if kept.is_empty() {
        let mut amps = vec![0.0; n_groups];
        amps[0] = reference;
        return finish(amps, 0, 0);
    }

    let a = DMatrix::from_fn(kept.len(), unknowns, |i, j| kept[i][j + 1]);
    let b = DVector::from_fn(kept.len(), |i, _| -kept[i][0] * reference);
    let svd = a.svd(true, true);
    let s_max = svd.singular_values.max();
    let cutoff = 1e-12 * s_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let x = if s_max > 0.0 {
        svd.solve(&b, cutoff).expect("u and v were computed")
    } else {
        DVector::zeros(unknowns)
    };
    let mut amps = Vec::with_capacity(n_groups);
    amps.push(reference);
    amps.extend(x.iter());
    finish(amps, kept.len(), rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::GateAnalysis;
    use crate::sequence::{Parametrization, PulseSequence};

    fn pulses(n: usize) -> Vec<Pulse> {
        (0..n)
            .map(|k| Pulse::new(1.3 * k as f64, 0.7 + 0.1 * k as f64, 0.0, 3.1, 0.0))
            .collect()
    }

    #[test]
    fn two_pulses_single_constraint_closes_com_plus() {
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let p = pulses(2);
        let sol = solve_amplitudes(&p, &[0, 1], &trap, &c, &[Constraint::ComPlus], Rows::All, 1.0);
        assert_eq!(sol.rows_used, 2);
        assert!(!sol.degenerate);
        // 2x1 least squares: x = -(a . b) / |a|^2 over re/im rows
        let a0 = unit_coefficient(Constraint::ComPlus, &p[0], &trap, &c);
        let a1 = unit_coefficient(Constraint::ComPlus, &p[1], &trap, &c);
        let expected = -(a0.re * a1.re + a0.im * a1.im) / a1.norm_sqr();
        assert!((sol.amplitudes[1] - expected).abs() < 1e-12 * expected.abs().max(1.0));
        let one = solve_amplitudes(&p, &[0, 1], &trap, &c, &[Constraint::ComPlus], Rows::Independent(1), 1.0);
        assert_eq!(one.rows_used, 1);
        assert!((one.amplitudes[1] + a0.re / a1.re).abs() < 1e-12 * one.amplitudes[1].abs().max(1.0));
    }

    #[test]
    fn solved_amplitudes_zero_the_selected_conditions() {
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let p = pulses(7);
        let groups: Vec<usize> = (0..7).collect();
        let sol = solve_amplitudes(&p, &groups, &trap, &c, &DEFAULT_CONSTRAINTS, Rows::Independent(6), 1.0);
        assert_eq!(sol.rows_used, 6);
        assert!(!sol.degenerate);
        let seq = PulseSequence::new(p, Parametrization::General)
            .unwrap()
            .with_amplitudes(&sol.amplitudes)
            .unwrap();
        let r = GateAnalysis::new(&seq, &trap, &c).residuals();
        assert!(r.dac_plus.norm() < 1e-12 && r.dac_minus.norm() < 1e-12 && r.theta_plus.norm() < 1e-12, "{r:?}");
    }

    #[test]
    fn recovers_amplitude_ratios_of_a_constructed_sequence() {
        // Choose the last amplitude so that the sequence itself satisfies the
        // constraint, then check the solver returns those amplitudes.
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let p = pulses(3);
        let coeff: Vec<Complex64> = p.iter().map(|q| unit_coefficient(Constraint::ComPlus, q, &trap, &c)).collect();
        // a0 + x1 a1 + x2 a2 = 0 over re/im
        let m = nalgebra::Matrix2::new(coeff[1].re, coeff[2].re, coeff[1].im, coeff[2].im);
        let rhs = nalgebra::Vector2::new(-coeff[0].re, -coeff[0].im);
        let x = m.lu().solve(&rhs).unwrap();
        let sol = solve_amplitudes(&p, &[0, 1, 2], &trap, &c, &[Constraint::ComPlus], Rows::Independent(2), 1.0);
        assert!((sol.amplitudes[1] - x[0]).abs() < 1e-10 * x[0].abs().max(1.0));
        assert!((sol.amplitudes[2] - x[1]).abs() < 1e-10 * x[1].abs().max(1.0));
    }

    #[test]
    fn zero_rows_give_zero_with_flag() {
        let trap = TrapConfig::default();
        let zero = Complex64::default();
        let table = CouplingTable::new([[zero; 2]; 4], [zero; 4]);
        let sol = solve_amplitudes(&pulses(3), &[0, 1, 2], &trap, &table, &DEFAULT_CONSTRAINTS, Rows::Independent(2), 1.0);
        assert!(sol.degenerate);
        assert_eq!(sol.amplitudes, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn scale_consistent() {
        let trap = TrapConfig::default();
        let c = CouplingTable::canonical();
        let p = pulses(4);
        let g = [0, 1, 2, 3];
        let a = solve_amplitudes(&p, &g, &trap, &c, &DEFAULT_CONSTRAINTS, Rows::Independent(3), 1.0);
        let b = solve_amplitudes(&p, &g, &trap, &c, &DEFAULT_CONSTRAINTS, Rows::Independent(3), 2.5);
        for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
            assert!((2.5 * x - y).abs() < 1e-12 * y.abs().max(1.0));
        }
    }
}
