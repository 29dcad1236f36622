use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::amplitudes::{solve_amplitudes, Constraint, Rows, DEFAULT_CONSTRAINTS};
use super::simplex::{nelder_mead, SimplexOptions};
use crate::error::{Error, Result};
use crate::fidelity::{ConditionResiduals, GateAnalysis};
use crate::sequence::{expand_symmetric, Parametrization, Pulse, PulseSequence, SymmetricParams};
use crate::trap::{CouplingTable, TrapConfig};

/// Solution thresholds on the averaged infidelity.
pub const SOLUTION_THRESHOLD: f64 = 1e-8;
/// Looser threshold for parametrizations with fewer than seven parameters.
pub const SMALL_SPACE_THRESHOLD: f64 = 3e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealSchedule {
    /// Initial temperature in decades of `<eps>`.
    pub t0: f64,
    pub cooling: f64,
    pub steps: usize,
    /// Perturbation size relative to each coordinate's bound width.
    pub step_size: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            t0: 1.0,
            cooling: 0.95,
            steps: 200,
            step_size: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub n_pulses: usize,
    pub parametrization: Parametrization,
    pub omega_bounds: [f64; 2],
    pub duration_bounds: [f64; 2],
    pub gap_bounds: [f64; 2],
    /// Allowed phase offsets for pulses after the first (fixed-omega only).
    pub dphi_grid: Vec<f64>,
    /// Upper limit on the total gate time; `None` for no limit.
    pub max_duration: Option<f64>,
    /// `None` selects the default for the parameter count.
    pub threshold: Option<f64>,
    pub constraints: Vec<Constraint>,
    pub restarts: usize,
    pub seed: u64,
    pub anneal: AnnealSchedule,
    pub simplex: SimplexOptions,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_pulses: 5,
            parametrization: Parametrization::Symmetric,
            omega_bounds: [0.5, 25.0],
            duration_bounds: [0.01, 2.0],
            gap_bounds: [0.0, 2.0],
            dphi_grid: vec![0.0],
            max_duration: None,
            threshold: None,
            constraints: DEFAULT_CONSTRAINTS.to_vec(),
            restarts: 16,
            seed: 1,
            anneal: AnnealSchedule::default(),
            simplex: SimplexOptions::default(),
        }
    }
}

impl SearchConfig {
    pub fn parameter_count(&self) -> usize {
        self.parametrization.parameter_count(self.n_pulses)
    }

    pub fn effective_threshold(&self) -> f64 {
        self.threshold.unwrap_or(if self.parameter_count() < 7 {
            SMALL_SPACE_THRESHOLD
        } else {
            SOLUTION_THRESHOLD
        })
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_pulses == 0 {
            return bad("n_pulses must be at least 1");
        }
        let finite = self
            .omega_bounds
            .iter()
            .chain(&self.duration_bounds)
            .chain(&self.gap_bounds)
            .chain(&self.dphi_grid)
            .all(|x| x.is_finite());
        if !finite {
            return bad("bounds and phase grid must be finite");
        }
        if self.dphi_grid.is_empty() {
            return bad("dphi_grid must not be empty");
        }
        if !(self.anneal.cooling > 0.0 && self.anneal.cooling <= 1.0 && self.anneal.t0 >= 0.0) {
            return bad("annealing needs t0 >= 0 and cooling in (0, 1]");
        }
        Ok(())
    }

    /// Inverted bounds leave nothing to search.
    fn is_empty_space(&self) -> bool {
        let inverted = |b: &[f64; 2]| b[0] > b[1];
        inverted(&self.omega_bounds)
            || inverted(&self.duration_bounds)
            || (inverted(&self.gap_bounds) && self.parametrization != Parametrization::Shaped)
            || self.duration_bounds[1] <= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub restart: usize,
    pub evaluations: usize,
    pub simplex_runs: usize,
    pub anneal_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Normalized to `<Psi> = pi`.
    pub sequence: PulseSequence,
    pub epsilon: f64,
    pub residuals: ConditionResiduals,
    pub tau: f64,
    pub area: f64,
    pub parametrization: Parametrization,
    pub provenance: Provenance,
}

impl Solution {
    pub fn tau_over_period(&self) -> f64 {
        self.tau / TAU
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Coord {
    Omega,
    Duration,
    Gap,
    Phase,
}

/// Maps a search vector to a pulse train and amplitude groups.
#[derive(Debug, Clone)]
pub struct Layout {
    n: usize,
    param: Parametrization,
    coords: Vec<Coord>,
    dphis: Vec<f64>,
}

impl Layout {
    fn new(n: usize, param: Parametrization, dphis: Vec<f64>) -> Self {
        use Coord::*;
        let mut coords = Vec::new();
        match param {
            Parametrization::Symmetric | Parametrization::EqualAmplitude => {
                coords.push(Omega);
                for i in 0..n.div_ceil(2) {
                    coords.push(Duration);
                    if i < n / 2 {
                        coords.push(Gap);
                    }
                }
            }
            Parametrization::FixedOmega => {
                coords.push(Omega);
                for i in 0..n {
                    coords.push(Duration);
                    if i + 1 < n {
                        coords.push(Gap);
                    }
                }
            }
            Parametrization::Shaped => {
                coords.push(Omega);
                coords.extend(std::iter::repeat_n(Duration, n));
            }
            Parametrization::General => {
                for i in 0..n {
                    coords.push(Duration);
                    if i + 1 < n {
                        coords.push(Gap);
                    }
                }
                coords.extend(std::iter::repeat_n(Omega, n));
                coords.extend(std::iter::repeat_n(Phase, n - 1));
            }
        }
        Self {
            n,
            param,
            coords,
            dphis,
        }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    fn bounds(&self, c: &SearchConfig) -> Vec<[f64; 2]> {
        self.coords
            .iter()
            .map(|k| match k {
                Coord::Omega => c.omega_bounds,
                Coord::Duration => c.duration_bounds,
                Coord::Gap => c.gap_bounds,
                Coord::Phase => [0.0, TAU],
            })
            .collect()
    }

    /// Pulses with zero amplitude plus the amplitude group of each pulse.
    fn decode(&self, x: &[f64]) -> Option<(Vec<Pulse>, Vec<usize>)> {
        let n = self.n;
        match self.param {
            Parametrization::Symmetric | Parametrization::EqualAmplitude => {
                let half = &x[1..];
                let durations: Vec<f64> = half.iter().step_by(2).copied().collect();
                let gaps: Vec<f64> = half.iter().skip(1).step_by(2).copied().collect();
                let k = durations.len();
                let p = SymmetricParams::new(durations, gaps, vec![1.0; k], x[0]);
                let seq = expand_symmetric(&p, n).ok()?;
                let groups = if self.param == Parametrization::EqualAmplitude {
                    vec![0; n]
                } else {
                    (0..n).map(|i| i.min(n - 1 - i)).collect()
                };
                Some((seq.pulses().to_vec(), groups))
            }
            Parametrization::FixedOmega | Parametrization::Shaped | Parametrization::General => {
                let general = self.param == Parametrization::General;
                let shaped = self.param == Parametrization::Shaped;
                let timing = if general { x } else { &x[1..] };
                let mut t = 0.0;
                let mut pulses = Vec::with_capacity(n);
                let mut idx = 0;
                for i in 0..n {
                    let d = timing[idx];
                    idx += 1;
                    if !(d > 0.0) {
                        return None;
                    }
                    let (omega, dphi) = if general {
                        let o = x[2 * n - 1 + i];
                        let ph = if i == 0 { 0.0 } else { x[3 * n - 1 + i - 1] };
                        (o, ph)
                    } else {
                        (x[0], self.dphis[i])
                    };
                    pulses.push(Pulse::new(t, d, 0.0, omega, dphi));
                    t += d;
                    if i + 1 < n && !shaped {
                        let g = timing[idx];
                        idx += 1;
                        if !(g >= 0.0) {
                            return None;
                        }
                        t += g;
                    }
                }
                Some((pulses, (0..n).collect()))
            }
        }
    }
}

/// Objective evaluation shared by the search and its tests.
pub struct Objective<'a> {
    pub layout: Layout,
    bounds: Vec<[f64; 2]>,
    config: &'a SearchConfig,
    trap: &'a TrapConfig,
    coupling: &'a CouplingTable,
}

/// Amplitude-solved and (when possible) normalized candidate.
pub struct Candidate {
    pub sequence: PulseSequence,
    pub epsilon: f64,
    pub normalized: bool,
}

impl<'a> Objective<'a> {
    pub fn new(
        config: &'a SearchConfig,
        dphis: Vec<f64>,
        trap: &'a TrapConfig,
        coupling: &'a CouplingTable,
    ) -> Self {
        let layout = Layout::new(config.n_pulses, config.parametrization, dphis);
        let bounds = layout.bounds(config);
        Self {
            layout,
            bounds,
            config,
            trap,
            coupling,
        }
    }

    pub fn candidate(&self, x: &[f64]) -> Option<Candidate> {
        if x.iter().zip(&self.bounds).any(|(v, b)| !(*v >= b[0] && *v <= b[1])) {
            return None;
        }
        let (pulses, groups) = self.layout.decode(x)?;
        let sol = solve_amplitudes(
            &pulses,
            &groups,
            self.trap,
            self.coupling,
            &self.config.constraints,
            Rows::Independent(groups.iter().max().copied().unwrap_or(0)),
            1.0,
        );
        let seq = PulseSequence::new(pulses, self.config.parametrization)
            .ok()?
            .with_amplitudes(&sol.amplitudes)
            .ok()?;
        if let Some(max) = self.config.max_duration {
            if seq.duration() > max {
                return None;
            }
        }
        let analysis = GateAnalysis::new(&seq, self.trap, self.coupling);
        let psi = analysis.mean_psi();
        if !psi.is_finite() {
            return None;
        }
        if psi <= 0.0 {
            let eps = analysis.averaged_epsilon().total + (PI - psi).powi(2) / 9.0;
            return Some(Candidate {
                sequence: seq,
                epsilon: eps,
                normalized: false,
            });
        }
        let s = (PI / psi).sqrt();
        let normalized = seq.scaled(s);
        let eps = analysis.scaled(s).averaged_epsilon().total;
        eps.is_finite().then_some(Candidate {
            sequence: normalized,
            epsilon: eps,
            normalized: true,
        })
    }

    /// `log10 <eps>`, `+inf` outside the feasible region.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.candidate(x)
            .map_or(f64::INFINITY, |c| c.epsilon.max(1e-300).log10())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|b| if b[1] > b[0] { rng.gen_range(b[0]..=b[1]) } else { b[0] })
            .collect()
    }

    fn perturb(&self, x: &[f64], scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        x.iter()
            .zip(&self.bounds)
            .map(|(&v, b)| {
                let w = (b[1] - b[0]) * scale;
                let u: f64 = rng.gen_range(-1.0..=1.0);
                (v + w * u).clamp(b[0], b[1])
            })
            .collect()
    }
}

struct Refined {
    x: Vec<f64>,
    f: f64,
}

/// Repeated simplex runs from the previous optimum until they stop helping.
fn refine(obj: &Objective, x0: &[f64], opts: &SimplexOptions, evals: &mut usize, runs: &mut usize) -> Refined {
    let mut x = x0.to_vec();
    let mut f = obj.value(&x);
    *evals += 1;
    for _ in 0..4 {
        let r = nelder_mead(|y| obj.value(y), &x, opts);
        *evals += r.evaluations;
        *runs += 1;
        let gain = f - r.f;
        if r.f < f {
            x = r.x;
            f = r.f;
        }
        if !(gain > 1e-3) || opts.f_stop.is_some_and(|s| f < s) {
            break;
        }
    }
    Refined { x, f }
}

fn restart(config: &SearchConfig, trap: &TrapConfig, coupling: &CouplingTable, index: usize) -> Option<Solution> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let n = config.n_pulses;
    let dphis: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                config.dphi_grid[rng.gen_range(0..config.dphi_grid.len())]
            }
        })
        .collect();
    let obj = Objective::new(config, dphis, trap, coupling);
    let target = config.effective_threshold().log10();
    // settle well inside the threshold so rounding in the stored file cannot
    // push a solution back over it
    let simplex = SimplexOptions {
        f_stop: Some(config.simplex.f_stop.unwrap_or(target - 2.0)),
        ..config.simplex
    };
    let mut evals = 0;
    let mut runs = 0;

    // a handful of draws so the first simplex starts somewhere feasible
    let mut start = obj.sample(&mut rng);
    for _ in 0..64 {
        if obj.value(&start).is_finite() {
            break;
        }
        start = obj.sample(&mut rng);
    }
    let mut current = refine(&obj, &start, &simplex, &mut evals, &mut runs);
    let mut best_x = current.x.clone();
    let mut best_f = current.f;
    let mut steps = 0;
    let mut temperature = config.anneal.t0;
    while steps < config.anneal.steps && best_f >= target {
        steps += 1;
        let trial_x = obj.perturb(&current.x, config.anneal.step_size, &mut rng);
        let trial = refine(&obj, &trial_x, &simplex, &mut evals, &mut runs);
        let u: f64 = rng.gen();
        let accept = trial.f <= current.f
            || (temperature > 0.0 && trial.f.is_finite() && u < (-(trial.f - current.f) / temperature).exp());
        if trial.f < best_f {
            best_f = trial.f;
            best_x = trial.x.clone();
        }
        if accept {
            current = trial;
        }
        temperature *= config.anneal.cooling;
    }
    if best_f >= target {
        return None;
    }
    let cand = obj.candidate(&best_x)?;
    if !cand.normalized {
        return None;
    }
    let analysis = GateAnalysis::new(&cand.sequence, trap, coupling);
    let epsilon = analysis.averaged_epsilon().total;
    if epsilon >= config.effective_threshold() {
        return None;
    }
    Some(Solution {
        tau: cand.sequence.duration(),
        area: cand.sequence.total_area(),
        residuals: analysis.residuals(),
        parametrization: config.parametrization,
        sequence: cand.sequence,
        epsilon,
        provenance: Provenance {
            seed: config.seed,
            restart: index,
            evaluations: evals,
            simplex_runs: runs,
            anneal_steps: steps,
        },
    })
}

/// Random-restart search: each restart samples a start, refines it with the
/// simplex method and escapes plateaus by annealed perturbations. Restarts run
/// in parallel on independent RNG streams; the merged list is deduplicated and
/// sorted by area, then gate time.
pub fn anneal_search(config: &SearchConfig, trap: &TrapConfig, coupling: &CouplingTable) -> Result<Vec<Solution>> {
    config.validate()?;
    if config.is_empty_space() {
        return Ok(Vec::new());
    }
    let found: Vec<Solution> = (0..config.restarts)
        .into_par_iter()
        .filter_map(|r| restart(config, trap, coupling, r))
        .collect();
    Ok(dedupe_and_sort(found))
}

fn same(a: &Solution, b: &Solution) -> bool {
    (a.tau - b.tau).abs() <= 1e-6 * a.tau.max(b.tau) && (a.area - b.area).abs() <= 1e-6 * a.area.max(b.area)
}

fn dedupe_and_sort(mut v: Vec<Solution>) -> Vec<Solution> {
    v.sort_by(|a, b| {
        a.area
            .total_cmp(&b.area)
            .then(a.tau.total_cmp(&b.tau))
            .then(a.provenance.restart.cmp(&b.provenance.restart))
    });
    let mut out: Vec<Solution> = Vec::with_capacity(v.len());
    for s in v {
        if !out.iter().any(|o| same(o, &s)) {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_follow_parameter_count() {
        let mut c = SearchConfig::default();
        c.n_pulses = 4;
        assert_eq!(c.effective_threshold(), SMALL_SPACE_THRESHOLD);
        c.n_pulses = 5;
        assert_eq!(c.effective_threshold(), SOLUTION_THRESHOLD);
        c.threshold = Some(1e-3);
        assert_eq!(c.effective_threshold(), 1e-3);
    }

    #[test]
    fn layouts_have_expected_dimension() {
        let d = |n, p| Layout::new(n, p, vec![0.0; n]).dimension();
        assert_eq!(d(5, Parametrization::Symmetric), 6);
        assert_eq!(d(4, Parametrization::EqualAmplitude), 5);
        assert_eq!(d(3, Parametrization::Shaped), 4);
        assert_eq!(d(3, Parametrization::FixedOmega), 6);
        assert_eq!(d(3, Parametrization::General), 10);
    }

    #[test]
    fn symmetric_decode_mirrors() {
        let l = Layout::new(5, Parametrization::Symmetric, vec![0.0; 5]);
        let (p, g) = l.decode(&[20.0, 0.1, 0.03, 0.29, 0.27, 0.27]).unwrap();
        assert_eq!(g, vec![0, 1, 2, 1, 0]);
        assert!((p[4].duration - 0.1).abs() < 1e-15);
        assert!((p[4].t_end() - (2.0 * (0.1 + 0.03 + 0.29 + 0.27) + 0.27)).abs() < 1e-12);
    }

    #[test]
    fn inverted_bounds_give_no_solutions() {
        let c = SearchConfig {
            omega_bounds: [5.0, 1.0],
            ..SearchConfig::default()
        };
        let s = anneal_search(&c, &TrapConfig::default(), &CouplingTable::canonical()).unwrap();
        assert!(s.is_empty());
    }
}
