//! Command-line front end: sequence files, CSV emitters and the subcommands.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fidelity::{spin_echo, GateAnalysis};
use crate::optimizer::{anneal_search, sensitivity_scan, ParamSelector, SearchConfig};
use crate::sequence::{expand_symmetric, Parametrization, Pulse, PulseSequence, SymmetricParams};
use crate::studies::{
    evaluate_published, pareto_area_vs_tau, pareto_campaign, single_pulse_scan, tau_grid, trajectories,
    ParetoRow, ScanOptions,
};
use crate::trap::{CouplingTable, TrapConfig};

pub const SCHEMA_VERSION: u32 = 1;
pub const UNITS: &str = "omega_c=1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SCAN_HEADER: [&str; 5] = ["tau_over_period", "omega_opt", "eps_avg", "eps_phi0", "variant"];
pub const ORBIT_HEADER: [&str; 5] = ["t", "mode", "phi_o", "re_alpha", "im_alpha"];
pub const PARETO_HEADER: [&str; 4] = ["n_pulses", "tau_over_period", "area", "eps"];
pub const SENSITIVITY_HEADER: [&str; 4] = ["param", "sigma", "eps", "c_fit"];
pub const SUMMARY_HEADER: [&str; 7] = ["n_pulses", "tau_over_period", "area", "eps", "omega", "restart", "file"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// The gate was evaluated but missed the threshold.
    Threshold,
    Parse,
    Validation,
    NoSolution,
}

/// A failed command together with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: FailureKind,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Parse,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Validation,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Threshold => 1,
            FailureKind::Parse => 2,
            FailureKind::Validation => 3,
            FailureKind::NoSolution => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::InsufficientData(_) => FailureKind::NoSolution,
            _ => FailureKind::Validation,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSpec {
    pub omega_c: f64,
    pub eta_c: f64,
    pub nbar_c: f64,
    pub nbar_s: f64,
}

impl From<&TrapConfig> for TrapSpec {
    fn from(t: &TrapConfig) -> Self {
        Self {
            omega_c: t.omega_c,
            eta_c: t.eta_c,
            nbar_c: t.nbar_c,
            nbar_s: t.nbar_s,
        }
    }
}

impl TrapSpec {
    pub fn config(&self) -> CliResult<TrapConfig> {
        if self.omega_c != 1.0 {
            return Err(CliError::validation(format!(
                "omega_c must be 1 in units {UNITS}, got {}",
                self.omega_c
            )));
        }
        Ok(TrapConfig::new(self.eta_c, self.nbar_c, self.nbar_s)?)
    }
}

/// How the pulse list was generated. When the half-sequence parameters are
/// present the pulse list must equal their expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    pub parametrization: Parametrization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<SymmetricParams>,
}

/// On-disk pulse sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub schema_version: u32,
    pub units: String,
    pub trap: TrapSpec,
    pub pulses: Vec<Pulse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<Descriptor>,
}

impl SequenceFile {
    pub fn new(seq: &PulseSequence, trap: &TrapConfig, symmetric: Option<SymmetricParams>) -> Self {
        let descriptor = (seq.parametrization() != Parametrization::General || symmetric.is_some()).then(|| Descriptor {
            parametrization: seq.parametrization(),
            symmetric,
        });
        Self {
            schema_version: SCHEMA_VERSION,
            units: UNITS.to_string(),
            trap: trap.into(),
            pulses: seq.pulses().to_vec(),
            descriptor,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        if file.units != UNITS {
            return Err(CliError::parse(format!("units must be \"{UNITS}\", got \"{}\"", file.units)));
        }
        Ok(file)
    }

    /// Pretty JSON; floats are written in shortest round-trip form.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sequence files always serialize");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError {
            message: format!("{}: {}", path.display(), e.message),
            ..e
        })
    }

    /// Validated sequence and trap.
    pub fn sequence(&self) -> CliResult<(PulseSequence, TrapConfig)> {
        let trap = self.trap.config()?;
        let par = self.descriptor.as_ref().map_or(Parametrization::General, |d| d.parametrization);
        let seq = PulseSequence::new(self.pulses.clone(), par)?;
        if let Some(p) = self.descriptor.as_ref().and_then(|d| d.symmetric.as_ref()) {
            let expected = expand_symmetric(p, p.n_pulses())?;
            let scale = seq.pulses().iter().map(|q| q.t_end().abs().max(q.amplitude.abs()).max(q.omega.abs())).fold(1.0, f64::max);
            let close = expected.len() == seq.len()
                && expected.pulses().iter().zip(seq.pulses()).all(|(a, b)| {
                    let d = [a.t_start - b.t_start, a.duration - b.duration, a.amplitude - b.amplitude, a.omega - b.omega, a.dphi - b.dphi];
                    d.iter().all(|x| x.abs() <= 1e-12 * scale)
                });
            if !close {
                return Err(CliError::validation("pulse list does not match the symmetric descriptor"));
            }
        }
        Ok((seq, trap))
    }
}

/// Locale-independent shortest round-trip rendering; scientific notation
/// outside `[1e-4, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// CSV text with a `#` comment header carrying the schema and tool versions
/// and the seed.
pub fn csv_text(header: &[&str], seed: Option<u64>, notes: &[String], rows: &[Vec<String>]) -> String {
    let mut out = format!(
        "# schema_version={SCHEMA_VERSION} tool=fastgate {TOOL_VERSION} seed={}\n",
        seed.map_or("none".to_string(), |s| s.to_string())
    );
    for n in notes {
        out.push_str("# ");
        out.push_str(n);
        out.push('\n');
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv"));
    out
}

/// Rows of a CSV written by [`csv_text`], comment lines skipped.
pub fn read_csv(text: &str) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| CliError::parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| CliError::parse(e.to_string()))?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::validation(format!("{}: {e}", dir.display())))?;
            }
            fs::write(p, text).map_err(|e| CliError::validation(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Comma-separated numbers given as one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

fn parse_list(s: &str) -> std::result::Result<FloatList, String> {
    if s.trim().is_empty() {
        return Ok(FloatList(Vec::new()));
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}")))
        .collect::<std::result::Result<_, _>>()
        .map(FloatList)
}

fn parse_selector(s: &str) -> std::result::Result<ParamSelector, String> {
    match s {
        "durations" => Ok(ParamSelector::Durations),
        "amplitudes" => Ok(ParamSelector::Amplitudes),
        "gaps" => Ok(ParamSelector::Gaps),
        "omega" => Ok(ParamSelector::Omega),
        _ => {
            let (kind, idx) = s.split_once(':').ok_or_else(|| format!("unknown parameter {s}"))?;
            let n: usize = idx.parse().map_err(|e| format!("{s}: {e}"))?;
            match kind {
                "duration" => Ok(ParamSelector::Duration(n)),
                "amplitude" => Ok(ParamSelector::Amplitude(n)),
                _ => Err(format!("unknown parameter {s}")),
            }
        }
    }
}

/// Fractional perturbations `1e-4 .. 1e-2`, log spaced.
pub fn default_sigmas() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-4.0 + 0.25 * k as f64)).collect()
}

#[derive(Debug, Parser)]
#[command(name = "fastgate", version, about = "Pulse-sequence design for fast two-ion phase gates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct TrapArgs {
    /// COM Lamb-Dicke parameter.
    #[arg(long, default_value_t = 0.1)]
    pub eta_c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nbar_c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nbar_s: f64,
}

impl TrapArgs {
    fn config(&self) -> CliResult<TrapConfig> {
        Ok(TrapConfig::new(self.eta_c, self.nbar_c, self.nbar_s)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infidelity, residuals and phase of a sequence file.
    Evaluate {
        file: PathBuf,
        /// Also evaluate eps at this many equally spaced optical phases.
        #[arg(long)]
        phi_grid: Option<usize>,
        /// Evaluate the sequence applied twice with a spin flip in between.
        #[arg(long)]
        spin_echo: bool,
        /// Delay between the two passes of the echo.
        #[arg(long, default_value_t = 0.0)]
        echo_gap: f64,
        /// Rescale the amplitudes to <Psi> = pi before evaluating.
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 1e-4)]
        threshold: f64,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Global search; writes one sequence file per solution and a summary.
    Optimize {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        trap: TrapArgs,
    },
    /// Single-pulse and spin-echo infidelity against gate time.
    Scan {
        /// First gate time in COM periods.
        #[arg(long, default_value_t = 1.0)]
        from: f64,
        #[arg(long, default_value_t = 20.0)]
        to: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        trap: TrapArgs,
    },
    /// Area against gate time over found solutions.
    Pareto {
        /// Directories of sequence files; without any, a search campaign is run.
        #[arg(long = "input")]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Restarts per campaign window.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Fit the slope over gate times below this many periods.
        #[arg(long, default_value_t = 2.0)]
        fit_below: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        trap: TrapArgs,
    },
    /// Phase-space orbits of the reference states.
    Orbit {
        file: PathBuf,
        /// Comma-separated optical phases.
        #[arg(long, default_value = "0,1.5707963267948966", value_parser = parse_list)]
        phases: FloatList,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quadratic sensitivity of the infidelity to fractional parameter errors.
    Sensitivity {
        file: PathBuf,
        /// durations, amplitudes, gaps, omega, duration:N or amplitude:N.
        #[arg(long = "param", value_parser = parse_selector)]
        params: Vec<ParamSelector>,
        /// Comma-separated fractional errors (default 1e-4 .. 1e-2).
        #[arg(long, value_parser = parse_list)]
        sigmas: Option<FloatList>,
        /// Re-optimize the carrier frequency for each perturbed sequence.
        #[arg(long)]
        retune: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the normalized example sequences as sequence files.
    Published {
        #[arg(long)]
        out: PathBuf,
    },
}

/// Report of `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateReport {
    pub n_pulses: usize,
    pub spin_echo: bool,
    pub scale: f64,
    pub psi: f64,
    pub eps_avg: f64,
    pub eps_displacement: f64,
    pub eps_psi_bias: f64,
    pub eps_psi_variance: f64,
    pub eps_single_qubit: f64,
    pub residuals: Vec<(String, f64)>,
    pub tau: f64,
    pub tau_over_period: f64,
    pub area: f64,
    /// `(phi_o, eps)` when a grid was requested.
    pub phi_grid: Vec<(f64, f64)>,
    pub threshold: f64,
    pub pass: bool,
}

impl fmt::Display for EvaluateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "pulses {}{}  tau/T_c {:.6}  area {:.6}",
            self.n_pulses,
            if self.spin_echo { " (x2, spin echo)" } else { "" },
            self.tau_over_period,
            self.area
        )?;
        if self.scale != 1.0 {
            writeln!(f, "amplitude scale {:.9}", self.scale)?;
        }
        writeln!(f, "<Psi> {:.12}", self.psi)?;
        writeln!(
            f,
            "<eps> {:.6e}  (displacement {:.3e}, phase bias {:.3e}, phase variance {:.3e}, single-qubit {:.3e})",
            self.eps_avg, self.eps_displacement, self.eps_psi_bias, self.eps_psi_variance, self.eps_single_qubit
        )?;
        for (name, v) in &self.residuals {
            writeln!(f, "  |{name}| {v:.3e}")?;
        }
        if !self.phi_grid.is_empty() {
            let mean = self.phi_grid.iter().map(|p| p.1).sum::<f64>() / self.phi_grid.len() as f64;
            writeln!(f, "phi_o,eps")?;
            for (p, e) in &self.phi_grid {
                writeln!(f, "{},{}", fmt_num(*p), fmt_num(*e))?;
            }
            writeln!(f, "grid mean {mean:.6e}")?;
        }
        write!(
            f,
            "{} <eps> {} threshold {:e}",
            if self.pass { "PASS" } else { "FAIL" },
            if self.pass { "<" } else { ">=" },
            self.threshold
        )
    }
}

pub fn evaluate_file(
    file: &SequenceFile,
    phi_grid: Option<usize>,
    echo: Option<f64>,
    normalize: bool,
    threshold: f64,
) -> CliResult<EvaluateReport> {
    let (mut seq, trap) = file.sequence()?;
    let coupling = CouplingTable::canonical();
    let mut scale = 1.0;
    if normalize {
        let psi = match echo {
            Some(gap) => spin_echo(&seq, &trap, &coupling, gap)?.analysis.mean_psi(),
            None => GateAnalysis::new(&seq, &trap, &coupling).mean_psi(),
        };
        if !(psi > 0.0 && psi.is_finite()) {
            return Err(Error::NotNormalizable(psi).into());
        }
        scale = (std::f64::consts::PI / psi).sqrt();
        seq = seq.scaled(scale);
    }
    let (analysis, residuals, tau, area) = match echo {
        Some(gap) => {
            let e = spin_echo(&seq, &trap, &coupling, gap)?;
            let r = e.residuals();
            (e.analysis, r, e.duration, 2.0 * seq.total_area())
        }
        None => {
            let a = GateAnalysis::new(&seq, &trap, &coupling);
            let r = a.residuals();
            (a, r, seq.duration(), seq.total_area())
        }
    };
    let eps = analysis.averaged_epsilon();
    let grid = match phi_grid {
        Some(0) => return Err(CliError::validation("--phi-grid needs at least one point")),
        Some(n) => (0..n)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / n as f64;
                (phi, analysis.metrics_at(phi).epsilon)
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(EvaluateReport {
        n_pulses: seq.len(),
        spin_echo: echo.is_some(),
        scale,
        psi: analysis.mean_psi(),
        eps_avg: eps.total,
        eps_displacement: eps.displacement,
        eps_psi_bias: eps.psi_bias,
        eps_psi_variance: eps.psi_variance,
        eps_single_qubit: eps.single_qubit,
        residuals: crate::fidelity::ConditionResiduals::names()
            .iter()
            .zip(residuals.as_array())
            .map(|(n, v)| (n.to_string(), v.norm()))
            .collect(),
        tau,
        tau_over_period: tau / std::f64::consts::TAU,
        area,
        phi_grid: grid,
        threshold,
        pass: eps.total < threshold,
    })
}

fn summary_row(n: usize, tau_over_period: f64, area: f64, eps: f64) -> Vec<String> {
    vec![n.to_string(), fmt_num(tau_over_period), fmt_num(area), fmt_num(eps)]
}

/// Runs the search and renders the summary CSV plus one sequence file per
/// solution, named `solution_NNN.json`.
pub fn optimize_outputs(config: &SearchConfig, trap: &TrapConfig) -> CliResult<(String, Vec<(String, String)>)> {
    let solutions = anneal_search(config, trap, &CouplingTable::canonical())?;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for (k, s) in solutions.iter().enumerate() {
        let name = format!("solution_{k:03}.json");
        files.push((name.clone(), SequenceFile::new(&s.sequence, trap, None).to_json()));
        let mut row = summary_row(s.sequence.len(), s.tau_over_period(), s.area, s.epsilon);
        row.push(fmt_num(s.sequence.pulses()[0].omega));
        row.push(s.provenance.restart.to_string());
        row.push(name);
        rows.push(row);
    }
    let notes = vec![format!(
        "n_pulses={} parametrization={} restarts={} threshold={:e}",
        config.n_pulses,
        config.parametrization.as_str(),
        config.restarts,
        config.effective_threshold()
    )];
    Ok((csv_text(&SUMMARY_HEADER, Some(config.seed), &notes, &rows), files))
}

pub fn scan_csv(grid: &[f64], trap: &TrapConfig) -> String {
    let r = single_pulse_scan(grid, trap, &CouplingTable::canonical(), &ScanOptions::default());
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|x| {
            vec![
                fmt_num(x.tau_over_period),
                fmt_num(x.omega_opt),
                fmt_num(x.eps_avg),
                fmt_num(x.eps_phi0),
                x.variant.as_str().to_string(),
            ]
        })
        .collect();
    csv_text(&SCAN_HEADER, None, &[], &rows)
}

pub fn orbit_csv(seq: &PulseSequence, trap: &TrapConfig, phases: &[f64], samples: usize) -> String {
    let mut rows = Vec::new();
    for tr in trajectories(seq, trap, &CouplingTable::canonical(), phases, samples) {
        for (t, a) in &tr.points {
            rows.push(vec![
                fmt_num(*t),
                tr.mode.label().to_string(),
                fmt_num(tr.phi_o),
                fmt_num(a.re),
                fmt_num(a.im),
            ]);
        }
    }
    csv_text(&ORBIT_HEADER, None, &[], &rows)
}

pub fn sensitivity_csv(
    seq: &PulseSequence,
    trap: &TrapConfig,
    params: &[ParamSelector],
    sigmas: &[f64],
    retune: bool,
) -> CliResult<String> {
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for &p in params {
        let fit = sensitivity_scan(seq, trap, &CouplingTable::canonical(), p, sigmas, retune)?;
        notes.push(format!(
            "{}: baseline={:e} c={} r_squared={}",
            p.label(),
            fit.baseline,
            fmt_num(fit.c),
            fmt_num(fit.r_squared)
        ));
        for (s, e) in &fit.points {
            rows.push(vec![p.label(), fmt_num(*s), fmt_num(*e), fmt_num(fit.c)]);
        }
    }
    if retune {
        notes.push("carrier frequency retuned after each perturbation".into());
    }
    Ok(csv_text(&SENSITIVITY_HEADER, None, &notes, &rows))
}

fn load_rows(dirs: &[PathBuf]) -> CliResult<Vec<ParetoRow>> {
    let coupling = CouplingTable::canonical();
    let mut rows = Vec::new();
    for d in dirs {
        let mut paths: Vec<PathBuf> = fs::read_dir(d)
            .map_err(|e| CliError::parse(format!("{}: {e}", d.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in paths {
            let (seq, trap) = SequenceFile::load(&p)?.sequence()?;
            rows.push(ParetoRow {
                n_pulses: seq.len(),
                tau_over_period: seq.duration_over_period(),
                area: seq.total_area(),
                eps: GateAnalysis::new(&seq, &trap, &coupling).averaged_epsilon().total,
                parametrization: seq.parametrization(),
            });
        }
    }
    Ok(rows)
}

fn run_command(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Evaluate {
            file,
            phi_grid,
            spin_echo,
            echo_gap,
            normalize,
            threshold,
            out,
        } => {
            let f = SequenceFile::load(&file)?;
            let report = evaluate_file(&f, phi_grid, spin_echo.then_some(echo_gap), normalize, threshold)?;
            println!("{report}");
            if let Some(p) = out {
                let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
                emit(Some(&p), &json)?;
            }
            if report.pass {
                Ok(())
            } else {
                Err(CliError {
                    kind: FailureKind::Threshold,
                    message: format!("<eps> = {:e} is not below {:e}", report.eps_avg, threshold),
                })
            }
        }
        Command::Optimize { config, seed, out, trap } => {
            let text = fs::read_to_string(&config).map_err(|e| CliError::parse(format!("{}: {e}", config.display())))?;
            let mut cfg: SearchConfig =
                serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", config.display())))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let (summary, files) = optimize_outputs(&cfg, &trap.config()?)?;
            match &out {
                Some(dir) => {
                    for (name, body) in &files {
                        emit(Some(&dir.join(name)), body)?;
                    }
                    emit(Some(&dir.join("summary.csv")), &summary)?;
                    eprintln!("{} solutions written to {}", files.len(), dir.display());
                }
                None => emit(None, &summary)?,
            }
            if files.is_empty() {
                return Err(CliError {
                    kind: FailureKind::NoSolution,
                    message: "no solutions".into(),
                });
            }
            Ok(())
        }
        Command::Scan {
            from,
            to,
            step,
            out,
            trap,
        } => {
            if !(step > 0.0 && from.is_finite() && to.is_finite()) {
                return Err(CliError::parse("--step must be positive and the range finite"));
            }
            let trap = trap.config()?;
            emit(out.as_deref(), &scan_csv(&tau_grid(from, to, step), &trap))
        }
        Command::Pareto {
            inputs,
            seed,
            restarts,
            fit_below,
            out,
            trap,
        } => {
            let trap = trap.config()?;
            let rows = if inputs.is_empty() {
                pareto_campaign(seed, restarts, &trap, &CouplingTable::canonical())?
                    .iter()
                    .map(ParetoRow::from)
                    .collect()
            } else {
                load_rows(&inputs)?
            };
            let fit = pareto_area_vs_tau(&rows, fit_below);
            let mut notes = Vec::new();
            let mut sorted = rows.clone();
            sorted.sort_by(|a, b| a.tau_over_period.total_cmp(&b.tau_over_period).then(a.area.total_cmp(&b.area)));
            if let Ok(r) = &fit {
                notes.push(format!(
                    "slope={} intercept={} fit_points={} fit_below={}",
                    fmt_num(r.slope),
                    fmt_num(r.intercept),
                    r.fit_points,
                    fmt_num(fit_below)
                ));
            }
            let body: Vec<Vec<String>> = sorted
                .iter()
                .map(|r| summary_row(r.n_pulses, r.tau_over_period, r.area, r.eps))
                .collect();
            let seed = inputs.is_empty().then_some(seed);
            emit(out.as_deref(), &csv_text(&PARETO_HEADER, seed, &notes, &body))?;
            let r = fit?;
            eprintln!("envelope:");
            for e in &r.envelope {
                eprintln!("  N={} tau/T_c={:.4} area={:.3}", e.n_pulses, e.tau_over_period, e.area);
            }
            eprintln!("slope {:.3} over {} points", r.slope, r.fit_points);
            Ok(())
        }
        Command::Orbit {
            file,
            phases,
            samples,
            out,
        } => {
            let (seq, trap) = SequenceFile::load(&file)?.sequence()?;
            emit(out.as_deref(), &orbit_csv(&seq, &trap, &phases.0, samples))
        }
        Command::Sensitivity {
            file,
            params,
            sigmas,
            retune,
            out,
        } => {
            let (seq, trap) = SequenceFile::load(&file)?.sequence()?;
            let params = if params.is_empty() {
                vec![ParamSelector::Durations, ParamSelector::Amplitudes]
            } else {
                params
            };
            let sigmas = sigmas.map_or_else(default_sigmas, |l| l.0);
            emit(out.as_deref(), &sensitivity_csv(&seq, &trap, &params, &sigmas, retune)?)
        }
        Command::Published { out } => {
            let trap = TrapConfig::default();
            let report = evaluate_published(&trap, &CouplingTable::canonical())?;
            for e in &report.entries {
                let body = SequenceFile::new(&e.normalized, &trap, None).to_json();
                emit(Some(&out.join(format!("{}.json", e.label))), &body)?;
                println!(
                    "{:<11} tau/T_c {:.4}  area {:9.3}  <eps> {:.3e}  spread {:.2e}",
                    e.label, e.tau_over_period, e.area, e.eps_avg, e.eps_spread
                );
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
