//! Trap modes, spin states and the spin-dependent coupling table.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Motional normal mode of a two-ion crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Com,
    Stretch,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Com, Mode::Stretch];

    pub fn index(self) -> usize {
        match self {
            Mode::Com => 0,
            Mode::Stretch => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Com => "c",
            Mode::Stretch => "s",
        }
    }
}

/// Two-ion product spin state `|m1 m2>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinState {
    UpUp,
    DownDown,
    UpDown,
    DownUp,
}

impl SpinState {
    pub const ALL: [SpinState; 4] = [
        SpinState::UpUp,
        SpinState::DownDown,
        SpinState::UpDown,
        SpinState::DownUp,
    ];

    pub fn index(self) -> usize {
        match self {
            SpinState::UpUp => 0,
            SpinState::DownDown => 1,
            SpinState::UpDown => 2,
            SpinState::DownUp => 3,
        }
    }

    /// State after a pi rotation of both spins.
    pub fn flip(self) -> SpinState {
        match self {
            SpinState::UpUp => SpinState::DownDown,
            SpinState::DownDown => SpinState::UpUp,
            SpinState::UpDown => SpinState::DownUp,
            SpinState::DownUp => SpinState::UpDown,
        }
    }

    /// Sign of this state's phase in the conditional phase `Psi`.
    pub fn psi_sign(self) -> f64 {
        match self {
            SpinState::UpUp | SpinState::DownDown => 1.0,
            SpinState::UpDown | SpinState::DownUp => -1.0,
        }
    }

    /// Weights of this state's phase in the single-qubit angles `(theta1, theta2)`.
    pub fn theta_weights(self) -> (f64, f64) {
        match self {
            SpinState::UpUp => (0.5, 0.5),
            SpinState::DownDown => (-0.5, -0.5),
            SpinState::UpDown => (0.5, -0.5),
            SpinState::DownUp => (-0.5, 0.5),
        }
    }

    /// The state whose orbit in `mode` is used for reporting and for the
    /// condition residuals.
    pub fn reference_for(mode: Mode) -> SpinState {
        match mode {
            Mode::Com => SpinState::UpUp,
            Mode::Stretch => SpinState::UpDown,
        }
    }
}

/// Two equal-mass ions in a harmonic trap, in units where `omega_c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub omega_c: f64,
    pub omega_s: f64,
    pub eta_c: f64,
    pub eta_s: f64,
    pub nbar_c: f64,
    pub nbar_s: f64,
}

impl TrapConfig {
    /// Builds the configuration from the COM Lamb-Dicke parameter and the thermal
    /// occupancies. The stretch frequency is `sqrt(3)` and the stretch Lamb-Dicke
    /// parameter follows from the mode size scaling as `omega^{-1/2}`.
    pub fn new(eta_c: f64, nbar_c: f64, nbar_s: f64) -> Result<Self> {
        if !(eta_c.is_finite() && eta_c > 0.0) {
            return Err(Error::InvalidTrap(format!("eta_c must be positive, got {eta_c}")));
        }
        if !(nbar_c.is_finite() && nbar_c >= 0.0 && nbar_s.is_finite() && nbar_s >= 0.0) {
            return Err(Error::InvalidTrap(format!(
                "thermal occupancies must be non-negative, got ({nbar_c}, {nbar_s})"
            )));
        }
        Ok(Self {
            omega_c: 1.0,
            omega_s: 3f64.sqrt(),
            eta_c,
            eta_s: eta_c / 3f64.powf(0.25),
            nbar_c,
            nbar_s,
        })
    }

    pub fn freq(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Com => self.omega_c,
            Mode::Stretch => self.omega_s,
        }
    }

    pub fn eta(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Com => self.eta_c,
            Mode::Stretch => self.eta_s,
        }
    }

    pub fn nbar(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Com => self.nbar_c,
            Mode::Stretch => self.nbar_s,
        }
    }
}

impl Default for TrapConfig {
    /// `eta_c = 0.1`, `nbar_c = nbar_s = 1`.
    fn default() -> Self {
        Self::new(0.1, 1.0, 1.0).expect("default trap is valid")
    }
}

/// Per spin state, per mode force factors and per spin state light-shift
/// factors. Each factor multiplies the sequence amplitude; its argument is the
/// extra phase of that contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingTable {
    force: [[Complex64; 2]; 4],
    light_shift: [Complex64; 4],
}

impl CouplingTable {
    pub fn new(force: [[Complex64; 2]; 4], light_shift: [Complex64; 4]) -> Self {
        Self { force, light_shift }
    }

    /// Equal and opposite single-ion light shifts, balanced intensities and an
    /// ion spacing of a whole number of standing-wave periods: the COM mode is
    /// driven only by the aligned states, the stretch mode only by the
    /// anti-aligned ones.
    pub fn canonical() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut force = [[zero; 2]; 4];
        force[SpinState::UpUp.index()][Mode::Com.index()] = one;
        force[SpinState::DownDown.index()][Mode::Com.index()] = -one;
        force[SpinState::UpDown.index()][Mode::Stretch.index()] = one;
        force[SpinState::DownUp.index()][Mode::Stretch.index()] = -one;
        let mut light_shift = [zero; 4];
        light_shift[SpinState::UpUp.index()] = one;
        light_shift[SpinState::DownDown.index()] = -one;
        Self { force, light_shift }
    }

    pub fn force(&self, state: SpinState, mode: Mode) -> Complex64 {
        self.force[state.index()][mode.index()]
    }

    pub fn light_shift(&self, state: SpinState) -> Complex64 {
        self.light_shift[state.index()]
    }
}

impl Default for CouplingTable {
    fn default() -> Self {
        Self::canonical()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_table_entries() {
        let t = CouplingTable::canonical();
        assert_eq!(t.force(SpinState::UpUp, Mode::Com).re, 1.0);
        assert_eq!(t.force(SpinState::UpUp, Mode::Stretch).norm(), 0.0);
        assert_eq!(t.force(SpinState::UpDown, Mode::Com).norm(), 0.0);
        assert_eq!(t.force(SpinState::UpDown, Mode::Stretch).re, 1.0);
        assert_eq!(t.force(SpinState::DownDown, Mode::Com).re, -1.0);
        assert_eq!(t.force(SpinState::DownUp, Mode::Stretch).re, -1.0);
        assert_eq!(t.light_shift(SpinState::UpDown).norm(), 0.0);
        assert_eq!(t.light_shift(SpinState::DownUp).norm(), 0.0);
        assert_eq!(t.light_shift(SpinState::DownDown).re, -1.0);
    }

    #[test]
    fn light_shift_antisymmetric_under_flip() {
        let t = CouplingTable::canonical();
        for m in SpinState::ALL {
            assert_eq!(t.light_shift(m), -t.light_shift(m.flip()));
        }
    }

    #[test]
    fn trap_relations() {
        let trap = TrapConfig::default();
        assert_eq!(trap.omega_c, 1.0);
        assert!((trap.omega_s / trap.omega_c - 3f64.sqrt()).abs() < 1e-15);
        assert!((trap.eta_s * 3f64.powf(0.25) - trap.eta_c).abs() < 1e-15);
        assert!(TrapConfig::new(0.0, 1.0, 1.0).is_err());
        assert!(TrapConfig::new(0.1, -1.0, 1.0).is_err());
        assert!(TrapConfig::new(0.1, 0.0, 0.0).is_ok());
    }
}
