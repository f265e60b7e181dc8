//! Equivalent-circuit device models: triple-junction subcells with a
//! double-diode law, 3J cells with antiparallel bypass diodes, and the
//! 25-cell series module with per-cell short-circuit scale factors.

pub mod calibrate;
pub mod metrics;
pub mod mismatch;
pub mod module;
pub mod photo;
pub mod subcell;

pub use calibrate::{
    calibrate_reference, reference_operating_point, reference_spectrum, CalibrationReport,
    CalibrationTargets, REFERENCE_CELL_TEMP_C, REFERENCE_DNI_W_M2,
};
pub use metrics::{interp_at_v, iv_metrics, IvMetrics, IVCurve};
pub use mismatch::{sample_mismatch, sample_mismatch_mode, SamplingMode};
pub use module::{module_iv, module_mpp, module_voltage_at, GRID_MIN_V, GRID_STEP_V};
pub use photo::{cell_photocurrents, limiting_subcell, module_photocurrents, subcell_photocurrent};
pub use subcell::{subcell_voltage, thermal_voltage};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Electron charge, C.
pub const Q: f64 = 1.602176634e-19;
/// Boltzmann constant, J/K.
pub const KB: f64 = 1.380649e-23;
/// Planck constant times speed of light, J*m.
pub const HC: f64 = 6.62607015e-34 * 2.99792458e8;
/// Reference temperature for rated parameters, K.
pub const T0_K: f64 = 298.15;
/// Band-edge wavelength (nm) for a band gap in eV: lambda = 1239.84/Eg.
pub const EV_NM: f64 = 1239.84;

pub const CELLS_PER_MODULE: usize = 25;
pub const SUBCELLS_PER_CELL: usize = 3;

/// One junction of the monolithic stack, as a double-diode equivalent
/// circuit plus a top-hat quantum-efficiency window.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SubcellParams {
    pub bandgap_ev: f64,
    /// Linear band-gap temperature coefficient, eV/K.
    pub bandgap_temp_ev_per_k: f64,
    pub eqe_plateau: f64,
    pub absorption_edge_low_nm: f64,
    pub absorption_edge_high_nm: f64,
    /// Ideality-1 diode saturation current density, A/cm2 at 298.15 K.
    pub j01_a_cm2: f64,
    /// Ideality-2 diode saturation current density, A/cm2 at 298.15 K.
    pub j02_a_cm2: f64,
    pub rs_ohm: f64,
    pub rsh_ohm: f64,
    pub area_cm2: f64,
}

impl SubcellParams {
    pub fn validate(&self) -> Result<()> {
        if self.bandgap_ev <= 0.0 {
            return Err(Error::Domain("band gap must be > 0".into()));
        }
        if !(0.0 < self.eqe_plateau && self.eqe_plateau <= 1.0) {
            return Err(Error::Domain(format!(
                "eqe plateau {} outside (0, 1]",
                self.eqe_plateau
            )));
        }
        if self.j01_a_cm2 <= 0.0 || self.j02_a_cm2 <= 0.0 {
            return Err(Error::Domain("saturation current densities must be > 0".into()));
        }
        if self.rs_ohm < 0.0 || self.rsh_ohm <= 0.0 || self.area_cm2 <= 0.0 {
            return Err(Error::Domain(
                "rs >= 0, rsh > 0, area > 0 required".into(),
            ));
        }
        if self.absorption_edge_low_nm >= self.absorption_edge_high_nm {
            return Err(Error::Domain("absorption window is empty".into()));
        }
        Ok(())
    }
}

/// Antiparallel bypass diode across one 3J cell.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct BypassDiode {
    pub saturation_a: f64,
    pub ideality: f64,
}

/// One concentrator cell: three stacked subcells, a bypass diode, and the
/// optics feeding it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CellModel {
    pub subcells: [SubcellParams; SUBCELLS_PER_CELL],
    pub bypass: BypassDiode,
    /// Geometric concentration ratio.
    pub concentration: f64,
    pub optical_efficiency: f64,
    /// Per-cell series contribution of interconnect wiring, ohm.
    pub wiring_rs_ohm: f64,
}

impl CellModel {
    pub fn validate(&self) -> Result<()> {
        for s in &self.subcells {
            s.validate()?;
        }
        for w in self.subcells.windows(2) {
            if w[1].bandgap_ev >= w[0].bandgap_ev {
                return Err(Error::Domain(
                    "subcell band gaps must be strictly descending".into(),
                ));
            }
        }
        if self.concentration <= 0.0 {
            return Err(Error::Domain("concentration must be > 0".into()));
        }
        if !(0.0 < self.optical_efficiency && self.optical_efficiency <= 1.0) {
            return Err(Error::Domain(format!(
                "optical efficiency {} outside (0, 1]",
                self.optical_efficiency
            )));
        }
        if self.bypass.saturation_a <= 0.0 || self.bypass.ideality <= 0.0 {
            return Err(Error::Domain("bypass diode parameters must be > 0".into()));
        }
        if self.wiring_rs_ohm < 0.0 {
            return Err(Error::Domain("wiring resistance must be >= 0".into()));
        }
        Ok(())
    }

    /// Total series resistance of the monolithic stack plus wiring.
    pub fn series_rs_ohm(&self) -> f64 {
        self.wiring_rs_ohm + self.subcells.iter().map(|s| s.rs_ohm).sum::<f64>()
    }
}

/// Injected degradation: a wider short-circuit current spread plus a series
/// resistance increment on the limiting subcell of every cell. The fault
/// sigma is the total spread of the degraded module (it replaces the healthy
/// baseline draw rather than stacking on top of it).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct FaultSpec {
    pub enabled: bool,
    pub sigma: f64,
    pub delta_rs_ohm: f64,
    pub seed: u64,
}

/// The series module: 25 cells, per-cell current scale factors, and an
/// optional fault descriptor.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModuleModel {
    pub cells: Vec<CellModel>,
    /// Per-cell short-circuit scale factors, mean ~1.
    pub isc_scale: Vec<f64>,
    /// Standard deviation of the healthy baseline scale distribution.
    pub mismatch_sigma: f64,
    pub mismatch_seed: u64,
    pub sampling: SamplingMode,
    pub fault: Option<FaultSpec>,
}

impl ModuleModel {
    /// Reference 25-cell module. Fails if the dimensions are off.
    pub fn new(
        cells: Vec<CellModel>,
        mismatch_sigma: f64,
        mismatch_seed: u64,
        sampling: SamplingMode,
    ) -> Result<Self> {
        if cells.len() != CELLS_PER_MODULE {
            return Err(Error::Domain(format!(
                "module needs exactly {CELLS_PER_MODULE} cells, got {}",
                cells.len()
            )));
        }
        let isc_scale = mismatch::sample_mismatch_mode(mismatch_sigma, mismatch_seed, sampling)?;
        let m = ModuleModel {
            cells,
            isc_scale,
            mismatch_sigma,
            mismatch_seed,
            sampling,
            fault: None,
        };
        m.validate()?;
        Ok(m)
    }

    /// Arbitrary-length string with explicit scale factors. The reference
    /// layout is 25 cells; short strings exist for verification harnesses
    /// that cross-check the solver against brute-force network solutions.
    pub fn custom_string(cells: Vec<CellModel>, isc_scale: Vec<f64>) -> Result<Self> {
        if cells.is_empty() || cells.len() != isc_scale.len() {
            return Err(Error::Domain(
                "custom string needs matching non-empty cells/scales".into(),
            ));
        }
        let m = ModuleModel {
            cells,
            isc_scale,
            mismatch_sigma: 0.0,
            mismatch_seed: 0,
            sampling: SamplingMode::default(),
            fault: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::Domain("module has no cells".into()));
        }
        if self.isc_scale.len() != self.cells.len() {
            return Err(Error::Domain(format!(
                "{} scale factors for {} cells",
                self.isc_scale.len(),
                self.cells.len()
            )));
        }
        for c in &self.cells {
            c.validate()?;
        }
        if let Some(s) = self.isc_scale.iter().find(|s| **s <= 0.0) {
            return Err(Error::Domain(format!("isc scale {s} must be > 0")));
        }
        if self.mismatch_sigma < 0.0 {
            return Err(Error::Domain("mismatch sigma must be >= 0".into()));
        }
        if let Some(f) = &self.fault {
            if f.sigma < 0.0 || f.delta_rs_ohm < 0.0 {
                return Err(Error::Domain(
                    "fault sigma and delta rs must be >= 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Copy with the fault descriptor set and enabled.
    pub fn with_fault(&self, sigma: f64, delta_rs_ohm: f64, seed: u64) -> Result<Self> {
        let mut m = self.clone();
        m.fault = Some(FaultSpec {
            enabled: true,
            sigma,
            delta_rs_ohm,
            seed,
        });
        m.validate()?;
        Ok(m)
    }

    /// Copy with the fault toggled on or off (descriptor kept).
    pub fn fault_enabled(&self, on: bool) -> Self {
        let mut m = self.clone();
        if let Some(f) = &mut m.fault {
            f.enabled = on;
        }
        m
    }

    /// Scale factors in effect: the fault draw when a fault is enabled,
    /// otherwise the healthy baseline draw.
    pub fn effective_scales(&self) -> Result<Vec<f64>> {
        match &self.fault {
            Some(f) if f.enabled => {
                if self.cells.len() != CELLS_PER_MODULE {
                    return Err(Error::Domain(
                        "fault sampling is defined for the 25-cell layout".into(),
                    ));
                }
                mismatch::sample_mismatch_mode(f.sigma, f.seed, self.sampling)
            }
            _ => Ok(self.isc_scale.clone()),
        }
    }

    /// Series resistance increment applied per cell when the fault is on.
    pub fn effective_delta_rs(&self) -> f64 {
        match &self.fault {
            Some(f) if f.enabled => f.delta_rs_ohm,
            _ => 0.0,
        }
    }
}

/// Versioned on-disk wrapper for module parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleParamsFile {
    pub format_version: u32,
    pub module: ModuleModel,
}

pub const MODULE_PARAMS_VERSION: u32 = 1;

impl ModuleParamsFile {
    pub fn wrap(module: ModuleModel) -> Self {
        ModuleParamsFile {
            format_version: MODULE_PARAMS_VERSION,
            module,
        }
    }

    pub fn from_json(text: &str) -> Result<ModuleModel> {
        let file: ModuleParamsFile = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("module params JSON: {e}")))?;
        if file.format_version != MODULE_PARAMS_VERSION {
            return Err(Error::Config(format!(
                "module params format_version {} unsupported (expected {MODULE_PARAMS_VERSION})",
                file.format_version
            )));
        }
        file.module.validate()?;
        Ok(file.module)
    }

    pub fn to_json(module: &ModuleModel) -> String {
        serde_json::to_string_pretty(&ModuleParamsFile::wrap(module.clone()))
            .expect("module model serializes")
    }
}

/// Band-edge wavelength in nm for a band gap in eV.
pub fn band_edge_nm(bandgap_ev: f64) -> f64 {
    EV_NM / bandgap_ev
}

/// Factory-default (pre-calibration) reference module: InGaP/GaAs/Ge gaps,
/// top-hat EQE windows derived from the gap ordering, double-diode densities,
/// and one bypass diode per cell. Calibration scales j01, the wiring
/// resistance, and the optical efficiency; the shipped numbers are the
/// calibrated values so the defaults are usable as-is.
pub fn default_module() -> ModuleModel {
    let gaps = [1.89, 1.42, 0.66];
    let dgaps = [-4.2e-4, -4.5e-4, -3.7e-4];
    let j01 = [4.44e-27, 8.88e-20, 4.44e-7];
    let j02 = [2e-12, 1e-10, 2e-4];
    let rs = [0.004, 0.0015, 0.001];
    let rsh = [2500.0, 2500.0, 1500.0];
    let area = 0.437;

    let mut subs = Vec::new();
    for k in 0..3 {
        let low = if k == 0 {
            300.0
        } else {
            band_edge_nm(gaps[k - 1])
        };
        subs.push(SubcellParams {
            bandgap_ev: gaps[k],
            bandgap_temp_ev_per_k: dgaps[k],
            eqe_plateau: 0.95,
            absorption_edge_low_nm: low,
            absorption_edge_high_nm: band_edge_nm(gaps[k]),
            j01_a_cm2: j01[k],
            j02_a_cm2: j02[k],
            rs_ohm: rs[k],
            rsh_ohm: rsh[k],
            area_cm2: area,
        });
    }
    let cell = CellModel {
        subcells: [subs[0].clone(), subs[1].clone(), subs[2].clone()],
        bypass: BypassDiode {
            saturation_a: 1e-9,
            ideality: 2.0,
        },
        concentration: 820.0,
        optical_efficiency: 0.776,
        wiring_rs_ohm: 0.021,
    };
    ModuleModel::new(vec![cell; CELLS_PER_MODULE], 0.03, 7, SamplingMode::Stratified)
        .expect("default module is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_module_valid_and_versioned_round_trip() {
        let m = default_module();
        assert_eq!(m.cells.len(), 25);
        let json = ModuleParamsFile::to_json(&m);
        let back = ModuleParamsFile::from_json(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn version_mismatch_rejected() {
        let m = default_module();
        let json = ModuleParamsFile::to_json(&m).replace("\"format_version\": 1", "\"format_version\": 99");
        assert!(ModuleParamsFile::from_json(&json).is_err());
    }

    #[test]
    fn edge_windows_follow_gap_ordering() {
        let m = default_module();
        let s = &m.cells[0].subcells;
        assert_eq!(s[0].absorption_edge_low_nm, 300.0);
        assert!((s[0].absorption_edge_high_nm - 655.99).abs() < 0.5);
        assert!((s[1].absorption_edge_low_nm - s[0].absorption_edge_high_nm).abs() < 1e-12);
        assert!((s[1].absorption_edge_high_nm - 873.13).abs() < 0.5);
        assert!((s[2].absorption_edge_high_nm - 1878.5).abs() < 1.0);
    }

    #[test]
    fn fault_toggle_swaps_scales() {
        let m = default_module();
        let healthy = m.effective_scales().unwrap();
        let faulted = m.with_fault(0.23, 0.0664, 42).unwrap();
        let fault_scales = faulted.effective_scales().unwrap();
        assert_ne!(healthy, fault_scales);
        let off = faulted.fault_enabled(false);
        assert_eq!(off.effective_scales().unwrap(), healthy);
        assert_eq!(off.effective_delta_rs(), 0.0);
        assert!((faulted.effective_delta_rs() - 0.0664).abs() < 1e-15);
    }

    #[test]
    fn ascending_gaps_rejected() {
        let mut m = default_module();
        m.cells[0].subcells.swap(0, 2);
        assert!(m.validate().is_err());
    }
}
