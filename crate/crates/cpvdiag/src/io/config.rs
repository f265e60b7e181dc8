//! TOML run configuration. Every section is optional and falls back to the
//! shipped defaults; unknown keys are rejected so typos fail loudly. Relative
//! paths resolve against the config file's directory at load time.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnosis::Thresholds;
use crate::energy::Site;
use crate::error::{Error, Result};
use crate::spectral::AtmosphericState;
use crate::thermal::OffsetModel;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    /// Module parameter JSON; the built-in calibrated module when unset.
    pub module_params: Option<PathBuf>,
    /// Sensor-channel to cell-index CSV; the standard 13-channel wiring when
    /// unset.
    pub channel_map: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalSection {
    pub slope_c_per_w_m2: f64,
    pub intercept_c: f64,
    pub min_dni_w_m2: f64,
    /// Zero offset instead of an error below the validity floor.
    pub zero_offset_below: bool,
}

impl Default for ThermalSection {
    fn default() -> Self {
        let m = OffsetModel::default();
        ThermalSection {
            slope_c_per_w_m2: m.slope_c_per_w_m2,
            intercept_c: m.intercept_c,
            min_dni_w_m2: m.min_dni_w_m2,
            zero_offset_below: true,
        }
    }
}

impl ThermalSection {
    pub fn offset_model(&self) -> OffsetModel {
        OffsetModel {
            slope_c_per_w_m2: self.slope_c_per_w_m2,
            intercept_c: self.intercept_c,
            min_dni_w_m2: self.min_dni_w_m2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySection {
    pub max_gap_min: f64,
    pub clear_day_peak_w_m2: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        EnergySection {
            max_gap_min: 10.0,
            clear_day_peak_w_m2: 700.0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub site: Site,
    pub paths: Paths,
    pub thresholds: Thresholds,
    pub spectral: AtmosphericState,
    pub thermal: ThermalSection,
    pub energy: EnergySection,
    /// Overrides the module's mismatch seed when set.
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Parses without touching the filesystem. `path` only labels errors.
    pub fn from_toml_str(text: &str, path: &Path) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0);
            Error::Parse {
                path: path.display().to_string(),
                line,
                msg: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads, resolves relative paths against the config's directory, and
    /// checks the referenced files exist.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml_str(&text, path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for p in [&mut cfg.paths.module_params, &mut cfg.paths.channel_map] {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&p);
                }
                if !p.exists() {
                    return Err(Error::Config(format!("{}: file not found", p.display())));
                }
            }
        }
        if let Some(out) = &mut cfg.paths.out_dir {
            if out.is_relative() {
                *out = base.join(&out);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.site.validate()?;
        self.thresholds.validate()?;
        self.spectral.validate()?;
        if self.thermal.min_dni_w_m2 < 0.0 {
            return Err(Error::Config("thermal.min_dni_w_m2 must be >= 0".into()));
        }
        if !(self.energy.max_gap_min > 0.0) {
            return Err(Error::Config("energy.max_gap_min must be > 0".into()));
        }
        if self.energy.clear_day_peak_w_m2 < 0.0 {
            return Err(Error::Config("energy.clear_day_peak_w_m2 must be >= 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = RunConfig::from_toml_str("", Path::new("run.toml")).unwrap();
        assert_eq!(cfg.seed, None);
        assert!((cfg.site.latitude_deg - 13.0).abs() < 1e-12);
        assert!((cfg.thresholds.ff_trigger - 0.75).abs() < 1e-12);
        assert!(cfg.thermal.zero_offset_below);
    }

    #[test]
    fn partial_sections_merge_with_defaults() {
        let text = "seed = 7\n[site]\nlatitude_deg = -20.5\n[thresholds]\nff_trigger = 0.7\n";
        let cfg = RunConfig::from_toml_str(text, Path::new("run.toml")).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert!((cfg.site.latitude_deg + 20.5).abs() < 1e-12);
        assert!((cfg.site.longitude_deg - 77.6).abs() < 1e-12);
        assert!((cfg.thresholds.ff_trigger - 0.7).abs() < 1e-12);
        assert!((cfg.thresholds.vmp_tol - 0.05).abs() < 1e-12);
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = "[site]\nlatitude_deg = 1.0\nbogus_key = 3\n";
        let err = RunConfig::from_toml_str(text, Path::new("run.toml")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("run.toml"), "{msg}");
        assert!(msg.contains("bogus_key"), "{msg}");
    }

    #[test]
    fn out_of_range_threshold_rejected() {
        let text = "[thresholds]\nff_trigger = 1.4\n";
        assert!(RunConfig::from_toml_str(text, Path::new("run.toml")).is_err());
    }

    #[test]
    fn bad_latitude_rejected() {
        let text = "[site]\nlatitude_deg = 95.0\n";
        assert!(RunConfig::from_toml_str(text, Path::new("run.toml")).is_err());
    }
}
