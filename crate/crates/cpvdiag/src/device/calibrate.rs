//! Reference-condition calibration.
//!
//! Three knobs are free once the material constants are fixed: a joint scale
//! on the j01 densities (sets cell efficiency), the per-cell wiring
//! resistance (sets module fill factor), and the optical efficiency of the
//! concentrator train (sets module efficiency). Each is pinned by a secant
//! iteration against its target, cycling until all three hold at once.

use super::metrics::IvMetrics;
use super::module::{module_iv, module_mpp};
use super::photo::module_photocurrents;
use super::ModuleModel;
use crate::error::{ErrSink, Error, Result};
use crate::numeric::secant;
use crate::spectral::{
    direct_beam_spectrum, scale_for_clouds, AtmosphericState, SolarGeometry, Spectrum,
};

#[derive(Debug, Clone, Copy)]
pub struct CalibrationTargets {
    /// Single-cell efficiency at reference conditions, unity optics.
    pub cell_efficiency: f64,
    /// Module efficiency at reference conditions.
    pub module_efficiency: f64,
    pub module_fill_factor: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            cell_efficiency: 0.385,
            module_efficiency: 0.28,
            module_fill_factor: 0.834,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CalibrationReport {
    pub j01_scale: f64,
    pub wiring_rs_ohm: f64,
    pub optical_efficiency: f64,
    pub cell_efficiency: f64,
    pub module_efficiency: f64,
    pub module_fill_factor: f64,
}

/// Reference atmosphere and geometry: low-turbidity continental sky at
/// absolute airmass 1.5, mean sun-earth distance.
pub fn reference_operating_point() -> (AtmosphericState, SolarGeometry) {
    let atm = AtmosphericState {
        aod500: 0.084,
        angstrom_alpha: 1.14,
        pw_cm: 1.42,
        ozone_atm_cm: 0.344,
        pressure_mb: 1013.25,
        ambient_temp_c: 25.0,
        relative_humidity_pct: 50.0,
    };
    let geom = SolarGeometry {
        zenith_deg: (1.0f64 / 1.5).acos().to_degrees(),
        airmass: 1.5,
        sun_earth_factor: 1.0,
    };
    (atm, geom)
}

/// Reference direct-beam spectrum rescaled to exactly 1000 W/m2.
pub fn reference_spectrum() -> Result<Spectrum> {
    let (atm, geom) = reference_operating_point();
    let s = direct_beam_spectrum(&atm, &geom)?;
    scale_for_clouds(&s, 1000.0)
}

pub const REFERENCE_DNI_W_M2: f64 = 1000.0;
pub const REFERENCE_CELL_TEMP_C: f64 = 25.0;

fn with_knobs(template: &ModuleModel, j01_scale: f64, wiring: f64, optical: f64) -> ModuleModel {
    let mut m = template.clone();
    for cell in &mut m.cells {
        for sub in &mut cell.subcells {
            sub.j01_a_cm2 *= j01_scale;
        }
        cell.wiring_rs_ohm = wiring;
        cell.optical_efficiency = optical;
    }
    m
}

fn module_metrics(module: &ModuleModel, spectrum: &Spectrum) -> Result<IvMetrics> {
    let ils = module_photocurrents(module, spectrum)?;
    let temps = vec![REFERENCE_CELL_TEMP_C; module.cells.len()];
    Ok(module_iv(module, &ils, &temps)?.metrics)
}

/// Peak power from the continuous MPP solver. The gridded sweep quantizes
/// P_MP enough to leave the efficiency objectives without a root when the
/// device spans only a few grid steps, so calibration never reads P_MP off
/// the grid.
fn mpp_power_w(module: &ModuleModel, spectrum: &Spectrum) -> Result<f64> {
    let ils = module_photocurrents(module, spectrum)?;
    let temps = vec![REFERENCE_CELL_TEMP_C; module.cells.len()];
    let (i, v) = module_mpp(module, &ils, &temps)?;
    Ok(i * v)
}

/// Concentrated beam power into the module aperture, W.
fn module_input_w(module: &ModuleModel, dni_w_m2: f64) -> f64 {
    module
        .cells
        .iter()
        .map(|c| dni_w_m2 * c.concentration * c.subcells[0].area_cm2 * 1e-4)
        .sum()
}

fn module_efficiency(module: &ModuleModel, spectrum: &Spectrum) -> Result<f64> {
    let p = mpp_power_w(module, spectrum)?;
    Ok(p / module_input_w(module, REFERENCE_DNI_W_M2))
}

/// Bare-cell efficiency: one cell, unity optics, no wiring.
fn cell_efficiency(module: &ModuleModel, spectrum: &Spectrum) -> Result<f64> {
    let mut cell = module.cells[0].clone();
    cell.optical_efficiency = 1.0;
    cell.wiring_rs_ohm = 0.0;
    let conc = cell.concentration;
    let area = cell.subcells[0].area_cm2;
    let one = ModuleModel::custom_string(vec![cell], vec![1.0])?;
    let p = mpp_power_w(&one, spectrum)?;
    Ok(p / (REFERENCE_DNI_W_M2 * conc * area * 1e-4))
}

/// Collects the first error raised inside a secant closure; the iteration
/// sees NaN and stalls, and the error surfaces afterwards.
/// Calibrate the template against the targets. Returns the tuned module and
/// the achieved figures; errors if any figure misses its target by more
/// than 1% relative after five rounds.
pub fn calibrate_reference(
    template: &ModuleModel,
    targets: &CalibrationTargets,
) -> Result<(ModuleModel, CalibrationReport)> {
    template.validate()?;
    let spectrum = reference_spectrum()?;
    let mut s = 1.0f64;
    let mut w = template.cells[0].wiring_rs_ohm;
    let mut eta = template.cells[0].optical_efficiency;
    let sink = ErrSink::new();

    for _round in 0..5 {
        let now = with_knobs(template, s, w, eta);
        let ce = cell_efficiency(&now, &spectrum)?;
        let ff = module_metrics(&now, &spectrum)?.fill_factor;
        let me = module_efficiency(&now, &spectrum)?;
        if (ce - targets.cell_efficiency).abs() < 2e-4
            && (ff - targets.module_fill_factor).abs() < 2e-4
            && (me - targets.module_efficiency).abs() < 2e-4
        {
            break;
        }

        let (s2, _) = secant(
            |x| {
                sink.eval(cell_efficiency(
                    &with_knobs(template, x.max(1e-9), w, eta),
                    &spectrum,
                )) - targets.cell_efficiency
            },
            s,
            s * 1.2,
            5e-5,
            25,
        );
        sink.take()?;
        if !s2.is_finite() {
            return Err(Error::Solver("calibration: j01 scale diverged".into()));
        }
        s = s2.max(1e-9);

        let (w2, _) = secant(
            |x| {
                sink.eval(
                    module_metrics(&with_knobs(template, s, x.max(0.0), eta), &spectrum)
                        .map(|m| m.fill_factor),
                ) - targets.module_fill_factor
            },
            w,
            w * 1.3 + 1e-3,
            5e-5,
            25,
        );
        sink.take()?;
        if !w2.is_finite() {
            return Err(Error::Solver("calibration: wiring resistance diverged".into()));
        }
        w = w2.max(0.0);

        let (e2, _) = secant(
            |x| {
                sink.eval(module_efficiency(
                    &with_knobs(template, s, w, x.clamp(1e-6, 1.0)),
                    &spectrum,
                )) - targets.module_efficiency
            },
            eta,
            (eta * 1.02).min(1.0),
            5e-5,
            25,
        );
        sink.take()?;
        if !e2.is_finite() {
            return Err(Error::Solver("calibration: optical efficiency diverged".into()));
        }
        eta = e2.clamp(1e-6, 1.0);
    }

    let tuned = with_knobs(template, s, w, eta);
    let ce = cell_efficiency(&tuned, &spectrum)?;
    let ff = module_metrics(&tuned, &spectrum)?.fill_factor;
    let me = module_efficiency(&tuned, &spectrum)?;
    let report = CalibrationReport {
        j01_scale: s,
        wiring_rs_ohm: w,
        optical_efficiency: eta,
        cell_efficiency: ce,
        module_efficiency: me,
        module_fill_factor: ff,
    };
    let rel = |a: f64, t: f64| (a - t).abs() / t;
    if rel(ce, targets.cell_efficiency) > 0.01
        || rel(me, targets.module_efficiency) > 0.01
        || rel(ff, targets.module_fill_factor) > 0.01
    {
        return Err(Error::Solver(format!(
            "calibration missed targets: cell {ce:.4}, module {me:.4}, FF {ff:.4}"
        )));
    }
    Ok((tuned, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::default_module;

    #[test]
    fn reference_spectrum_is_1000_w_m2() {
        let s = reference_spectrum().unwrap();
        assert!((s.dni_w_m2() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn calibration_hits_targets_from_shipped_defaults() {
        let (tuned, rep) =
            calibrate_reference(&default_module(), &CalibrationTargets::default()).unwrap();
        assert!((rep.cell_efficiency - 0.385).abs() < 0.004, "{rep:?}");
        assert!((rep.module_fill_factor - 0.834).abs() < 0.005, "{rep:?}");
        assert!((rep.module_efficiency - 0.28).abs() < 0.005, "{rep:?}");
        // knobs land near the shipped defaults (they were produced this way)
        assert!(rep.j01_scale > 0.2 && rep.j01_scale < 5.0, "{rep:?}");
        assert!(rep.wiring_rs_ohm > 0.005 && rep.wiring_rs_ohm < 0.08, "{rep:?}");
        assert!(
            rep.optical_efficiency > 0.6 && rep.optical_efficiency < 0.95,
            "{rep:?}"
        );
        // reference open circuit sits near 78 V at 25 C
        let s = reference_spectrum().unwrap();
        let ils = module_photocurrents(&tuned, &s).unwrap();
        let met = module_iv(&tuned, &ils, &vec![25.0; 25]).unwrap().metrics;
        assert!(met.voc_v > 74.0 && met.voc_v < 82.0, "Voc {}", met.voc_v);
    }

    #[test]
    fn calibration_is_deterministic() {
        let a = calibrate_reference(&default_module(), &CalibrationTargets::default()).unwrap();
        let b = calibrate_reference(&default_module(), &CalibrationTargets::default()).unwrap();
        assert_eq!(a.0, b.0);
    }
}

