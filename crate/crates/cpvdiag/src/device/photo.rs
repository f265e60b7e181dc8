//! Photocurrent integration: top-hat quantum efficiency windows applied to a
//! concentrated spectrum.

use super::{CellModel, ModuleModel, SubcellParams, HC, Q};
use crate::error::{Error, Result};
use crate::spectral::Spectrum;

/// Photogenerated current of one subcell under a direct-beam spectrum, A.
///
/// The EQE is a plateau over [edge_low, edge_high] nm and zero outside, so
/// the current is q * plateau * integral of the photon flux over the window,
/// scaled by concentration, optical efficiency, and cell area. The integral
/// runs over the spectrum samples that fall inside the window; the spectrum
/// must cover the window (coverage error otherwise).
pub fn subcell_photocurrent(
    sub: &SubcellParams,
    spectrum: &Spectrum,
    concentration: f64,
    optical_efficiency: f64,
) -> Result<f64> {
    if concentration <= 0.0 || !(0.0 < optical_efficiency && optical_efficiency <= 1.0) {
        return Err(Error::Domain(
            "concentration > 0 and optical efficiency in (0, 1] required".into(),
        ));
    }
    let lo = sub.absorption_edge_low_nm;
    let hi = sub.absorption_edge_high_nm;
    if !spectrum.covers_nm(lo, hi) {
        return Err(Error::Domain(format!(
            "spectrum [{:.1}, {:.1}] nm does not cover absorption window [{lo:.1}, {hi:.1}] nm",
            spectrum.wavelengths_nm.first().copied().unwrap_or(f64::NAN),
            spectrum.wavelengths_nm.last().copied().unwrap_or(f64::NAN),
        )));
    }
    // photon flux weighting: E(lambda) * lambda / hc, trapezoid over the
    // in-window samples; nm -> m twice (per-nm density and wavelength).
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (&w, &e) in spectrum
        .wavelengths_nm
        .iter()
        .zip(spectrum.irradiance_w_m2_nm.iter())
    {
        if w < lo || w > hi {
            if w > hi {
                break;
            }
            continue;
        }
        let f = e * w;
        if let Some((wp, fp)) = prev {
            acc += 0.5 * (f + fp) * (w - wp);
        }
        prev = Some((w, f));
    }
    // E(lambda)*lambda*dlambda has units W/m2 * nm; one factor of 1e-9
    // converts the wavelength in the photon energy hc/lambda to meters.
    let flux = acc * 1e-9 / HC; // photons / (m2 s) over the window
    let area_m2 = sub.area_cm2 * 1e-4;
    Ok(concentration * optical_efficiency * area_m2 * Q * sub.eqe_plateau * flux)
}

/// Photocurrents of every subcell of every cell, before scale factors.
pub fn module_photocurrents(module: &ModuleModel, spectrum: &Spectrum) -> Result<Vec<[f64; 3]>> {
    module
        .cells
        .iter()
        .map(|c| cell_photocurrents(c, spectrum))
        .collect()
}

pub fn cell_photocurrents(cell: &CellModel, spectrum: &Spectrum) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (k, sub) in cell.subcells.iter().enumerate() {
        out[k] = subcell_photocurrent(sub, spectrum, cell.concentration, cell.optical_efficiency)?;
    }
    Ok(out)
}

/// Index of the subcell with the smallest photocurrent.
pub fn limiting_subcell(ils: &[f64; 3]) -> usize {
    let mut k = 0;
    for j in 1..3 {
        if ils[j] < ils[k] {
            k = j;
        }
    }
    k
}
