//! Clear-sky direct-beam spectral irradiance: synthesis from atmospheric
//! parameters and inverse fitting of aerosol optical depth and precipitable
//! water.
//!
//! The engine is a parameterized-transmittance model: a tabulated
//! extraterrestrial spectrum attenuated by five multiplicative transmittances
//! (Rayleigh, aerosol, water vapor, ozone, uniformly mixed gases) on a native
//! 122-point grid covering 300-4000 nm.

pub mod fit;
pub mod sun;
pub mod table;

pub use fit::{fit_aod, fit_precipitable_water, fit_precipitable_water_window};

use crate::error::{Error, Result};
use crate::numeric::{lin_interp, trapezoid};
use serde::{Deserialize, Serialize};

/// Direct-normal spectral irradiance on a strictly increasing wavelength grid.
/// The trapezoidal integral of the irradiance IS the DNI the spectrum
/// represents; there is no separate stored claim to drift out of sync.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub wavelengths_nm: Vec<f64>,
    pub irradiance_w_m2_nm: Vec<f64>,
}

impl Spectrum {
    pub fn new(wavelengths_nm: Vec<f64>, irradiance_w_m2_nm: Vec<f64>) -> Result<Self> {
        let s = Spectrum {
            wavelengths_nm,
            irradiance_w_m2_nm,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.wavelengths_nm.len() != self.irradiance_w_m2_nm.len() {
            return Err(Error::Domain(
                "spectrum wavelength/irradiance length mismatch".into(),
            ));
        }
        if self.wavelengths_nm.len() < 2 {
            return Err(Error::Domain("spectrum needs at least 2 samples".into()));
        }
        for w in self.wavelengths_nm.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain(format!(
                    "spectrum wavelengths not strictly increasing at {} nm",
                    w[1]
                )));
            }
        }
        if let Some(e) = self.irradiance_w_m2_nm.iter().find(|e| **e < 0.0 || !e.is_finite()) {
            return Err(Error::Domain(format!("negative or non-finite irradiance {e}")));
        }
        Ok(())
    }

    /// Integrated direct-normal irradiance, W/m².
    pub fn dni_w_m2(&self) -> f64 {
        trapezoid(&self.wavelengths_nm, &self.irradiance_w_m2_nm)
    }

    /// Irradiance at an arbitrary wavelength by linear interpolation.
    pub fn at_nm(&self, nm: f64) -> f64 {
        lin_interp(&self.wavelengths_nm, &self.irradiance_w_m2_nm, nm)
    }

    pub fn covers_nm(&self, lo: f64, hi: f64) -> bool {
        self.wavelengths_nm[0] <= lo && *self.wavelengths_nm.last().unwrap() >= hi
    }
}

/// Atmospheric column state driving the transmittance model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtmosphericState {
    /// Aerosol optical depth at 500 nm.
    pub aod500: f64,
    /// Angstrom turbidity exponent.
    pub angstrom_alpha: f64,
    /// Precipitable water, cm.
    pub pw_cm: f64,
    /// Column ozone, atm-cm.
    pub ozone_atm_cm: f64,
    /// Station pressure, millibar.
    pub pressure_mb: f64,
    pub ambient_temp_c: f64,
    pub relative_humidity_pct: f64,
}

impl Default for AtmosphericState {
    fn default() -> Self {
        AtmosphericState {
            aod500: 0.1,
            angstrom_alpha: 1.14,
            pw_cm: 2.0,
            ozone_atm_cm: 0.3,
            pressure_mb: 1013.25,
            ambient_temp_c: 25.0,
            relative_humidity_pct: 50.0,
        }
    }
}

impl AtmosphericState {
    pub fn validate(&self) -> Result<()> {
        if self.aod500 < 0.0 {
            return Err(Error::Domain(format!("aod500 {} < 0", self.aod500)));
        }
        if self.pw_cm <= 0.0 {
            return Err(Error::Domain(format!("pw_cm {} must be > 0", self.pw_cm)));
        }
        if !(0.0..=100.0).contains(&self.relative_humidity_pct) {
            return Err(Error::Domain(format!(
                "relative humidity {}% outside 0-100",
                self.relative_humidity_pct
            )));
        }
        if self.pressure_mb <= 0.0 || self.ozone_atm_cm < 0.0 {
            return Err(Error::Domain("pressure must be > 0, ozone >= 0".into()));
        }
        Ok(())
    }
}

/// Sun position relevant to the beam path: zenith angle, relative air mass,
/// and the earth-sun distance factor applied to the extraterrestrial spectrum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolarGeometry {
    pub zenith_deg: f64,
    pub airmass: f64,
    pub sun_earth_factor: f64,
}

impl SolarGeometry {
    /// Geometry from a zenith angle, with air mass from the Kasten formula
    /// and no earth-sun distance correction.
    pub fn from_zenith(zenith_deg: f64) -> Result<Self> {
        if !(0.0..90.0).contains(&zenith_deg) {
            return Err(Error::Domain(format!(
                "zenith {zenith_deg} deg outside [0, 90)"
            )));
        }
        Ok(SolarGeometry {
            zenith_deg,
            airmass: sun::kasten_airmass(zenith_deg),
            sun_earth_factor: 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.zenith_deg < 90.0 && self.airmass < 1.0 {
            return Err(Error::Domain(format!(
                "airmass {} < 1 at zenith {}",
                self.airmass, self.zenith_deg
            )));
        }
        if self.sun_earth_factor <= 0.0 {
            return Err(Error::Domain("sun-earth factor must be > 0".into()));
        }
        Ok(())
    }
}

/// Clear-sky direct-beam spectrum for the given atmosphere and sun geometry,
/// on the native model grid (300-4000 nm).
///
/// Per-wavelength transmittances:
///   Rayleigh  exp[-M'/(l^4 (115.6406 - 1.335/l^2))]
///   aerosol   exp[-aod500 (l/0.5um)^-alpha M]
///   water     exp[-0.2385 aw W M / (1 + 20.07 aw W M)^0.45]
///   ozone     exp[-ao O3 Mo], Mo from a 22 km effective shell
///   mixed gas exp[-1.41 au M' / (1 + 118.3 au M')^0.45]
/// with M the relative air mass and M' its pressure-corrected value.
pub fn direct_beam_spectrum(atm: &AtmosphericState, geom: &SolarGeometry) -> Result<Spectrum> {
    atm.validate()?;
    geom.validate()?;
    if geom.airmass < 1.0 {
        return Err(Error::Domain(format!("airmass {} < 1", geom.airmass)));
    }

    let m = geom.airmass;
    let mp = m * atm.pressure_mb / 1013.25;
    let cz = geom.zenith_deg.to_radians().cos();
    let shell = 2.0 * 22.0 / 6370.0;
    let mo = (1.0 + 22.0 / 6370.0) / (cz * cz + shell).sqrt();

    let mut wl = Vec::with_capacity(table::N);
    let mut irr = Vec::with_capacity(table::N);
    for &(w_um, h0, aw, ao, au) in table::ROWS.iter() {
        let tr = (-mp / (w_um.powi(4) * (115.6406 - 1.335 / (w_um * w_um)))).exp();
        let ta = (-atm.aod500 * (w_um / 0.5).powf(-atm.angstrom_alpha) * m).exp();
        let wm = atm.pw_cm * m;
        let tw = (-0.2385 * aw * wm / (1.0 + 20.07 * aw * wm).powf(0.45)).exp();
        let to = (-ao * atm.ozone_atm_cm * mo).exp();
        let tu = (-1.41 * au * mp / (1.0 + 118.3 * au * mp).powf(0.45)).exp();
        wl.push(w_um * 1000.0);
        // table irradiance is per um; public spectra are per nm
        irr.push(h0 * geom.sun_earth_factor * tr * ta * tw * to * tu / 1000.0);
    }
    Spectrum::new(wl, irr)
}

/// Linearly rescale a spectrum so its integral equals the measured DNI,
/// preserving spectral shape. Used for cloudy/hazy timesteps where the
/// clear-sky model overshoots the pyrheliometer.
pub fn scale_for_clouds(spectrum: &Spectrum, measured_dni_w_m2: f64) -> Result<Spectrum> {
    if measured_dni_w_m2 <= 0.0 {
        return Err(Error::Domain(format!(
            "measured DNI {measured_dni_w_m2} must be > 0"
        )));
    }
    let current = spectrum.dni_w_m2();
    if current <= 0.0 {
        return Err(Error::Domain("spectrum integrates to <= 0".into()));
    }
    let k = measured_dni_w_m2 / current;
    Spectrum::new(
        spectrum.wavelengths_nm.clone(),
        spectrum.irradiance_w_m2_nm.iter().map(|e| e * k).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn am15d_geom() -> SolarGeometry {
        // zenith for which secant-like airmass is 1.5
        let z = (1.0f64 / 1.5).acos().to_degrees();
        SolarGeometry {
            zenith_deg: z,
            airmass: 1.5,
            sun_earth_factor: 1.0,
        }
    }

    fn am15d_atm() -> AtmosphericState {
        AtmosphericState {
            aod500: 0.084,
            angstrom_alpha: 1.14,
            pw_cm: 1.42,
            ozone_atm_cm: 0.344,
            pressure_mb: 1013.25,
            ambient_temp_c: 25.0,
            relative_humidity_pct: 40.0,
        }
    }

    #[test]
    fn etr_table_integral() {
        let etr: Vec<f64> = table::ROWS.iter().map(|r| r.1 / 1000.0).collect();
        let wl: Vec<f64> = table::ROWS.iter().map(|r| r.0 * 1000.0).collect();
        let total = trapezoid(&wl, &etr);
        // solar-constant neighborhood for a 0.3-4.0 um table
        assert!((1320.0..1360.0).contains(&total), "ETR integral {total}");
    }

    #[test]
    fn am15d_like_dni_band() {
        let sp = direct_beam_spectrum(&am15d_atm(), &am15d_geom()).unwrap();
        let dni = sp.dni_w_m2();
        assert!((850.0..1000.0).contains(&dni), "DNI {dni}");
    }

    #[test]
    fn transmittances_approach_unity() {
        let atm = AtmosphericState {
            aod500: 0.0,
            pw_cm: 1e-9,
            ozone_atm_cm: 0.0,
            pressure_mb: 1e-6,
            ..Default::default()
        };
        let geom = SolarGeometry {
            zenith_deg: 0.0,
            airmass: 1.0,
            sun_earth_factor: 1.0,
        };
        let sp = direct_beam_spectrum(&atm, &geom).unwrap();
        for (k, row) in table::ROWS.iter().enumerate() {
            // pw cannot be exactly zero (validation), so a few 1e-6 of
            // residual absorption remain in the strong water bands
            let etr_nm = row.1 / 1000.0;
            assert_relative_eq!(sp.irradiance_w_m2_nm[k], etr_nm, max_relative = 1e-4);
        }
    }

    #[test]
    fn aod_strictly_darkens_and_hits_blue_harder() {
        let geom = am15d_geom();
        let mut a1 = am15d_atm();
        let mut a2 = am15d_atm();
        a1.aod500 = 0.1;
        a2.aod500 = 0.2;
        let s1 = direct_beam_spectrum(&a1, &geom).unwrap();
        let s2 = direct_beam_spectrum(&a2, &geom).unwrap();
        assert!(s2.dni_w_m2() < s1.dni_w_m2());
        let r400 = s2.at_nm(400.0) / s1.at_nm(400.0);
        let r1600 = s2.at_nm(1600.0) / s1.at_nm(1600.0);
        assert!(
            r400 < r1600,
            "aerosol should darken 400 nm more: {r400} vs {r1600}"
        );
    }

    #[test]
    fn pw_moves_930_not_550() {
        let geom = am15d_geom();
        let mut a1 = am15d_atm();
        let mut a2 = am15d_atm();
        a1.pw_cm = 1.0;
        a2.pw_cm = 3.0;
        let s1 = direct_beam_spectrum(&a1, &geom).unwrap();
        let s2 = direct_beam_spectrum(&a2, &geom).unwrap();
        let r550 = (s2.at_nm(550.0) - s1.at_nm(550.0)).abs() / s1.at_nm(550.0);
        assert!(r550 < 1e-3, "550 nm moved by {r550}");
        assert!(
            s2.at_nm(930.0) < 0.9 * s1.at_nm(930.0),
            "930 nm dip should deepen with PW"
        );
        assert!(s2.dni_w_m2() <= s1.dni_w_m2());
    }

    #[test]
    fn cloud_scaling_is_linear_and_shape_preserving() {
        let sp = direct_beam_spectrum(&am15d_atm(), &am15d_geom()).unwrap();
        let dni = sp.dni_w_m2();
        let half = scale_for_clouds(&sp, dni / 2.0).unwrap();
        assert_relative_eq!(half.dni_w_m2(), dni / 2.0, max_relative = 1e-12);
        let r_in = sp.at_nm(500.0) / sp.at_nm(1000.0);
        let r_out = half.at_nm(500.0) / half.at_nm(1000.0);
        assert_relative_eq!(r_in, r_out, max_relative = 1e-12);
        // identity scale returns the same irradiance values
        let same = scale_for_clouds(&sp, dni).unwrap();
        for (a, b) in same
            .irradiance_w_m2_nm
            .iter()
            .zip(sp.irradiance_w_m2_nm.iter())
        {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn invalid_inputs_rejected() {
        let geom = am15d_geom();
        let mut atm = am15d_atm();
        atm.pw_cm = 0.0;
        assert!(direct_beam_spectrum(&atm, &geom).is_err());
        let mut atm2 = am15d_atm();
        atm2.aod500 = -0.1;
        assert!(direct_beam_spectrum(&atm2, &geom).is_err());
        let bad_geom = SolarGeometry {
            zenith_deg: 30.0,
            airmass: 0.8,
            sun_earth_factor: 1.0,
        };
        assert!(direct_beam_spectrum(&am15d_atm(), &bad_geom).is_err());
        assert!(scale_for_clouds(&direct_beam_spectrum(&am15d_atm(), &geom).unwrap(), -5.0).is_err());
    }
}
