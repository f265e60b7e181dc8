//! Inverse fits: precipitable water from the near-infrared absorption dip,
//! aerosol optical depth from the integrated DNI.

use super::{direct_beam_spectrum, AtmosphericState, SolarGeometry, Spectrum};
use crate::error::{Error, Result};
use crate::numeric::{bisect_decreasing, golden_min};

/// Default water-band fit window, nm. The 930 nm absorption dip sits inside.
pub const PW_WINDOW_NM: (f64, f64) = (880.0, 980.0);

/// Precipitable-water search bracket, cm.
pub const PW_BRACKET_CM: (f64, f64) = (0.1, 8.0);

/// AOD search bracket.
pub const AOD_BRACKET: (f64, f64) = (0.0, 5.0);

/// Fit precipitable water by minimizing the squared irradiance residual over
/// the default water-band window.
pub fn fit_precipitable_water(
    measured: &Spectrum,
    atm_prior: &AtmosphericState,
    geom: &SolarGeometry,
) -> Result<f64> {
    fit_precipitable_water_window(measured, atm_prior, geom, PW_WINDOW_NM)
}

/// Window-parameterized PW fit.
///
/// The residual carries a free multiplicative gain on the model (analytic
/// least squares), so the fit keys on the dip shape rather than the absolute
/// level; a wrong prior AOD or cloud scaling then cannot bias the water fit.
pub fn fit_precipitable_water_window(
    measured: &Spectrum,
    atm_prior: &AtmosphericState,
    geom: &SolarGeometry,
    window_nm: (f64, f64),
) -> Result<f64> {
    measured.validate()?;
    if !measured.covers_nm(window_nm.0, window_nm.1) {
        return Err(Error::Domain(format!(
            "measured spectrum covers {:.0}-{:.0} nm, water band needs {:.0}-{:.0} nm",
            measured.wavelengths_nm[0],
            measured.wavelengths_nm.last().unwrap(),
            window_nm.0,
            window_nm.1
        )));
    }
    let samples: Vec<(f64, f64)> = measured
        .wavelengths_nm
        .iter()
        .zip(measured.irradiance_w_m2_nm.iter())
        .filter(|(w, _)| (window_nm.0..=window_nm.1).contains(*w))
        .map(|(w, e)| (*w, *e))
        .collect();
    if samples.len() < 4 {
        return Err(Error::Domain(format!(
            "only {} measured samples inside the water band",
            samples.len()
        )));
    }

    let residual = |pw: f64| -> f64 {
        let mut atm = atm_prior.clone();
        atm.pw_cm = pw;
        let model = match direct_beam_spectrum(&atm, geom) {
            Ok(s) => s,
            Err(_) => return f64::INFINITY,
        };
        // gain minimizing sum (meas - g*model)^2 is <m,y>/<m,m>
        let mut mm = 0.0;
        let mut my = 0.0;
        for &(w, y) in &samples {
            let m = model.at_nm(w);
            mm += m * m;
            my += m * y;
        }
        if mm <= 0.0 {
            return f64::INFINITY;
        }
        let g = my / mm;
        samples
            .iter()
            .map(|&(w, y)| {
                let r = y - g * model.at_nm(w);
                r * r
            })
            .sum()
    };

    let (pw, _) = golden_min(residual, PW_BRACKET_CM.0, PW_BRACKET_CM.1, 1e-5);
    Ok(pw)
}

/// Fit aerosol optical depth so the integrated model spectrum matches the
/// measured DNI within 0.2%. DNI is strictly decreasing in AOD, so the root
/// is unique when it exists.
pub fn fit_aod(
    measured_dni_w_m2: f64,
    atm_prior: &AtmosphericState,
    geom: &SolarGeometry,
) -> Result<f64> {
    if measured_dni_w_m2 <= 0.0 {
        return Err(Error::Domain(format!(
            "measured DNI {measured_dni_w_m2} must be > 0"
        )));
    }
    let dni_at = |aod: f64| -> Result<f64> {
        let mut atm = atm_prior.clone();
        atm.aod500 = aod;
        Ok(direct_beam_spectrum(&atm, geom)?.dni_w_m2())
    };
    let ceiling = dni_at(AOD_BRACKET.0)?;
    let floor = dni_at(AOD_BRACKET.1)?;
    if measured_dni_w_m2 > ceiling {
        return Err(Error::Infeasible(format!(
            "DNI {measured_dni_w_m2:.1} W/m2 above the zero-aerosol ceiling {ceiling:.1} W/m2"
        )));
    }
    if measured_dni_w_m2 < floor {
        return Err(Error::Infeasible(format!(
            "DNI {measured_dni_w_m2:.1} W/m2 below the aod500={} floor {floor:.1} W/m2",
            AOD_BRACKET.1
        )));
    }
    // boundary roots
    if (ceiling - measured_dni_w_m2) / measured_dni_w_m2 <= 2e-3 {
        return Ok(0.0);
    }
    let f = |aod: f64| dni_at(aod).unwrap_or(f64::NEG_INFINITY) - measured_dni_w_m2;
    let mut aod = bisect_decreasing(&f, AOD_BRACKET.0, AOD_BRACKET.1, 40);
    // polish to the stated DNI tolerance
    for _ in 0..8 {
        let err = f(aod);
        if err.abs() / measured_dni_w_m2 < 2e-3 {
            break;
        }
        // local secant step on a smooth monotone function
        let h = 1e-4;
        let slope = (f(aod + h) - err) / h;
        if slope.abs() < 1e-12 {
            break;
        }
        aod = (aod - err / slope).clamp(AOD_BRACKET.0, AOD_BRACKET.1);
    }
    let achieved = f(aod).abs() / measured_dni_w_m2;
    if achieved >= 2e-3 {
        return Err(Error::Solver(format!(
            "aod fit stalled at relative DNI error {achieved:.2e}"
        )));
    }
    Ok(aod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geom() -> SolarGeometry {
        SolarGeometry {
            zenith_deg: 41.0,
            airmass: crate::spectral::sun::kasten_airmass(41.0),
            sun_earth_factor: 1.0339,
        }
    }

    fn atm() -> AtmosphericState {
        AtmosphericState {
            aod500: 0.075,
            angstrom_alpha: 1.14,
            pw_cm: 2.01,
            ozone_atm_cm: 0.26,
            pressure_mb: 912.0,
            ambient_temp_c: 24.0,
            relative_humidity_pct: 45.0,
        }
    }

    #[test]
    fn pw_round_trip_at_reference_conditions() {
        let truth = direct_beam_spectrum(&atm(), &geom()).unwrap();
        let mut prior = atm();
        prior.pw_cm = 1.0; // wrong prior; fit must recover regardless
        let pw = fit_precipitable_water(&truth, &prior, &geom()).unwrap();
        assert_relative_eq!(pw, 2.01, max_relative = 0.01);
    }

    #[test]
    fn pw_round_trip_sweep() {
        for &pw_true in &[0.5, 1.0, 2.0, 3.5, 5.0] {
            let mut a = atm();
            a.pw_cm = pw_true;
            let truth = direct_beam_spectrum(&a, &geom()).unwrap();
            let mut prior = atm();
            prior.pw_cm = 2.0;
            let pw = fit_precipitable_water(&truth, &prior, &geom()).unwrap();
            assert!(
                (pw - pw_true).abs() / pw_true < 0.025,
                "pw {pw_true} recovered as {pw}"
            );
        }
    }

    #[test]
    fn pw_fit_survives_wrong_aod_prior_and_cloud_scale() {
        let truth = direct_beam_spectrum(&atm(), &geom()).unwrap();
        let scaled = crate::spectral::scale_for_clouds(&truth, truth.dni_w_m2() * 0.93).unwrap();
        let mut prior = atm();
        prior.aod500 = 0.2; // badly wrong aerosol prior
        prior.pw_cm = 4.0;
        let pw = fit_precipitable_water(&scaled, &prior, &geom()).unwrap();
        assert_relative_eq!(pw, 2.01, max_relative = 0.02);
    }

    #[test]
    fn pw_without_dip_pins_lower_bound() {
        let mut dry = atm();
        dry.pw_cm = 1e-6;
        // the model clamps nothing; synthesize with effectively no water
        let truth = direct_beam_spectrum(&dry, &geom()).unwrap();
        let pw = fit_precipitable_water(&truth, &atm(), &geom()).unwrap();
        assert!(pw <= 0.12, "dry spectrum fitted pw {pw}");
    }

    #[test]
    fn pw_coverage_error() {
        let narrow = Spectrum::new(vec![400.0, 500.0, 600.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert!(fit_precipitable_water(&narrow, &atm(), &geom()).is_err());
    }

    #[test]
    fn aod_round_trip_sweep() {
        for &aod_true in &[0.02, 0.075, 0.176, 0.3, 0.5] {
            let mut a = atm();
            a.aod500 = aod_true;
            let dni = direct_beam_spectrum(&a, &geom()).unwrap().dni_w_m2();
            let mut prior = atm();
            prior.aod500 = 0.1;
            let aod = fit_aod(dni, &prior, &geom()).unwrap();
            assert!(
                (aod - aod_true).abs() / aod_true < 0.03,
                "aod {aod_true} recovered as {aod}"
            );
        }
    }

    #[test]
    fn aod_boundary_and_infeasible() {
        let mut clean = atm();
        clean.aod500 = 0.0;
        let ceiling = direct_beam_spectrum(&clean, &geom()).unwrap().dni_w_m2();
        assert_eq!(fit_aod(ceiling, &atm(), &geom()).unwrap(), 0.0);
        assert!(fit_aod(ceiling * 1.2, &atm(), &geom()).is_err());
        assert!(fit_aod(1.0, &atm(), &geom()).is_err()); // below aod=5 floor
    }
}
