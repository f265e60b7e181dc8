//! Sun position and geometry helpers: Kasten relative air mass, Spencer
//! day-angle series for declination / equation of time / earth-sun distance,
//! and zenith angle from site coordinates and a UTC timestamp.

use chrono::{DateTime, Datelike, Timelike, Utc};

/// Kasten-Young relative air mass from the solar zenith angle in degrees.
/// Valid for zenith < 90.
pub fn kasten_airmass(zenith_deg: f64) -> f64 {
    1.0 / (zenith_deg.to_radians().cos() + 0.15 * (93.885 - zenith_deg).powf(-1.253))
}

/// Day angle in radians for Spencer's Fourier series.
fn day_angle(day_of_year: u32) -> f64 {
    2.0 * std::f64::consts::PI * (day_of_year as f64 - 1.0) / 365.0
}

/// Solar declination, radians (Spencer 1971).
pub fn declination_rad(day_of_year: u32) -> f64 {
    let g = day_angle(day_of_year);
    0.006918 - 0.399912 * g.cos() + 0.070257 * g.sin() - 0.006758 * (2.0 * g).cos()
        + 0.000907 * (2.0 * g).sin()
        - 0.002697 * (3.0 * g).cos()
        + 0.00148 * (3.0 * g).sin()
}

/// Equation of time in minutes (Spencer 1971).
pub fn equation_of_time_min(day_of_year: u32) -> f64 {
    let g = day_angle(day_of_year);
    229.18
        * (0.000075 + 0.001868 * g.cos() - 0.032077 * g.sin() - 0.014615 * (2.0 * g).cos()
            - 0.040849 * (2.0 * g).sin())
}

/// Squared-distance irradiance correction (E0 = (r0/r)^2), Spencer 1971.
/// Peaks ~1.034 in early January.
pub fn sun_earth_factor(day_of_year: u32) -> f64 {
    let g = day_angle(day_of_year);
    1.000110 + 0.034221 * g.cos() + 0.001280 * g.sin() + 0.000719 * (2.0 * g).cos()
        + 0.000077 * (2.0 * g).sin()
}

/// Solar zenith angle in degrees at a site and UTC instant.
pub fn zenith_deg(timestamp: DateTime<Utc>, latitude_deg: f64, longitude_deg: f64) -> f64 {
    let doy = timestamp.ordinal();
    let decl = declination_rad(doy);
    let eot = equation_of_time_min(doy);
    let frac_h =
        timestamp.hour() as f64 + timestamp.minute() as f64 / 60.0 + timestamp.second() as f64 / 3600.0;
    // true solar time in minutes, from UTC + longitude offset + equation of time
    let tst_min = frac_h * 60.0 + 4.0 * longitude_deg + eot;
    let hour_angle_deg = tst_min / 4.0 - 180.0;
    let lat = latitude_deg.to_radians();
    let ha = hour_angle_deg.to_radians();
    let cos_z = lat.sin() * decl.sin() + lat.cos() * decl.cos() * ha.cos();
    cos_z.clamp(-1.0, 1.0).acos().to_degrees()
}
