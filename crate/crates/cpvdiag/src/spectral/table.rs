//! Tabulated extraterrestrial spectrum and absorber coefficients on the
//! native 122-point wavelength grid (0.30 to 4.0 um).
//!
//! Columns per row: wavelength [um], mean-distance extraterrestrial
//! irradiance [W m^-2 um^-1], water vapor absorption coefficient,
//! ozone absorption coefficient, uniformly mixed gas absorption
//! coefficient. Absorption coefficients feed the band-model
//! transmittance expressions in `synth`.

/// Number of rows in the native table.
pub const N: usize = 122;

/// `(wavelength_um, etr_w_m2_um, aw, ao, au)`
pub const ROWS: [(f64, f64, f64, f64, f64); N] = [
    (0.3, 535.9, 0.0, 10.0, 0.0),
    (0.305, 558.3, 0.0, 4.8, 0.0),
    (0.31, 622.0, 0.0, 2.7, 0.0),
    (0.315, 692.7, 0.0, 1.35, 0.0),
    (0.32, 715.1, 0.0, 0.8, 0.0),
    (0.325, 832.9, 0.0, 0.38, 0.0),
    (0.33, 961.9, 0.0, 0.16, 0.0),
    (0.335, 931.9, 0.0, 0.075, 0.0),
    (0.34, 900.6, 0.0, 0.04, 0.0),
    (0.345, 911.3, 0.0, 0.019, 0.0),
    (0.35, 975.5, 0.0, 0.007, 0.0),
    (0.36, 975.9, 0.0, 0.0, 0.0),
    (0.37, 1119.9, 0.0, 0.0, 0.0),
    (0.38, 1103.8, 0.0, 0.0, 0.0),
    (0.39, 1033.8, 0.0, 0.0, 0.0),
    (0.4, 1479.1, 0.0, 0.0, 0.0),
    (0.41, 1701.3, 0.0, 0.0, 0.0),
    (0.42, 1740.4, 0.0, 0.0, 0.0),
    (0.43, 1587.2, 0.0, 0.0, 0.0),
    (0.44, 1837.0, 0.0, 0.0, 0.0),
    (0.45, 2005.0, 0.0, 0.003, 0.0),
    (0.46, 2043.0, 0.0, 0.006, 0.0),
    (0.47, 1987.0, 0.0, 0.009, 0.0),
    (0.48, 2027.0, 0.0, 0.014, 0.0),
    (0.49, 1896.0, 0.0, 0.021, 0.0),
    (0.5, 1909.0, 0.0, 0.03, 0.0),
    (0.51, 1927.0, 0.0, 0.04, 0.0),
    (0.52, 1831.0, 0.0, 0.048, 0.0),
    (0.53, 1891.0, 0.0, 0.063, 0.0),
    (0.54, 1898.0, 0.0, 0.075, 0.0),
    (0.55, 1892.0, 0.0, 0.085, 0.0),
    (0.57, 1840.0, 0.0, 0.12, 0.0),
    (0.593, 1768.0, 0.0, 0.119, 0.0),
    (0.61, 1728.0, 0.0, 0.12, 0.0),
    (0.63, 1658.0, 0.0, 0.09, 0.0),
    (0.656, 1524.0, 0.0, 0.065, 0.0),
    (0.6676, 1531.0, 0.0, 0.051, 0.0),
    (0.69, 1420.0, 0.016, 0.028, 0.15),
    (0.71, 1399.0, 0.0125, 0.018, 0.0),
    (0.718, 1374.0, 1.8, 0.015, 0.0),
    (0.7244, 1373.0, 2.5, 0.012, 0.0),
    (0.74, 1298.0, 0.061, 0.01, 0.0),
    (0.7525, 1269.0, 0.0008, 0.008, 0.0),
    (0.7575, 1245.0, 0.0001, 0.007, 0.0),
    (0.7625, 1223.0, 1e-05, 0.006, 4.0),
    (0.7675, 1205.0, 1e-05, 0.005, 0.0),
    (0.78, 1183.0, 0.0006, 0.0, 0.0),
    (0.8, 1148.0, 0.036, 0.0, 0.0),
    (0.816, 1091.0, 1.6, 0.0, 0.0),
    (0.8237, 1062.0, 2.5, 0.0, 0.0),
    (0.8315, 1038.0, 0.5, 0.0, 0.0),
    (0.84, 1022.0, 0.155, 0.0, 0.0),
    (0.86, 998.7, 1e-05, 0.0, 0.0),
    (0.88, 947.2, 0.0026, 0.0, 0.0),
    (0.905, 893.2, 7.0, 0.0, 0.0),
    (0.915, 868.2, 5.0, 0.0, 0.0),
    (0.925, 829.7, 5.0, 0.0, 0.0),
    (0.93, 830.3, 27.0, 0.0, 0.0),
    (0.937, 814.0, 55.0, 0.0, 0.0),
    (0.948, 786.9, 45.0, 0.0, 0.0),
    (0.965, 768.3, 4.0, 0.0, 0.0),
    (0.98, 767.0, 1.48, 0.0, 0.0),
    (0.9935, 757.6, 0.1, 0.0, 0.0),
    (1.04, 688.1, 1e-05, 0.0, 0.0),
    (1.07, 640.7, 0.001, 0.0, 0.0),
    (1.1, 606.2, 3.2, 0.0, 0.0),
    (1.12, 585.9, 115.0, 0.0, 0.0),
    (1.13, 570.2, 70.0, 0.0, 0.0),
    (1.145, 564.1, 75.0, 0.0, 0.05),
    (1.161, 544.2, 10.0, 0.0, 0.3),
    (1.17, 533.4, 5.0, 0.0, 0.02),
    (1.2, 501.6, 2.0, 0.0, 0.0002),
    (1.24, 477.5, 0.002, 0.0, 0.00011),
    (1.27, 442.7, 0.002, 0.0, 1e-05),
    (1.29, 440.0, 0.1, 0.0, 0.05),
    (1.32, 416.8, 4.0, 0.0, 0.011),
    (1.35, 391.4, 200.0, 0.0, 0.005),
    (1.395, 358.9, 1000.0, 0.0, 0.0006),
    (1.4425, 327.5, 185.0, 0.0, 0.0),
    (1.4625, 317.5, 80.0, 0.0, 0.005),
    (1.477, 307.3, 80.0, 0.0, 0.13),
    (1.497, 300.4, 12.0, 0.0, 0.04),
    (1.52, 292.8, 0.16, 0.0, 0.06),
    (1.539, 275.5, 0.002, 0.0, 0.13),
    (1.558, 272.1, 0.0005, 0.0, 0.001),
    (1.578, 259.3, 0.0001, 0.0, 0.0014),
    (1.592, 246.9, 1e-05, 0.0, 0.0001),
    (1.61, 244.0, 0.0001, 0.0, 1e-05),
    (1.63, 243.5, 0.001, 0.0, 1e-05),
    (1.646, 234.8, 0.01, 0.0, 0.0001),
    (1.678, 220.5, 0.036, 0.0, 0.001),
    (1.74, 190.8, 1.1, 0.0, 4.3),
    (1.8, 171.1, 130.0, 0.0, 0.2),
    (1.86, 144.5, 1000.0, 0.0, 21.0),
    (1.92, 135.7, 500.0, 0.0, 0.13),
    (1.96, 123.0, 100.0, 0.0, 1.0),
    (1.985, 123.8, 4.0, 0.0, 0.08),
    (2.005, 113.0, 2.9, 0.0, 0.001),
    (2.035, 108.5, 1.0, 0.0, 0.00038),
    (2.065, 97.5, 0.4, 0.0, 0.001),
    (2.1, 92.4, 0.22, 0.0, 0.0005),
    (2.148, 82.4, 0.25, 0.0, 0.00015),
    (2.198, 74.6, 0.33, 0.0, 0.00014),
    (2.27, 68.3, 0.5, 0.0, 0.00066),
    (2.36, 63.8, 4.0, 0.0, 100.0),
    (2.45, 49.5, 80.0, 0.0, 150.0),
    (2.5, 48.5, 310.0, 0.0, 0.13),
    (2.6, 38.6, 15000.0, 0.0, 0.0095),
    (2.7, 36.6, 22000.0, 0.0, 0.001),
    (2.8, 32.0, 8000.0, 0.0, 0.8),
    (2.9, 28.1, 650.0, 0.0, 1.9),
    (3.0, 24.8, 240.0, 0.0, 1.3),
    (3.1, 22.1, 230.0, 0.0, 0.075),
    (3.2, 19.6, 100.0, 0.0, 0.01),
    (3.3, 17.5, 120.0, 0.0, 0.00195),
    (3.4, 15.7, 19.5, 0.0, 0.004),
    (3.5, 14.1, 3.6, 0.0, 0.29),
    (3.6, 12.7, 3.1, 0.0, 0.025),
    (3.7, 11.5, 2.5, 0.0, 0.0),
    (3.8, 10.4, 1.4, 0.0, 0.0),
    (3.9, 9.5, 0.17, 0.0, 0.0),
    (4.0, 8.6, 0.0045, 0.0, 0.0),
];

/// Native grid in nanometers, ascending.
pub fn grid_nm() -> Vec<f64> {
    ROWS.iter().map(|r| r.0 * 1000.0).collect()
}
