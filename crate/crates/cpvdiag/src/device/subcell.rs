//! Double-diode junction solve for a single subcell.
//!
//! The junction equation at absolute temperature T for terminal current I is
//!   IL - I01*expm1(U/Vt) - I02*expm1(U/(2 Vt)) - U/Rsh - I = 0
//! with U the internal junction voltage; the subcell terminal voltage is
//! U - I*Rs. The residual is strictly decreasing in U, so a bracketed
//! Newton iteration always converges.

use super::{SubcellParams, KB, Q, T0_K};
use crate::error::{Error, Result};

/// Residual tolerance on the junction current balance, A.
const TOL_I_A: f64 = 1e-13;
/// Temperature window the parameter scalings are trusted over, Celsius.
pub const TEMP_MIN_C: f64 = -20.0;
pub const TEMP_MAX_C: f64 = 120.0;

impl SubcellParams {
    /// Band gap at temperature, eV (linear model around 298.15 K).
    pub fn bandgap_at(&self, t_k: f64) -> f64 {
        self.bandgap_ev + self.bandgap_temp_ev_per_k * (t_k - T0_K)
    }

    /// Absolute saturation currents (i01, i02) in A at temperature.
    ///
    /// The T^3 (resp. T^2.5) prefactor and the gap-over-kT exponential keep
    /// the rated density fixed at 298.15 K while giving the diode the usual
    /// temperature sensitivity of its recombination mechanism.
    pub fn saturation_currents(&self, t_k: f64) -> (f64, f64) {
        let eg0 = self.bandgap_ev;
        let eg_t = self.bandgap_at(t_k);
        let ratio = t_k / T0_K;
        let i01 = self.j01_a_cm2
            * self.area_cm2
            * ratio.powi(3)
            * (Q * eg0 / (KB * T0_K) - Q * eg_t / (KB * t_k)).exp();
        let i02 = self.j02_a_cm2
            * self.area_cm2
            * ratio.powf(2.5)
            * (Q * eg0 / (2.0 * KB * T0_K) - Q * eg_t / (2.0 * KB * t_k)).exp();
        (i01, i02)
    }
}

/// Thermal voltage kT/q in volts.
pub fn thermal_voltage(t_k: f64) -> f64 {
    KB * t_k / Q
}

/// One junction with its temperature-dependent parameters baked in, so the
/// string solver does not recompute exponential prefactors per evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct JunctionOp {
    pub i01: f64,
    pub i02: f64,
    pub vt: f64,
    pub rsh: f64,
    /// Upper bracket for the junction voltage, 2*Eg/q.
    pub hi: f64,
}

impl JunctionOp {
    pub fn new(sub: &SubcellParams, t_k: f64) -> Self {
        let (i01, i02) = sub.saturation_currents(t_k);
        JunctionOp {
            i01,
            i02,
            vt: thermal_voltage(t_k),
            rsh: sub.rsh_ohm,
            hi: 2.0 * sub.bandgap_ev,
        }
    }

    /// Current balance residual at junction voltage u.
    #[inline]
    pub fn residual(&self, u: f64, il: f64, i: f64) -> f64 {
        il - self.i01 * (u / self.vt).exp_m1()
            - self.i02 * (u / (2.0 * self.vt)).exp_m1()
            - u / self.rsh
            - i
    }

    /// d(residual)/dU, always negative.
    #[inline]
    pub fn dresidual(&self, u: f64) -> f64 {
        -self.i01 / self.vt * (u / self.vt).exp()
            - self.i02 / (2.0 * self.vt) * (u / (2.0 * self.vt)).exp()
            - 1.0 / self.rsh
    }

    /// Junction voltage at (photocurrent, terminal current). The reverse
    /// bracket is open: the shunt resistor carries arbitrary reverse drive.
    ///
    /// The bracket [ (IL-I)*Rsh - 1, 2*Eg ] is valid for any finite inputs
    /// (residual positive at the low end by construction, negative at the
    /// high end because the diode term dwarfs any photocurrent), so the
    /// safeguarded Newton cannot fail to converge.
    pub fn solve(&self, il: f64, i: f64) -> f64 {
        let lo = ((il - i) * self.rsh - 1.0).min(-1.0);
        let guess = self.vt * ((il - i).max(self.i01) / self.i01 + 1.0).ln();
        let x0 = guess.clamp(lo + 1e-9, self.hi - 1e-9);
        crate::numeric::newton_bisect(
            |u| self.residual(u, il, i),
            |u| self.dresidual(u),
            lo,
            self.hi,
            x0,
            TOL_I_A,
            200,
        )
        .expect("junction bracket is valid by construction")
    }

    /// dU/dI at a solved junction voltage; always negative.
    #[inline]
    pub fn dudi(&self, u: f64) -> f64 {
        1.0 / self.dresidual(u)
    }
}

/// Terminal voltage of one subcell at a terminal current.
///
/// The junction voltage is bracketed in [-10 V, 2*Eg/q]; currents that push
/// the junction below -10 V are a solver failure (the bypass network clamps
/// real strings long before that). Temperature must lie in [-20, 120] C.
pub fn subcell_voltage(
    sub: &SubcellParams,
    current_a: f64,
    photocurrent_a: f64,
    cell_temp_c: f64,
) -> Result<f64> {
    sub.validate()?;
    if !(TEMP_MIN_C..=TEMP_MAX_C).contains(&cell_temp_c) {
        return Err(Error::Domain(format!(
            "cell temperature {cell_temp_c} C outside [{TEMP_MIN_C}, {TEMP_MAX_C}]"
        )));
    }
    if !photocurrent_a.is_finite() || photocurrent_a < 0.0 {
        return Err(Error::Domain("photocurrent must be finite and >= 0".into()));
    }
    if !current_a.is_finite() {
        return Err(Error::Domain("current must be finite".into()));
    }
    let op = JunctionOp::new(sub, cell_temp_c + 273.15);
    let (il, i) = (photocurrent_a, current_a);
    let lo = -10.0;
    if op.residual(lo, il, i) < 0.0 {
        return Err(Error::Solver(format!(
            "junction voltage below -10 V at {current_a} A (photocurrent {photocurrent_a} A)"
        )));
    }
    if op.residual(op.hi, il, i) > 0.0 {
        return Err(Error::Solver(format!(
            "junction voltage above 2*Eg at {current_a} A"
        )));
    }
    let guess = op.vt * ((il - i).max(op.i01) / op.i01 + 1.0).ln();
    let u = crate::numeric::newton_bisect(
        |u| op.residual(u, il, i),
        |u| op.dresidual(u),
        lo,
        op.hi,
        guess.clamp(lo + 1e-9, op.hi - 1e-9),
        TOL_I_A,
        200,
    )?;
    Ok(u - i * sub.rs_ohm)
}
