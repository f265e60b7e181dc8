//! Fill-factor-triggered fault diagnosis.
//!
//! A measured curve whose fill factor falls below the trigger threshold is
//! explained by a photocurrent spread plus a series-resistance increment on
//! the limiting subcell of every cell (electrically equivalent to a
//! per-cell series increment, since the subcells are in series). The
//! spread is fitted on the maximum-power current and the increment on the
//! maximum-power voltage, but neither map is invertible on its own: past
//! moderate spreads the power maximum migrates between bypass branches, so
//! several spreads reproduce the same current and several increments the
//! same voltage. The fitter therefore collects every crossing of the
//! current target as a spread candidate (scanning at a few resistance
//! levels, because added resistance can hop the power maximum to another
//! branch), pairs each candidate with every voltage crossing over the
//! increment range, keeps the pairs within both tolerances, and picks the
//! pair whose full simulated curve is closest to the measurement. Curves
//! from several operating conditions are fitted independently and
//! aggregated by median.

use crate::device::{
    limiting_subcell, module_iv, module_mpp, module_photocurrents, IVCurve, IvMetrics, ModuleModel,
    SamplingMode,
};
use crate::error::{Error, Result};
use crate::numeric::median;
use crate::spectral::Spectrum;
use serde::{Deserialize, Serialize};

/// Resistance levels at which the spread scan is repeated. Within a bypass
/// branch added resistance barely moves the maximum-power current, so the
/// levels only need to straddle the branch hops, not resolve them.
const DRS_SLICES: [f64; 4] = [0.0, 0.05, 0.15, 0.45];
/// Spread-scan grid over [0, sigma_max], per resistance level.
const SIGMA_SCAN_N: usize = 100;
/// Bisection width at which a spread crossing stops, absolute.
const SIGMA_TOL: f64 = 1e-3;
/// Spread candidates closer than this are the same crossing. Kept at twice
/// the bisection width: crossings on different bypass branches can sit
/// only a few thousandths apart and must both survive.
const SIGMA_DEDUP: f64 = 2e-3;
/// Spread candidates kept after dedup, in ascending order.
const SIGMA_CAND_MAX: usize = 32;
/// Resistance-scan grid over [0, drs_max] and bisection stop width, ohm.
const DRS_SCAN_N: usize = 50;
const DRS_TOL_OHM: f64 = 1e-4;
/// Scan cells whose value moves more than this fraction of the target are
/// split: larger moves are bypass-branch hops, not smooth change.
const SCAN_SPLIT_REL: f64 = 0.02;
/// Added resistance lowers the power-point voltage overall, but a branch
/// hop can lift it above the zero-increment value by a few cell groups;
/// targets more than this far above it are unreachable, volt.
const V_RISE_MAX: f64 = 10.0;

/// Tunable decision points of the diagnosis algorithm.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Fill factor below which a curve is treated as faulty.
    pub ff_trigger: f64,
    /// Relative V_MP agreement that counts as a fit.
    pub vmp_tol: f64,
    /// Relative I_MP agreement that counts as a fit.
    pub imp_tol: f64,
    /// Upper bound of the photocurrent-spread search.
    pub sigma_max: f64,
    /// Upper bound of the series-resistance search, ohm.
    pub drs_max_ohm: f64,
    /// Fitted increments above this classify as a resistance fault, ohm.
    pub drs_floor_ohm: f64,
    /// Seeds averaged per evaluation when the module samples mismatch iid.
    /// Stratified modules are one fixed multiset of cell scales, so their
    /// ensemble collapses to the representative assignment.
    pub ensemble_seeds: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ff_trigger: 0.75,
            vmp_tol: 0.05,
            imp_tol: 0.01,
            sigma_max: 0.6,
            drs_max_ohm: 1.0,
            drs_floor_ohm: 0.01,
            ensemble_seeds: 16,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v.is_finite() && v > 0.0 && v < 1.0;
        if !in_unit(self.ff_trigger) || !in_unit(self.vmp_tol) || !in_unit(self.imp_tol) {
            return Err(Error::Config(
                "ff trigger and fit tolerances must lie in (0, 1)".into(),
            ));
        }
        if !(self.sigma_max > 0.0) || !(self.drs_max_ohm > 0.0) {
            return Err(Error::Config("search bounds must be positive".into()));
        }
        if !(self.drs_floor_ohm >= 0.0) {
            return Err(Error::Config("resistance floor must be >= 0".into()));
        }
        if self.ensemble_seeds == 0 {
            return Err(Error::Config("ensemble needs at least one seed".into()));
        }
        Ok(())
    }
}

/// One measured curve with the conditions it was taken under.
#[derive(Debug, Clone)]
pub struct DiagnosisInput {
    pub label: String,
    pub measured: IVCurve,
    /// Incident direct-beam spectrum, scaled to the measured irradiance.
    pub spectrum: Spectrum,
    /// Junction temperatures, one per cell, deg C.
    pub temps_c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    None,
    CurrentMismatch,
    SeriesResistance,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo_a: f64,
    pub hi_a: f64,
    pub count: u32,
}

/// Per-curve fit outcome. Fitted fields are absent when the fit never
/// converged; `note` then carries the reason.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveFit {
    pub label: String,
    pub triggered: bool,
    pub fill_factor: f64,
    /// Conductance magnitude near open circuit, measured curve, S.
    pub g_voc_measured_s: f64,
    /// Same quantity simulated for the healthy module at these conditions.
    pub g_voc_healthy_s: f64,
    pub fitted_sigma: Option<f64>,
    pub fitted_delta_rs_ohm: Option<f64>,
    pub residual_i_mp_rel: Option<f64>,
    pub residual_v_mp_rel: Option<f64>,
    pub residual_rms_a: Option<f64>,
    pub feasible: bool,
    #[serde(default)]
    pub note: String,
    /// (voltage, measured current, fitted current) on the common grid.
    #[serde(skip)]
    pub overlay: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub ff_threshold: f64,
    pub baseline_sigma: f64,
    pub classification: Classification,
    pub median_sigma: f64,
    pub median_delta_rs_ohm: f64,
    pub curves: Vec<CurveFit>,
    /// Fitted limiting-subcell photocurrents, pooled over usable curves.
    pub histogram: Vec<HistogramBin>,
}

/// True iff the fill factor is strictly below the threshold.
pub fn detect_fault_trigger(metrics: &IvMetrics, threshold_ff: f64) -> bool {
    metrics.fill_factor < threshold_ff
}

/// Ensemble-mean maximum-power point at one (sigma, delta_rs) trial. A
/// stratified module is one fixed multiset of cell scales and a series
/// string is permutation-invariant (the temperature spread couples to the
/// assignment only at second order), so its ensemble collapses to the
/// representative assignment. Iid members are genuinely different draws
/// from consecutive seeds, summed in seed order for determinism.
fn ensemble_mpp(
    baseline: &ModuleModel,
    ils: &[[f64; 3]],
    temps_c: &[f64],
    sigma: f64,
    delta_rs_ohm: f64,
    thresholds: &Thresholds,
) -> Result<(f64, f64)> {
    let seed0 = baseline.mismatch_seed;
    let n = match baseline.sampling {
        SamplingMode::Stratified => 1,
        SamplingMode::Iid => thresholds.ensemble_seeds,
    };
    let mut i_sum = 0.0;
    let mut v_sum = 0.0;
    for k in 0..n {
        let variant = baseline.with_fault(sigma, delta_rs_ohm, seed0 + u64::from(k))?;
        let (i_mp, v_mp) = module_mpp(&variant, ils, temps_c)?;
        i_sum += i_mp;
        v_sum += v_mp;
    }
    Ok((i_sum / f64::from(n), v_sum / f64::from(n)))
}

/// Every crossing of `f` with `target` on [0, hi]. An ascending n-point
/// scan seeds cells; any cell across which the function moves more than
/// `split` is halved down to the bisection width, because a bypass-branch
/// hop inside a cell hides a narrow crossing right next to the jump while
/// leaving the endpoints on the same side. Sign changes then refine by
/// bisection to `tol_x`. Also returns the best (x, |f(x) - target|) seen,
/// which covers tangencies that never bracket, and failure reporting.
fn scan_crossings<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    hi: f64,
    n: usize,
    tol_x: f64,
    target: f64,
    split: f64,
) -> Result<(Vec<f64>, (f64, f64))> {
    let step = hi / n as f64;
    let mut best = (0.0_f64, f64::INFINITY);
    let mut cells: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(n);
    let mut prev = (0.0, f64::NAN);
    for k in 0..=n {
        let x = step * k as f64;
        let d = f(x)? - target;
        if d.abs() < best.1 {
            best = (x, d.abs());
        }
        if k > 0 {
            cells.push((prev.0, prev.1, x, d));
        }
        prev = (x, d);
    }
    let mut roots = Vec::new();
    while let Some((x0, d0, x1, d1)) = cells.pop() {
        if (d1 - d0).abs() > split && x1 - x0 > 2.0 * tol_x {
            let xm = 0.5 * (x0 + x1);
            let dm = f(xm)? - target;
            if dm.abs() < best.1 {
                best = (xm, dm.abs());
            }
            cells.push((x0, d0, xm, dm));
            cells.push((xm, dm, x1, d1));
            continue;
        }
        if d0 * d1 > 0.0 || (d0 == 0.0 && d1 == 0.0) {
            if d0 == 0.0 {
                roots.push(x0);
            }
            continue;
        }
        let (mut a, mut da, mut b) = (x0, d0, x1);
        while b - a > tol_x {
            let m = 0.5 * (a + b);
            let dm = f(m)? - target;
            if dm.abs() < best.1 {
                best = (m, dm.abs());
            }
            if da * dm > 0.0 {
                a = m;
                da = dm;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 2.0 * tol_x);
    Ok((roots, best))
}

/// A (spread, increment) pair that reproduces the measured maximum-power
/// point, with the residuals and full curve it was selected on.
struct JointFit {
    sigma: f64,
    drs_ohm: f64,
    i_rel: f64,
    v_rel: f64,
    rms_a: f64,
    curve: IVCurve,
}

fn fit_joint(
    measured: &IVCurve,
    baseline: &ModuleModel,
    ils: &[[f64; 3]],
    temps_c: &[f64],
    thresholds: &Thresholds,
) -> Result<JointFit> {
    thresholds.validate()?;
    let i_t = measured.metrics.i_mp_a;
    let v_t = measured.metrics.v_mp_v;
    if !(i_t > 0.0) || !(v_t > 0.0) {
        return Err(Error::Domain(
            "measured curve has a non-positive maximum-power point".into(),
        ));
    }

    // spread candidates: crossings of the current target, all slices
    let mut cands: Vec<f64> = Vec::new();
    let mut best_i = (0.0_f64, f64::INFINITY);
    for &r_s in &DRS_SLICES {
        if r_s > 0.0 && r_s >= thresholds.drs_max_ohm {
            continue;
        }
        let (roots, best) = scan_crossings(
            |s| ensemble_mpp(baseline, ils, temps_c, s, r_s, thresholds).map(|(i, _)| i),
            thresholds.sigma_max,
            SIGMA_SCAN_N,
            SIGMA_TOL,
            i_t,
            SCAN_SPLIT_REL * i_t,
        )?;
        if best.1 < best_i.1 {
            best_i = best;
        }
        for r in roots {
            if !cands.iter().any(|c| (c - r).abs() < SIGMA_DEDUP) {
                cands.push(r);
            }
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.truncate(SIGMA_CAND_MAX);
    if cands.is_empty() {
        if best_i.1 / i_t < thresholds.imp_tol {
            cands.push(best_i.0); // tangency: touches the target without crossing
        } else {
            return Err(Error::Infeasible(format!(
                "spread stage: best I_MP residual {:.2}% (tolerance {:.2}%) at sigma {:.3}",
                100.0 * best_i.1 / i_t,
                100.0 * thresholds.imp_tol,
                best_i.0
            )));
        }
    }

    // pair each candidate with every voltage crossing over the increment
    // range, keep pairs inside both tolerances, pick by whole-curve rms
    let mut best: Option<JointFit> = None;
    // nearest-to-feasible pair, for the failure report
    let mut near = (f64::INFINITY, 0.0_f64, 0.0_f64, f64::INFINITY, f64::INFINITY);
    for &sc in &cands {
        // candidates whose zero-increment voltage sits too far below the
        // target need no scan (only the r = 0 pair): resistance lowers
        // the voltage apart from bounded branch-hop rises
        let (_, v0) = ensemble_mpp(baseline, ils, temps_c, sc, 0.0, thresholds)?;
        let mut roots = if v_t > v0 + V_RISE_MAX {
            Vec::new()
        } else {
            scan_crossings(
                |r| ensemble_mpp(baseline, ils, temps_c, sc, r, thresholds).map(|(_, v)| v),
                thresholds.drs_max_ohm,
                DRS_SCAN_N,
                DRS_TOL_OHM,
                v_t,
                SCAN_SPLIT_REL * v_t,
            )?
            .0
        };
        // a zero increment is always a candidate: rounding can hide the
        // sign change when the target sits exactly on the r = 0 value
        if roots.first().is_none_or(|r| *r > 2.0 * DRS_TOL_OHM) {
            roots.insert(0, 0.0);
        }
        for r in roots {
            let (i_f, v_f) = ensemble_mpp(baseline, ils, temps_c, sc, r, thresholds)?;
            let i_rel = (i_f - i_t).abs() / i_t;
            let v_rel = (v_f - v_t).abs() / v_t;
            let score = (i_rel / thresholds.imp_tol).max(v_rel / thresholds.vmp_tol);
            if score < near.0 {
                near = (score, sc, r, i_rel, v_rel);
            }
            if i_rel >= thresholds.imp_tol || v_rel > thresholds.vmp_tol {
                continue;
            }
            let member = baseline.with_fault(sc, r, baseline.mismatch_seed)?;
            let curve = module_iv(&member, ils, temps_c)?;
            let rms = rms_current_error(measured, &curve).unwrap_or(f64::INFINITY);
            if best.as_ref().is_none_or(|b| rms < b.rms_a) {
                best = Some(JointFit {
                    sigma: sc,
                    drs_ohm: r,
                    i_rel,
                    v_rel,
                    rms_a: rms,
                    curve,
                });
            }
        }
    }
    best.ok_or_else(|| {
        if near.3 >= thresholds.imp_tol {
            Error::Infeasible(format!(
                "spread stage: best I_MP residual {:.2}% (tolerance {:.2}%) at sigma {:.3}",
                100.0 * near.3,
                100.0 * thresholds.imp_tol,
                near.1
            ))
        } else {
            Error::Infeasible(format!(
                "resistance stage: best V_MP residual {:.2}% (tolerance {:.2}%) at {:.4} ohm",
                100.0 * near.4,
                100.0 * thresholds.vmp_tol,
                near.2
            ))
        }
    })
}

/// Fits the photocurrent spread that explains the measured maximum-power
/// current, resolving branch aliases (several spreads reproduce the same
/// current) by the full-curve agreement of the completed pair fit.
/// Converged when the relative current residual is under `imp_tol`.
pub fn fit_mismatch_sigma(
    measured: &IVCurve,
    baseline: &ModuleModel,
    ils: &[[f64; 3]],
    temps_c: &[f64],
    thresholds: &Thresholds,
) -> Result<(f64, f64)> {
    fit_joint(measured, baseline, ils, temps_c, thresholds).map(|j| (j.sigma, j.i_rel))
}

/// Fits the series-resistance increment that explains the measured
/// maximum-power voltage at a given spread. Within `vmp_tol` at zero the
/// increment is zero; otherwise the smallest voltage crossing over
/// [0, drs_max] wins, and exhausting the bound without meeting the
/// tolerance is a failed fit.
pub fn fit_series_resistance(
    measured: &IVCurve,
    baseline: &ModuleModel,
    ils: &[[f64; 3]],
    temps_c: &[f64],
    sigma: f64,
    thresholds: &Thresholds,
) -> Result<(f64, f64)> {
    thresholds.validate()?;
    let target = measured.metrics.v_mp_v;
    if !(target > 0.0) {
        return Err(Error::Domain(
            "measured curve has a non-positive maximum-power voltage".into(),
        ));
    }
    let v_at = |r: f64| -> Result<f64> {
        ensemble_mpp(baseline, ils, temps_c, sigma, r, thresholds).map(|(_, v)| v)
    };
    let rel0 = (v_at(0.0)? - target).abs() / target;
    if rel0 <= thresholds.vmp_tol {
        return Ok((0.0, rel0));
    }
    let (roots, best) = scan_crossings(
        v_at,
        thresholds.drs_max_ohm,
        DRS_SCAN_N,
        DRS_TOL_OHM,
        target,
        SCAN_SPLIT_REL * target,
    )?;
    let (drs, rel) = match roots.first() {
        Some(&r) => (r, (v_at(r)? - target).abs() / target),
        None => (best.0, best.1 / target),
    };
    if rel > thresholds.vmp_tol {
        return Err(Error::Infeasible(format!(
            "resistance stage: best V_MP residual {:.2}% (tolerance {:.2}%) at {:.4} ohm",
            100.0 * rel,
            100.0 * thresholds.vmp_tol,
            drs
        )));
    }
    Ok((drs, rel))
}

/// RMS current difference over grid voltages common to both curves, A.
fn rms_current_error(measured: &IVCurve, fitted: &IVCurve) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut j = 0usize;
    for &(v, i_meas) in &measured.points {
        while j < fitted.points.len() && fitted.points[j].0 < v - 1e-9 {
            j += 1;
        }
        if j >= fitted.points.len() {
            break;
        }
        if (fitted.points[j].0 - v).abs() <= 1e-9 {
            let d = fitted.points[j].1 - i_meas;
            sum += d * d;
            n += 1;
        }
    }
    if n == 0 {
        None
    } else {
        Some((sum / n as f64).sqrt())
    }
}

fn overlay_points(measured: &IVCurve, fitted: &IVCurve) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    let mut j = 0usize;
    for &(v, i_meas) in &measured.points {
        while j < fitted.points.len() && fitted.points[j].0 < v - 1e-9 {
            j += 1;
        }
        if j >= fitted.points.len() {
            break;
        }
        if (fitted.points[j].0 - v).abs() <= 1e-9 {
            out.push((v, i_meas, fitted.points[j].1));
        }
    }
    out
}

fn bin_histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![HistogramBin {
            lo_a: lo,
            hi_a: hi,
            count: values.len() as u32,
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u32; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo_a: lo + width * k as f64,
            hi_a: lo + width * (k + 1) as f64,
            count,
        })
        .collect()
}

/// Runs trigger, spread fit and resistance fit on every curve, aggregates
/// by median, classifies, and pools the fitted limiting-subcell currents
/// into a histogram. Curves whose fits fail are recorded and skipped; the
/// whole run fails only when no curve is usable.
pub fn diagnose(
    inputs: &[DiagnosisInput],
    baseline: &ModuleModel,
    thresholds: &Thresholds,
) -> Result<DiagnosisReport> {
    thresholds.validate()?;
    baseline.validate()?;
    if inputs.is_empty() {
        return Err(Error::Insufficient("no measured curves supplied".into()));
    }
    let healthy_model = baseline.fault_enabled(false);
    let mut curves = Vec::with_capacity(inputs.len());
    let mut lim_currents: Vec<f64> = Vec::new();

    for input in inputs {
        let ils = module_photocurrents(&healthy_model, &input.spectrum)?;
        let healthy = module_iv(&healthy_model, &ils, &input.temps_c)?;
        let metrics = &input.measured.metrics;
        let triggered = detect_fault_trigger(metrics, thresholds.ff_trigger);

        let fit = if !triggered {
            // healthy curve: baseline spread stands, nothing to fit;
            // residuals report the plain measured-vs-healthy deviation
            push_limiting(&mut lim_currents, &healthy_model, &ils)?;
            CurveFit {
                label: input.label.clone(),
                triggered,
                fill_factor: metrics.fill_factor,
                g_voc_measured_s: metrics.g_voc_s,
                g_voc_healthy_s: healthy.metrics.g_voc_s,
                fitted_sigma: Some(baseline.mismatch_sigma),
                fitted_delta_rs_ohm: Some(0.0),
                residual_i_mp_rel: Some(rel_err(metrics.i_mp_a, healthy.metrics.i_mp_a)),
                residual_v_mp_rel: Some(rel_err(metrics.v_mp_v, healthy.metrics.v_mp_v)),
                residual_rms_a: rms_current_error(&input.measured, &healthy),
                feasible: true,
                note: String::new(),
                overlay: overlay_points(&input.measured, &healthy),
            }
        } else {
            match fit_joint(&input.measured, &healthy_model, &ils, &input.temps_c, thresholds) {
                Ok(j) => {
                    let faulted =
                        healthy_model.with_fault(j.sigma, j.drs_ohm, healthy_model.mismatch_seed)?;
                    push_limiting(&mut lim_currents, &faulted, &ils)?;
                    CurveFit {
                        label: input.label.clone(),
                        triggered,
                        fill_factor: metrics.fill_factor,
                        g_voc_measured_s: metrics.g_voc_s,
                        g_voc_healthy_s: healthy.metrics.g_voc_s,
                        fitted_sigma: Some(j.sigma),
                        fitted_delta_rs_ohm: Some(j.drs_ohm),
                        residual_i_mp_rel: Some(j.i_rel),
                        residual_v_mp_rel: Some(j.v_rel),
                        residual_rms_a: Some(j.rms_a),
                        feasible: true,
                        note: String::new(),
                        overlay: overlay_points(&input.measured, &j.curve),
                    }
                }
                Err(e) => CurveFit {
                    label: input.label.clone(),
                    triggered,
                    fill_factor: metrics.fill_factor,
                    g_voc_measured_s: metrics.g_voc_s,
                    g_voc_healthy_s: healthy.metrics.g_voc_s,
                    fitted_sigma: None,
                    fitted_delta_rs_ohm: None,
                    residual_i_mp_rel: None,
                    residual_v_mp_rel: None,
                    residual_rms_a: None,
                    feasible: false,
                    note: e.to_string(),
                    overlay: Vec::new(),
                },
            }
        };
        curves.push(fit);
    }

    let sigmas: Vec<f64> = curves.iter().filter_map(|c| c.fitted_sigma).collect();
    let drss: Vec<f64> = curves.iter().filter_map(|c| c.fitted_delta_rs_ohm).collect();
    if sigmas.is_empty() {
        return Err(Error::Insufficient(
            "no curve produced a usable fit".into(),
        ));
    }
    let median_sigma = median(&sigmas);
    let median_drs = median(&drss);
    let mismatch = median_sigma > 2.0 * baseline.mismatch_sigma;
    let resistance = median_drs > thresholds.drs_floor_ohm;
    let classification = match (mismatch, resistance) {
        (false, false) => Classification::None,
        (true, false) => Classification::CurrentMismatch,
        (false, true) => Classification::SeriesResistance,
        (true, true) => Classification::Both,
    };
    Ok(DiagnosisReport {
        ff_threshold: thresholds.ff_trigger,
        baseline_sigma: baseline.mismatch_sigma,
        classification,
        median_sigma,
        median_delta_rs_ohm: median_drs,
        curves,
        histogram: bin_histogram(&lim_currents, 8),
    })
}

fn rel_err(measured: f64, simulated: f64) -> f64 {
    if measured == 0.0 {
        0.0
    } else {
        (simulated - measured).abs() / measured.abs()
    }
}

/// Appends this model's per-cell limiting-subcell photocurrents.
fn push_limiting(out: &mut Vec<f64>, model: &ModuleModel, ils: &[[f64; 3]]) -> Result<()> {
    let scales = model.effective_scales()?;
    for (k, il) in ils.iter().enumerate() {
        let lim = limiting_subcell(il);
        out.push(scales[k] * il[lim]);
    }
    Ok(())
}
