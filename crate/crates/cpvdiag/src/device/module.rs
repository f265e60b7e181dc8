//! Series-string IV solver.
//!
//! Every cell satisfies an exact node equation: the junction stack carries
//! i_cell, the antiparallel bypass diode carries byp(v_cell), and
//! i_cell + byp(v_cell) equals the string current. The bypass reverse leak
//! (under 10 nA) is absorbed into the stack current when it cannot move the
//! voltage by more than a few microvolts.
//!
//! Curves are sampled adaptively in current (a segment is split while its
//! midpoint strays from the chord, so knees refine and flat stretches stay
//! coarse), then resampled onto a 0.1 V voltage grid. The grid nominally
//! spans -10 V to just past open circuit; it extends above 75 V when Voc
//! demands it and truncates where the bypass network cannot pull the string
//! any lower within a 50 A conduction cap.

use super::metrics::{interp_at_v, iv_metrics, IVCurve};
use super::subcell::{thermal_voltage, JunctionOp, TEMP_MAX_C, TEMP_MIN_C};
use super::ModuleModel;
use crate::error::{Error, Result};
use crate::numeric::golden_min;

/// Voltage grid spacing of emitted curves, V.
pub const GRID_STEP_V: f64 = 0.1;
/// Lower edge of the emitted voltage grid, V.
pub const GRID_MIN_V: f64 = -10.0;
/// Reverse-conduction allowance of one bypass diode, A. Deeper clamping is
/// outside the model's validity and the curve truncates instead.
const BYPASS_EXCESS_CAP_A: f64 = 50.0;
/// Current-balance tolerance of the per-cell node equation, A. When the
/// bypass diode carries real current the junction-solve tolerance feeds it
/// about 1e-8 of relative noise, so the effective tolerance scales up with
/// the bypass current; demanding more just spins the iteration.
const KCL_TOL_A: f64 = 1e-11;
const KCL_TOL_REL_BYP: f64 = 1e-5;
/// Midpoint-vs-chord deviation limits. A segment stops splitting once the
/// midpoint sits on the chord to within CHORD_TOL_V in voltage, or once the
/// deviation maps through the chord slope to less than CHORD_TOL_I of
/// current; steep stretches are judged in volts and flat stretches in amps,
/// so neither direction over-refines the other.
const CHORD_TOL_V: f64 = 2e-4;
const CHORD_TOL_I: f64 = 2e-5;
/// No emitted segment may span more than this in voltage.
const SPLIT_DV_MAX_V: f64 = 5.0;
/// Segments narrower than this fraction of short-circuit current are never
/// split further; interpolation across them cannot move any grid sample by
/// a visible amount.
const SPLIT_DI_MIN_REL: f64 = 1e-7;
const MAX_SAMPLES: usize = 60_000;

/// One cell with temperature-dependent parameters precomputed.
pub(crate) struct CellOp {
    juncs: [JunctionOp; 3],
    ils: [f64; 3],
    /// Stack + wiring + fault series resistance, ohm.
    rs_total: f64,
    byp_is: f64,
    byp_nvt: f64,
}

impl CellOp {
    /// Stack voltage and dV/dI at a stack current.
    fn stack(&self, i: f64) -> (f64, f64) {
        let mut v = -i * self.rs_total;
        let mut dv = -self.rs_total;
        for (j, op) in self.juncs.iter().enumerate() {
            let u = op.solve(self.ils[j], i);
            v += u;
            dv += op.dudi(u);
        }
        (v, dv)
    }

    fn bypass(&self, v: f64) -> f64 {
        self.byp_is * (-v / self.byp_nvt).min(80.0).exp_m1()
    }

    fn dbypass_dv(&self, v: f64) -> f64 {
        -self.byp_is / self.byp_nvt * (-v / self.byp_nvt).min(80.0).exp()
    }

    /// Smallest subcell photocurrent; the stack cannot source more.
    fn limiting_il(&self) -> f64 {
        self.ils[0].min(self.ils[1]).min(self.ils[2])
    }

    /// Cell terminal voltage at a string current, from the exact node
    /// equation  i + byp(v(i)) = i_string  (strictly increasing in i).
    fn voltage_at(&self, i_string: f64) -> f64 {
        let (v0, _) = self.stack(i_string);
        let b0 = self.bypass(v0);
        if b0.abs() <= 1e-8 * i_string.abs().max(1.0) {
            return v0;
        }
        let mut lo = (i_string - 1.0).min(-1.0);
        let mut hi = i_string + 2e-9;
        let mut x = i_string;
        let mut v = v0;
        for _ in 0..200 {
            let (vx, dvx) = self.stack(x);
            v = vx;
            let b = self.bypass(vx);
            let h = x + b - i_string;
            if h.abs() <= KCL_TOL_A.max(KCL_TOL_REL_BYP * b.abs()) {
                return vx;
            }
            if h > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let excess = i_string - x;
            let arg = -vx / self.byp_nvt;
            let mut xn = if arg >= 79.0 {
                // Exponent clamp territory; the bypass value is fiction but
                // the stack slope is not. Pull the voltage up to the edge of
                // the conducting window (exact in the shunt-linear regime).
                x - (vx + 78.0 * self.byp_nvt) / dvx
            } else if b > 0.0 && excess > 0.0 {
                // Conducting regime: byp varies exponentially in x, so a
                // linear step on h stalls. ln(byp) is nearly linear in x;
                // solve ln(byp) = ln(excess) instead.
                let g = b.ln() - excess.ln();
                let dg = -dvx / self.byp_nvt + 1.0 / excess;
                x - g / dg
            } else {
                let dh = 1.0 + self.dbypass_dv(vx) * dvx;
                x - h / dh
            };
            if !(xn > lo && xn < hi) || !xn.is_finite() || xn == x {
                xn = 0.5 * (lo + hi);
            }
            if (hi - lo).abs() <= f64::EPSILON * x.abs().max(1.0) {
                return vx;
            }
            x = xn;
        }
        v
    }
}

pub(crate) fn build_ops(
    module: &ModuleModel,
    photocurrents: &[[f64; 3]],
    temps_c: &[f64],
) -> Result<Vec<CellOp>> {
    module.validate()?;
    let n = module.cells.len();
    if photocurrents.len() != n || temps_c.len() != n {
        return Err(Error::Domain(format!(
            "expected {n} photocurrent triples and {n} temperatures, got {} and {}",
            photocurrents.len(),
            temps_c.len()
        )));
    }
    let scales = module.effective_scales()?;
    let drs = module.effective_delta_rs();
    let mut ops = Vec::with_capacity(n);
    for (k, cell) in module.cells.iter().enumerate() {
        let t_c = temps_c[k];
        if !(TEMP_MIN_C..=TEMP_MAX_C).contains(&t_c) {
            return Err(Error::Domain(format!(
                "cell {k} temperature {t_c} C outside [{TEMP_MIN_C}, {TEMP_MAX_C}]"
            )));
        }
        let t_k = t_c + 273.15;
        let mut ils = [0.0; 3];
        for j in 0..3 {
            let il = photocurrents[k][j];
            if !il.is_finite() || il < 0.0 {
                return Err(Error::Domain(format!(
                    "cell {k} subcell {j} photocurrent {il} invalid"
                )));
            }
            ils[j] = il * scales[k];
        }
        ops.push(CellOp {
            juncs: [
                JunctionOp::new(&cell.subcells[0], t_k),
                JunctionOp::new(&cell.subcells[1], t_k),
                JunctionOp::new(&cell.subcells[2], t_k),
            ],
            ils,
            rs_total: cell.series_rs_ohm() + drs,
            byp_is: cell.bypass.saturation_a,
            byp_nvt: cell.bypass.ideality * thermal_voltage(t_k),
        });
    }
    Ok(ops)
}

pub(crate) fn string_voltage(ops: &[CellOp], i: f64) -> f64 {
    ops.iter().map(|c| c.voltage_at(i)).sum()
}

/// String voltage at one current. Convenience entry for callers that do not
/// need a full curve.
pub fn module_voltage_at(
    module: &ModuleModel,
    photocurrents: &[[f64; 3]],
    temps_c: &[f64],
    current_a: f64,
) -> Result<f64> {
    if !current_a.is_finite() {
        return Err(Error::Domain("current must be finite".into()));
    }
    let ops = build_ops(module, photocurrents, temps_c)?;
    Ok(string_voltage(&ops, current_a))
}

/// Full IV curve of a series string under one operating condition.
///
/// Photocurrents are per cell and per subcell, before the module's scale
/// factors (those are applied internally, from the fault draw when a fault
/// is enabled). Temperatures are junction temperatures in Celsius.
pub fn module_iv(
    module: &ModuleModel,
    photocurrents: &[[f64; 3]],
    temps_c: &[f64],
) -> Result<IVCurve> {
    let ops = build_ops(module, photocurrents, temps_c)?;
    let isc_est = ops
        .iter()
        .map(|c| c.limiting_il())
        .fold(f64::MIN, f64::max);
    if !(isc_est > 1e-9) {
        return Err(Error::Domain(
            "module is dark (no photocurrent); IV curve undefined".into(),
        ));
    }
    let v_of = |i: f64| string_voltage(&ops, i);

    let voc = v_of(0.0);
    if !(voc > 0.0) {
        return Err(Error::Solver(format!("non-positive open circuit {voc} V")));
    }

    // extend past Voc until the curve clears the next few grid points
    let v_top = voc + 2.5 * GRID_STEP_V;
    let mut i_lo = -0.02 * isc_est;
    for _ in 0..40 {
        if v_of(i_lo) >= v_top || i_lo <= -4.0 * isc_est {
            break;
        }
        i_lo *= 2.0;
    }

    // forward end: reach the grid floor, or the bypass conduction cap
    let i_cap = isc_est + BYPASS_EXCESS_CAP_A;
    let v_floor = GRID_MIN_V - 2.0 * GRID_STEP_V;
    let i_hi = if v_of(i_cap) > v_floor {
        i_cap
    } else {
        let mut a = 0.0;
        let mut b = i_cap;
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            let vm = v_of(m);
            if vm > v_floor {
                a = m;
            } else {
                b = m;
                if vm > v_floor - 1.0 {
                    break;
                }
            }
            if b - a < SPLIT_DI_MIN_REL * isc_est {
                break;
            }
        }
        b
    };

    // adaptive sampling in current
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let va = v_of(i_lo);
    let vb = v_of(i_hi);
    let di_floor = SPLIT_DI_MIN_REL * isc_est;
    samples.push((i_lo, va));
    subdivide(&v_of, i_lo, va, i_hi, vb, di_floor, 0, &mut samples)?;

    // resample onto the voltage grid
    let mut pts: Vec<(f64, f64)> = samples.iter().map(|&(i, v)| (v, i)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 4 {
        return Err(Error::Solver("curve sampling collapsed".into()));
    }
    let v_min = pts[0].0.max(GRID_MIN_V);
    let v_max = pts[pts.len() - 1].0;
    let k_lo = (v_min * 10.0 - 1e-7).ceil() as i64;
    let k_hi = (v_max * 10.0 + 1e-7).floor() as i64;
    if k_hi <= k_lo {
        return Err(Error::Solver("curve spans no grid points".into()));
    }
    let grid: Vec<(f64, f64)> = (k_lo..=k_hi)
        .map(|k| {
            let v = k as f64 / 10.0;
            (v, interp_at_v(&pts, v))
        })
        .collect();
    let metrics = iv_metrics(&grid)?;
    Ok(IVCurve {
        points: grid,
        metrics,
    })
}

/// Maximum-power point located directly in current space, without sampling
/// a full curve. Returns (i_mp_a, v_mp_v).
///
/// The per-cell bypass engagement currents (each cell's scaled limiting
/// photocurrent) cut [0, i_max] into intervals on which the set of
/// conducting bypass diodes is fixed and power is unimodal. String voltage
/// decreases with current, so an interval's power never exceeds
/// hi * V(lo); intervals are refined best-bound-first and pruned once the
/// bound falls under the best exact power found. Costs tens of voltage
/// evaluations instead of the thousands a full curve needs.
pub fn module_mpp(
    module: &ModuleModel,
    photocurrents: &[[f64; 3]],
    temps_c: &[f64],
) -> Result<(f64, f64)> {
    let ops = build_ops(module, photocurrents, temps_c)?;
    let mut edges: Vec<f64> = ops.iter().map(|c| c.limiting_il()).collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-12));
    let top = *edges.last().unwrap();
    if !(top > 1e-9) {
        return Err(Error::Domain(
            "module is dark (no photocurrent); maximum power undefined".into(),
        ));
    }
    // beyond the last engagement every stack is exhausted and V < 0
    let mut intervals = Vec::with_capacity(edges.len());
    let mut lo = 0.0;
    for &hi in &edges {
        let v_lo = string_voltage(&ops, lo);
        if v_lo > 0.0 && hi > lo {
            intervals.push((lo, hi, hi * v_lo));
        }
        lo = hi;
    }
    intervals.sort_by(|x, y| y.2.total_cmp(&x.2));
    let tol_i = (1e-4 * top).max(1e-9);
    let mut best_p = 0.0;
    let mut best = None;
    for &(a, b, bound) in &intervals {
        if bound <= best_p {
            break;
        }
        let (i_star, neg_p) = golden_min(|i| -(i * string_voltage(&ops, i)), a, b, tol_i);
        let p = -neg_p;
        if p > best_p && i_star > 0.0 {
            best_p = p;
            best = Some((i_star, p / i_star));
        }
    }
    best.ok_or_else(|| Error::Solver("no positive-power operating point".into()))
}

fn subdivide(
    v_of: &dyn Fn(f64) -> f64,
    ia: f64,
    va: f64,
    ib: f64,
    vb: f64,
    di_floor: f64,
    depth: u32,
    out: &mut Vec<(f64, f64)>,
) -> Result<()> {
    if out.len() > MAX_SAMPLES {
        return Err(Error::Solver("IV sampling exceeded budget".into()));
    }
    if depth >= 52 || (ib - ia).abs() <= di_floor {
        out.push((ib, vb));
        return Ok(());
    }
    let im = 0.5 * (ia + ib);
    let vm = v_of(im);
    let dev_v = (vm - 0.5 * (va + vb)).abs();
    let dv_span = (va - vb).abs();
    let dev_i = if dv_span > 0.0 {
        dev_v * (ib - ia).abs() / dv_span
    } else {
        0.0
    };
    if (dev_v <= CHORD_TOL_V || dev_i <= CHORD_TOL_I) && dv_span <= SPLIT_DV_MAX_V {
        out.push((im, vm));
        out.push((ib, vb));
        return Ok(());
    }
    subdivide(v_of, ia, va, im, vm, di_floor, depth + 1, out)?;
    subdivide(v_of, im, vm, ib, vb, di_floor, depth + 1, out)
}
