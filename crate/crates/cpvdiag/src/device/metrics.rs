//! IV curve container and scalar metrics.

use crate::error::{Error, Result};
use crate::numeric::lsq_slope;
use serde::{Deserialize, Serialize};

/// Sampled IV curve, points ordered by ascending voltage with current
/// non-increasing (passive sign convention: positive current out of the
/// positive terminal).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IVCurve {
    /// (voltage V, current A) pairs.
    pub points: Vec<(f64, f64)>,
    pub metrics: IvMetrics,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IvMetrics {
    pub isc_a: f64,
    pub voc_v: f64,
    pub i_mp_a: f64,
    pub v_mp_v: f64,
    pub p_mp_w: f64,
    pub fill_factor: f64,
    /// Magnitude of dI/dV fitted over the top 3% of the voltage range below
    /// Voc. Grows with current mismatch between cells.
    pub g_voc_s: f64,
}

/// Fraction of the Voc range the near-Voc conductance is fitted over.
const G_VOC_WINDOW: f64 = 0.03;

/// Compute scalar metrics from a sampled curve.
///
/// Requirements: at least 4 points, strictly ascending voltages spanning
/// V = 0, non-increasing current with a zero crossing (Voc inside the
/// sampled range). Isc is interpolated at V = 0, Voc at I = 0; the maximum
/// power point is refined by a parabola through the best sample and its
/// neighbors.
pub fn iv_metrics(points: &[(f64, f64)]) -> Result<IvMetrics> {
    if points.len() < 4 {
        return Err(Error::Domain("need at least 4 IV points".into()));
    }
    for w in points.windows(2) {
        if !(w[1].0 >= w[0].0) {
            return Err(Error::Domain("IV voltages must be ascending".into()));
        }
        if w[1].1 > w[0].1 + 1e-9 {
            return Err(Error::Domain(
                "IV current must be non-increasing with voltage".into(),
            ));
        }
    }
    if points.iter().any(|(v, i)| !v.is_finite() || !i.is_finite()) {
        return Err(Error::Domain("IV points must be finite".into()));
    }
    let vmin = points[0].0;
    let vmax = points[points.len() - 1].0;
    if vmin > 0.0 || vmax < 0.0 {
        return Err(Error::Domain("curve must span V = 0 to read Isc".into()));
    }

    // Isc: linear interpolation at V = 0.
    let isc_a = interp_at_v(points, 0.0);

    // Voc: first downward zero crossing of current.
    let mut voc_v = None;
    for w in points.windows(2) {
        let (v0, i0) = w[0];
        let (v1, i1) = w[1];
        if i0 >= 0.0 && i1 < 0.0 {
            let t = if i0 - i1 > 0.0 { i0 / (i0 - i1) } else { 0.0 };
            voc_v = Some(v0 + t * (v1 - v0));
            break;
        }
        if i0 == 0.0 && i1 == 0.0 {
            voc_v = Some(v0);
            break;
        }
    }
    let voc_v = voc_v.ok_or_else(|| {
        Error::Domain("curve does not cross zero current; Voc outside sampled range".into())
    })?;
    if voc_v <= 0.0 || isc_a <= 0.0 {
        return Err(Error::Domain(format!(
            "degenerate curve: Isc {isc_a} A, Voc {voc_v} V"
        )));
    }

    // Maximum power point over the power quadrant, parabola-refined.
    let mut k_best = None;
    let mut p_best = f64::MIN;
    for (k, (v, i)) in points.iter().enumerate() {
        if *v >= 0.0 && *i >= 0.0 {
            let p = v * i;
            if p > p_best {
                p_best = p;
                k_best = Some(k);
            }
        }
    }
    let k = k_best.ok_or_else(|| Error::Domain("no power-quadrant samples".into()))?;
    let (mut v_mp, mut p_mp) = (points[k].0, p_best);
    if k > 0 && k + 1 < points.len() {
        let (va, pa) = (points[k - 1].0, points[k - 1].0 * points[k - 1].1);
        let (vb, pb) = (points[k].0, p_best);
        let (vc, pc) = (points[k + 1].0, points[k + 1].0 * points[k + 1].1);
        if let Some((v_ref, p_ref)) = parabola_vertex(va, pa, vb, pb, vc, pc) {
            if v_ref > va && v_ref < vc && p_ref >= p_mp {
                v_mp = v_ref;
                p_mp = p_ref;
            }
        }
    }
    let i_mp = if v_mp.abs() > 1e-12 { p_mp / v_mp } else { 0.0 };

    // Conductance magnitude near Voc: least-squares dI/dV over samples in
    // [ (1 - window) * Voc, Voc ], anchored by the interpolated (Voc, 0).
    let v_lo = (1.0 - G_VOC_WINDOW) * voc_v;
    let mut win: Vec<(f64, f64)> = points
        .iter()
        .filter(|(v, _)| *v >= v_lo && *v <= voc_v)
        .cloned()
        .collect();
    win.push((voc_v, 0.0));
    let g_voc_s = lsq_slope(&win).abs();

    Ok(IvMetrics {
        isc_a,
        voc_v,
        i_mp_a: i_mp,
        v_mp_v: v_mp,
        p_mp_w: p_mp,
        fill_factor: p_mp / (isc_a * voc_v),
        g_voc_s,
    })
}

/// Interpolated current at a voltage inside the sampled range.
pub fn interp_at_v(points: &[(f64, f64)], v: f64) -> f64 {
    match points.binary_search_by(|(pv, _)| pv.total_cmp(&v)) {
        Ok(k) => points[k].1,
        Err(0) => points[0].1,
        Err(k) if k >= points.len() => points[points.len() - 1].1,
        Err(k) => {
            let (v0, i0) = points[k - 1];
            let (v1, i1) = points[k];
            if v1 > v0 {
                i0 + (i1 - i0) * (v - v0) / (v1 - v0)
            } else {
                i0
            }
        }
    }
}

fn parabola_vertex(
    xa: f64,
    ya: f64,
    xb: f64,
    yb: f64,
    xc: f64,
    yc: f64,
) -> Option<(f64, f64)> {
    let d0 = (yb - ya) / (xb - xa);
    let d1 = (yc - yb) / (xc - xb);
    let curv = (d1 - d0) / (xc - xa);
    if !(curv < 0.0) || !curv.is_finite() {
        return None;
    }
    // vertex of y = yb + d(x - xb) + curv (x - xb)(x - xa)-style divided
    // differences; expand via the Newton form around xb
    let x = (xa + xb) / 2.0 - d0 / (2.0 * curv);
    let y = ya + d0 * (x - xa) + curv * (x - xa) * (x - xb);
    Some((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_has_unit_fill_factor() {
        // ideal source: constant current up to Voc, then a vertical drop
        let mut pts: Vec<(f64, f64)> = (0..=100).map(|k| (0.1 * k as f64, 2.0)).collect();
        pts.push((10.0, 0.0));
        pts.push((10.0, -1.0));
        let m = iv_metrics(&pts).unwrap();
        assert!((m.isc_a - 2.0).abs() < 1e-12);
        assert!((m.voc_v - 10.0).abs() < 1e-12);
        assert!((m.fill_factor - 1.0).abs() < 1e-9, "FF {}", m.fill_factor);
    }

    #[test]
    fn straight_line_has_quarter_fill_factor() {
        let isc = 2.0;
        let voc = 10.0;
        let pts: Vec<(f64, f64)> = (0..=200)
            .map(|k| {
                let v = -1.0 + 12.0 * k as f64 / 200.0;
                (v, isc * (1.0 - v / voc))
            })
            .collect();
        let m = iv_metrics(&pts).unwrap();
        assert!((m.isc_a - isc).abs() < 1e-9);
        assert!((m.voc_v - voc).abs() < 1e-9);
        // P(v) is an exact parabola, so the refinement lands on FF = 1/4
        assert!((m.fill_factor - 0.25).abs() < 1e-9, "FF {}", m.fill_factor);
        assert!((m.v_mp_v - 5.0).abs() < 1e-9);
        // dI/dV is -isc/voc everywhere
        assert!((m.g_voc_s - isc / voc).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(iv_metrics(&[(0.0, 1.0), (1.0, 0.5)]).is_err());
        // never crosses zero
        let pts: Vec<(f64, f64)> = (0..50).map(|k| (-1.0 + 0.1 * k as f64, 1.0)).collect();
        assert!(iv_metrics(&pts).is_err());
        // does not span V = 0
        let pts: Vec<(f64, f64)> = (0..50).map(|k| (1.0 + 0.1 * k as f64, 1.0 - 0.05 * k as f64)).collect();
        assert!(iv_metrics(&pts).is_err());
        // increasing current
        let pts = vec![(-1.0, 1.0), (0.0, 1.2), (1.0, 1.4), (2.0, 1.6)];
        assert!(iv_metrics(&pts).is_err());
    }

    #[test]
    fn interp_reads_midpoints() {
        let pts = vec![(0.0, 4.0), (1.0, 2.0), (2.0, 0.0)];
        assert!((interp_at_v(&pts, 0.5) - 3.0).abs() < 1e-12);
        assert!((interp_at_v(&pts, 2.0) - 0.0).abs() < 1e-12);
    }
}
