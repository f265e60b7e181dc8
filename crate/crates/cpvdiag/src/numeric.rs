//! Small numerical kernels shared across modules: integration, interpolation,
//! safeguarded root finding, and scalar minimization.

use crate::error::{Error, Result};

/// Trapezoidal integral of y over x. x must be sorted ascending.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    acc
}

/// Piecewise-linear interpolation with endpoint clamping.
/// xs must be strictly increasing.
pub fn lin_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let k = xs.partition_point(|&v| v < x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (x - x0) / (x1 - x0);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

/// Newton iteration safeguarded by a shrinking bisection bracket.
/// `f` must be continuous and strictly monotone decreasing on [lo, hi] with
/// f(lo) >= 0 >= f(hi). Converges on |f| < tol_f.
pub fn newton_bisect<F, D>(
    f: F,
    df: D,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    tol_f: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = x0.clamp(lo + 1e-15, hi - 1e-15);
    for _ in 0..max_iter {
        let fx = f(x);
        if fx.abs() < tol_f {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let xn = x - fx / d;
        x = if xn.is_finite() && xn > lo && xn < hi {
            xn
        } else {
            0.5 * (lo + hi)
        };
    }
    // Bracket collapse is as good as a residual pass when the interval is
    // down to floating-point resolution.
    if (hi - lo).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
        return Ok(x);
    }
    Err(Error::Solver(format!(
        "newton_bisect: no convergence, residual {:.3e} at x={:.6e}",
        f(x),
        x
    )))
}

/// Bisection for a strictly decreasing f with f(lo) > 0 > f(hi).
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal f on [a, b].
/// Returns (argmin, min).
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol_x: f64) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol_x {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Secant iteration with an 8x step clamp, used by calibration.
/// Converges on |f| < tol_f; returns the last iterate and residual.
pub fn secant<F: Fn(f64) -> f64>(f: F, x0: f64, x1: f64, tol_f: f64, iters: usize) -> (f64, f64) {
    let (mut x0, mut x1) = (x0, x1);
    let mut f0 = f(x0);
    let mut f1 = f(x1);
    for _ in 0..iters {
        if f1.abs() < tol_f {
            break;
        }
        let denom = f1 - f0;
        let mut x2 = if denom.abs() > 0.0 {
            x1 - f1 * (x1 - x0) / denom
        } else {
            0.5 * (x0 + x1)
        };
        // Keep steps within a factor of 8 of the current iterate so a flat
        // secant cannot fling the parameter out of its physical range.
        let (lo, hi) = if x1 > 0.0 {
            (x1 / 8.0, x1 * 8.0)
        } else {
            (x1 * 8.0, x1 / 8.0)
        };
        x2 = x2.clamp(lo.min(hi), lo.max(hi));
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1);
    }
    (x1, f1)
}

/// Least-squares slope of y over x. Returns 0 for fewer than 2 points.
pub fn lsq_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return 0.0;
    }
    (n * sxy - sx * sy) / denom
}

/// Median of a sample; average of the two middle elements for even sizes.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trapezoid_quadratic() {
        // integral of x^2 over [0,2] = 8/3; trapezoid on a fine grid
        let x: Vec<f64> = (0..=2000).map(|k| 2.0 * k as f64 / 2000.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert_relative_eq!(trapezoid(&x, &y), 8.0 / 3.0, max_relative = 1e-6);
    }

    #[test]
    fn trapezoid_rectangle_exact() {
        assert_eq!(trapezoid(&[0.0, 1.0, 3.0], &[2.0, 2.0, 2.0]), 6.0);
    }

    #[test]
    fn interp_endpoints_clamp() {
        let xs = [1.0, 2.0, 4.0];
        let ys = [10.0, 20.0, 40.0];
        assert_eq!(lin_interp(&xs, &ys, 0.0), 10.0);
        assert_eq!(lin_interp(&xs, &ys, 9.0), 40.0);
        assert_relative_eq!(lin_interp(&xs, &ys, 3.0), 30.0);
    }

    #[test]
    fn newton_bisect_cubic_root() {
        // f(x) = 8 - x^3 is strictly decreasing; root at x=2
        let f = |x: f64| 8.0 - x * x * x;
        let df = |x: f64| -3.0 * x * x;
        let x = newton_bisect(f, df, 0.0, 4.0, 0.5, 1e-14, 200).unwrap();
        assert_relative_eq!(x, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn golden_finds_parabola_min() {
        let (x, v) = golden_min(|x| (x - 1.25) * (x - 1.25) + 3.0, -4.0, 6.0, 1e-10);
        // near the minimum the objective is flat to double precision over
        // an interval of width ~1e-8, so that is the achievable accuracy
        assert_relative_eq!(x, 1.25, epsilon = 1e-7);
        assert_relative_eq!(v, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn secant_sqrt() {
        let (x, r) = secant(|x| x * x - 2.0, 1.0, 1.5, 1e-12, 40);
        assert_relative_eq!(x, std::f64::consts::SQRT_2, max_relative = 1e-10);
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn lsq_slope_exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 3.0 - 0.5 * k as f64)).collect();
        assert_relative_eq!(lsq_slope(&pts), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
