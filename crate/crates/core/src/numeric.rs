//! Bracketed scalar solvers shared by the closed-form optimisers.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `rel_tol * |x|` (plus a tiny
/// absolute floor). Returns the abscissa of the minimum.
pub fn golden_section_min<F>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "golden-section bracket [{a}, {b}] is empty or not finite"
        )));
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()) * 0.5 + f64::MIN_POSITIVE {
            return Ok(0.5 * (a + b));
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    Err(Error::NoConvergence {
        method: "golden-section search",
        detail: format!("bracket [{a}, {b}] after 500 iterations"),
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    golden_section_min(|x| -f(x), a, b, rel_tol)
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64, what: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoRoot(what));
    }
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= rel_tol * m.abs() + f64::MIN_POSITIVE || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Locate the grid point with the smallest value of `f` on `n` evenly spaced
/// samples of `[a, b]` and return the neighbouring bracket around it.
pub(crate) fn bracket_minimum<F>(mut f: F, a: f64, b: f64, n: usize) -> (f64, f64, usize)
where
    F: FnMut(f64) -> f64,
{
    let step = (b - a) / (n - 1) as f64;
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..n {
        let v = f(a + step * i as f64);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let lo = a + step * best.saturating_sub(1) as f64;
    let hi = a + step * (best + 1).min(n - 1) as f64;
    (lo, hi, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let x = golden_section_min(|x| (x - 1.3).powi(2), 0.0, 4.0, 1e-12).unwrap();
        assert!((x - 1.3).abs() < 1e-8);
    }

    #[test]
    fn bisect_sqrt2() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15, "x^2-2").unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_reports_missing_root() {
        assert_eq!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, "x^2+1"),
            Err(Error::NoRoot("x^2+1"))
        );
    }

    #[test]
    fn empty_bracket_rejected() {
        assert!(golden_section_min(|x| x, 1.0, 1.0, 1e-9).is_err());
    }
}
