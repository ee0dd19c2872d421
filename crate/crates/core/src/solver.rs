//! Bracketed scalar root finding: bisection to a coordinate tolerance, then
//! a secant polish safeguarded by the bracket.

use crate::error::Result;

pub(crate) struct Root {
    pub x: f64,
    pub residual: f64,
}

/// Scan `[lo, hi]` on a uniform grid and return the first subinterval with a
/// sign change (an exact zero counts). `f` may fail (domain errors) and the
/// failure propagates.
pub(crate) fn first_sign_change(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    subdivisions: usize,
) -> Result<Option<(f64, f64, f64, f64)>> {
    let mut x0 = lo;
    let mut f0 = f(x0)?;
    if f0 == 0.0 {
        return Ok(Some((x0, f0, x0, f0)));
    }
    for i in 1..=subdivisions {
        let x1 = lo + (hi - lo) * (i as f64) / (subdivisions as f64);
        let f1 = f(x1)?;
        if f1 == 0.0 || f0 * f1 < 0.0 {
            return Ok(Some((x0, f0, x1, f1)));
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(None)
}

/// Refine a bracketing interval `[a, b]` with `f(a)·f(b) ≤ 0` down to
/// `|f| < f_tol`: plain bisection until the interval is narrower than
/// `x_tol`, then secant steps that fall back to bisection whenever they
/// leave the bracket.
pub(crate) fn refine(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    x_tol: f64,
    f_tol: f64,
) -> Result<Root> {
    if fa == 0.0 {
        return Ok(Root { x: a, residual: fa });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, residual: fb });
    }
    while (b - a).abs() > x_tol {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(Root { x: mid, residual: fm });
        }
        if fa * fm < 0.0 {
            b = mid;
            fb = fm;
        } else {
            a = mid;
            fa = fm;
        }
    }
    let (mut x, mut fx) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut x_prev = if x == a { b } else { a };
    let mut f_prev = if x == a { fb } else { fa };
    for _ in 0..64 {
        if fx.abs() < f_tol {
            return Ok(Root { x, residual: fx });
        }
        let denominator = fx - f_prev;
        let mut candidate = if denominator != 0.0 {
            x - fx * (x - x_prev) / denominator
        } else {
            0.5 * (a + b)
        };
        if !candidate.is_finite() || candidate < a.min(b) || candidate > a.max(b) {
            candidate = 0.5 * (a + b);
        }
        let f_candidate = f(candidate)?;
        if fa * f_candidate <= 0.0 {
            b = candidate;
        } else {
            a = candidate;
            fa = f_candidate;
        }
        x_prev = x;
        f_prev = fx;
        x = candidate;
        fx = f_candidate;
        if (b - a).abs() < f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    Ok(Root { x, residual: fx })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_root() {
        let mut f = |x: f64| -> Result<f64> { Ok(x * x - 2.0) };
        let (a, fa, b, fb) = first_sign_change(&mut f, 0.0, 2.0, 16).unwrap().unwrap();
        let root = refine(&mut f, a, fa, b, fb, 1e-6, 1e-12).unwrap();
        assert!((root.x - std::f64::consts::SQRT_2).abs() < 1e-9);
        assert!(root.residual.abs() < 1e-12);
    }

    #[test]
    fn reports_no_sign_change() {
        let mut f = |x: f64| -> Result<f64> { Ok(x * x + 1.0) };
        assert!(first_sign_change(&mut f, -3.0, 3.0, 32).unwrap().is_none());
    }
}
