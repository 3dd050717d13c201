//! Quadrature building blocks shared by the special-function and potential
//! modules: fixed-order Gauss-Legendre panels with panel-count doubling, and
//! a composite Simpson rule for time integrals.

use crate::error::{Error, Result};
use once_cell::sync::Lazy;

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
static GL16: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(16));

/// Compute Gauss-Legendre nodes and weights on [-1, 1] for order `k`.
///
/// Newton's method from the Chebyshev initial guess converges to machine
/// precision in a handful of iterations for the orders used here.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 2, "Gauss-Legendre order must be at least 2");
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..k {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(k, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                let (p2, d2) = legendre_with_derivative(k, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite 16-point Gauss-Legendre over `panels` equal panels of [a, b].
pub fn integrate_panels(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = (&GL16.0, &GL16.1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Panel-doubling convergence cap. 2^14 panels of 16 points resolves every
/// integrand in this crate; hitting the cap signals a genuinely bad call.
const MAX_PANELS: usize = 1 << 14;

/// Integrate `f` over [a, b], doubling the panel count until two successive
/// composite results differ by less than `tol` (absolute).
pub fn integrate_adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::invalid(format!("bad integration range [{a}, {b}]")));
    }
    let mut panels = 1;
    let mut prev = integrate_panels(f, a, b, panels);
    loop {
        panels *= 2;
        let next = integrate_panels(f, a, b, panels);
        let diff = (next - prev).abs();
        if diff < tol {
            return Ok(next);
        }
        if panels >= MAX_PANELS {
            return Err(Error::QuadratureNonConvergence {
                achieved: diff,
                requested: tol,
            });
        }
        prev = next;
    }
}

/// Composite Simpson rule on `panels` equal panels (2*panels + 1 evaluations).
pub fn simpson_panels(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        total += f(lo) + 4.0 * f(lo + 0.5 * h) + f(lo + h);
    }
    total * h / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl16_integrates_low_degree_polynomials_exactly() {
        // 16-point Gauss is exact through degree 31.
        let mut f = |x: f64| x.powi(7) - 3.0 * x.powi(4) + x;
        let got = integrate_panels(&mut f, 0.0, 2.0, 1);
        let exact = 2.0f64.powi(8) / 8.0 - 3.0 * 2.0f64.powi(5) / 5.0 + 2.0;
        assert!((got - exact).abs() < 1e-12, "got {got}, want {exact}");
    }

    #[test]
    fn adaptive_handles_oscillatory_integrand() {
        let mut f = |x: f64| (20.0 * x).cos() * (-x * x).exp();
        let got = integrate_adaptive(&mut f, 0.0, 4.0, 1e-12).unwrap();
        // Reference from a much finer fixed-panel evaluation.
        let mut f2 = |x: f64| (20.0 * x).cos() * (-x * x).exp();
        let want = integrate_panels(&mut f2, 0.0, 4.0, 4096);
        assert!((got - want).abs() < 1e-11);
    }

    #[test]
    fn adaptive_rejects_degenerate_range() {
        let mut f = |_x: f64| 1.0;
        assert!(integrate_adaptive(&mut f, 1.0, 1.0, 1e-10).is_err());
        assert!(integrate_adaptive(&mut f, f64::NAN, 1.0, 1e-10).is_err());
    }

    #[test]
    fn simpson_fourth_order_on_smooth_integrand() {
        let mut f = |x: f64| (x).exp() * (3.0 * x).sin();
        let exact = {
            // antiderivative of e^x sin(3x): e^x (sin 3x - 3 cos 3x)/10
            let g = |x: f64| x.exp() * ((3.0 * x).sin() - 3.0 * (3.0 * x).cos()) / 10.0;
            g(1.0) - g(0.0)
        };
        let e8 = (simpson_panels(&mut f, 0.0, 1.0, 8) - exact).abs();
        let e16 = (simpson_panels(&mut f, 0.0, 1.0, 16) - exact).abs();
        assert!(e8 / e16 > 8.0, "Simpson should be ~16x per doubling, got {}", e8 / e16);
    }
}
