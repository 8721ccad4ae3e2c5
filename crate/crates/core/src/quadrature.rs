//! Composite Simpson quadrature with grid doubling.

use crate::{Error, Result};

/// Composite Simpson rule on `intervals` (rounded up to even) equal panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = (intervals.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let x = a + h * i as f64;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Richardson-corrected estimate from the last two grids.
    pub value: f64,
    /// Panels in the finest grid.
    pub intervals: usize,
    /// Difference between the last two Simpson estimates.
    pub change: f64,
}

/// Doubles the number of panels, starting from `start`, until two successive
/// Simpson estimates differ by less than `tol`. The returned value carries the
/// Richardson correction `(S_2n − S_n) / 15`.
pub fn simpson_converged<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    start: usize,
    tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    let mut n = start.max(2);
    let mut prev = simpson(&f, a, b, n);
    let mut change = f64::INFINITY;
    while n * 2 <= max_intervals {
        n *= 2;
        let cur = simpson(&f, a, b, n);
        change = (cur - prev).abs();
        if !cur.is_finite() {
            break;
        }
        if change < tol {
            return Ok(Quadrature { value: cur + (cur - prev) / 15.0, intervals: n, change });
        }
        prev = cur;
    }
    Err(Error::NoConvergence { nodes: n + 1, change })
}
