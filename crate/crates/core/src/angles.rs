//! Angle helpers shared across modules.

use std::f64::consts::PI;

/// Wraps an angle into `[-π, π]`. Values already inside the interval
/// (including both endpoints) are returned unchanged.
pub fn wrap_angle(x: f64) -> f64 {
    if (-PI..=PI).contains(&x) || !x.is_finite() {
        return x;
    }
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    y.clamp(-PI, PI)
}

/// Representative of `x` modulo 2π in `(-π, π]`.
pub fn principal(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    // rem_euclid maps -π to π already; keep π itself.
    y
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    principal(a - b).abs()
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { end } else { start + step * i as f64 }).collect()
        }
    }
}

/// Removes 2π jumps from a sampled phase so that consecutive values differ
/// by at most π.
pub fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (i, &p) in phases.iter().enumerate() {
        if i > 0 {
            let prev = phases[i - 1];
            let d = p - prev;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        out.push(p + offset);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_interval_and_endpoints() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert_eq!(wrap_angle(0.3), 0.3);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(-7.0) - (-7.0 + 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn principal_range() {
        assert_eq!(principal(PI), PI);
        assert!((principal(-PI) - PI).abs() < 1e-15);
        assert!((principal(3.0 * PI) - PI).abs() < 1e-12);
        assert!((principal(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(-PI, PI, 101);
        assert_eq!(v[0], -PI);
        assert_eq!(v[100], PI);
        assert!((v[50]).abs() < 1e-15);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let raw = [3.0, -3.0, -2.5];
        let u = unwrap(&raw);
        assert!((u[1] - (-3.0 + 2.0 * PI)).abs() < 1e-15);
        assert!((u[2] - (-2.5 + 2.0 * PI)).abs() < 1e-15);
    }
}
