//! Plane-wave evolution of a 1D walk, used as an independent check of the
//! position-space stepping.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::LineState;
use crate::coin::{momentum_step_unitary, Complex2x2};
use crate::protocol::ProtocolParams;
use crate::{Error, Result};

fn matrix_power(m: &Complex2x2, mut n: usize) -> Complex2x2 {
    let mut base = *m;
    let mut acc = Complex2x2::identity();
    while n > 0 {
        if n & 1 == 1 {
            acc = base * acc;
        }
        base = base * base;
        n >>= 1;
    }
    acc
}

/// Evolves `initial` for `n_steps` by transforming to `2^m` wavenumbers
/// `k_j = 2π j / 2^m`, applying `U(k)^n` and transforming back with a plain
/// discrete sum. Fails when the final box does not fit in `2^m` sites.
pub fn evolve_momentum_space(
    initial: &LineState,
    params: &ProtocolParams,
    n_steps: usize,
    m: u32,
) -> Result<LineState> {
    let n = 1usize << m;
    let reach = params.protocol().shifts_per_step();
    let radius = initial.radius() + reach * n_steps as i64;
    if (2 * radius + 1) as usize > n {
        return Err(Error::InvalidArgument(format!("{n} wavenumbers cannot resolve a lattice of radius {radius}")));
    }
    let ks: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let evolved: Vec<[C64; 2]> = ks
        .iter()
        .map(|&k| {
            let mut psi = [C64::new(0.0, 0.0); 2];
            for x in initial.sites() {
                let ph = C64::from_polar(1.0, k * x as f64);
                let a = initial.amplitude(x);
                psi[0] += ph * a[0];
                psi[1] += ph * a[1];
            }
            matrix_power(&momentum_step_unitary(params, k), n_steps).apply(psi)
        })
        .collect();
    let amps = (-radius..=radius)
        .map(|x| {
            let mut a = [C64::new(0.0, 0.0); 2];
            for (k, psi) in ks.iter().zip(&evolved) {
                let ph = C64::from_polar(1.0, -k * x as f64);
                a[0] += ph * psi[0];
                a[1] += ph * psi[1];
            }
            [a[0] / n as f64, a[1] / n as f64]
        })
        .collect();
    Ok(LineState { radius, amps, steps: initial.steps() + n_steps })
}
