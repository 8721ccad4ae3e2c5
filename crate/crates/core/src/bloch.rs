//! Bloch eigenvectors of `H(k) = n(k)·σ` in a fixed gauge, and the Bloch
//! argument `atan2(n2, n1)`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::angles::unwrap;
use crate::bands::{dispersion, scaled_norm};
use crate::protocol::ProtocolParams;
use crate::{Error, Result, DIRAC_THRESHOLD};

/// Normalised two-component complex vector.
pub type Spinor = [C64; 2];

/// `⟨a|b⟩`.
pub fn inner(a: &Spinor, b: &Spinor) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn spinor_norm(a: &Spinor) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr()).sqrt()
}

pub fn conj(a: &Spinor) -> Spinor {
    [a[0].conj(), a[1].conj()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gauge {
    /// The larger-modulus component is made real and positive; on a tie the
    /// first component is used.
    LargestComponentRealPositive,
}

/// Applies [`Gauge::LargestComponentRealPositive`].
pub fn fix_gauge(v: Spinor) -> Spinor {
    let (a0, a1) = (v[0].norm(), v[1].norm());
    let pivot = if a1 > a0 * (1.0 + 1e-12) { v[1] } else { v[0] };
    if pivot.norm() == 0.0 {
        return v;
    }
    let phase = pivot.conj() / pivot.norm();
    [v[0] * phase, v[1] * phase]
}

fn normalize(v: Spinor) -> Spinor {
    let n = spinor_norm(&v);
    [v[0] / n, v[1] / n]
}

/// Eigenvectors of `n·σ` for eigenvalues `+|n|` and `−|n|`, by direct 2×2
/// diagonalisation. For each eigenvalue `μ` the two null vectors of
/// `H − μ` read off its rows are `(n1 − i n2, μ − n3)` and
/// `(n3 + μ, n1 + i n2)`; the longer one is used.
pub fn eigenvectors_of(n: [f64; 3]) -> Option<(Spinor, Spinor, f64)> {
    let lambda = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if lambda == 0.0 {
        return None;
    }
    let off = C64::new(n[0], -n[1]);
    let vec_for = |mu: f64| {
        let row1 = [off, C64::new(mu - n[2], 0.0)];
        let row2 = [C64::new(n[2] + mu, 0.0), off.conj()];
        let v = if spinor_norm(&row1) >= spinor_norm(&row2) { row1 } else { row2 };
        fix_gauge(normalize(v))
    };
    Some((vec_for(lambda), vec_for(-lambda), lambda))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochEigenpair {
    pub k: f64,
    /// Quasi-energy `E(k)`; the eigenvalues of `n·σ` are `±1`.
    pub energy: f64,
    pub plus: Spinor,
    pub minus: Spinor,
    pub gauge: Gauge,
}

/// Bloch eigenvectors of `params` at `k`.
///
/// `flip_argument` negates `n2`, which negates the Bloch argument and
/// conjugates both eigenvectors.
pub fn bloch_eigenvectors_with(params: &ProtocolParams, k: f64, flip_argument: bool) -> Result<BlochEigenpair> {
    let mut n = scaled_norm(params, k);
    let sin_e = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if sin_e <= DIRAC_THRESHOLD {
        return Err(Error::SingularPoint { k, sin_e });
    }
    if flip_argument {
        n[1] = -n[1];
    }
    let unit = [n[0] / sin_e, n[1] / sin_e, n[2] / sin_e];
    let (plus, minus, _) = eigenvectors_of(unit).ok_or(Error::SingularPoint { k, sin_e })?;
    Ok(BlochEigenpair { k, energy: dispersion(params, k)?, plus, minus, gauge: Gauge::LargestComponentRealPositive })
}

pub fn bloch_eigenvectors(params: &ProtocolParams, k: f64) -> Result<BlochEigenpair> {
    bloch_eigenvectors_with(params, k, false)
}

/// `φ(k) = atan2(n2, n1)` in `(−π, π]`.
pub fn bloch_argument(params: &ProtocolParams, k: f64) -> Result<f64> {
    let n = scaled_norm(params, k);
    let sin_e = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if sin_e <= DIRAC_THRESHOLD {
        return Err(Error::SingularPoint { k, sin_e });
    }
    if n[0].hypot(n[1]) / sin_e <= 1e-12 {
        return Err(Error::UndefinedArgument { k });
    }
    Ok(n[1].atan2(n[0]))
}

/// Bloch argument along `ks` on a continuous branch.
pub fn bloch_argument_path(params: &ProtocolParams, ks: &[f64]) -> Result<Vec<f64>> {
    let raw = ks.iter().map(|&k| bloch_argument(params, k)).collect::<Result<Vec<_>>>()?;
    Ok(unwrap(&raw))
}
