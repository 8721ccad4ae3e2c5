//! One-dimensional Zak phases.
//!
//! Three routes are provided:
//!
//! * the discrete Wilson loop (primary, gauge invariant),
//! * quadrature of the closed-form Berry-connection integrand
//!   `|C1|² / D±²` built from the angular functions `a, b, c, d`,
//! * the endpoint formula `φ(k_start) − φ(k_end)` for versor eigenvectors
//!   (`n3 ≡ 0`).
//!
//! Zak values are reported as representatives in `(−π, π]`; the unreduced
//! sum is kept alongside since the phase is only defined modulo 2π.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::angles::{circular_distance, principal};
use crate::bands::{band_extrema, scaled_norm};
use crate::bloch::{bloch_argument_path, bloch_eigenvectors_with, inner, Spinor};
use crate::protocol::ProtocolParams;
use crate::quadrature::simpson_converged;
use crate::{Error, Result, DIRAC_THRESHOLD};

/// `[−π/2, π/2]`, the default Wilson-loop path.
pub const HALF_ZONE: (f64, f64) = (-FRAC_PI_2, FRAC_PI_2);
/// `[0, π]`, the default quadrature interval.
pub const POSITIVE_HALF_ZONE: (f64, f64) = (0.0, PI);
/// `[−π, π]`.
pub const FULL_ZONE: (f64, f64) = (-PI, PI);

/// Nodes are doubled until successive results agree to this level.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;
/// Upper bound on nodes for grid doubling.
pub const MAX_NODES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZakMethod {
    WilsonLoop,
    ClosedFormIntegrand,
    EndpointFormula,
}

impl ZakMethod {
    pub fn label(self) -> &'static str {
        match self {
            ZakMethod::WilsonLoop => "wilson_loop",
            ZakMethod::ClosedFormIntegrand => "closed_form_integrand",
            ZakMethod::EndpointFormula => "endpoint_formula",
        }
    }
}

/// How a Wilson-loop path was closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Closure {
    /// The path spans a full period, so each band closes on itself.
    Periodic,
    /// `u₊(end)` links to `u₋(start)` and `u₋(end)` back to `u₊(start)`.
    /// Exact when `n(end) = −n(start)`, as on a half zone for HQW and NCRQW.
    CrossBand,
    /// Each band is closed with an overlap back to its own start.
    PerBand,
}

impl Closure {
    pub fn label(self) -> &'static str {
        match self {
            Closure::Periodic => "periodic",
            Closure::CrossBand => "cross_band",
            Closure::PerBand => "per_band",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZakResult {
    /// Band-resolved phases; `None` where the band's path is not closed on
    /// itself and the phase would depend on the gauge.
    pub z_plus: Option<f64>,
    pub z_minus: Option<f64>,
    pub z_total: Option<f64>,
    /// `z_total` before reduction modulo 2π.
    pub raw_total: Option<f64>,
    pub method: ZakMethod,
    /// Grid intervals used for the reported value.
    pub n_k: usize,
    pub interval: (f64, f64),
    pub closure: Option<Closure>,
    /// Change between the last two grid refinements.
    pub last_change: f64,
}

/// Berry phase `−arg Π ⟨v_i|v_{i+1}⟩` of a closed chain (the last vector
/// links back to the first).
pub fn berry_phase_cyclic(vectors: &[Spinor]) -> Result<f64> {
    let mut prod = C64::new(1.0, 0.0);
    for (i, v) in vectors.iter().enumerate() {
        let next = &vectors[(i + 1) % vectors.len()];
        prod *= inner(v, next);
        let m = prod.norm();
        if m < 1e-12 {
            return Err(Error::VanishingOverlap(m));
        }
        prod /= m;
    }
    Ok(-prod.arg())
}

/// Gauge-invariant Wilson-loop phases built from eigenvectors sampled at
/// `k_0 … k_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonValue {
    pub z_plus: Option<f64>,
    pub z_minus: Option<f64>,
    pub z_total: f64,
    pub raw_total: f64,
    pub closure: Closure,
}

/// Closes the sampled band paths and evaluates their Berry phases.
///
/// With `periodic` set the last node is the first one shifted by 2π and is
/// dropped. Otherwise the two-band chain is closed across bands when that
/// link is at least as strong as closing each band on itself.
pub fn wilson_from_vectors(plus: &[Spinor], minus: &[Spinor], periodic: bool) -> Result<WilsonValue> {
    if plus.len() != minus.len() || plus.len() < 2 {
        return Err(Error::InvalidArgument("band paths need equal lengths of at least 2".into()));
    }
    if periodic {
        let n = plus.len() - 1;
        let zp = berry_phase_cyclic(&plus[..n])?;
        let zm = berry_phase_cyclic(&minus[..n])?;
        let raw = zp + zm;
        return Ok(WilsonValue {
            z_plus: Some(zp),
            z_minus: Some(zm),
            z_total: principal(raw),
            raw_total: raw,
            closure: Closure::Periodic,
        });
    }
    let (p0, pn) = (&plus[0], &plus[plus.len() - 1]);
    let (m0, mn) = (&minus[0], &minus[minus.len() - 1]);
    let cross = inner(pn, m0).norm() * inner(mn, p0).norm();
    let own = inner(pn, p0).norm() * inner(mn, m0).norm();
    if cross >= own {
        let chain: Vec<Spinor> = plus.iter().chain(minus.iter()).copied().collect();
        let z = berry_phase_cyclic(&chain)?;
        Ok(WilsonValue {
            z_plus: None,
            z_minus: None,
            z_total: principal(z),
            raw_total: z,
            closure: Closure::CrossBand,
        })
    } else {
        let zp = berry_phase_cyclic(plus)?;
        let zm = berry_phase_cyclic(minus)?;
        let raw = zp + zm;
        Ok(WilsonValue {
            z_plus: Some(zp),
            z_minus: Some(zm),
            z_total: principal(raw),
            raw_total: raw,
            closure: Closure::PerBand,
        })
    }
}

fn check_interval(interval: (f64, f64)) -> Result<()> {
    let (a, b) = interval;
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid k interval [{a}, {b}]")));
    }
    Ok(())
}

fn is_periodic(interval: (f64, f64)) -> bool {
    ((interval.1 - interval.0) - 2.0 * PI).abs() < 1e-12
}

/// Rejects paths that touch a gap closure, both at the sampled nodes and at
/// the refined band extrema inside the window.
fn check_path(params: &ProtocolParams, interval: (f64, f64)) -> Result<()> {
    for ext in band_extrema(params, interval.0, interval.1) {
        if ext.sin_e <= DIRAC_THRESHOLD {
            return Err(Error::SingularPath { k: ext.k });
        }
    }
    Ok(())
}

/// Band eigenvectors at `k_i = a + i (b − a) / n`, `i = 0..=n`.
pub fn eigenvector_path(
    params: &ProtocolParams,
    interval: (f64, f64),
    n: usize,
    flip_argument: bool,
) -> Result<(Vec<Spinor>, Vec<Spinor>)> {
    let (a, b) = interval;
    let h = (b - a) / n as f64;
    let mut plus = Vec::with_capacity(n + 1);
    let mut minus = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let k = if i == n { b } else { a + h * i as f64 };
        let pair = bloch_eigenvectors_with(params, k, flip_argument).map_err(|e| match e {
            Error::SingularPoint { k, .. } => Error::SingularPath { k },
            other => other,
        })?;
        plus.push(pair.plus);
        minus.push(pair.minus);
    }
    Ok((plus, minus))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonOptions {
    /// Initial number of grid intervals (at least 16).
    pub n_k: usize,
    pub tolerance: f64,
    pub max_nodes: usize,
    /// Negate the Bloch argument (`n2 → −n2`) before diagonalising.
    pub flip_argument: bool,
}

impl Default for WilsonOptions {
    fn default() -> Self {
        Self { n_k: 64, tolerance: CONVERGENCE_TOLERANCE, max_nodes: MAX_NODES, flip_argument: false }
    }
}

fn wilson_at(params: &ProtocolParams, interval: (f64, f64), n: usize, flip: bool) -> Result<WilsonValue> {
    let (plus, minus) = eigenvector_path(params, interval, n, flip)?;
    wilson_from_vectors(&plus, &minus, is_periodic(interval))
}

/// Zak phase of both bands along `interval` by the discrete Wilson loop,
/// doubling the grid until the total changes by less than the tolerance.
pub fn zak_wilson_loop(params: &ProtocolParams, interval: (f64, f64), options: WilsonOptions) -> Result<ZakResult> {
    check_interval(interval)?;
    if options.n_k < 16 {
        return Err(Error::InvalidArgument(format!("n_k must be at least 16, got {}", options.n_k)));
    }
    check_path(params, interval)?;

    let mut n = options.n_k;
    let mut prev = wilson_at(params, interval, n, options.flip_argument)?;
    let mut change = f64::INFINITY;
    while n * 2 <= options.max_nodes {
        n *= 2;
        let cur = wilson_at(params, interval, n, options.flip_argument)?;
        change = circular_distance(cur.z_total, prev.z_total);
        if change < options.tolerance {
            return Ok(ZakResult {
                z_plus: cur.z_plus.map(principal),
                z_minus: cur.z_minus.map(principal),
                z_total: Some(cur.z_total),
                raw_total: Some(cur.raw_total),
                method: ZakMethod::WilsonLoop,
                n_k: n,
                interval,
                closure: Some(cur.closure),
                last_change: change,
            });
        }
        prev = cur;
    }
    Err(Error::NoConvergence { nodes: n + 1, change })
}

/// `tan θ2 / tan θ1`, the closed-form SSQW expression, reported next to the
/// Wilson-loop phase rather than in place of it.
pub fn zak_closed_form_ssqw(theta1: f64, theta2: f64) -> Result<f64> {
    let t1 = theta1.tan();
    if t1.abs() < 1e-12 {
        return Err(Error::DivisionByZero);
    }
    Ok(theta2.tan() / t1)
}

/// Angular functions and eigenvector pieces entering the closed-form
/// integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandComponents {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// `n1 + i n2 = −e^{−ik} (a − i b)`.
    pub c1: C64,
    /// `n3 − λ` (upper band) and `n3 + λ` (lower band).
    pub c2_plus: f64,
    pub c2_minus: f64,
    /// `sqrt(|C1|² + C2²)` per band.
    pub d_plus: f64,
    pub d_minus: f64,
    /// `λ = sqrt(a² + b² + c² cos²k + d² sin²k − sin 2k · c d)`.
    pub lambda: f64,
}

/// `n3 ∓ λ` evaluated without cancellation, using
/// `(n3 − λ)(n3 + λ) = −(n1² + n2²)`.
fn c2_pair(n3: f64, lambda: f64, in_plane_sq: f64) -> (f64, f64) {
    if n3 >= 0.0 {
        let minus = n3 + lambda;
        let plus = if minus > 0.0 { -in_plane_sq / minus } else { 0.0 };
        (plus, minus)
    } else {
        let plus = n3 - lambda;
        let minus = if plus < 0.0 { -in_plane_sq / plus } else { 0.0 };
        (plus, minus)
    }
}

fn components_from(a: f64, b: f64, c: f64, d: f64, c1: C64, n3: f64, lambda: f64) -> IntegrandComponents {
    let in_plane = c1.norm_sqr();
    let (c2_plus, c2_minus) = c2_pair(n3, lambda, in_plane);
    IntegrandComponents {
        a,
        b,
        c,
        d,
        c1,
        c2_plus,
        c2_minus,
        d_plus: (in_plane + c2_plus * c2_plus).sqrt(),
        d_minus: (in_plane + c2_minus * c2_minus).sqrt(),
        lambda,
    }
}

/// Integrand components for the non-commuting-rotations walk.
pub fn integrand_components(theta: f64, phi: f64, k: f64) -> IntegrandComponents {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (a, b, c, d) = (sp * ct, cp * st, sp * st, cp * ct);
    let (sk, ck) = k.sin_cos();
    let c1 = -C64::from_polar(1.0, -k) * C64::new(a, -b);
    let n3 = c * ck - d * sk;
    let lambda_sq = a * a + b * b + c * c * ck * ck + d * d * sk * sk - (2.0 * k).sin() * c * d;
    components_from(a, b, c, d, c1, n3, lambda_sq.max(0.0).sqrt())
}

fn integrand_value(comp: &IntegrandComponents, band: Band, k: f64) -> Result<f64> {
    let d = match band {
        Band::Plus => comp.d_plus,
        Band::Minus => comp.d_minus,
    };
    if d <= 1e-12 {
        return Err(Error::SingularPoint { k, sin_e: comp.lambda });
    }
    Ok(comp.c1.norm_sqr() / (d * d))
}

/// `(a² + b²) / D±(k)²` for the non-commuting-rotations walk.
pub fn zak_integrand_ncrqw(theta: f64, phi: f64, k: f64, band: Band) -> Result<f64> {
    integrand_value(&integrand_components(theta, phi, k), band, k)
}

/// Closed-form integrand for any protocol. HQW is the `φ = 0` case of the
/// non-commuting walk; SSQW uses the same `|C1|² / D±²` structure built from
/// its own norm-vector numerators.
pub fn zak_integrand(params: &ProtocolParams, k: f64, band: Band) -> Result<f64> {
    match *params {
        ProtocolParams::Hqw { theta } => zak_integrand_ncrqw(theta, 0.0, k, band),
        ProtocolParams::Ncrqw { theta, phi } => zak_integrand_ncrqw(theta, phi, k, band),
        ProtocolParams::Ssqw { .. } => {
            let [n1, n2, n3] = scaled_norm(params, k);
            let lambda = (n1 * n1 + n2 * n2 + n3 * n3).sqrt();
            let comp = components_from(f64::NAN, f64::NAN, f64::NAN, f64::NAN, C64::new(n1, n2), n3, lambda);
            integrand_value(&comp, band, k)
        }
    }
}

/// Zak phases from composite Simpson quadrature of [`zak_integrand`] with
/// grid doubling to [`CONVERGENCE_TOLERANCE`].
pub fn zak_quadrature(params: &ProtocolParams, interval: (f64, f64), n_k: usize) -> Result<ZakResult> {
    check_interval(interval)?;
    check_path(params, interval)?;
    let band_value = |band: Band| -> Result<(f64, usize, f64)> {
        let singular = Cell::new(None);
        let f = |k: f64| match zak_integrand(params, k, band) {
            Ok(v) => v,
            Err(_) => {
                singular.set(Some(k));
                0.0
            }
        };
        let q = simpson_converged(f, interval.0, interval.1, n_k.max(2), CONVERGENCE_TOLERANCE, MAX_NODES);
        if let Some(k) = singular.get() {
            return Err(Error::SingularPath { k });
        }
        let q = q?;
        Ok((q.value, q.intervals, q.change))
    };
    let (zp, np, cp) = band_value(Band::Plus)?;
    let (zm, nm, cm) = band_value(Band::Minus)?;
    let raw = zp + zm;
    Ok(ZakResult {
        z_plus: Some(zp),
        z_minus: Some(zm),
        z_total: Some(principal(raw)),
        raw_total: Some(raw),
        method: ZakMethod::ClosedFormIntegrand,
        n_k: np.max(nm),
        interval,
        closure: None,
        last_change: cp.max(cm),
    })
}

/// `φ(k_start) − φ(k_end)` on the continuous branch of the Bloch argument.
/// Only meaningful when the eigenvectors are versors, so `n3` must vanish on
/// every node.
pub fn zak_endpoint_formula(params: &ProtocolParams, interval: (f64, f64), n_k: usize) -> Result<ZakResult> {
    check_interval(interval)?;
    let n = n_k.max(16);
    let (a, b) = interval;
    let ks: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect();
    for &k in &ks {
        let s = scaled_norm(params, k);
        let len = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        if len <= DIRAC_THRESHOLD {
            return Err(Error::SingularPath { k });
        }
        if (s[2] / len).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "endpoint formula needs n3 = 0, found {} at k = {k}",
                s[2] / len
            )));
        }
    }
    let phi = bloch_argument_path(params, &ks)?;
    let raw = phi[0] - phi[n];
    Ok(ZakResult {
        z_plus: None,
        z_minus: None,
        z_total: Some(principal(raw)),
        raw_total: Some(raw),
        method: ZakMethod::EndpointFormula,
        n_k: n,
        interval,
        closure: None,
        last_change: 0.0,
    })
}
