//! Closed-form dispersion relations, Pauli norm vectors and gap-closing
//! (Dirac point) enumeration.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::protocol::ProtocolParams;
use crate::{Error, Result, DIRAC_THRESHOLD};

/// Right-hand side of the dispersion relation, `cos E(k)`.
pub fn cos_quasi_energy(params: &ProtocolParams, k: f64) -> f64 {
    let (sk, ck) = k.sin_cos();
    match *params {
        ProtocolParams::Hqw { theta } => ck * theta.cos(),
        ProtocolParams::Ncrqw { theta, phi } => ck * theta.cos() * phi.cos() + sk * theta.sin() * phi.sin(),
        ProtocolParams::Ssqw { theta1, theta2 } => ck * theta1.cos() * theta2.cos() - theta1.sin() * theta2.sin(),
    }
}

/// `d cos E / dk`.
pub fn cos_quasi_energy_slope(params: &ProtocolParams, k: f64) -> f64 {
    let (sk, ck) = k.sin_cos();
    match *params {
        ProtocolParams::Hqw { theta } => -sk * theta.cos(),
        ProtocolParams::Ncrqw { theta, phi } => -sk * theta.cos() * phi.cos() + ck * theta.sin() * phi.sin(),
        ProtocolParams::Ssqw { theta1, theta2 } => -sk * theta1.cos() * theta2.cos(),
    }
}

/// Numerators of the norm-vector components, i.e. `sin E(k) · n(k)`.
pub fn scaled_norm(params: &ProtocolParams, k: f64) -> [f64; 3] {
    let (sk, ck) = k.sin_cos();
    match *params {
        ProtocolParams::Hqw { theta } => {
            let (st, ct) = theta.sin_cos();
            [sk * st, ck * st, -sk * ct]
        }
        ProtocolParams::Ncrqw { theta, phi } => {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            [-ck * sp * ct + sk * st * cp, ck * st * cp + sk * sp * ct, -sk * ct * cp + ck * st * sp]
        }
        ProtocolParams::Ssqw { theta1, theta2 } => {
            let (s1, c1) = theta1.sin_cos();
            let (s2, c2) = theta2.sin_cos();
            [sk * s1 * c2, ck * s1 * c2 + s2 * c1, -sk * c2 * c1]
        }
    }
}

/// `sin E(k)`, evaluated as the length of [`scaled_norm`]. The identity
/// `|sin E · n| = sin E` holds for all three protocols and stays accurate
/// close to gap closures where `sqrt(1 − cos²E)` cancels.
pub fn sin_quasi_energy(params: &ProtocolParams, k: f64) -> f64 {
    let [a, b, c] = scaled_norm(params, k);
    (a * a + b * b + c * c).sqrt()
}

/// Quasi-energy `E(k) ∈ [0, π]`; the two bands are `±E`.
pub fn dispersion(params: &ProtocolParams, k: f64) -> Result<f64> {
    let rhs = cos_quasi_energy(params, k);
    if rhs.abs() > 1.0 + 1e-12 {
        return Err(Error::Internal(format!("cos E = {rhs} out of range for {params} at k = {k}")));
    }
    Ok(rhs.clamp(-1.0, 1.0).acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormVector {
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub k: f64,
    /// Quasi-energy `E(k)` whose sine normalises the components.
    pub energy: f64,
}

impl NormVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.n1, self.n2, self.n3]
    }

    pub fn length(&self) -> f64 {
        (self.n1 * self.n1 + self.n2 * self.n2 + self.n3 * self.n3).sqrt()
    }
}

/// Unit vector `n(k)` of the decomposition `H = E(k) n(k)·σ`.
pub fn norm_vector(params: &ProtocolParams, k: f64) -> Result<NormVector> {
    let scaled = scaled_norm(params, k);
    let sin_e = (scaled[0] * scaled[0] + scaled[1] * scaled[1] + scaled[2] * scaled[2]).sqrt();
    if sin_e <= DIRAC_THRESHOLD {
        return Err(Error::SingularPoint { k, sin_e });
    }
    Ok(NormVector {
        n1: scaled[0] / sin_e,
        n2: scaled[1] / sin_e,
        n3: scaled[2] / sin_e,
        k,
        energy: dispersion(params, k)?,
    })
}

/// Smallest `sin E(k)` over the Brillouin zone, in closed form.
///
/// * HQW: `|sin θ|`
/// * NCRQW: `sqrt(a² + b²)` with `a = sin φ cos θ`, `b = cos φ sin θ`
/// * SSQW: `| |sin θ1 cos θ2| − |cos θ1 sin θ2| |`
pub fn min_gap(params: &ProtocolParams) -> f64 {
    match *params {
        ProtocolParams::Hqw { theta } => theta.sin().abs(),
        ProtocolParams::Ncrqw { theta, phi } => {
            let a = phi.sin() * theta.cos();
            let b = phi.cos() * theta.sin();
            a.hypot(b)
        }
        ProtocolParams::Ssqw { theta1, theta2 } => {
            ((theta1.sin() * theta2.cos()).abs() - (theta1.cos() * theta2.sin()).abs()).abs()
        }
    }
}

/// True when the quasi-energy gap closes somewhere in the Brillouin zone.
pub fn is_gapless(params: &ProtocolParams) -> bool {
    min_gap(params) <= DIRAC_THRESHOLD
}

/// Quasi-energies on a (parameter × k) grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionSurface {
    pub param_axis: Vec<f64>,
    pub k_axis: Vec<f64>,
    /// Row-major: `energies[i * k_axis.len() + j]` is `E(param_i, k_j)`.
    pub energies: Vec<f64>,
}

impl DispersionSurface {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.energies[i * self.k_axis.len() + j]
    }
}

/// Evaluates [`dispersion`] on every grid node. Rows are filled in parallel
/// into a preallocated buffer.
pub fn dispersion_surface<F>(family: F, param_axis: &[f64], k_axis: &[f64]) -> Result<DispersionSurface>
where
    F: Fn(f64) -> ProtocolParams + Sync,
{
    if param_axis.is_empty() || k_axis.len() < 2 {
        return Err(Error::InvalidArgument("dispersion surface needs at least 2 k points".into()));
    }
    let nk = k_axis.len();
    let mut energies = vec![0.0; param_axis.len() * nk];
    energies.par_chunks_mut(nk).zip(param_axis.par_iter()).try_for_each(|(row, &p)| -> Result<()> {
        let params = family(p);
        for (slot, &k) in row.iter_mut().zip(k_axis) {
            *slot = dispersion(&params, k)?;
        }
        Ok(())
    })?;
    Ok(DispersionSurface { param_axis: param_axis.to_vec(), k_axis: k_axis.to_vec(), energies })
}

/// Which edge of the quasi-energy zone the gap closes at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GapEdge {
    /// `E = 0` (`cos E = +1`).
    Zero,
    /// `|E| = π` (`cos E = −1`).
    Pi,
}

impl GapEdge {
    pub fn label(self) -> &'static str {
        match self {
            GapEdge::Zero => "E0",
            GapEdge::Pi => "Epi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiracPoint {
    pub k: f64,
    pub params: ProtocolParams,
    pub gap_at: GapEdge,
}

/// Samples per 2π of k in the pre-scan.
const SCAN_SAMPLES_PER_PERIOD: f64 = 1e4;
const BISECTION_WIDTH: f64 = 1e-10;
const MERGE_DISTANCE: f64 = 1e-8;

/// A bisection-refined extremum of `cos E(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandExtremum {
    pub k: f64,
    pub cos_e: f64,
    pub sin_e: f64,
}

fn bisect_slope(params: &ProtocolParams, mut lo: f64, mut hi: f64) -> f64 {
    let mut g_lo = cos_quasi_energy_slope(params, lo);
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        let g_mid = cos_quasi_energy_slope(params, mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Stationary points of `cos E(k)` inside `[lo, hi]`.
///
/// `1 − |cos E|` is non-negative and only touches zero at a gap closure, so
/// it never changes sign; its extrema are bracketed instead through the sign
/// changes of `d cos E / dk` on a uniform pre-scan, then refined by bisection.
/// The scan extends one sample beyond each end of the window so extrema that
/// sit exactly on the boundary are still bracketed. A band whose `cos E` is
/// flat in k yields a single extremum at `lo`.
pub fn band_extrema(params: &ProtocolParams, lo: f64, hi: f64) -> Vec<BandExtremum> {
    let width = hi - lo;
    let n = ((SCAN_SAMPLES_PER_PERIOD * width / (2.0 * PI)).ceil() as usize).max(16);
    let h = width / n as f64;
    let nodes: Vec<f64> = (0..=n + 2).map(|i| lo - h + h * i as f64).collect();
    let slopes: Vec<f64> = nodes.iter().map(|&k| cos_quasi_energy_slope(params, k)).collect();

    let make = |k: f64| BandExtremum { k, cos_e: cos_quasi_energy(params, k), sin_e: sin_quasi_energy(params, k) };

    if slopes.iter().all(|g| g.abs() <= 1e-14) {
        return vec![make(lo)];
    }

    let mut out = Vec::new();
    for i in 0..nodes.len() - 1 {
        let (ga, gb) = (slopes[i], slopes[i + 1]);
        let k = if ga == 0.0 {
            nodes[i]
        } else if ga * gb < 0.0 {
            bisect_slope(params, nodes[i], nodes[i + 1])
        } else {
            continue;
        };
        if k >= lo - BISECTION_WIDTH && k <= hi + BISECTION_WIDTH {
            out.push(make(k.clamp(lo, hi)));
        }
    }
    out
}

fn canonical_k(k: f64) -> f64 {
    crate::angles::principal(k)
}

/// Gap closures of `params` with `k` in `window`.
///
/// A point is reported when `1 − |cos E| < tolerance` or `sin E` falls to the
/// shared Dirac threshold. For windows spanning a full period the momenta are
/// reported in `(−π, π]` and duplicates modulo 2π are merged.
pub fn find_dirac_points(params: &ProtocolParams, window: (f64, f64), tolerance: f64) -> Result<Vec<DiracPoint>> {
    let (lo, hi) = window;
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!("empty k window [{lo}, {hi}]")));
    }
    let periodic = hi - lo >= 2.0 * PI - 1e-12;

    let mut points: Vec<DiracPoint> = Vec::new();
    for ext in band_extrema(params, lo, hi) {
        if 1.0 - ext.cos_e.abs() >= tolerance && ext.sin_e > DIRAC_THRESHOLD {
            continue;
        }
        let k = if periodic { canonical_k(ext.k) } else { ext.k };
        let gap_at = if ext.cos_e > 0.0 { GapEdge::Zero } else { GapEdge::Pi };
        let duplicate = points.iter().any(|p| {
            let d = if periodic { crate::angles::circular_distance(p.k, k) } else { (p.k - k).abs() };
            d < MERGE_DISTANCE && p.gap_at == gap_at
        });
        if !duplicate {
            points.push(DiracPoint { k, params: *params, gap_at });
        }
    }
    points.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(points)
}

/// Dirac points for every parameter set in `family`, concatenated in input
/// order.
pub fn dirac_sweep(family: &[ProtocolParams], window: (f64, f64), tolerance: f64) -> Result<Vec<DiracPoint>> {
    let per: Vec<Vec<DiracPoint>> =
        family.par_iter().map(|p| find_dirac_points(p, window, tolerance)).collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Number of distinct parameter sets among `points`.
pub fn distinct_parameter_sets(points: &[DiracPoint]) -> usize {
    let mut seen: Vec<ProtocolParams> = Vec::new();
    for p in points {
        if !seen.contains(&p.params) {
            seen.push(p.params);
        }
    }
    seen.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::linspace;
    use crate::coin::{eigenphases, momentum_step_unitary};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    #[test]
    fn hqw_examples() {
        let p = ProtocolParams::hqw(FRAC_PI_4);
        assert!((dispersion(&p, 0.0).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((dispersion(&p, FRAC_PI_2).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn ncrqw_and_ssqw_examples() {
        let e = dispersion(&ProtocolParams::ncrqw(FRAC_PI_4, FRAC_PI_4), FRAC_PI_2).unwrap();
        assert!((e - FRAC_PI_3).abs() < 1e-15);
        let u = momentum_step_unitary(&ProtocolParams::ncrqw(FRAC_PI_4, FRAC_PI_4), FRAC_PI_2);
        assert!((eigenphases(&u)[0] - FRAC_PI_3).abs() < 1e-12);

        let e = dispersion(&ProtocolParams::ssqw(FRAC_PI_4, FRAC_PI_4), 0.0).unwrap();
        assert!((e - FRAC_PI_2).abs() < 1e-15);
        let u = momentum_step_unitary(&ProtocolParams::ssqw(FRAC_PI_4, FRAC_PI_4), 0.0);
        assert!((eigenphases(&u)[0] - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn hqw_norm_at_quarter_momentum() {
        let n = norm_vector(&ProtocolParams::hqw(FRAC_PI_4), FRAC_PI_2).unwrap();
        assert!((n.n1 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(n.n2.abs() < 1e-15);
        assert!((n.n3 + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn reductions_to_hqw_norm() {
        for &t in &[-2.5, -0.7, 0.4, 1.1, 2.9] {
            for k in linspace(-PI, PI, 37) {
                let h = ProtocolParams::hqw(t);
                if sin_quasi_energy(&h, k) <= 1e-6 {
                    continue;
                }
                let nh = norm_vector(&h, k).unwrap();
                let nn = norm_vector(&ProtocolParams::ncrqw(t, 0.0), k).unwrap();
                let ns = norm_vector(&ProtocolParams::ssqw(t, 0.0), k).unwrap();
                for (a, b) in nh.as_array().iter().zip(nn.as_array()) {
                    assert!((a - b).abs() < 1e-12);
                }
                for (a, b) in nh.as_array().iter().zip(ns.as_array()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn norm_singular_at_gap_closure() {
        let err = norm_vector(&ProtocolParams::hqw(0.0), 0.0).unwrap_err();
        assert!(matches!(err, Error::SingularPoint { .. }));
    }

    #[test]
    fn sin_e_matches_direct_route() {
        for &p in &[ProtocolParams::hqw(0.9), ProtocolParams::ncrqw(0.4, -1.3), ProtocolParams::ssqw(2.1, 0.6)] {
            for k in linspace(-PI, PI, 61) {
                let e = dispersion(&p, k).unwrap();
                assert!((sin_quasi_energy(&p, k) - e.sin()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_surface_at_half_turn() {
        let ks = linspace(-PI, PI, 33);
        let s = dispersion_surface(ProtocolParams::hqw, &[FRAC_PI_2], &ks).unwrap();
        assert!(s.energies.iter().all(|e| (e - FRAC_PI_2).abs() < 1e-15));
    }

    #[test]
    fn hqw_surface_row_shape() {
        let ks = linspace(-PI, PI, 721);
        let s = dispersion_surface(ProtocolParams::hqw, &[FRAC_PI_4], &ks).unwrap();
        let row = &s.energies;
        let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((s.get(0, 360) - FRAC_PI_4).abs() < 1e-15);
        assert!((min - FRAC_PI_4).abs() < 1e-12);
        assert!((s.get(0, 540) - FRAC_PI_2).abs() < 1e-12);
        assert!((max - 3.0 * FRAC_PI_4).abs() < 1e-12);
        assert!(row.iter().all(|e| !e.is_nan()));
    }

    #[test]
    fn ncrqw_surface_value() {
        let ks = [0.0, FRAC_PI_2];
        let s = dispersion_surface(|t| ProtocolParams::ncrqw(t, FRAC_PI_4), &[FRAC_PI_4], &ks).unwrap();
        assert!((s.get(0, 1) - FRAC_PI_3).abs() < 1e-15);
    }

    #[test]
    fn surface_rejects_tiny_grid() {
        assert!(dispersion_surface(ProtocolParams::hqw, &[0.1], &[0.0]).is_err());
    }

    #[test]
    fn gapped_hadamard_has_no_dirac_points() {
        let pts = find_dirac_points(&ProtocolParams::hqw(FRAC_PI_4), (-PI, PI), 1e-10).unwrap();
        assert!(pts.is_empty());
        // Brute-force scan: max |cos E| stays at cos(π/4).
        let m = linspace(-PI, PI, 100_001)
            .into_iter()
            .map(|k| cos_quasi_energy(&ProtocolParams::hqw(FRAC_PI_4), k).abs())
            .fold(0.0, f64::max);
        assert!((m - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn trivial_coin_closes_at_both_edges() {
        let pts = find_dirac_points(&ProtocolParams::hqw(0.0), (-PI, PI), 1e-10).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts[0].k.abs() < 1e-10 && pts[0].gap_at == GapEdge::Zero);
        assert!((pts[1].k - PI).abs() < 1e-10 && pts[1].gap_at == GapEdge::Pi);
        for p in &pts {
            let c = cos_quasi_energy(&p.params, p.k);
            let target = if p.gap_at == GapEdge::Zero { 1.0 } else { -1.0 };
            assert!((c - target).abs() < 1e-10);
        }
    }

    #[test]
    fn invalid_tolerance_rejected() {
        assert!(find_dirac_points(&ProtocolParams::hqw(0.0), (-PI, PI), 0.0).is_err());
    }

    #[test]
    fn min_gap_matches_scan() {
        for &p in &[
            ProtocolParams::hqw(0.3),
            ProtocolParams::ncrqw(0.4, -1.3),
            ProtocolParams::ncrqw(2.2, 0.9),
            ProtocolParams::ssqw(2.1, 0.6),
            ProtocolParams::ssqw(-0.5, 1.2),
        ] {
            let scan =
                linspace(-PI, PI, 200_001).into_iter().map(|k| sin_quasi_energy(&p, k)).fold(f64::INFINITY, f64::min);
            assert!((scan - min_gap(&p)).abs() < 1e-8, "{p}");
        }
    }

    proptest! {
        #[test]
        fn unit_norm_away_from_closures(t in -PI..PI, q in -PI..PI, k in -PI..PI, which in 0..3usize) {
            let p = [ProtocolParams::hqw(t), ProtocolParams::ncrqw(t, q), ProtocolParams::ssqw(t, q)][which];
            prop_assume!(sin_quasi_energy(&p, k) > 1e-9);
            let n = norm_vector(&p, k).unwrap();
            prop_assert!((n.length() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn closed_form_matches_eigenphases(t in -PI..PI, q in -PI..PI, k in -PI..PI, which in 0..3usize) {
            let p = [ProtocolParams::hqw(t), ProtocolParams::ncrqw(t, q), ProtocolParams::ssqw(t, q)][which];
            let e = dispersion(&p, k).unwrap();
            let [up, down] = eigenphases(&momentum_step_unitary(&p, k));
            prop_assert!((up - e).abs() < 1e-10);
            prop_assert!((down + e).abs() < 1e-10);
        }

        #[test]
        fn hadamard_is_even(t in -PI..PI, k in -PI..PI) {
            let p = ProtocolParams::hqw(t);
            prop_assert!((dispersion(&p, k).unwrap() - dispersion(&p, -k).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn reductions_hold(t in -PI..PI, k in -PI..PI) {
            let h = dispersion(&ProtocolParams::hqw(t), k).unwrap();
            prop_assert!((dispersion(&ProtocolParams::ncrqw(t, 0.0), k).unwrap() - h).abs() < 1e-12);
            prop_assert!((dispersion(&ProtocolParams::ssqw(t, 0.0), k).unwrap() - h).abs() < 1e-12);
        }

        #[test]
        fn lipschitz_away_from_edges(t in -PI..PI, q in -PI..PI, k in -3.0..3.0f64, which in 0..3usize) {
            let p = [ProtocolParams::hqw(t), ProtocolParams::ncrqw(t, q), ProtocolParams::ssqw(t, q)][which];
            let d = 1e-6;
            prop_assume!(sin_quasi_energy(&p, k) > 1e-3 && sin_quasi_energy(&p, k + d) > 1e-3);
            let diff = (dispersion(&p, k + d).unwrap() - dispersion(&p, k).unwrap()).abs();
            prop_assert!(diff <= 2.0 * d);
        }
    }
}
