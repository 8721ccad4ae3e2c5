//! Time-reversal breaking between the x and y walks: the `θ1 → −θ1` flip of
//! the split-step walk, the allowed-region inequality
//! `tan θ2 / tan θ1 > cos k`, and the abstract argument negation used for
//! flipped landscapes of every protocol.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::angles::principal;
use crate::bands::scaled_norm;
use crate::bloch::bloch_argument;
use crate::protocol::ProtocolParams;
use crate::{Error, Result};

/// Width of the band around the inequality boundary that counts as equality.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// SSQW parameters with `θ1` negated and `θ2` kept.
pub fn flip_theta1(params: &ProtocolParams) -> Result<ProtocolParams> {
    match *params {
        ProtocolParams::Ssqw { theta1, theta2 } => Ok(ProtocolParams::Ssqw { theta1: -theta1, theta2 }),
        ProtocolParams::Hqw { .. } => Err(Error::WrongVariant("hqw")),
        ProtocolParams::Ncrqw { .. } => Err(Error::WrongVariant("ncrqw")),
    }
}

fn tan_theta1(theta1: f64) -> Result<f64> {
    let t = theta1.tan();
    if !t.is_finite() || t.abs() < BOUNDARY_TOLERANCE {
        return Err(Error::DegenerateTheta1(theta1));
    }
    Ok(t)
}

fn strictly_greater(lhs: f64, rhs: f64) -> bool {
    lhs > rhs && (lhs - rhs).abs() > BOUNDARY_TOLERANCE
}

/// `tan θ2 / tan θ1 > cos k`, strict; points within
/// [`BOUNDARY_TOLERANCE`] of equality are not allowed.
pub fn trs_allowed(theta1: f64, theta2: f64, k: f64) -> Result<bool> {
    let ratio = theta2.tan() / tan_theta1(theta1)?;
    Ok(strictly_greater(ratio, k.cos()))
}

/// Whether `n2` keeps its sign under `θ1 → −θ1`.
///
/// `n2(θ1) · n2(−θ1) ∝ sin²θ2 cos²θ1 − cos²k sin²θ1 cos²θ2`, so the sign is
/// kept exactly when `tan²θ2 / tan²θ1 > cos²k`. This is stricter than
/// [`trs_allowed`]: for `θ2/θ1` ratios below 1 and `cos k` close to −1 a
/// cell can be allowed while `n2` still changes sign.
pub fn n2_sign_preserved(theta1: f64, theta2: f64, k: f64) -> Result<bool> {
    let ratio = theta2.tan() / tan_theta1(theta1)?;
    let c = k.cos();
    Ok(strictly_greater(ratio * ratio, c * c))
}

/// `arctan(n2 / n1)`, the Bloch argument read as a ratio, in `[−π/2, π/2]`.
/// Unlike `atan2` its sign flips whenever `n1` alone changes sign.
pub fn bloch_ratio_argument(params: &ProtocolParams, k: f64) -> Result<f64> {
    let [n1, n2, n3] = scaled_norm(params, k);
    let len = (n1 * n1 + n2 * n2 + n3 * n3).sqrt();
    if len == 0.0 || n1.abs() / len <= 1e-12 {
        return Err(Error::UndefinedArgument { k });
    }
    Ok((n2 / n1).atan())
}

/// `sign φ_x = −sign φ_y` at `k`, with the y walk using flipped `θ1`.
pub fn argument_sign_flips(params: &ProtocolParams, k: f64) -> Result<bool> {
    let flipped = flip_theta1(params)?;
    let px = bloch_ratio_argument(params, k)?;
    let py = bloch_ratio_argument(&flipped, k)?;
    Ok(px.signum() == -py.signum())
}

/// Negated Bloch argument, reduced to `(−π, π]`. Applying it twice returns
/// the original argument.
pub fn negate_argument(phi: f64) -> f64 {
    if phi > -PI && phi < PI {
        -phi
    } else {
        principal(-phi)
    }
}

/// `−φ(k)` for the walk with the sign-flipped Bloch argument.
pub fn flipped_argument_walk(params: &ProtocolParams, k: f64) -> Result<f64> {
    Ok(negate_argument(bloch_argument(params, k)?))
}

/// Allowed cells of the inequality at fixed `θ1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrsRegionMask {
    pub theta1: f64,
    pub theta2_axis: Vec<f64>,
    pub k_axis: Vec<f64>,
    /// `allowed[i][j]` for `(θ2_i, k_j)`.
    pub allowed: Vec<Vec<bool>>,
}

impl TrsRegionMask {
    /// Fraction of allowed cells in row `i`.
    pub fn row_fraction(&self, i: usize) -> f64 {
        let row = &self.allowed[i];
        row.iter().filter(|&&a| a).count() as f64 / row.len() as f64
    }

    pub fn allowed_count(&self) -> usize {
        self.allowed.iter().flatten().filter(|&&a| a).count()
    }
}

/// Evaluates [`trs_allowed`] on the `(θ2, k)` grid; rows run in parallel.
pub fn trs_region_mask(theta1: f64, theta2_axis: &[f64], k_axis: &[f64]) -> Result<TrsRegionMask> {
    tan_theta1(theta1)?;
    if theta2_axis.len() < 2 || k_axis.len() < 2 {
        return Err(Error::InvalidArgument("region mask needs at least 2 points per axis".into()));
    }
    let allowed = theta2_axis
        .par_iter()
        .map(|&t2| k_axis.iter().map(|&k| trs_allowed(theta1, t2, k)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(TrsRegionMask { theta1, theta2_axis: theta2_axis.to_vec(), k_axis: k_axis.to_vec(), allowed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{circular_distance, linspace};
    use crate::zak::{zak_wilson_loop, WilsonOptions, HALF_ZONE};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn flip_examples() {
        let p = ProtocolParams::ssqw(FRAC_PI_8, FRAC_PI_4);
        assert_eq!(flip_theta1(&p).unwrap(), ProtocolParams::ssqw(-FRAC_PI_8, FRAC_PI_4));
        assert_eq!(flip_theta1(&flip_theta1(&p).unwrap()).unwrap(), p);
        assert_eq!(flip_theta1(&ProtocolParams::hqw(0.3)), Err(Error::WrongVariant("hqw")));
        assert!(flip_theta1(&ProtocolParams::ncrqw(0.3, 0.1)).is_err());
    }

    #[test]
    fn flip_negates_n1() {
        let p = ProtocolParams::ssqw(0.7, 0.4);
        let q = flip_theta1(&p).unwrap();
        for k in linspace(-PI, PI, 101) {
            assert!((scaled_norm(&p, k)[0] + scaled_norm(&q, k)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn allowed_examples() {
        assert!(trs_allowed(FRAC_PI_4, FRAC_PI_4, FRAC_PI_2).unwrap());
        assert!(!trs_allowed(FRAC_PI_4, 0.0, 0.0).unwrap());
        assert!(trs_allowed(FRAC_PI_8, FRAC_PI_4, 0.0).unwrap());
        // Equality: tan(π/4)/tan(π/4) = 1 = cos 0.
        assert!(!trs_allowed(FRAC_PI_4, FRAC_PI_4, 0.0).unwrap());
        for t in [0.0, PI, -PI] {
            assert!(matches!(trs_allowed(t, 0.3, 0.1), Err(Error::DegenerateTheta1(_))));
        }
    }

    #[test]
    fn allowed_cell_where_n2_still_changes_sign() {
        let (t1, t2, k) = (FRAC_PI_4, FRAC_PI_8, (-0.9f64).acos());
        assert!(trs_allowed(t1, t2, k).unwrap());
        assert!(!n2_sign_preserved(t1, t2, k).unwrap());
        let p = ProtocolParams::ssqw(t1, t2);
        let q = flip_theta1(&p).unwrap();
        assert!(scaled_norm(&p, k)[1] * scaled_norm(&q, k)[1] < 0.0);
        assert!(!argument_sign_flips(&p, k).unwrap());
    }

    #[test]
    fn quarter_column_is_sign_of_ratio() {
        let mask = trs_region_mask(FRAC_PI_8, &linspace(-PI, PI, 41), &[0.0, FRAC_PI_2]).unwrap();
        for (i, &t2) in mask.theta2_axis.iter().enumerate() {
            assert_eq!(mask.allowed[i][1], t2.tan() / FRAC_PI_8.tan() > 1e-12, "{t2}");
        }
    }

    #[test]
    fn allowed_band_grows_away_from_zero() {
        for t1 in [FRAC_PI_8, FRAC_PI_4] {
            let t2 = linspace(0.0, FRAC_PI_2 - 1e-3, 60);
            let mask = trs_region_mask(t1, &t2, &linspace(-PI, PI, 201)).unwrap();
            for i in 1..t2.len() {
                assert!(mask.row_fraction(i) >= mask.row_fraction(i - 1));
            }
            assert!(mask.row_fraction(0) < 0.6 && mask.row_fraction(t2.len() - 1) == 1.0);
        }
    }

    #[test]
    fn mask_rejects_degenerate_theta1() {
        let axis = linspace(-1.0, 1.0, 5);
        assert!(matches!(trs_region_mask(0.0, &axis, &axis), Err(Error::DegenerateTheta1(_))));
    }

    #[test]
    fn argument_negation() {
        assert_eq!(negate_argument(0.0), 0.0);
        assert_eq!(negate_argument(FRAC_PI_3), -FRAC_PI_3);
        assert_eq!(negate_argument(PI), PI);
        let p = ProtocolParams::hqw(FRAC_PI_4);
        let phi = bloch_argument(&p, FRAC_PI_4).unwrap();
        assert!((phi - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(flipped_argument_walk(&p, FRAC_PI_4).unwrap(), -phi);
    }

    #[test]
    fn flipped_eigenvectors_negate_zak() {
        let pts = [(0.3, 1.2), (-2.0, 0.7), (2.8, -2.9), (1.0, 0.2), (-0.5, -1.3)];
        for &(a, b) in &pts {
            for p in [ProtocolParams::ncrqw(a, b), ProtocolParams::ssqw(a, b)] {
                let plain = zak_wilson_loop(&p, HALF_ZONE, WilsonOptions::default()).unwrap();
                let flipped =
                    zak_wilson_loop(&p, HALF_ZONE, WilsonOptions { flip_argument: true, ..Default::default() })
                        .unwrap();
                assert!(circular_distance(plain.z_total.unwrap(), -flipped.z_total.unwrap()) < 1e-8);
            }
        }
    }

    proptest! {
        #[test]
        fn odd_in_both_angles(t1 in -3.0f64..3.0, t2 in -PI..PI, k in -PI..PI) {
            prop_assume!(t1.tan().abs() > 1e-6);
            prop_assert_eq!(trs_allowed(t1, t2, k).unwrap(), trs_allowed(-t1, -t2, k).unwrap());
        }

        #[test]
        fn argument_flip_follows_exact_region(t1 in -3.0f64..3.0, t2 in -PI..PI, k in -PI..PI) {
            prop_assume!(t1.tan().abs() > 1e-3);
            let p = ProtocolParams::ssqw(t1, t2);
            prop_assume!(crate::bands::sin_quasi_energy(&p, k) > 1e-6);
            let n = scaled_norm(&p, k);
            prop_assume!(n[0].abs() > 1e-6 && n[1].abs() > 1e-6);
            let q = flip_theta1(&p).unwrap();
            prop_assume!(scaled_norm(&q, k)[1].abs() > 1e-6);
            prop_assert_eq!(argument_sign_flips(&p, k).unwrap(), n2_sign_preserved(t1, t2, k).unwrap());
        }

        #[test]
        fn negation_is_involution(phi in -PI..PI) {
            prop_assert!(circular_distance(negate_argument(negate_argument(phi)), phi) < 1e-15);
        }
    }
}
