//! 2D Zak vectors, Zak landscapes over parameter grids and the plaquette
//! check that the Berry curvature of separable walks vanishes.
//!
//! The 2D evolution is `U_x ⊗ U_y`, so its Bloch eigenvectors are products
//! `u(kx) ⊗ u(ky)` and the two components of the Zak vector are independent
//! 1D Zak phases.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bands::is_gapless;
use crate::bloch::{bloch_eigenvectors_with, Spinor};
use crate::protocol::{Protocol, ProtocolParams};
use crate::zak::{zak_wilson_loop, WilsonOptions, HALF_ZONE};
use crate::{Error, Result};

/// `(Zx, Zy)` in `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZakVector {
    pub zx: f64,
    pub zy: f64,
}

/// Zak vector of the separable walk `U_x(params_x) ⊗ U_y(params_y)` on the
/// half-zone Wilson loop.
///
/// With `flip_y` the y-walk runs with the sign-flipped Bloch argument, which
/// conjugates its eigenvectors and negates its Zak phase. When the two axes
/// share parameters and no flip is requested the x result is reused, so
/// `Zy = Zx` holds exactly.
pub fn zak_vector_2d(
    params_x: &ProtocolParams,
    params_y: &ProtocolParams,
    flip_y: bool,
    options: WilsonOptions,
) -> Result<ZakVector> {
    let x_opts = WilsonOptions { flip_argument: false, ..options };
    let zx = zak_wilson_loop(params_x, HALF_ZONE, x_opts)?.z_total.ok_or_else(undefined)?;
    if params_x == params_y && !flip_y {
        return Ok(ZakVector { zx, zy: zx });
    }
    let y_opts = WilsonOptions { flip_argument: flip_y, ..options };
    let zy = zak_wilson_loop(params_y, HALF_ZONE, y_opts)?.z_total.ok_or_else(undefined)?;
    Ok(ZakVector { zx, zy })
}

fn undefined() -> Error {
    Error::Internal("Wilson loop returned no total phase".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Regular,
    /// The gap closes somewhere in the Brillouin zone; the Zak phase is not
    /// defined.
    Gapless,
    /// The Wilson loop failed (no convergence); reported as undefined.
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandscapeCell {
    pub params: ProtocolParams,
    pub zx: Option<f64>,
    pub zy: Option<f64>,
    pub status: CellStatus,
}

impl LandscapeCell {
    pub fn is_singular(&self) -> bool {
        self.status != CellStatus::Regular
    }
}

/// Zak vectors on a parameter grid. HQW has a single parameter, so its
/// landscape is a curve and `param2_axis` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZakLandscape {
    pub protocol: Protocol,
    pub param1_axis: Vec<f64>,
    pub param2_axis: Option<Vec<f64>>,
    pub flip_y: bool,
    /// Row-major over `(param1, param2)`.
    pub cells: Vec<LandscapeCell>,
}

impl ZakLandscape {
    pub fn rows(&self) -> usize {
        self.param1_axis.len()
    }

    pub fn cols(&self) -> usize {
        self.param2_axis.as_ref().map_or(1, Vec::len)
    }

    pub fn cell(&self, i: usize, j: usize) -> &LandscapeCell {
        &self.cells[i * self.cols() + j]
    }

    pub fn zx_grid(&self) -> Vec<Vec<Option<f64>>> {
        self.cells.chunks(self.cols()).map(|r| r.iter().map(|c| c.zx).collect()).collect()
    }

    pub fn zy_grid(&self) -> Vec<Vec<Option<f64>>> {
        self.cells.chunks(self.cols()).map(|r| r.iter().map(|c| c.zy).collect()).collect()
    }

    pub fn singular_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_singular()).count()
    }
}

fn check_axis(axis: &[f64], name: &str) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::InvalidArgument(format!("{name} axis needs at least 2 points")));
    }
    if axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(format!("{name} axis must be finite and sorted")));
    }
    Ok(())
}

/// Evaluates [`zak_vector_2d`] with identical x and y parameters on every
/// grid cell, in parallel. Gapless cells and cells whose loop fails are
/// marked undefined rather than aborting the sweep.
pub fn zak_landscape(
    protocol: Protocol,
    param1_axis: &[f64],
    param2_axis: Option<&[f64]>,
    flip_y: bool,
    options: WilsonOptions,
) -> Result<ZakLandscape> {
    check_axis(param1_axis, "param1")?;
    match (protocol, param2_axis) {
        (Protocol::Hqw, Some(_)) => {
            return Err(Error::InvalidArgument("hqw has a single parameter; param2 axis not allowed".into()))
        }
        (Protocol::Ncrqw | Protocol::Ssqw, None) => {
            return Err(Error::InvalidArgument(format!("{protocol} needs a param2 axis")))
        }
        (_, Some(axis)) => check_axis(axis, "param2")?,
        _ => {}
    }
    let second: Vec<f64> = param2_axis.map_or_else(|| vec![0.0], <[f64]>::to_vec);
    let grid: Vec<ProtocolParams> = param1_axis
        .iter()
        .flat_map(|&p1| second.iter().map(move |&p2| ProtocolParams::from_pair(protocol, p1, p2)))
        .collect();

    let cells = grid
        .par_iter()
        .map(|params| {
            if is_gapless(params) {
                return LandscapeCell { params: *params, zx: None, zy: None, status: CellStatus::Gapless };
            }
            match zak_vector_2d(params, params, flip_y, options) {
                Ok(z) => LandscapeCell { params: *params, zx: Some(z.zx), zy: Some(z.zy), status: CellStatus::Regular },
                Err(_) => LandscapeCell { params: *params, zx: None, zy: None, status: CellStatus::Failed },
            }
        })
        .collect();

    Ok(ZakLandscape {
        protocol,
        param1_axis: param1_axis.to_vec(),
        param2_axis: param2_axis.map(<[f64]>::to_vec),
        flip_y,
        cells,
    })
}

/// Four-component product state `a ⊗ b`.
pub fn kron(a: &Spinor, b: &Spinor) -> [C64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

fn inner4(a: &[C64; 4], b: &[C64; 4]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Discrete field strength `arg ⟨1|2⟩⟨2|3⟩⟨3|4⟩⟨4|1⟩` of a plaquette whose
/// corners are listed counter-clockwise.
pub fn plaquette_flux(corners: &[[C64; 4]; 4]) -> f64 {
    let mut prod = C64::new(1.0, 0.0);
    for i in 0..4 {
        prod *= inner4(&corners[i], &corners[(i + 1) % 4]);
    }
    prod.arg()
}

fn band_vectors(params: &ProtocolParams, ks: &[f64], flip: bool) -> Result<Vec<[Spinor; 2]>> {
    ks.iter()
        .map(|&k| {
            bloch_eigenvectors_with(params, k, flip).map(|e| [e.plus, e.minus]).map_err(|_| Error::SingularPath { k })
        })
        .collect()
}

/// Largest `|F|` over all plaquettes of the `(kx, ky)` grid and all four
/// band combinations, built from explicit product eigenvectors.
#[allow(clippy::needless_range_loop)]
pub fn berry_curvature_check(
    params_x: &ProtocolParams,
    params_y: &ProtocolParams,
    kx_grid: &[f64],
    ky_grid: &[f64],
    flip_y: bool,
) -> Result<f64> {
    if kx_grid.len() < 2 || ky_grid.len() < 2 {
        return Err(Error::InvalidArgument("curvature grid needs at least 2 points per axis".into()));
    }
    let ux = band_vectors(params_x, kx_grid, false)?;
    let uy = band_vectors(params_y, ky_grid, flip_y)?;
    let max = (0..kx_grid.len() - 1)
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in 0..ky_grid.len() - 1 {
                for bx in 0..2 {
                    for by in 0..2 {
                        let corners = [
                            kron(&ux[i][bx], &uy[j][by]),
                            kron(&ux[i + 1][bx], &uy[j][by]),
                            kron(&ux[i + 1][bx], &uy[j + 1][by]),
                            kron(&ux[i][bx], &uy[j + 1][by]),
                        ];
                        worst = worst.max(plaquette_flux(&corners).abs());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{circular_distance, linspace};
    use crate::bands::find_dirac_points;
    use crate::zak::FULL_ZONE;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn opts() -> WilsonOptions {
        WilsonOptions::default()
    }

    #[test]
    fn identical_params_give_equal_components() {
        let p = ProtocolParams::ncrqw(0.7, -1.9);
        let z = zak_vector_2d(&p, &p, false, opts()).unwrap();
        assert_eq!(z.zx, z.zy);
    }

    #[test]
    fn flip_negates_y() {
        for p in [ProtocolParams::ncrqw(0.7, -1.9), ProtocolParams::ssqw(1.1, 0.3), ProtocolParams::hqw(2.0)] {
            let z = zak_vector_2d(&p, &p, true, opts()).unwrap();
            assert!(circular_distance(z.zy, -z.zx) < 1e-8, "{p}");
        }
    }

    #[test]
    fn planar_ncrqw_gives_pi_pi() {
        let p = ProtocolParams::ncrqw(FRAC_PI_2, 0.0);
        let z = zak_vector_2d(&p, &p, false, opts()).unwrap();
        assert!(circular_distance(z.zx, PI) < 1e-6 && circular_distance(z.zy, PI) < 1e-6);
    }

    #[test]
    fn hqw_landscape_is_a_curve() {
        let axis = linspace(-PI, PI, 41);
        let l = zak_landscape(Protocol::Hqw, &axis, None, true, opts()).unwrap();
        assert_eq!(l.cols(), 1);
        assert_eq!(l.cells.len(), 41);
        // θ ∈ {−π, 0, π} close the gap.
        assert_eq!(l.singular_count(), 3);
        for c in l.cells.iter().filter(|c| !c.is_singular()) {
            assert!(circular_distance(c.zy.unwrap(), -c.zx.unwrap()) < 1e-8);
        }
    }

    #[test]
    fn undefined_cells_match_dirac_search() {
        let axis = linspace(-PI, PI, 21);
        let l = zak_landscape(Protocol::Ncrqw, &axis, Some(&axis), false, opts()).unwrap();
        for c in &l.cells {
            let found = !find_dirac_points(&c.params, FULL_ZONE, 1e-12).unwrap().is_empty();
            assert_eq!(c.status == CellStatus::Gapless, found, "{}", c.params);
            assert_ne!(c.status, CellStatus::Failed);
        }
    }

    #[test]
    fn axis_validation() {
        let a = [0.1, 0.2];
        assert!(zak_landscape(Protocol::Hqw, &a, Some(&a), false, opts()).is_err());
        assert!(zak_landscape(Protocol::Ssqw, &a, None, false, opts()).is_err());
        assert!(zak_landscape(Protocol::Ssqw, &[0.1], Some(&a), false, opts()).is_err());
        assert!(zak_landscape(Protocol::Ssqw, &[0.2, 0.1], Some(&a), false, opts()).is_err());
    }

    #[test]
    fn identical_corners_have_zero_flux() {
        let v = kron(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)], &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert_eq!(plaquette_flux(&[v, v, v, v]), 0.0);
    }

    #[test]
    fn curvature_vanishes_for_separable_walks() {
        let ks = linspace(-PI, PI, 33);
        let px = ProtocolParams::ncrqw(FRAC_PI_4, 0.4);
        let py = ProtocolParams::ssqw(1.2, 0.2);
        for flip in [false, true] {
            assert!(berry_curvature_check(&px, &py, &ks, &ks, flip).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn curvature_rejects_singular_grid() {
        let ks = linspace(-PI, PI, 9);
        let err = berry_curvature_check(&ProtocolParams::hqw(0.0), &ProtocolParams::hqw(0.5), &ks, &ks, false);
        assert!(matches!(err, Err(Error::SingularPath { .. })));
    }
}
