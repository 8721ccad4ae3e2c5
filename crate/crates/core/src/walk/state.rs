//! Walk states on a dense lattice box centred on the origin.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::coin::CoinState;
use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

/// 1D walk state: coin amplitudes `(aH, aV)` at sites `−radius ..= radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineState {
    pub(crate) radius: i64,
    pub(crate) amps: Vec<[C64; 2]>,
    pub(crate) steps: usize,
}

impl LineState {
    /// Walker localised at `x = 0` with coin state `coin`.
    pub fn localized(coin: CoinState) -> Self {
        Self { radius: 0, amps: vec![coin.as_array()], steps: 0 }
    }

    /// State from explicit `(x, aH, aV)` amplitudes, normalised on input.
    pub fn from_sites(sites: &[(i64, CoinState)]) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("walk state needs at least one site".into()));
        }
        let radius = sites.iter().map(|(x, _)| x.abs()).max().unwrap_or(0);
        let mut s = Self { radius, amps: vec![[ZERO; 2]; (2 * radius + 1) as usize], steps: 0 };
        for (x, c) in sites {
            let slot = &mut s.amps[(x + radius) as usize];
            slot[0] += c.h;
            slot[1] += c.v;
        }
        let norm = s.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("walk state has zero norm".into()));
        }
        for a in &mut s.amps {
            a[0] /= norm;
            a[1] /= norm;
        }
        Ok(s)
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Amplitudes at `x`, zero outside the stored box.
    pub fn amplitude(&self, x: i64) -> [C64; 2] {
        if x.abs() > self.radius {
            [ZERO; 2]
        } else {
            self.amps[(x + self.radius) as usize]
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        -self.radius..=self.radius
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a[0].norm_sqr() + a[1].norm_sqr()).sum()
    }

    /// `(x, P_H, P_V)` for every stored site.
    pub fn distribution(&self) -> Vec<(i64, f64, f64)> {
        self.sites().zip(&self.amps).map(|(x, a)| (x, a[0].norm_sqr(), a[1].norm_sqr())).collect()
    }

    /// Total probability at `x`.
    pub fn probability(&self, x: i64) -> f64 {
        let a = self.amplitude(x);
        a[0].norm_sqr() + a[1].norm_sqr()
    }

    /// Standard deviation of the position distribution.
    pub fn position_spread(&self) -> f64 {
        let (mut m1, mut m2) = (0.0, 0.0);
        for (x, h, v) in self.distribution() {
            let p = h + v;
            m1 += p * x as f64;
            m2 += p * (x * x) as f64;
        }
        (m2 - m1 * m1).max(0.0).sqrt()
    }

    /// Re-centres the amplitudes into a box of radius `radius ≥ self.radius`.
    pub(crate) fn padded(&self, radius: i64) -> Vec<[C64; 2]> {
        let mut out = vec![[ZERO; 2]; (2 * radius + 1) as usize];
        let off = (radius - self.radius) as usize;
        out[off..off + self.amps.len()].copy_from_slice(&self.amps);
        out
    }
}

/// 2D state of the separable walk with one coin per axis.
///
/// Coin components are ordered `(x-coin, y-coin)`: index `2 cx + cy` with
/// `H = 0`, `V = 1`. Product initial states stay factorised; anything else
/// is held as a dense 4-component grid.
#[derive(Debug, Clone, PartialEq)]
pub enum PlaneState {
    Product { x: LineState, y: LineState },
    Dense(DenseGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrid {
    pub(crate) radius_x: i64,
    pub(crate) radius_y: i64,
    /// Row-major over `(x, y)`.
    pub(crate) amps: Vec<[C64; 4]>,
    pub(crate) steps: usize,
}

impl DenseGrid {
    pub(crate) fn width_y(&self) -> usize {
        (2 * self.radius_y + 1) as usize
    }

    pub(crate) fn index(&self, x: i64, y: i64) -> usize {
        (x + self.radius_x) as usize * self.width_y() + (y + self.radius_y) as usize
    }
}

/// Per-site probabilities of a walk; `y` is `None` in 1D. In 2D, `p_h` and
/// `p_v` resolve the y-walk coin and sum over the x-walk coin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiteProbability {
    pub x: i64,
    pub y: Option<i64>,
    pub p_h: f64,
    pub p_v: f64,
}

impl SiteProbability {
    pub fn total(&self) -> f64 {
        self.p_h + self.p_v
    }
}

impl PlaneState {
    /// Walker at `(0, 0)` with coin `coin_x ⊗ coin_y`.
    pub fn localized(coin_x: CoinState, coin_y: CoinState) -> Self {
        PlaneState::Product { x: LineState::localized(coin_x), y: LineState::localized(coin_y) }
    }

    /// Dense state from `(x, y, [a_HH, a_HV, a_VH, a_VV])` amplitudes,
    /// normalised on input.
    pub fn from_sites(sites: &[(i64, i64, [C64; 4])]) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("walk state needs at least one site".into()));
        }
        let radius_x = sites.iter().map(|s| s.0.abs()).max().unwrap_or(0);
        let radius_y = sites.iter().map(|s| s.1.abs()).max().unwrap_or(0);
        let n = ((2 * radius_x + 1) * (2 * radius_y + 1)) as usize;
        let mut g = DenseGrid { radius_x, radius_y, amps: vec![[ZERO; 4]; n], steps: 0 };
        for &(x, y, a) in sites {
            let i = g.index(x, y);
            for (dst, src) in g.amps[i].iter_mut().zip(a) {
                *dst += src;
            }
        }
        let norm: f64 = g.amps.iter().flatten().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("walk state has zero norm".into()));
        }
        g.amps.iter_mut().flatten().for_each(|a| *a /= norm);
        Ok(PlaneState::Dense(g))
    }

    pub fn steps(&self) -> usize {
        match self {
            PlaneState::Product { x, .. } => x.steps,
            PlaneState::Dense(g) => g.steps,
        }
    }

    /// Half-widths of the stored box along x and y.
    pub fn radii(&self) -> (i64, i64) {
        match self {
            PlaneState::Product { x, y } => (x.radius, y.radius),
            PlaneState::Dense(g) => (g.radius_x, g.radius_y),
        }
    }

    /// Amplitudes `[a_HH, a_HV, a_VH, a_VV]` at `(x, y)`.
    pub fn amplitude(&self, x: i64, y: i64) -> [C64; 4] {
        match self {
            PlaneState::Product { x: lx, y: ly } => {
                let (a, b) = (lx.amplitude(x), ly.amplitude(y));
                [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
            }
            PlaneState::Dense(g) => {
                if x.abs() > g.radius_x || y.abs() > g.radius_y {
                    [ZERO; 4]
                } else {
                    g.amps[g.index(x, y)]
                }
            }
        }
    }

    /// Explicit dense copy.
    pub fn densify(&self) -> DenseGrid {
        match self {
            PlaneState::Dense(g) => g.clone(),
            PlaneState::Product { x, y } => {
                let mut amps = Vec::with_capacity(x.amps.len() * y.amps.len());
                for xi in x.sites() {
                    for yi in y.sites() {
                        amps.push(self.amplitude(xi, yi));
                    }
                }
                DenseGrid { radius_x: x.radius, radius_y: y.radius, amps, steps: x.steps }
            }
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match self {
            PlaneState::Product { x, y } => x.norm_sqr() * y.norm_sqr(),
            PlaneState::Dense(g) => g.amps.iter().flatten().map(|a| a.norm_sqr()).sum(),
        }
    }

    /// Site probabilities over the stored box, x-major.
    pub fn distribution(&self) -> Vec<SiteProbability> {
        let (rx, ry) = self.radii();
        let mut out = Vec::with_capacity(((2 * rx + 1) * (2 * ry + 1)) as usize);
        for x in -rx..=rx {
            for y in -ry..=ry {
                let a = self.amplitude(x, y);
                out.push(SiteProbability {
                    x,
                    y: Some(y),
                    p_h: a[0].norm_sqr() + a[2].norm_sqr(),
                    p_v: a[1].norm_sqr() + a[3].norm_sqr(),
                });
            }
        }
        out
    }
}
