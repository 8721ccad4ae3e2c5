//! Coin rotations, spin-dependent shifts and single-step unitaries.
//!
//! Matrices act on the coin basis `(H, V)`. A step is a sequence of coin
//! rotations and shifts; products are written right-to-left, so the rightmost
//! factor acts first. In momentum space a shift of `H` by `+1` multiplies the
//! `H` amplitude by `e^{ik}`, a shift of `V` by `-1` multiplies `V` by `e^{-ik}`.

use std::ops::Mul;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::angles::wrap_angle;
use crate::protocol::ProtocolParams;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Dense complex 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex2x2 {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

impl Complex2x2 {
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn diag(d1: C64, d2: C64) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    /// Pauli matrices σ1, σ2, σ3.
    pub fn pauli() -> [Self; 3] {
        [Self::new(ZERO, ONE, ONE, ZERO), Self::new(ZERO, -I, I, ZERO), Self::new(ONE, ZERO, ZERO, -ONE)]
    }

    /// `n · σ` for a real 3-vector.
    pub fn pauli_combination(n: [f64; 3]) -> Self {
        Self::new(C64::new(n[2], 0.0), C64::new(n[0], -n[1]), C64::new(n[0], n[1]), C64::new(-n[2], 0.0))
    }

    pub fn dagger(&self) -> Self {
        Self::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.a11 + other.a11, self.a12 + other.a12, self.a21 + other.a21, self.a22 + other.a22)
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries().iter().zip(other.entries().iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `U†U = I` elementwise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.dagger() * *self).max_abs_diff(&Self::identity()) <= tol
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    /// Eigenvalues from the characteristic polynomial, without assuming
    /// unitarity or a unit determinant.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let tr = self.trace();
        // (a11 − a22)² + 4 a12 a21 equals tr² − 4 det without the cancellation
        // near degenerate eigenvalues.
        let diff = self.a11 - self.a22;
        let disc = (diff * diff + 4.0 * self.a12 * self.a21).sqrt();
        [(tr + disc) * 0.5, (tr - disc) * 0.5]
    }
}

impl Mul for Complex2x2 {
    type Output = Complex2x2;

    fn mul(self, r: Complex2x2) -> Complex2x2 {
        Complex2x2::new(
            self.a11 * r.a11 + self.a12 * r.a21,
            self.a11 * r.a12 + self.a12 * r.a22,
            self.a21 * r.a11 + self.a22 * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RotationAxis {
    Axis1,
    Axis2,
    Axis3,
}

impl RotationAxis {
    fn unit(self) -> [f64; 3] {
        match self {
            RotationAxis::Axis1 => [1.0, 0.0, 0.0],
            RotationAxis::Axis2 => [0.0, 1.0, 0.0],
            RotationAxis::Axis3 => [0.0, 0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    pub axis: RotationAxis,
    angle: f64,
}

impl RotationSpec {
    pub fn new(axis: RotationAxis, angle: f64) -> Self {
        Self { axis, angle: wrap_angle(angle) }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

/// Coin rotation matrix
///
/// ```text
/// | cos θ − i n3 sin θ    (i n1 − n2) sin θ |
/// | (i n1 + n2) sin θ     cos θ + i n3 sin θ |
/// ```
///
/// for the unit axis `n`. Axis 2 gives the real rotation
/// `[[cos θ, −sin θ], [sin θ, cos θ]]`; axis 1 gives cos θ on the diagonal and
/// `i sin θ` off the diagonal.
pub fn rotation_matrix(spec: RotationSpec) -> Complex2x2 {
    let [n1, n2, n3] = spec.axis.unit();
    let (s, c) = spec.angle.sin_cos();
    Complex2x2::new(C64::new(c, -n3 * s), C64::new(-n2 * s, n1 * s), C64::new(n2 * s, n1 * s), C64::new(c, n3 * s))
}

/// Real y-rotation by `theta`.
pub fn ry(theta: f64) -> Complex2x2 {
    rotation_matrix(RotationSpec::new(RotationAxis::Axis2, theta))
}

/// Lattice shift applied to the coin components within one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    /// `H` moves to `x + 1` and `V` to `x − 1`.
    Both,
    /// Only `H` moves, to `x + 1`.
    UpOnly,
    /// Only `V` moves, to `x − 1`.
    DownOnly,
}

impl Shift {
    /// Site displacement of the `(H, V)` components.
    pub fn displacement(self) -> [i64; 2] {
        match self {
            Shift::Both => [1, -1],
            Shift::UpOnly => [1, 0],
            Shift::DownOnly => [0, -1],
        }
    }

    /// Momentum representation at wavenumber `k`.
    pub fn momentum(self, k: f64) -> Complex2x2 {
        let [dh, dv] = self.displacement();
        Complex2x2::diag(C64::from_polar(1.0, dh as f64 * k), C64::from_polar(1.0, dv as f64 * k))
    }
}

/// One elementary operation inside a walk step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOp {
    Coin(Complex2x2),
    Shift(Shift),
}

/// The operations making up one step of `params`, in the order they act.
///
/// * HQW: `T · R_y(θ)`
/// * NCRQW: `T · R_1(−φ) · R_y(θ)`. The x-rotation is taken with the same
///   rotation sense as `R_y` (`e^{−iφσ1}`); with this choice the eigenphases
///   satisfy `cos E = cos k cos θ cos φ + sin k sin θ sin φ`.
/// * SSQW: `T↓ · R_y(θ1) · T↑ · R_y(θ2)` with one-sided shifts, whose
///   eigenphases satisfy `cos E = cos k cos θ1 cos θ2 − sin θ1 sin θ2`.
pub fn step_sequence(params: &ProtocolParams) -> Vec<StepOp> {
    match *params {
        ProtocolParams::Hqw { theta } => vec![StepOp::Coin(ry(theta)), StepOp::Shift(Shift::Both)],
        ProtocolParams::Ncrqw { theta, phi } => {
            let coin = rotation_matrix(RotationSpec::new(RotationAxis::Axis1, -phi)) * ry(theta);
            vec![StepOp::Coin(coin), StepOp::Shift(Shift::Both)]
        }
        ProtocolParams::Ssqw { theta1, theta2 } => vec![
            StepOp::Coin(ry(theta2)),
            StepOp::Shift(Shift::UpOnly),
            StepOp::Coin(ry(theta1)),
            StepOp::Shift(Shift::DownOnly),
        ],
    }
}

/// Bloch-diagonal single-step unitary at wavenumber `k`.
pub fn momentum_step_unitary(params: &ProtocolParams, k: f64) -> Complex2x2 {
    step_sequence(params).iter().fold(Complex2x2::identity(), |acc, op| {
        let m = match op {
            StepOp::Coin(c) => *c,
            StepOp::Shift(s) => s.momentum(k),
        };
        m * acc
    })
}

/// Eigenphases of the step unitary, sorted descending: approximately `[E, −E]`.
pub fn eigenphases(u: &Complex2x2) -> [f64; 2] {
    let [l1, l2] = u.eigenvalues();
    let (p1, p2) = (l1.arg(), l2.arg());
    if p1 >= p2 {
        [p1, p2]
    } else {
        [p2, p1]
    }
}

/// Two-component coin amplitude `(aH, aV)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinState {
    pub h: C64,
    pub v: C64,
}

impl CoinState {
    pub const H: CoinState = CoinState { h: ONE, v: ZERO };
    pub const V: CoinState = CoinState { h: ZERO, v: ONE };

    pub fn new(h: C64, v: C64) -> Self {
        Self { h, v }
    }

    /// Scales the pair to unit norm; `None` for the zero vector.
    pub fn normalized(h: C64, v: C64) -> Option<Self> {
        let n = (h.norm_sqr() + v.norm_sqr()).sqrt();
        (n > 0.0).then(|| Self { h: h / n, v: v / n })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn as_array(&self) -> [C64; 2] {
        [self.h, self.v]
    }
}

pub fn apply_coin(u: &Complex2x2, s: CoinState) -> CoinState {
    let [h, v] = u.apply(s.as_array());
    CoinState { h, v }
}
