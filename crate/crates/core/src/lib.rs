//! Quasi-energy band structure, Bloch eigenvectors and Zak-phase landscapes
//! for three discrete-time quantum walk protocols:
//!
//! * `Hqw`: Hadamard walk, a single y-rotation followed by a spin-dependent shift;
//! * `Ncrqw`: two non-commuting rotations (about y, then about x) and a shift;
//! * `Ssqw`: split-step walk, two rotation/shift stages per step.
//!
//! The crate is organised bottom-up: [`coin`] builds coin rotations and the
//! momentum-space step unitaries, [`bands`] holds the closed-form dispersion
//! relations and Pauli norm vectors, [`bloch`] and [`zak`] compute Bloch
//! eigenvectors and Zak phases, [`landscape`] sweeps 2D Zak vectors over
//! parameter grids, [`symmetry`] collects the time-reversal breaking tools and
//! [`walk`] simulates walks in position space. [`cli`] wires everything to the
//! `dtqw-zak` binary.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angles;
pub mod bands;
pub mod bloch;
pub mod cli;
pub mod coin;
mod error;
pub mod landscape;
pub mod output;
pub mod protocol;
pub mod quadrature;
pub mod symmetry;
pub mod walk;
pub mod zak;

pub use error::{Error, Result};
pub use protocol::{Protocol, ProtocolParams};

pub use num_complex::Complex64 as C64;

/// `sin E` at or below this value counts as a gap closure (Dirac point).
///
/// Shared by every module that needs to decide whether the Bloch
/// eigenvectors are defined.
pub const DIRAC_THRESHOLD: f64 = 1e-9;
