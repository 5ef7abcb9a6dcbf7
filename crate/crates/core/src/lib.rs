//! Mean-field solvers for attractive Bose-Einstein condensates in cigar and
//! spherical harmonic traps: ground states by normalized steepest descent,
//! real-time propagation, collapse thresholds and analytic soliton profiles.
//!
//! All quantities are dimensionless: lengths in oscillator lengths
//! `a0 = sqrt(hbar / m nu)`, times in `1/nu`, energies in `hbar nu`, and the
//! interaction strength is `Q = 8 pi N |a| / a0`.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod collapse;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod grid;
pub mod groundstate;
pub mod observables;
pub mod par;
pub mod potential;
pub mod spectral;
pub mod tridiag;
pub mod units;
pub mod wavefunction;

pub use energy::{hamiltonian, EnergyBreakdown, MeanField, TrapSpec};
pub use error::{GpeError, Result};
pub use grid::{Geometry, Grid, GridSpec};
pub use wavefunction::Wavefunction;
