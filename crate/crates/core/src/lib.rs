//! Turning-point quantization for the one-dimensional time-independent
//! Schrödinger equation.
//!
//! Energies come from the self-consistent condition `E = C / d(E)^2`, where
//! `d` is the distance between the classical turning points. A Numerov
//! shooting solver provides standard eigenvalues to compare against, and
//! [`scattering`] covers the potential step.

pub mod expr;
pub mod numerics;
pub mod potential;
pub mod solver;
pub mod scattering;
pub mod reference;
pub mod report;

pub use potential::{PotentialSpec, UnitSystem};
pub use solver::{LevelSpec, Variant};
