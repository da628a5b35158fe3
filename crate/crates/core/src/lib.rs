//! Berry phase of a four-state spin-one system in a uniformly rotating
//! electric field.
//!
//! The model couples the `|1,0>` and `|0,0>` levels through the field. As
//! the field direction sweeps a cone of half-angle `theta`, each instantaneous
//! eigenstate `n` picks up the geometric phase `-n * Omega`, where `Omega`
//! is the solid angle of the cone. The crate reaches that phase three ways:
//! by propagating the Schrödinger equation, by integrating the Berry
//! connection of closed-form eigenstates, and through a rotation-generator
//! identity.

// `!(x <= tol)` is used on purpose so that NaN fails the guard
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod model;
pub mod phase;
pub mod rotations;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexAmplitude, OperatorMatrix, Role, StateVector};
pub use model::{FieldConfig, LevelParams, MixingAngle, Spectrum, StateLabel};
pub use phase::{PhaseReport, SimulationConfig, Trajectory};
pub use rotations::{EulerPair, GeneratorSet};
