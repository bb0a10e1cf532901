//! Simulation of few-level quantum systems driven by periodic delta-kicks.
//!
//! The crate covers four pieces of machinery:
//!
//! - [`mat`]: exact dimension-2/3 complex matrix algebra, closed-form
//!   propagators, Hermitian exponentials, and a principal-branch unitary
//!   logarithm used as a cross-check oracle;
//! - [`twolevel`]: the one-period propagator of a kicked two-level system in
//!   its SU(2) parametrization, extraction of the time-independent effective
//!   Hamiltonian, resonance-parameter root finding for all four kick styles,
//!   coherent-destruction-of-coupling points, and the near-destruction
//!   coupling limits;
//! - [`threelevel`]: the special-pattern three-level closed forms, the
//!   numerically recovered one-period coefficient functions, resonance
//!   periods with their consistency conditions, and the period-sweep regime
//!   classifier;
//! - [`sim`] and [`squarewave`]: a generic kicked-evolution engine
//!   (schedules, trajectories, validity metric, population inversion,
//!   selective transitions) and the square-wave realization that replaces
//!   each instantaneous kick by a finite pulse segment.
//!
//! Units: all frequencies are in units of the reference coupling and all
//! times in its inverse; phases are radians.
//!
//! Parameter sweeps run in parallel through [rayon] when the default
//! `parallel` feature is enabled; disabling it yields a fully sequential
//! build with identical (bit-for-bit) results.
//!
//! [rayon]: https://docs.rs/rayon

pub mod error;
pub mod exec;
pub mod mat;
pub mod sim;
pub mod squarewave;
pub mod threelevel;
pub mod twolevel;

pub use error::{Error, Result};
pub use mat::C64;
