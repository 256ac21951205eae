//! Hydrogenic coherent-state wave packets.
//!
//! The crate builds composite coherent states of the hydrogen atom from the
//! `O(2,1)` circular-orbit subspace and evaluates them in three ways:
//!
//! * the exact double series over hydrogen eigenfunctions,
//! * the closed form obtained by summing that series (a modified Bessel function),
//! * localized Gaussian estimates produced by a generic complex saddle-point engine.
//!
//! Atomic units are used throughout: lengths in Bohr radii, the Coulomb
//! coupling set to one.
//!
//! Modules:
//!
//! * [`specfun`]: Pochhammer symbols, log-gamma, `1F1`, `pFq`, `I0`, spherical harmonics.
//! * [`cs`]: generalized hypergeometric coherent states, ladder representations,
//!   semiclassical diagnostics and algebra eigenstates.
//! * [`hydrogenic`]: bound-state eigenfunctions in the auxiliary and physical representations.
//! * [`wavepacket`]: the composite packets, orbit geometry, Gaussian estimates and the
//!   auxiliary-to-physical kernel.
//! * [`saddlepoint`]: multidimensional Laplace/saddle-point estimator.
//! * [`grid`]: sampled fields and peak/width fitting.
//! * [`verify`]: verification suites with versioned thresholds.

pub mod cs;
pub mod error;
pub mod grid;
pub mod hydrogenic;
pub mod linalg;
pub mod quadrature;
pub mod saddlepoint;
pub mod specfun;
pub mod verify;
pub mod wavepacket;

pub use error::{Error, Result};
pub use num_complex::Complex64;
