//! Forward quantum Markov chains for the XY-model on the Cayley tree of order three.
//!
//! The crate is organised bottom-up:
//!
//! - [`pauli`]: dense complex operators in the Pauli basis, normalized (partial) traces.
//! - [`tree`]: coordinates, level sets and forward ordering of the semi-infinite Cayley tree.
//! - [`model`]: the XY edge gate, the scalar recursion coefficients and the critical
//!   inverse temperatures obtained from the roots of `P9`.
//! - [`dynamics`]: the implicit planar map for homogeneous boundary fields, its fixed
//!   points and trajectory classification.
//! - [`spectral`]: the 2x2 correlation transfer matrix and the sigma-1 expectation values
//!   under the two boundary solutions.
//! - [`oracle`]: exact matrix-free evaluation of finite-volume states on small trees.
//! - [`free_energy`]: the thermodynamic function `F(beta)` and its derivative jumps.
//! - [`verification`]: the named check suite used by the command-line front end.

pub mod dynamics;
pub mod error;
pub mod free_energy;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod spectral;
pub mod tree;
pub mod verification;

pub use error::{Error, Result};
