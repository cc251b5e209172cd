//! Symbolic dynamics of Euler's problem of two fixed centers.
//!
//! A test particle moves in the plane under the Newtonian attraction of two
//! fixed masses at `(−1, 0)` and `(1, 0)`. The crate classifies the regular
//! Liouville tori of the problem, evaluates their periods and rotation numbers
//! in closed form, predicts the syzygy words (the sequence of x-axis crossings
//! labelled by the interval crossed) from Sturmian combinatorics, and checks
//! those predictions against numerically integrated orbits.
//!
//! Module map:
//!
//! - [`sturmian`]: cutting sequences, Sturmian exponents, word enumeration.
//! - [`elliptic`]: the complete elliptic integral `K(m)`.
//! - [`model`]: Hamiltonian, second integral, elliptic-coordinate regularization.
//! - [`emmap`]: critical values and the S / S' / L / P region classification.
//! - [`periods`]: closed-form periods, rotation numbers, window phases.
//! - [`orbits`]: integration, syzygy words, periodic and collision orbits,
//!   verification.
//! - [`cli`]: the `two-centers` command-line front end.

pub mod cli;
pub mod elliptic;
pub mod emmap;
pub mod error;
pub mod model;
pub mod ode;
pub mod orbits;
pub mod parallel;
pub mod periods;
pub mod sturmian;

pub use error::{Error, Result};
pub use model::Params;
