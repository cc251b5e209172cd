use thiserror::Error;

use crate::emmap::{Curve, Region};

/// Errors raised by the library. Each module reports through this one enum so
/// callers can propagate with `?` across module boundaries.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line hits a lattice point at crossing {index} (fractional part {frac:e})")]
    LatticeHit { index: usize, frac: f64 },

    #[error("line passes through a window intersection near x = {x}")]
    PhaseHit { x: f64 },

    #[error("elliptic parameter m = {0} is outside (-inf, 1)")]
    EllipticDomain(f64),

    #[error("elliptic parameter m = {0} is too close to 1 for a finite K(m)")]
    EllipticOverflow(f64),

    #[error("state at a force center")]
    Collision,

    #[error("regularizing map is branched at a center")]
    BranchAmbiguity,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("(g, h) = ({g}, {h}) is not in the domain of the {branch} period")]
    RegionMismatch {
        g: f64,
        h: f64,
        branch: &'static str,
    },

    #[error("(g, h) = ({g}, {h}) lies within tolerance of the critical curve {curve:?}")]
    Divergence { g: f64, h: f64, curve: Curve },

    #[error("region {0} is empty at this energy")]
    RegionEmpty(Region),

    #[error("rotation number {target} outside the open range ({min}, {max})")]
    OutOfRange { target: f64, min: f64, max: f64 },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("start state is not on the zero level: H_lambda + H_nu = {0:e}")]
    InadmissibleStart(f64),

    #[error("trajectory approaches a collision (time factor {factor:e} at tau = {tau})")]
    CollisionApproach { tau: f64, factor: f64 },

    #[error("periodic orbit failed to close: phase-space error {0:e}")]
    ClosureFailure(f64),

    #[error("integrator step size underflow at tau = {0}")]
    StepUnderflow(f64),

    #[error("torus selector not available for region {0}")]
    NoSuchTorus(Region),
}

pub type Result<T> = std::result::Result<T, Error>;
