//! Complete elliptic integral of the first kind.
//!
//! ```text
//! K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ),   m < 1
//! ```
//!
//! Evaluated with the arithmetic-geometric mean, `K(m) = π / (2 AGM(1, √(1−m)))`.
//! Negative parameters are first mapped into `[0, 1)` with the imaginary-modulus
//! transformation `K(−μ) = K(μ/(1+μ)) / √(1+μ)`, so the iteration always starts
//! from `0 < b ≤ 1`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const MAX_ITER: usize = 64;
const AGM_REL_TOL: f64 = 1e-16;

/// Parameters above this are rejected as numerically singular.
pub const OVERFLOW_THRESHOLD: f64 = 1.0 - 1e-12;

/// Parameter `m = k²` of a complete elliptic integral. May be negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticParameter(pub f64);

impl EllipticParameter {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for EllipticParameter {
    fn from(m: f64) -> Self {
        Self(m)
    }
}

/// `K(m)` for `m < 1 − 1e-12`.
pub fn complete_k(m: impl Into<EllipticParameter>) -> Result<f64> {
    let m = m.into().0;
    if m.is_nan() || m >= 1.0 {
        return Err(Error::EllipticDomain(m));
    }
    if m > OVERFLOW_THRESHOLD {
        return Err(Error::EllipticOverflow(m));
    }
    Ok(k_unchecked(m))
}

/// `K(m)` without domain checks: `+∞` at `m = 1`, NaN above.
pub(crate) fn k_unchecked(m: f64) -> f64 {
    if m.is_nan() || m > 1.0 {
        return f64::NAN;
    }
    if m == 1.0 {
        return f64::INFINITY;
    }
    if m == f64::NEG_INFINITY {
        return 0.0;
    }
    if m < 0.0 {
        let mu = -m;
        return k_complementary(1.0 / (1.0 + mu)) / (1.0 + mu).sqrt();
    }
    k_complementary(1.0 - m)
}

/// `K(1 − m1)` for `0 < m1 ≤ 1`, without forming `1 − m1`. Keeps full relative
/// accuracy in the logarithmic singularity when `m1` is tiny.
pub(crate) fn k_complementary(m1: f64) -> f64 {
    if m1.is_nan() || m1 < 0.0 {
        return f64::NAN;
    }
    if m1 == 0.0 {
        return f64::INFINITY;
    }
    debug_assert!(m1 <= 1.0);
    let mut a = 1.0_f64;
    let mut b = m1.sqrt();
    for _ in 0..MAX_ITER {
        if (a - b).abs() <= AGM_REL_TOL * a {
            break;
        }
        let next_a = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next_a;
    }
    FRAC_PI_2 / a
}
