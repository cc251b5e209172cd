//! The planar two-center problem and its elliptic-coordinate regularization.
//!
//! The centers sit at `(−1, 0)` (mass `m1`) and `(1, 0)` (mass `m2`); the
//! half-separation is fixed to one. Other separations follow by rescaling
//! lengths by `d`, times by `d^{3/2}`, energies by `1/d`.
//!
//! Elliptic coordinates are `x + i y = sin(ν + i λ)`, so
//! `x = cosh λ sin ν`, `y = sinh λ cos ν`, and the centers are the points
//! `λ = 0, ν = ∓π/2`. With the time change `dt = (cosh²λ − sin²ν) dτ` the
//! zero level of `(H − h)(cosh²λ − sin²ν)` splits into
//!
//! ```text
//! H_λ = p_λ²/2 − (m1 + m2) cosh λ − h cosh²λ = −g
//! H_ν = p_ν²/2 + (m1 − m2) sin ν  + h sin²ν  =  g
//! ```
//!
//! and `g` coincides with the Cartesian second integral `G`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances below this count as sitting on a center.
const COLLISION_RADIUS: f64 = 1e-12;

/// Masses and energy of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub m1: f64,
    pub m2: f64,
    pub h: f64,
}

impl Params {
    pub fn new(m1: f64, m2: f64, h: f64) -> Result<Self> {
        if !(m1 > 0.0 && m2 > 0.0 && m1.is_finite() && m2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "masses must be positive, got {m1}, {m2}"
            )));
        }
        if !(h < 0.0 && h.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "energy must be negative, got {h}"
            )));
        }
        Ok(Self { m1, m2, h })
    }

    /// Equal masses `1/2, 1/2` at energy `h`.
    pub fn equal(h: f64) -> Result<Self> {
        Self::new(0.5, 0.5, h)
    }

    pub fn with_energy(self, h: f64) -> Result<Self> {
        Self::new(self.m1, self.m2, h)
    }

    /// Half-separation of the centers; always one.
    pub fn d(&self) -> f64 {
        1.0
    }

    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2
    }

    /// `m1 − m2`, signed.
    pub fn mass_difference(&self) -> f64 {
        self.m1 - self.m2
    }

    pub fn is_symmetric(&self) -> bool {
        self.m1 == self.m2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl CartesianState {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        Self { x, y, px, py }
    }

    fn distances(&self) -> Result<(f64, f64)> {
        let r1 = (self.x + 1.0).hypot(self.y);
        let r2 = (self.x - 1.0).hypot(self.y);
        if r1 < COLLISION_RADIUS || r2 < COLLISION_RADIUS {
            return Err(Error::Collision);
        }
        Ok((r1, r2))
    }
}

/// Regularized state. `nu` is unwrapped along trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub lambda: f64,
    pub nu: f64,
    pub p_lambda: f64,
    pub p_nu: f64,
    pub tau: f64,
    pub t: f64,
}

impl PhaseState {
    pub fn new(lambda: f64, nu: f64, p_lambda: f64, p_nu: f64) -> Self {
        Self {
            lambda,
            nu,
            p_lambda,
            p_nu,
            tau: 0.0,
            t: 0.0,
        }
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.lambda, self.nu, self.p_lambda, self.p_nu]
    }
}

pub fn hamiltonian(s: &CartesianState, p: &Params) -> Result<f64> {
    let (r1, r2) = s.distances()?;
    Ok(0.5 * (s.px * s.px + s.py * s.py) - p.m1 / r1 - p.m2 / r2)
}

pub fn second_integral(s: &CartesianState, p: &Params) -> Result<f64> {
    let (r1, r2) = s.distances()?;
    let l = s.x * s.py - s.y * s.px;
    Ok(0.5 * l * l + 0.5 * s.px * s.px + s.x * (p.m1 / r1 - p.m2 / r2))
}

// Jacobian of (λ, ν) ↦ (x, y) is [[a, b], [b, −a]] with a = sinh λ sin ν,
// b = cosh λ cos ν; it is symmetric and squares to (a² + b²) I.
fn jacobian(lambda: f64, nu: f64) -> (f64, f64) {
    (lambda.sinh() * nu.sin(), lambda.cosh() * nu.cos())
}

pub fn from_regularized(ps: &PhaseState) -> CartesianState {
    let (a, b) = jacobian(ps.lambda, ps.nu);
    let f = a * a + b * b;
    let x = ps.lambda.cosh() * ps.nu.sin();
    let y = ps.lambda.sinh() * ps.nu.cos();
    if f == 0.0 {
        return CartesianState::new(x, y, f64::NAN, f64::NAN);
    }
    let px = (a * ps.p_lambda + b * ps.p_nu) / f;
    let py = (b * ps.p_lambda - a * ps.p_nu) / f;
    CartesianState::new(x, y, px, py)
}

/// Principal branch: `λ ≥ 0`, `ν ∈ (−π, π]`. The other sheet is the image
/// under [`deck`].
pub fn to_regularized(s: &CartesianState) -> Result<PhaseState> {
    let r1 = (s.x + 1.0).hypot(s.y);
    let r2 = (s.x - 1.0).hypot(s.y);
    if r1 < COLLISION_RADIUS || r2 < COLLISION_RADIUS {
        return Err(Error::BranchAmbiguity);
    }
    let mut lambda = (0.5 * (r1 + r2)).max(1.0).acosh();
    let sin_nu = (0.5 * (r1 - r2)).clamp(-1.0, 1.0);
    let mut nu = sin_nu.asin();
    if s.y < 0.0 {
        nu = std::f64::consts::PI - nu;
        if nu > std::f64::consts::PI {
            nu -= 2.0 * std::f64::consts::PI;
        }
    }
    for _ in 0..4 {
        let (a, b) = jacobian(lambda, nu);
        let f = a * a + b * b;
        if f < 1e-300 {
            break;
        }
        let fx = lambda.cosh() * nu.sin() - s.x;
        let fy = lambda.sinh() * nu.cos() - s.y;
        lambda -= (a * fx + b * fy) / f;
        nu -= (b * fx - a * fy) / f;
    }
    if lambda < 0.0 {
        let d = deck(&PhaseState::new(lambda, nu, 0.0, 0.0));
        lambda = d.lambda;
        nu = wrap_angle(d.nu);
    }
    let (a, b) = jacobian(lambda, nu);
    Ok(PhaseState::new(
        lambda,
        nu,
        a * s.px + b * s.py,
        b * s.px - a * s.py,
    ))
}

/// Angle reduced to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// `(H_λ, H_ν)`.
pub fn separated_hamiltonians(ps: &PhaseState, p: &Params) -> (f64, f64) {
    let c = ps.lambda.cosh();
    let s = ps.nu.sin();
    let h_lambda = 0.5 * ps.p_lambda * ps.p_lambda - p.total_mass() * c - p.h * c * c;
    let h_nu = 0.5 * ps.p_nu * ps.p_nu + p.mass_difference() * s + p.h * s * s;
    (h_lambda, h_nu)
}

/// `dt/dτ = cosh²λ − sin²ν = sinh²λ + cos²ν`, zero exactly at the centers.
pub fn time_factor(ps: &PhaseState) -> f64 {
    let (sh, c) = (ps.lambda.sinh(), ps.nu.cos());
    sh * sh + c * c
}

/// The covering involution `(λ, ν, p_λ, p_ν) ↦ (−λ, π − ν, −p_λ, −p_ν)`.
pub fn deck(ps: &PhaseState) -> PhaseState {
    PhaseState {
        lambda: -ps.lambda,
        nu: std::f64::consts::PI - ps.nu,
        p_lambda: -ps.p_lambda,
        p_nu: -ps.p_nu,
        ..*ps
    }
}

/// Regularized vector field on `(λ, ν, p_λ, p_ν, t)`.
pub fn vector_field(p: &Params, y: &[f64; 5]) -> [f64; 5] {
    let (m, delta, h) = (p.total_mass(), p.mass_difference(), p.h);
    let (l, n) = (y[0], y[1]);
    let sh = l.sinh();
    let cs = n.cos();
    [
        y[2],
        y[3],
        m * sh + h * (2.0 * l).sinh(),
        -delta * cs - h * (2.0 * n).sin(),
        sh * sh + cs * cs,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EQ: Params = Params {
        m1: 0.5,
        m2: 0.5,
        h: -0.23,
    };

    #[test]
    fn hamiltonian_examples() {
        let third = Params::new(1.0 / 3.0, 2.0 / 3.0, -0.5).unwrap();
        assert!(
            (hamiltonian(&CartesianState::new(0.0, 1.0, 0.0, 0.0), &EQ).unwrap() + 0.5f64.sqrt())
                .abs()
                < 1e-15
        );
        assert!(
            (hamiltonian(&CartesianState::new(0.0, 1.0, 1.0, 0.0), &EQ).unwrap()
                - (0.5 - 0.5f64.sqrt()))
            .abs()
                < 1e-15
        );
        assert!(
            (hamiltonian(&CartesianState::new(2.0, 0.0, 0.0, 0.0), &third).unwrap() + 7.0 / 9.0)
                .abs()
                < 1e-15
        );
        assert_eq!(
            hamiltonian(&CartesianState::new(1.0, 0.0, 0.0, 0.0), &EQ),
            Err(Error::Collision)
        );
    }

    #[test]
    fn second_integral_examples() {
        assert_eq!(
            second_integral(&CartesianState::new(0.0, 1.0, 0.0, 0.0), &EQ).unwrap(),
            0.0
        );
        assert!(
            (second_integral(&CartesianState::new(0.0, 1.0, 1.0, 0.0), &EQ).unwrap() - 1.0).abs()
                < 1e-15
        );
        assert_eq!(
            second_integral(&CartesianState::new(-1.0, 0.0, 0.0, 0.0), &EQ),
            Err(Error::Collision)
        );
    }

    #[test]
    fn coordinate_examples() {
        let c = from_regularized(&PhaseState::new(0.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0));
        assert!((c.x - 1.0).abs() < 1e-15 && c.y.abs() < 1e-15);
        let c = from_regularized(&PhaseState::new(1.0, 0.0, 0.0, 0.0));
        assert!(c.x.abs() < 1e-15 && (c.y - 1f64.sinh()).abs() < 1e-15);
        assert_eq!(
            to_regularized(&CartesianState::new(1.0, 0.0, 0.3, 0.0)),
            Err(Error::BranchAmbiguity)
        );
    }

    #[test]
    fn time_factor_examples() {
        use std::f64::consts::FRAC_PI_2;
        assert!(time_factor(&PhaseState::new(0.0, FRAC_PI_2, 0.0, 0.0)) < 1e-30);
        assert!(time_factor(&PhaseState::new(0.0, -FRAC_PI_2, 0.0, 0.0)) < 1e-30);
        assert!((time_factor(&PhaseState::new(0.0, 0.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
        let expect = 1f64.cosh().powi(2);
        assert!((time_factor(&PhaseState::new(1.0, 0.0, 0.0, 0.0)) - expect).abs() < 1e-14);
    }

    #[test]
    fn separated_examples() {
        let (hl, _) = separated_hamiltonians(&PhaseState::new(0.0, 0.3, 0.0, 0.0), &EQ);
        assert!((hl + 0.77).abs() < 1e-15);
        let (_, hn) = separated_hamiltonians(
            &PhaseState::new(0.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0),
            &EQ,
        );
        assert!((hn + 0.23).abs() < 1e-15);
    }

    #[test]
    fn round_trips_and_separation_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [EQ, Params::new(0.3, 0.7, -0.4).unwrap()] {
            for _ in 0..1000 {
                let ps = PhaseState::new(
                    rng.gen_range(0.05..2.0),
                    rng.gen_range(-3.1..3.1),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                );
                if time_factor(&ps) < 1e-3 {
                    continue;
                }
                let c = from_regularized(&ps);
                let back = to_regularized(&c).unwrap();
                for (u, v) in ps.coords().iter().zip(back.coords()) {
                    assert!((u - v).abs() < 1e-12, "{ps:?} -> {back:?}");
                }
                let c2 = from_regularized(&back);
                assert!((c.x - c2.x).abs() < 1e-12 && (c.py - c2.py).abs() < 1e-12);

                let energy = hamiltonian(&c, &p).unwrap();
                let p_here = Params { h: energy, ..p };
                let (hl, hn) = separated_hamiltonians(&ps, &p_here);
                assert!((hl + hn).abs() < 1e-10 * (1.0 + hl.abs()));
                let p_other = Params {
                    h: energy - 0.1,
                    ..p
                };
                let (hl, hn) = separated_hamiltonians(&ps, &p_other);
                assert!((0.1 * time_factor(&ps) - (hl + hn)).abs() < 1e-10 * (1.0 + hl.abs()));
                let g = second_integral(&c, &p).unwrap();
                assert!(
                    (g - separated_hamiltonians(&ps, &p_here).1).abs() < 1e-10 * (1.0 + g.abs())
                );
            }
        }
    }

    #[test]
    fn deck_preserves_cartesian_state() {
        let ps = PhaseState::new(0.7, 0.4, -0.3, 1.1);
        let (a, b) = (from_regularized(&ps), from_regularized(&deck(&ps)));
        for (u, v) in [(a.x, b.x), (a.y, b.y), (a.px, b.px), (a.py, b.py)] {
            assert!((u - v).abs() < 1e-14);
        }
        let (hl, hn) = separated_hamiltonians(&ps, &EQ);
        let (dl, dn) = separated_hamiltonians(&deck(&ps), &EQ);
        assert!((hl - dl).abs() < 1e-14 && (hn - dn).abs() < 1e-14);
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(0.0, 1.0, -1.0).is_err());
        assert!(Params::new(0.5, 0.5, 0.0).is_err());
        assert_eq!(Params::equal(-1.0).unwrap().d(), 1.0);
    }

    #[test]
    fn state_json_is_flat() {
        let js = serde_json::to_value(PhaseState::new(1.0, 2.0, 3.0, 4.0)).unwrap();
        assert_eq!(js["lambda"], 1.0);
        assert_eq!(js["p_nu"], 4.0);
        assert_eq!(js["tau"], 0.0);
    }
}
