//! Independent oracles shared by the integration tests and the acceptance
//! suite. None of them call the code paths they are used to check.

#![allow(dead_code, clippy::type_complexity)]

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use two_centers::emmap::Region;
use two_centers::sturmian::Symbol;

/// `K(m)` by the trapezoidal rule on the smooth periodic integrand; converges
/// geometrically in the number of nodes.
pub fn k_trapezoid(m: f64) -> f64 {
    let n = 4096;
    let h = FRAC_PI_2 / n as f64;
    let f = |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt();
    let mut s = 0.5 * (f(0.0) + f(FRAC_PI_2));
    for i in 1..n {
        s += f(i as f64 * h);
    }
    s * h
}

/// One degree of freedom `q'' = force(q)` with classical RK4 at fixed step.
pub struct Rk4<F: Fn(f64) -> f64> {
    pub force: F,
    pub dt: f64,
}

impl<F: Fn(f64) -> f64> Rk4<F> {
    fn step(&self, (q, p): (f64, f64), dt: f64) -> (f64, f64) {
        let f = &self.force;
        let (k1q, k1p) = (p, f(q));
        let (k2q, k2p) = (p + 0.5 * dt * k1p, f(q + 0.5 * dt * k1q));
        let (k3q, k3p) = (p + 0.5 * dt * k2p, f(q + 0.5 * dt * k2q));
        let (k4q, k4p) = (p + dt * k3p, f(q + dt * k3q));
        (
            q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
            p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
        )
    }

    /// Time until `q` first passes `target` moving upward, after `skip`
    /// earlier upward passes.
    pub fn passage_time(
        &self,
        start: (f64, f64),
        target: f64,
        skip: usize,
        t_max: f64,
    ) -> Option<f64> {
        let mut y = start;
        let mut t = 0.0;
        let mut seen = 0;
        while t < t_max {
            let next = self.step(y, self.dt);
            if y.0 < target && next.0 >= target {
                if seen == skip {
                    // Bisect on the step length; RK4 stays fourth order.
                    let (mut lo, mut hi) = (0.0, self.dt);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if self.step(y, mid).0 < target {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    return Some(t + 0.5 * (lo + hi));
                }
                seen += 1;
            }
            y = next;
            t += self.dt;
        }
        None
    }
}

/// Return time of `λ` oscillating across zero.
pub fn oracle_t_lambda_crossing(g: f64, h: f64, m: f64) -> f64 {
    // Start at λ = 0 moving up; the next upward pass through 0 closes the loop.
    let p0 = (2.0 * (-g + m + h)).sqrt();
    let rk = Rk4 {
        force: move |l: f64| m * l.sinh() + h * (2.0 * l).sinh(),
        dt: 5e-4,
    };
    rk.passage_time((-1e-300, p0), 0.0, 1, 1e4)
        .expect("lambda returns")
}

/// Return time of `λ` in the off-axis well.
pub fn oracle_t_lambda_well(g: f64, h: f64, m: f64) -> f64 {
    let c = -m / (2.0 * h);
    let l = c.acosh();
    let v = -m * c - h * c * c;
    let p0 = (2.0 * (-g - v)).sqrt();
    let rk = Rk4 {
        force: move |l: f64| m * l.sinh() + h * (2.0 * l).sinh(),
        dt: 5e-4,
    };
    let lead = 1e-12;
    rk.passage_time((l - lead, p0), l, 1, 1e4)
        .expect("lambda returns")
        - lead / p0
}

/// Return time of `ν` oscillating in the well around `center` (±π/2).
pub fn oracle_t_nu_oscillation(g: f64, h: f64, delta: f64, center: f64) -> f64 {
    let v = delta * center.sin() + h;
    let p0 = (2.0 * (g - v)).sqrt();
    let rk = Rk4 {
        force: move |n: f64| -delta * n.cos() - h * (2.0 * n).sin(),
        dt: 5e-4,
    };
    let lead = 1e-12;
    rk.passage_time((center - lead, p0), center, 1, 1e4)
        .expect("nu returns")
        - lead / p0
}

/// Time for `ν` to advance one turn.
pub fn oracle_t_nu_rotation(g: f64, h: f64, delta: f64) -> f64 {
    let p0 = (2.0 * g).sqrt();
    let rk = Rk4 {
        force: move |n: f64| -delta * n.cos() - h * (2.0 * n).sin(),
        dt: 5e-4,
    };
    rk.passage_time((0.0, p0), TAU, 0, 1e4).expect("nu turns")
}

/// Region from the shape of the allowed sets of the two potentials on a fine
/// grid, without reference to critical values.
pub fn brute_force_region(g: f64, h: f64, m1: f64, m2: f64) -> Region {
    let (m, d) = (m1 + m2, m1 - m2);
    // λ: allowed where −M cosh λ − h cosh² λ ≤ −g.
    let n = 20_000;
    let lambda_ok = |l: f64| -m * l.cosh() - h * l.cosh().powi(2) <= -g;
    let l_max = 12.0;
    let at_zero = lambda_ok(0.0);
    let any_l = (0..=n).any(|i| lambda_ok(l_max * i as f64 / n as f64));
    // ν: allowed arcs on the circle where Δ sin ν + h sin² ν ≤ g.
    let nu_ok: Vec<bool> = (0..n)
        .map(|i| {
            let nu = -PI + TAU * i as f64 / n as f64;
            d * nu.sin() + h * nu.sin().powi(2) <= g
        })
        .collect();
    let all = nu_ok.iter().all(|&b| b);
    let arcs = (0..n)
        .filter(|&i| nu_ok[i] && !nu_ok[(i + n - 1) % n])
        .count();
    match (any_l, at_zero, all, arcs) {
        (false, _, _, _) => Region::Empty,
        (_, _, false, 0) => Region::Empty,
        (true, true, true, _) => Region::L,
        (true, false, true, _) => Region::P,
        (true, true, false, 1) => Region::SPrime,
        (true, true, false, 2) => Region::S,
        _ => Region::Empty,
    }
}

/// Symbols met by the line `y = m x + b`, `0 ≤ x < x_end`, against vertical
/// circles `x ≡ φ` and horizontal circles `y ≡ ψ`: every crossing is listed
/// and sorted by `x`.
pub fn line_walk(
    vertical: &[(f64, Symbol)],
    horizontal: &[(f64, Symbol)],
    m: f64,
    b: f64,
    x_end: f64,
) -> Vec<Symbol> {
    let mut events: Vec<(f64, Symbol)> = Vec::new();
    let cells = x_end.ceil() as i64 + 1;
    for &(phi, s) in vertical {
        for k in -1..=cells {
            let x = k as f64 + phi;
            if x >= 0.0 && x < x_end {
                events.push((x, s));
            }
        }
    }
    let y_end = m * x_end + b;
    for &(psi, s) in horizontal {
        for k in -1..=(y_end.ceil() as i64 + 1) {
            let x = (k as f64 + psi - b) / m;
            if x >= 0.0 && x < x_end {
                events.push((x, s));
            }
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    events.into_iter().map(|e| e.1).collect()
}

/// Least rotation of a cyclic word.
pub fn least_rotation(s: &[Symbol]) -> Vec<Symbol> {
    (0..s.len().max(1))
        .map(|k| {
            s.iter()
                .cycle()
                .skip(k)
                .take(s.len())
                .copied()
                .collect::<Vec<_>>()
        })
        .min()
        .unwrap_or_default()
}

pub fn word_string(s: &[Symbol]) -> String {
    s.iter().map(|c| c.as_char()).collect()
}

/// Half-spaced windows for a syzygy family: vertical labels at 0 and ½,
/// horizontal 3-windows at ¼ and ¾ unless planetary.
pub fn half_spaced_windows(
    labels: [Symbol; 2],
    planetary: bool,
) -> (Vec<(f64, Symbol)>, Vec<(f64, Symbol)>) {
    let v = vec![(0.0, labels[0]), (0.5, labels[1])];
    let h = if planetary {
        vec![]
    } else {
        vec![(0.25, Symbol::Three), (0.75, Symbol::Three)]
    };
    (v, h)
}

/// Seeded generator for test sampling.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which closed form a sample exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    LambdaCrossing,
    LambdaWell,
    NuOscillation,
    NuRotation,
}

impl Branch {
    pub const ALL: [Branch; 4] = [
        Branch::LambdaCrossing,
        Branch::LambdaWell,
        Branch::NuOscillation,
        Branch::NuRotation,
    ];

    pub fn regions(self) -> &'static [Region] {
        match self {
            Branch::LambdaCrossing => &[Region::S, Region::SPrime, Region::L],
            Branch::LambdaWell => &[Region::P],
            Branch::NuOscillation => &[Region::S, Region::SPrime],
            Branch::NuRotation => &[Region::L, Region::P],
        }
    }
}

/// Oracle period for `branch` at `(g, h)`. Oscillating `ν` uses the deeper
/// well when only one exists.
pub fn oracle_period(branch: Branch, g: f64, h: f64, m1: f64, m2: f64) -> f64 {
    let (m, d) = (m1 + m2, m1 - m2);
    match branch {
        Branch::LambdaCrossing => oracle_t_lambda_crossing(g, h, m),
        Branch::LambdaWell => oracle_t_lambda_well(g, h, m),
        Branch::NuOscillation => {
            let center = if d >= 0.0 { -FRAC_PI_2 } else { FRAC_PI_2 };
            oracle_t_nu_oscillation(g, h, d, center)
        }
        Branch::NuRotation => oracle_t_nu_rotation(g, h, d),
    }
}
