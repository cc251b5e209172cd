//! Fictitious-time periods of the separated motions, the rotation number
//! `W = T_ν / T_λ`, its range on each region, and window phases.
//!
//! With `M = m1 + m2`, `Δ = m1 − m2` and `a = |h|`:
//!
//! ```text
//! r₊ = √(4gh + M²)    k₊² = ½ + (g + h)/(2r₊)    f₊σ = √2 / √(σ(−1 − g/h) + r₊/a)
//! T_λ3 = (4/√(2a)) f₊₀ K(k₊²)           λ crosses 0
//! T_λ0 = (2/√a)    f₊₁ K(1/k₊²)         λ in an off-axis well
//!
//! r₋ = √(4gh + Δ²)    k₋² = ½ + (g + h)/(2r₋)    f₋₀ = √2 / √(r₋/a)
//! T_νo = (4/√(2a)) f₋₀ K(k₋²)           ν oscillates
//! T_νr = 4 K(k_c²) / (√2 ((g − h)² − Δ²)^{1/4}),  k_c² = ½ − (g + h)/(2√((g − h)² − Δ²))
//! ```
//!
//! For equal masses the ν-periods reduce to `T_νo = (4/√(2a)) K(1 − g/h)` and
//! `T_νr = (4/(k√(2a))) K(1/k²)` with `k² = 1 − g/h`; those forms are used when
//! `m1 = m2`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::elliptic::{k_complementary, k_unchecked};
use crate::emmap::{
    classify, critical_data, lambda_motion, nearest_critical, nu_motion, nu_separatrix,
    region_boundaries, region_interval, Curve, LambdaMotion, NuMotion, Region, CRITICAL_TOL,
};
use crate::error::{Error, Result};
use crate::model::Params;
use crate::ode::{Dop853, Flow};
use crate::parallel::{map_with, Execution};
use crate::sturmian::{Symbol, WindowPhases};

/// Points this close to a curve where a period blows up are refused.
pub const DIVERGENCE_TOL: f64 = CRITICAL_TOL;

/// Target accuracy of [`solve_g`].
pub const SOLVE_TOL: f64 = 1e-11;

const SOLVE_MAX_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LambdaBranch {
    /// λ oscillates through 0 (`λ3`).
    Crossing,
    /// λ oscillates in a well away from 0 (`λ0`).
    Well,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NuBranch {
    Oscillation,
    Rotation,
}

impl LambdaBranch {
    pub fn label(self) -> &'static str {
        match self {
            LambdaBranch::Crossing => "lambda3",
            LambdaBranch::Well => "lambda0",
        }
    }
}

impl NuBranch {
    pub fn label(self) -> &'static str {
        match self {
            NuBranch::Oscillation => "nu_o",
            NuBranch::Rotation => "nu_r",
        }
    }
}

impl Serialize for LambdaBranch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl Serialize for NuBranch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// Which of the two tori over a point of S or P.
///
/// In S, `First` circles the center at `(−1, 0)` and `Second` the one at
/// `(1, 0)`. In P, `First` is the lift with `λ > 0` and `Second` the lift with
/// `λ < 0`, both with `ν` increasing. Single-torus regions accept only `First`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum TorusSelector {
    #[default]
    First,
    Second,
}

impl TorusSelector {
    pub const BOTH: [TorusSelector; 2] = [TorusSelector::First, TorusSelector::Second];

    pub fn available(region: Region) -> &'static [TorusSelector] {
        match region.torus_count() {
            2 => &Self::BOTH,
            1 => &Self::BOTH[..1],
            _ => &[],
        }
    }
}

impl FromStr for TorusSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "first" => Ok(TorusSelector::First),
            "2" | "second" => Ok(TorusSelector::Second),
            _ => Err(Error::InvalidParams(format!("unknown torus {s:?}"))),
        }
    }
}

impl fmt::Display for TorusSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TorusSelector::First => "first",
            TorusSelector::Second => "second",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusData {
    pub k_plus_sq: f64,
    pub k_minus_sq: f64,
    pub k_c_sq: f64,
    pub f_p0: f64,
    pub f_p1: f64,
    pub f_m0: f64,
}

/// Moduli and prefactors at `(g, h)`; entries are NaN where undefined.
pub fn modulus_data(g: f64, p: &Params) -> ModulusData {
    let (h, m, d) = (p.h, p.total_mass(), p.mass_difference());
    let a = -h;
    let r_p = (4.0 * g * h + m * m).sqrt();
    let r_m = (4.0 * g * h + d * d).sqrt();
    let r_c = ((g - h).powi(2) - d * d).sqrt();
    ModulusData {
        k_plus_sq: 0.5 + (g + h) / (2.0 * r_p),
        k_minus_sq: 0.5 + (g + h) / (2.0 * r_m),
        k_c_sq: 0.5 - (g + h) / (2.0 * r_c),
        f_p0: SQRT_2 / (r_p / a).sqrt(),
        f_p1: SQRT_2 / ((-1.0 - g / h) + r_p / a).sqrt(),
        f_m0: SQRT_2 / (r_m / a).sqrt(),
    }
}

// Raw closed forms. Radicands are clamped at zero so that boundary values
// evaluate to their limits.

fn clamp_sqrt(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

/// `K` at parameter `½ + s/(2r)` written through its complement
/// `(r − s)/(2r)`, with the cancellation removed when `s > 0` using
/// `r² − s² = d`.
fn k_half_plus(s: f64, r: f64, d: f64) -> f64 {
    if r == 0.0 {
        return if s < 0.0 { 0.0 } else { f64::INFINITY };
    }
    let m = 0.5 + s / (2.0 * r);
    if m < 0.0 {
        // Imaginary modulus: K(m) = K(1/(1 − m)) / √(1 − m) with 1 − m = (r − s)/(2r).
        let c = (r - s) / (2.0 * r);
        return k_complementary(1.0 / c) / c.sqrt();
    }
    let m1 = if s > 0.0 {
        d / (2.0 * r * (r + s))
    } else {
        (r - s) / (2.0 * r)
    };
    if m1 <= 0.0 {
        return f64::INFINITY;
    }
    k_complementary(m1.min(1.0))
}

/// `T_λ3` with no domain check.
pub fn t_lambda_crossing(g: f64, h: f64, m: f64) -> f64 {
    let r = clamp_sqrt(4.0 * g * h + m * m);
    let f0 = SQRT_2 / (r / -h).sqrt();
    let d = (m * m - (g - h).powi(2)).max(0.0);
    4.0 / (2.0 * -h).sqrt() * f0 * k_half_plus(g + h, r, d)
}

/// `T_λ0` with no domain check.
pub fn t_lambda_well(g: f64, h: f64, m: f64) -> f64 {
    let r = clamp_sqrt(4.0 * g * h + m * m);
    let s = g + h;
    let k2 = 0.5 + s / (2.0 * r);
    let f1 = SQRT_2 / clamp_sqrt((-1.0 - g / h) + r / -h);
    // Parameter 1/k², complement (k² − 1)/k² with k² − 1 = ((g − h)² − M²) / (2r(r + s)).
    let m1 = if r == 0.0 {
        1.0
    } else if s > 0.0 {
        ((g - h).powi(2) - m * m) / (2.0 * r * (r + s)) / k2
    } else {
        (k2 - 1.0) / k2
    };
    2.0 / (-h).sqrt() * f1 * k_complementary(m1.clamp(0.0, 1.0))
}

/// `T_νo` for arbitrary masses.
pub fn t_nu_oscillation(g: f64, h: f64, delta: f64) -> f64 {
    let r = clamp_sqrt(4.0 * g * h + delta * delta);
    let f0 = SQRT_2 / (r / -h).sqrt();
    let d = (delta * delta - (g - h).powi(2)).max(0.0);
    4.0 / (2.0 * -h).sqrt() * f0 * k_half_plus(g + h, r, d)
}

/// `T_νr` for arbitrary masses.
pub fn t_nu_rotation(g: f64, h: f64, delta: f64) -> f64 {
    let r = clamp_sqrt((g - h).powi(2) - delta * delta);
    // k_c² = ½ + (−(g + h))/(2r) and r² − (g + h)² = −4gh − Δ².
    let d = (-4.0 * g * h - delta * delta).max(0.0);
    4.0 / (SQRT_2 * r.sqrt()) * k_half_plus(-(g + h), r, d)
}

/// `T_νo` for equal masses.
pub fn t_nu_oscillation_symmetric(g: f64, h: f64) -> f64 {
    4.0 / (-2.0 * h).sqrt() * k_complementary((g / h).clamp(0.0, 1.0))
}

/// `T_νr` for equal masses.
pub fn t_nu_rotation_symmetric(g: f64, h: f64) -> f64 {
    let k2 = 1.0 - g / h;
    4.0 / (k2.sqrt() * (-2.0 * h).sqrt()) * k_complementary((-g / h / k2).clamp(0.0, 1.0))
}

fn raw_lambda(branch: LambdaBranch, g: f64, p: &Params) -> f64 {
    match branch {
        LambdaBranch::Crossing => t_lambda_crossing(g, p.h, p.total_mass()),
        LambdaBranch::Well => t_lambda_well(g, p.h, p.total_mass()),
    }
}

fn raw_nu(branch: NuBranch, g: f64, p: &Params) -> f64 {
    match (branch, p.is_symmetric()) {
        (NuBranch::Oscillation, true) => t_nu_oscillation_symmetric(g, p.h),
        (NuBranch::Oscillation, false) => t_nu_oscillation(g, p.h, p.mass_difference()),
        (NuBranch::Rotation, true) => t_nu_rotation_symmetric(g, p.h),
        (NuBranch::Rotation, false) => t_nu_rotation(g, p.h, p.mass_difference()),
    }
}

/// `T_λ` and its branch at `(g, p.h)`.
pub fn period_lambda(g: f64, p: &Params) -> Result<(f64, LambdaBranch)> {
    let c = critical_data(p);
    let h = p.h;
    if h > c.h_lambda {
        for (value, curve) in [(c.kappa_pp, Curve::KappaPP), (c.chi_p, Curve::ChiP)] {
            if (g - value).abs() < DIVERGENCE_TOL {
                return Err(Error::Divergence { g, h, curve });
            }
        }
    }
    let branch = match lambda_motion(g, &c, h) {
        LambdaMotion::Crossing => LambdaBranch::Crossing,
        LambdaMotion::Well => LambdaBranch::Well,
        LambdaMotion::None => {
            return Err(Error::RegionMismatch {
                g,
                h,
                branch: "lambda",
            })
        }
    };
    Ok((raw_lambda(branch, g, p), branch))
}

/// `T_ν` and its branch at `(g, p.h)`.
pub fn period_nu(g: f64, p: &Params) -> Result<(f64, NuBranch)> {
    let c = critical_data(p);
    let h = p.h;
    let (sep, curve) = nu_separatrix(&c, h);
    if (g - sep).abs() < DIVERGENCE_TOL {
        return Err(Error::Divergence { g, h, curve });
    }
    let branch = match nu_motion(g, &c, h) {
        NuMotion::SingleWell | NuMotion::TwoWells => NuBranch::Oscillation,
        NuMotion::Rotation => NuBranch::Rotation,
        NuMotion::None => return Err(Error::RegionMismatch { g, h, branch: "nu" }),
    };
    Ok((raw_nu(branch, g, p), branch))
}

/// Periods, rotation number and branches of the tori over one regular point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusData {
    pub g: f64,
    pub h: f64,
    pub region: Region,
    #[serde(rename = "T_lambda")]
    pub t_lambda: f64,
    #[serde(rename = "T_nu")]
    pub t_nu: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub lambda_branch: LambdaBranch,
    pub nu_branch: NuBranch,
}

pub fn branches(region: Region) -> Option<(LambdaBranch, NuBranch)> {
    match region {
        Region::S | Region::SPrime => Some((LambdaBranch::Crossing, NuBranch::Oscillation)),
        Region::L => Some((LambdaBranch::Crossing, NuBranch::Rotation)),
        Region::P => Some((LambdaBranch::Well, NuBranch::Rotation)),
        Region::Critical | Region::Empty => None,
    }
}

pub fn rotation_number(g: f64, p: &Params) -> Result<TorusData> {
    let region = classify(g, p);
    match region {
        Region::Critical => {
            let (_, curve) =
                nearest_critical(g, p, CRITICAL_TOL).expect("critical point has a nearby curve");
            return Err(Error::Divergence { g, h: p.h, curve });
        }
        Region::Empty => {
            return Err(Error::RegionMismatch {
                g,
                h: p.h,
                branch: "torus",
            })
        }
        _ => {}
    }
    let (t_lambda, lambda_branch) = period_lambda(g, p)?;
    let (t_nu, nu_branch) = period_nu(g, p)?;
    debug_assert_eq!(branches(region), Some((lambda_branch, nu_branch)));
    Ok(TorusData {
        g,
        h: p.h,
        region,
        t_lambda,
        t_nu,
        w: t_nu / t_lambda,
        lambda_branch,
        nu_branch,
    })
}

/// Limit of `W` at a region boundary.
fn boundary_w(g: f64, curves: &[Curve], region: Region, p: &Params) -> f64 {
    let c = critical_data(p);
    let (_, sep_curve) = nu_separatrix(&c, p.h);
    if curves.contains(&sep_curve) {
        return f64::INFINITY;
    }
    if curves.contains(&Curve::KappaPP) && p.h > c.h_lambda {
        return 0.0;
    }
    let (lb, nb) = branches(region).expect("regular region");
    raw_nu(nb, g, p) / raw_lambda(lb, g, p)
}

/// Open range `(W_min, W_max)` swept by `W` over `region` at this energy.
pub fn w_range(region: Region, p: &Params) -> Result<(f64, f64)> {
    let (lo, hi) = region_interval(region, p).ok_or(Error::RegionEmpty(region))?;
    let bounds = region_boundaries(p);
    let curves_at = |g: f64| -> Vec<Curve> {
        bounds
            .iter()
            .find(|b| b.g == g)
            .map(|b| b.curves.clone())
            .unwrap_or_default()
    };
    let a = boundary_w(lo, &curves_at(lo), region, p);
    let b = boundary_w(hi, &curves_at(hi), region, p);
    Ok((a.min(b), a.max(b)))
}

/// Result of [`solve_g`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GSolution {
    pub g: f64,
    #[serde(rename = "W")]
    pub w: f64,
    /// `W` was not strictly monotone on the scan grid.
    pub monotonicity_violation: bool,
}

/// Scan points in `(lo, hi)`, clustered geometrically toward both ends.
fn scan_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let half = 0.5 * (hi - lo);
    let first = 1.5 * CRITICAL_TOL * lo.abs().max(hi.abs()).max(1.0);
    let mut pts = Vec::with_capacity(2 * n);
    if half <= first {
        pts.push(lo + half);
        return pts;
    }
    let ratio = (half / first).ln();
    for i in 0..n {
        let d = first * (ratio * i as f64 / (n - 1) as f64).exp();
        pts.push(lo + d);
        pts.push(hi - d);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Find `g` in `region` with `W(g) = target`.
pub fn solve_g(region: Region, target: f64, p: &Params) -> Result<GSolution> {
    let (w_min, w_max) = w_range(region, p)?;
    if !(target > w_min && target < w_max) {
        return Err(Error::OutOfRange {
            target,
            min: w_min,
            max: w_max,
        });
    }
    let (lo, hi) = region_interval(region, p).ok_or(Error::RegionEmpty(region))?;
    let samples: Vec<(f64, f64)> = scan_grid(lo, hi, 160)
        .into_iter()
        .filter_map(|g| rotation_number(g, p).ok().map(|t| (g, t.w - target)))
        .collect();
    let violation = samples
        .windows(3)
        .any(|w| (w[1].1 - w[0].1) * (w[2].1 - w[1].1) <= 0.0);
    let (mut a, mut b) = samples
        .windows(2)
        .find(|w| w[0].1 * w[1].1 <= 0.0)
        .map(|w| (w[0], w[1]))
        .ok_or(Error::NoConvergence { iterations: 0 })?;
    for _ in 0..SOLVE_MAX_ITER {
        for s in [a, b] {
            if s.1.abs() <= SOLVE_TOL {
                return Ok(GSolution {
                    g: s.0,
                    w: s.1 + target,
                    monotonicity_violation: violation,
                });
            }
        }
        let mid = 0.5 * (a.0 + b.0);
        if mid <= a.0.min(b.0) || mid >= a.0.max(b.0) {
            // Adjacent floats: W is steeper than g can resolve here.
            let best = if a.1.abs() <= b.1.abs() { a } else { b };
            if best.1.abs() <= SOLVE_TOL * target.max(1.0) * 1e3 {
                return Ok(GSolution {
                    g: best.0,
                    w: best.1 + target,
                    monotonicity_violation: violation,
                });
            }
            break;
        }
        let fm = rotation_number(mid, p)?.w - target;
        if fm * a.1 <= 0.0 {
            b = (mid, fm);
        } else {
            a = (mid, fm);
        }
    }
    Err(Error::NoConvergence {
        iterations: SOLVE_MAX_ITER,
    })
}

/// Measured periods and window phases of one torus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredTorus {
    pub t_lambda: f64,
    pub t_nu: f64,
    pub w: f64,
    pub phases: WindowPhases,
}

/// Turning point `(λ, 0)` used as the zero of the λ-angle: the outer turning
/// point, on the side picked by `torus` for an off-axis well.
pub(crate) fn lambda_reference(g: f64, p: &Params, torus: TorusSelector) -> Result<(f64, f64)> {
    let c = critical_data(p);
    let (m, h) = (p.total_mass(), p.h);
    let motion = lambda_motion(g, &c, h);
    let cosh_max = (m + clamp_sqrt(m * m + 4.0 * g * h)) / (-2.0 * h);
    let l = cosh_max.max(1.0).acosh();
    match (motion, torus) {
        (LambdaMotion::None, _) => Err(Error::RegionMismatch {
            g,
            h,
            branch: "lambda",
        }),
        (LambdaMotion::Well, TorusSelector::Second) => Ok((-l, 0.0)),
        _ => Ok((l, 0.0)),
    }
}

/// Oscillating ν: center of the well selected by `torus`.
pub(crate) fn nu_well(g: f64, p: &Params, torus: TorusSelector) -> Result<Option<f64>> {
    let c = critical_data(p);
    let h = p.h;
    let delta = p.mass_difference();
    match (nu_motion(g, &c, h), torus) {
        (NuMotion::None, _) => Err(Error::RegionMismatch { g, h, branch: "nu" }),
        (NuMotion::Rotation, _) => Ok(None),
        (NuMotion::SingleWell, TorusSelector::Second) => Err(Error::NoSuchTorus(Region::SPrime)),
        (NuMotion::SingleWell, TorusSelector::First) => {
            Ok(Some(if delta > 0.0 { -FRAC_PI_2 } else { FRAC_PI_2 }))
        }
        (NuMotion::TwoWells, TorusSelector::First) => Ok(Some(-FRAC_PI_2)),
        (NuMotion::TwoWells, TorusSelector::Second) => Ok(Some(FRAC_PI_2)),
    }
}

/// Zero of the ν-angle: the lower turning point of an oscillation, or `ν = 0`
/// moving up for a rotation.
pub(crate) fn nu_reference(g: f64, p: &Params, torus: TorusSelector) -> Result<(f64, f64)> {
    let h = p.h;
    let delta = p.mass_difference();
    match nu_well(g, p, torus)? {
        None => Ok((0.0, (2.0 * g).max(0.0).sqrt())),
        Some(center) => {
            let disc = clamp_sqrt(delta * delta + 4.0 * h * g);
            let (r1, r2) = ((-delta + disc) / (2.0 * h), (-delta - disc) / (2.0 * h));
            let nu = if center < 0.0 {
                -FRAC_PI_2 - (-r1.min(r2)).clamp(-1.0, 1.0).acos()
            } else {
                FRAC_PI_2 - r1.max(r2).clamp(-1.0, 1.0).acos()
            };
            Ok((nu, 0.0))
        }
    }
}

pub(crate) fn measurement_solver() -> Dop853 {
    Dop853 {
        rtol: 1e-14,
        atol: 1e-14,
        h_max: 0.05,
        ..Dop853::default()
    }
}

/// Return time and window crossing times of the λ-motion.
fn measure_lambda(g: f64, p: &Params, torus: TorusSelector) -> Result<(f64, Vec<f64>)> {
    let (m, h) = (p.total_mass(), p.h);
    let field = move |y: &[f64; 2]| [y[1], m * y[0].sinh() + h * (2.0 * y[0]).sinh()];
    let (l0, p0) = lambda_reference(g, p, torus)?;
    let guess = rotation_number(g, p).map(|t| t.t_lambda).unwrap_or(100.0);
    let ev_axis = |y: &[f64; 2]| y[0];
    let ev_turn = |y: &[f64; 2]| y[1];
    let mut turns = 0;
    let run = measurement_solver().propagate(
        &field,
        0.0,
        [l0, p0],
        4.0 * guess,
        &[&ev_axis, &ev_turn],
        |_| Ok(()),
        |c| {
            if c.event == 1 {
                turns += 1;
                if turns == 2 {
                    return Flow::Stop;
                }
            }
            Flow::Continue
        },
    )?;
    if !run.stopped {
        return Err(Error::NoConvergence {
            iterations: run.crossings.len(),
        });
    }
    let axis = run
        .crossings
        .iter()
        .filter(|c| c.event == 0)
        .map(|c| c.t)
        .collect();
    Ok((run.t, axis))
}

/// Return time and window crossings `(time, symbol)` of the ν-motion.
fn measure_nu(g: f64, p: &Params, torus: TorusSelector) -> Result<(f64, Vec<(f64, Symbol)>)> {
    let (d, h) = (p.mass_difference(), p.h);
    let field = move |y: &[f64; 2]| [y[1], -d * y[0].cos() - h * (2.0 * y[0]).sin()];
    let (n0, q0) = nu_reference(g, p, torus)?;
    let guess = rotation_number(g, p).map(|t| t.t_nu).unwrap_or(100.0);
    let solver = measurement_solver();
    match nu_well(g, p, torus)? {
        Some(center) => {
            let symbol = if center < 0.0 {
                Symbol::One
            } else {
                Symbol::Two
            };
            let ev_center = move |y: &[f64; 2]| y[0] - center;
            let ev_turn = |y: &[f64; 2]| y[1];
            let mut turns = 0;
            let run = solver.propagate(
                &field,
                0.0,
                [n0, q0],
                4.0 * guess,
                &[&ev_center, &ev_turn],
                |_| Ok(()),
                |c| {
                    if c.event == 1 {
                        turns += 1;
                        if turns == 2 {
                            return Flow::Stop;
                        }
                    }
                    Flow::Continue
                },
            )?;
            if !run.stopped {
                return Err(Error::NoConvergence {
                    iterations: run.crossings.len(),
                });
            }
            let hits = run
                .crossings
                .iter()
                .filter(|c| c.event == 0)
                .map(|c| (c.t, symbol))
                .collect();
            Ok((run.t, hits))
        }
        None => {
            let ev_two = |y: &[f64; 2]| ((y[0] - FRAC_PI_2) / 2.0).sin();
            let ev_one = |y: &[f64; 2]| ((y[0] + FRAC_PI_2) / 2.0).sin();
            let ev_full = |y: &[f64; 2]| y[0] - TAU;
            let run = solver.propagate(
                &field,
                0.0,
                [n0, q0],
                4.0 * guess,
                &[&ev_one, &ev_two, &ev_full],
                |_| Ok(()),
                |c| {
                    if c.event == 2 {
                        Flow::Stop
                    } else {
                        Flow::Continue
                    }
                },
            )?;
            if !run.stopped {
                return Err(Error::NoConvergence {
                    iterations: run.crossings.len(),
                });
            }
            let hits = run
                .crossings
                .iter()
                .filter(|c| c.event < 2)
                .map(|c| {
                    (
                        c.t,
                        if c.event == 0 {
                            Symbol::One
                        } else {
                            Symbol::Two
                        },
                    )
                })
                .collect();
            Ok((run.t, hits))
        }
    }
}

/// Periods and window phases measured by integrating each separated motion
/// over one period from its reference point.
pub fn measure_torus(g: f64, p: &Params, torus: TorusSelector) -> Result<MeasuredTorus> {
    let region = classify(g, p);
    if !TorusSelector::available(region).contains(&torus) {
        return rotation_number(g, p).and(Err(Error::NoSuchTorus(region)));
    }
    let (t_lambda, axis) = measure_lambda(g, p, torus)?;
    let (t_nu, hits) = measure_nu(g, p, torus)?;
    let frac = |t: f64, period: f64| (t / period).rem_euclid(1.0);
    let horizontal = axis
        .into_iter()
        .map(|t| (frac(t, t_lambda), Symbol::Three))
        .collect();
    let vertical = hits.into_iter().map(|(t, s)| (frac(t, t_nu), s)).collect();
    let phases = WindowPhases::new(vertical, horizontal)?;
    Ok(MeasuredTorus {
        t_lambda,
        t_nu,
        w: t_nu / t_lambda,
        phases,
    })
}

/// Window phases of a torus, each in units of its motion's period.
pub fn window_phases(g: f64, p: &Params, torus: TorusSelector) -> Result<WindowPhases> {
    measure_torus(g, p, torus).map(|m| m.phases)
}

/// One point of a rotation-number atlas. Numeric fields are empty off the
/// regular regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtlasRow {
    pub g: f64,
    pub h: f64,
    pub region: Region,
    pub torus_count: usize,
    #[serde(rename = "T_lambda")]
    pub t_lambda: Option<f64>,
    #[serde(rename = "T_nu")]
    pub t_nu: Option<f64>,
    #[serde(rename = "W")]
    pub w: Option<f64>,
}

impl AtlasRow {
    pub fn new(g: f64, p: &Params) -> Self {
        let region = classify(g, p);
        let td = region
            .is_regular()
            .then(|| rotation_number(g, p).ok())
            .flatten();
        AtlasRow {
            g,
            h: p.h,
            region,
            torus_count: region.torus_count(),
            t_lambda: td.map(|t| t.t_lambda),
            t_nu: td.map(|t| t.t_nu),
            w: td.map(|t| t.w),
        }
    }
}

/// Evenly spaced samples of `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Atlas over the grid `gs × hs`, ordered by `h` and then by `g`.
pub fn atlas(m1: f64, m2: f64, gs: &[f64], hs: &[f64], exec: Execution) -> Result<Vec<AtlasRow>> {
    let params = hs
        .iter()
        .map(|&h| Params::new(m1, m2, h))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, &Params)> = params
        .iter()
        .flat_map(|p| gs.iter().map(move |&g| (g, p)))
        .collect();
    Ok(map_with(exec, &points, |&(g, p)| AtlasRow::new(g, p)))
}

/// The three tabulated boundary values of `W` for equal masses, used as
/// independent checks on [`w_range`].
pub mod boundary_formulas {
    use super::*;

    /// Infimum of `W_L` for `h* < h < h_λ`.
    pub fn w_l_min(h: f64) -> f64 {
        (-4.0 * h - 2.0).sqrt() * k_unchecked(-h) / PI
    }

    /// Infimum of `W_S` for `h < h*`.
    pub fn w_s_min(h: f64) -> f64 {
        let s = (4.0 * h * h + 1.0).sqrt();
        PI * s.sqrt() / (2.0 * (-2.0 * h).sqrt() * k_unchecked(0.5 + h / s))
    }

    /// Supremum of `W_S` for `h < h*`.
    pub fn w_s_max(h: f64) -> f64 {
        ((4.0 * h + 2.0) / h).sqrt() * k_unchecked(-1.0 / h) / PI
    }

    /// Supremum of `W_P` for `h > h_λ`.
    pub fn w_p_max(h: f64) -> f64 {
        let q = 4.0 * h * h;
        2.0 / PI * ((1.0 - q) / (1.0 + q)).sqrt() * k_unchecked(1.0 / (1.0 + 1.0 / q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(h: f64) -> Params {
        Params::equal(h).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn reference_lambda_periods() {
        let p = eq(-0.23);
        assert!(close(
            period_lambda(-0.1, &p).unwrap().0,
            6.806_071_283_536,
            1e-11
        ));
        assert!(close(
            period_lambda(0.4, &p).unwrap().0,
            8.780_054_529_736,
            1e-11
        ));
        let (t, b) = period_lambda(0.9, &p).unwrap();
        assert_eq!(b, LambdaBranch::Well);
        assert!(close(t, 5.930_189_946_291, 1e-11));
    }

    #[test]
    fn lambda_periods_do_not_depend_on_mass_split() {
        let a = Params::new(0.3, 0.7, -0.23).unwrap();
        for g in [-0.1, 0.4, 0.9] {
            assert_eq!(
                period_lambda(g, &a).unwrap(),
                period_lambda(g, &eq(-0.23)).unwrap()
            );
        }
    }

    #[test]
    fn divergence_near_kappa_pp() {
        let p = eq(-0.23);
        assert!(matches!(
            period_lambda(0.77, &p),
            Err(Error::Divergence {
                curve: Curve::KappaPP,
                ..
            })
        ));
        let a = period_lambda(0.77 - 1e-4, &p).unwrap().0;
        let b = period_lambda(0.77 - 1e-8, &p).unwrap().0;
        assert!(b > a + 5.0);
        assert!(matches!(
            period_lambda(2.0, &p),
            Err(Error::RegionMismatch { .. })
        ));
    }

    #[test]
    fn nu_period_examples() {
        let p = eq(-0.25);
        let harmonic = 2.0 * PI / 0.5f64.sqrt();
        assert!(close(
            period_nu(-0.25 + 1e-12, &p).unwrap().0,
            harmonic,
            1e-9
        ));
        let expect = 4.0 / 0.5f64.sqrt() * crate::elliptic::complete_k(0.6).unwrap();
        assert!(close(period_nu(-0.1, &p).unwrap().0, expect, 1e-14));
        assert!(close(
            period_nu(-0.15, &eq(-0.23)).unwrap().0,
            10.279_493_962_7,
            1e-10
        ));
        assert!(matches!(
            period_nu(0.0, &p),
            Err(Error::Divergence {
                curve: Curve::ChiM,
                ..
            })
        ));
        assert!(matches!(
            period_nu(-0.3, &p),
            Err(Error::RegionMismatch { .. })
        ));
    }

    #[test]
    fn asymmetric_forms_reduce_to_symmetric() {
        for h in [-0.23, -0.6, -1.2] {
            for i in 1..20 {
                let g = h * (1.0 - i as f64 / 20.0);
                let a = t_nu_oscillation(g, h, 0.0);
                let b = t_nu_oscillation_symmetric(g, h);
                assert!(close(a, b, 1e-12), "osc h={h} g={g}: {a} vs {b}");
                let g = 0.05 * i as f64;
                let a = t_nu_rotation(g, h, 0.0);
                let b = t_nu_rotation_symmetric(g, h);
                assert!(close(a, b, 1e-12), "rot h={h} g={g}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rotation_number_branches() {
        let p = eq(-0.23);
        let s = rotation_number(-0.1, &p).unwrap();
        assert_eq!(
            (s.region, s.lambda_branch, s.nu_branch),
            (Region::S, LambdaBranch::Crossing, NuBranch::Oscillation)
        );
        let l = rotation_number(0.4, &p).unwrap();
        assert_eq!(
            (l.lambda_branch, l.nu_branch),
            (LambdaBranch::Crossing, NuBranch::Rotation)
        );
        let pp = rotation_number(0.9, &p).unwrap();
        assert_eq!(
            (pp.lambda_branch, pp.nu_branch),
            (LambdaBranch::Well, NuBranch::Rotation)
        );
        assert!(matches!(
            rotation_number(0.77, &p),
            Err(Error::Divergence { .. })
        ));
        assert!(matches!(
            rotation_number(-1.0, &p),
            Err(Error::RegionMismatch { .. })
        ));
    }

    #[test]
    fn w_limits_in_l() {
        let p = eq(-0.23);
        assert!(rotation_number(1.2e-10, &p).unwrap().w > 10.0);
        assert!(rotation_number(0.77 - 1e-7, &p).unwrap().w < 0.1);
        assert_eq!(w_range(Region::L, &p).unwrap(), (0.0, f64::INFINITY));
    }

    #[test]
    fn tabulated_ranges() {
        let (lo, hi) = w_range(Region::L, &eq(-0.6)).unwrap();
        assert_eq!(hi, f64::INFINITY);
        assert!(close(lo, boundary_formulas::w_l_min(-0.6), 1e-12));
        assert!(close(lo, 0.392_480_835_168_22, 1e-11));

        let (lo, hi) = w_range(Region::S, &eq(-1.2)).unwrap();
        assert!(close(lo, boundary_formulas::w_s_min(-1.2), 1e-12));
        assert!(close(hi, boundary_formulas::w_s_max(-1.2), 1e-12));
        assert!(close(lo, 1.030_702_089_877_7, 1e-11));
        assert!(close(hi, 1.138_011_423_188_6, 1e-11));

        let (lo, hi) = w_range(Region::P, &eq(-0.23)).unwrap();
        assert_eq!(lo, 0.0);
        assert!(close(hi, boundary_formulas::w_p_max(-0.23), 1e-12));
        assert!(close(hi, 0.845_830_905_416_4, 1e-11));

        assert!(matches!(
            w_range(Region::P, &eq(-0.6)),
            Err(Error::RegionEmpty(Region::P))
        ));
    }

    #[test]
    fn solve_round_trip() {
        let p = eq(-0.23);
        let one = solve_g(Region::L, 1.0, &p).unwrap();
        assert!(one.g > 0.0 && one.g < 0.77);
        assert!((rotation_number(one.g, &p).unwrap().w - 1.0).abs() <= 1e-11);
        let half = solve_g(Region::L, 0.5, &p).unwrap();
        assert!(half.g > one.g);
        assert!(!one.monotonicity_violation);
        assert!(matches!(
            solve_g(Region::L, 0.0, &p),
            Err(Error::OutOfRange { .. })
        ));
        let s = solve_g(Region::S, 2.0, &p).unwrap();
        assert!((rotation_number(s.g, &p).unwrap().w - 2.0).abs() <= 1e-11);
    }

    #[test]
    fn measured_phases_equal_masses() {
        let p = eq(-0.23);
        let l = measure_torus(0.4, &p, TorusSelector::First).unwrap();
        let t = rotation_number(0.4, &p).unwrap();
        assert!(close(l.t_lambda, t.t_lambda, 1e-10));
        assert!(close(l.t_nu, t.t_nu, 1e-10));
        assert!((l.phases.horizontal_separation().unwrap() - 0.5).abs() < 1e-9);
        assert!((l.phases.vertical_separation().unwrap() - 0.5).abs() < 1e-9);
        assert!((l.phases.horizontal[0].0 - 0.25).abs() < 1e-9);

        let s2 = measure_torus(-0.1, &p, TorusSelector::Second).unwrap();
        assert!(s2.phases.vertical.iter().all(|v| v.1 == Symbol::Two));
        assert!((s2.phases.vertical_separation().unwrap() - 0.5).abs() < 1e-9);

        let pl = measure_torus(0.9, &p, TorusSelector::Second).unwrap();
        assert!(pl.phases.horizontal.is_empty());
        assert!(matches!(
            measure_torus(0.4, &p, TorusSelector::Second),
            Err(Error::NoSuchTorus(Region::L))
        ));
    }
}
