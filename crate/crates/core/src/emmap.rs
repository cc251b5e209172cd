//! Energy-momentum map: critical values of `(g, h)` and the region of each
//! regular point.
//!
//! With `M = m1 + m2` and `Δ = |m1 − m2|`:
//!
//! ```text
//! h* = −(√m1 + √m2)²/2    h_λ = −M/2    h_ν = −Δ/2
//! κ_{+σ} = h + σM         κ_{−σ} = h + σΔ
//! χ_+ = −M²/(4h)          χ_− = −Δ²/(4h)
//! ```
//!
//! The λ-motion crosses `λ = 0` below `κ_{++}` and sits in an off-axis well
//! between `κ_{++}` and `χ_+` (only when `h > h_λ`). The ν-motion is confined to
//! the deeper well between `κ_{−−}` and `κ_{−+}`, to either well between
//! `κ_{−+}` and `χ_−` (only when `h < h_ν`), and rotates above.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::Params;

/// Points closer than this to an active critical curve classify as `Critical`.
pub const CRITICAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalData {
    pub h_star: f64,
    pub h_lambda: f64,
    pub h_nu: f64,
    pub kappa_pp: f64,
    pub kappa_mp: f64,
    pub kappa_mm: f64,
    pub chi_p: f64,
    pub chi_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    S,
    SPrime,
    L,
    P,
    Critical,
    Empty,
}

impl Region {
    pub fn torus_count(self) -> usize {
        match self {
            Region::S | Region::P => 2,
            Region::SPrime | Region::L => 1,
            Region::Critical | Region::Empty => 0,
        }
    }

    pub fn is_regular(self) -> bool {
        self.torus_count() > 0
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::S => "S",
            Region::SPrime => "S'",
            Region::L => "L",
            Region::P => "P",
            Region::Critical => "Critical",
            Region::Empty => "Empty",
        }
    }

    pub const REGULAR: [Region; 4] = [Region::S, Region::SPrime, Region::L, Region::P];
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "S" | "s" => Region::S,
            "S'" | "s'" | "Sprime" | "sprime" => Region::SPrime,
            "L" | "l" => Region::L,
            "P" | "p" => Region::P,
            _ => return Err(Error::InvalidParams(format!("unknown region {s:?}"))),
        })
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Curve {
    KappaPP,
    KappaMP,
    KappaMM,
    ChiP,
    ChiM,
}

impl Curve {
    pub fn label(self) -> &'static str {
        match self {
            Curve::KappaPP => "kappa_++",
            Curve::KappaMP => "kappa_-+",
            Curve::KappaMM => "kappa_--",
            Curve::ChiP => "chi_+",
            Curve::ChiM => "chi_-",
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Curve {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// A point of the integral map with its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralPoint {
    pub g: f64,
    pub h: f64,
    pub region: Region,
}

impl IntegralPoint {
    pub fn new(g: f64, p: &Params) -> Self {
        Self {
            g,
            h: p.h,
            region: classify(g, p),
        }
    }
}

/// A value of `g` where the classification changes at fixed `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boundary {
    pub g: f64,
    pub curves: Vec<Curve>,
}

pub fn critical_data(p: &Params) -> CriticalData {
    let (m, d, h) = (p.total_mass(), p.mass_difference().abs(), p.h);
    CriticalData {
        h_star: -0.5 * (m + 2.0 * (p.m1 * p.m2).sqrt()),
        h_lambda: -0.5 * m,
        h_nu: 0.0 - 0.5 * d,
        kappa_pp: h + m,
        kappa_mp: h + d,
        kappa_mm: h - d,
        chi_p: -m * m / (4.0 * h),
        chi_m: -d * d / (4.0 * h),
    }
}

/// Kind of λ-motion at level `−g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LambdaMotion {
    Crossing,
    Well,
    None,
}

/// Kind of ν-motion at level `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NuMotion {
    SingleWell,
    TwoWells,
    Rotation,
    None,
}

pub(crate) fn lambda_motion(g: f64, c: &CriticalData, h: f64) -> LambdaMotion {
    if g < c.kappa_pp {
        LambdaMotion::Crossing
    } else if h > c.h_lambda && g < c.chi_p {
        LambdaMotion::Well
    } else {
        LambdaMotion::None
    }
}

pub(crate) fn nu_motion(g: f64, c: &CriticalData, h: f64) -> NuMotion {
    if g < c.kappa_mm {
        NuMotion::None
    } else if g < c.kappa_mp {
        NuMotion::SingleWell
    } else if h < c.h_nu && g < c.chi_m {
        NuMotion::TwoWells
    } else {
        NuMotion::Rotation
    }
}

/// Value of `g` where the ν-motion switches from oscillation to rotation.
pub(crate) fn nu_separatrix(c: &CriticalData, h: f64) -> (f64, Curve) {
    if h < c.h_nu {
        (c.chi_m, Curve::ChiM)
    } else {
        (c.kappa_mp, Curve::KappaMP)
    }
}

/// Active critical curves at this energy, merged where they coincide and
/// sorted by `g`.
pub fn region_boundaries(p: &Params) -> Vec<Boundary> {
    let c = critical_data(p);
    let h = p.h;
    let mut raw = vec![
        (c.kappa_mm, Curve::KappaMM),
        (c.kappa_mp, Curve::KappaMP),
        (c.kappa_pp, Curve::KappaPP),
    ];
    if h < c.h_nu && c.chi_m < c.kappa_pp {
        raw.push((c.chi_m, Curve::ChiM));
    }
    if h > c.h_lambda {
        raw.push((c.chi_p, Curve::ChiP));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<Boundary> = Vec::new();
    for (g, curve) in raw {
        match out.last_mut() {
            Some(last) if (g - last.g).abs() <= CRITICAL_TOL => last.curves.push(curve),
            _ => out.push(Boundary {
                g,
                curves: vec![curve],
            }),
        }
    }
    out
}

/// Nearest active critical curve within `tol` of `g`, if any.
pub fn nearest_critical(g: f64, p: &Params, tol: f64) -> Option<(f64, Curve)> {
    region_boundaries(p)
        .into_iter()
        .filter(|b| (g - b.g).abs() < tol)
        .min_by(|a, b| (g - a.g).abs().total_cmp(&(g - b.g).abs()))
        .map(|b| (b.g, b.curves[0]))
}

/// Region of the point `(g, p.h)`.
pub fn classify(g: f64, p: &Params) -> Region {
    if !g.is_finite() {
        return Region::Empty;
    }
    if nearest_critical(g, p, CRITICAL_TOL).is_some() {
        return Region::Critical;
    }
    classify_raw(g, p)
}

/// Classification without the critical tolerance band.
pub(crate) fn classify_raw(g: f64, p: &Params) -> Region {
    let c = critical_data(p);
    match (lambda_motion(g, &c, p.h), nu_motion(g, &c, p.h)) {
        (LambdaMotion::Crossing, NuMotion::TwoWells) => Region::S,
        (LambdaMotion::Crossing, NuMotion::SingleWell) => Region::SPrime,
        (LambdaMotion::Crossing, NuMotion::Rotation) => Region::L,
        (LambdaMotion::Well, NuMotion::Rotation) => Region::P,
        _ => Region::Empty,
    }
}

/// Open `g`-interval occupied by `region` at this energy.
pub fn region_interval(region: Region, p: &Params) -> Option<(f64, f64)> {
    let b = region_boundaries(p);
    b.windows(2)
        .map(|w| (w[0].g, w[1].g))
        .find(|&(lo, hi)| classify_raw(0.5 * (lo + hi), p) == region)
}

/// Regular regions present at this energy, in order of increasing `g`.
pub fn regions_present(p: &Params) -> Vec<Region> {
    let b = region_boundaries(p);
    b.windows(2)
        .map(|w| classify_raw(0.5 * (w[0].g + w[1].g), p))
        .filter(|r| r.is_regular())
        .collect()
}
