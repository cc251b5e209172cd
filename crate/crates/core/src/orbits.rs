//! Integration of the regularized flow, syzygy words, periodic and collision
//! orbits, and the end-to-end check of predicted against integrated words.
//!
//! Symbols: 1 when `ν ≡ −π/2` (the x-axis left of the left center), 2 when
//! `ν ≡ π/2` (right of the right center), 3 when `λ = 0` (between the centers).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::emmap::{classify, region_interval, regions_present, Region};
use crate::error::{Error, Result};
use crate::model::{
    from_regularized, hamiltonian, second_integral, separated_hamiltonians, time_factor,
    vector_field, wrap_angle, Params, PhaseState,
};
use crate::ode::{Dop853, Flow, Step};
use crate::parallel::{map_with, Execution};
use crate::periods::{
    lambda_reference, measure_torus, measurement_solver, nu_reference, nu_well, rotation_number,
    solve_g, w_range, TorusData, TorusSelector,
};
use crate::sturmian::{
    cutting_sequence, family_word, is_balanced, Family, Rational, Symbol, SymbolWord, WindowPhases,
};

/// Time-factor floor for an accepted trajectory.
pub const COLLISION_GUARD: f64 = 1e-10;

/// Starts further than this from the zero level of `H_λ + H_ν` are refused.
pub const ADMISSIBLE_TOL: f64 = 1e-9;

/// Closure tolerance of periodic orbits in phase space.
pub const CLOSURE_TOL: f64 = 1e-6;

/// Default local error tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Fictitious time after a launch from a center during which the guard is off.
const LAUNCH_GRACE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyzygyEvent {
    pub tau: f64,
    pub t: f64,
    pub symbol: Symbol,
    pub state: PhaseState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub events: Vec<SyzygyEvent>,
    pub closed: bool,
}

/// Worst drifts of the conserved quantities along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conservation {
    /// `max |H_λ + H_ν|`.
    pub separation: f64,
    pub h_lambda_drift: f64,
    pub h_nu_drift: f64,
    /// `max |H − h|` of the Cartesian image.
    pub energy_drift: f64,
    /// `max |G − G₀|` of the Cartesian image.
    pub second_integral_drift: f64,
}

impl Trajectory {
    pub fn start(&self) -> &PhaseState {
        &self.samples[0]
    }

    pub fn end(&self) -> &PhaseState {
        self.samples.last().expect("trajectory has a start")
    }

    pub fn conservation(&self, p: &Params) -> Conservation {
        let (l0, n0) = separated_hamiltonians(self.start(), p);
        let mut out = Conservation {
            separation: 0.0,
            h_lambda_drift: 0.0,
            h_nu_drift: 0.0,
            energy_drift: 0.0,
            second_integral_drift: 0.0,
        };
        let mut g0 = None;
        for s in &self.samples {
            let (hl, hn) = separated_hamiltonians(s, p);
            out.separation = out.separation.max((hl + hn).abs());
            out.h_lambda_drift = out.h_lambda_drift.max((hl - l0).abs());
            out.h_nu_drift = out.h_nu_drift.max((hn - n0).abs());
            // The Cartesian momenta blow up at the centers; skip close passes.
            if time_factor(s) < 1e-6 {
                continue;
            }
            let c = from_regularized(s);
            if let (Ok(e), Ok(g)) = (hamiltonian(&c, p), second_integral(&c, p)) {
                out.energy_drift = out.energy_drift.max((e - p.h).abs());
                let g0 = *g0.get_or_insert(g);
                out.second_integral_drift = out.second_integral_drift.max((g - g0).abs());
            }
        }
        out
    }

    /// `tau, t, lambda, nu, x, y` with a header row.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["tau", "t", "lambda", "nu", "x", "y"])?;
        for s in &self.samples {
            let c = from_regularized(s);
            wr.serialize((s.tau, s.t, s.lambda, s.nu, c.x, c.y))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// The `(x, y)` projection as one SVG path, with syzygies marked.
    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .map(from_regularized)
            .map(|c| (c.x, -c.y))
            .collect();
        let ext = pts
            .iter()
            .fold(1.5f64, |m, &(x, y)| m.max(x.abs()).max(y.abs()))
            * 1.05;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.4} {:.4} {:.4} {:.4}">"#,
            -ext,
            -ext,
            2.0 * ext,
            2.0 * ext
        );
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.5},{:.5} ", if i == 0 { "M" } else { "L" }, x, y);
        }
        let stroke = ext / 400.0;
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="black" stroke-width="{stroke:.5}"/>"#,
            d.trim_end()
        );
        for (cx, label) in [(-1.0, "m1"), (1.0, "m2")] {
            let _ = writeln!(
                out,
                r#"<circle cx="{cx}" cy="0" r="{:.5}" fill="red"><title>{label}</title></circle>"#,
                4.0 * stroke
            );
        }
        for e in &self.events {
            let c = from_regularized(&e.state);
            let _ = writeln!(
                out,
                r#"<circle cx="{:.5}" cy="{:.5}" r="{:.5}" fill="blue"><title>{}</title></circle>"#,
                c.x,
                -c.y,
                2.5 * stroke,
                e.symbol
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// The ordered event symbols of a trajectory.
pub fn syzygy_word(t: &Trajectory) -> SymbolWord {
    SymbolWord::new(t.events.iter().map(|e| e.symbol).collect(), false)
}

#[derive(Debug, Clone, Copy)]
struct RunOptions {
    tol: f64,
    guard: bool,
    stop_at_collision: bool,
}

fn to_vec(s: &PhaseState) -> [f64; 5] {
    [s.lambda, s.nu, s.p_lambda, s.p_nu, s.t]
}

fn from_vec(y: &[f64; 5], tau: f64) -> PhaseState {
    PhaseState {
        lambda: y[0],
        nu: y[1],
        p_lambda: y[2],
        p_nu: y[3],
        tau,
        t: y[4],
    }
}

/// Smallest time factor along the straight-line extrapolation of a step.
/// Near a center the factor is `|u|²` with `u = (sinh λ, cos ν)`.
fn min_factor_on_step(step: &Step<5>) -> f64 {
    let y = &step.y0;
    let u = [y[0].sinh(), y[1].cos()];
    let f0 = u[0] * u[0] + u[1] * u[1];
    let f1 = {
        let e = &step.y1;
        e[0].sinh().powi(2) + e[1].cos().powi(2)
    };
    let mut best = f0.min(f1);
    if f0 < 0.05 {
        let v = [y[0].cosh() * y[2], -y[1].sin() * y[3]];
        let vv = v[0] * v[0] + v[1] * v[1];
        if vv > 0.0 {
            let s = (-(u[0] * v[0] + u[1] * v[1]) / vv).clamp(0.0, step.t1 - step.t0);
            let w = [u[0] + s * v[0], u[1] + s * v[1]];
            best = best.min(w[0] * w[0] + w[1] * w[1]);
        }
    }
    best
}

fn run(start: &PhaseState, p: &Params, tau_span: f64, opts: RunOptions) -> Result<Trajectory> {
    let params = *p;
    let field = move |y: &[f64; 5]| vector_field(&params, y);
    let ev3 = |y: &[f64; 5]| y[0];
    let ev1 = |y: &[f64; 5]| ((y[1] + FRAC_PI_2) / 2.0).sin();
    let ev2 = |y: &[f64; 5]| ((y[1] - FRAC_PI_2) / 2.0).sin();
    let symbols = [Symbol::Three, Symbol::One, Symbol::Two];
    let solver = Dop853 {
        rtol: opts.tol,
        atol: opts.tol,
        ..Dop853::default()
    };
    let tau0 = start.tau;
    let mut samples = vec![*start];
    let run = solver.propagate(
        &field,
        tau0,
        to_vec(start),
        tau0 + tau_span,
        &[&ev3, &ev1, &ev2],
        |step| {
            if opts.guard && step.t0 - tau0 >= LAUNCH_GRACE {
                let f = min_factor_on_step(step);
                if f < COLLISION_GUARD {
                    return Err(Error::CollisionApproach {
                        tau: step.t0,
                        factor: f,
                    });
                }
            }
            samples.push(from_vec(&step.y1, step.t1));
            Ok(())
        },
        |c| {
            if opts.stop_at_collision
                && c.t - tau0 >= LAUNCH_GRACE
                && time_factor(&from_vec(&c.y, c.t)) < COLLISION_GUARD
            {
                Flow::Stop
            } else {
                Flow::Continue
            }
        },
    )?;
    if run.stopped {
        while samples.last().is_some_and(|s| s.tau > run.t) {
            samples.pop();
        }
        samples.push(from_vec(&run.y, run.t));
    }
    let events = run
        .crossings
        .iter()
        .map(|c| SyzygyEvent {
            tau: c.t,
            t: c.y[4],
            symbol: symbols[c.event],
            state: from_vec(&c.y, c.t),
        })
        .collect();
    Ok(Trajectory {
        samples,
        events,
        closed: false,
    })
}

/// Integrate the regularized flow for `tau_span` in fictitious time.
pub fn integrate(start: &PhaseState, p: &Params, tau_span: f64, tol: f64) -> Result<Trajectory> {
    let (hl, hn) = separated_hamiltonians(start, p);
    if (hl + hn).abs() > ADMISSIBLE_TOL {
        return Err(Error::InadmissibleStart(hl + hn));
    }
    if time_factor(start) < COLLISION_GUARD {
        return Err(Error::Collision);
    }
    run(
        start,
        p,
        tau_span,
        RunOptions {
            tol,
            guard: true,
            stop_at_collision: false,
        },
    )
}

/// Flow a 1-dof motion for time `dt`.
fn flow_1dof<F: Fn(&[f64; 2]) -> [f64; 2]>(field: F, y0: [f64; 2], dt: f64) -> Result<[f64; 2]> {
    if dt <= 0.0 {
        return Ok(y0);
    }
    measurement_solver().flow(&field, y0, dt)
}

/// State at angles `(θ_ν, θ_λ)` on the torus, measured from the reference
/// points of each motion.
pub fn torus_state(
    g: f64,
    p: &Params,
    torus: TorusSelector,
    theta_nu: f64,
    theta_lambda: f64,
) -> Result<PhaseState> {
    let td = rotation_number(g, p)?;
    if !TorusSelector::available(td.region).contains(&torus) {
        return Err(Error::NoSuchTorus(td.region));
    }
    let (m, d, h) = (p.total_mass(), p.mass_difference(), p.h);
    let l0 = lambda_reference(g, p, torus)?;
    let n0 = nu_reference(g, p, torus)?;
    let l = flow_1dof(
        move |y: &[f64; 2]| [y[1], m * y[0].sinh() + h * (2.0 * y[0]).sinh()],
        [l0.0, l0.1],
        theta_lambda.rem_euclid(1.0) * td.t_lambda,
    )?;
    let n = flow_1dof(
        move |y: &[f64; 2]| [y[1], -d * y[0].cos() - h * (2.0 * y[0]).sin()],
        [n0.0, n0.1],
        theta_nu.rem_euclid(1.0) * td.t_nu,
    )?;
    Ok(PhaseState::new(l[0], n[0], l[1], n[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitSpec {
    pub g: Option<f64>,
    pub region: Option<Region>,
    #[serde(rename = "W")]
    pub w: Option<Rational>,
    /// `(θ_ν, θ_λ)` in `[0, 1)²`.
    pub phases: (f64, f64),
    pub torus: TorusSelector,
}

impl OrbitSpec {
    pub fn from_w(region: Region, w: Rational, phases: (f64, f64), torus: TorusSelector) -> Self {
        Self {
            g: None,
            region: Some(region),
            w: Some(w),
            phases,
            torus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub torus: TorusData,
    #[serde(rename = "W")]
    pub w: Rational,
    pub selector: TorusSelector,
    /// `p T_λ`.
    pub tau_period: f64,
    /// Physical time elapsed over one period.
    pub t_period: f64,
    pub closure_error: f64,
    pub word: SymbolWord,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

fn closure_error(a: &PhaseState, b: &PhaseState) -> f64 {
    [
        (a.lambda - b.lambda).abs(),
        wrap_angle(a.nu - b.nu).abs(),
        (a.p_lambda - b.p_lambda).abs(),
        (a.p_nu - b.p_nu).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Resolve `g` for a spec: given directly, or solved from the region and `W`.
fn resolve_g(spec: &OrbitSpec, p: &Params) -> Result<f64> {
    match (spec.g, spec.region, spec.w) {
        (Some(g), _, _) => Ok(g),
        (None, Some(region), Some(w)) => Ok(solve_g(region, w.value(), p)?.g),
        _ => Err(Error::InvalidParams(
            "orbit needs g, or a region and a rational W".into(),
        )),
    }
}

/// Integrate one period `p T_λ = q T_ν` of the torus line through `spec.phases`.
pub fn periodic_orbit(spec: &OrbitSpec, p: &Params) -> Result<PeriodicOrbit> {
    let w = spec
        .w
        .ok_or_else(|| Error::InvalidParams("periodic orbit needs a rational W".into()))?;
    let g = resolve_g(spec, p)?;
    let td = rotation_number(g, p)?;
    if let Some(r) = spec.region {
        if r != td.region {
            return Err(Error::RegionMismatch {
                g,
                h: p.h,
                branch: "region",
            });
        }
    }
    let start = torus_state(g, p, spec.torus, spec.phases.0, spec.phases.1)?;
    let tau_period = w.p() as f64 * td.t_lambda;
    let mut trajectory = integrate(&start, p, tau_period, DEFAULT_TOL)?;
    let err = closure_error(trajectory.start(), trajectory.end());
    if err > CLOSURE_TOL {
        return Err(Error::ClosureFailure(err));
    }
    trajectory.closed = true;
    let word = syzygy_word(&trajectory).as_cyclic();
    let t_period = trajectory.end().t - trajectory.start().t;
    Ok(PeriodicOrbit {
        torus: td,
        w,
        selector: spec.torus,
        tau_period,
        t_period,
        closure_error: err,
        word,
        trajectory,
    })
}

/// Offsets `b mod 1/q` of the lines of slope `p/q` through window intersections.
fn intersection_offsets(w: &WindowPhases, r: Rational) -> Vec<f64> {
    let cell = 1.0 / r.q() as f64;
    let mut out: Vec<f64> = w
        .vertical
        .iter()
        .flat_map(|v| {
            w.horizontal
                .iter()
                .map(move |h| (h.0 - r.value() * v.0).rem_euclid(cell))
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Distance of the line through `(θ_ν, θ_λ)` from the nearest window
/// intersection, measured as an intercept offset.
pub fn collision_margin(w: &WindowPhases, r: Rational, phases: (f64, f64)) -> f64 {
    let cell = 1.0 / r.q() as f64;
    let b = (phases.1 - r.value() * phases.0).rem_euclid(cell);
    intersection_offsets(w, r)
        .into_iter()
        .map(|o| {
            let d = (b - o).rem_euclid(cell);
            d.min(cell - d)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Intercept of a line of slope `r` that stays as far as possible from every
/// window intersection.
fn safe_intercept(w: &WindowPhases, r: Rational) -> f64 {
    let cell = 1.0 / r.q() as f64;
    let offs = intersection_offsets(w, r);
    if offs.is_empty() {
        return 0.5 * cell;
    }
    let mut best = (offs[0] + cell - offs[offs.len() - 1], offs[offs.len() - 1]);
    for pair in offs.windows(2) {
        if pair[1] - pair[0] > best.0 {
            best = (pair[1] - pair[0], pair[0]);
        }
    }
    (best.1 + 0.5 * best.0).rem_euclid(cell)
}

/// Cyclic word read off the torus line of slope `r` across the given windows.
pub fn word_from_phases(w: &WindowPhases, r: Rational) -> Result<SymbolWord> {
    let count = r.q() as usize * w.vertical.len() + r.p() as usize * w.horizontal.len();
    let b = safe_intercept(w, r);
    Ok(cutting_sequence(w, r.value(), b, count)?.as_cyclic())
}

/// Family of the word carried by a torus.
pub fn torus_family(g: f64, p: &Params, torus: TorusSelector) -> Result<Family> {
    let region = classify(g, p);
    Ok(match region {
        Region::L => Family::L,
        Region::P => Family::P,
        Region::S | Region::SPrime => {
            let c = nu_well(g, p, torus)?.expect("oscillating region");
            Family::S(if c < 0.0 { Symbol::One } else { Symbol::Two })
        }
        _ => {
            return Err(rotation_number(g, p)
                .err()
                .unwrap_or(Error::RegionMismatch {
                    g,
                    h: p.h,
                    branch: "torus",
                }))
        }
    })
}

/// Predicted syzygy word on the torus over `(g, p.h)` with rotation number `r`,
/// read from the measured window phases.
pub fn predicted_word(g: f64, p: &Params, r: Rational, torus: TorusSelector) -> Result<SymbolWord> {
    let m = measure_torus(g, p, torus)?;
    word_from_phases(&m.phases, r)
}

/// The same prediction from Sturmian exponents, valid when the windows are
/// half-spaced.
pub fn predicted_word_sturmian(
    g: f64,
    p: &Params,
    r: Rational,
    torus: TorusSelector,
) -> Result<SymbolWord> {
    Ok(family_word(torus_family(g, p, torus)?, r))
}

/// A collision point on a torus: which center, and the signs of the momenta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CollisionPoint {
    pub center: u8,
    pub p_lambda_positive: bool,
    pub p_nu_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionOrbit {
    pub start: CollisionPoint,
    pub end: Option<CollisionPoint>,
    /// Distance in `(λ, ν)` from the end point to the center.
    pub end_residual: Option<f64>,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

fn center_of(nu: f64) -> (u8, f64) {
    let a = wrap_angle(nu + FRAC_PI_2);
    let b = wrap_angle(nu - FRAC_PI_2);
    if a.abs() < b.abs() {
        (1, a.abs())
    } else {
        (2, b.abs())
    }
}

/// The four collision launches of a torus over an S, S' or L point.
pub fn collision_launches(
    g: f64,
    p: &Params,
    torus: TorusSelector,
) -> Result<Vec<(CollisionPoint, PhaseState)>> {
    let region = classify(g, p);
    let td = rotation_number(g, p)?;
    if region == Region::P {
        return Err(Error::RegionMismatch {
            g,
            h: p.h,
            branch: "collision",
        });
    }
    if !TorusSelector::available(td.region).contains(&torus) {
        return Err(Error::NoSuchTorus(td.region));
    }
    let (m, d, h) = (p.total_mass(), p.mass_difference(), p.h);
    let p_lambda = (2.0 * (m + h - g)).sqrt();
    let p_nu_at = |nu: f64| (2.0 * (g - d * nu.sin() - h)).max(0.0).sqrt();
    let mut out = Vec::new();
    let centers: Vec<(f64, Vec<bool>)> = match nu_well(g, p, torus)? {
        Some(c) => vec![(c, vec![true, false])],
        None => vec![(-FRAC_PI_2, vec![true]), (FRAC_PI_2, vec![true])],
    };
    for (nu, nu_signs) in centers {
        for &nu_pos in &nu_signs {
            for lam_pos in [true, false] {
                let pl = if lam_pos { p_lambda } else { -p_lambda };
                let pn = if nu_pos { p_nu_at(nu) } else { -p_nu_at(nu) };
                let point = CollisionPoint {
                    center: center_of(nu).0,
                    p_lambda_positive: lam_pos,
                    p_nu_positive: nu_pos,
                };
                out.push((point, PhaseState::new(0.0, nu, pl, pn)));
            }
        }
    }
    Ok(out)
}

/// Integrate from a center until the next collision, or for `span` in
/// fictitious time if none occurs.
pub fn collision_launch(
    point: CollisionPoint,
    start: &PhaseState,
    p: &Params,
    span: f64,
) -> Result<CollisionOrbit> {
    let trajectory = run(
        start,
        p,
        span,
        RunOptions {
            tol: DEFAULT_TOL,
            guard: false,
            stop_at_collision: true,
        },
    )?;
    let end_state = trajectory.end();
    let hit = time_factor(end_state) < COLLISION_GUARD && end_state.tau - start.tau >= LAUNCH_GRACE;
    let (end, end_residual) = if hit {
        let (center, dnu) = center_of(end_state.nu);
        let residual = end_state.lambda.abs().max(dnu);
        let point = CollisionPoint {
            center,
            p_lambda_positive: end_state.p_lambda > 0.0,
            p_nu_positive: end_state.p_nu > 0.0,
        };
        (Some(point), Some(residual))
    } else {
        (None, None)
    };
    Ok(CollisionOrbit {
        start: point,
        end,
        end_residual,
        trajectory,
    })
}

/// Longest search for a second collision, in λ-periods.
pub const COLLISION_SEARCH_PERIODS: f64 = 64.0;

/// The distinct collision-collision orbits of a torus with rational rotation
/// number. Each one is a segment of a closed torus line through two collision
/// points; launches that trace the same line are reported once.
pub fn collision_orbits(g: f64, p: &Params, torus: TorusSelector) -> Result<Vec<CollisionOrbit>> {
    let td = rotation_number(g, p)?;
    let span = COLLISION_SEARCH_PERIODS * td.t_lambda;
    let launches = collision_launches(g, p, torus)?;
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for (point, start) in launches {
        let orbit = collision_launch(point, &start, p, span)?;
        if let Some(end) = orbit.end {
            let key = if point <= end {
                (point, end)
            } else {
                (end, point)
            };
            if !seen.contains(&key) {
                seen.push(key);
                out.push(orbit);
            }
        }
    }
    Ok(out)
}

/// One verified (region, torus, W, phase) combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub region: Region,
    pub torus: TorusSelector,
    #[serde(rename = "W")]
    pub w: Rational,
    pub g: f64,
    pub phases: (f64, f64),
    pub expected: SymbolWord,
    pub observed: Option<SymbolWord>,
    pub word_length: usize,
    pub expected_length: usize,
    pub closure_error: Option<f64>,
    pub conservation: Option<Conservation>,
    /// Physical period against `(p T_λ + q T_ν)/2`, reported only.
    pub t_period: Option<f64>,
    pub t_period_formula: f64,
    pub checks: BTreeMap<String, bool>,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusSummary {
    pub region: Region,
    pub torus: TorusSelector,
    #[serde(rename = "W")]
    pub w: Rational,
    pub g: f64,
    pub cutting_word: SymbolWord,
    pub sturmian_word: SymbolWord,
    pub vertical_separation: Option<f64>,
    pub horizontal_separation: Option<f64>,
    pub routes_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub params: Params,
    pub regions: Vec<Region>,
    pub tori: Vec<TorusSummary>,
    pub cases: Vec<CaseReport>,
    /// W values outside the range of every region present.
    pub out_of_range: Vec<Rational>,
    /// Errors hit while setting up a torus (solving for g, measuring phases).
    pub setup_errors: Vec<String>,
    /// Measured W on sampled S tori, all expected above one.
    pub s_region_w_min: Option<f64>,
    pub checks: BTreeMap<String, bool>,
    pub pass: bool,
}

fn phase_for(seed: u64, salt: u64, index: usize, w: &WindowPhases, r: Rational) -> (f64, f64) {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index as u64);
    let margin = 0.05 / r.q() as f64;
    loop {
        let ph = (rng.gen::<f64>(), rng.gen::<f64>());
        let clear_v = w
            .vertical
            .iter()
            .all(|v| ((ph.0 - v.0).rem_euclid(1.0) - 0.5).abs() < 0.49);
        let clear_h = w
            .horizontal
            .iter()
            .all(|h| ((ph.1 - h.0).rem_euclid(1.0) - 0.5).abs() < 0.49);
        if clear_v && clear_h && collision_margin(w, r, ph) >= margin {
            return ph;
        }
    }
}

/// Rotation by half the length maps the word to itself, with 1 and 2 swapped
/// when an odd number of vertical crossings separates the halves.
fn half_word_parity(word: &SymbolWord, family: Family, r: Rational) -> bool {
    let s = word.symbols();
    let n = s.len();
    if n % 2 == 1 {
        return false;
    }
    let swap = match family {
        Family::S(_) => false,
        Family::L | Family::P => r.q() % 2 == 1,
    };
    (0..n).all(|i| {
        let a = s[(i + n / 2) % n];
        if swap {
            a == s[i].relabel()
        } else {
            a == s[i]
        }
    })
}

struct Job {
    summary_index: usize,
    phase_index: usize,
    phases: (f64, f64),
}

fn run_case(
    summary: &TorusSummary,
    family: Family,
    phases: (f64, f64),
    td: &TorusData,
    p: &Params,
) -> CaseReport {
    let r = summary.w;
    let expected = summary.cutting_word.clone();
    let expected_length = match family {
        Family::P => 2 * r.q() as usize,
        _ => 2 * (r.p() + r.q()) as usize,
    };
    let t_period_formula = 0.5 * (r.p() as f64 * td.t_lambda + r.q() as f64 * td.t_nu);
    let mut report = CaseReport {
        region: summary.region,
        torus: summary.torus,
        w: r,
        g: summary.g,
        phases,
        expected: expected.clone(),
        observed: None,
        word_length: 0,
        expected_length,
        closure_error: None,
        conservation: None,
        t_period: None,
        t_period_formula,
        checks: BTreeMap::new(),
        pass: false,
        error: None,
    };
    let spec = OrbitSpec {
        g: Some(summary.g),
        region: Some(summary.region),
        w: Some(r),
        phases,
        torus: summary.torus,
    };
    let orbit = match periodic_orbit(&spec, p) {
        Ok(o) => o,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    let cons = orbit.trajectory.conservation(p);
    let bal = is_balanced(&orbit.word);
    let n = r.floor() as usize;
    let mut checks = BTreeMap::new();
    checks.insert(
        "word_matches_prediction".to_string(),
        orbit.word.eq_up_to_relabel(&expected),
    );
    checks.insert(
        "word_length".to_string(),
        orbit.word.len() == expected_length,
    );
    checks.insert(
        "three_runs".to_string(),
        bal.runs
            .iter()
            .all(|&k| family == Family::P && k == 0 || k == n || k == n + 1),
    );
    checks.insert(
        "no_stutter".to_string(),
        family == Family::P || !bal.stutter,
    );
    checks.insert(
        "adjacency_only_below_one".to_string(),
        !bal.adjacent_12 || n == 0 || family == Family::P,
    );
    checks.insert(
        "half_word_parity".to_string(),
        half_word_parity(&orbit.word, family, r),
    );
    checks.insert("closure".to_string(), orbit.closure_error <= CLOSURE_TOL);
    checks.insert("separation_conserved".to_string(), cons.separation <= 1e-9);
    checks.insert(
        "cartesian_conserved".to_string(),
        cons.energy_drift <= 1e-8 && cons.second_integral_drift <= 1e-8,
    );
    if family == Family::P {
        checks.insert(
            "no_symbol_3".to_string(),
            orbit.word.count(Symbol::Three) == 0,
        );
    }
    report.pass = checks.values().all(|&b| b);
    report.checks = checks;
    report.word_length = orbit.word.len();
    report.observed = Some(orbit.word);
    report.closure_error = Some(orbit.closure_error);
    report.conservation = Some(cons);
    report.t_period = Some(orbit.t_period);
    report
}

/// Integrate periodic orbits on every torus and rotation number that fits at
/// this energy and compare their words with the predictions.
pub fn verify_theorems(
    p: &Params,
    ws: &[Rational],
    phases_per_torus: usize,
    seed: u64,
    exec: Execution,
) -> VerificationReport {
    let regions = regions_present(p);
    let mut summaries = Vec::new();
    let mut families = Vec::new();
    let mut datas = Vec::new();
    let mut phase_sets = Vec::new();
    let mut setup_errors = Vec::new();
    let mut out_of_range = Vec::new();
    for &r in ws {
        let mut used = false;
        for &region in &regions {
            let Ok((lo, hi)) = w_range(region, p) else {
                continue;
            };
            if !(r.value() > lo && r.value() < hi) {
                continue;
            }
            used = true;
            for &torus in TorusSelector::available(region) {
                let setup = (|| -> Result<_> {
                    let g = solve_g(region, r.value(), p)?.g;
                    let td = rotation_number(g, p)?;
                    let m = measure_torus(g, p, torus)?;
                    let family = torus_family(g, p, torus)?;
                    let cutting_word = word_from_phases(&m.phases, r)?;
                    let sturmian_word = family_word(family, r);
                    let summary = TorusSummary {
                        region,
                        torus,
                        w: r,
                        g,
                        routes_agree: cutting_word.eq_up_to_relabel(&sturmian_word),
                        cutting_word,
                        sturmian_word,
                        vertical_separation: m.phases.vertical_separation(),
                        horizontal_separation: m.phases.horizontal_separation(),
                    };
                    Ok((summary, family, td, m.phases))
                })();
                match setup {
                    Ok((summary, family, td, phases)) => {
                        summaries.push(summary);
                        families.push(family);
                        datas.push(td);
                        phase_sets.push(phases);
                    }
                    Err(e) => setup_errors.push(format!("{region} {torus} W={r}: {e}")),
                }
            }
        }
        if !used {
            out_of_range.push(r);
        }
    }

    let mut jobs = Vec::new();
    for (i, s) in summaries.iter().enumerate() {
        let salt = (s.region as u64) << 48 ^ (s.torus as u64) << 40 ^ s.w.p() << 20 ^ s.w.q();
        for k in 0..phases_per_torus {
            jobs.push(Job {
                summary_index: i,
                phase_index: k,
                phases: phase_for(seed, salt, k, &phase_sets[i], s.w),
            });
        }
    }
    let cases: Vec<CaseReport> = map_with(exec, &jobs, |job| {
        let i = job.summary_index;
        let _ = job.phase_index;
        run_case(&summaries[i], families[i], job.phases, &datas[i], p)
    });

    let s_region_w_min = region_interval(Region::S, p).map(|(lo, hi)| {
        let pts: Vec<f64> = (1..=50).map(|i| lo + (hi - lo) * i as f64 / 51.0).collect();
        map_with(exec, &pts, |&g| {
            measure_torus(g, p, TorusSelector::First)
                .map(|m| m.w)
                .unwrap_or(f64::NAN)
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    });

    let mut checks = BTreeMap::new();
    checks.insert("all_cases_pass".to_string(), cases.iter().all(|c| c.pass));
    checks.insert(
        "prediction_routes_agree".to_string(),
        summaries.iter().all(|s| s.routes_agree),
    );
    checks.insert("all_w_in_range".to_string(), out_of_range.is_empty());
    checks.insert("setup_ok".to_string(), setup_errors.is_empty());
    if let Some(wmin) = s_region_w_min {
        checks.insert("s_region_w_above_one".to_string(), wmin > 1.0);
    }
    let pass = checks.values().all(|&b| b) && !cases.is_empty();
    VerificationReport {
        params: *p,
        regions,
        tori: summaries,
        cases,
        out_of_range,
        setup_errors,
        s_region_w_min,
        checks,
        pass,
    }
}

/// Unwrapped change of `ν` over a trajectory, in turns.
pub fn nu_turns(t: &Trajectory) -> f64 {
    (t.end().nu - t.start().nu) / TAU
}

/// Rotation number estimated from event counts: 3-events per 1/2-event.
pub fn event_ratio(t: &Trajectory) -> Option<f64> {
    let word = syzygy_word(t);
    let v = word.count(Symbol::One) + word.count(Symbol::Two);
    (v > 0).then(|| word.count(Symbol::Three) as f64 / v as f64)
}
