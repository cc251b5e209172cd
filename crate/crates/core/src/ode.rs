//! Explicit Dormand–Prince 8(5,3) integration of autonomous systems with
//! sign-change event location.
//!
//! Events are located by bisection on the step fraction: the accepted step is
//! retaken from its start with a shorter step, which stays inside the error
//! budget of the accepted step.

use crate::error::{Error, Result};

/// Vector field of an autonomous system.
pub trait VectorField<const N: usize> {
    fn eval(&self, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> VectorField<N> for F
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    fn eval(&self, y: &[f64; N]) -> [f64; N] {
        self(y)
    }
}

/// Step-size controller settings.
#[derive(Debug, Clone, Copy)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dop853 {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            h_max: 0.1,
            max_steps: 2_000_000,
        }
    }
}

/// One located zero crossing.
#[derive(Debug, Clone, Copy)]
pub struct Crossing<const N: usize> {
    /// Index of the event function in the slice passed to `propagate`.
    pub event: usize,
    pub t: f64,
    pub y: [f64; N],
}

/// View of an accepted step handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
}

/// What the observer wants after seeing a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Result of a propagation.
#[derive(Debug, Clone)]
pub struct Propagation<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub crossings: Vec<Crossing<N>>,
    pub stopped: bool,
}

#[allow(clippy::excessive_precision)]
mod tableau {
    pub const A2: [f64; 1] = [5.260_015_195_876_773E-2];
    pub const A3: [f64; 2] = [1.972_505_698_453_79E-2, 5.917_517_095_361_37E-2];
    pub const A4: [f64; 3] = [2.958_758_547_680_685E-2, 0.0, 8.876_275_643_042_055E-2];
    pub const A5: [f64; 4] = [
        2.413_651_341_592_667E-1,
        0.0,
        -8.845_494_793_282_861E-1,
        9.248_340_032_617_92E-1,
    ];
    pub const A6: [f64; 5] = [
        3.703_703_703_703_703_7E-2,
        0.0,
        0.0,
        1.708_286_087_294_738_6E-1,
        1.254_676_875_668_224_2E-1,
    ];
    pub const A7: [f64; 6] = [
        3.710_937_5E-2,
        0.0,
        0.0,
        1.702_522_110_195_440_4E-1,
        6.021_653_898_045_596E-2,
        -1.757_812_5E-2,
    ];
    pub const A8: [f64; 7] = [
        3.709_200_011_850_479E-2,
        0.0,
        0.0,
        1.703_839_257_122_4E-1,
        1.072_620_304_463_732_8E-1,
        -1.531_943_774_862_440_2E-2,
        8.273_789_163_814_023E-3,
    ];
    pub const A9: [f64; 8] = [
        6.241_109_587_160_757E-1,
        0.0,
        0.0,
        -3.360_892_629_446_941_4,
        -8.682_193_468_417_26E-1,
        2.759_209_969_944_671E1,
        2.015_406_755_047_789_4E1,
        -4.348_988_418_106_996E1,
    ];
    pub const A10: [f64; 9] = [
        4.776_625_364_382_643_6E-1,
        0.0,
        0.0,
        -2.488_114_619_971_667_7,
        -5.902_908_268_368_43E-1,
        2.123_005_144_818_119_3E1,
        1.527_923_363_288_242_3E1,
        -3.328_821_096_898_486E1,
        -2.033_120_170_850_862_6E-2,
    ];
    pub const A11: [f64; 10] = [
        -9.371_424_300_859_873E-1,
        0.0,
        0.0,
        5.186_372_428_844_064,
        1.091_437_348_996_729_6,
        -8.149_787_010_746_926,
        -1.852_006_565_999_696E1,
        2.273_948_709_935_050_5E1,
        2.493_605_552_679_652_4,
        -3.046_764_471_898_219_5,
    ];
    pub const A12: [f64; 11] = [
        2.273_310_147_516_538,
        0.0,
        0.0,
        -1.053_449_546_673_725E1,
        -2.000_872_058_224_862_5,
        -1.795_893_186_311_88E1,
        2.794_888_452_941_996E1,
        -2.858_998_277_135_023_5,
        -8.872_856_933_530_63,
        1.236_056_717_579_430_3E1,
        6.433_927_460_157_635E-1,
    ];
    pub const B: [f64; 12] = [
        5.429_373_411_656_876E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        4.450_312_892_752_409,
        1.891_517_899_314_500_3,
        -5.801_203_960_010_585,
        3.111_643_669_578_199E-1,
        -1.521_609_496_625_160_8E-1,
        2.013_654_008_040_303_4E-1,
        4.471_061_572_777_259E-2,
    ];
    pub const BHH: [f64; 3] = [
        0.244_094_488_188_976_38,
        0.733_846_688_281_611_9,
        0.022_058_823_529_411_765,
    ];
    pub const E: [f64; 12] = [
        0.131_200_449_941_948_8E-1,
        0.0,
        0.0,
        0.0,
        0.0,
        -0.122_515_644_637_620_4E1,
        -0.495_758_949_657_250_2,
        0.166_437_718_245_498_65E1,
        -0.350_328_848_749_973_7,
        0.334_179_118_713_017_5,
        0.819_232_064_851_157_1E-1,
        -0.223_553_078_638_862_95E-1,
    ];
}

fn changes_sign(a: f64, b: f64) -> bool {
    (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, coeffs: &[f64], k: &[[f64; N]]) -> [f64; N] {
    let mut out = *y;
    for (c, kj) in coeffs.iter().zip(k) {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * kj[i];
        }
    }
    out
}

impl Dop853 {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }

    /// A single step of size `h` from `y`. Returns the new state and the
    /// scaled error norm (≤ 1 means acceptable).
    pub fn step<const N: usize, F: VectorField<N>>(
        &self,
        f: &F,
        y: &[f64; N],
        h: f64,
    ) -> ([f64; N], f64) {
        use tableau::*;
        let mut k = [[0.0; N]; 12];
        k[0] = f.eval(y);
        let rows: [&[f64]; 11] = [&A2, &A3, &A4, &A5, &A6, &A7, &A8, &A9, &A10, &A11, &A12];
        for (s, row) in rows.iter().enumerate() {
            let ys = axpy(y, h, row, &k[..=s]);
            k[s + 1] = f.eval(&ys);
        }
        let mut increment = [0.0; N];
        let mut err5 = [0.0; N];
        for i in 0..N {
            let mut inc = 0.0;
            let mut e5 = 0.0;
            for s in 0..12 {
                inc += B[s] * k[s][i];
                e5 += E[s] * k[s][i];
            }
            increment[i] = inc;
            err5[i] = e5;
        }
        let mut y_new = *y;
        let mut e5_sum = 0.0;
        let mut e3_sum = 0.0;
        for i in 0..N {
            y_new[i] = y[i] + h * increment[i];
            let sk = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            let e3 = increment[i] - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
            e5_sum += (err5[i] / sk).powi(2);
            e3_sum += (e3 / sk).powi(2);
        }
        let mut deno = e5_sum + 0.01 * e3_sum;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * e5_sum * (1.0 / (deno * N as f64)).sqrt();
        (y_new, err)
    }

    /// Integrate from `(t0, y0)` to `t_end`, locating sign changes of each
    /// event function. `on_step` sees every accepted step and may veto with an
    /// error; `on_crossing` sees crossings in time order and may stop the run at
    /// that crossing.
    #[allow(clippy::too_many_arguments, clippy::type_complexity)]
    pub fn propagate<const N: usize, F, S, C>(
        &self,
        f: &F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        events: &[&dyn Fn(&[f64; N]) -> f64],
        mut on_step: S,
        mut on_crossing: C,
    ) -> Result<Propagation<N>>
    where
        F: VectorField<N>,
        S: FnMut(&Step<N>) -> Result<()>,
        C: FnMut(&Crossing<N>) -> Flow,
    {
        let mut t = t0;
        let mut y = y0;
        let mut crossings = Vec::new();
        let span = t_end - t0;
        if span <= 0.0 {
            return Ok(Propagation {
                t,
                y,
                crossings,
                stopped: false,
            });
        }
        let mut h = self.h_max.min(span).min(1e-2);
        let mut steps = 0usize;
        let mut g_prev: Vec<f64> = events.iter().map(|e| e(&y)).collect();
        while t < t_end {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::StepUnderflow(t));
            }
            let last = t + h >= t_end;
            let h_try = if last { t_end - t } else { h };
            let (y_new, err) = self.step(f, &y, h_try);
            if err.is_nan() || err > 1.0 {
                let fac = if err.is_finite() {
                    (0.9 * err.powf(-1.0 / 8.0)).max(0.2)
                } else {
                    0.2
                };
                h = h_try * fac;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow(t));
                }
                continue;
            }
            let t_new = if last { t_end } else { t + h_try };
            let step = Step {
                t0: t,
                y0: y,
                t1: t_new,
                y1: y_new,
            };
            on_step(&step)?;

            let g_new: Vec<f64> = events.iter().map(|e| e(&y_new)).collect();
            let mut found: Vec<Crossing<N>> = Vec::new();
            for (idx, ev) in events.iter().enumerate() {
                let (a, b) = (g_prev[idx], g_new[idx]);
                if changes_sign(a, b) {
                    let (tc, yc) = self.locate(f, t, &y, h_try, *ev, a);
                    found.push(Crossing {
                        event: idx,
                        t: tc,
                        y: yc,
                    });
                }
            }
            found.sort_by(|a, b| a.t.total_cmp(&b.t));
            for c in found {
                crossings.push(c);
                if on_crossing(&c) == Flow::Stop {
                    return Ok(Propagation {
                        t: c.t,
                        y: c.y,
                        crossings,
                        stopped: true,
                    });
                }
            }

            t = t_new;
            y = y_new;
            g_prev = g_new;
            let fac = if err > 0.0 {
                (0.9 * err.powf(-1.0 / 8.0)).clamp(0.333, 6.0)
            } else {
                6.0
            };
            h = (h_try * fac).min(self.h_max);
        }
        Ok(Propagation {
            t,
            y,
            crossings,
            stopped: false,
        })
    }

    /// Bisection on the step fraction for the zero of `ev` inside a step of
    /// size `h` starting at `(t, y)`, where `ev(y)` has sign `g0`.
    pub fn locate<const N: usize, F: VectorField<N>>(
        &self,
        f: &F,
        t: f64,
        y: &[f64; N],
        h: f64,
        ev: &dyn Fn(&[f64; N]) -> f64,
        g0: f64,
    ) -> (f64, [f64; N]) {
        let mut lo = 0.0;
        let mut hi = h;
        let mut y_hi = self.step(f, y, h).0;
        for _ in 0..80 {
            if hi - lo <= 1e-15 * (t.abs() + h.abs()).max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let y_mid = self.step(f, y, mid).0;
            let g = ev(&y_mid);
            if g == 0.0 {
                return (t + mid, y_mid);
            }
            if (g > 0.0) == (g0 > 0.0) {
                lo = mid;
            } else {
                hi = mid;
                y_hi = y_mid;
            }
        }
        (t + hi, y_hi)
    }

    /// Integrate without events.
    pub fn flow<const N: usize, F: VectorField<N>>(
        &self,
        f: &F,
        y0: [f64; N],
        duration: f64,
    ) -> Result<[f64; N]> {
        let p = self.propagate(f, 0.0, y0, duration, &[], |_| Ok(()), |_| Flow::Continue)?;
        Ok(p.y)
    }
}
