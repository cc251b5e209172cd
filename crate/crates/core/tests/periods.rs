mod common;

use std::f64::consts::FRAC_PI_2;

use common::{oracle_period, oracle_t_nu_oscillation, rng, Branch};
use proptest::prelude::*;
use rand::Rng;
use two_centers::emmap::{region_interval, regions_present, Region};
use two_centers::periods::{
    measure_torus, period_lambda, period_nu, rotation_number, solve_g, w_range, TorusSelector,
};
use two_centers::Params;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// A point well inside `region`, or `None` if the region is absent.
fn interior_point(region: Region, p: &Params, u: f64) -> Option<f64> {
    let (lo, hi) = region_interval(region, p)?;
    let margin = 0.05 * (hi - lo);
    Some(lo + margin + u * (hi - lo - 2.0 * margin))
}

#[test]
fn closed_forms_match_return_times() {
    let mut rng = rng(7);
    for (m1, m2) in [(0.5, 0.5), (0.3, 0.7)] {
        for branch in Branch::ALL {
            let mut n = 0;
            while n < 12 {
                let p = Params::new(m1, m2, rng.gen_range(-1.5..-0.02)).unwrap();
                let region = branch.regions()[rng.gen_range(0..branch.regions().len())];
                let Some(g) = interior_point(region, &p, rng.gen()) else {
                    continue;
                };
                let formula = match branch {
                    Branch::LambdaCrossing | Branch::LambdaWell => period_lambda(g, &p).unwrap().0,
                    Branch::NuOscillation | Branch::NuRotation => period_nu(g, &p).unwrap().0,
                };
                let oracle = oracle_period(branch, g, p.h, m1, m2);
                assert!(
                    rel(formula, oracle) < 1e-8,
                    "{branch:?} m1={m1} g={g} h={}: {formula} vs {oracle}",
                    p.h
                );
                n += 1;
            }
        }
    }
}

#[test]
fn both_wells_share_one_period() {
    let p = Params::new(0.3, 0.7, -0.8).unwrap();
    let (lo, hi) = region_interval(Region::S, &p).unwrap();
    for i in 1..10 {
        let g = lo + (hi - lo) * i as f64 / 10.0;
        let a = oracle_t_nu_oscillation(g, p.h, p.mass_difference(), -FRAC_PI_2);
        let b = oracle_t_nu_oscillation(g, p.h, p.mass_difference(), FRAC_PI_2);
        assert!(rel(a, b) < 1e-8, "{a} vs {b}");
        assert!(rel(period_nu(g, &p).unwrap().0, a) < 1e-8);
    }
}

#[test]
fn measured_and_closed_form_rotation_numbers_agree() {
    for (m1, m2, h) in [(0.5, 0.5, -0.23), (0.3, 0.7, -0.23), (0.5, 0.5, -1.2)] {
        let p = Params::new(m1, m2, h).unwrap();
        for region in regions_present(&p) {
            for &torus in TorusSelector::available(region) {
                let g = interior_point(region, &p, 0.37).unwrap();
                let m = measure_torus(g, &p, torus).unwrap();
                let td = rotation_number(g, &p).unwrap();
                assert!(
                    rel(m.w, td.w) < 1e-10,
                    "{region} {torus}: {} vs {}",
                    m.w,
                    td.w
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solve_g_inverts_rotation_number(h in -1.4f64..-0.05, u in 0.02f64..0.98, pick in 0usize..4, asym in any::<bool>()) {
        let p = if asym { Params::new(0.3, 0.7, h).unwrap() } else { Params::equal(h).unwrap() };
        let regions = regions_present(&p);
        let region = regions[pick % regions.len()];
        let g = interior_point(region, &p, u).unwrap();
        let w = rotation_number(g, &p).unwrap().w;
        let (lo, hi) = w_range(region, &p).unwrap();
        prop_assert!(w > lo && w < hi, "{} outside ({}, {})", w, lo, hi);
        let sol = solve_g(region, w, &p).unwrap();
        prop_assert!((sol.w - w).abs() < 1e-9);
        prop_assert!((sol.g - g).abs() < 1e-6 * (1.0 + g.abs()), "{} vs {}", sol.g, g);
    }
}
