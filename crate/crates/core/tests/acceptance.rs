//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with the
//! measured quantities and then asserts the same condition.

mod common;

use rayon::prelude::*;

use common::{c1_explicit, report, RadialOracle};
use plaque::closed_form::{clearance_t, ModelParams, RadialSteadyState};
use plaque::continuation::{
    continue_branch, mode_purity, tangent_cone_switch, track_radial_branch, BranchPoint, ContinuationOptions,
    StepControl, SwitchOptions,
};
use plaque::fb_solver::{fourier_sector_spectrum, linearized_spectrum, radial_solution, Discretization, Restriction};
use plaque::polar_disc::{radial_convergence, AngularScheme};
use plaque::special_fn::{bessel_i, bessel_k, BesselOrder};
use plaque::spectral::{bifurcation_point, dispersion, growth_rate, mode_monotonicity};

const LADDER: [(usize, usize); 4] = [(20, 2), (40, 4), (80, 8), (160, 16)];

fn reference() -> ModelParams {
    ModelParams::reference()
}

#[test]
fn radial_fields_converge_at_second_order() {
    let params = reference();
    let levels = radial_convergence(&params, &LADDER, AngularScheme::default()).unwrap();
    let orders: Vec<f64> = levels.iter().filter_map(|l| l.order).collect();
    let finest = levels.last().unwrap().err;

    // The closed form itself is checked against collocation at every node.
    let exact = RadialSteadyState::new(params).unwrap();
    let oracle = RadialOracle::new(params);
    let mut closed_form_gap = 0.0_f64;
    for (i, &r) in oracle.cheb.r.iter().enumerate() {
        let v = exact.eval(r).unwrap();
        closed_form_gap = closed_form_gap.max((v.m - oracle.m[i]).abs()).max((v.p - oracle.p[i]).abs());
    }

    let passed = orders.len() == 3
        && orders.iter().all(|o| (1.8..=2.2).contains(o))
        && finest <= 5e-4
        && closed_form_gap < 1e-10;
    report(
        "AC1 radial convergence",
        passed,
        &format!("orders {orders:.4?}, finest error {finest:.4e} (<= 5e-4), closed form vs collocation {closed_form_gap:.1e}"),
    );
    assert!(passed);
}

#[test]
fn detected_bifurcations_approach_analytic_values() {
    let params = reference();
    let modes = [2u32, 3, 4];
    let exact: Vec<f64> = modes.iter().map(|&n| bifurcation_point(&params, n).unwrap().l_n).collect();
    let oracle_gap = modes
        .iter()
        .zip(&exact)
        .map(|(&n, &l)| {
            let (c1, c2) = RadialOracle::coefficients(&params, n);
            ((c1 / c2 - l) / l).abs()
        })
        .fold(0.0_f64, f64::max);

    let l_max = 1.1 * exact[2];
    let tracks: Vec<_> = LADDER
        .par_iter()
        .map(|&(m, n_r)| track_radial_branch(&params, &Discretization::new(m, n_r), 0.0, l_max, &StepControl::default()))
        .collect();
    let mut passed = oracle_gap < 1e-8;
    let mut detail = Vec::new();
    for (k, &n) in modes.iter().enumerate() {
        let errors: Vec<f64> = tracks
            .iter()
            .map(|t| match t {
                Ok(t) => t
                    .detections
                    .iter()
                    .find(|d| d.mode_estimate == n)
                    .map_or(f64::INFINITY, |d| (d.l_tilde - exact[k]).abs()),
                Err(_) => f64::INFINITY,
            })
            .collect();
        let shrink: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
        let finest = *errors.last().unwrap();
        let ok = shrink.iter().all(|&s| s >= 3.0) && finest <= 0.05;
        passed &= ok;
        detail.push(format!(
            "n={n} L_n={:.6} errors {errors:.4?} shrink {shrink:.2?} {}",
            exact[k],
            if ok { "ok" } else { "MISS" }
        ));
    }
    report(
        "AC2 bifurcation points",
        passed,
        &format!("{}; analytic vs collocation {oracle_gap:.1e}", detail.join("; ")),
    );
    assert!(passed);
}

#[test]
fn analytic_identities_hold() {
    let params = reference();
    let mut failures: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            failures.push(what);
        }
    };

    for n in [0, 1] {
        let l = bifurcation_point(&params, n).unwrap().l_n;
        check(l == 0.0, format!("L_{n} = {l}"));
    }
    for n in 2..=6 {
        let b = bifurcation_point(&params, n).unwrap();
        let h = dispersion(0.0, n, &params.with_ldl(b.l_n)).unwrap();
        check(h.abs() < 1e-9, format!("h(0,{n},L_{n}) = {h:e}"));
        let c1 = c1_explicit(&params, n);
        check(((b.c1_val - c1) / c1).abs() < 1e-12, format!("C1({n}) = {} vs {c1}", b.c1_val));
        let (oc1, oc2) = RadialOracle::coefficients(&params, n);
        check(((b.c2_val - oc2) / oc2).abs() < 1e-9, format!("C2({n}) = {} vs collocation {oc2}", b.c2_val));
        check(((b.c1_val - oc1) / oc1).abs() < 1e-9, format!("C1({n}) = {} vs collocation {oc1}", b.c1_val));
    }
    for n in 0..=8 {
        let b = bifurcation_point(&params, n).unwrap();
        for l in [0.0, 1.0, 3.0, 10.0] {
            let h = dispersion(0.0, n, &params.with_ldl(l)).unwrap();
            let affine = b.c1_val - b.c2_val * l;
            check((h - affine).abs() < 1e-9, format!("h(0,{n},{l}) = {h} vs C1 - C2 L = {affine}"));
        }
    }
    let mut wronskian = 0.0_f64;
    for n in 0..=20 {
        for x in [1e-2, 0.1, 0.5, 1.0, 2.5, 7.0, 20.0, 60.0] {
            let (o, o1) = (BesselOrder::new(n).unwrap(), BesselOrder::new(n + 1).unwrap());
            let w = bessel_i(o, x).unwrap() * bessel_k(o1, x).unwrap() + bessel_i(o1, x).unwrap() * bessel_k(o, x).unwrap();
            wronskian = wronskian.max((x * w - 1.0).abs());
        }
    }
    check(wronskian < 1e-10, format!("Wronskian defect {wronskian:e}"));
    let t0 = clearance_t(&params.with_ldl(0.0)).unwrap();
    check(t0 == 0.0, format!("T(L=0) = {t0}"));
    for l in [1e-6, 0.5, 1.0, 3.0, 15.0, 200.0] {
        let t = clearance_t(&params.with_ldl(l)).unwrap();
        let o = RadialOracle::new(params.with_ldl(l)).t;
        check(t > 0.0, format!("T(L={l}) = {t}"));
        check(((t - o) / o).abs() < 1e-10, format!("T(L={l}) = {t} vs collocation {o}"));
    }

    let passed = failures.is_empty();
    report(
        "AC3 analytic identities",
        passed,
        &if passed {
            format!("all identities within tolerance, Wronskian defect {wronskian:.1e}")
        } else {
            failures.join("; ")
        },
    );
    assert!(passed);
}

#[test]
fn mode_coefficients_are_monotone_near_the_wall() {
    let base = reference();
    let mut passed = true;
    let mut detail = Vec::new();
    for eps_ratio in [0.05, 0.025, 0.0125] {
        let params = base.with_rho(base.outer_radius * (1.0 - eps_ratio));
        let rep = mode_monotonicity(&params, 8).unwrap();
        let oracle: Vec<(f64, f64)> = (2..=8).map(|n| RadialOracle::coefficients(&params, n)).collect();
        let oracle_ok = oracle.iter().all(|&(_, c2)| c2 > 0.0)
            && oracle.windows(2).all(|w| w[1].1 < w[0].1 && w[1].0 > w[0].0 && w[1].0 / w[1].1 > w[0].0 / w[0].1);
        let ok = rep.in_regime && rep.all_hold() && oracle_ok;
        passed &= ok;
        let c2: Vec<f64> = rep.entries.iter().map(|e| e.c2).collect();
        detail.push(format!("eps/R={eps_ratio}: C2 {c2:.4?} {}", if ok { "ok" } else { "MISS" }));
    }
    report("AC4 monotone coefficients near the wall", passed, &detail.join("; "));
    assert!(passed);
}

#[test]
fn every_ldl_has_an_unstable_mode() {
    let base = reference();
    let mut passed = true;
    let mut detail = Vec::new();
    for l in [1.0, 3.0, 15.0] {
        let params = base.with_ldl(l);
        let oracle = RadialOracle::new(params);
        let mut found = None;
        for n in 2..=32 {
            if let Some(a) = growth_rate(n, &params).unwrap().a {
                let h = dispersion(a, n, &params).unwrap();
                if a > 0.0 && h.abs() < 1e-10 {
                    found = Some((n, a, h));
                    break;
                }
            }
        }
        let ok = match found {
            Some((n, a, h)) => {
                let o = oracle.growth_rate(n, 2.0 * a + 10.0).unwrap_or(f64::NAN);
                let agree = ((o - a) / a).abs() < 1e-8;
                detail.push(format!("L={l}: n={n} a={a:.6} |h|={:.1e} collocation a={o:.6}", h.abs()));
                agree
            }
            None => {
                detail.push(format!("L={l}: no growing mode in n <= 32"));
                false
            }
        };
        passed &= ok;

        let near_wall = params.with_rho(0.975 * params.outer_radius);
        let wall_oracle = RadialOracle::new(near_wall);
        for n in [0, 1] {
            let lib = growth_rate(n, &near_wall).unwrap().a;
            let h0 = wall_oracle.dispersion(0.0, n);
            let ok = lib.is_none() && h0 <= 1e-12 && wall_oracle.growth_rate(n, 1e3).is_none();
            if !ok {
                detail.push(format!("L={l}: mode {n} grows near the wall (a={lib:?}, h(0)={h0:e})"));
            }
            passed &= ok;
        }
    }
    report("AC5 instability for every L", passed, &detail.join("; "));
    assert!(passed);
}

fn symmetric_re_max(params: &ModelParams, n_r: usize, l: f64) -> f64 {
    let s = radial_solution(&params.with_ldl(l), &Discretization::new(8, n_r)).unwrap();
    linearized_spectrum(&s, Restriction::RadiallySymmetric).unwrap().re_max()
}

#[test]
fn spectrum_signs() {
    let params = reference();
    let full_disc = Discretization::new(32, 8);
    let full: Vec<(f64, f64)> = [0.0, 3.0, 15.0, 120.0, 200.0]
        .par_iter()
        .map(|&l| {
            let s = radial_solution(&params.with_ldl(l), &full_disc).unwrap();
            (l, linearized_spectrum(&s, Restriction::Full).unwrap().re_max())
        })
        .collect();
    let mut passed = full.iter().all(|&(_, re)| re > 0.0);
    let mut detail = vec![format!("full (32,8): {full:.1?}")];

    let stable = [5.0, 10.0, 50.0, 100.0, 140.0];
    let unstable = [150.0, 200.0];
    for n_r in [8, 16, 32] {
        let signs_ok = stable.iter().all(|&l| symmetric_re_max(&params, n_r, l) < 0.0)
            && unstable.iter().all(|&l| symmetric_re_max(&params, n_r, l) > 0.0);
        let (mut lo, mut hi) = (100.0, 200.0);
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if symmetric_re_max(&params, n_r, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let crossing = 0.5 * (lo + hi);
        let ok = signs_ok && crossing > 100.0 && crossing < 200.0;
        passed &= ok;
        detail.push(format!("symmetric n_r={n_r}: signs {} crossing L={crossing:.3}", if signs_ok { "ok" } else { "MISS" }));
    }
    report("AC6 spectrum signs", passed, &detail.join("; "));
    assert!(passed);
}

#[test]
fn switched_branches_are_pure_and_unstable() {
    let params = reference();
    let disc = Discretization::new(48, 8);
    let l_max = 1.1 * bifurcation_point(&params, 4).unwrap().l_n;
    let track = track_radial_branch(&params, &disc, 0.0, l_max, &StepControl::default()).unwrap();
    let opts = ContinuationOptions {
        steps: 10,
        stability_every: 5,
        ..ContinuationOptions::default()
    };
    let results: Vec<(u32, Result<String, String>)> = [2u32, 3, 4]
        .par_iter()
        .map(|&n| {
            let Some(at) = track.detections.iter().find(|d| d.mode_estimate == n) else {
                return (n, Err("not detected".into()));
            };
            let run = tangent_cone_switch(at, 1.0, &SwitchOptions::default())
                .and_then(|s| continue_branch(&BranchPoint::new(format!("n{n}"), s), &opts));
            let run = match run {
                Ok(r) => r,
                Err(e) => return (n, Err(e.to_string())),
            };
            let purity = run
                .points
                .iter()
                .map(|p| mode_purity(&p.solution.curve, n as usize))
                .fold(f64::INFINITY, f64::min);
            let proj = run.points.iter().map(|p| p.projection).fold(f64::INFINITY, f64::min);
            let res: Vec<f64> = run.points.iter().filter_map(|p| p.re_lambda_max).collect();
            let summary = format!(
                "n={n}: {} points, min purity {purity:.4}, min projection {proj:.3e}, re lambda_max {res:.1?}",
                run.points.len()
            );
            let ok = run.aborted.is_none()
                && run.points.len() > 1
                && purity > 0.9
                && proj > 0.0
                && !res.is_empty()
                && res.iter().all(|&r| r > 0.0);
            (n, if ok { Ok(summary) } else { Err(format!("{summary} aborted {:?}", run.aborted)) })
        })
        .collect();
    let passed = results.iter().all(|(_, r)| r.is_ok());
    let detail: Vec<String> = results
        .into_iter()
        .map(|(n, r)| r.unwrap_or_else(|e| format!("n={n}: MISS {e}")))
        .collect();
    report("AC7 branch structure", passed, &detail.join("; "));
    assert!(passed);
}

#[test]
fn discrete_sectors_match_dispersion_roots() {
    let params = reference();
    let disc = Discretization::new(64, 16);
    let solution = radial_solution(&params, &disc).unwrap();
    let oracle = RadialOracle::new(params);
    let h2 = ((params.outer_radius - params.rho) / disc.n_r as f64).powi(2);
    let tol = 0.05_f64.max(h2);
    let rows: Vec<(u32, f64, f64, f64)> = (0..=6u32)
        .into_par_iter()
        .filter_map(|n| {
            let a = growth_rate(n, &params).unwrap().a?;
            let discrete = fourier_sector_spectrum(&solution, n).unwrap()[0].re;
            let o = oracle.growth_rate(n, 2.0 * a + 10.0).unwrap_or(f64::NAN);
            Some((n, a, discrete, o))
        })
        .collect();
    let passed = rows.len() >= 5
        && rows
            .iter()
            .all(|&(_, a, d, o)| ((d - a) / a).abs() <= tol && ((o - a) / a).abs() < 1e-8);
    let detail: Vec<String> = rows
        .iter()
        .map(|&(n, a, d, _)| format!("n={n} a={a:.4} discrete={d:.4} rel {:.2e}", ((d - a) / a).abs()))
        .collect();
    report("AC8 sector eigenvalues vs dispersion roots", passed, &format!("tol {tol}: {}", detail.join("; ")));
    assert!(passed);
}
