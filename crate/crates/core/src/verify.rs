//! Verification battery: closed forms against the discrete solvers, the
//! analytic identities of the spectral reduction, and the qualitative
//! stability and bifurcation results, each reported as a [`CheckReport`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{clearance_t, ModelParams, RadialSteadyState, RadialValues};
use crate::continuation::{projection, track_radial_branch, StepControl};
use crate::error::{Error, Result};
use crate::fb_solver::{
    fields_for_curve, fourier_sector_spectrum, frechet_kernel_check, linearized_spectrum, radial_solution,
    ColoredJacobian, Discretization, FbProblem, FreeBoundarySolution, Restriction, Subspace, SubspaceMap,
};
use crate::output::write_atomic;
use crate::polar_disc::{
    build_grid, radial_convergence, theta_stencil_with, AngularScheme, BoundaryCurve, PolarGrid, ThetaStencil,
};
use crate::special_fn::{bessel_i, bessel_i_prime, bessel_k, bessel_k_prime, BesselOrder};
use crate::spectral::{
    bifurcation_coefficients, bifurcation_point, dispersion, growth_rate, growth_rates, mode_monotonicity,
    mode_linearization,
};

/// Grid sizes used by the battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// Coarse grids; the whole battery takes seconds.
    Fast,
    /// The refinement ladders down to `(160, 16)`; minutes.
    Full,
}

/// What a check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    /// Exact identities of the closed forms and special functions.
    Identity,
    /// Qualitative results proved for the continuous model.
    Analytic,
    /// Discrete solvers against closed forms or analytic values.
    Oracle,
    /// Properties of the discretisation itself.
    Plumbing,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub category: Category,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub detail: String,
}

/// Nine-point angular stencil under test by the consistency check.
pub type StencilFn = fn(&PolarGrid, usize, usize) -> ThetaStencil;

fn default_stencil(grid: &PolarGrid, i: usize, j: usize) -> ThetaStencil {
    theta_stencil_with(grid, i, j, AngularScheme::default())
}

#[derive(Debug, Clone, Copy)]
pub struct BatteryOptions {
    pub scale: Scale,
    pub params: ModelParams,
    pub stencil: StencilFn,
}

impl BatteryOptions {
    pub fn new(scale: Scale) -> Self {
        Self {
            scale,
            params: ModelParams::reference(),
            stencil: default_stencil,
        }
    }
}

struct Measured {
    values: BTreeMap<String, f64>,
    passed: bool,
    detail: String,
}

impl Measured {
    fn new() -> Self {
        Self {
            values: BTreeMap::new(),
            passed: true,
            detail: String::new(),
        }
    }

    fn record(&mut self, key: impl Into<String>, value: f64) {
        self.values.insert(key.into(), value);
    }

    /// Records `value` and fails the check (with a message) when `ok` is false.
    fn expect(&mut self, key: impl Into<String>, value: f64, ok: bool) {
        let key = key.into();
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&format!("{key} = {value:e}"));
        }
        self.values.insert(key, value);
    }
}

type CheckFn = fn(&BatteryOptions) -> Result<Measured>;

struct Check {
    name: &'static str,
    category: Category,
    tolerance: f64,
    run: CheckFn,
}

fn checks() -> Vec<Check> {
    use Category::*;
    let c = |name, category, tolerance, run| Check {
        name,
        category,
        tolerance,
        run,
    };
    vec![
        c("clearance_positive_iff_ldl_positive", Analytic, 0.0, clearance_sign as CheckFn),
        c("radial_state_positive", Analytic, 0.0, radial_positivity),
        c("mode_profiles_positive", Analytic, 0.0, mode_profile_positivity),
        c("bessel_wronskian", Identity, 1e-10, wronskian),
        c("radial_state_solves_ode", Identity, 1e-6, radial_ode_residual),
        c("coefficient_monotonicity_near_wall", Analytic, 0.0, coefficient_monotonicity),
        c("degenerate_modes_bifurcate_at_zero", Identity, 1e-14, degenerate_modes),
        c("dispersion_vanishes_at_bifurcation", Identity, 1e-9, dispersion_at_bifurcation),
        c("dispersion_affine_in_ldl", Identity, 1e-9, dispersion_affine),
        c("dispersion_at_zero_ldl_is_positive", Identity, 1e-9, zero_ldl_instability),
        c("low_modes_have_no_growth_near_wall", Analytic, 0.0, low_modes_stable),
        c("some_mode_grows", Analytic, 1e-10, some_mode_grows),
        c("angular_stencil_consistency", Plumbing, 0.0, stencil_consistency),
        c("jacobian_directional_derivative", Plumbing, 1e-5, jacobian_directional),
        c("rotation_covariance", Plumbing, 1e-12, rotation_covariance),
        c("radial_convergence_order", Oracle, 0.0, convergence_order),
        c("bifurcation_error_shrinks", Oracle, 0.0, bifurcation_shrinkage),
        c("symmetric_stability_sign_change", Oracle, 0.0, symmetric_sign_change),
        c("full_spectrum_unstable", Oracle, 0.0, full_spectrum_unstable),
        c("kernel_is_cos_2theta", Oracle, 1e-2, kernel_mode),
        c("sector_rates_match_dispersion", Oracle, 0.05, sector_agreement),
    ]
}

/// Runs every check (concurrently) and returns the reports in a fixed order.
pub fn run_battery(opts: &BatteryOptions) -> Vec<CheckReport> {
    checks()
        .par_iter()
        .map(|c| {
            let (passed, measured, detail) = match (c.run)(opts) {
                Ok(m) => (m.passed, m.values, m.detail),
                Err(e) => (false, BTreeMap::new(), e.to_string()),
            };
            CheckReport {
                name: c.name.to_string(),
                category: c.category,
                passed,
                measured,
                tolerance: c.tolerance,
                detail,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct BatteryFile<'a> {
    scale: Scale,
    params: &'a ModelParams,
    passed: usize,
    failed: usize,
    checks: &'a [CheckReport],
}

/// JSON document with a summary and one record per check.
pub fn battery_json(opts: &BatteryOptions, reports: &[CheckReport]) -> Result<String> {
    let passed = reports.iter().filter(|r| r.passed).count();
    serde_json::to_string_pretty(&BatteryFile {
        scale: opts.scale,
        params: &opts.params,
        passed,
        failed: reports.len() - passed,
        checks: reports,
    })
    .map_err(|e| Error::Io(e.to_string()))
}

pub fn write_battery(path: &Path, opts: &BatteryOptions, reports: &[CheckReport]) -> Result<()> {
    write_atomic(path, battery_json(opts, reports)?.as_bytes())
}

const LDL_SAMPLES: [f64; 3] = [1.0, 3.0, 15.0];

/// `rho` with `(R - rho)/R = 0.025`.
fn near_wall(p: &ModelParams) -> ModelParams {
    p.with_rho(p.outer_radius * (1.0 - 0.025))
}

fn samples(p: &ModelParams, k: usize) -> impl Iterator<Item = f64> + '_ {
    (0..=k).map(move |i| p.rho + (p.outer_radius - p.rho) * i as f64 / k as f64)
}

fn clearance_sign(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let t0 = clearance_t(&o.params.with_ldl(0.0))?;
    m.expect("T(L=0)", t0, t0 == 0.0);
    for l in [0.5, 1.0, 3.0, 15.0, 200.0] {
        let t = clearance_t(&o.params.with_ldl(l))?;
        m.expect(format!("T(L={l})"), t, t > 0.0);
    }
    Ok(m)
}

fn radial_positivity(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let s = RadialSteadyState::new(o.params)?;
    let min = samples(&o.params, 200).map(|r| s.eval(r).map(|v| v.m)).collect::<Result<Vec<_>>>()?;
    let min = min.into_iter().fold(f64::INFINITY, f64::min);
    m.expect("min M_s", min, min > 0.0);
    Ok(m)
}

fn mode_profile_positivity(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    for n in 0..=8 {
        let mode = mode_linearization(&o.params, n)?;
        let mut min = f64::INFINITY;
        for r in samples(&o.params, 100) {
            min = min.min(mode.q(r)?);
        }
        m.expect(format!("min Q_{n}"), min, min > 0.0);
    }
    Ok(m)
}

fn wronskian(_: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let mut worst: f64 = 0.0;
    for n in 0..=10 {
        let order = BesselOrder::new(n)?;
        for x in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0] {
            let w = bessel_i(order, x)? * bessel_k_prime(order, x)? - bessel_i_prime(order, x)? * bessel_k(order, x)?;
            worst = worst.max((w * x + 1.0).abs());
        }
    }
    m.expect("max |x W + 1|", worst, worst < 1e-10);
    Ok(m)
}

fn radial_ode_residual(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let p = o.params;
    let s = RadialSteadyState::new(p)?;
    let d = 1e-4;
    let (mut res_m, mut res_p): (f64, f64) = (0.0, 0.0);
    for r in samples(&p, 20).skip(1).take(19) {
        let (a, b, c) = (s.eval(r - d)?, s.eval(r)?, s.eval(r + d)?);
        let lap = |f: fn(&RadialValues) -> f64| {
            (f(&c) - 2.0 * f(&b) + f(&a)) / (d * d) + (f(&c) - f(&a)) / (2.0 * d * r)
        };
        res_m = res_m.max((p.diffusion * lap(|v| v.m) - p.hdl * b.m).abs());
        res_p = res_p.max((-lap(|v| v.p) - (p.ldl * b.m - s.t)).abs());
    }
    m.expect("M equation", res_m, res_m < 1e-6);
    m.expect("P equation", res_p, res_p < 1e-6);
    let (inner, outer) = (s.eval(p.rho)?, s.eval(p.outer_radius)?);
    m.expect("M(rho) - 1", inner.m - 1.0, (inner.m - 1.0).abs() < 1e-12);
    m.expect("M_r + M at R", outer.dm + outer.m, (outer.dm + outer.m).abs() < 1e-12);
    m.expect("P(rho) - gamma/rho", inner.p - p.gamma / p.rho, (inner.p - p.gamma / p.rho).abs() < 1e-12);
    m.expect("P_r at R", outer.dp, outer.dp.abs() < 1e-12);
    Ok(m)
}

fn coefficient_monotonicity(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let report = mode_monotonicity(&near_wall(&o.params), 8)?;
    m.record("epsilon/R", report.epsilon_ratio);
    for (name, ok) in [
        ("C2 positive", report.c2_positive),
        ("C2 decreasing", report.c2_decreasing),
        ("C1 increasing", report.c1_increasing),
        ("L_n increasing", report.l_increasing),
    ] {
        m.expect(name, ok as u8 as f64, ok);
    }
    Ok(m)
}

fn degenerate_modes(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    for n in [0, 1] {
        let l = bifurcation_point(&o.params, n)?.l_n;
        m.expect(format!("L_{n}"), l, l.abs() <= 1e-14);
    }
    Ok(m)
}

fn dispersion_at_bifurcation(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    // Modes with C2 <= 0 have no bifurcation at positive L.
    for n in 2..=8 {
        let l = bifurcation_point(&o.params, n)?.l_n;
        if l <= 0.0 {
            continue;
        }
        let h = dispersion(0.0, n, &o.params.with_ldl(l))?;
        m.expect(format!("h(0,{n},L_{n})"), h, h.abs() < 1e-9);
    }
    Ok(m)
}

fn dispersion_affine(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    for n in 2..=6 {
        let (c1, c2) = bifurcation_coefficients(&o.params, n)?;
        for l in LDL_SAMPLES {
            let h = dispersion(0.0, n, &o.params.with_ldl(l))?;
            let d = h - (c1 - c2 * l);
            m.expect(format!("n={n} L={l}"), d, d.abs() < 1e-9);
        }
    }
    Ok(m)
}

fn zero_ldl_instability(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let p = o.params.with_ldl(0.0);
    for n in 2..=8 {
        let (c1, _) = bifurcation_coefficients(&p, n)?;
        let h = dispersion(0.0, n, &p)?;
        m.expect(format!("h(0,{n},0) - C1"), h - c1, (h - c1).abs() < 1e-9 && c1 > 0.0);
    }
    Ok(m)
}

fn low_modes_stable(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let p = near_wall(&o.params);
    for l in LDL_SAMPLES {
        for n in [0, 1] {
            let a = growth_rate(n, &p.with_ldl(l))?.a;
            m.expect(format!("a(n={n},L={l})"), a.unwrap_or(0.0), a.is_none());
        }
    }
    Ok(m)
}

fn some_mode_grows(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    for l in LDL_SAMPLES {
        let p = o.params.with_ldl(l);
        let mut best: Option<(u32, f64, f64)> = None;
        for g in growth_rates(&p, 32)?.into_iter().filter(|g| g.n >= 2) {
            if let Some(a) = g.a {
                let h = dispersion(a, g.n, &p)?;
                if h.abs() < 1e-10 && best.is_none_or(|b| a > b.1) {
                    best = Some((g.n, a, h));
                }
            }
        }
        match best {
            Some((n, a, _)) => {
                m.record(format!("L={l} mode"), n as f64);
                m.record(format!("L={l} a"), a);
            }
            None => m.expect(format!("L={l} growing modes"), 0.0, false),
        }
    }
    Ok(m)
}

/// Max error of the angular stencil on `G = r^2 sin(theta) + r cos(2 theta)`
/// over a boundary `1.6 + 0.05 cos(2 theta)`.
fn stencil_error(stencil: StencilFn, m: usize, n_r: usize) -> Result<f64> {
    let curve = BoundaryCurve::with_mode(1.6, 0.05, 2, m)?;
    let g = build_grid(&curve, 2.0, m, n_r)?;
    let f = |r: f64, t: f64| r * r * t.sin() + r * (2.0 * t).cos();
    let mut err: f64 = 0.0;
    for j in 0..m {
        for i in 1..n_r {
            let v = stencil(&g, i, j).apply(&g, i, j, |ii, jj| f(g.r(ii, jj), g.theta(jj)));
            let (r, t) = (g.r(i, j), g.theta(j));
            err = err.max((v + r * r * t.sin() + 4.0 * r * (2.0 * t).cos()).abs());
        }
    }
    Ok(err)
}

fn stencil_consistency(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let errs = [(20, 4), (40, 8), (80, 16)]
        .iter()
        .map(|&(mm, n)| stencil_error(o.stencil, mm, n))
        .collect::<Result<Vec<_>>>()?;
    for (k, w) in errs.windows(2).enumerate() {
        let order = (w[0] / w[1]).log2();
        m.expect(format!("order {k}"), order, (1.7..=2.3).contains(&order));
    }
    m.record("finest error", errs[2]);
    Ok(m)
}

fn perturbed_state(p: &ModelParams, disc: Discretization) -> Result<(FbProblem, Vec<f64>)> {
    let problem = FbProblem::new(*p, disc)?;
    let curve = BoundaryCurve::new(
        (0..disc.m)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / disc.m as f64;
                p.rho + 0.03 * (2.0 * t).cos() + 0.01 * (3.0 * t).sin()
            })
            .collect(),
    )?;
    let s = fields_for_curve(&problem, &curve)?;
    Ok((problem, s.to_vector()))
}

fn jacobian_directional(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let disc = Discretization::new(16, 4);
    let (problem, x) = perturbed_state(&o.params, disc)?;
    let map = SubspaceMap::new(&disc, Subspace::Full);
    let j = ColoredJacobian::for_problem(&disc, &map).jacobian(|y| problem.residual(y), &x)?;
    for seed in 1..=3u32 {
        let v: Vec<f64> = (0..x.len()).map(|k| ((k as f64 + 1.0) * 0.7548776662 * seed as f64).sin()).collect();
        let eps = 1e-6;
        let plus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - eps * b).collect();
        let (fp, fm) = (problem.residual(&plus)?, problem.residual(&minus)?);
        let jv = j.mul_vec(&v);
        let scale = jv.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let err = fp
            .iter()
            .zip(&fm)
            .zip(&jv)
            .map(|((a, b), c)| ((a - b) / (2.0 * eps) - c).abs())
            .fold(0.0f64, f64::max)
            / scale;
        m.expect(format!("direction {seed}"), err, err < 1e-5);
    }
    Ok(m)
}

fn rotation_covariance(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let disc = Discretization::new(16, 4);
    let (problem, x) = perturbed_state(&o.params, disc)?;
    let s = FreeBoundarySolution::from_vector(&problem, &x, 0.0)?;
    let norm = |v: Vec<f64>| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let a = norm(s.residual()?);
    let b = norm(s.rotated(1)?.residual()?);
    m.expect("relative difference", (a - b) / a, ((a - b) / a).abs() < 1e-12);
    Ok(m)
}

fn convergence_ladder(scale: Scale) -> Vec<(usize, usize)> {
    match scale {
        Scale::Fast => vec![(20, 2), (40, 4), (80, 8)],
        Scale::Full => vec![(20, 2), (40, 4), (80, 8), (160, 16)],
    }
}

fn convergence_order(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let levels = radial_convergence(&o.params, &convergence_ladder(o.scale), AngularScheme::default())?;
    for l in &levels {
        if let Some(order) = l.order {
            m.expect(format!("order at n_r={}", l.n_r), order, (1.8..=2.2).contains(&order));
        }
    }
    m.record("finest error", levels.last().map_or(f64::NAN, |l| l.err));
    Ok(m)
}

fn bifurcation_shrinkage(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let modes: Vec<u32> = match o.scale {
        Scale::Fast => vec![2, 3],
        Scale::Full => vec![2, 3, 4],
    };
    let exact: Vec<f64> = modes
        .iter()
        .map(|&n| bifurcation_point(&o.params, n).map(|b| b.l_n))
        .collect::<Result<_>>()?;
    let l_max = 1.1 * exact.last().copied().unwrap_or(0.0);
    let ladder = convergence_ladder(o.scale);
    let tracks = ladder
        .par_iter()
        .map(|&(mm, n_r)| track_radial_branch(&o.params, &Discretization::new(mm, n_r), 0.0, l_max, &StepControl::default()))
        .collect::<Result<Vec<_>>>()?;
    let mut errors = vec![Vec::new(); modes.len()];
    for (t, &(mm, n_r)) in tracks.iter().zip(&ladder) {
        let found: Vec<u32> = t.detections.iter().map(|d| d.mode_estimate).collect();
        let ordered = found.windows(2).all(|w| w[0] < w[1]);
        m.expect(format!("ordered detections ({mm},{n_r})"), ordered as u8 as f64, ordered);
        for (k, (&n, &l_n)) in modes.iter().zip(&exact).enumerate() {
            let err = t
                .detections
                .iter()
                .find(|d| d.mode_estimate == n)
                .map_or(f64::INFINITY, |d| (d.l_tilde - l_n).abs());
            m.record(format!("n={n} err ({mm},{n_r})"), err);
            errors[k].push(err);
        }
    }
    for (k, &n) in modes.iter().enumerate() {
        for (level, w) in errors[k].windows(2).enumerate() {
            let ratio = w[0] / w[1];
            m.expect(format!("n={n} shrink {level}"), ratio, ratio >= 3.0);
        }
    }
    Ok(m)
}

fn symmetric_re_max(p: &ModelParams, n_r: usize, l: f64) -> Result<f64> {
    let disc = Discretization::new(8, n_r);
    Ok(linearized_spectrum(&radial_solution(&p.with_ldl(l), &disc)?, Restriction::RadiallySymmetric)?.re_max())
}

fn symmetric_sign_change(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let levels = match o.scale {
        Scale::Fast => [8, 16],
        Scale::Full => [16, 32],
    };
    for n_r in levels {
        let (lo, hi) = (symmetric_re_max(&o.params, n_r, 100.0)?, symmetric_re_max(&o.params, n_r, 200.0)?);
        m.expect(format!("re_max(100) n_r={n_r}"), lo, lo < 0.0);
        m.expect(format!("re_max(200) n_r={n_r}"), hi, hi > 0.0);
        if lo < 0.0 && hi > 0.0 {
            let (mut a, mut b) = (100.0, 200.0);
            while b - a > 1e-2 {
                let c = 0.5 * (a + b);
                if symmetric_re_max(&o.params, n_r, c)? < 0.0 {
                    a = c;
                } else {
                    b = c;
                }
            }
            m.record(format!("sign change n_r={n_r}"), 0.5 * (a + b));
        }
    }
    Ok(m)
}

fn full_spectrum_unstable(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let disc = match o.scale {
        Scale::Fast => Discretization::new(16, 4),
        Scale::Full => Discretization::new(32, 8),
    };
    for l in [0.0, 3.0, 15.0, 120.0, 200.0] {
        let re = linearized_spectrum(&radial_solution(&o.params.with_ldl(l), &disc)?, Restriction::Full)?.re_max();
        m.expect(format!("re_max(L={l})"), re, re > 0.0);
    }
    let radial = radial_solution(&o.params, &disc)?;
    m.expect("radial projection", projection(&radial.curve), projection(&radial.curve) == 0.0);
    Ok(m)
}

fn kernel_mode(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let disc = Discretization::new(80, 8);
    let l2 = bifurcation_point(&o.params, 2)?.l_n;
    let at = frechet_kernel_check(&o.params.with_ldl(l2), &disc, 2)?;
    m.expect("correlation with cos(2 theta)", at.correlation, at.correlation > 0.99);
    let c3 = at.correlation_with(3);
    m.expect("correlation with cos(3 theta)", c3, c3 < 1e-2);
    let away = frechet_kernel_check(&o.params.with_ldl(0.5 * at.ldl), &disc, 2)?;
    let ratio = away.smallest_singular_value / at.smallest_singular_value;
    m.expect("singular value ratio L_2/2 vs L_2", ratio, ratio > 10.0);
    Ok(m)
}

fn sector_agreement(o: &BatteryOptions) -> Result<Measured> {
    let mut m = Measured::new();
    let (disc, n_max) = match o.scale {
        Scale::Fast => (Discretization::new(32, 8), 4),
        Scale::Full => (Discretization::new(64, 16), 6),
    };
    let l = 3.0;
    let solution = radial_solution(&o.params.with_ldl(l), &disc)?;
    for n in 0..=n_max {
        if let Some(a) = growth_rate(n, &o.params.with_ldl(l))?.a {
            let discrete = fourier_sector_spectrum(&solution, n)?[0].re;
            let rel = (discrete - a).abs() / a;
            m.expect(format!("n={n} relative error"), rel, rel < 0.05);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corrupted(grid: &PolarGrid, i: usize, j: usize) -> ThetaStencil {
        let mut st = default_stencil(grid, i, j);
        st.a[3] *= 1.02;
        st
    }

    #[test]
    fn check_names_are_unique() {
        let mut names: Vec<&str> = checks().iter().map(|c| c.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), checks().len());
    }

    #[test]
    fn corrupted_stencil_fails_consistency() {
        let good = stencil_consistency(&BatteryOptions::new(Scale::Fast)).unwrap();
        assert!(good.passed, "{}", good.detail);
        let bad = stencil_consistency(&BatteryOptions {
            stencil: corrupted,
            ..BatteryOptions::new(Scale::Fast)
        })
        .unwrap();
        assert!(!bad.passed);
    }

    #[test]
    fn identity_checks_pass() {
        let o = BatteryOptions::new(Scale::Fast);
        for check in checks().iter().filter(|c| c.category == Category::Identity) {
            let r = (check.run)(&o).unwrap();
            assert!(r.passed, "{}: {}", check.name, r.detail);
        }
    }
}
