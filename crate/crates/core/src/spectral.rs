//! Mode-`n` linearisation about the radial steady state: the profile `Q_n`,
//! the bifurcation values `L_n = C_1 / C_2`, and the growth-rate dispersion
//! relation `h(a, n, L)`.

use rayon::prelude::*;
use roots::{find_root_brent, SimpleConvergency};
use serde::Serialize;

use crate::closed_form::{ModelParams, RadialSteadyState};
use crate::error::{Error, Result};
use crate::special_fn::{i_unchecked, k_unchecked};

/// Default upper mode for scans.
pub const DEFAULT_MODE_SCAN: u32 = 32;

const A_MAX_START: f64 = 1e3;
const A_MAX_CAP: f64 = 1e9;

/// Solution of `u'' + u'/r - (sigma^2 + n^2/r^2) u = 0` on `[rho, R]` with
/// `u(rho) = 1` and `u'(R) + u(R) = 0`, stored as
/// `(I_n(sigma r) d_k - K_n(sigma r) d_i) / denom` so that no individual
/// coefficient over- or underflows.
#[derive(Debug, Clone, Copy)]
struct RobinProfile {
    n: u32,
    sigma: f64,
    d_i: f64,
    d_k: f64,
    denom: f64,
}

impl RobinProfile {
    fn new(n: u32, sigma: f64, rho: f64, big_r: f64) -> Result<Self> {
        let zr = sigma * big_r;
        let d_i = i_unchecked(n, zr)? + sigma * i_prime(n, zr)?;
        let d_k = k_unchecked(n, zr)? + sigma * k_prime(n, zr)?;
        let zp = sigma * rho;
        let denom = i_unchecked(n, zp)? * d_k - k_unchecked(n, zp)? * d_i;
        if !denom.is_finite() || denom == 0.0 {
            return Err(Error::Singular(format!(
                "mode {n} profile has vanishing denominator I_n + K K_n at the free boundary"
            )));
        }
        Ok(Self {
            n,
            sigma,
            d_i,
            d_k,
            denom,
        })
    }

    fn value(&self, r: f64) -> Result<f64> {
        let z = self.sigma * r;
        Ok((i_unchecked(self.n, z)? * self.d_k - k_unchecked(self.n, z)? * self.d_i) / self.denom)
    }

    fn slope(&self, r: f64) -> Result<f64> {
        let z = self.sigma * r;
        Ok(self.sigma * (i_prime(self.n, z)? * self.d_k - k_prime(self.n, z)? * self.d_i) / self.denom)
    }
}

fn i_prime(n: u32, z: f64) -> Result<f64> {
    if n == 0 {
        i_unchecked(1, z)
    } else {
        Ok(n as f64 / z * i_unchecked(n, z)? + i_unchecked(n + 1, z)?)
    }
}

fn k_prime(n: u32, z: f64) -> Result<f64> {
    Ok(n as f64 / z * k_unchecked(n, z)? - k_unchecked(n + 1, z)?)
}

/// Harmonic `W` of mode `n` on `[rho, R]` with `W(rho) = w_rho` and
/// `W'(R) = g_r`, written as `alpha (r/rho)^n + beta (rho/r)^n`
/// (`alpha + beta ln(r/rho)` for `n = 0`). Returns `(alpha, beta)`.
fn harmonic_coefficients(n: u32, rho: f64, big_r: f64, w_rho: f64, g_r: f64) -> (f64, f64) {
    if n == 0 {
        let beta = big_r * g_r;
        return (w_rho, beta);
    }
    let nf = n as f64;
    let q = (rho / big_r).powi(n as i32);
    let beta = (w_rho - g_r * big_r * q / nf) / (1.0 + q * q);
    (w_rho - beta, beta)
}

fn harmonic_slope_at_rho(n: u32, rho: f64, alpha: f64, beta: f64) -> f64 {
    if n == 0 {
        beta / rho
    } else {
        n as f64 * (alpha - beta) / rho
    }
}

/// Mode-`n` perturbation of the radial state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeLinearization {
    pub n: u32,
    /// Coefficient of `I_n(s r)` in `Q_n`.
    pub tilde_c1: f64,
    /// Coefficient of `K_n(s r)` in `Q_n`.
    pub tilde_c2: f64,
    /// `K = tilde_c2 / tilde_c1`, fixed by the Robin condition at `R`.
    pub k_ratio: f64,
    /// Coefficient of `r^n` (of `1` when `n = 0`) in `P_1 + (DL/H) Q_n`.
    pub tilde_c3: f64,
    /// Coefficient of `r^-n` (of `ln r` when `n = 0`) in `P_1 + (DL/H) Q_n`.
    pub tilde_c4: f64,
    #[serde(skip)]
    profile: RobinProfile,
    #[serde(skip)]
    amplitude: f64,
    #[serde(skip)]
    params: ModelParams,
    #[serde(skip)]
    harmonic: (f64, f64),
}

impl ModeLinearization {
    /// `Q_n(r)`.
    pub fn q(&self, r: f64) -> Result<f64> {
        Ok(self.amplitude * self.profile.value(r)?)
    }

    /// `Q_n'(r)`.
    pub fn dq(&self, r: f64) -> Result<f64> {
        Ok(self.amplitude * self.profile.slope(r)?)
    }

    /// Radial profile of the pressure perturbation `P_1(r)` for a boundary
    /// perturbation `cos(n theta)`.
    pub fn p1(&self, r: f64) -> Result<f64> {
        let (alpha, beta) = self.harmonic;
        let rho = self.params.rho;
        let w = if self.n == 0 {
            alpha + beta * (r / rho).ln()
        } else {
            alpha * (r / rho).powi(self.n as i32) + beta * (rho / r).powi(self.n as i32)
        };
        Ok(w - self.params.pressure_weight() * self.q(r)?)
    }

    /// `P_1'(r)`.
    pub fn dp1(&self, r: f64) -> Result<f64> {
        let (alpha, beta) = self.harmonic;
        let rho = self.params.rho;
        let nf = self.n as f64;
        let dw = if self.n == 0 {
            beta / r
        } else {
            nf / r * (alpha * (r / rho).powi(self.n as i32) - beta * (rho / r).powi(self.n as i32))
        };
        Ok(dw - self.params.pressure_weight() * self.dq(r)?)
    }
}

/// Computes `Q_n` and the pressure perturbation coefficients.
pub fn mode_linearization(params: &ModelParams, n: u32) -> Result<ModeLinearization> {
    let radial = RadialSteadyState::new(*params)?;
    mode_linearization_with(&radial, n)
}

fn mode_linearization_with(radial: &RadialSteadyState, n: u32) -> Result<ModeLinearization> {
    let params = radial.params;
    let (rho, big_r) = (params.rho, params.outer_radius);
    let s = params.decay_rate();
    let profile = RobinProfile::new(n, s, rho, big_r)?;
    let amplitude = -radial.eval(rho)?.dm;
    let tilde_c1 = amplitude * profile.d_k / profile.denom;
    let tilde_c2 = -amplitude * profile.d_i / profile.denom;
    let k = params.pressure_weight();
    let q_rho = amplitude;
    let q_r = amplitude * profile.value(big_r)?;
    let w_rho = params.gamma * (n as f64 * n as f64 - 1.0) / (rho * rho) + k * q_rho;
    let g_r = -k * q_r;
    let (alpha, beta) = harmonic_coefficients(n, rho, big_r, w_rho, g_r);
    let (tilde_c3, tilde_c4) = if n == 0 {
        (alpha - beta * rho.ln(), beta)
    } else {
        (alpha / rho.powi(n as i32), beta * rho.powi(n as i32))
    };
    Ok(ModeLinearization {
        n,
        tilde_c1,
        tilde_c2,
        k_ratio: -profile.d_i / profile.d_k,
        tilde_c3,
        tilde_c4,
        profile,
        amplitude,
        params,
        harmonic: (alpha, beta),
    })
}

/// Bifurcation value of mode `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationRecord {
    pub n: u32,
    pub l_n: f64,
    pub c1_val: f64,
    pub c2_val: f64,
}

/// `(C_1(n), C_2(n))` at the geometry of `params` (independent of `L`).
pub fn bifurcation_coefficients(params: &ModelParams, n: u32) -> Result<(f64, f64)> {
    let unit = params.with_ldl(1.0);
    let radial = RadialSteadyState::new(unit)?;
    coefficients_with(&radial, n)
}

fn coefficients_with(radial: &RadialSteadyState, n: u32) -> Result<(f64, f64)> {
    let p = radial.params;
    let (rho, big_r, d_over_h) = (p.rho, p.outer_radius, p.diffusion / p.hdl);
    let mode = mode_linearization_with(radial, n)?;
    let q = (rho / big_r).powi(n as i32);
    let nf = n as f64;
    let c1 = p.gamma * (nf * nf * nf - nf) * (1.0 - q * q) / (rho.powi(3) * (1.0 + q * q));
    let m_r = radial.eval(big_r)?.m;
    let dm_rho = radial.eval(rho)?.dm;
    let q_rho = mode.q(rho)?;
    let q_r = mode.q(big_r)?;
    let c2 = -d_over_h * 2.0 / (big_r * big_r - rho * rho) * (big_r * m_r + rho * dm_rho)
        - d_over_h * mode.dq(rho)?
        - d_over_h * (2.0 * big_r * q * q_r + nf * (1.0 - q * q) * q_rho) / (rho * (1.0 + q * q))
        - 1.0;
    Ok((c1, c2))
}

/// `L_n = C_1 / C_2`.
pub fn bifurcation_point(params: &ModelParams, n: u32) -> Result<BifurcationRecord> {
    let (c1, c2) = bifurcation_coefficients(params, n)?;
    if !c2.is_finite() || c2.abs() <= 1e-14 * (1.0 + c1.abs()) {
        return Err(Error::Singular(format!(
            "degenerate bifurcation for mode {n}: C2 = {c2:e}"
        )));
    }
    Ok(BifurcationRecord {
        n,
        l_n: c1 / c2,
        c1_val: c1,
        c2_val: c2,
    })
}

/// One row of a mode monotonicity report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityEntry {
    pub n: u32,
    pub c1: f64,
    pub c2: f64,
    pub l_n: f64,
}

/// Monotonicity of `C_1`, `C_2` and `L_n` in the mode number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// `(R - rho) / R`.
    pub epsilon_ratio: f64,
    /// Whether `(R - rho)/R <= 0.05`, the regime in which the properties are expected.
    pub in_regime: bool,
    pub entries: Vec<MonotonicityEntry>,
    pub c2_positive: bool,
    pub c2_decreasing: bool,
    pub c1_increasing: bool,
    pub l_increasing: bool,
}

impl MonotonicityReport {
    pub fn all_hold(&self) -> bool {
        self.c2_positive && self.c2_decreasing && self.c1_increasing && self.l_increasing
    }
}

/// Evaluates `C_1`, `C_2`, `L_n` for `n = 2..=n_max` and reports the
/// monotonicity properties. Violations are reported, never raised.
pub fn mode_monotonicity(params: &ModelParams, n_max: u32) -> Result<MonotonicityReport> {
    let unit = params.with_ldl(1.0);
    let radial = RadialSteadyState::new(unit)?;
    let mut entries = Vec::new();
    for n in 2..=n_max.max(2) {
        let (c1, c2) = coefficients_with(&radial, n)?;
        entries.push(MonotonicityEntry {
            n,
            c1,
            c2,
            l_n: c1 / c2,
        });
    }
    let pairs = || entries.windows(2).map(|w| (w[0], w[1]));
    let epsilon_ratio = (params.outer_radius - params.rho) / params.outer_radius;
    Ok(MonotonicityReport {
        epsilon_ratio,
        in_regime: epsilon_ratio <= 0.05 + 1e-12,
        c2_positive: entries.iter().all(|e| e.c2 > 0.0),
        c2_decreasing: pairs().all(|(a, b)| b.c2 < a.c2),
        c1_increasing: pairs().all(|(a, b)| b.c1 > a.c1),
        l_increasing: pairs().all(|(a, b)| b.l_n > a.l_n),
        entries,
    })
}

/// Dispersion relation `h(a, n, L)`; a positive root `a` is the growth rate of
/// a `cos(n theta)` boundary perturbation. `L` is `params.ldl`.
pub fn dispersion(a: f64, n: u32, params: &ModelParams) -> Result<f64> {
    let radial = RadialSteadyState::new(*params)?;
    dispersion_with(&radial, a, n)
}

fn dispersion_with(radial: &RadialSteadyState, a: f64, n: u32) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::Domain {
            func: "dispersion",
            arg: a,
        });
    }
    let p = radial.params;
    let (rho, big_r) = (p.rho, p.outer_radius);
    let sigma = ((p.hdl + a) / p.diffusion).sqrt();
    let profile = RobinProfile::new(n, sigma, rho, big_r)?;
    let u_rho = -radial.eval(rho)?.dm;
    let u_r = u_rho * profile.value(big_r)?;
    let du_rho = u_rho * profile.slope(rho)?;
    let k = p.diffusion * p.ldl / (p.hdl + a);
    let w_rho = p.gamma * (n as f64 * n as f64 - 1.0) / (rho * rho) + k * u_rho;
    let (alpha, beta) = harmonic_coefficients(n, rho, big_r, w_rho, -k * u_r);
    let dp1 = harmonic_slope_at_rho(n, rho, alpha, beta) - k * du_rho;
    Ok(p.ldl - radial.t - a - dp1)
}

/// Real non-negative growth rate of mode `n` at `L = params.ldl`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRate {
    pub n: u32,
    pub ldl: f64,
    pub a: Option<f64>,
}

/// Brent root of `h(., n, L)` on `[0, a_max]`, with `a_max` doubling from
/// `1e3` until `h(a_max) < 0`.
pub fn growth_rate(n: u32, params: &ModelParams) -> Result<GrowthRate> {
    let radial = RadialSteadyState::new(*params)?;
    growth_rate_with(&radial, n)
}

fn growth_rate_with(radial: &RadialSteadyState, n: u32) -> Result<GrowthRate> {
    let h0 = dispersion_with(radial, 0.0, n)?;
    let absent = GrowthRate {
        n,
        ldl: radial.params.ldl,
        a: None,
    };
    let (lo, hi) = if h0 > 0.0 {
        let mut a_max = A_MAX_START;
        loop {
            if dispersion_with(radial, a_max, n)? < 0.0 {
                break (0.0, a_max);
            }
            a_max *= 2.0;
            if a_max > A_MAX_CAP {
                return Err(Error::NoSolution(format!(
                    "no sign change of h(., {n}, L) below a = {A_MAX_CAP:e}"
                )));
            }
        }
    } else {
        // Look for an interior positive excursion on a geometric grid.
        let mut prev = (0.0, h0);
        let mut bracket = None;
        let mut a = 1e-3;
        while a <= A_MAX_START {
            let v = dispersion_with(radial, a, n)?;
            if prev.1 <= 0.0 && v > 0.0 {
                let mut b = 2.0 * a;
                while dispersion_with(radial, b, n)? > 0.0 {
                    b *= 2.0;
                    if b > A_MAX_CAP {
                        return Err(Error::NoSolution(format!("no upper bracket for mode {n}")));
                    }
                }
                bracket = Some((a, b));
                break;
            }
            prev = (a, v);
            a *= 1.5;
        }
        match bracket {
            Some(b) => b,
            None => return Ok(absent),
        }
    };
    let mut failure = None;
    let mut f = |a: f64| match dispersion_with(radial, a, n) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let mut conv = SimpleConvergency {
        eps: 1e-13,
        max_iter: 500,
    };
    let root = find_root_brent(lo, hi, &mut f, &mut conv);
    if let Some(e) = failure {
        return Err(e);
    }
    let a = root.map_err(|e| Error::NoSolution(format!("dispersion root for mode {n}: {e:?}")))?;
    if a <= 0.0 {
        return Ok(absent);
    }
    Ok(GrowthRate {
        a: Some(a),
        ..absent
    })
}

/// Growth rates of modes `0..=n_max`, computed in parallel.
pub fn growth_rates(params: &ModelParams, n_max: u32) -> Result<Vec<GrowthRate>> {
    let radial = RadialSteadyState::new(*params)?;
    (0..=n_max)
        .into_par_iter()
        .map(|n| growth_rate_with(&radial, n))
        .collect()
}
