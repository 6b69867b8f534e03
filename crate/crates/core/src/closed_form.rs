//! Radially symmetric steady states on the annulus `rho <= r <= R`.
//!
//! `M_s(r) = c1 I_0(s r) + c2 K_0(s r)` with `s = sqrt(H/D)`, and
//! `P_s(r) = -(DL/H) M_s(r) + c3 ln r + c4 + T r^2 / 4`.

use roots::{find_root_brent, SimpleConvergency};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{i_unchecked, k_unchecked};

/// Physical and geometric constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Diffusion coefficient `D`.
    pub diffusion: f64,
    /// HDL concentration `H`.
    pub hdl: f64,
    /// LDL concentration `L`.
    pub ldl: f64,
    /// Surface-tension coefficient `gamma`.
    pub gamma: f64,
    /// Fixed outer radius `R`.
    pub outer_radius: f64,
    /// Radius of the free boundary for the radial state.
    pub rho: f64,
}

impl ModelParams {
    pub fn new(diffusion: f64, hdl: f64, ldl: f64, gamma: f64, outer_radius: f64, rho: f64) -> Result<Self> {
        let p = Self {
            diffusion,
            hdl,
            ldl,
            gamma,
            outer_radius,
            rho,
        };
        p.validate()?;
        Ok(p)
    }

    /// `D = 1, H = 3, L = 3, gamma = 2, R = 2, rho = 1.6`.
    pub fn reference() -> Self {
        Self {
            diffusion: 1.0,
            hdl: 3.0,
            ldl: 3.0,
            gamma: 2.0,
            outer_radius: 2.0,
            rho: 1.6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("diffusion", self.diffusion),
            ("hdl", self.hdl),
            ("gamma", self.gamma),
            ("outer_radius", self.outer_radius),
            ("rho", self.rho),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.ldl.is_finite() && self.ldl >= 0.0) {
            return Err(Error::InvalidParams(format!("ldl must be non-negative, got {}", self.ldl)));
        }
        if self.rho >= self.outer_radius {
            return Err(Error::InvalidParams(format!(
                "rho = {} must be smaller than outer_radius = {}",
                self.rho, self.outer_radius
            )));
        }
        Ok(())
    }

    pub fn with_ldl(mut self, ldl: f64) -> Self {
        self.ldl = ldl;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    /// `s = sqrt(H/D)`.
    pub fn decay_rate(&self) -> f64 {
        (self.hdl / self.diffusion).sqrt()
    }

    /// `D L / H`, the weight of `M` in the harmonic combination `P + (DL/H) M`.
    pub fn pressure_weight(&self) -> f64 {
        self.diffusion * self.ldl / self.hdl
    }
}

/// Closed-form radial steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSteadyState {
    pub params: ModelParams,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub t: f64,
}

/// Pointwise values of the radial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialValues {
    pub m: f64,
    pub p: f64,
    pub dm: f64,
    pub dp: f64,
    pub d2p: f64,
}

/// Coefficients of `M_s` from `M_s(rho) = 1` and `M_s'(R) + M_s(R) = 0`.
pub fn solve_radial_m(params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    let s = params.decay_rate();
    let (zr, zp) = (s * params.outer_radius, s * params.rho);
    let (i0r, i1r) = (i_unchecked(0, zr)?, i_unchecked(1, zr)?);
    let (k0r, k1r) = (k_unchecked(0, zr)?, k_unchecked(1, zr)?);
    let (i0p, k0p) = (i_unchecked(0, zp)?, k_unchecked(0, zp)?);
    let denom = (i0r * k0p - i0p * k0r) + s * (k1r * i0p + i1r * k0p);
    if !denom.is_finite() || denom.abs() < 1e-300 {
        return Err(Error::Singular(format!(
            "radial M system has denominator {denom:e}"
        )));
    }
    Ok(((s * k1r - k0r) / denom, (s * i1r + i0r) / denom))
}

fn m_and_dm(params: &ModelParams, c1: f64, c2: f64, r: f64) -> Result<(f64, f64)> {
    let s = params.decay_rate();
    let z = s * r;
    let m = c1 * i_unchecked(0, z)? + c2 * k_unchecked(0, z)?;
    let dm = s * (c1 * i_unchecked(1, z)? - c2 * k_unchecked(1, z)?);
    Ok((m, dm))
}

/// Clearance rate `T = -(DL/H) (2/(R^2 - rho^2)) (R M_s(R) + rho M_s'(rho))`.
pub fn clearance_t(params: &ModelParams) -> Result<f64> {
    let (c1, c2) = solve_radial_m(params)?;
    clearance_from_coefficients(params, c1, c2)
}

fn clearance_from_coefficients(params: &ModelParams, c1: f64, c2: f64) -> Result<f64> {
    let (big_r, rho) = (params.outer_radius, params.rho);
    let (m_r, _) = m_and_dm(params, c1, c2, big_r)?;
    let (_, dm_rho) = m_and_dm(params, c1, c2, rho)?;
    Ok(-params.pressure_weight() * 2.0 / (big_r * big_r - rho * rho) * (big_r * m_r + rho * dm_rho))
}

/// Coefficients `(c3, c4)` of `P_s` for the clearance rate `t`.
///
/// `t` must be the value returned by [`clearance_t`]; the three boundary
/// conditions on `P_s` are only compatible for that value.
pub fn solve_radial_p(params: &ModelParams, t: f64) -> Result<(f64, f64)> {
    let (c1, c2) = solve_radial_m(params)?;
    let expected = clearance_from_coefficients(params, c1, c2)?;
    if (t - expected).abs() > 1e-9 * expected.abs().max(1.0) {
        return Err(Error::InvalidParams(format!(
            "clearance rate {t} is incompatible with the boundary conditions (expected {expected})"
        )));
    }
    p_coefficients(params, c1, c2, t)
}

fn p_coefficients(params: &ModelParams, c1: f64, c2: f64, t: f64) -> Result<(f64, f64)> {
    let (big_r, rho, k) = (params.outer_radius, params.rho, params.pressure_weight());
    let (m_r, _) = m_and_dm(params, c1, c2, big_r)?;
    let (_, dm_rho) = m_and_dm(params, c1, c2, rho)?;
    let c3 = k * big_r * big_r * rho * rho / (big_r * big_r - rho * rho) * (dm_rho / rho + m_r / big_r);
    let c4 = params.gamma / rho + k - c3 * rho.ln() - 0.25 * t * rho * rho;
    Ok((c3, c4))
}

/// Radius `rho` whose clearance rate equals `t`, by bracketing on
/// `[1e-3 R, (1 - 1e-3) R]`.
pub fn rho_for_clearance(params: &ModelParams, t: f64) -> Result<f64> {
    let big_r = params.outer_radius;
    let (lo, hi) = (1e-3 * big_r, big_r - 1e-3 * big_r);
    let mut failure = None;
    let mut f = |rho: f64| match clearance_t(&params.with_rho(rho)) {
        Ok(v) => v - t,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo * f_hi <= 0.0) {
        return Err(Error::NoSolution(format!(
            "clearance rate {t} is not bracketed on [{lo}, {hi}]"
        )));
    }
    let mut conv = SimpleConvergency {
        eps: 1e-14,
        max_iter: 200,
    };
    let root = find_root_brent(lo, hi, &mut f, &mut conv);
    if let Some(e) = failure {
        return Err(e);
    }
    root.map_err(|e| Error::NoSolution(format!("inverse clearance map: {e:?}")))
}

impl RadialSteadyState {
    pub fn new(params: ModelParams) -> Result<Self> {
        let (c1, c2) = solve_radial_m(&params)?;
        let t = clearance_from_coefficients(&params, c1, c2)?;
        let (c3, c4) = p_coefficients(&params, c1, c2, t)?;
        Ok(Self {
            params,
            c1,
            c2,
            c3,
            c4,
            t,
        })
    }

    /// Values and derivatives at `rho <= r <= R`.
    pub fn eval(&self, r: f64) -> Result<RadialValues> {
        let (rho, big_r) = (self.params.rho, self.params.outer_radius);
        let slack = 1e-12 * big_r;
        if !(r >= rho - slack && r <= big_r + slack) {
            return Err(Error::Domain {
                func: "RadialSteadyState::eval",
                arg: r,
            });
        }
        let k = self.params.pressure_weight();
        let (m, dm) = m_and_dm(&self.params, self.c1, self.c2, r)?;
        let d2m = self.params.hdl / self.params.diffusion * m - dm / r;
        Ok(RadialValues {
            m,
            p: -k * m + self.c3 * r.ln() + self.c4 + 0.25 * self.t * r * r,
            dm,
            dp: -k * dm + self.c3 / r + 0.5 * self.t * r,
            d2p: -k * d2m - self.c3 / (r * r) + 0.5 * self.t,
        })
    }

    /// Second radial derivative of `M_s`.
    pub fn d2m(&self, r: f64) -> Result<f64> {
        let v = self.eval(r)?;
        Ok(self.params.hdl / self.params.diffusion * v.m - v.dm / r)
    }
}
