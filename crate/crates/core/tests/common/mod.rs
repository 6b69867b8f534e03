//! Chebyshev collocation on `[rho, R]` for the radial state and its mode-`n`
//! linearisation. Shares nothing with the library's Bessel-function route,
//! so agreement between the two is evidence for both.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;

use faer::prelude::*;
use faer::Mat;

use plaque::closed_form::ModelParams;

/// Number of collocation intervals.
pub const N: usize = 64;

/// Writes one `PASS`/`FAIL` line straight to the process stderr so that it
/// shows up in the test log whether or not output is captured.
pub fn report(name: &str, passed: bool, detail: &str) {
    let line = format!("\n{} {name}: {detail}\n", if passed { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

/// Collocation points and first-derivative matrix on `[a, b]`, ordered from
/// `b` (index 0) down to `a` (index `N`).
pub struct Cheb {
    pub r: Vec<f64>,
    /// Clenshaw-Curtis quadrature weights on `[a, b]`.
    pub w: Vec<f64>,
    pub d1: Mat<f64>,
    pub d2: Mat<f64>,
}

impl Cheb {
    pub fn new(a: f64, b: f64) -> Self {
        let x: Vec<f64> = (0..=N).map(|j| (PI * j as f64 / N as f64).cos()).collect();
        let c = |j: usize| if j == 0 || j == N { 2.0 } else { 1.0 };
        let sign = |j: usize| if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut d = Mat::<f64>::zeros(N + 1, N + 1);
        for i in 0..=N {
            for j in 0..=N {
                if i != j {
                    d[(i, j)] = c(i) / c(j) * sign(i + j) / (x[i] - x[j]);
                }
            }
        }
        for i in 0..=N {
            let s: f64 = (0..=N).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
            d[(i, i)] = -s;
        }
        let scale = 2.0 / (b - a);
        let d1 = &d * scale;
        let d2 = &d1 * &d1;
        let r = x.iter().map(|&xi| 0.5 * (a + b) + 0.5 * (b - a) * xi).collect();
        let mut w = vec![0.0; N + 1];
        for (j, wj) in w.iter_mut().enumerate() {
            let theta = PI * j as f64 / N as f64;
            let mut v = 1.0;
            for k in 1..N / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            v -= (N as f64 * theta).cos() / ((N * N) as f64 - 1.0);
            let edge = if j == 0 || j == N { 1.0 } else { 2.0 };
            *wj = 0.5 * (b - a) * edge * v / N as f64;
        }
        Self { r, w, d1, d2 }
    }

    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..=N).map(|i| self.w[i] * f(i)).sum()
    }

    /// Solves `u'' + u'/r - (n^2/r^2 + s2) u = f` with `u'(b) + robin u(b) = g_b`
    /// and `u(a) = u_a`.
    pub fn solve(&self, n: f64, s2: f64, f: &[f64], robin: f64, g_b: f64, u_a: f64) -> Vec<f64> {
        let mut a = Mat::<f64>::zeros(N + 1, N + 1);
        let mut rhs = Mat::<f64>::zeros(N + 1, 1);
        for i in 1..N {
            let r = self.r[i];
            for j in 0..=N {
                a[(i, j)] = self.d2[(i, j)] + self.d1[(i, j)] / r;
            }
            a[(i, i)] -= n * n / (r * r) + s2;
            rhs[(i, 0)] = f[i];
        }
        for j in 0..=N {
            a[(0, j)] = self.d1[(0, j)];
        }
        a[(0, 0)] += robin;
        rhs[(0, 0)] = g_b;
        a[(N, N)] = 1.0;
        rhs[(N, 0)] = u_a;
        let u = a.partial_piv_lu().solve(&rhs);
        (0..=N).map(|i| u[(i, 0)]).collect()
    }

    pub fn derivative(&self, u: &[f64]) -> Vec<f64> {
        (0..=N).map(|i| (0..=N).map(|j| self.d1[(i, j)] * u[j]).sum()).collect()
    }
}

/// Radial state `(M, P)` and clearance rate `T` by collocation.
pub struct RadialOracle {
    pub params: ModelParams,
    pub cheb: Cheb,
    pub m: Vec<f64>,
    pub dm: Vec<f64>,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub t: f64,
}

impl RadialOracle {
    pub fn new(params: ModelParams) -> Self {
        let (rho, big_r) = (params.rho, params.outer_radius);
        let cheb = Cheb::new(rho, big_r);
        let zero = vec![0.0; N + 1];
        let m = cheb.solve(0.0, params.hdl / params.diffusion, &zero, 1.0, 0.0, 1.0);
        let dm = cheb.derivative(&m);
        // Integrating -Delta P = L M - T against r dr with P_r = 0 at both ends
        // ties T to the mass of M.
        let mass = cheb.integrate(|i| m[i] * cheb.r[i]);
        let t = params.ldl * mass / (0.5 * (big_r * big_r - rho * rho));
        let f: Vec<f64> = m.iter().map(|&mi| -(params.ldl * mi - t)).collect();
        let p = cheb.solve(0.0, 0.0, &f, 0.0, 0.0, params.gamma / rho);
        let dp = cheb.derivative(&p);
        Self {
            params,
            cheb,
            m,
            dm,
            p,
            dp,
            t,
        }
    }

    /// Dispersion relation: the boundary growth rate of a `cos(n theta)`
    /// perturbation minus `a`, with the perturbed fields relaxing as `e^{a t}`.
    pub fn dispersion(&self, a: f64, n: u32) -> f64 {
        let p = &self.params;
        let rho = p.rho;
        let nf = n as f64;
        let zero = vec![0.0; N + 1];
        let u = self.cheb.solve(nf, (p.hdl + a) / p.diffusion, &zero, 1.0, 0.0, -self.dm[N]);
        let f: Vec<f64> = u.iter().map(|&ui| -p.ldl * ui).collect();
        let w = self.cheb.solve(nf, 0.0, &f, 0.0, 0.0, p.gamma * (nf * nf - 1.0) / (rho * rho));
        let dw = self.cheb.derivative(&w);
        p.ldl - self.t - a - dw[N]
    }

    /// `(C_1, C_2)` from `h(0, n, L) = C_1 - C_2 L`, sampled at two values of `L`.
    pub fn coefficients(params: &ModelParams, n: u32) -> (f64, f64) {
        let h0 = RadialOracle::new(params.with_ldl(0.0)).dispersion(0.0, n);
        let h1 = RadialOracle::new(params.with_ldl(1.0)).dispersion(0.0, n);
        (h0, h0 - h1)
    }

    /// Largest root of `h(., n, L)` on `[0, a_max]` found by a scan plus bisection.
    pub fn growth_rate(&self, n: u32, a_max: f64) -> Option<f64> {
        let samples = 400;
        let mut hi = a_max;
        let mut h_hi = self.dispersion(hi, n);
        for k in (0..samples).rev() {
            let lo = a_max * k as f64 / samples as f64;
            let h_lo = self.dispersion(lo, n);
            if h_lo > 0.0 && h_hi <= 0.0 {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if self.dispersion(mid, n) > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                    if b - a < 1e-13 * b.max(1.0) {
                        break;
                    }
                }
                return Some(0.5 * (a + b));
            }
            hi = lo;
            h_hi = h_lo;
        }
        None
    }
}

/// Explicit `C_1(n)` for the curvature-driven part of the pressure jump.
pub fn c1_explicit(params: &ModelParams, n: u32) -> f64 {
    let (rho, big_r, nf) = (params.rho, params.outer_radius, n as f64);
    let (r2n, p2n) = (big_r.powf(2.0 * nf), rho.powf(2.0 * nf));
    params.gamma * (nf.powi(3) - nf) * (r2n - p2n) / (rho.powi(3) * (p2n + r2n))
}
