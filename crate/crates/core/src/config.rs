//! Run configuration read from TOML files.
//!
//! Every section is optional; omitted keys take the defaults below.
//!
//! ```toml
//! tol = 1e-9                  # Newton tolerance (max-norm of the residual)
//!
//! [params]                    # all six keys required when the table is present
//! diffusion = 1.0
//! hdl = 3.0
//! ldl = 3.0
//! gamma = 2.0
//! outer_radius = 2.0
//! rho = 1.6
//!
//! [grid]
//! m = 48                      # rays (even, at least 8)
//! n_r = 8                     # radial intervals (at least 2)
//! ladder = [[20, 2], [40, 4], [80, 8], [160, 16]]
//! angular_order = "fourth"    # or "second"
//! clearance = "discrete"      # or "closed-form"
//! scheme = { kind = "regularized", tau_rel = 0.05 }
//!
//! [bifurcate]
//! modes = [2, 3, 4]
//! l_max = 170.0               # default: 1.1 times the largest analytic L_n
//!
//! [stability]
//! ldl = [0.0, 3.0, 15.0, 120.0, 200.0]
//! restriction = "full"        # or "radially-symmetric", "even"
//!
//! [branch]
//! modes = [2, 3, 4]
//! steps = 12
//! directions = [1.0]
//! stability_every = 4
//!
//! [steady]
//! ldl = 3.0
//! mode = 2                    # optional boundary perturbation of the start
//! amplitude = 0.01
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closed_form::ModelParams;
use crate::continuation::StepControl;
use crate::error::{Error, Result};
use crate::fb_solver::{AngularOrder, Clearance, Discretization, Restriction, DEFAULT_TOL};
use crate::polar_disc::AngularScheme;
use crate::spectral::bifurcation_point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ModelParams,
    pub tol: f64,
    pub grid: GridConfig,
    pub bifurcate: BifurcateConfig,
    pub stability: StabilityConfig,
    pub branch: BranchConfig,
    pub steady: SteadyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::reference(),
            tol: DEFAULT_TOL,
            grid: GridConfig::default(),
            bifurcate: BifurcateConfig::default(),
            stability: StabilityConfig::default(),
            branch: BranchConfig::default(),
            steady: SteadyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub m: usize,
    pub n_r: usize,
    /// Grids `(m, n_r)` for refinement studies, coarse to fine.
    pub ladder: Vec<(usize, usize)>,
    pub scheme: AngularScheme,
    pub angular_order: AngularOrder,
    pub clearance: Clearance,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            m: 48,
            n_r: 8,
            ladder: vec![(20, 2), (40, 4), (80, 8), (160, 16)],
            scheme: AngularScheme::default(),
            angular_order: AngularOrder::default(),
            clearance: Clearance::default(),
        }
    }
}

impl GridConfig {
    pub fn discretization(&self) -> Discretization {
        self.at(self.m, self.n_r)
    }

    pub fn at(&self, m: usize, n_r: usize) -> Discretization {
        Discretization {
            m,
            n_r,
            scheme: self.scheme,
            angular_order: self.angular_order,
            clearance: self.clearance,
        }
    }

    pub fn levels(&self) -> Vec<Discretization> {
        self.ladder.iter().map(|&(m, n_r)| self.at(m, n_r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BifurcateConfig {
    pub modes: Vec<u32>,
    pub l_max: Option<f64>,
    pub step: StepControl,
}

impl Default for BifurcateConfig {
    fn default() -> Self {
        Self {
            modes: vec![2, 3, 4],
            l_max: None,
            step: StepControl::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityConfig {
    pub ldl: Vec<f64>,
    pub restriction: Restriction,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            ldl: vec![0.0, 3.0, 15.0, 120.0, 200.0],
            restriction: Restriction::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchConfig {
    pub modes: Vec<u32>,
    pub l_max: Option<f64>,
    pub steps: usize,
    /// `+1` and/or `-1`: the two half-branches of each mode.
    pub directions: Vec<f64>,
    /// Kernel amplitude of the switch; defaults to `1e-2` times the radius.
    pub amplitude: Option<f64>,
    /// Full-spectrum `re(lambda_max)` at every k-th point (0 = never).
    pub stability_every: usize,
    pub step: StepControl,
    pub track_step: StepControl,
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self {
            modes: vec![2, 3, 4],
            l_max: None,
            steps: 12,
            directions: vec![1.0],
            amplitude: None,
            stability_every: 4,
            step: StepControl::arclength(),
            track_step: StepControl::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadyConfig {
    pub ldl: f64,
    pub mode: Option<u32>,
    pub amplitude: f64,
    /// Also write the full linearised spectrum of the solution.
    pub spectrum: bool,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        Self {
            ldl: 3.0,
            mode: None,
            amplitude: 1e-2,
            spectrum: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks parameter ranges, tolerances, grid sizes and the ladder.
    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        check_grid(self.grid.m, self.grid.n_r)?;
        for &(m, n_r) in &self.grid.ladder {
            check_grid(m, n_r)?;
        }
        for w in self.grid.ladder.windows(2) {
            let ((m0, n0), (m1, n1)) = (w[0], w[1]);
            if m1 < m0 || n1 <= n0 {
                return Err(Error::Config(format!(
                    "ladder must refine strictly: ({m0}, {n0}) is followed by ({m1}, {n1})"
                )));
            }
        }
        for (name, step) in [
            ("bifurcate.step", &self.bifurcate.step),
            ("branch.step", &self.branch.step),
            ("branch.track_step", &self.branch.track_step),
        ] {
            if !(step.initial > 0.0 && step.min > 0.0 && step.max >= step.initial && step.growth >= 1.0) {
                return Err(Error::Config(format!("{name}: step sizes must be positive and growth at least 1")));
            }
        }
        for (name, modes) in [("bifurcate.modes", &self.bifurcate.modes), ("branch.modes", &self.branch.modes)] {
            if modes.is_empty() || modes.iter().any(|&n| n < 2) {
                return Err(Error::Config(format!("{name} must list modes n >= 2")));
            }
        }
        for l in [self.bifurcate.l_max, self.branch.l_max].into_iter().flatten() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("l_max must be positive, got {l}")));
            }
        }
        if self.stability.ldl.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::Config("stability.ldl values must be non-negative".into()));
        }
        if self.branch.directions.is_empty() || self.branch.directions.iter().any(|d| d.abs() != 1.0) {
            return Err(Error::Config("branch.directions must contain only 1.0 or -1.0".into()));
        }
        if let Some(a) = self.branch.amplitude {
            if !(a > 0.0) {
                return Err(Error::Config("branch.amplitude must be positive".into()));
            }
        }
        if !(self.steady.ldl >= 0.0 && self.steady.ldl.is_finite()) {
            return Err(Error::Config("steady.ldl must be non-negative".into()));
        }
        if let Some(n) = self.steady.mode {
            if 2 * n as usize > self.grid.m {
                return Err(Error::Config(format!("steady.mode {n} is not resolved by {} rays", self.grid.m)));
            }
        }
        Ok(())
    }

    /// Upper end of the `L` range searched for the given modes.
    pub fn search_limit(&self, l_max: Option<f64>, modes: &[u32]) -> Result<f64> {
        if let Some(l) = l_max {
            return Ok(l);
        }
        let mut top: f64 = 0.0;
        for &n in modes {
            top = top.max(bifurcation_point(&self.params, n)?.l_n);
        }
        Ok(1.1 * top)
    }

    /// One-line description of the parameters, used as the CSV comment.
    pub fn describe(&self, disc: Option<&Discretization>) -> String {
        let p = &self.params;
        let mut s = format!(
            "D={} H={} L={} gamma={} R={} rho={} tol={}",
            p.diffusion, p.hdl, p.ldl, p.gamma, p.outer_radius, p.rho, self.tol
        );
        if let Some(d) = disc {
            s.push_str(&format!(
                " m={} n_r={} angular={:?} clearance={:?}",
                d.m, d.n_r, d.angular_order, d.clearance
            ));
        }
        s
    }
}

fn check_grid(m: usize, n_r: usize) -> Result<()> {
    if m < 8 || !m.is_multiple_of(2) || n_r < 2 {
        return Err(Error::Config(format!(
            "grid ({m}, {n_r}) unsupported: m must be even and at least 8, n_r at least 2"
        )));
    }
    Ok(())
}
