use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::ToleranceProfile;

/// Numeric knobs of the proximity computation and the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Backward-difference step, multiplied by `max(1, ||sigma||_inf)`.
    pub delta: f64,
    /// Allowed shortfall of the summed robust efficiencies below `|C|`.
    pub epsilon: f64,
    /// Efficiency scores at or above `1 - eps_eff` count as exactly 1.
    pub eps_eff: f64,
    /// First-order iterations per descent loop.
    pub max_iters: usize,
    /// Doubling search gives up once uniform sigma exceeds this multiple of
    /// the largest characteristic magnitude.
    pub sigma_max_factor: f64,
    /// Relative width at which the uniform-sigma bisection stops.
    pub bisection_tol: f64,
    /// Profile every conic solve starts from.
    pub profile: ToleranceProfile,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            delta: 1e-3,
            epsilon: 1e-4,
            eps_eff: 1e-6,
            max_iters: 100,
            sigma_max_factor: 1e6,
            bisection_tol: 1e-9,
            profile: ToleranceProfile::Strict,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("eps_eff", self.eps_eff),
            ("sigma_max_factor", self.sigma_max_factor),
            ("bisection_tol", self.bisection_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.eps_eff >= 1.0 {
            return Err(Error::Config("eps_eff must be below 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    /// Backward-difference step at `sigma`.
    pub fn step_at(&self, sigma_inf_norm: f64) -> f64 {
        self.delta * sigma_inf_norm.max(1.0)
    }
}
