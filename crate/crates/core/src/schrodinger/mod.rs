//! One-dimensional Schrödinger operators `-u'' + V u` on grids: Weyl
//! m-functions, interval and periodic eigenvalue problems, diagonal Green
//! functions, heat-trace defects and the large-κ asymptotics of `m`.
//!
//! Branch convention: `√w` is taken with `Im √w > 0` off `[0, ∞)`, so a
//! tail with constant value `c` has decay rate `s = -i√(z - c)`, which is
//! the principal root of `c - z` and equals `κ` at `z = c - κ²`.

mod atkinson;
mod eigen;
mod green;
mod heat;
pub mod ode;
mod periodic;
mod potential;
mod weyl;

use std::f64::consts::{FRAC_PI_2, PI};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use atkinson::{atkinson_extract, atkinson_from_potential, AtkinsonEstimate};
pub use eigen::{eigenvalue_count, interval_eigenvalues, EigenOptions};
pub use green::{green_diag, GreenValue, Geometry};
pub use heat::{heat_trace_defect, HeatDefect, HeatRequest};
pub use ode::OdeOptions;
pub use periodic::{discriminant, periodic_band_data, BandData, BandOptions, DirichletSet};
pub use potential::{Interpolation, Potential, Tail};
pub use weyl::{
    decay_rate, m_minus, transport_m, weyl_m, weyl_q, WeylM, WeylMode, BRANCH_CONVENTION,
};

use crate::error::{Result, WeylError};

/// Self-adjoint boundary condition at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    /// `u' + h u = 0`.
    Robin(f64),
    /// `u cos θ + u' sin θ = 0`, `θ ∈ [0, π)`.
    Theta(f64),
}

impl BoundaryCondition {
    /// The angle θ in `u cos θ + u' sin θ = 0`, in `[0, π)`.
    pub fn theta(self) -> f64 {
        match self {
            BoundaryCondition::Dirichlet => 0.0,
            BoundaryCondition::Neumann => FRAC_PI_2,
            // u' + h u = 0 is cot θ = h.
            BoundaryCondition::Robin(h) => 1f64.atan2(h),
            BoundaryCondition::Theta(t) => t.rem_euclid(PI),
        }
    }

    /// Initial data `(u, u')` of a solution satisfying the condition.
    pub fn initial_data(self) -> (f64, f64) {
        match self {
            BoundaryCondition::Dirichlet => (0.0, 1.0),
            BoundaryCondition::Neumann => (1.0, 0.0),
            BoundaryCondition::Robin(h) => (1.0, -h),
            BoundaryCondition::Theta(t) => (t.sin(), -t.cos()),
        }
    }

    /// `u'/u` of a solution satisfying the condition; `None` for Dirichlet.
    pub fn log_derivative(self) -> Option<f64> {
        let (u, du) = self.initial_data();
        if u == 0.0 {
            None
        } else {
            Some(du / u)
        }
    }
}

impl FromStr for BoundaryCondition {
    type Err = WeylError;

    /// `dirichlet`, `neumann`, `robin:<h>` or `theta:<θ>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| WeylError::config(format!("bad boundary-condition parameter `{v}`")))
        };
        match s.as_str() {
            "dirichlet" | "d" => Ok(BoundaryCondition::Dirichlet),
            "neumann" | "n" => Ok(BoundaryCondition::Neumann),
            _ => {
                if let Some(v) = s.strip_prefix("robin:") {
                    Ok(BoundaryCondition::Robin(num(v)?))
                } else if let Some(v) = s.strip_prefix("theta:") {
                    let t = num(v)?;
                    if !(0.0..PI).contains(&t) {
                        return Err(WeylError::config("theta must lie in [0, pi)"));
                    }
                    Ok(BoundaryCondition::Theta(t))
                } else {
                    Err(WeylError::config(format!("unknown boundary condition `{s}`")))
                }
            }
        }
    }
}
