use num_complex::Complex64;
use serde::Serialize;

use super::ode::OdeOptions;
use super::potential::Potential;
use super::weyl::{m_minus, transport_m, weyl_m, WeylMode};
use super::BoundaryCondition;
use crate::error::{Result, WeylError};
use crate::herglotz::ProjectiveValue;

/// Where the operator lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    WholeLine,
    /// `[x₀, ∞)` with a boundary condition at the left end `x₀` of the
    /// potential's domain.
    HalfLine(BoundaryCondition),
    /// `[x₀, x₁]` with conditions at both ends.
    Interval {
        left: BoundaryCondition,
        right: BoundaryCondition,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenValue {
    /// `G(x, x; z) = u₋(x) u₊(x) / W(u₋, u₊)`, with `W = u₋' u₊ - u₋ u₊'`.
    pub value: Complex64,
    pub m_minus: ProjectiveValue,
    pub m_plus: ProjectiveValue,
}

fn from_bc(bc: BoundaryCondition) -> ProjectiveValue {
    match bc.log_derivative() {
        Some(m) => ProjectiveValue::Finite(Complex64::new(m, 0.0)),
        None => ProjectiveValue::Pole,
    }
}

/// Diagonal Green function `G(x, x; z) = 1 / (m₋(x) - m₊(x))`.
pub fn green_diag(
    pot: &Potential,
    x: f64,
    z: Complex64,
    geometry: Geometry,
    opts: &OdeOptions,
) -> Result<GreenValue> {
    let (x0, x1) = pot.domain();
    let (m_minus, m_plus) = match geometry {
        Geometry::WholeLine => (
            m_minus(pot, z, x, opts)?,
            weyl_m(pot, z, x, WeylMode::Riccati, opts)?.value,
        ),
        Geometry::HalfLine(bc) => {
            if x < x0 {
                return Err(WeylError::domain("x lies left of the boundary point"));
            }
            (
                transport_m(pot, z, from_bc(bc), x0, x, opts)?,
                weyl_m(pot, z, x, WeylMode::Riccati, opts)?.value,
            )
        }
        Geometry::Interval { left, right } => {
            if x < x0 || x > x1 {
                return Err(WeylError::domain("x outside the interval"));
            }
            (
                transport_m(pot, z, from_bc(left), x0, x, opts)?,
                transport_m(pot, z, from_bc(right), x1, x, opts)?,
            )
        }
    };
    let value = match (m_minus, m_plus) {
        (ProjectiveValue::Finite(a), ProjectiveValue::Finite(b)) => {
            let d = a - b;
            if d.norm() <= 1e-13 * (a.norm() + b.norm()) || d.norm() == 0.0 {
                return Err(WeylError::Conditioning(format!(
                    "Wronskian vanishes to working precision at z = {z}: z is (numerically) an eigenvalue"
                )));
            }
            1.0 / d
        }
        (ProjectiveValue::Pole, ProjectiveValue::Pole) => {
            return Err(WeylError::Conditioning(
                "both solutions vanish at x: z is an eigenvalue".into(),
            ))
        }
        _ => Complex64::new(0.0, 0.0),
    };
    Ok(GreenValue {
        value,
        m_minus,
        m_plus,
    })
}
