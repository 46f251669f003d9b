//! Parsers for the compact numeric argument forms used on the command line.

use std::str::FromStr;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;

use crate::jacobi::StrippingRoute;
use crate::numerics::{linspace, logspace};
use crate::schrodinger::BoundaryCondition;

/// `re,im` or a bare real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexArg(pub Complex64);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}"));
        match parts.as_slice() {
            [re] => Ok(ComplexArg(Complex64::new(num(re)?, 0.0))),
            [re, im] => Ok(ComplexArg(Complex64::new(num(re)?, num(im)?))),
            _ => Err(format!("expected `re,im`, got `{s}`")),
        }
    }
}

/// `lo:hi:count` (linear) or `lo:hi:geometric:count`, or an explicit
/// comma-separated list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule(pub Vec<f64>);

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}"));
        let count = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad count `{t}`: {e}"))
                .and_then(|n| if n >= 2 { Ok(n) } else { Err("count must be at least 2".to_string()) })
        };
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [lo, hi, n] => linspace(num(lo)?, num(hi)?, count(n)?),
            [lo, hi, kind, n] => {
                let (lo, hi, n) = (num(lo)?, num(hi)?, count(n)?);
                match *kind {
                    "geometric" | "log" => {
                        if !(lo > 0.0 && hi > 0.0) {
                            return Err("geometric schedules need positive end points".into());
                        }
                        logspace(lo, hi, n)
                    }
                    "linear" => linspace(lo, hi, n),
                    other => return Err(format!("unknown spacing `{other}`")),
                }
            }
            [_] => s.split(',').map(num).collect::<Result<_, _>>()?,
            _ => return Err(format!("cannot parse schedule `{s}`")),
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err("schedule values must be finite".into());
        }
        Ok(Schedule(values))
    }
}

/// `dirichlet`, `neumann`, `robin:<h>` or `theta:<angle>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BcArg(pub BoundaryCondition);

impl FromStr for BcArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.to_ascii_lowercase();
        let (kind, value) = match lower.split_once(':') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (lower.clone(), None),
        };
        let num = |v: Option<String>| -> Result<f64, String> {
            let v = v.ok_or_else(|| format!("`{kind}` needs a value, e.g. `{kind}:1.0`"))?;
            v.parse::<f64>().map_err(|e| format!("bad number `{v}`: {e}"))
        };
        let bc = match kind.as_str() {
            "dirichlet" => BoundaryCondition::Dirichlet,
            "neumann" => BoundaryCondition::Neumann,
            "robin" => BoundaryCondition::Robin(num(value)?),
            "theta" => BoundaryCondition::Theta(num(value)?),
            _ => return Err(format!("unknown boundary condition `{s}`")),
        };
        Ok(BcArg(bc))
    }
}

/// `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval(pub f64, pub f64);

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected `lo:hi`, got `{s}`"))?;
        let lo: f64 = a.trim().parse().map_err(|e| format!("bad number `{a}`: {e}"))?;
        let hi: f64 = b.trim().parse().map_err(|e| format!("bad number `{b}`: {e}"))?;
        if !(lo < hi) {
            return Err(format!("interval `{s}` must satisfy lo < hi"));
        }
        Ok(Interval(lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteArg {
    /// Three-term recurrence.
    Op,
    /// Continued-fraction expansion.
    Cf,
    Both,
}

impl RouteArg {
    pub fn routes(self) -> Vec<StrippingRoute> {
        match self {
            RouteArg::Op => vec![StrippingRoute::OpRecursion],
            RouteArg::Cf => vec![StrippingRoute::ContinuedFraction],
            RouteArg::Both => vec![StrippingRoute::OpRecursion, StrippingRoute::ContinuedFraction],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Riccati,
    Linear,
}
