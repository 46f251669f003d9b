use serde::Serialize;

use super::fit::{fit_decay, DecayFit};
use crate::error::{Result, WeylError};
use crate::schrodinger::ode::{integrate, OdeOptions};
use crate::schrodinger::{BoundaryCondition, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BmOptions {
    /// Differences at or below this magnitude are not used in the fit.
    pub floor: f64,
    pub ode: OdeOptions,
}

impl Default for BmOptions {
    fn default() -> Self {
        BmOptions {
            floor: 1e-250,
            ode: OdeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BmVerdict {
    /// The potentials agree near 0 up to about `a_hat`.
    Agreement { a_hat: f64 },
    /// Too few differences rise above the floor to fit a rate: the
    /// m-functions cannot be told apart on these κ.
    Indistinguishable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BmCheck {
    pub kappa: Vec<f64>,
    /// `m₁(-κ²) - m₂(-κ²)` at `x = 0` for the chosen boundary condition.
    pub difference: Vec<f64>,
    pub fit: Option<DecayFit>,
    pub verdict: BmVerdict,
}

/// The two potentials coincide on `[a, b]` (checked on a few points).
fn agree_on(v1: &Potential, v2: &Potential, a: f64, b: f64) -> bool {
    (0..=8).all(|k| {
        let t = a + (b - a) * k as f64 / 8.0;
        v1.eval(t) == v2.eval(t)
    })
}

/// `m₁ - m₂` at `x = 0`, `z = -κ²`, from the pair `(q₁, δ = q₁ - q₂)`
/// with `q = m + s`. Where the potentials agree `δ` solves a homogeneous
/// linear equation and is carried as `log|δ|`, so it keeps full relative
/// accuracy however small it becomes.
fn m_difference(v1: &Potential, v2: &Potential, c: f64, end: f64, kappa: f64, opts: &OdeOptions) -> Result<(f64, f64)> {
    let s = (c + kappa * kappa).sqrt();
    let mut knots: Vec<f64> = v1.segment_points(end, 0.0);
    knots.extend(v2.segment_points(end, 0.0));
    knots.sort_by(|a, b| b.total_cmp(a));
    knots.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));
    let mut x = end;
    let (mut q, mut d) = (0.0f64, 0.0f64);
    for k in knots {
        if agree_on(v1, v2, k, x) {
            if d == 0.0 {
                let rhs = |t: f64, y: &[f64; 1]| [v1.eval(t) - c + 2.0 * s * y[0] - y[0] * y[0]];
                q = integrate(rhs, x, [q], k, opts, |_| false)?.y[0];
            } else {
                let sign = d.signum();
                let rhs = |t: f64, y: &[f64; 2]| {
                    let dd = sign * y[1].exp();
                    [v1.eval(t) - c + 2.0 * s * y[0] - y[0] * y[0], 2.0 * s - 2.0 * y[0] + dd]
                };
                let y = integrate(rhs, x, [q, d.abs().ln()], k, opts, |_| false)?.y;
                q = y[0];
                d = sign * y[1].exp();
            }
        } else {
            let rhs = |t: f64, y: &[f64; 2]| {
                let (q, d) = (y[0], y[1]);
                let w1 = v1.eval(t);
                [w1 - c + 2.0 * s * q - q * q, w1 - v2.eval(t) + (2.0 * s - 2.0 * q + d) * d]
            };
            let y = integrate(rhs, x, [q, d], k, opts, |_| false)?.y;
            q = y[0];
            d = y[1];
        }
        x = k;
    }
    if !(q.is_finite() && d.is_finite()) {
        return Err(WeylError::Integration {
            x,
            msg: "Riccati solution left the finite chart; raise kappa".into(),
        });
    }
    Ok((q - s, d))
}

/// Local Borg-Marchenko check: if `V₁ = V₂` on `[0, a]` then
/// `m₁ - m₂ = O(e^{-2aκ})`. Fits `log|m₁ - m₂| ≈ c + eκ + p log κ` over
/// `kappa` and reports `â = -e/2`.
pub fn local_bm_check(
    v1: &Potential,
    v2: &Potential,
    kappa: &[f64],
    bc: BoundaryCondition,
    opts: &BmOptions,
) -> Result<BmCheck> {
    let (c1, c2) = match (v1.tail_value(), v2.tail_value()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(WeylError::domain("both potentials need constant tails")),
    };
    if c1 != c2 {
        return Err(WeylError::domain(format!("tail values differ ({c1} vs {c2})")));
    }
    let (a0, a1) = v1.domain();
    let (b0, b1) = v2.domain();
    if a0 != 0.0 || b0 != 0.0 {
        return Err(WeylError::domain("both potentials must start at x = 0"));
    }
    if kappa.iter().any(|&k| !(k > 0.0) || c1 + k * k <= 0.0) {
        return Err(WeylError::domain("every kappa must satisfy kappa > 0 and c + kappa^2 > 0"));
    }
    let end = a1.max(b1);
    let (sn, cs) = bc.theta().sin_cos();
    let mut difference = Vec::with_capacity(kappa.len());
    for &k in kappa {
        let (m1, d) = m_difference(v1, v2, c1, end, k, &opts.ode)?;
        let m2 = m1 - d;
        // The Möbius map has unit determinant, so its difference factors.
        difference.push(d / ((sn * m1 + cs) * (sn * m2 + cs)));
    }
    let (fit, verdict) = match fit_decay(kappa, &difference, opts.floor) {
        Ok(f) => {
            let a_hat = -f.exponent / 2.0;
            (Some(f), BmVerdict::Agreement { a_hat })
        }
        Err(WeylError::InsufficientData(_)) => (None, BmVerdict::Indistinguishable),
        Err(e) => return Err(e),
    };
    Ok(BmCheck {
        kappa: kappa.to_vec(),
        difference,
        fit,
        verdict,
    })
}
