use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::ode::OdeOptions;
use super::potential::Potential;
use super::weyl::weyl_q;
use crate::error::{Result, WeylError};
use crate::numerics::{fit_line, least_squares};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtkinsonEstimate {
    pub x: f64,
    /// Samples sorted by increasing κ.
    pub kappas: Vec<f64>,
    /// `-2κ (m(-κ², x) + κ)` per sample.
    pub raw: Vec<f64>,
    /// κ → ∞ limit from a fit `V + c₁/κ + c₂/κ² + …`.
    pub limit: f64,
    pub fit_degree: usize,
    /// `|raw - limit|` per sample.
    pub remainders: Vec<f64>,
    /// Slope of `log remainder` against `log κ`, when defined.
    pub remainder_slope: Option<f64>,
    /// Remainders never increase with κ.
    pub monotone: bool,
    /// The κ samples span at least a factor of ten.
    pub spans_decade: bool,
}

/// Estimate `V(x)` from samples `(κ, m + κ)`.
fn extract(x: f64, mut samples: Vec<(f64, f64)>) -> Result<AtkinsonEstimate> {
    if samples.len() < 3 {
        return Err(WeylError::InsufficientData(format!(
            "need at least 3 (kappa, m) samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|&(k, q)| !(k > 0.0) || !q.is_finite()) {
        return Err(WeylError::domain("kappa must be positive and m finite"));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let kappas: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let raw: Vec<f64> = samples.iter().map(|&(k, q)| -2.0 * k * q).collect();
    let n = samples.len();
    let degree = (n - 1).min(3);
    let design = DMatrix::from_fn(n, degree + 1, |i, p| kappas[i].powi(-(p as i32)));
    let coef = least_squares(&design, &DVector::from_vec(raw.clone()))
        .ok_or_else(|| WeylError::Conditioning("asymptotic fit failed".into()))?;
    let limit = coef[0];
    let remainders: Vec<f64> = raw.iter().map(|r| (r - limit).abs()).collect();
    let monotone = remainders.windows(2).all(|w| w[1] <= w[0]);
    let usable: Vec<(f64, f64)> = kappas
        .iter()
        .zip(&remainders)
        .filter(|(_, &r)| r > 0.0)
        .map(|(&k, &r)| (k.ln(), r.ln()))
        .collect();
    let remainder_slope = if usable.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
        Some(fit_line(&xs, &ys).slope)
    } else {
        None
    };
    Ok(AtkinsonEstimate {
        x,
        spans_decade: kappas[n - 1] >= 10.0 * kappas[0],
        kappas,
        raw,
        limit,
        fit_degree: degree,
        remainders,
        remainder_slope,
        monotone,
    })
}

/// Recover `V(x)` from samples `(κ, m(-κ², x))` through
/// `-2κ(m + κ) → V(x)` as `κ → ∞`.
pub fn atkinson_extract(samples: &[(f64, f64)], x: f64) -> Result<AtkinsonEstimate> {
    extract(x, samples.iter().map(|&(k, m)| (k, m + k)).collect())
}

/// Sample the m-function of `pot` at `z = -κ²` (in the cancellation-free
/// shifted form) and extract `V(x)`. The potential's tail must be zero so
/// that the shift equals κ.
pub fn atkinson_from_potential(
    pot: &Potential,
    x: f64,
    kappas: &[f64],
    opts: &OdeOptions,
) -> Result<AtkinsonEstimate> {
    let c = pot
        .tail_value()
        .ok_or_else(|| WeylError::domain("Atkinson sampling needs a constant tail"))?;
    let mut samples = Vec::with_capacity(kappas.len());
    for &k in kappas {
        if !(k > 0.0) {
            return Err(WeylError::domain("kappa must be positive"));
        }
        let z = Complex64::new(-k * k, 0.0);
        // q = m + s with s = √(c + κ²); m + κ = q - (s - κ).
        let q = weyl_q(pot, z, x, opts)?.re;
        let s_minus_k = c / ((c + k * k).sqrt() + k);
        samples.push((k, q - s_minus_k));
    }
    extract(x, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schrodinger::{Interpolation, Tail};

    #[test]
    fn constant_potential_closed_form() {
        let kappas = [10.0, 30.0, 100.0];
        let samples: Vec<(f64, f64)> = kappas.iter().map(|&k| (k, -(k * k + 5.0f64).sqrt())).collect();
        let est = atkinson_extract(&samples, 0.0).unwrap();
        assert!((est.raw[2] - 4.9994).abs() < 1e-4);
        assert!((est.limit - 5.0).abs() < 1e-4, "limit {}", est.limit);
        assert!(est.monotone && est.spans_decade);
    }

    #[test]
    fn zero_potential_gives_zero() {
        let samples = [(1.0, -1.0), (5.0, -5.0), (20.0, -20.0)];
        let est = atkinson_extract(&samples, 0.0).unwrap();
        assert!(est.raw.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            atkinson_extract(&[(1.0, -1.0), (2.0, -2.0)], 0.0),
            Err(WeylError::InsufficientData(_))
        ));
    }

    #[test]
    fn smooth_potential_remainder_shrinks() {
        let pot = Potential::from_fn(
            0.0,
            3.0,
            301,
            |x| 2.0 * (-(x - 0.5) * (x - 0.5)).exp(),
            Interpolation::Cubic,
            Tail::CompactSupport,
        )
        .unwrap();
        let est = atkinson_from_potential(&pot, 0.5, &[50.0, 100.0, 200.0], &OdeOptions::default())
            .unwrap();
        assert!((est.raw[0] - 2.0).abs() > (est.raw[2] - 2.0).abs());
        assert!((est.limit - 2.0).abs() < 1e-4);
    }
}
