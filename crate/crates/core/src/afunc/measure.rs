use serde::Serialize;

use crate::error::{Result, WeylError};
use crate::herglotz::DiscreteMeasure;
use crate::numerics::{extrapolate_to_zero_real, integrate_adaptive, NeumaierSum};

/// Spectral measure of the half-line problem, either as atoms or as a
/// density on `[lo, hi]`.
pub enum SpectralInput<'a> {
    Discrete(&'a DiscreteMeasure),
    Density {
        density: &'a (dyn Fn(f64) -> f64 + Sync),
        lo: f64,
        hi: f64,
    },
}

/// `sin(2α√λ)/√λ`, continued through `2α` at `λ = 0` and
/// `sinh(2α√-λ)/√-λ` below it.
pub fn entire_kernel(alpha: f64, lambda: f64) -> f64 {
    let y = 4.0 * alpha * alpha * lambda;
    let ratio = if y.abs() < 1e-3 {
        1.0 - y / 6.0 + y * y / 120.0 - y * y * y / 5040.0
    } else if y > 0.0 {
        let r = y.sqrt();
        r.sin() / r
    } else {
        let r = (-y).sqrt();
        r.sinh() / r
    };
    2.0 * alpha * ratio
}

/// Size of the kernel used for the round-off estimate; on the oscillating
/// side its envelope, so exact zeros of the sine still count.
fn kernel_scale(alpha: f64, lambda: f64, k: f64) -> f64 {
    if lambda > 0.0 {
        (2.0 * alpha).min(1.0 / lambda.sqrt())
    } else {
        k.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelianA {
    pub alpha: f64,
    pub epsilons: Vec<f64>,
    /// `-2 ∫ k(α, λ) e^{-ελ} dρ(λ)` per ε.
    pub raw: Vec<f64>,
    pub extrapolated: f64,
    pub order: usize,
    /// `e^{-ε λ_max}` at the smallest ε: the weight the damping still gives
    /// the top of the supplied spectrum.
    pub truncation: f64,
    /// The raw sequence is not monotone in ε, or the spectrum is cut off
    /// before the damping has taken effect.
    pub flagged: bool,
}

/// `A(α)` from the spectral measure through the Abel-damped integral
/// `A_ε(α) = -2 ∫ sin(2α√λ)/√λ e^{-ελ} dρ(λ)`, extrapolated to `ε → 0`.
/// The damping removes the free part of the measure, which only contributes
/// a distribution supported at `α = 0`.
pub fn a_from_measure(
    input: &SpectralInput,
    alpha: f64,
    epsilons: &[f64],
    order: usize,
) -> Result<AbelianA> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(WeylError::domain("alpha must be positive"));
    }
    if epsilons.len() < 2 || epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(WeylError::config("need at least two positive damping values"));
    }
    if order >= epsilons.len() {
        return Err(WeylError::config(format!(
            "extrapolation order {order} needs more than {} damping values",
            epsilons.len()
        )));
    }
    let eps_min = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let (pairs, lambda_max): (Vec<(f64, f64)>, f64) = match input {
        SpectralInput::Discrete(mu) => {
            if mu.is_empty() {
                return Err(WeylError::InsufficientData("empty spectral measure".into()));
            }
            let top = mu.positions().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let raw = epsilons
                .iter()
                .map(|&e| {
                    let mut acc = NeumaierSum::default();
                    let mut mag = 0.0;
                    for (l, w) in mu.atoms() {
                        let damped = w * (-e * l).exp();
                        let k = entire_kernel(alpha, l);
                        acc.add(damped * k);
                        mag += damped.abs() * kernel_scale(alpha, l, k);
                    }
                    (-2.0 * acc.value(), 2.0 * mag)
                })
                .collect();
            (raw, top)
        }
        SpectralInput::Density { density, lo, hi } => {
            if !(lo < hi) {
                return Err(WeylError::domain("density support must satisfy lo < hi"));
            }
            let raw = epsilons
                .iter()
                .map(|&e| {
                    let f = |l: f64| density(l) * entire_kernel(alpha, l) * (-e * l).exp();
                    let g = |l: f64| {
                        let k = entire_kernel(alpha, l);
                        (density(l) * (-e * l).exp()).abs() * kernel_scale(alpha, l, k)
                    };
                    (-2.0 * integrate_adaptive(f, *lo, *hi, 1e-12), 2.0 * integrate_adaptive(g, *lo, *hi, 1e-9))
                })
                .collect();
            (raw, *hi)
        }
    };
    let (raw, scale): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    // Steps below the cancellation level of the sum carry no sign information.
    let noise = 1e-12 * scale.iter().copied().fold(0.0, f64::max);
    let truncation = (-eps_min * lambda_max).exp();
    let mut order_pairs: Vec<(f64, f64)> = epsilons.iter().copied().zip(raw.iter().copied()).collect();
    order_pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let diffs: Vec<f64> = order_pairs.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let monotone = diffs.iter().all(|&d| d >= -noise) || diffs.iter().all(|&d| d <= noise);
    let extrapolated = extrapolate_to_zero_real(epsilons, &raw, order);
    Ok(AbelianA {
        alpha,
        epsilons: epsilons.to_vec(),
        raw,
        extrapolated,
        order,
        truncation,
        flagged: !monotone || truncation > 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kernel_is_continuous_through_zero() {
        let a = 0.3;
        for l in [-1e-4, -1e-9, 0.0, 1e-9, 1e-4] {
            assert!((entire_kernel(a, l) - 2.0 * a).abs() < 1e-4);
        }
        assert!((entire_kernel(a, 4.0) - (1.2f64).sin() / 2.0).abs() < 1e-15);
        assert!((entire_kernel(a, -4.0) - (1.2f64).sinh() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn free_dirichlet_interval_gives_zero() {
        // V ≡ 0 on [0, 1] with a Dirichlet wall: atoms (nπ)², weights 2(nπ)².
        let mu = DiscreteMeasure::new((1..=400).map(|n| {
            let l = (n as f64 * PI).powi(2);
            (l, 2.0 * l)
        }))
        .unwrap();
        let est = a_from_measure(&SpectralInput::Discrete(&mu), 0.4, &[4e-4, 2e-4, 1e-4], 2).unwrap();
        assert!(est.extrapolated.abs() < 1e-3, "{}", est.extrapolated);
        assert!(!est.flagged);
    }

    #[test]
    fn truncated_spectrum_is_flagged() {
        let mu = DiscreteMeasure::new((1..=3).map(|n| ((n as f64 * PI).powi(2), 1.0))).unwrap();
        let est = a_from_measure(&SpectralInput::Discrete(&mu), 0.4, &[4e-4, 2e-4], 1).unwrap();
        assert!(est.flagged);
    }

    #[test]
    fn rejects_bad_schedule() {
        let mu = DiscreteMeasure::new([(1.0, 1.0)]).unwrap();
        assert!(a_from_measure(&SpectralInput::Discrete(&mu), 0.4, &[1e-3], 0).is_err());
        assert!(a_from_measure(&SpectralInput::Discrete(&mu), 0.4, &[1e-3, 2e-3], 2).is_err());
    }
}
