use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WeylError};
use crate::numerics::{gauss_legendre, least_squares, NeumaierSum};
use crate::schrodinger::{weyl_q, OdeOptions, Potential};

/// Samples of `m(-κ², x)` on the positive κ axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MSamples {
    pub kappa: Vec<f64>,
    pub m: Vec<f64>,
    pub base_point: f64,
}

impl MSamples {
    pub fn new(kappa: Vec<f64>, m: Vec<f64>, base_point: f64) -> Result<Self> {
        if kappa.len() != m.len() || kappa.is_empty() {
            return Err(WeylError::domain("kappa and m must be non-empty and of equal length"));
        }
        if kappa.windows(2).any(|w| !(w[1] > w[0])) || !(kappa[0] > 0.0) {
            return Err(WeylError::domain("kappa must be positive and strictly increasing"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(WeylError::domain("m samples must be finite"));
        }
        Ok(MSamples {
            kappa,
            m,
            base_point,
        })
    }

    /// Sample `m(-κ², x)` of a potential with a constant tail.
    pub fn from_potential(pot: &Potential, x: f64, kappa: Vec<f64>, opts: &OdeOptions) -> Result<Self> {
        let c = pot
            .tail_value()
            .ok_or_else(|| WeylError::domain("m sampling needs a constant tail"))?;
        let mut m = Vec::with_capacity(kappa.len());
        for &k in &kappa {
            let q = weyl_q(pot, Complex64::new(-k * k, 0.0), x, opts)?.re;
            m.push(q - (c + k * k).sqrt());
        }
        MSamples::new(kappa, m, x)
    }

    /// `kappa re im` rows; the imaginary part must vanish on this axis.
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut kappa = Vec::new();
        let mut m = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| WeylError::Parse {
                path: origin.to_string(),
                line: k + 1,
                msg,
            };
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(e.to_string()))?;
            let (kp, re, im) = match nums.as_slice() {
                [kp, re] => (*kp, *re, 0.0),
                [kp, re, im] => (*kp, *re, *im),
                _ => return Err(err("expected `kappa re im`".into())),
            };
            if im.abs() > 1e-10 * (1.0 + re.abs()) {
                return Err(err(format!("m(-kappa^2) must be real, got imaginary part {im}")));
            }
            kappa.push(kp);
            m.push(re);
        }
        MSamples::new(kappa, m, 0.0)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| WeylError::Io {
            path: path.display().to_string(),
            source,
        })?;
        MSamples::from_text(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# m(-kappa^2) at x = {}\n# kappa re im\n", self.base_point);
        for (k, m) in self.kappa.iter().zip(&self.m) {
            s.push_str(&format!("{k:e} {m:e} 0\n"));
        }
        s
    }
}

/// `∫₀^{α_cells·h} A(α) e^{-sα} dα` with `A` interpolated by local cubics.
fn laplace_partial(slice: &[f64], h: f64, cells: usize, s: f64) -> f64 {
    let (x, w) = gauss_legendre(8);
    let n = slice.len() - 1;
    let mut acc = NeumaierSum::default();
    for i in 0..cells {
        let st = i.saturating_sub(1).min(n.saturating_sub(3));
        let pts = (st..=(st + 3).min(n)).collect::<Vec<_>>();
        for (xi, wi) in x.iter().zip(&w) {
            let t = i as f64 + 0.5 * (1.0 + xi);
            // Lagrange interpolation in index units.
            let mut a = 0.0;
            for &p in &pts {
                let mut l = 1.0;
                for &q in &pts {
                    if q != p {
                        l *= (t - q as f64) / (p as f64 - q as f64);
                    }
                }
                a += l * slice[p];
            }
            acc.add(0.5 * h * wi * a * (-s * t * h).exp());
        }
    }
    acc.value()
}

fn cells_for(a: f64, h: f64, n: usize) -> Result<usize> {
    let cells = (a / h).round();
    if (cells * h - a).abs() > 1e-9 * a.max(h) || cells < 1.0 || cells as usize > n {
        return Err(WeylError::domain(format!(
            "horizon {a} must be a grid multiple of h = {h} within the slice"
        )));
    }
    Ok(cells as usize)
}

/// `-κ - ∫₀^a A(α) e^{-2ακ} dα` from a slice on `α_i = ih`.
pub fn m_from_a(slice: &[f64], h: f64, a: f64, kappa: f64) -> Result<f64> {
    let cells = cells_for(a, h, slice.len() - 1)?;
    Ok(-kappa - laplace_partial(slice, h, cells, 2.0 * kappa))
}

/// Fit of `log|r(κ)| = c + e·κ + p·log κ + q/κ`; the exponent `e` is the
/// decay rate in κ, the other terms absorb the algebraic prefactor and its
/// first correction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub log_kappa: f64,
    pub inverse_kappa: f64,
    pub intercept: f64,
    pub points: usize,
    pub kappa_range: (f64, f64),
}

/// Least-squares decay fit over the samples with `|r| > floor`.
pub fn fit_decay(kappa: &[f64], r: &[f64], floor: f64) -> Result<DecayFit> {
    let used: Vec<(f64, f64)> = kappa
        .iter()
        .zip(r)
        .filter(|(_, &v)| v.abs() > floor && v.is_finite())
        .map(|(&k, &v)| (k, v.abs().ln()))
        .collect();
    if used.len() < 5 {
        return Err(WeylError::InsufficientData(format!(
            "only {} samples above the floor {floor:e}",
            used.len()
        )));
    }
    let design = DMatrix::from_fn(used.len(), 4, |i, j| match j {
        0 => 1.0,
        1 => used[i].0,
        2 => used[i].0.ln(),
        _ => 1.0 / used[i].0,
    });
    let y = DVector::from_iterator(used.len(), used.iter().map(|u| u.1));
    let c = least_squares(&design, &y)
        .ok_or_else(|| WeylError::Conditioning("decay fit failed".into()))?;
    Ok(DecayFit {
        exponent: c[1],
        log_kappa: c[2],
        inverse_kappa: c[3],
        intercept: c[0],
        points: used.len(),
        kappa_range: (used[0].0, used[used.len() - 1].0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationResidual {
    pub a: f64,
    pub kappa: Vec<f64>,
    /// `m(-κ²) + κ + ∫₀^a A e^{-2ακ}`.
    pub residual: Vec<f64>,
    pub fit: DecayFit,
}

/// Residual of the truncated representation at `x = 0` against the
/// m-function of `pot`, and its fitted decay exponent (expected `-2a`).
pub fn representation_residual(
    pot: &Potential,
    slice: &[f64],
    h: f64,
    a: f64,
    kappa: &[f64],
    floor: f64,
    opts: &OdeOptions,
) -> Result<RepresentationResidual> {
    let c = pot
        .tail_value()
        .ok_or_else(|| WeylError::domain("representation check needs a constant tail"))?;
    let cells = cells_for(a, h, slice.len() - 1)?;
    let mut residual = Vec::with_capacity(kappa.len());
    for &k in kappa {
        let q = weyl_q(pot, Complex64::new(-k * k, 0.0), 0.0, opts)?.re;
        // m + κ = q - (s - κ), s = √(c + κ²).
        let m_plus_k = q - c / ((c + k * k).sqrt() + k);
        residual.push(m_plus_k + laplace_partial(slice, h, cells, 2.0 * k));
    }
    let fit = fit_decay(kappa, &residual, floor)?;
    Ok(RepresentationResidual {
        a,
        kappa: kappa.to_vec(),
        residual,
        fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    /// Weight of `‖D²A‖²` in the ridge objective.
    pub regularizer: f64,
    /// Largest condition number accepted for the regularized system.
    pub max_condition: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            regularizer: 1e-10,
            max_condition: 1e13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AFromM {
    pub alpha: Vec<f64>,
    pub a: Vec<f64>,
    pub kappa_range: (f64, f64),
    /// `m + κ + ∫ A e^{-2ακ}` per sample, for the fitted `A`.
    pub residual: Vec<f64>,
    pub regularizer: f64,
    pub condition: f64,
    /// Operator 2-norm of the linear map from the samples to the fitted `A`.
    pub amplification: f64,
}

/// `∫ φ_i(α) e^{-sα} dα` for the hat function at node `i` of `0..=n`.
fn hat_laplace(i: usize, n: usize, h: f64, s: f64) -> f64 {
    let t = s * h;
    let e = (-s * i as f64 * h).exp();
    // The rising half on [α_{i-1}, α_i] gives (e^t - 1 - t)/t², the falling
    // half on [α_i, α_{i+1}] gives (t - 1 + e^{-t})/t²; series for small t.
    let falling = |t: f64| {
        if t < 1e-2 {
            0.5 - t / 6.0 + t * t / 24.0 - t * t * t / 120.0
        } else {
            (t + (-t).exp_m1()) / (t * t)
        }
    };
    let rising = |t: f64| {
        if t < 1e-2 {
            0.5 + t / 6.0 + t * t / 24.0 + t * t * t / 120.0
        } else {
            (t.exp_m1() - t) / (t * t)
        }
    };
    let mut v = 0.0;
    if i < n {
        v += h * e * falling(t);
    }
    if i > 0 {
        v += h * e * rising(t);
    }
    v
}

/// Ridge fit of `A(·, 0)` on `grid_n` nodes of `[0, a]` to m-samples,
/// penalising the discrete second difference of `A`.
pub fn a_from_m(samples: &MSamples, a: f64, grid_n: usize, opts: &FitOptions) -> Result<AFromM> {
    if grid_n < 3 {
        return Err(WeylError::config("grid_n must be at least 3"));
    }
    if !(a > 0.0) {
        return Err(WeylError::domain("horizon must be positive"));
    }
    let k = &samples.kappa;
    let (kmin, kmax) = (k[0], k[k.len() - 1]);
    if k.len() < 2 * grid_n || kmax < 10.0 * kmin {
        return Err(WeylError::InsufficientData(format!(
            "need at least {} samples spanning a decade of kappa, got {} over [{kmin}, {kmax}]",
            2 * grid_n,
            k.len()
        )));
    }
    let n = grid_n - 1;
    let h = a / n as f64;
    if kmax > 0.5 / h * (1.0 + 1e-9) {
        return Err(WeylError::config(format!(
            "kappa_max = {kmax} exceeds 0.5/h = {}: the dictionary columns are indistinguishable on this grid",
            0.5 / h
        )));
    }
    let rows = k.len() + n - 1;
    let mut design = DMatrix::zeros(rows, grid_n);
    let mut rhs = DVector::zeros(rows);
    for (r, (&kp, &m)) in k.iter().zip(&samples.m).enumerate() {
        // Rows weighted by κ so that every sample counts relative to m + κ ~ 1/κ.
        for i in 0..=n {
            design[(r, i)] = -kp * hat_laplace(i, n, h, 2.0 * kp);
        }
        rhs[r] = kp * (m + kp);
    }
    let w = opts.regularizer.sqrt();
    for i in 1..n {
        let r = k.len() + i - 1;
        design[(r, i - 1)] = w;
        design[(r, i)] = -2.0 * w;
        design[(r, i + 1)] = w;
    }
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > opts.max_condition {
        return Err(WeylError::Conditioning(format!(
            "condition number {condition:.3e} exceeds {:.3e}: recovering A from m is an exponentially ill-posed inverse Laplace problem; increase the regularizer or reduce grid_n",
            opts.max_condition
        )));
    }
    let coef = least_squares(&design, &rhs)
        .ok_or_else(|| WeylError::Conditioning("ridge solve failed".into()))?;
    // Sensitivity of A to the unweighted samples: pinv restricted to the
    // data rows, times the κ weights.
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let sinv = DMatrix::from_diagonal(&sv.map(|s| 1.0 / s));
    let pinv = vt.transpose() * sinv * u.transpose();
    let sens = DMatrix::from_fn(grid_n, k.len(), |i, j| pinv[(i, j)] * k[j]);
    let amplification = sens.singular_values().max();
    let residual = k
        .iter()
        .zip(&samples.m)
        .map(|(&kp, &m)| {
            let fit: f64 = (0..=n).map(|i| coef[i] * hat_laplace(i, n, h, 2.0 * kp)).sum();
            m + kp + fit
        })
        .collect();
    Ok(AFromM {
        alpha: (0..=n).map(|i| i as f64 * h).collect(),
        a: coef.iter().copied().collect(),
        kappa_range: (kmin, kmax),
        residual,
        regularizer: opts.regularizer,
        condition,
        amplification,
    })
}
