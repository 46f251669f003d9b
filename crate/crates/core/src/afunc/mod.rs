//! The A-function `A(α, x)` of the representation
//! `m(-κ², x) = -κ - ∫₀^a A(α, x) e^{-2ακ} dα + (exponentially small)`.
//!
//! `A` obeys `∂ₓA = ∂_αA + (A∗A)` with `(A∗A)(α) = ∫₀^α A(α-β)A(β) dβ`,
//! which no longer involves `V`. Along the characteristics `α + x = const`
//! this is an ODE in `x` whose right side is a same-`x` convolution, so both
//! maps here march level by level in `x` with a Heun step and trapezoidal
//! convolutions.

mod bm;
mod fit;
mod measure;

pub use bm::{local_bm_check, BmCheck, BmOptions, BmVerdict};
pub use fit::{
    a_from_m, fit_decay, m_from_a, representation_residual, AFromM, DecayFit, FitOptions,
    MSamples, RepresentationResidual,
};
pub use measure::{a_from_measure, entire_kernel, AbelianA, SpectralInput};

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WeylError};
use crate::schrodinger::{Interpolation, Potential, Tail};

/// `A(α_i, x_j)` on `{α_i = ih, x_j = jh : i + j ≤ n}`, `h = L/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AField {
    pub horizon: f64,
    pub h: f64,
    /// `rows[j][i] = A(α_i, x_j)` for `i = 0..=n-j`.
    rows: Vec<Vec<f64>>,
}

impl AField {
    pub fn n(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.rows.get(j).and_then(|r| r.get(i)).copied()
    }

    /// `A(·, x_j)`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    /// `A(α_i, 0)` for `i = 0..=n`.
    pub fn slice(&self) -> &[f64] {
        &self.rows[0]
    }

    /// `A(0, x_j)`, which equals `V(x_j)` on the grid.
    pub fn boundary_trace(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    /// `alpha x value` rows.
    pub fn to_text(&self) -> String {
        let mut s = format!("# A-field: horizon {} h {}\n# alpha x value\n", self.horizon, self.h);
        for (j, row) in self.rows.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                s.push_str(&format!("{:e} {:e} {:e}\n", i as f64 * self.h, j as f64 * self.h, v));
            }
        }
        s
    }
}

/// A slice `A(α_i, 0)`, `α_i = ih`, read from `alpha value` or
/// `alpha x value` rows (rows with `x ≠ 0` are skipped).
pub fn parse_slice(text: &str, origin: &str) -> Result<(f64, Vec<f64>)> {
    let mut pts = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| WeylError::Parse {
                path: origin.to_string(),
                line: k + 1,
                msg: e.to_string(),
            })?;
        match nums.as_slice() {
            [a, v] => pts.push((*a, *v)),
            [a, x, v] if *x == 0.0 => pts.push((*a, *v)),
            [_, _, _] => {}
            _ => {
                return Err(WeylError::Parse {
                    path: origin.to_string(),
                    line: k + 1,
                    msg: "expected `alpha value` or `alpha x value`".into(),
                })
            }
        }
    }
    if pts.len() < 2 {
        return Err(WeylError::InsufficientData(format!(
            "{origin}: need at least two A samples"
        )));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let h = pts[1].0 - pts[0].0;
    for (k, p) in pts.iter().enumerate() {
        if (p.0 - k as f64 * h).abs() > 1e-9 * (1.0 + p.0.abs()) {
            return Err(WeylError::domain(format!(
                "{origin}: alpha grid must be uniform and start at 0"
            )));
        }
    }
    Ok((h, pts.into_iter().map(|p| p.1).collect()))
}

pub fn load_slice(path: &Path) -> Result<(f64, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|source| WeylError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_slice(&text, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarchOptions {
    /// The inverse march stops with a divergence error once `|A|` exceeds
    /// this.
    pub divergence_bound: f64,
    /// Largest tolerated estimate of the accumulated convolution error.
    pub refinement_tol: f64,
}

impl Default for MarchOptions {
    fn default() -> Self {
        MarchOptions {
            divergence_bound: 1e8,
            refinement_tol: 1e-2,
        }
    }
}

/// Trapezoidal `(a∗a)(α_i)` for every `i`.
fn convolve(a: &[f64], h: f64) -> Vec<f64> {
    let term = |i: usize| -> f64 {
        if i == 0 {
            return 0.0;
        }
        let mut s = a[0] * a[i];
        for k in 1..i {
            s += a[i - k] * a[k];
        }
        h * s
    };
    if a.len() > 256 {
        (0..a.len()).into_par_iter().map(term).collect()
    } else {
        (0..a.len()).map(term).collect()
    }
}

/// Same with step `2h` on the even points, as an error reference.
fn convolve_coarse(a: &[f64], h: f64) -> Vec<f64> {
    let even: Vec<f64> = a.iter().step_by(2).copied().collect();
    convolve(&even, 2.0 * h)
}

fn grid_steps(horizon: f64, n: usize) -> Result<f64> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(WeylError::domain("horizon must be positive"));
    }
    if n < 2 {
        return Err(WeylError::config("need at least 2 grid steps"));
    }
    Ok(horizon / n as f64)
}

/// Forward map `V ↦ A` on `[0, L]` with `n` steps: each characteristic
/// starts at `A(0, c) = V(c)` and is followed down to `x = 0`.
pub fn a_forward(pot: &Potential, horizon: f64, n: usize, opts: &MarchOptions) -> Result<AField> {
    let h = grid_steps(horizon, n)?;
    let (x0, x1) = pot.domain();
    if x0 > 0.0 || x1 < horizon * (1.0 - 1e-12) {
        return Err(WeylError::domain(format!(
            "potential domain [{x0}, {x1}] does not cover [0, {horizon}]"
        )));
    }
    let v: Vec<f64> = (0..=n).map(|j| pot.eval(j as f64 * h)).collect();
    let mut rows = vec![Vec::new(); n + 1];
    rows[n] = vec![v[n]];
    for j in (1..=n).rev() {
        let old = &rows[j];
        let c_old = convolve(old, h);
        let mut new = Vec::with_capacity(old.len() + 1);
        new.push(v[j - 1]);
        new.extend(old.iter().zip(&c_old).map(|(a, c)| a - h * c));
        let c_pred = convolve(&new, h);
        for i in 0..old.len() {
            new[i + 1] = old[i] - 0.5 * h * (c_old[i] + c_pred[i + 1]);
        }
        rows[j - 1] = new;
    }
    // Richardson-style estimate of the convolution error carried along a
    // characteristic of length up to L.
    let last = &rows[0];
    let fine = convolve(last, h);
    let coarse = convolve_coarse(last, h);
    let est = coarse
        .iter()
        .enumerate()
        .map(|(k, c)| (c - fine[2 * k]).abs() / 3.0)
        .fold(0.0, f64::max)
        * horizon;
    if est > opts.refinement_tol {
        return Err(WeylError::RefinementNeeded(format!(
            "estimated convolution error {est:.3e} exceeds {:.3e}; reduce h",
            opts.refinement_tol
        )));
    }
    Ok(AField { horizon, h, rows })
}

/// Inverse map: march from `A(·, 0)` (given at `α_i = ih`, `i = 0..=n`)
/// upward in `x`, reading `V(x_j) = A(0, x_j)`. The result lives on `[0, nh]`.
pub fn a_inverse(slice: &[f64], h: f64, opts: &MarchOptions) -> Result<Potential> {
    if slice.len() < 3 {
        return Err(WeylError::InsufficientData(
            "need at least three A samples".into(),
        ));
    }
    if !(h > 0.0) {
        return Err(WeylError::domain("h must be positive"));
    }
    if slice.iter().any(|v| !v.is_finite()) {
        return Err(WeylError::domain("A samples must be finite"));
    }
    let n = slice.len() - 1;
    let mut v = Vec::with_capacity(n + 1);
    let mut row = slice.to_vec();
    v.push(row[0]);
    for j in 0..n {
        let c_old = convolve(&row, h);
        let m = row.len() - 1;
        let mut new: Vec<f64> = (0..m).map(|i| row[i + 1] + h * c_old[i + 1]).collect();
        let c_pred = convolve(&new, h);
        for i in 0..m {
            new[i] = row[i + 1] + 0.5 * h * (c_old[i + 1] + c_pred[i]);
        }
        if new.iter().any(|a| !(a.abs() <= opts.divergence_bound)) {
            return Err(WeylError::Divergence {
                x_reached: (j + 1) as f64 * h,
                bound: opts.divergence_bound,
            });
        }
        v.push(new[0]);
        row = new;
    }
    Potential::new(0.0, n as f64 * h, v, Interpolation::Cubic, Tail::CompactSupport)
}

/// `A(·, 0)` on the grid of step `L/n`, from forward runs with `n` and `2n`
/// steps combined to cancel the `h²` error term.
pub fn a_slice_extrapolated(pot: &Potential, horizon: f64, n: usize, opts: &MarchOptions) -> Result<Vec<f64>> {
    let a1 = a_forward(pot, horizon, n, opts)?;
    let a2 = a_forward(pot, horizon, 2 * n, opts)?;
    Ok((0..=n)
        .map(|i| (4.0 * a2.slice()[2 * i] - a1.slice()[i]) / 3.0)
        .collect())
}
