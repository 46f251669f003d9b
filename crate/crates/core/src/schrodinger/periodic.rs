use serde::Serialize;

use super::eigen::{interval_eigenvalues, EigenOptions};
use super::ode::{integrate, OdeOptions};
use super::potential::{Potential, Tail};
use super::BoundaryCondition;
use crate::error::{Result, WeylError};
use crate::numerics::{bracketed_root, golden_max};

/// Floquet discriminant `Δ(λ) = u₁(x₀+1) + u₂'(x₀+1)` for the fundamental
/// solutions `u₁ = 1, u₁' = 0` and `u₂ = 0, u₂' = 1` at `x₀`.
pub fn discriminant(pot: &Potential, lambda: f64, opts: &OdeOptions) -> Result<f64> {
    let (x0, x1) = pot.domain();
    let mut y = [1.0, 0.0, 0.0, 1.0];
    let mut x = x0;
    for end in pot.segment_points(x0, x1) {
        let r = integrate(
            |t, y: &[f64; 4]| {
                let q = pot.eval(t) - lambda;
                [y[1], q * y[0], y[3], q * y[2]]
            },
            x,
            y,
            end,
            opts,
            |_| false,
        )?;
        y = r.y;
        x = end;
    }
    Ok(y[0] + y[3])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletSet {
    pub y: f64,
    /// `μ₁(y) < μ₂(y) < …`, Dirichlet eigenvalues on `[y, y + 1]`.
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandData {
    /// `E₀ < E₁ ≤ E₂ < E₃ ≤ E₄ …` up to `E_{2 j_max}`.
    pub band_edges: Vec<f64>,
    /// `closed_gaps[j-1]` is true when gap `j` is too narrow for the
    /// discriminant to resolve; its edges are then the extreme Dirichlet
    /// eigenvalues `μ_j(y)` over the windows computed.
    pub closed_gaps: Vec<bool>,
    pub dirichlet: Vec<DirichletSet>,
    /// Smallest value of `min(μ_j - E_{2j-1}, E_{2j} - μ_j)` over all `j` and
    /// `y`; negative values within tolerance are rounding.
    pub interlacing_margin: f64,
}

impl BandData {
    pub fn gap(&self, j: usize) -> f64 {
        self.band_edges[2 * j] - self.band_edges[2 * j - 1]
    }

    pub fn j_max(&self) -> usize {
        (self.band_edges.len() - 1) / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandOptions {
    pub eigen: EigenOptions,
    /// Gap `j` counts as closed when `max (-1)^j Δ - 2` on it is below this.
    pub closed_gap_tol: f64,
    pub edge_tol: f64,
    pub interlacing_tol: f64,
}

impl Default for BandOptions {
    fn default() -> Self {
        BandOptions {
            eigen: EigenOptions::default(),
            closed_gap_tol: 1e-11,
            edge_tol: 1e-11,
            interlacing_tol: 1e-7,
        }
    }
}

/// Band edges from the discriminant and Dirichlet eigenvalues on unit
/// windows `[y, y+1]`, for a potential of period 1.
///
/// In gap `j` the function `D_j = (-1)^j Δ` is at least 2 and single-peaked
/// on `[ℓ_j, r_j]`, the zeros of `D_j` on either side of the Dirichlet
/// eigenvalue `μ_j(x₀)`; the edges are the roots of `D_j = 2` on either side
/// of the peak.
pub fn periodic_band_data(
    pot: &Potential,
    j_max: usize,
    y_points: &[f64],
    opts: &BandOptions,
) -> Result<BandData> {
    let period = match pot.tail() {
        Tail::Periodic { period } => period,
        _ => return Err(WeylError::domain("band data needs a periodic potential")),
    };
    if (period - 1.0).abs() > 1e-12 {
        return Err(WeylError::domain("period must be normalised to 1"));
    }
    if j_max == 0 {
        return Err(WeylError::config("j_max must be at least 1"));
    }
    let (x0, _) = pot.domain();
    if pot.min_sample() == pot.max_sample() {
        return Ok(constant_band_data(pot.min_sample(), j_max, y_points));
    }
    let ode = &opts.eigen.ode;
    let delta = |l: f64| discriminant(pot, l, ode);
    let dir = BoundaryCondition::Dirichlet;
    let mu0 = interval_eigenvalues(pot, (x0, x0 + 1.0), dir, dir, j_max + 1, &opts.eigen)?;
    let floor = pot.min_sample() - 1.0;

    // Root finding over fallible closures: record the first error.
    let solve = |f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64| -> Result<f64> {
        let mut err = None;
        let r = bracketed_root(
            |l| match f(l) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
            opts.edge_tol,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(r),
        }
    };

    let mut edges = vec![0.0; 2 * j_max + 1];
    let mut closed = vec![false; j_max];
    let mut zeros = Vec::with_capacity(j_max + 1);
    for j in 1..=j_max + 1 {
        // ℓ_j: zero of D_j between μ_{j-1} (or the floor) and μ_j.
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let lo = if j == 1 { floor } else { mu0[j - 2] };
        let dj = |l: f64| delta(l).map(|d| sign * d);
        zeros.push(solve(&dj, lo, mu0[j - 1])?);
    }
    for j in 1..=j_max {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let (l, r) = (zeros[j - 1], zeros[j]);
        let mut err = None;
        let (peak, dmax) = golden_max(
            |x| match delta(x) {
                Ok(v) => sign * v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            l,
            r,
            1e-9 * (1.0 + r.abs()),
        );
        if let Some(e) = err {
            return Err(e);
        }
        if dmax - 2.0 <= opts.closed_gap_tol {
            // The peak of a closed gap is flat to second order and poorly
            // located; the Dirichlet eigenvalue sits in the gap and is sharp.
            closed[j - 1] = true;
            edges[2 * j - 1] = mu0[j - 1];
            edges[2 * j] = mu0[j - 1];
        } else {
            let g = |x: f64| delta(x).map(|d| sign * d - 2.0);
            edges[2 * j - 1] = solve(&g, l, peak)?;
            edges[2 * j] = solve(&g, peak, r)?;
        }
    }
    let g0 = |x: f64| delta(x).map(|d| d - 2.0);
    edges[0] = solve(&g0, floor, zeros[0])?;

    let mut dirichlet = Vec::with_capacity(y_points.len());
    for &y in y_points {
        let mu = interval_eigenvalues(pot, (y, y + 1.0), dir, dir, j_max, &opts.eigen)?;
        for (j, &m) in mu.iter().enumerate().map(|(k, m)| (k + 1, m)) {
            let (lo, hi) = (edges[2 * j - 1], edges[2 * j]);
            let tol = opts.interlacing_tol * (1.0 + m.abs());
            if m < lo - tol || m > hi + tol {
                return Err(WeylError::InternalConsistency(format!(
                    "interlacing violated at y = {y}, j = {j}: mu = {m} outside [{lo}, {hi}]"
                )));
            }
        }
        dirichlet.push(DirichletSet { y, mu });
    }
    // μ_j(y) always lies in gap j, and is located far more sharply than an
    // edge at the flat peak of Δ; widen each gap to hold every μ_j computed.
    // This also gives gaps below the discriminant's resolution their width.
    for j in 1..=j_max {
        for set in &dirichlet {
            edges[2 * j - 1] = edges[2 * j - 1].min(set.mu[j - 1]);
            edges[2 * j] = edges[2 * j].max(set.mu[j - 1]);
        }
    }
    let margin = dirichlet
        .iter()
        .flat_map(|set| {
            set.mu
                .iter()
                .enumerate()
                .map(|(k, &m)| (m - edges[2 * k + 1]).min(edges[2 * k + 2] - m))
        })
        .fold(f64::INFINITY, f64::min);
    Ok(BandData {
        band_edges: edges,
        closed_gaps: closed,
        dirichlet,
        interlacing_margin: margin,
    })
}

/// Closed form for `V ≡ c`: `Δ(λ) = 2 cos √(λ - c)`, every gap closed at
/// `c + (jπ)²`, which is also the `j`-th Dirichlet eigenvalue on any window.
fn constant_band_data(c: f64, j_max: usize, y_points: &[f64]) -> BandData {
    let level = |j: usize| c + (j as f64 * std::f64::consts::PI).powi(2);
    let mut edges = vec![c];
    for j in 1..=j_max {
        edges.push(level(j));
        edges.push(level(j));
    }
    BandData {
        band_edges: edges,
        closed_gaps: vec![true; j_max],
        dirichlet: y_points
            .iter()
            .map(|&y| DirichletSet {
                y,
                mu: (1..=j_max).map(level).collect(),
            })
            .collect(),
        interlacing_margin: 0.0,
    }
}
