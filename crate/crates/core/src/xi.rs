//! Krein spectral shifts, xi functions and the trace formulas built on them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WeylError};
use crate::herglotz::BoundaryValue;
use crate::linalg::sym_eigen;
use crate::numerics::{extrapolate_to_zero_real, NeumaierSum};
use crate::schrodinger::BandData;

/// Tolerance for boundary values whose argument leaves `[0, π]`.
pub const ARG_CLAMP_TOL: f64 = 1e-8;

/// A piecewise-constant function on the line: `values[k]` on
/// `[breaks[k], breaks[k+1])`, `below` left of `breaks[0]` and `above` right
/// of the last break.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
    pub below: f64,
    pub above: f64,
}

impl StepFunction {
    pub fn eval(&self, lambda: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b <= lambda);
        if k == 0 {
            self.below
        } else if k == self.breaks.len() {
            self.above
        } else {
            self.values[k - 1]
        }
    }

    /// `∫ f' ξ` for a step function is a sum of jumps times `f`.
    pub fn integrate_derivative<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &b) in self.breaks.iter().enumerate() {
            let left = if k == 0 { self.below } else { self.values[k - 1] };
            let right = if k == self.values.len() { self.above } else { self.values[k] };
            acc += (left - right) * f(b);
        }
        acc
    }

    /// `∫ |ξ|` over the breaks; infinite when the function does not vanish at
    /// both ends.
    pub fn l1_norm(&self) -> f64 {
        if self.below != 0.0 || self.above != 0.0 {
            return f64::INFINITY;
        }
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (w[1] - w[0]) * v.abs())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledShift {
    pub lambda: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralShift {
    Step(StepFunction),
    Sampled(SampledShift),
}

impl SpectralShift {
    /// Step functions are exact; sampled shifts are interpolated linearly and
    /// return NaN outside the grid.
    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            SpectralShift::Step(s) => s.eval(lambda),
            SpectralShift::Sampled(s) => interpolate(&s.lambda, &s.xi, lambda),
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return f64::NAN;
    }
    let k = xs.partition_point(|&p| p <= x);
    if k == xs.len() {
        return ys[k - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    ys[k - 1] + (ys[k] - ys[k - 1]) * (x - x0) / (x1 - x0)
}

pub enum ShiftMode<'a> {
    /// `ξ(λ) = #{eig A ≤ λ} − #{eig B ≤ λ}`.
    Counting,
    /// `ξ(λ) = arg(1 + α F₀(λ + i0)) / π` from boundary values of `F₀`.
    RankOne {
        f0: &'a [BoundaryValue],
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KreinShift {
    pub shift: SpectralShift,
    /// `‖B − A‖₁`.
    pub trace_norm: f64,
    /// `∫ |ξ|` (trapezoidal for sampled shifts).
    pub xi_l1: f64,
    pub eigenvalues_a: Vec<f64>,
    pub eigenvalues_b: Vec<f64>,
}

impl KreinShift {
    /// `|tr(f(B) − f(A)) − ∫ f' ξ|` for `f(x) = 1/(x − z)`. Only step shifts
    /// integrate exactly; sampled shifts return NaN.
    pub fn resolvent_identity_residual(&self, z: Complex64) -> f64 {
        let f = |x: f64| 1.0 / (x - z);
        let lhs: Complex64 = self.eigenvalues_b.iter().map(|&x| f(x)).sum::<Complex64>()
            - self.eigenvalues_a.iter().map(|&x| f(x)).sum::<Complex64>();
        match &self.shift {
            SpectralShift::Step(s) => (lhs - s.integrate_derivative(f)).norm(),
            SpectralShift::Sampled(_) => f64::NAN,
        }
    }
}

/// Counting shift from two sorted spectra, possibly of different sizes.
pub fn counting_shift(a: &[f64], b: &[f64]) -> StepFunction {
    let mut points: Vec<f64> = a.iter().chain(b).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let count = |s: &[f64], l: f64| s.partition_point(|&x| x <= l) as f64;
    let values: Vec<f64> = points.iter().map(|&p| count(a, p) - count(b, p)).collect();
    let above = a.len() as f64 - b.len() as f64;
    let mut values = values;
    // The value right of the last point is `above`.
    values.pop();
    StepFunction {
        breaks: points,
        values,
        below: 0.0,
        above,
    }
}

/// `ξ = arg(w)/π` with the branch fixed by `sign`: `[0, 1]` for a positive
/// sign and `[-1, 0]` for a negative one. Imaginary parts of the wrong sign
/// are rounding when below `ARG_CLAMP_TOL` relative to `|w|`.
fn signed_arg(w: Complex64, sign: f64) -> Result<(f64, f64)> {
    let im = w.im * sign;
    let n = w.norm();
    let clamp = if im < 0.0 { -im / n.max(f64::MIN_POSITIVE) } else { 0.0 };
    if clamp > ARG_CLAMP_TOL {
        return Err(WeylError::UpstreamData(format!(
            "boundary value {w} has imaginary part of the wrong sign"
        )));
    }
    let im = if im < 0.0 { 0.0 } else { im };
    Ok((im.atan2(w.re) / std::f64::consts::PI * sign, clamp))
}

/// Spectral shift from `A` to `B`.
pub fn krein_shift(a: &DMatrix<f64>, b: &DMatrix<f64>, mode: ShiftMode) -> Result<KreinShift> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(WeylError::domain(format!(
            "dimension mismatch: A is {:?}, B is {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (ea, _) = sym_eigen(a);
    let (eb, _) = sym_eigen(b);
    let (ed, _) = sym_eigen(&(b - a));
    let trace_norm = ed.iter().map(|v| v.abs()).sum();
    let shift = match mode {
        ShiftMode::Counting => SpectralShift::Step(counting_shift(&ea, &eb)),
        ShiftMode::RankOne { f0, alpha } => {
            if f0.is_empty() {
                return Err(WeylError::domain("no boundary data for F0"));
            }
            let mut lambda = Vec::with_capacity(f0.len());
            let mut xi = Vec::with_capacity(f0.len());
            for bv in f0 {
                let (v, _) = signed_arg(1.0 + alpha * bv.value, alpha.signum())?;
                lambda.push(bv.lambda);
                xi.push(v);
            }
            SpectralShift::Sampled(SampledShift { lambda, xi })
        }
    };
    let xi_l1 = match &shift {
        SpectralShift::Step(s) => s.l1_norm(),
        SpectralShift::Sampled(s) => s
            .lambda
            .windows(2)
            .zip(s.xi.windows(2))
            .map(|(l, v)| 0.5 * (l[1] - l[0]) * (v[0].abs() + v[1].abs()))
            .sum(),
    };
    Ok(KreinShift {
        shift,
        trace_norm,
        xi_l1,
        eigenvalues_a: ea,
        eigenvalues_b: eb,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XiRepresentation {
    Sampled { lambda: Vec<f64>, xi: Vec<f64> },
    /// Values in `{0, ½, 1}`; `above` is `None` where the data stop at the
    /// last break.
    Piecewise {
        breaks: Vec<f64>,
        values: Vec<f64>,
        above: Option<f64>,
    },
}

/// `ξ(x, ·)`, the spectral shift for inserting a Dirichlet condition at `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiFunction {
    pub representation: XiRepresentation,
    pub x: f64,
    /// Below this, ξ vanishes.
    pub floor: f64,
    /// Largest relative imaginary part clamped away when taking arguments.
    pub clamp: f64,
}

impl XiFunction {
    /// NaN outside the known range.
    pub fn eval(&self, lambda: f64) -> f64 {
        if lambda < self.floor {
            return 0.0;
        }
        match &self.representation {
            XiRepresentation::Sampled { lambda: l, xi } => interpolate(l, xi, lambda),
            XiRepresentation::Piecewise {
                breaks,
                values,
                above,
            } => {
                let k = breaks.partition_point(|&b| b <= lambda);
                if k == 0 {
                    0.0
                } else if k == breaks.len() {
                    above.unwrap_or(f64::NAN)
                } else {
                    values[k - 1]
                }
            }
        }
    }

    /// Largest λ at which ξ is known, infinite for a known tail.
    pub fn cutoff(&self) -> f64 {
        match &self.representation {
            XiRepresentation::Sampled { lambda, .. } => *lambda.last().unwrap_or(&self.floor),
            XiRepresentation::Piecewise { breaks, above, .. } => match above {
                Some(_) => f64::INFINITY,
                None => *breaks.last().unwrap_or(&self.floor),
            },
        }
    }

    /// Every stored value lies in `[0, 1]` and vanishes below the floor.
    pub fn is_admissible(&self) -> bool {
        let in_range = |v: f64| (0.0..=1.0).contains(&v);
        match &self.representation {
            XiRepresentation::Sampled { lambda, xi } => lambda
                .iter()
                .zip(xi)
                .all(|(&l, &v)| in_range(v) && (l >= self.floor || v == 0.0)),
            XiRepresentation::Piecewise {
                breaks,
                values,
                above,
            } => {
                values.iter().all(|&v| in_range(v))
                    && above.is_none_or(in_range)
                    && breaks.first().is_none_or(|&b| b >= self.floor)
            }
        }
    }
}

/// ξ from boundary values `G(x, x; λ + i0)` sorted by λ.
pub fn xi_from_green(green_boundary: &[(f64, Complex64)], x: f64) -> Result<XiFunction> {
    if green_boundary.is_empty() {
        return Err(WeylError::domain("no Green function samples"));
    }
    if green_boundary.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(WeylError::domain("lambda samples must be strictly increasing"));
    }
    let mut lambda = Vec::with_capacity(green_boundary.len());
    let mut xi = Vec::with_capacity(green_boundary.len());
    let mut clamp: f64 = 0.0;
    for &(l, g) in green_boundary {
        let (v, c) = signed_arg(g, 1.0)?;
        clamp = clamp.max(c);
        lambda.push(l);
        xi.push(v.clamp(0.0, 1.0));
    }
    let floor = lambda
        .iter()
        .zip(&xi)
        .find(|(_, &v)| v > 0.0)
        .map(|(&l, _)| l)
        .unwrap_or(f64::INFINITY);
    Ok(XiFunction {
        representation: XiRepresentation::Sampled { lambda, xi },
        x,
        floor,
        clamp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralData {
    /// `E₀ < E₁ < …` and Dirichlet eigenvalues `μ₁(x) ≤ μ₂(x) ≤ …` with
    /// `E_{j-1} ≤ μ_j ≤ E_j`.
    Discrete {
        eigenvalues: Vec<f64>,
        dirichlet: Vec<f64>,
    },
    /// Band edges `E₀ … E_{2J}` and `μ₁(x) … μ_J(x)`.
    Periodic { band_edges: Vec<f64>, dirichlet: Vec<f64> },
}

impl SpectralData {
    /// Periodic data at the Dirichlet window starting at `y`.
    pub fn from_bands(band: &BandData, y: f64) -> Result<Self> {
        let set = band
            .dirichlet
            .iter()
            .find(|s| s.y == y)
            .ok_or_else(|| WeylError::domain(format!("no Dirichlet data at y = {y}")))?;
        Ok(SpectralData::Periodic {
            band_edges: band.band_edges.clone(),
            dirichlet: set.mu.clone(),
        })
    }

    /// `V = x² − 1` at `x = 0`: `E_j = 2j` and `μ = 2, 2, 6, 6, 10, 10, …`,
    /// with `pairs` Dirichlet eigenvalues.
    pub fn harmonic_oscillator(pairs: usize) -> Self {
        SpectralData::Discrete {
            eigenvalues: (0..=pairs).map(|j| 2.0 * j as f64).collect(),
            dirichlet: (0..pairs).map(|k| (4 * (k / 2) + 2) as f64).collect(),
        }
    }
}

fn interlacing_tol(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

/// Append `[from, to)` with value `v`; pieces arrive contiguous, empty ones
/// are dropped and equal neighbours merged.
fn push_piece(breaks: &mut Vec<f64>, values: &mut Vec<f64>, from: f64, to: f64, v: f64) {
    if to <= from {
        return;
    }
    if breaks.is_empty() {
        breaks.push(from);
    }
    if values.last() == Some(&v) {
        *breaks.last_mut().unwrap() = to;
    } else {
        values.push(v);
        breaks.push(to);
    }
}

/// Piecewise ξ from eigenvalue data: in the discrete case ξ = 1 on
/// `[E_{j-1}, μ_j)` and 0 on `(μ_j, E_j]`; in the periodic case ξ = ½ on
/// bands and 1 then 0 across each gap, switching at `μ_j`.
pub fn xi_from_eigen_data(data: &SpectralData, x: f64) -> Result<XiFunction> {
    let mut breaks = Vec::new();
    let mut values = Vec::new();
    let check = |lo: f64, mu: f64, hi: f64, j: usize| -> Result<()> {
        if mu < lo - interlacing_tol(mu) || mu > hi + interlacing_tol(mu) {
            return Err(WeylError::domain(format!(
                "interlacing violated at j = {j}: mu = {mu} outside [{lo}, {hi}]"
            )));
        }
        Ok(())
    };
    let (floor, above) = match data {
        SpectralData::Discrete {
            eigenvalues: e,
            dirichlet: mu,
        } => {
            if e.is_empty() || mu.len() + 1 > e.len() {
                return Err(WeylError::domain(
                    "need E_0..E_n and at most n Dirichlet eigenvalues",
                ));
            }
            for (j, &m) in mu.iter().enumerate().map(|(k, m)| (k + 1, m)) {
                check(e[j - 1], m, e[j], j)?;
                let m = m.clamp(e[j - 1], e[j]);
                push_piece(&mut breaks, &mut values, e[j - 1], m, 1.0);
                push_piece(&mut breaks, &mut values, m, e[j], 0.0);
            }
            if breaks.is_empty() {
                breaks.push(e[0]);
            }
            (e[0], None)
        }
        SpectralData::Periodic {
            band_edges: e,
            dirichlet: mu,
        } => {
            if e.len() % 2 == 0 || mu.len() != (e.len() - 1) / 2 {
                return Err(WeylError::domain(
                    "need E_0..E_2J and J Dirichlet eigenvalues",
                ));
            }
            for (j, &m) in mu.iter().enumerate().map(|(k, m)| (k + 1, m)) {
                let (lo, hi) = (e[2 * j - 1], e[2 * j]);
                check(lo, m, hi, j)?;
                let m = m.clamp(lo, hi);
                push_piece(&mut breaks, &mut values, e[2 * j - 2], lo, 0.5);
                push_piece(&mut breaks, &mut values, lo, m, 1.0);
                push_piece(&mut breaks, &mut values, m, hi, 0.0);
            }
            if breaks.is_empty() {
                breaks.push(e[0]);
            }
            (e[0], Some(0.5))
        }
    };
    Ok(XiFunction {
        representation: XiRepresentation::Piecewise {
            breaks,
            values,
            above,
        },
        x,
        floor,
        clamp: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelianEstimate {
    pub e0: f64,
    pub alphas: Vec<f64>,
    /// `E₀ + ∫ e^{-αλ}(1 − 2ξ) dλ` per α.
    pub values: Vec<f64>,
    /// Bound `e^{-αΛ}/α` on the integral beyond the cutoff Λ, per α.
    pub truncation: Vec<f64>,
    pub extrapolated: Option<f64>,
    pub order: usize,
    /// Some α has `Λ e^{-αΛ} ≥ 1e-6`.
    pub truncated: bool,
}

/// `∫_a^b e^{-αλ} dλ` without cancellation.
fn exp_integral(alpha: f64, a: f64, b: f64) -> f64 {
    -(-alpha * a).exp() * (-alpha * (b - a)).exp_m1() / alpha
}

/// `E₀ + ∫_{E₀}^{Λ} e^{-αλ}(1 − 2ξ(λ)) dλ` for each α, optionally
/// extrapolated to `α = 0` by a polynomial of degree `order` in α.
pub fn abelian_trace_formula(
    xi: &XiFunction,
    e0: f64,
    alpha_schedule: &[f64],
    extrapolate: bool,
    order: usize,
) -> Result<AbelianEstimate> {
    if alpha_schedule.is_empty() || alpha_schedule.iter().any(|&a| !(a > 0.0)) {
        return Err(WeylError::config("alpha schedule must be positive and non-empty"));
    }
    if e0 > xi.floor {
        return Err(WeylError::domain("E0 lies above the bottom of the spectrum"));
    }
    let cutoff = xi.cutoff();
    let mut values = Vec::with_capacity(alpha_schedule.len());
    let mut truncation = Vec::with_capacity(alpha_schedule.len());
    let mut truncated = false;
    for &alpha in alpha_schedule {
        let mut acc = NeumaierSum::default();
        acc.add(e0);
        match &xi.representation {
            XiRepresentation::Piecewise { breaks, values: v, .. } => {
                // ξ = 0 between E₀ and the first break.
                acc.add(exp_integral(alpha, e0, breaks[0]));
                for (w, &val) in breaks.windows(2).zip(v) {
                    acc.add((1.0 - 2.0 * val) * exp_integral(alpha, w[0], w[1]));
                }
            }
            XiRepresentation::Sampled { lambda, xi: v } => {
                acc.add(exp_integral(alpha, e0, lambda[0].max(e0)));
                let g = |l: f64, x: f64| (-alpha * l).exp() * (1.0 - 2.0 * x);
                for (l, x) in lambda.windows(2).zip(v.windows(2)) {
                    if l[1] <= e0 {
                        continue;
                    }
                    let a = l[0].max(e0);
                    let xa = x[0] + (x[1] - x[0]) * (a - l[0]) / (l[1] - l[0]);
                    acc.add(0.5 * (l[1] - a) * (g(a, xa) + g(l[1], x[1])));
                }
            }
        }
        values.push(acc.value());
        if cutoff.is_finite() {
            truncation.push((-alpha * cutoff).exp() / alpha);
            truncated |= cutoff * (-alpha * cutoff).exp() >= 1e-6;
        } else {
            truncation.push(0.0);
        }
    }
    let extrapolated = (extrapolate && alpha_schedule.len() > 1)
        .then(|| extrapolate_to_zero_real(alpha_schedule, &values, order));
    Ok(AbelianEstimate {
        e0,
        alphas: alpha_schedule.to_vec(),
        values,
        truncation,
        extrapolated,
        order,
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicTraceSum {
    pub y: f64,
    /// `E_{2j-1} + E_{2j} − 2μ_j(y)`.
    pub terms: Vec<f64>,
    /// `E_{2j} − E_{2j-1}`, the bound on each term.
    pub bounds: Vec<f64>,
    /// `S_J = E₀ + Σ_{j ≤ J} terms`, for `J = 1..j_max`.
    pub partial_sums: Vec<f64>,
}

/// Partial sums of the periodic trace formula, each term checked against
/// its gap width.
pub fn periodic_trace_sum(band: &BandData, y: f64, j_max: usize) -> Result<PeriodicTraceSum> {
    if j_max == 0 || j_max > band.j_max() {
        return Err(WeylError::config(format!(
            "j_max must be in 1..={}",
            band.j_max()
        )));
    }
    let set = band
        .dirichlet
        .iter()
        .find(|s| s.y == y)
        .ok_or_else(|| WeylError::domain(format!("no Dirichlet data at y = {y}")))?;
    if set.mu.len() < j_max {
        return Err(WeylError::domain("not enough Dirichlet eigenvalues"));
    }
    let e = &band.band_edges;
    let mut terms = Vec::with_capacity(j_max);
    let mut bounds = Vec::with_capacity(j_max);
    let mut partial_sums = Vec::with_capacity(j_max);
    let mut acc = NeumaierSum::default();
    acc.add(e[0]);
    for j in 1..=j_max {
        let mu = set.mu[j - 1];
        let term = e[2 * j - 1] + e[2 * j] - 2.0 * mu;
        let bound = e[2 * j] - e[2 * j - 1];
        if term.abs() > bound.abs() + 1e-7 * (1.0 + mu.abs()) {
            return Err(WeylError::UpstreamData(format!(
                "term {j} = {term} exceeds the gap width {bound}: eigenvalue data inconsistent"
            )));
        }
        acc.add(term);
        terms.push(term);
        bounds.push(bound);
        partial_sums.push(acc.value());
    }
    Ok(PeriodicTraceSum {
        y,
        terms,
        bounds,
        partial_sums,
    })
}

/// `V(y) − V(y₀)` from Dirichlet data, with both signs found in the
/// literature. Differencing the trace sum gives `from_trace_sum`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirichletDifference {
    pub y: f64,
    pub y0: f64,
    /// `−2 Σ [μ_j(y) − μ_j(y₀)]`.
    pub from_trace_sum: f64,
    /// `+2 Σ [μ_j(y) − μ_j(y₀)]`.
    pub opposite_sign: f64,
}

pub fn dirichlet_difference(band: &BandData, y: f64, y0: f64, j_max: usize) -> Result<DirichletDifference> {
    let find = |p: f64| {
        band.dirichlet
            .iter()
            .find(|s| s.y == p)
            .ok_or_else(|| WeylError::domain(format!("no Dirichlet data at y = {p}")))
    };
    let (a, b) = (find(y)?, find(y0)?);
    if a.mu.len() < j_max || b.mu.len() < j_max {
        return Err(WeylError::domain("not enough Dirichlet eigenvalues"));
    }
    let mut acc = NeumaierSum::default();
    for j in 0..j_max {
        acc.add(a.mu[j] - b.mu[j]);
    }
    Ok(DirichletDifference {
        y,
        y0,
        from_trace_sum: -2.0 * acc.value(),
        opposite_sign: 2.0 * acc.value(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn diagonal_counting_shift() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0]));
        let k = krein_shift(&a, &b, ShiftMode::Counting).unwrap();
        for (l, v) in [(-1.0, 0.0), (0.0, 1.0), (0.5, 1.0), (1.0, 0.0), (2.0, 0.0)] {
            assert_eq!(k.shift.eval(l), v, "at {l}");
        }
        assert!((k.xi_l1 - 1.0).abs() < 1e-15);
        assert!((k.trace_norm - 1.0).abs() < 1e-15);
        let z = Complex64::new(0.3, 0.7);
        assert!(k.resolvent_identity_residual(z) < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            krein_shift(&a, &b, ShiftMode::Counting),
            Err(WeylError::Domain(_))
        ));
    }

    #[test]
    fn harmonic_piecewise_pattern() {
        let xi = xi_from_eigen_data(&SpectralData::harmonic_oscillator(6), 0.0).unwrap();
        for (l, v) in [(1.0, 1.0), (3.0, 0.0), (5.0, 1.0), (7.0, 0.0), (9.0, 1.0), (11.0, 0.0)] {
            assert_eq!(xi.eval(l), v, "at {l}");
        }
        assert_eq!(xi.eval(-1.0), 0.0);
        assert!(xi.is_admissible());
        assert_eq!(xi.cutoff(), 12.0);
    }

    #[test]
    fn harmonic_abelian_sum() {
        let xi = xi_from_eigen_data(&SpectralData::harmonic_oscillator(2000), 0.0).unwrap();
        let est = abelian_trace_formula(&xi, 0.0, &[0.08, 0.04, 0.02], true, 2).unwrap();
        for (&a, &v) in est.alphas.iter().zip(&est.values) {
            assert!((v + a.tanh() / a).abs() < 1e-10, "alpha {a}: {v}");
        }
        assert!((est.extrapolated.unwrap() + 1.0).abs() < 1e-5);
        assert!(!est.truncated);
    }

    #[test]
    fn interlacing_violation() {
        let data = SpectralData::Discrete {
            eigenvalues: vec![0.0, 1.0, 2.0],
            dirichlet: vec![1.5, 1.8],
        };
        assert!(matches!(xi_from_eigen_data(&data, 0.0), Err(WeylError::Domain(_))));
    }

    #[test]
    fn free_green_gives_one_half() {
        let samples: Vec<(f64, Complex64)> = [1.0, 4.0, 9.0]
            .iter()
            .map(|&l: &f64| (l, Complex64::new(0.0, 0.5 / l.sqrt())))
            .collect();
        let xi = xi_from_green(&samples, 0.0).unwrap();
        assert!((xi.eval(4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn real_green_values_give_zero_or_one() {
        let samples = [
            (-2.0, Complex64::new(0.3, 0.0)),
            (-1.0, Complex64::new(-0.3, -1e-12)),
        ];
        let xi = xi_from_green(&samples, 0.0).unwrap();
        assert_eq!(xi.eval(-2.0), 0.0);
        assert_eq!(xi.eval(-1.0), 1.0);
        assert!(xi.clamp > 0.0);
        let bad = [(0.0, Complex64::new(1.0, -0.1))];
        assert!(matches!(xi_from_green(&bad, 0.0), Err(WeylError::UpstreamData(_))));
    }

    #[test]
    fn constant_periodic_is_alpha_independent() {
        let data = SpectralData::Periodic {
            band_edges: vec![3.0, 5.0, 5.0],
            dirichlet: vec![5.0],
        };
        let xi = xi_from_eigen_data(&data, 0.0).unwrap();
        let est = abelian_trace_formula(&xi, 3.0, &[0.1, 0.01], false, 2).unwrap();
        assert!(est.values.iter().all(|&v| v == 3.0));
    }
}
