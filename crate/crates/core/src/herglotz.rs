//! Discrete measures, Stieltjes transforms, boundary values of Herglotz
//! functions, and the Möbius map relating m-functions for different boundary
//! conditions.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WeylError};
use crate::numerics::{extrapolate_to_zero, NeumaierSum};

/// Relative distance under which two atoms are considered coincident.
pub const MERGE_RTOL: f64 = 1e-14;

/// A finite positive atomic measure `Σ w_k δ_{λ_k}`.
///
/// Atoms are kept sorted by position with coincident positions merged, so
/// positions are strictly increasing and every weight is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Build a measure from unsorted atoms. Coincident atoms are merged with
    /// their weights summed.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(x, w) in &atoms {
            if !x.is_finite() || !w.is_finite() {
                return Err(WeylError::domain("measure atoms must be finite"));
            }
            if w <= 0.0 {
                return Err(WeylError::domain(format!(
                    "atom at {x} has non-positive weight {w}"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut positions: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match positions.last() {
                Some(&last) if (x - last).abs() <= MERGE_RTOL * x.abs().max(last.abs()).max(1.0) => {
                    *weights.last_mut().unwrap() += w;
                }
                _ => {
                    positions.push(x);
                    weights.push(w);
                }
            }
        }
        Ok(DiscreteMeasure { positions, weights })
    }

    pub fn empty() -> Self {
        DiscreteMeasure {
            positions: vec![],
            weights: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.positions.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().copied().collect::<NeumaierSum>().value()
    }

    /// `∫ f dμ`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms()
            .map(|(x, w)| w * f(x))
            .collect::<NeumaierSum>()
            .value()
    }

    /// Atoms inside the closed window `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> DiscreteMeasure {
        let (positions, weights) = self
            .atoms()
            .filter(|&(x, _)| x >= lo && x <= hi)
            .unzip();
        DiscreteMeasure { positions, weights }
    }

    /// Multiply all weights by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> DiscreteMeasure {
        DiscreteMeasure {
            positions: self.positions.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }

    /// Read the line-oriented `λ weight` format. `#` starts a comment; blank
    /// lines are ignored; atoms need not be sorted.
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_err = |msg: String| WeylError::Parse {
                path: origin.to_string(),
                line: lineno + 1,
                msg,
            };
            if fields.len() != 2 {
                return Err(parse_err(format!(
                    "expected `lambda weight`, found {} fields",
                    fields.len()
                )));
            }
            let x: f64 = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad position `{}`", fields[0])))?;
            let w: f64 = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad weight `{}`", fields[1])))?;
            if w <= 0.0 || !w.is_finite() || !x.is_finite() {
                return Err(parse_err(format!("invalid atom ({x}, {w})")));
            }
            atoms.push((x, w));
        }
        DiscreteMeasure::new(atoms)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| WeylError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# lambda weight\n");
        for (x, w) in self.atoms() {
            out.push_str(&format!("{x:.17e} {w:.17e}\n"));
        }
        out
    }
}

/// Which normalisation of the Stieltjes transform to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Subtraction {
    /// `Σ w/(λ - z)`.
    None,
    /// `c + Σ w [1/(λ - z) - λ/(1 + λ²)]`, the form needed for Dirichlet
    /// spectral measures that only satisfy `∫ (1+λ²)^{-1} dρ < ∞`.
    DirichletNormalized { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StieltjesValue {
    pub value: Complex64,
    /// Set when the transform of an empty measure was requested.
    pub empty_measure: bool,
    /// The additive constant in force (0 in plain mode).
    pub c: f64,
}

/// Stieltjes (Borel) transform of a discrete measure at `z` off the real axis.
pub fn stieltjes_transform(
    measure: &DiscreteMeasure,
    z: Complex64,
    subtraction: Subtraction,
) -> Result<StieltjesValue> {
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(WeylError::domain(format!(
            "Stieltjes transform needs Im z != 0, got {z}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    // Sum real and imaginary parts with compensation: measures of long
    // Jacobi truncations have many comparable terms.
    let (mut re, mut im) = (NeumaierSum::default(), NeumaierSum::default());
    let c = match subtraction {
        Subtraction::None => 0.0,
        Subtraction::DirichletNormalized { c } => c,
    };
    for (x, w) in measure.atoms() {
        let mut t = w / (Complex64::new(x, 0.0) - z);
        if let Subtraction::DirichletNormalized { .. } = subtraction {
            t -= w * x / (1.0 + x * x);
        }
        re.add(t.re);
        im.add(t.im);
    }
    acc.re = re.value() + c;
    acc.im = im.value();
    Ok(StieltjesValue {
        value: acc,
        empty_measure: measure.is_empty(),
        c,
    })
}

/// Plain-mode Stieltjes transform, panicking only on programmer error
/// (real `z`).
pub fn stieltjes(measure: &DiscreteMeasure, z: Complex64) -> Result<Complex64> {
    Ok(stieltjes_transform(measure, z, Subtraction::None)?.value)
}

/// Parameters for approaching the real axis from above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValueRequest {
    pub lambda_grid: Vec<f64>,
    /// Strictly decreasing positive offsets ε.
    pub epsilon_schedule: Vec<f64>,
    /// Number of Richardson levels applied to the ε sequence.
    pub extrapolation_order: usize,
    /// Mass scale for the atom test `ε|F(λ+iε)| > atom_threshold · mass`.
    pub mass_scale: f64,
    pub atom_threshold: f64,
}

impl BoundaryValueRequest {
    /// Default schedule `0.1 · 2^{-k}`, `k = 0..=5`, second-order Richardson.
    pub fn new(lambda_grid: Vec<f64>) -> Self {
        BoundaryValueRequest {
            lambda_grid,
            epsilon_schedule: (0..6).map(|k| 0.1 * 0.5f64.powi(k)).collect(),
            extrapolation_order: 2,
            mass_scale: 1.0,
            atom_threshold: 1e-3,
        }
    }

    pub fn with_schedule(mut self, eps: Vec<f64>) -> Self {
        self.epsilon_schedule = eps;
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.extrapolation_order = order;
        self
    }

    pub fn with_mass_scale(mut self, mass: f64) -> Self {
        self.mass_scale = mass;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon_schedule.is_empty() {
            return Err(WeylError::config("epsilon schedule is empty"));
        }
        if self.epsilon_schedule.iter().any(|&e| !(e > 0.0)) {
            return Err(WeylError::config("epsilon schedule must be positive"));
        }
        if self.epsilon_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(WeylError::config(
                "epsilon schedule must be strictly decreasing",
            ));
        }
        if self.lambda_grid.iter().any(|x| !x.is_finite()) {
            return Err(WeylError::config("lambda grid must be finite"));
        }
        if self.lambda_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(WeylError::config("lambda grid must be sorted"));
        }
        if !(self.mass_scale > 0.0) {
            return Err(WeylError::config("mass scale must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryValue {
    pub lambda: f64,
    /// Extrapolated estimate of `F(λ + i0)`.
    pub value: Complex64,
    /// `F(λ + iε)` along the schedule, for inspection.
    pub raw: Vec<Complex64>,
    /// True when `ε|F(λ+iε)|` does not vanish with ε, i.e. `λ` sits on (or
    /// within the smallest ε of) a point mass.
    pub atom_flag: bool,
}

/// Boundary values `F(λ + i0)` of a Herglotz function on a grid.
///
/// `F(λ + iε)` is evaluated along the ε schedule and extrapolated to `ε = 0`
/// with polynomial (Richardson) extrapolation of the requested order.
/// An atom is flagged when `ε|F|` at the smallest ε exceeds the threshold
/// *and* has not decayed to below half of its value at the largest ε.
pub fn boundary_values<F>(f: F, req: &BoundaryValueRequest) -> Result<Vec<BoundaryValue>>
where
    F: Fn(Complex64) -> Complex64,
{
    req.validate()?;
    let eps = &req.epsilon_schedule;
    let mut out = Vec::with_capacity(req.lambda_grid.len());
    for &lambda in &req.lambda_grid {
        let raw: Vec<Complex64> = eps
            .iter()
            .map(|&e| f(Complex64::new(lambda, e)))
            .collect();
        let value = extrapolate_to_zero(eps, &raw, req.extrapolation_order);
        let first = eps[0] * raw[0].norm();
        let last = eps[eps.len() - 1] * raw[raw.len() - 1].norm();
        let non_vanishing = eps.len() == 1 || last > 0.5 * first;
        let atom_flag = last > req.atom_threshold * req.mass_scale && non_vanishing;
        out.push(BoundaryValue {
            lambda,
            value,
            raw,
            atom_flag,
        });
    }
    Ok(out)
}

/// A point of the extended complex plane as produced by Möbius maps and
/// m-functions, which may legitimately sit at a pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProjectiveValue {
    Finite(Complex64),
    /// For the boundary-condition map: the denominator `sin θ · m + cos θ`
    /// vanished, i.e. `z` is an eigenvalue of the θ-problem.
    Pole,
}

impl ProjectiveValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            ProjectiveValue::Finite(v) => Some(v),
            ProjectiveValue::Pole => None,
        }
    }
}

/// `m_θ = (cos θ · m − sin θ) / (sin θ · m + cos θ)`.
///
/// A rotation by θ of the projective line: `θ = 0` is the identity and
/// `θ = π/2` gives the Neumann function `-1/m`.
pub fn mobius_bc(m: Complex64, theta: f64) -> ProjectiveValue {
    let (s, c) = theta.sin_cos();
    let num = c * m - s;
    let den = s * m + c;
    if den.norm() <= 1e-300 || den.norm() <= 4.0 * f64::EPSILON * (m.norm() * s.abs() + c.abs()) {
        return ProjectiveValue::Pole;
    }
    ProjectiveValue::Finite(num / den)
}
