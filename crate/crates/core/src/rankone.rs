//! Rank-one perturbations `A_α = A + α⟨φ,·⟩φ` of real symmetric matrices:
//! the Aronszajn-Krein formula, the explicit resolvent formula, the
//! infinite-coupling limit and the rescaled spectral measures.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WeylError};
use crate::herglotz::{stieltjes, DiscreteMeasure};
use crate::linalg::{shifted_inverse, shifted_solve, spectral_norm, sym_eigen};
use crate::numerics::{
    bracketed_root, extrapolate_to_zero_real, fit_line, integrate_adaptive, LineFit,
};

/// Base matrix `A` and unit vector `φ`; the coupling is supplied per call.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneFamily {
    base: DMatrix<f64>,
    phi: DVector<f64>,
}

impl RankOneFamily {
    pub fn new(base: DMatrix<f64>, phi: DVector<f64>) -> Result<Self> {
        let n = base.nrows();
        if n == 0 || base.ncols() != n {
            return Err(WeylError::domain("base matrix must be square and non-empty"));
        }
        if phi.len() != n {
            return Err(WeylError::domain(format!(
                "phi has length {}, matrix has size {n}",
                phi.len()
            )));
        }
        let scale = base.amax().max(1.0);
        if (&base - base.transpose()).amax() > 1e-14 * scale {
            return Err(WeylError::domain("base matrix is not symmetric"));
        }
        if (phi.norm() - 1.0).abs() > 1e-14 {
            return Err(WeylError::domain(format!(
                "phi must be a unit vector, |phi| = {}",
                phi.norm()
            )));
        }
        Ok(RankOneFamily { base, phi })
    }

    /// Like [`RankOneFamily::new`] but normalises `φ` first.
    pub fn normalized(base: DMatrix<f64>, phi: DVector<f64>) -> Result<Self> {
        let norm = phi.norm();
        if !(norm > 0.0) {
            return Err(WeylError::domain("phi is zero"));
        }
        let sym = (&base + base.transpose()) * 0.5;
        RankOneFamily::new(sym, phi / norm)
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn phi(&self) -> &DVector<f64> {
        &self.phi
    }

    /// `A + α φφᵀ`.
    pub fn perturbed(&self, alpha: f64) -> DMatrix<f64> {
        &self.base + &self.phi * self.phi.transpose() * alpha
    }

    /// Spectral measure of `(A_α, φ)`.
    pub fn spectral_measure(&self, alpha: f64) -> Result<DiscreteMeasure> {
        let (vals, vecs) = sym_eigen(&self.perturbed(alpha));
        let atoms = vals
            .iter()
            .enumerate()
            .map(|(k, &x)| (x, vecs.column(k).dot(&self.phi).powi(2)))
            .filter(|&(_, w)| w > 0.0);
        DiscreteMeasure::new(atoms)
    }

    /// `F_α(z) = ⟨φ, (A_α - z)⁻¹ φ⟩` by a direct solve.
    pub fn f_alpha(&self, alpha: f64, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            return Err(WeylError::domain("z must be off the real axis"));
        }
        let x = shifted_solve(&self.perturbed(alpha), z, &self.phi)?;
        Ok(x.iter().zip(self.phi.iter()).map(|(xi, p)| xi * p).sum())
    }

    /// False when `φ` is (numerically) orthogonal to some eigenvector of `A`,
    /// in which case part of the spectrum is invisible to the measure.
    pub fn is_cyclic(&self) -> bool {
        let (_, vecs) = sym_eigen(&self.base);
        (0..self.dim()).all(|k| vecs.column(k).dot(&self.phi).abs() > 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AronszajnKrein {
    pub f0: Complex64,
    pub f_alpha: Complex64,
    /// `|F_α - F₀/(1 + αF₀)|`.
    pub identity_residual: f64,
    /// Spectral norm of `(A_α - z)⁻¹ - [R₀ - α/(1+αF₀) · (R₀φ)(R₀φ)ᵀ]`.
    pub resolvent_residual: f64,
}

pub fn aronszajn_krein(fam: &RankOneFamily, alpha: f64, z: Complex64) -> Result<AronszajnKrein> {
    if z.im == 0.0 {
        return Err(WeylError::domain("z must be off the real axis"));
    }
    if !alpha.is_finite() {
        return Err(WeylError::domain("coupling must be finite"));
    }
    let r0 = shifted_inverse(&fam.base, z)?;
    let ra = shifted_inverse(&fam.perturbed(alpha), z)?;
    let phi_c = fam.phi.map(|p| Complex64::new(p, 0.0));
    let u = &r0 * &phi_c;
    let f0: Complex64 = phi_c.iter().zip(u.iter()).map(|(p, x)| p * x).sum();
    let ua = &ra * &phi_c;
    let f_alpha: Complex64 = phi_c.iter().zip(ua.iter()).map(|(p, x)| p * x).sum();
    let den = 1.0 + alpha * f0;
    assert!(den.norm() > 0.0, "1 + alpha F0 vanished off the real axis");
    let identity_residual = (f_alpha - f0 / den).norm();
    // A is real symmetric, so (A - z)⁻¹ is complex symmetric and ⟨φ, R₀·⟩ is
    // the plain transpose of R₀φ.
    let predicted = &r0 - (&u * u.transpose()) * (alpha / den);
    let resolvent_residual = spectral_norm(&(ra - predicted));
    Ok(AronszajnKrein {
        f0,
        f_alpha,
        identity_residual,
        resolvent_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingStep {
    pub alpha: f64,
    /// The eigenvalue of `A_α` that runs off to `±∞` with α.
    pub escaping: f64,
    pub remaining: Vec<f64>,
    /// Hausdorff distance between `remaining` and the compression spectrum.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfiniteCouplingReport {
    /// Compression of `A` to `φ⊥`, in the basis produced by the Householder
    /// reflector that sends `φ` to the last basis vector.
    #[serde(skip)]
    pub compression: DMatrix<f64>,
    pub compression_spectrum: Vec<f64>,
    /// `N = 1`: the orthogonal complement is trivial.
    pub degenerate: bool,
    pub steps: Vec<CouplingStep>,
    /// Least-squares line through `(log α, log distance)`.
    pub fit: Option<LineFit>,
}

/// Compression of `A` to the orthogonal complement of `φ`.
pub fn compression(fam: &RankOneFamily) -> DMatrix<f64> {
    let n = fam.dim();
    if n == 1 {
        return DMatrix::zeros(0, 0);
    }
    // Householder reflector H with Hφ = ±e_N.
    let mut v = fam.phi.clone();
    let sign = if v[n - 1] >= 0.0 { 1.0 } else { -1.0 };
    v[n - 1] += sign;
    let vv = v.dot(&v);
    let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    let rotated = &h * &fam.base * &h;
    let c = rotated.view((0, 0), (n - 1, n - 1)).into_owned();
    (&c + c.transpose()) * 0.5
}

fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let one_way = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    one_way(a, b).max(one_way(b, a))
}

/// Track the spectrum of `A_α` along a schedule of couplings and compare it
/// with the spectrum of the compression.
pub fn infinite_coupling(fam: &RankOneFamily, alphas: &[f64]) -> Result<InfiniteCouplingReport> {
    if alphas.iter().any(|a| !a.is_finite() || *a == 0.0) {
        return Err(WeylError::config("coupling schedule must be finite and non-zero"));
    }
    let comp = compression(fam);
    let degenerate = fam.dim() == 1;
    let comp_spec = if degenerate { vec![] } else { sym_eigen(&comp).0 };
    let norm_a = fam.base.iter().map(|x| x * x).sum::<f64>().sqrt();
    let steps: Vec<CouplingStep> = alphas
        .par_iter()
        .map(|&alpha| {
            let (vals, _) = sym_eigen(&fam.perturbed(alpha));
            // The escaping eigenvalue sits within ‖A‖ of α; take the closest.
            let idx = (0..vals.len())
                .min_by(|&i, &j| (vals[i] - alpha).abs().total_cmp(&(vals[j] - alpha).abs()))
                .unwrap();
            let escaping = vals[idx];
            let remaining: Vec<f64> = vals
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != idx)
                .map(|(_, &v)| v)
                .collect();
            debug_assert!((escaping - alpha).abs() <= norm_a + 1e-9 * alpha.abs());
            let distance = hausdorff(&remaining, &comp_spec);
            CouplingStep {
                alpha,
                escaping,
                remaining,
                distance,
            }
        })
        .collect();
    let usable: Vec<(f64, f64)> = steps
        .iter()
        .filter(|s| s.distance > 0.0)
        .map(|s| (s.alpha.abs().ln(), s.distance.ln()))
        .collect();
    let fit = if usable.len() >= 2 && !degenerate {
        let (xs, ys): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
        Some(fit_line(&xs, &ys))
    } else {
        None
    };
    Ok(InfiniteCouplingReport {
        compression: comp,
        compression_spectrum: comp_spec,
        degenerate,
        steps,
        fit,
    })
}

/// Smooth test functions supported in a window: `t^j · exp(-1/(1-t²))` with
/// `t` the affine coordinate mapping the window onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpFamily {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl BumpFamily {
    pub fn eval(&self, j: usize, x: f64) -> f64 {
        let t = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        if t <= -1.0 || t >= 1.0 {
            return 0.0;
        }
        t.powi(j as i32) * (-1.0 / (1.0 - t * t)).exp() * std::f64::consts::E
    }

    pub fn integrate(&self, measure: &DiscreteMeasure) -> Vec<f64> {
        (0..self.count)
            .map(|j| measure.integrate(|x| self.eval(j, x)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledStep {
    pub alpha: f64,
    /// `(1 + α²) μ_α` restricted to the window.
    pub rho: DiscreteMeasure,
    /// `μ_α(window)`, which tends to zero.
    pub plain_window_mass: f64,
    pub test_integrals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledMeasureReport {
    pub window: (f64, f64),
    pub tests: BumpFamily,
    pub steps: Vec<RescaledStep>,
    /// Atoms of `ρ_∞` in the window: zeros `μ` of `F₀` with mass `1/F₀'(μ)`.
    pub rho_infinity: DiscreteMeasure,
    /// (i) weak limit: test integrals of `ρ_α` extrapolated in `1/α`.
    pub weak_limit: Vec<f64>,
    /// (ii) `∫ f Im[-1/F₀(λ+iε)]/π dλ` extrapolated in ε.
    pub boundary_limit: Vec<f64>,
    /// Test integrals of `rho_infinity`.
    pub exact_limit: Vec<f64>,
    /// `max |weak_limit - boundary_limit|`.
    pub agreement: f64,
    /// An escaping eigenvalue lies in the window at the largest coupling.
    pub escape_in_window: bool,
}

/// Options for [`rescaled_measure_limit`].
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledOptions {
    pub test_count: usize,
    pub epsilon_schedule: Vec<f64>,
    pub quadrature_tol: f64,
}

impl Default for RescaledOptions {
    fn default() -> Self {
        RescaledOptions {
            test_count: 3,
            epsilon_schedule: vec![4e-3, 2e-3, 1e-3],
            quadrature_tol: 1e-11,
        }
    }
}

/// Zeros of `F₀(x) = Σ w/(λ - x)` on the real line with their masses
/// `1/F₀'(x)`; exactly one zero lies between consecutive atoms.
pub fn inverse_transform_atoms(mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let x = mu.positions();
    let f = |t: f64| mu.integrate(|l| 1.0 / (l - t));
    let df = |t: f64| mu.integrate(|l| 1.0 / ((l - t) * (l - t)));
    let mut atoms = Vec::new();
    for w in x.windows(2) {
        let gap = w[1] - w[0];
        let (lo, hi) = (w[0] + 1e-13 * gap, w[1] - 1e-13 * gap);
        let root = bracketed_root(f, lo, hi, 1e-15 * gap.max(1.0));
        atoms.push((root, 1.0 / df(root)));
    }
    DiscreteMeasure::new(atoms)
}

/// Rescaled measures `ρ_α = (1+α²) μ_α` on a window and two estimates of
/// their limit.
pub fn rescaled_measure_limit(
    fam: &RankOneFamily,
    alphas: &[f64],
    window: (f64, f64),
    opts: &RescaledOptions,
) -> Result<RescaledMeasureReport> {
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(WeylError::config("test window must be a bounded interval"));
    }
    if alphas.is_empty() || alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(WeylError::config("coupling schedule must be positive and finite"));
    }
    let tests = BumpFamily {
        lo,
        hi,
        count: opts.test_count,
    };
    let mut steps = Vec::with_capacity(alphas.len());
    let mut escape_in_window = false;
    let amax = alphas.iter().cloned().fold(0.0, f64::max);
    for &alpha in alphas {
        let mu = fam.spectral_measure(alpha)?;
        let window_mu = mu.restrict(lo, hi);
        let rho = window_mu.scaled(1.0 + alpha * alpha);
        let test_integrals = tests.integrate(&rho);
        if alpha == amax {
            let vals = mu.positions();
            let escaping = vals
                .iter()
                .cloned()
                .min_by(|a, b| (a - alpha).abs().total_cmp(&(b - alpha).abs()))
                .unwrap_or(f64::NAN);
            escape_in_window = escaping >= lo && escaping <= hi;
        }
        steps.push(RescaledStep {
            alpha,
            plain_window_mass: window_mu.total_mass(),
            rho,
            test_integrals,
        });
    }

    // (i) extrapolate in h = 1/α using the largest couplings.
    let mut sorted: Vec<&RescaledStep> = steps.iter().collect();
    sorted.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let hs: Vec<f64> = sorted.iter().map(|s| 1.0 / s.alpha).collect();
    let order = (sorted.len() - 1).min(2);
    let weak_limit: Vec<f64> = (0..tests.count)
        .map(|j| {
            let fs: Vec<f64> = sorted.iter().map(|s| s.test_integrals[j]).collect();
            extrapolate_to_zero_real(&hs, &fs, order)
        })
        .collect();

    // (ii) boundary values of -1/F₀.
    let mu0 = fam.spectral_measure(0.0)?;
    let eps = &opts.epsilon_schedule;
    let boundary_limit: Vec<f64> = (0..tests.count)
        .map(|j| {
            let vals: Vec<f64> = eps
                .iter()
                .map(|&e| {
                    integrate_adaptive(
                        |x| {
                            let f0 = stieltjes(&mu0, Complex64::new(x, e)).unwrap();
                            tests.eval(j, x) * (-1.0 / f0).im / std::f64::consts::PI
                        },
                        lo,
                        hi,
                        opts.quadrature_tol,
                    )
                })
                .collect();
            extrapolate_to_zero_real(eps, &vals, eps.len() - 1)
        })
        .collect();

    let rho_infinity = inverse_transform_atoms(&mu0)?.restrict(lo, hi);
    let exact_limit = tests.integrate(&rho_infinity);
    let agreement = weak_limit
        .iter()
        .zip(&boundary_limit)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(RescaledMeasureReport {
        window,
        tests,
        steps,
        rho_infinity,
        weak_limit,
        boundary_limit,
        exact_limit,
        agreement,
        escape_in_window,
    })
}

/// Read a whitespace-separated dense matrix, one row per line.
pub fn parse_matrix(text: &str, origin: &str) -> Result<DMatrix<f64>> {
    let rows = parse_rows(text, origin)?;
    let n = rows.len();
    if n == 0 {
        return Err(WeylError::Parse {
            path: origin.into(),
            line: 0,
            msg: "empty matrix".into(),
        });
    }
    for (line, row) in &rows {
        if row.len() != n {
            return Err(WeylError::Parse {
                path: origin.into(),
                line: *line,
                msg: format!("expected {n} columns, found {}", row.len()),
            });
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i].1[j]))
}

/// Read a vector given as whitespace-separated numbers (any line layout).
pub fn parse_vector(text: &str, origin: &str) -> Result<DVector<f64>> {
    let values: Vec<f64> = parse_rows(text, origin)?
        .into_iter()
        .flat_map(|(_, r)| r)
        .collect();
    if values.is_empty() {
        return Err(WeylError::Parse {
            path: origin.into(),
            line: 0,
            msg: "empty vector".into(),
        });
    }
    Ok(DVector::from_vec(values))
}

fn parse_rows(text: &str, origin: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|_| WeylError::Parse {
                    path: origin.into(),
                    line: lineno + 1,
                    msg: format!("bad number `{s}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((lineno + 1, row));
    }
    Ok(rows)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| WeylError::Io {
        path: path.display().to_string(),
        source,
    })
}
