//! Finite Jacobi operators: spectral measures, m-functions, Weyl solutions and
//! recovery of the Jacobi parameters from a spectral measure.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WeylError};
use crate::herglotz::{stieltjes, DiscreteMeasure};
use crate::linalg::{tridiag_eigen, tridiag_shifted_solve};
use crate::numerics::DoubleDouble;

/// Depth limit of the moment-based continued-fraction route.
pub const CONTINUED_FRACTION_MAX_DEPTH: usize = 12;

/// Symmetric tridiagonal matrix with diagonal `b₁..b_N` and positive
/// off-diagonal `a₁..a_{N-1}`.
///
/// `a0` only enters the Weyl-solution normalisation `m = -u₁/(a₀u₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiOperator {
    b: Vec<f64>,
    a: Vec<f64>,
    a0: f64,
}

impl JacobiOperator {
    pub fn new(b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(WeylError::domain("Jacobi operator needs N >= 1"));
        }
        if a.len() + 1 != b.len() {
            return Err(WeylError::domain(format!(
                "expected {} off-diagonal entries, got {}",
                b.len() - 1,
                a.len()
            )));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(WeylError::domain("diagonal entries must be finite"));
        }
        if let Some(x) = a.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
            return Err(WeylError::domain(format!(
                "off-diagonal entries must be positive, found {x}"
            )));
        }
        Ok(JacobiOperator { b, a, a0: 1.0 })
    }

    pub fn with_a0(mut self, a0: f64) -> Result<Self> {
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(WeylError::domain("a0 must be positive"));
        }
        self.a0 = a0;
        Ok(self)
    }

    /// The free operator `b = 0, a = 1` of size `n`.
    pub fn free(n: usize) -> Result<Self> {
        JacobiOperator::new(vec![0.0; n], vec![1.0; n.saturating_sub(1)])
    }

    /// Random operator with `b ∈ [-1, 1]` and `a ∈ [0.5, 1.5]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = (0..n.saturating_sub(1))
            .map(|_| rng.gen_range(0.5..1.5))
            .collect();
        JacobiOperator { b, a, a0: 1.0 }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Remove the first `n` rows and columns.
    pub fn stripped(&self, n: usize) -> Result<Self> {
        if n >= self.len() {
            return Err(WeylError::domain(format!(
                "cannot strip {n} rows from an operator of size {}",
                self.len()
            )));
        }
        Ok(JacobiOperator {
            b: self.b[n..].to_vec(),
            a: self.a[n..].to_vec(),
            a0: if n == 0 { self.a0 } else { self.a[n - 1] },
        })
    }

    /// Keep the first `n` rows and columns.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(WeylError::domain(format!("invalid truncation size {n}")));
        }
        Ok(JacobiOperator {
            b: self.b[..n].to_vec(),
            a: self.a[..n - 1].to_vec(),
            a0: self.a0,
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        crate::linalg::tridiag_eigenvalues(&self.b, &self.a)
    }

    /// `⟨δ₁, (J - z)⁻¹ δ₁⟩` from a direct tridiagonal solve.
    pub fn resolvent_element(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            return Err(WeylError::domain("resolvent needs Im z != 0"));
        }
        let mut rhs = vec![Complex64::new(0.0, 0.0); self.len()];
        rhs[0] = Complex64::new(1.0, 0.0);
        Ok(tridiag_shifted_solve(&self.b, &self.a, z, &rhs)[0])
    }

    /// Evaluate the finite continued fraction
    /// `1/(b₁ - z - a₁²/(b₂ - z - …))` from the bottom up.
    pub fn continued_fraction(&self, z: Complex64) -> Complex64 {
        let n = self.len();
        let mut m = 1.0 / (self.b[n - 1] - z);
        for k in (0..n - 1).rev() {
            m = 1.0 / (self.b[k] - z - self.a[k] * self.a[k] * m);
        }
        m
    }

    /// Parse rows of `b a`; the final row may omit `a` (it is ignored if
    /// present).
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut rows: Vec<(usize, f64, Option<f64>)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| WeylError::Parse {
                path: origin.to_string(),
                line: lineno + 1,
                msg,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() || fields.len() > 2 {
                return Err(err(format!("expected `b a`, found {} fields", fields.len())));
            }
            let b: f64 = fields[0]
                .parse()
                .map_err(|_| err(format!("bad diagonal entry `{}`", fields[0])))?;
            let a = match fields.get(1) {
                Some(s) => Some(
                    s.parse::<f64>()
                        .map_err(|_| err(format!("bad off-diagonal entry `{s}`")))?,
                ),
                None => None,
            };
            rows.push((lineno + 1, b, a));
        }
        if rows.is_empty() {
            return Err(WeylError::Parse {
                path: origin.to_string(),
                line: 0,
                msg: "no rows".into(),
            });
        }
        let n = rows.len();
        let mut a = Vec::with_capacity(n - 1);
        for &(line, _, ak) in &rows[..n - 1] {
            match ak {
                Some(v) if v > 0.0 => a.push(v),
                _ => {
                    return Err(WeylError::Parse {
                        path: origin.to_string(),
                        line,
                        msg: "missing or non-positive off-diagonal entry".into(),
                    })
                }
            }
        }
        JacobiOperator::new(rows.iter().map(|r| r.1).collect(), a)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| WeylError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# b a\n");
        for (k, b) in self.b.iter().enumerate() {
            match self.a.get(k) {
                Some(a) => out.push_str(&format!("{b:.17e} {a:.17e}\n")),
                None => out.push_str(&format!("{b:.17e}\n")),
            }
        }
        out
    }
}

/// Spectral measure of `δ₁`: atoms at the eigenvalues, weights equal to the
/// squared first components of the normalised eigenvectors.
pub fn spectral_measure(j: &JacobiOperator) -> Result<DiscreteMeasure> {
    let eig = tridiag_eigen(&j.b, &j.a, &[0])?;
    let atoms: Vec<(f64, f64)> = eig
        .values
        .iter()
        .zip(&eig.rows[0])
        .map(|(&x, &v)| (x, v * v))
        .collect();
    // Positive off-diagonals make δ₁ cyclic and the spectrum simple.
    debug_assert!(eig.values.windows(2).all(|w| w[1] > w[0]));
    DiscreteMeasure::new(atoms.into_iter().filter(|&(_, w)| w > 0.0))
}

/// `m_n(z)`: Stieltjes transform of the spectral measure of the operator with
/// the first `strip` rows and columns removed.
pub fn m_function(j: &JacobiOperator, z: Complex64, strip: usize) -> Result<Complex64> {
    let js = j.stripped(strip)?;
    stieltjes(&spectral_measure(&js)?, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrippingRoute {
    /// J-fraction expansion of the moment series, in double-double arithmetic.
    ContinuedFraction,
    /// Three-term recurrence of the orthonormal polynomials (Stieltjes
    /// procedure / Lanczos on the multiplication operator).
    OpRecursion,
}

/// Recover `b₁..b_depth, a₁..a_{depth-1}` from a spectral measure. The
/// measure is normalised to unit mass first.
pub fn coefficient_stripping(
    measure: &DiscreteMeasure,
    route: StrippingRoute,
    depth: usize,
) -> Result<JacobiOperator> {
    if depth == 0 {
        return Err(WeylError::domain("depth must be at least 1"));
    }
    if depth > measure.len() {
        return Err(WeylError::RankDeficient {
            depth,
            atoms: measure.len(),
        });
    }
    let (b, a) = match route {
        StrippingRoute::OpRecursion => stieltjes_procedure(measure, depth),
        StrippingRoute::ContinuedFraction => {
            if depth > CONTINUED_FRACTION_MAX_DEPTH {
                return Err(WeylError::config(format!(
                    "continued-fraction route is limited to depth {CONTINUED_FRACTION_MAX_DEPTH}"
                )));
            }
            moment_continued_fraction(measure, depth)?
        }
    };
    JacobiOperator::new(b, a).map_err(|e| {
        WeylError::Conditioning(format!("recovered parameters are not a Jacobi operator: {e}"))
    })
}

/// Lanczos on `diag(λ)` started from `√w`, with full reorthogonalisation.
fn stieltjes_procedure(measure: &DiscreteMeasure, depth: usize) -> (Vec<f64>, Vec<f64>) {
    let x = measure.positions();
    let mass = measure.total_mass();
    let n = x.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(depth);
    let mut q: Vec<f64> = measure.weights().iter().map(|w| (w / mass).sqrt()).collect();
    normalize(&mut q);
    let mut b = Vec::with_capacity(depth);
    let mut a = Vec::with_capacity(depth.saturating_sub(1));
    for k in 0..depth {
        let mut v: Vec<f64> = (0..n).map(|i| x[i] * q[i]).collect();
        let bk = dot(&q, &v);
        b.push(bk);
        basis.push(q.clone());
        if k + 1 == depth {
            break;
        }
        for i in 0..n {
            v[i] -= bk * q[i];
        }
        if let Some(prev) = basis.len().checked_sub(2).map(|i| &basis[i]) {
            let ak = a[k - 1];
            for i in 0..n {
                v[i] -= ak * prev[i];
            }
        }
        for _ in 0..2 {
            for u in &basis {
                let c = dot(u, &v);
                for i in 0..n {
                    v[i] -= c * u[i];
                }
            }
        }
        let ak = dot(&v, &v).sqrt();
        a.push(ak);
        for vi in v.iter_mut() {
            *vi /= ak;
        }
        q = v;
    }
    (b, a)
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

/// Continued-fraction (J-fraction) expansion of `m(z) = -Σ μ_k z^{-k-1}`.
///
/// The recurrence coefficients follow from the ordinary moments by the
/// Chebyshev algorithm. Moments of an affinely rescaled copy of the measure
/// (centre 0, support in `[-1, 1]`) are used and every step runs in
/// double-double arithmetic; results are mapped back at the end.
fn moment_continued_fraction(
    measure: &DiscreteMeasure,
    depth: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mass = measure.total_mass();
    let x = measure.positions();
    let centre = measure.integrate(|t| t) / mass;
    let scale = x
        .iter()
        .map(|t| (t - centre).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let dd = DoubleDouble::from_f64;
    let nmom = 2 * depth;
    let mut moments = vec![DoubleDouble::ZERO; nmom];
    let (c_dd, s_dd, mass_dd) = (dd(centre), dd(scale), dd(mass));
    for (t, w) in measure.atoms() {
        let y = (dd(t) - c_dd) / s_dd;
        let w = dd(w) / mass_dd;
        let mut p = w;
        for m in moments.iter_mut() {
            *m = *m + p;
            p = p * y;
        }
    }

    // sigma[k][l] for l = k..nmom-k-1, stored densely.
    let mut alpha = vec![DoubleDouble::ZERO; depth];
    let mut beta = vec![DoubleDouble::ZERO; depth];
    let mut prev2 = vec![DoubleDouble::ZERO; nmom];
    let mut prev = moments.clone();
    alpha[0] = moments[1] / moments[0];
    beta[0] = moments[0];
    for k in 1..depth {
        let mut cur = vec![DoubleDouble::ZERO; nmom];
        for l in k..(nmom - k) {
            cur[l] = prev[l + 1] - alpha[k - 1] * prev[l] - beta[k - 1] * prev2[l];
        }
        if !(cur[k].hi > 0.0) {
            return Err(WeylError::Conditioning(format!(
                "moment recursion lost positivity at step {k}"
            )));
        }
        alpha[k] = cur[k + 1] / cur[k] - prev[k] / prev[k - 1];
        beta[k] = cur[k] / prev[k - 1];
        prev2 = prev;
        prev = cur;
    }
    let b = alpha.iter().map(|v| centre + scale * v.to_f64()).collect();
    let a = beta[1..]
        .iter()
        .map(|v| scale * v.sqrt().to_f64())
        .collect();
    Ok((b, a))
}

/// Decaying solution of `a_n u_{n+1} + (b_n - z) u_n + a_{n-1} u_{n-1} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylSequence {
    /// `u₀, u₁, …`; entries past `n_core` continue into the free tail.
    pub u: Vec<Complex64>,
    pub z: Complex64,
    /// Number of sites `N` carrying the operator's own parameters.
    pub n_core: usize,
    /// Largest relative recurrence residual over the returned indices.
    pub residual: f64,
}

impl WeylSequence {
    /// `m(z) = -u₁ / (a₀ u₀)`.
    pub fn m0(&self, a0: f64) -> Complex64 {
        -self.u[1] / (a0 * self.u[0])
    }

    /// `m₁(z) = -u₂ / (a₁ u₁)`.
    pub fn m1(&self, a1: f64) -> Complex64 {
        -self.u[2] / (a1 * self.u[1])
    }
}

/// Root of `w² - z w + 1 = 0` inside the unit disk.
pub fn free_decay_factor(z: Complex64) -> Complex64 {
    let s = (z * z - 4.0).sqrt();
    let w1 = (z - s) / 2.0;
    let w2 = (z + s) / 2.0;
    if w1.norm() <= w2.norm() {
        w1
    } else {
        w2
    }
}

/// Weyl solution of `J` continued by the free operator (`b = 0, a = 1`,
/// including the coupling `a_N = 1`) beyond site `N`, normalised to `u₀ = 1`.
///
/// On the tail the solution is exactly `u_{N+k} = wᵏ u_N`; it is appended
/// until `|w|^{2k} < 1e-14`.
pub fn weyl_solution(j: &JacobiOperator, z: Complex64) -> Result<WeylSequence> {
    if !(z.im > 0.0) {
        return Err(WeylError::domain(format!("Weyl solution needs Im z > 0, got {z}")));
    }
    let n = j.len();
    let w = free_decay_factor(z);
    let coupling = |k: usize| -> f64 {
        // a_k for k = 0..=N (a_N = 1 joins the free tail).
        match k {
            0 => j.a0,
            k if k < n => j.a[k - 1],
            _ => 1.0,
        }
    };
    let diag = |k: usize| -> f64 {
        if k >= 1 && k <= n {
            j.b[k - 1]
        } else {
            0.0
        }
    };
    // u[k] for k = 0..=N+1, filled backwards from u_N = 1, u_{N+1} = w.
    let mut u = vec![Complex64::new(0.0, 0.0); n + 2];
    u[n] = Complex64::new(1.0, 0.0);
    u[n + 1] = w;
    for k in (1..=n).rev() {
        u[k - 1] = -(coupling(k) * u[k + 1] + (diag(k) - z) * u[k]) / coupling(k - 1);
        // Rescale to avoid overflow of the growing backward solution.
        let big = u[k - 1].norm();
        if big > 1e100 {
            for v in u[k - 1..].iter_mut() {
                *v /= big;
            }
        }
    }
    let tail = tail_length(w);
    let u0 = u[0];
    let mut seq: Vec<Complex64> = u.iter().map(|v| v / u0).collect();
    let mut last = seq[n + 1];
    for _ in 0..tail {
        last *= w;
        seq.push(last);
    }
    let mut residual: f64 = 0.0;
    for k in 1..seq.len() - 1 {
        let r = coupling(k) * seq[k + 1] + (diag(k) - z) * seq[k] + coupling(k - 1) * seq[k - 1];
        let scale = coupling(k) * seq[k + 1].norm()
            + (diag(k) - z).norm() * seq[k].norm()
            + coupling(k - 1) * seq[k - 1].norm();
        if scale > 0.0 {
            residual = residual.max(r.norm() / scale);
        }
    }
    Ok(WeylSequence {
        u: seq,
        z,
        n_core: n,
        residual,
    })
}

fn tail_length(w: Complex64) -> usize {
    let r = w.norm();
    if r < 1e-300 {
        return 1;
    }
    let t = (1e-14f64.ln() / (2.0 * r.ln())).ceil();
    (t.max(1.0) as usize).min(1_000_000)
}

/// Largest relative deviation between two operators' parameters.
pub fn max_relative_parameter_error(x: &JacobiOperator, y: &JacobiOperator) -> f64 {
    let rel = |p: f64, q: f64| (p - q).abs() / p.abs().max(q.abs()).max(1.0);
    let bs = x.b.iter().zip(&y.b).map(|(&p, &q)| rel(p, q));
    let as_ = x.a.iter().zip(&y.a).map(|(&p, &q)| rel(p, q));
    bs.chain(as_).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn small_spectral_measures() {
        let mu = spectral_measure(&JacobiOperator::new(vec![2.0], vec![]).unwrap()).unwrap();
        assert_eq!(mu.positions(), &[2.0]);
        assert!((mu.weights()[0] - 1.0).abs() < 1e-15);

        let mu = spectral_measure(&JacobiOperator::free(2).unwrap()).unwrap();
        assert!((mu.positions()[0] + 1.0).abs() < 1e-14);
        assert!((mu.weights()[0] - 0.5).abs() < 1e-14);

        let mu = spectral_measure(&JacobiOperator::free(3).unwrap()).unwrap();
        let r2 = 2f64.sqrt();
        let expected = [(-r2, 0.25), (0.0, 0.5), (r2, 0.25)];
        for ((x, w), (ex, ew)) in mu.atoms().zip(expected) {
            assert!((x - ex).abs() < 1e-14 && (w - ew).abs() < 1e-14);
        }
    }

    #[test]
    fn m_function_examples() {
        let j = JacobiOperator::new(vec![2.0], vec![]).unwrap();
        assert!((m_function(&j, c(0.0, 1.0), 0).unwrap() - c(0.4, 0.2)).norm() < 1e-15);

        let z = c(0.0, 2.0);
        let j2 = JacobiOperator::free(2).unwrap();
        let m = m_function(&j2, z, 0).unwrap();
        assert!((m - z / (1.0 - z * z)).norm() < 1e-14);
        assert!((j2.continued_fraction(z) - m).norm() < 1e-14);

        let free = JacobiOperator::free(200).unwrap();
        let m = m_function(&free, c(0.0, 1.0), 0).unwrap();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((m - c(0.0, golden)).norm() < 1e-10);
    }

    #[test]
    fn strip_bounds() {
        let j = JacobiOperator::free(3).unwrap();
        assert!(matches!(m_function(&j, c(0.0, 1.0), 3), Err(WeylError::Domain(_))));
    }

    #[test]
    fn stripping_small_measures() {
        let mu = DiscreteMeasure::new([(2.0, 1.0)]).unwrap();
        for route in [StrippingRoute::OpRecursion, StrippingRoute::ContinuedFraction] {
            let j = coefficient_stripping(&mu, route, 1).unwrap();
            assert!((j.b()[0] - 2.0).abs() < 1e-14);
        }
        let mu = DiscreteMeasure::new([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        for route in [StrippingRoute::OpRecursion, StrippingRoute::ContinuedFraction] {
            let j = coefficient_stripping(&mu, route, 2).unwrap();
            assert!(j.b()[0].abs() < 1e-14 && j.b()[1].abs() < 1e-14);
            assert!((j.a()[0] - 1.0).abs() < 1e-14);
        }
        assert!(matches!(
            coefficient_stripping(&mu, StrippingRoute::OpRecursion, 3),
            Err(WeylError::RankDeficient { depth: 3, atoms: 2 })
        ));
    }

    #[test]
    fn seeded_roundtrip_n8() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let j = JacobiOperator::random(&mut rng, 8);
        let mu = spectral_measure(&j).unwrap();
        let back = coefficient_stripping(&mu, StrippingRoute::OpRecursion, 8).unwrap();
        assert!(max_relative_parameter_error(&j, &back) < 1e-10);
        let cf = coefficient_stripping(&mu, StrippingRoute::ContinuedFraction, 8).unwrap();
        assert!(max_relative_parameter_error(&j, &cf) < 1e-6);
    }

    #[test]
    fn free_weyl_solution_is_geometric() {
        let z = c(0.0, 1.0);
        let j = JacobiOperator::free(10).unwrap();
        let ws = weyl_solution(&j, z).unwrap();
        let w = free_decay_factor(z);
        assert!((w - c(0.0, -(5f64.sqrt() - 1.0) / 2.0)).norm() < 1e-15);
        for (k, u) in ws.u.iter().take(30).enumerate() {
            assert!((u - w.powi(k as i32)).norm() < 1e-13);
        }
        let m0 = ws.m0(1.0);
        let m1 = ws.m1(1.0);
        assert!((m0 - c(0.0, 0.618_033_988_749_895)).norm() < 1e-12);
        assert!((m0 - m1).norm() < 1e-13);
        assert!(ws.residual < 1e-12);
        assert!(weyl_solution(&j, c(0.0, -1.0)).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let j = JacobiOperator::new(vec![0.1, -0.2, 0.3], vec![1.0, 0.5]).unwrap();
        let back = JacobiOperator::from_text(&j.to_text(), "mem").unwrap();
        assert_eq!(back, j);
        assert!(JacobiOperator::from_text("0 1\n0\n", "x").is_ok());
        assert!(JacobiOperator::from_text("0\n0\n", "x").is_err());
    }
}
