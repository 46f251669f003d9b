use std::f64::consts::PI;

use serde::Serialize;

use super::ode::{integrate, OdeOptions};
use super::potential::Potential;
use super::BoundaryCondition;
use crate::error::{Result, WeylError};
use crate::numerics::bracketed_root;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenOptions {
    /// Absolute tolerance on each eigenvalue.
    pub tol: f64,
    /// Give up bracketing above this value.
    pub ceiling: f64,
    pub ode: OdeOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-10,
            ceiling: 1e8,
            ode: OdeOptions {
                rtol: 1e-13,
                atol: 1e-13,
                max_step: f64::INFINITY,
            },
        }
    }
}

/// Scaled Prüfer problem on `[c, d]`: `tan φ = S u / u'`,
/// `φ' = S cos²φ + ((λ - V)/S) sin²φ`.
struct Prufer<'a> {
    pot: &'a Potential,
    c: f64,
    d: f64,
    left: BoundaryCondition,
    right: BoundaryCondition,
    vmean: f64,
    ode: OdeOptions,
}

impl Prufer<'_> {
    fn scale(&self, lambda: f64) -> f64 {
        (lambda - self.vmean).max(1.0).sqrt()
    }

    /// Angle in `[0, π)` of the boundary data `(S u, u')`.
    fn bc_angle(bc: BoundaryCondition, s: f64) -> f64 {
        let (u, du) = bc.initial_data();
        (s * u).atan2(du).rem_euclid(PI)
    }

    /// `φ(d; λ)` and the target angle `β ∈ (0, π]` at the right end.
    fn shoot(&self, lambda: f64) -> Result<(f64, f64)> {
        let s = self.scale(lambda);
        let mut phi = Self::bc_angle(self.left, s);
        let mut x = self.c;
        for end in self.pot.segment_points(self.c, self.d) {
            let r = integrate(
                |t, y: &[f64; 1]| {
                    let (sn, cs) = y[0].sin_cos();
                    [s * cs * cs + (lambda - self.pot.eval(t)) / s * sn * sn]
                },
                x,
                [phi],
                end,
                &self.ode,
                |_| false,
            )?;
            phi = r.y[0];
            x = end;
        }
        let mut beta = Self::bc_angle(self.right, s);
        if beta <= 0.0 {
            beta = PI;
        }
        Ok((phi, beta))
    }

    /// Number of eigenvalues strictly below `λ`.
    fn count(&self, lambda: f64) -> Result<usize> {
        let (phi, beta) = self.shoot(lambda)?;
        let k = ((phi - beta) / PI).ceil();
        Ok(if k > 0.0 { k as usize } else { 0 })
    }

    fn mismatch(&self, lambda: f64, k: usize) -> Result<f64> {
        let (phi, beta) = self.shoot(lambda)?;
        Ok(phi - beta - k as f64 * PI)
    }
}

fn setup<'a>(
    pot: &'a Potential,
    interval: (f64, f64),
    left: BoundaryCondition,
    right: BoundaryCondition,
    ode: OdeOptions,
) -> Result<Prufer<'a>> {
    let (c, d) = interval;
    if !(d > c) || !c.is_finite() || !d.is_finite() {
        return Err(WeylError::domain(format!("invalid interval [{c}, {d}]")));
    }
    let n = 64;
    let vmean = (0..=n)
        .map(|k| pot.eval(c + (d - c) * k as f64 / n as f64))
        .sum::<f64>()
        / (n + 1) as f64;
    Ok(Prufer {
        pot,
        c,
        d,
        left,
        right,
        vmean,
        ode,
    })
}

/// Number of eigenvalues of the interval problem strictly below `lambda`,
/// from the winding of the Prüfer angle.
pub fn eigenvalue_count(
    pot: &Potential,
    interval: (f64, f64),
    left: BoundaryCondition,
    right: BoundaryCondition,
    lambda: f64,
    opts: &EigenOptions,
) -> Result<usize> {
    setup(pot, interval, left, right, opts.ode)?.count(lambda)
}

/// Lowest `count` eigenvalues of `-u'' + V u` on `[c, d]` with the given
/// boundary conditions.
pub fn interval_eigenvalues(
    pot: &Potential,
    interval: (f64, f64),
    left: BoundaryCondition,
    right: BoundaryCondition,
    count: usize,
    opts: &EigenOptions,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(WeylError::config("eigenvalue count must be at least 1"));
    }
    let pr = setup(pot, interval, left, right, opts.ode)?;
    let (c, d) = interval;
    let n = 256;
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=n {
        let v = pot.eval(c + (d - c) * k as f64 / n as f64);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }

    // Lower bracket: no eigenvalue below.
    let mut lo = vmin - 1.0;
    let mut guard = 0;
    while pr.count(lo)? > 0 {
        lo -= 2.0 * lo.abs() + 1.0;
        guard += 1;
        if guard > 80 {
            return Err(WeylError::Conditioning(
                "could not find a lower bound for the spectrum".into(),
            ));
        }
    }
    // Upper bracket: at least `count` eigenvalues below.
    let len = d - c;
    let mut hi = (vmax.max(0.0) + ((count as f64 + 1.0) * PI / len).powi(2) + 1.0).min(opts.ceiling);
    loop {
        if pr.count(hi)? >= count {
            break;
        }
        if hi >= opts.ceiling {
            let found = collect(&pr, lo, opts.ceiling, pr.count(opts.ceiling)?, opts.tol)?;
            return Err(WeylError::IncompleteEigenvalues {
                found,
                requested: count,
                ceiling: opts.ceiling,
            });
        }
        hi = (2.0 * hi + 1.0).min(opts.ceiling);
    }
    collect(&pr, lo, hi, count, opts.tol)
}

/// Eigenvalues `0..count` known to lie in `(lo, hi)`.
fn collect(pr: &Prufer, lo: f64, hi: f64, count: usize, tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut left = lo;
    let mut left_count = pr.count(lo)?;
    let hi_count = pr.count(hi)?;
    for k in 0..count {
        // Isolate eigenvalue k: count(a) == k and count(b) == k + 1.
        let (mut a, mut b) = (left, hi);
        let (mut ca, mut cb) = (left_count, hi_count);
        debug_assert!(ca <= k && cb > k);
        while !(ca == k && cb == k + 1) && b - a >= tol {
            let mid = 0.5 * (a + b);
            let cm = pr.count(mid)?;
            if cm <= k {
                a = mid;
                ca = cm;
            } else {
                b = mid;
                cb = cm;
            }
        }
        let lam = if b - a < tol {
            0.5 * (a + b)
        } else {
            let mut failure = None;
            let root = bracketed_root(
                |l| match pr.mismatch(l, k) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                a,
                b,
                tol,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            root
        };
        out.push(lam);
        left = a;
        left_count = ca;
    }
    Ok(out)
}
