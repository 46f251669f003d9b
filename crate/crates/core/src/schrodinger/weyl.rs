use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ode::{integrate, OdeOptions};
use super::potential::{Potential, Tail};
use crate::error::{Result, WeylError};
use crate::herglotz::ProjectiveValue;

pub const BRANCH_CONVENTION: &str =
    "sqrt(z - c) with Im > 0 off [0, inf); tail decay rate s = sqrt(c - z) (principal), s = kappa at z = c - kappa^2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylMode {
    /// Integrate `u'' = (V - z) u` for the decaying solution.
    LinearOde,
    /// Integrate the Riccati equation `m' = V - z - m²`.
    Riccati,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylM {
    pub z: Complex64,
    pub x: f64,
    pub mode: WeylMode,
    /// `m(z, x) = u₊'/u₊`, or a pole when `u₊(x) = 0`.
    pub value: ProjectiveValue,
    /// Decay rate `s` of the tail (constant tails only).
    pub decay_rate: Option<Complex64>,
    /// `m + s`, carried without cancellation when available.
    pub shifted: Option<Complex64>,
}

/// `s = √(c - z)` with `Re s > 0`.
pub fn decay_rate(c: f64, z: Complex64) -> Result<Complex64> {
    let w = Complex64::new(c, 0.0) - z;
    if w.im == 0.0 && w.re <= 0.0 {
        return Err(WeylError::domain(format!(
            "z = {z} lies on the essential spectrum [{c}, inf) of the tail"
        )));
    }
    Ok(w.sqrt())
}

fn c2(v: Complex64) -> [f64; 2] {
    [v.re, v.im]
}

fn cx(a: f64, b: f64) -> Complex64 {
    Complex64::new(a, b)
}

/// Outcome of shifted-Riccati transport: either the shifted value survived
/// or the solution approached a pole and continued in the projective chart.
enum Transported {
    Shifted(Complex64),
    Plain(ProjectiveValue),
}

/// Transport `q = m + σ s` (σ = +1 for the right solution, -1 for the left)
/// from `from` to `to`, with `q' = (V - c) + 2σ s q - q²`.
fn transport_shifted(
    pot: &Potential,
    z: Complex64,
    c: f64,
    s: Complex64,
    sigma: f64,
    q0: Complex64,
    from: f64,
    to: f64,
    opts: &OdeOptions,
) -> Result<Transported> {
    let limit = 1e3 * (1.0 + s.norm());
    let mut x = from;
    let mut q = q0;
    for end in pot.segment_points(from, to) {
        let rhs = |t: f64, y: &[f64; 2]| {
            let q = cx(y[0], y[1]);
            c2((pot.eval(t) - c) + 2.0 * sigma * s * q - q * q)
        };
        let r = integrate(rhs, x, c2(q), end, opts, |y| cx(y[0], y[1]).norm() > limit)?;
        q = cx(r.y[0], r.y[1]);
        x = r.x;
        if r.stopped {
            let m = q - sigma * s;
            return Ok(Transported::Plain(transport_m(
                pot,
                z,
                ProjectiveValue::Finite(m),
                x,
                to,
                opts,
            )?));
        }
    }
    Ok(Transported::Shifted(q))
}

/// Transport `m = u'/u` of a solution of `-u'' + V u = z u` from `from` to
/// `to`, switching to the chart `w = -1/m` near poles.
pub fn transport_m(
    pot: &Potential,
    z: Complex64,
    start: ProjectiveValue,
    from: f64,
    to: f64,
    opts: &OdeOptions,
) -> Result<ProjectiveValue> {
    let scale = (z.norm() + pot.max_sample().abs().max(pot.min_sample().abs()))
        .sqrt()
        .max(1.0);
    // Chart: Some(m) in the m-chart, None with w stored separately.
    let (mut in_m, mut val) = match start {
        ProjectiveValue::Finite(m) if m.norm() <= 2.0 * scale => (true, m),
        ProjectiveValue::Finite(m) => (false, -1.0 / m),
        ProjectiveValue::Pole => (false, cx(0.0, 0.0)),
    };
    let mut x = from;
    for end in pot.segment_points(from, to) {
        while x != end {
            let r = if in_m {
                integrate(
                    |t, y: &[f64; 2]| {
                        let m = cx(y[0], y[1]);
                        c2(pot.eval(t) - z - m * m)
                    },
                    x,
                    c2(val),
                    end,
                    opts,
                    |y| cx(y[0], y[1]).norm() > 2.0 * scale,
                )?
            } else {
                integrate(
                    |t, y: &[f64; 2]| {
                        let w = cx(y[0], y[1]);
                        c2((pot.eval(t) - z) * w * w - 1.0)
                    },
                    x,
                    c2(val),
                    end,
                    opts,
                    |y| cx(y[0], y[1]).norm() > 2.0 / scale,
                )?
            };
            x = r.x;
            val = cx(r.y[0], r.y[1]);
            if r.stopped {
                val = -1.0 / val;
                in_m = !in_m;
            }
        }
    }
    if in_m {
        Ok(ProjectiveValue::Finite(val))
    } else if val.norm() <= 1e-300 {
        Ok(ProjectiveValue::Pole)
    } else {
        Ok(ProjectiveValue::Finite(-1.0 / val))
    }
}

/// Integrate `u'' = (V - z) u` from `from` to `to` with per-segment
/// renormalisation; returns `(u, u')` up to scale.
fn transport_linear(
    pot: &Potential,
    z: Complex64,
    u0: (Complex64, Complex64),
    from: f64,
    to: f64,
    opts: &OdeOptions,
) -> Result<(Complex64, Complex64)> {
    let (mut u, mut du) = u0;
    let mut x = from;
    for end in pot.segment_points(from, to) {
        let r = integrate(
            |t, y: &[f64; 4]| {
                let u = cx(y[0], y[1]);
                let d = (pot.eval(t) - z) * u;
                [y[2], y[3], d.re, d.im]
            },
            x,
            [u.re, u.im, du.re, du.im],
            end,
            opts,
            |_| false,
        )?;
        u = cx(r.y[0], r.y[1]);
        du = cx(r.y[2], r.y[3]);
        let n = u.norm().max(du.norm());
        if n > 0.0 {
            u /= n;
            du /= n;
        }
        x = end;
    }
    Ok((u, du))
}

/// Floquet data `(u, u')` at `x0` of the solution decaying towards `+∞`
/// (`right = true`) or `-∞`.
fn floquet_data(
    pot: &Potential,
    z: Complex64,
    right: bool,
    opts: &OdeOptions,
) -> Result<(Complex64, Complex64)> {
    let (x0, x1) = pot.domain();
    let one = cx(1.0, 0.0);
    let zero = cx(0.0, 0.0);
    let (a, c) = transport_linear_raw(pot, z, (one, zero), x0, x1, opts)?;
    let (b, d) = transport_linear_raw(pot, z, (zero, one), x0, x1, opts)?;
    let tr = a + d;
    let disc = (tr * tr - 4.0).sqrt();
    let r1 = (tr + disc) / 2.0;
    let r2 = (tr - disc) / 2.0;
    let (small, big) = if r1.norm() < r2.norm() { (r1, r2) } else { (r2, r1) };
    if (small.norm() - 1.0).abs() < 1e-10 {
        return Err(WeylError::domain(format!(
            "z = {z} lies in the spectrum of the periodic operator"
        )));
    }
    let rho = if right { small } else { big };
    // Eigenvector of [[a, b], [c, d]] for rho.
    let v1 = (b, rho - a);
    let v2 = (rho - d, c);
    if v1.0.norm() + v1.1.norm() >= v2.0.norm() + v2.1.norm() {
        Ok(v1)
    } else {
        Ok(v2)
    }
}

/// Linear transport without renormalisation (monodromy columns).
fn transport_linear_raw(
    pot: &Potential,
    z: Complex64,
    u0: (Complex64, Complex64),
    from: f64,
    to: f64,
    opts: &OdeOptions,
) -> Result<(Complex64, Complex64)> {
    let (mut u, mut du) = u0;
    let mut x = from;
    for end in pot.segment_points(from, to) {
        let r = integrate(
            |t, y: &[f64; 4]| {
                let u = cx(y[0], y[1]);
                let d = (pot.eval(t) - z) * u;
                [y[2], y[3], d.re, d.im]
            },
            x,
            [u.re, u.im, du.re, du.im],
            end,
            opts,
            |_| false,
        )?;
        u = cx(r.y[0], r.y[1]);
        du = cx(r.y[2], r.y[3]);
        x = end;
    }
    Ok((u, du))
}

fn ratio(u: Complex64, du: Complex64) -> ProjectiveValue {
    if u.norm() <= 1e-13 * du.norm() {
        ProjectiveValue::Pole
    } else {
        ProjectiveValue::Finite(du / u)
    }
}

/// Weyl m-function `m(z, x) = u₊'(x)/u₊(x)` for the solution decaying at
/// `+∞`.
pub fn weyl_m(
    pot: &Potential,
    z: Complex64,
    x: f64,
    mode: WeylMode,
    opts: &OdeOptions,
) -> Result<WeylM> {
    if !z.re.is_finite() || !z.im.is_finite() || !x.is_finite() {
        return Err(WeylError::domain("z and x must be finite"));
    }
    let (x0, x1) = pot.domain();
    match pot.tail() {
        Tail::Periodic { .. } => {
            if x < x0 || x > x1 {
                return Err(WeylError::domain(format!(
                    "x = {x} outside the sampled period [{x0}, {x1}]"
                )));
            }
            // By periodicity the Floquet data at x0 are also the data at x1.
            let (u, du) = floquet_data(pot, z, true, opts)?;
            let value = match mode {
                WeylMode::LinearOde => {
                    let (u, du) = transport_linear(pot, z, (u, du), x1, x, opts)?;
                    ratio(u, du)
                }
                WeylMode::Riccati => transport_m(pot, z, ratio(u, du), x1, x, opts)?,
            };
            Ok(WeylM {
                z,
                x,
                mode,
                value,
                decay_rate: None,
                shifted: None,
            })
        }
        Tail::CompactSupport | Tail::Constant { .. } => {
            let c = pot.tail_value().unwrap();
            let s = decay_rate(c, z)?;
            let start = x1.max(x);
            let (value, shifted) = match mode {
                WeylMode::LinearOde => {
                    let (u, du) = transport_linear(pot, z, (cx(1.0, 0.0), -s), start, x, opts)?;
                    let v = ratio(u, du);
                    (v, v.finite().map(|m| m + s))
                }
                WeylMode::Riccati => {
                    match transport_shifted(pot, z, c, s, 1.0, cx(0.0, 0.0), start, x, opts)? {
                        Transported::Shifted(q) => (ProjectiveValue::Finite(q - s), Some(q)),
                        Transported::Plain(v) => (v, v.finite().map(|m| m + s)),
                    }
                }
            };
            Ok(WeylM {
                z,
                x,
                mode,
                value,
                decay_rate: Some(s),
                shifted,
            })
        }
    }
}

/// `m(z, x) + s` for a constant-tail potential, computed in the shifted
/// Riccati variable so that it keeps full relative precision when `|s|` is
/// large.
pub fn weyl_q(pot: &Potential, z: Complex64, x: f64, opts: &OdeOptions) -> Result<Complex64> {
    let r = weyl_m(pot, z, x, WeylMode::Riccati, opts)?;
    r.shifted
        .ok_or_else(|| WeylError::domain("shifted m-function needs a constant tail and no pole"))
}

/// `m₋(z, x) = u₋'/u₋` for the solution decaying at `-∞`.
pub fn m_minus(pot: &Potential, z: Complex64, x: f64, opts: &OdeOptions) -> Result<ProjectiveValue> {
    let (x0, x1) = pot.domain();
    match pot.tail() {
        Tail::Periodic { .. } => {
            if x < x0 || x > x1 {
                return Err(WeylError::domain("x outside the sampled period"));
            }
            let (u, du) = floquet_data(pot, z, false, opts)?;
            transport_m(pot, z, ratio(u, du), x0, x, opts)
        }
        _ => {
            let c = pot.tail_value().unwrap();
            let s = decay_rate(c, z)?;
            let start = x0.min(x);
            match transport_shifted(pot, z, c, s, -1.0, cx(0.0, 0.0), start, x, opts)? {
                Transported::Shifted(q) => Ok(ProjectiveValue::Finite(q + s)),
                Transported::Plain(v) => Ok(v),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schrodinger::Interpolation;

    fn bump() -> Potential {
        Potential::from_fn(
            0.0,
            2.0,
            201,
            |x| (-(x - 1.0) * (x - 1.0) * 8.0).exp() * 3.0 - 1.0 + x / 2.0,
            Interpolation::Cubic,
            Tail::Constant { value: 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn free_and_constant_closed_forms() {
        let opts = OdeOptions::default();
        let free = Potential::constant(0.0, 0.0, 1.0);
        for mode in [WeylMode::LinearOde, WeylMode::Riccati] {
            let m = weyl_m(&free, cx(-4.0, 0.0), 0.0, mode, &opts).unwrap();
            assert!((m.value.finite().unwrap() - cx(-2.0, 0.0)).norm() < 1e-12);
        }
        let five = Potential::constant(5.0, 0.0, 1.0);
        let m = weyl_m(&five, cx(-4.0, 0.0), 0.0, WeylMode::Riccati, &opts).unwrap();
        assert!((m.value.finite().unwrap() + 3.0).norm() < 1e-13);
    }

    #[test]
    fn riccati_fixed_point_for_free_potential() {
        let free = Potential::constant(0.0, 0.0, 1.0);
        let opts = OdeOptions::default();
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            let m = weyl_m(&free, cx(-9.0, 0.0), x, WeylMode::Riccati, &opts).unwrap();
            assert!((m.value.finite().unwrap() + 3.0).norm() < 1e-10);
        }
    }

    #[test]
    fn modes_agree_and_m_is_herglotz() {
        let pot = bump();
        let opts = OdeOptions::default();
        for z in [cx(-3.0, 0.0), cx(0.5, 0.3), cx(4.0, 1.0), cx(-1.0, 2.0)] {
            let a = weyl_m(&pot, z, 0.3, WeylMode::LinearOde, &opts).unwrap();
            let b = weyl_m(&pot, z, 0.3, WeylMode::Riccati, &opts).unwrap();
            let (a, b) = (a.value.finite().unwrap(), b.value.finite().unwrap());
            assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()), "{a} vs {b}");
            if z.im > 0.0 {
                assert!(a.im > 0.0);
            }
        }
    }

    #[test]
    fn essential_spectrum_is_rejected() {
        let free = Potential::constant(0.0, 0.0, 1.0);
        assert!(weyl_m(&free, cx(1.0, 0.0), 0.0, WeylMode::Riccati, &OdeOptions::default()).is_err());
    }

    #[test]
    fn left_solution_of_free_potential() {
        let free = Potential::constant(0.0, 0.0, 1.0);
        let m = m_minus(&free, cx(-1.0, 0.0), 0.5, &OdeOptions::default()).unwrap();
        assert!((m.finite().unwrap() - cx(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn periodic_free_matches_closed_form() {
        let pot = Potential::from_fn(0.0, 1.0, 11, |_| 0.0, Interpolation::Linear, Tail::Periodic { period: 1.0 })
            .unwrap();
        let opts = OdeOptions::default();
        let z = cx(-4.0, 0.0);
        let m = weyl_m(&pot, z, 0.4, WeylMode::Riccati, &opts).unwrap();
        assert!((m.value.finite().unwrap() + 2.0).norm() < 1e-10);
        let ml = m_minus(&pot, z, 0.4, &opts).unwrap();
        assert!((ml.finite().unwrap() - 2.0).norm() < 1e-10);
    }

    #[test]
    fn riccati_crosses_poles_consistently() {
        // Real z above the bottom of the spectrum of the interval: u₊ has
        // zeros, so m has poles. A complex z close to the axis must still
        // agree between the two modes.
        let pot = bump();
        let opts = OdeOptions::default();
        let z = cx(30.0, 1e-3);
        let a = weyl_m(&pot, z, 0.0, WeylMode::LinearOde, &opts).unwrap();
        let b = weyl_m(&pot, z, 0.0, WeylMode::Riccati, &opts).unwrap();
        let (a, b) = (a.value.finite().unwrap(), b.value.finite().unwrap());
        assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()));
    }
}
