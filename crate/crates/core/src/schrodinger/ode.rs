//! Adaptive Dormand-Prince 5(4) integration of small real systems.

use crate::error::{Result, WeylError};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed step, as a length.
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            max_step: f64::INFINITY,
        }
    }
}

/// Outcome of [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Endpoint<const N: usize> {
    pub x: f64,
    pub y: [f64; N],
    /// The `stop` predicate fired before reaching the target.
    pub stopped: bool,
    pub steps: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(x, y)` from `x0` to `x1` (either direction).
///
/// After each accepted step `stop(y)` is consulted; if it returns true the
/// integration ends early and the endpoint is flagged.
pub fn integrate<const N: usize, F, S>(
    mut f: F,
    x0: f64,
    y0: [f64; N],
    x1: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Result<Endpoint<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(&[f64; N]) -> bool,
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(Endpoint {
            x: x0,
            y: y0,
            stopped: false,
            steps: 0,
        });
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = (span.abs() / 8.0).min(opts.max_step).max(1e-6 * span.abs());
    let mut k = [[0.0; N]; 7];
    k[0] = f(x, &y);
    let mut steps = 0usize;
    let hmin = 1e-14 * x0.abs().max(x1.abs()).max(span.abs());
    loop {
        let remaining = (x1 - x) * dir;
        if remaining <= 0.0 {
            break;
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let hs = step * dir;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += hs * a * kj[i];
                    }
                }
            }
            k[s] = f(x + C[s] * hs, &ys);
        }
        let mut ynew = y;
        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut inc = 0.0;
            let mut e = 0.0;
            for s in 0..7 {
                inc += B[s] * k[s][i];
                e += E[s] * k[s][i];
            }
            ynew[i] = y[i] + hs * inc;
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((hs * e).abs() / sc);
        }
        if !err.is_finite() {
            h = step * 0.2;
            if h < hmin {
                return Err(WeylError::Integration {
                    x,
                    msg: "non-finite state; step size underflow".into(),
                });
            }
            continue;
        }
        if err <= 1.0 {
            x = if last { x1 } else { x + hs };
            y = ynew;
            k[0] = k[6];
            steps += 1;
            if stop(&y) && x != x1 {
                return Ok(Endpoint {
                    x,
                    y,
                    stopped: true,
                    steps,
                });
            }
            if last {
                break;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (step * fac).min(opts.max_step);
        } else {
            h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < hmin {
                return Err(WeylError::Integration {
                    x,
                    msg: format!("step size underflow (h = {h:e})"),
                });
            }
        }
        if steps > 5_000_000 {
            return Err(WeylError::Integration {
                x,
                msg: "step budget exhausted".into(),
            });
        }
    }
    Ok(Endpoint {
        x: x1,
        y,
        stopped: false,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_forward_and_backward() {
        let opts = OdeOptions::default();
        let fw = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 2.0, &opts, |_| false).unwrap();
        assert!((fw.y[0] - 2f64.exp()).abs() < 1e-11);
        let bw = integrate(|_, y: &[f64; 1]| [y[0]], 2.0, [1.0], 0.0, &opts, |_| false).unwrap();
        assert!((bw.y[0] - (-2f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn oscillator_conserves_phase() {
        let opts = OdeOptions::default();
        let end = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            &opts,
            |_| false,
        )
        .unwrap();
        assert!((end.y[0] - 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn stop_predicate_ends_early() {
        let opts = OdeOptions::default();
        let end = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 0.99, &opts, |y| y[0] > 10.0)
            .unwrap();
        assert!(end.stopped && end.x < 0.99 && end.y[0] > 10.0);
    }
}
