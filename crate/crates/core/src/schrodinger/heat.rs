use serde::Serialize;

use super::potential::Potential;
use crate::error::{Result, WeylError};
use crate::linalg::tridiag_eigenvalues;
use crate::numerics::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatRequest {
    /// Decoupling point.
    pub x: f64,
    pub t: f64,
    /// Box `[lo, hi]` with Dirichlet walls.
    pub box_lo: f64,
    pub box_hi: f64,
    /// Number of coarse grid cells across the box.
    pub grid_n: usize,
    /// The box must extend at least `5 √t · margin_factor` on either side.
    pub margin_factor: f64,
}

impl HeatRequest {
    /// Box of half-width `8 √t` around `x`, 400 coarse cells.
    pub fn around(x: f64, t: f64) -> Self {
        let half = 8.0 * t.sqrt();
        HeatRequest {
            x,
            t,
            box_lo: x - half,
            box_hi: x + half,
            grid_n: 400,
            margin_factor: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatDefect {
    /// Richardson-extrapolated `tr(e^{-tH} - e^{-tH_{D;x}})`.
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
    pub h: f64,
    /// Box after aligning the grid so that `x` is a node.
    pub box_used: (f64, f64),
    /// The box is narrower than the requested margin; the result may be
    /// dominated by the walls.
    pub truncation_warning: bool,
}

/// `tr(e^{-tH} - e^{-tH_D})` for the 3-point discretisation with spacing `h`
/// and `kl`, `kr` cells left and right of `x`.
fn discrete_defect(pot: &Potential, x: f64, t: f64, h: f64, kl: usize, kr: usize) -> Result<f64> {
    let inv = 1.0 / (h * h);
    // Interior nodes x + i h, i = -kl+1 ..= kr-1.
    let nodes: Vec<f64> = (-(kl as i64) + 1..=kr as i64 - 1)
        .map(|i| x + i as f64 * h)
        .collect();
    let diag: Vec<f64> = nodes.iter().map(|&p| 2.0 * inv + pot.eval(p)).collect();
    let off = vec![-inv; nodes.len() - 1];
    let cut = kl - 1;
    let full = tridiag_eigenvalues(&diag, &off)?;
    let left = tridiag_eigenvalues(&diag[..cut], &off[..cut.saturating_sub(1)])?;
    let right = tridiag_eigenvalues(&diag[cut + 1..], &off[cut + 1..])?;
    let mut acc = NeumaierSum::default();
    for l in full {
        acc.add((-t * l).exp());
    }
    for l in left.into_iter().chain(right) {
        acc.add(-(-t * l).exp());
    }
    Ok(acc.value())
}

/// Heat-trace defect of inserting a Dirichlet condition at `x`, from
/// finite-difference operators on spacings `h` and `h/2` combined by
/// Richardson extrapolation.
pub fn heat_trace_defect(pot: &Potential, req: &HeatRequest) -> Result<HeatDefect> {
    let HeatRequest {
        x,
        t,
        box_lo,
        box_hi,
        grid_n,
        margin_factor,
    } = *req;
    if !(t > 0.0) || !t.is_finite() {
        return Err(WeylError::domain("t must be positive"));
    }
    if !(box_lo < x && x < box_hi) {
        return Err(WeylError::domain("the box must contain x in its interior"));
    }
    if grid_n < 8 {
        return Err(WeylError::config("grid_n must be at least 8"));
    }
    let h0 = (box_hi - box_lo) / grid_n as f64;
    let kl = ((x - box_lo) / h0).round().max(2.0) as usize;
    let kr = ((box_hi - x) / h0).round().max(2.0) as usize;
    let h = h0;
    let box_used = (x - kl as f64 * h, x + kr as f64 * h);
    let margin = (x - box_used.0).min(box_used.1 - x);
    let truncation_warning = margin < 5.0 * t.sqrt() * margin_factor;
    let coarse = discrete_defect(pot, x, t, h, kl, kr)?;
    let fine = discrete_defect(pot, x, t, h / 2.0, 2 * kl, 2 * kr)?;
    Ok(HeatDefect {
        value: (4.0 * fine - coarse) / 3.0,
        coarse,
        fine,
        h,
        box_used,
        truncation_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schrodinger::{Interpolation, Tail};

    #[test]
    fn free_defect_is_one_half() {
        let pot = Potential::constant(0.0, -1.0, 1.0);
        for t in [0.01, 0.02] {
            let d = heat_trace_defect(&pot, &HeatRequest::around(0.0, t)).unwrap();
            assert!((d.value - 0.5).abs() < 1e-3, "t = {t}: {}", d.value);
            assert!(!d.truncation_warning);
        }
    }

    #[test]
    fn narrow_box_is_flagged() {
        let pot = Potential::constant(0.0, -1.0, 1.0);
        let req = HeatRequest {
            box_lo: -0.1,
            box_hi: 0.1,
            ..HeatRequest::around(0.0, 0.01)
        };
        assert!(heat_trace_defect(&pot, &req).unwrap().truncation_warning);
    }

    #[test]
    fn even_potential_gives_even_defect() {
        let pot = Potential::from_fn(-2.0, 2.0, 401, |x| x * x, Interpolation::Cubic, Tail::CompactSupport)
            .unwrap();
        let a = heat_trace_defect(&pot, &HeatRequest::around(0.7, 0.01)).unwrap();
        let b = heat_trace_defect(&pot, &HeatRequest::around(-0.7, 0.01)).unwrap();
        assert!((a.value - b.value).abs() < 1e-8);
    }
}
