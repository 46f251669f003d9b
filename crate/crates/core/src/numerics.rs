//! Small numerical kernels shared across modules: extrapolation, root
//! bracketing, least squares, quadrature and compensated arithmetic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Polynomial (Neville) extrapolation of `f(h)` to `h = 0` from the last
/// `order + 1` samples.
///
/// `hs` and `fs` must have equal length; the samples closest to zero should
/// be at the end.
pub fn extrapolate_to_zero(hs: &[f64], fs: &[Complex64], order: usize) -> Complex64 {
    assert_eq!(hs.len(), fs.len());
    assert!(!hs.is_empty());
    let k = (order + 1).min(hs.len());
    let xs = &hs[hs.len() - k..];
    let mut p: Vec<Complex64> = fs[fs.len() - k..].to_vec();
    for m in 1..k {
        for i in 0..k - m {
            let (xi, xj) = (xs[i], xs[i + m]);
            p[i] = (p[i + 1] * xi - p[i] * xj) / (xi - xj);
        }
    }
    p[0]
}

/// Real-valued convenience wrapper around [`extrapolate_to_zero`].
pub fn extrapolate_to_zero_real(hs: &[f64], fs: &[f64], order: usize) -> f64 {
    let c: Vec<Complex64> = fs.iter().map(|&f| Complex64::new(f, 0.0)).collect();
    extrapolate_to_zero(hs, &c, order).re
}

/// Linear least squares `min ||X c - y||` via SVD. Columns of `design` are the
/// basis functions evaluated at the samples.
pub fn least_squares(design: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = design.clone().svd(true, true);
    svd.solve(y, 1e-14).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares line through `(x, y)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

/// Root of `f` in `[a, b]` where `f(a)` and `f(b)` have opposite signs.
///
/// Bisection down to a relative width of `1e-6`, then Illinois (modified
/// regula falsi) to `xtol`. The bracket is kept throughout.
pub fn bracketed_root<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa * fb < 0.0, "root not bracketed: f({a})={fa}, f({b})={fb}");
    let coarse = 1e-6 * (a.abs() + b.abs()).max(1.0);
    let mut iters = 0;
    while (b - a).abs() > coarse.max(xtol) && iters < 200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        iters += 1;
    }
    // Illinois polish.
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c <= a.min(b) || c >= a.max(b) {
            0.5 * (a + b)
        } else {
            c
        };
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < xtol {
            break;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Golden-section search for the maximiser of a unimodal function on `[a, b]`.
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels.
pub fn integrate_gl<F>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = NeumaierSum::default();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc.add(0.5 * h * wi * f(mid + 0.5 * h * xi));
        }
    }
    acc.value()
}

/// Adaptive Gauss-Legendre quadrature: a panel is accepted when the 10-point
/// rule on it agrees with the sum over its two halves to within `tol`
/// scaled by the panel's share of the interval.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let (x, w) = gauss_legendre(10);
    let rule = |lo: f64, hi: f64| -> f64 {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        x.iter()
            .zip(&w)
            .map(|(xi, wi)| half * wi * f(mid + half * xi))
            .sum()
    };
    let width = (b - a).abs().max(f64::MIN_POSITIVE);
    let mut acc = NeumaierSum::default();
    let mut stack = vec![(a, b, rule(a, b), 0u32)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (left, right) = (rule(lo, mid), rule(mid, hi));
        let share = ((hi - lo).abs() / width).max(1e-3);
        if (left + right - whole).abs() <= tol * share || depth >= 48 {
            acc.add(left + right);
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    acc.value()
}

/// Compensated summation (Neumaier's variant of Kahan).
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Double-double number: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
///
/// Used by the moment-based continued-fraction route, where the Hankel
/// structure amplifies rounding far beyond double precision.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::ZERO;
        }
        let x = self.hi.sqrt();
        // One Newton step in double-double.
        let xx = DoubleDouble::from_f64(x);
        let r = self - xx * xx;
        xx + DoubleDouble::from_f64(r.hi / (2.0 * x))
    }
}

impl std::ops::Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl std::ops::Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl std::ops::Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

impl std::ops::Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * DoubleDouble::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * DoubleDouble::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo } + DoubleDouble::from_f64(q3)
    }
}

/// Geometric schedule `start * ratio^k`, `k = 0..count`.
pub fn geometric(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo; count];
    }
    let (l, h) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..count)
        .map(|k| (l + (h - l) * k as f64 / (count - 1) as f64).exp())
        .collect();
    // exp(ln x) need not round-trip; keep the end points exact.
    v[0] = lo;
    v[count - 1] = hi;
    v
}

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neville_is_exact_on_quadratics() {
        let hs = [0.4, 0.2, 0.1];
        let fs: Vec<f64> = hs.iter().map(|h| 3.0 - 2.0 * h + 5.0 * h * h).collect();
        let v = extrapolate_to_zero_real(&hs, &fs, 2);
        assert!((v - 3.0).abs() < 1e-13);
    }

    #[test]
    fn illinois_finds_cubic_root() {
        let r = bracketed_root(|x| x * x * x - 2.0, 0.0, 3.0, 1e-14);
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn double_double_recovers_cancelled_digits() {
        let a = DoubleDouble::from_f64(1.0) + DoubleDouble::from_f64(1e-20);
        let b = a - DoubleDouble::from_f64(1.0);
        assert!((b.to_f64() - 1e-20).abs() < 1e-35);
        let third = DoubleDouble::from_f64(1.0) / DoubleDouble::from_f64(3.0);
        let back = third * DoubleDouble::from_f64(3.0) - DoubleDouble::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-30);
        let r = DoubleDouble::from_f64(2.0).sqrt();
        assert!((r * r - DoubleDouble::from_f64(2.0)).to_f64().abs() < 1e-30);
    }

    #[test]
    fn adaptive_quadrature_resolves_narrow_peak() {
        let eps = 1e-4;
        let v = integrate_adaptive(|x| eps / std::f64::consts::PI / (x * x + eps * eps), -1.0, 1.0, 1e-12);
        let exact = 2.0 / std::f64::consts::PI * (1.0 / eps).atan();
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 1.0, -1.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx - 1.0).abs() < 1e-15);
    }
}
