//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weyllab::afunc::{
    a_forward, a_from_measure, a_inverse, a_slice_extrapolated, local_bm_check, representation_residual,
    BmOptions, BmVerdict, MarchOptions, SpectralInput,
};
use weyllab::herglotz::{boundary_values, BoundaryValueRequest, DiscreteMeasure};
use weyllab::jacobi::{coefficient_stripping, max_relative_parameter_error, spectral_measure, JacobiOperator, StrippingRoute};
use weyllab::numerics::{linspace, logspace};
use weyllab::rankone::{aronszajn_krein, infinite_coupling, RankOneFamily};
use weyllab::schrodinger::{
    atkinson_from_potential, green_diag, heat_trace_defect, interval_eigenvalues, periodic_band_data, BandOptions,
    BoundaryCondition, EigenOptions, Geometry, HeatRequest, Interpolation, OdeOptions, Potential, Tail,
};
use weyllab::xi::{
    abelian_trace_formula, krein_shift, periodic_trace_sum, xi_from_eigen_data, xi_from_green, ShiftMode,
    SpectralData, XiFunction,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let norm = v.norm();
    v / norm
}

fn jacobi_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut op, mut cf) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let j = JacobiOperator::random(&mut rng, n);
        let mu = spectral_measure(&j).unwrap();
        let rec = coefficient_stripping(&mu, StrippingRoute::OpRecursion, n).unwrap();
        op = op.max(max_relative_parameter_error(&j, &rec));
        if n <= 8 {
            let rec = coefficient_stripping(&mu, StrippingRoute::ContinuedFraction, n).unwrap();
            cf = cf.max(max_relative_parameter_error(&j, &rec));
        }
    }
    outcome(op < 1e-8 && cf < 1e-6, format!("100 operators: recurrence {op:.2e} (< 1e-8), continued fraction {cf:.2e} (< 1e-6)"))
}

fn aronszajn_krein_residuals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut id, mut res) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let a = random_symmetric(&mut rng, 10);
        let phi = random_unit(&mut rng, 10);
        let fam = RankOneFamily::normalized(a, phi).unwrap();
        let alpha = rng.gen_range(-3.0..3.0);
        for _ in 0..25 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..2.0));
            let r = aronszajn_krein(&fam, alpha, z).unwrap();
            id = id.max(r.identity_residual);
            res = res.max(r.resolvent_residual);
        }
    }
    outcome(id < 1e-12 && res < 1e-12, format!("500 points: F_alpha identity {id:.2e}, resolvent formula {res:.2e} (< 1e-12)"))
}

fn infinite_coupling_slope() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let alphas = logspace(1e2, 1e5, 7);
    let mut worst: f64 = 0.0;
    let mut slopes = Vec::new();
    for _ in 0..10 {
        let fam = RankOneFamily::normalized(random_symmetric(&mut rng, 8), random_unit(&mut rng, 8)).unwrap();
        let report = infinite_coupling(&fam, &alphas).unwrap();
        let slope = report.fit.map(|f| f.slope).unwrap_or(f64::NAN);
        worst = worst.max((slope + 1.0).abs());
        slopes.push(slope);
    }
    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    outcome(worst <= 0.1, format!("10 instances: slopes in [{lo:.4}, {hi:.4}], worst |slope + 1| = {worst:.2e} (<= 0.1)"))
}

fn krein_shift_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut trace, mut l1_excess, mut rank_one) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    let mut compared = 0usize;
    for k in 0..10 {
        let n = 8;
        let a = random_symmetric(&mut rng, n);
        // Even instances: rank-one perturbations; odd: general ones.
        let phi = random_unit(&mut rng, n);
        let alpha = if k % 4 == 0 { -rng.gen_range(0.5..2.0) } else { rng.gen_range(0.5..2.0) };
        let b = if k % 2 == 0 {
            &a + &phi * phi.transpose() * alpha
        } else {
            &a + random_symmetric(&mut rng, n) * 0.3
        };
        let counting = krein_shift(&a, &b, ShiftMode::Counting).unwrap();
        for _ in 0..10 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..2.0));
            trace = trace.max(counting.resolvent_identity_residual(z));
        }
        l1_excess = l1_excess.max(counting.xi_l1 - counting.trace_norm * (1.0 + 1e-12));
        if k % 2 == 0 {
            let fam = RankOneFamily::new(a.clone(), phi.clone()).unwrap();
            let eigs: Vec<f64> = counting.eigenvalues_a.iter().chain(&counting.eigenvalues_b).copied().collect();
            let lo = eigs.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
            let hi = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
            let grid: Vec<f64> = linspace(lo, hi, 801)
                .into_iter()
                .filter(|l| eigs.iter().all(|e| (e - l).abs() > 1e-2))
                .collect();
            let req = BoundaryValueRequest::new(grid.clone()).with_schedule(vec![1e-6, 5e-7, 2.5e-7]);
            let f0 = boundary_values(|z| fam.f_alpha(0.0, z).unwrap(), &req).unwrap();
            let sampled = krein_shift(&a, &b, ShiftMode::RankOne { f0: &f0, alpha }).unwrap();
            for &l in &grid {
                rank_one = rank_one.max((sampled.shift.eval(l) - counting.shift.eval(l)).abs());
                compared += 1;
            }
        }
    }
    outcome(
        trace < 1e-10 && l1_excess <= 0.0 && rank_one < 1e-8,
        format!(
            "trace identity {trace:.2e} (< 1e-10); max int|xi| - ||B-A||_1 = {l1_excess:.2e} (<= 0); \
             rank-one vs counting {rank_one:.2e} (< 1e-8) at {compared} continuity points"
        ),
    )
}

fn harmonic_oscillator() -> Outcome {
    let data = SpectralData::harmonic_oscillator(2000);
    let xi = xi_from_eigen_data(&data, 0.0).unwrap();
    let est = abelian_trace_formula(&xi, 0.0, &[0.08, 0.04, 0.02], true, 2).unwrap();
    let v = est.extrapolated.unwrap();
    outcome((v + 1.0).abs() <= 2e-2, format!("V(0) estimate {v:.6} vs -1, error {:.2e} (<= 2e-2)", (v + 1.0).abs()))
}

fn periodic(f: impl Fn(f64) -> f64) -> Potential {
    Potential::from_fn(0.0, 1.0, 1025, f, Interpolation::Cubic, Tail::Periodic { period: 1.0 }).unwrap()
}

fn periodic_trace() -> Outcome {
    let pot = periodic(|x| 2.0 * (2.0 * PI * x).cos());
    let ys = [0.0, 0.3];
    let band = periodic_band_data(&pot, 20, &ys, &BandOptions::default()).unwrap();
    let mut worst: f64 = 0.0;
    let mut bounded = true;
    for &y in &ys {
        let s = periodic_trace_sum(&band, y, 20).unwrap();
        worst = worst.max((s.partial_sums[19] - 2.0 * (2.0 * PI * y).cos()).abs());
        bounded &= s.terms.iter().zip(&s.bounds).all(|(t, b)| t.abs() <= b.abs() + 1e-8 * (1.0 + b.abs()));
    }
    let free = periodic(|_| 0.0);
    let fb = periodic_band_data(&free, 20, &ys, &BandOptions::default()).unwrap();
    let free_zero = ys
        .iter()
        .all(|&y| periodic_trace_sum(&fb, y, 20).unwrap().partial_sums.iter().all(|&s| s == 0.0));
    outcome(
        worst <= 1e-3 && bounded && free_zero,
        format!("|S_20 - V(y)| = {worst:.2e} (<= 1e-3); gap bounds hold: {bounded}; free sums exactly zero: {free_zero}"),
    )
}

fn heat_defect() -> Outcome {
    let zero = Potential::constant(0.0, -10.0, 10.0);
    let mut free_err: f64 = 0.0;
    for t in [0.01, 0.02] {
        let d = heat_trace_defect(&zero, &HeatRequest::around(0.0, t)).unwrap();
        free_err = free_err.max((d.value - 0.5).abs());
    }
    let quad = Potential::from_fn(-1.0, 3.0, 4001, |x| x * x, Interpolation::Cubic, Tail::CompactSupport).unwrap();
    let t = 0.01;
    let d = heat_trace_defect(&quad, &HeatRequest::around(1.0, t)).unwrap();
    let target = 0.5 * (1.0 - t);
    let rel = (d.value - target).abs() / target;
    outcome(
        free_err <= 1e-3 && rel <= 1e-2,
        format!("free |defect - 1/2| = {free_err:.2e} (<= 1e-3); V = x^2 at x = 1: {:.6} vs {target}, rel {rel:.2e} (<= 1e-2)", d.value),
    )
}

fn atkinson() -> Outcome {
    let five = Potential::constant(5.0, 0.0, 1.0);
    let opts = OdeOptions::default();
    let est = atkinson_from_potential(&five, 0.0, &[10.0, 30.0, 100.0], &opts).unwrap();
    let rel = (est.raw[2] - 5.0).abs() / 5.0;
    let smooth = Potential::from_fn(
        0.0,
        3.0,
        301,
        |x| 2.0 * (-(x - 0.5) * (x - 0.5)).exp(),
        Interpolation::Cubic,
        Tail::CompactSupport,
    )
    .unwrap();
    let s = atkinson_from_potential(&smooth, 0.5, &logspace(20.0, 200.0, 8), &opts).unwrap();
    outcome(
        rel < 1e-3 && s.monotone && s.spans_decade,
        format!(
            "V = 5 at kappa = 100: rel {rel:.2e} (< 1e-3); smooth V remainders monotone over a decade: {}",
            s.monotone && s.spans_decade
        ),
    )
}

fn sine(points: usize) -> Potential {
    Potential::from_fn(0.0, 1.0, points, |x| (PI * x).sin(), Interpolation::Cubic, Tail::CompactSupport).unwrap()
}

fn sup_error(v: &Potential, n: usize) -> f64 {
    v.samples()
        .iter()
        .enumerate()
        .map(|(j, s)| (s - (PI * j as f64 / n as f64).sin()).abs())
        .fold(0.0, f64::max)
}

fn a_function_roundtrip() -> Outcome {
    let pot = sine(2049);
    let opts = MarchOptions::default();
    // Forward slice with its h² term removed, so the error left is that of
    // the inverse march alone.
    let err = |n: usize| {
        let slice = a_slice_extrapolated(&pot, 1.0, n, &opts).unwrap();
        sup_error(&a_inverse(&slice, 1.0 / n as f64, &opts).unwrap(), n)
    };
    let (e1, e2) = (err(512), err(1024));
    let ratio = e1 / e2;
    // Plain forward-then-inverse, for reference: the two h² errors largely
    // cancel, so this ratio is not a convergence order.
    let plain = |n: usize| {
        let f = a_forward(&pot, 1.0, n, &opts).unwrap();
        sup_error(&a_inverse(f.slice(), 1.0 / n as f64, &opts).unwrap(), n)
    };
    let (p1, p2) = (plain(512), plain(1024));
    outcome(
        e1 <= 1e-2 && (3.0..=5.0).contains(&ratio),
        format!(
            "sup error h=1/512 {e1:.2e} (<= 1e-2), h=1/1024 {e2:.2e}, ratio {ratio:.2} (in [3,5]); \
             plain forward/inverse {p1:.2e} -> {p2:.2e}, ratio {:.2}",
            p1 / p2
        ),
    )
}

fn bump(a: f64) -> Potential {
    let w = 0.1;
    Potential::from_fn(
        0.0,
        1.0,
        2001,
        move |x| {
            let t = x - a;
            if t > 0.0 && t < w {
                (16.0 / w.powi(4)) * t * t * (w - t) * (w - t)
            } else {
                0.0
            }
        },
        Interpolation::Cubic,
        Tail::CompactSupport,
    )
    .unwrap()
}

fn decay_exponents() -> Outcome {
    let pot = sine(8193);
    let n = 1024;
    let h = 1.0 / n as f64;
    let slice = a_slice_extrapolated(&pot, 1.0, n, &MarchOptions::default()).unwrap();
    let ode = OdeOptions { rtol: 1e-13, atol: 1e-16, ..OdeOptions::default() };
    let zero = Potential::constant(0.0, 0.0, 1.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for a in [0.25, 0.5, 0.75] {
        let kappa = linspace(1.0 / a, 12.0 / a, 40);
        let r = representation_residual(&pot, &slice, h, a, &kappa, 1e-15, &ode).unwrap();
        let rel_r = (r.fit.exponent / (-2.0 * a) - 1.0).abs();
        let bm = local_bm_check(&zero, &bump(a), &linspace(5.0, 80.0, 40), BoundaryCondition::Dirichlet, &BmOptions::default())
            .unwrap();
        let rel_b = match bm.verdict {
            BmVerdict::Agreement { a_hat } => (a_hat / a - 1.0).abs(),
            BmVerdict::Indistinguishable => f64::INFINITY,
        };
        ok &= rel_r <= 0.05 && rel_b <= 0.05;
        parts.push(format!("a={a}: residual {rel_r:.1e}, bump {rel_b:.1e}"));
    }
    outcome(ok, format!("relative exponent errors (<= 5e-2): {}", parts.join("; ")))
}

fn abelian_free_measure() -> Outcome {
    let mu = DiscreteMeasure::new((1..=400).map(|n| {
        let l = (n as f64 * PI).powi(2);
        (l, 2.0 * l)
    }))
    .unwrap();
    let input = SpectralInput::Discrete(&mu);
    let mut worst: f64 = 0.0;
    let mut flagged = false;
    for alpha in linspace(0.1, 0.9, 17) {
        let est = a_from_measure(&input, alpha, &[4e-4, 2e-4, 1e-4], 2).unwrap();
        worst = worst.max(est.extrapolated.abs());
        flagged |= est.flagged;
    }
    outcome(worst <= 5e-2, format!("max |A(alpha)| on [0.1, 0.9] = {worst:.2e} (<= 5e-2), flagged: {flagged}"))
}

/// Values at or below the floor vanish and every value lies in `[0, 1]`,
/// checked on a grid as well as structurally.
fn xi_is_sane(xi: &XiFunction, lo: f64, hi: f64) -> bool {
    xi.is_admissible()
        && linspace(lo, hi, 2001).into_iter().all(|l| {
            let v = xi.eval(l);
            v.is_nan() || ((0.0..=1.0).contains(&v) && (l >= xi.floor || v == 0.0))
        })
}

fn xi_sanity() -> Outcome {
    let mut sane = true;
    let harmonic = xi_from_eigen_data(&SpectralData::harmonic_oscillator(50), 0.0).unwrap();
    sane &= xi_is_sane(&harmonic, -5.0, 120.0) && harmonic.eval(-1e-9) == 0.0;
    let pot = periodic(|x| 2.0 * (2.0 * PI * x).cos());
    let band = periodic_band_data(&pot, 8, &[0.0, 0.3], &BandOptions::default()).unwrap();
    for y in [0.0, 0.3] {
        let xi = xi_from_eigen_data(&SpectralData::from_bands(&band, y).unwrap(), y).unwrap();
        sane &= xi_is_sane(&xi, band.band_edges[0] - 5.0, 800.0) && xi.eval(band.band_edges[0] - 1e-9) == 0.0;
    }

    // Truncated discrete problem: V on [0, 1] with Dirichlet walls,
    // decoupled at x.
    let v = Potential::from_fn(
        0.0,
        1.0,
        1001,
        |t| 20.0 * t * (1.0 - t) + 3.0 * (5.0 * t).sin(),
        Interpolation::Cubic,
        Tail::CompactSupport,
    )
    .unwrap();
    let x = 0.3;
    let dir = BoundaryCondition::Dirichlet;
    let eo = EigenOptions::default();
    let count = 10;
    let e = interval_eigenvalues(&v, (0.0, 1.0), dir, dir, count, &eo).unwrap();
    let mut mu = interval_eigenvalues(&v, (0.0, x), dir, dir, count, &eo).unwrap();
    mu.extend(interval_eigenvalues(&v, (x, 1.0), dir, dir, count, &eo).unwrap());
    mu.sort_by(f64::total_cmp);
    mu.truncate(count - 1);
    let from_eigen = xi_from_eigen_data(&SpectralData::Discrete { eigenvalues: e.clone(), dirichlet: mu.clone() }, x).unwrap();

    let geometry = Geometry::Interval { left: dir, right: dir };
    let ode = OdeOptions::default();
    let hi = e[count - 1] - 1e-2;
    let grid: Vec<f64> = linspace(e[0] - 20.0, hi, 600)
        .into_iter()
        .filter(|l| e.iter().chain(&mu).all(|p| (p - l).abs() > 1e-2 * (1.0 + p.abs())))
        .collect();
    let req = BoundaryValueRequest::new(grid.clone()).with_schedule(vec![1e-3, 5e-4, 2.5e-4]);
    let g = boundary_values(|z| green_diag(&v, x, z, geometry, &ode).unwrap().value, &req).unwrap();
    let samples: Vec<(f64, Complex64)> = g.iter().map(|b| (b.lambda, b.value)).collect();
    let from_green = xi_from_green(&samples, x).unwrap();
    sane &= from_eigen.is_admissible() && from_green.is_admissible();
    sane &= from_eigen.eval(e[0] - 1.0) == 0.0;
    let below = grid.iter().filter(|&&l| l < e[0]).map(|&l| from_green.eval(l)).fold(0.0f64, f64::max);
    let agree = grid.iter().map(|&l| (from_green.eval(l) - from_eigen.eval(l)).abs()).fold(0.0f64, f64::max);
    sane &= below <= 1e-8;
    outcome(
        sane && agree <= 1e-6,
        format!(
            "all xi in [0,1] and zero below the spectrum: {sane}; green vs eigen data {agree:.2e} (<= 1e-6) \
             at {} continuity points",
            grid.len()
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("jacobi roundtrip", jacobi_roundtrip),
        ("aronszajn-krein and resolvent formula", aronszajn_krein_residuals),
        ("infinite coupling rate", infinite_coupling_slope),
        ("krein spectral shift", krein_shift_identities),
        ("harmonic oscillator trace formula", harmonic_oscillator),
        ("periodic trace formula", periodic_trace),
        ("heat-trace defect", heat_defect),
        ("atkinson high-energy limit", atkinson),
        ("a-function roundtrip", a_function_roundtrip),
        ("representation and local uniqueness decay", decay_exponents),
        ("abelianised a-function", abelian_free_measure),
        ("xi sanity", xi_sanity),
    ];
    let mut failed = Vec::new();
    // Start below libtest's "test acceptance ..." prefix.
    writeln!(std::io::stdout()).unwrap();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        // Straight to the stdout handle: the harness captures `println!`, and
        // the verdict lines belong in the log even when every test passes.
        let mut out = std::io::stdout().lock();
        writeln!(out, "{tag} {:>2} {name}: {} [{:.1}s]", k + 1, o.detail, start.elapsed().as_secs_f64()).unwrap();
        out.flush().unwrap();
        if !o.passed {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
