use std::path::PathBuf;

use clap::Subcommand;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::args::{BcArg, ComplexArg, Interval, ModeArg, RouteArg, Schedule};
use super::{Inputs, Outcome, Table, Verdict};
use crate::afunc::{
    a_forward, a_from_m, a_from_measure, a_inverse, local_bm_check, parse_slice, BmOptions, BmVerdict,
    FitOptions, MSamples, MarchOptions, SpectralInput,
};
use crate::error::{Result, WeylError};
use crate::herglotz::{mobius_bc, DiscreteMeasure};
use crate::jacobi::{
    coefficient_stripping, m_function, max_relative_parameter_error, spectral_measure, JacobiOperator,
    StrippingRoute,
};
use crate::rankone::{infinite_coupling, parse_matrix, parse_vector, RankOneFamily};
use crate::schrodinger::{
    heat_trace_defect, interval_eigenvalues, periodic_band_data, weyl_m, BandOptions, EigenOptions, HeatRequest, OdeOptions, Potential, WeylMode, BRANCH_CONVENTION,
};
use crate::xi::{
    abelian_trace_formula, krein_shift, periodic_trace_sum, xi_from_eigen_data, ShiftMode, SpectralData,
    SpectralShift,
};

/// Deepest operator the continued-fraction route is asked to recover.
const CF_MAX_DEPTH: usize = 12;

const M_CONVENTION: &str = "m(z, x) = u'/u for the solution square-integrable at +infinity";
const A_CONVENTION: &str = "m(-k^2, 0) = -k - int_0^a A(alpha) exp(-2 alpha k) d alpha + O(exp(-2 a k))";

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobiCmd {
    /// Random operators → spectral measure → recovered coefficients.
    Roundtrip {
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Number of random operators.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value_t = RouteArg::Both)]
        route: RouteArg,
        /// Largest accepted relative parameter error, recurrence route.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Largest accepted relative parameter error, continued-fraction route.
        #[arg(long, default_value_t = 1e-6)]
        cf_tol: f64,
    },
    /// m-function of an operator file (`b a` rows) at points z.
    Mfunc {
        #[arg(long)]
        op: PathBuf,
        /// `re,im`; repeatable.
        #[arg(long, required = true)]
        z: Vec<ComplexArg>,
        /// Rows and columns removed first.
        #[arg(long, default_value_t = 0)]
        strip: usize,
    },
    /// Recover Jacobi parameters from a measure file (`position weight` rows).
    Strip {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = RouteArg::Op)]
        route: RouteArg,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankoneCmd {
    /// Spectrum of A + α⟨φ,·⟩φ along a coupling schedule, against the
    /// compression of A to φ⊥.
    Sweep {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long, default_value = "1e2:1e5:geometric:7")]
        alphas: Schedule,
        /// Accepted deviation of the fitted log-log slope from -1.
        #[arg(long, default_value_t = 0.1)]
        slope_tol: f64,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchrodCmd {
    /// Weyl m-function at complex points or along z = -κ².
    M {
        #[arg(long)]
        potential: PathBuf,
        /// `re,im`; repeatable.
        #[arg(long)]
        z: Vec<ComplexArg>,
        /// `lo:hi:count` of κ, sampling z = -κ².
        #[arg(long)]
        kappa_range: Option<Schedule>,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Riccati)]
        mode: ModeArg,
        /// Also report the m-function rotated to this boundary condition.
        #[arg(long)]
        bc_left: Option<BcArg>,
    },
    /// Lowest eigenvalues on an interval.
    Eig {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value = "dirichlet")]
        bc_left: BcArg,
        #[arg(long, default_value = "dirichlet")]
        bc_right: BcArg,
        /// `lo:hi`; defaults to the potential's domain.
        #[arg(long)]
        interval: Option<Interval>,
    },
    /// Band edges and Dirichlet eigenvalues of a period-1 potential.
    Bands {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 20)]
        jmax: usize,
        /// Left ends of the Dirichlet windows.
        #[arg(long, default_value = "0")]
        y: Schedule,
    },
    /// Heat-trace defect of a Dirichlet insertion at x.
    Heat {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value = "0.01")]
        t: Schedule,
        /// Half-width of the box; defaults to 8√t.
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 400)]
        grid_n: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XiCmd {
    /// Abelian trace formula for V = x² − 1 at x = 0 from closed-form
    /// eigenvalue data.
    Harmonic {
        #[arg(long, default_value = "0.08,0.04,0.02")]
        alpha_schedule: Schedule,
        /// Number of Dirichlet eigenvalues used.
        #[arg(long, default_value_t = 2000)]
        jmax: usize,
        /// Extrapolation order; defaults to one less than the schedule length.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 2e-2)]
        tol: f64,
    },
    /// Periodic trace formula partial sums at y.
    Periodic {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        y: f64,
        #[arg(long, default_value_t = 20)]
        jmax: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Counting spectral shift between two symmetric matrices.
    Shift {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AfuncCmd {
    /// A(α, x) on the triangle α + x ≤ L from V.
    Forward {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 512)]
        n: usize,
    },
    /// V on [0, L] from a slice A(·, 0) (`alpha value` rows).
    Invert {
        #[arg(long)]
        slice: PathBuf,
        #[arg(long, default_value_t = 1e8)]
        bound: f64,
    },
    /// Regularised fit of A(·, 0) on [0, a] to m samples (`kappa re im` rows).
    Fit {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 41)]
        grid_n: usize,
        #[arg(long, default_value_t = 1e-10)]
        regularizer: f64,
    },
    /// A(α) from a discrete spectral measure by Abel damping.
    Measure {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value = "0.1:0.9:9")]
        alpha: Schedule,
        #[arg(long, default_value = "4e-4,2e-4,1e-4")]
        eps: Schedule,
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Check max |A - expect| ≤ tol.
        #[arg(long)]
        expect: Option<f64>,
        #[arg(long, default_value_t = 5e-2)]
        tol: f64,
    },
    /// Decay rate of m₁ - m₂ and the implied agreement length.
    Bmcheck {
        #[arg(long)]
        v1: PathBuf,
        #[arg(long)]
        v2: PathBuf,
        #[arg(long, default_value = "5:80:40")]
        kappa_range: Schedule,
        #[arg(long, default_value = "dirichlet")]
        bc: BcArg,
        /// Known agreement length; checks the estimate against it.
        #[arg(long)]
        expect: Option<f64>,
        /// Relative tolerance for `--expect`.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| WeylError::InternalConsistency(format!("json encoding: {e}")))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(WeylError::config(format!("{name} must be positive, got {v}")))
    }
}

fn load_potential(inputs: &mut Inputs, path: &std::path::Path) -> Result<Potential> {
    let text = inputs.read(path)?;
    Potential::from_text(&text, &path.display().to_string())
}

fn ode_conventions(opts: &OdeOptions) -> Vec<(&'static str, String)> {
    vec![
        ("branch", BRANCH_CONVENTION.to_string()),
        ("m_function", M_CONVENTION.to_string()),
        ("ode_tolerances", format!("rtol {:e}, atol {:e}", opts.rtol, opts.atol)),
    ]
}

pub fn dispatch(cmd: &super::Command, seed: u64, inputs: &mut Inputs) -> Result<Outcome> {
    use super::Command::*;
    match cmd {
        Jacobi { cmd } => jacobi(cmd, seed, inputs),
        Rankone { cmd } => rankone(cmd, inputs),
        Schrod { cmd } => schrod(cmd, inputs),
        Xi { cmd } => xi(cmd, inputs),
        Afunc { cmd } => afunc(cmd, inputs),
    }
}

fn jacobi(cmd: &JacobiCmd, seed: u64, inputs: &mut Inputs) -> Result<Outcome> {
    match cmd {
        JacobiCmd::Roundtrip { n, count, route, tol, cf_tol } => {
            if *n == 0 || *count == 0 {
                return Err(WeylError::config("--n and --count must be at least 1"));
            }
            positive("--tol", *tol)?;
            positive("--cf-tol", *cf_tol)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut table = Table::new(&["index", "op_error", "cf_error"]);
            let mut runs = Vec::with_capacity(*count);
            let (mut worst_op, mut worst_cf) = (0.0f64, 0.0f64);
            let mut notes = Vec::new();
            for k in 0..*count {
                let j = JacobiOperator::random(&mut rng, *n);
                let mu = spectral_measure(&j)?;
                let mut op_err = f64::NAN;
                let mut cf_err = f64::NAN;
                for r in route.routes() {
                    if r == StrippingRoute::ContinuedFraction && *n > CF_MAX_DEPTH {
                        notes.push(format!(
                            "continued-fraction route skipped: n = {n} exceeds depth {CF_MAX_DEPTH}"
                        ));
                        continue;
                    }
                    let rec = coefficient_stripping(&mu, r, *n)?;
                    let e = max_relative_parameter_error(&j, &rec);
                    match r {
                        StrippingRoute::OpRecursion => {
                            op_err = e;
                            worst_op = worst_op.max(e);
                        }
                        StrippingRoute::ContinuedFraction => {
                            cf_err = e;
                            worst_cf = worst_cf.max(e);
                        }
                    }
                }
                table.push(vec![k as f64, op_err, cf_err]);
                runs.push(json!({
                    "b": j.b(), "a": j.a(),
                    "op_error": finite_or_null(op_err),
                    "cf_error": finite_or_null(cf_err),
                }));
            }
            notes.dedup();
            let score = (worst_op / tol).max(worst_cf / cf_tol);
            Ok(Outcome {
                result: json!({
                    "operators": runs,
                    "max_op_error": worst_op,
                    "max_cf_error": worst_cf,
                    "notes": notes,
                }),
                table: Some(table),
                verdict: Some(Verdict {
                    passed: score < 1.0,
                    check: "max relative parameter error divided by its route tolerance < 1".into(),
                    value: score,
                    threshold: 1.0,
                }),
                conventions: vec![("rng", "ChaCha8 seeded from --seed; b in [-1,1], a in [0.5,1.5]".into())],
            })
        }
        JacobiCmd::Mfunc { op, z, strip } => {
            let text = inputs.read(op)?;
            let j = JacobiOperator::from_text(&text, &op.display().to_string())?;
            let mut table = Table::new(&["re_z", "im_z", "re_m", "im_m"]);
            let mut rows = Vec::new();
            for &ComplexArg(zz) in z {
                let m = m_function(&j, zz, *strip)?;
                let cf = j.stripped(*strip)?.continued_fraction(zz);
                table.push(vec![zz.re, zz.im, m.re, m.im]);
                rows.push(json!({ "z": zz, "m": m, "continued_fraction": cf, "difference": (m - cf).norm() }));
            }
            Ok(Outcome {
                result: json!({ "strip": strip, "values": rows }),
                table: Some(table),
                verdict: None,
                conventions: vec![("m_function", "m_n(z) = <delta_1, (J_n - z)^{-1} delta_1>".into())],
            })
        }
        JacobiCmd::Strip { measure, depth, route } => {
            let text = inputs.read(measure)?;
            let mu = DiscreteMeasure::from_text(&text, &measure.display().to_string())?;
            let mut out = Vec::new();
            let mut table = None;
            for r in route.routes() {
                let rec = coefficient_stripping(&mu, r, *depth)?;
                if table.is_none() {
                    let mut t = Table::new(&["index", "b", "a"]);
                    for (k, &b) in rec.b().iter().enumerate() {
                        t.push(vec![(k + 1) as f64, b, rec.a().get(k).copied().unwrap_or(f64::NAN)]);
                    }
                    table = Some(t);
                }
                out.push(json!({ "route": r, "b": rec.b(), "a": rec.a() }));
            }
            Ok(Outcome {
                result: json!({ "depth": depth, "total_mass": mu.total_mass(), "recovered": out }),
                table,
                verdict: None,
                conventions: vec![("normalisation", "measure rescaled to unit mass before stripping".into())],
            })
        }
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn rankone(cmd: &RankoneCmd, inputs: &mut Inputs) -> Result<Outcome> {
    match cmd {
        RankoneCmd::Sweep { matrix, phi, alphas, slope_tol } => {
            let a = parse_matrix(&inputs.read(matrix)?, &matrix.display().to_string())?;
            let p = parse_vector(&inputs.read(phi)?, &phi.display().to_string())?;
            let fam = RankOneFamily::normalized(a, p)?;
            let report = infinite_coupling(&fam, &alphas.0)?;
            let mut table = Table::new(&["alpha", "distance"]);
            for s in &report.steps {
                table.push(vec![s.alpha, s.distance]);
            }
            let verdict = report.fit.map(|f| Verdict {
                passed: (f.slope + 1.0).abs() <= *slope_tol,
                check: "|slope of log distance vs log alpha + 1| <= slope_tol".into(),
                value: (f.slope + 1.0).abs(),
                threshold: *slope_tol,
            });
            Ok(Outcome {
                result: json!({
                    "cyclic": fam.is_cyclic(),
                    "report": to_value(&report)?,
                }),
                table: Some(table),
                verdict,
                conventions: vec![("phi", "normalised to unit length".into())],
            })
        }
    }
}

fn schrod(cmd: &SchrodCmd, inputs: &mut Inputs) -> Result<Outcome> {
    match cmd {
        SchrodCmd::M { potential, z, kappa_range, x, mode, bc_left } => {
            let pot = load_potential(inputs, potential)?;
            let opts = OdeOptions::default();
            let mode = match mode {
                ModeArg::Riccati => WeylMode::Riccati,
                ModeArg::Linear => WeylMode::LinearOde,
            };
            let mut points: Vec<(Option<f64>, Complex64)> = z.iter().map(|c| (None, c.0)).collect();
            if let Some(k) = kappa_range {
                if k.0.iter().any(|&v| !(v > 0.0)) {
                    return Err(WeylError::config("kappa values must be positive"));
                }
                points.extend(k.0.iter().map(|&k| (Some(k), Complex64::new(-k * k, 0.0))));
            }
            if points.is_empty() {
                return Err(WeylError::config("give --z and/or --kappa-range"));
            }
            let mut table = Table::new(&["re_z", "im_z", "re_m", "im_m"]);
            let mut rows = Vec::new();
            for (kappa, zz) in points {
                let w = weyl_m(&pot, zz, *x, mode, &opts)?;
                let m = w.value.finite();
                let rotated = match (bc_left, m) {
                    (Some(bc), Some(m)) => Some(mobius_bc(m, bc.0.theta())),
                    _ => None,
                };
                let m_row = m.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                table.push(vec![zz.re, zz.im, m_row.re, m_row.im]);
                rows.push(json!({
                    "kappa": kappa,
                    "weyl": to_value(&w)?,
                    "rotated": to_value(&rotated)?,
                }));
            }
            Ok(Outcome {
                result: json!({
                    "x": x,
                    "bc_left": bc_left.map(|b| b.0),
                    "values": rows,
                }),
                table: Some(table),
                verdict: None,
                conventions: ode_conventions(&opts),
            })
        }
        SchrodCmd::Eig { potential, count, bc_left, bc_right, interval } => {
            let pot = load_potential(inputs, potential)?;
            let iv = interval.map(|i| (i.0, i.1)).unwrap_or_else(|| pot.domain());
            let opts = EigenOptions::default();
            let ev = interval_eigenvalues(&pot, iv, bc_left.0, bc_right.0, *count, &opts)?;
            let mut table = Table::new(&["index", "eigenvalue"]);
            for (k, &e) in ev.iter().enumerate() {
                table.push(vec![k as f64, e]);
            }
            let mut conventions = ode_conventions(&opts.ode);
            conventions.push(("eigen_tolerance", format!("{:e}", opts.tol)));
            Ok(Outcome {
                result: json!({ "interval": iv, "bc_left": bc_left.0, "bc_right": bc_right.0, "eigenvalues": ev }),
                table: Some(table),
                verdict: None,
                conventions,
            })
        }
        SchrodCmd::Bands { potential, jmax, y } => {
            let pot = load_potential(inputs, potential)?;
            let opts = BandOptions::default();
            let band = periodic_band_data(&pot, *jmax, &y.0, &opts)?;
            let mut table = Table::new(&["index", "band_edge"]);
            for (k, &e) in band.band_edges.iter().enumerate() {
                table.push(vec![k as f64, e]);
            }
            let mut conventions = ode_conventions(&opts.eigen.ode);
            conventions.push(("closed_gap_tol", format!("{:e}", opts.closed_gap_tol)));
            conventions.push(("period", "1, Dirichlet windows [y, y+1]".into()));
            Ok(Outcome {
                result: to_value(&band)?,
                table: Some(table),
                verdict: None,
                conventions,
            })
        }
        SchrodCmd::Heat { potential, x, t, half_width, grid_n } => {
            let pot = load_potential(inputs, potential)?;
            let mut table = Table::new(&["t", "defect"]);
            let mut rows = Vec::new();
            for &tt in &t.0 {
                positive("t", tt)?;
                let mut req = HeatRequest { grid_n: *grid_n, ..HeatRequest::around(*x, tt) };
                if let Some(w) = half_width {
                    positive("--half-width", *w)?;
                    req.box_lo = x - w;
                    req.box_hi = x + w;
                }
                let d = heat_trace_defect(&pot, &req)?;
                if d.truncation_warning {
                    eprintln!("warning: box narrower than the heat kernel's reach at t = {tt}");
                }
                table.push(vec![tt, d.value]);
                rows.push(to_value(&d)?);
            }
            Ok(Outcome {
                result: json!({ "x": x, "defects": rows }),
                table: Some(table),
                verdict: None,
                conventions: vec![(
                    "discretisation",
                    "3-point Laplacian, Dirichlet walls, x a grid node; h and h/2 combined by Richardson".into(),
                )],
            })
        }
    }
}

fn xi(cmd: &XiCmd, inputs: &mut Inputs) -> Result<Outcome> {
    match cmd {
        XiCmd::Harmonic { alpha_schedule, jmax, order, tol } => {
            if *jmax == 0 {
                return Err(WeylError::config("--jmax must be at least 1"));
            }
            let alphas = &alpha_schedule.0;
            let order = order.unwrap_or(alphas.len().saturating_sub(1));
            if order >= alphas.len() {
                return Err(WeylError::config("--order must be less than the schedule length"));
            }
            let data = SpectralData::harmonic_oscillator(*jmax);
            let xi = xi_from_eigen_data(&data, 0.0)?;
            let est = abelian_trace_formula(&xi, 0.0, alphas, true, order)?;
            let value = est.extrapolated.unwrap_or(f64::NAN);
            let mut table = Table::new(&["alpha", "value"]);
            for (a, v) in est.alphas.iter().zip(&est.values) {
                table.push(vec![*a, *v]);
            }
            let err = (value + 1.0).abs();
            Ok(Outcome {
                result: json!({ "potential": "x^2 - 1", "x": 0.0, "expected": -1.0, "estimate": to_value(&est)? }),
                table: Some(table),
                verdict: Some(Verdict {
                    passed: err <= *tol,
                    check: "|extrapolated - V(0)| <= tol".into(),
                    value: err,
                    threshold: *tol,
                }),
                conventions: vec![
                    ("data", "E_j = 2j, Dirichlet eigenvalues at 0: 2, 2, 6, 6, 10, 10, ...".into()),
                    ("summation", "exp(-alpha lambda) damping, polynomial extrapolation in alpha".into()),
                ],
            })
        }
        XiCmd::Periodic { potential, y, jmax, tol } => {
            let pot = load_potential(inputs, potential)?;
            let opts = BandOptions::default();
            let band = periodic_band_data(&pot, *jmax, &[*y], &opts)?;
            let sum = periodic_trace_sum(&band, *y, *jmax)?;
            let v = pot.eval(*y);
            let s = *sum.partial_sums.last().unwrap();
            let mut table = Table::new(&["j", "partial_sum", "term", "gap"]);
            for (k, ((p, t), g)) in sum.partial_sums.iter().zip(&sum.terms).zip(&sum.bounds).enumerate() {
                table.push(vec![(k + 1) as f64, *p, *t, *g]);
            }
            let mut conventions = ode_conventions(&opts.eigen.ode);
            conventions.push(("sum", "S_J = E_0 + sum_j (E_{2j-1} + E_{2j} - 2 mu_j(y))".into()));
            Ok(Outcome {
                result: json!({ "y": y, "v_at_y": v, "trace_sum": to_value(&sum)?, "band_edges": band.band_edges }),
                table: Some(table),
                verdict: Some(Verdict {
                    passed: (s - v).abs() <= *tol,
                    check: "|S_J - V(y)| <= tol".into(),
                    value: (s - v).abs(),
                    threshold: *tol,
                }),
                conventions,
            })
        }
        XiCmd::Shift { a, b } => {
            let ma = parse_matrix(&inputs.read(a)?, &a.display().to_string())?;
            let mb = parse_matrix(&inputs.read(b)?, &b.display().to_string())?;
            let k = krein_shift(&ma, &mb, ShiftMode::Counting)?;
            let mut table = Table::new(&["lambda", "xi"]);
            if let SpectralShift::Step(s) = &k.shift {
                for (l, v) in s.breaks.iter().zip(&s.values) {
                    table.push(vec![*l, *v]);
                }
            }
            let slack = k.trace_norm * (1.0 + 1e-12) + 1e-12;
            Ok(Outcome {
                result: to_value(&k)?,
                table: Some(table),
                verdict: Some(Verdict {
                    passed: k.xi_l1 <= slack,
                    check: "integral of |xi| <= trace norm of B - A".into(),
                    value: k.xi_l1,
                    threshold: k.trace_norm,
                }),
                conventions: vec![("xi", "#{eig A <= lambda} - #{eig B <= lambda}".into())],
            })
        }
    }
}

fn afunc(cmd: &AfuncCmd, inputs: &mut Inputs) -> Result<Outcome> {
    let march = MarchOptions::default();
    let conv = || vec![("representation", A_CONVENTION.to_string())];
    match cmd {
        AfuncCmd::Forward { potential, horizon, n } => {
            let pot = load_potential(inputs, potential)?;
            let field = a_forward(&pot, *horizon, *n, &march)?;
            let mut table = Table::new(&["alpha", "x", "value"]);
            for j in 0..=field.n() {
                for (i, v) in field.row(j).iter().enumerate() {
                    table.push(vec![i as f64 * field.h, j as f64 * field.h, *v]);
                }
            }
            Ok(Outcome {
                result: json!({
                    "h": field.h,
                    "horizon": field.horizon,
                    "slice": field.slice(),
                    "boundary_trace": field.boundary_trace(),
                }),
                table: Some(table),
                verdict: None,
                conventions: conv(),
            })
        }
        AfuncCmd::Invert { slice, bound } => {
            let text = inputs.read(slice)?;
            let (h, values) = parse_slice(&text, &slice.display().to_string())?;
            let opts = MarchOptions { divergence_bound: *bound, ..march };
            let pot = a_inverse(&values, h, &opts)?;
            let mut table = Table::new(&["x", "v"]);
            for (j, v) in pot.samples().iter().enumerate() {
                table.push(vec![j as f64 * h, *v]);
            }
            Ok(Outcome {
                result: json!({ "h": h, "divergence_bound": bound, "potential": pot.samples() }),
                table: Some(table),
                verdict: None,
                conventions: conv(),
            })
        }
        AfuncCmd::Fit { samples, horizon, grid_n, regularizer } => {
            let text = inputs.read(samples)?;
            let s = MSamples::from_text(&text, &samples.display().to_string())?;
            let opts = FitOptions { regularizer: *regularizer, ..FitOptions::default() };
            let fit = a_from_m(&s, *horizon, *grid_n, &opts)?;
            let mut table = Table::new(&["alpha", "a"]);
            for (al, v) in fit.alpha.iter().zip(&fit.a) {
                table.push(vec![*al, *v]);
            }
            Ok(Outcome {
                result: json!({
                    "h": horizon / (*grid_n - 1) as f64,
                    "fit": to_value(&fit)?,
                }),
                table: Some(table),
                verdict: None,
                conventions: conv(),
            })
        }
        AfuncCmd::Measure { measure, alpha, eps, order, expect, tol } => {
            let text = inputs.read(measure)?;
            let mu = DiscreteMeasure::from_text(&text, &measure.display().to_string())?;
            let input = SpectralInput::Discrete(&mu);
            let mut table = Table::new(&["alpha", "a"]);
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for &al in &alpha.0 {
                let est = a_from_measure(&input, al, &eps.0, *order)?;
                if est.flagged {
                    eprintln!("warning: alpha = {al}: damping sequence flagged (non-monotone or truncated)");
                }
                if let Some(e) = expect {
                    worst = worst.max((est.extrapolated - e).abs());
                }
                table.push(vec![al, est.extrapolated]);
                rows.push(to_value(&est)?);
            }
            let verdict = expect.map(|_| Verdict {
                passed: worst <= *tol,
                check: "max |A(alpha) - expect| <= tol".into(),
                value: worst,
                threshold: *tol,
            });
            Ok(Outcome {
                result: json!({ "estimates": rows }),
                table: Some(table),
                verdict,
                conventions: vec![
                    ("kernel", "A_eps(alpha) = -2 sum w sin(2 alpha sqrt(l))/sqrt(l) exp(-eps l)".into()),
                    ("representation", A_CONVENTION.to_string()),
                ],
            })
        }
        AfuncCmd::Bmcheck { v1, v2, kappa_range, bc, expect, tol } => {
            let p1 = load_potential(inputs, v1)?;
            let p2 = load_potential(inputs, v2)?;
            let k = &kappa_range.0;
            let (lo, hi) = (k.iter().copied().fold(f64::INFINITY, f64::min), k.iter().copied().fold(0.0, f64::max));
            if !(hi >= 4.0 * lo) {
                return Err(WeylError::config("--kappa-range must span at least a factor of 4"));
            }
            let opts = BmOptions::default();
            let check = local_bm_check(&p1, &p2, k, bc.0, &opts)?;
            let mut table = Table::new(&["kappa", "difference"]);
            for (kk, d) in check.kappa.iter().zip(&check.difference) {
                table.push(vec![*kk, *d]);
            }
            let verdict = expect.map(|a| {
                let rel = match check.verdict {
                    BmVerdict::Agreement { a_hat } => (a_hat - a).abs() / a.abs(),
                    BmVerdict::Indistinguishable => f64::INFINITY,
                };
                Verdict {
                    passed: rel <= *tol,
                    check: "|a_hat - expect| / expect <= tol".into(),
                    value: rel,
                    threshold: *tol,
                }
            });
            let mut conventions = ode_conventions(&opts.ode);
            conventions.push(("floor", format!("{:e}", opts.floor)));
            conventions.push(("fit", "log|m1 - m2| = c + e k + p log k + q/k, a_hat = -e/2".into()));
            Ok(Outcome {
                result: json!({ "bc": bc.0, "check": to_value(&check)? }),
                table: Some(table),
                verdict,
                conventions,
            })
        }
    }
}
