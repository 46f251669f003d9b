use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WeylError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    /// Local cubic Hermite with fourth-order finite-difference slopes: C¹,
    /// with `O(h⁴)` error for smooth data.
    Cubic,
}

/// How the potential continues outside the sampled interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// `V = 0` outside `[x0, x1]`.
    CompactSupport,
    /// The samples cover exactly one period.
    Periodic { period: f64 },
    /// `V = value` outside `[x0, x1]`.
    Constant { value: f64 },
}

/// A potential sampled on a uniform grid over `[x0, x1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Potential {
    x0: f64,
    x1: f64,
    samples: Vec<f64>,
    interpolation: Interpolation,
    tail: Tail,
    #[serde(skip)]
    slopes: Vec<f64>,
}

impl Potential {
    pub fn new(
        x0: f64,
        x1: f64,
        samples: Vec<f64>,
        interpolation: Interpolation,
        tail: Tail,
    ) -> Result<Self> {
        if !(x1 > x0) || !x0.is_finite() || !x1.is_finite() {
            return Err(WeylError::domain(format!("invalid domain [{x0}, {x1}]")));
        }
        if samples.len() < 4 {
            return Err(WeylError::domain(format!(
                "need at least 4 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(WeylError::domain("potential samples must be finite"));
        }
        if let Tail::Periodic { period } = tail {
            if ((x1 - x0) - period).abs() > 1e-12 * period.abs().max(1.0) {
                return Err(WeylError::domain(format!(
                    "periodic samples must span exactly one period ({period}), domain has length {}",
                    x1 - x0
                )));
            }
            let (first, last) = (samples[0], samples[samples.len() - 1]);
            if (first - last).abs() > 1e-12 * first.abs().max(last.abs()).max(1.0) {
                return Err(WeylError::domain(
                    "periodic samples must match at the two ends",
                ));
            }
        }
        let mut p = Potential {
            x0,
            x1,
            samples,
            interpolation,
            tail,
            slopes: vec![],
        };
        p.slopes = p.compute_slopes();
        Ok(p)
    }

    /// Sample `f` at `n` uniform points of `[x0, x1]`.
    pub fn from_fn<F: Fn(f64) -> f64>(
        x0: f64,
        x1: f64,
        n: usize,
        f: F,
        interpolation: Interpolation,
        tail: Tail,
    ) -> Result<Self> {
        let h = (x1 - x0) / (n.max(2) - 1) as f64;
        let mut samples: Vec<f64> = (0..n).map(|k| f(x0 + k as f64 * h)).collect();
        if let (Tail::Periodic { .. }, Some(&first)) = (tail, samples.first()) {
            *samples.last_mut().unwrap() = first;
        }
        Potential::new(x0, x1, samples, interpolation, tail)
    }

    /// `V ≡ c` on `[x0, x1]` continued by the constant `c`.
    pub fn constant(c: f64, x0: f64, x1: f64) -> Self {
        Potential::new(
            x0,
            x1,
            vec![c; 4],
            Interpolation::Linear,
            Tail::Constant { value: c },
        )
        .expect("valid constant potential")
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x0, self.x1)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn spacing(&self) -> f64 {
        (self.x1 - self.x0) / (self.samples.len() - 1) as f64
    }

    pub fn min_sample(&self) -> f64 {
        let m = self.samples.iter().cloned().fold(f64::INFINITY, f64::min);
        match self.tail {
            Tail::CompactSupport => m.min(0.0),
            Tail::Constant { value } => m.min(value),
            Tail::Periodic { .. } => m,
        }
    }

    pub fn max_sample(&self) -> f64 {
        let m = self.samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        match self.tail {
            Tail::CompactSupport => m.max(0.0),
            Tail::Constant { value } => m.max(value),
            Tail::Periodic { .. } => m,
        }
    }

    pub fn mean_sample(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Constant value of the potential beyond `x1` (and before `x0`), if the
    /// tail is not periodic.
    pub fn tail_value(&self) -> Option<f64> {
        match self.tail {
            Tail::CompactSupport => Some(0.0),
            Tail::Constant { value } => Some(value),
            Tail::Periodic { .. } => None,
        }
    }

    fn compute_slopes(&self) -> Vec<f64> {
        let f = &self.samples;
        let n = f.len();
        let h = self.spacing();
        let periodic = matches!(self.tail, Tail::Periodic { .. });
        // In the periodic case index n-1 coincides with index 0.
        let at = |i: isize| -> f64 {
            if periodic {
                let m = (n - 1) as isize;
                f[i.rem_euclid(m) as usize]
            } else {
                f[i as usize]
            }
        };
        (0..n as isize)
            .map(|i| {
                let ni = n as isize;
                if periodic || (i >= 2 && i + 2 < ni) {
                    (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h)
                } else if n < 5 {
                    if i == 0 {
                        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
                    } else if i == ni - 1 {
                        (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h)
                    } else {
                        (at(i + 1) - at(i - 1)) / (2.0 * h)
                    }
                } else if i == 0 {
                    (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4))
                        / (12.0 * h)
                } else if i == 1 {
                    (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / (12.0 * h)
                } else if i == ni - 1 {
                    (25.0 * at(i) - 48.0 * at(i - 1) + 36.0 * at(i - 2) - 16.0 * at(i - 3)
                        + 3.0 * at(i - 4))
                        / (12.0 * h)
                } else {
                    (3.0 * at(i + 1) + 10.0 * at(i) - 18.0 * at(i - 1) + 6.0 * at(i - 2)
                        - at(i - 3))
                        / (12.0 * h)
                }
            })
            .collect()
    }

    /// Interpolated value of the potential at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let x = match self.tail {
            Tail::Periodic { period } => self.x0 + (x - self.x0).rem_euclid(period),
            Tail::CompactSupport if x < self.x0 || x > self.x1 => return 0.0,
            Tail::Constant { value } if x < self.x0 || x > self.x1 => return value,
            _ => x,
        };
        let h = self.spacing();
        let n = self.samples.len();
        let s = ((x - self.x0) / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let (f0, f1) = (self.samples[i], self.samples[i + 1]);
        match self.interpolation {
            Interpolation::Linear => f0 + t * (f1 - f0),
            Interpolation::Cubic => {
                let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * f0
                    + (t3 - 2.0 * t2 + t) * d0
                    + (-2.0 * t3 + 3.0 * t2) * f1
                    + (t3 - t2) * d1
            }
        }
    }

    /// Grid knots strictly between `a` and `b` (in either order), ordered
    /// from `a` towards `b`, plus `b` itself. Between consecutive returned
    /// points the potential is a single polynomial piece.
    pub fn segment_points(&self, a: f64, b: f64) -> Vec<f64> {
        let h = self.spacing();
        let (lo, hi) = (a.min(b), a.max(b));
        let mut pts: Vec<f64> = Vec::new();
        let base = self.x0;
        let (kmin, kmax) = match self.tail {
            Tail::Periodic { .. } => (
                ((lo - base) / h).floor() as i64,
                ((hi - base) / h).ceil() as i64,
            ),
            _ => {
                let n = self.samples.len() as i64;
                (
                    (((lo - base) / h).floor() as i64).max(0),
                    (((hi - base) / h).ceil() as i64).min(n - 1),
                )
            }
        };
        let tol = 1e-12 * (hi - lo).max(h);
        for k in kmin..=kmax {
            let x = base + k as f64 * h;
            if x > lo + tol && x < hi - tol {
                pts.push(x);
            }
        }
        if b < a {
            pts.reverse();
        }
        pts.push(b);
        pts
    }

    /// Read the text format: a header `x0 x1 n tail` followed by `n` samples.
    /// `tail` is `compact`, `periodic` or `constant:<value>`; an optional
    /// fifth header field selects `linear` (default) or `cubic`.
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, msg: String| WeylError::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let (hline, header) = lines.next().ok_or_else(|| err(0, "empty file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() < 4 || fields.len() > 5 {
            return Err(err(hline, "header must be `x0 x1 n tail [interp]`".into()));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| err(hline, format!("bad number `{s}`")))
        };
        let x0 = num(fields[0])?;
        let x1 = num(fields[1])?;
        let n: usize = fields[2]
            .parse()
            .map_err(|_| err(hline, format!("bad sample count `{}`", fields[2])))?;
        let tail = match fields[3] {
            "compact" | "compact_support" => Tail::CompactSupport,
            "periodic" => Tail::Periodic { period: x1 - x0 },
            t if t.starts_with("constant:") => Tail::Constant {
                value: num(&t["constant:".len()..])?,
            },
            t => return Err(err(hline, format!("unknown tail `{t}`"))),
        };
        let interpolation = match fields.get(4).copied() {
            None | Some("linear") => Interpolation::Linear,
            Some("cubic") => Interpolation::Cubic,
            Some(s) => return Err(err(hline, format!("unknown interpolation `{s}`"))),
        };
        let mut samples = Vec::with_capacity(n);
        for (line, l) in lines {
            for tok in l.split_whitespace() {
                samples.push(
                    tok.parse::<f64>()
                        .map_err(|_| err(line, format!("bad sample `{tok}`")))?,
                );
            }
        }
        if samples.len() != n {
            return Err(err(
                hline,
                format!("header announces {n} samples, found {}", samples.len()),
            ));
        }
        Potential::new(x0, x1, samples, interpolation, tail)
            .map_err(|e| err(hline, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| WeylError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let tail = match self.tail {
            Tail::CompactSupport => "compact".to_string(),
            Tail::Periodic { .. } => "periodic".to_string(),
            Tail::Constant { value } => format!("constant:{value:e}"),
        };
        let interp = match self.interpolation {
            Interpolation::Linear => "linear",
            Interpolation::Cubic => "cubic",
        };
        let mut out = format!(
            "{:e} {:e} {} {} {}\n",
            self.x0,
            self.x1,
            self.samples.len(),
            tail,
            interp
        );
        for v in &self.samples {
            out.push_str(&format!("{v:.17e}\n"));
        }
        out
    }
}
