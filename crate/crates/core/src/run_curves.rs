//! Wicket-conditioned average scoring curves and the zero-intercept
//! polynomial `f(x) = a x^3 + b x^2 + c x` fitted to them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ball_log::{trajectory, MatchFormat, MatchRecord, MAX_WICKETS};
use crate::error::{Error, Result};
use crate::lm::solve;

pub const DEFAULT_MIN_SUPPORT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub ball: u32,
    pub mean_score: f64,
    pub n_contributing: usize,
}

/// Mean cumulative score at each legal ball over innings with exactly
/// `wickets` down at that ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WicketCurve {
    pub wickets: u32,
    pub points: Vec<CurvePoint>,
    pub format: MatchFormat,
    pub innings_index: u8,
}

pub fn wicket_curve(
    corpus: &[MatchRecord],
    format: MatchFormat,
    innings_index: u8,
    wickets: u32,
    min_support: usize,
) -> Result<WicketCurve> {
    if wickets > MAX_WICKETS {
        return Err(Error::InvalidRecord(format!("wickets {wickets} > {MAX_WICKETS}")));
    }
    let balls = format.scheduled_balls() as usize;
    let mut sums = vec![0u64; balls];
    let mut counts = vec![0usize; balls];
    let selected = corpus
        .iter()
        .filter(|m| m.format == format && !m.reduced)
        .filter_map(|m| m.innings(innings_index));
    for innings in selected {
        let traj = trajectory(innings, format);
        for p in traj.points.iter().filter(|p| p.wickets == wickets) {
            let i = p.ball as usize - 1;
            sums[i] += u64::from(p.runs);
            counts[i] += 1;
        }
    }
    let points: Vec<CurvePoint> = (0..balls)
        .filter(|&i| counts[i] > 0 && counts[i] >= min_support)
        .map(|i| CurvePoint {
            ball: i as u32 + 1,
            mean_score: sums[i] as f64 / counts[i] as f64,
            n_contributing: counts[i],
        })
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyCurve(format!(
            "{format} innings {innings_index}, {wickets} wickets: no ball reaches support {min_support}"
        )));
    }
    Ok(WicketCurve {
        wickets,
        points,
        format,
        innings_index,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Degree {
    Quadratic,
    Cubic,
}

impl Degree {
    fn powers(self) -> &'static [i32] {
        match self {
            Degree::Quadratic => &[2, 1],
            Degree::Cubic => &[3, 2, 1],
        }
    }
}

impl TryFrom<u8> for Degree {
    type Error = Error;

    fn try_from(d: u8) -> Result<Self> {
        match d {
            2 => Ok(Degree::Quadratic),
            3 => Ok(Degree::Cubic),
            _ => Err(Error::InvalidRecord(format!("degree {d} not in {{2, 3}}"))),
        }
    }
}

impl From<Degree> for u8 {
    fn from(d: Degree) -> u8 {
        match d {
            Degree::Quadratic => 2,
            Degree::Cubic => 3,
        }
    }
}

/// Coefficients of `a x^3 + b x^2 + c x`, `x` in balls. The constant
/// term is always zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub degree: Degree,
    pub rss: f64,
}

impl PolyFit {
    pub fn cubic(a: f64, b: f64, c: f64) -> Self {
        PolyFit {
            a,
            b,
            c,
            degree: Degree::Cubic,
            rss: 0.0,
        }
    }

    pub fn quadratic(b: f64, c: f64) -> Self {
        PolyFit {
            a: 0.0,
            b,
            c,
            degree: Degree::Quadratic,
            rss: 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.a * x + self.b) * x + self.c) * x
    }
}

/// Weighted zero-intercept polynomial least squares via normal equations.
///
/// Ball values are rescaled by the format's scheduled balls before forming
/// the Gram matrix; two rounds of iterative refinement on the raw residuals
/// follow the first solve. Weights are `n_contributing` when `weighted`.
pub fn fit_poly(curve: &WicketCurve, degree: Degree, weighted: bool) -> Result<PolyFit> {
    let data: Vec<(f64, f64, f64)> = curve
        .points
        .iter()
        .map(|p| {
            let w = if weighted { p.n_contributing as f64 } else { 1.0 };
            (f64::from(p.ball), p.mean_score, w)
        })
        .collect();
    fit_points(&data, degree, f64::from(curve.format.scheduled_balls()))
}

/// Core of [`fit_poly`] over `(x, y, weight)` triples; `scale` rescales x.
pub fn fit_points(data: &[(f64, f64, f64)], degree: Degree, scale: f64) -> Result<PolyFit> {
    let powers = degree.powers();
    let k = powers.len();
    if data.len() < k + 1 {
        return Err(Error::InsufficientData(format!(
            "{} points for a degree-{} fit",
            data.len(),
            u8::from(degree)
        )));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidRecord(format!("scale {scale}")));
    }
    // Rows sorted by x so the sums do not depend on input order.
    let mut rows: Vec<(f64, f64, f64)> = data.to_vec();
    rows.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)).then(p.2.total_cmp(&q.2)));

    let basis = |x: f64| -> Vec<f64> { powers.iter().map(|&p| (x / scale).powi(p)).collect() };
    let mut gram = vec![vec![0.0; k]; k];
    for &(x, _, w) in &rows {
        let phi = basis(x);
        for i in 0..k {
            for j in 0..k {
                gram[i][j] += w * phi[i] * phi[j];
            }
        }
    }

    let mut scaled = vec![0.0; k];
    let to_raw = |s: &[f64]| -> PolyFit {
        let mut coef = [0.0; 3];
        for (&p, &v) in powers.iter().zip(s) {
            coef[3 - p as usize] = v / scale.powi(p);
        }
        PolyFit {
            a: coef[0],
            b: coef[1],
            c: coef[2],
            degree,
            rss: 0.0,
        }
    };
    for round in 0..3 {
        let current = to_raw(&scaled);
        let mut rhs = vec![0.0; k];
        for &(x, y, w) in &rows {
            let r = if round == 0 { y } else { y - current.eval(x) };
            for (acc, phi) in rhs.iter_mut().zip(basis(x)) {
                *acc += w * phi * r;
            }
        }
        let delta = solve(gram.clone(), rhs, 1e-12)
            .ok_or_else(|| Error::SingularFit("normal equations are rank deficient".into()))?;
        for (s, d) in scaled.iter_mut().zip(delta) {
            *s += d;
        }
    }

    let mut fit = to_raw(&scaled);
    fit.rss = rows
        .iter()
        .map(|&(x, y, w)| w * (y - fit.eval(x)).powi(2))
        .sum();
    Ok(fit)
}

/// JSON summary of one curve fit; the `target` command reads these back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyFitSummary {
    pub format: MatchFormat,
    pub innings: u8,
    pub wickets: u32,
    pub degree: Degree,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rss: f64,
}

impl PolyFitSummary {
    pub fn new(curve: &WicketCurve, fit: &PolyFit) -> Self {
        PolyFitSummary {
            format: curve.format,
            innings: curve.innings_index,
            wickets: curve.wickets,
            degree: fit.degree,
            a: fit.a,
            b: fit.b,
            c: fit.c,
            rss: fit.rss,
        }
    }

    pub fn fit(&self) -> PolyFit {
        PolyFit {
            a: if self.degree == Degree::Quadratic { 0.0 } else { self.a },
            b: self.b,
            c: self.c,
            degree: self.degree,
            rss: self.rss,
        }
    }
}

/// `ball,mean_score,n_contributing,fitted_value` rows.
pub fn curve_csv(curve: &WicketCurve, fit: Option<&PolyFit>) -> String {
    let mut out = String::from("ball,mean_score,n_contributing,fitted_value\n");
    for p in &curve.points {
        let fitted = fit
            .map(|f| f.eval(f64::from(p.ball)).to_string())
            .unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", p.ball, p.mean_score, p.n_contributing, fitted);
    }
    out
}
