//! Innings-total histograms and the three-parameter normal curve
//! `A / (sqrt(2 pi) sigma) * exp(-(x - xi)^2 / (2 sigma^2))`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ball_log::{trajectory, MatchFormat, MatchRecord};
use crate::error::{Error, Result};
use crate::lm::{levenberg_marquardt, LmSettings, Model};

/// Default histogram bin width in runs.
pub fn default_bin_width(format: MatchFormat) -> f64 {
    match format {
        MatchFormat::Odi => 20.0,
        MatchFormat::T20i | MatchFormat::Ipl => 10.0,
    }
}

/// Innings totals for one (format, innings) cell, in corpus order.
pub fn totals(corpus: &[MatchRecord], format: MatchFormat, innings_index: u8) -> Result<Vec<u32>> {
    let out: Vec<u32> = corpus
        .iter()
        .filter(|m| m.format == format)
        .filter_map(|m| m.innings(innings_index))
        .map(|inn| trajectory(inn, format).total)
        .collect();
    if out.is_empty() {
        return Err(Error::EmptySelection(format!(
            "no {format} innings {innings_index} in corpus"
        )));
    }
    Ok(out)
}

/// Uniform-width histogram with left-closed, right-open bins.
///
/// Counts are stored as reals so synthetic or externally binned data can be
/// fitted through the same path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub lower_edges: Vec<f64>,
    pub counts: Vec<f64>,
    pub n_samples: f64,
    /// Mean and standard deviation of the underlying sample; these seed the
    /// normal fit.
    pub sample_mean: f64,
    pub sample_sd: f64,
}

impl Histogram {
    /// Histogram from pre-binned counts starting at `lowest_edge`. Sample
    /// moments are taken from bin centers.
    pub fn from_counts(lowest_edge: f64, bin_width: f64, counts: Vec<f64>) -> Result<Self> {
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::InvalidRecord(format!("bin width {bin_width}")));
        }
        if counts.is_empty() {
            return Err(Error::EmptySelection("histogram has no bins".into()));
        }
        if counts.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidRecord("negative bin count".into()));
        }
        let lower_edges: Vec<f64> = (0..counts.len())
            .map(|i| lowest_edge + i as f64 * bin_width)
            .collect();
        let n: f64 = counts.iter().sum();
        let centers = lower_edges.iter().map(|e| e + 0.5 * bin_width);
        let mean = if n > 0.0 {
            centers.clone().zip(&counts).map(|(x, c)| x * c).sum::<f64>() / n
        } else {
            lowest_edge
        };
        let var = if n > 1.0 {
            centers.zip(&counts).map(|(x, c)| c * (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Histogram {
            bin_width,
            lower_edges,
            counts,
            n_samples: n,
            sample_mean: mean,
            sample_sd: var.sqrt(),
        })
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.lower_edges.iter().map(move |e| e + 0.5 * self.bin_width)
    }

    pub fn nonempty_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0.0).count()
    }
}

pub fn build_histogram<T: Copy + Into<f64>>(values: &[T], bin_width: f64) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::EmptySelection("no values to bin".into()));
    }
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(Error::InvalidRecord(format!("bin width {bin_width}")));
    }
    let xs: Vec<f64> = values.iter().map(|&v| v.into()).collect();
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lowest = (min / bin_width).floor() * bin_width;
    let bin_of = |x: f64| ((x - lowest) / bin_width).floor() as usize;
    let n_bins = bin_of(max) + 1;
    let mut counts = vec![0.0; n_bins];
    for &x in &xs {
        counts[bin_of(x)] += 1.0;
    }

    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut hist = Histogram::from_counts(lowest, bin_width, counts)?;
    hist.sample_mean = mean;
    hist.sample_sd = sd;
    Ok(hist)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFit {
    pub xi: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub rss: f64,
}

impl NormalFit {
    pub fn eval(&self, x: f64) -> f64 {
        normal_curve(x, self.xi, self.sigma, self.amplitude)
    }
}

pub fn normal_curve(x: f64, xi: f64, sigma: f64, amplitude: f64) -> f64 {
    let z = (x - xi) / sigma;
    amplitude / ((2.0 * PI).sqrt() * sigma) * (-0.5 * z * z).exp()
}

const MIN_SIGMA: f64 = 1e-9;

struct NormalModel {
    centers: Vec<f64>,
    counts: Vec<f64>,
}

impl Model for NormalModel {
    fn n_residuals(&self) -> usize {
        self.centers.len()
    }

    fn eval(&self, p: &[f64], r: &mut [f64], jac: &mut [Vec<f64>]) -> bool {
        let (xi, sigma, amp) = (p[0], p[1], p[2]);
        if !(sigma > 0.0) || !xi.is_finite() || !amp.is_finite() {
            return false;
        }
        for (i, (&x, &y)) in self.centers.iter().zip(&self.counts).enumerate() {
            let f = normal_curve(x, xi, sigma, amp);
            let d = x - xi;
            r[i] = y - f;
            jac[i][0] = f * d / (sigma * sigma);
            jac[i][1] = f * (d * d / sigma.powi(3) - 1.0 / sigma);
            jac[i][2] = if amp != 0.0 {
                f / amp
            } else {
                normal_curve(x, xi, sigma, 1.0)
            };
        }
        true
    }
}

/// Least-squares fit of the normal curve to bin counts at bin centers.
///
/// Starts from the sample mean, sample standard deviation and
/// `n_samples * bin_width`.
pub fn fit_normal(hist: &Histogram) -> Result<NormalFit> {
    let nonempty = hist.nonempty_bins();
    if nonempty < 4 {
        return Err(Error::InsufficientData(format!(
            "{nonempty} nonempty bins, need at least 4"
        )));
    }
    let sigma0 = if hist.sample_sd > 0.0 {
        hist.sample_sd
    } else {
        hist.bin_width
    };
    let init = [hist.sample_mean, sigma0, hist.n_samples * hist.bin_width];
    let model = NormalModel {
        centers: hist.centers().collect(),
        counts: hist.counts.clone(),
    };
    let out = levenberg_marquardt(&model, &init, LmSettings::default())
        .ok_or_else(|| Error::DegenerateFit("invalid starting point".into()))?;
    let (xi, sigma, amplitude) = (out.params[0], out.params[1], out.params[2]);
    if sigma < MIN_SIGMA {
        return Err(Error::DegenerateFit(format!("sigma collapsed to {sigma}")));
    }
    if !(amplitude > 0.0) {
        return Err(Error::DegenerateFit(format!("amplitude {amplitude}")));
    }
    Ok(NormalFit {
        xi,
        sigma,
        amplitude,
        rss: out.rss,
    })
}

/// JSON summary written next to each histogram export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFitSummary {
    pub xi: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub rss: f64,
    pub n_samples: f64,
    pub bin_width: f64,
}

impl NormalFitSummary {
    pub fn new(hist: &Histogram, fit: &NormalFit) -> Self {
        NormalFitSummary {
            xi: fit.xi,
            sigma: fit.sigma,
            amplitude: fit.amplitude,
            rss: fit.rss,
            n_samples: hist.n_samples,
            bin_width: hist.bin_width,
        }
    }
}

/// `bin_center,count,fitted_value` rows. The fitted column is empty when
/// no fit is available.
pub fn histogram_csv(hist: &Histogram, fit: Option<&NormalFit>) -> String {
    let mut out = String::from("bin_center,count,fitted_value\n");
    for (x, c) in hist.centers().zip(&hist.counts) {
        let fitted = fit.map(|f| f.eval(x).to_string()).unwrap_or_default();
        let _ = writeln!(out, "{x},{c},{fitted}");
    }
    out
}
