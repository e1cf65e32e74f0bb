//! Exponential resource baseline `Z(u) = Z0(w) * (1 - exp(-b(w) u))`, with
//! `u` in overs remaining and `w` wickets lost, re-estimated from the corpus.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ball_log::{trajectory, MatchFormat, MatchRecord, MAX_WICKETS};
use crate::error::{Error, Result};
use crate::lm::{levenberg_marquardt, LmSettings, Model};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlCurve {
    pub wickets: u32,
    /// Asymptotic average runs still to come.
    pub z0: f64,
    /// Exponential decay per over.
    pub decay: f64,
    /// Innings-states that contributed to the fit.
    pub support: usize,
}

impl DlCurve {
    pub fn z(&self, overs_remaining: f64) -> f64 {
        self.z0 * -(-self.decay * overs_remaining).exp_m1()
    }
}

/// Mean runs still to come, by wickets lost and whole overs remaining.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainingRuns {
    pub format: MatchFormat,
    /// `cells[w][u] = (sum of remaining runs, innings count)` for w in 0..10.
    pub cells: Vec<Vec<(f64, usize)>>,
}

impl RemainingRuns {
    pub fn empty(format: MatchFormat) -> Self {
        let overs = format.max_overs() as usize;
        RemainingRuns {
            format,
            cells: vec![vec![(0.0, 0); overs + 1]; MAX_WICKETS as usize],
        }
    }

    pub fn add(&mut self, wickets: u32, overs_remaining: u32, runs: f64) {
        let cell = &mut self.cells[wickets as usize][overs_remaining as usize];
        cell.0 += runs;
        cell.1 += 1;
    }

    /// `(u, mean, count)` for cells with at least `min_support` innings.
    pub fn points(&self, wickets: u32, min_support: usize) -> Vec<(f64, f64, usize)> {
        self.cells[wickets as usize]
            .iter()
            .enumerate()
            .filter(|(_, &(_, n))| n > 0 && n >= min_support)
            .map(|(u, &(sum, n))| (u as f64, sum / n as f64, n))
            .collect()
    }
}

/// Sample remaining runs at each whole-over mark of completed first innings.
///
/// An innings contributes at `u` overs remaining when it had bowled
/// `(max_overs - u) * 6` legal balls with fewer than ten wickets down.
pub fn remaining_runs(corpus: &[MatchRecord], format: MatchFormat) -> RemainingRuns {
    let max_overs = format.max_overs();
    let mut table = RemainingRuns::empty(format);
    let selected = corpus
        .iter()
        .filter(|m| m.format == format && !m.reduced)
        .filter_map(|m| m.innings(1));
    for innings in selected {
        let traj = trajectory(innings, format);
        for u in 0..=max_overs {
            let ball = (max_overs - u) * 6;
            let (runs, wickets) = if ball == 0 {
                (0, 0)
            } else if ball <= traj.completed_balls {
                let p = traj.at(ball).expect("ball within completed balls");
                (p.runs, p.wickets)
            } else {
                continue;
            };
            if wickets < MAX_WICKETS {
                table.add(wickets, u, f64::from(traj.total - runs));
            }
        }
    }
    table
}

struct ExpModel {
    overs: Vec<f64>,
    means: Vec<f64>,
    sqrt_w: Vec<f64>,
}

impl Model for ExpModel {
    fn n_residuals(&self) -> usize {
        self.overs.len()
    }

    // Parameters are (ln z0, ln decay) so both stay positive.
    fn eval(&self, p: &[f64], r: &mut [f64], jac: &mut [Vec<f64>]) -> bool {
        let (z0, decay) = (p[0].exp(), p[1].exp());
        if !z0.is_finite() || !decay.is_finite() || decay == 0.0 {
            return false;
        }
        for i in 0..self.overs.len() {
            let u = self.overs[i];
            let e = (-decay * u).exp();
            let z = z0 * -(-decay * u).exp_m1();
            let s = self.sqrt_w[i];
            r[i] = s * (self.means[i] - z);
            jac[i][0] = s * z;
            jac[i][1] = s * z0 * u * decay * e;
        }
        true
    }
}

/// Weighted least-squares fit of the exponential curve to `(u, mean, count)`.
pub fn fit_dl_curve(wickets: u32, points: &[(f64, f64, usize)]) -> Result<DlCurve> {
    let informative = points.iter().filter(|p| p.0 > 0.0).count();
    if informative < 3 {
        return Err(Error::InsufficientData(format!(
            "{wickets} wickets: {informative} supported overs-remaining marks"
        )));
    }
    let model = ExpModel {
        overs: points.iter().map(|p| p.0).collect(),
        means: points.iter().map(|p| p.1).collect(),
        sqrt_w: points.iter().map(|p| (p.2 as f64).sqrt()).collect(),
    };

    // Coarse scan over decay with z0 solved linearly at each step.
    let mut best: Option<(f64, f64, f64)> = None;
    for k in 0..=240 {
        let decay = 10f64.powf(-4.0 + 4.0 * f64::from(k) / 240.0);
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..model.overs.len() {
            let g = -(-decay * model.overs[i]).exp_m1();
            let w = model.sqrt_w[i].powi(2);
            num += w * g * model.means[i];
            den += w * g * g;
        }
        if den == 0.0 || num <= 0.0 {
            continue;
        }
        let z0 = num / den;
        let rss: f64 = (0..model.overs.len())
            .map(|i| {
                let g = -(-decay * model.overs[i]).exp_m1();
                model.sqrt_w[i].powi(2) * (model.means[i] - z0 * g).powi(2)
            })
            .sum();
        if best.is_none_or(|b| rss < b.2) {
            best = Some((z0, decay, rss));
        }
    }
    let (z0, decay, _) = best.ok_or_else(|| {
        Error::DegenerateFit(format!("{wickets} wickets: no positive remaining runs"))
    })?;
    let settings = LmSettings {
        rel_rss_tol: 1e-14,
        ..LmSettings::default()
    };
    let out = levenberg_marquardt(&model, &[z0.ln(), decay.ln()], settings)
        .ok_or_else(|| Error::DegenerateFit(format!("{wickets} wickets: bad start")))?;
    Ok(DlCurve {
        wickets,
        z0: out.params[0].exp(),
        decay: out.params[1].exp(),
        support: points.iter().map(|p| p.2).sum(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlFamily {
    pub format: MatchFormat,
    pub curves: Vec<DlCurve>,
    /// Pool-adjacent-violators changed at least one z0.
    pub isotonic_adjusted: bool,
    pub diagnostics: Vec<String>,
}

/// Pool adjacent violators for a non-increasing sequence, in place.
/// Returns whether any value changed.
fn pav_non_increasing(values: &mut [f64], weights: &[f64]) -> bool {
    // Blocks of (weighted mean, weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (v2, w2, n2) = blocks[blocks.len() - 1];
            let (v1, w1, n1) = blocks[blocks.len() - 2];
            if v1 >= v2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2, n1 + n2));
        }
    }
    let mut changed = false;
    let mut i = 0;
    for (v, _, n) in blocks {
        for slot in &mut values[i..i + n] {
            changed |= *slot != v;
            *slot = v;
        }
        i += n;
    }
    changed
}

/// Fit one curve per wicket count from an aggregated remaining-runs table.
pub fn fit_dl_points(table: &RemainingRuns, min_support: usize) -> DlFamily {
    let mut curves = Vec::new();
    let mut diagnostics = Vec::new();
    for w in 0..MAX_WICKETS {
        match fit_dl_curve(w, &table.points(w, min_support)) {
            Ok(c) => curves.push(c),
            Err(e) => diagnostics.push(format!("curve omitted: {e}")),
        }
    }
    let mut z0: Vec<f64> = curves.iter().map(|c| c.z0).collect();
    let weights: Vec<f64> = curves.iter().map(|c| c.support as f64).collect();
    let isotonic_adjusted = pav_non_increasing(&mut z0, &weights);
    if isotonic_adjusted {
        diagnostics.push("z0 pooled to be non-increasing in wickets".into());
    }
    for (c, z) in curves.iter_mut().zip(z0) {
        c.z0 = z;
    }
    DlFamily {
        format: table.format,
        curves,
        isotonic_adjusted,
        diagnostics,
    }
}

pub fn fit_dl_family(
    corpus: &[MatchRecord],
    format: MatchFormat,
    min_support: usize,
) -> Result<DlFamily> {
    let table = remaining_runs(corpus, format);
    if table.cells.iter().all(|row| row.iter().all(|c| c.1 == 0)) {
        return Err(Error::EmptySelection(format!(
            "no complete {format} first innings"
        )));
    }
    Ok(fit_dl_points(&table, min_support))
}

/// Resource percentages indexed by overs remaining (0..=max_overs) and
/// wickets lost (0..=10).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceTable {
    pub max_overs: u32,
    /// `rows[u][w]`.
    pub rows: Vec<[f64; 11]>,
}

impl ResourceTable {
    pub fn percentage(&self, overs_remaining: u32, wickets: u32) -> Option<f64> {
        self.rows
            .get(overs_remaining as usize)
            .and_then(|r| r.get(wickets as usize))
            .copied()
    }

    /// Rows from `u = max_overs` down to 0, columns `w = 0..=10`, one
    /// decimal place.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("overs_remaining");
        for w in 0..=MAX_WICKETS {
            let _ = write!(out, ",{w}");
        }
        out.push('\n');
        for u in (0..=self.max_overs).rev() {
            let _ = write!(out, "{u}");
            for v in &self.rows[u as usize] {
                let _ = write!(out, ",{v:.1}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut rows: Vec<(u32, [f64; 11])> = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: i + 2,
                column: None,
                message: e.to_string(),
            })?;
            let bad = |what: &str| Error::Parse {
                line: i + 2,
                column: None,
                message: format!("bad {what}"),
            };
            if rec.len() != 12 {
                return Err(bad("column count"));
            }
            let u: u32 = rec[0].trim().parse().map_err(|_| bad("overs_remaining"))?;
            let mut row = [0.0; 11];
            for (w, cell) in row.iter_mut().enumerate() {
                *cell = rec[w + 1].trim().parse().map_err(|_| bad("percentage"))?;
            }
            rows.push((u, row));
        }
        rows.sort_by_key(|r| r.0);
        let max_overs = rows.last().map(|r| r.0).unwrap_or(0);
        if rows.is_empty() || rows.iter().enumerate().any(|(i, r)| r.0 as usize != i) {
            return Err(Error::Parse {
                line: 1,
                column: None,
                message: "resource table must list every overs-remaining value from 0".into(),
            });
        }
        Ok(ResourceTable {
            max_overs,
            rows: rows.into_iter().map(|r| r.1).collect(),
        })
    }
}

/// `100 * Z(u, w) / Z(max_overs, 0)`.
///
/// Missing wicket counts take the column to their left, and each row is
/// forced non-increasing in wickets by a running minimum, which keeps
/// every column non-decreasing in overs.
pub fn resource_table(family: &[DlCurve], max_overs: u32) -> Result<ResourceTable> {
    let base = family
        .iter()
        .find(|c| c.wickets == 0)
        .ok_or_else(|| Error::IncompleteFamily("no curve for 0 wickets".into()))?;
    let full = base.z(f64::from(max_overs));
    if !(full > 0.0) {
        return Err(Error::DegenerateCurve("zero resources at innings start".into()));
    }
    let mut rows = Vec::with_capacity(max_overs as usize + 1);
    for u in 0..=max_overs {
        let mut row = [0.0; 11];
        let mut ceiling = f64::INFINITY;
        for w in 0..MAX_WICKETS {
            let value = match family.iter().find(|c| c.wickets == w) {
                Some(c) => 100.0 * c.z(f64::from(u)) / full,
                None => ceiling,
            };
            ceiling = ceiling.min(value).clamp(0.0, 100.0);
            row[w as usize] = ceiling;
        }
        rows.push(row);
    }
    Ok(ResourceTable { max_overs, rows })
}
