//! Python bindings for `rainrule`.
//!
//! Formats are passed as strings ("ODI", "T20I", "IPL", case-insensitive).
//! Library errors surface as `RainruleError`, a `ValueError` subclass.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rainrule::ball_log::{self, MatchFormat};
use rainrule::{dl_reference, run_curves, score_stats, target_engine};

create_exception!(rainrule_py, RainruleError, PyValueError);

fn err(e: rainrule::Error) -> PyErr {
    RainruleError::new_err(e.to_string())
}

fn format_arg(s: &str) -> PyResult<MatchFormat> {
    s.parse().map_err(err)
}

/// Zero-intercept scoring curve `a x^3 + b x^2 + c x` in balls.
#[pyclass(frozen, module = "rainrule_py")]
pub struct PolyFit {
    inner: run_curves::PolyFit,
}

#[pymethods]
impl PolyFit {
    #[new]
    #[pyo3(signature = (a, b, c, degree = 3))]
    fn new(a: f64, b: f64, c: f64, degree: u8) -> PyResult<Self> {
        let inner = match run_curves::Degree::try_from(degree).map_err(err)? {
            run_curves::Degree::Cubic => run_curves::PolyFit::cubic(a, b, c),
            run_curves::Degree::Quadratic => {
                if a != 0.0 {
                    return Err(RainruleError::new_err("a quadratic fit has a = 0"));
                }
                run_curves::PolyFit::quadratic(b, c)
            }
        };
        Ok(PolyFit { inner })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn degree(&self) -> u8 {
        match self.inner.degree {
            run_curves::Degree::Quadratic => 2,
            run_curves::Degree::Cubic => 3,
        }
    }

    #[getter]
    fn rss(&self) -> f64 {
        self.inner.rss
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn __repr__(&self) -> String {
        format!("PolyFit(a={}, b={}, c={}, degree={})", self.a(), self.b(), self.c(), self.degree())
    }
}

#[pyclass(frozen, module = "rainrule_py")]
pub struct InterruptionScenario {
    inner: target_engine::InterruptionScenario,
}

#[pymethods]
impl InterruptionScenario {
    /// `later_gaps` lists further `(from, to)` ball intervals lost after `m`.
    #[new]
    #[pyo3(signature = (n, m, total_balls, target_score, current_score, wickets = 0, later_gaps = Vec::new()))]
    fn new(
        n: u32,
        m: u32,
        total_balls: u32,
        target_score: u32,
        current_score: u32,
        wickets: u32,
        later_gaps: Vec<(u32, u32)>,
    ) -> PyResult<Self> {
        let mut inner =
            target_engine::InterruptionScenario::new(n, m, total_balls, target_score, current_score, wickets)
                .map_err(err)?;
        inner.later_gaps = later_gaps
            .into_iter()
            .map(|(from, to)| target_engine::Gap { from, to })
            .collect();
        inner.validate().map_err(err)?;
        Ok(InterruptionScenario { inner })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m
    }

    #[getter]
    fn total_balls(&self) -> u32 {
        self.inner.total_balls
    }
}

#[pyclass(frozen, get_all, module = "rainrule_py")]
pub struct RevisedTarget {
    ratio: f64,
    runs_remaining: f64,
    revised_total: i64,
    to_win: i64,
}

#[pymethods]
impl RevisedTarget {
    fn __repr__(&self) -> String {
        format!(
            "RevisedTarget(ratio={}, runs_remaining={}, revised_total={}, to_win={})",
            self.ratio, self.runs_remaining, self.revised_total, self.to_win
        )
    }
}

#[pyfunction]
fn area_full(fit: PyRef<'_, PolyFit>, total_balls: u32) -> f64 {
    target_engine::area_full(&fit.inner, total_balls)
}

#[pyfunction]
fn area_interrupted(fit: PyRef<'_, PolyFit>, n: u32, m: u32, total_balls: u32) -> PyResult<f64> {
    target_engine::area_interrupted(&fit.inner, n, m, total_balls).map_err(err)
}

#[pyfunction]
fn resource_ratio(fit: PyRef<'_, PolyFit>, scenario: PyRef<'_, InterruptionScenario>) -> PyResult<f64> {
    target_engine::resource_ratio(&fit.inner, &scenario.inner).map_err(err)
}

#[pyfunction]
fn revise_target(
    fit: PyRef<'_, PolyFit>,
    scenario: PyRef<'_, InterruptionScenario>,
) -> PyResult<RevisedTarget> {
    let r = target_engine::revise_target(&fit.inner, &scenario.inner).map_err(err)?;
    Ok(RevisedTarget {
        ratio: r.ratio,
        runs_remaining: r.runs_remaining,
        revised_total: r.revised_total,
        to_win: r.to_win(),
    })
}

#[pyclass(frozen, module = "rainrule_py")]
pub struct Match {
    inner: ball_log::MatchRecord,
}

#[pymethods]
impl Match {
    #[getter]
    fn match_id(&self) -> &str {
        &self.inner.match_id
    }

    #[getter]
    fn format(&self) -> &'static str {
        self.inner.format.name()
    }

    #[getter]
    fn date(&self) -> Option<String> {
        self.inner.date.map(|d| d.to_string())
    }

    #[getter]
    fn teams(&self) -> Vec<String> {
        self.inner.teams.clone()
    }

    #[getter]
    fn reduced(&self) -> bool {
        self.inner.reduced
    }

    #[getter]
    fn innings_count(&self) -> usize {
        self.inner.innings.len()
    }

    fn total(&self, innings: u8) -> PyResult<u32> {
        Ok(self.innings(innings)?.total_runs())
    }

    /// `(ball, runs, wickets)` after each legal ball.
    fn trajectory(&self, innings: u8) -> PyResult<Vec<(u32, u32, u32)>> {
        let t = ball_log::trajectory(self.innings(innings)?, self.inner.format);
        Ok(t.points.iter().map(|p| (p.ball, p.runs, p.wickets)).collect())
    }

    fn __repr__(&self) -> String {
        format!("Match({:?}, {})", self.inner.match_id, self.inner.format)
    }
}

impl Match {
    fn innings(&self, index: u8) -> PyResult<&ball_log::InningsRecord> {
        self.inner
            .innings(index)
            .ok_or_else(|| RainruleError::new_err(format!("no innings {index}")))
    }
}

#[pyclass(frozen, module = "rainrule_py")]
pub struct Corpus {
    matches: Vec<ball_log::MatchRecord>,
    diagnostics: Vec<(String, String)>,
}

#[pymethods]
impl Corpus {
    fn __len__(&self) -> usize {
        self.matches.len()
    }

    #[getter]
    fn matches(&self) -> Vec<Match> {
        self.matches.iter().map(|m| Match { inner: m.clone() }).collect()
    }

    /// `(source, message)` for every file that failed to parse.
    #[getter]
    fn diagnostics(&self) -> Vec<(String, String)> {
        self.diagnostics.clone()
    }

    fn count(&self, format: &str) -> PyResult<usize> {
        let f = format_arg(format)?;
        Ok(self.matches.iter().filter(|m| m.format == f).count())
    }
}

#[pyfunction]
#[pyo3(signature = (raw, format = None))]
fn parse_match(raw: &[u8], format: Option<&str>) -> PyResult<Match> {
    let hint = format.map(format_arg).transpose()?;
    let parsed = ball_log::parse_match(raw, hint).map_err(err)?;
    Ok(Match {
        inner: parsed.record,
    })
}

#[pyfunction]
#[pyo3(signature = (path, format = None))]
fn load_corpus(py: Python<'_>, path: PathBuf, format: Option<&str>) -> PyResult<Corpus> {
    let filter = format.map(format_arg).transpose()?;
    let corpus = py
        .detach(|| ball_log::load_corpus(&path, filter))
        .map_err(err)?;
    Ok(Corpus {
        matches: corpus.matches,
        diagnostics: corpus
            .diagnostics
            .into_iter()
            .map(|d| (d.source, d.message))
            .collect(),
    })
}

#[pyfunction]
fn innings_totals(corpus: PyRef<'_, Corpus>, format: &str, innings: u8) -> PyResult<Vec<u32>> {
    score_stats::totals(&corpus.matches, format_arg(format)?, innings).map_err(err)
}

#[pyclass(frozen, get_all, module = "rainrule_py")]
pub struct NormalFit {
    xi: f64,
    sigma: f64,
    amplitude: f64,
    rss: f64,
    n_samples: f64,
    bin_width: f64,
    lower_edges: Vec<f64>,
    counts: Vec<f64>,
}

#[pymethods]
impl NormalFit {
    fn __call__(&self, x: f64) -> f64 {
        score_stats::normal_curve(x, self.xi, self.sigma, self.amplitude)
    }
}

/// Histogram `values` with bins of `bin_width` and fit the normal curve.
#[pyfunction]
fn fit_normal(values: Vec<f64>, bin_width: f64) -> PyResult<NormalFit> {
    let hist = score_stats::build_histogram(&values, bin_width).map_err(err)?;
    let fit = score_stats::fit_normal(&hist).map_err(err)?;
    Ok(NormalFit {
        xi: fit.xi,
        sigma: fit.sigma,
        amplitude: fit.amplitude,
        rss: fit.rss,
        n_samples: hist.n_samples,
        bin_width: hist.bin_width,
        lower_edges: hist.lower_edges,
        counts: hist.counts,
    })
}

/// `(ball, mean_score, n_contributing)` for innings with exactly `wickets` down.
#[pyfunction]
#[pyo3(signature = (corpus, format, innings, wickets, min_support = run_curves::DEFAULT_MIN_SUPPORT))]
fn wicket_curve(
    corpus: PyRef<'_, Corpus>,
    format: &str,
    innings: u8,
    wickets: u32,
    min_support: usize,
) -> PyResult<Vec<(u32, f64, usize)>> {
    let c = run_curves::wicket_curve(&corpus.matches, format_arg(format)?, innings, wickets, min_support)
        .map_err(err)?;
    Ok(c.points
        .iter()
        .map(|p| (p.ball, p.mean_score, p.n_contributing))
        .collect())
}

/// Fit a zero-intercept polynomial to `(ball, mean, weight)` points.
#[pyfunction]
#[pyo3(signature = (points, format, degree = 3))]
fn fit_poly(points: Vec<(f64, f64, f64)>, format: &str, degree: u8) -> PyResult<PolyFit> {
    let degree = run_curves::Degree::try_from(degree).map_err(err)?;
    let scale = f64::from(format_arg(format)?.scheduled_balls());
    let inner = run_curves::fit_points(&points, degree, scale).map_err(err)?;
    Ok(PolyFit { inner })
}

#[pyclass(frozen, get_all, module = "rainrule_py")]
pub struct DlCurve {
    wickets: u32,
    z0: f64,
    decay: f64,
    support: usize,
}

#[pymethods]
impl DlCurve {
    #[new]
    #[pyo3(signature = (wickets, z0, decay, support = 0))]
    fn new(wickets: u32, z0: f64, decay: f64, support: usize) -> Self {
        DlCurve {
            wickets,
            z0,
            decay,
            support,
        }
    }

    fn __call__(&self, overs_remaining: f64) -> f64 {
        self.curve().z(overs_remaining)
    }
}

impl DlCurve {
    fn curve(&self) -> dl_reference::DlCurve {
        dl_reference::DlCurve {
            wickets: self.wickets,
            z0: self.z0,
            decay: self.decay,
            support: self.support,
        }
    }
}

#[pyfunction]
#[pyo3(signature = (corpus, format, min_support = run_curves::DEFAULT_MIN_SUPPORT))]
fn fit_dl_family(corpus: PyRef<'_, Corpus>, format: &str, min_support: usize) -> PyResult<Vec<DlCurve>> {
    let fam = dl_reference::fit_dl_family(&corpus.matches, format_arg(format)?, min_support).map_err(err)?;
    Ok(fam
        .curves
        .into_iter()
        .map(|c| DlCurve {
            wickets: c.wickets,
            z0: c.z0,
            decay: c.decay,
            support: c.support,
        })
        .collect())
}

/// Resource percentages as `rows[overs_remaining][wickets]`.
#[pyfunction]
fn resource_table(curves: Vec<PyRef<'_, DlCurve>>, max_overs: u32) -> PyResult<Vec<Vec<f64>>> {
    let family: Vec<_> = curves.iter().map(|c| c.curve()).collect();
    let t = dl_reference::resource_table(&family, max_overs).map_err(err)?;
    Ok(t.rows.iter().map(|r| r.to_vec()).collect())
}

#[pymodule]
fn rainrule_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RainruleError", m.py().get_type::<RainruleError>())?;
    m.add_class::<PolyFit>()?;
    m.add_class::<InterruptionScenario>()?;
    m.add_class::<RevisedTarget>()?;
    m.add_class::<Match>()?;
    m.add_class::<Corpus>()?;
    m.add_class::<NormalFit>()?;
    m.add_class::<DlCurve>()?;
    m.add_function(wrap_pyfunction!(area_full, m)?)?;
    m.add_function(wrap_pyfunction!(area_interrupted, m)?)?;
    m.add_function(wrap_pyfunction!(resource_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(revise_target, m)?)?;
    m.add_function(wrap_pyfunction!(parse_match, m)?)?;
    m.add_function(wrap_pyfunction!(load_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(innings_totals, m)?)?;
    m.add_function(wrap_pyfunction!(fit_normal, m)?)?;
    m.add_function(wrap_pyfunction!(wicket_curve, m)?)?;
    m.add_function(wrap_pyfunction!(fit_poly, m)?)?;
    m.add_function(wrap_pyfunction!(fit_dl_family, m)?)?;
    m.add_function(wrap_pyfunction!(resource_table, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyDict;

    /// Run Python `code` with the module bound to `rr`; assertions inside
    /// the snippet surface as test failures.
    fn run(code: &str) {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "rainrule_py").unwrap();
            rainrule_py(&m).unwrap();
            let globals = PyDict::new(py);
            globals.set_item("rr", m).unwrap();
            globals
                .set_item("fixture_dir", concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures"))
                .unwrap();
            let code = std::ffi::CString::new(code).unwrap();
            if let Err(e) = py.run(&code, Some(&globals), None) {
                e.print(py);
                panic!("python snippet failed");
            }
        });
    }

    #[test]
    fn worked_example() {
        run(r#"
fit = rr.PolyFit(-0.0031, 1.0298, 0.0)
s = rr.InterruptionScenario(120, 180, 300, 275, 100, wickets=2)
r = rr.revise_target(fit, s)
assert r.revised_total == 230 and r.to_win == 231, r
assert 0.745 <= r.ratio <= 0.750
assert abs(rr.area_full(fit, 300) - 2990700.0) < 1e-6
assert abs(rr.area_interrupted(fit, 120, 180, 300) - 2234793.6) < 0.1
assert rr.resource_ratio(fit, rr.InterruptionScenario(120, 120, 300, 275, 100)) == 1.0
"#);
    }

    #[test]
    fn errors_are_value_errors() {
        run(r#"
try:
    rr.InterruptionScenario(180, 120, 300, 275, 100)
    raise SystemExit("accepted m < n")
except rr.RainruleError as e:
    assert isinstance(e, ValueError)
try:
    rr.parse_match(b'{"info": ', "ODI")
    raise SystemExit("accepted truncated json")
except ValueError:
    pass
"#);
    }

    #[test]
    fn corpus_curves_and_baseline() {
        run(r#"
import os
c = rr.load_corpus(fixture_dir)
assert len(c) == 6, len(c)
assert c.count("odi") == 3
assert any(src.endswith("corrupt.json") for src, _ in c.diagnostics)
m = [x for x in c.matches if x.match_id == "wide_odi"][0]
assert [p[1] for p in m.trajectory(1)] == [1, 4, 4, 9, 9, 10]
assert m.total(1) == 10
with open(os.path.join(fixture_dir, "tiny_odi.json"), "rb") as f:
    t = rr.parse_match(f.read())
assert t.format == "ODI" and t.innings_count == 2
assert rr.innings_totals(c, "ODI", 1) == [12, 8, 10]
pts = rr.wicket_curve(c, "ODI", 1, 0, min_support=1)
assert pts[0][0] == 1
fit = rr.fit_poly([(x, 0.5 * x + 1e-3 * x * x, 1.0) for x in range(1, 301)], "ODI", degree=2)
assert abs(fit.c - 0.5) < 1e-9 and abs(fit.b - 1e-3) < 1e-9 and fit(0.0) == 0.0
"#);
    }

    #[test]
    fn normal_and_resource_table() {
        run(r#"
import math
values = []
for i in range(-40, 41):
    values += [200 + i] * int(round(1000 * math.exp(-0.5 * (i / 15) ** 2)))
n = rr.fit_normal(values, 5.0)
assert abs(n.xi - 200) < 1.0 and abs(n.sigma - 15) < 1.5, (n.xi, n.sigma)
assert sum(n.counts) == len(values) == n.n_samples
curves = [rr.DlCurve(w, 280.0 - 25 * w, 0.035 + 0.01 * w) for w in range(10)]
t = rr.resource_table(curves, 50)
assert len(t) == 51 and len(t[0]) == 11
assert abs(t[50][0] - 100.0) < 1e-12 and all(v == 0.0 for v in t[0])
assert all(row[w] >= row[w + 1] for row in t for w in range(10))
assert abs(curves[1](10.0) - 255.0 * (1 - math.exp(-0.45))) < 1e-9
"#);
    }
}
