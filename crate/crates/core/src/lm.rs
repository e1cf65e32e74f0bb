//! Small dense least-squares machinery shared by the curve fits.
//!
//! Problems here have two or three parameters, so everything works on
//! plain `Vec<f64>` rows; no matrix crate is needed.

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `rel_tol` times the largest
/// diagonal magnitude of the input, i.e. the system is numerically singular.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, rel_tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= rel_tol * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LmSettings {
    pub lambda_start: f64,
    pub lambda_factor: f64,
    pub max_iterations: usize,
    pub rel_rss_tol: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings {
            lambda_start: 1e-3,
            lambda_factor: 10.0,
            max_iterations: 500,
            rel_rss_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    pub rss: f64,
}

/// A model evaluated at a parameter vector: fills `residuals[i] = y_i - f_i(p)`
/// and `jacobian[i][j] = d f_i / d p_j`. Returns `false` for parameters
/// outside the model's domain.
pub(crate) trait Model {
    fn n_residuals(&self) -> usize;
    fn eval(&self, params: &[f64], residuals: &mut [f64], jacobian: &mut [Vec<f64>]) -> bool;
}

fn rss(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Gauss-Newton with Marquardt damping of the normal-matrix diagonal.
///
/// Stops when an accepted step changes RSS by less than `rel_rss_tol`
/// relative, when damping can no longer find a non-increasing step, or
/// after `max_iterations` outer iterations.
pub(crate) fn levenberg_marquardt<M: Model>(model: &M, init: &[f64], cfg: LmSettings) -> Option<LmOutcome> {
    let n_par = init.len();
    let n_res = model.n_residuals();
    let mut params = init.to_vec();
    let mut r = vec![0.0; n_res];
    let mut jac = vec![vec![0.0; n_par]; n_res];
    if !model.eval(&params, &mut r, &mut jac) {
        return None;
    }
    let mut current = rss(&r);
    let mut lambda = cfg.lambda_start;
    let mut trial_r = vec![0.0; n_res];
    let mut trial_jac = vec![vec![0.0; n_par]; n_res];

    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        if current == 0.0 {
            break;
        }
        let mut jtj = vec![vec![0.0; n_par]; n_par];
        let mut jtr = vec![0.0; n_par];
        for (row, &res) in jac.iter().zip(&r) {
            for i in 0..n_par {
                jtr[i] += row[i] * res;
                for j in 0..=i {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        for i in 0..n_par {
            for j in 0..i {
                jtj[j][i] = jtj[i][j];
            }
        }

        let accepted = loop {
            if lambda > 1e16 {
                break false;
            }
            let mut damped = jtj.clone();
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-300);
            }
            let Some(step) = solve(damped, jtr.clone(), 0.0) else {
                lambda *= cfg.lambda_factor;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(&step).map(|(p, s)| p + s).collect();
            if model.eval(&trial, &mut trial_r, &mut trial_jac) {
                let trial_rss = rss(&trial_r);
                if trial_rss <= current {
                    let rel = (current - trial_rss) / current;
                    params = trial;
                    current = trial_rss;
                    std::mem::swap(&mut r, &mut trial_r);
                    std::mem::swap(&mut jac, &mut trial_jac);
                    lambda /= cfg.lambda_factor;
                    break rel >= cfg.rel_rss_tol;
                }
            }
            lambda *= cfg.lambda_factor;
        };
        if !accepted {
            break;
        }
    }
    Some(LmOutcome {
        params,
        rss: current,
    })
}
