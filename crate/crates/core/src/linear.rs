//! Deterministic linear surrogates.
//!
//! Both fits center the features on their sample mean before fitting, so a
//! feature that is constant over the sample gets exactly zero weight and the
//! unpenalized bias absorbs the offset. The returned bias is expressed in the
//! original (uncentered) coordinates.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

/// Gradient-descent settings for the logistic fit. The L2 penalty applies
/// to weights only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    pub reg: f64,
    pub step: f64,
    pub iterations: u32,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            reg: 1e-3,
            step: 0.1,
            iterations: 500,
        }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reg.is_finite() && self.reg >= 0.0) {
            return Err(Error::InvalidFitOptions(format!(
                "regularization must be non-negative, got {}",
                self.reg
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidFitOptions(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidFitOptions("iterations must be positive".into()));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_samples(samples: &[Vec<f64>], targets: &[f64]) -> Result<usize> {
    if samples.is_empty() || samples.len() != targets.len() {
        return Err(Error::InvalidFitOptions(format!(
            "{} samples with {} targets",
            samples.len(),
            targets.len()
        )));
    }
    let dim = samples[0].len();
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    Ok(dim)
}

fn centered(samples: &[Vec<f64>], dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let m = samples.len() as f64;
    let mut mean = vec![0.0; dim];
    for s in samples {
        for (acc, v) in mean.iter_mut().zip(s) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m;
    }
    let xs = samples
        .iter()
        .map(|s| s.iter().zip(&mean).map(|(v, mu)| v - mu).collect())
        .collect();
    (xs, mean)
}

/// L2-regularized logistic regression by full-batch gradient descent from
/// zero. Minimizes `mean(log(1 + e^z) - y z) + reg/2 · |w|²` with
/// `z = w·(x - mean) + b`. Labels must be 0 or 1.
pub fn fit_logistic(samples: &[Vec<f64>], labels: &[f64], config: &LogisticConfig) -> Result<LinearFit> {
    config.validate()?;
    let dim = check_samples(samples, labels)?;
    let (xs, mean) = centered(samples, dim);
    let m = xs.len() as f64;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut grad = vec![0.0; dim];
    for _ in 0..config.iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (x, &y) in xs.iter().zip(labels) {
            let err = sigmoid(dot(&w, x) + b) - y;
            for (g, v) in grad.iter_mut().zip(x) {
                *g += err * v;
            }
            grad_b += err;
        }
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= config.step * (g / m + config.reg * *wi);
        }
        b -= config.step * grad_b / m;
    }
    let bias = b - dot(&w, &mean);
    Ok(LinearFit { weights: w, bias })
}

/// Ridge regression with an unpenalized intercept. Minimizes
/// `mean((y - w·x - b)²) + reg · |w|²` through the centered normal
/// equations `(XᵀX/m + reg·I) w = Xᵀy/m`.
///
/// Directions with no variance in the sample get zero weight, which picks a
/// least-squares solution when `reg == 0` and the design is rank deficient.
#[allow(clippy::needless_range_loop)]
pub fn fit_ridge(samples: &[Vec<f64>], targets: &[f64], reg: f64) -> Result<LinearFit> {
    if !(reg.is_finite() && reg >= 0.0) {
        return Err(Error::InvalidFitOptions(format!(
            "regularization must be non-negative, got {reg}"
        )));
    }
    let dim = check_samples(samples, targets)?;
    let (xs, mean) = centered(samples, dim);
    let m = xs.len() as f64;
    let y_mean = targets.iter().sum::<f64>() / m;

    let mut a = vec![vec![0.0; dim]; dim];
    let mut rhs = vec![0.0; dim];
    for (x, &y) in xs.iter().zip(targets) {
        let yc = y - y_mean;
        for i in 0..dim {
            rhs[i] += x[i] * yc / m;
            for j in 0..=i {
                a[i][j] += x[i] * x[j] / m;
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            a[j][i] = a[i][j];
        }
        a[i][i] += reg;
    }
    let w = solve_psd(a, rhs);
    let bias = y_mean - dot(&w, &mean);
    Ok(LinearFit { weights: w, bias })
}

/// Solves `A x = b` for symmetric positive semi-definite `A` with a
/// pivot-skipping Cholesky factorization. Pivots that vanish relative to the
/// diagonal scale leave their component at zero.
#[allow(clippy::needless_range_loop)]
fn solve_psd(mut a: Vec<Vec<f64>>, b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let tol = scale * 1e-12;
    let mut active = vec![false; n];
    // in-place lower factor L, A = L Lᵀ over active indices
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            if active[k] {
                d -= a[j][k] * a[j][k];
            }
        }
        if d <= tol || scale == 0.0 {
            for i in j..n {
                a[i][j] = 0.0;
            }
            continue;
        }
        active[j] = true;
        let l = d.sqrt();
        a[j][j] = l;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                if active[k] {
                    s -= a[i][k] * a[j][k];
                }
            }
            a[i][j] = s / l;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        if !active[i] {
            continue;
        }
        let mut s = b[i];
        for k in 0..i {
            s -= a[i][k] * y[k];
        }
        y[i] = s / a[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        if !active[i] {
            continue;
        }
        let mut s = y[i];
        for k in i + 1..n {
            s -= a[k][i] * x[k];
        }
        x[i] = s / a[i][i];
    }
    x
}
