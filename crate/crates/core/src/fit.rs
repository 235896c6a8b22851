//! Damped least squares (Levenberg–Marquardt) with a numeric Jacobian.
//!
//! Deterministic: no randomness, fixed damping schedule, fixed finite
//! difference steps. Good enough for the handful-of-parameter spectroscopy
//! fits in this crate.

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative SSR improvement below which the fit stops.
    pub ftol: f64,
    /// Relative step size below which the fit stops.
    pub xtol: f64,
    pub lambda_init: f64,
    /// Relative finite-difference step for the Jacobian.
    pub fd_rel_step: f64,
    /// Per-parameter absolute finite-difference floors.
    pub fd_abs_floor: Vec<f64>,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            ftol: 1e-12,
            xtol: 1e-11,
            lambda_init: 1e-3,
            fd_rel_step: 1e-7,
            fd_abs_floor: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub params: Vec<f64>,
    pub ssr: f64,
    pub iterations: usize,
    /// Covariance of the estimates, s²(JᵀJ)⁻¹ with s² = SSR/(m−n);
    /// `None` when m ≤ n or JᵀJ is singular.
    pub covariance: Option<Array2<f64>>,
}

impl LmResult {
    /// 1σ uncertainties from the diagonal of the covariance.
    pub fn sigmas(&self) -> Vec<f64> {
        match &self.covariance {
            Some(c) => (0..self.params.len())
                .map(|k| c[(k, k)].max(0.0).sqrt())
                .collect(),
            None => vec![f64::NAN; self.params.len()],
        }
    }
}

fn ssr_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn jacobian<F>(residuals: &F, x: &[f64], r0: &[f64], opts: &LmOptions) -> Result<Array2<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = r0.len();
    let n = x.len();
    let mut j = Array2::zeros((m, n));
    for k in 0..n {
        let floor = opts.fd_abs_floor.get(k).copied().unwrap_or(1e-12);
        let h = (opts.fd_rel_step * x[k].abs()).max(floor);
        let mut xk = x.to_vec();
        xk[k] += h;
        let rk = residuals(&xk)?;
        if rk.len() != m {
            return Err(Error::InvalidData(
                "residual vector changed length during fit".into(),
            ));
        }
        for i in 0..m {
            j[(i, k)] = (rk[i] - r0[i]) / h;
        }
    }
    Ok(j)
}

/// Minimize ‖residuals(x)‖² from `x0` with multiplicative damping on the
/// normal equations: (JᵀJ + λ·diag(JᵀJ))δ = −Jᵀr.
pub fn levenberg_marquardt<F>(residuals: F, x0: &[f64], opts: &LmOptions) -> Result<LmResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if x0.is_empty() {
        return Err(Error::InvalidData("no fit parameters".into()));
    }
    let mut x = x0.to_vec();
    let mut r = residuals(&x)?;
    if r.len() < x.len() {
        return Err(Error::InvalidData(format!(
            "{} residuals cannot determine {} parameters",
            r.len(),
            x.len()
        )));
    }
    let mut ssr = ssr_of(&r);
    let mut lambda = opts.lambda_init;
    let n = x.len();

    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..opts.max_iterations {
        iterations = iter + 1;
        let j = jacobian(&residuals, &x, &r, opts)?;
        let jt = j.t();
        let jtj = jt.dot(&j);
        let g = jt.dot(&Array1::from_vec(r.clone()));

        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                let d = jtj[(k, k)];
                a[(k, k)] += lambda * if d > 0.0 { d } else { 1.0 };
            }
            let delta = match a.solve(&g.mapv(|v| -v)) {
                Ok(d) => d,
                Err(_) => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let x_new: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let r_new = residuals(&x_new)?;
            let ssr_new = ssr_of(&r_new);
            if ssr_new.is_finite() && ssr_new < ssr {
                let step_rel = delta
                    .iter()
                    .zip(x.iter())
                    .map(|(d, v)| d.abs() / v.abs().max(1e-300))
                    .fold(0.0f64, f64::max);
                let ssr_rel = (ssr - ssr_new) / ssr.max(1e-300);
                x = x_new;
                r = r_new;
                ssr = ssr_new;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if ssr_rel < opts.ftol || step_rel < opts.xtol || ssr == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if converged {
            break;
        }
        if !improved {
            // No downhill step at any damping: stationary point.
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::FitNonConvergence(opts.max_iterations));
    }

    let j = jacobian(&residuals, &x, &r, opts)?;
    let m = r.len();
    let covariance = if m > n {
        let jtj = j.t().dot(&j);
        let s2 = ssr / (m - n) as f64;
        invert(&jtj).map(|inv| inv.mapv(|v| v * s2))
    } else {
        None
    };
    Ok(LmResult {
        params: x,
        ssr,
        iterations,
        covariance,
    })
}

fn invert(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut inv = Array2::zeros((n, n));
    for k in 0..n {
        let mut e = Array1::zeros(n);
        e[k] = 1.0;
        let col = a.solve(&e).ok()?;
        for i in 0..n {
            inv[(i, k)] = col[i];
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_linear_model() {
        // y = 2x + 1 sampled without noise.
        let xs: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let res = levenberg_marquardt(
            |p| {
                Ok(xs
                    .iter()
                    .zip(ys.iter())
                    .map(|(x, y)| p[0] * x + p[1] - y)
                    .collect())
            },
            &[0.1, -0.3],
            &LmOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(res.params[0], 2.0, max_relative = 1e-8);
        assert_relative_eq!(res.params[1], 1.0, max_relative = 1e-6);
        assert!(res.ssr < 1e-15);
    }

    #[test]
    fn recovers_nonlinear_decay() {
        // y = A e^{−kx} with A = 3.2, k = 0.7.
        let xs: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.2 * (-0.7 * x).exp()).collect();
        let res = levenberg_marquardt(
            |p| {
                Ok(xs
                    .iter()
                    .zip(ys.iter())
                    .map(|(x, y)| p[0] * (-p[1] * x).exp() - y)
                    .collect())
            },
            &[1.0, 0.2],
            &LmOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(res.params[0], 3.2, max_relative = 1e-7);
        assert_relative_eq!(res.params[1], 0.7, max_relative = 1e-7);
    }

    #[test]
    fn covariance_tracks_noise_scale() {
        // Constant model y = c with synthetic scatter: σ_c ≈ s/√m.
        let ys = [1.02, 0.98, 1.01, 0.99, 1.0, 1.03, 0.97, 1.0];
        let res = levenberg_marquardt(
            |p| Ok(ys.iter().map(|y| p[0] - y).collect()),
            &[0.5],
            &LmOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(res.params[0], 1.0, max_relative = 1e-6);
        let sigma = res.sigmas()[0];
        assert!(sigma > 1e-3 && sigma < 2e-2, "sigma {sigma}");
    }

    #[test]
    fn underdetermined_fit_is_rejected() {
        let res = levenberg_marquardt(|p| Ok(vec![p[0] - 1.0]), &[0.0, 0.0], &LmOptions::default());
        assert!(matches!(res, Err(Error::InvalidData(_))));
    }

    #[test]
    fn deterministic_repeat() {
        let run = || {
            levenberg_marquardt(
                |p| {
                    Ok((0..12)
                        .map(|k| {
                            let x = k as f64 * 0.3;
                            p[0] * (-p[1] * x).exp() + p[2] - (1.7 * (-0.4 * x).exp() + 0.2)
                        })
                        .collect())
                },
                &[1.0, 1.0, 0.0],
                &LmOptions::default(),
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.params, b.params);
        assert_eq!(a.ssr, b.ssr);
    }
}
