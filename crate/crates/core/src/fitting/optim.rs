//! Quasi-Newton (BFGS) minimization with a backtracking Armijo line search.
//! The objective may return `None` outside its domain; the line search then
//! shortens the step.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the relative objective change falls below this and the
    /// gradient is below `grad_tol`.
    pub rel_tol: f64,
    pub grad_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rel_tol: 1e-10,
            grad_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes `f`, which returns the value and gradient at a point. `x0` must
/// lie in the domain.
pub fn bfgs<F>(f: F, x0: &[f64], opts: &BfgsOptions) -> Option<Minimum>
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x)?;
    let mut h: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();

    let mut iterations = 0;
    let mut converged = inf_norm(&g) < opts.grad_tol * 1e-4;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let mut dir: Vec<f64> = h.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            // Not a descent direction: reset to steepest descent.
            for (i, row) in h.iter_mut().enumerate() {
                row.iter_mut()
                    .enumerate()
                    .for_each(|(j, v)| *v = f64::from(u8::from(i == j)));
            }
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            if let Some((ft, gt)) = f(&trial) {
                if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            converged = inf_norm(&g) < opts.grad_tol;
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let hy: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i][j] +=
                        rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }

        let rel_change = (fx - f_new).abs() / fx.abs().max(1.0);
        x = x_new;
        fx = f_new;
        g = g_new;
        let gn = inf_norm(&g);
        converged = (rel_change < opts.rel_tol && gn < opts.grad_tol) || gn < opts.grad_tol * 1e-4;
    }

    Some(Minimum {
        grad_norm: inf_norm(&g),
        x,
        value: fx,
        iterations,
        converged,
    })
}
