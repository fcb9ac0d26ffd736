use nalgebra::{DMatrix, DVector};

pub(crate) struct LmOutcome {
    pub x: Vec<f64>,
}

/// Levenberg–Marquardt with Marquardt's diagonal scaling. `f` returns the
/// residual vector and its Jacobian.
pub(crate) fn levenberg_marquardt<F>(f: F, x0: Vec<f64>, max_iter: usize, tol: f64) -> LmOutcome
where
    F: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let mut x = DVector::from_vec(x0);
    let (mut r, mut j) = f(x.as_slice());
    let mut cost = 0.5 * r.norm_squared();
    let mut jtj = j.transpose() * &j;
    let mut lambda = 1e-3 * jtj.diagonal().max().max(1e-12);
    for _ in 0..max_iter {
        if cost.sqrt() < tol || !cost.is_finite() {
            break;
        }
        let grad = j.transpose() * &r;
        let mut a = jtj.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
        }
        let Some(chol) = a.cholesky() else {
            lambda *= 10.0;
            continue;
        };
        let step = chol.solve(&(-grad));
        let trial = &x + &step;
        let (rt, jt) = f(trial.as_slice());
        let ct = 0.5 * rt.norm_squared();
        if ct.is_finite() && ct < cost {
            let small = step.norm() <= 1e-15 * (x.norm() + 1e-15);
            x = trial;
            r = rt;
            j = jt;
            cost = ct;
            jtj = j.transpose() * &j;
            lambda = (lambda / 3.0).max(1e-15);
            if small {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e16 {
                break;
            }
        }
    }
    LmOutcome { x: x.as_slice().to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| {
            let r = DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
            let j = DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0]);
            (r, j)
        };
        let out = levenberg_marquardt(f, vec![-1.2, 1.0], 200, 1e-14);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
    }
}
