use super::{dot, LinearOperator};
use crate::error::{Error, Result};

/// Conjugate gradient for symmetric positive definite operators.
///
/// Stops once `||A x - b||_2 <= tol * ||b||_2`, with the residual recomputed
/// from scratch before returning.
pub fn solve_spd<A: LinearOperator + ?Sized>(a: &A, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = a.dim();
    crate::error::check_len(n, b.len())?;
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let target = tol * b_norm;
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let max_iter = 10 * n + 100;
    for _ in 0..max_iter {
        if rr.sqrt() <= target {
            // Guard against drift in the recursive residual.
            a.apply(&x, &mut ap);
            let true_res: f64 = b
                .iter()
                .zip(&ap)
                .map(|(bi, ai)| (bi - ai).powi(2))
                .sum::<f64>()
                .sqrt();
            if true_res <= target {
                return Ok(x);
            }
            r.iter_mut().zip(b.iter().zip(&ap)).for_each(|(ri, (bi, ai))| *ri = bi - ai);
            p.copy_from_slice(&r);
            rr = dot(&r, &r);
        }
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::SolverFailure(
                "operator is not positive definite".into(),
            ));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::MaxIterationsExceeded(max_iter))
}
