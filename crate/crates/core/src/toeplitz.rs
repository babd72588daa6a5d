//! Symmetric Toeplitz solves by Levinson recursion.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// How a Toeplitz system was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Levinson,
    /// Dense Cholesky, used when a reflection coefficient approaches one.
    Dense,
}

/// Reflection-coefficient magnitude above which the recursion is abandoned.
const REFLECTION_LIMIT: f64 = 1.0 - 1e-10;

/// Solves `T x = b` where `T` is symmetric Toeplitz with first column `col`.
pub fn solve_symmetric_toeplitz(col: &[f64], rhs: &[f64]) -> Result<(Vec<f64>, SolveMethod)> {
    let n = col.len();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    if n == 0 {
        return Ok((Vec::new(), SolveMethod::Levinson));
    }
    match levinson(col, rhs) {
        Some(x) => Ok((x, SolveMethod::Levinson)),
        None => dense_solve(col, rhs).map(|x| (x, SolveMethod::Dense)),
    }
}

fn levinson(col: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = col.len();
    let t0 = col[0];
    if !(t0 > 0.0) {
        return None;
    }
    let r: Vec<f64> = col[1..].iter().map(|v| v / t0).collect();
    let b: Vec<f64> = rhs.iter().map(|v| v / t0).collect();

    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    x[0] = b[0];
    if n == 1 {
        return Some(x);
    }
    y[0] = -r[0];
    let mut beta = 1.0;
    let mut alpha = -r[0];
    for k in 1..n {
        if alpha.abs() >= REFLECTION_LIMIT {
            return None;
        }
        beta *= 1.0 - alpha * alpha;
        if !(beta > 0.0) {
            return None;
        }
        let dot: f64 = (0..k).map(|i| r[i] * x[k - 1 - i]).sum();
        let mu = (b[k] - dot) / beta;
        for i in 0..k {
            scratch[i] = x[i] + mu * y[k - 1 - i];
        }
        x[..k].copy_from_slice(&scratch[..k]);
        x[k] = mu;
        if k < n - 1 {
            let dot: f64 = (0..k).map(|i| r[i] * y[k - 1 - i]).sum();
            alpha = -(r[k] + dot) / beta;
            for i in 0..k {
                scratch[i] = y[i] + alpha * y[k - 1 - i];
            }
            y[..k].copy_from_slice(&scratch[..k]);
            y[k] = alpha;
        }
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn dense_solve(col: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = col.len();
    let m = DMatrix::from_fn(n, n, |i, j| col[i.abs_diff(j)]);
    let b = DVector::from_column_slice(rhs);
    let chol = m.clone().cholesky().ok_or_else(|| {
        let diag_min = col[0];
        Error::Numerical(format!(
            "Toeplitz matrix of order {n} is not positive definite (diagonal {diag_min:e})"
        ))
    })?;
    let x = chol.solve(&b);
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_reference(col: &[f64], rhs: &[f64]) -> Vec<f64> {
        let n = col.len();
        let m = DMatrix::from_fn(n, n, |i, j| col[i.abs_diff(j)]);
        m.lu()
            .solve(&DVector::from_column_slice(rhs))
            .unwrap()
            .iter()
            .copied()
            .collect()
    }

    #[test]
    fn matches_dense_solve() {
        for &(a, n) in &[(0.5f64, 1usize), (0.5, 2), (0.85, 10), (0.99, 60)] {
            let col: Vec<f64> = (0..n).map(|k| a.powi(k as i32) + if k == 0 { 0.3 } else { 0.0 }).collect();
            let rhs: Vec<f64> = (0..n).map(|k| ((k as f64) * 0.7).sin() + 0.2).collect();
            let (x, method) = solve_symmetric_toeplitz(&col, &rhs).unwrap();
            assert_eq!(method, SolveMethod::Levinson);
            let reference = dense_reference(&col, &rhs);
            for (u, v) in x.iter().zip(&reference) {
                assert!((u - v).abs() < 1e-9 * v.abs().max(1.0), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn singular_leading_block_falls_back() {
        // Reflection coefficient of exactly one in the first step.
        let col = [1.0, 1.0, 0.5];
        let r = solve_symmetric_toeplitz(&col, &[1.0, 1.0, 1.0]);
        // The full matrix is indefinite, so the Cholesky fallback reports it.
        assert!(matches!(r, Err(Error::Numerical(_))));

        let col = [1.0, 1.0 - 1e-12];
        let (x, method) = solve_symmetric_toeplitz(&col, &[1.0, 0.0]).unwrap();
        assert_eq!(method, SolveMethod::Dense);
        let reference = dense_reference(&col, &[1.0, 0.0]);
        assert!((x[0] - reference[0]).abs() < 1e-3 * reference[0].abs());
    }

    #[test]
    fn shape_mismatch() {
        assert!(solve_symmetric_toeplitz(&[1.0, 0.2], &[1.0]).is_err());
    }
}
