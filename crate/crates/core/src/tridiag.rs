//! Thomas solves for the symmetric tridiagonal systems produced by the
//! reduced radial Hamiltonian (variable diagonal, constant off-diagonal).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solve `A x = rhs` with real diagonal `diag` and constant off-diagonal `off`.
pub fn solve_real(diag: &[f64], off: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    let mut scratch = vec![0.0; n];
    let mut x = vec![0.0; n];

    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::NumericalBlowup("singular tridiagonal pivot".into()));
    }
    scratch[0] = off / pivot;
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - off * scratch[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::NumericalBlowup(format!(
                "singular tridiagonal pivot at row {i}"
            )));
        }
        scratch[i] = off / pivot;
        x[i] = (rhs[i] - off * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i] * x[i + 1];
    }
    Ok(x)
}

/// Complex variant used by the Crank-Nicolson stepper.
pub fn solve_complex(diag: &[Complex64], off: Complex64, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    let zero = Complex64::new(0.0, 0.0);
    let mut scratch = vec![zero; n];
    let mut x = vec![zero; n];

    let mut pivot = diag[0];
    if pivot == zero {
        return Err(Error::NumericalBlowup("singular tridiagonal pivot".into()));
    }
    scratch[0] = off / pivot;
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - off * scratch[i - 1];
        if pivot == zero || !pivot.re.is_finite() || !pivot.im.is_finite() {
            return Err(Error::NumericalBlowup(format!(
                "singular tridiagonal pivot at row {i}"
            )));
        }
        scratch[i] = off / pivot;
        x[i] = (rhs[i] - off * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] = x[i] - scratch[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(diag: &[f64], off: f64, x: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += off * x[i - 1];
                }
                if i + 1 < n {
                    v += off * x[i + 1];
                }
                v
            })
            .collect()
    }

    #[test]
    fn real_solve_matches_forward_apply() {
        let diag: Vec<f64> = (0..50).map(|i| 3.0 + (i as f64 * 0.7).sin()).collect();
        let off = -1.0;
        let rhs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).cos()).collect();
        let x = solve_real(&diag, off, &rhs).unwrap();
        let back = apply(&diag, off, &x);
        for (a, b) in back.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn complex_solve_matches_forward_apply() {
        let diag: Vec<Complex64> = (0..40)
            .map(|i| Complex64::new(4.0, 0.5 * (i as f64 * 0.2).sin()))
            .collect();
        let off = Complex64::new(0.0, -0.8);
        let rhs: Vec<Complex64> = (0..40)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let x = solve_complex(&diag, off, &rhs).unwrap();
        for i in 0..40 {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v += off * x[i - 1];
            }
            if i + 1 < 40 {
                v += off * x[i + 1];
            }
            assert!((v - rhs[i]).norm() < 1e-12);
        }
    }
}
