use nalgebra::{Complex, DMatrix, SymmetricEigen};

use super::OpError;

pub type CMatrix = DMatrix<Complex<f64>>;

/// Entry-scale used for relative Hermiticity and positivity tolerances.
pub(crate) fn entry_scale(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

/// Largest entry of `|A − A*|`.
pub fn hermitian_drift(a: &CMatrix) -> f64 {
    let mut drift: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            drift = drift.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    drift
}

/// `(A + A*)/2`
pub fn symmetrize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

fn check_hermitian(a: &CMatrix, tol: f64) -> Result<(), OpError> {
    if !a.is_square() {
        return Err(OpError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(OpError::NonFinite);
    }
    let drift = hermitian_drift(a);
    if drift > tol * entry_scale(a) {
        return Err(OpError::NotHermitian { drift });
    }
    Ok(())
}

/// Real eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.
pub(crate) fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let e = SymmetricEigen::new(symmetrize(a));
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(&order.iter().map(|&i| e.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (values, vectors)
}

fn from_spectrum(vectors: &CMatrix, values: impl Iterator<Item = f64>) -> CMatrix {
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(vectors.ncols(), values.map(|v| Complex::new(v, 0.0))));
    symmetrize(&(vectors * d * vectors.adjoint()))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    eigh(a).0[0]
}

/// Largest `|λ|` of a Hermitian matrix.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    eigh(a).0.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn trace(a: &CMatrix) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

/// `‖T‖_p = (Σ s_j^p)^{1/p}` over the singular values; `p = ∞` gives the
/// operator norm.
pub fn schatten_norm(t: &CMatrix, p: f64) -> Result<f64, OpError> {
    if !(p >= 1.0) {
        return Err(OpError::InvalidExponent(p));
    }
    let s = t.clone().singular_values();
    if p.is_infinite() {
        return Ok(s.iter().cloned().fold(0.0, f64::max));
    }
    let top = s.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    Ok(top * s.iter().map(|v| (v / top).powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `A^p = U diag(λ^p) U*` for Hermitian PSD `A`. Eigenvalues in `[−1e−9, 0)`
/// are clamped to zero.
pub fn matrix_power_psd(a: &CMatrix, p: f64) -> Result<CMatrix, OpError> {
    check_hermitian(a, 1e-10)?;
    if !p.is_finite() {
        return Err(OpError::InvalidExponent(p));
    }
    let (values, vectors) = eigh(a);
    let scale = values.iter().fold(1.0, |m: f64, v| m.max(v.abs()));
    if let Some(&min) = values.first() {
        if min < -1e-9 * scale {
            return Err(OpError::NotPsd { min_eig: min });
        }
    }
    Ok(from_spectrum(
        &vectors,
        values.into_iter().map(|v| {
            if v > 0.0 {
                v.powf(p)
            } else if p == 0.0 {
                1.0
            } else {
                0.0
            }
        }),
    ))
}

/// `|A|^p = U diag(|λ|^p) U*` for Hermitian `A`.
pub fn matrix_abs_power(a: &CMatrix, p: f64) -> Result<CMatrix, OpError> {
    check_hermitian(a, 1e-10)?;
    let (values, vectors) = eigh(a);
    Ok(from_spectrum(&vectors, values.into_iter().map(|v| v.abs().powf(p))))
}

/// Hot-path power used inside quadrature: no validation, clamps negatives.
pub(crate) fn power_unchecked(a: &CMatrix, p: f64, absolute: bool) -> CMatrix {
    let (values, vectors) = eigh(a);
    from_spectrum(
        &vectors,
        values.into_iter().map(|v| {
            let v = if absolute { v.abs() } else { v.max(0.0) };
            v.powf(p)
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| Complex::new(rows[i][j], 0.0))
    }

    #[test]
    fn schatten_examples() {
        let a = real(&[&[3.0, 0.0], &[0.0, -4.0]]);
        assert!((schatten_norm(&a, 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!((schatten_norm(&a, 2.0).unwrap() - 5.0).abs() < 1e-12);
        let n = real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!((schatten_norm(&n, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(schatten_norm(&n, 0.5).is_err());
    }

    #[test]
    fn power_examples() {
        let i2 = CMatrix::identity(2, 2);
        assert!((matrix_power_psd(&i2, 3.0).unwrap() - &i2).norm() < 1e-14);
        let d = real(&[&[4.0, 0.0], &[0.0, 9.0]]);
        assert!((matrix_power_psd(&d, 0.5).unwrap() - real(&[&[2.0, 0.0], &[0.0, 3.0]])).norm() < 1e-13);
        let s = real(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert!((matrix_power_psd(&s, 2.0).unwrap() - &s * &s).norm() < 1e-12);
        assert!(matches!(matrix_power_psd(&real(&[&[1.0, 0.0], &[0.0, -1.0]]), 2.0), Err(OpError::NotPsd { .. })));
        assert!(matches!(matrix_power_psd(&real(&[&[1.0, 1.0], &[0.0, 1.0]]), 2.0), Err(OpError::NotHermitian { .. })));
        let tiny = real(&[&[1.0, 0.0], &[0.0, -1e-13]]);
        assert_eq!(matrix_power_psd(&tiny, 0.5).unwrap()[(1, 1)].re, 0.0);
    }

    #[test]
    fn abs_power_and_complex_entries() {
        let a = real(&[&[3.0, 0.0], &[0.0, -4.0]]);
        assert!((trace(&matrix_abs_power(&a, 2.0).unwrap()) - 25.0).abs() < 1e-12);
        let mut h = CMatrix::identity(2, 2).scale(2.0);
        h[(0, 1)] = Complex::new(0.0, 1.0);
        h[(1, 0)] = Complex::new(0.0, -1.0);
        let sq = matrix_power_psd(&h, 2.0).unwrap();
        assert!((sq - &h * &h).norm() < 1e-12);
        assert!((min_eigenvalue(&h) - 1.0).abs() < 1e-12 && (spectral_norm(&h) - 3.0).abs() < 1e-12);
    }
}
