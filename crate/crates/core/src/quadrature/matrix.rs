use nalgebra::{Complex, DMatrix};

use super::{integrate_components, QuadConfig, QuadError};

/// Entrywise integral of a Hermitian-matrix-valued function.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixQuadResult {
    pub value: DMatrix<Complex<f64>>,
    /// Largest per-entry error estimate.
    pub err_estimate: f64,
    pub subdivisions_used: usize,
}

/// Integrates a `dim × dim` Hermitian integrand entrywise over one shared
/// subdivision tree. Only the upper triangle is integrated; the lower triangle
/// is filled by conjugation, so the result is exactly Hermitian.
pub fn integrate_hermitian<F>(
    f: F,
    dim: usize,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<MatrixQuadResult, QuadError>
where
    F: Fn(f64) -> DMatrix<Complex<f64>>,
{
    let packed = dim * dim;
    let pack = |x: f64, out: &mut [f64]| {
        let m = f(x);
        let mut k = 0;
        for i in 0..dim {
            out[k] = m[(i, i)].re;
            k += 1;
        }
        for i in 0..dim {
            for j in i + 1..dim {
                let z = m[(i, j)];
                out[k] = z.re;
                out[k + 1] = z.im;
                k += 2;
            }
        }
    };
    let r = integrate_components(pack, packed, lo, hi, breakpoints, cfg)?;
    let mut value = DMatrix::zeros(dim, dim);
    let mut k = 0;
    for i in 0..dim {
        value[(i, i)] = Complex::new(r.values[k], 0.0);
        k += 1;
    }
    for i in 0..dim {
        for j in i + 1..dim {
            let z = Complex::new(r.values[k], r.values[k + 1]);
            value[(i, j)] = z;
            value[(j, i)] = z.conj();
            k += 2;
        }
    }
    let err_estimate = r.errors.iter().cloned().fold(0.0, f64::max);
    Ok(MatrixQuadResult { value, err_estimate, subdivisions_used: r.subdivisions_used })
}
