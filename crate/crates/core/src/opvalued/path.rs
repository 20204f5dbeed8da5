use nalgebra::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::linalg::{eigh, entry_scale, hermitian_drift, CMatrix};
use super::OpError;
use crate::hardy::{PathForm, ScalarPath};
use crate::weights::Interval;

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;

/// Step function `(0, ∞) → d×d Hermitian`: `values[i]` on `[grid[i], grid[i+1])`,
/// zero outside `[grid[0], grid[m])`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPath {
    dim: usize,
    grid: Vec<f64>,
    values: Vec<CMatrix>,
    psd: bool,
}

impl MatrixPath {
    pub fn new(grid: Vec<f64>, values: Vec<CMatrix>) -> Result<Self, OpError> {
        if grid.len() < 2 || values.len() != grid.len() - 1 {
            return Err(OpError::InvalidGrid(format!(
                "{} grid points need {} values, got {}",
                grid.len(),
                grid.len().saturating_sub(1),
                values.len()
            )));
        }
        if !(grid[0] > 0.0) || grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(OpError::InvalidGrid("grid must be finite, positive and strictly ascending".into()));
        }
        let dim = values[0].nrows();
        let mut psd = true;
        for m in &values {
            if !m.is_square() {
                return Err(OpError::NotSquare { rows: m.nrows(), cols: m.ncols() });
            }
            if m.nrows() != dim {
                return Err(OpError::DimensionMismatch { expected: dim, found: m.nrows() });
            }
            if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(OpError::NonFinite);
            }
            let drift = hermitian_drift(m);
            if drift > HERMITIAN_TOL * entry_scale(m) {
                return Err(OpError::NotHermitian { drift });
            }
            psd &= eigh(m).0.first().map_or(true, |&l| l >= -PSD_TOL * entry_scale(m));
        }
        if dim == 0 {
            return Err(OpError::DimensionMismatch { expected: 1, found: 0 });
        }
        let values = values.iter().map(super::linalg::symmetrize).collect();
        Ok(MatrixPath { dim, grid, values, psd })
    }

    /// Real symmetric steps from row-major entries.
    pub fn from_real(dim: usize, grid: Vec<f64>, entries: &[Vec<f64>]) -> Result<Self, OpError> {
        let values = entries
            .iter()
            .map(|e| {
                if e.len() != dim * dim {
                    return Err(OpError::DimensionMismatch { expected: dim * dim, found: e.len() });
                }
                Ok(CMatrix::from_fn(dim, dim, |i, j| Complex::new(e[i * dim + j], 0.0)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        MatrixPath::new(grid, values)
    }

    /// One-dimensional path with the given step heights.
    pub fn scalar(grid: Vec<f64>, heights: &[f64]) -> Result<Self, OpError> {
        MatrixPath::from_real(1, grid, &heights.iter().map(|&h| vec![h]).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn is_psd(&self) -> bool {
        self.psd
    }

    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    pub fn value(&self, x: f64) -> CMatrix {
        let (lo, hi) = self.support();
        if !(x >= lo && x < hi) {
            return CMatrix::zeros(self.dim, self.dim);
        }
        let i = self.grid.partition_point(|&t| t <= x) - 1;
        self.values[i].clone()
    }

    /// `λ·F`
    pub fn scaled(&self, lambda: f64) -> Self {
        let c = Complex::new(lambda, 0.0);
        let values: Vec<CMatrix> = self.values.iter().map(|m| m * c).collect();
        let psd = self.psd && lambda >= 0.0 || values.iter().all(|m| m.iter().all(|z| *z == Complex::new(0.0, 0.0)));
        MatrixPath { dim: self.dim, grid: self.grid.clone(), values, psd }
    }

    /// `U F(·) U*` for a unitary `U`.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self, OpError> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(OpError::DimensionMismatch { expected: self.dim, found: u.nrows() });
        }
        let values = self.values.iter().map(|m| super::linalg::symmetrize(&(u * m * u.adjoint()))).collect();
        MatrixPath::new(self.grid.clone(), values)
    }

    /// Block-diagonal `F ⊕ G` over the union of both grids.
    pub fn direct_sum(&self, other: &MatrixPath) -> Result<Self, OpError> {
        let mut grid: Vec<f64> = self.grid.iter().chain(other.grid.iter()).cloned().collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let d = self.dim + other.dim;
        let values = grid
            .windows(2)
            .map(|w| {
                let (a, b) = (self.value(w[0]), other.value(w[0]));
                let mut m = CMatrix::zeros(d, d);
                m.view_mut((0, 0), (self.dim, self.dim)).copy_from(&a);
                m.view_mut((self.dim, self.dim), (other.dim, other.dim)).copy_from(&b);
                m
            })
            .collect();
        MatrixPath::new(grid, values)
    }

    /// The `(i, i)` entry as a scalar step path on `(0, ∞)`.
    pub fn diagonal_entry(&self, i: usize) -> ScalarPath {
        ScalarPath::new(
            PathForm::Step { grid: self.grid.clone(), values: self.values.iter().map(|m| m[(i, i)].re).collect() },
            Interval::half_line(),
        )
    }

    pub(crate) fn with_values(&self, values: Vec<CMatrix>) -> Result<Self, OpError> {
        MatrixPath::new(self.grid.clone(), values)
    }

    pub(crate) fn with_grid(&self, grid: Vec<f64>) -> Result<Self, OpError> {
        MatrixPath::new(grid, self.values.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixPathRepr {
    dim: usize,
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    imag: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    psd: bool,
}

impl Serialize for MatrixPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let flat =
            |f: fn(&Complex<f64>) -> f64| -> Vec<Vec<f64>> { self.values.iter().map(|m| m.transpose().iter().map(f).collect()).collect() };
        let imag = flat(|z| z.im);
        MatrixPathRepr {
            dim: self.dim,
            grid: self.grid.clone(),
            values: flat(|z| z.re),
            imag: imag.iter().any(|r| r.iter().any(|&v| v != 0.0)).then_some(imag),
            psd: self.psd,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = MatrixPathRepr::deserialize(d)?;
        let n = r.dim;
        let imag = r.imag.unwrap_or_else(|| vec![vec![0.0; n * n]; r.values.len()]);
        if imag.len() != r.values.len() {
            return Err(serde::de::Error::custom("imag must list one matrix per value"));
        }
        let values = r
            .values
            .iter()
            .zip(&imag)
            .map(|(re, im)| {
                if re.len() != n * n || im.len() != n * n {
                    return Err(serde::de::Error::custom(format!("each matrix needs {} row-major entries", n * n)));
                }
                Ok(CMatrix::from_fn(n, n, |i, j| Complex::new(re[i * n + j], im[i * n + j])))
            })
            .collect::<Result<Vec<_>, D::Error>>()?;
        let path = MatrixPath::new(r.grid, values).map_err(serde::de::Error::custom)?;
        if r.psd && !path.psd {
            return Err(serde::de::Error::custom("path is flagged psd but has a negative eigenvalue"));
        }
        Ok(path)
    }
}

/// Serde adapter writing a complex matrix as `{"re": rows, "im": rows}`.
pub mod matrix_serde {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Repr {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows = |f: fn(&Complex<f64>) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        let im = rows(|z| z.im);
        Repr { re: rows(|z| z.re), im: im.iter().any(|r| r.iter().any(|&v| v != 0.0)).then_some(im) }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let r = Repr::deserialize(d)?;
        let n = r.re.len();
        if r.re.iter().any(|row| row.len() != n) {
            return Err(serde::de::Error::custom("matrix must be square"));
        }
        let im = r.im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
        Ok(CMatrix::from_fn(n, n, |i, j| Complex::new(r.re[i][j], im.get(i).and_then(|row| row.get(j)).copied().unwrap_or(0.0))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(MatrixPath::scalar(vec![1.0, 2.0], &[1.0]).unwrap().is_psd());
        assert!(!MatrixPath::scalar(vec![1.0, 2.0], &[-1.0]).unwrap().is_psd());
        assert!(MatrixPath::scalar(vec![0.0, 2.0], &[1.0]).is_err());
        assert!(MatrixPath::scalar(vec![2.0, 1.0], &[1.0]).is_err());
        assert!(MatrixPath::scalar(vec![1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(matches!(MatrixPath::from_real(2, vec![1.0, 2.0], &[vec![1.0, 1.0, 0.0, 1.0]]), Err(OpError::NotHermitian { .. })));
    }

    #[test]
    fn values_and_direct_sum() {
        let f = MatrixPath::scalar(vec![1.0, 2.0, 3.0], &[1.0, 2.0]).unwrap();
        let g = MatrixPath::scalar(vec![1.5, 4.0], &[5.0]).unwrap();
        assert_eq!(f.value(0.5)[(0, 0)].re, 0.0);
        assert_eq!(f.value(2.0)[(0, 0)].re, 2.0);
        assert_eq!(f.value(3.0)[(0, 0)].re, 0.0);
        let s = f.direct_sum(&g).unwrap();
        assert_eq!(s.grid(), &[1.0, 1.5, 2.0, 3.0, 4.0]);
        assert_eq!((s.value(2.5)[(0, 0)].re, s.value(2.5)[(1, 1)].re), (2.0, 5.0));
        assert_eq!(s.value(3.5)[(0, 0)].re, 0.0);
    }

    #[test]
    fn json_round_trip() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = Complex::new(0.5, 0.25);
        m[(1, 0)] = Complex::new(0.5, -0.25);
        let f = MatrixPath::new(vec![1.0, 2.0], vec![m]).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let back: MatrixPath = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let real: MatrixPath = serde_json::from_str(r#"{"dim":2,"grid":[1,2],"values":[[1,0,0,1]]}"#).unwrap();
        assert!(real.is_psd());
    }
}
