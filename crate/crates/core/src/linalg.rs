//! Dense complex matrices and the Hermitian primitives the rest of the crate
//! is built on: eigenvalues by cyclic Jacobi, PSD classification, the
//! principal square root and an LU determinant.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::ToleranceProfile;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix; serialized as rows of entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// A matrix entry on the wire: a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
}

impl From<EntryJson> for Complex64 {
    fn from(e: EntryJson) -> Self {
        match e {
            EntryJson::Real(r) => Complex64::new(r, 0.0),
            EntryJson::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for EntryJson {
    fn from(z: Complex64) -> Self {
        if z.im == 0.0 {
            EntryJson::Real(z.re)
        } else {
            EntryJson::Complex([z.re, z.im])
        }
    }
}

/// Rows of entries.
pub type MatrixJson = Vec<Vec<EntryJson>>;

pub fn matrix_from_json_value(rows: &MatrixJson) -> Result<DenseMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Shape("ragged matrix rows".into()));
    }
    let data = rows.iter().flatten().map(|&e| Complex64::from(e)).collect();
    DenseMatrix::from_vec(r, c, data)
}

pub fn matrix_to_json_value(m: &DenseMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

impl TryFrom<MatrixJson> for DenseMatrix {
    type Error = Error;
    fn try_from(rows: MatrixJson) -> Result<Self> {
        matrix_from_json_value(&rows)
    }
}

impl From<DenseMatrix> for MatrixJson {
    fn from(m: DenseMatrix) -> Self {
        matrix_to_json_value(&m)
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                if z.im == 0.0 {
                    write!(f, "{:>10.4} ", z.re)?;
                } else {
                    write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        Self::from_fn(r, c, |i, j| {
            let row = rows[i].as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            Complex64::new(row[j], 0.0)
        })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> DenseMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> DenseMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex64) -> DenseMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &DenseMatrix,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<DenseMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `max |m_ij - conj(m_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut r = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Returns the Hermitian part `(m + m^H)/2`.
    pub fn hermitian_part(&self) -> DenseMatrix {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    fn check_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let residual = self.hermitian_residual();
        let bound = tol * self.frobenius_norm();
        if residual > bound {
            return Err(Error::NotHermitian { residual, bound });
        }
        Ok(())
    }
}

/// Eigen-decomposition `m = V Λ V^H` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: DenseMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        DenseMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * self.values[k] * v[(j, k)].conj())
                .sum()
        })
    }
}

/// Cyclic complex Jacobi. Each rotation first removes the phase of the
/// pivot with a diagonal unitary, then applies the real Jacobi rotation.
pub fn hermitian_eigen(m: &DenseMatrix, tols: &ToleranceProfile) -> Result<HermitianEigen> {
    m.check_hermitian(tols.hermitian_tol)?;
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm();
    const MAX_SWEEPS: usize = 100;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= 1e-300 || b <= 1e-18 * scale {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let phase = Complex64::from_polar(1.0, -apq.arg());
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * b);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let g00 = Complex64::new(c, 0.0);
                let g01 = Complex64::new(s, 0.0);
                let g10 = phase * (-s);
                let g11 = phase * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g00 + akq * g10;
                    a[(k, q)] = akp * g01 + akq * g11;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
                    a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g00 + vkq * g10;
                    v[(k, q)] = vkp * g01 + vkq * g11;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DenseMatrix, tols: &ToleranceProfile) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m, tols)?.values)
}

/// Smallest eigenvalue of a Hermitian matrix (`+∞` for the empty matrix).
pub fn lambda_min(m: &DenseMatrix, tols: &ToleranceProfile) -> Result<f64> {
    Ok(hermitian_eigenvalues(m, tols)?
        .first()
        .copied()
        .unwrap_or(f64::INFINITY))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdClass {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

impl PsdClass {
    /// True for PD and PSD.
    pub fn is_psd(self) -> bool {
        self != PsdClass::Indefinite
    }

    pub fn from_lambda_min(lambda_min: f64, tol: f64) -> Self {
        if lambda_min > tol {
            PsdClass::PositiveDefinite
        } else if lambda_min < -tol {
            PsdClass::Indefinite
        } else {
            PsdClass::PositiveSemidefinite
        }
    }
}

/// Classifies a Hermitian matrix by its smallest eigenvalue with an absolute
/// boundary band `[-tol, tol]`.
pub fn psd_classify(m: &DenseMatrix, tol: f64, tols: &ToleranceProfile) -> Result<PsdClass> {
    Ok(PsdClass::from_lambda_min(lambda_min(m, tols)?, tol))
}

/// [`psd_classify`] with the band `eig_tol · max(1, ‖m‖_F)`.
pub fn psd_classify_default(m: &DenseMatrix, tols: &ToleranceProfile) -> Result<PsdClass> {
    psd_classify(m, psd_band(m, tols), tols)
}

pub fn psd_band(m: &DenseMatrix, tols: &ToleranceProfile) -> f64 {
    tols.eig_tol * m.frobenius_norm().max(1.0)
}

/// Principal square root of a Hermitian positive definite matrix.
pub fn sqrt_pd(m: &DenseMatrix, tols: &ToleranceProfile) -> Result<DenseMatrix> {
    let eig = hermitian_eigen(m, tols)?;
    let lmin = eig.values.first().copied().unwrap_or(f64::INFINITY);
    if PsdClass::from_lambda_min(lmin, psd_band(m, tols)) != PsdClass::PositiveDefinite {
        return Err(Error::NotPositiveDefinite { lambda_min: lmin });
    }
    let roots: Vec<f64> = eig.values.iter().map(|l| l.sqrt()).collect();
    let s = HermitianEigen {
        values: roots,
        vectors: eig.vectors,
    }
    .reconstruct();
    Ok(s.hermitian_part())
}

/// LU determinant with partial pivoting. Returns exactly zero when a pivot
/// falls below `pivot_tol · ‖m‖_F`.
pub fn determinant(m: &DenseMatrix, tols: &ToleranceProfile) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "determinant of a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let threshold = tols.pivot_tol * m.frobenius_norm();
    let mut a = m.clone();
    let mut det = ONE;
    for k in 0..n {
        let (piv, piv_abs) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty range");
        if piv_abs <= threshold {
            return Ok(ZERO);
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in (k + 1)..n {
            let factor = a[(i, k)] / pivot;
            if factor == ZERO {
                continue;
            }
            for j in k..n {
                let akj = a[(k, j)];
                a[(i, j)] -= factor * akj;
            }
        }
    }
    Ok(det)
}
