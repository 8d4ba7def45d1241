//! Dense linear algebra used by the rest of the crate: real SPD Cholesky
//! factorization, real symmetric eigendecomposition (Householder reduction
//! followed by implicit-shift QL) and complex LU with partial pivoting.
//!
//! Matrices are small by modern standards (V <= 2000 dense spectra, message
//! matrices of order 2p+1), so the implementations favour robustness and
//! reproducibility over blocked performance.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (pivot {pivot:.3e} at row {row} after jitter)")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigensolver did not converge at eigenvalue index {0}")]
    NoConvergence(usize),
    #[error("matrix is numerically singular (pivot magnitude {0:.3e})")]
    Singular(f64),
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting NaN/Inf entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        assert_eq!(data.len(), rows * cols, "data length must be rows*cols");
        for (idx, &x) in data.iter().enumerate() {
            if !x.is_finite() {
                return Err(LinalgError::NonFinite(idx / cols, idx % cols));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// Largest |a_ij - a_ji| over all pairs.
    pub fn symmetry_gap(&self) -> f64 {
        let mut gap: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                gap = gap.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        gap
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += aik * s;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }
}

/// Relative symmetry tolerance used by the SPD and eigen entry points.
const SYMMETRY_TOL: f64 = 1e-10;

fn check_symmetric(m: &DenseMatrix) -> Result<(), LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            m.rows(),
            m.cols()
        )));
    }
    let gap = m.symmetry_gap();
    if gap > SYMMETRY_TOL * m.max_abs().max(1.0) {
        return Err(LinalgError::NotSymmetric(gap));
    }
    Ok(())
}

/// Lower-triangular Cholesky factor L with L L^T = A.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: DenseMatrix,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.l
    }

    /// Solves L y = b in place over a block of right-hand sides laid out as
    /// rows of `rhs` (rhs[r] is the r-th component over all systems).
    pub fn forward_rows(&self, rhs: &mut DenseMatrix) {
        let n = self.dim();
        assert_eq!(rhs.rows(), n, "rhs row count must equal factor dimension");
        for r in 0..n {
            for t in 0..r {
                let lrt = self.l.get(r, t);
                if lrt == 0.0 {
                    continue;
                }
                let (head, tail) = rhs.data.split_at_mut(r * rhs.cols);
                let src = &head[t * rhs.cols..(t + 1) * rhs.cols];
                let dst = &mut tail[..rhs.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= lrt * s;
                }
            }
            let inv = 1.0 / self.l.get(r, r);
            for x in rhs.row_mut(r) {
                *x *= inv;
            }
        }
    }

    /// Solves L^T x = y in place over rows of `rhs` (see `forward_rows`).
    pub fn backward_rows(&self, rhs: &mut DenseMatrix) {
        let n = self.dim();
        assert_eq!(rhs.rows(), n, "rhs row count must equal factor dimension");
        for r in (0..n).rev() {
            for t in (r + 1)..n {
                let ltr = self.l.get(t, r);
                if ltr == 0.0 {
                    continue;
                }
                let (head, tail) = rhs.data.split_at_mut(t * rhs.cols);
                let dst = &mut head[r * rhs.cols..(r + 1) * rhs.cols];
                let src = &tail[..rhs.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= ltr * s;
                }
            }
            let inv = 1.0 / self.l.get(r, r);
            for x in rhs.row_mut(r) {
                *x *= inv;
            }
        }
    }

    /// Full solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        solve_spd(self, b)
    }
}

fn cholesky_attempt(m: &DenseMatrix, jitter: f64) -> Result<DenseMatrix, (usize, f64)> {
    let n = m.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return Err((i, s));
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// One round of diagonal jitter (1e-12 * trace / n) is applied if the plain
/// factorization hits a non-positive pivot; kernels are PSD by construction,
/// so only rounding drift needs absorbing.
pub fn chol_factor(m: &DenseMatrix) -> Result<CholeskyFactor, LinalgError> {
    check_symmetric(m)?;
    match cholesky_attempt(m, 0.0) {
        Ok(l) => Ok(CholeskyFactor { l }),
        Err(_) => {
            let n = m.rows();
            let jitter = 1e-12 * m.trace() / n as f64;
            match cholesky_attempt(m, jitter.max(0.0)) {
                Ok(l) => Ok(CholeskyFactor { l }),
                Err((row, pivot)) => Err(LinalgError::NotPositiveDefinite { row, pivot }),
            }
        }
    }
}

/// Solves A x = b given the Cholesky factor of A.
pub fn solve_spd(f: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = f.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "factor dimension {} vs rhs length {}",
            n,
            b.len()
        )));
    }
    let mut x = b.to_vec();
    // forward: L y = b
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= f.l.get(i, k) * x[k];
        }
        x[i] = s / f.l.get(i, i);
    }
    // backward: L^T x = y
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= f.l.get(k, i) * x[k];
        }
        x[i] = s / f.l.get(i, i);
    }
    Ok(x)
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column j is the eigenvector for values[j].
    pub vectors: DenseMatrix,
}

/// Householder tridiagonalization. `z` is overwritten with the accumulated
/// orthogonal transform when `accumulate` is set; `d`/`e` receive the
/// diagonal and subdiagonal (e[0] unused).
fn tridiagonalize(z: &mut DenseMatrix, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = z.rows();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| z.get(i, k).abs()).sum();
            if scale == 0.0 {
                e[i] = z.get(i, l);
            } else {
                for k in 0..=l {
                    let v = z.get(i, k) / scale;
                    z.set(i, k, v);
                    h += v * v;
                }
                let f = z.get(i, l);
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z.set(i, l, f - g);
                let mut fsum = 0.0;
                for j in 0..=l {
                    if accumulate {
                        z.set(j, i, z.get(i, j) / h);
                    }
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z.get(j, k) * z.get(i, k);
                    }
                    for k in (j + 1)..=l {
                        g += z.get(k, j) * z.get(i, k);
                    }
                    e[j] = g / h;
                    fsum += e[j] * z.get(i, j);
                }
                let hh = fsum / (h + h);
                for j in 0..=l {
                    let f = z.get(i, j);
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let v = z.get(j, k) - f * e[k] - g * z.get(i, k);
                        z.set(j, k, v);
                    }
                }
            }
        } else {
            e[i] = z.get(i, l);
        }
        d[i] = h;
    }
    if accumulate {
        d[0] = 0.0;
    }
    e[0] = 0.0;
    if accumulate {
        for i in 0..n {
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += z.get(i, k) * z.get(k, j);
                    }
                    for k in 0..i {
                        let v = z.get(k, j) - g * z.get(k, i);
                        z.set(k, j, v);
                    }
                }
            }
            d[i] = z.get(i, i);
            z.set(i, i, 1.0);
            for j in 0..i {
                z.set(j, i, 0.0);
                z.set(i, j, 0.0);
            }
        }
    } else {
        for i in 0..n {
            d[i] = z.get(i, i);
        }
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; rotations are applied
/// to `z` when present. 30 iterations per eigenvalue before giving up.
fn tridiag_ql(
    d: &mut [f64],
    e: &mut [f64],
    mut z: Option<&mut DenseMatrix>,
    n: usize,
) -> Result<(), LinalgError> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    // absolute deflation floor: subdiagonals below eps * ||T|| are rounding
    // noise from the reduction and must deflate even between near-zero
    // diagonal entries (kernel spectra span many orders of magnitude)
    let tnorm = (0..n)
        .map(|i| d[i].abs() + e[i].abs())
        .fold(0.0f64, f64::max);
    let floor = f64::EPSILON * tnorm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd + floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 30 {
                return Err(LinalgError::NoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(zm) = z.as_deref_mut() {
                    for k in 0..n {
                        f = zm.get(k, i + 1);
                        zm.set(k, i + 1, s * zm.get(k, i) + c * f);
                        zm.set(k, i, c * zm.get(k, i) - s * f);
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix; eigenvalues ascending with
/// matching eigenvector columns.
pub fn sym_eigen(m: &DenseMatrix) -> Result<SymEigen, LinalgError> {
    check_symmetric(m)?;
    let n = m.rows();
    if n == 0 {
        return Ok(SymEigen { values: vec![], vectors: DenseMatrix::zeros(0, 0) });
    }
    let mut z = m.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, &mut d, &mut e, true);
    tridiag_ql(&mut d, &mut e, Some(&mut z), n)?;
    // sort ascending, permuting eigenvector columns to match
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (newcol, &oldcol) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, newcol, z.get(k, oldcol));
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Eigenvalues only (ascending); skips accumulating the transform.
pub fn sym_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    check_symmetric(m)?;
    let n = m.rows();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut z = m.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, &mut d, &mut e, false);
    tridiag_ql(&mut d, &mut e, None, n)?;
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexDenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        assert_eq!(data.len(), rows * cols, "data length must be rows*cols");
        for (idx, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(LinalgError::NonFinite(idx / cols, idx % cols));
            }
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn matmul(&self, other: &ComplexDenseMatrix) -> ComplexDenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = ComplexDenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// In-place (A + A^T)/2.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = (self.get(i, j) + self.get(j, i)) * 0.5;
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }
}

/// Relative pivot threshold below which complex LU reports `Singular`.
const LU_PIVOT_TOL: f64 = 1e-14;

/// LU factorization (partial pivoting on magnitude) of a complex square matrix.
#[derive(Debug, Clone)]
pub struct ComplexLu {
    lu: ComplexDenseMatrix,
    piv: Vec<usize>,
}

pub fn complex_lu(m: &ComplexDenseMatrix) -> Result<ComplexLu, LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let scale = m.max_abs();
    let threshold = LU_PIVOT_TOL * scale;
    let mut lu = m.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut best = k;
        let mut best_mag = lu.get(k, k).norm_sqr();
        for i in (k + 1)..n {
            let mag = lu.get(i, k).norm_sqr();
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        if best_mag.sqrt() <= threshold {
            return Err(LinalgError::Singular(best_mag.sqrt()));
        }
        if best != k {
            for j in 0..n {
                let a = lu.get(k, j);
                let b = lu.get(best, j);
                lu.set(k, j, b);
                lu.set(best, j, a);
            }
            piv.swap(k, best);
        }
        let pivot = lu.get(k, k);
        for i in (k + 1)..n {
            let factor = lu.get(i, k) / pivot;
            lu.set(i, k, factor);
            if factor != Complex64::new(0.0, 0.0) {
                for j in (k + 1)..n {
                    let v = lu.get(i, j) - factor * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
    }
    Ok(ComplexLu { lu, piv })
}

impl ComplexLu {
    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu.get(i, k) * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.lu.get(i, k) * x[k];
            }
            x[i] = s / self.lu.get(i, i);
        }
        x
    }

    /// Component 0 of the solution of A x = e0; enough for the message
    /// measurements, cheaper than a full inverse.
    pub fn solve_e0_first(&self) -> Complex64 {
        let n = self.dim();
        let mut e0 = vec![Complex64::new(0.0, 0.0); n];
        e0[0] = Complex64::new(1.0, 0.0);
        self.solve(&e0)[0]
    }

    pub fn inverse(&self) -> ComplexDenseMatrix {
        let n = self.dim();
        let mut out = ComplexDenseMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            e[j] = Complex64::new(0.0, 0.0);
            for i in 0..n {
                out.set(i, j, col[i]);
            }
        }
        out
    }
}

/// Inverse of a complex square matrix via LU with partial pivoting; the
/// cavity message matrices are symmetric but not Hermitian, so no complex
/// Cholesky applies.
pub fn complex_inverse(m: &ComplexDenseMatrix) -> Result<ComplexDenseMatrix, LinalgError> {
    Ok(complex_lu(m)?.inverse())
}
