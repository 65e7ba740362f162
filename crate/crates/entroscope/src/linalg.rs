//! Minimal dense linear algebra backed by the system LAPACK/BLAS.
//!
//! Matrices are column-major `Vec<f64>` buffers. Only the handful of
//! routines the crate needs are wrapped: symmetric eigendecomposition
//! (`dsyevd`) and symmetric rank-k products (`dsyrk`).

use crate::error::{Error, Result};

extern "C" {
    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );

    fn dsyrk_(
        uplo: *const u8,
        trans: *const u8,
        n: *const i32,
        k: *const i32,
        alpha: *const f64,
        a: *const f64,
        lda: *const i32,
        beta: *const f64,
        c: *mut f64,
        ldc: *const i32,
    );

    fn dstev_(
        jobz: *const u8,
        n: *const i32,
        d: *mut f64,
        e: *mut f64,
        z: *mut f64,
        ldz: *const i32,
        work: *mut f64,
        info: *mut i32,
    );
}

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[i + j * rows] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + j * self.rows] = v;
    }

    /// Contiguous storage of column `j`.
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Maximum absolute asymmetry |A[i][j] - A[j][i]| over all pairs.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Maximum deviation from antisymmetry, |A[i][j] + A[j][i]|.
    pub fn skew_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for j in 0..self.cols {
            for i in 0..=j {
                worst = worst.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        worst
    }
}

fn check_square(mat: &Mat) -> Result<i32> {
    if mat.rows != mat.cols {
        return Err(Error::Eigensolver(format!(
            "matrix is {}x{}, expected square",
            mat.rows, mat.cols
        )));
    }
    i32::try_from(mat.rows)
        .map_err(|_| Error::Eigensolver("matrix dimension exceeds i32".into()))
}

fn dsyevd(mat: &Mat, jobz: u8) -> Result<(Vec<f64>, Mat)> {
    let n = check_square(mat)?;
    let mut a = mat.clone();
    let mut w = vec![0.0f64; mat.rows.max(1)];
    let uplo = b'L';
    let mut info: i32 = 0;

    // Workspace query.
    let mut work_query = [0.0f64];
    let mut iwork_query = [0i32];
    let neg_one: i32 = -1;
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &n,
            a.data.as_mut_ptr(),
            &n.max(1),
            w.as_mut_ptr(),
            work_query.as_mut_ptr(),
            &neg_one,
            iwork_query.as_mut_ptr(),
            &neg_one,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!(
            "dsyevd workspace query failed (info = {info})"
        )));
    }

    let lwork = work_query[0] as i32;
    let liwork = iwork_query[0];
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &n,
            a.data.as_mut_ptr(),
            &n.max(1),
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!("dsyevd failed (info = {info})")));
    }
    Ok((w, a))
}

/// Eigendecomposition of a real symmetric matrix (lower triangle is read).
/// Returns eigenvalues in ascending order and eigenvectors as the columns
/// of the returned matrix.
pub fn eigh(mat: &Mat) -> Result<(Vec<f64>, Mat)> {
    dsyevd(mat, b'V')
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn eigvalsh(mat: &Mat) -> Result<Vec<f64>> {
    dsyevd(mat, b'N').map(|(w, _)| w)
}

fn syrk(a: &Mat, trans: u8) -> Mat {
    let (n, k) = if trans == b'N' {
        (a.rows, a.cols)
    } else {
        (a.cols, a.rows)
    };
    let mut c = Mat::zeros(n, n);
    let alpha = 1.0f64;
    let beta = 0.0f64;
    let ni = n as i32;
    let ki = k as i32;
    let lda = a.rows.max(1) as i32;
    let ldc = n.max(1) as i32;
    let uplo = b'L';
    unsafe {
        dsyrk_(
            &uplo,
            &trans,
            &ni,
            &ki,
            &alpha,
            a.data.as_ptr(),
            &lda,
            &beta,
            c.data.as_mut_ptr(),
            &ldc,
        );
    }
    // dsyrk fills the lower triangle only.
    for j in 0..n {
        for i in 0..j {
            let v = c.get(j, i);
            c.set(i, j, v);
        }
    }
    c
}

/// Eigendecomposition of a symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (`e.len() == d.len() - 1`). Returns ascending
/// eigenvalues and eigenvectors as matrix columns.
pub fn eig_tridiag(d: &[f64], e: &[f64]) -> Result<(Vec<f64>, Mat)> {
    let n = d.len();
    assert!(n >= 1 && e.len() + 1 == n);
    let ni = n as i32;
    let mut w = d.to_vec();
    let mut off = e.to_vec();
    off.push(0.0); // dstev wants length n-1; keep a buffer slot for n = 1
    let mut z = Mat::zeros(n, n);
    let mut work = vec![0.0f64; (2 * n).max(1)];
    let mut info: i32 = 0;
    let jobz = b'V';
    unsafe {
        dstev_(
            &jobz,
            &ni,
            w.as_mut_ptr(),
            off.as_mut_ptr(),
            z.data.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!("dstev failed (info = {info})")));
    }
    Ok((w, z))
}

/// C = A Aᵀ, a symmetric `rows x rows` matrix.
pub fn a_at(a: &Mat) -> Mat {
    syrk(a, b'N')
}

/// C = Aᵀ A, a symmetric `cols x cols` matrix.
pub fn at_a(a: &Mat) -> Mat {
    syrk(a, b'T')
}
