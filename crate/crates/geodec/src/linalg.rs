//! Dense helpers: tolerances, rank-revealing image/kernel, pseudoinverse and
//! block assembly.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Numerical tolerances shared by every routine.
///
/// `rank_rel` is scaled by the largest singular value and the largest
/// dimension of the matrix being factored. `eig_match` is the radius used when
/// pairing eigenvalues, relative for eigenvalues of modulus above one.
/// `residual` bounds subspace-inclusion and invariance residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_rel: f64,
    pub eig_match: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            eig_match: 1e-6,
            residual: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.rank_rel) && ok(self.eig_match) && ok(self.residual) {
            Ok(())
        } else {
            Err(Error::BadTolerance)
        }
    }

    /// Singular-value cutoff for an `rows x cols` matrix whose largest
    /// singular value is `smax`; `scale` lets callers supply the magnitude of
    /// the data the matrix was derived from, so cancellation noise is not
    /// mistaken for rank.
    pub fn rank_cutoff(&self, smax: f64, scale: f64, rows: usize, cols: usize) -> f64 {
        self.rank_rel * smax.max(scale) * rows.max(cols).max(1) as f64
    }
}

pub fn check_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn to_faer(m: &Matrix) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin singular value decomposition `M = U diag(s) Vᵀ`, values descending.
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

pub fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd {
            u: Matrix::zeros(rows, 0),
            s: Vec::new(),
            v: Matrix::zeros(cols, 0),
        };
    }
    // faer's SVD occasionally stalls on sparse inputs with a few tiny
    // entries; retrying on H M with a fixed reflector H gets past it.
    let (h, d) = match to_faer(m).thin_svd() {
        Ok(d) => (None, d),
        Err(_) => {
            let h = reflector(rows);
            let d = to_faer(&(&h * m))
                .thin_svd()
                .expect("SVD converges after a reflection");
            (Some(h), d)
        }
    };
    let sv = d.S().column_vector();
    let u = from_faer(d.U());
    Svd {
        u: h.map_or(u.clone(), |h| h * u),
        s: (0..k).map(|i| sv[i]).collect(),
        v: from_faer(d.V()),
    }
}

/// The Householder reflector `I - 2wwᵀ/wᵀw` for a fixed dense `w`. It is
/// orthogonal and symmetric, so `H M` keeps singular values and `H A H`
/// keeps eigenvalues.
pub(crate) fn reflector(n: usize) -> Matrix {
    let w = Matrix::from_fn(n, 1, |i, _| 1.0 / (i as f64 + 1.5));
    Matrix::identity(n, n) - &w * w.transpose() * (2.0 / w.norm_squared())
}

/// Largest singular value (spectral norm).
pub fn norm2(m: &Matrix) -> f64 {
    svd(m).s.iter().cloned().fold(0.0, f64::max)
}

/// Orthonormal basis of the column span, with the cutoff measured against
/// `max(sigma_max, scale)`.
pub fn orth_scaled(m: &Matrix, scale: f64, tol: &Tolerances) -> Matrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Matrix::zeros(rows, 0);
    }
    let d = svd(m);
    let u = &d.u;
    let s = &d.s;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cut = tol.rank_cutoff(smax, scale, rows, cols);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > cut && s[i] > 0.0).collect();
    let mut out = Matrix::zeros(rows, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Numerical rank with the same cutoff rule as [`orth_scaled`].
pub fn rank_scaled(m: &Matrix, scale: f64, tol: &Tolerances) -> usize {
    orth_scaled(m, scale, tol).ncols()
}

/// Orthonormal basis for the orthogonal complement of the span of the
/// orthonormal columns `q` inside `R^n`.
pub fn complement_of_orthonormal(q: &Matrix) -> Matrix {
    let n = q.nrows();
    if q.ncols() == 0 {
        return Matrix::identity(n, n);
    }
    if q.ncols() >= n {
        return Matrix::zeros(n, 0);
    }
    let p = Matrix::identity(n, n) - q * q.transpose();
    spectral_range(&p)
}

/// Range of a symmetric matrix with eigenvalues clustered at 0 and 1.
pub(crate) fn spectral_range(p: &Matrix) -> Matrix {
    let n = p.nrows();
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    let sym = (p + p.transpose()) * 0.5;
    let (h, eig) = match to_faer(&sym).self_adjoint_eigen(Side::Lower) {
        Ok(e) => (None, e),
        Err(_) => {
            let h = reflector(n);
            let e = to_faer(&(&h * &sym * &h))
                .self_adjoint_eigen(Side::Lower)
                .expect("symmetric eigensolver converges after a reflection");
            (Some(h), e)
        }
    };
    let vals = eig.S().column_vector();
    let vecs = from_faer(eig.U());
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    let out = Matrix::from_fn(n, keep.len(), |i, j| vecs[(i, keep[j])]);
    h.map_or(out.clone(), |h| h * out)
}

/// Moore-Penrose pseudoinverse with the relative rank cutoff.
pub fn pinv(m: &Matrix, tol: &Tolerances) -> Matrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Matrix::zeros(cols, rows);
    }
    let d = svd(m);
    let (u, v, s) = (&d.u, &d.v, &d.s);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cut = tol.rank_cutoff(smax, 0.0, rows, cols);
    let mut out = Matrix::zeros(cols, rows);
    for (i, &si) in s.iter().enumerate() {
        if si > cut && si > 0.0 {
            out += v.column(i) * u.column(i).transpose() / si;
        }
    }
    out
}

pub fn hstack(parts: &[&Matrix]) -> Matrix {
    let rows = parts.first().map_or(0, |m| m.nrows());
    let cols: usize = parts.iter().map(|m| m.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for m in parts {
        assert_eq!(m.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c), m.shape()).copy_from(*m);
        c += m.ncols();
    }
    out
}

pub fn vstack(parts: &[&Matrix]) -> Matrix {
    let cols = parts.first().map_or(0, |m| m.ncols());
    let rows: usize = parts.iter().map(|m| m.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for m in parts {
        assert_eq!(m.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), m.shape()).copy_from(*m);
        r += m.nrows();
    }
    out
}

/// `[[a, b], [c, d]]`.
pub fn block2(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
    vstack(&[&hstack(&[a, b]), &hstack(&[c, d])])
}

/// Block-diagonal `diag(a, b)`.
pub fn blkdiag(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Inverse of a square matrix, refusing when `|det|` is at or below `floor`.
pub fn inverse_checked(m: &Matrix, floor: f64) -> Result<Matrix> {
    if m.nrows() == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let det = m.determinant();
    if det.is_nan() || det.abs() <= floor {
        return Err(Error::IllPosed { det });
    }
    m.clone().try_inverse().ok_or(Error::IllPosed { det })
}

/// Largest entry in absolute value; zero for empty matrices.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Build a matrix from row-major nested rows.
pub fn from_rows(rows: &[&[f64]]) -> Matrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    Matrix::from_fn(r, c, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_survives_a_stalled_factorization() {
        let mut data = vec![0.0; 42];
        for (j, i) in [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)] {
            data[j * 6 + i] = 1.0;
        }
        data[30..].copy_from_slice(&[
            0.28166213037579346,
            0.485519032438942,
            -0.4316260324462574,
            -0.4746383182921496,
            0.5012525214480299,
            0.14866424626391386,
            -4.571336591058015e-18,
            -0.05505375022680019,
            0.139598392992339,
            0.06643497849577956,
            -0.05565759017968967,
            0.9848705496396856,
        ]);
        let m = Matrix::from_column_slice(6, 7, &data);
        let d = svd(&m);
        let rebuilt = &d.u
            * Matrix::from_diagonal(&nalgebra::DVector::from_vec(d.s.clone()))
            * d.v.transpose();
        assert!((rebuilt - &m).norm() < 1e-12);
        assert!((d.u.transpose() * &d.u - Matrix::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn svd_of_nearly_opposite_columns() {
        let m = Matrix::from_column_slice(
            4,
            2,
            &[
                2.220446049250313e-16,
                3.607461776236573e-16,
                -1.0,
                -7.004438919947485e-16,
                0.0,
                6.310887241768096e-30,
                1.0000000000000002,
                -4.996003610813204e-16,
            ],
        );
        let d = svd(&m);
        assert!((d.s[0] - 2f64.sqrt()).abs() < 1e-14);
        let q = orth_scaled(&m, 1.0, &Tolerances::default());
        assert_eq!(q.ncols(), 1);
        assert!((q[(2, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pinv_identity_and_diag() {
        let tol = Tolerances::default();
        let i3 = Matrix::identity(3, 3);
        assert!((pinv(&i3, &tol) - &i3).norm() < 1e-14);
        let d = from_rows(&[&[2.0, 0.0], &[0.0, 0.0]]);
        let p = pinv(&d, &tol);
        assert!((p - from_rows(&[&[0.5, 0.0], &[0.0, 0.0]])).norm() < 1e-14);
    }

    #[test]
    fn pinv_penrose_identities() {
        let tol = Tolerances::default();
        let m = from_rows(&[
            &[1.0, 2.0, 3.0],
            &[0.5, -1.0, 4.0],
            &[2.0, 0.0, 1.0],
            &[1.5, 1.0, 7.0],
        ]);
        let p = pinv(&m, &tol);
        assert!((&m * &p * &m - &m).norm() < 1e-10);
        assert!((&p * &m * &p - &p).norm() < 1e-10);
        let mp = &m * &p;
        let pm = &p * &m;
        assert!((&mp - mp.transpose()).norm() < 1e-10);
        assert!((&pm - pm.transpose()).norm() < 1e-10);
    }

    #[test]
    fn empty_shapes_are_harmless() {
        let tol = Tolerances::default();
        assert_eq!(orth_scaled(&Matrix::zeros(3, 0), 0.0, &tol).shape(), (3, 0));
        assert_eq!(pinv(&Matrix::zeros(0, 2), &tol).shape(), (2, 0));
        assert_eq!(complement_of_orthonormal(&Matrix::zeros(2, 0)).ncols(), 2);
    }

    #[test]
    fn bad_tolerances_rejected() {
        let t = Tolerances {
            residual: 0.0,
            ..Tolerances::default()
        };
        assert!(t.validate().is_err());
    }
}
