//! Eigenvalue assignment for `(A, B)` by recursive deflation.
//!
//! The pair is first reduced to its controllable part with an orthonormal
//! change of basis. Each step then assigns one real eigenvalue (as many copies
//! at once as the input directions allow) or one conjugate pair as a real
//! 2x2 block, and deflates the assigned invariant subspace.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    complement_of_orthonormal, hstack, norm2, orth_scaled, pinv, svd, Matrix, Tolerances,
};
use crate::subspace::{image, kernel, smallest_invariant};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unit {
    Real(f64),
    Pair(f64, f64),
}

impl Unit {
    fn size(&self) -> usize {
        match self {
            Unit::Real(_) => 1,
            Unit::Pair(..) => 2,
        }
    }

    fn re(&self) -> f64 {
        match *self {
            Unit::Real(x) | Unit::Pair(x, _) => x,
        }
    }

    fn push_into(&self, out: &mut Vec<Complex64>) {
        match *self {
            Unit::Real(x) => out.push(Complex64::new(x, 0.0)),
            Unit::Pair(re, im) => {
                out.push(Complex64::new(re, -im));
                out.push(Complex64::new(re, im));
            }
        }
    }
}

/// Group a conjugate-closed list into real values and pairs (imaginary part
/// positive), sorted by ascending real part.
fn units(values: &[Complex64], tol: f64) -> Result<Vec<Unit>> {
    let is_real = |z: &Complex64| z.im.abs() <= tol * 1f64.max(z.norm());
    let mut out: Vec<Unit> = values
        .iter()
        .filter(|z| is_real(z))
        .map(|z| Unit::Real(z.re))
        .collect();
    let mut upper: Vec<Complex64> = values
        .iter()
        .filter(|z| !is_real(z) && z.im > 0.0)
        .cloned()
        .collect();
    let mut lower: Vec<Complex64> = values
        .iter()
        .filter(|z| !is_real(z) && z.im < 0.0)
        .cloned()
        .collect();
    if upper.len() != lower.len() {
        return Err(Error::NotConjugateClosed);
    }
    while let Some(z) = upper.pop() {
        let idx = lower
            .iter()
            .position(|w| (w.conj() - z).norm() <= tol * 1f64.max(z.norm()))
            .ok_or(Error::NotConjugateClosed)?;
        let w = lower.swap_remove(idx);
        out.push(Unit::Pair(0.5 * (z.re + w.re), 0.5 * (z.im - w.im)));
    }
    out.sort_by(|a, b| a.re().total_cmp(&b.re()).then(a.size().cmp(&b.size())));
    Ok(out)
}

/// Split a conjugate-closed target list into a part of size `n_first` and the
/// rest. Values are taken in ascending real part; conjugate pairs stay
/// together, so the earliest values that can fill `n_first` exactly are used.
pub fn split_target(
    values: &[Complex64],
    n_first: usize,
    tol: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let total = values.len();
    if n_first > total {
        return Err(Error::TargetSplit(format!(
            "{n_first} of {total} values requested"
        )));
    }
    let mut parts = split_target_into(values, &[n_first, total - n_first], tol)?;
    let second = parts.pop().expect("two parts");
    let first = parts.pop().expect("two parts");
    Ok((first, second))
}

/// Split a conjugate-closed target list into consecutive blocks of the given
/// sizes. Each block in turn takes the earliest values (ascending real part)
/// that leave the remaining blocks fillable. A real block of odd size needs a
/// real value, which is the only obstruction.
pub fn split_target_into(
    values: &[Complex64],
    sizes: &[usize],
    tol: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let us = units(values, tol)?;
    let total: usize = us.iter().map(Unit::size).sum();
    let want: usize = sizes.iter().sum();
    if want != total {
        return Err(Error::TargetSplit(format!(
            "blocks of sizes {sizes:?} need {want} values, got {total}"
        )));
    }
    // Reals and block sizes left over decide feasibility on their own.
    let fillable =
        |reals: usize, blocks: &[usize]| blocks.iter().filter(|&&b| b % 2 == 1).count() <= reals;
    let mut reals = us.iter().filter(|u| u.size() == 1).count();
    if !fillable(reals, sizes) {
        return Err(Error::TargetSplit(format!(
            "conjugate pairs prevent blocks of sizes {sizes:?}"
        )));
    }
    let mut pool: Vec<Unit> = us;
    let mut out = Vec::with_capacity(sizes.len());
    for (k, &size) in sizes.iter().enumerate() {
        let mut block = Vec::new();
        let mut left = size;
        let mut rest = Vec::new();
        for u in pool {
            let s = u.size();
            let r_after = reals - usize::from(s == 1);
            let mut blocks = vec![left.wrapping_sub(s)];
            blocks.extend_from_slice(&sizes[k + 1..]);
            if s <= left && fillable(r_after, &blocks) {
                u.push_into(&mut block);
                left -= s;
                reals = r_after;
            } else {
                rest.push(u);
            }
        }
        debug_assert_eq!(left, 0);
        out.push(block);
        pool = rest;
    }
    Ok(out)
}

/// Feedback `K` such that the controllable part of `A + BK` has spectrum
/// `target`; the uncontrollable part is left untouched.
pub fn place(a: &Matrix, b: &Matrix, target: &[Complex64], tol: &Tolerances) -> Result<Matrix> {
    let n = a.nrows();
    let m = b.ncols();
    let reach = smallest_invariant(a, &image(b, tol), tol)?;
    if reach.dim() != target.len() {
        return Err(Error::TargetSize {
            expected: reach.dim(),
            got: target.len(),
        });
    }
    if reach.dim() == 0 {
        return Ok(Matrix::zeros(m, n));
    }
    let qc = reach.basis();
    let a11 = qc.transpose() * a * qc;
    let b1 = qc.transpose() * b;
    let us = units(target, tol.eig_match)?;
    let k1 = place_controllable(&a11, &b1, us, tol)?;
    Ok(k1 * qc.transpose())
}

fn place_controllable(
    a: &Matrix,
    b: &Matrix,
    mut us: Vec<Unit>,
    tol: &Tolerances,
) -> Result<Matrix> {
    let n = a.nrows();
    let m = b.ncols();
    if n == 0 {
        return Ok(Matrix::zeros(m, 0));
    }
    let head = us[0];
    let (x, w) = match head {
        Unit::Real(lambda) => {
            let same: Vec<usize> = (0..us.len())
                .filter(|&i| match us[i] {
                    Unit::Real(mu) => (mu - lambda).abs() <= tol.eig_match * 1f64.max(lambda.abs()),
                    _ => false,
                })
                .collect();
            let (x, w) = real_eigvectors(a, b, lambda, same.len(), tol)?;
            for &i in same.iter().take(x.ncols()).rev() {
                us.remove(i);
            }
            (x, w)
        }
        Unit::Pair(re, im) => {
            us.remove(0);
            pair_block(a, b, re, im, tol)?
        }
    };
    let f1 = &w * pinv(&x, tol);
    let closed = a + b * &f1;
    let qd = orth_scaled(&x, 0.0, tol);
    if qd.ncols() != x.ncols() {
        return Err(Error::Inconsistent(
            "assigned eigenvectors are dependent".into(),
        ));
    }
    let u2 = complement_of_orthonormal(&qd);
    let a22 = u2.transpose() * &closed * &u2;
    let b2 = u2.transpose() * b;
    let f2 = place_controllable(&a22, &b2, us, tol)?;
    Ok(f1 + f2 * u2.transpose())
}

/// Up to `k` independent vectors `x` with `A x + B w = λ x`.
fn real_eigvectors(
    a: &Matrix,
    b: &Matrix,
    lambda: f64,
    k: usize,
    tol: &Tolerances,
) -> Result<(Matrix, Matrix)> {
    let n = a.nrows();
    let shifted = a - Matrix::identity(n, n) * lambda;
    let z = kernel(&hstack(&[&shifted, b]), tol);
    let zb = z.basis();
    let x = zb.rows(0, n).into_owned();
    let w = zb.rows(n, b.ncols()).into_owned();
    if x.ncols() == 0 {
        return Err(Error::Inconsistent("pair is not controllable".into()));
    }
    let d = svd(&x);
    let s = &d.s;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cut = tol.rank_cutoff(smax, 0.0, x.nrows(), x.ncols());
    let keep: Vec<usize> = order.into_iter().filter(|&i| s[i] > cut).take(k).collect();
    if keep.is_empty() {
        return Err(Error::Inconsistent("no eigenvector available".into()));
    }
    let mut v = Matrix::zeros(x.ncols(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        v.set_column(j, &d.v.column(i));
    }
    Ok((&x * &v, &w * &v))
}

/// Real `X (n×2)`, `W (m×2)` with `A X + B W = X [[re, im], [-im, re]]`.
fn pair_block(
    a: &Matrix,
    b: &Matrix,
    re: f64,
    im: f64,
    tol: &Tolerances,
) -> Result<(Matrix, Matrix)> {
    let n = a.nrows();
    let m = b.ncols();
    let eye = Matrix::identity(n, n);
    let shifted = a - &eye * re;
    let mut l = Matrix::zeros(2 * n, 2 * n + 2 * m);
    l.view_mut((0, 0), (n, n)).copy_from(&shifted);
    l.view_mut((0, n), (n, n)).copy_from(&(&eye * im));
    l.view_mut((0, 2 * n), (n, m)).copy_from(b);
    l.view_mut((n, 0), (n, n)).copy_from(&(&eye * -im));
    l.view_mut((n, n), (n, n)).copy_from(&shifted);
    l.view_mut((n, 2 * n + m), (n, m)).copy_from(b);
    let z = kernel(&l, tol);
    let zb = z.basis();
    let split = |col: &Matrix| -> (Matrix, Matrix) {
        let mut x = Matrix::zeros(n, 2);
        let mut w = Matrix::zeros(m, 2);
        x.set_column(0, &col.rows(0, n).column(0));
        x.set_column(1, &col.rows(n, n).column(0));
        w.set_column(0, &col.rows(2 * n, m).column(0));
        w.set_column(1, &col.rows(2 * n + m, m).column(0));
        (x, w)
    };
    let smin = |x: &Matrix| svd(x).s.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut best: Option<(f64, Matrix, Matrix)> = None;
    let mut candidates: Vec<Matrix> = (0..zb.ncols())
        .map(|j| Matrix::from_column_slice(zb.nrows(), 1, zb.column(j).as_slice()))
        .collect();
    if zb.ncols() > 1 {
        let mut mix = Matrix::zeros(zb.nrows(), 1);
        for j in 0..zb.ncols() {
            mix += zb.column(j) * (1.0 / (j + 1) as f64);
        }
        candidates.push(mix);
    }
    for c in candidates {
        let (x, w) = split(&c);
        let s = smin(&x) / norm2(&x).max(f64::MIN_POSITIVE);
        if best.as_ref().map_or(true, |(bs, _, _)| s > *bs) {
            best = Some((s, x, w));
        }
    }
    match best {
        Some((s, x, w)) if s > 1e-8 => Ok((x, w)),
        _ => Err(Error::Inconsistent(
            "no real invariant plane for complex pair".into(),
        )),
    }
}
