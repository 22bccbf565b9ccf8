//! Real subspaces carried by orthonormal bases.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    complement_of_orthonormal, hstack, norm2, orth_scaled, spectral_range, Matrix, Tolerances,
};
use crate::spectrum::{eigenvalues, SpectrumMultiset};

/// A subspace of `R^n` stored as an orthonormal basis (possibly with zero
/// columns). Values are immutable; every operation returns a new subspace.
#[derive(Clone)]
pub struct Subspace {
    basis: Matrix,
    rank_rel: f64,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(dim {} in R^{})",
            self.dim(),
            self.ambient_dim()
        )
    }
}

impl Subspace {
    fn from_orthonormal(basis: Matrix, tol: &Tolerances) -> Self {
        Self {
            basis,
            rank_rel: tol.rank_rel,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_orthonormal(Matrix::zeros(n, 0), &Tolerances::default())
    }

    pub fn whole(n: usize) -> Self {
        Self::from_orthonormal(Matrix::identity(n, n), &Tolerances::default())
    }

    /// Span of the given coordinate axes (0-based).
    pub fn coordinate(n: usize, axes: &[usize]) -> Self {
        let mut b = Matrix::zeros(n, axes.len());
        for (j, &i) in axes.iter().enumerate() {
            b[(i, j)] = 1.0;
        }
        Self::from_orthonormal(b, &Tolerances::default())
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank_rel(&self) -> f64 {
        self.rank_rel
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_whole(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    pub fn perp(&self) -> Self {
        Self {
            basis: complement_of_orthonormal(&self.basis),
            rank_rel: self.rank_rel,
        }
    }

    /// Distance of the columns of `x` from the subspace (spectral norm of the
    /// projection residual).
    pub fn residual_of(&self, x: &Matrix) -> f64 {
        if x.ncols() == 0 {
            return 0.0;
        }
        let r = x - &self.basis * (self.basis.transpose() * x);
        norm2(&r)
    }

    pub fn sum(&self, other: &Subspace, tol: &Tolerances) -> Self {
        assert_same_ambient(self, other, "sum");
        let m = hstack(&[&self.basis, &other.basis]);
        Self::from_orthonormal(orth_scaled(&m, 1.0, tol), tol)
    }

    pub fn intersect(&self, other: &Subspace, tol: &Tolerances) -> Self {
        assert_same_ambient(self, other, "intersect");
        self.perp().sum(&other.perp(), tol).perp()
    }

    /// `self ⊕ other` embedded in `R^{n1+n2}` as a block-diagonal basis.
    pub fn direct_sum(&self, other: &Subspace) -> Self {
        Self {
            basis: crate::linalg::blkdiag(&self.basis, &other.basis),
            rank_rel: self.rank_rel,
        }
    }

    /// `S2 ⊆ self`, decided on the projection residual.
    pub fn contains(&self, s2: &Subspace, tol: &Tolerances) -> bool {
        assert_same_ambient(self, s2, "contains");
        if s2.dim() > self.dim() {
            return false;
        }
        self.residual_of(&s2.basis) <= tol.residual
    }

    pub fn equals(&self, other: &Subspace, tol: &Tolerances) -> bool {
        self.dim() == other.dim() && self.contains(other, tol) && other.contains(self, tol)
    }

    /// Mutual-containment residual: zero iff the subspaces coincide.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.dim() != other.dim() {
            return 1.0;
        }
        self.residual_of(&other.basis)
            .max(other.residual_of(&self.basis))
    }

    /// Orthonormal basis of the part of `self` orthogonal to `inner`; requires
    /// `inner ⊆ self`.
    pub fn complement_within(&self, inner: &Subspace) -> Matrix {
        let p = self.projector() - inner.projector();
        spectral_range(&p)
    }
}

fn assert_same_ambient(a: &Subspace, b: &Subspace, op: &str) {
    assert_eq!(
        a.ambient_dim(),
        b.ambient_dim(),
        "{op}: ambient dimensions differ"
    );
}

/// Column span of `m`.
pub fn image(m: &Matrix, tol: &Tolerances) -> Subspace {
    Subspace::from_orthonormal(orth_scaled(m, 0.0, tol), tol)
}

/// Column span of `m` with the rank cutoff measured against at least `scale`.
pub fn image_scaled(m: &Matrix, scale: f64, tol: &Tolerances) -> Subspace {
    Subspace::from_orthonormal(orth_scaled(m, scale, tol), tol)
}

/// Right null space of `m`.
pub fn kernel(m: &Matrix, tol: &Tolerances) -> Subspace {
    kernel_scaled(m, 0.0, tol)
}

pub fn kernel_scaled(m: &Matrix, scale: f64, tol: &Tolerances) -> Subspace {
    let n = m.ncols();
    if m.nrows() == 0 {
        return Subspace::whole(n);
    }
    let rowspace = orth_scaled(&m.transpose(), scale, tol);
    Subspace::from_orthonormal(complement_of_orthonormal(&rowspace), tol)
}

/// `{x : M x ∈ S}`.
pub fn preimage(m: &Matrix, s: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    if m.nrows() != s.ambient_dim() {
        return Err(Error::Dimension {
            op: "preimage",
            detail: format!(
                "map has {} rows, subspace lives in R^{}",
                m.nrows(),
                s.ambient_dim()
            ),
        });
    }
    let n = m.ncols();
    if s.is_whole() {
        return Ok(Subspace::whole(n));
    }
    let perp = s.perp();
    let p = perp.basis().transpose() * m;
    Ok(kernel_scaled(&p, norm2(m), tol))
}

/// `M S`, the image of a subspace under a map.
pub fn map_image(m: &Matrix, s: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    if m.ncols() != s.ambient_dim() {
        return Err(Error::Dimension {
            op: "map_image",
            detail: format!(
                "map has {} columns, subspace lives in R^{}",
                m.ncols(),
                s.ambient_dim()
            ),
        });
    }
    Ok(image_scaled(&(m * s.basis()), norm2(m), tol))
}

fn check_square(a: &Matrix, n: usize, op: &'static str) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() != n {
        return Err(Error::Dimension {
            op,
            detail: format!("expected {n}x{n}, got {}x{}", a.nrows(), a.ncols()),
        });
    }
    Ok(())
}

/// `⟨A | S⟩`, the smallest A-invariant subspace containing S.
pub fn smallest_invariant(a: &Matrix, s: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let n = s.ambient_dim();
    check_square(a, n, "smallest_invariant")?;
    let scale = norm2(a).max(1.0);
    let mut x = s.clone();
    for _ in 0..=n {
        let ax = a * x.basis();
        let next = image_scaled(&hstack(&[s.basis(), &ax]), scale, tol);
        if next.dim() == x.dim() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// `⟨S | A⟩`, the largest A-invariant subspace contained in S.
pub fn largest_invariant(s: &Subspace, a: &Matrix, tol: &Tolerances) -> Result<Subspace> {
    check_square(a, s.ambient_dim(), "largest_invariant")?;
    Ok(smallest_invariant(&a.transpose(), &s.perp(), tol)?.perp())
}

/// Residual of `A J ⊆ J`, relative to `max(1, ||A||)`.
pub fn invariance_residual(a: &Matrix, j: &Subspace) -> f64 {
    let scale = norm2(a).max(1.0);
    j.residual_of(&(a * j.basis())) / scale
}

/// Spectrum of the map induced by `A` on `outer / inner`.
pub fn quotient_spectrum(
    a: &Matrix,
    inner: &Subspace,
    outer: &Subspace,
    tol: &Tolerances,
) -> Result<SpectrumMultiset> {
    check_square(a, outer.ambient_dim(), "quotient_spectrum")?;
    if inner.ambient_dim() != outer.ambient_dim() {
        return Err(Error::Dimension {
            op: "quotient_spectrum",
            detail: "inner and outer live in different spaces".into(),
        });
    }
    let inc = outer.residual_of(inner.basis());
    if inc > tol.residual || inner.dim() > outer.dim() {
        return Err(Error::NotIncluded { residual: inc });
    }
    for j in [inner, outer] {
        let r = invariance_residual(a, j);
        if r > tol.residual {
            return Err(Error::NotInvariant { residual: r });
        }
    }
    let ext = outer.complement_within(inner);
    let induced = ext.transpose() * a * &ext;
    Ok(SpectrumMultiset::new(eigenvalues(&induced), tol.eig_match))
}
