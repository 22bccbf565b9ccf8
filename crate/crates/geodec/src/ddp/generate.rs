//! Seeded random instances.
//!
//! Solvable plants are assembled so that a known triple `(S, V; K)` satisfies
//! every solvability condition: in adapted coordinates `S ⊆ V ⊆ X` the
//! statically compensated plant is built block-triangular with friends mixed
//! in, the gain is then removed, and the result is rotated by a random
//! orthogonal matrix.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Plant;
use crate::geometry::Quadruple;
use crate::linalg::Matrix;
use crate::subspace::Subspace;

/// Plant dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub r: usize,
}

/// Structural options for [`solvable_plant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Shape {
    /// Keep the part of `X` outside the planted `V` unreachable from `[B H]`.
    pub unreachable: bool,
    /// Make the planted `S` unobservable from `[C; E]`.
    pub unobservable: bool,
}

/// A solvable plant with the triple used to build it.
#[derive(Debug, Clone)]
pub struct Planted {
    pub plant: Plant,
    pub s: Subspace,
    pub v: Subspace,
    pub k: Matrix,
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Gaussian matrix of the given rank (capped by the shape).
pub fn low_rank<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, rank: usize) -> Matrix {
    let k = rank.min(rows).min(cols);
    gaussian(rng, rows, k) * gaussian(rng, k, cols)
}

/// Haar-like orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    gaussian(rng, n, n).qr().q()
}

/// A quadruple whose `B`, `C`, `D` have random (possibly deficient) rank.
pub fn random_quadruple<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, p: usize) -> Quadruple {
    let rb = rng.random_range(0..=m.min(n));
    let rc = rng.random_range(0..=p.min(n));
    let rd = rng.random_range(0..=m.min(p));
    Quadruple {
        a: gaussian(rng, n, n),
        b: low_rank(rng, n, m, rb.max(m.min(n).min(1))),
        c: low_rank(rng, p, n, rc.max(p.min(n).min(1))),
        d: low_rank(rng, p, m, rd),
    }
}

fn zero_rows(m: &mut Matrix, from: usize, to: usize) {
    for i in from..to {
        m.row_mut(i).fill(0.0);
    }
}

fn zero_cols(m: &mut Matrix, from: usize, to: usize) {
    for j in from..to {
        m.column_mut(j).fill(0.0);
    }
}

/// A plant solvable by construction, with the planted `(S, V; K)`.
pub fn solvable_plant<R: Rng + ?Sized>(rng: &mut R, d: Dims, shape: Shape) -> Planted {
    let Dims { n, m, p, q, r } = d;
    let mut v = rng.random_range(0..=n);
    if shape.unreachable && n > 0 {
        v = v.min(n - 1);
    }
    let mut s = rng.random_range(0..=v);
    if shape.unobservable && v > 0 {
        s = s.max(1);
    }

    let mut a0 = gaussian(rng, n, n);
    for j in 0..n {
        let block_j = if j < s {
            0
        } else if j < v {
            1
        } else {
            2
        };
        let first_zero_row = match block_j {
            0 => s,
            1 => v,
            _ => n,
        };
        for i in first_zero_row..n {
            a0[(i, j)] = 0.0;
        }
    }
    let mut e0 = gaussian(rng, r, n);
    zero_cols(&mut e0, 0, v);
    let mut h1 = gaussian(rng, n, q);
    zero_rows(&mut h1, s, n);

    let mut bp = gaussian(rng, n, m);
    if shape.unreachable {
        zero_rows(&mut bp, v, n);
    }
    let rank_dz = rng.random_range(0..=r.min(m));
    let dzp = low_rank(rng, r, m, rank_dz);
    let mut cp = gaussian(rng, p, n);
    if shape.unobservable {
        zero_cols(&mut cp, 0, s);
    }
    let gyp = gaussian(rng, p, q);
    let rank_dy = rng.random_range(0..=p.min(m));
    let dy = low_rank(rng, p, m, rank_dy.max(p.min(m).min(1)));

    let mut f0 = gaussian(rng, m, n);
    zero_cols(&mut f0, 0, s);
    let mut g0 = gaussian(rng, n, p);
    zero_rows(&mut g0, v, n);

    let ap = &a0 + &bp * &f0 + &g0 * &cp;
    let ep = &e0 + &dzp * &f0;
    let hp = &h1 + &g0 * &gyp;

    let eye = Matrix::identity(m, m);
    let k = loop {
        let k = gaussian(rng, m, p) * 0.5;
        if (&eye + &k * &dy).determinant().abs() > 1e-2 {
            break k;
        }
    };

    let a = &ap - &bp * &k * &cp;
    let h = &hp - &bp * &k * &gyp;
    let e = &ep - &dzp * &k * &cp;
    let g_z = -(&dzp * &k * &gyp);

    let t = orthogonal(rng, n);
    let tt = t.transpose();
    let plant = Plant {
        a: &t * a * &tt,
        b: &t * bp,
        h: &t * h,
        c: cp * &tt,
        d_y: dy,
        g_y: gyp,
        e: e * &tt,
        d_z: dzp,
        g_z,
    };
    let basis = |k: usize| Subspace::coordinate(n, &(0..k).collect::<Vec<_>>());
    let rotate = |sub: Subspace| {
        crate::subspace::image(&(&t * sub.basis()), &crate::linalg::Tolerances::default())
    };
    Planted {
        plant,
        s: rotate(basis(s)),
        v: rotate(basis(v)),
        k,
    }
}

/// A plant that cannot be decoupled: `D_z = 0` with `G_z ≠ 0`, so condition
/// (i) fails for every `V`.
pub fn unsolvable_plant<R: Rng + ?Sized>(rng: &mut R, d: Dims) -> Plant {
    let Dims { n, m, p, q, r } = d;
    let mut g_z = gaussian(rng, r, q);
    if r > 0 && q > 0 {
        g_z[(0, 0)] = 1.0 + g_z[(0, 0)].abs();
    }
    Plant {
        a: gaussian(rng, n, n),
        b: gaussian(rng, n, m),
        h: gaussian(rng, n, q),
        c: gaussian(rng, p, n),
        d_y: gaussian(rng, p, m),
        g_y: gaussian(rng, p, q),
        e: gaussian(rng, r, n),
        d_z: Matrix::zeros(r, m),
        g_z,
    }
}
