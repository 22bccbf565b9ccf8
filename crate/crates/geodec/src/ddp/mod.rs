//! The decoupling plant, its solvability conditions and the gain family.

mod conditions;
pub mod generate;
mod kparam;
mod triples;

pub use conditions::{
    build_sm, build_vm, condition_i, condition_i_residual, condition_ii, condition_ii_residual,
    condition_iii_residual, gain_invariance_residual,
};
pub use kparam::{find_wellposed_k, k_parameterization, KParam, KSearch};
pub use triples::{
    canonical_triples, check_solution_triple, solvability, SolutionTriple, Solvability,
    TripleCheck, TripleKind,
};

use crate::error::{Error, Result};
use crate::geometry::Quadruple;
use crate::linalg::{block2, check_finite, hstack, vstack, Matrix};

/// The plant
///
/// ```text
/// x' = A x + B u + H w
/// y  = C x + D_y u + G_y w
/// z  = E x + D_z u + G_z w
/// ```
///
/// with `n` states, `m` inputs, `q` disturbances, `p` measurements and `r`
/// controlled outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub a: Matrix,
    pub b: Matrix,
    pub h: Matrix,
    pub c: Matrix,
    pub d_y: Matrix,
    pub g_y: Matrix,
    pub e: Matrix,
    pub d_z: Matrix,
    pub g_z: Matrix,
}

impl Plant {
    /// Check dimensional consistency and finiteness.
    pub fn validated(self) -> Result<Self> {
        let (n, m, q, p, r) = (
            self.a.nrows(),
            self.b.ncols(),
            self.h.ncols(),
            self.c.nrows(),
            self.e.nrows(),
        );
        let expect = [
            ("a", &self.a, n, n),
            ("b", &self.b, n, m),
            ("h", &self.h, n, q),
            ("c", &self.c, p, n),
            ("d_y", &self.d_y, p, m),
            ("g_y", &self.g_y, p, q),
            ("e", &self.e, r, n),
            ("d_z", &self.d_z, r, m),
            ("g_z", &self.g_z, r, q),
        ];
        for (name, mat, rows, cols) in expect {
            if mat.shape() != (rows, cols) {
                return Err(Error::Dimension {
                    op: "Plant",
                    detail: format!(
                        "{name} is {}x{}, expected {rows}x{cols} (n={n}, m={m}, q={q}, p={p}, r={r})",
                        mat.nrows(),
                        mat.ncols()
                    ),
                });
            }
            check_finite(mat, name)?;
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    pub fn q(&self) -> usize {
        self.h.ncols()
    }
    pub fn p(&self) -> usize {
        self.c.nrows()
    }
    pub fn r(&self) -> usize {
        self.e.nrows()
    }

    /// `(A, B, E, D_z)`: control input to controlled output.
    pub fn control_quadruple(&self) -> Quadruple {
        Quadruple {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.e.clone(),
            d: self.d_z.clone(),
        }
    }

    /// `(A, H, C, G_y)`: disturbance to measurement.
    pub fn measurement_quadruple(&self) -> Quadruple {
        Quadruple {
            a: self.a.clone(),
            b: self.h.clone(),
            c: self.c.clone(),
            d: self.g_y.clone(),
        }
    }

    /// `(A, [B H], E, [D_z G_z])`.
    pub fn vm_quadruple(&self) -> Quadruple {
        Quadruple {
            a: self.a.clone(),
            b: hstack(&[&self.b, &self.h]),
            c: self.e.clone(),
            d: hstack(&[&self.d_z, &self.g_z]),
        }
    }

    /// `(A, H, [C; E], [G_y; G_z])`.
    pub fn sm_quadruple(&self) -> Quadruple {
        Quadruple {
            a: self.a.clone(),
            b: self.h.clone(),
            c: vstack(&[&self.c, &self.e]),
            d: vstack(&[&self.g_y, &self.g_z]),
        }
    }

    /// `Ã = [A H; E G_z]`.
    pub fn a_tilde(&self) -> Matrix {
        block2(&self.a, &self.h, &self.e, &self.g_z)
    }

    /// `B̃ = [B; D_z]`.
    pub fn b_tilde(&self) -> Matrix {
        vstack(&[&self.b, &self.d_z])
    }

    /// `C̃ = [C G_y]`.
    pub fn c_tilde(&self) -> Matrix {
        hstack(&[&self.c, &self.g_y])
    }
}
