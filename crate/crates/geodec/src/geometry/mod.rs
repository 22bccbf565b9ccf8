//! Geometric objects attached to a quadruple `(A, B, C, D)`.

mod friends;
mod placement;
mod poles;
mod subspaces;

pub use friends::{input_containing_friend, output_nulling_friend, FriendF, FriendG};
pub use placement::{place, split_target, split_target_into};
pub use poles::{
    assign_on_quotient, assign_on_quotient_s, assignable_blocks, assignable_blocks_s,
    assignable_count, assignable_count_s, fixed_poles_s, fixed_poles_s_with, fixed_poles_v,
    fixed_poles_v_with, invariant_zeros,
};
pub use subspaces::{
    b_ker_d, c_inv_im_d, detectability_on, input_containing_residual, is_input_containing,
    is_output_nulling, is_self_bounded, is_self_hidden, output_nulling_residual, qstar,
    reachability_on, rstar, sstar, vstar,
};

use crate::error::{Error, Result};
use crate::linalg::{check_finite, Matrix};

/// A state-space quadruple with `A: n×n`, `B: n×m`, `C: p×n`, `D: p×m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadruple {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

impl Quadruple {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.nrows();
        let bad = |detail: String| {
            Err(Error::Dimension {
                op: "Quadruple::new",
                detail,
            })
        };
        if a.ncols() != n {
            return bad(format!("A is {}x{}", n, a.ncols()));
        }
        if b.nrows() != n {
            return bad(format!("B has {} rows, expected {n}", b.nrows()));
        }
        if c.ncols() != n {
            return bad(format!("C has {} columns, expected {n}", c.ncols()));
        }
        if d.shape() != (c.nrows(), b.ncols()) {
            return bad(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            ));
        }
        for (m, name) in [(&a, "A"), (&b, "B"), (&c, "C"), (&d, "D")] {
            check_finite(m, name)?;
        }
        Ok(Self { a, b, c, d })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// `(Aᵀ, Cᵀ, Bᵀ, Dᵀ)`.
    pub fn dual(&self) -> Self {
        Self {
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
        }
    }
}
