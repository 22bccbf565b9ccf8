use super::subspaces::{input_containing_residual, output_nulling_residual};
use super::Quadruple;
use crate::error::{Error, Result};
use crate::linalg::{hstack, norm2, pinv, vstack, Matrix, Tolerances};
use crate::subspace::Subspace;

/// A state feedback `F` with `(A + BF) V ⊆ V` and `(C + DF) V = 0`.
#[derive(Debug, Clone)]
pub struct FriendF {
    f: Matrix,
    v: Subspace,
}

impl FriendF {
    /// Wrap a candidate friend after checking both invariance conditions.
    pub fn new(q: &Quadruple, f: Matrix, v: Subspace, tol: &Tolerances) -> Result<Self> {
        let r = friend_f_residual(q, &f, &v);
        if r > tol.residual {
            return Err(Error::NotOutputNulling { residual: r });
        }
        Ok(Self { f, v })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.f
    }

    pub fn subspace(&self) -> &Subspace {
        &self.v
    }

    pub fn into_matrix(self) -> Matrix {
        self.f
    }
}

/// An output injection `G` with `[A + GC, B + GD](S ⊕ U) ⊆ S`.
#[derive(Debug, Clone)]
pub struct FriendG {
    g: Matrix,
    s: Subspace,
}

impl FriendG {
    pub fn new(q: &Quadruple, g: Matrix, s: Subspace, tol: &Tolerances) -> Result<Self> {
        let r = friend_g_residual(q, &g, &s);
        if r > tol.residual {
            return Err(Error::NotInputContaining { residual: r });
        }
        Ok(Self { g, s })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    pub fn subspace(&self) -> &Subspace {
        &self.s
    }

    pub fn into_matrix(self) -> Matrix {
        self.g
    }
}

fn friend_f_residual(q: &Quadruple, f: &Matrix, v: &Subspace) -> f64 {
    let closed = vstack(&[&(&q.a + &q.b * f), &(&q.c + &q.d * f)]);
    let img = &closed * v.basis();
    let n = q.n();
    let top = img.rows(0, n).into_owned();
    let bottom = img.rows(n, q.p()).into_owned();
    let scale = norm2(&closed).max(1.0);
    v.residual_of(&top).max(norm2(&bottom)) / scale
}

fn friend_g_residual(q: &Quadruple, g: &Matrix, s: &Subspace) -> f64 {
    let closed = hstack(&[&(&q.a + g * &q.c), &(&q.b + g * &q.d)]);
    let dom = s.direct_sum(&Subspace::whole(q.m()));
    s.residual_of(&(&closed * dom.basis())) / norm2(&closed).max(1.0)
}

/// Friend of an output-nulling `V`: each basis vector `v_i` is sent to the
/// least-squares `u_i` solving `A v_i + B u_i ∈ V`, `C v_i + D u_i = 0`;
/// `F` vanishes on `V^⊥`.
pub fn output_nulling_friend(q: &Quadruple, v: &Subspace, tol: &Tolerances) -> Result<FriendF> {
    if v.ambient_dim() != q.n() {
        return Err(Error::Dimension {
            op: "output_nulling_friend",
            detail: format!(
                "subspace in R^{}, state dimension {}",
                v.ambient_dim(),
                q.n()
            ),
        });
    }
    let r = output_nulling_residual(q, v, tol);
    if r > tol.residual {
        return Err(Error::NotOutputNulling { residual: r });
    }
    let (n, m, p, k) = (q.n(), q.m(), q.p(), v.dim());
    if k == 0 {
        return FriendF::new(q, Matrix::zeros(m, n), v.clone(), tol);
    }
    let lhs = vstack(&[
        &hstack(&[v.basis(), &(-&q.b)]),
        &hstack(&[&Matrix::zeros(p, k), &(-&q.d)]),
    ]);
    let rhs = vstack(&[&q.a, &q.c]) * v.basis();
    let sol = pinv(&lhs, tol) * rhs;
    let u = sol.rows(k, m).into_owned();
    FriendF::new(q, u * v.basis().transpose(), v.clone(), tol)
}

/// Friend of an input-containing `S`, obtained by transposing the
/// output-nulling friend of `S^⊥` for the dual quadruple.
pub fn input_containing_friend(q: &Quadruple, s: &Subspace, tol: &Tolerances) -> Result<FriendG> {
    if s.ambient_dim() != q.n() {
        return Err(Error::Dimension {
            op: "input_containing_friend",
            detail: format!(
                "subspace in R^{}, state dimension {}",
                s.ambient_dim(),
                q.n()
            ),
        });
    }
    let r = input_containing_residual(q, s, tol);
    if r > tol.residual {
        return Err(Error::NotInputContaining { residual: r });
    }
    let fd = output_nulling_friend(&q.dual(), &s.perp(), tol)
        .map_err(|_| Error::NotInputContaining { residual: r })?;
    FriendG::new(q, fd.into_matrix().transpose(), s.clone(), tol)
}
