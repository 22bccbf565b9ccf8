use super::friends::{input_containing_friend, output_nulling_friend, FriendF, FriendG};
use super::Quadruple;
use crate::error::{Error, Result};
use crate::linalg::{hstack, norm2, vstack, Matrix, Tolerances};
use crate::subspace::{
    image, kernel_scaled, largest_invariant, map_image, preimage, smallest_invariant, Subspace,
};

fn stacked_ac(q: &Quadruple) -> Matrix {
    vstack(&[&q.a, &q.c])
}

fn stacked_bd(q: &Quadruple) -> Matrix {
    vstack(&[&q.b, &q.d])
}

/// `B ker D`.
pub fn b_ker_d(q: &Quadruple, tol: &Tolerances) -> Subspace {
    let kd = kernel_scaled(&q.d, norm2(&q.d), tol);
    map_image(&q.b, &kd, tol).expect("B and D share a column count")
}

/// `C⁻¹ im D`.
pub fn c_inv_im_d(q: &Quadruple, tol: &Tolerances) -> Subspace {
    preimage(&q.c, &image(&q.d, tol), tol).expect("C and D share a row count")
}

fn check_ambient(q: &Quadruple, s: &Subspace, op: &'static str) -> Result<()> {
    if s.ambient_dim() != q.n() {
        return Err(Error::Dimension {
            op,
            detail: format!(
                "subspace in R^{}, state dimension {}",
                s.ambient_dim(),
                q.n()
            ),
        });
    }
    Ok(())
}

/// Residual of `[A; C] V ⊆ (V ⊕ 0) + im [B; D]`, relative to `max(1, ||[A; C]||)`.
pub fn output_nulling_residual(q: &Quadruple, v: &Subspace, tol: &Tolerances) -> f64 {
    let ac = stacked_ac(q);
    let target = v
        .direct_sum(&Subspace::zero(q.p()))
        .sum(&image(&stacked_bd(q), tol), tol);
    target.residual_of(&(&ac * v.basis())) / norm2(&ac).max(1.0)
}

pub fn is_output_nulling(q: &Quadruple, v: &Subspace, tol: &Tolerances) -> bool {
    output_nulling_residual(q, v, tol) <= tol.residual
}

/// Residual of `[A B]((S ⊕ U) ∩ ker [C D]) ⊆ S`, relative to `max(1, ||[A B]||)`.
pub fn input_containing_residual(q: &Quadruple, s: &Subspace, tol: &Tolerances) -> f64 {
    let ab = hstack(&[&q.a, &q.b]);
    let cd = hstack(&[&q.c, &q.d]);
    let dom = s
        .direct_sum(&Subspace::whole(q.m()))
        .intersect(&kernel_scaled(&cd, norm2(&cd), tol), tol);
    s.residual_of(&(&ab * dom.basis())) / norm2(&ab).max(1.0)
}

pub fn is_input_containing(q: &Quadruple, s: &Subspace, tol: &Tolerances) -> bool {
    input_containing_residual(q, s, tol) <= tol.residual
}

/// Largest output-nulling subspace, by the non-increasing sequence
/// `V_{i+1} = [A; C]⁻¹((V_i ⊕ 0) + im [B; D])` started at `R^n`.
pub fn vstar(q: &Quadruple, tol: &Tolerances) -> Subspace {
    let ac = stacked_ac(q);
    let img_bd = image(&stacked_bd(q), tol);
    let zero_y = Subspace::zero(q.p());
    let mut v = Subspace::whole(q.n());
    for _ in 0..=q.n() {
        let target = v.direct_sum(&zero_y).sum(&img_bd, tol);
        let next = preimage(&ac, &target, tol).expect("stacked shapes agree");
        if next.dim() == v.dim() {
            return next;
        }
        v = next;
    }
    v
}

/// Smallest input-containing subspace, as the complement of `V*` of the dual.
pub fn sstar(q: &Quadruple, tol: &Tolerances) -> Subspace {
    vstar(&q.dual(), tol).perp()
}

/// `R_V = ⟨A + BF | V ∩ B ker D⟩`.
pub fn reachability_on(q: &Quadruple, f: &FriendF, tol: &Tolerances) -> Result<Subspace> {
    let v = f.subspace();
    check_ambient(q, v, "reachability_on")?;
    let start = v.intersect(&b_ker_d(q, tol), tol);
    smallest_invariant(&(&q.a + &q.b * f.matrix()), &start, tol)
}

/// `Q_S = ⟨S + C⁻¹ im D | A + GC⟩`.
pub fn detectability_on(q: &Quadruple, g: &FriendG, tol: &Tolerances) -> Result<Subspace> {
    let s = g.subspace();
    check_ambient(q, s, "detectability_on")?;
    let target = s.sum(&c_inv_im_d(q, tol), tol);
    largest_invariant(&target, &(&q.a + g.matrix() * &q.c), tol)
}

pub fn rstar(q: &Quadruple, tol: &Tolerances) -> Result<Subspace> {
    let f = output_nulling_friend(q, &vstar(q, tol), tol)?;
    reachability_on(q, &f, tol)
}

/// `Q* = (R* of the dual)^⊥`, cross-checked against `Q_{S*}`.
pub fn qstar(q: &Quadruple, tol: &Tolerances) -> Result<Subspace> {
    let via_dual = rstar(&q.dual(), tol)?.perp();
    let g = input_containing_friend(q, &sstar(q, tol), tol)?;
    let direct = detectability_on(q, &g, tol)?;
    if !via_dual.equals(&direct, tol) {
        return Err(Error::Inconsistent(format!(
            "Q* by duality (dim {}) differs from Q_S* (dim {})",
            via_dual.dim(),
            direct.dim()
        )));
    }
    Ok(via_dual)
}

/// Output-nulling and `V ⊇ V* ∩ B ker D`; the equivalent test `V ⊇ R*` is
/// evaluated too and a disagreement is reported as an error.
pub fn is_self_bounded(q: &Quadruple, v: &Subspace, tol: &Tolerances) -> Result<bool> {
    check_ambient(q, v, "is_self_bounded")?;
    if !is_output_nulling(q, v, tol) {
        return Ok(false);
    }
    let lower = vstar(q, tol).intersect(&b_ker_d(q, tol), tol);
    let a = v.contains(&lower, tol);
    let b = v.contains(&rstar(q, tol)?, tol);
    if a != b {
        return Err(Error::Inconsistent(
            "self-boundedness criteria disagree".into(),
        ));
    }
    Ok(a)
}

/// Input-containing and `S ⊆ S* + C⁻¹ im D`, cross-checked against `S ⊆ Q*`.
pub fn is_self_hidden(q: &Quadruple, s: &Subspace, tol: &Tolerances) -> Result<bool> {
    check_ambient(q, s, "is_self_hidden")?;
    if !is_input_containing(q, s, tol) {
        return Ok(false);
    }
    let upper = sstar(q, tol).sum(&c_inv_im_d(q, tol), tol);
    let a = upper.contains(s, tol);
    let b = qstar(q, tol)?.contains(s, tol);
    if a != b {
        return Err(Error::Inconsistent(
            "self-hiddenness criteria disagree".into(),
        ));
    }
    Ok(a)
}
