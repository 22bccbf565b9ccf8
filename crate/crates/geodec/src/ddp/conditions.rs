use super::Plant;
use crate::error::Result;
use crate::geometry::{qstar, rstar};
use crate::linalg::{hstack, norm2, vstack, Matrix, Tolerances};
use crate::subspace::{image, kernel_scaled, Subspace};

/// Residual of `im [H; G_z] ⊆ (V ⊕ 0) + im [B; D_z]`.
pub fn condition_i_residual(plant: &Plant, v: &Subspace, tol: &Tolerances) -> f64 {
    let hg = vstack(&[&plant.h, &plant.g_z]);
    let target = v
        .direct_sum(&Subspace::zero(plant.r()))
        .sum(&image(&plant.b_tilde(), tol), tol);
    target.residual_of(&hg) / norm2(&hg).max(1.0)
}

pub fn condition_i(plant: &Plant, v: &Subspace, tol: &Tolerances) -> bool {
    condition_i_residual(plant, v, tol) <= tol.residual
}

/// Residual of `ker [E G_z] ⊇ (S ⊕ W) ∩ ker [C G_y]`.
pub fn condition_ii_residual(plant: &Plant, s: &Subspace, tol: &Tolerances) -> f64 {
    let eg = hstack(&[&plant.e, &plant.g_z]);
    let cg = plant.c_tilde();
    let dom = s
        .direct_sum(&Subspace::whole(plant.q()))
        .intersect(&kernel_scaled(&cg, norm2(&cg), tol), tol);
    norm2(&(&eg * dom.basis())) / norm2(&eg).max(1.0)
}

pub fn condition_ii(plant: &Plant, s: &Subspace, tol: &Tolerances) -> bool {
    condition_ii_residual(plant, s, tol) <= tol.residual
}

/// Residual of `S ⊆ V`.
pub fn condition_iii_residual(s: &Subspace, v: &Subspace) -> f64 {
    v.residual_of(s.basis())
}

/// Residual of `[A+BKC  H+BKG_y; E+D_zKC  G_z+D_zKG_y](S ⊕ W) ⊆ V ⊕ 0`.
pub fn gain_invariance_residual(plant: &Plant, s: &Subspace, v: &Subspace, k: &Matrix) -> f64 {
    let closed = plant.a_tilde() + plant.b_tilde() * k * plant.c_tilde();
    let dom = s.direct_sum(&Subspace::whole(plant.q()));
    let target = v.direct_sum(&Subspace::zero(plant.r()));
    target.residual_of(&(&closed * dom.basis())) / norm2(&closed).max(1.0)
}

/// `V_m`, the smallest self-bounded subspace of `(A, [B H], E, [D_z G_z])`.
pub fn build_vm(plant: &Plant, tol: &Tolerances) -> Result<Subspace> {
    rstar(&plant.vm_quadruple(), tol)
}

/// `S_M`, the largest self-hidden subspace of `(A, H, [C; E], [G_y; G_z])`.
pub fn build_sm(plant: &Plant, tol: &Tolerances) -> Result<Subspace> {
    qstar(&plant.sm_quadruple(), tol)
}
