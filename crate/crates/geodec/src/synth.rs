//! Observer-based compensator synthesis, closed-loop assembly and the
//! Markov-parameter decoupling check.
//!
//! The triple's gain `K` is realized as the direct feedthrough
//! `D_c = K (I + D_y K)⁻¹` of the compensator. On the plant obtained by
//! closing that static loop, a friend `F'` of `V` and a friend `G'` of `S`
//! give a full-order observer
//!
//! ```text
//! p' = (A' + B'F' + G'C' + G'D_y'F') p − G' y
//! u  = F' p + D_c y
//! ```
//!
//! In the coordinates `(p, x − p)` the subspace `V ⊕ S` is invariant,
//! contains the disturbance image and is annihilated by the output map.

use num_complex::Complex64;

use crate::ddp::{check_solution_triple, Plant, SolutionTriple};
use crate::error::{Error, Result};
use crate::geometry::{
    assign_on_quotient, assign_on_quotient_s, assignable_blocks, assignable_blocks_s,
    assignable_count, assignable_count_s, split_target_into, FriendF, FriendG,
};
use crate::linalg::{block2, hstack, inverse_checked, norm2, vstack, Matrix, Tolerances};
use crate::spectrum::{eigenvalue_conditions, eigenvalues, SpectrumMultiset};
use crate::subspace::Subspace;

/// `p' = A_c p + B_c y`, `u = C_c p + D_c y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub a_c: Matrix,
    pub b_c: Matrix,
    pub c_c: Matrix,
    pub d_c: Matrix,
}

impl Controller {
    pub fn order(&self) -> usize {
        self.a_c.nrows()
    }

    /// Check shapes against the plant.
    pub fn check_shapes(&self, plant: &Plant) -> Result<()> {
        let s = self.order();
        let (m, p) = (plant.m(), plant.p());
        let ok = self.a_c.shape() == (s, s)
            && self.b_c.shape() == (s, p)
            && self.c_c.shape() == (m, s)
            && self.d_c.shape() == (m, p);
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension {
                op: "Controller",
                detail: format!(
                    "a_c {:?}, b_c {:?}, c_c {:?}, d_c {:?} for m={m}, p={p}",
                    self.a_c.shape(),
                    self.b_c.shape(),
                    self.c_c.shape(),
                    self.d_c.shape()
                ),
            })
        }
    }
}

/// The interconnection of plant and compensator, state `(x, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop {
    pub a_hat: Matrix,
    pub h_hat: Matrix,
    pub c_hat: Matrix,
    pub g_hat: Matrix,
    /// `(I − D_y D_c)⁻¹`.
    pub w: Matrix,
}

/// The plant with the static loop `u = K y + v` closed, together with the
/// inverses used to build it.
#[derive(Debug, Clone)]
pub struct Precompensated {
    pub plant: Plant,
    pub d_c: Matrix,
    /// `(I − D_y D_c)⁻¹`.
    pub w: Matrix,
    /// `(I − D_c D_y)⁻¹`.
    pub w_in: Matrix,
}

/// `D_c = K (I + D_y K)⁻¹` and the statically compensated plant. Both
/// `I + K D_y` and `I − D_y D_c` must be safely invertible.
pub fn precompensate(plant: &Plant, k: &Matrix, tol: &Tolerances) -> Result<Precompensated> {
    let (m, p) = (plant.m(), plant.p());
    if k.shape() != (m, p) {
        return Err(Error::Dimension {
            op: "precompensate",
            detail: format!("K is {}x{}, expected {m}x{p}", k.nrows(), k.ncols()),
        });
    }
    let floor = tol.residual;
    let det_k = (Matrix::identity(m, m) + k * &plant.d_y).determinant();
    let inner = inverse_checked(&(Matrix::identity(p, p) + &plant.d_y * k), floor)
        .map_err(|_| Error::IllPosed { det: det_k })?;
    let d_c = k * inner;
    let w = inverse_checked(&(Matrix::identity(p, p) - &plant.d_y * &d_c), floor)?;
    let w_in = inverse_checked(&(Matrix::identity(m, m) - &d_c * &plant.d_y), floor)?;
    let bk = &plant.b * k;
    let dzk = &plant.d_z * k;
    let pre = Plant {
        a: &plant.a + &bk * &plant.c,
        b: &plant.b * &w_in,
        h: &plant.h + &bk * &plant.g_y,
        c: &w * &plant.c,
        d_y: &w * &plant.d_y,
        g_y: &w * &plant.g_y,
        e: &plant.e + &dzk * &plant.c,
        d_z: &plant.d_z * &w_in,
        g_z: &plant.g_z + &dzk * &plant.g_y,
    };
    Ok(Precompensated {
        plant: pre,
        d_c,
        w,
        w_in,
    })
}

/// A synthesized compensator with the friends it was built from.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub controller: Controller,
    pub pre: Precompensated,
    pub f: FriendF,
    pub g: FriendG,
}

impl Synthesis {
    /// `σ(A' + B'F') ⊎ σ(A' + G'C')`, which the closed loop must reproduce.
    pub fn separated_spectrum(&self, tol: &Tolerances) -> SpectrumMultiset {
        let p = &self.pre.plant;
        let mut vals = eigenvalues(&(&p.a + &p.b * self.f.matrix()));
        vals.extend(eigenvalues(&(&p.a + self.g.matrix() * &p.c)));
        SpectrumMultiset::new(vals, tol.eig_match)
    }
}

/// Number of closed-loop eigenvalues the triple leaves free, split as
/// `(F side, G side)`.
pub fn assignable_split(
    plant: &Plant,
    triple: &SolutionTriple,
    tol: &Tolerances,
) -> Result<(usize, usize)> {
    let pre = precompensate(plant, &triple.k, tol)?;
    let p = &pre.plant;
    Ok((
        assignable_count(&p.control_quadruple(), &triple.v, tol)?,
        assignable_count_s(&p.measurement_quadruple(), &triple.s, tol)?,
    ))
}

/// Build a decoupling compensator from `triple`. `target` fixes the
/// assignable eigenvalues; without it they are `-1, -2, …`.
pub fn synthesize(
    plant: &Plant,
    triple: &SolutionTriple,
    target: Option<&SpectrumMultiset>,
    tol: &Tolerances,
) -> Result<Controller> {
    Ok(synthesize_detailed(plant, triple, target, tol)?.controller)
}

pub fn synthesize_detailed(
    plant: &Plant,
    triple: &SolutionTriple,
    target: Option<&SpectrumMultiset>,
    tol: &Tolerances,
) -> Result<Synthesis> {
    synthesize_from(plant, &triple.s, &triple.v, &triple.k, target, tol)
}

pub fn synthesize_from(
    plant: &Plant,
    s: &Subspace,
    v: &Subspace,
    k: &Matrix,
    target: Option<&SpectrumMultiset>,
    tol: &Tolerances,
) -> Result<Synthesis> {
    let check = check_solution_triple(plant, s, v, k, tol);
    if !check.passes() {
        return Err(Error::InvalidTriple(format!(
            "fails {}",
            check.failures().join(", ")
        )));
    }
    let pre = precompensate(plant, k, tol)?;
    let p = &pre.plant;
    let ctrl_q = p.control_quadruple();
    let meas_q = p.measurement_quadruple();
    let (fi, fo) = assignable_blocks(&ctrl_q, v, tol)?;
    let (gi, go) = assignable_blocks_s(&meas_q, s, tol)?;
    let (nf, ng) = (fi + fo, gi + go);
    let values: Vec<Complex64> = match target {
        Some(t) => {
            if !t.is_conjugate_closed() {
                return Err(Error::NotConjugateClosed);
            }
            if t.len() != nf + ng {
                return Err(Error::TargetSize {
                    expected: nf + ng,
                    got: t.len(),
                });
            }
            t.values().to_vec()
        }
        None => (1..=nf + ng)
            .map(|i| Complex64::new(-(i as f64), 0.0))
            .collect(),
    };
    // Split all four blocks at once so each odd block keeps a real value.
    let parts = split_target_into(&values, &[fi, fo, gi, go], tol.eig_match)?;
    let tf: Vec<Complex64> = parts[0].iter().chain(&parts[1]).copied().collect();
    let tg: Vec<Complex64> = parts[2].iter().chain(&parts[3]).copied().collect();
    let f = assign_on_quotient(&ctrl_q, v, &SpectrumMultiset::new(tf, tol.eig_match), tol)?;
    let g = assign_on_quotient_s(&meas_q, s, &SpectrumMultiset::new(tg, tol.eig_match), tol)?;
    let fm = f.matrix();
    let gm = g.matrix();
    let controller = Controller {
        a_c: &p.a + &p.b * fm + gm * &p.c + gm * &p.d_y * fm,
        b_c: -gm,
        c_c: fm.clone(),
        d_c: pre.d_c.clone(),
    };
    Ok(Synthesis {
        controller,
        pre,
        f,
        g,
    })
}

/// Assemble the closed loop. The `(1,2)` block is formed both through `W`
/// and through `(I − D_c D_y)⁻¹`, and the two must agree.
pub fn close_loop(plant: &Plant, ctrl: &Controller, tol: &Tolerances) -> Result<ClosedLoop> {
    ctrl.check_shapes(plant)?;
    let (m, p) = (plant.m(), plant.p());
    let w = inverse_checked(
        &(Matrix::identity(p, p) - &plant.d_y * &ctrl.d_c),
        tol.residual,
    )?;
    let w_in = inverse_checked(
        &(Matrix::identity(m, m) - &ctrl.d_c * &plant.d_y),
        tol.residual,
    )?;
    let dcw = &ctrl.d_c * &w;
    let bcw = &ctrl.b_c * &w;
    let a11 = &plant.a + &plant.b * &dcw * &plant.c;
    let a12 = &plant.b * &ctrl.c_c + &plant.b * &dcw * &plant.d_y * &ctrl.c_c;
    let a12_alt = &plant.b * &w_in * &ctrl.c_c;
    let gap = norm2(&(&a12 - &a12_alt)) / norm2(&a12).max(1.0);
    if gap > tol.residual {
        return Err(Error::Inconsistent(format!(
            "closed-loop (1,2) block forms differ by {gap:.3e}"
        )));
    }
    let a21 = &bcw * &plant.c;
    let a22 = &ctrl.a_c + &bcw * &plant.d_y * &ctrl.c_c;
    Ok(ClosedLoop {
        a_hat: block2(&a11, &a12, &a21, &a22),
        h_hat: vstack(&[
            &(&plant.h + &plant.b * &dcw * &plant.g_y),
            &(&bcw * &plant.g_y),
        ]),
        c_hat: hstack(&[
            &(&plant.e + &plant.d_z * &dcw * &plant.c),
            &(&plant.d_z * &ctrl.c_c + &plant.d_z * &dcw * &plant.d_y * &ctrl.c_c),
        ]),
        g_hat: &plant.g_z + &plant.d_z * &dcw * &plant.g_y,
        w,
    })
}

/// Outcome of the decoupling check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub decoupled: bool,
    /// Largest `‖Ĉ Â^k Ĥ‖ / max(1, ‖Ĉ‖ ‖Â‖^k ‖Ĥ‖)` over `k < 2(n + s)`.
    pub max_markov_residual: f64,
    /// `‖Ĝ‖`.
    pub feedthrough_residual: f64,
}

/// The disturbance-to-output transfer vanishes iff `Ĝ = 0` and the first
/// `2 dim Â` Markov parameters vanish.
pub fn verify_decoupled(cl: &ClosedLoop, tol: &Tolerances) -> Verification {
    let dim = cl.a_hat.nrows();
    let alpha = norm2(&cl.a_hat).max(1.0);
    let a_scaled = &cl.a_hat / alpha;
    let scale = (norm2(&cl.c_hat) * norm2(&cl.h_hat)).max(1.0);
    let mut x = cl.h_hat.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..2 * dim {
        worst = worst.max(norm2(&(&cl.c_hat * &x)) / scale);
        x = &a_scaled * x;
    }
    let feed = norm2(&cl.g_hat);
    Verification {
        decoupled: feed <= tol.residual && worst <= tol.residual,
        max_markov_residual: worst,
        feedthrough_residual: feed,
    }
}

/// `σ(Â)`, with tight clusters of computed eigenvalues (relative spread
/// below `sqrt(eig_match)`) replaced by their mean.
pub fn closed_loop_spectrum(cl: &ClosedLoop, tol: &Tolerances) -> SpectrumMultiset {
    SpectrumMultiset::new(eigenvalues(&cl.a_hat), tol.eig_match)
        .cluster_averaged(tol.eig_match.sqrt())
}

/// First-order estimate `max κ(λ) · ε · ||Â||` of the error in the computed
/// closed-loop eigenvalues. Matching at `eig_match` is only meaningful when
/// this is well below it; a defective spectrum gives `f64::INFINITY`.
pub fn spectrum_error_estimate(cl: &ClosedLoop) -> f64 {
    let kappa = eigenvalue_conditions(&cl.a_hat)
        .iter()
        .map(|(_, k)| *k)
        .fold(0.0, f64::max);
    kappa * f64::EPSILON * norm2(&cl.a_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddp::{gain_invariance_residual, TripleKind};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn zero_plant(n: usize) -> Plant {
        Plant {
            a: Matrix::zeros(n, n),
            b: Matrix::zeros(n, 1),
            h: Matrix::zeros(n, 1),
            c: Matrix::zeros(1, n),
            d_y: Matrix::zeros(1, 1),
            g_y: Matrix::zeros(1, 1),
            e: Matrix::zeros(1, n),
            d_z: Matrix::zeros(1, 1),
            g_z: Matrix::zeros(1, 1),
        }
    }

    #[test]
    fn zero_plant_zero_controller() {
        let p = zero_plant(2);
        let ctrl = Controller {
            a_c: Matrix::zeros(2, 2),
            b_c: Matrix::zeros(2, 1),
            c_c: Matrix::zeros(1, 2),
            d_c: Matrix::zeros(1, 1),
        };
        let cl = close_loop(&p, &ctrl, &tol()).unwrap();
        assert!(verify_decoupled(&cl, &tol()).decoupled);
    }

    #[test]
    fn gain_bridge_identity() {
        let mut p = zero_plant(1);
        p.d_y = Matrix::from_row_slice(1, 1, &[0.7]);
        let k = Matrix::from_row_slice(1, 1, &[-2.0]);
        let pre = precompensate(&p, &k, &tol()).unwrap();
        let back = &pre.d_c * &pre.w;
        assert!((back - k).norm() < 1e-12);
    }

    #[test]
    fn singular_static_loop_rejected() {
        let mut p = zero_plant(1);
        p.d_y = Matrix::from_row_slice(1, 1, &[0.5]);
        let k = Matrix::from_row_slice(1, 1, &[-2.0]);
        assert!(matches!(
            precompensate(&p, &k, &tol()),
            Err(Error::IllPosed { .. })
        ));
    }

    #[test]
    fn undisturbed_plant_places_everything() {
        // x1' = x2, x2' = u, y = x1, z = x1.
        let p = Plant {
            a: Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            b: Matrix::from_column_slice(2, 1, &[0.0, 1.0]),
            h: Matrix::zeros(2, 1),
            c: Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            d_y: Matrix::zeros(1, 1),
            g_y: Matrix::zeros(1, 1),
            e: Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            d_z: Matrix::zeros(1, 1),
            g_z: Matrix::zeros(1, 1),
        };
        let t = tol();
        let triple = SolutionTriple {
            kind: TripleKind::Custom,
            s: Subspace::zero(2),
            v: Subspace::zero(2),
            k: Matrix::zeros(1, 1),
            s_self_hidden: true,
            v_self_bounded: true,
        };
        let target = SpectrumMultiset::from_pairs(
            &[[-1.0, 1.0], [-1.0, -1.0], [-2.0, 0.0], [-3.0, 0.0]],
            1e-6,
        );
        let syn = synthesize_detailed(&p, &triple, Some(&target), &t).unwrap();
        let cl = close_loop(&p, &syn.controller, &t).unwrap();
        assert!(verify_decoupled(&cl, &t).decoupled);
        let sigma = closed_loop_spectrum(&cl, &t);
        assert!(sigma.equals(&target), "{sigma}");
        assert!(sigma.equals(&syn.separated_spectrum(&t)));
        assert!(
            gain_invariance_residual(&syn.pre.plant, &triple.s, &triple.v, &Matrix::zeros(1, 1))
                < 1e-12
        );
    }
}
