use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::conditions::{
    condition_i_residual, condition_ii_residual, condition_iii_residual, gain_invariance_residual,
};
use super::Plant;
use crate::error::{Error, Result};
use crate::linalg::{hstack, norm2, orth_scaled, pinv, rank_scaled, Matrix, Tolerances};
use crate::subspace::{kernel, kernel_scaled, Subspace};

/// The affine family of gains `K` with `(Ã + B̃ K C̃) 𝓜 ⊆ 𝒩`:
/// `K = base − Φ₂ H₁ (C̃M)† + H₂ Ψ`.
#[derive(Debug, Clone)]
pub struct KParam {
    /// Columns extending a basis of `𝓜 ∩ ker C̃` to one of `𝓜`.
    pub m: Matrix,
    pub n_basis: Matrix,
    pub r2: Matrix,
    pub phi2: Matrix,
    /// Rows span the left null space of `C̃ M`.
    pub psi: Matrix,
    pub base: Matrix,
    cm_pinv: Matrix,
}

impl KParam {
    pub fn h1_shape(&self) -> (usize, usize) {
        (self.phi2.ncols(), self.m.ncols())
    }

    pub fn h2_shape(&self) -> (usize, usize) {
        (self.base.nrows(), self.psi.nrows())
    }

    pub fn gain(&self, h1: &Matrix, h2: &Matrix) -> Matrix {
        assert_eq!(h1.shape(), self.h1_shape(), "H1 shape");
        assert_eq!(h2.shape(), self.h2_shape(), "H2 shape");
        &self.base - &self.phi2 * h1 * &self.cm_pinv + h2 * &self.psi
    }

    /// Generators of the linear part of the family, one per entry of `H₁`
    /// and `H₂`.
    pub fn directions(&self) -> Vec<Matrix> {
        let mut out = Vec::new();
        let (r1, c1) = self.h1_shape();
        for i in 0..r1 {
            for j in 0..c1 {
                let mut h = Matrix::zeros(r1, c1);
                h[(i, j)] = 1.0;
                out.push(-&self.phi2 * h * &self.cm_pinv);
            }
        }
        let (r2, c2) = self.h2_shape();
        for i in 0..r2 {
            for j in 0..c2 {
                let mut h = Matrix::zeros(r2, c2);
                h[(i, j)] = 1.0;
                out.push(h * &self.psi);
            }
        }
        out
    }

    fn direction_basis(&self, tol: &Tolerances) -> Matrix {
        let dirs = self.directions();
        let len = self.base.len();
        let cols: Vec<Matrix> = dirs
            .iter()
            .map(|d| Matrix::from_column_slice(len, 1, d.as_slice()))
            .collect();
        let refs: Vec<&Matrix> = cols.iter().collect();
        if refs.is_empty() {
            return Matrix::zeros(len, 0);
        }
        orth_scaled(&hstack(&refs), 1.0, tol)
    }

    /// Dimension of the affine family.
    pub fn dimension(&self, tol: &Tolerances) -> usize {
        self.direction_basis(tol).ncols()
    }

    /// Distance of `k` from the affine hull of the family, relative to
    /// `max(1, ||k||)`.
    pub fn affine_residual(&self, k: &Matrix, tol: &Tolerances) -> f64 {
        let q = self.direction_basis(tol);
        let d = k - &self.base;
        let v = Matrix::from_column_slice(d.len(), 1, d.as_slice());
        let r = &v - &q * (q.transpose() * &v);
        r.norm() / k.norm().max(1.0)
    }
}

/// Build the gain family for `(Ã + B̃ K C̃) 𝓜 ⊆ 𝒩`, checking first that the
/// two necessary and sufficient inclusions `Ã𝓜 ⊆ 𝒩 + im B̃` and
/// `Ã(𝓜 ∩ ker C̃) ⊆ 𝒩` hold.
pub fn k_parameterization(
    mspace: &Subspace,
    nspace: &Subspace,
    at: &Matrix,
    bt: &Matrix,
    ct: &Matrix,
    tol: &Tolerances,
) -> Result<KParam> {
    let (n1, n2) = at.shape();
    if bt.nrows() != n1
        || ct.ncols() != n2
        || mspace.ambient_dim() != n2
        || nspace.ambient_dim() != n1
    {
        return Err(Error::Dimension {
            op: "k_parameterization",
            detail: format!(
                "Ã {n1}x{n2}, B̃ {}x{}, C̃ {}x{}, 𝓜 in R^{}, 𝒩 in R^{}",
                bt.nrows(),
                bt.ncols(),
                ct.nrows(),
                ct.ncols(),
                mspace.ambient_dim(),
                nspace.ambient_dim()
            ),
        });
    }
    let scale = norm2(at).max(1.0);
    let nb = nspace.basis().clone();
    let n_plus_b = crate::subspace::image_scaled(&hstack(&[&nb, bt]), 1.0, tol);
    let r1 = n_plus_b.residual_of(&(at * mspace.basis())) / scale;
    if r1 > tol.residual {
        return Err(Error::NoGain(format!("Ã𝓜 ⊄ 𝒩 + im B̃ (residual {r1:.3e})")));
    }
    let m_ker = mspace.intersect(&kernel_scaled(ct, norm2(ct), tol), tol);
    let r2 = nspace.residual_of(&(at * m_ker.basis())) / scale;
    if r2 > tol.residual {
        return Err(Error::NoGain(format!(
            "Ã(𝓜 ∩ ker C̃) ⊄ 𝒩 (residual {r2:.3e})"
        )));
    }
    let m = mspace.complement_within(&m_ker);
    let cm = ct * &m;
    if rank_scaled(&cm, norm2(ct), tol) != m.ncols() {
        return Err(Error::Inconsistent("C̃M is not full column rank".into()));
    }
    let nbt = hstack(&[&nb, bt]);
    let dn = nb.ncols();
    let mi = bt.ncols();
    let pinv_nb = pinv(&nbt, tol);
    let r2m = pinv_nb.rows(dn, mi).into_owned();
    let phi = kernel(&nbt, tol);
    let phi2 = phi.basis().rows(dn, mi).into_owned();
    let psi = kernel(&cm.transpose(), tol).basis().transpose();
    let cm_pinv = pinv(&cm, tol);
    let base = -(&r2m * at * &m * &cm_pinv);
    Ok(KParam {
        m,
        n_basis: nb,
        r2: r2m,
        phi2,
        psi,
        base,
        cm_pinv,
    })
}

/// Search policy for a well-posed gain.
#[derive(Debug, Clone, Copy)]
pub struct KSearch {
    pub max_tries: usize,
    pub seed: u64,
}

impl Default for KSearch {
    fn default() -> Self {
        Self {
            max_tries: 32,
            seed: 0,
        }
    }
}

/// A gain `K` from the family for `(S, V)` with `I + K D_y` nonsingular.
/// The zero-parameter member is tried first, then Gaussian parameters.
pub fn find_wellposed_k(
    plant: &Plant,
    s: &Subspace,
    v: &Subspace,
    tol: &Tolerances,
    search: &KSearch,
) -> Result<Matrix> {
    let ri = condition_i_residual(plant, v, tol);
    let rii = condition_ii_residual(plant, s, tol);
    let riii = condition_iii_residual(s, v);
    for (name, r) in [("(i)", ri), ("(ii)", rii), ("(iii)", riii)] {
        if r > tol.residual {
            return Err(Error::NoGain(format!(
                "condition {name} fails (residual {r:.3e})"
            )));
        }
    }
    let mspace = s.direct_sum(&Subspace::whole(plant.q()));
    let nspace = v.direct_sum(&Subspace::zero(plant.r()));
    let kp = k_parameterization(
        &mspace,
        &nspace,
        &plant.a_tilde(),
        &plant.b_tilde(),
        &plant.c_tilde(),
        tol,
    )?;
    let eye = Matrix::identity(plant.m(), plant.m());
    let accept = |k: &Matrix| {
        let det = (&eye + k * &plant.d_y).determinant();
        det.abs() > tol.residual && gain_invariance_residual(plant, s, v, k) <= tol.residual
    };
    if accept(&kp.base) {
        return Ok(kp.base.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let mut gauss = |shape: (usize, usize)| {
        Matrix::from_fn(shape.0, shape.1, |_, _| StandardNormal.sample(&mut rng))
    };
    for _ in 1..search.max_tries {
        let h1 = gauss(kp.h1_shape());
        let h2 = gauss(kp.h2_shape());
        let k = kp.gain(&h1, &h2);
        if accept(&k) {
            return Ok(k);
        }
    }
    Err(Error::SearchExhausted {
        tries: search.max_tries,
    })
}
