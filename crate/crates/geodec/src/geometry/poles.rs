use super::friends::{input_containing_friend, output_nulling_friend, FriendF, FriendG};
use super::placement::{place, split_target};
use super::subspaces::{detectability_on, reachability_on, sstar, vstar};
use super::Quadruple;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Tolerances};
use crate::spectrum::SpectrumMultiset;
use crate::subspace::{
    image, kernel, largest_invariant, preimage, quotient_spectrum, smallest_invariant, Subspace,
};

/// `σ(A + BF | V*/R*)`, checked against `σ(A + GC | Q*/S*)`.
pub fn invariant_zeros(q: &Quadruple, tol: &Tolerances) -> Result<SpectrumMultiset> {
    let v = vstar(q, tol);
    let f = output_nulling_friend(q, &v, tol)?;
    let r = reachability_on(q, &f, tol)?;
    let z1 = quotient_spectrum(&(&q.a + &q.b * f.matrix()), &r, &v, tol)?;

    let s = sstar(q, tol);
    let g = input_containing_friend(q, &s, tol)?;
    let qs = detectability_on(q, &g, tol)?;
    let z2 = quotient_spectrum(&(&q.a + g.matrix() * &q.c), &s, &qs, tol)?;
    if !z1.equals(&z2) {
        return Err(Error::Inconsistent(format!(
            "zeros {z1} (output-nulling side) vs {z2} (input-containing side)"
        )));
    }
    Ok(z1)
}

struct ChainV {
    abf: Matrix,
    r: Subspace,
    rv: Subspace,
}

fn chain_v(q: &Quadruple, f: &FriendF, tol: &Tolerances) -> Result<ChainV> {
    let r = smallest_invariant(&q.a, &image(&q.b, tol), tol)?;
    let rv = reachability_on(q, f, tol)?;
    Ok(ChainV {
        abf: &q.a + &q.b * f.matrix(),
        r,
        rv,
    })
}

/// Fixed poles of an output-nulling `V`:
/// `σ(A+BF | X/(V+R)) ⊎ σ(A+BF | V/R_V)` with `R = ⟨A | im B⟩`, cross-checked
/// against `σ(A+BF | X/R) ⊎ σ(A+BF | (V∩R)/R_V)`.
pub fn fixed_poles_v(q: &Quadruple, v: &Subspace, tol: &Tolerances) -> Result<SpectrumMultiset> {
    let f = output_nulling_friend(q, v, tol)?;
    fixed_poles_v_with(q, &f, tol)
}

pub fn fixed_poles_v_with(
    q: &Quadruple,
    f: &FriendF,
    tol: &Tolerances,
) -> Result<SpectrumMultiset> {
    let v = f.subspace();
    let ch = chain_v(q, f, tol)?;
    let whole = Subspace::whole(q.n());
    let vr = v.sum(&ch.r, tol);
    let primary = quotient_spectrum(&ch.abf, &vr, &whole, tol)?
        .union(&quotient_spectrum(&ch.abf, &ch.rv, v, tol)?);
    let v_cap_r = v.intersect(&ch.r, tol);
    let alternate = quotient_spectrum(&ch.abf, &ch.r, &whole, tol)?
        .union(&quotient_spectrum(&ch.abf, &ch.rv, &v_cap_r, tol)?);
    if !primary.equals(&alternate) {
        return Err(Error::Inconsistent(format!(
            "fixed poles of V disagree between forms: {primary} vs {alternate}"
        )));
    }
    Ok(primary)
}

/// Fixed poles of an input-containing `S`:
/// `σ(A+GC | Q_S/S) ⊎ σ(A+GC | S∩Q)` with `Q = ⟨ker C | A⟩`, cross-checked
/// against `σ(A+GC | Q_S/(S+Q)) ⊎ σ(A+GC | Q)`.
pub fn fixed_poles_s(q: &Quadruple, s: &Subspace, tol: &Tolerances) -> Result<SpectrumMultiset> {
    let g = input_containing_friend(q, s, tol)?;
    fixed_poles_s_with(q, &g, tol)
}

pub fn fixed_poles_s_with(
    q: &Quadruple,
    g: &FriendG,
    tol: &Tolerances,
) -> Result<SpectrumMultiset> {
    let s = g.subspace();
    let agc = &q.a + g.matrix() * &q.c;
    let unobs = largest_invariant(&kernel(&q.c, tol), &q.a, tol)?;
    let qs = detectability_on(q, g, tol)?;
    let zero = Subspace::zero(q.n());
    let primary = quotient_spectrum(&agc, s, &qs, tol)?.union(&quotient_spectrum(
        &agc,
        &zero,
        &s.intersect(&unobs, tol),
        tol,
    )?);
    let alternate = quotient_spectrum(&agc, &s.sum(&unobs, tol), &qs, tol)?
        .union(&quotient_spectrum(&agc, &zero, &unobs, tol)?);
    if !primary.equals(&alternate) {
        return Err(Error::Inconsistent(format!(
            "fixed poles of S disagree between forms: {primary} vs {alternate}"
        )));
    }
    Ok(primary)
}

/// Number of closed-loop eigenvalues of `A + BF` that friends of `V` can
/// place: `dim R_V + dim(V + R) - dim V`.
pub fn assignable_count(q: &Quadruple, v: &Subspace, tol: &Tolerances) -> Result<usize> {
    let (inner, outer) = assignable_blocks(q, v, tol)?;
    Ok(inner + outer)
}

/// The assignable count split as `(dim R_V, dim(V + R) - dim V)`, the two
/// blocks [`assign_on_quotient`] places separately.
pub fn assignable_blocks(q: &Quadruple, v: &Subspace, tol: &Tolerances) -> Result<(usize, usize)> {
    let f = output_nulling_friend(q, v, tol)?;
    let ch = chain_v(q, &f, tol)?;
    Ok((ch.rv.dim(), v.sum(&ch.r, tol).dim() - v.dim()))
}

/// Dual count for friends of an input-containing `S`.
pub fn assignable_count_s(q: &Quadruple, s: &Subspace, tol: &Tolerances) -> Result<usize> {
    assignable_count(&q.dual(), &s.perp(), tol)
}

/// Dual of [`assignable_blocks`].
pub fn assignable_blocks_s(
    q: &Quadruple,
    s: &Subspace,
    tol: &Tolerances,
) -> Result<(usize, usize)> {
    assignable_blocks(&q.dual(), &s.perp(), tol)
}

/// A friend of `V` whose assignable eigenvalues equal `target`.
///
/// The part inside `R_V` receives the values with the smallest real parts;
/// the remainder goes to the reachable part of `X/V`.
pub fn assign_on_quotient(
    q: &Quadruple,
    v: &Subspace,
    target: &SpectrumMultiset,
    tol: &Tolerances,
) -> Result<FriendF> {
    if !target.is_conjugate_closed() {
        return Err(Error::NotConjugateClosed);
    }
    let f0 = output_nulling_friend(q, v, tol)?;
    let ch = chain_v(q, &f0, tol)?;
    let outside = v.sum(&ch.r, tol).dim() - v.dim();
    let expected = ch.rv.dim() + outside;
    if target.len() != expected {
        return Err(Error::TargetSize {
            expected,
            got: target.len(),
        });
    }
    let (inner_t, outer_t) = split_target(target.values(), ch.rv.dim(), tol.eig_match)?;

    // Inside R_V: inputs u ∈ ker D with Bu ∈ V keep V invariant and the
    // output nulled, and (A+BF0)|R_V with B·U_V is a reachable pair.
    let mut f = f0.into_matrix();
    if ch.rv.dim() > 0 {
        let uv = preimage(&q.b, v, tol)?.intersect(&kernel(&q.d, tol), tol);
        let qr = ch.rv.basis();
        let ar = qr.transpose() * &ch.abf * qr;
        let br = qr.transpose() * &q.b * uv.basis();
        let kr = place(&ar, &br, &inner_t, tol)?;
        f += uv.basis() * kr * qr.transpose();
    }

    // On X/V, expressed in an orthonormal basis N of V^⊥.
    if outside > 0 {
        let nb = v.perp().basis().clone();
        let abf = &q.a + &q.b * &f;
        let abar = nb.transpose() * abf * &nb;
        let bbar = nb.transpose() * &q.b;
        let kbar = place(&abar, &bbar, &outer_t, tol)?;
        f += kbar * nb.transpose();
    }
    FriendF::new(q, f, v.clone(), tol)
}

/// Dual of [`assign_on_quotient`]: a friend `G` of the input-containing `S`
/// whose assignable eigenvalues equal `target`.
pub fn assign_on_quotient_s(
    q: &Quadruple,
    s: &Subspace,
    target: &SpectrumMultiset,
    tol: &Tolerances,
) -> Result<FriendG> {
    let fd = assign_on_quotient(&q.dual(), &s.perp(), target, tol).map_err(|e| match e {
        Error::NotOutputNulling { residual } => Error::NotInputContaining { residual },
        other => other,
    })?;
    FriendG::new(q, fd.into_matrix().transpose(), s.clone(), tol)
}
