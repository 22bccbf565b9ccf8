//! Fixed poles of solution triples and the sets that bound every decoupling
//! closed-loop spectrum.

use crate::ddp::{build_sm, build_vm, solvability, KSearch, Plant};
use crate::error::{Error, Result};
use crate::geometry::{fixed_poles_s, fixed_poles_v};
use crate::linalg::{vstack, Tolerances};
use crate::spectrum::SpectrumMultiset;
use crate::subspace::{image, kernel, largest_invariant, smallest_invariant, Subspace};

/// Hypotheses under which the fixed-pole sets have a minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assumptions {
    /// `⟨A | im [B H]⟩ = X`.
    pub reachable_abh: bool,
    /// `⟨ker C ∩ ker E | A⟩ = 0`.
    pub observable_cea: bool,
}

impl Assumptions {
    pub fn any(&self) -> bool {
        self.reachable_abh || self.observable_cea
    }
}

pub fn assumption_checks(plant: &Plant, tol: &Tolerances) -> Result<Assumptions> {
    let bh = crate::linalg::hstack(&[&plant.b, &plant.h]);
    let reach = smallest_invariant(&plant.a, &image(&bh, tol), tol)?;
    let ce = vstack(&[&plant.c, &plant.e]);
    let unobs = largest_invariant(&kernel(&ce, tol), &plant.a, tol)?;
    Ok(Assumptions {
        reachable_abh: reach.is_whole(),
        observable_cea: unobs.is_zero(),
    })
}

/// `σ_fixed(V) ⊎ σ_fixed(S)` for `V` output-nulling on `(A, B, E, D_z)` and
/// `S` input-containing on `(A, H, C, G_y)`.
pub fn fixed_poles_pair(
    plant: &Plant,
    s: &Subspace,
    v: &Subspace,
    tol: &Tolerances,
) -> Result<SpectrumMultiset> {
    let (fs, fv) = fixed_poles_parts(plant, s, v, tol)?;
    Ok(fv.union(&fs))
}

/// `(σ_fixed(S), σ_fixed(V))`.
pub fn fixed_poles_parts(
    plant: &Plant,
    s: &Subspace,
    v: &Subspace,
    tol: &Tolerances,
) -> Result<(SpectrumMultiset, SpectrumMultiset)> {
    let fv = fixed_poles_v(&plant.control_quadruple(), v, tol)?;
    let fs = fixed_poles_s(&plant.measurement_quadruple(), s, tol)?;
    Ok((fs, fv))
}

/// The minimal fixed-pole multiset, with a flag raised when the choice of
/// the minimum hinges on eigenvalues that sit near the matching radius.
#[derive(Debug, Clone)]
pub struct SigmaStar {
    pub sigma: SpectrumMultiset,
    pub fragile: bool,
}

/// Lower and upper bounds valid without the reachability/observability
/// hypotheses.
#[derive(Debug, Clone)]
pub struct SigmaBounds {
    /// `σ_fixed(S_M, V_m)`: contained in every decoupling closed-loop spectrum.
    pub dagger: SpectrumMultiset,
    /// `σ_fixed(S_M ∩ V_m, S_M + V_m)`: achieved by some triple.
    pub ddagger: SpectrumMultiset,
}

struct Lattice {
    vm: Subspace,
    sm: Subspace,
}

fn lattice(plant: &Plant, tol: &Tolerances) -> Result<Lattice> {
    Ok(Lattice {
        vm: build_vm(plant, tol)?,
        sm: build_sm(plant, tol)?,
    })
}

fn star_from(plant: &Plant, lat: &Lattice, tol: &Tolerances) -> Result<SigmaStar> {
    let sum = lat.sm.sum(&lat.vm, tol);
    let cap = lat.vm.intersect(&lat.sm, tol);
    let a = fixed_poles_pair(plant, &lat.sm, &sum, tol)?;
    let b = fixed_poles_pair(plant, &cap, &lat.vm, tol)?;
    let fragile = a.straddles(&b);
    let sigma = if a.contains(&b) {
        b
    } else if b.contains(&a) {
        a
    } else {
        return Err(Error::Inconsistent(format!(
            "neither fixed-pole set contains the other: {a} vs {b}"
        )));
    };
    Ok(SigmaStar { sigma, fragile })
}

fn bounds_from(plant: &Plant, lat: &Lattice, tol: &Tolerances) -> Result<SigmaBounds> {
    let cap = lat.sm.intersect(&lat.vm, tol);
    let sum = lat.sm.sum(&lat.vm, tol);
    Ok(SigmaBounds {
        dagger: fixed_poles_pair(plant, &lat.sm, &lat.vm, tol)?,
        ddagger: fixed_poles_pair(plant, &cap, &sum, tol)?,
    })
}

fn require_solvable(plant: &Plant, tol: &Tolerances) -> Result<()> {
    let sol = solvability(plant, tol, &KSearch::default())?;
    if sol.solvable {
        Ok(())
    } else {
        Err(Error::Unsolvable(sol.diagnosis))
    }
}

/// Minimum over all solution triples of the fixed-pole multiset. Undefined
/// unless `(A, [B H])` is reachable or `([C; E], A)` is observable.
pub fn sigma_star(plant: &Plant, tol: &Tolerances) -> Result<SigmaStar> {
    require_solvable(plant, tol)?;
    let asm = assumption_checks(plant, tol)?;
    if !asm.any() {
        return Err(Error::Undefined(
            "neither (A, [B H]) reachable nor ([C; E], A) observable; use the bounds".into(),
        ));
    }
    star_from(plant, &lattice(plant, tol)?, tol)
}

pub fn sigma_bounds(plant: &Plant, tol: &Tolerances) -> Result<SigmaBounds> {
    require_solvable(plant, tol)?;
    bounds_from(plant, &lattice(plant, tol)?, tol)
}

/// Fixed poles of one triple together with the plant-wide sets.
#[derive(Debug, Clone)]
pub struct FixedPoleReport {
    pub sigma_fixed_s: SpectrumMultiset,
    pub sigma_fixed_v: SpectrumMultiset,
    pub sigma_fixed_pair: SpectrumMultiset,
    pub assumptions: Assumptions,
    pub sigma_star: Option<SpectrumMultiset>,
    pub fragile: bool,
    pub sigma_dagger: SpectrumMultiset,
    pub sigma_ddagger: SpectrumMultiset,
}

/// Build the report for `(S, V)`; the plant must be solvable.
pub fn fixed_pole_report(
    plant: &Plant,
    s: &Subspace,
    v: &Subspace,
    tol: &Tolerances,
) -> Result<FixedPoleReport> {
    require_solvable(plant, tol)?;
    let (fs, fv) = fixed_poles_parts(plant, s, v, tol)?;
    let assumptions = assumption_checks(plant, tol)?;
    let lat = lattice(plant, tol)?;
    let star = if assumptions.any() {
        Some(star_from(plant, &lat, tol)?)
    } else {
        None
    };
    let bounds = bounds_from(plant, &lat, tol)?;
    Ok(FixedPoleReport {
        sigma_fixed_pair: fv.union(&fs),
        sigma_fixed_s: fs,
        sigma_fixed_v: fv,
        assumptions,
        fragile: star.as_ref().is_some_and(|s| s.fragile),
        sigma_star: star.map(|s| s.sigma),
        sigma_dagger: bounds.dagger,
        sigma_ddagger: bounds.ddagger,
    })
}
