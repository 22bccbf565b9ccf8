use std::fmt;

use super::conditions::{
    build_sm, build_vm, condition_i_residual, condition_ii_residual, condition_iii_residual,
    gain_invariance_residual,
};
use super::kparam::{find_wellposed_k, KSearch};
use super::Plant;
use crate::error::{Error, Result};
use crate::geometry::{
    input_containing_residual, is_self_bounded, is_self_hidden, output_nulling_residual, sstar,
    vstar,
};
use crate::linalg::{Matrix, Tolerances};
use crate::subspace::Subspace;

/// Which lattice endpoint a triple was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TripleKind {
    /// `(S*, V*)`.
    Supremal,
    /// `(V_m ∩ S_M, V_m)`.
    Vm,
    /// `(S_M, S_M + V_m)`.
    Sm,
    Custom,
}

impl TripleKind {
    pub fn name(&self) -> &'static str {
        match self {
            TripleKind::Supremal => "supremal",
            TripleKind::Vm => "vm",
            TripleKind::Sm => "sm",
            TripleKind::Custom => "custom",
        }
    }
}

impl fmt::Display for TripleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(S, V; K)` satisfying the four solvability conditions.
#[derive(Debug, Clone)]
pub struct SolutionTriple {
    pub kind: TripleKind,
    pub s: Subspace,
    pub v: Subspace,
    pub k: Matrix,
    pub s_self_hidden: bool,
    pub v_self_bounded: bool,
}

/// Itemized residuals for a candidate triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleCheck {
    pub output_nulling: f64,
    pub input_containing: f64,
    pub cond_i: f64,
    pub cond_ii: f64,
    pub cond_iii: f64,
    /// `|det(I + K D_y)|`.
    pub wellposed_det: f64,
    /// Residual of the gain invariance relation.
    pub gain_invariance: f64,
    pub residual_bound: f64,
}

impl TripleCheck {
    pub fn cond_iv(&self) -> bool {
        self.wellposed_det > self.residual_bound && self.gain_invariance <= self.residual_bound
    }

    pub fn passes(&self) -> bool {
        let b = self.residual_bound;
        self.output_nulling <= b
            && self.input_containing <= b
            && self.cond_i <= b
            && self.cond_ii <= b
            && self.cond_iii <= b
            && self.cond_iv()
    }

    /// Names of the failed items.
    pub fn failures(&self) -> Vec<&'static str> {
        let b = self.residual_bound;
        let mut out = Vec::new();
        if self.output_nulling > b {
            out.push("V not output-nulling");
        }
        if self.input_containing > b {
            out.push("S not input-containing");
        }
        if self.cond_i > b {
            out.push("(i)");
        }
        if self.cond_ii > b {
            out.push("(ii)");
        }
        if self.cond_iii > b {
            out.push("(iii)");
        }
        if !self.cond_iv() {
            out.push("(iv)");
        }
        out
    }
}

pub fn check_solution_triple(
    plant: &Plant,
    s: &Subspace,
    v: &Subspace,
    k: &Matrix,
    tol: &Tolerances,
) -> TripleCheck {
    let eye = Matrix::identity(plant.m(), plant.m());
    TripleCheck {
        output_nulling: output_nulling_residual(&plant.control_quadruple(), v, tol),
        input_containing: input_containing_residual(&plant.measurement_quadruple(), s, tol),
        cond_i: condition_i_residual(plant, v, tol),
        cond_ii: condition_ii_residual(plant, s, tol),
        cond_iii: condition_iii_residual(s, v),
        wellposed_det: (&eye + k * &plant.d_y).determinant().abs(),
        gain_invariance: gain_invariance_residual(plant, s, v, k),
        residual_bound: tol.residual,
    }
}

/// Verdict of the solvability test on `(S*, V*)`.
#[derive(Debug, Clone)]
pub struct Solvability {
    pub solvable: bool,
    pub witness: Option<SolutionTriple>,
    pub check: TripleCheck,
    pub diagnosis: String,
}

fn make_triple(
    plant: &Plant,
    kind: TripleKind,
    s: Subspace,
    v: Subspace,
    k: Matrix,
    tol: &Tolerances,
) -> Result<SolutionTriple> {
    let v_self_bounded = is_self_bounded(&plant.control_quadruple(), &v, tol)?;
    let s_self_hidden = is_self_hidden(&plant.measurement_quadruple(), &s, tol)?;
    Ok(SolutionTriple {
        kind,
        s,
        v,
        k,
        s_self_hidden,
        v_self_bounded,
    })
}

pub fn solvability(plant: &Plant, tol: &Tolerances, search: &KSearch) -> Result<Solvability> {
    let v = vstar(&plant.control_quadruple(), tol);
    let s = sstar(&plant.measurement_quadruple(), tol);
    let zero_k = Matrix::zeros(plant.m(), plant.p());
    let pre = check_solution_triple(plant, &s, &v, &zero_k, tol);
    let mut failed: Vec<&str> = Vec::new();
    let b = tol.residual;
    if pre.cond_i > b {
        failed.push("(i)");
    }
    if pre.cond_ii > b {
        failed.push("(ii)");
    }
    if pre.cond_iii > b {
        failed.push("(iii)");
    }
    if !failed.is_empty() {
        return Ok(Solvability {
            solvable: false,
            witness: None,
            check: pre,
            diagnosis: format!("condition {} fails on (S*, V*)", failed.join(", ")),
        });
    }
    match find_wellposed_k(plant, &s, &v, tol, search) {
        Ok(k) => {
            let check = check_solution_triple(plant, &s, &v, &k, tol);
            let witness = make_triple(plant, TripleKind::Supremal, s, v, k, tol)?;
            Ok(Solvability {
                solvable: check.passes(),
                witness: Some(witness),
                diagnosis: if check.passes() {
                    "solvable".into()
                } else {
                    format!("witness fails {}", check.failures().join(", "))
                },
                check,
            })
        }
        Err(e) => Ok(Solvability {
            solvable: false,
            witness: None,
            check: pre,
            diagnosis: format!("condition (iv): {e}"),
        }),
    }
}

/// The supremal triple and the two lattice triples built from `V_m`, `S_M`,
/// all sharing the gain computed for `(S*, V*)`.
pub fn canonical_triples(
    plant: &Plant,
    tol: &Tolerances,
    search: &KSearch,
) -> Result<Vec<SolutionTriple>> {
    let sol = solvability(plant, tol, search)?;
    let sup = match (sol.solvable, sol.witness) {
        (true, Some(w)) => w,
        _ => return Err(Error::Unsolvable(sol.diagnosis)),
    };
    let vm = build_vm(plant, tol)?;
    let sm = build_sm(plant, tol)?;
    let k = sup.k.clone();
    let mut out = vec![sup];
    for (kind, s, v) in [
        (TripleKind::Vm, vm.intersect(&sm, tol), vm.clone()),
        (TripleKind::Sm, sm.clone(), sm.sum(&vm, tol)),
    ] {
        let check = check_solution_triple(plant, &s, &v, &k, tol);
        if !check.passes() {
            return Err(Error::Inconsistent(format!(
                "shared gain fails {} for the {kind} triple",
                check.failures().join(", ")
            )));
        }
        out.push(make_triple(plant, kind, s, v, k.clone(), tol)?);
    }
    Ok(out)
}
