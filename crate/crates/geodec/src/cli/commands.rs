use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::json::{matrix, num, spectrum};
use super::{
    resolve_tolerances, ControllerFile, GlobalOpts, Outcome, PlantFile, EXIT_OK, EXIT_UNSOLVABLE,
    EXIT_VERIFY,
};
use crate::ddp::generate::{solvable_plant, unsolvable_plant, Dims, Shape};
use crate::ddp::{
    build_sm, build_vm, canonical_triples, solvability, KSearch, Plant, SolutionTriple,
    TripleCheck, TripleKind,
};
use crate::error::Error;
use crate::fixed_poles::{assumption_checks, fixed_pole_report, fixed_poles_parts};
use crate::geometry::{invariant_zeros, qstar, rstar, sstar, vstar};
use crate::linalg::Tolerances;
use crate::spectrum::SpectrumMultiset;
use crate::subspace::Subspace;
use crate::synth::{
    close_loop, closed_loop_spectrum, spectrum_error_estimate, synthesize_detailed,
    verify_decoupled, Verification,
};

type CmdResult = Result<Outcome, String>;

fn load_plant(path: &Path) -> Result<PlantFile, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    PlantFile::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn tolerances(opts: &GlobalOpts, file: &PlantFile) -> Result<Tolerances, String> {
    let tol = resolve_tolerances(opts, Some(&file.tolerances));
    tol.validate().map_err(|e| e.to_string())?;
    Ok(tol)
}

fn search(opts: &GlobalOpts) -> KSearch {
    KSearch {
        seed: opts.seed,
        ..KSearch::default()
    }
}

fn header(command: &str, tol: &Tolerances) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert(
        "tool".into(),
        json!({"name": "geodec", "version": env!("CARGO_PKG_VERSION")}),
    );
    m.insert(
        "tolerances".into(),
        json!({
            "rank_rel": num(tol.rank_rel),
            "eig_match": num(tol.eig_match),
            "residual": num(tol.residual),
        }),
    );
    m
}

fn dims(p: &Plant) -> Value {
    json!({"n": p.n(), "m": p.m(), "p": p.p(), "q": p.q(), "r": p.r()})
}

fn subspace(s: &Subspace) -> Value {
    json!({"dim": s.dim(), "basis": matrix(s.basis())})
}

fn check_value(c: &TripleCheck) -> Value {
    json!({
        "output_nulling": num(c.output_nulling),
        "input_containing": num(c.input_containing),
        "cond_i": num(c.cond_i),
        "cond_ii": num(c.cond_ii),
        "cond_iii": num(c.cond_iii),
        "wellposed_det": num(c.wellposed_det),
        "gain_invariance": num(c.gain_invariance),
        "passes": c.passes(),
    })
}

fn verification_value(v: &Verification) -> Value {
    json!({
        "decoupled": v.decoupled,
        "max_markov_residual": num(v.max_markov_residual),
        "feedthrough_residual": num(v.feedthrough_residual),
    })
}

fn err(e: Error) -> String {
    e.to_string()
}

pub fn analyze(opts: &GlobalOpts, path: &Path) -> CmdResult {
    let file = load_plant(path)?;
    let tol = tolerances(opts, &file)?;
    let p = &file.plant;
    let ctrl = p.control_quadruple();
    let meas = p.measurement_quadruple();
    let sol = solvability(p, &tol, &search(opts)).map_err(err)?;
    let v_star = vstar(&ctrl, &tol);
    let s_star = sstar(&meas, &tol);
    let r_star = rstar(&ctrl, &tol).map_err(err)?;
    let q_star = qstar(&meas, &tol).map_err(err)?;
    let v_m = build_vm(p, &tol).map_err(err)?;
    let s_m = build_sm(p, &tol).map_err(err)?;
    let z_ctrl = invariant_zeros(&ctrl, &tol).map_err(err)?;
    let z_meas = invariant_zeros(&meas, &tol).map_err(err)?;
    let asm = assumption_checks(p, &tol).map_err(err)?;

    let mut rep = header("analyze", &tol);
    rep.insert("dims".into(), dims(p));
    rep.insert(
        "solvability".into(),
        json!({
            "solvable": sol.solvable,
            "diagnosis": sol.diagnosis,
            "residuals": check_value(&sol.check),
            "gain": sol.witness.as_ref().map(|w| matrix(&w.k)),
        }),
    );
    rep.insert(
        "subspaces".into(),
        json!({
            "v_star": subspace(&v_star),
            "s_star": subspace(&s_star),
            "r_star": subspace(&r_star),
            "q_star": subspace(&q_star),
            "v_m": subspace(&v_m),
            "s_m": subspace(&s_m),
        }),
    );
    rep.insert(
        "zeros".into(),
        json!({"control": spectrum(&z_ctrl), "measurement": spectrum(&z_meas)}),
    );
    rep.insert(
        "assumptions".into(),
        json!({"reachable_abh": asm.reachable_abh, "observable_cea": asm.observable_cea}),
    );

    let mut text = String::new();
    let _ = writeln!(
        text,
        "plant: n={} m={} p={} q={} r={}",
        p.n(),
        p.m(),
        p.p(),
        p.q(),
        p.r()
    );
    let _ = writeln!(
        text,
        "dim V*={} S*={} R*={} Q*={} V_m={} S_M={}",
        v_star.dim(),
        s_star.dim(),
        r_star.dim(),
        q_star.dim(),
        v_m.dim(),
        s_m.dim()
    );
    let _ = writeln!(text, "zeros (A,B,E,D_z): {z_ctrl}");
    let _ = writeln!(text, "zeros (A,H,C,G_y): {z_meas}");
    let _ = writeln!(
        text,
        "reachable (A,[B H]): {}  observable ([C;E],A): {}",
        asm.reachable_abh, asm.observable_cea
    );
    let _ = writeln!(text, "solvable: {} ({})", sol.solvable, sol.diagnosis);
    Ok(Outcome {
        code: if sol.solvable {
            EXIT_OK
        } else {
            EXIT_UNSOLVABLE
        },
        text,
        report: Some(Value::Object(rep)),
        error: None,
    })
}

fn unsolvable(command: &str, tol: &Tolerances, p: &Plant, diagnosis: String) -> Outcome {
    let mut rep = header(command, tol);
    rep.insert("dims".into(), dims(p));
    rep.insert(
        "solvability".into(),
        json!({"solvable": false, "diagnosis": diagnosis}),
    );
    Outcome {
        code: EXIT_UNSOLVABLE,
        text: format!("not solvable: {diagnosis}\n"),
        report: Some(Value::Object(rep)),
        error: None,
    }
}

fn triples_or_unsolvable(
    command: &str,
    opts: &GlobalOpts,
    tol: &Tolerances,
    p: &Plant,
) -> Result<Result<Vec<SolutionTriple>, Outcome>, String> {
    match canonical_triples(p, tol, &search(opts)) {
        Ok(t) => Ok(Ok(t)),
        Err(Error::Unsolvable(d)) => Ok(Err(unsolvable(command, tol, p, d))),
        Err(e) => Err(err(e)),
    }
}

pub fn fixed_poles(opts: &GlobalOpts, path: &Path) -> CmdResult {
    let file = load_plant(path)?;
    let tol = tolerances(opts, &file)?;
    let p = &file.plant;
    let triples = match triples_or_unsolvable("fixed-poles", opts, &tol, p)? {
        Ok(t) => t,
        Err(out) => return Ok(out),
    };
    let mut text = String::new();
    let mut per = serde_json::Map::new();
    for t in &triples {
        let (fs, fv) = fixed_poles_parts(p, &t.s, &t.v, &tol).map_err(err)?;
        let pair = fv.union(&fs);
        let _ = writeln!(
            text,
            "{:>8}: dim S={} dim V={}  fixed {pair}",
            t.kind.name(),
            t.s.dim(),
            t.v.dim()
        );
        per.insert(
            t.kind.name().into(),
            json!({
                "dim_s": t.s.dim(),
                "dim_v": t.v.dim(),
                "s_self_hidden": t.s_self_hidden,
                "v_self_bounded": t.v_self_bounded,
                "sigma_fixed_s": spectrum(&fs),
                "sigma_fixed_v": spectrum(&fv),
                "sigma_fixed": spectrum(&pair),
            }),
        );
    }
    let sup = &triples[0];
    let fr = fixed_pole_report(p, &sup.s, &sup.v, &tol).map_err(err)?;
    match &fr.sigma_star {
        Some(s) => {
            let _ = writeln!(
                text,
                "sigma*: {s}{}",
                if fr.fragile { " (fragile)" } else { "" }
            );
        }
        None => {
            let _ = writeln!(text, "sigma*: undefined (neither assumption holds)");
        }
    }
    let _ = writeln!(text, "sigma_dagger: {}", fr.sigma_dagger);
    let _ = writeln!(text, "sigma_ddagger: {}", fr.sigma_ddagger);

    let mut rep = header("fixed-poles", &tol);
    rep.insert("dims".into(), dims(p));
    rep.insert("triples".into(), Value::Object(per));
    rep.insert(
        "assumptions".into(),
        json!({
            "reachable_abh": fr.assumptions.reachable_abh,
            "observable_cea": fr.assumptions.observable_cea,
        }),
    );
    rep.insert(
        "sigma_star".into(),
        fr.sigma_star.as_ref().map_or(Value::Null, spectrum),
    );
    rep.insert("fragile".into(), json!(fr.fragile));
    rep.insert("sigma_dagger".into(), spectrum(&fr.sigma_dagger));
    rep.insert("sigma_ddagger".into(), spectrum(&fr.sigma_ddagger));
    Ok(Outcome {
        code: EXIT_OK,
        text,
        report: Some(Value::Object(rep)),
        error: None,
    })
}

pub fn synth(
    opts: &GlobalOpts,
    path: &Path,
    kind: TripleKind,
    poles: Option<&str>,
    out: Option<&Path>,
) -> CmdResult {
    let file = load_plant(path)?;
    let tol = tolerances(opts, &file)?;
    let p = &file.plant;
    let target = match poles {
        Some(s) => {
            let t = SpectrumMultiset::new(super::parse_poles(s)?, tol.eig_match);
            if !t.is_conjugate_closed() {
                return Err("--poles: not closed under conjugation".into());
            }
            Some(t)
        }
        None => file.targets(&tol),
    };
    let triples = match triples_or_unsolvable("synth", opts, &tol, p)? {
        Ok(t) => t,
        Err(out) => return Ok(out),
    };
    let triple = triples
        .into_iter()
        .find(|t| t.kind == kind)
        .expect("canonical triples include every kind");
    let syn = synthesize_detailed(p, &triple, target.as_ref(), &tol).map_err(err)?;
    let (fs, fv) = fixed_poles_parts(p, &triple.s, &triple.v, &tol).map_err(err)?;
    let fixed = fv.union(&fs);
    let cl = close_loop(p, &syn.controller, &tol).map_err(err)?;
    let ver = verify_decoupled(&cl, &tol);
    let sigma = closed_loop_spectrum(&cl, &tol);
    let contains_fixed = sigma.contains(&fixed);
    let estimate = spectrum_error_estimate(&cl);

    let c = &syn.controller;
    let mut rep = header("synth", &tol);
    rep.insert("dims".into(), dims(p));
    rep.insert(
        "triple".into(),
        json!({
            "kind": triple.kind.name(),
            "s": subspace(&triple.s),
            "v": subspace(&triple.v),
            "gain": matrix(&triple.k),
        }),
    );
    rep.insert("sigma_fixed".into(), spectrum(&fixed));
    rep.insert(
        "controller".into(),
        json!({
            "a_c": matrix(&c.a_c),
            "b_c": matrix(&c.b_c),
            "c_c": matrix(&c.c_c),
            "d_c": matrix(&c.d_c),
        }),
    );
    rep.insert("closed_loop_spectrum".into(), spectrum(&sigma));
    rep.insert("spectrum_error_estimate".into(), num(estimate));
    rep.insert("contains_fixed".into(), json!(contains_fixed));
    rep.insert("verification".into(), verification_value(&ver));

    let mut text = String::new();
    let _ = writeln!(
        text,
        "triple {}: dim S={} dim V={}",
        triple.kind,
        triple.s.dim(),
        triple.v.dim()
    );
    let _ = writeln!(text, "fixed poles: {fixed}");
    let _ = writeln!(text, "closed-loop spectrum: {sigma}");
    let _ = writeln!(
        text,
        "decoupled: {} (markov {:.3e}, feedthrough {:.3e})",
        ver.decoupled, ver.max_markov_residual, ver.feedthrough_residual
    );
    if !(ver.decoupled && contains_fixed) {
        let mut msg = String::from("synthesized controller failed verification; not written");
        if estimate.is_nan() || estimate >= tol.eig_match {
            let _ = write!(
                msg,
                " (closed-loop eigenvalues are ill-conditioned, error estimate {estimate:.1e}; try other --poles)"
            );
        }
        return Ok(Outcome {
            code: EXIT_VERIFY,
            text,
            report: Some(Value::Object(rep)),
            error: Some(msg),
        });
    }
    if let Some(out) = out {
        let body = ControllerFile {
            controller: syn.controller.clone(),
        }
        .to_canonical();
        std::fs::write(out, body).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
        let _ = writeln!(text, "controller written to {}", out.display());
    }
    Ok(Outcome {
        code: EXIT_OK,
        text,
        report: Some(Value::Object(rep)),
        error: None,
    })
}

pub fn verify(opts: &GlobalOpts, plant_path: &Path, ctrl_path: &Path) -> CmdResult {
    let file = load_plant(plant_path)?;
    let tol = tolerances(opts, &file)?;
    let p = &file.plant;
    let text = std::fs::read_to_string(ctrl_path)
        .map_err(|e| format!("cannot read {}: {e}", ctrl_path.display()))?;
    let ctrl =
        ControllerFile::parse(&text, p).map_err(|e| format!("{}: {e}", ctrl_path.display()))?;
    let cl = close_loop(p, &ctrl.controller, &tol).map_err(err)?;
    let ver = verify_decoupled(&cl, &tol);
    let sigma = closed_loop_spectrum(&cl, &tol);

    let mut rep = header("verify", &tol);
    rep.insert("dims".into(), dims(p));
    rep.insert("controller_order".into(), json!(ctrl.controller.order()));
    rep.insert("closed_loop_spectrum".into(), spectrum(&sigma));
    rep.insert(
        "spectrum_error_estimate".into(),
        num(spectrum_error_estimate(&cl)),
    );
    rep.insert("verification".into(), verification_value(&ver));
    let text = format!(
        "closed-loop spectrum: {sigma}\ndecoupled: {} (markov {:.3e}, feedthrough {:.3e})\n",
        ver.decoupled, ver.max_markov_residual, ver.feedthrough_residual
    );
    Ok(Outcome {
        code: if ver.decoupled { EXIT_OK } else { EXIT_VERIFY },
        text,
        report: Some(Value::Object(rep)),
        error: None,
    })
}

pub fn gen(opts: &GlobalOpts, d: Dims, solvable: bool, out: Option<&Path>) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let plant = if solvable {
        solvable_plant(&mut rng, d, Shape::default()).plant
    } else {
        unsolvable_plant(&mut rng, d)
    };
    let body = PlantFile::from_plant(plant).to_canonical();
    let text = match out {
        Some(path) => {
            std::fs::write(path, &body)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            format!("plant written to {}\n", path.display())
        }
        None => body,
    };
    let tol = resolve_tolerances(opts, None);
    let mut rep = header("gen", &tol);
    rep.insert(
        "dims".into(),
        json!({"n": d.n, "m": d.m, "p": d.p, "q": d.q, "r": d.r}),
    );
    rep.insert("seed".into(), json!(opts.seed));
    rep.insert("solvable".into(), json!(solvable));
    Ok(Outcome {
        code: EXIT_OK,
        text,
        report: Some(Value::Object(rep)),
        error: None,
    })
}
