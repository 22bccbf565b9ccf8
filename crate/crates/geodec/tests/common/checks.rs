//! Independent oracles and per-instance checks shared by the randomized
//! suites and the acceptance target.

use geodec::ddp::generate::{gaussian, random_quadruple, solvable_plant, Dims, Planted, Shape};
use geodec::ddp::{
    build_sm, build_vm, canonical_triples, check_solution_triple, gain_invariance_residual,
    k_parameterization, solvability, KSearch, Plant, SolutionTriple,
};
use geodec::fixed_poles::{assumption_checks, fixed_poles_pair, sigma_bounds, sigma_star};
use geodec::geometry::{
    assignable_blocks, assignable_blocks_s, fixed_poles_s_with, fixed_poles_v_with,
    input_containing_friend, output_nulling_friend, qstar, rstar, sstar, vstar, FriendF, FriendG,
};
use geodec::linalg::{hstack, pinv, vstack};
use geodec::spectrum::eigenvalue_conditions;
use geodec::subspace::{image, kernel, quotient_spectrum};
use geodec::synth::{
    close_loop, closed_loop_spectrum, precompensate, synthesize, verify_decoupled,
};
use geodec::{Matrix, Quadruple, SpectrumMultiset, Subspace, Tolerances};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dims<R: Rng>(rng: &mut R) -> Dims {
    Dims {
        n: rng.random_range(2..=6),
        m: rng.random_range(1..=3),
        p: rng.random_range(1..=3),
        q: rng.random_range(1..=2),
        r: rng.random_range(1..=2),
    }
}

pub fn quadruple(seed: u64) -> Quadruple {
    let mut g = rng(seed);
    let n = g.random_range(1..=6);
    let m = g.random_range(1..=3);
    let p = g.random_range(1..=3);
    random_quadruple(&mut g, n, m, p)
}

pub fn planted(seed: u64, shape: Shape) -> Planted {
    let mut g = rng(seed);
    let d = random_dims(&mut g);
    solvable_plant(&mut g, d, shape)
}

/// Largest distance of either basis from the other subspace.
pub fn mutual_residual(a: &Subspace, b: &Subspace) -> f64 {
    a.residual_of(b.basis()).max(b.residual_of(a.basis()))
}

/// `S_{k+1} = [A B]((S_k ⊕ U) ∩ ker [C D])` from `S_0 = 0`, run directly on
/// the quadruple without passing through the dual.
pub fn s_sequence(q: &Quadruple, tol: &Tolerances) -> Subspace {
    let (n, m) = (q.n(), q.m());
    let ab = hstack(&[&q.a, &q.b]);
    let ker_cd = kernel(&hstack(&[&q.c, &q.d]), tol);
    let mut s = Subspace::zero(n);
    for _ in 0..=n {
        let dom = s.direct_sum(&Subspace::whole(m)).intersect(&ker_cd, tol);
        let next = image(&(&ab * dom.basis()), tol);
        let done = next.dim() == s.dim();
        s = next;
        if done {
            break;
        }
    }
    s
}

/// Worst mutual-containment residual among the duality identities and the
/// direct oracles `S* = S-sequence`, `R* = V* ∩ S*`, `Q* = V* + S*`.
pub fn duality_residual(q: &Quadruple, tol: &Tolerances) -> Result<f64, String> {
    let dual = q.dual();
    let v = vstar(q, tol);
    let s = sstar(q, tol);
    let r = rstar(q, tol).map_err(|e| e.to_string())?;
    let qs = qstar(q, tol).map_err(|e| e.to_string())?;
    let r_dual = rstar(&dual, tol).map_err(|e| e.to_string())?;
    let pairs = [
        (&s, vstar(&dual, tol).perp(), "S* vs dual V*"),
        (&s, s_sequence(q, tol), "S* vs S-sequence"),
        (&qs, r_dual.perp(), "Q* vs dual R*"),
        (&qs, v.sum(&s, tol), "Q* vs V* + S*"),
        (&r, v.intersect(&s, tol), "R* vs V* ∩ S*"),
    ];
    let mut worst: f64 = 0.0;
    for (a, b, what) in pairs {
        if a.dim() != b.dim() {
            return Err(format!("{what}: dim {} vs {}", a.dim(), b.dim()));
        }
        worst = worst.max(mutual_residual(a, &b));
    }
    Ok(worst)
}

fn vec_of(m: &Matrix) -> Matrix {
    Matrix::from_column_slice(m.len(), 1, m.as_slice())
}

fn unvec(x: &Matrix, rows: usize, cols: usize) -> Matrix {
    Matrix::from_column_slice(rows, cols, x.as_slice())
}

/// All `K` with `(Ã + B̃KC̃)(S ⊕ W) ⊆ V ⊕ 0`, found by least squares on the
/// Kronecker form: a particular solution and a basis of the homogeneous part
/// (columns are `vec K`).
pub fn kron_gains(
    plant: &Plant,
    s: &Subspace,
    v: &Subspace,
    tol: &Tolerances,
) -> Result<(Matrix, Matrix), String> {
    let mspace = s.direct_sum(&Subspace::whole(plant.q()));
    let nspace = v.direct_sum(&Subspace::zero(plant.r()));
    let dim = plant.n() + plant.r();
    let proj = Matrix::identity(dim, dim) - nspace.projector();
    let mb = mspace.basis();
    let lhs = (plant.c_tilde() * mb)
        .transpose()
        .kronecker(&(&proj * plant.b_tilde()));
    let rhs = -vec_of(&(&proj * plant.a_tilde() * mb));
    let k0 = pinv(&lhs, tol) * &rhs;
    let miss = (&lhs * &k0 - &rhs).norm();
    if miss > 1e-8 * rhs.norm().max(1.0) {
        return Err(format!(
            "Kronecker system inconsistent (residual {miss:.3e})"
        ));
    }
    Ok((k0, kernel(&lhs, tol).basis().clone()))
}

/// Oracle gains against the parameterized family on `(S*, V*)`. Returns the
/// worst residual seen.
pub fn gain_oracle_residual<R: Rng>(
    plant: &Plant,
    rng: &mut R,
    samples: usize,
    tol: &Tolerances,
) -> Result<f64, String> {
    let s = sstar(&plant.measurement_quadruple(), tol);
    let v = vstar(&plant.control_quadruple(), tol);
    let (m, p) = (plant.m(), plant.p());
    let kp = k_parameterization(
        &s.direct_sum(&Subspace::whole(plant.q())),
        &v.direct_sum(&Subspace::zero(plant.r())),
        &plant.a_tilde(),
        &plant.b_tilde(),
        &plant.c_tilde(),
        tol,
    )
    .map_err(|e| e.to_string())?;
    let (k0, null) = kron_gains(plant, &s, &v, tol)?;
    if null.ncols() != kp.dimension(tol) {
        return Err(format!(
            "family dimension {} vs oracle {}",
            kp.dimension(tol),
            null.ncols()
        ));
    }
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z = gaussian(rng, null.ncols(), 1);
        let k = unvec(&(&k0 + &null * z), m, p);
        worst = worst.max(kp.affine_residual(&k, tol));
        worst = worst.max(gain_invariance_residual(plant, &s, &v, &k));

        let h1 = gaussian(rng, kp.h1_shape().0, kp.h1_shape().1);
        let h2 = gaussian(rng, kp.h2_shape().0, kp.h2_shape().1);
        let member = kp.gain(&h1, &h2);
        worst = worst.max(gain_invariance_residual(plant, &s, &v, &member));
    }
    Ok(worst)
}

/// The gain found for `(S*, V*)` must serve both lattice triples.
pub fn k_transfer(plant: &Plant, tol: &Tolerances) -> Result<(), String> {
    let sol = solvability(plant, tol, &KSearch::default()).map_err(|e| e.to_string())?;
    let k = match (sol.solvable, sol.witness) {
        (true, Some(w)) => w.k,
        _ => return Err(format!("not solvable: {}", sol.diagnosis)),
    };
    let vm = build_vm(plant, tol).map_err(|e| e.to_string())?;
    let sm = build_sm(plant, tol).map_err(|e| e.to_string())?;
    for (name, s, v) in [
        ("(V_m ∩ S_M, V_m)", vm.intersect(&sm, tol), vm.clone()),
        ("(S_M, S_M + V_m)", sm.clone(), sm.sum(&vm, tol)),
    ] {
        let c = check_solution_triple(plant, &s, &v, &k, tol);
        if !c.passes() {
            return Err(format!("{name} fails {}", c.failures().join(", ")));
        }
    }
    Ok(())
}

/// A random output-nulling friend of the same subspace as `base`.
pub fn random_friend_f<R: Rng>(
    rng: &mut R,
    q: &Quadruple,
    base: &FriendF,
    tol: &Tolerances,
) -> FriendF {
    let v = base.subspace();
    let n = q.n();
    let outside = Matrix::identity(n, n) - v.projector();
    let inputs = kernel(&vstack(&[&(&outside * &q.b), &q.d]), tol);
    let z = gaussian(rng, inputs.dim(), v.dim());
    let y = gaussian(rng, q.m(), n);
    let f = base.matrix() + inputs.basis() * z * v.basis().transpose() + y * outside;
    FriendF::new(q, f, v.clone(), tol).expect("sampled friend is output nulling")
}

/// A random input-containing friend of the same subspace as `base`.
pub fn random_friend_g<R: Rng>(
    rng: &mut R,
    q: &Quadruple,
    base: &FriendG,
    tol: &Tolerances,
) -> FriendG {
    let s = base.subspace();
    let seen = image(&hstack(&[&(&q.c * s.basis()), &q.d]), tol);
    let p = q.p();
    let z = gaussian(rng, s.dim(), seen.dim());
    let y = gaussian(rng, q.n(), p);
    let g = base.matrix()
        + s.basis() * z * seen.basis().transpose()
        + y * (Matrix::identity(p, p) - seen.projector());
    FriendG::new(q, g, s.clone(), tol).expect("sampled friend is input containing")
}

/// Fixed poles of every canonical triple must not depend on the friend.
pub fn friend_invariance<R: Rng>(
    plant: &Plant,
    rng: &mut R,
    friends: usize,
    tol: &Tolerances,
) -> Result<(), String> {
    let triples = canonical_triples(plant, tol, &KSearch::default()).map_err(|e| e.to_string())?;
    let cq = plant.control_quadruple();
    let mq = plant.measurement_quadruple();
    for t in &triples {
        let f0 = output_nulling_friend(&cq, &t.v, tol).map_err(|e| e.to_string())?;
        let g0 = input_containing_friend(&mq, &t.s, tol).map_err(|e| e.to_string())?;
        let fv = fixed_poles_v_with(&cq, &f0, tol).map_err(|e| e.to_string())?;
        let fs = fixed_poles_s_with(&mq, &g0, tol).map_err(|e| e.to_string())?;
        for _ in 0..friends {
            let f = random_friend_f(rng, &cq, &f0, tol);
            let g = random_friend_g(rng, &mq, &g0, tol);
            let fv2 = fixed_poles_v_with(&cq, &f, tol).map_err(|e| e.to_string())?;
            let fs2 = fixed_poles_s_with(&mq, &g, tol).map_err(|e| e.to_string())?;
            if !fv.equals(&fv2) {
                return Err(format!("{}: V fixed poles {fv} vs {fv2}", t.kind));
            }
            if !fs.equals(&fs2) {
                return Err(format!("{}: S fixed poles {fs} vs {fs2}", t.kind));
            }
        }
    }
    Ok(())
}

/// `σ(A+BF | (S_M+V_m)/V_m) = σ(A+GC | S_M/(V_m∩S_M))` for random friends
/// of `S_M + V_m` and `V_m ∩ S_M`.
pub fn lattice_spectral_equality<R: Rng>(
    plant: &Plant,
    rng: &mut R,
    friends: usize,
    tol: &Tolerances,
) -> Result<(), String> {
    let vm = build_vm(plant, tol).map_err(|e| e.to_string())?;
    let sm = build_sm(plant, tol).map_err(|e| e.to_string())?;
    let sum = sm.sum(&vm, tol);
    let cap = vm.intersect(&sm, tol);
    let cq = plant.control_quadruple();
    let mq = plant.measurement_quadruple();
    let f0 = output_nulling_friend(&cq, &sum, tol).map_err(|e| e.to_string())?;
    let g0 = input_containing_friend(&mq, &cap, tol).map_err(|e| e.to_string())?;
    for i in 0..=friends {
        let (f, g) = if i == 0 {
            (f0.clone(), g0.clone())
        } else {
            (
                random_friend_f(rng, &cq, &f0, tol),
                random_friend_g(rng, &mq, &g0, tol),
            )
        };
        let abf = &plant.a + &plant.b * f.matrix();
        let agc = &plant.a + g.matrix() * &plant.c;
        let lhs = quotient_spectrum(&abf, &vm, &sum, tol).map_err(|e| e.to_string())?;
        let rhs = quotient_spectrum(&agc, &cap, &sm, tol).map_err(|e| e.to_string())?;
        if !lhs.equals(&rhs) {
            return Err(format!("{lhs} vs {rhs}"));
        }
    }
    Ok(())
}

/// Random targets for blocks of the given sizes, in the left half plane and
/// at least `gap` apart from each other and from `avoid`. Each odd block gets
/// a real value; the rest are reals or conjugate pairs.
pub fn random_targets<R: Rng>(
    rng: &mut R,
    blocks: &[usize],
    avoid: &SpectrumMultiset,
    gap: f64,
) -> SpectrumMultiset {
    let count: usize = blocks.iter().sum();
    let mut reals_needed = blocks.iter().filter(|&&b| b % 2 == 1).count();
    let mut out: Vec<Complex64> = Vec::new();
    let clear = |z: Complex64, out: &[Complex64]| {
        avoid
            .values()
            .iter()
            .chain(out.iter())
            .all(|w| (z - w).norm() > gap)
    };
    while out.len() < count {
        let re = -rng.random_range(0.5..6.0);
        let room = count - out.len() - reals_needed;
        if room >= 2 && rng.random_bool(0.3) {
            let z = Complex64::new(re, rng.random_range(0.3..3.0));
            if clear(z, &out) && clear(z.conj(), &out) {
                out.push(z);
                out.push(z.conj());
            }
        } else {
            let z = Complex64::new(re, 0.0);
            if clear(z, &out) {
                out.push(z);
                reals_needed = reals_needed.saturating_sub(1);
            }
        }
    }
    SpectrumMultiset::new(out, avoid.tol())
}

/// Block sizes the synthesis places separately for this triple.
pub fn target_blocks(
    plant: &Plant,
    t: &SolutionTriple,
    tol: &Tolerances,
) -> Result<Vec<usize>, String> {
    let pre = precompensate(plant, &t.k, tol).map_err(|e| e.to_string())?;
    let p = &pre.plant;
    let (fi, fo) =
        assignable_blocks(&p.control_quadruple(), &t.v, tol).map_err(|e| e.to_string())?;
    let (gi, go) =
        assignable_blocks_s(&p.measurement_quadruple(), &t.s, tol).map_err(|e| e.to_string())?;
    Ok(vec![fi, fo, gi, go])
}

/// Synthesize with random targets, verify decoupling and return the
/// closed-loop spectrum.
pub fn random_closed_loop<R: Rng>(
    plant: &Plant,
    t: &SolutionTriple,
    fixed: &SpectrumMultiset,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<SpectrumMultiset, String> {
    let blocks = target_blocks(plant, t, tol)?;
    let target = random_targets(rng, &blocks, fixed, 0.25);
    let ctrl = synthesize(plant, t, Some(&target), tol).map_err(|e| e.to_string())?;
    let cl = close_loop(plant, &ctrl, tol).map_err(|e| e.to_string())?;
    let ver = verify_decoupled(&cl, tol);
    if !ver.decoupled {
        return Err(format!(
            "{} controller not decoupling: markov {:.3e}, feedthrough {:.3e}",
            t.kind, ver.max_markov_residual, ver.feedthrough_residual
        ));
    }
    Ok(closed_loop_spectrum(&cl, tol))
}

/// σ* lies in every randomly placed closed-loop spectrum of the triple
/// achieving it, and equals their intersection. Returns `|σ*|`.
pub fn sigma_star_monte_carlo<R: Rng>(
    plant: &Plant,
    rng: &mut R,
    controllers: usize,
    tol: &Tolerances,
) -> Result<usize, String> {
    let star = sigma_star(plant, tol).map_err(|e| e.to_string())?.sigma;
    let triples = canonical_triples(plant, tol, &KSearch::default()).map_err(|e| e.to_string())?;
    let mut best = None;
    for t in &triples {
        let fixed = fixed_poles_pair(plant, &t.s, &t.v, tol).map_err(|e| e.to_string())?;
        if fixed.equals(&star) {
            best = Some((t, fixed));
            break;
        }
    }
    let (t, fixed) = best.ok_or_else(|| format!("no canonical triple attains σ* = {star}"))?;
    let mut common: Option<SpectrumMultiset> = None;
    for _ in 0..controllers {
        let sigma = random_closed_loop(plant, t, &fixed, rng, tol)?;
        if !sigma.contains(&star) {
            return Err(format!("σ* = {star} not in σ(Â) = {sigma}"));
        }
        common = Some(match common {
            None => sigma,
            Some(c) => c.intersection(&sigma),
        });
    }
    let common = common.unwrap_or_else(|| SpectrumMultiset::empty(tol.eig_match));
    if !common.equals(&star) {
        return Err(format!("intersection {common} differs from σ* = {star}"));
    }
    Ok(star.len())
}

/// σ† lies in every closed-loop spectrum, for every canonical triple.
/// Returns `|σ†|`.
pub fn sigma_dagger_bound<R: Rng>(
    plant: &Plant,
    rng: &mut R,
    controllers: usize,
    tol: &Tolerances,
) -> Result<usize, String> {
    let dagger = sigma_bounds(plant, tol).map_err(|e| e.to_string())?.dagger;
    let triples = canonical_triples(plant, tol, &KSearch::default()).map_err(|e| e.to_string())?;
    for t in &triples {
        let fixed = fixed_poles_pair(plant, &t.s, &t.v, tol).map_err(|e| e.to_string())?;
        for _ in 0..controllers {
            let sigma = random_closed_loop(plant, t, &fixed, rng, tol)?;
            if !sigma.contains(&dagger) {
                return Err(format!("{}: σ† = {dagger} not in σ(Â) = {sigma}", t.kind));
            }
        }
    }
    Ok(dagger.len())
}

/// The library declined to build the canonical triples because its own
/// consistency checks failed, which happens on rank-ambiguous draws.
pub fn refused(plant: &Plant, tol: &Tolerances) -> bool {
    matches!(
        canonical_triples(plant, tol, &KSearch::default()),
        Err(geodec::Error::Inconsistent(_))
    )
}

/// `max κ(λ) · ε · ||M||` over the eigenvalues of `m`.
pub fn eigen_error_estimate(m: &Matrix) -> f64 {
    let kappa = eigenvalue_conditions(m)
        .iter()
        .map(|(_, k)| *k)
        .fold(0.0, f64::max);
    kappa * f64::EPSILON * geodec::linalg::norm2(m)
}

/// Seeds of solvable plants of the given shape for which `keep` holds.
pub fn planted_seeds(
    from: u64,
    count: usize,
    shape: Shape,
    keep: impl Fn(&Plant) -> bool,
) -> Vec<(u64, Plant)> {
    let mut out = Vec::new();
    let mut seed = from;
    while out.len() < count {
        let p = planted(seed, shape).plant;
        if keep(&p) {
            out.push((seed, p));
        }
        seed += 1;
        assert!(seed < from + 100 * count as u64 + 1000, "too few instances");
    }
    out
}

pub fn reachable_and_observable(plant: &Plant, tol: &Tolerances) -> bool {
    assumption_checks(plant, tol)
        .map(|a| a.reachable_abh && a.observable_cea)
        .unwrap_or(false)
}

pub fn neither_assumption(plant: &Plant, tol: &Tolerances) -> bool {
    assumption_checks(plant, tol)
        .map(|a| !a.any())
        .unwrap_or(false)
}
