//! Satisfiability checking. The internal backend combines sound presolve
//! rewrites for purely existential problems with CAD decision on small
//! remainders and exact-verified rational sampling on large ones; an
//! external SMT solver is used instead when one is configured.

use super::smt::run_external_solver;
use super::{run_with_fallback, QeConfig, QeError};
use crate::cad::{projection_basis, stack_over, CadError};
use crate::formula::{to_prenex, Formula, QuantKind, Rel};
use crate::poly::{Poly, Rat, SamplePoint, Var};
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum SatResult {
    /// Satisfiable; the model is present when a rational witness was found.
    Sat(Option<Vec<(Var, Rat)>>),
    Unsat,
    Unknown(String),
}

/// Largest number of variables handed to the CAD decision procedure.
const CAD_VAR_LIMIT: usize = 4;
const SAMPLE_ROUNDS: usize = 4000;

/// Satisfiability of `f` over the reals, free variables read existentially.
pub fn check_sat(f: &Formula, cfg: &QeConfig) -> SatResult {
    if let Some(r) = run_external_solver(f) {
        return r;
    }
    check_sat_internal(f, cfg)
}

pub fn check_sat_internal(f: &Formula, cfg: &QeConfig) -> SatResult {
    let _budget = crate::poly::budget::guard(cfg.cad().deadline);
    let free: Vec<Var> = f.free_vars().into_iter().collect();
    let closed = Formula::quant(QuantKind::Exists, free, f.clone());
    let p = to_prenex(&closed);
    if !p.blocks.iter().all(|b| b.kind == QuantKind::Exists) {
        // quantifier alternation: fall back to plain sentence decision
        return match super::decide_sentence(&closed, cfg) {
            Ok(true) => SatResult::Sat(None),
            Ok(false) => SatResult::Unsat,
            Err(e) => SatResult::Unknown(e.to_string()),
        };
    }
    let mut vars = p.bound_vars();
    let mut conj = match p.matrix.simplify() {
        Formula::True => return SatResult::Sat(Some(Vec::new())),
        Formula::False => return SatResult::Unsat,
        Formula::And(cs) => cs,
        other => vec![other],
    };
    presolve(&mut vars, &mut conj);
    let matrix = Formula::and(conj).simplify();
    match &matrix {
        Formula::True => return SatResult::Sat(None),
        Formula::False => return SatResult::Unsat,
        _ => {}
    }
    vars.retain(|v| matrix.free_vars().contains(v));
    if vars.len() <= CAD_VAR_LIMIT {
        match cad_witness(&matrix, &vars, cfg) {
            Ok(Some(sample)) => SatResult::Sat(sample.as_rational()),
            Ok(None) => SatResult::Unsat,
            Err(e) => SatResult::Unknown(e.to_string()),
        }
    } else {
        match sample_model(&matrix, &vars) {
            Some(model) => SatResult::Sat(Some(model)),
            None => SatResult::Unknown(format!(
                "{} variables after presolve exceed the internal decision limit",
                vars.len()
            )),
        }
    }
}

/// Sound satisfiability-preserving rewrites on an existential conjunction.
fn presolve(vars: &mut Vec<Var>, conj: &mut Vec<Formula>) {
    loop {
        let mut changed = false;
        changed |= substitute_equations(vars, conj);
        changed |= drop_unconstrained(vars, conj);
        changed |= drop_threshold_vars(vars, conj);
        changed |= rewrite_vanishing_ratio(vars, conj);
        conj.retain(|c| *c != Formula::True);
        if !changed {
            return;
        }
    }
}

fn occurrences(v: &Var, conj: &[Formula]) -> Vec<usize> {
    conj.iter()
        .enumerate()
        .filter(|(_, c)| c.free_vars().contains(v))
        .map(|(i, _)| i)
        .collect()
}

/// v == rhs with rhs free of v: substitute and drop the equation.
fn substitute_equations(vars: &mut Vec<Var>, conj: &mut Vec<Formula>) -> bool {
    for vi in 0..vars.len() {
        let v = vars[vi].clone();
        for i in 0..conj.len() {
            let Formula::Atom(p, Rel::Eq) = &conj[i] else { continue };
            if p.degree(&v) != 1 {
                continue;
            }
            let coeffs = p.coeffs_in(&v);
            let Some(c) = coeffs[1].as_constant() else { continue };
            if c.is_zero() {
                continue;
            }
            let rhs = coeffs[0].scale(&(-Rat::one() / c));
            let mut ok = true;
            let mut next = Vec::with_capacity(conj.len() - 1);
            for (j, e) in conj.iter().enumerate() {
                if j == i {
                    continue;
                }
                match e.substitute_equational(&[(v.clone(), rhs.clone())]) {
                    Ok(s) => next.push(s),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                *conj = next;
                vars.remove(vi);
                return true;
            }
        }
    }
    false
}

/// A variable whose only occurrence is one atom that can always be
/// satisfied in that variable (odd degree, or a definite even-degree sign
/// at infinity) is dropped together with the atom.
fn drop_unconstrained(vars: &mut Vec<Var>, conj: &mut Vec<Formula>) -> bool {
    for vi in 0..vars.len() {
        let v = vars[vi].clone();
        let occ = occurrences(&v, conj);
        if occ.is_empty() {
            vars.remove(vi);
            return true;
        }
        if occ.len() != 1 {
            continue;
        }
        let Formula::Atom(p, rel) = &conj[occ[0]] else { continue };
        let d = p.degree(&v);
        let Some(lc) = p.coeffs_in(&v)[d].as_constant() else { continue };
        if lc.is_zero() {
            continue;
        }
        let solvable = if d % 2 == 1 {
            // odd degree with constant leading coefficient is surjective
            true
        } else {
            // even degree: the value has the sign of lc at infinity
            match rel {
                Rel::Gt | Rel::Ge | Rel::Ne => lc.is_positive(),
                Rel::Lt | Rel::Le => lc.is_negative(),
                Rel::Eq => false,
            }
        };
        if solvable {
            conj.remove(occ[0]);
            vars.remove(vi);
            return true;
        }
    }
    false
}

/// d > 0 && X < c*d^k (c > 0, X free of d): taking d large satisfies both;
/// drop d and both atoms.
fn drop_threshold_vars(vars: &mut Vec<Var>, conj: &mut Vec<Formula>) -> bool {
    'vars: for vi in 0..vars.len() {
        let v = vars[vi].clone();
        let occ = occurrences(&v, conj);
        if occ.len() < 2 {
            continue;
        }
        let mut saw_positivity = false;
        for &i in &occ {
            let Formula::Atom(p, rel) = &conj[i] else { continue 'vars };
            if *p == Poly::var(&v) && matches!(rel, Rel::Gt | Rel::Ge) {
                saw_positivity = true;
                continue;
            }
            // needs the shape X - c*v^k rel 0 with rel in {<, <=}, c > 0
            if !matches!(rel, Rel::Lt | Rel::Le) {
                continue 'vars;
            }
            let d = p.degree(&v);
            let coeffs = p.coeffs_in(&v);
            if d == 0 || coeffs[1..d].iter().any(|c| !c.is_zero()) {
                continue 'vars;
            }
            match coeffs[d].as_constant() {
                Some(c) if c.is_negative() => {}
                _ => continue 'vars,
            }
        }
        if !saw_positivity {
            continue;
        }
        let mut keep = Vec::new();
        for (i, e) in conj.iter().enumerate() {
            if !occ.contains(&i) {
                keep.push(e.clone());
            }
        }
        *conj = keep;
        vars.remove(vi);
        return true;
    }
    false
}

/// e > 0 && A - B*e^2 > 0 (A, B free of e): satisfiable in e iff
/// A > 0 || B < 0, uniformly in the other variables.
fn rewrite_vanishing_ratio(vars: &mut Vec<Var>, conj: &mut Vec<Formula>) -> bool {
    'vars: for vi in 0..vars.len() {
        let v = vars[vi].clone();
        let occ = occurrences(&v, conj);
        if occ.len() != 2 {
            continue;
        }
        let mut pos_idx = None;
        let mut main_idx = None;
        for &i in &occ {
            let Formula::Atom(p, rel) = &conj[i] else { continue 'vars };
            if *p == Poly::var(&v) && *rel == Rel::Gt {
                pos_idx = Some(i);
            } else if *rel == Rel::Gt {
                main_idx = Some(i);
            } else {
                continue 'vars;
            }
        }
        let (Some(pi), Some(mi)) = (pos_idx, main_idx) else { continue };
        let Formula::Atom(p, _) = &conj[mi] else { continue };
        if p.degree(&v) != 2 {
            continue;
        }
        let coeffs = p.coeffs_in(&v);
        if !coeffs[1].is_zero() {
            continue;
        }
        let a = coeffs[0].clone();
        let b = coeffs[2].neg(); // p = a - b*v^2
        let replacement = Formula::or(vec![
            Formula::atom(a, Rel::Gt),
            Formula::atom(b, Rel::Lt),
        ]);
        let mut keep = Vec::new();
        for (i, e) in conj.iter().enumerate() {
            if i == mi {
                keep.push(replacement.clone());
            } else if i != pi {
                keep.push(e.clone());
            }
        }
        *conj = keep;
        vars.remove(vi);
        return true;
    }
    false
}

/// Existential CAD search returning a witness sample on success.
fn cad_witness(
    matrix: &Formula,
    vars: &[Var],
    cfg: &QeConfig,
) -> Result<Option<SamplePoint>, QeError> {
    if vars.is_empty() {
        return Ok(match matrix.simplify() {
            Formula::True => Some(SamplePoint::new()),
            _ => None,
        });
    }
    run_with_fallback(cfg, |kind| {
        let basis = projection_basis(&matrix.polynomials(), vars, kind, &cfg.cad())?;
        fn search(
            basis: &[Vec<Poly>],
            vars: &[Var],
            matrix: &Formula,
            kind: crate::cad::Projection,
            cfg: &crate::cad::CadConfig,
            point: &SamplePoint,
            dim: usize,
        ) -> Result<Option<SamplePoint>, CadError> {
            let level = point.len();
            if level == vars.len() {
                return Ok(if matrix.evaluate_algebraic(&point.coords).map_err(CadError::from)? {
                    Some(point.clone())
                } else {
                    None
                });
            }
            let var = &vars[level];
            for s in stack_over(&basis[level], var, point, dim, kind, cfg)? {
                let d = if s.is_section { dim } else { dim + 1 };
                if let Some(w) =
                    search(basis, vars, matrix, kind, cfg, &point.extended(var.clone(), s.value), d)?
                {
                    return Ok(Some(w));
                }
            }
            Ok(None)
        }
        search(&basis, vars, matrix, kind, &cfg.cad(), &SamplePoint::new(), 0)
    })
}

/// Deterministic seeded sampling over a rational value pool; every candidate
/// is verified by exact evaluation.
fn sample_model(matrix: &Formula, vars: &[Var]) -> Option<Vec<(Var, Rat)>> {
    let pool: Vec<Rat> = [
        (0, 1), (1, 1), (-1, 1), (1, 2), (-1, 2), (2, 1), (-2, 1),
        (1, 4), (-1, 4), (3, 2), (-3, 2), (4, 1), (-4, 1), (1, 8), (-1, 8),
    ]
    .iter()
    .map(|&(n, d)| Rat::new(n.into(), d.into()))
    .collect();
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for round in 0..SAMPLE_ROUNDS {
        let point: Vec<(Var, Rat)> = vars
            .iter()
            .map(|v| {
                let idx = if round == 0 { 0 } else { (next() as usize) % pool.len() };
                (v.clone(), pool[idx].clone())
            })
            .collect();
        if matrix.evaluate(&point).unwrap_or(false) {
            return Some(point);
        }
    }
    None
}
