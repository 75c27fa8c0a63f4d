//! Quantifier elimination over the reals by partial cylindrical algebraic
//! decomposition: sentence decision, solution-formula construction for
//! formulas with free variables, equivalence checking, and satisfiability
//! with internal and external backends.

mod sat;
mod smt;

pub use sat::{check_sat, SatResult};
pub use smt::{emit_smtlib, parse_solver_response, run_external_solver, SOLVER_ENV};

use crate::cad::{projection_basis, stack_over, CadConfig, CadError, Projection};
use crate::formula::{to_prenex, Formula, PrenexFormula, QuantKind, Rel};
use crate::poly::{sign_at, Poly, SamplePoint, Var};
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

#[derive(Debug, thiserror::Error)]
pub enum QeError {
    #[error("formula has free variables but a sentence was expected")]
    NotSentence,
    #[error("no sign-invariant solution formula exists for the computed basis")]
    NoSolutionFormula,
    #[error(transparent)]
    Cad(#[from] CadError),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct QeConfig {
    pub time_limit: Option<Duration>,
    pub projection: Option<Projection>,
}

impl QeConfig {
    pub fn with_time_limit(limit: Duration) -> Self {
        QeConfig { time_limit: Some(limit), projection: None }
    }

    fn cad(&self) -> CadConfig {
        CadConfig {
            deadline: self.time_limit.map(|l| Instant::now() + l),
            projection: self.projection,
        }
    }
}

/// Variable order for a prenex formula: free variables first (given order),
/// then quantifier blocks outermost-first, so the innermost block sits at
/// the highest lifting level.
fn variable_order(free: &[Var], p: &PrenexFormula) -> Vec<Var> {
    let mut order: Vec<Var> = free.to_vec();
    order.extend(p.bound_vars());
    order
}

/// Quantifier kind at each level at or above `free.len()`.
fn level_kinds(free_len: usize, order_len: usize, p: &PrenexFormula) -> Vec<Option<QuantKind>> {
    let mut kinds = vec![None; free_len];
    for b in &p.blocks {
        for _ in &b.vars {
            kinds.push(Some(b.kind));
        }
    }
    debug_assert_eq!(kinds.len(), order_len);
    kinds
}

struct Lifter<'a> {
    basis: &'a [Vec<Poly>],
    order: &'a [Var],
    kinds: &'a [Option<QuantKind>],
    matrix: &'a Formula,
    kind: Projection,
    cfg: CadConfig,
}

impl Lifter<'_> {
    /// Truth of the quantified suffix over a sample of the first `level`
    /// coordinates, with short-circuit pruning inside quantifier blocks.
    fn decide_from(&self, point: &SamplePoint, dim: usize) -> Result<bool, CadError> {
        let level = point.len();
        if level == self.order.len() {
            return Ok(self.matrix.evaluate_algebraic(&point.coords).map_err(CadError::from)?);
        }
        let kind = self.kinds[level].expect("deciding below a free level");
        let var = &self.order[level];
        let stack = stack_over(&self.basis[level], var, point, dim, self.kind, &self.cfg)?;
        // sectors first: their samples are rational, so a short-circuit
        // found there avoids lifting over expensive algebraic sections
        let sectors = stack.iter().filter(|s| !s.is_section);
        let sections = stack.iter().filter(|s| s.is_section);
        for s in sectors.chain(sections) {
            let d = if s.is_section { dim } else { dim + 1 };
            let t = self.decide_from(&point.extended(var.clone(), s.value.clone()), d)?;
            match kind {
                QuantKind::Exists if t => return Ok(true),
                QuantKind::Forall if !t => return Ok(false),
                _ => {}
            }
        }
        Ok(kind == QuantKind::Forall)
    }

    /// Enumerates free-space cells, recording each sign vector over the
    /// free-level basis together with the truth of the quantified suffix.
    fn tabulate(
        &self,
        free_len: usize,
        point: &SamplePoint,
        dim: usize,
        out: &mut Vec<(Vec<i8>, bool, SamplePoint)>,
    ) -> Result<(), CadError> {
        let level = point.len();
        if level == free_len {
            let mut signs = Vec::new();
            for bucket in self.basis.iter().take(free_len) {
                for p in bucket {
                    signs.push(sign_at(p, &point.coords).map_err(CadError::from)?);
                }
            }
            let truth = self.decide_from(point, dim)?;
            out.push((signs, truth, point.clone()));
            return Ok(());
        }
        let var = &self.order[level];
        let stack = stack_over(&self.basis[level], var, point, dim, self.kind, &self.cfg)?;
        for s in &stack {
            let d = if s.is_section { dim } else { dim + 1 };
            self.tabulate(free_len, &point.extended(var.clone(), s.value.clone()), d, out)?;
        }
        Ok(())
    }
}

/// Decides a sentence (no free variables).
pub fn decide_sentence(f: &Formula, cfg: &QeConfig) -> Result<bool, QeError> {
    let p = to_prenex(f);
    if !p.matrix.free_vars().is_subset(&p.bound_vars().iter().cloned().collect()) {
        return Err(QeError::NotSentence);
    }
    match p.matrix.simplify() {
        Formula::True => return Ok(true),
        Formula::False => return Ok(false),
        _ => {}
    }
    let order = variable_order(&[], &p);
    let kinds = level_kinds(0, order.len(), &p);
    run_with_fallback(cfg, |kind| {
        let basis = projection_basis(&p.matrix.polynomials(), &order, kind, &cfg.cad())?;
        let lifter = Lifter {
            basis: &basis,
            order: &order,
            kinds: &kinds,
            matrix: &p.matrix,
            kind,
            cfg: cfg.cad(),
        };
        lifter.decide_from(&SamplePoint::new(), 0)
    })
}

fn run_with_fallback<T>(
    cfg: &QeConfig,
    mut attempt: impl FnMut(Projection) -> Result<T, CadError>,
) -> Result<T, QeError> {
    let kinds: &[Projection] = match cfg.projection {
        Some(Projection::McCallum) => &[Projection::McCallum],
        Some(Projection::Collins) => &[Projection::Collins],
        None => &[Projection::McCallum, Projection::Collins],
    };
    let _budget = crate::poly::budget::guard(cfg.cad().deadline);
    let mut last = None;
    for &k in kinds {
        match attempt(k) {
            Ok(t) => return Ok(t),
            Err(CadError::NotWellOriented) => last = Some(CadError::NotWellOriented),
            Err(e) => return Err(e.into()),
        }
    }
    Err(QeError::Cad(last.unwrap()))
}

/// Eliminates all quantifiers: returns a quantifier-free formula in the free
/// variables equivalent to `f` over the reals. `free_order` fixes the CAD
/// order of the free variables and must cover all of them.
pub fn eliminate(f: &Formula, free_order: &[Var], cfg: &QeConfig) -> Result<Formula, QeError> {
    let p = to_prenex(f);
    let free = p.to_formula().free_vars();
    for v in &free {
        if !free_order.contains(v) {
            return Err(QeError::Cad(CadError::UnorderedVariable(v.name().to_string())));
        }
    }
    if p.blocks.is_empty() && matches!(p.matrix, Formula::True | Formula::False) {
        return Ok(p.matrix.clone());
    }
    let order = variable_order(free_order, &p);
    let kinds = level_kinds(free_order.len(), order.len(), &p);
    // derivative augmentation: retried with extra polynomials when distinct
    // truth values share a sign vector
    let mut extra: Vec<Poly> = Vec::new();
    for _round in 0..3 {
        let mut polys = p.matrix.polynomials();
        polys.extend(extra.iter().cloned());
        let table = run_with_fallback(cfg, |kind| {
            let basis = projection_basis(&polys, &order, kind, &cfg.cad())?;
            let lifter = Lifter {
                basis: &basis,
                order: &order,
                kinds: &kinds,
                matrix: &p.matrix,
                kind,
                cfg: cfg.cad(),
            };
            let mut table = Vec::new();
            lifter.tabulate(free_order.len(), &SamplePoint::new(), 0, &mut table)?;
            let flat: Vec<Poly> = basis
                .iter()
                .take(free_order.len())
                .flat_map(|b| b.iter().cloned())
                .collect();
            Ok((flat, table))
        })?;
        let (flat, table) = table;
        match solution_formula(&flat, &table) {
            Ok(sol) => return Ok(sol),
            Err(conflicts) => {
                // augment with derivatives of the polynomials whose signs
                // failed to separate truth values
                for p in &conflicts {
                    for v in p.vars().to_vec() {
                        let d = p.derivative(&v);
                        let n = d.normalized();
                        if !n.is_constant() && !extra.contains(&n) {
                            extra.push(n);
                        }
                    }
                }
                if extra.is_empty() {
                    return Err(QeError::NoSolutionFormula);
                }
            }
        }
    }
    Err(QeError::NoSolutionFormula)
}

/// Builds a defining formula from per-cell sign vectors: disjunction over
/// true cells of greedily-shortened sign conditions that still exclude every
/// false cell. Returns the basis polynomials involved in conflicts on
/// failure.
fn solution_formula(
    basis: &[Poly],
    table: &[(Vec<i8>, bool, SamplePoint)],
) -> Result<Formula, Vec<Poly>> {
    let mut by_vector: BTreeMap<&[i8], bool> = BTreeMap::new();
    let mut conflict = false;
    for (v, t, _) in table {
        match by_vector.get(v.as_slice()) {
            Some(prev) if *prev != *t => conflict = true,
            _ => {
                by_vector.insert(v, *t);
            }
        }
    }
    if conflict {
        return Err(basis.to_vec());
    }
    let false_vectors: Vec<&[i8]> = by_vector
        .iter()
        .filter(|(_, t)| !**t)
        .map(|(v, _)| *v)
        .collect();
    let mut clauses: Vec<Formula> = Vec::new();
    for (vector, truth) in &by_vector {
        if !truth {
            continue;
        }
        // greedily drop components while no false vector matches the rest
        let mut keep: Vec<bool> = vec![true; vector.len()];
        for i in 0..vector.len() {
            keep[i] = false;
            let safe = !false_vectors.iter().any(|fv| {
                fv.iter()
                    .zip(vector.iter())
                    .zip(keep.iter())
                    .all(|((a, b), k)| !k || a == b)
            });
            if !safe {
                keep[i] = true;
            }
        }
        let conj: Vec<Formula> = basis
            .iter()
            .zip(vector.iter())
            .zip(keep.iter())
            .filter(|(_, k)| **k)
            .map(|((p, s), _)| sign_atom(p, *s))
            .collect();
        let clause = Formula::and(conj);
        if !clauses.contains(&clause) {
            clauses.push(clause);
        }
    }
    Ok(Formula::or(clauses).simplify())
}

fn sign_atom(p: &Poly, s: i8) -> Formula {
    let rel = match s {
        0 => Rel::Eq,
        1 => Rel::Gt,
        _ => Rel::Lt,
    };
    Formula::atom(p.clone(), rel)
}

/// True iff the two formulas agree at every point of R^n over their shared
/// free variables.
pub fn equivalent(f: &Formula, g: &Formula, cfg: &QeConfig) -> Result<bool, QeError> {
    let mut free: Vec<Var> = f.free_vars().into_iter().collect();
    for v in g.free_vars() {
        if !free.contains(&v) {
            free.push(v);
        }
    }
    let both = Formula::and(vec![
        Formula::implies(f.clone(), g.clone()),
        Formula::implies(g.clone(), f.clone()),
    ]);
    let closed = Formula::quant(QuantKind::Forall, free, both);
    decide_sentence(&closed, cfg)
}

#[cfg(test)]
mod tests {
    use super::sat::check_sat_internal;
    use super::*;
    use crate::formula::parse;
    use std::io::Write as _;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn cfg() -> QeConfig {
        QeConfig::default()
    }

    #[test]
    fn decides_basic_sentences() {
        let cases = [
            ("forall x. x^2 >= 0", true),
            ("exists x. x^2 < 0", false),
            ("forall x. exists y. y > x", true),
            ("exists x. forall y. y > x", false),
            ("exists x. x^2 == 2", true),
            ("forall x. x^2 != 2", false),
            ("exists x y. x^2 + y^2 == 1 && x == y", true),
            ("forall x. x^3 - x <= 0 || x > -1", true),
            ("forall x. x^3 - x <= 0 || x >= 1", false),
        ];
        for (src, expect) in cases {
            let f = parse(src).unwrap();
            assert_eq!(decide_sentence(&f, &cfg()).unwrap(), expect, "{src}");
        }
    }

    #[test]
    fn rejects_open_formulas_as_sentences() {
        let f = parse("exists y. y > x").unwrap();
        assert!(matches!(decide_sentence(&f, &cfg()), Err(QeError::NotSentence)));
    }

    #[test]
    fn eliminates_square_root_existence() {
        let f = parse("exists y. y^2 == x").unwrap();
        let sol = eliminate(&f, &[v("x")], &cfg()).unwrap();
        assert!(sol.is_quantifier_free());
        assert!(equivalent(&sol, &parse("x >= 0").unwrap(), &cfg()).unwrap());
    }

    #[test]
    fn eliminates_reciprocal_existence() {
        let f = parse("exists y. x*y == 1").unwrap();
        let sol = eliminate(&f, &[v("x")], &cfg()).unwrap();
        assert!(equivalent(&sol, &parse("x != 0").unwrap(), &cfg()).unwrap());
    }

    #[test]
    fn eliminates_positive_definite_condition() {
        // y^2 + x y + 1 > 0 for all y iff the discriminant x^2 - 4 < 0
        let f = parse("forall y. y^2 + x*y + 1 > 0").unwrap();
        let sol = eliminate(&f, &[v("x")], &cfg()).unwrap();
        assert!(equivalent(&sol, &parse("x^2 < 4").unwrap(), &cfg()).unwrap());
    }

    #[test]
    fn eliminate_in_two_free_variables() {
        // the vertical projection of the unit circle band: exists y with
        // x^2 + y^2 <= r is solvable iff x^2 <= r
        let f = parse("exists y. x^2 + y^2 <= r").unwrap();
        let sol = eliminate(&f, &[v("r"), v("x")], &cfg()).unwrap();
        assert!(equivalent(&sol, &parse("x^2 <= r").unwrap(), &cfg()).unwrap());
    }

    #[test]
    fn equivalence_distinguishes_strictness() {
        let a = parse("x > 0").unwrap();
        let b = parse("x >= 0").unwrap();
        assert!(!equivalent(&a, &b, &cfg()).unwrap());
        assert!(equivalent(&a, &parse("x^3 > 0").unwrap(), &cfg()).unwrap());
    }

    #[test]
    fn internal_sat_finds_rational_models() {
        let f = parse("x^2 + y^2 < 1 && x > 1/2").unwrap();
        match check_sat_internal(&f, &cfg()) {
            SatResult::Sat(Some(model)) => assert!(f.evaluate(&model).unwrap()),
            other => panic!("expected sat with model, got {other:?}"),
        }
        assert_eq!(
            check_sat_internal(&parse("x^2 + 1 <= 0").unwrap(), &cfg()),
            SatResult::Unsat
        );
    }

    #[test]
    fn presolve_handles_threshold_and_ratio_patterns() {
        // after eliminating d (large) and e (small) the core is x == 1 && x > 0
        let f = parse(
            "exists d e. d > 0 && e > 0 && x^2 + y^2 < d && (x - e^2*y > 0 || y < 0) && x == 1",
        )
        .unwrap();
        match check_sat_internal(&f, &cfg()) {
            SatResult::Sat(_) => {}
            other => panic!("expected sat, got {other:?}"),
        }
        // many variables, no structure: falls back to sampling and stays sound
        let g = parse("a^2 + b^2 + c^2 + d^2 + e^2 + f^2 + g^2 == 3").unwrap();
        match check_sat_internal(&g, &cfg()) {
            SatResult::Sat(Some(m)) => assert!(g.evaluate(&m).unwrap()),
            SatResult::Unknown(_) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn smtlib_emission_shape() {
        let f = parse("x^2 - 2*x*y >= 0 && exists z. z > x").unwrap();
        let s = emit_smtlib(&f);
        assert!(s.contains("(set-logic NRA)"));
        assert!(s.contains("(declare-const x Real)"));
        assert!(s.contains("(declare-const y Real)"));
        assert!(s.contains("(exists ((z Real))"));
        assert!(s.contains("(check-sat)"));
        let qf = parse("x > 0").unwrap();
        assert!(emit_smtlib(&qf).contains("(set-logic QF_NRA)"));
    }

    #[test]
    fn parses_solver_responses() {
        let f = parse("x > 0 && 2*x < 3").unwrap();
        let sat = "sat\n(model\n  (define-fun x () Real (/ 1 2))\n)\n";
        assert_eq!(
            parse_solver_response(sat, &f),
            SatResult::Sat(Some(vec![(v("x"), crate::poly::rat(1, 2))]))
        );
        assert_eq!(parse_solver_response("unsat\n", &f), SatResult::Unsat);
        // decimal literals work too
        let dec = "sat\n(model (define-fun x () Real 0.5))\n";
        assert_eq!(
            parse_solver_response(dec, &f),
            SatResult::Sat(Some(vec![(v("x"), crate::poly::rat(1, 2))]))
        );
        // sat with an algebraic (non-rational) witness degrades to unknown
        let alg = "sat\n(model (define-fun x () Real (root-obj (+ (^ x 2) (- 2)) 2)))\n";
        assert!(matches!(parse_solver_response(alg, &f), SatResult::Unknown(_)));
        // a lying model is rejected by exact verification
        let bad = "sat\n(model (define-fun x () Real 7))\n";
        assert!(matches!(parse_solver_response(bad, &f), SatResult::Unknown(_)));
    }

    #[test]
    fn external_solver_round_trip_with_scripted_solver() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fakesolver.sh");
        let mut file = std::fs::File::create(&path).unwrap();
        // answers sat with x = 3/4 regardless of input
        writeln!(file, "#!/bin/sh").unwrap();
        writeln!(file, "cat > /dev/null").unwrap();
        writeln!(file, "echo sat").unwrap();
        writeln!(file, "echo '(model (define-fun x () Real (/ 3 4)))'").unwrap();
        drop(file);
        let mut perms = std::fs::metadata(&path).unwrap().permissions();
        use std::os::unix::fs::PermissionsExt;
        perms.set_mode(0o755);
        std::fs::set_permissions(&path, perms).unwrap();

        std::env::set_var(SOLVER_ENV, path.to_str().unwrap());
        let f = parse("x > 1/2 && x < 1").unwrap();
        let r = check_sat(&f, &cfg());
        std::env::remove_var(SOLVER_ENV);
        assert_eq!(r, SatResult::Sat(Some(vec![(v("x"), crate::poly::rat(3, 4))])));

        // model conflicting with the formula is not trusted
        std::env::set_var(SOLVER_ENV, path.to_str().unwrap());
        let g = parse("x > 1").unwrap();
        let r2 = check_sat(&g, &cfg());
        std::env::remove_var(SOLVER_ENV);
        assert!(matches!(r2, SatResult::Unknown(_)));
    }
}
