//! Cell-based normal-cone computation: decompose C into sign-invariant
//! cells, process them in ascending dimension, and intersect the per-cell
//! cones into a shrinking upper estimate. The SMT-assisted variant skips
//! cells that provably cannot refine the estimate, defers slow cells, and
//! falls back to boundary pieces for stubborn ones.

use super::{
    cell_cone_condition, BasePoint, CellAction, ConeConfig, ConeError, ConeQuery, ConeResult,
    ProvenanceStep,
};
use crate::cad::{decompose, CadConfig, CadError};
use crate::formula::{Formula, QuantKind, Rel, SemialgebraicSet};
use crate::poly::{Poly, Rat, Var};
use crate::qe::{check_sat, eliminate, QeConfig, QeError, SatResult};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::time::Instant;

/// One cell of the decomposition of C, as a quantifier-free formula over
/// the ambient variables.
#[derive(Clone, Debug)]
pub(crate) struct CCell {
    pub formula: Formula,
    pub dimension: usize,
    pub index_path: Vec<usize>,
}

impl CCell {
    fn label(&self) -> String {
        format!("cell{:?} dim {}", self.index_path, self.dimension)
    }
}

/// Sign-invariant cells of C ordered by ascending dimension. When distinct
/// cells share a sign vector (so sign conditions alone cannot tell them
/// apart), the basis is augmented with derivatives and the decomposition is
/// redone; if that fails to separate them they are merged, which keeps the
/// final intersection sound but coarsens the provenance.
pub(crate) fn c_cells(
    set: &SemialgebraicSet,
    cfg: &CadConfig,
) -> Result<Vec<CCell>, ConeError> {
    let order = &set.ambient_vars;
    let mut polys = set.defining.polynomials();
    for round in 0..3 {
        let tree = decompose(&polys, order, cfg).map_err(QeError::Cad)?;
        let mut groups: BTreeMap<Vec<i8>, Vec<&crate::cad::Cell>> = BTreeMap::new();
        for leaf in &tree.leaves {
            let truth = set
                .defining
                .evaluate_algebraic(&leaf.sample.coords)
                .map_err(|e| QeError::Cad(e.into()))?;
            if truth {
                let key: Vec<i8> = leaf.signs.iter().map(|(_, s)| *s).collect();
                groups.entry(key).or_default().push(leaf);
            }
        }
        let split_needed = groups.values().any(|g| g.len() > 1);
        if split_needed && round < 2 {
            let mut extra = Vec::new();
            for bucket in &tree.basis {
                for p in bucket {
                    for v in p.vars().to_vec() {
                        let d = p.derivative(&v).normalized();
                        if !d.is_constant() && !polys.contains(&d) && !extra.contains(&d) {
                            extra.push(d);
                        }
                    }
                }
            }
            if extra.is_empty() {
                // nothing left to add; accept the merged cells
            } else {
                polys.extend(extra);
                continue;
            }
        }
        let mut cells: Vec<CCell> = groups
            .values()
            .map(|leaves| {
                let rep = leaves
                    .iter()
                    .min_by_key(|l| (l.dimension, l.index_path.clone()))
                    .unwrap();
                let conj: Vec<Formula> = rep
                    .signs
                    .iter()
                    .map(|(p, s)| sign_atom(p, *s))
                    .collect();
                CCell {
                    formula: Formula::and(conj).simplify(),
                    dimension: rep.dimension,
                    index_path: rep.index_path.clone(),
                }
            })
            .collect();
        cells.sort_by(|a, b| {
            (a.dimension, &a.index_path).cmp(&(b.dimension, &b.index_path))
        });
        return Ok(cells);
    }
    unreachable!()
}

fn sign_atom(p: &Poly, s: i8) -> Formula {
    let rel = match s {
        0 => Rel::Eq,
        1 => Rel::Gt,
        _ => Rel::Lt,
    };
    Formula::atom(p.clone(), rel)
}

/// Equational conditions of the running estimate (cone variables pinned to
/// rational multiples of other variables) applied inside the quantified
/// condition; this is the learned-conditions feedback that shrinks the
/// elimination problem cell over cell.
fn apply_learned(cond: &Formula, estimate: &Formula, cone_vars: &[Var]) -> Formula {
    let conj: Vec<&Formula> = match estimate {
        Formula::And(cs) => cs.iter().collect(),
        other => vec![other],
    };
    let mut bindings: Vec<(Var, Poly)> = Vec::new();
    for c in conj {
        let Formula::Atom(p, Rel::Eq) = c else { continue };
        for v in cone_vars {
            if bindings.iter().any(|(w, _)| w == v) {
                continue;
            }
            if p.degree(v) != 1 {
                continue;
            }
            let coeffs = p.coeffs_in(v);
            let Some(k) = coeffs[1].as_constant() else { continue };
            if k.is_zero() {
                continue;
            }
            let rhs = coeffs[0].scale(&(-Rat::from(num_bigint::BigInt::from(1)) / k));
            bindings.push((v.clone(), rhs));
            break;
        }
    }
    if bindings.is_empty() {
        return cond.clone();
    }
    cond.substitute_equational(&bindings).unwrap_or_else(|_| cond.clone())
}

/// Does the closure of the region contain the (fixed) base point? Cells
/// whose closure misses the base point have no probe points arbitrarily
/// close to it, so they contribute the whole space and can be skipped.
fn base_in_closure(
    q: &ConeQuery,
    cell_formula: &Formula,
    cfg: &QeConfig,
) -> Result<bool, QeError> {
    let region = q.region(cell_formula);
    for branch in super::dnf(&region.simplify()) {
        let prep = super::prepare_condition(q, &branch);
        let mut taken: Vec<String> =
            q.probe_vars.iter().map(|v| v.name().to_string()).collect();
        let t = super::fresh_var("t", &mut taken);
        let mut conj = prep.hyp.clone();
        conj.extend(prep.ball(&t));
        let near = Formula::quant(QuantKind::Exists, prep.probe.clone(), Formula::and(conj));
        let sentence = Formula::quant(
            QuantKind::Forall,
            vec![t.clone()],
            Formula::implies(Formula::atom(Poly::var(&t), Rel::Gt), near),
        );
        if crate::qe::decide_sentence(&sentence, cfg)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn intersect_step(
    q: &ConeQuery,
    estimate: &Formula,
    cell_formula: &Formula,
    qe_cfg: &QeConfig,
) -> Result<Formula, QeError> {
    let cond = cell_cone_condition(q, cell_formula);
    let cond = apply_learned(&cond, estimate, &q.cone_vars);
    let input = Formula::and(vec![estimate.clone(), cond]);
    Ok(eliminate(&input, &q.cone_vars, qe_cfg)?.simplify())
}

/// Algorithm that processes every cell unconditionally.
pub fn normal_cone_cad(
    set: &SemialgebraicSet,
    base: &[Rat],
    cfg: &ConeConfig,
) -> Result<ConeResult, ConeError> {
    let q = ConeQuery::new(set.clone(), BasePoint::Fixed(base.to_vec()))?;
    q.check_base_membership()?;
    let cells = c_cells(set, &cfg.qe_cad())?;
    let mut estimate = Formula::True;
    let mut provenance = Vec::new();
    for cell in &cells {
        let start = Instant::now();
        if !base_in_closure(&q, &cell.formula, &cfg.qe)? {
            provenance.push(ProvenanceStep {
                cell: cell.label(),
                action: CellAction::SkippedFar,
                estimate_after: estimate.clone(),
                millis: start.elapsed().as_millis(),
            });
            continue;
        }
        match intersect_step(&q, &estimate, &cell.formula, &cfg.qe) {
            Ok(next) => {
                estimate = next;
                provenance.push(ProvenanceStep {
                    cell: cell.label(),
                    action: CellAction::Computed,
                    estimate_after: estimate.clone(),
                    millis: start.elapsed().as_millis(),
                });
            }
            Err(QeError::Cad(CadError::Timeout)) => {
                provenance.push(ProvenanceStep {
                    cell: cell.label(),
                    action: CellAction::Unresolved,
                    estimate_after: estimate.clone(),
                    millis: start.elapsed().as_millis(),
                });
                return Ok(result(&q, estimate, "cad", false, provenance));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(result(&q, estimate, "cad", true, provenance))
}

fn result(
    q: &ConeQuery,
    formula: Formula,
    algorithm: &str,
    final_result: bool,
    provenance: Vec<ProvenanceStep>,
) -> ConeResult {
    ConeResult {
        formula,
        algorithm: algorithm.into(),
        cone_vars: q.cone_vars.clone(),
        base_vars: q.base_vars(),
        final_result,
        provenance,
    }
}

impl ConeConfig {
    fn qe_cad(&self) -> CadConfig {
        CadConfig {
            deadline: self.qe.time_limit.map(|l| Instant::now() + l),
            projection: self.qe.projection,
        }
    }

    fn per_cell_qe(&self) -> QeConfig {
        QeConfig { time_limit: self.per_cell_limit.or(self.qe.time_limit), ..self.qe }
    }
}

/// Can the estimate shrink on this cell? Satisfiability of the purely
/// existential refinement condition: some v in the current estimate, some
/// probe point of the cell arbitrarily near the base point, violating the
/// normal-cone conclusion. Unsat certifies the cell cannot contribute.
pub fn refinement_possible(
    estimate: &Formula,
    cell: &SemialgebraicSet,
    base: &[Rat],
    cfg: &QeConfig,
) -> Result<SatResult, ConeError> {
    let q = ConeQuery::new(cell.clone(), BasePoint::Fixed(base.to_vec()))?;
    Ok(refinement_query(&q, estimate, &cell.defining, cfg))
}

fn refinement_query(
    q: &ConeQuery,
    estimate: &Formula,
    cell_formula: &Formula,
    cfg: &QeConfig,
) -> SatResult {
    let region = q.region(cell_formula);
    let mut unknown = None;
    for branch in super::dnf(&region.simplify()) {
        let prep = super::prepare_condition(q, &branch);
        let mut conj = vec![
            estimate.clone(),
            Formula::atom(Poly::var(&q.epsilon), Rel::Gt),
            Formula::atom(Poly::var(&q.delta), Rel::Gt),
            prep.nonzero(),
        ];
        conj.extend(prep.ball(&q.delta));
        // negation of the membership conclusion
        conj.extend(prep.conclusion_negated(&q.epsilon));
        conj.extend(prep.hyp.iter().cloned());
        match check_sat(&Formula::and(conj), cfg) {
            SatResult::Sat(m) => return SatResult::Sat(m),
            SatResult::Unknown(r) => unknown = Some(r),
            SatResult::Unsat => {}
        }
    }
    match unknown {
        Some(r) => SatResult::Unknown(r),
        None => SatResult::Unsat,
    }
}

/// Boundary pieces of a cell: each strict sign condition tightened to an
/// equation in turn, restricted back to C. Pieces that are provably empty
/// are discarded.
pub(crate) fn cell_boundary_pieces(
    set: &SemialgebraicSet,
    cell_formula: &Formula,
    cfg: &QeConfig,
) -> Vec<Formula> {
    let conj: Vec<Formula> = match cell_formula {
        Formula::And(cs) => cs.clone(),
        other => vec![other.clone()],
    };
    let mut pieces = Vec::new();
    for i in 0..conj.len() {
        let Formula::Atom(p, rel) = &conj[i] else { continue };
        if !matches!(rel, Rel::Lt | Rel::Gt) {
            continue;
        }
        let mut piece = conj.clone();
        piece[i] = Formula::atom(p.clone(), Rel::Eq);
        let restricted =
            Formula::and(vec![Formula::and(piece), set.defining.clone()]).simplify();
        if restricted == Formula::False {
            continue;
        }
        match check_sat(&restricted, cfg) {
            SatResult::Unsat => continue,
            _ => pieces.push(restricted),
        }
    }
    pieces
}

/// SMT-assisted algorithm: the refinement test guards every cell after the
/// first, slow cells are deferred and retried cheapest-first, and a deferred
/// cell is attacked through its boundary pieces before its interior.
pub fn normal_cone_cad_smt(
    set: &SemialgebraicSet,
    base: &[Rat],
    cfg: &ConeConfig,
) -> Result<ConeResult, ConeError> {
    let q = ConeQuery::new(set.clone(), BasePoint::Fixed(base.to_vec()))?;
    q.check_base_membership()?;
    let cells = c_cells(set, &cfg.qe_cad())?;
    let mut estimate = Formula::True;
    let mut provenance = Vec::new();
    let mut deferred: Vec<(usize, u128)> = Vec::new();
    let per_cell = cfg.per_cell_qe();

    for (i, cell) in cells.iter().enumerate() {
        let start = Instant::now();
        if !base_in_closure(&q, &cell.formula, &cfg.qe)? {
            provenance.push(ProvenanceStep {
                cell: cell.label(),
                action: CellAction::SkippedFar,
                estimate_after: estimate.clone(),
                millis: start.elapsed().as_millis(),
            });
            continue;
        }
        if i > 0 {
            match refinement_query(&q, &estimate, &cell.formula, &cfg.qe) {
                SatResult::Unsat => {
                    provenance.push(ProvenanceStep {
                        cell: cell.label(),
                        action: CellAction::SkippedUnsat,
                        estimate_after: estimate.clone(),
                        millis: start.elapsed().as_millis(),
                    });
                    continue;
                }
                SatResult::Sat(_) | SatResult::Unknown(_) => {}
            }
        }
        match intersect_step(&q, &estimate, &cell.formula, &per_cell) {
            Ok(next) => {
                estimate = next;
                provenance.push(ProvenanceStep {
                    cell: cell.label(),
                    action: CellAction::Computed,
                    estimate_after: estimate.clone(),
                    millis: start.elapsed().as_millis(),
                });
            }
            Err(QeError::Cad(CadError::Timeout)) => {
                let ms = start.elapsed().as_millis();
                deferred.push((i, ms));
                provenance.push(ProvenanceStep {
                    cell: cell.label(),
                    action: CellAction::Deferred,
                    estimate_after: estimate.clone(),
                    millis: ms,
                });
            }
            Err(e) => return Err(e.into()),
        }
    }

    // retry deferred cells cheapest-first once the quick cells have
    // contributed their restrictions
    deferred.sort_by(|a, b| {
        (a.1, &cells[a.0].index_path).cmp(&(b.1, &cells[b.0].index_path))
    });
    let mut unresolved = Vec::new();
    for (idx, _) in deferred {
        let cell = &cells[idx];
        let start = Instant::now();
        if matches!(
            refinement_query(&q, &estimate, &cell.formula, &cfg.qe),
            SatResult::Unsat
        ) {
            provenance.push(ProvenanceStep {
                cell: cell.label(),
                action: CellAction::SkippedUnsat,
                estimate_after: estimate.clone(),
                millis: start.elapsed().as_millis(),
            });
            continue;
        }
        // boundary-first: shrink the estimate along the cell's boundary
        // pieces, then re-test whether the interior still matters
        let mut progressed = false;
        for piece in cell_boundary_pieces(set, &cell.formula, &cfg.qe) {
            if matches!(
                refinement_query(&q, &estimate, &piece, &cfg.qe),
                SatResult::Unsat
            ) {
                continue;
            }
            if let Ok(next) = intersect_step(&q, &estimate, &piece, &per_cell) {
                estimate = next;
                progressed = true;
            }
        }
        if progressed {
            provenance.push(ProvenanceStep {
                cell: cell.label(),
                action: CellAction::BoundaryFirst,
                estimate_after: estimate.clone(),
                millis: start.elapsed().as_millis(),
            });
            if matches!(
                refinement_query(&q, &estimate, &cell.formula, &cfg.qe),
                SatResult::Unsat
            ) {
                continue;
            }
        }
        match intersect_step(&q, &estimate, &cell.formula, &per_cell) {
            Ok(next) => {
                estimate = next;
                provenance.push(ProvenanceStep {
                    cell: cell.label(),
                    action: CellAction::Computed,
                    estimate_after: estimate.clone(),
                    millis: start.elapsed().as_millis(),
                });
            }
            Err(QeError::Cad(CadError::Timeout)) => {
                unresolved.push(cell.label());
                provenance.push(ProvenanceStep {
                    cell: cell.label(),
                    action: CellAction::Unresolved,
                    estimate_after: estimate.clone(),
                    millis: start.elapsed().as_millis(),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    let final_result = unresolved.is_empty();
    Ok(result(&q, estimate, "cad-smt", final_result, provenance))
}
