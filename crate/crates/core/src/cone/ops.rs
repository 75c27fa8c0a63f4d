//! Tangent cones, polar sets, regular co-derivatives, and the set-level
//! helpers (projection, inclusion, equality) built on quantifier
//! elimination.

use super::{
    fresh_var, normal_cone_cad_smt, BasePoint, CellAction, ConeConfig, ConeError, ConeQuery,
    ConeResult, ProvenanceStep,
};
use crate::formula::{Formula, QuantKind, Rel, SemialgebraicSet};
use crate::poly::{Poly, Rat, Var};
use crate::qe::{decide_sentence, eliminate, QeConfig};

/// Tangent cone of C at a fixed base point:
/// w is tangent when for every eps > 0 there are x in C and 0 < t < eps with
/// ||x - xb - t w||^2 < eps^2 t^2.
pub fn tangent_cone(
    set: &SemialgebraicSet,
    base: &[Rat],
    cfg: &QeConfig,
) -> Result<ConeResult, ConeError> {
    let q = ConeQuery::new(set.clone(), BasePoint::Fixed(base.to_vec()))?;
    q.check_base_membership()?;
    let mut taken: Vec<String> = set
        .ambient_vars
        .iter()
        .map(|v| v.name().to_string())
        .chain(q.probe_vars.iter().map(|v| v.name().to_string()))
        .collect();
    taken.push(q.epsilon.name().to_string());
    let dir_vars: Vec<Var> =
        (1..=set.dim()).map(|i| fresh_var(&format!("w{i}"), &mut taken)).collect();
    let t = fresh_var("t", &mut taken);

    let approach = (0..set.dim()).fold(Poly::zero(), |acc, i| {
        let d = Poly::var(&q.probe_vars[i])
            .sub(&q.base_poly(i))
            .sub(&Poly::var(&t).mul(&Poly::var(&dir_vars[i])));
        acc.add(&d.mul(&d))
    });
    let et = Poly::var(&q.epsilon).mul(&Poly::var(&t));
    let body = Formula::and(vec![
        q.region(&set.defining),
        Formula::atom(Poly::var(&t), Rel::Gt),
        Formula::atom(Poly::var(&q.epsilon).sub(&Poly::var(&t)), Rel::Gt),
        Formula::atom(approach.sub(&et.mul(&et)), Rel::Lt),
    ]);
    let mut inner_vars = q.probe_vars.clone();
    inner_vars.push(t);
    let cond = Formula::quant(
        QuantKind::Forall,
        vec![q.epsilon.clone()],
        Formula::implies(
            Formula::atom(Poly::var(&q.epsilon), Rel::Gt),
            Formula::quant(QuantKind::Exists, inner_vars, body),
        ),
    );
    let formula = eliminate(&cond, &dir_vars, cfg)?.simplify();
    Ok(ConeResult {
        formula,
        algorithm: "tangent".into(),
        cone_vars: dir_vars,
        base_vars: Vec::new(),
        final_result: true,
        provenance: vec![ProvenanceStep {
            cell: "whole-set".into(),
            action: CellAction::Computed,
            estimate_after: Formula::True,
            millis: 0,
        }],
    })
}

/// Polar of a set of directions A (given over its ambient variables):
/// the v with <v, x> <= 0 for every x in A. The answer is a quantifier-free
/// formula over fresh variables v1..vn.
pub fn polar(set: &SemialgebraicSet, cfg: &QeConfig) -> Result<ConeResult, ConeError> {
    let mut taken: Vec<String> =
        set.ambient_vars.iter().map(|v| v.name().to_string()).collect();
    let cone_vars: Vec<Var> =
        (1..=set.dim()).map(|i| fresh_var(&format!("v{i}"), &mut taken)).collect();
    let ip = set
        .ambient_vars
        .iter()
        .zip(&cone_vars)
        .fold(Poly::zero(), |acc, (x, v)| acc.add(&Poly::var(x).mul(&Poly::var(v))));
    let cond = Formula::quant(
        QuantKind::Forall,
        set.ambient_vars.clone(),
        Formula::implies(set.defining.clone(), Formula::atom(ip, Rel::Le)),
    );
    let formula = eliminate(&cond, &cone_vars, cfg)?.simplify();
    Ok(ConeResult {
        formula,
        algorithm: "polar".into(),
        cone_vars,
        base_vars: Vec::new(),
        final_result: true,
        provenance: Vec::new(),
    })
}

/// Regular co-derivative of a set-valued map given by its graph
/// gph F in R^n x R^m: D*F(xb | yb)(v*) is the set of u* with
/// (u*, -v*) in the normal cone of the graph at (xb, yb).
///
/// The returned formula is over the first `split` cone variables (u*) and,
/// when `vstar` is None, over fresh variables vs1..vsm for v*.
pub fn coderivative(
    graph: &SemialgebraicSet,
    point: &[Rat],
    split: usize,
    vstar: Option<&[Rat]>,
    cfg: &ConeConfig,
) -> Result<ConeResult, ConeError> {
    let n = graph.dim();
    if split > n {
        return Err(ConeError::DimensionMismatch { got: split, want: n });
    }
    let m = n - split;
    if let Some(vs) = vstar {
        if vs.len() != m {
            return Err(ConeError::DimensionMismatch { got: vs.len(), want: m });
        }
    }
    let nc = normal_cone_cad_smt(graph, point, cfg)?;
    let mut taken: Vec<String> =
        nc.cone_vars.iter().map(|v| v.name().to_string()).collect();
    let vs_vars: Vec<Var> = if vstar.is_none() {
        (1..=m).map(|i| fresh_var(&format!("vs{i}"), &mut taken)).collect()
    } else {
        Vec::new()
    };
    // the second cone-variable block is pinned to -v*
    let bindings: Vec<(Var, Poly)> = nc.cone_vars[split..]
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let val = match vstar {
                Some(vs) => Poly::constant(vs[j].clone()),
                None => Poly::var(&vs_vars[j]),
            };
            (v.clone(), val.neg())
        })
        .collect();
    let formula = nc.formula.substitute_equational(&bindings)?.simplify();
    Ok(ConeResult {
        formula,
        algorithm: "coderivative".into(),
        cone_vars: nc.cone_vars[..split].to_vec(),
        base_vars: vs_vars,
        final_result: nc.final_result,
        provenance: nc.provenance,
    })
}

/// Image of S under the coordinate projection keeping `keep` (in order).
pub fn project_set(
    set: &SemialgebraicSet,
    keep: &[Var],
    cfg: &QeConfig,
) -> Result<SemialgebraicSet, ConeError> {
    let dropped: Vec<Var> =
        set.ambient_vars.iter().filter(|v| !keep.contains(v)).cloned().collect();
    let f = Formula::quant(QuantKind::Exists, dropped, set.defining.clone());
    let defining = eliminate(&f, keep, cfg)?.simplify();
    Ok(SemialgebraicSet::new(keep.to_vec(), defining))
}

/// A subset of B, decided over the union of their ambient variables.
pub fn set_subset(
    a: &SemialgebraicSet,
    b: &SemialgebraicSet,
    cfg: &QeConfig,
) -> Result<bool, ConeError> {
    let mut vars = a.ambient_vars.clone();
    for v in &b.ambient_vars {
        if !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    let f = Formula::quant(
        QuantKind::Forall,
        vars,
        Formula::implies(a.defining.clone(), b.defining.clone()),
    );
    Ok(decide_sentence(&f, cfg)?)
}

pub fn sets_equal(
    a: &SemialgebraicSet,
    b: &SemialgebraicSet,
    cfg: &QeConfig,
) -> Result<bool, ConeError> {
    Ok(set_subset(a, b, cfg)? && set_subset(b, a, cfg)?)
}
