//! Prenex normal form: negation normal form, alpha-renaming to make every
//! bound variable unique, then quantifier extraction with adjacent blocks of
//! the same kind merged.

use super::{Formula, QuantKind};
use crate::poly::{Poly, Var};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantBlock {
    pub kind: QuantKind,
    pub vars: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrenexFormula {
    /// Outermost block first.
    pub blocks: Vec<QuantBlock>,
    pub matrix: Formula,
}

impl PrenexFormula {
    pub fn to_formula(&self) -> Formula {
        let mut f = self.matrix.clone();
        for b in self.blocks.iter().rev() {
            f = Formula::quant(b.kind, b.vars.clone(), f);
        }
        f
    }

    /// Quantified variables, outermost first.
    pub fn bound_vars(&self) -> Vec<Var> {
        self.blocks.iter().flat_map(|b| b.vars.iter().cloned()).collect()
    }
}

/// Renames free occurrences of `from`, respecting shadowing.
fn rename_free(f: &Formula, from: &Var, to: &Var) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom(p, r) => Formula::atom(p.substitute_poly(from, &Poly::var(to)), *r),
        Formula::And(cs) => {
            Formula::And(cs.iter().map(|c| rename_free(c, from, to)).collect())
        }
        Formula::Or(cs) => Formula::Or(cs.iter().map(|c| rename_free(c, from, to)).collect()),
        Formula::Not(c) => Formula::Not(Box::new(rename_free(c, from, to))),
        Formula::Quant(k, vs, body) => {
            if vs.contains(from) {
                f.clone()
            } else {
                Formula::Quant(*k, vs.clone(), Box::new(rename_free(body, from, to)))
            }
        }
    }
}

fn fresh(base: &str, used: &mut BTreeSet<String>) -> Var {
    if used.insert(base.to_string()) {
        return Var::new(base);
    }
    for i in 1.. {
        let cand = format!("{base}_{i}");
        if used.insert(cand.clone()) {
            return Var::new(&cand);
        }
    }
    unreachable!()
}

fn pull(f: &Formula, used: &mut BTreeSet<String>) -> (Vec<(QuantKind, Var)>, Formula) {
    match f {
        Formula::True | Formula::False | Formula::Atom(..) => (Vec::new(), f.clone()),
        Formula::Not(c) => {
            // After NNF the only negations left sit on atoms.
            debug_assert!(matches!(**c, Formula::Atom(..)));
            (Vec::new(), f.clone())
        }
        Formula::And(cs) | Formula::Or(cs) => {
            let mut prefix = Vec::new();
            let mut matrices = Vec::new();
            for c in cs {
                let (p, m) = pull(c, used);
                prefix.extend(p);
                matrices.push(m);
            }
            let matrix = match f {
                Formula::And(_) => Formula::and(matrices),
                _ => Formula::or(matrices),
            };
            (prefix, matrix)
        }
        Formula::Quant(k, vs, body) => {
            let mut body = (**body).clone();
            let mut renamed = Vec::new();
            for v in vs {
                let nv = fresh(v.name(), used);
                if &nv != v {
                    body = rename_free(&body, v, &nv);
                }
                renamed.push((*k, nv));
            }
            let (inner, matrix) = pull(&body, used);
            renamed.extend(inner);
            (renamed, matrix)
        }
    }
}

pub fn to_prenex(f: &Formula) -> PrenexFormula {
    let nnf = f.nnf();
    let mut used: BTreeSet<String> =
        nnf.free_vars().iter().map(|v| v.name().to_string()).collect();
    let (prefix, matrix) = pull(&nnf, &mut used);
    let mut blocks: Vec<QuantBlock> = Vec::new();
    for (kind, var) in prefix {
        match blocks.last_mut() {
            Some(b) if b.kind == kind => b.vars.push(var),
            _ => blocks.push(QuantBlock { kind, vars: vec![var] }),
        }
    }
    PrenexFormula { blocks, matrix }
}
