//! Projection operators for cylindrical algebraic decomposition.
//!
//! The default operator keeps coefficients, discriminants, and pairwise
//! resultants. It can fail to be delineable when a polynomial vanishes
//! identically over a positive-dimensional cell; lifting detects that and
//! the caller retries with the larger subresultant-based operator, which
//! has no such restriction.

use super::CadError;
use crate::poly::{discriminant, gcd, psc_chain, resultant, squarefree_part, Poly, Var};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Projection {
    McCallum,
    Collins,
}

/// Canonical form used for basis membership: primitive squarefree with
/// positive leading coefficient, constants dropped.
fn push_normalized(out: &mut Vec<Poly>, p: Poly, main_var: Option<&Var>) {
    if p.is_constant() {
        return;
    }
    let sf = match main_var {
        Some(v) if p.degree(v) >= 2 => squarefree_part(&p, v),
        _ => p,
    };
    let n = sf.normalized();
    if !n.is_constant() && !out.contains(&n) {
        out.push(n);
    }
}

/// Polynomials in `var` and lower variables whose sign invariance suffices
/// for the delineability of the roots of `polys` over lower-level cells.
pub fn project(
    polys: &[Poly],
    var: &Var,
    kind: Projection,
    cfg: &super::CadConfig,
) -> Result<Vec<Poly>, CadError> {
    let mut out = Vec::new();
    let active: Vec<&Poly> = polys.iter().filter(|p| p.degree(var) >= 1).collect();
    match kind {
        Projection::McCallum => {
            for p in &active {
                cfg.check_deadline()?;
                for c in p.coeffs_in(var) {
                    push_normalized(&mut out, c, None);
                }
                if p.degree(var) >= 2 {
                    push_normalized(&mut out, discriminant(p, var)?, None);
                }
            }
            for (i, p) in active.iter().enumerate() {
                for q in &active[i + 1..] {
                    cfg.check_deadline()?;
                    push_normalized(&mut out, resultant(p, q, var)?, None);
                }
            }
        }
        Projection::Collins => {
            let reducta: Vec<Vec<Poly>> = active.iter().map(|p| reducta_of(p, var)).collect();
            for rs in &reducta {
                for r in rs {
                    cfg.check_deadline()?;
                    push_normalized(&mut out, r.leading_coeff(var), None);
                    if r.degree(var) >= 2 {
                        let d = r.derivative(var);
                        for s in psc_chain(r, &d, var)? {
                            push_normalized(&mut out, s, None);
                        }
                    }
                }
            }
            for (i, rs) in reducta.iter().enumerate() {
                for qs in &reducta[i + 1..] {
                    for r in rs {
                        for q in qs {
                            cfg.check_deadline()?;
                            if r.degree(var) >= 1 && q.degree(var) >= 1 {
                                for s in psc_chain(r, q, var)? {
                                    push_normalized(&mut out, s, None);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // projection factors only matter through their signs over lower space;
    // keep them squarefree in their own top variable when one exists
    Ok(out)
}

/// p and its successive reducta (leading term dropped) of positive degree.
fn reducta_of(p: &Poly, var: &Var) -> Vec<Poly> {
    let mut out = Vec::new();
    let mut coeffs = p.coeffs_in(var);
    loop {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.len() <= 1 {
            break;
        }
        out.push(Poly::from_coeffs(var, &coeffs));
        coeffs.pop();
    }
    out
}

/// Files a polynomial into its level bucket. The content in the top
/// variable is split off and filed recursively at its own level first:
/// a factor like x^2 * (1 - e^2) must keep 1 - e^2 visible at the e level,
/// or cells would not be sign-invariant where the content vanishes.
fn deposit(buckets: &mut [Vec<Poly>], order: &[Var], p: Poly) -> Result<(), CadError> {
    if p.is_constant() {
        return Ok(());
    }
    let Some(level) = p.level_in(order) else {
        return Err(CadError::UnorderedVariable(format!("{p}")));
    };
    if level == 0 {
        return Ok(());
    }
    // split off monomial factors: each bare variable is filed at its own
    // level and the cofactor keeps its (usually much lower) degree
    for (i, var) in p.vars().to_vec().iter().enumerate() {
        let min = p.terms().map(|(exps, _)| exps[i]).min().unwrap_or(0);
        if min > 0 {
            let mut q = p;
            for _ in 0..min {
                q = q.try_exact_div(&Poly::var(var)).expect("monomial factor divides");
            }
            let var_level = order.iter().position(|o| o == var).map(|k| k + 1);
            if let Some(lvl) = var_level {
                push_normalized(&mut buckets[lvl - 1], Poly::var(var), Some(var));
            }
            return deposit(buckets, order, q);
        }
    }
    let v = &order[level - 1];
    let coeffs = p.coeffs_in(v);
    let mut content = Poly::zero();
    for c in &coeffs {
        content = gcd(&content, c);
    }
    let mut prim = p.clone();
    if !content.is_constant() {
        if let Some(q) = p.try_exact_div(&content) {
            deposit(buckets, order, content)?;
            prim = q;
        }
    }
    push_normalized(&mut buckets[level - 1], prim, Some(v));
    Ok(())
}

/// Per-level buckets of the full projection basis. `buckets[k]` holds the
/// polynomials of level k+1 (top variable `order[k]`), canonical and
/// deduplicated; level-0 entries (constants in every variable) are dropped.
pub fn projection_basis(
    polys: &[Poly],
    order: &[Var],
    kind: Projection,
    cfg: &super::CadConfig,
) -> Result<Vec<Vec<Poly>>, CadError> {
    let n = order.len();
    let mut buckets: Vec<Vec<Poly>> = vec![Vec::new(); n];
    for p in polys {
        deposit(&mut buckets, order, p.clone())?;
    }
    for k in (1..n).rev() {
        let bucket = buckets[k].clone();
        for f in project(&bucket, &order[k], kind, cfg)? {
            deposit(&mut buckets, order, f)?;
        }
    }
    Ok(buckets)
}
