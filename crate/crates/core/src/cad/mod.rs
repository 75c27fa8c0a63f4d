//! Cylindrical algebraic decomposition: projection bases, stack
//! construction over sample points, and full sign-invariant decompositions
//! of real space with respect to a set of polynomials.

mod projection;

pub use projection::{project, projection_basis, Projection};

use crate::poly::{real_roots_at, sign_at, AlgebraicNumber, Poly, Rat, RootsAt, SamplePoint, Var};
use num_bigint::BigInt;
use num_traits::One;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum CadError {
    #[error("time limit exceeded")]
    Timeout,
    #[error("projection basis is not well-oriented (nullification over a positive-dimensional cell)")]
    NotWellOriented,
    #[error("polynomial {0} uses a variable outside the declared order")]
    UnorderedVariable(String),
    #[error(transparent)]
    Poly(crate::poly::PolyError),
}

impl From<crate::poly::PolyError> for CadError {
    fn from(e: crate::poly::PolyError) -> CadError {
        match e {
            crate::poly::PolyError::Budget => CadError::Timeout,
            other => CadError::Poly(other),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CadConfig {
    pub deadline: Option<Instant>,
    /// None = default operator with fallback on failure.
    pub projection: Option<Projection>,
}

impl CadConfig {
    pub fn check_deadline(&self) -> Result<(), CadError> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(CadError::Timeout),
            _ => Ok(()),
        }
    }
}

/// One coordinate of a stack over a base cell: either a root of a basis
/// polynomial (section) or a rational point strictly between roots (sector).
#[derive(Clone, Debug)]
pub struct StackSample {
    pub value: AlgebraicNumber,
    pub is_section: bool,
}

/// The stack of the level polynomials over a sample point: 2r+1 samples for
/// r distinct real roots, alternating sector/section/sector, in ascending
/// order. `base_dim` is the dimension of the base cell; with the default
/// projection a polynomial that vanishes identically over a
/// positive-dimensional base is a well-orientedness failure.
pub fn stack_over(
    polys: &[Poly],
    var: &Var,
    point: &SamplePoint,
    base_dim: usize,
    kind: Projection,
    cfg: &CadConfig,
) -> Result<Vec<StackSample>, CadError> {
    cfg.check_deadline()?;
    let mut roots: Vec<AlgebraicNumber> = Vec::new();
    for p in polys {
        if p.degree(var) == 0 {
            continue;
        }
        match real_roots_at(p, var, &point.coords)? {
            RootsAt::IdenticallyZero => {
                if base_dim > 0 && kind == Projection::McCallum {
                    return Err(CadError::NotWellOriented);
                }
            }
            RootsAt::Roots(rs) => {
                for r in rs {
                    if !roots.iter().any(|e| e.equal(&r)) {
                        roots.push(r);
                    }
                }
            }
        }
        cfg.check_deadline()?;
    }
    roots.sort_by(|a, b| a.cmp_alg(b));
    Ok(interleave_sectors(roots))
}

fn interleave_sectors(roots: Vec<AlgebraicNumber>) -> Vec<StackSample> {
    if roots.is_empty() {
        return vec![StackSample { value: AlgebraicNumber::from_int(0), is_section: false }];
    }
    let mut out = Vec::with_capacity(2 * roots.len() + 1);
    out.push(StackSample { value: AlgebraicNumber::from_rat(below(&roots[0])), is_section: false });
    for i in 0..roots.len() {
        out.push(StackSample { value: roots[i].clone(), is_section: true });
        if i + 1 < roots.len() {
            let mid = rational_between(&roots[i], &roots[i + 1]);
            out.push(StackSample { value: AlgebraicNumber::from_rat(mid), is_section: false });
        }
    }
    let last = roots.last().unwrap();
    out.push(StackSample { value: AlgebraicNumber::from_rat(above(last)), is_section: false });
    out
}

fn below(a: &AlgebraicNumber) -> Rat {
    match a.as_rat() {
        Some(r) => r - Rat::one(),
        None => a.interval().lo - Rat::one(),
    }
}

fn above(a: &AlgebraicNumber) -> Rat {
    match a.as_rat() {
        Some(r) => r + Rat::one(),
        None => a.interval().hi.clone() + Rat::one(),
    }
}

/// A rational strictly between two distinct algebraic numbers a < b.
pub fn rational_between(a: &AlgebraicNumber, b: &AlgebraicNumber) -> Rat {
    let mut a = a.clone();
    let mut b = b.clone();
    loop {
        let ahi = match a.as_rat() {
            Some(r) => r.clone(),
            None => a.interval().hi,
        };
        let blo = match b.as_rat() {
            Some(r) => r.clone(),
            None => b.interval().lo,
        };
        if ahi < blo {
            return (ahi + blo) / Rat::from(BigInt::from(2));
        }
        a.refine();
        b.refine();
    }
}

/// One cell of a full decomposition, identified by its stack index path
/// (even index = sector, odd = section).
#[derive(Clone, Debug)]
pub struct Cell {
    pub index_path: Vec<usize>,
    pub sample: SamplePoint,
    /// Number of sector coordinates.
    pub dimension: usize,
    /// Signs of every basis polynomial of each lifted level at the sample.
    pub signs: Vec<(Poly, i8)>,
}

/// A sign-invariant decomposition of R^n for the projection basis of the
/// input polynomials; `leaves` are the full-dimension-index cells in
/// depth-first (ascending stack) order.
#[derive(Debug)]
pub struct CadTree {
    pub order: Vec<Var>,
    pub basis: Vec<Vec<Poly>>,
    pub kind: Projection,
    pub leaves: Vec<Cell>,
}

/// Decomposes R^|order| so that every input polynomial is sign-invariant on
/// each leaf cell. Starts with the default projection and falls back to the
/// subresultant operator if the basis turns out not to be well-oriented.
pub fn decompose(polys: &[Poly], order: &[Var], cfg: &CadConfig) -> Result<CadTree, CadError> {
    let _budget = crate::poly::budget::guard(cfg.deadline);
    let kinds: &[Projection] = match cfg.projection {
        Some(Projection::McCallum) => &[Projection::McCallum],
        Some(Projection::Collins) => &[Projection::Collins],
        None => &[Projection::McCallum, Projection::Collins],
    };
    let mut last_err = None;
    for &kind in kinds {
        match try_decompose(polys, order, kind, cfg) {
            Ok(tree) => return Ok(tree),
            Err(CadError::NotWellOriented) => last_err = Some(CadError::NotWellOriented),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

fn try_decompose(
    polys: &[Poly],
    order: &[Var],
    kind: Projection,
    cfg: &CadConfig,
) -> Result<CadTree, CadError> {
    let basis = projection_basis(polys, order, kind, cfg)?;
    let mut leaves = Vec::new();
    lift_all(
        &basis,
        order,
        kind,
        cfg,
        &SamplePoint::new(),
        &mut Vec::new(),
        0,
        &mut leaves,
    )?;
    Ok(CadTree { order: order.to_vec(), basis, kind, leaves })
}

#[allow(clippy::too_many_arguments)]
fn lift_all(
    basis: &[Vec<Poly>],
    order: &[Var],
    kind: Projection,
    cfg: &CadConfig,
    point: &SamplePoint,
    path: &mut Vec<usize>,
    dim: usize,
    leaves: &mut Vec<Cell>,
) -> Result<(), CadError> {
    let level = point.len();
    if level == order.len() {
        leaves.push(Cell {
            index_path: path.clone(),
            sample: point.clone(),
            dimension: dim,
            signs: cell_signs(basis, point)?,
        });
        return Ok(());
    }
    let var = &order[level];
    let stack = stack_over(&basis[level], var, point, dim, kind, cfg)?;
    for (i, s) in stack.iter().enumerate() {
        path.push(i);
        let ext = point.extended(var.clone(), s.value.clone());
        let d = if s.is_section { dim } else { dim + 1 };
        lift_all(basis, order, kind, cfg, &ext, path, d, leaves)?;
        path.pop();
    }
    Ok(())
}

fn cell_signs(basis: &[Vec<Poly>], point: &SamplePoint) -> Result<Vec<(Poly, i8)>, CadError> {
    let mut out = Vec::new();
    for bucket in basis.iter().take(point.len()) {
        for p in bucket {
            out.push((p.clone(), sign_at(p, &point.coords)?));
        }
    }
    Ok(out)
}

impl CadTree {
    /// Stack index path of the unique leaf cell containing a rational point.
    pub fn locate(&self, point: &[(Var, Rat)]) -> Result<Vec<usize>, CadError> {
        let mut path = Vec::new();
        let mut prefix = SamplePoint::new();
        let cfg = CadConfig::default();
        for (level, var) in self.order.iter().enumerate() {
            let x = point
                .iter()
                .find(|(v, _)| v == var)
                .map(|(_, r)| r.clone())
                .ok_or_else(|| CadError::UnorderedVariable(var.name().to_string()))?;
            let stack = stack_over(&self.basis[level], var, &prefix, 0, self.kind, &cfg)?;
            let xa = AlgebraicNumber::from_rat(x.clone());
            let mut idx = stack.len() - 1; // above the last section if no match below
            let mut sections_seen = 0;
            for s in &stack {
                if s.is_section {
                    match xa.cmp_alg(&s.value) {
                        std::cmp::Ordering::Less => {
                            idx = 2 * sections_seen;
                            break;
                        }
                        std::cmp::Ordering::Equal => {
                            idx = 2 * sections_seen + 1;
                            break;
                        }
                        std::cmp::Ordering::Greater => sections_seen += 1,
                    }
                }
            }
            path.push(idx);
            prefix = prefix.extended(var.clone(), xa);
        }
        Ok(path)
    }

    pub fn leaf(&self, path: &[usize]) -> Option<&Cell> {
        self.leaves.iter().find(|c| c.index_path == path)
    }

    /// Compact JSON description for debugging.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order.iter().map(|v| v.name().to_string()).collect::<Vec<_>>(),
            "basis": self.basis.iter().map(|b| {
                b.iter().map(|p| p.to_string()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "cells": self.leaves.iter().map(|c| serde_json::json!({
                "index_path": c.index_path,
                "dimension": c.dimension,
                "sample": c.sample.coords.iter().map(|(v, a)| {
                    serde_json::json!({
                        "var": v.name(),
                        "approx": format!("{}", a.approx(20)),
                        "rational": a.as_rat().map(|r| r.to_string()),
                    })
                }).collect::<Vec<_>>(),
                "signs": c.signs.iter().map(|(p, s)| {
                    serde_json::json!([p.to_string(), s])
                }).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn circle() -> Poly {
        // x^2 + y^2 - 1
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        x.mul(&x).add(&y.mul(&y)).sub(&Poly::one())
    }

    #[test]
    fn unit_circle_decomposition_has_thirteen_cells() {
        let order = [v("x"), v("y")];
        let tree = decompose(&[circle()], &order, &CadConfig::default()).unwrap();
        assert_eq!(tree.leaves.len(), 13);
        let full_dim = tree.leaves.iter().filter(|c| c.dimension == 2).count();
        let one_dim = tree.leaves.iter().filter(|c| c.dimension == 1).count();
        let zero_dim = tree.leaves.iter().filter(|c| c.dimension == 0).count();
        assert_eq!(full_dim, 5); // inside, left/right of the circle, and two outer bands
        assert_eq!(one_dim, 6); // upper/lower arcs and the four vertical sectors over x = +-1
        assert_eq!(zero_dim, 2); // (-1, 0) and (1, 0)
    }

    #[test]
    fn circle_cells_are_sign_invariant_on_grid() {
        let order = [v("x"), v("y")];
        let c = circle();
        let tree = decompose(&[c.clone()], &order, &CadConfig::default()).unwrap();
        for xi in -6i64..=6 {
            for yi in -6i64..=6 {
                let pt = vec![(v("x"), rat(xi, 3)), (v("y"), rat(yi, 3))];
                let path = tree.locate(&pt).unwrap();
                let cell = tree.leaf(&path).unwrap_or_else(|| {
                    panic!("no leaf for path {path:?} at ({xi}/3, {yi}/3)")
                });
                let val = c.eval(&pt).unwrap();
                let expect = if val == rat_int(0) {
                    0
                } else if val > rat_int(0) {
                    1
                } else {
                    -1
                };
                let got = cell.signs.iter().find(|(p, _)| *p == c.normalized()).unwrap().1;
                assert_eq!(got, expect, "sign mismatch at ({xi}/3, {yi}/3)");
            }
        }
    }

    #[test]
    fn collins_projection_also_covers_circle() {
        let order = [v("x"), v("y")];
        let cfg = CadConfig { projection: Some(Projection::Collins), ..Default::default() };
        let tree = decompose(&[circle()], &order, &cfg).unwrap();
        // possibly more cells than the default operator, never fewer
        assert!(tree.leaves.len() >= 13);
        let pt = vec![(v("x"), rat_int(0)), (v("y"), rat_int(0))];
        let path = tree.locate(&pt).unwrap();
        assert!(tree.leaf(&path).is_some());
    }

    #[test]
    fn rational_between_separates_algebraic_numbers() {
        let p = crate::poly::UniPoly::new(vec![rat_int(-2), rat_int(0), rat_int(1)]);
        let roots = AlgebraicNumber::roots_of(&p).unwrap(); // -sqrt2, sqrt2
        let m = rational_between(&roots[0], &roots[1]);
        assert!(AlgebraicNumber::from_rat(m.clone()).cmp_alg(&roots[0]) == std::cmp::Ordering::Greater);
        assert!(AlgebraicNumber::from_rat(m).cmp_alg(&roots[1]) == std::cmp::Ordering::Less);
    }

    #[test]
    fn parabola_line_pair_decomposes() {
        // y - x^2 and y: intersection at origin only
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let p1 = y.sub(&x.mul(&x));
        let p2 = y.clone();
        let order = [v("x"), v("y")];
        let tree = decompose(&[p1.clone(), p2.clone()], &order, &CadConfig::default()).unwrap();
        // resultant(y - x^2, y) = x^2, so the base has a section at x = 0
        assert!(tree.basis[0].iter().any(|p| *p == Poly::var(&v("x"))));
        for cell in &tree.leaves {
            // all basis polynomials got a definite sign
            for (_, s) in &cell.signs {
                assert!((-1..=1).contains(s));
            }
        }
        // point on the parabola away from origin
        let pt = vec![(v("x"), rat_int(2)), (v("y"), rat_int(4))];
        let path = tree.locate(&pt).unwrap();
        let cell = tree.leaf(&path).unwrap();
        assert_eq!(cell.signs.iter().find(|(p, _)| *p == p1.normalized()).unwrap().1, 0);
        assert_eq!(cell.signs.iter().find(|(p, _)| *p == p2.normalized()).unwrap().1, 1);
    }

    #[test]
    fn json_dump_lists_every_leaf() {
        let order = [v("x"), v("y")];
        let tree = decompose(&[circle()], &order, &CadConfig::default()).unwrap();
        let j = tree.to_json();
        assert_eq!(j["cells"].as_array().unwrap().len(), 13);
        assert_eq!(j["order"][0], "x");
    }

    #[test]
    fn deadline_is_enforced() {
        let order = [v("x"), v("y")];
        let cfg = CadConfig {
            deadline: Some(Instant::now() - std::time::Duration::from_secs(1)),
            projection: None,
        };
        match decompose(&[circle()], &order, &cfg) {
            Err(CadError::Timeout) => {}
            other => panic!("expected timeout, got {other:?}"),
        }
    }
}
