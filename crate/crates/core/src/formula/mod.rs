//! Tarski formulas: polynomial sign conditions under boolean connectives and
//! real quantifiers, with a text input language, prenex normal form,
//! simplification, equational substitution, and radical clearing for
//! extended-language input.

mod parse;
mod prenex;
mod print;
mod radicals;

pub use parse::{parse, parse_set, ParseError};
pub use prenex::{to_prenex, PrenexFormula, QuantBlock};
pub use radicals::{clear_radicals_ext, ExtExpr, RadicalError};

use crate::poly::{sign_at, AlgebraicNumber, Poly, Rat, Var};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

/// Relation of a normalized atom "p rel 0".
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn negated(self) -> Rel {
        match self {
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Gt => Rel::Le,
            Rel::Ge => Rel::Lt,
        }
    }

    /// Relation after multiplying the polynomial by -1.
    pub fn flipped(self) -> Rel {
        match self {
            Rel::Eq => Rel::Eq,
            Rel::Ne => Rel::Ne,
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Gt => Rel::Lt,
            Rel::Ge => Rel::Le,
        }
    }

    pub fn holds_for_sign(self, s: i8) -> bool {
        match self {
            Rel::Eq => s == 0,
            Rel::Ne => s != 0,
            Rel::Lt => s < 0,
            Rel::Le => s <= 0,
            Rel::Gt => s > 0,
            Rel::Ge => s >= 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rel::Eq => "==",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub enum QuantKind {
    Forall,
    Exists,
}

impl QuantKind {
    pub fn dual(self) -> QuantKind {
        match self {
            QuantKind::Forall => QuantKind::Exists,
            QuantKind::Exists => QuantKind::Forall,
        }
    }
}

/// A Tarski formula tree. Atoms are normalized to "p rel 0" with rational
/// content removed; for Eq/Ne the leading sign is canonicalized positive.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    True,
    False,
    Atom(Poly, Rel),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Quant(QuantKind, Vec<Var>, Box<Formula>),
}

#[derive(Debug, thiserror::Error)]
pub enum FormulaError {
    #[error("missing coordinate for free variable {0}")]
    MissingCoordinate(String),
    #[error("cannot bind quantified variable {0} in equational substitution")]
    BindsQuantified(String),
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
}

/// Splits p = c*v^2 + q*v + r (constant c, perfect-square discriminant)
/// into the two linear-in-v factors 2cv + q -+ s with s^2 = q^2 - 4cr.
/// The lost constant factor 1/(4c) does not matter for equations.
fn factor_quadratic(p: &Poly) -> Option<(Poly, Poly)> {
    for v in p.vars().to_vec() {
        if p.degree(&v) != 2 {
            continue;
        }
        let coeffs = p.coeffs_in(&v);
        let Some(c) = coeffs[2].as_constant() else { continue };
        let four_c = Rat::from(num_bigint::BigInt::from(4)) * &c;
        let disc = coeffs[1].mul(&coeffs[1]).sub(&coeffs[0].scale(&four_c));
        let Some(s) = disc.try_sqrt() else { continue };
        let base = Poly::var(&v)
            .scale(&(Rat::from(num_bigint::BigInt::from(2)) * &c))
            .add(&coeffs[1]);
        return Some((base.sub(&s), base.add(&s)));
    }
    None
}

impl Formula {
    /// Normalized atom constructor.
    pub fn atom(poly: Poly, rel: Rel) -> Formula {
        if let Some(c) = poly.as_constant() {
            let s = if c.is_zero() {
                0
            } else if c.is_positive() {
                1
            } else {
                -1
            };
            return if rel.holds_for_sign(s) { Formula::True } else { Formula::False };
        }
        let mut p = poly;
        let mut r = rel;
        let content = p.rational_content();
        p = p.scale(&(Rat::from(num_bigint::BigInt::from(1)) / content));
        if matches!(r, Rel::Eq | Rel::Ne) && p.lead_coeff_lex().is_negative() {
            p = p.neg();
            r = r.flipped();
        }
        // an equation whose polynomial splits into two linear-in-some-var
        // factors is kept split: the factors have lower degree, which the
        // decomposition machinery rewards heavily
        if matches!(r, Rel::Eq | Rel::Ne) {
            if let Some((f, g)) = factor_quadratic(&p) {
                return match r {
                    Rel::Eq => Formula::or(vec![
                        Formula::atom(f, Rel::Eq),
                        Formula::atom(g, Rel::Eq),
                    ]),
                    _ => Formula::and(vec![
                        Formula::atom(f, Rel::Ne),
                        Formula::atom(g, Rel::Ne),
                    ]),
                };
            }
        }
        Formula::Atom(p, r)
    }

    pub fn and(children: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for c in children {
            match c {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(children: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for c in children {
            match c {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            Formula::Atom(p, r) => Formula::Atom(p, r.negated()),
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn implies(p: Formula, q: Formula) -> Formula {
        Formula::or(vec![Formula::not(p), q])
    }

    pub fn quant(kind: QuantKind, vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() {
            return body;
        }
        match body {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            b => Formula::Quant(kind, vars, Box::new(b)),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) => true,
            Formula::And(cs) | Formula::Or(cs) => cs.iter().all(|c| c.is_quantifier_free()),
            Formula::Not(c) => c.is_quantifier_free(),
            Formula::Quant(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn walk(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Atom(p, _) => {
                    for v in p.vars() {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                Formula::And(cs) | Formula::Or(cs) => {
                    for c in cs {
                        walk(c, bound, out);
                    }
                }
                Formula::Not(c) => walk(c, bound, out),
                Formula::Quant(_, vs, body) => {
                    let n = bound.len();
                    bound.extend(vs.iter().cloned());
                    walk(body, bound, out);
                    bound.truncate(n);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |p, _| {
            out.extend(p.vars().iter().cloned());
        });
        if let Formula::Quant(_, vs, _) = self {
            out.extend(vs.iter().cloned());
        }
        out
    }

    pub fn visit_atoms(&self, f: &mut impl FnMut(&Poly, Rel)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(p, r) => f(p, *r),
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    c.visit_atoms(f);
                }
            }
            Formula::Not(c) => c.visit_atoms(f),
            Formula::Quant(_, _, body) => body.visit_atoms(f),
        }
    }

    /// All distinct atom polynomials.
    pub fn polynomials(&self) -> Vec<Poly> {
        let mut out: Vec<Poly> = Vec::new();
        self.visit_atoms(&mut |p, _| {
            if !out.contains(p) {
                out.push(p.clone());
            }
        });
        out
    }

    pub fn map_atoms(&self, f: &impl Fn(&Poly, Rel) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(p, r) => f(p, *r),
            Formula::And(cs) => Formula::and(cs.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::Or(cs) => Formula::or(cs.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::Not(c) => Formula::not(c.map_atoms(f)),
            Formula::Quant(k, vs, body) => {
                Formula::quant(*k, vs.clone(), body.map_atoms(f))
            }
        }
    }

    /// Exact truth value at rational coordinates; the formula must be
    /// quantifier-free and the point must cover all free variables.
    pub fn evaluate(&self, point: &[(Var, Rat)]) -> Result<bool, FormulaError> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom(p, r) => {
                let v = p.eval(point).map_err(|e| match e {
                    crate::poly::PolyError::MissingCoordinate(n) => {
                        FormulaError::MissingCoordinate(n)
                    }
                    other => FormulaError::Poly(other),
                })?;
                let s = if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                };
                Ok(r.holds_for_sign(s))
            }
            Formula::And(cs) => {
                for c in cs {
                    if !c.evaluate(point)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(cs) => {
                for c in cs {
                    if c.evaluate(point)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Not(c) => Ok(!c.evaluate(point)?),
            Formula::Quant(..) => panic!("evaluate on quantified formula"),
        }
    }

    /// Truth at a point with real-algebraic coordinates.
    pub fn evaluate_algebraic(
        &self,
        point: &[(Var, AlgebraicNumber)],
    ) -> Result<bool, crate::poly::PolyError> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom(p, r) => Ok(r.holds_for_sign(sign_at(p, point)?)),
            Formula::And(cs) => {
                for c in cs {
                    if !c.evaluate_algebraic(point)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(cs) => {
                for c in cs {
                    if c.evaluate_algebraic(point)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Not(c) => Ok(!c.evaluate_algebraic(point)?),
            Formula::Quant(..) => panic!("evaluate on quantified formula"),
        }
    }

    /// Logically-equivalent structural simplification: constant folding,
    /// flattening, duplicate removal, complementary-pair detection.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(p, r) => Formula::atom(p.clone(), *r),
            Formula::Not(c) => Formula::not(c.simplify()),
            Formula::Quant(k, vs, body) => Formula::quant(*k, vs.clone(), body.simplify()),
            Formula::And(cs) => {
                let mut out: Vec<Formula> = Vec::new();
                for c in cs {
                    let s = c.simplify();
                    match s {
                        Formula::True => {}
                        Formula::False => return Formula::False,
                        Formula::And(inner) => {
                            for i in inner {
                                if !out.contains(&i) {
                                    out.push(i);
                                }
                            }
                        }
                        other => {
                            if !out.contains(&other) {
                                out.push(other);
                            }
                        }
                    }
                }
                if atom_pair(&out, |r, s| {
                    [-1i8, 0, 1].iter().all(|&x| !(r.holds_for_sign(x) && s.holds_for_sign(x)))
                }) {
                    return Formula::False;
                }
                Formula::and(out)
            }
            Formula::Or(cs) => {
                let mut out: Vec<Formula> = Vec::new();
                for c in cs {
                    let s = c.simplify();
                    match s {
                        Formula::False => {}
                        Formula::True => return Formula::True,
                        Formula::Or(inner) => {
                            for i in inner {
                                if !out.contains(&i) {
                                    out.push(i);
                                }
                            }
                        }
                        other => {
                            if !out.contains(&other) {
                                out.push(other);
                            }
                        }
                    }
                }
                if atom_pair(&out, |r, s| {
                    [-1i8, 0, 1].iter().all(|&x| r.holds_for_sign(x) || s.holds_for_sign(x))
                }) {
                    return Formula::True;
                }
                Formula::or(out)
            }
        }
    }

    /// Replaces bound symbols by polynomials, re-normalizing atoms.
    /// Binding a quantified variable is rejected.
    pub fn substitute_equational(
        &self,
        bindings: &[(Var, Poly)],
    ) -> Result<Formula, FormulaError> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        fn walk(f: &Formula, bindings: &[(Var, Poly)]) -> Result<Formula, FormulaError> {
            match f {
                Formula::True => Ok(Formula::True),
                Formula::False => Ok(Formula::False),
                Formula::Atom(p, r) => {
                    let mut q = p.clone();
                    for (v, rhs) in bindings {
                        q = q.substitute_poly(v, rhs);
                    }
                    Ok(Formula::atom(q, *r))
                }
                Formula::And(cs) => Ok(Formula::and(
                    cs.iter().map(|c| walk(c, bindings)).collect::<Result<_, _>>()?,
                )),
                Formula::Or(cs) => Ok(Formula::or(
                    cs.iter().map(|c| walk(c, bindings)).collect::<Result<_, _>>()?,
                )),
                Formula::Not(c) => Ok(Formula::not(walk(c, bindings)?)),
                Formula::Quant(k, vs, body) => {
                    for (v, _) in bindings {
                        if vs.contains(v) {
                            return Err(FormulaError::BindsQuantified(v.name().to_string()));
                        }
                    }
                    Ok(Formula::quant(*k, vs.clone(), walk(body, bindings)?))
                }
            }
        }
        walk(self, bindings)
    }

    /// Negation normal form: negations pushed to atoms (absorbed into the
    /// relation), quantifiers dualized.
    pub fn nnf(&self) -> Formula {
        fn pos(f: &Formula) -> Formula {
            match f {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                Formula::Atom(p, r) => Formula::atom(p.clone(), *r),
                Formula::And(cs) => Formula::and(cs.iter().map(pos).collect()),
                Formula::Or(cs) => Formula::or(cs.iter().map(pos).collect()),
                Formula::Not(c) => neg(c),
                Formula::Quant(k, vs, b) => Formula::quant(*k, vs.clone(), pos(b)),
            }
        }
        fn neg(f: &Formula) -> Formula {
            match f {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                Formula::Atom(p, r) => Formula::atom(p.clone(), r.negated()),
                Formula::And(cs) => Formula::or(cs.iter().map(neg).collect()),
                Formula::Or(cs) => Formula::and(cs.iter().map(neg).collect()),
                Formula::Not(c) => pos(c),
                Formula::Quant(k, vs, b) => Formula::quant(k.dual(), vs.clone(), neg(b)),
            }
        }
        pos(self)
    }
}

/// True if some pair of atoms over the same polynomial has relations
/// satisfying `pred` (e.g. jointly unsatisfiable, or jointly exhaustive).
fn atom_pair(children: &[Formula], pred: impl Fn(Rel, Rel) -> bool) -> bool {
    for (i, a) in children.iter().enumerate() {
        if let Formula::Atom(p, r) = a {
            for b in &children[i + 1..] {
                if let Formula::Atom(q, s) = b {
                    if p == q && pred(*r, *s) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print::print(self))
    }
}

/// A semialgebraic subset of R^n: a quantifier-free formula over an ordered
/// ambient variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct SemialgebraicSet {
    pub ambient_vars: Vec<Var>,
    pub defining: Formula,
}

impl SemialgebraicSet {
    pub fn new(ambient_vars: Vec<Var>, defining: Formula) -> Self {
        debug_assert!(defining.is_quantifier_free());
        SemialgebraicSet { ambient_vars, defining }
    }

    pub fn dim(&self) -> usize {
        self.ambient_vars.len()
    }

    pub fn contains(&self, point: &[(Var, Rat)]) -> Result<bool, FormulaError> {
        self.defining.evaluate(point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat_int;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn pt(coords: &[(&str, i64)]) -> Vec<(Var, Rat)> {
        coords.iter().map(|(n, x)| (v(n), rat_int(*x))).collect()
    }

    #[test]
    fn parse_conjunction_normalizes_atoms() {
        let f = parse("x >= 0 && (y + x^2)*(y - x^2) == 0").unwrap();
        let Formula::And(cs) = &f else { panic!("expected conjunction: {f}") };
        assert_eq!(cs.len(), 2);
        // the product equation splits into its linear-in-y factors
        assert_eq!(format!("{}", cs[1]), "x^2 + y == 0 || x^2 - y == 0");
        assert!(f.evaluate(&pt(&[("x", 2), ("y", 4)])).unwrap());
        assert!(!f.evaluate(&pt(&[("x", 2), ("y", 3)])).unwrap());
        assert!(!f.evaluate(&pt(&[("x", -2), ("y", 4)])).unwrap());
    }

    #[test]
    fn print_parse_round_trip() {
        for src in [
            "x > 0 || (x == 0 && y <= 0)",
            "forall x. x^2 >= 0",
            "exists d. d > 0 && x^2 + y^2 < d",
            "!(x > 0 && y > 0) || z != 0",
            "x^2 - 2*x*y + 3 <= 0",
        ] {
            let f = parse(src).unwrap();
            let printed = f.to_string();
            let back = parse(&printed).unwrap();
            assert_eq!(f, back, "round trip failed for {src}: printed {printed}");
        }
    }

    #[test]
    fn simplify_excluded_middle() {
        let f = parse("x > 0 || x <= 0").unwrap();
        assert_eq!(f.simplify(), Formula::True);
        let g = parse("x > 0 && x <= 0").unwrap();
        assert_eq!(g.simplify(), Formula::False);
        let h = parse("x >= 0 && x <= 0 && y > 0 && y > 0").unwrap();
        // duplicate removal but no constant collapse here
        let Formula::And(cs) = h.simplify() else { panic!() };
        assert_eq!(cs.len(), 3);
    }

    #[test]
    fn constant_atoms_fold() {
        assert_eq!(parse("3 > 0").unwrap(), Formula::True);
        assert_eq!(parse("1 == 2").unwrap(), Formula::False);
        assert_eq!(parse("x - x == 0").unwrap(), Formula::True);
    }

    #[test]
    fn nnf_pushes_negation_through_quantifier() {
        let f = parse("!(forall x. x > 0)").unwrap();
        let g = f.nnf();
        assert_eq!(g, parse("exists x. x <= 0").unwrap());
    }

    #[test]
    fn prenex_renames_captured_variables() {
        let f = parse("(exists x. x > y) && (exists x. x < y)").unwrap();
        let p = to_prenex(&f);
        assert!(p.matrix.is_quantifier_free());
        assert_eq!(p.blocks.len(), 1);
        assert_eq!(p.blocks[0].kind, QuantKind::Exists);
        assert_eq!(p.blocks[0].vars.len(), 2);
        assert_ne!(p.blocks[0].vars[0], p.blocks[0].vars[1]);
        // neither bound name collides with the free variable
        for bv in &p.blocks[0].vars {
            assert_ne!(bv.name(), "y");
        }
    }

    #[test]
    fn prenex_merges_alternating_blocks() {
        let f = parse("forall e. e > 0 => exists d. (d > 0 && (forall x. x^2 < d => x^2 < e))")
            .unwrap();
        let p = to_prenex(&f);
        let kinds: Vec<QuantKind> = p.blocks.iter().map(|b| b.kind).collect();
        assert_eq!(kinds, vec![QuantKind::Forall, QuantKind::Exists, QuantKind::Forall]);
        assert_eq!(p.to_formula().free_vars().len(), 0);
    }

    #[test]
    fn prenex_preserves_truth_on_samples() {
        // (forall x. x^2 >= y) is false at y=1 and true at y=-1; prenexing a
        // formula that nests it must not change the matrix truth table shape.
        let f = parse("y > 0 && !(exists x. x^2 < y)").unwrap();
        let p = to_prenex(&f);
        assert_eq!(p.blocks.len(), 1);
        assert_eq!(p.blocks[0].kind, QuantKind::Forall);
        // matrix is y > 0 && x^2 >= y
        let m = &p.matrix;
        assert!(m.evaluate(&pt(&[("x", 3), ("y", 1)])).unwrap());
        assert!(!m.evaluate(&pt(&[("x", 0), ("y", 1)])).unwrap());
    }

    #[test]
    fn substitute_equational_renormalizes() {
        let f = parse("x^2 + y^2 <= 1").unwrap();
        let g = f
            .substitute_equational(&[(v("y"), Poly::var(&v("x")))])
            .unwrap();
        assert_eq!(g, parse("2*x^2 <= 1").unwrap());
        let q = parse("forall y. y^2 >= x").unwrap();
        assert!(q
            .substitute_equational(&[(v("y"), Poly::zero())])
            .is_err());
    }

    #[test]
    fn sqrt_of_square_clears_to_sign_condition() {
        let f = parse("sqrt(x^2) > 0").unwrap();
        assert!(f.is_quantifier_free());
        for x in [-3i64, -1, 1, 5] {
            assert!(f.evaluate(&pt(&[("x", x)])).unwrap(), "x = {x}");
        }
        assert!(!f.evaluate(&pt(&[("x", 0)])).unwrap());
    }

    #[test]
    fn sqrt_constants_fold() {
        assert_eq!(parse("sqrt(2) > 1").unwrap(), Formula::True);
        assert_eq!(parse("sqrt(2) > 2").unwrap(), Formula::False);
        assert_eq!(parse("sqrt(4) == 2").unwrap(), Formula::True);
        assert_eq!(parse("sqrt(2)*sqrt(2) == 2").unwrap(), Formula::True);
    }

    #[test]
    fn sqrt_atoms_match_true_semantics() {
        // x2 - sqrt(x1^2) >= 0 over a sample grid, against f64 arithmetic
        let f = parse("x2 - sqrt(x1^2 + 1) >= 0").unwrap();
        for x1 in -3i64..=3 {
            for x2 in -3i64..=3 {
                let expect = (x2 as f64) >= ((x1 * x1 + 1) as f64).sqrt();
                let got = f.evaluate(&pt(&[("x1", x1), ("x2", x2)])).unwrap();
                assert_eq!(got, expect, "x1={x1} x2={x2}");
            }
        }
    }

    #[test]
    fn division_case_splits_on_denominator() {
        let f = parse("1/x > 0").unwrap();
        assert!(f.evaluate(&pt(&[("x", 2)])).unwrap());
        assert!(!f.evaluate(&pt(&[("x", -2)])).unwrap());
        assert!(!f.evaluate(&pt(&[("x", 0)])).unwrap());
        let g = parse("(x + 1)/(x - 1) <= 0").unwrap();
        assert!(g.evaluate(&pt(&[("x", 0)])).unwrap());
        assert!(!g.evaluate(&pt(&[("x", 2)])).unwrap());
        assert!(!g.evaluate(&pt(&[("x", 1)])).unwrap()); // pole excluded
    }

    #[test]
    fn parse_set_checks_scope() {
        let s = parse_set("set(x, y; x^2 + y^2 <= 1)").unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&pt(&[("x", 0), ("y", 0)])).unwrap());
        assert!(!s.contains(&pt(&[("x", 2), ("y", 0)])).unwrap());
        assert!(parse_set("set(x; x + z > 0)").is_err());
        assert!(parse_set("set(x; exists y. y > x)").is_err());
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse("x >\n  #").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("unexpected character"));
        assert!(parse("x > 0 &&").is_err());
        assert!(parse("forall . x > 0").is_err());
        assert!(parse("x > 0 y").is_err());
    }

    #[test]
    fn mixed_radicals_rejected() {
        assert!(parse("sqrt(x) + sqrt(y) > 0").is_err());
        assert!(parse("sqrt(sqrt(x)) > 0").is_err());
        assert!(parse("1/(x - x) > 0").is_err());
    }

    #[test]
    fn free_vars_respect_binding() {
        let f = parse("x > 0 && exists x. x < y").unwrap();
        let fv: Vec<String> = f.free_vars().iter().map(|v| v.name().to_string()).collect();
        assert_eq!(fv, vec!["x".to_string(), "y".to_string()]);
    }
}
