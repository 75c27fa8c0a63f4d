//! Regular normal cones of semialgebraic sets, with tangent cones, polar
//! sets, and regular co-derivatives, all reduced to quantifier elimination.
//!
//! The normal-cone membership condition is encoded with squared norms so
//! that it is a first-order formula over ordered fields:
//! for all eps > 0 there is delta > 0 such that every x in C with
//! 0 < ||x - xb||^2 < delta^2 satisfies
//! <v, x - xb>^2 <= eps^2 ||x - xb||^2 or <v, x - xb> <= 0.

mod algo;
mod ops;

pub use algo::{normal_cone_cad, normal_cone_cad_smt, refinement_possible};
pub use ops::{coderivative, polar, project_set, set_subset, sets_equal, tangent_cone};

use crate::formula::{to_prenex, Formula, PrenexFormula, QuantKind, Rel, SemialgebraicSet};
use crate::poly::{Poly, Rat, Var};
use crate::qe::{eliminate, QeConfig, QeError};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub enum ConeError {
    #[error("base point does not belong to the set")]
    NotMember,
    #[error("base point arity {got} does not match ambient dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error(transparent)]
    Qe(#[from] QeError),
    #[error(transparent)]
    Formula(#[from] crate::formula::FormulaError),
}

#[derive(Clone, Debug)]
pub enum BasePoint {
    Fixed(Vec<Rat>),
    Symbolic(Vec<Var>),
}

/// All symbols of a normal-cone computation: the set C, the base point, the
/// cone variables v, and the quantified helper variables eps, delta, and the
/// probe point x. Helper names are chosen fresh against the ambient ones.
#[derive(Clone, Debug)]
pub struct ConeQuery {
    pub set: SemialgebraicSet,
    pub base: BasePoint,
    pub cone_vars: Vec<Var>,
    pub epsilon: Var,
    pub delta: Var,
    pub probe_vars: Vec<Var>,
}

/// Picks `name` or `name_1`, `name_2`, ... so it avoids `taken`.
fn fresh_var(name: &str, taken: &mut Vec<String>) -> Var {
    let mut cand = name.to_string();
    let mut i = 0;
    while taken.contains(&cand) {
        i += 1;
        cand = format!("{name}_{i}");
    }
    taken.push(cand.clone());
    Var::new(&cand)
}

impl ConeQuery {
    pub fn new(set: SemialgebraicSet, base: BasePoint) -> Result<ConeQuery, ConeError> {
        let n = set.dim();
        let got = match &base {
            BasePoint::Fixed(c) => c.len(),
            BasePoint::Symbolic(vs) => vs.len(),
        };
        if got != n {
            return Err(ConeError::DimensionMismatch { got, want: n });
        }
        let mut taken: Vec<String> =
            set.ambient_vars.iter().map(|v| v.name().to_string()).collect();
        if let BasePoint::Symbolic(vs) = &base {
            taken.extend(vs.iter().map(|v| v.name().to_string()));
        }
        let cone_vars = (1..=n).map(|i| fresh_var(&format!("v{i}"), &mut taken)).collect();
        let epsilon = fresh_var("eps", &mut taken);
        let delta = fresh_var("dlt", &mut taken);
        let probe_vars = set
            .ambient_vars
            .iter()
            .map(|v| fresh_var(&format!("{}p", v.name()), &mut taken))
            .collect();
        Ok(ConeQuery { set, base, cone_vars, epsilon, delta, probe_vars })
    }

    /// Symbolic base-point variables `xb1..xbn` chosen fresh.
    pub fn symbolic(set: SemialgebraicSet) -> Result<ConeQuery, ConeError> {
        let mut taken: Vec<String> =
            set.ambient_vars.iter().map(|v| v.name().to_string()).collect();
        let vs: Vec<Var> = set
            .ambient_vars
            .iter()
            .map(|v| fresh_var(&format!("{}b", v.name()), &mut taken))
            .collect();
        ConeQuery::new(set, BasePoint::Symbolic(vs))
    }

    pub fn base_vars(&self) -> Vec<Var> {
        match &self.base {
            BasePoint::Fixed(_) => Vec::new(),
            BasePoint::Symbolic(vs) => vs.clone(),
        }
    }

    fn base_poly(&self, i: usize) -> Poly {
        match &self.base {
            BasePoint::Fixed(c) => Poly::constant(c[i].clone()),
            BasePoint::Symbolic(vs) => Poly::var(&vs[i]),
        }
    }

    /// x - xb per coordinate, as polynomials over probe (and base) symbols.
    fn diffs(&self) -> Vec<Poly> {
        (0..self.set.dim())
            .map(|i| Poly::var(&self.probe_vars[i]).sub(&self.base_poly(i)))
            .collect()
    }

    /// The set's defining formula over the probe variables.
    pub fn region(&self, defining: &Formula) -> Formula {
        let bindings: Vec<(Var, Poly)> = self
            .set
            .ambient_vars
            .iter()
            .zip(&self.probe_vars)
            .map(|(a, p)| (a.clone(), Poly::var(p)))
            .collect();
        defining.substitute_equational(&bindings).expect("defining is quantifier-free")
    }

    /// Membership of the base point, as a closed formula (fixed point) or a
    /// formula over the base variables (symbolic point).
    pub fn base_membership(&self) -> Formula {
        let bindings: Vec<(Var, Poly)> = self
            .set
            .ambient_vars
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), self.base_poly(i)))
            .collect();
        self.set
            .defining
            .substitute_equational(&bindings)
            .expect("defining is quantifier-free")
    }

    /// Verifies a fixed base point lies in C.
    pub fn check_base_membership(&self) -> Result<(), ConeError> {
        if let BasePoint::Fixed(_) = &self.base {
            match self.base_membership().simplify() {
                Formula::True => Ok(()),
                _ => Err(ConeError::NotMember),
            }
        } else {
            Ok(())
        }
    }
}

/// The normal-cone condition for a region after two shrinking passes over
/// its constraints: probe variables pinned by linear equations are
/// substituted away, and quadratic equations (a section constraint such as
/// y^2 = x^4) are turned into rewrite rules y^2 -> rhs applied to every
/// other polynomial, so y never appears beyond degree one outside its own
/// defining equation. Both passes are equivalences on the region, and they
/// decide how expensive the later decomposition is.
pub(crate) struct PreparedCondition {
    hyp: Vec<Formula>,
    /// Probe-minus-base differences x_i - xb_i after substitution.
    diffs: Vec<Poly>,
    ip: Poly,
    probe: Vec<Var>,
    /// v^2 = -(q v + r) rewrite rules from monic-normalized equations.
    rules: Vec<(Var, Poly, Poly)>,
    /// Variable signs implied by the region's single-term sign conditions.
    signs: BTreeMap<Var, VarSign>,
}

/// Definite sign of a variable on a region.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum VarSign {
    Pos,
    Neg,
    NonZero,
}

/// Possible signs of a polynomial value on a region.
#[derive(Clone, Copy, Debug)]
struct SignRange {
    neg: bool,
    zero: bool,
    pos: bool,
}

impl SignRange {
    const ANY: SignRange = SignRange { neg: true, zero: true, pos: true };

    fn of_rat(c: &Rat) -> SignRange {
        SignRange { neg: c < &Rat::zero(), zero: c.is_zero(), pos: c > &Rat::zero() }
    }

    /// Magnitudes are unconstrained, so a possibly-negative summand can
    /// dominate anything.
    fn add(self, o: SignRange) -> SignRange {
        SignRange {
            neg: self.neg || o.neg,
            pos: self.pos || o.pos,
            zero: (self.zero && o.zero) || (self.pos && o.neg) || (self.neg && o.pos),
        }
    }

    fn mul(self, o: SignRange) -> SignRange {
        SignRange {
            pos: (self.pos && o.pos) || (self.neg && o.neg),
            neg: (self.pos && o.neg) || (self.neg && o.pos),
            zero: self.zero || o.zero,
        }
    }

    fn strictly_positive(self) -> bool {
        !self.neg && !self.zero
    }

    fn strictly_negative(self) -> bool {
        !self.pos && !self.zero
    }

    fn identically_zero(self) -> bool {
        !self.pos && !self.neg
    }

    /// Truth of `p rel 0` when the range pins it down.
    fn decides(self, rel: Rel) -> Option<bool> {
        let truth = |neg: bool, zero: bool, pos: bool| match rel {
            Rel::Eq => zero,
            Rel::Ne => !zero,
            Rel::Lt => neg,
            Rel::Le => neg || zero,
            Rel::Gt => pos,
            Rel::Ge => pos || zero,
        };
        let mut seen: Option<bool> = None;
        for (n, z, p) in [(self.neg, false, false), (false, self.zero, false), (false, false, self.pos)]
        {
            if !(n || z || p) {
                continue;
            }
            let t = truth(n, z, p);
            match seen {
                None => seen = Some(t),
                Some(prev) if prev != t => return None,
                Some(_) => {}
            }
        }
        seen
    }
}

fn var_range(v: &Var, exp: u32, signs: &BTreeMap<Var, VarSign>) -> SignRange {
    let base = match signs.get(v) {
        Some(VarSign::Pos) => SignRange { neg: false, zero: false, pos: true },
        Some(VarSign::Neg) => SignRange { neg: true, zero: false, pos: false },
        Some(VarSign::NonZero) => SignRange { neg: true, zero: false, pos: true },
        None => SignRange::ANY,
    };
    let mut acc = SignRange { neg: false, zero: false, pos: true };
    for _ in 0..exp {
        acc = acc.mul(base);
    }
    acc
}

/// Possible signs of `p` given per-variable sign facts.
fn poly_range(p: &Poly, signs: &BTreeMap<Var, VarSign>) -> SignRange {
    let mut acc = SignRange { neg: false, zero: true, pos: false };
    for (exps, c) in p.terms() {
        let mut term = SignRange::of_rat(c);
        for (i, &e) in exps.iter().enumerate() {
            if e > 0 {
                term = term.mul(var_range(&p.vars()[i], e, signs));
            }
        }
        acc = acc.add(term);
    }
    acc
}

/// Sign facts readable off single-term strict atoms: c*v^k > 0 and the
/// like. These are the only facts used for simplification, so the source
/// atoms themselves must stay in the hypothesis.
fn sign_facts(hyp: &[Formula]) -> BTreeMap<Var, VarSign> {
    let mut map = BTreeMap::new();
    for h in hyp {
        let Formula::Atom(p, rel) = h else { continue };
        if p.num_terms() != 1 {
            continue;
        }
        let Some((exps, c)) = p.terms().next() else { continue };
        let mut vars = exps.iter().enumerate().filter(|(_, e)| **e > 0);
        let Some((i, &k)) = vars.next() else { continue };
        if vars.next().is_some() {
            continue;
        }
        let v = p.vars()[i].clone();
        let fact = match rel {
            Rel::Ne => VarSign::NonZero,
            Rel::Gt | Rel::Lt => {
                let positive = (*rel == Rel::Gt) == c.is_positive();
                if k % 2 == 0 {
                    if positive {
                        VarSign::NonZero
                    } else {
                        continue; // v^even < 0: empty region, nothing to learn
                    }
                } else if positive {
                    VarSign::Pos
                } else {
                    VarSign::Neg
                }
            }
            _ => continue,
        };
        let entry = map.entry(v).or_insert(fact);
        if *entry == VarSign::NonZero {
            *entry = fact;
        }
    }
    map
}

/// Sign-equivalent cofactor: monomial factors whose sign the region pins
/// down are divided out (with a negation for odd negative factors).
fn strip_signed_factors(p: &Poly, signs: &BTreeMap<Var, VarSign>) -> Poly {
    let mut p = p.clone();
    loop {
        let mut progress = false;
        for (i, v) in p.vars().to_vec().iter().enumerate() {
            let min = p.terms().map(|(e, _)| e[i]).min().unwrap_or(0);
            if min == 0 {
                continue;
            }
            let factor = var_range(v, min, signs);
            if !factor.strictly_positive() && !factor.strictly_negative() {
                continue;
            }
            for _ in 0..min {
                p = p.try_exact_div(&Poly::var(v)).expect("monomial factor divides");
            }
            if factor.strictly_negative() {
                p = p.neg();
            }
            progress = true;
            break;
        }
        if !progress {
            return p;
        }
    }
}

impl PreparedCondition {
    /// Remainder of p modulo every v^2 + q v + r rule.
    fn reduce(&self, p: &Poly) -> Poly {
        let mut p = p.clone();
        for _ in 0..4 {
            let mut changed = false;
            for (v, q, r) in &self.rules {
                if p.degree(v) < 2 {
                    continue;
                }
                let mut coeffs = p.coeffs_in(v);
                for i in (2..coeffs.len()).rev() {
                    let t = std::mem::replace(&mut coeffs[i], Poly::zero());
                    coeffs[i - 1] = coeffs[i - 1].sub(&t.mul(q));
                    coeffs[i - 2] = coeffs[i - 2].sub(&t.mul(r));
                }
                p = Poly::from_coeffs(v, &coeffs);
                changed = true;
            }
            if !changed {
                break;
            }
        }
        p
    }

    /// x differs from the base point: some coordinate difference is nonzero.
    /// Trivially true when a difference has definite sign on the region.
    fn nonzero(&self) -> Formula {
        let mut atoms = Vec::new();
        for d in &self.diffs {
            let r = poly_range(d, &self.signs);
            if r.strictly_positive() || r.strictly_negative() {
                return Formula::True;
            }
            if r.identically_zero() {
                continue;
            }
            atoms.push(Formula::atom(d.clone(), Rel::Ne));
        }
        Formula::or(atoms)
    }

    /// x is within `radius` of the base point in the max norm. Bounds the
    /// region already rules out are omitted.
    fn ball(&self, radius: &Var) -> Vec<Formula> {
        let r = Poly::var(radius);
        let mut atoms = Vec::new();
        for d in &self.diffs {
            let range = poly_range(d, &self.signs);
            if range.identically_zero() {
                continue;
            }
            if !range.strictly_negative() {
                atoms.push(Formula::atom(self.reduce(&d.sub(&r)), Rel::Lt));
            }
            if !range.strictly_positive() {
                atoms.push(Formula::atom(self.reduce(&d.add(&r)), Rel::Gt));
            }
        }
        atoms
    }

    /// Left-hand sides of <v, x - xb> <= eps * ||x - xb||_max, written
    /// without the max: the inner product is below eps*d or eps*(-d) for
    /// some coordinate, keeping only the side |d| can attain.
    fn conclusion_polys(&self, epsilon: &Var) -> Vec<Poly> {
        let e = Poly::var(epsilon);
        let mut polys = Vec::new();
        for d in &self.diffs {
            let range = poly_range(d, &self.signs);
            if range.identically_zero() {
                continue;
            }
            let ed = e.mul(d);
            if !range.strictly_negative() {
                polys.push(strip_signed_factors(&self.reduce(&self.ip.sub(&ed)), &self.signs));
            }
            if !range.strictly_positive() {
                polys.push(strip_signed_factors(&self.reduce(&self.ip.add(&ed)), &self.signs));
            }
        }
        polys
    }

    fn conclusion(&self, epsilon: &Var) -> Formula {
        Formula::or(
            self.conclusion_polys(epsilon)
                .into_iter()
                .map(|p| Formula::atom(p, Rel::Le))
                .collect(),
        )
    }

    /// Negation of `conclusion`: the inner product strictly exceeds
    /// eps * ||x - xb||_max.
    fn conclusion_negated(&self, epsilon: &Var) -> Vec<Formula> {
        self.conclusion_polys(epsilon)
            .into_iter()
            .map(|p| Formula::atom(p, Rel::Gt))
            .collect()
    }
}

/// Disjunctive normal form of a quantifier-free formula: the disjuncts,
/// each a list of atoms understood conjunctively.
pub(crate) fn dnf(f: &Formula) -> Vec<Vec<Formula>> {
    match f.nnf() {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Or(cs) => cs.iter().flat_map(|c| dnf(c)).collect(),
        Formula::And(cs) => {
            let mut acc: Vec<Vec<Formula>> = vec![vec![]];
            for c in cs {
                let branches = dnf(&c);
                let mut next = Vec::new();
                for a in &acc {
                    for b in &branches {
                        let mut merged = a.clone();
                        merged.extend(b.iter().cloned());
                        next.push(merged);
                    }
                }
                acc = next;
            }
            acc
        }
        atom => vec![vec![atom]],
    }
}

pub(crate) fn prepare_condition(q: &ConeQuery, conjuncts: &[Formula]) -> PreparedCondition {
    let ip = q
        .diffs()
        .iter()
        .zip(&q.cone_vars)
        .fold(Poly::zero(), |acc, (d, v)| acc.add(&d.mul(&Poly::var(v))));

    let mut hyp: Vec<Formula> = conjuncts.to_vec();
    let mut diffs = q.diffs();
    let mut ip = ip;
    let mut probe: Vec<Var> = q.probe_vars.clone();

    // solve linear equations for probe variables (e.g. a graph constraint
    // y = g(x)) and substitute them through the whole condition
    loop {
        let mut done = true;
        'scan: for i in 0..hyp.len() {
            let Formula::Atom(p, Rel::Eq) = &hyp[i] else { continue };
            for (vi, v) in probe.iter().enumerate() {
                if p.degree(v) != 1 {
                    continue;
                }
                let coeffs = p.coeffs_in(v);
                let Some(c) = coeffs[1].as_constant() else { continue };
                if c.is_zero() {
                    continue;
                }
                let rhs = coeffs[0].scale(&(-Rat::from(num_bigint::BigInt::from(1)) / c));
                let v = v.clone();
                hyp.remove(i);
                for h in hyp.iter_mut() {
                    *h = h
                        .substitute_equational(&[(v.clone(), rhs.clone())])
                        .expect("region is quantifier-free");
                }
                for d in diffs.iter_mut() {
                    *d = d.substitute_poly(&v, &rhs);
                }
                ip = ip.substitute_poly(&v, &rhs);
                probe.remove(vi);
                done = false;
                break 'scan;
            }
        }
        if done {
            break;
        }
    }

    // quadratic equations with constant leading coefficient become rewrite
    // rules; the equation itself stays in the hypothesis
    let mut rules: Vec<(Var, Poly, Poly)> = Vec::new();
    for h in &hyp {
        let Formula::Atom(p, Rel::Eq) = h else { continue };
        for v in &probe {
            if rules.iter().any(|(w, _, _)| w == v) || p.degree(v) != 2 {
                continue;
            }
            let coeffs = p.coeffs_in(v);
            let Some(c) = coeffs[2].as_constant() else { continue };
            if c.is_zero() {
                continue;
            }
            let inv = Rat::from(num_bigint::BigInt::from(1)) / c;
            rules.push((v.clone(), coeffs[1].scale(&inv), coeffs[0].scale(&inv)));
            break;
        }
    }
    let mut prep =
        PreparedCondition { hyp, diffs, ip, probe, rules, signs: BTreeMap::new() };
    if !prep.rules.is_empty() {
        prep.diffs = prep.diffs.iter().map(|d| prep.reduce(d)).collect();
        prep.ip = prep.reduce(&prep.ip);
    }
    prep.signs = sign_facts(&prep.hyp);
    // Simplify the hypothesis against its own sign facts: atoms the facts
    // already decide drop out, the rest lose sign-definite monomial factors.
    // The fact-bearing single-term atoms and the rewrite-rule equations stay
    // untouched so nothing is simplified against itself.
    let mut new_hyp = Vec::new();
    for h in &prep.hyp {
        match h {
            Formula::Atom(p, rel) if !p.is_constant() && p.num_terms() > 1 => {
                let is_rule_src = matches!(rel, Rel::Eq)
                    && prep.rules.iter().any(|(v, _, _)| p.degree(v) == 2);
                if is_rule_src {
                    new_hyp.push(h.clone());
                    continue;
                }
                let reduced = prep.reduce(p);
                match poly_range(&reduced, &prep.signs).decides(*rel) {
                    Some(true) => {}
                    Some(false) => new_hyp.push(Formula::False),
                    None => new_hyp.push(Formula::atom(
                        strip_signed_factors(&reduced, &prep.signs),
                        *rel,
                    )),
                }
            }
            other => new_hyp.push(other.clone()),
        }
    }
    prep.hyp = new_hyp;
    prep
}

fn quantified_condition(q: &ConeQuery, region: Formula) -> Formula {
    // The max norm replaces the Euclidean norm throughout: norm equivalence
    // leaves the cone unchanged, and every helper atom stays linear in each
    // of eps, dlt, and the probe variables instead of quadratic.
    //
    // One universal block per disjunct of the region, so each branch gets
    // its own variable substitutions.
    let mut inners = Vec::new();
    for branch in dnf(&region.simplify()) {
        let prep = prepare_condition(q, &branch);
        let mut hyp = prep.hyp.clone();
        hyp.push(prep.nonzero());
        hyp.extend(prep.ball(&q.delta));

        inners.push(Formula::quant(
            QuantKind::Forall,
            prep.probe.clone(),
            Formula::implies(Formula::and(hyp), prep.conclusion(&q.epsilon)),
        ));
    }
    let inner = Formula::and(inners);
    let with_delta = Formula::quant(
        QuantKind::Exists,
        vec![q.delta.clone()],
        Formula::and(vec![Formula::atom(Poly::var(&q.delta), Rel::Gt), inner]),
    );
    Formula::quant(
        QuantKind::Forall,
        vec![q.epsilon.clone()],
        Formula::implies(Formula::atom(Poly::var(&q.epsilon), Rel::Gt), with_delta),
    )
}

/// The quantified membership condition v in N(C, xb), in prenex form.
pub fn normal_cone_formula(q: &ConeQuery) -> PrenexFormula {
    let region = q.region(&q.set.defining.clone());
    to_prenex(&quantified_condition(q, region))
}

/// Same, but for an arbitrary subregion of the ambient space (used per cell).
pub(crate) fn cell_cone_condition(q: &ConeQuery, cell_formula: &Formula) -> Formula {
    quantified_condition(q, q.region(cell_formula))
}

/// Checks whether a fixed vector lies in the regular normal cone at a fixed
/// base point.
pub fn check_membership(
    set: &SemialgebraicSet,
    base: &[Rat],
    vector: &[Rat],
    cfg: &QeConfig,
) -> Result<bool, ConeError> {
    let q = ConeQuery::new(set.clone(), BasePoint::Fixed(base.to_vec()))?;
    q.check_base_membership()?;
    if vector.len() != set.dim() {
        return Err(ConeError::DimensionMismatch { got: vector.len(), want: set.dim() });
    }
    let cond = quantified_condition(&q, q.region(&q.set.defining.clone()));
    let bindings: Vec<(Var, Poly)> = q
        .cone_vars
        .iter()
        .zip(vector)
        .map(|(v, c)| (v.clone(), Poly::constant(c.clone())))
        .collect();
    let closed = cond.substitute_equational(&bindings)?;
    Ok(crate::qe::decide_sentence(&closed, cfg)?)
}

/// Outcome of a cone computation: a quantifier-free formula over the cone
/// variables (and base variables when symbolic), with a step-by-step record.
#[derive(Clone, Debug)]
pub struct ConeResult {
    pub formula: Formula,
    pub algorithm: String,
    pub cone_vars: Vec<Var>,
    pub base_vars: Vec<Var>,
    pub final_result: bool,
    pub provenance: Vec<ProvenanceStep>,
}

#[derive(Clone, Debug)]
pub struct ProvenanceStep {
    pub cell: String,
    pub action: CellAction,
    pub estimate_after: Formula,
    pub millis: u128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellAction {
    Computed,
    SkippedFar,
    SkippedUnsat,
    Deferred,
    BoundaryFirst,
    Unresolved,
}

impl CellAction {
    fn as_str(self) -> &'static str {
        match self {
            CellAction::Computed => "computed",
            CellAction::SkippedFar => "skipped-far",
            CellAction::SkippedUnsat => "skipped-unsat",
            CellAction::Deferred => "deferred",
            CellAction::BoundaryFirst => "boundary-first",
            CellAction::Unresolved => "unresolved",
        }
    }
}

impl ConeResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "algorithm": self.algorithm,
            "formula": self.formula.to_string(),
            "cone_vars": self.cone_vars.iter().map(|v| v.name().to_string()).collect::<Vec<_>>(),
            "base_vars": self.base_vars.iter().map(|v| v.name().to_string()).collect::<Vec<_>>(),
            "status": if self.final_result { "final" } else { "upper-estimate" },
            "provenance": self.provenance.iter().map(|s| serde_json::json!({
                "cell": s.cell,
                "action": s.action.as_str(),
                "estimate-after": s.estimate_after.to_string(),
                "millis": s.millis,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Algorithms computing the cone directly by one quantifier elimination.
/// With `conjoin_membership` the base-point membership clause is added
/// before elimination, restricting the answer to actual base points; without
/// it the clause is conjoined onto the eliminated result afterward.
pub fn normal_cone_direct(
    set: &SemialgebraicSet,
    base: BasePoint,
    conjoin_membership: bool,
    cfg: &QeConfig,
) -> Result<ConeResult, ConeError> {
    let q = ConeQuery::new(set.clone(), base)?;
    q.check_base_membership()?;
    let cond = quantified_condition(&q, q.region(&q.set.defining.clone()));
    let mut free: Vec<Var> = q.base_vars();
    free.extend(q.cone_vars.iter().cloned());
    let (input, algorithm) = if conjoin_membership {
        (Formula::and(vec![q.base_membership(), cond]), "direct-conjoined")
    } else {
        (cond, "direct")
    };
    let mut formula = eliminate(&input, &free, cfg)?;
    if !conjoin_membership && matches!(q.base, BasePoint::Symbolic(_)) {
        // assembled afterward: member points get the eliminated cone, and
        // the clause records that the definition presupposes membership
        formula = Formula::and(vec![q.base_membership(), formula]).simplify();
    }
    Ok(ConeResult {
        formula,
        algorithm: algorithm.into(),
        cone_vars: q.cone_vars.clone(),
        base_vars: q.base_vars(),
        final_result: true,
        provenance: vec![ProvenanceStep {
            cell: "whole-set".into(),
            action: CellAction::Computed,
            estimate_after: Formula::True,
            millis: 0,
        }],
    })
}

/// Shared configuration for the cell-based algorithms.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConeConfig {
    pub qe: QeConfig,
    /// Per-cell elimination budget for the SMT-assisted algorithm.
    pub per_cell_limit: Option<Duration>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, parse_set};
    use crate::poly::rat_int;
    use crate::qe::equivalent;

    fn qe_cfg() -> QeConfig {
        QeConfig::with_time_limit(Duration::from_secs(120))
    }

    fn halfline() -> crate::formula::SemialgebraicSet {
        parse_set("set(x; x >= 0)").unwrap()
    }

    fn kkt() -> crate::formula::SemialgebraicSet {
        parse_set("set(x, y; x >= 0 && (y + x^2) * (y - x^2) = 0)").unwrap()
    }

    fn complementarity() -> crate::formula::SemialgebraicSet {
        parse_set("set(x, y; x >= 0 && y >= 0 && x * y = 0)").unwrap()
    }

    #[test]
    fn membership_kkt_origin() {
        let set = kkt();
        let cfg = qe_cfg();
        assert!(check_membership(&set, &[rat_int(0), rat_int(0)], &[rat_int(-1), rat_int(-1)], &cfg).unwrap());
        assert!(!check_membership(&set, &[rat_int(0), rat_int(0)], &[rat_int(1), rat_int(0)], &cfg).unwrap());
    }

    #[test]
    fn direct_halfline_fixed_points() {
        let cfg = qe_cfg();
        let at0 = normal_cone_direct(&halfline(), BasePoint::Fixed(vec![rat_int(0)]), true, &cfg).unwrap();
        assert!(equivalent(&at0.formula, &parse("v1 <= 0").unwrap(), &cfg).unwrap());
        let at1 = normal_cone_direct(&halfline(), BasePoint::Fixed(vec![rat_int(1)]), true, &cfg).unwrap();
        assert!(equivalent(&at1.formula, &parse("v1 = 0").unwrap(), &cfg).unwrap());
    }

    #[test]
    fn direct_halfline_symbolic() {
        let cfg = qe_cfg();
        let q = ConeQuery::symbolic(halfline()).unwrap();
        let cond = normal_cone_formula(&q).to_formula();
        let mut free = q.base_vars();
        free.extend(q.cone_vars.iter().cloned());
        let got = eliminate(&cond, &free, &cfg).unwrap();
        let want = parse("xb < 0 || (xb = 0 && v1 <= 0) || (xb > 0 && v1 = 0)").unwrap();
        assert!(equivalent(&got, &want, &cfg).unwrap());
    }

    #[test]
    fn algorithm_cells_kkt() {
        let cells = algo::c_cells(&kkt(), &crate::cad::CadConfig::default()).unwrap();
        assert_eq!(cells.len(), 3);
        assert_eq!(cells[0].dimension, 0);
        assert_eq!(cells[1].dimension, 1);
        assert_eq!(cells[2].dimension, 1);
    }

    #[test]
    fn algorithm_cad_kkt_sequence() {
        let cfg = ConeConfig { qe: qe_cfg(), per_cell_limit: None };
        let r = normal_cone_cad(&kkt(), &[rat_int(0), rat_int(0)], &cfg).unwrap();
        assert!(r.final_result);
        let want = parse("v1 <= 0").unwrap();
        assert!(equivalent(&r.provenance[0].estimate_after, &Formula::True, &cfg.qe).unwrap());
        assert!(equivalent(&r.provenance[1].estimate_after, &want, &cfg.qe).unwrap());
        assert!(equivalent(&r.provenance[2].estimate_after, &want, &cfg.qe).unwrap());
        assert!(equivalent(&r.formula, &want, &cfg.qe).unwrap());
    }

    #[test]
    fn complementarity_away_from_corner() {
        let cfg = ConeConfig { qe: qe_cfg(), per_cell_limit: None };
        let r = normal_cone_cad(&complementarity(), &[rat_int(1), rat_int(0)], &cfg).unwrap();
        assert!(equivalent(&r.formula, &parse("v1 = 0").unwrap(), &cfg.qe).unwrap());
    }

    #[test]
    fn polar_of_first_quadrant() {
        let cfg = qe_cfg();
        let quad = parse_set("set(x, y; x >= 0 && y >= 0)").unwrap();
        let p = polar(&quad, &cfg).unwrap();
        assert!(equivalent(&p.formula, &parse("v1 <= 0 && v2 <= 0").unwrap(), &cfg).unwrap());
    }

    #[test]
    fn tangent_halfline() {
        let cfg = qe_cfg();
        let t = tangent_cone(&halfline(), &[rat_int(0)], &cfg).unwrap();
        assert!(equivalent(&t.formula, &parse("w1 >= 0").unwrap(), &cfg).unwrap());
    }

    #[test]
    fn project_circle_shadow() {
        let cfg = qe_cfg();
        let circle = parse_set("set(x, y; x^2 + y^2 = 1)").unwrap();
        let shadow = project_set(&circle, &[Var::new("x")], &cfg).unwrap();
        let want = parse("x^2 <= 1").unwrap();
        assert!(equivalent(&shadow.defining, &want, &cfg).unwrap());
    }

    #[test]
    fn coderivative_of_linear_map() {
        // graph of F(x) = 2x; D*F(0|0) maps v* to u* = 2 v*
        let cfg = ConeConfig { qe: qe_cfg(), per_cell_limit: None };
        let gph = parse_set("set(x, y; y - 2*x = 0)").unwrap();
        let fixed = coderivative(&gph, &[rat_int(0), rat_int(0)], 1, Some(&[rat_int(1)]), &cfg).unwrap();
        assert!(equivalent(&fixed.formula, &parse("v1 - 2 = 0").unwrap(), &cfg.qe).unwrap());
        let sym = coderivative(&gph, &[rat_int(0), rat_int(0)], 1, None, &cfg).unwrap();
        assert!(equivalent(&sym.formula, &parse("v1 - 2*vs1 = 0").unwrap(), &cfg.qe).unwrap());
    }

    #[test]
    fn smt_variant_matches_plain_on_complementarity() {
        let cfg = ConeConfig {
            qe: qe_cfg(),
            per_cell_limit: Some(Duration::from_secs(60)),
        };
        let r = normal_cone_cad_smt(&complementarity(), &[rat_int(0), rat_int(0)], &cfg).unwrap();
        assert!(r.final_result);
        let want = parse("v1 <= 0 && v2 <= 0").unwrap();
        assert!(equivalent(&r.formula, &want, &cfg.qe).unwrap());
    }
}
