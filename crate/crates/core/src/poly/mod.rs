//! Exact multivariate polynomial arithmetic over the rationals.
//!
//! Polynomials are stored as a sorted variable list plus a map from
//! exponent vectors to reduced rational coefficients. The zero polynomial
//! has an empty term map; stored coefficients are never zero.

mod algebraic;
mod resultant;
mod unipoly;

pub use algebraic::{
    interval_eval, real_roots_at, sign_at, vanishes_identically, AlgebraicNumber, Interval,
    RootsAt, SamplePoint,
};
pub use resultant::{discriminant, gcd, psc_chain, resultant, squarefree_part, sylvester_matrix};
pub use unipoly::{descartes_sign_variations, isolate_real_roots_uni, sturm_root_count, UniPoly};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// A variable symbol. Cheap to clone; ordered by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }
    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl serde::Serialize for Var {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("negative exponent in pow")]
    NegativeExponent,
    #[error("operand has degree 0 in {0}: resultant requires positive degree")]
    ResultantDegreeZero(String),
    #[error("discriminant requires degree >= 2 in {0}")]
    DiscriminantDegree(String),
    #[error("zero polynomial has no root isolation")]
    ZeroPolynomial,
    #[error("missing coordinate for variable {0}")]
    MissingCoordinate(String),
    #[error("computation budget exhausted")]
    Budget,
}

/// Thread-local deadline consulted by the expensive kernels (determinants,
/// gcds), so a caller-imposed time limit also interrupts a single large
/// algebraic operation instead of only being observed between them.
pub mod budget {
    use std::cell::Cell;
    use std::time::Instant;

    thread_local! {
        static DEADLINE: Cell<Option<Instant>> = const { Cell::new(None) };
    }

    pub fn expired() -> bool {
        DEADLINE.with(|d| d.get().is_some_and(|t| Instant::now() > t))
    }

    /// Installs a deadline for the current scope; the previous one is
    /// restored when the guard drops.
    pub fn guard(deadline: Option<Instant>) -> Guard {
        Guard { prev: DEADLINE.with(|d| d.replace(deadline)) }
    }

    pub struct Guard {
        prev: Option<Instant>,
    }

    impl Drop for Guard {
        fn drop(&mut self) {
            DEADLINE.with(|d| d.set(self.prev));
        }
    }
}

/// Multivariate polynomial with exact rational coefficients.
///
/// Invariants: `vars` sorted and deduplicated, every exponent vector has
/// `vars.len()` entries, no zero coefficients stored, and variables that
/// appear in no term are pruned.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    vars: Vec<Var>,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { vars: vec![], terms: BTreeMap::new() }
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![], c);
        }
        Poly { vars: vec![], terms }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(rat_int(n))
    }

    pub fn var(v: &Var) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![1], Rat::one());
        Poly { vars: vec![v.clone()], terms }
    }

    /// Builds from raw parts, restoring all invariants.
    pub fn from_terms(vars: Vec<Var>, terms: impl IntoIterator<Item = (Vec<u32>, Rat)>) -> Self {
        let mut map: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent vector length mismatch");
            let entry = map.entry(e).or_insert_with(Rat::zero);
            *entry += c;
        }
        map.retain(|_, c| !c.is_zero());
        let mut p = Poly { vars, terms: map };
        p.prune();
        p.sort_vars();
        p
    }

    fn prune(&mut self) {
        let n = self.vars.len();
        let mut used = vec![false; n];
        for e in self.terms.keys() {
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    used[i] = true;
                }
            }
        }
        if used.iter().all(|&u| u) {
            return;
        }
        let keep: Vec<usize> = (0..n).filter(|&i| used[i]).collect();
        let vars: Vec<Var> = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (keep.iter().map(|&i| e[i]).collect(), c.clone()))
            .collect();
        self.vars = vars;
        self.terms = terms;
    }

    fn sort_vars(&mut self) {
        if self.vars.windows(2).all(|w| w[0] < w[1]) {
            return;
        }
        let mut idx: Vec<usize> = (0..self.vars.len()).collect();
        idx.sort_by(|&a, &b| self.vars[a].cmp(&self.vars[b]));
        let vars: Vec<Var> = idx.iter().map(|&i| self.vars[i].clone()).collect();
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                (idx.iter().map(|&i| e[i]).collect::<Vec<u32>>(), c.clone())
            })
            .collect();
        self.vars = vars;
        self.terms = terms;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            self.terms.get(&vec![] as &Vec<u32>).cloned()
        } else {
            None
        }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.vars.binary_search(v).is_ok()
    }

    pub fn degree(&self, v: &Var) -> usize {
        match self.vars.binary_search(v) {
            Err(_) => 0,
            Ok(i) => self.terms.keys().map(|e| e[i] as usize).max().unwrap_or(0),
        }
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Re-expresses the polynomial over a superset variable list (sorted).
    fn aligned_terms(&self, vars: &[Var]) -> BTreeMap<Vec<u32>, Rat> {
        let pos: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.binary_search(v).expect("alignment superset"))
            .collect();
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut ne = vec![0u32; vars.len()];
                for (i, &x) in e.iter().enumerate() {
                    ne[pos[i]] = x;
                }
                (ne, c.clone())
            })
            .collect()
    }

    fn union_vars(a: &Poly, b: &Poly) -> Vec<Var> {
        let mut vars: Vec<Var> = a.vars.iter().chain(b.vars.iter()).cloned().collect();
        vars.sort();
        vars.dedup();
        vars
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let vars = Poly::union_vars(self, other);
        let mut terms = self.aligned_terms(&vars);
        for (e, c) in other.aligned_terms(&vars) {
            let entry = terms.entry(e).or_insert_with(Rat::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        let mut p = Poly { vars, terms };
        p.prune();
        p
    }

    pub fn neg(&self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let vars = Poly::union_vars(self, other);
        let a = self.aligned_terms(&vars);
        let b = other.aligned_terms(&vars);
        let mut terms: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        for (ea, ca) in &a {
            for (eb, cb) in &b {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let entry = terms.entry(e).or_insert_with(Rat::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        let mut p = Poly { vars, terms };
        p.prune();
        p
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self, v: &Var) -> Poly {
        let i = match self.vars.binary_search(v) {
            Err(_) => return Poly::zero(),
            Ok(i) => i,
        };
        let terms = self.terms.iter().filter_map(|(e, c)| {
            if e[i] == 0 {
                return None;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            Some((ne, c * Rat::from(BigInt::from(e[i]))))
        });
        Poly::from_terms(self.vars.clone(), terms.collect::<Vec<_>>())
    }

    /// Partial evaluation at rational coordinates.
    pub fn substitute(&self, point: &[(Var, Rat)]) -> Poly {
        let mut acc = Poly::zero();
        'term: for (e, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest: Vec<(Var, u32)> = Vec::new();
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if let Some((_, val)) = point.iter().find(|(v, _)| *v == self.vars[i]) {
                    let mut pw = Rat::one();
                    for _ in 0..x {
                        pw *= val;
                    }
                    coeff *= pw;
                    if coeff.is_zero() {
                        continue 'term;
                    }
                } else {
                    rest.push((self.vars[i].clone(), x));
                }
            }
            let mut term = Poly::constant(coeff);
            for (v, x) in rest {
                let mut m = BTreeMap::new();
                m.insert(vec![x], Rat::one());
                term = term.mul(&Poly { vars: vec![v], terms: m });
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Total evaluation; errors if a variable has no coordinate.
    pub fn eval(&self, point: &[(Var, Rat)]) -> Result<Rat, PolyError> {
        for v in &self.vars {
            if !point.iter().any(|(w, _)| w == v) {
                return Err(PolyError::MissingCoordinate(v.name().to_string()));
            }
        }
        let r = self.substitute(point);
        Ok(r.as_constant().expect("fully evaluated"))
    }

    /// Replaces `v` by the polynomial `rhs`.
    pub fn substitute_poly(&self, v: &Var, rhs: &Poly) -> Poly {
        if !self.contains_var(v) {
            return self.clone();
        }
        let coeffs = self.coeffs_in(v);
        // Horner evaluation in the target variable.
        let mut acc = Poly::zero();
        for c in coeffs.into_iter().rev() {
            acc = acc.mul(rhs).add(&c);
        }
        acc
    }

    /// Coefficients with respect to `v`, ascending by power. Index = power.
    pub fn coeffs_in(&self, v: &Var) -> Vec<Poly> {
        let d = self.degree(v);
        let mut out = vec![Poly::zero(); d + 1];
        let i = match self.vars.binary_search(v) {
            Err(_) => {
                out[0] = self.clone();
                return out;
            }
            Ok(i) => i,
        };
        for (e, c) in &self.terms {
            let pw = e[i] as usize;
            let mut ne = e.clone();
            ne[i] = 0;
            let part = Poly::from_terms(self.vars.clone(), vec![(ne, c.clone())]);
            out[pw] = out[pw].add(&part);
        }
        out
    }

    /// Rebuilds a polynomial from coefficients in `v` (ascending powers).
    pub fn from_coeffs(v: &Var, coeffs: &[Poly]) -> Poly {
        let xv = Poly::var(v);
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(&xv).add(c);
        }
        acc
    }

    pub fn leading_coeff(&self, v: &Var) -> Poly {
        self.coeffs_in(v).pop().unwrap_or_else(Poly::zero)
    }

    /// Gcd of the absolute values of all rational coefficients.
    pub fn rational_content(&self) -> Rat {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(&c.numer().abs());
            den = den.lcm(&c.denom().abs());
        }
        if num.is_zero() {
            Rat::one()
        } else {
            Rat::new(num, den)
        }
    }

    /// The lexicographically greatest term's coefficient (by exponent vector).
    pub fn lead_coeff_lex(&self) -> Rat {
        self.terms
            .iter()
            .next_back()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rat::zero)
    }

    /// Divides out the rational content and makes the lex-leading
    /// coefficient positive: the canonical representative up to a positive
    /// constant factor.
    pub fn normalized(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.rational_content();
        if self.lead_coeff_lex().is_negative() {
            c = -c;
        }
        self.scale(&(Rat::one() / c))
    }

    /// The exact square root when the polynomial is a perfect square over
    /// the rationals, found by peeling coefficients in the top variable.
    pub fn try_sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = self.as_constant() {
            if c.is_negative() {
                return None;
            }
            let n = c.numer().sqrt();
            let d = c.denom().sqrt();
            return (&n * &n == *c.numer() && &d * &d == *c.denom())
                .then(|| Poly::constant(Rat::new(n, d)));
        }
        let v = self.vars().last().unwrap().clone();
        let d = self.degree(&v);
        if d % 2 != 0 {
            return None;
        }
        let h = (d / 2) as u32;
        let coeffs = self.coeffs_in(&v);
        let lead = coeffs[d].try_sqrt()?;
        let two_lead = lead.scale(&Rat::from(BigInt::from(2)));
        let mut s = lead.mul(&Poly::var(&v).pow(h));
        for k in (0..h).rev() {
            let rem = self.sub(&s.mul(&s));
            if rem.is_zero() {
                break;
            }
            let rc = rem.coeffs_in(&v);
            let c = rc.get((h + k) as usize).cloned().unwrap_or_else(Poly::zero);
            if c.is_zero() {
                continue;
            }
            let q = c.try_exact_div(&two_lead)?;
            s = s.add(&q.mul(&Poly::var(&v).pow(k)));
        }
        self.sub(&s.mul(&s)).is_zero().then_some(s)
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn try_exact_div(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&(Rat::one() / c)));
        }
        let vars = Poly::union_vars(self, d);
        let mut r_terms = self.aligned_terms(&vars);
        let d_terms = d.aligned_terms(&vars);
        let (de, dc) = d_terms.iter().next_back().unwrap();
        let mut q: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        while let Some((re, rc)) = r_terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            let mut qe = vec![0u32; vars.len()];
            for i in 0..vars.len() {
                if re[i] < de[i] {
                    return None;
                }
                qe[i] = re[i] - de[i];
            }
            let qc = rc / dc;
            // subtract qc * x^qe * d from remainder
            for (e, c) in &d_terms {
                let ne: Vec<u32> = e.iter().zip(&qe).map(|(a, b)| a + b).collect();
                let entry = r_terms.entry(ne.clone()).or_insert_with(Rat::zero);
                *entry -= &qc * c;
                if r_terms[&ne].is_zero() {
                    r_terms.remove(&ne);
                }
            }
            q.insert(qe, qc);
        }
        let mut p = Poly { vars, terms: q };
        p.prune();
        Some(p)
    }

    pub fn exact_div(&self, d: &Poly) -> Poly {
        self.try_exact_div(d).expect("exact division failed")
    }

    /// Highest variable present, in the given ordering (last = highest), if any.
    pub fn level_in(&self, order: &[Var]) -> Option<usize> {
        order
            .iter()
            .enumerate()
            .rev()
            .find(|(_, v)| self.contains_var(v))
            .map(|(i, _)| i + 1)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let ac = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let monomial: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| {
                    if x == 1 {
                        format!("{}", self.vars[i])
                    } else {
                        format!("{}^{}", self.vars[i], x)
                    }
                })
                .collect();
            if monomial.is_empty() {
                write!(f, "{}", ac)?;
            } else {
                if !ac.is_one() {
                    write!(f, "{}*", ac)?;
                }
                write!(f, "{}", monomial.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    #[test]
    fn add_cancellation() {
        let x = Poly::var(&v("x"));
        let p = x.mul(&x).sub(&Poly::one()); // x^2 - 1
        let q = p.add(&Poly::one());
        assert_eq!(q, x.mul(&x));
    }

    #[test]
    fn derivative_power_rule() {
        // (y+x^2)(y-x^2) = y^2 - x^4; d/dx = -4x^3
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let p = y.add(&x.pow(2)).mul(&y.sub(&x.pow(2)));
        let d = p.derivative(&v("x"));
        assert_eq!(d, x.pow(3).scale(&rat_int(-4)));
    }

    #[test]
    fn substitute_at_origin() {
        let p = Poly::var(&v("v1"))
            .mul(&Poly::var(&v("x")))
            .add(&Poly::var(&v("v2")).mul(&Poly::var(&v("y"))));
        let q = p.substitute(&[(v("x"), rat_int(0)), (v("y"), rat_int(0))]);
        assert!(q.is_zero());
    }

    #[test]
    fn linearity_of_derivative_and_substitute() {
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let p = x.pow(3).add(&y.mul(&x)).sub(&Poly::int(7));
        let q = y.pow(2).sub(&x.scale(&rat(1, 2)));
        let dsum = p.add(&q).derivative(&v("x"));
        let sumd = p.derivative(&v("x")).add(&q.derivative(&v("x")));
        assert_eq!(dsum, sumd);
    }

    #[test]
    fn exact_division_roundtrip() {
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let a = x.add(&y).mul(&x.sub(&y)).mul(&x.pow(2).add(&Poly::one()));
        let d = x.add(&y);
        let q = a.try_exact_div(&d).unwrap();
        assert_eq!(q.mul(&d), a);
        assert!(a.add(&Poly::one()).try_exact_div(&d).is_none());
    }

    #[test]
    fn normalized_removes_content() {
        let x = Poly::var(&v("x"));
        let p = x.pow(2).scale(&rat_int(-4)).add(&Poly::int(8)); // -4x^2+8
        let n = p.normalized();
        // content 4, lex-leading term is x^2 with negative sign -> flip
        assert_eq!(n, x.pow(2).sub(&Poly::int(2)));
    }
}
