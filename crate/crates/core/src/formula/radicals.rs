//! Extended arithmetic expressions with a single square root and a
//! polynomial denominator, and their reduction to pure sign conditions.
//!
//! Every expression is kept in the normal form (a + b*sqrt(r)) / den with
//! polynomial a, b, r, den. Comparisons against zero are turned into
//! radical-free formulas by squaring with explicit sign case splits.

use super::{Formula, Rel};
use crate::poly::{Poly, Rat, Var};
use num_traits::{Signed, Zero};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RadicalError {
    #[error("expressions mix two distinct radicands")]
    MixedRadicals,
    #[error("nested radicals are not supported")]
    NestedRadical,
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("sqrt of a quotient with non-constant denominator is not supported")]
    VariableDenominatorSqrt,
}

/// (a + b*sqrt(rad)) / den. `rad` is None iff `b` is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtExpr {
    pub a: Poly,
    pub b: Poly,
    pub rad: Option<Poly>,
    pub den: Poly,
}

impl ExtExpr {
    fn rational_part(a: Poly, den: Poly) -> ExtExpr {
        ExtExpr { a, b: Poly::zero(), rad: None, den }
    }

    pub fn int(n: num_bigint::BigInt) -> ExtExpr {
        ExtExpr::rational_part(Poly::constant(Rat::from(n)), Poly::one())
    }

    pub fn var(v: Var) -> ExtExpr {
        ExtExpr::rational_part(Poly::var(&v), Poly::one())
    }

    pub fn from_poly(p: Poly) -> ExtExpr {
        ExtExpr::rational_part(p, Poly::one())
    }

    fn normalize(mut self) -> ExtExpr {
        if self.b.is_zero() {
            self.rad = None;
        } else if let Some(r) = &self.rad {
            if r.is_zero() {
                self.b = Poly::zero();
                self.rad = None;
            }
        }
        self
    }

    /// Common radicand of two operands, if compatible.
    fn join_rad(&self, other: &ExtExpr) -> Result<Option<Poly>, RadicalError> {
        match (&self.rad, &other.rad) {
            (None, r) | (r, None) => Ok(r.clone()),
            (Some(r1), Some(r2)) => {
                if r1 == r2 {
                    Ok(Some(r1.clone()))
                } else {
                    Err(RadicalError::MixedRadicals)
                }
            }
        }
    }

    pub fn neg(&self) -> ExtExpr {
        ExtExpr {
            a: self.a.neg(),
            b: self.b.neg(),
            rad: self.rad.clone(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &ExtExpr) -> Result<ExtExpr, RadicalError> {
        let rad = self.join_rad(other)?;
        Ok(ExtExpr {
            a: self.a.mul(&other.den).add(&other.a.mul(&self.den)),
            b: self.b.mul(&other.den).add(&other.b.mul(&self.den)),
            rad,
            den: self.den.mul(&other.den),
        }
        .normalize())
    }

    pub fn sub(&self, other: &ExtExpr) -> Result<ExtExpr, RadicalError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ExtExpr) -> Result<ExtExpr, RadicalError> {
        let rad = self.join_rad(other)?;
        let cross = self.a.mul(&other.b).add(&self.b.mul(&other.a));
        let mut aa = self.a.mul(&other.a);
        if let Some(r) = &rad {
            aa = aa.add(&self.b.mul(&other.b).mul(r));
        }
        Ok(ExtExpr {
            a: aa,
            b: cross,
            rad,
            den: self.den.mul(&other.den),
        }
        .normalize())
    }

    /// Division by rationalizing: 1 / ((a + b*sqrt(r))/d) = d*(a - b*sqrt(r)) / (a^2 - b^2 r).
    pub fn div(&self, other: &ExtExpr) -> Result<ExtExpr, RadicalError> {
        let mut norm = other.a.mul(&other.a);
        if let Some(r) = &other.rad {
            norm = norm.sub(&other.b.mul(&other.b).mul(r));
        }
        if norm.is_zero() {
            // a^2 == b^2 r identically: degenerate or genuinely zero divisor.
            return Err(RadicalError::DivisionByZero);
        }
        let inv = ExtExpr {
            a: other.den.mul(&other.a),
            b: other.den.mul(&other.b).neg(),
            rad: other.rad.clone(),
            den: norm,
        };
        // join_rad must succeed or the whole product is rejected.
        self.join_rad(&inv)?;
        self.mul(&inv)
    }

    pub fn pow(&self, n: u32) -> Result<ExtExpr, RadicalError> {
        let mut acc = ExtExpr::from_poly(Poly::one());
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn sqrt(&self) -> Result<ExtExpr, RadicalError> {
        if self.rad.is_some() {
            return Err(RadicalError::NestedRadical);
        }
        let Some(c) = self.den.as_constant() else {
            return Err(RadicalError::VariableDenominatorSqrt);
        };
        if c.is_zero() {
            return Err(RadicalError::DivisionByZero);
        }
        // sqrt(a/c) = sqrt(a*c) / |c|
        let radicand = self.a.scale(&c);
        if let Some(k) = radicand.as_constant() {
            // Perfect-square rational constants stay radical-free.
            if let Some(root) = exact_sqrt(&k) {
                return Ok(ExtExpr::rational_part(
                    Poly::constant(root),
                    Poly::constant(c.abs()),
                ));
            }
        }
        Ok(ExtExpr {
            a: Poly::zero(),
            b: Poly::one(),
            rad: Some(radicand),
            den: Poly::constant(c.abs()),
        })
    }
}

fn exact_sqrt(q: &Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// `(a + b*sqrt(r))/den  rel  0` as a radical-free formula. Points where a
/// radicand is negative or the denominator vanishes never satisfy the atom.
pub fn clear_radicals_ext(e: &ExtExpr, rel: Rel) -> Result<Formula, RadicalError> {
    let numerator = |rel: Rel| numerator_condition(&e.a, &e.b, e.rad.as_ref(), rel);

    let body = match e.den.as_constant() {
        Some(c) => {
            if c.is_zero() {
                return Err(RadicalError::DivisionByZero);
            }
            if c.is_positive() {
                numerator(rel)
            } else {
                numerator(rel.flipped())
            }
        }
        None => Formula::or(vec![
            Formula::and(vec![Formula::atom(e.den.clone(), Rel::Gt), numerator(rel)]),
            Formula::and(vec![
                Formula::atom(e.den.clone(), Rel::Lt),
                numerator(rel.flipped()),
            ]),
        ]),
    };

    match (&e.rad, e.b.is_zero()) {
        (Some(r), false) => Ok(Formula::and(vec![Formula::atom(r.clone(), Rel::Ge), body])),
        _ => Ok(body),
    }
}

/// `a + b*sqrt(r)  rel  0`, assuming r >= 0.
fn numerator_condition(a: &Poly, b: &Poly, rad: Option<&Poly>, rel: Rel) -> Formula {
    let Some(r) = rad else {
        return Formula::atom(a.clone(), rel);
    };
    if b.is_zero() {
        return Formula::atom(a.clone(), rel);
    }
    let a2 = a.mul(a);
    let b2r = b.mul(b).mul(r);
    let eq = || {
        // a = -b*sqrt(r): squares agree and the signs are opposed.
        Formula::and(vec![
            Formula::atom(a2.sub(&b2r), Rel::Eq),
            Formula::atom(a.mul(b), Rel::Le),
        ])
    };
    // a + b*sqrt(r) > 0 with sqrt(r) >= 0.
    let gt = |a: &Poly, b: &Poly| {
        let a2 = a.mul(a);
        let b2r = b.mul(b).mul(r);
        Formula::or(vec![
            Formula::and(vec![
                Formula::atom(b.clone(), Rel::Ge),
                Formula::or(vec![
                    Formula::atom(a.clone(), Rel::Gt),
                    Formula::atom(b2r.sub(&a2), Rel::Gt),
                ]),
            ]),
            Formula::and(vec![
                Formula::atom(b.clone(), Rel::Lt),
                Formula::atom(a.clone(), Rel::Gt),
                Formula::atom(a2.sub(&b2r), Rel::Gt),
            ]),
        ])
    };
    match rel {
        Rel::Eq => eq(),
        Rel::Ne => Formula::not(eq()),
        Rel::Gt => gt(a, b),
        Rel::Lt => gt(&a.neg(), &b.neg()),
        Rel::Ge => Formula::not(gt(&a.neg(), &b.neg())),
        Rel::Le => Formula::not(gt(a, b)),
    }
}
