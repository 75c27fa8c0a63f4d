//! Real algebraic numbers as (square-free defining polynomial, isolating
//! interval) pairs, and exact sign evaluation of multivariate polynomials at
//! points with algebraic coordinates.
//!
//! Signs are decided by rational interval arithmetic with on-demand
//! refinement; when an interval straddles zero persistently, the value is
//! identified exactly as a root of an iterated-resultant eliminant, which
//! certifies zero or a definite sign.

use super::unipoly::{IsolatedRoot, UniPoly};
use super::{gcd as poly_gcd, isolate_real_roots_uni, resultant, sturm_root_count};
use super::{Poly, PolyError, Rat, Var};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

/// Closed rational interval used for range arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn point(r: &Rat) -> Self {
        Interval { lo: r.clone(), hi: r.clone() }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let cands = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, c: &Rat) -> Interval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn pow(&self, n: u32) -> Interval {
        let mut acc = Interval::point(&Rat::from(BigInt::from(1)));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn sign(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }
}

/// A real algebraic number.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    rational: Option<Rat>,
    /// Square-free, primitive integer coefficients; exactly one real root in
    /// the open interval (lo, hi); endpoints are not roots.
    defining: UniPoly,
    lo: Rat,
    hi: Rat,
}

impl AlgebraicNumber {
    pub fn from_rat(r: Rat) -> Self {
        let defining = UniPoly::new(vec![-r.clone(), Rat::from(BigInt::from(1))]).primitive_int();
        let lo = &r - Rat::from(BigInt::from(1));
        let hi = &r + Rat::from(BigInt::from(1));
        AlgebraicNumber { rational: Some(r), defining, lo, hi }
    }

    pub fn from_int(n: i64) -> Self {
        AlgebraicNumber::from_rat(Rat::from(BigInt::from(n)))
    }

    fn from_isolated(p: &UniPoly, root: IsolatedRoot) -> Self {
        match root {
            IsolatedRoot::Rational(r) => AlgebraicNumber::from_rat(r),
            IsolatedRoot::Interval(lo, hi) => AlgebraicNumber {
                rational: None,
                defining: p.clone(),
                lo,
                hi,
            },
        }
    }

    /// All distinct real roots of a univariate polynomial, ascending.
    pub fn roots_of(p: &UniPoly) -> Result<Vec<AlgebraicNumber>, super::PolyError> {
        let sf = p.squarefree().primitive_int();
        let roots = isolate_real_roots_uni(&sf)?;
        Ok(roots
            .into_iter()
            .map(|r| AlgebraicNumber::from_isolated(&sf, r))
            .collect())
    }

    pub fn is_rational(&self) -> bool {
        self.rational.is_some()
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        self.rational.as_ref()
    }

    pub fn defining_poly(&self) -> &UniPoly {
        &self.defining
    }

    pub fn interval(&self) -> Interval {
        match &self.rational {
            Some(r) => Interval::point(r),
            None => Interval { lo: self.lo.clone(), hi: self.hi.clone() },
        }
    }

    /// Halves the isolating interval; identifying the same root throughout.
    pub fn refine(&mut self) {
        if self.rational.is_some() {
            return;
        }
        let two = Rat::from(BigInt::from(2));
        let m = (&self.lo + &self.hi) / &two;
        match self.defining.sign_at(&m) {
            0 => {
                // interval stays isolating for the (now exactly known) root
                self.rational = Some(m);
            }
            s => {
                // the root lies on the side where the sign differs from lo's
                if self.defining.sign_at(&self.lo) == s {
                    self.lo = m;
                } else {
                    self.hi = m;
                }
            }
        }
    }

    pub fn refine_below(&mut self, width: &Rat) {
        while self.rational.is_none() && &(&self.hi - &self.lo) > width {
            self.refine();
        }
    }

    /// Sign of the number itself.
    pub fn sign(&self) -> i8 {
        let rat_sign = |r: &Rat| {
            if r.is_zero() {
                0
            } else if r.is_positive() {
                1
            } else {
                -1
            }
        };
        if let Some(r) = &self.rational {
            return rat_sign(r);
        }
        // root is strictly inside (lo, hi)
        if !self.lo.is_negative() {
            return 1;
        }
        if !self.hi.is_positive() {
            return -1;
        }
        // 0 strictly inside: by isolation uniqueness the number is 0 iff 0
        // is a root of the defining polynomial
        if self.defining.sign_at(&Rat::zero()) == 0 {
            return 0;
        }
        let mut me = self.clone();
        loop {
            me.refine();
            if let Some(r) = &me.rational {
                return rat_sign(r);
            }
            if !me.lo.is_negative() {
                return 1;
            }
            if !me.hi.is_positive() {
                return -1;
            }
        }
    }

    pub fn equal(&self, other: &AlgebraicNumber) -> bool {
        match (&self.rational, &other.rational) {
            (Some(a), Some(b)) => a == b,
            (Some(r), None) => other.contains_rational_root(r),
            (None, Some(r)) => self.contains_rational_root(r),
            (None, None) => {
                let mut a = self.clone();
                let mut b = other.clone();
                let g = a.defining.gcd(&b.defining);
                loop {
                    match (&a.rational, &b.rational) {
                        (Some(x), Some(y)) => return x == y,
                        (Some(x), None) => return b.contains_rational_root(x),
                        (None, Some(y)) => return a.contains_rational_root(y),
                        (None, None) => {}
                    }
                    if a.hi <= b.lo || b.hi <= a.lo {
                        return false;
                    }
                    if g.degree() >= 1 {
                        let lo = a.lo.clone().max(b.lo.clone());
                        let hi = a.hi.clone().min(b.hi.clone());
                        if lo < hi
                            && sturm_root_count(&a.defining, &lo, &hi) == 1
                            && sturm_root_count(&b.defining, &lo, &hi) == 1
                            && sturm_root_count(&g, &lo, &hi) == 1
                        {
                            return true;
                        }
                    }
                    a.refine();
                    b.refine();
                }
            }
        }
    }

    fn contains_rational_root(&self, r: &Rat) -> bool {
        if let Some(s) = &self.rational {
            return s == r;
        }
        self.defining.sign_at(r) == 0 && &self.lo < r && r < &self.hi
    }

    pub fn cmp_alg(&self, other: &AlgebraicNumber) -> Ordering {
        if self.equal(other) {
            return Ordering::Equal;
        }
        let mut a = self.clone();
        let mut b = other.clone();
        loop {
            let (alo, ahi) = a.bounds();
            let (blo, bhi) = b.bounds();
            if ahi <= blo {
                return Ordering::Less;
            }
            if bhi <= alo {
                return Ordering::Greater;
            }
            a.refine_or_tighten();
            b.refine_or_tighten();
        }
    }

    fn bounds(&self) -> (Rat, Rat) {
        match &self.rational {
            Some(r) => (r.clone(), r.clone()),
            None => (self.lo.clone(), self.hi.clone()),
        }
    }

    fn refine_or_tighten(&mut self) {
        self.refine();
    }

    /// Approximate value for display/debugging only.
    pub fn approx(&self, width_exp: u32) -> Rat {
        let mut me = self.clone();
        let width = Rat::new(BigInt::from(1), BigInt::from(2).pow(width_exp));
        me.refine_below(&width);
        match &me.rational {
            Some(r) => r.clone(),
            None => (&me.lo + &me.hi) / Rat::from(BigInt::from(2)),
        }
    }
}

/// Sample point: coordinates, one per lifted variable.
#[derive(Clone, Debug, Default)]
pub struct SamplePoint {
    pub coords: Vec<(Var, AlgebraicNumber)>,
}

impl SamplePoint {
    pub fn new() -> Self {
        SamplePoint { coords: Vec::new() }
    }

    pub fn extended(&self, v: Var, a: AlgebraicNumber) -> SamplePoint {
        let mut coords = self.coords.clone();
        coords.push((v, a));
        SamplePoint { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// All-rational coordinate view, if available.
    pub fn as_rational(&self) -> Option<Vec<(Var, Rat)>> {
        self.coords
            .iter()
            .map(|(v, a)| a.as_rat().map(|r| (v.clone(), r.clone())))
            .collect()
    }
}

fn split_point(
    p: &Poly,
    point: &[(Var, AlgebraicNumber)],
) -> (Vec<(Var, Rat)>, Vec<(Var, AlgebraicNumber)>) {
    let mut rational = Vec::new();
    let mut algebraic = Vec::new();
    for (v, a) in point {
        if !p.contains_var(v) {
            continue;
        }
        match a.as_rat() {
            Some(r) => rational.push((v.clone(), r.clone())),
            None => algebraic.push((v.clone(), a.clone())),
        }
    }
    (rational, algebraic)
}

pub fn interval_eval(p: &Poly, coords: &[(Var, AlgebraicNumber)]) -> Interval {
    let mut acc = Interval::point(&Rat::zero());
    for (e, c) in p.terms() {
        let mut term = Interval::point(&Rat::from(BigInt::from(1)));
        for (i, &x) in e.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let var = &p.vars()[i];
            let iv = coords
                .iter()
                .find(|(v, _)| v == var)
                .map(|(_, a)| a.interval())
                .expect("coordinate present");
            term = term.mul(&iv.pow(x));
        }
        acc = acc.add(&term.scale(c));
    }
    acc
}

/// Eliminates every algebraic coordinate variable from `g` by iterated
/// resultants against the coordinates' defining polynomials.
fn eliminate_coords(mut g: Poly, coords: &[(Var, AlgebraicNumber)]) -> Result<Poly, PolyError> {
    for (v, a) in coords {
        if !g.contains_var(v) {
            continue;
        }
        let d = a.defining_poly().to_poly(v);
        g = resultant(&d, &g, v)?;
    }
    Ok(g)
}

/// Exact sign of `p` at a point with real-algebraic coordinates.
pub fn sign_at(p: &Poly, point: &[(Var, AlgebraicNumber)]) -> Result<i8, PolyError> {
    let (rational, algebraic) = split_point(p, point);
    let q = p.substitute(&rational);
    if let Some(c) = q.as_constant() {
        return Ok(if c.is_zero() {
            0
        } else if c.is_positive() {
            1
        } else {
            -1
        });
    }
    let mut coords: Vec<(Var, AlgebraicNumber)> = algebraic;
    // fast path: a few rounds of interval refinement
    for _ in 0..6 {
        if let Some(s) = interval_eval(&q, &coords).sign() {
            return Ok(s);
        }
        for (_, a) in coords.iter_mut() {
            a.refine();
        }
    }
    // exact identification: the value is a root of the eliminant
    sign_via_eliminant(&q, &mut coords)
}

fn sign_via_eliminant(q: &Poly, coords: &mut Vec<(Var, AlgebraicNumber)>) -> Result<i8, PolyError> {
    let t = Var::new("#val");
    let g = Poly::var(&t).sub(q);
    let r = eliminate_coords(g, coords)?;
    let r_uni = UniPoly::from_poly(&r, &t);
    assert!(!r_uni.is_zero(), "eliminant vanished identically");
    let sf = r_uni.squarefree().primitive_int();
    let mut roots: Vec<AlgebraicNumber> =
        isolate_real_roots_uni(&sf)
            .expect("nonzero eliminant")
            .into_iter()
            .map(|rt| AlgebraicNumber::from_isolated(&sf, rt))
            .collect();
    loop {
        if super::budget::expired() {
            return Err(PolyError::Budget);
        }
        let iv = interval_eval(q, coords);
        if let Some(s) = iv.sign() {
            return Ok(s);
        }
        let overlapping: Vec<usize> = roots
            .iter()
            .enumerate()
            .filter(|(_, rt)| {
                let ri = rt.interval();
                !(ri.hi < iv.lo || iv.hi < ri.lo)
            })
            .map(|(i, _)| i)
            .collect();
        if overlapping.len() == 1 {
            // the value is identified as this root of the eliminant
            return Ok(roots[overlapping[0]].sign());
        }
        for (_, a) in coords.iter_mut() {
            a.refine();
        }
        for i in overlapping {
            roots[i].refine();
        }
    }
}

/// Result of substituting a sample point into level polynomials.
pub enum RootsAt {
    /// Every coefficient vanishes at the point.
    IdenticallyZero,
    Roots(Vec<AlgebraicNumber>),
}

/// Distinct real roots (ascending) of `p` seen as univariate in `var` after
/// substituting the algebraic/rational sample point.
pub fn real_roots_at(
    p: &Poly,
    var: &Var,
    point: &[(Var, AlgebraicNumber)],
) -> Result<RootsAt, PolyError> {
    let (rational, algebraic) = split_point(p, point);
    let p1 = p.substitute(&rational);
    if p1.is_zero() {
        return Ok(RootsAt::IdenticallyZero);
    }
    // trim coefficients that vanish exactly at the point
    let coeffs = p1.coeffs_in(var);
    let mut top: Option<usize> = None;
    for (i, c) in coeffs.iter().enumerate().rev() {
        if sign_at(c, &algebraic)? != 0 {
            top = Some(i);
            break;
        }
    }
    let Some(top) = top else {
        return Ok(RootsAt::IdenticallyZero);
    };
    if top == 0 {
        return Ok(RootsAt::Roots(vec![]));
    }
    let mut p2 = Poly::from_coeffs(var, &coeffs[..=top]);
    if algebraic.is_empty() {
        let uni = UniPoly::from_poly(&p2, var);
        let roots = AlgebraicNumber::roots_of(&uni)?;
        return Ok(RootsAt::Roots(roots));
    }
    // candidate roots from the eliminant, then exact membership filtering
    let mut r;
    loop {
        r = eliminate_coords(p2.clone(), &algebraic)?;
        if !r.is_zero() {
            break;
        }
        // a defining polynomial shares a factor with p2; that factor cannot
        // vanish at the point (the trim above would have caught it), so it
        // can be divided out without changing the roots over the point
        let mut stripped = false;
        for (w, a) in &algebraic {
            let d = a.defining_poly().to_poly(w);
            let g = poly_gcd(&p2, &d);
            if g.as_constant().is_none() {
                p2 = p2.exact_div(&g);
                stripped = true;
                break;
            }
        }
        assert!(stripped, "zero eliminant without shared factor");
    }
    let r_uni = UniPoly::from_poly(&r, var);
    let sf = r_uni.squarefree().primitive_int();
    let candidates = isolate_real_roots_uni(&sf)?;
    let mut out = Vec::new();
    for cand in candidates {
        let gamma = AlgebraicNumber::from_isolated(&sf, cand);
        let mut ext = algebraic.clone();
        ext.push((var.clone(), gamma.clone()));
        if sign_at(&p2, &ext)? == 0 {
            out.push(gamma);
        }
    }
    Ok(RootsAt::Roots(out))
}

/// True iff all coefficients of `p` in `var` vanish at the point.
pub fn vanishes_identically(
    p: &Poly,
    var: &Var,
    point: &[(Var, AlgebraicNumber)],
) -> Result<bool, PolyError> {
    Ok(matches!(real_roots_at(p, var, point)?, RootsAt::IdenticallyZero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn sqrt2() -> AlgebraicNumber {
        let p = UniPoly::new(vec![rat_int(-2), rat_int(0), rat_int(1)]);
        AlgebraicNumber::roots_of(&p).unwrap().pop().unwrap()
    }

    #[test]
    fn sign_at_defining_polynomial_is_zero() {
        let x = Poly::var(&v("x"));
        let p = x.pow(2).sub(&Poly::int(2));
        let s2 = sqrt2();
        assert_eq!(sign_at(&p, &[(v("x"), s2)]).unwrap(), 0);
    }

    #[test]
    fn sqrt2_greater_than_one() {
        let x = Poly::var(&v("x"));
        let p = x.sub(&Poly::one());
        assert_eq!(sign_at(&p, &[(v("x"), sqrt2())]).unwrap(), 1);
    }

    #[test]
    fn rational_point_inside_disc() {
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let p = x.pow(2).add(&y.pow(2)).sub(&Poly::one());
        let pt = [
            (v("x"), AlgebraicNumber::from_rat(rat(1, 2))),
            (v("y"), AlgebraicNumber::from_rat(rat(1, 2))),
        ];
        assert_eq!(sign_at(&p, &pt).unwrap(), -1);
    }

    #[test]
    fn sign_at_agrees_with_rational_evaluation() {
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let p = x.pow(3).sub(&y.mul(&x)).add(&Poly::int(1));
        for (a, b) in [(0i64, 0i64), (1, 2), (-3, 5), (7, -2)] {
            let pt = [
                (v("x"), AlgebraicNumber::from_int(a)),
                (v("y"), AlgebraicNumber::from_int(b)),
            ];
            let val = p
                .eval(&[(v("x"), rat_int(a)), (v("y"), rat_int(b))])
                .unwrap();
            let expect = if val.is_zero() {
                0
            } else if val > rat_int(0) {
                1
            } else {
                -1
            };
            assert_eq!(sign_at(&p, &pt).unwrap(), expect);
        }
    }

    #[test]
    fn equality_by_gcd_and_overlap() {
        let a = sqrt2();
        // same number from a different defining polynomial: (x^2-2)(x-5)
        let p = UniPoly::new(vec![
            rat_int(10),
            rat_int(-2),
            rat_int(-5),
            rat_int(1),
        ]);
        let roots = AlgebraicNumber::roots_of(&p).unwrap();
        let b = roots
            .iter()
            .find(|r| r.sign() > 0 && r.interval().lo < rat_int(2))
            .unwrap();
        assert!(a.equal(b));
        let five = AlgebraicNumber::from_int(5);
        assert!(!a.equal(&five));
        assert_eq!(a.cmp_alg(&five), Ordering::Less);
    }

    #[test]
    fn roots_at_algebraic_base() {
        // roots of y^2 - x at x = sqrt(2): y = ±2^(1/4)
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let p = y.pow(2).sub(&x);
        let pt = [(v("x"), sqrt2())];
        match real_roots_at(&p, &v("y"), &pt).unwrap() {
            RootsAt::Roots(roots) => {
                assert_eq!(roots.len(), 2);
                assert_eq!(roots[0].sign(), -1);
                assert_eq!(roots[1].sign(), 1);
                // check fourth power is 2
                let q = y.pow(4).sub(&Poly::int(2));
                assert_eq!(sign_at(&q, &[(v("y"), roots[1].clone())]).unwrap(), 0);
            }
            RootsAt::IdenticallyZero => panic!("not identically zero"),
        }
    }

    #[test]
    fn identically_zero_detection() {
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let p = x.pow(2).sub(&Poly::int(2)).mul(&y); // (x^2-2) y
        let pt = [(v("x"), sqrt2())];
        assert!(vanishes_identically(&p, &v("y"), &pt).unwrap());
    }
}
