//! Univariate polynomials over Q: the base-phase kernel for real root
//! isolation (Descartes/bisection) with Sturm sequences as the independent
//! cross-check.

use super::{Poly, PolyError, Rat, Var};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense univariate polynomial, coefficients ascending by power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    pub coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn from_poly(p: &Poly, var: &Var) -> Self {
        let coeffs = p
            .coeffs_in(var)
            .into_iter()
            .map(|c| c.as_constant().expect("univariate polynomial"))
            .collect();
        UniPoly::new(coeffs)
    }

    pub fn to_poly(&self, var: &Var) -> Poly {
        let parts: Vec<Poly> = self.coeffs.iter().map(|c| Poly::constant(c.clone())).collect();
        Poly::from_coeffs(var, &parts)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sign_at(&self, x: &Rat) -> i8 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn derivative(&self) -> UniPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rat::from(BigInt::from(i)))
            .collect();
        UniPoly::new(coeffs)
    }

    fn neg(&self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    /// Euclidean remainder over Q.
    fn rem(&self, d: &UniPoly) -> UniPoly {
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let lc = d.coeffs.last().unwrap().clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let q = r[k].clone() / lc.clone();
            if !q.is_zero() {
                for (i, c) in d.coeffs.iter().enumerate() {
                    let idx = k - dd + i;
                    r[idx] = r[idx].clone() - &q * c;
                }
            }
            r.pop();
        }
        UniPoly::new(r)
    }

    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let lc = self.coeffs.last().unwrap().clone();
        UniPoly::new(self.coeffs.iter().map(|c| c / lc.clone()).collect())
    }

    pub fn squarefree(&self) -> UniPoly {
        let d = self.derivative();
        if d.is_zero() {
            return self.monic();
        }
        let g = self.gcd(&d);
        if g.degree() == 0 {
            return self.monic();
        }
        self.div_exact(&g).monic()
    }

    fn div_exact(&self, d: &UniPoly) -> UniPoly {
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let lc = d.coeffs.last().unwrap().clone();
        let mut q = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while r.len() > dd {
            let k = r.len() - 1;
            let c = r[k].clone() / lc.clone();
            q[k - dd] = c.clone();
            for (i, dc) in d.coeffs.iter().enumerate() {
                let idx = k - dd + i;
                r[idx] = r[idx].clone() - &c * dc;
            }
            r.pop();
        }
        debug_assert!(UniPoly::new(r).is_zero(), "division was not exact");
        UniPoly::new(q)
    }

    /// Primitive integer-coefficient scaling (positive leading coefficient).
    pub fn primitive_int(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let mut den = BigInt::one();
        for c in &self.coeffs {
            den = den.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        UniPoly::new(ints.iter().map(|c| Rat::from(c / &g)).collect())
    }

    /// Cauchy bound: all real roots lie in (-B, B).
    pub fn root_bound(&self) -> Rat {
        let lc = self.coeffs.last().unwrap().abs();
        let mx = self
            .coeffs
            .iter()
            .take(self.coeffs.len() - 1)
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero);
        Rat::one() + mx / lc
    }
}

/// Sign variations in a coefficient sequence (zeros skipped).
pub fn sign_variations(coeffs: &[Rat]) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        let s = if c.is_positive() { 1 } else { -1 };
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Descartes bound on the number of roots of `p` in the open interval (a, b):
/// sign variations of (1+x)^n * p((a+bx)/(1+x)).
pub fn descartes_sign_variations(p: &UniPoly, a: &Rat, b: &Rat) -> usize {
    let n = p.degree();
    // q(x) = sum_i c_i (a+bx)^i (1+x)^(n-i)
    let mut acc = vec![Rat::zero(); n + 1];
    // precompute powers
    let lin1 = vec![a.clone(), b.clone()]; // a + b x
    let lin2 = vec![Rat::one(), Rat::one()]; // 1 + x
    let mut pow1: Vec<Vec<Rat>> = vec![vec![Rat::one()]];
    let mut pow2: Vec<Vec<Rat>> = vec![vec![Rat::one()]];
    for i in 1..=n {
        pow1.push(mul_dense(&pow1[i - 1], &lin1));
        pow2.push(mul_dense(&pow2[i - 1], &lin2));
    }
    for (i, c) in p.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let prod = mul_dense(&pow1[i], &pow2[n - i]);
        for (j, t) in prod.iter().enumerate() {
            acc[j] += c * t;
        }
    }
    sign_variations(&acc)
}

fn mul_dense(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// A root of a square-free univariate polynomial: either an exact rational
/// or an open isolating interval whose endpoints are not roots.
#[derive(Clone, Debug)]
pub enum IsolatedRoot {
    Rational(Rat),
    Interval(Rat, Rat),
}

/// Isolates all distinct real roots of `p` (square-free preprocessing is
/// applied internally), sorted increasingly. Interval endpoints are never
/// roots of `p`.
///
/// Collins–Akritas bisection over integers: roots are mapped into (0, 1),
/// each node carries the transformed integer coefficient vector, and the
/// two half-interval polynomials come from a dyadic rescale and a Taylor
/// shift by one — no rational arithmetic (hence no gcd-normalization) on
/// the hot path.
pub fn isolate_real_roots_uni(p: &UniPoly) -> Result<Vec<IsolatedRoot>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if p.degree() == 0 {
        return Ok(vec![]);
    }
    let sf = p.squarefree().primitive_int();
    if sf.degree() == 0 {
        return Ok(vec![]);
    }
    let ints: Vec<BigInt> = sf.coeffs.iter().map(|c| c.numer().clone()).collect();

    // power-of-two Cauchy bound: |root| < 2^e
    let max_bits = ints.iter().map(|c| c.bits()).max().unwrap();
    let lc_bits = ints.last().unwrap().bits();
    let e = (max_bits + 2).saturating_sub(lc_bits).max(1);
    let bound = BigInt::one() << e;

    // q(t) = p(2B t - B): roots of p in (-B, B) become roots of q in (0, 1)
    let n = ints.len() - 1;
    let two_b = &bound << 1;
    let mut q: Vec<BigInt> = vec![ints[n].clone()];
    for c in ints.iter().rev().skip(1) {
        q = mul_linear_int(&q, &-&bound, &two_b);
        q[0] += c;
    }
    debug_assert!(!q[0].is_zero(), "Cauchy bound endpoint is a root");

    // node (c, k): subinterval (c/2^k, (c+1)/2^k) of (0, 1)
    let mut stack: Vec<(BigInt, u64, Vec<BigInt>)> = vec![(BigInt::zero(), 0, q)];
    let mut exact: Vec<Rat> = Vec::new();
    let mut intervals: Vec<(Rat, Rat)> = Vec::new();
    while let Some((c, k, q)) = stack.pop() {
        if super::budget::expired() {
            return Err(PolyError::Budget);
        }
        let v = variations_in_01(&q);
        if v == 0 {
            continue;
        }
        let t_to_x = |num: &BigInt, k: u64| {
            // x = 2B * num/2^k - B
            Rat::new(&two_b * num - (&bound << k), BigInt::one() << k)
        };
        if v == 1 {
            let one = BigInt::one();
            intervals.push((t_to_x(&c, k), t_to_x(&(&c + &one), k)));
            continue;
        }
        let m = q.len() - 1;
        // left half: 2^m q(x/2); right half: its Taylor shift by one
        let ql: Vec<BigInt> = q.iter().enumerate().map(|(i, ci)| ci << (m - i)).collect();
        let mut qr = ql.clone();
        taylor_shift_one(&mut qr);
        let mid = (&c << 1) + BigInt::one();
        if qr[0].is_zero() {
            exact.push(t_to_x(&mid, k + 1));
            qr.remove(0);
        }
        stack.push((&c << 1, k + 1, ql));
        stack.push((mid, k + 1, qr));
    }

    // an interval endpoint can coincide with an exact root found elsewhere;
    // shrink such intervals so their endpoints are never roots of p
    let chain = if intervals.iter().any(|(a, b)| exact.contains(a) || exact.contains(b)) {
        Some(sturm_chain(&sf))
    } else {
        None
    };
    let mut out: Vec<(Rat, IsolatedRoot)> = exact
        .into_iter()
        .map(|r| (r.clone(), IsolatedRoot::Rational(r)))
        .collect();
    'ival: for (mut a, mut b) in intervals {
        if let Some(chain) = &chain {
            let half = |x: &Rat, y: &Rat| (x + y) / Rat::from(BigInt::from(2));
            if sf.sign_at(&b) == 0 {
                // move b left past the interior root; Sturm counts (a, y]
                let mut y = half(&a, &b);
                loop {
                    if sf.sign_at(&y) == 0 {
                        out.push((y.clone(), IsolatedRoot::Rational(y)));
                        continue 'ival;
                    }
                    if sturm_count_half_open(chain, &a, &y) == 1 {
                        b = y;
                        break;
                    }
                    y = half(&y, &b);
                }
            }
            if sf.sign_at(&a) == 0 {
                let mut x = half(&a, &b);
                loop {
                    if sf.sign_at(&x) == 0 {
                        out.push((x.clone(), IsolatedRoot::Rational(x)));
                        continue 'ival;
                    }
                    if sturm_count_half_open(chain, &x, &b) == 1 {
                        a = x;
                        break;
                    }
                    x = half(&a, &x);
                }
            }
        }
        out.push((a.clone(), IsolatedRoot::Interval(a, b)));
    }
    out.sort_by(|(x, _), (y, _)| x.cmp(y));
    Ok(out.into_iter().map(|(_, r)| r).collect())
}

/// Coefficients of (c0 + c1 x) * a.
fn mul_linear_int(a: &[BigInt], c0: &BigInt, c1: &BigInt) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + 1];
    for (i, x) in a.iter().enumerate() {
        out[i] += x * c0;
        out[i + 1] += x * c1;
    }
    out
}

/// In-place Taylor shift: replaces p(x) by p(x + 1).
fn taylor_shift_one(c: &mut [BigInt]) {
    let n = c.len() - 1;
    for k in (0..n).rev() {
        for j in k..n {
            let add = c[j + 1].clone();
            c[j] += add;
        }
    }
}

/// Descartes bound on the roots of q in the open interval (0, 1): sign
/// variations of (1 + x)^deg q(1/(1 + x)), i.e. of the reversed coefficient
/// sequence Taylor-shifted by one.
fn variations_in_01(q: &[BigInt]) -> usize {
    let mut r: Vec<BigInt> = q.iter().rev().cloned().collect();
    taylor_shift_one(&mut r);
    let mut last = 0i8;
    let mut n = 0;
    for c in &r {
        if c.is_zero() {
            continue;
        }
        let s = if c.is_positive() { 1 } else { -1 };
        if last != 0 && s != last {
            n += 1;
            if n > 1 {
                return n; // callers only distinguish 0, 1, many
            }
        }
        last = s;
    }
    n
}

/// Roots of the (square-free) chain polynomial in the half-open interval
/// (a, b].
fn sturm_count_half_open(chain: &[UniPoly], a: &Rat, b: &Rat) -> usize {
    chain_variations(chain, a).saturating_sub(chain_variations(chain, b))
}

/// Sturm chain root count on the half-open interval (a, b]; with non-root
/// endpoints this counts roots in the open interval. Independent oracle for
/// the Descartes isolation path.
pub fn sturm_root_count(p: &UniPoly, a: &Rat, b: &Rat) -> usize {
    let chain = sturm_chain(p);
    let va = chain_variations(&chain, a);
    let vb = chain_variations(&chain, b);
    va.saturating_sub(vb)
}

fn sturm_chain(p: &UniPoly) -> Vec<UniPoly> {
    let p = p.squarefree();
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            return chain;
        }
        let r = chain[n - 2].rem(&chain[n - 1]).neg();
        if r.is_zero() {
            return chain;
        }
        chain.push(r);
    }
}

fn chain_variations(chain: &[UniPoly], x: &Rat) -> usize {
    let signs: Vec<Rat> = chain.iter().map(|q| Rat::from(BigInt::from(q.sign_at(x)))).collect();
    sign_variations(&signs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};

    fn up(cs: &[i64]) -> UniPoly {
        UniPoly::new(cs.iter().map(|&c| rat_int(c)).collect())
    }

    #[test]
    fn isolates_sqrt2() {
        // x^2 - 2
        let roots = isolate_real_roots_uni(&up(&[-2, 0, 1])).unwrap();
        assert_eq!(roots.len(), 2);
        match &roots[0] {
            IsolatedRoot::Interval(a, b) => {
                assert!(*a >= rat_int(-2) && *b <= rat_int(-1) || (*a >= rat_int(-3)));
                assert!(a < b);
            }
            IsolatedRoot::Rational(_) => panic!("-sqrt2 is irrational"),
        }
    }

    #[test]
    fn isolates_rational_roots() {
        // x^3 - x = x(x-1)(x+1)
        let roots = isolate_real_roots_uni(&up(&[0, -1, 0, 1])).unwrap();
        assert_eq!(roots.len(), 3);
    }

    #[test]
    fn no_real_roots() {
        // 5x^4 + 3x^2 + 1; Sturm oracle confirms zero roots
        let p = up(&[1, 0, 3, 0, 5]);
        let roots = isolate_real_roots_uni(&p).unwrap();
        assert!(roots.is_empty());
        let b = p.root_bound();
        assert_eq!(sturm_root_count(&p, &-b.clone(), &b), 0);
    }

    #[test]
    fn zero_poly_rejected() {
        assert!(matches!(
            isolate_real_roots_uni(&UniPoly::zero()),
            Err(PolyError::ZeroPolynomial)
        ));
    }

    #[test]
    fn sturm_agrees_with_descartes_on_random_products() {
        // products of known linear factors
        for roots in [[1i64, 2, 3], [-5, 0, 7], [-1, -1, 4]] {
            // p = prod (x - r); repeated roots exercise squarefree handling
            let mut p = up(&[1]);
            for r in roots {
                p = UniPoly::new(mul_dense(&p.coeffs, &[rat_int(-r), rat_int(1)]));
            }
            let isolated = isolate_real_roots_uni(&p).unwrap();
            let mut distinct = roots.to_vec();
            distinct.sort();
            distinct.dedup();
            assert_eq!(isolated.len(), distinct.len());
            let b = p.root_bound();
            assert_eq!(sturm_root_count(&p, &-b.clone(), &b), distinct.len());
        }
    }

    #[test]
    fn squarefree_removes_multiplicity() {
        // (x-1)^2
        let p = up(&[1, -2, 1]);
        assert_eq!(p.squarefree(), up(&[-1, 1]).monic());
        let _ = rat(1, 2);
    }
}
