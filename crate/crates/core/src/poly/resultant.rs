//! Elimination-theory kernel: Sylvester resultants, discriminants,
//! principal subresultant coefficient chains, and multivariate gcd.
//!
//! The resultant is computed as the determinant of the Sylvester matrix by
//! fraction-free (Bareiss) elimination over polynomial entries, which keeps
//! every intermediate value an exact polynomial.

use super::{Poly, PolyError, Var};

/// Sylvester matrix of p, q with respect to `var`, row-major.
pub fn sylvester_matrix(p: &Poly, q: &Poly, var: &Var) -> Vec<Vec<Poly>> {
    let m = p.degree(var);
    let n = q.degree(var);
    let pc = p.coeffs_in(var);
    let qc = q.coeffs_in(var);
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![Poly::zero(); size];
        for (j, c) in pc.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![Poly::zero(); size];
        for (j, c) in qc.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Fraction-free determinant (Bareiss). Exact over polynomial entries.
pub fn det_bareiss(mut m: Vec<Vec<Poly>>) -> Result<Poly, PolyError> {
    let n = m.len();
    if n == 0 {
        return Ok(Poly::one());
    }
    let mut sign_flip = false;
    let mut prev = Poly::one();
    for k in 0..n - 1 {
        if super::budget::expired() {
            return Err(PolyError::Budget);
        }
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return Ok(Poly::zero());
            };
            m.swap(k, swap);
            sign_flip = !sign_flip;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.exact_div(&prev);
            }
            m[i][k] = Poly::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    Ok(if sign_flip { d.neg() } else { d })
}

/// Resultant of p and q with respect to `var`.
pub fn resultant(p: &Poly, q: &Poly, var: &Var) -> Result<Poly, PolyError> {
    if p.degree(var) == 0 || q.degree(var) == 0 {
        return Err(PolyError::ResultantDegreeZero(var.name().to_string()));
    }
    det_bareiss(sylvester_matrix(p, q, var))
}

/// Discriminant with the classical sign convention:
/// (-1)^(n(n-1)/2) * resultant(p, p', var) / lc(p), so that
/// disc(x^2+bx+c) = b^2-4c and disc(x^2-2) = 8.
pub fn discriminant(p: &Poly, var: &Var) -> Result<Poly, PolyError> {
    let n = p.degree(var);
    if n < 2 {
        return Err(PolyError::DiscriminantDegree(var.name().to_string()));
    }
    let r = resultant(p, &p.derivative(var), var)?;
    let lc = p.leading_coeff(var);
    let d = r.exact_div(&lc);
    Ok(if (n * (n - 1) / 2) % 2 == 1 { d.neg() } else { d })
}

/// Principal subresultant coefficients psc_0 .. psc_{min(m,n)-1} of (p, q)
/// w.r.t. `var`, each the determinant of the corresponding Sylvester
/// submatrix. psc_0 is the resultant.
pub fn psc_chain(p: &Poly, q: &Poly, var: &Var) -> Result<Vec<Poly>, PolyError> {
    let m = p.degree(var);
    let n = q.degree(var);
    if m == 0 || n == 0 {
        return Ok(vec![]);
    }
    let full = sylvester_matrix(p, q, var);
    let size = m + n;
    let top = m.min(n);
    let mut out = Vec::new();
    for j in 0..top {
        // delete last j rows of each block and last 2j columns
        let mut rows = Vec::new();
        for (i, row) in full.iter().enumerate() {
            let in_q_block = i >= n;
            let block_idx = if in_q_block { i - n } else { i };
            let block_len = if in_q_block { m } else { n };
            if block_idx < block_len - j {
                rows.push(row[..size - 2 * j].to_vec());
            }
        }
        out.push(det_bareiss(rows)?);
    }
    Ok(out)
}

fn prem(a: &Poly, b: &Poly, var: &Var) -> Poly {
    // pseudo remainder: lc(b)^(deg a - deg b + 1) * a mod b
    let db = b.degree(var);
    let lcb = b.leading_coeff(var);
    let mut r = a.clone();
    let mut dr = r.degree(var);
    let steps = if dr >= db { dr - db + 1 } else { 0 };
    let mut applied = 0usize;
    while !r.is_zero() && dr >= db {
        let lcr = r.leading_coeff(var);
        let shift = Poly::var(var).pow((dr - db) as u32);
        r = r.mul(&lcb).sub(&b.mul(&lcr).mul(&shift));
        applied += 1;
        dr = r.degree(var);
    }
    // pad so the factor is exactly lc(b)^steps regardless of degree drops
    for _ in applied..steps {
        r = r.mul(&lcb);
    }
    r
}

/// Content of p w.r.t. `var`: gcd of its coefficients.
fn content(p: &Poly, var: &Var) -> Poly {
    let coeffs = p.coeffs_in(var);
    let mut g = Poly::zero();
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.as_constant().is_some() && !g.is_zero() {
            return Poly::one();
        }
    }
    g
}

fn primitive_part(p: &Poly, var: &Var) -> Poly {
    let c = content(p, var);
    if c.is_zero() {
        Poly::zero()
    } else {
        p.exact_div(&c)
    }
}

/// Multivariate gcd over Q by primitive subresultant remainder sequences.
/// The result is normalized (content-free, positive lex-leading coefficient);
/// gcd with 0 returns the normalized other argument.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.normalized();
    }
    if b.is_zero() {
        return a.normalized();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    // out of budget: 1 is a valid (if not greatest) common divisor, and
    // every caller uses the gcd only to simplify
    if super::budget::expired() {
        return Poly::one();
    }
    // main variable: highest shared, else the polynomials are coprime in
    // their main variables unless one divides the other's content
    let var = match a.vars().iter().rev().find(|v| b.contains_var(v)) {
        Some(v) => v.clone(),
        None => {
            return Poly::one();
        }
    };
    let ca = content(a, &var);
    let cb = content(b, &var);
    let cg = gcd(&ca, &cb);
    let mut p = primitive_part(a, &var);
    let mut q = primitive_part(b, &var);
    if p.degree(&var) < q.degree(&var) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        if super::budget::expired() {
            return Poly::one();
        }
        let r = prem(&p, &q, &var);
        if r.is_zero() {
            return cg.mul(&primitive_part(&q, &var)).normalized();
        }
        if r.degree(&var) == 0 {
            return cg.normalized();
        }
        p = q;
        q = primitive_part(&r, &var);
    }
}

/// Square-free part of p with respect to `var`: p / gcd(p, dp/dvar).
pub fn squarefree_part(p: &Poly, var: &Var) -> Poly {
    let d = p.derivative(var);
    if d.is_zero() {
        return p.normalized();
    }
    let g = gcd(p, &d);
    if g.as_constant().is_some() {
        return p.normalized();
    }
    p.exact_div(&g).normalized()
}

/// True iff c divides both numerator-level contents... (helper for tests)
#[allow(dead_code)]
fn divides(d: &Poly, p: &Poly) -> bool {
    p.try_exact_div(d).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat_int, Poly, Var};

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    /// Independent oracle: cofactor-expansion determinant.
    fn det_cofactor(m: &[Vec<Poly>]) -> Poly {
        let n = m.len();
        if n == 0 {
            return Poly::one();
        }
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = Poly::zero();
        for (j, entry) in m[0].iter().enumerate() {
            if entry.is_zero() {
                continue;
            }
            let minor: Vec<Vec<Poly>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, e)| e.clone())
                        .collect()
                })
                .collect();
            let term = entry.mul(&det_cofactor(&minor));
            acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }

    #[test]
    fn resultant_x2_minus_2_vs_x_minus_1() {
        let x = Poly::var(&v("x"));
        let p = x.pow(2).sub(&Poly::int(2));
        let q = x.sub(&Poly::one());
        let r = resultant(&p, &q, &v("x")).unwrap();
        // oracle: hand-expanded cofactor determinant of the 3x3 Sylvester matrix
        let oracle = det_cofactor(&sylvester_matrix(&p, &q, &v("x")));
        assert_eq!(r, oracle);
        assert_eq!(r, Poly::int(-1));
    }

    #[test]
    fn resultant_shared_root_iff_equal() {
        let x = Poly::var(&v("x"));
        let c = Poly::var(&v("c"));
        let d = Poly::var(&v("d"));
        let r = resultant(&x.sub(&c), &x.sub(&d), &v("x")).unwrap();
        // vanishes exactly when c = d
        assert_eq!(r.normalized(), c.sub(&d).normalized());
    }

    #[test]
    fn resultant_matches_discriminant_identity() {
        // resultant(x^2+bx+c, 2x+b, x) vanishes exactly when b^2-4c = 0
        let x = Poly::var(&v("x"));
        let b = Poly::var(&v("b"));
        let c = Poly::var(&v("c"));
        let p = x.pow(2).add(&b.mul(&x)).add(&c);
        let q = x.scale(&rat_int(2)).add(&b);
        let r = resultant(&p, &q, &v("x")).unwrap();
        let oracle = det_cofactor(&sylvester_matrix(&p, &q, &v("x")));
        assert_eq!(r, oracle);
        let disc = b.pow(2).sub(&c.scale(&rat_int(4)));
        assert_eq!(r.normalized(), disc.normalized());
    }

    #[test]
    fn resultant_rejects_degree_zero() {
        let x = Poly::var(&v("x"));
        let err = resultant(&Poly::int(3), &x, &v("x"));
        assert!(matches!(err, Err(PolyError::ResultantDegreeZero(_))));
    }

    #[test]
    fn discriminant_classics() {
        let x = Poly::var(&v("x"));
        let b = Poly::var(&v("b"));
        let c = Poly::var(&v("c"));
        let p = x.pow(2).add(&b.mul(&x)).add(&c);
        assert_eq!(
            discriminant(&p, &v("x")).unwrap(),
            b.pow(2).sub(&c.scale(&rat_int(4)))
        );
        let q = x.pow(2).sub(&Poly::int(2));
        assert_eq!(discriminant(&q, &v("x")).unwrap(), Poly::int(8));
        let rep = x.sub(&Poly::one()).mul(&x.sub(&Poly::one()));
        assert!(discriminant(&rep, &v("x")).unwrap().is_zero());
        assert!(matches!(
            discriminant(&x, &v("x")),
            Err(PolyError::DiscriminantDegree(_))
        ));
    }

    #[test]
    fn gcd_basic() {
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let f = x.add(&y);
        let a = f.pow(2).mul(&x.sub(&Poly::one()));
        let b = f.mul(&x.add(&Poly::int(3)));
        let g = gcd(&a, &b);
        assert_eq!(g, f.normalized());
        assert_eq!(gcd(&x, &y), Poly::one());
    }

    #[test]
    fn squarefree_strips_multiplicity() {
        let x = Poly::var(&v("x"));
        let p = x.sub(&Poly::one()).pow(3).mul(&x.add(&Poly::int(2)));
        let sf = squarefree_part(&p, &v("x"));
        let expect = x.sub(&Poly::one()).mul(&x.add(&Poly::int(2))).normalized();
        assert_eq!(sf, expect);
    }

    #[test]
    fn psc_zeroth_is_resultant() {
        let x = Poly::var(&v("x"));
        let y = Poly::var(&v("y"));
        let p = x.pow(3).add(&y.mul(&x)).add(&Poly::one());
        let q = x.pow(2).sub(&y);
        let chain = psc_chain(&p, &q, &v("x")).unwrap();
        assert_eq!(chain[0], resultant(&p, &q, &v("x")).unwrap());
        assert_eq!(chain.len(), 2);
    }

    #[test]
    fn resultant_zero_at_shared_root_instances() {
        // resultant(p,q) = 0 at a rational instance iff instantiated gcd nonconstant
        let x = Poly::var(&v("x"));
        let a = Poly::var(&v("a"));
        let p = x.pow(2).sub(&a.clone()); // x^2 - a
        let q = x.sub(&Poly::int(2)); // x - 2
        let r = resultant(&p, &q, &v("x")).unwrap();
        for k in -4i64..=6 {
            let inst = r.substitute(&[(v("a"), rat_int(k))]);
            let shares = k == 4; // x=2 root of x^2-a iff a=4
            assert_eq!(inst.is_zero(), shares, "a = {k}");
        }
    }
}
