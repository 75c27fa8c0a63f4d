//! SMT-LIB 2 bridge: serializing formulas for an external solver over
//! nonlinear real arithmetic and interpreting its answers. The solver
//! command is taken from the NORMALCONE_SOLVER environment variable; a
//! reported model is only trusted after exact re-evaluation, and any
//! sat answer without a usable rational model is downgraded to unknown.

use super::sat::SatResult;
use crate::formula::{Formula, QuantKind, Rel};
use crate::poly::{Poly, Rat, Var};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::io::Write;
use std::process::{Command, Stdio};

pub const SOLVER_ENV: &str = "NORMALCONE_SOLVER";

fn smt_rat(r: &Rat) -> String {
    let body = if r.denom() == &BigInt::from(1) {
        format!("{}", r.numer().abs())
    } else {
        format!("(/ {} {})", r.numer().abs(), r.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn smt_poly(p: &Poly) -> String {
    if let Some(c) = p.as_constant() {
        return smt_rat(&c);
    }
    let mut monomials = Vec::new();
    for (exps, c) in p.terms() {
        let mut factors = Vec::new();
        if !c.is_one() || exps.iter().all(|&e| e == 0) {
            factors.push(smt_rat(c));
        }
        for (i, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                factors.push(p.vars()[i].name().to_string());
            }
        }
        monomials.push(match factors.len() {
            1 => factors.pop().unwrap(),
            _ => format!("(* {})", factors.join(" ")),
        });
    }
    match monomials.len() {
        1 => monomials.pop().unwrap(),
        _ => format!("(+ {})", monomials.join(" ")),
    }
}

fn smt_formula(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Atom(p, r) => {
            let op = match r {
                Rel::Eq => "=",
                Rel::Ne => "distinct",
                Rel::Lt => "<",
                Rel::Le => "<=",
                Rel::Gt => ">",
                Rel::Ge => ">=",
            };
            format!("({op} {} 0)", smt_poly(p))
        }
        Formula::And(cs) => format!(
            "(and {})",
            cs.iter().map(smt_formula).collect::<Vec<_>>().join(" ")
        ),
        Formula::Or(cs) => format!(
            "(or {})",
            cs.iter().map(smt_formula).collect::<Vec<_>>().join(" ")
        ),
        Formula::Not(c) => format!("(not {})", smt_formula(c)),
        Formula::Quant(k, vs, body) => {
            let binder = match k {
                QuantKind::Forall => "forall",
                QuantKind::Exists => "exists",
            };
            let decls: Vec<String> =
                vs.iter().map(|v| format!("({} Real)", v.name())).collect();
            format!("({binder} ({}) {})", decls.join(" "), smt_formula(body))
        }
    }
}

/// A complete SMT-LIB 2 script asking whether `f` is satisfiable over its
/// free variables.
pub fn emit_smtlib(f: &Formula) -> String {
    let mut out = String::new();
    let logic = if f.is_quantifier_free() { "QF_NRA" } else { "NRA" };
    out.push_str(&format!("(set-logic {logic})\n"));
    out.push_str("(set-option :produce-models true)\n");
    for v in f.free_vars() {
        out.push_str(&format!("(declare-const {} Real)\n", v.name()));
    }
    out.push_str(&format!("(assert {})\n", smt_formula(f)));
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

/// Interprets solver output. A sat verdict yields a model only when every
/// reported value is an exact rational that checks out against `f`.
pub fn parse_solver_response(output: &str, f: &Formula) -> SatResult {
    let mut lines = output.lines().map(str::trim).filter(|l| !l.is_empty());
    let verdict = loop {
        match lines.next() {
            Some("sat") => break "sat",
            Some("unsat") => break "unsat",
            Some("unknown") => break "unknown",
            Some(_) => continue,
            None => return SatResult::Unknown("empty solver output".into()),
        }
    };
    match verdict {
        "unsat" => SatResult::Unsat,
        "unknown" => SatResult::Unknown("solver returned unknown".into()),
        _ => {
            let rest: String = output
                .lines()
                .skip_while(|l| l.trim() != "sat")
                .skip(1)
                .collect::<Vec<_>>()
                .join("\n");
            match parse_model(&rest, f) {
                Ok(model) => {
                    match f.evaluate(&model) {
                        Ok(true) => SatResult::Sat(Some(model)),
                        Ok(false) | Err(_) => SatResult::Unknown(
                            "solver model failed exact verification".into(),
                        ),
                    }
                }
                Err(reason) => SatResult::Unknown(format!(
                    "sat reported without a rational model: {reason}"
                )),
            }
        }
    }
}

fn parse_model(model_text: &str, f: &Formula) -> Result<Vec<(Var, Rat)>, String> {
    let mut out = Vec::new();
    let toks = sexp_tokens(model_text);
    let mut i = 0;
    while i + 4 < toks.len() {
        if toks[i] == "(" && toks[i + 1] == "define-fun" {
            let name = toks[i + 2].clone();
            // skip "( ) Real"
            let mut j = i + 3;
            if toks.get(j).map(String::as_str) == Some("(")
                && toks.get(j + 1).map(String::as_str) == Some(")")
            {
                j += 2;
            }
            if toks.get(j).map(String::as_str) != Some("Real") {
                return Err(format!("unsupported sort for {name}"));
            }
            let (val, next) = parse_value(&toks, j + 1)
                .ok_or_else(|| format!("non-rational value for {name}"))?;
            out.push((Var::new(&name), val));
            i = next;
        } else {
            i += 1;
        }
    }
    for v in f.free_vars() {
        if !out.iter().any(|(w, _)| *w == v) {
            return Err(format!("model missing {}", v.name()));
        }
    }
    Ok(out)
}

/// Numeric term: literal, decimal, (- t), or (/ t t).
fn parse_value(toks: &[String], i: usize) -> Option<(Rat, usize)> {
    match toks.get(i)?.as_str() {
        "(" => match toks.get(i + 1)?.as_str() {
            "-" => {
                let (v, next) = parse_value(toks, i + 2)?;
                if toks.get(next)? != ")" {
                    return None;
                }
                Some((-v, next + 1))
            }
            "/" => {
                let (n, mid) = parse_value(toks, i + 2)?;
                let (d, next) = parse_value(toks, mid)?;
                if toks.get(next)? != ")" || d.is_zero() {
                    return None;
                }
                Some((n / d, next + 1))
            }
            _ => None,
        },
        lit => {
            let v = parse_literal(lit)?;
            Some((v, i + 1))
        }
    }
}

fn parse_literal(s: &str) -> Option<Rat> {
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let digits = format!("{int_part}{frac_part}");
        let n: BigInt = digits.parse().ok()?;
        let d = BigInt::from(10).pow(frac_part.len() as u32);
        return Some(Rat::new(n, d));
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from(n))
}

fn sexp_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Runs the external solver named by NORMALCONE_SOLVER on `f`. Returns None
/// when no solver is configured.
pub fn run_external_solver(f: &Formula) -> Option<SatResult> {
    let cmdline = std::env::var(SOLVER_ENV).ok()?;
    let mut parts = cmdline.split_whitespace();
    let program = parts.next()?;
    let script = emit_smtlib(f);
    let child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => return Some(SatResult::Unknown(format!("solver failed to start: {e}"))),
    };
    if let Some(mut stdin) = child.stdin.take() {
        let _ = stdin.write_all(script.as_bytes());
    }
    let out = match child.wait_with_output() {
        Ok(o) => o,
        Err(e) => return Some(SatResult::Unknown(format!("solver failed: {e}"))),
    };
    let text = String::from_utf8_lossy(&out.stdout);
    Some(parse_solver_response(&text, f))
}
