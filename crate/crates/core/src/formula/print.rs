//! Deterministic text form. `parse(print(f))` reproduces `f` for formulas
//! whose atoms are in normalized "p rel 0" shape.

use super::Formula;

// Binding strength: Or < And < unary. Quantifiers extend to the end of the
// enclosing group, so they get parenthesized anywhere but the top level.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Quant(..) => 0,
        Formula::Or(_) => 1,
        Formula::And(_) => 2,
        _ => 3,
    }
}

pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, 0, &mut out);
    out
}

fn write_formula(f: &Formula, ctx: u8, out: &mut String) {
    let need_parens = prec(f) < ctx;
    if need_parens {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(p, r) => {
            out.push_str(&format!("{} {} 0", p, r.as_str()));
        }
        Formula::And(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" && ");
                }
                write_formula(c, 3, out);
            }
        }
        Formula::Or(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" || ");
                }
                write_formula(c, 2, out);
            }
        }
        Formula::Not(c) => {
            out.push('!');
            if prec(c) < 3 {
                out.push('(');
                write_formula(c, 0, out);
                out.push(')');
            } else {
                write_formula(c, 3, out);
            }
        }
        Formula::Quant(kind, vars, body) => {
            out.push_str(match kind {
                super::QuantKind::Forall => "forall",
                super::QuantKind::Exists => "exists",
            });
            for v in vars {
                out.push(' ');
                out.push_str(v.name());
            }
            out.push_str(". ");
            write_formula(body, 0, out);
        }
    }
    if need_parens {
        out.push(')');
    }
}
