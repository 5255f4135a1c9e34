//! Pretty printer with minimal parentheses. `parse(pretty(e))` is
//! probe-equal to `e`.

use super::{Expr, VarRegistry};

// Precedence levels, loosest to tightest.
const LET: u8 = 0;
const SUM: u8 = 1;
const PROD: u8 = 2;
const UNARY: u8 = 3;

pub fn pretty(e: &Expr, registry: &VarRegistry) -> String {
    let mut out = String::new();
    go(e, registry, LET, &mut out);
    out
}

fn go(e: &Expr, reg: &VarRegistry, min_prec: u8, out: &mut String) {
    let prec = match e {
        Expr::Let(..) => LET,
        Expr::Plus(..) => SUM,
        Expr::Times(..) => PROD,
        Expr::Neg(..) => UNARY,
        _ => UNARY + 1,
    };
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match e {
        Expr::Var(v) => out.push_str(reg.name_of(*v)),
        Expr::Zero => out.push('0'),
        Expr::One => out.push('1'),
        Expr::Plus(a, b) => {
            go(a, reg, SUM, out);
            // render `a + (-b)` as subtraction
            if let Expr::Neg(inner) = &**b {
                out.push_str(" - ");
                go(inner, reg, PROD, out);
            } else {
                out.push_str(" + ");
                go(b, reg, SUM + 1, out);
            }
        }
        Expr::Times(a, b) => {
            go(a, reg, PROD, out);
            out.push_str(" * ");
            go(b, reg, PROD + 1, out);
        }
        Expr::Neg(a) => {
            out.push('-');
            go(a, reg, UNARY, out);
        }
        Expr::Sin(a) => {
            out.push_str("sin(");
            go(a, reg, LET, out);
            out.push(')');
        }
        Expr::Cos(a) => {
            out.push_str("cos(");
            go(a, reg, LET, out);
            out.push(')');
        }
        Expr::Let(v, e1, e2) => {
            out.push_str("let ");
            out.push_str(reg.name_of(*v));
            out.push_str(" = ");
            go(e1, reg, LET, out);
            out.push_str(" in ");
            go(e2, reg, LET, out);
        }
    }
    if parens {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::expr::{parse, RegistryMode};

    fn roundtrip(src: &str) -> String {
        let (e, reg) = parse(src, RegistryMode::Grow).unwrap();
        pretty(&e, &reg)
    }

    #[test]
    fn example_outputs() {
        assert_eq!(roundtrip("x*(x+1)"), "x * (x + 1)");
        assert_eq!(roundtrip("let y = x+x in y*y"), "let y = x + x in y * y");
        let reg = VarRegistry::new();
        assert_eq!(pretty(&Expr::Zero, &reg), "0");
    }

    #[test]
    fn subtraction_stays_subtraction() {
        assert_eq!(roundtrip("x - y"), "x - y");
        assert_eq!(roundtrip("x - -y"), "x - -y");
    }

    #[test]
    fn right_nested_sum_keeps_parens() {
        let (_, reg) = parse("x + y", RegistryMode::Grow).unwrap();
        let x = reg.lookup("x").unwrap();
        let y = reg.lookup("y").unwrap();
        let e = Expr::plus(
            Expr::var(x),
            Expr::plus(Expr::var(y), Arc::new(Expr::One)),
        );
        assert_eq!(pretty(&e, &reg), "x + (y + 1)");
    }
}
