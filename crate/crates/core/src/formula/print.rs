//! Canonical formula text. Function names, page segments and cell
//! references print lowercase; operators print without spaces, except
//! after a page path, where `-` and `/` would read as part of the path.

use super::ast::*;
use crate::addr::col_to_letters;
use crate::value::format_number;

pub fn print(expr: &Expr) -> String {
    let mut out = String::from("=");
    write_expr(expr, &mut out);
    out
}

/// Prints an expression without the leading `=` (predicate bodies).
pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => op.precedence(),
        Expr::Unary { .. } => 6,
        Expr::Percent(_) => 7,
        _ => 8,
    }
}

/// Whether the printed form of `e` ends with a page-qualified reference.
fn ends_with_path(e: &Expr) -> bool {
    match e {
        Expr::Cell(c) => c.page != PageRef::Local,
        Expr::Range(r) => r.page != PageRef::Local,
        Expr::ZRef(_) => true,
        Expr::Binary { op, rhs, .. } => precedence(rhs) > op.precedence() && ends_with_path(rhs),
        Expr::Unary { expr, .. } => precedence(expr) >= 6 && ends_with_path(expr),
        _ => false,
    }
}

fn write_wrapped(e: &Expr, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_a1(a: &A1, out: &mut String) {
    if a.col_abs {
        out.push('$');
    }
    out.push_str(&col_to_letters(a.col));
    if a.row_abs {
        out.push('$');
    }
    out.push_str(&a.row.to_string());
}

fn write_page(page: &PageRef, out: &mut String) {
    match page {
        PageRef::Local => {}
        PageRef::RootAbsolute(segs) => {
            out.push('/');
            for s in segs {
                out.push_str(s);
                out.push('/');
            }
        }
        PageRef::BaseRelative { up, segments } => {
            if *up == 0 {
                out.push_str("./");
            } else {
                for _ in 0..*up {
                    out.push_str("../");
                }
            }
            for s in segments {
                out.push_str(s);
                out.push('/');
            }
        }
        PageRef::Bang(segs) => {
            for s in segs {
                out.push('!');
                out.push_str(s);
            }
            out.push('!');
        }
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Number(n) => out.push_str(&format_number(*n)),
        Expr::Text(s) => {
            out.push('"');
            out.push_str(&s.replace('"', "\"\""));
            out.push('"');
        }
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Error(k) => out.push_str(k.as_str()),
        Expr::Cell(c) => {
            write_page(&c.page, out);
            write_a1(&c.cell, out);
        }
        Expr::Range(r) => {
            write_page(&r.page, out);
            write_a1(&r.start, out);
            out.push(':');
            write_a1(&r.end, out);
        }
        Expr::ZRef(z) => {
            match z.anchor {
                ZAnchor::Root => out.push('/'),
                ZAnchor::Relative { up: 0 } => out.push_str("./"),
                ZAnchor::Relative { up } => (0..up).for_each(|_| out.push_str("../")),
            }
            for seg in &z.segments {
                match seg {
                    ZSegment::Literal(s) => out.push_str(s),
                    ZSegment::Predicate(p) => {
                        out.push('[');
                        write_expr(p, out);
                        out.push(']');
                    }
                }
                out.push('/');
            }
            match &z.target {
                ZTarget::Cell(a) => write_a1(a, out),
                ZTarget::Range(a, b) => {
                    write_a1(a, out);
                    out.push(':');
                    write_a1(b, out);
                }
            }
        }
        Expr::Call { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_expr(a, out);
            }
            out.push(')');
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let lhs_parens = precedence(lhs) < p;
            write_wrapped(lhs, lhs_parens, out);
            if !lhs_parens && ends_with_path(lhs) {
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
            } else {
                out.push_str(op.symbol());
            }
            write_wrapped(rhs, precedence(rhs) <= p, out);
        }
        Expr::Unary { op, expr } => {
            out.push(if *op == UnaryOp::Neg { '-' } else { '+' });
            write_wrapped(expr, precedence(expr) < 6, out);
        }
        Expr::Percent(expr) => {
            write_wrapped(expr, precedence(expr) < 7, out);
            out.push('%');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn definitional() {
        assert_eq!(print(&Expr::call("sum", vec![Expr::Number(1.0), Expr::Number(2.0)])), "=sum(1,2)");
    }

    #[test]
    fn normalizes_once() {
        let once = print(&parse("=SUM(1, 2, A3, /Page/a4)").unwrap());
        assert_eq!(once, "=sum(1,2,a3,/page/a4)");
        assert_eq!(print(&parse(&once).unwrap()), once);
    }

    #[test]
    fn keeps_evaluation_order() {
        let neg_of_pow = Expr::Unary {
            op: UnaryOp::Neg,
            expr: Box::new(Expr::binary(BinaryOp::Pow, Expr::Number(2.0), Expr::Number(2.0))),
        };
        assert_eq!(print(&neg_of_pow), "=-(2^2)");
        assert_eq!(parse(&print(&neg_of_pow)).unwrap(), neg_of_pow);
        assert_eq!(print(&parse("=(1-2)-(3-4)").unwrap()), "=1-2-(3-4)");
        assert_eq!(print(&parse("=(-2)%").unwrap()), "=(-2)%");
        assert_eq!(print(&parse("=2^(3^2)").unwrap()), "=2^(3^2)");
    }

    #[test]
    fn reference_forms() {
        for src in [
            "=!some!page!a4",
            "=../x/$b$2",
            "=./a1:b2",
            "=/some/page/[a1>44]/b7",
            "=../[and(a1>0,b1=\"x\")]/c1:c2",
            "=#REF!+1",
        ] {
            assert_eq!(print(&parse(src).unwrap()), src);
        }
    }
}
