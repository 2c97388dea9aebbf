use std::fmt::Write;

use super::{Expr, Program, Stmt};

/// Renders a program in core syntax (no `if`/`while` sugar).
///
/// `parse(pretty(p))` reproduces `p` exactly whenever every `Seq` chain in
/// `p` is nested to the right, which holds for all parsed and generated
/// programs; left-nested chains print the same as their right-nested form.
pub fn pretty(p: &Program) -> String {
    pretty_stmt(&p.body, &p.vars)
}

pub fn pretty_stmt(s: &Stmt, vars: &[String]) -> String {
    let mut out = String::new();
    write_stmt(&mut out, s, vars, 0);
    out.push('\n');
    out
}

pub fn pretty_expr(e: &Expr, vars: &[String]) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, vars, 0);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_stmt(out: &mut String, s: &Stmt, vars: &[String], level: usize) {
    match s {
        Stmt::Seq(a, b) => {
            write_stmt(out, a, vars, level);
            out.push_str(";\n");
            write_stmt(out, b, vars, level);
        }
        Stmt::Assign(v, e) => {
            indent(out, level);
            let _ = write!(out, "{} := ", vars[v.index()]);
            write_expr(out, e, vars, 0);
        }
        Stmt::Assume(e) => {
            indent(out, level);
            out.push_str("assume ");
            write_expr(out, e, vars, 0);
        }
        Stmt::Choice(a, b) => {
            indent(out, level);
            out.push_str("choice {\n");
            write_stmt(out, a, vars, level + 1);
            out.push('\n');
            indent(out, level);
            out.push_str("} or {\n");
            write_stmt(out, b, vars, level + 1);
            out.push('\n');
            indent(out, level);
            out.push('}');
        }
        Stmt::Loop(body) => {
            indent(out, level);
            out.push_str("loop {\n");
            write_stmt(out, body, vars, level + 1);
            out.push('\n');
            indent(out, level);
            out.push('}');
        }
    }
}

// `min_prec` is the weakest operator that may appear unparenthesized here.
fn write_expr(out: &mut String, e: &Expr, vars: &[String], min_prec: u8) {
    match e {
        Expr::Const(c) => {
            let _ = write!(out, "{c}");
        }
        Expr::Var(v) => out.push_str(&vars[v.index()]),
        Expr::Unknown => out.push('?'),
        Expr::BinOp(op, l, r) => {
            let prec = op.precedence();
            let paren = prec < min_prec;
            if paren {
                out.push('(');
            }
            write_expr(out, l, vars, prec);
            let _ = write!(out, " {op} ");
            write_expr(out, r, vars, prec + 1);
            if paren {
                out.push(')');
            }
        }
    }
}
