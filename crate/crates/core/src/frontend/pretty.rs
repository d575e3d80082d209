// SPDX-License-Identifier: Apache-2.0

//! Canonical text for models, marks and scenarios.
//!
//! The output reparses to an equal value. Model text is also the input of the
//! interface manifest's content hash, so its layout must stay stable.

use std::fmt::Write;

use crate::ir::{ActionStmt, ClassDef, Expr, Model};
use crate::partition::MarkSet;
use crate::scenario::Scenario;

pub fn model(model: &Model) -> String {
    let mut out = String::new();
    for class in &model.classes {
        class_def(&mut out, class);
    }
    for inst in &model.instances {
        let _ = writeln!(out, "instance {}: {};", inst.name, inst.class);
    }
    out
}

fn class_def(out: &mut String, class: &ClassDef) {
    let _ = writeln!(out, "class {} {{", class.name);
    for a in &class.attributes {
        let _ = writeln!(out, "  attr {}: {} = {};", a.name, a.ty, a.default);
    }
    for s in &class.signals {
        let params: Vec<String> = s.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
        let _ = writeln!(out, "  signal {}({});", s.name, params.join(", "));
    }
    out.push_str("  statemachine {\n");
    let _ = writeln!(out, "    initial {};", class.machine.initial);
    for st in &class.machine.states {
        let _ = writeln!(out, "    state {} {{", st.name);
        for t in &st.transitions {
            let _ = writeln!(out, "      on {} -> {} {{", t.signal, t.target);
            stmts(out, &t.actions, 8);
            out.push_str("      }\n");
        }
        out.push_str("    }\n");
    }
    out.push_str("  }\n}\n");
}

fn stmts(out: &mut String, block: &[ActionStmt], indent: usize) {
    let pad = " ".repeat(indent);
    for stmt in block {
        match stmt {
            ActionStmt::Assign { attr, value } => {
                let _ = writeln!(out, "{pad}{attr} = {};", expr(value));
            }
            ActionStmt::Send {
                instance,
                signal,
                args,
            } => {
                let args: Vec<String> = args.iter().map(expr).collect();
                let _ = writeln!(out, "{pad}send {instance}.{signal}({});", args.join(", "));
            }
            ActionStmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let _ = writeln!(out, "{pad}if ({}) {{", expr(cond));
                stmts(out, then_branch, indent + 2);
                match else_branch {
                    Some(else_branch) => {
                        let _ = writeln!(out, "{pad}}} else {{");
                        stmts(out, else_branch, indent + 2);
                        let _ = writeln!(out, "{pad}}}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}}}");
                    }
                }
            }
        }
    }
}

/// Prints an expression with the fewest parentheses that preserve its tree.
pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Lit(lit) => lit.to_string(),
        Expr::Attr(name) => name.clone(),
        Expr::Param(name) => format!("${name}"),
        Expr::Unary(op, inner) => match **inner {
            Expr::Binary(..) => format!("{}({})", op.symbol(), expr(inner)),
            _ => format!("{}{}", op.symbol(), expr(inner)),
        },
        Expr::Binary(op, lhs, rhs) => {
            let prec = op.precedence();
            let l = match &**lhs {
                Expr::Binary(lop, ..) if lop.precedence() < prec => format!("({})", expr(lhs)),
                _ => expr(lhs),
            };
            let r = match &**rhs {
                Expr::Binary(rop, ..) if rop.precedence() <= prec => format!("({})", expr(rhs)),
                _ => expr(rhs),
            };
            format!("{l} {} {r}", op.symbol())
        }
    }
}

pub fn marks(marks: &MarkSet) -> String {
    let mut out = String::new();
    for m in &marks.marks {
        let _ = writeln!(out, "mark {} = {} on {};", m.key, m.value, m.path);
    }
    out
}

pub fn scenario(scenario: &Scenario) -> String {
    let mut out = String::new();
    if scenario.confluent {
        out.push_str("confluent;\n");
    }
    for inj in &scenario.injections {
        let args: Vec<String> = inj.args.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "at {} send {}.{}({});",
            inj.at,
            inj.instance,
            inj.signal,
            args.join(", ")
        );
    }
    for exp in &scenario.expectations {
        let _ = writeln!(out, "expect {}.{} == {};", exp.instance, exp.attribute, exp.expected);
    }
    out
}
