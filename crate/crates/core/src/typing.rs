// SPDX-License-Identifier: Apache-2.0

//! Static typing of action-language expressions.
//!
//! Integer literals carry no width of their own; they take the width of the
//! typed operand they meet, or of the slot they are stored into. An
//! expression built only from integer literals is "untyped" until then.

use crate::ir::{BinaryOp, Expr, UnaryOp};
use crate::scalar::{Literal, ScalarType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprType {
    Known(ScalarType),
    /// Built from integer literals only; adopts the width of its context.
    UntypedInt,
}

impl ExprType {
    /// The concrete type once the context type (if any) is known. Untyped
    /// integers default to `u32`.
    pub fn settle(self, context: Option<ScalarType>) -> ScalarType {
        match self {
            ExprType::Known(t) => t,
            ExprType::UntypedInt => match context {
                Some(t) if !t.is_bool() => t,
                _ => ScalarType::U32,
            },
        }
    }
}

/// Names visible to an expression.
pub trait TypeEnv {
    fn attr_type(&self, name: &str) -> Option<ScalarType>;
    fn param_type(&self, name: &str) -> Option<ScalarType>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeError {
    UnknownAttr(String),
    UnknownParam(String),
    Mismatch(String),
}

/// Infers the type of `expr`, checking operator typing rules along the way.
pub fn infer(expr: &Expr, env: &dyn TypeEnv) -> Result<ExprType, TypeError> {
    match expr {
        Expr::Lit(Literal::Bool(_)) => Ok(ExprType::Known(ScalarType::Bool)),
        Expr::Lit(Literal::Int(_)) => Ok(ExprType::UntypedInt),
        Expr::Attr(name) => env
            .attr_type(name)
            .map(ExprType::Known)
            .ok_or_else(|| TypeError::UnknownAttr(name.clone())),
        Expr::Param(name) => env
            .param_type(name)
            .map(ExprType::Known)
            .ok_or_else(|| TypeError::UnknownParam(name.clone())),
        Expr::Unary(UnaryOp::Not, inner) => match infer(inner, env)? {
            ExprType::Known(ScalarType::Bool) => Ok(ExprType::Known(ScalarType::Bool)),
            other => Err(mismatch("operand of `!`", "bool", other)),
        },
        Expr::Unary(UnaryOp::Neg, inner) => match infer(inner, env)? {
            ExprType::Known(ScalarType::Bool) => Err(TypeError::Mismatch(
                "operand of unary `-` must be unsigned, found bool".into(),
            )),
            other => Ok(other),
        },
        Expr::Binary(op, lhs, rhs) => {
            let lt = infer(lhs, env)?;
            let rt = infer(rhs, env)?;
            if op.is_logical() {
                for t in [lt, rt] {
                    if t != ExprType::Known(ScalarType::Bool) {
                        return Err(mismatch(&format!("operand of `{}`", op.symbol()), "bool", t));
                    }
                }
                return Ok(ExprType::Known(ScalarType::Bool));
            }
            let unified = unify(*op, lhs, lt, rhs, rt)?;
            if op.is_arithmetic() {
                if unified == ExprType::Known(ScalarType::Bool) {
                    return Err(TypeError::Mismatch(format!(
                        "operands of `{}` must be unsigned, found bool",
                        op.symbol()
                    )));
                }
                Ok(unified)
            } else if op.is_ordering() && unified == ExprType::Known(ScalarType::Bool) {
                Err(TypeError::Mismatch(format!(
                    "operands of `{}` must be unsigned, found bool",
                    op.symbol()
                )))
            } else {
                Ok(ExprType::Known(ScalarType::Bool))
            }
        }
    }
}

/// Checks `expr` against the type of the slot it flows into.
pub fn check_against(expr: &Expr, expected: ScalarType, env: &dyn TypeEnv) -> Result<(), TypeError> {
    match infer(expr, env)? {
        ExprType::Known(t) if t == expected => Ok(()),
        ExprType::Known(t) => Err(TypeError::Mismatch(format!("expected {expected}, found {t}"))),
        ExprType::UntypedInt if expected.is_bool() => {
            Err(TypeError::Mismatch("expected bool, found integer".into()))
        }
        ExprType::UntypedInt => literals_fit(expr, expected),
    }
}

fn unify(op: BinaryOp, lhs: &Expr, lt: ExprType, rhs: &Expr, rt: ExprType) -> Result<ExprType, TypeError> {
    match (lt, rt) {
        (ExprType::UntypedInt, ExprType::UntypedInt) => Ok(ExprType::UntypedInt),
        (ExprType::Known(t), ExprType::UntypedInt) | (ExprType::UntypedInt, ExprType::Known(t)) => {
            if t.is_bool() {
                return Err(TypeError::Mismatch(format!(
                    "operands of `{}` have different types: bool and integer",
                    op.symbol()
                )));
            }
            let untyped = if lt == ExprType::UntypedInt { lhs } else { rhs };
            literals_fit(untyped, t)?;
            Ok(ExprType::Known(t))
        }
        (ExprType::Known(a), ExprType::Known(b)) if a == b => Ok(ExprType::Known(a)),
        (ExprType::Known(a), ExprType::Known(b)) => Err(TypeError::Mismatch(format!(
            "operands of `{}` have different types: {a} and {b}",
            op.symbol()
        ))),
    }
}

/// Every literal inside an untyped subtree must fit the width it adopts.
fn literals_fit(expr: &Expr, ty: ScalarType) -> Result<(), TypeError> {
    match expr {
        Expr::Lit(lit @ Literal::Int(n)) if !lit.fits(ty) => Err(TypeError::Mismatch(format!(
            "literal {n} does not fit in {ty}"
        ))),
        Expr::Unary(_, inner) => literals_fit(inner, ty),
        Expr::Binary(_, l, r) => {
            literals_fit(l, ty)?;
            literals_fit(r, ty)
        }
        _ => Ok(()),
    }
}

fn mismatch(what: &str, expected: &str, found: ExprType) -> TypeError {
    let found = match found {
        ExprType::Known(t) => t.keyword().to_string(),
        ExprType::UntypedInt => "integer".to_string(),
    };
    TypeError::Mismatch(format!("{what} must be {expected}, found {found}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Expr;

    struct Env;
    impl TypeEnv for Env {
        fn attr_type(&self, name: &str) -> Option<ScalarType> {
            match name {
                "b" => Some(ScalarType::Bool),
                "x" => Some(ScalarType::U8),
                "y" => Some(ScalarType::U16),
                _ => None,
            }
        }
        fn param_type(&self, name: &str) -> Option<ScalarType> {
            (name == "p").then_some(ScalarType::U8)
        }
    }

    fn attr(n: &str) -> Expr {
        Expr::Attr(n.into())
    }

    #[test]
    fn literal_adopts_operand_width() {
        let e = Expr::binary(BinaryOp::Add, attr("x"), Expr::int(1));
        assert_eq!(infer(&e, &Env), Ok(ExprType::Known(ScalarType::U8)));
        let e = Expr::binary(BinaryOp::Add, attr("x"), Expr::int(256));
        assert!(matches!(infer(&e, &Env), Err(TypeError::Mismatch(_))));
    }

    #[test]
    fn mixed_widths_rejected() {
        let e = Expr::binary(BinaryOp::Add, attr("x"), attr("y"));
        assert!(matches!(infer(&e, &Env), Err(TypeError::Mismatch(_))));
        let e = Expr::binary(BinaryOp::Lt, attr("x"), Expr::Param("p".into()));
        assert_eq!(infer(&e, &Env), Ok(ExprType::Known(ScalarType::Bool)));
    }

    #[test]
    fn boolean_operators() {
        let e = Expr::binary(BinaryOp::And, attr("b"), Expr::Lit(Literal::Bool(true)));
        assert_eq!(infer(&e, &Env), Ok(ExprType::Known(ScalarType::Bool)));
        let e = Expr::binary(BinaryOp::And, attr("b"), attr("x"));
        assert!(infer(&e, &Env).is_err());
        let e = Expr::Unary(UnaryOp::Not, Box::new(attr("x")));
        assert!(infer(&e, &Env).is_err());
        let e = Expr::binary(BinaryOp::Eq, attr("b"), attr("b"));
        assert_eq!(infer(&e, &Env), Ok(ExprType::Known(ScalarType::Bool)));
        let e = Expr::binary(BinaryOp::Lt, attr("b"), attr("b"));
        assert!(infer(&e, &Env).is_err());
    }

    #[test]
    fn unknown_names() {
        assert_eq!(infer(&attr("zz"), &Env), Err(TypeError::UnknownAttr("zz".into())));
        assert_eq!(
            infer(&Expr::Param("q".into()), &Env),
            Err(TypeError::UnknownParam("q".into()))
        );
    }

    #[test]
    fn slot_checks() {
        assert!(check_against(&Expr::int(255), ScalarType::U8, &Env).is_ok());
        assert!(check_against(&Expr::int(256), ScalarType::U8, &Env).is_err());
        assert!(check_against(&Expr::int(1), ScalarType::Bool, &Env).is_err());
        assert!(check_against(&attr("y"), ScalarType::U8, &Env).is_err());
    }
}
