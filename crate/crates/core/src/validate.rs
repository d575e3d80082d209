// SPDX-License-Identifier: Apache-2.0

//! Static checks that make a model executable and translatable.

use std::collections::HashSet;
use std::fmt;

use crate::ir::{ActionStmt, ClassDef, ElementPath, Expr, Model, SignalDef};
use crate::scalar::ScalarType;
use crate::typing::{check_against, infer, ExprType, TypeEnv, TypeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Stable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Code {
    DupClass,
    DupInstance,
    DupAttr,
    DupSignal,
    DupParam,
    DupState,
    DupTransition,
    NameCollision,
    UnknownClass,
    UnknownSignal,
    UnknownState,
    UnknownInstance,
    UnknownAttr,
    UnknownParam,
    TypeMismatch,
    Arity,
    BadDefault,
    // Partition-time diagnostics.
    MarkPath,
    MarkGranularity,
    MarkType,
    UnknownMark,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::DupClass => "E_DUP_CLASS",
            Code::DupInstance => "E_DUP_INSTANCE",
            Code::DupAttr => "E_DUP_ATTR",
            Code::DupSignal => "E_DUP_SIGNAL",
            Code::DupParam => "E_DUP_PARAM",
            Code::DupState => "E_DUP_STATE",
            Code::DupTransition => "E_DUP_TRANSITION",
            Code::NameCollision => "E_NAME_COLLISION",
            Code::UnknownClass => "E_UNKNOWN_CLASS",
            Code::UnknownSignal => "E_UNKNOWN_SIGNAL",
            Code::UnknownState => "E_UNKNOWN_STATE",
            Code::UnknownInstance => "E_UNKNOWN_INSTANCE",
            Code::UnknownAttr => "E_UNKNOWN_ATTR",
            Code::UnknownParam => "E_UNKNOWN_PARAM",
            Code::TypeMismatch => "E_TYPE_MISMATCH",
            Code::Arity => "E_ARITY",
            Code::BadDefault => "E_BAD_DEFAULT",
            Code::MarkPath => "E_MARK_PATH",
            Code::MarkGranularity => "E_MARK_GRANULARITY",
            Code::MarkType => "E_MARK_TYPE",
            Code::UnknownMark => "W_UNKNOWN_MARK",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub path: ElementPath,
    pub message: String,
    pub severity: Severity,
}

impl Diagnostic {
    pub fn error(code: Code, path: ElementPath, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            path,
            message: message.into(),
            severity: Severity::Error,
        }
    }

    pub fn warning(code: Code, path: ElementPath, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            path,
            message: message.into(),
            severity: Severity::Warning,
        }
    }
}

/// `LEVEL CODE PATH: message`
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}: {}", self.severity, self.code, self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

/// Checks every static rule of the language and reports all violations in
/// document order.
pub fn validate(model: &Model) -> ValidationReport {
    let mut v = Validator {
        model,
        out: Vec::new(),
    };
    v.run();
    ValidationReport { diagnostics: v.out }
}

struct Validator<'m> {
    model: &'m Model,
    out: Vec<Diagnostic>,
}

fn path(segments: &[&str]) -> ElementPath {
    ElementPath::new(segments.iter().copied())
}

impl<'m> Validator<'m> {
    fn error(&mut self, code: Code, path: ElementPath, message: String) {
        self.out.push(Diagnostic::error(code, path, message));
    }

    fn run(&mut self) {
        let mut class_names = HashSet::new();
        for class in &self.model.classes {
            if !class_names.insert(class.name.as_str()) {
                self.error(
                    Code::DupClass,
                    path(&[&class.name]),
                    format!("class `{}` is declared more than once", class.name),
                );
            }
            self.check_class(class);
        }

        let mut instance_names = HashSet::new();
        for inst in &self.model.instances {
            if !instance_names.insert(inst.name.as_str()) {
                self.error(
                    Code::DupInstance,
                    path(&[&inst.name]),
                    format!("instance `{}` is declared more than once", inst.name),
                );
            }
            if class_names.contains(inst.name.as_str()) {
                self.error(
                    Code::NameCollision,
                    path(&[&inst.name]),
                    format!("instance `{}` has the same name as a class", inst.name),
                );
            }
            if self.model.class(&inst.class).is_none() {
                self.error(
                    Code::UnknownClass,
                    path(&[&inst.class]),
                    format!("instance `{}` names undeclared class `{}`", inst.name, inst.class),
                );
            }
        }
    }

    fn check_class(&mut self, class: &'m ClassDef) {
        let cname = class.name.as_str();

        let mut attrs = HashSet::new();
        for attr in &class.attributes {
            if !attrs.insert(attr.name.as_str()) {
                self.error(
                    Code::DupAttr,
                    path(&[cname, &attr.name]),
                    format!("attribute `{}` is declared more than once", attr.name),
                );
            }
            if !attr.default.fits(attr.ty) {
                self.error(
                    Code::BadDefault,
                    path(&[cname, &attr.name]),
                    format!("default `{}` does not fit type {}", attr.default, attr.ty),
                );
            }
        }

        let mut signals = HashSet::new();
        for sig in &class.signals {
            if !signals.insert(sig.name.as_str()) {
                self.error(
                    Code::DupSignal,
                    path(&[cname, &sig.name]),
                    format!("signal `{}` is declared more than once", sig.name),
                );
            }
            if attrs.contains(sig.name.as_str()) {
                self.error(
                    Code::NameCollision,
                    path(&[cname, &sig.name]),
                    format!("signal `{}` has the same name as an attribute", sig.name),
                );
            }
            let mut params = HashSet::new();
            for p in &sig.params {
                if !params.insert(p.name.as_str()) {
                    self.error(
                        Code::DupParam,
                        path(&[cname, &sig.name, &p.name]),
                        format!("parameter `{}` is declared more than once", p.name),
                    );
                }
            }
        }

        let machine = &class.machine;
        let mut states = HashSet::new();
        for st in &machine.states {
            if !states.insert(st.name.as_str()) {
                self.error(
                    Code::DupState,
                    path(&[cname, &st.name]),
                    format!("state `{}` is declared more than once", st.name),
                );
            }
        }
        if class.state(&machine.initial).is_none() {
            self.error(
                Code::UnknownState,
                path(&[cname, &machine.initial]),
                format!("initial state `{}` is not declared", machine.initial),
            );
        }

        for st in &machine.states {
            let mut seen = HashSet::new();
            for t in &st.transitions {
                let trigger = class.signal(&t.signal);
                if trigger.is_none() {
                    self.error(
                        Code::UnknownSignal,
                        path(&[cname, &t.signal]),
                        format!("state `{}` reacts to undeclared signal `{}`", st.name, t.signal),
                    );
                }
                if !seen.insert(t.signal.as_str()) {
                    self.error(
                        Code::DupTransition,
                        path(&[cname, &t.signal]),
                        format!("state `{}` has more than one transition on `{}`", st.name, t.signal),
                    );
                }
                if class.state(&t.target).is_none() {
                    self.error(
                        Code::UnknownState,
                        path(&[cname, &t.target]),
                        format!("transition on `{}` targets undeclared state `{}`", t.signal, t.target),
                    );
                }
                let scope = Scope {
                    class,
                    trigger,
                    trigger_name: &t.signal,
                };
                self.check_block(&scope, &t.actions);
            }
        }
    }

    fn check_block(&mut self, scope: &Scope<'m>, stmts: &'m [ActionStmt]) {
        for stmt in stmts {
            match stmt {
                ActionStmt::Assign { attr, value } => match scope.class.attribute(attr) {
                    None => self.error(
                        Code::UnknownAttr,
                        scope.attr_path(attr),
                        format!("assignment to undeclared attribute `{attr}`"),
                    ),
                    Some(def) => {
                        let at = scope.attr_path(attr);
                        self.check_expr(scope, value, Some(def.ty), at);
                    }
                },
                ActionStmt::Send {
                    instance,
                    signal,
                    args,
                } => self.check_send(scope, instance, signal, args),
                ActionStmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let at = scope.trigger_path();
                    self.check_expr(scope, cond, Some(ScalarType::Bool), at);
                    self.check_block(scope, then_branch);
                    if let Some(else_branch) = else_branch {
                        self.check_block(scope, else_branch);
                    }
                }
            }
        }
    }

    fn check_send(&mut self, scope: &Scope<'m>, instance: &str, signal: &str, args: &'m [Expr]) {
        let Some(inst) = self.model.instance(instance) else {
            self.error(
                Code::UnknownInstance,
                path(&[instance]),
                format!("send to undeclared instance `{instance}`"),
            );
            for arg in args {
                self.check_expr(scope, arg, None, scope.trigger_path());
            }
            return;
        };
        let Some(target_class) = self.model.class(&inst.class) else {
            // Reported on the instance declaration.
            return;
        };
        let Some(sig) = target_class.signal(signal) else {
            self.error(
                Code::UnknownSignal,
                path(&[&target_class.name, signal]),
                format!("class `{}` has no signal `{signal}`", target_class.name),
            );
            return;
        };
        let sig_path = path(&[&target_class.name, &sig.name]);
        if sig.params.len() != args.len() {
            self.error(
                Code::Arity,
                sig_path.clone(),
                format!(
                    "signal `{}` takes {} argument(s), {} given",
                    sig.name,
                    sig.params.len(),
                    args.len()
                ),
            );
        }
        for (arg, param) in args.iter().zip(&sig.params) {
            self.check_expr(scope, arg, Some(param.ty), sig_path.clone());
        }
    }

    fn check_expr(&mut self, scope: &Scope<'m>, expr: &Expr, expected: Option<ScalarType>, at: ElementPath) {
        let result = match expected {
            Some(ty) => check_against(expr, ty, scope),
            None => infer(expr, scope).map(|_: ExprType| ()),
        };
        match result {
            Ok(()) => {}
            Err(TypeError::UnknownAttr(name)) => self.error(
                Code::UnknownAttr,
                scope.attr_path(&name),
                format!("reference to undeclared attribute `{name}`"),
            ),
            Err(TypeError::UnknownParam(name)) => {
                if scope.trigger.is_some() {
                    self.error(
                        Code::UnknownParam,
                        scope.trigger_path().child(name.as_str()),
                        format!("signal `{}` has no parameter `{name}`", scope.trigger_name),
                    );
                }
            }
            Err(TypeError::Mismatch(msg)) => self.error(Code::TypeMismatch, at, msg),
        }
    }
}

struct Scope<'m> {
    class: &'m ClassDef,
    trigger: Option<&'m SignalDef>,
    trigger_name: &'m str,
}

impl Scope<'_> {
    fn attr_path(&self, attr: &str) -> ElementPath {
        path(&[&self.class.name, attr])
    }

    fn trigger_path(&self) -> ElementPath {
        path(&[&self.class.name, self.trigger_name])
    }
}

impl TypeEnv for Scope<'_> {
    fn attr_type(&self, name: &str) -> Option<ScalarType> {
        self.class.attribute(name).map(|a| a.ty)
    }

    fn param_type(&self, name: &str) -> Option<ScalarType> {
        self.trigger.and_then(|s| s.param(name)).map(|p| p.ty)
    }
}

/// Type environment of a transition's actions: the class's attributes and the
/// trigger signal's parameters.
pub struct ActionEnv<'m> {
    pub class: &'m ClassDef,
    pub trigger: &'m SignalDef,
}

impl TypeEnv for ActionEnv<'_> {
    fn attr_type(&self, name: &str) -> Option<ScalarType> {
        self.class.attribute(name).map(|a| a.ty)
    }

    fn param_type(&self, name: &str) -> Option<ScalarType> {
        self.trigger.param(name).map(|p| p.ty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_model;

    const PINGPONG: &str = include_str!("../corpus/pingpong/pingpong.sm");

    fn codes(src: &str) -> Vec<(String, String)> {
        let model = parse_model("t.sm", src).expect("parses");
        validate(&model)
            .diagnostics
            .iter()
            .map(|d| (d.code.as_str().to_string(), d.path.to_string()))
            .collect()
    }

    fn one(code: &str, path: &str) -> Vec<(String, String)> {
        vec![(code.to_string(), path.to_string())]
    }

    #[test]
    fn pingpong_is_clean() {
        assert!(codes(PINGPONG).is_empty());
    }

    #[test]
    fn duplicate_class() {
        let src = "class Ping { statemachine { initial A; state A { } } }
                   class Ping { statemachine { initial A; state A { } } }";
        assert_eq!(codes(src), one("E_DUP_CLASS", "Ping"));
    }

    #[test]
    fn unknown_trigger_signal() {
        let src = "class C { statemachine { initial Waiting; state Waiting { on Foo -> Waiting { } } } }";
        assert_eq!(codes(src), one("E_UNKNOWN_SIGNAL", "C.Foo"));
    }

    #[test]
    fn unknown_states() {
        let src = "class C { signal S(); statemachine { initial Nowhere; state A { on S -> B { } } } }";
        assert_eq!(
            codes(src),
            vec![
                ("E_UNKNOWN_STATE".to_string(), "C.Nowhere".to_string()),
                ("E_UNKNOWN_STATE".to_string(), "C.B".to_string()),
            ]
        );
    }

    #[test]
    fn duplicate_transition() {
        let src = "class C { signal S(); statemachine { initial A; state A { on S -> A { } on S -> A { } } } }";
        assert_eq!(codes(src), one("E_DUP_TRANSITION", "C.S"));
    }

    #[test]
    fn send_checks() {
        let base = "class D { signal P(x: u8); statemachine { initial A; state A { on P -> A { } } } }
                    instance d: D;";
        let with = |body: &str| {
            format!("class C {{ attr a: u16; signal S(); statemachine {{ initial A; state A {{ on S -> A {{ {body} }} }} }} }} {base}")
        };
        assert_eq!(codes(&with("send e.P(1);")), one("E_UNKNOWN_INSTANCE", "e"));
        assert_eq!(codes(&with("send d.Q();")), one("E_UNKNOWN_SIGNAL", "D.Q"));
        assert_eq!(codes(&with("send d.P();")), one("E_ARITY", "D.P"));
        assert_eq!(codes(&with("send d.P(a);")), one("E_TYPE_MISMATCH", "D.P"));
        assert_eq!(codes(&with("send d.P(300);")), one("E_TYPE_MISMATCH", "D.P"));
        assert!(codes(&with("send d.P(255);")).is_empty());
    }

    #[test]
    fn action_names_and_types() {
        let with = |body: &str| {
            format!("class C {{ attr a: u8; attr f: bool; signal S(n: u8); statemachine {{ initial A; state A {{ on S -> A {{ {body} }} }} }} }}")
        };
        assert_eq!(codes(&with("b = 1;")), one("E_UNKNOWN_ATTR", "C.b"));
        assert_eq!(codes(&with("a = b;")), one("E_UNKNOWN_ATTR", "C.b"));
        assert_eq!(codes(&with("a = $m;")), one("E_UNKNOWN_PARAM", "C.S.m"));
        assert_eq!(codes(&with("a = f;")), one("E_TYPE_MISMATCH", "C.a"));
        assert_eq!(codes(&with("if (a) { }")), one("E_TYPE_MISMATCH", "C.S"));
        assert_eq!(codes(&with("f = a + 1 == $n && !f;")), vec![]);
    }

    #[test]
    fn declarations() {
        assert_eq!(
            codes("class C { attr a: u8 = 256; statemachine { initial A; state A { } } }"),
            one("E_BAD_DEFAULT", "C.a")
        );
        assert_eq!(
            codes("class C { attr a: bool = 1; statemachine { initial A; state A { } } }"),
            one("E_BAD_DEFAULT", "C.a")
        );
        assert_eq!(
            codes("class C { attr a: u8; attr a: u8; statemachine { initial A; state A { } } }"),
            one("E_DUP_ATTR", "C.a")
        );
        assert_eq!(
            codes("class C { attr a: u8; signal a(); statemachine { initial A; state A { } } }"),
            one("E_NAME_COLLISION", "C.a")
        );
        assert_eq!(
            codes("class C { signal S(x: u8, x: u8); statemachine { initial A; state A { } } }"),
            one("E_DUP_PARAM", "C.S.x")
        );
        assert_eq!(
            codes("class C { statemachine { initial A; state A { } state A { } } }"),
            one("E_DUP_STATE", "C.A")
        );
        assert_eq!(codes("instance x: Nope;"), one("E_UNKNOWN_CLASS", "Nope"));
        assert_eq!(
            codes("class C { statemachine { initial A; state A { } } } instance c: C; instance c: C;"),
            one("E_DUP_INSTANCE", "c")
        );
        assert_eq!(
            codes("class C { statemachine { initial A; state A { } } } instance C: C;"),
            one("E_NAME_COLLISION", "C")
        );
    }

    #[test]
    fn diagnostics_render_and_order() {
        let src = "class C { signal S(); statemachine { initial A; state A { on X -> B { } } } }";
        let model = parse_model("t.sm", src).unwrap();
        let report = validate(&model);
        let lines: Vec<String> = report.diagnostics.iter().map(ToString::to_string).collect();
        assert_eq!(
            lines,
            vec![
                "error E_UNKNOWN_SIGNAL C.X: state `A` reacts to undeclared signal `X`",
                "error E_UNKNOWN_STATE C.B: transition on `X` targets undeclared state `B`",
            ]
        );
        assert!(!report.is_valid());
        // Pure: same model, same report.
        assert_eq!(validate(&model), report);
    }
}
