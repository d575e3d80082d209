// SPDX-License-Identifier: Apache-2.0

//! In-memory representation of a model.
//!
//! Values of these types are immutable once built by the frontend. Whether a
//! model is well-formed is answered by [`crate::validate`], not by the types.

use std::collections::HashMap;
use std::fmt;

use crate::scalar::{Literal, ScalarType};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    pub classes: Vec<ClassDef>,
    pub instances: Vec<InstanceDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub name: String,
    pub attributes: Vec<AttributeDef>,
    pub signals: Vec<SignalDef>,
    pub machine: StateMachineDef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDef {
    pub name: String,
    pub ty: ScalarType,
    /// Initial value. The parser fills in zero/false when the source omits it.
    pub default: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalDef {
    pub name: String,
    pub params: Vec<ParamDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDef {
    pub name: String,
    pub ty: ScalarType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachineDef {
    pub initial: String,
    pub states: Vec<StateDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDef {
    pub name: String,
    pub transitions: Vec<TransitionDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDef {
    pub signal: String,
    pub target: String,
    pub actions: Vec<ActionStmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionStmt {
    Assign {
        attr: String,
        value: Expr,
    },
    Send {
        instance: String,
        signal: String,
        args: Vec<Expr>,
    },
    If {
        cond: Expr,
        then_branch: Vec<ActionStmt>,
        else_branch: Option<Vec<ActionStmt>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Not => "!",
            UnaryOp::Neg => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "||",
            BinaryOp::And => "&&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
        }
    }

    /// Binding strength, higher binds tighter. All binary operators are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul => 6,
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::Or | BinaryOp::And)
    }

    pub fn is_equality(self) -> bool {
        matches!(self, BinaryOp::Eq | BinaryOp::Ne)
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge)
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(Literal),
    /// Attribute of the executing instance.
    Attr(String),
    /// Parameter of the triggering signal, written `$name`.
    Param(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int(n: u32) -> Expr {
        Expr::Lit(Literal::Int(n))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceDecl {
    pub name: String,
    pub class: String,
}

/// Dot-separated name of a class, an instance, or a class member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementPath(Vec<String>);

impl ElementPath {
    pub fn new<I, S>(segments: I) -> ElementPath
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ElementPath(segments.into_iter().map(Into::into).collect())
    }

    pub fn parse(text: &str) -> ElementPath {
        ElementPath::new(text.split('.'))
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    pub fn child(&self, name: impl Into<String>) -> ElementPath {
        let mut segments = self.0.clone();
        segments.push(name.into());
        ElementPath(segments)
    }
}

impl fmt::Display for ElementPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("."))
    }
}

/// What an [`ElementPath`] denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolved<'m> {
    Class(&'m ClassDef),
    Instance(&'m InstanceDecl),
    Signal(&'m ClassDef, &'m SignalDef),
    Attribute(&'m ClassDef, &'m AttributeDef),
}

impl Model {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn instance(&self, name: &str) -> Option<&InstanceDecl> {
        self.instances.iter().find(|i| i.name == name)
    }

    /// Class of the named instance.
    pub fn class_of(&self, instance: &str) -> Option<&ClassDef> {
        self.instance(instance).and_then(|i| self.class(&i.class))
    }

    pub fn instances_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a InstanceDecl> + 'a {
        self.instances.iter().filter(move |i| i.class == class)
    }

    /// Looks up the unique element a path names.
    ///
    /// One segment names a class or an instance; two segments name a signal or
    /// attribute of a class. A name that matches more than one element is not
    /// found rather than guessed at.
    pub fn resolve(&self, path: &ElementPath) -> Option<Resolved<'_>> {
        match path.segments() {
            [name] => {
                let class = self.classes.iter().filter(|c| &c.name == name);
                let inst = self.instances.iter().filter(|i| &i.name == name);
                let mut hits = class
                    .map(Resolved::Class)
                    .chain(inst.map(Resolved::Instance));
                unique(&mut hits)
            }
            [class, member] => {
                let mut classes = self.classes.iter().filter(|c| &c.name == class);
                let class = classes.next()?;
                if classes.next().is_some() {
                    return None;
                }
                let signals = class.signals.iter().filter(|s| &s.name == member);
                let attrs = class.attributes.iter().filter(|a| &a.name == member);
                let mut hits = signals
                    .map(|s| Resolved::Signal(class, s))
                    .chain(attrs.map(|a| Resolved::Attribute(class, a)));
                unique(&mut hits)
            }
            _ => None,
        }
    }
}

fn unique<T>(it: &mut impl Iterator<Item = T>) -> Option<T> {
    let first = it.next()?;
    it.next().is_none().then_some(first)
}

impl ClassDef {
    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn signal(&self, name: &str) -> Option<&SignalDef> {
        self.signals.iter().find(|s| s.name == name)
    }

    pub fn state(&self, name: &str) -> Option<&StateDef> {
        self.machine.states.iter().find(|s| s.name == name)
    }
}

impl SignalDef {
    pub fn param(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }
}

impl StateDef {
    pub fn transition_on(&self, signal: &str) -> Option<&TransitionDef> {
        self.transitions.iter().find(|t| t.signal == signal)
    }
}

/// Calls `f` on every statement of a block, recursing into branches.
pub fn walk_stmts<'a>(stmts: &'a [ActionStmt], f: &mut impl FnMut(&'a ActionStmt)) {
    for stmt in stmts {
        f(stmt);
        if let ActionStmt::If {
            then_branch,
            else_branch,
            ..
        } = stmt
        {
            walk_stmts(then_branch, f);
            if let Some(else_branch) = else_branch {
                walk_stmts(else_branch, f);
            }
        }
    }
}

/// Index-based lookup tables over a validated model.
///
/// Indices follow document order. Building an index on a model that fails
/// validation gives unspecified (but memory-safe) lookups.
#[derive(Debug, Clone)]
pub struct ModelIndex {
    class_by_name: HashMap<String, usize>,
    instance_by_name: HashMap<String, usize>,
    /// Class index of each instance.
    pub instance_class: Vec<usize>,
    classes: Vec<ClassTables>,
}

#[derive(Debug, Clone)]
struct ClassTables {
    attrs: HashMap<String, usize>,
    signals: HashMap<String, usize>,
    states: HashMap<String, usize>,
    /// `transitions[state][signal]` = transition index within the state.
    transitions: Vec<Vec<Option<usize>>>,
}

impl ModelIndex {
    pub fn new(model: &Model) -> ModelIndex {
        let class_by_name = first_index(model.classes.iter().map(|c| c.name.as_str()));
        let instance_by_name = first_index(model.instances.iter().map(|i| i.name.as_str()));
        let instance_class = model
            .instances
            .iter()
            .map(|i| class_by_name.get(&i.class).copied().unwrap_or(usize::MAX))
            .collect();
        let classes = model
            .classes
            .iter()
            .map(|c| {
                let signals = first_index(c.signals.iter().map(|s| s.name.as_str()));
                let transitions = c
                    .machine
                    .states
                    .iter()
                    .map(|st| {
                        let mut row = vec![None; c.signals.len()];
                        for (ti, t) in st.transitions.iter().enumerate() {
                            if let Some(&si) = signals.get(&t.signal) {
                                row[si].get_or_insert(ti);
                            }
                        }
                        row
                    })
                    .collect();
                ClassTables {
                    attrs: first_index(c.attributes.iter().map(|a| a.name.as_str())),
                    signals,
                    states: first_index(c.machine.states.iter().map(|s| s.name.as_str())),
                    transitions,
                }
            })
            .collect();
        ModelIndex {
            class_by_name,
            instance_by_name,
            instance_class,
            classes,
        }
    }

    pub fn class(&self, name: &str) -> Option<usize> {
        self.class_by_name.get(name).copied()
    }

    pub fn instance(&self, name: &str) -> Option<usize> {
        self.instance_by_name.get(name).copied()
    }

    pub fn attr(&self, class: usize, name: &str) -> Option<usize> {
        self.classes[class].attrs.get(name).copied()
    }

    pub fn signal(&self, class: usize, name: &str) -> Option<usize> {
        self.classes[class].signals.get(name).copied()
    }

    pub fn state(&self, class: usize, name: &str) -> Option<usize> {
        self.classes[class].states.get(name).copied()
    }

    /// Transition taken by `class` in `state` on `signal`, if any.
    pub fn transition(&self, class: usize, state: usize, signal: usize) -> Option<usize> {
        self.classes[class].transitions[state][signal]
    }
}

fn first_index<'a>(names: impl Iterator<Item = &'a str>) -> HashMap<String, usize> {
    let mut map = HashMap::new();
    for (i, name) in names.enumerate() {
        map.entry(name.to_string()).or_insert(i);
    }
    map
}
