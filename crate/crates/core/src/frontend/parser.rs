// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use super::lexer::{tokenize, Tok, Token};
use super::{MarksError, ParseError, SourceLoc};
use crate::ir::{
    ActionStmt, AttributeDef, BinaryOp, ClassDef, ElementPath, Expr, InstanceDecl, Model, ParamDef, SignalDef,
    StateDef, StateMachineDef, TransitionDef, UnaryOp,
};
use crate::partition::{Mark, MarkSet};
use crate::scalar::{Literal, ScalarType};
use crate::scenario::{Expectation, Injection, Scenario};

/// Words that cannot be used as identifiers in model source.
const RESERVED: &[&str] = &[
    "class",
    "attr",
    "signal",
    "statemachine",
    "initial",
    "state",
    "on",
    "send",
    "if",
    "else",
    "instance",
    "true",
    "false",
    "bool",
    "u8",
    "u16",
    "u32",
];

pub(super) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(super) fn new(file: &str, text: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            tokens: tokenize(file, text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn loc(&self) -> SourceLoc {
        self.tokens[self.pos].loc.clone()
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn error<T>(&self, expected: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            loc: self.loc(),
            expected: expected.into(),
            found: self.peek().to_string(),
        })
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(tok.to_string())
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            self.error(format!("`{kw}`"))
        }
    }

    /// Any identifier, reserved or not.
    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => self.error("identifier"),
        }
    }

    /// A model-language identifier: reserved words are rejected.
    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => self.error("identifier"),
        }
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Tok::Int(s) => match s.parse::<u64>() {
                Ok(n) => {
                    self.advance();
                    Ok(n)
                }
                Err(_) => self.error("integer literal in range"),
            },
            _ => self.error("nonnegative integer"),
        }
    }

    fn u32_literal(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Tok::Int(s) => match s.parse::<u32>() {
                Ok(n) => {
                    self.advance();
                    Ok(n)
                }
                Err(_) => self.error(format!("integer literal at most {}", u32::MAX)),
            },
            _ => self.error("integer literal"),
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        if self.at_keyword("true") {
            self.advance();
            Ok(Literal::Bool(true))
        } else if self.at_keyword("false") {
            self.advance();
            Ok(Literal::Bool(false))
        } else if matches!(self.peek(), Tok::Int(_)) {
            self.u32_literal().map(Literal::Int)
        } else {
            self.error("literal")
        }
    }

    fn scalar_type(&mut self) -> Result<ScalarType, ParseError> {
        if let Tok::Ident(s) = self.peek() {
            if let Some(t) = ScalarType::from_keyword(s) {
                self.advance();
                return Ok(t);
            }
        }
        self.error("type (`bool`, `u8`, `u16` or `u32`)")
    }

    // ---- model ----

    pub(super) fn model(mut self) -> Result<Model, ParseError> {
        let mut model = Model::default();
        loop {
            if *self.peek() == Tok::Eof {
                return Ok(model);
            } else if self.at_keyword("class") {
                model.classes.push(self.class_def()?);
            } else if self.at_keyword("instance") {
                model.instances.push(self.instance_decl()?);
            } else {
                return self.error("`class` or `instance`");
            }
        }
    }

    fn class_def(&mut self) -> Result<ClassDef, ParseError> {
        self.expect_keyword("class")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut attributes = Vec::new();
        let mut signals = Vec::new();
        let mut machine = None;
        loop {
            if self.at_keyword("attr") {
                attributes.push(self.attr_def()?);
            } else if self.at_keyword("signal") {
                signals.push(self.signal_def()?);
            } else if self.at_keyword("statemachine") && machine.is_none() {
                machine = Some(self.sm_def()?);
            } else if *self.peek() == Tok::RBrace {
                let Some(machine) = machine else {
                    return self.error("`statemachine` (every class has exactly one)");
                };
                self.advance();
                return Ok(ClassDef {
                    name,
                    attributes,
                    signals,
                    machine,
                });
            } else if machine.is_none() {
                return self.error("`attr`, `signal` or `statemachine`");
            } else {
                return self.error("`attr`, `signal` or `}`");
            }
        }
    }

    fn attr_def(&mut self) -> Result<AttributeDef, ParseError> {
        self.expect_keyword("attr")?;
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let ty = self.scalar_type()?;
        let default = if self.eat(&Tok::Assign) {
            self.literal()?
        } else if ty.is_bool() {
            Literal::Bool(false)
        } else {
            Literal::Int(0)
        };
        self.expect(Tok::Semi)?;
        Ok(AttributeDef { name, ty, default })
    }

    fn signal_def(&mut self) -> Result<SignalDef, ParseError> {
        self.expect_keyword("signal")?;
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let pname = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.scalar_type()?;
                params.push(ParamDef { name: pname, ty });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Semi)?;
        Ok(SignalDef { name, params })
    }

    fn sm_def(&mut self) -> Result<StateMachineDef, ParseError> {
        self.expect_keyword("statemachine")?;
        self.expect(Tok::LBrace)?;
        self.expect_keyword("initial")?;
        let initial = self.ident()?;
        self.expect(Tok::Semi)?;
        let mut states = Vec::new();
        while self.at_keyword("state") {
            states.push(self.state_def()?);
        }
        if *self.peek() != Tok::RBrace {
            return self.error("`state` or `}`");
        }
        self.advance();
        Ok(StateMachineDef { initial, states })
    }

    fn state_def(&mut self) -> Result<StateDef, ParseError> {
        self.expect_keyword("state")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut transitions = Vec::new();
        while self.at_keyword("on") {
            transitions.push(self.transition()?);
        }
        if *self.peek() != Tok::RBrace {
            return self.error("`on` or `}`");
        }
        self.advance();
        Ok(StateDef { name, transitions })
    }

    fn transition(&mut self) -> Result<TransitionDef, ParseError> {
        self.expect_keyword("on")?;
        let signal = self.ident()?;
        self.expect(Tok::Arrow)?;
        let target = self.ident()?;
        let actions = self.block()?;
        Ok(TransitionDef {
            signal,
            target,
            actions,
        })
    }

    fn block(&mut self) -> Result<Vec<ActionStmt>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<ActionStmt, ParseError> {
        if self.at_keyword("send") {
            self.advance();
            let instance = self.ident()?;
            self.expect(Tok::Dot)?;
            let signal = self.ident()?;
            self.expect(Tok::LParen)?;
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    args.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            self.expect(Tok::Semi)?;
            Ok(ActionStmt::Send {
                instance,
                signal,
                args,
            })
        } else if self.at_keyword("if") {
            self.advance();
            self.expect(Tok::LParen)?;
            let cond = self.expr()?;
            self.expect(Tok::RParen)?;
            let then_branch = self.block()?;
            let else_branch = if self.at_keyword("else") {
                self.advance();
                Some(self.block()?)
            } else {
                None
            };
            Ok(ActionStmt::If {
                cond,
                then_branch,
                else_branch,
            })
        } else if matches!(self.peek(), Tok::Ident(s) if !RESERVED.contains(&s.as_str())) {
            let attr = self.ident()?;
            self.expect(Tok::Assign)?;
            let value = self.expr()?;
            self.expect(Tok::Semi)?;
            Ok(ActionStmt::Assign { attr, value })
        } else {
            self.error("statement (assignment, `send`, `if`) or `}`")
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek() {
            Tok::OrOr => BinaryOp::Or,
            Tok::AndAnd => BinaryOp::And,
            Tok::EqEq => BinaryOp::Eq,
            Tok::NotEq => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            _ => return None,
        })
    }

    /// Precedence climbing; all levels are left-associative.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op().filter(|op| op.precedence() >= min_prec) {
            self.advance();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let op = match self.peek() {
            Tok::Bang => UnaryOp::Not,
            Tok::Minus => UnaryOp::Neg,
            _ => return self.primary(),
        };
        self.advance();
        Ok(Expr::Unary(op, Box::new(self.unary()?)))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(_) => Ok(Expr::Lit(Literal::Int(self.u32_literal()?))),
            Tok::Ident(s) if s == "true" || s == "false" => Ok(Expr::Lit(self.literal()?)),
            Tok::Ident(_) => Ok(Expr::Attr(self.ident()?)),
            Tok::Dollar => {
                self.advance();
                Ok(Expr::Param(self.ident()?))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => self.error("expression"),
        }
    }

    fn instance_decl(&mut self) -> Result<InstanceDecl, ParseError> {
        self.expect_keyword("instance")?;
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let class = self.ident()?;
        self.expect(Tok::Semi)?;
        Ok(InstanceDecl { name, class })
    }

    // ---- marks ----

    pub(super) fn marks(mut self) -> Result<MarkSet, MarksError> {
        let mut marks = MarkSet::default();
        let mut seen = HashSet::new();
        while *self.peek() != Tok::Eof {
            if !self.at_keyword("mark") {
                return Err(self.error::<()>("`mark`").unwrap_err().into());
            }
            let loc = self.loc();
            self.advance();
            let key = self.name()?;
            let value = if self.eat(&Tok::Assign) {
                self.literal()?
            } else {
                Literal::Bool(true)
            };
            self.expect_keyword("on")?;
            let mut segments = vec![self.name()?];
            while self.eat(&Tok::Dot) {
                segments.push(self.name()?);
            }
            self.expect(Tok::Semi)?;
            let path = ElementPath::new(segments);
            if !seen.insert((key.clone(), path.clone())) {
                return Err(MarksError::DuplicateMark { loc, key, path });
            }
            marks.marks.push(Mark { key, value, path });
        }
        Ok(marks)
    }

    // ---- scenario ----

    pub(super) fn scenario(mut self) -> Result<Scenario, ParseError> {
        let mut scenario = Scenario::default();
        loop {
            if self.at_keyword("at") {
                self.advance();
                let at = self.int()?;
                self.expect_keyword("send")?;
                let (instance, signal) = self.dotted_pair()?;
                self.expect(Tok::LParen)?;
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        args.push(self.literal()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                scenario.injections.push(Injection {
                    at,
                    instance,
                    signal,
                    args,
                });
            } else if self.at_keyword("expect") {
                self.advance();
                let (instance, attribute) = self.dotted_pair()?;
                self.expect(Tok::EqEq)?;
                let expected = self.literal()?;
                self.expect(Tok::Semi)?;
                scenario.expectations.push(Expectation {
                    instance,
                    attribute,
                    expected,
                });
            } else if self.at_keyword("confluent") {
                self.advance();
                self.expect(Tok::Semi)?;
                scenario.confluent = true;
            } else if *self.peek() == Tok::Eof {
                return Ok(scenario);
            } else {
                return self.error("`at`, `expect` or `confluent`");
            }
        }
    }

    fn dotted_pair(&mut self) -> Result<(String, String), ParseError> {
        let a = self.name()?;
        self.expect(Tok::Dot)?;
        let b = self.name()?;
        Ok((a, b))
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::super::{parse_marks, parse_model, parse_scenario, pretty, tokenize, MarksError, Tok};
    use crate::ir::{ActionStmt, BinaryOp, ElementPath, Expr, UnaryOp};
    use crate::scalar::Literal;

    const PINGPONG: &str = include_str!("../../corpus/pingpong/pingpong.sm");
    const CORPUS: &[&str] = &[
        PINGPONG,
        include_str!("../../corpus/counter/counter.sm"),
        include_str!("../../corpus/race/race.sm"),
        include_str!("../../corpus/params/params.sm"),
        include_str!("../../corpus/chain/chain.sm"),
    ];

    #[test]
    fn empty_model() {
        let m = parse_model("e.sm", "").unwrap();
        assert!(m.classes.is_empty() && m.instances.is_empty());
    }

    #[test]
    fn pingpong_shape() {
        let m = parse_model("pingpong.sm", PINGPONG).unwrap();
        let classes: Vec<_> = m.classes.iter().map(|c| c.name.as_str()).collect();
        let instances: Vec<_> = m.instances.iter().map(|i| i.name.as_str()).collect();
        assert_eq!(classes, ["Ping", "Pong"]);
        assert_eq!(instances, ["ping", "pong"]);
        let waiting = m.classes[0].state("Waiting").unwrap();
        assert_eq!(waiting.transitions.len(), 1);
        let actions = &waiting.transitions[0].actions;
        assert_eq!(actions.len(), 2);
        assert_eq!(
            actions[0],
            ActionStmt::Assign {
                attr: "hits".into(),
                value: Expr::binary(BinaryOp::Add, Expr::Attr("hits".into()), Expr::int(1)),
            }
        );
        assert_eq!(
            actions[1],
            ActionStmt::Send {
                instance: "pong".into(),
                signal: "Hit".into(),
                args: vec![],
            }
        );
    }

    #[test]
    fn class_without_name() {
        let e = parse_model("bad.sm", "class {").unwrap_err();
        assert_eq!((e.loc.line, e.loc.column), (1, 7));
        assert_eq!(e.expected, "identifier");
        assert_eq!(e.to_string(), "bad.sm:1:7: expected identifier, found `{`");
    }

    #[test]
    fn class_needs_one_machine() {
        assert!(parse_model("x", "class C { }").is_err());
        let two = "class C { statemachine { initial A; state A { } } statemachine { initial A; state A { } } }";
        assert!(parse_model("x", two).is_err());
    }

    #[test]
    fn reserved_words_are_not_names() {
        assert!(parse_model("x", "class state { statemachine { initial A; state A { } } }").is_err());
    }

    #[test]
    fn defaults_and_literals() {
        let m = parse_model(
            "x",
            "class C { attr a: u32 = 4294967295; attr b: bool; attr c: u8; statemachine { initial A; state A { } } }",
        )
        .unwrap();
        let defaults: Vec<_> = m.classes[0].attributes.iter().map(|a| a.default).collect();
        assert_eq!(defaults, [Literal::Int(u32::MAX), Literal::Bool(false), Literal::Int(0)]);
        assert!(parse_model("x", "class C { attr a: u32 = 4294967296; statemachine { initial A; state A { } } }").is_err());
    }

    #[test]
    fn precedence() {
        let m = parse_model(
            "x",
            "class C { attr a: bool; signal S(x: u8); statemachine { initial A; state A { on S -> A { a = !a || $x + 2 * 3 < 7 && true; } } } }",
        )
        .unwrap();
        let ActionStmt::Assign { value, .. } = &m.classes[0].machine.states[0].transitions[0].actions[0] else {
            panic!("assignment expected");
        };
        let expected = Expr::binary(
            BinaryOp::Or,
            Expr::Unary(UnaryOp::Not, Box::new(Expr::Attr("a".into()))),
            Expr::binary(
                BinaryOp::And,
                Expr::binary(
                    BinaryOp::Lt,
                    Expr::binary(
                        BinaryOp::Add,
                        Expr::Param("x".into()),
                        Expr::binary(BinaryOp::Mul, Expr::int(2), Expr::int(3)),
                    ),
                    Expr::int(7),
                ),
                Expr::Lit(Literal::Bool(true)),
            ),
        );
        assert_eq!(*value, expected);
        // Left associative.
        assert_eq!(pretty::expr(value), "!a || $x + 2 * 3 < 7 && true");
    }

    #[test]
    fn marks() {
        let set = parse_marks("m", "mark isHardware on Pong;").unwrap();
        assert_eq!(set.marks.len(), 1);
        let m = &set.marks[0];
        assert_eq!((m.key.as_str(), m.value, &m.path), ("isHardware", Literal::Bool(true), &ElementPath::parse("Pong")));
        assert!(parse_marks("m", "").unwrap().marks.is_empty());
        let explicit = parse_marks("m", "mark depth = 4 on Ping.Hit;").unwrap();
        assert_eq!(explicit.marks[0].value, Literal::Int(4));
        assert_eq!(explicit.marks[0].path.segments(), ["Ping", "Hit"]);
        let dup = parse_marks("m", "mark isHardware on Pong;\nmark isHardware on Pong;").unwrap_err();
        assert!(matches!(dup, MarksError::DuplicateMark { .. }));
        assert_eq!(dup.loc().line, 2);
        // Same path, different key: fine.
        assert!(parse_marks("m", "mark a on Pong; mark b on Pong;").is_ok());
    }

    #[test]
    fn scenarios() {
        let s = parse_scenario("s", "at 0 send ping.Hit();").unwrap();
        assert_eq!(s.injections.len(), 1);
        assert_eq!((s.injections[0].at, s.injections[0].instance.as_str()), (0, "ping"));
        let s = parse_scenario("s", "expect pong.hits == 1;").unwrap();
        assert_eq!(s.expectations.len(), 1);
        assert_eq!(s.expectations[0].expected, Literal::Int(1));
        assert!(!s.confluent);
        let e = parse_scenario("s", "at -1 send ping.Hit();").unwrap_err();
        assert_eq!((e.loc.line, e.loc.column), (1, 4));
        let s = parse_scenario("s", "confluent; at 3 send a.B(true, 7);").unwrap();
        assert!(s.confluent);
        assert_eq!(s.injections[0].args, [Literal::Bool(true), Literal::Int(7)]);
    }

    #[test]
    fn corpus_round_trips() {
        for src in CORPUS {
            let m = parse_model("c", src).unwrap();
            let printed = pretty::model(&m);
            assert_eq!(parse_model("p", &printed).unwrap(), m);
            // Printing is a fixed point after one pass.
            assert_eq!(pretty::model(&parse_model("p", &printed).unwrap()), printed);
        }
    }

    #[test]
    fn deterministic_errors() {
        let a = parse_model("x", "class C { attr : u8; }");
        let b = parse_model("x", "class C { attr : u8; }");
        assert_eq!(a, b);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            any::<u32>().prop_map(Expr::int),
            any::<bool>().prop_map(|b| Expr::Lit(Literal::Bool(b))),
            "[a-z][a-z0-9_]{0,3}".prop_filter("not reserved", |s| !super::RESERVED.contains(&s.as_str())).prop_map(Expr::Attr),
            "[a-z][a-z0-9_]{0,3}".prop_map(Expr::Param),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let ops = prop_oneof![
                Just(BinaryOp::Or),
                Just(BinaryOp::And),
                Just(BinaryOp::Eq),
                Just(BinaryOp::Ne),
                Just(BinaryOp::Lt),
                Just(BinaryOp::Le),
                Just(BinaryOp::Gt),
                Just(BinaryOp::Ge),
                Just(BinaryOp::Add),
                Just(BinaryOp::Sub),
                Just(BinaryOp::Mul),
            ];
            prop_oneof![
                (prop_oneof![Just(UnaryOp::Not), Just(UnaryOp::Neg)], inner.clone())
                    .prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
                (ops, inner.clone(), inner).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            ]
        })
    }

    fn wrap(expr: &str) -> String {
        format!("class C {{ signal S(); statemachine {{ initial A; state A {{ on S -> A {{ v = {expr}; }} }} }} }}")
    }

    fn assigned(src: &str) -> Expr {
        let m = parse_model("p", src).unwrap();
        match &m.classes[0].machine.states[0].transitions[0].actions[0] {
            ActionStmt::Assign { value, .. } => value.clone(),
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Offset in `text` of a 1-based (line, column) character position.
    fn offset(text: &str, line: u32, column: u32) -> usize {
        let start: usize = text.split_inclusive('\n').take(line as usize - 1).map(str::len).sum();
        text[start..]
            .char_indices()
            .nth(column as usize - 1)
            .map_or(text.len(), |(i, _)| start + i)
    }

    fn token_text(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) | Tok::Int(s) => s.clone(),
            other => other.to_string().trim_matches('`').to_string(),
        }
    }

    proptest! {
        #[test]
        fn expressions_round_trip(e in arb_expr()) {
            let printed = pretty::expr(&e);
            prop_assert_eq!(assigned(&wrap(&printed)), e);
        }

        /// Replacing any one token with another never moves the reported
        /// error past the next statement boundary.
        #[test]
        fn error_locations_stay_local(
            file in 0..CORPUS.len(),
            pick in any::<prop::sample::Index>(),
            replacement in prop::sample::select(vec![";", "{", "}", "(", ")", "class", "->", "=", "42", "send", ".", "$"]),
        ) {
            let src = CORPUS[file];
            let tokens = tokenize("c", src).unwrap();
            let i = pick.index(tokens.len() - 1); // never the Eof token
            let at = offset(src, tokens[i].loc.line, tokens[i].loc.column);
            let len = token_text(&tokens[i].tok).len();
            // Padding keeps the replacement from fusing with its neighbours.
            let corrupted = format!("{} {} {}", &src[..at], replacement, &src[at + len..]);
            let Err(err) = parse_model("c", &corrupted) else {
                return Ok(());
            };
            let after = tokenize("c", &corrupted).unwrap();
            let boundary = after[i + 1..]
                .iter()
                .find(|t| matches!(t.tok, Tok::Semi | Tok::LBrace | Tok::RBrace | Tok::Eof))
                .unwrap();
            prop_assert!(
                (err.loc.line, err.loc.column) <= (boundary.loc.line, boundary.loc.column),
                "error at {} is past the boundary at {} in:\n{}", err.loc, boundary.loc, corrupted
            );
        }
    }
}
