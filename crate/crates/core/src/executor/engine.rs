// SPDX-License-Identifier: Apache-2.0

//! Single-step execution of transitions and their actions.

use std::collections::VecDeque;

use super::{InstanceState, Mode, RuntimeError, SignalEnvelope, SystemState, TraceEvent, ENV};
use crate::ir::{ActionStmt, BinaryOp, ClassDef, Expr, Model, ModelIndex, UnaryOp};
use crate::scalar::{ArithOp, Literal, ScalarType, Value};
use crate::scenario::Injection;

/// A model plus its dynamic state; the unit every scheduler drives.
pub(crate) struct Engine<'m> {
    model: &'m Model,
    index: ModelIndex,
    mode: Mode,
    pub(crate) state: SystemState,
}

impl<'m> Engine<'m> {
    pub(crate) fn new(model: &'m Model, mode: Mode) -> Engine<'m> {
        let index = ModelIndex::new(model);
        let instances: Vec<InstanceState> = model
            .instances
            .iter()
            .zip(&index.instance_class)
            .map(|(decl, &class)| {
                let def = &model.classes[class];
                InstanceState {
                    name: decl.name.clone(),
                    class,
                    state: index.state(class, &def.machine.initial).unwrap_or(0),
                    attrs: def
                        .attributes
                        .iter()
                        .map(|a| a.default.to_value(a.ty).unwrap_or_else(|| a.ty.zero()))
                        .collect(),
                }
            })
            .collect();
        let queues = vec![VecDeque::new(); instances.len()];
        Engine {
            model,
            index,
            mode,
            state: SystemState {
                instances,
                queues,
                next_seq: 0,
                dispatch_count: 0,
            },
        }
    }

    pub(crate) fn instance_index(&self, name: &str) -> Option<usize> {
        self.index.instance(name)
    }

    pub(crate) fn class_of_instance(&self, instance: usize) -> &'m ClassDef {
        &self.model.classes[self.state.instances[instance].class]
    }

    pub(crate) fn attr_value(&self, instance: &str, attr: &str) -> Option<Value> {
        let i = self.index.instance(instance)?;
        let inst = &self.state.instances[i];
        let a = self.index.attr(inst.class, attr)?;
        inst.attrs.get(a).copied()
    }

    fn allocate_seq(&mut self) -> u64 {
        let seq = self.state.next_seq;
        self.state.next_seq += 1;
        seq
    }

    /// Builds the envelope of a scenario injection, allocating its sequence
    /// number. The scenario must already be resolved.
    pub(crate) fn injection_envelope(&mut self, inj: &Injection) -> SignalEnvelope {
        let class = self.model.class_of(&inj.instance).expect("resolved scenario");
        let sig = class.signal(&inj.signal).expect("resolved scenario");
        let args = inj
            .args
            .iter()
            .zip(&sig.params)
            .map(|(lit, p)| lit.to_value(p.ty).expect("resolved scenario"))
            .collect();
        SignalEnvelope {
            seq: self.allocate_seq(),
            sender: ENV.to_string(),
            receiver: inj.instance.clone(),
            signal: inj.signal.clone(),
            args,
        }
    }

    pub(crate) fn inject(&mut self, inj: &Injection) {
        let env = self.injection_envelope(inj);
        self.enqueue(env);
    }

    /// Appends to the receiver's queue.
    pub(crate) fn enqueue(&mut self, env: SignalEnvelope) {
        if let Some(i) = self.index.instance(&env.receiver) {
            self.state.queues[i].push_back(env);
        }
    }

    /// Runs one run-to-completion step for `env`. Returns the trace event and
    /// the envelopes sent during the step, in send order; routing them is the
    /// caller's business.
    pub(crate) fn dispatch(&mut self, env: SignalEnvelope) -> Result<(TraceEvent, Vec<SignalEnvelope>), RuntimeError> {
        let step = self.state.dispatch_count;
        let receiver = self.index.instance(&env.receiver).expect("envelope to a declared instance");
        let class_idx = self.state.instances[receiver].class;
        let class = &self.model.classes[class_idx];
        let from = self.state.instances[receiver].state;
        let from_name = class.machine.states[from].name.clone();

        let transition = self
            .index
            .signal(class_idx, &env.signal)
            .and_then(|sig| self.index.transition(class_idx, from, sig))
            .map(|t| &class.machine.states[from].transitions[t]);

        let Some(transition) = transition else {
            if self.mode == Mode::Strict {
                return Err(RuntimeError::Unhandled {
                    step,
                    instance: env.receiver.clone(),
                    state: from_name,
                    signal: env.signal.clone(),
                });
            }
            self.state.dispatch_count += 1;
            return Ok((
                TraceEvent {
                    step,
                    envelope: env,
                    from_state: from_name.clone(),
                    to_state: from_name,
                    writes: Vec::new(),
                    sent: Vec::new(),
                    dropped: true,
                },
                Vec::new(),
            ));
        };

        let sig = class.signal(&env.signal).expect("transition signal is declared");
        let mut frame = Frame {
            engine: self,
            class_idx,
            receiver,
            params: sig.params.iter().map(|p| p.name.as_str()).zip(env.args.iter().copied()).collect(),
            writes: Vec::new(),
            sent: Vec::new(),
        };
        frame.exec_block(&transition.actions);
        let Frame { writes, sent, .. } = frame;

        let to = self.index.state(class_idx, &transition.target).expect("validated target");
        self.state.instances[receiver].state = to;
        self.state.dispatch_count += 1;
        Ok((
            TraceEvent {
                step,
                envelope: env,
                from_state: from_name,
                to_state: transition.target.clone(),
                writes,
                sent: sent.iter().map(|e| e.seq).collect(),
                dropped: false,
            },
            sent,
        ))
    }
}

/// Intermediate result of evaluating an expression: integer literals stay
/// untyped (as a value modulo 2^64) until they meet a typed operand or slot.
#[derive(Debug, Clone, Copy)]
enum Operand {
    Typed(Value),
    Untyped(u64),
}

impl Operand {
    fn settle(self, ty: ScalarType) -> Value {
        match self {
            Operand::Typed(v) => v,
            Operand::Untyped(n) => Value::from_bits(ty, n as u32).unwrap_or_else(|| ty.zero()),
        }
    }

    fn as_bool(self) -> bool {
        match self {
            Operand::Typed(v) => v.as_bool().unwrap_or(v.bits() != 0),
            Operand::Untyped(n) => n != 0,
        }
    }
}

struct Frame<'e, 'm> {
    engine: &'e mut Engine<'m>,
    class_idx: usize,
    receiver: usize,
    params: Vec<(&'m str, Value)>,
    writes: Vec<(String, Value)>,
    sent: Vec<SignalEnvelope>,
}

impl<'m> Frame<'_, 'm> {
    fn class(&self) -> &'m ClassDef {
        &self.engine.model.classes[self.class_idx]
    }

    fn exec_block(&mut self, stmts: &'m [ActionStmt]) {
        for stmt in stmts {
            match stmt {
                ActionStmt::Assign { attr, value } => {
                    let Some(a) = self.engine.index.attr(self.class_idx, attr) else {
                        continue;
                    };
                    let ty = self.class().attributes[a].ty;
                    let v = self.eval(value).settle(ty);
                    self.engine.state.instances[self.receiver].attrs[a] = v;
                    self.writes.push((attr.clone(), v));
                }
                ActionStmt::Send {
                    instance,
                    signal,
                    args,
                } => {
                    let model = self.engine.model;
                    let Some(sig) = model.class_of(instance).and_then(|c| c.signal(signal)) else {
                        continue;
                    };
                    let args = args
                        .iter()
                        .zip(&sig.params)
                        .map(|(e, p)| self.eval(e).settle(p.ty))
                        .collect();
                    let seq = self.engine.allocate_seq();
                    self.sent.push(SignalEnvelope {
                        seq,
                        sender: self.engine.state.instances[self.receiver].name.clone(),
                        receiver: instance.clone(),
                        signal: signal.clone(),
                        args,
                    });
                }
                ActionStmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    if self.eval(cond).as_bool() {
                        self.exec_block(then_branch);
                    } else if let Some(else_branch) = else_branch {
                        self.exec_block(else_branch);
                    }
                }
            }
        }
    }

    fn eval(&self, expr: &Expr) -> Operand {
        match expr {
            Expr::Lit(Literal::Bool(b)) => Operand::Typed(Value::Bool(*b)),
            Expr::Lit(Literal::Int(n)) => Operand::Untyped(u64::from(*n)),
            Expr::Attr(name) => {
                let a = self.engine.index.attr(self.class_idx, name);
                let attrs = &self.engine.state.instances[self.receiver].attrs;
                Operand::Typed(a.and_then(|a| attrs.get(a).copied()).unwrap_or(Value::U32(0)))
            }
            Expr::Param(name) => Operand::Typed(
                self.params
                    .iter()
                    .find(|(p, _)| p == name)
                    .map_or(Value::U32(0), |(_, v)| *v),
            ),
            Expr::Unary(UnaryOp::Not, inner) => Operand::Typed(Value::Bool(!self.eval(inner).as_bool())),
            Expr::Unary(UnaryOp::Neg, inner) => match self.eval(inner) {
                Operand::Typed(v) => Operand::Typed(v.wrapping_neg().unwrap_or(v)),
                Operand::Untyped(n) => Operand::Untyped(n.wrapping_neg()),
            },
            Expr::Binary(BinaryOp::And, l, r) => {
                Operand::Typed(Value::Bool(self.eval(l).as_bool() && self.eval(r).as_bool()))
            }
            Expr::Binary(BinaryOp::Or, l, r) => {
                Operand::Typed(Value::Bool(self.eval(l).as_bool() || self.eval(r).as_bool()))
            }
            Expr::Binary(op, l, r) => {
                let (a, b) = (self.eval(l), self.eval(r));
                if let Some(arith) = arith_op(*op) {
                    return match (a, b) {
                        (Operand::Untyped(x), Operand::Untyped(y)) => Operand::Untyped(match arith {
                            ArithOp::Add => x.wrapping_add(y),
                            ArithOp::Sub => x.wrapping_sub(y),
                            ArithOp::Mul => x.wrapping_mul(y),
                        }),
                        (Operand::Typed(x), other) | (other, Operand::Typed(x)) => {
                            let (x, y) = match a {
                                Operand::Typed(_) => (x, other.settle(x.ty())),
                                Operand::Untyped(_) => (other.settle(x.ty()), x),
                            };
                            Operand::Typed(x.arith(arith, y).unwrap_or(x))
                        }
                    };
                }
                let ty = match (a, b) {
                    (Operand::Typed(v), _) | (_, Operand::Typed(v)) => v.ty(),
                    _ => ScalarType::U32,
                };
                let (x, y) = (a.settle(ty), b.settle(ty));
                let ord = x.bits().cmp(&y.bits());
                Operand::Typed(Value::Bool(match op {
                    BinaryOp::Eq => ord.is_eq(),
                    BinaryOp::Ne => ord.is_ne(),
                    BinaryOp::Lt => ord.is_lt(),
                    BinaryOp::Le => ord.is_le(),
                    BinaryOp::Gt => ord.is_gt(),
                    BinaryOp::Ge => ord.is_ge(),
                    _ => unreachable!("logical and arithmetic operators handled above"),
                }))
            }
        }
    }
}

fn arith_op(op: BinaryOp) -> Option<ArithOp> {
    match op {
        BinaryOp::Add => Some(ArithOp::Add),
        BinaryOp::Sub => Some(ArithOp::Sub),
        BinaryOp::Mul => Some(ArithOp::Mul),
        _ => None,
    }
}
