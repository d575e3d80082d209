// SPDX-License-Identifier: Apache-2.0

//! Reference interpreter.
//!
//! A run repeatedly picks one pending signal and dispatches it as a single
//! run-to-completion step: the receiver's transition for its current state is
//! looked up, its actions execute in order (sends allocate fresh sequence
//! numbers as they execute), and the target state is entered. Nothing else
//! happens in between two steps.
//!
//! Every instance has its own FIFO queue. The scheduler only chooses *which
//! receiver* goes next; it can never reorder a receiver's queue.

mod checks;
mod engine;
pub(crate) mod trace;

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::Model;
use crate::scalar::{Literal, Value};
use crate::scenario::{Injection, Scenario};

pub use checks::{causality_holds, check_causality, check_pair_fifo, pair_fifo_holds};
pub(crate) use engine::Engine;
pub use trace::{ExpectationResult, InstanceSnapshot, Outcome, Snapshot, Trace, TraceEvent};

/// Sender name of scenario injections.
pub const ENV: &str = "$env";

pub const DEFAULT_MAX_STEPS: u64 = 10_000;

/// A signal in flight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalEnvelope {
    /// Global send order, unique within a run.
    pub seq: u64,
    /// Sending instance, or [`ENV`].
    pub sender: String,
    pub receiver: String,
    pub signal: String,
    pub args: Vec<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerKind {
    /// Always the pending signal with the smallest sequence number.
    GlobalFifo,
    /// A uniformly chosen receiver with pending signals, then its oldest one.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// A signal with no transition in the receiver's state is an error.
    #[default]
    Strict,
    /// Such a signal is consumed and recorded as dropped.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    pub scheduler: SchedulerKind,
    pub mode: Mode,
    pub max_steps: u64,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            scheduler: SchedulerKind::GlobalFifo,
            mode: Mode::Strict,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl ExecConfig {
    pub fn random(seed: u64) -> ExecConfig {
        ExecConfig {
            scheduler: SchedulerKind::Random { seed },
            ..ExecConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceState {
    pub name: String,
    pub class: usize,
    pub state: usize,
    /// Attribute values in declaration order.
    pub attrs: Vec<Value>,
}

/// Complete dynamic state of a running model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemState {
    pub instances: Vec<InstanceState>,
    /// One FIFO per instance, indexed like `instances`.
    pub queues: Vec<VecDeque<SignalEnvelope>>,
    pub next_seq: u64,
    pub dispatch_count: u64,
}

impl SystemState {
    pub fn is_idle(&self) -> bool {
        self.queues.iter().all(VecDeque::is_empty)
    }

    pub fn snapshot(&self, model: &Model) -> Snapshot {
        Snapshot {
            instances: self
                .instances
                .iter()
                .map(|inst| {
                    let class = &model.classes[inst.class];
                    InstanceSnapshot {
                        name: inst.name.clone(),
                        state: class.machine.states[inst.state].name.clone(),
                        attrs: class
                            .attributes
                            .iter()
                            .zip(&inst.attrs)
                            .map(|(a, v)| (a.name.clone(), *v))
                            .collect(),
                    }
                })
                .collect(),
        }
    }
}

/// Initial state of a validated model: initial states, declared defaults,
/// empty queues.
pub fn init(model: &Model) -> SystemState {
    Engine::new(model, Mode::Strict).state
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("E_SCENARIO_REF {}", .0.join("; "))]
    ScenarioRef(Vec<String>),
}

/// Dynamic failure inside a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuntimeError {
    /// Strict mode: the receiver has no transition for the signal.
    Unhandled {
        step: u64,
        instance: String,
        state: String,
        signal: String,
    },
}

impl RuntimeError {
    pub fn code(&self) -> &'static str {
        match self {
            RuntimeError::Unhandled { .. } => "E_UNHANDLED",
        }
    }
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeError::Unhandled {
                step,
                instance,
                state,
                signal,
            } => write!(
                f,
                "E_UNHANDLED at step {step}: {instance} in state {state} has no transition on {signal}"
            ),
        }
    }
}

/// Checks that every injection and expectation refers to something that
/// exists, with arguments of the right arity and type.
pub fn resolve_scenario(model: &Model, scenario: &Scenario) -> Result<(), ExecError> {
    let mut problems = Vec::new();
    for inj in &scenario.injections {
        let Some(class) = model.class_of(&inj.instance) else {
            problems.push(format!("unknown instance `{}`", inj.instance));
            continue;
        };
        let Some(sig) = class.signal(&inj.signal) else {
            problems.push(format!("class `{}` has no signal `{}`", class.name, inj.signal));
            continue;
        };
        if sig.params.len() != inj.args.len() {
            problems.push(format!(
                "`{}.{}` takes {} argument(s), {} given",
                inj.instance,
                inj.signal,
                sig.params.len(),
                inj.args.len()
            ));
            continue;
        }
        for (arg, p) in inj.args.iter().zip(&sig.params) {
            if !arg.fits(p.ty) {
                problems.push(format!(
                    "argument `{arg}` of `{}.{}` does not fit parameter `{}: {}`",
                    inj.instance, inj.signal, p.name, p.ty
                ));
            }
        }
    }
    for exp in &scenario.expectations {
        let Some(class) = model.class_of(&exp.instance) else {
            problems.push(format!("unknown instance `{}`", exp.instance));
            continue;
        };
        match class.attribute(&exp.attribute) {
            None => problems.push(format!("class `{}` has no attribute `{}`", class.name, exp.attribute)),
            Some(a) if !exp.expected.fits(a.ty) => problems.push(format!(
                "expected value `{}` does not fit `{}.{}: {}`",
                exp.expected, exp.instance, exp.attribute, a.ty
            )),
            Some(_) => {}
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(ExecError::ScenarioRef(problems))
    }
}

/// Chooses which receiver is dispatched next.
pub(crate) enum Scheduler {
    GlobalFifo,
    Random(Box<ChaCha8Rng>),
}

impl Scheduler {
    pub(crate) fn new(kind: SchedulerKind) -> Scheduler {
        match kind {
            SchedulerKind::GlobalFifo => Scheduler::GlobalFifo,
            SchedulerKind::Random { seed } => Scheduler::Random(Box::new(ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    /// Picks among the instances in `candidates` whose queue is nonempty.
    pub(crate) fn pick(
        &mut self,
        queues: &[VecDeque<SignalEnvelope>],
        candidates: impl Iterator<Item = usize>,
    ) -> Option<usize> {
        let ready = candidates.filter(|&i| !queues[i].is_empty());
        match self {
            Scheduler::GlobalFifo => ready.min_by_key(|&i| queues[i][0].seq),
            Scheduler::Random(rng) => {
                let ready: Vec<usize> = ready.collect();
                if ready.is_empty() {
                    None
                } else {
                    Some(ready[rng.gen_range(0..ready.len())])
                }
            }
        }
    }
}

/// Scenario injections not yet enqueued, in (step, file) order.
pub(crate) struct InjectionQueue<'s> {
    pending: VecDeque<&'s Injection>,
}

impl<'s> InjectionQueue<'s> {
    pub(crate) fn new(scenario: &'s Scenario) -> InjectionQueue<'s> {
        let mut all: Vec<&Injection> = scenario.injections.iter().collect();
        all.sort_by_key(|inj| inj.at);
        InjectionQueue { pending: all.into() }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    /// Injections due before dispatch step `step`.
    pub(crate) fn due(&mut self, step: u64) -> Vec<&'s Injection> {
        let mut out = Vec::new();
        while self.pending.front().is_some_and(|inj| inj.at <= step) {
            out.extend(self.pending.pop_front());
        }
        out
    }

    /// At quiescence: the earliest remaining group, which resumes the run.
    pub(crate) fn next_group(&mut self) -> Vec<&'s Injection> {
        match self.pending.front() {
            Some(first) => {
                let at = first.at;
                self.due(at)
            }
            None => Vec::new(),
        }
    }
}

/// Executes `scenario` against `model` until quiescence, the step limit, or
/// a runtime error.
///
/// Injections at step `N` are enqueued (in file order, sender [`ENV`]) before
/// dispatch step `N`. Injections scheduled after the system went quiet are
/// enqueued when it does, resuming the run. Expectations are evaluated only
/// for a quiescent outcome.
pub fn run(model: &Model, scenario: &Scenario, config: &ExecConfig) -> Result<Trace, ExecError> {
    resolve_scenario(model, scenario)?;
    let mut engine = Engine::new(model, config.mode);
    let mut scheduler = Scheduler::new(config.scheduler);
    let mut injections = InjectionQueue::new(scenario);
    let mut events = Vec::new();
    let n = engine.state.instances.len();

    let outcome = loop {
        let step = engine.state.dispatch_count;
        for inj in injections.due(step) {
            engine.inject(inj);
        }
        if engine.state.is_idle() {
            if injections.is_empty() {
                break Outcome::Quiescent;
            }
            for inj in injections.next_group() {
                engine.inject(inj);
            }
            continue;
        }
        if step >= config.max_steps {
            break Outcome::StepLimit;
        }
        let Some(receiver) = scheduler.pick(&engine.state.queues, 0..n) else {
            unreachable!("a nonempty queue exists");
        };
        let envelope = engine.state.queues[receiver]
            .pop_front()
            .expect("picked queue is nonempty");
        match engine.dispatch(envelope) {
            Ok((event, sent)) => {
                for env in sent {
                    engine.enqueue(env);
                }
                events.push(event);
            }
            Err(e) => break Outcome::RuntimeError(e),
        }
    };

    let expectations = if outcome == Outcome::Quiescent {
        evaluate_expectations(model, &engine, scenario)
    } else {
        Vec::new()
    };
    Ok(Trace {
        events,
        final_state: engine.state.snapshot(model),
        outcome,
        expectations,
    })
}

pub(crate) fn evaluate_expectations(model: &Model, engine: &Engine<'_>, scenario: &Scenario) -> Vec<ExpectationResult> {
    scenario
        .expectations
        .iter()
        .filter_map(|exp| {
            let actual = engine.attr_value(&exp.instance, &exp.attribute)?;
            let class = model.class_of(&exp.instance)?;
            let ty = class.attribute(&exp.attribute)?.ty;
            let expected: Literal = exp.expected;
            Some(ExpectationResult {
                path: format!("{}.{}", exp.instance, exp.attribute),
                expected,
                actual,
                pass: expected.to_value(ty) == Some(actual),
            })
        })
        .collect()
}
