// SPDX-License-Identifier: Apache-2.0

//! Execution traces and their JSON Lines form.
//!
//! One line per dispatched signal with the keys `step, seq, sender, receiver,
//! signal, args, from, to, writes, sent, dropped` in that order, then one
//! closing line with `outcome, final, expectations`. The layout is a golden
//! file contract: key order and number formatting never change.

use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::{RuntimeError, SignalEnvelope};
use crate::scalar::{Literal, Value};

/// One run-to-completion step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    /// Dispatch index, from 0.
    pub step: u64,
    pub envelope: SignalEnvelope,
    pub from_state: String,
    pub to_state: String,
    /// Every assignment executed, in order.
    pub writes: Vec<(String, Value)>,
    /// Sequence numbers allocated by sends during this step.
    pub sent: Vec<u64>,
    /// Lenient mode only: no transition existed and the signal was consumed.
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Quiescent,
    StepLimit,
    RuntimeError(RuntimeError),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Quiescent => f.write_str("quiescent"),
            Outcome::StepLimit => f.write_str("step-limit"),
            Outcome::RuntimeError(e) => write!(f, "runtime-error({e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSnapshot {
    pub name: String,
    pub state: String,
    pub attrs: Vec<(String, Value)>,
}

/// Current state and attribute valuation of every instance, in document
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Snapshot {
    pub instances: Vec<InstanceSnapshot>,
}

impl Snapshot {
    pub fn get(&self, instance: &str, attr: &str) -> Option<Value> {
        let inst = self.instances.iter().find(|i| i.name == instance)?;
        inst.attrs.iter().find(|(a, _)| a == attr).map(|(_, v)| *v)
    }

    /// Attribute values only, ignoring machine states.
    pub fn valuation(&self) -> Vec<(&str, &str, Value)> {
        self.instances
            .iter()
            .flat_map(|i| i.attrs.iter().map(move |(a, v)| (i.name.as_str(), a.as_str(), *v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpectationResult {
    /// `instance.attribute`
    pub path: String,
    pub expected: Literal,
    pub actual: Value,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub final_state: Snapshot,
    pub outcome: Outcome,
    /// Empty unless the outcome is quiescent.
    pub expectations: Vec<ExpectationResult>,
}

impl Trace {
    pub fn expectations_passed(&self) -> usize {
        self.expectations.iter().filter(|e| e.pass).count()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            push_line(&mut out, &EventLine::new(event));
        }
        push_line(&mut out, &self.closing_line());
        out
    }

    pub(crate) fn closing_line(&self) -> ClosingLine<'_> {
        ClosingLine {
            outcome: self.outcome.to_string(),
            final_state: &self.final_state,
            expectations: &self.expectations,
        }
    }
}

pub(crate) fn push_line<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string(value).expect("trace lines serialize"));
    out.push('\n');
}

impl Serialize for Literal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Literal::Bool(b) => serializer.serialize_bool(*b),
            Literal::Int(n) => serializer.serialize_u32(*n),
        }
    }
}

#[derive(Serialize)]
struct WriteLine<'a> {
    attr: &'a str,
    value: Value,
}

#[derive(Serialize)]
pub(crate) struct EventLine<'a> {
    step: u64,
    seq: u64,
    sender: &'a str,
    receiver: &'a str,
    signal: &'a str,
    args: &'a [Value],
    from: &'a str,
    to: &'a str,
    writes: Vec<WriteLine<'a>>,
    sent: &'a [u64],
    dropped: bool,
}

impl<'a> EventLine<'a> {
    pub(crate) fn new(e: &'a TraceEvent) -> EventLine<'a> {
        EventLine {
            step: e.step,
            seq: e.envelope.seq,
            sender: &e.envelope.sender,
            receiver: &e.envelope.receiver,
            signal: &e.envelope.signal,
            args: &e.envelope.args,
            from: &e.from_state,
            to: &e.to_state,
            writes: e.writes.iter().map(|(attr, value)| WriteLine { attr, value: *value }).collect(),
            sent: &e.sent,
            dropped: e.dropped,
        }
    }
}

#[derive(Serialize)]
pub(crate) struct ClosingLine<'a> {
    outcome: String,
    #[serde(rename = "final")]
    final_state: &'a Snapshot,
    expectations: &'a [ExpectationResult],
}

/// `{"<instance>": {"state": ..., "attrs": {"<attr>": value, ...}}, ...}` in
/// document order.
impl Serialize for Snapshot {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.instances.len()))?;
        for inst in &self.instances {
            map.serialize_entry(&inst.name, &InstanceLine(inst))?;
        }
        map.end()
    }
}

struct InstanceLine<'a>(&'a InstanceSnapshot);

impl Serialize for InstanceLine<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("state", &self.0.state)?;
        map.serialize_entry("attrs", &AttrsLine(&self.0.attrs))?;
        map.end()
    }
}

struct AttrsLine<'a>(&'a [(String, Value)]);

impl Serialize for AttrsLine<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, value) in self.0 {
            map.serialize_entry(name, value)?;
        }
        map.end()
    }
}
