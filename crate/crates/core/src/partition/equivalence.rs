// SPDX-License-Identifier: Apache-2.0

//! Graded comparison of a reference run with a partitioned run.
//!
//! * L1: every (sender, receiver) pair sees the same sequence of signals and
//!   arguments. Always required.
//! * L2: the partitioned trace is causal. Always required.
//! * L3: the final attribute valuations agree. Required only for confluent
//!   scenarios; otherwise reported for information.

use std::collections::HashMap;
use std::fmt;

use super::PartitionedTrace;
use crate::executor::{causality_holds, Trace, TraceEvent};
use crate::scalar::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    L1,
    L2,
    L3,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::L1 => "L1",
            Level::L2 => "L2",
            Level::L3 => "L3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelResult {
    pub level: Level,
    pub required: bool,
    pub pass: bool,
    /// First difference found, when failing.
    pub divergence: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub levels: Vec<LevelResult>,
}

impl EquivalenceReport {
    /// All required levels pass.
    pub fn passed(&self) -> bool {
        self.levels.iter().all(|l| l.pass || !l.required)
    }

    pub fn level(&self, level: Level) -> &LevelResult {
        self.levels.iter().find(|l| l.level == level).expect("all levels reported")
    }

    /// `L1 pass L2 pass L3 pass`, with non-required failures marked.
    pub fn summary(&self) -> String {
        self.levels
            .iter()
            .map(|l| match (l.pass, l.required) {
                (true, _) => format!("{} pass", l.level),
                (false, true) => format!("{} fail", l.level),
                (false, false) => format!("{} fail (informative)", l.level),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn equivalence_check(reference: &Trace, partitioned: &PartitionedTrace, confluent: bool) -> EquivalenceReport {
    let l1 = pair_sequences_diverge(&reference.events, &partitioned.trace.events);
    let l2 = if causality_holds(&partitioned.trace.events) {
        None
    } else {
        Some("partitioned trace dispatches a signal before it was sent".to_string())
    };
    let l3 = valuations_diverge(reference, &partitioned.trace);
    let result = |level, required, divergence: Option<String>| LevelResult {
        level,
        required,
        pass: divergence.is_none(),
        divergence,
    };
    EquivalenceReport {
        levels: vec![
            result(Level::L1, true, l1),
            result(Level::L2, true, l2),
            result(Level::L3, confluent, l3),
        ],
    }
}

type Pair<'a> = (&'a str, &'a str);
type Delivery<'a> = (&'a str, &'a [Value]);

fn per_pair(events: &[TraceEvent]) -> (Vec<Pair<'_>>, HashMap<Pair<'_>, Vec<Delivery<'_>>>) {
    let mut order = Vec::new();
    let mut map: HashMap<Pair<'_>, Vec<Delivery<'_>>> = HashMap::new();
    for e in events {
        let pair = (e.envelope.sender.as_str(), e.envelope.receiver.as_str());
        let entry = map.entry(pair).or_insert_with(|| {
            order.push(pair);
            Vec::new()
        });
        entry.push((e.envelope.signal.as_str(), &e.envelope.args));
    }
    (order, map)
}

fn render(d: Option<&Delivery<'_>>) -> String {
    match d {
        None => "nothing".to_string(),
        Some((signal, args)) => {
            let args: Vec<String> = args.iter().map(ToString::to_string).collect();
            format!("{signal}({})", args.join(", "))
        }
    }
}

fn pair_sequences_diverge(reference: &[TraceEvent], partitioned: &[TraceEvent]) -> Option<String> {
    let (ref_order, ref_map) = per_pair(reference);
    let (part_order, part_map) = per_pair(partitioned);
    let empty = Vec::new();
    let pairs = ref_order
        .iter()
        .chain(part_order.iter().filter(|p| !ref_map.contains_key(*p)));
    for pair in pairs {
        let a = ref_map.get(pair).unwrap_or(&empty);
        let b = part_map.get(pair).unwrap_or(&empty);
        if a == b {
            continue;
        }
        let i = a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
        return Some(format!(
            "pair {}->{} at delivery {i}: reference {} vs partitioned {}",
            pair.0,
            pair.1,
            render(a.get(i)),
            render(b.get(i))
        ));
    }
    None
}

fn valuations_diverge(reference: &Trace, partitioned: &Trace) -> Option<String> {
    let a = reference.final_state.valuation();
    let b = partitioned.final_state.valuation();
    for (x, y) in a.iter().zip(&b) {
        if x != y {
            return Some(format!(
                "{}.{}: reference {} vs partitioned {}",
                x.0, x.1, x.2, y.2
            ));
        }
    }
    (a.len() != b.len()).then(|| "final states cover different attributes".to_string())
}
