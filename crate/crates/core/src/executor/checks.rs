// SPDX-License-Identifier: Apache-2.0

//! Trace properties that hold for every legal schedule.

use std::collections::{HashMap, HashSet};

use super::{Trace, TraceEvent, ENV};

/// Every non-injected envelope was emitted by an event strictly before the
/// one that dispatches it, and no envelope is dispatched twice.
pub fn check_causality(trace: &Trace) -> bool {
    causality_holds(&trace.events)
}

/// [`check_causality`] over a bare event list; dispatch order is list order.
pub fn causality_holds(events: &[TraceEvent]) -> bool {
    let mut emitted_at: HashMap<u64, usize> = HashMap::new();
    for (pos, e) in events.iter().enumerate() {
        for &seq in &e.sent {
            if emitted_at.insert(seq, pos).is_some() {
                return false;
            }
        }
    }
    let mut dispatched = HashSet::new();
    for (pos, e) in events.iter().enumerate() {
        let seq = e.envelope.seq;
        if !dispatched.insert(seq) {
            return false;
        }
        let ok = match emitted_at.get(&seq) {
            Some(&at) => e.envelope.sender != ENV && at < pos,
            None => e.envelope.sender == ENV,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Envelopes of each (sender, receiver) pair are dispatched in ascending
/// sequence order.
pub fn check_pair_fifo(trace: &Trace) -> bool {
    pair_fifo_holds(&trace.events)
}

pub fn pair_fifo_holds(events: &[TraceEvent]) -> bool {
    let mut last: HashMap<(&str, &str), u64> = HashMap::new();
    for e in events {
        let key = (e.envelope.sender.as_str(), e.envelope.receiver.as_str());
        let seq = e.envelope.seq;
        if let Some(prev) = last.insert(key, seq) {
            if prev >= seq {
                return false;
            }
        }
    }
    true
}
