// SPDX-License-Identifier: Apache-2.0

//! Co-simulation of a partitioned model.
//!
//! The software and hardware instances form two islands that each follow the
//! reference semantics. Sends inside an island go straight to the receiver's
//! queue; sends across the boundary go through a single FIFO bus and reach the
//! receiver's queue `latency` bus ticks later. One round is: software island
//! step, hardware island step, bus tick.

use std::collections::{HashMap, VecDeque};

use super::{Domain, Partition};
use crate::executor::{
    evaluate_expectations, resolve_scenario, Engine, ExecConfig, ExecError, InjectionQueue, Outcome, Scheduler,
    SignalEnvelope, Trace,
};
use crate::executor::trace::{push_line, EventLine};
use crate::ir::Model;
use crate::scenario::Scenario;

pub const DEFAULT_LATENCY: u64 = 1;

/// Bus timing of a cross-boundary envelope, in bus ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct BusHop {
    pub enqueue_step: u64,
    pub deliver_step: u64,
}

/// Where and how one event of the merged trace happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventPlacement {
    pub domain: Domain,
    /// Set when the dispatched envelope crossed the bus.
    pub bus: Option<BusHop>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedTrace {
    /// Events of both islands in global dispatch order, with global sequence
    /// numbers, so every executor check applies unchanged.
    pub trace: Trace,
    /// One entry per event of `trace`.
    pub placements: Vec<EventPlacement>,
    /// Envelopes that entered the bus.
    pub crossings: u64,
}

impl PartitionedTrace {
    /// The executor's JSON Lines format with `domain`, `bus_enqueue_step` and
    /// `bus_deliver_step` appended to every event line.
    pub fn to_jsonl(&self) -> String {
        #[derive(serde::Serialize)]
        struct Line<'a> {
            #[serde(flatten)]
            event: EventLine<'a>,
            domain: &'static str,
            bus_enqueue_step: Option<u64>,
            bus_deliver_step: Option<u64>,
        }
        let mut out = String::new();
        for (event, placement) in self.trace.events.iter().zip(&self.placements) {
            push_line(
                &mut out,
                &Line {
                    event: EventLine::new(event),
                    domain: placement.domain.as_str(),
                    bus_enqueue_step: placement.bus.map(|b| b.enqueue_step),
                    bus_deliver_step: placement.bus.map(|b| b.deliver_step),
                },
            );
        }
        push_line(&mut out, &self.trace.closing_line());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CosimError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("bus latency must be at least 1")]
    ZeroLatency,
}

/// Runs `scenario` on the partitioned model.
pub fn cosim(
    model: &Model,
    partition: &Partition,
    scenario: &Scenario,
    config: &ExecConfig,
    latency: u64,
) -> Result<PartitionedTrace, CosimError> {
    if latency == 0 {
        return Err(CosimError::ZeroLatency);
    }
    resolve_scenario(model, scenario)?;
    let mut engine = Engine::new(model, config.mode);
    let mut scheduler = Scheduler::new(config.scheduler);
    let mut injections = InjectionQueue::new(scenario);

    let n = engine.state.instances.len();
    let domain_of: Vec<Domain> = (0..n)
        .map(|i| partition.domain(&engine.class_of_instance(i).name))
        .collect();
    let members = |d: Domain| -> Vec<usize> { (0..n).filter(|&i| domain_of[i] == d).collect() };
    let islands = [(Domain::Sw, members(Domain::Sw)), (Domain::Hw, members(Domain::Hw))];

    let mut bus: VecDeque<(SignalEnvelope, u64)> = VecDeque::new();
    let mut hops: HashMap<u64, BusHop> = HashMap::new();
    let mut events = Vec::new();
    let mut placements = Vec::new();
    let mut crossings = 0;
    let mut tick = 0u64;

    let outcome = 'rounds: loop {
        for (domain, island) in &islands {
            let step = engine.state.dispatch_count;
            for inj in injections.due(step) {
                engine.inject(inj);
            }
            if island.iter().all(|&i| engine.state.queues[i].is_empty()) {
                continue;
            }
            if step >= config.max_steps {
                break 'rounds Outcome::StepLimit;
            }
            let receiver = scheduler
                .pick(&engine.state.queues, island.iter().copied())
                .expect("island has a nonempty queue");
            let envelope = engine.state.queues[receiver].pop_front().expect("nonempty");
            let bus_hop = hops.remove(&envelope.seq);
            match engine.dispatch(envelope) {
                Ok((event, sent)) => {
                    for env in sent {
                        let target = engine.instance_index(&env.receiver).expect("declared receiver");
                        if domain_of[target] == *domain {
                            engine.enqueue(env);
                        } else {
                            crossings += 1;
                            bus.push_back((env, tick));
                        }
                    }
                    events.push(event);
                    placements.push(EventPlacement {
                        domain: *domain,
                        bus: bus_hop,
                    });
                }
                Err(e) => break 'rounds Outcome::RuntimeError(e),
            }
        }

        tick += 1;
        while bus.front().is_some_and(|(_, sent_at)| sent_at + latency <= tick) {
            let (env, sent_at) = bus.pop_front().expect("nonempty");
            hops.insert(
                env.seq,
                BusHop {
                    enqueue_step: sent_at,
                    deliver_step: tick,
                },
            );
            engine.enqueue(env);
        }

        if engine.state.is_idle() && bus.is_empty() {
            if injections.is_empty() {
                break Outcome::Quiescent;
            }
            for inj in injections.next_group() {
                engine.inject(inj);
            }
        }
    };

    let expectations = if outcome == Outcome::Quiescent {
        evaluate_expectations(model, &engine, scenario)
    } else {
        Vec::new()
    };
    Ok(PartitionedTrace {
        trace: Trace {
            events,
            final_state: engine.state.snapshot(model),
            outcome,
            expectations,
        },
        placements,
        crossings,
    })
}
