// SPDX-License-Identifier: Apache-2.0

//! Hardware/software partitioning driven by marks.
//!
//! Marks live outside the model and are attached to elements by path. The
//! only mark with meaning here is `isHardware`, placed on a class; every
//! class without it is software.

mod cosim;
mod equivalence;

use std::collections::BTreeMap;
use std::fmt;

use crate::ir::{walk_stmts, ActionStmt, ElementPath, Model, Resolved};
use crate::scalar::Literal;
use crate::validate::{Code, Diagnostic, Severity};

pub use cosim::{cosim, BusHop, CosimError, EventPlacement, PartitionedTrace, DEFAULT_LATENCY};
pub use equivalence::{equivalence_check, EquivalenceReport, Level, LevelResult};

/// The mark key selecting the hardware mapping.
pub const IS_HARDWARE: &str = "isHardware";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mark {
    pub key: String,
    pub value: Literal,
    pub path: ElementPath,
}

/// Marks in file order; `(key, path)` pairs are unique.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MarkSet {
    pub marks: Vec<Mark>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Sw,
    Hw,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Sw => "SW",
            Domain::Hw => "HW",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Domain of every class, in class document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    domains: Vec<(String, Domain)>,
}

impl Partition {
    pub fn uniform(model: &Model, domain: Domain) -> Partition {
        Partition {
            domains: model.classes.iter().map(|c| (c.name.clone(), domain)).collect(),
        }
    }

    /// Class `i` (document order) is hardware iff bit `i` of `mask` is set.
    pub fn from_mask(model: &Model, mask: u64) -> Partition {
        Partition {
            domains: model
                .classes
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let hw = i < 64 && mask & (1 << i) != 0;
                    (c.name.clone(), if hw { Domain::Hw } else { Domain::Sw })
                })
                .collect(),
        }
    }

    /// Every partition of the model's classes, by ascending mask.
    pub fn enumerate(model: &Model) -> impl Iterator<Item = Partition> + '_ {
        let k = model.classes.len().min(16) as u32;
        (0..1u64 << k).map(move |mask| Partition::from_mask(model, mask))
    }

    /// Domain of a class. Unknown classes are software.
    pub fn domain(&self, class: &str) -> Domain {
        self.domains
            .iter()
            .find(|(c, _)| c == class)
            .map_or(Domain::Sw, |(_, d)| *d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Domain)> {
        self.domains.iter().map(|(c, d)| (c.as_str(), *d))
    }

    pub fn classes_in(&self, domain: Domain) -> impl Iterator<Item = &str> {
        self.iter().filter(move |(_, d)| *d == domain).map(|(c, _)| c)
    }

    /// Marks that reproduce this partition: one `isHardware` per hardware class.
    pub fn to_marks(&self) -> MarkSet {
        MarkSet {
            marks: self
                .classes_in(Domain::Hw)
                .map(|c| Mark {
                    key: IS_HARDWARE.to_string(),
                    value: Literal::Bool(true),
                    path: ElementPath::new([c]),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Derivation {
    pub partition: Partition,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{} mark error(s)", .0.iter().filter(|d| d.severity == Severity::Error).count())]
pub struct MarkErrors(pub Vec<Diagnostic>);

/// Applies marks to a (validated) model.
///
/// Classes default to software. `isHardware` must be boolean and placed on a
/// class path; other keys are ignored with a warning.
pub fn derive_partition(model: &Model, marks: &MarkSet) -> Result<Derivation, MarkErrors> {
    let mut partition = Partition::uniform(model, Domain::Sw);
    let mut diagnostics = Vec::new();
    for mark in &marks.marks {
        if mark.key != IS_HARDWARE {
            diagnostics.push(Diagnostic::warning(
                Code::UnknownMark,
                mark.path.clone(),
                format!("mark `{}` has no mapping rule and is ignored", mark.key),
            ));
            continue;
        }
        match model.resolve(&mark.path) {
            None => diagnostics.push(Diagnostic::error(
                Code::MarkPath,
                mark.path.clone(),
                format!("`{}` does not name a model element", mark.path),
            )),
            Some(Resolved::Class(class)) => match mark.value {
                Literal::Bool(hw) => {
                    let domain = if hw { Domain::Hw } else { Domain::Sw };
                    for entry in partition.domains.iter_mut().filter(|(c, _)| *c == class.name) {
                        entry.1 = domain;
                    }
                }
                Literal::Int(n) => diagnostics.push(Diagnostic::error(
                    Code::MarkType,
                    mark.path.clone(),
                    format!("`{IS_HARDWARE}` takes a boolean, found {n}"),
                )),
            },
            Some(_) => diagnostics.push(Diagnostic::error(
                Code::MarkGranularity,
                mark.path.clone(),
                format!("`{IS_HARDWARE}` can only be placed on a class, not on `{}`", mark.path),
            )),
        }
    }
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        Err(MarkErrors(diagnostics))
    } else {
        Ok(Derivation {
            partition,
            warnings: diagnostics,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    SwToHw,
    HwToSw,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::SwToHw => "sw_to_hw",
            Direction::HwToSw => "hw_to_sw",
        }
    }

    /// Direction of a send from `sender` into `receiver`, if it crosses.
    pub fn between(sender: Domain, receiver: Domain) -> Option<Direction> {
        match (sender, receiver) {
            (Domain::Sw, Domain::Hw) => Some(Direction::SwToHw),
            (Domain::Hw, Domain::Sw) => Some(Direction::HwToSw),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A signal with at least one send route crossing the partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySignal {
    pub receiver_class: String,
    pub signal: String,
    pub direction: Direction,
    /// `(sender instance, receiver instance)`, sorted.
    pub routes: Vec<(String, String)>,
}

/// Every crossing route of every send action, grouped by receiving class and
/// signal, ordered by `(receiver class, signal)` name.
pub fn boundary(model: &Model, partition: &Partition) -> Vec<BoundarySignal> {
    let mut groups: BTreeMap<(String, String), BoundarySignal> = BTreeMap::new();
    for class in &model.classes {
        let sender_domain = partition.domain(&class.name);
        let mut sends = Vec::new();
        for state in &class.machine.states {
            for t in &state.transitions {
                walk_stmts(&t.actions, &mut |stmt| {
                    if let ActionStmt::Send { instance, signal, .. } = stmt {
                        sends.push((instance, signal));
                    }
                });
            }
        }
        for (receiver, signal) in sends {
            let Some(receiver_class) = model.class_of(receiver) else {
                continue;
            };
            let Some(direction) = Direction::between(sender_domain, partition.domain(&receiver_class.name)) else {
                continue;
            };
            let entry = groups
                .entry((receiver_class.name.clone(), signal.clone()))
                .or_insert_with(|| BoundarySignal {
                    receiver_class: receiver_class.name.clone(),
                    signal: signal.clone(),
                    direction,
                    routes: Vec::new(),
                });
            for sender in model.instances_of(&class.name) {
                entry.routes.push((sender.name.clone(), receiver.clone()));
            }
        }
    }
    groups
        .into_values()
        .map(|mut b| {
            b.routes.sort();
            b.routes.dedup();
            b
        })
        .filter(|b| !b.routes.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_marks, parse_model};
    use crate::validate::Code;

    const PINGPONG: &str = include_str!("../../corpus/pingpong/pingpong.sm");

    fn pingpong() -> Model {
        parse_model("pingpong.sm", PINGPONG).unwrap()
    }

    fn derive(marks: &str) -> Result<Derivation, MarkErrors> {
        derive_partition(&pingpong(), &parse_marks("m.marks", marks).unwrap())
    }

    fn codes(marks: &str) -> Vec<&'static str> {
        match derive(marks) {
            Ok(d) => d.warnings.iter().map(|w| w.code.as_str()).collect(),
            Err(MarkErrors(ds)) => ds.iter().map(|d| d.code.as_str()).collect(),
        }
    }

    #[test]
    fn no_marks_means_all_software() {
        let d = derive("").unwrap();
        assert_eq!(d.partition.domain("Ping"), Domain::Sw);
        assert_eq!(d.partition.domain("Pong"), Domain::Sw);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn hardware_mark_on_class() {
        let d = derive("mark isHardware on Pong;").unwrap();
        assert_eq!(d.partition.domain("Ping"), Domain::Sw);
        assert_eq!(d.partition.domain("Pong"), Domain::Hw);
    }

    #[test]
    fn explicit_false_is_software() {
        let d = derive("mark isHardware = false on Pong;").unwrap();
        assert_eq!(d.partition.domain("Pong"), Domain::Sw);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn mark_errors() {
        assert_eq!(codes("mark isHardware on Nope;"), ["E_MARK_PATH"]);
        assert_eq!(codes("mark isHardware on Ping.Hit;"), ["E_MARK_GRANULARITY"]);
        assert_eq!(codes("mark isHardware on ping;"), ["E_MARK_GRANULARITY"]);
        assert_eq!(codes("mark isHardware = 3 on Pong;"), ["E_MARK_TYPE"]);
        let err = derive("mark isHardware = 3 on Pong;").unwrap_err();
        assert_eq!(err.0[0].code, Code::MarkType);
        assert_eq!(err.0[0].path.to_string(), "Pong");
    }

    #[test]
    fn unknown_key_only_warns() {
        let d = derive("mark fast on Pong; mark isHardware on Pong;").unwrap();
        assert_eq!(d.partition.domain("Pong"), Domain::Hw);
        assert_eq!(d.warnings.len(), 1);
        assert_eq!(d.warnings[0].code.as_str(), "W_UNKNOWN_MARK");
        assert_eq!(d.warnings[0].severity, Severity::Warning);
    }

    #[test]
    fn errors_suppress_partition_but_keep_warnings() {
        let err = derive("mark fast on Pong; mark isHardware on Nope;").unwrap_err();
        assert_eq!(
            err.0.iter().map(|d| d.code.as_str()).collect::<Vec<_>>(),
            ["W_UNKNOWN_MARK", "E_MARK_PATH"]
        );
        assert_eq!(err.to_string(), "1 mark error(s)");
    }

    #[test]
    fn boundary_of_pong_in_hardware() {
        let model = pingpong();
        let p = derive("mark isHardware on Pong;").unwrap().partition;
        assert_eq!(
            boundary(&model, &p),
            vec![BoundarySignal {
                receiver_class: "Pong".into(),
                signal: "Hit".into(),
                direction: Direction::SwToHw,
                routes: vec![("ping".into(), "pong".into())],
            }]
        );
    }

    #[test]
    fn boundary_reverses_with_ping_in_hardware() {
        let model = pingpong();
        let p = derive("mark isHardware on Ping;").unwrap().partition;
        let b = boundary(&model, &p);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].direction, Direction::HwToSw);
    }

    #[test]
    fn uniform_partitions_have_no_boundary() {
        let model = pingpong();
        assert!(boundary(&model, &Partition::uniform(&model, Domain::Sw)).is_empty());
        assert!(boundary(&model, &Partition::uniform(&model, Domain::Hw)).is_empty());
    }

    #[test]
    fn boundary_routes_cover_every_instance_pair() {
        let model = parse_model(
            "t.sm",
            "class A { signal Go(); statemachine { initial S; state S { on Go -> S { send b1.Go(); send b2.Go(); } } } }
             class B { signal Go(); statemachine { initial S; state S { } } }
             instance a2: A; instance a1: A; instance b2: B; instance b1: B;",
        )
        .unwrap();
        let p = derive_partition(&model, &parse_marks("m", "mark isHardware on B;").unwrap())
            .unwrap()
            .partition;
        let b = boundary(&model, &p);
        assert_eq!(b.len(), 1);
        let routes: Vec<(&str, &str)> = b[0].routes.iter().map(|(s, r)| (s.as_str(), r.as_str())).collect();
        assert_eq!(routes, [("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")]);
    }

    #[test]
    fn enumerate_and_marks_round_trip() {
        let model = pingpong();
        let all: Vec<Partition> = Partition::enumerate(&model).collect();
        assert_eq!(all.len(), 4);
        for p in &all {
            let again = derive_partition(&model, &p.to_marks()).unwrap().partition;
            assert_eq!(&again, p);
        }
        assert_eq!(all[0], Partition::uniform(&model, Domain::Sw));
        assert_eq!(all[3], Partition::uniform(&model, Domain::Hw));
    }
}
