// SPDX-License-Identifier: Apache-2.0

//! Model compiler and simulator for a small executable state-machine
//! language.
//!
//! A model is a set of classes, each with attributes, signals and exactly one
//! state machine, plus a fixed population of instances. Instances talk only by
//! sending signals, and each signal is handled as one run-to-completion step.
//!
//! The pipeline:
//!
//! 1. [`frontend`] parses models, marks files and scenarios.
//! 2. [`validate`] checks a model is executable and translatable.
//! 3. [`executor`] runs scenarios under the reference semantics.
//! 4. [`partition`] turns `isHardware` marks into a hardware/software split and
//!    co-simulates the split system against the reference.
//! 5. [`codegen`] derives one interface manifest from the split and emits the
//!    C half and the VHDL half from it.

pub mod cli;
pub mod codegen;
pub mod executor;
pub mod frontend;
pub mod ir;
pub mod partition;
pub mod scalar;
pub mod scenario;
pub mod typing;
pub mod validate;

pub use executor::{run, ExecConfig, Trace};
pub use frontend::{parse_marks, parse_model, parse_scenario};
pub use ir::Model;
pub use partition::{derive_partition, Partition};
pub use scalar::{Literal, ScalarType, Value};
pub use validate::{validate, ValidationReport};
