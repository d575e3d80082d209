// SPDX-License-Identifier: Apache-2.0

//! Formal test cases: injected signals plus expectations on the final state.

use crate::scalar::Literal;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    /// In file order.
    pub injections: Vec<Injection>,
    pub expectations: Vec<Expectation>,
    /// The final attribute valuation does not depend on the legal scheduling
    /// order.
    pub confluent: bool,
}

/// `at <step> send <instance>.<signal>(<args>);`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injection {
    pub at: u64,
    pub instance: String,
    pub signal: String,
    pub args: Vec<Literal>,
}

/// `expect <instance>.<attribute> == <literal>;`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub instance: String,
    pub attribute: String,
    pub expected: Literal,
}
