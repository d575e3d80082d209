// SPDX-License-Identifier: Apache-2.0

//! Re-derives the boundary interface from emitted text and compares it with
//! the manifest.
//!
//! The scan is line-oriented and tolerant of formatting: it only looks for
//! `#define SIG_...` lines in C, `constant SIG_... : natural := ...;` in VHDL,
//! and any other `SIG_` token, which must name a manifest entry.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;

use super::manifest::InterfaceManifest;

static C_DEFINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^[ \t]*#[ \t]*define[ \t]+(SIG_\w+)[ \t]*(.*?)[ \t]*$").unwrap());
static VHDL_CONSTANT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i:constant)\s+(SIG_\w+)\s*:\s*(?i:natural)\s*:=\s*([^;]*?)\s*;").unwrap()
});
static SIG_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\bSIG_\w+").unwrap());

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// `c_header`, `vhdl` or another label given by the caller.
    pub source: String,
    pub message: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.source, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InterfaceReport {
    pub divergences: Vec<Divergence>,
}

impl InterfaceReport {
    pub fn passed(&self) -> bool {
        self.divergences.is_empty()
    }
}

/// Every constant the manifest implies: ids and payload widths by name.
fn expected_constants(manifest: &InterfaceManifest) -> BTreeMap<String, u32> {
    let mut map = BTreeMap::new();
    for s in &manifest.signals {
        map.insert(s.macro_name(), s.id);
        map.insert(s.bits_name(), s.payload_total_bits);
    }
    map
}

/// Passes iff the ids and widths defined in both texts are exactly the
/// manifest's.
pub fn check_interfaces(c_header: &str, vhdl_source: &str, manifest: &InterfaceManifest) -> InterfaceReport {
    let expected = expected_constants(manifest);
    let mut divergences = Vec::new();
    let c_defs = C_DEFINE.captures_iter(c_header).map(|c| (c[1].to_string(), c[2].to_string()));
    compare("c_header", c_defs, &expected, &mut divergences);
    let v_defs = VHDL_CONSTANT
        .captures_iter(vhdl_source)
        .map(|c| (c[1].to_string(), c[2].to_string()));
    compare("vhdl", v_defs, &expected, &mut divergences);
    unknown_tokens("c_header", c_header, &expected, &mut divergences);
    unknown_tokens("vhdl", vhdl_source, &expected, &mut divergences);
    InterfaceReport { divergences }
}

/// Every `SIG_` token in `text` must be a manifest constant. Used on texts
/// that reference the interface without defining it.
pub fn check_references(source: &str, text: &str, manifest: &InterfaceManifest) -> InterfaceReport {
    let mut divergences = Vec::new();
    unknown_tokens(source, text, &expected_constants(manifest), &mut divergences);
    InterfaceReport { divergences }
}

fn compare(
    source: &str,
    defs: impl Iterator<Item = (String, String)>,
    expected: &BTreeMap<String, u32>,
    out: &mut Vec<Divergence>,
) {
    let mut found: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (name, value) in defs {
        found.entry(name).or_default().push(value);
    }
    let push = |out: &mut Vec<Divergence>, message: String| {
        out.push(Divergence {
            source: source.to_string(),
            message,
        })
    };
    for (name, want) in expected {
        match found.get(name).map(Vec::as_slice) {
            None | Some([]) => push(out, format!("missing {name}")),
            Some([value]) => match value.parse::<u32>() {
                Ok(got) if got == *want => {}
                Ok(got) => push(out, format!("{name}: {got} ≠ {want}")),
                Err(_) => push(out, format!("{name}: malformed value `{value}`, expected {want}")),
            },
            Some(values) => push(out, format!("{name} defined {} times", values.len())),
        }
    }
    for name in found.keys().filter(|n| !expected.contains_key(*n)) {
        push(out, format!("unexpected {name}"));
    }
}

fn unknown_tokens(source: &str, text: &str, expected: &BTreeMap<String, u32>, out: &mut Vec<Divergence>) {
    let unknown: BTreeSet<&str> = SIG_TOKEN
        .find_iter(text)
        .map(|m| m.as_str())
        .filter(|t| !expected.contains_key(*t))
        .collect();
    for name in unknown {
        let message = format!("unexpected {name}");
        if !out.iter().any(|d| d.source == source && d.message == message) {
            out.push(Divergence {
                source: source.to_string(),
                message,
            });
        }
    }
}
