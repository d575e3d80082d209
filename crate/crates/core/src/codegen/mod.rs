// SPDX-License-Identifier: Apache-2.0

//! Model compiler backends.
//!
//! Software classes become C, hardware classes become VHDL. Both halves take
//! their boundary constants (signal ids, payload widths, bit layout) from the
//! same [`InterfaceManifest`], so they agree by construction; [`check_interfaces`]
//! re-derives those constants from the emitted text to prove it.

mod c;
mod check;
mod manifest;
mod vhdl;

use std::collections::HashMap;

use crate::ir::Model;
use crate::partition::{Domain, Partition};

pub use c::emit_c;
pub use check::{check_interfaces, check_references, Divergence, InterfaceReport};
pub use manifest::{build_manifest, macro_name, model_hash, InterfaceManifest, ManifestSignal, PayloadField};
pub use vhdl::emit_vhdl;

/// Everything generated for one (model, partition).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOutput {
    pub c_source: String,
    pub c_header: String,
    pub vhdl_source: String,
    pub manifest: InterfaceManifest,
}

/// The four file names for a model called `name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFiles {
    pub c_source: String,
    pub c_header: String,
    pub vhdl_source: String,
    pub manifest: String,
}

impl OutputFiles {
    pub fn for_model(name: &str) -> OutputFiles {
        OutputFiles {
            c_source: format!("{name}_sw.c"),
            c_header: format!("{name}_sw.h"),
            vhdl_source: format!("{name}_hw.vhd"),
            manifest: format!("{name}_interface.json"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodegenError {
    #[error("E_NAME_CLASH `{first}` and `{second}` both mangle to `{mangled}`")]
    NameClash {
        mangled: String,
        first: String,
        second: String,
    },
}

/// Builds the manifest and emits both halves.
///
/// `name` is the model's base name; it appears in file names, the C include
/// guard and the VHDL package and top-level entity names.
pub fn generate(name: &str, model: &Model, partition: &Partition) -> Result<EmitOutput, CodegenError> {
    let manifest = build_manifest(model, partition);
    check_mangling(model, partition, &manifest)?;
    let (c_source, c_header) = emit_c(name, model, partition, &manifest);
    let vhdl_source = emit_vhdl(name, model, partition, &manifest);
    Ok(EmitOutput {
        c_source,
        c_header,
        vhdl_source,
        manifest,
    })
}

/// Turns a file stem into an identifier fragment usable in both languages.
pub(crate) fn sanitize(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_alphabetic()) {
        s.insert(0, 'm');
    }
    s
}

struct Registry {
    seen: HashMap<String, String>,
}

impl Registry {
    fn new() -> Registry {
        Registry { seen: HashMap::new() }
    }

    fn add(&mut self, mangled: String, origin: String) -> Result<(), CodegenError> {
        match self.seen.get(&mangled) {
            Some(first) if *first != origin => Err(CodegenError::NameClash {
                mangled,
                first: first.clone(),
                second: origin,
            }),
            _ => {
                self.seen.insert(mangled, origin);
                Ok(())
            }
        }
    }
}

/// Rejects inputs whose generated names would collide: the boundary macros,
/// and VHDL identifiers (which are case-insensitive) within each hardware
/// entity.
fn check_mangling(model: &Model, partition: &Partition, manifest: &InterfaceManifest) -> Result<(), CodegenError> {
    let mut macros = Registry::new();
    for s in &manifest.signals {
        let origin = format!("{}.{}", s.receiver_class, s.signal);
        macros.add(s.macro_name(), origin.clone())?;
        macros.add(s.bits_name(), format!("{origin} (width)"))?;
    }

    let mut entities = Registry::new();
    for class in model.classes.iter().filter(|c| partition.domain(&c.name) == Domain::Hw) {
        entities.add(vhdl::entity_name(&class.name).to_ascii_lowercase(), class.name.clone())?;
        let mut local = Registry::new();
        for a in &class.attributes {
            local.add(format!("a_{}", a.name).to_ascii_lowercase(), format!("{}.{}", class.name, a.name))?;
        }
        for st in &class.machine.states {
            local.add(format!("st_{}", st.name).to_ascii_lowercase(), format!("{}.{}", class.name, st.name))?;
        }
        for port in vhdl::class_ports(model, class) {
            local.add(port.name.to_ascii_lowercase(), port.origin)?;
        }
    }
    let mut instances = Registry::new();
    for inst in &model.instances {
        if partition.domain(&inst.class) == Domain::Hw {
            instances.add(inst.name.to_ascii_lowercase(), inst.name.clone())?;
        }
    }
    Ok(())
}
