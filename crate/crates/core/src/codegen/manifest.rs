// SPDX-License-Identifier: Apache-2.0

//! The interface manifest: the one description of the hardware/software
//! boundary that both emitted halves are generated from.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::frontend::pretty;
use crate::ir::Model;
use crate::partition::{boundary, Direction, Partition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayloadField {
    pub name: String,
    pub width_bits: u32,
    /// Bit 0 is the least significant bit of the payload.
    pub bit_offset: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestSignal {
    pub id: u32,
    pub receiver_class: String,
    pub signal: String,
    pub direction: Direction,
    pub payload: Vec<PayloadField>,
    pub payload_total_bits: u32,
}

impl ManifestSignal {
    /// `SIG_<RECEIVERCLASS>_<SIGNAL>`
    pub fn macro_name(&self) -> String {
        macro_name(&self.receiver_class, &self.signal)
    }

    /// Name of the payload-width constant.
    pub fn bits_name(&self) -> String {
        format!("{}_BITS", self.macro_name())
    }
}

pub fn macro_name(class: &str, signal: &str) -> String {
    format!("SIG_{}_{}", class.to_ascii_uppercase(), signal.to_ascii_uppercase())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceManifest {
    /// 64-bit content hash of the canonical model text and the marks that
    /// produce the partition, as 16 hex digits.
    pub model_hash: String,
    pub signals: Vec<ManifestSignal>,
}

impl InterfaceManifest {
    pub fn signal(&self, receiver_class: &str, signal: &str) -> Option<&ManifestSignal> {
        self.signals
            .iter()
            .find(|s| s.receiver_class == receiver_class && s.signal == signal)
    }

    /// Canonical JSON: keys sorted, two-space indentation, trailing newline.
    pub fn to_json(&self) -> String {
        // serde_json's default map is ordered by key.
        let value = serde_json::to_value(self).expect("manifest serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<InterfaceManifest, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Content hash over the canonical model text followed by the canonical marks
/// of the partition.
pub fn model_hash(model: &Model, partition: &Partition) -> String {
    let mut hasher = Sha256::new();
    hasher.update(pretty::model(model).as_bytes());
    hasher.update(pretty::marks(&partition.to_marks()).as_bytes());
    let digest = hasher.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    format!("{:016x}", u64::from_be_bytes(first))
}

/// One entry per boundary signal, ids dense in `(receiver class, signal)`
/// order, payload fields packed in declaration order from bit 0.
pub fn build_manifest(model: &Model, partition: &Partition) -> InterfaceManifest {
    let signals = boundary(model, partition)
        .into_iter()
        .enumerate()
        .map(|(id, b)| {
            let params = model
                .class(&b.receiver_class)
                .and_then(|c| c.signal(&b.signal))
                .map(|s| s.params.as_slice())
                .unwrap_or_default();
            let mut offset = 0;
            let payload = params
                .iter()
                .map(|p| {
                    let field = PayloadField {
                        name: p.name.clone(),
                        width_bits: p.ty.width(),
                        bit_offset: offset,
                    };
                    offset += p.ty.width();
                    field
                })
                .collect();
            ManifestSignal {
                id: id as u32,
                receiver_class: b.receiver_class,
                signal: b.signal,
                direction: b.direction,
                payload,
                payload_total_bits: offset,
            }
        })
        .collect();
    InterfaceManifest {
        model_hash: model_hash(model, partition),
        signals,
    }
}
