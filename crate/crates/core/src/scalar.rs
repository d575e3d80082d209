// SPDX-License-Identifier: Apache-2.0

//! Fixed-width unsigned scalars and their wrapping arithmetic.
//!
//! Every attribute and signal parameter has one of four widths. Arithmetic is
//! performed on the native unsigned type of that width, so wrap-around is
//! exactly modulo `2^width` and matches what a register of that width does.

use std::fmt;

use num_traits::{PrimInt, Unsigned, WrappingAdd, WrappingMul, WrappingNeg, WrappingSub};
use serde::{Serialize, Serializer};

/// Declared type of an attribute or parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarType {
    Bool,
    U8,
    U16,
    U32,
}

impl ScalarType {
    pub const ALL: [ScalarType; 4] = [ScalarType::Bool, ScalarType::U8, ScalarType::U16, ScalarType::U32];

    /// Width in bits.
    pub fn width(self) -> u32 {
        match self {
            ScalarType::Bool => 1,
            ScalarType::U8 => 8,
            ScalarType::U16 => 16,
            ScalarType::U32 => 32,
        }
    }

    /// Largest representable value.
    pub fn max_value(self) -> u32 {
        match self {
            ScalarType::Bool => 1,
            ScalarType::U8 => u8::MAX as u32,
            ScalarType::U16 => u16::MAX as u32,
            ScalarType::U32 => u32::MAX,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ScalarType::Bool => "bool",
            ScalarType::U8 => "u8",
            ScalarType::U16 => "u16",
            ScalarType::U32 => "u32",
        }
    }

    pub fn from_keyword(s: &str) -> Option<ScalarType> {
        ScalarType::ALL.into_iter().find(|t| t.keyword() == s)
    }

    pub fn is_bool(self) -> bool {
        self == ScalarType::Bool
    }

    /// The all-zero value of this type.
    pub fn zero(self) -> Value {
        match self {
            ScalarType::Bool => Value::Bool(false),
            ScalarType::U8 => Value::U8(0),
            ScalarType::U16 => Value::U16(0),
            ScalarType::U32 => Value::U32(0),
        }
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A source-level literal. Integer literals are untyped until they meet a
/// declared type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Literal {
    Bool(bool),
    Int(u32),
}

impl Literal {
    /// Converts to a value of `ty` if the literal has the right kind and fits.
    pub fn to_value(self, ty: ScalarType) -> Option<Value> {
        match (self, ty) {
            (Literal::Bool(b), ScalarType::Bool) => Some(Value::Bool(b)),
            (Literal::Int(_), ScalarType::Bool) | (Literal::Bool(_), _) => None,
            (Literal::Int(n), _) => Value::from_bits(ty, n).filter(|v| v.bits() == n),
        }
    }

    pub fn fits(self, ty: ScalarType) -> bool {
        self.to_value(ty).is_some()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Int(n) => write!(f, "{n}"),
        }
    }
}

/// A runtime value carrying its width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    U8(u8),
    U16(u16),
    U32(u32),
}

impl Value {
    pub fn ty(self) -> ScalarType {
        match self {
            Value::Bool(_) => ScalarType::Bool,
            Value::U8(_) => ScalarType::U8,
            Value::U16(_) => ScalarType::U16,
            Value::U32(_) => ScalarType::U32,
        }
    }

    /// Raw bits, zero-extended.
    pub fn bits(self) -> u32 {
        match self {
            Value::Bool(b) => b as u32,
            Value::U8(v) => v as u32,
            Value::U16(v) => v as u32,
            Value::U32(v) => v,
        }
    }

    /// Builds a value of `ty` from the low `width(ty)` bits of `bits`.
    /// Returns `None` only for a bool with bits other than 0 or 1.
    pub fn from_bits(ty: ScalarType, bits: u32) -> Option<Value> {
        Some(match ty {
            ScalarType::Bool => match bits {
                0 => Value::Bool(false),
                1 => Value::Bool(true),
                _ => return None,
            },
            ScalarType::U8 => Value::U8(bits as u8),
            ScalarType::U16 => Value::U16(bits as u16),
            ScalarType::U32 => Value::U32(bits),
        })
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn to_literal(self) -> Literal {
        match self {
            Value::Bool(b) => Literal::Bool(b),
            other => Literal::Int(other.bits()),
        }
    }

    /// Applies a wrapping arithmetic operator. `None` when the operands are
    /// of different types or boolean.
    pub fn arith(self, op: ArithOp, rhs: Value) -> Option<Value> {
        Some(match (self, rhs) {
            (Value::U8(a), Value::U8(b)) => Value::U8(op.apply(a, b)),
            (Value::U16(a), Value::U16(b)) => Value::U16(op.apply(a, b)),
            (Value::U32(a), Value::U32(b)) => Value::U32(op.apply(a, b)),
            _ => return None,
        })
    }

    /// Two's-complement negation modulo `2^width`.
    pub fn wrapping_neg(self) -> Option<Value> {
        Some(match self {
            Value::U8(a) => Value::U8(negate(a)),
            Value::U16(a) => Value::U16(negate(a)),
            Value::U32(a) => Value::U32(negate(a)),
            Value::Bool(_) => return None,
        })
    }

    /// Unsigned ordering between two values of the same type.
    pub fn compare(self, rhs: Value) -> Option<std::cmp::Ordering> {
        (self.ty() == rhs.ty()).then(|| self.bits().cmp(&rhs.bits()))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            other => write!(f, "{}", other.bits()),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Bool(b) => serializer.serialize_bool(*b),
            other => serializer.serialize_u32(other.bits()),
        }
    }
}

/// Unsigned machine word of one of the supported widths.
pub trait Word: PrimInt + Unsigned + WrappingAdd + WrappingSub + WrappingMul + WrappingNeg {}

impl<T> Word for T where T: PrimInt + Unsigned + WrappingAdd + WrappingSub + WrappingMul + WrappingNeg {}

/// Wrapping arithmetic operators of the action language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn apply<W: Word>(self, a: W, b: W) -> W {
        match self {
            ArithOp::Add => a.wrapping_add(&b),
            ArithOp::Sub => a.wrapping_sub(&b),
            ArithOp::Mul => a.wrapping_mul(&b),
        }
    }
}

fn negate<W: Word>(a: W) -> W {
    a.wrapping_neg()
}
