//! Structured test values and their canonical binary form.
//!
//! Every input and output handled by the engine is a [`Datum`]. Equality,
//! hashing and case identity are all defined through the canonical
//! serialization, so two datums are equal exactly when their encodings are
//! byte-equal (floats compare bit-for-bit, `-0.0 != 0.0`).

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

const TAG_NUMBER: u8 = 0;
const TAG_TEXT: u8 = 1;
const TAG_BITS: u8 = 2;
const TAG_VECTOR: u8 = 3;
const TAG_RECORD: u8 = 4;

/// A tagged structured value.
#[derive(Clone, Debug)]
pub enum Datum {
    Number(f64),
    Text(String),
    /// Fixed-width bit vector; index 0 is the first (most significant) bit.
    Bits(Vec<bool>),
    NumVector(Vec<f64>),
    /// Keys are kept sorted bytewise, which is `String`'s natural order.
    Record(BTreeMap<String, Datum>),
}

/// Coarse kind of a datum, without shape information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatumTag {
    Number,
    Text,
    Bits,
    NumVector,
    Record,
}

impl fmt::Display for DatumTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DatumTag::Number => "number",
            DatumTag::Text => "text",
            DatumTag::Bits => "bits",
            DatumTag::NumVector => "num_vector",
            DatumTag::Record => "record",
        };
        f.write_str(s)
    }
}

/// Shape descriptor for a domain: a tag plus optional width/length/field
/// constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatumKind {
    Number,
    Text,
    Bits {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<usize>,
    },
    NumVector {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        len: Option<usize>,
    },
    Record {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fields: Option<BTreeMap<String, DatumKind>>,
    },
}

impl DatumKind {
    pub fn tag(&self) -> DatumTag {
        match self {
            DatumKind::Number => DatumTag::Number,
            DatumKind::Text => DatumTag::Text,
            DatumKind::Bits { .. } => DatumTag::Bits,
            DatumKind::NumVector { .. } => DatumTag::NumVector,
            DatumKind::Record { .. } => DatumTag::Record,
        }
    }

    /// Whether `d` belongs to the domain described by this kind.
    pub fn conforms(&self, d: &Datum) -> bool {
        match (self, d) {
            (DatumKind::Number, Datum::Number(_)) | (DatumKind::Text, Datum::Text(_)) => true,
            (DatumKind::Bits { width }, Datum::Bits(b)) => width.is_none_or(|w| w == b.len()),
            (DatumKind::NumVector { len }, Datum::NumVector(v)) => len.is_none_or(|l| l == v.len()),
            (DatumKind::Record { fields }, Datum::Record(r)) => match fields {
                None => true,
                Some(fields) => {
                    fields.len() == r.len()
                        && fields
                            .iter()
                            .all(|(k, kind)| r.get(k).is_some_and(|v| kind.conforms(v)))
                }
            },
            _ => false,
        }
    }
}

/// 256-bit case identifier: SHA-256 of a datum's canonical serialization.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CaseId(pub [u8; 32]);

impl CaseId {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, DecodeError> {
        let bytes = hex::decode(s).map_err(|_| DecodeError::BadCaseId(s.to_string()))?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| DecodeError::BadCaseId(s.to_string()))?;
        Ok(CaseId(arr))
    }

    /// First 8 bytes as a big-endian integer, mapped to `[0, 1)`.
    pub fn unit_fraction(&self) -> f64 {
        let mut head = [0u8; 8];
        head.copy_from_slice(&self.0[..8]);
        (u64::from_be_bytes(head) >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl fmt::Debug for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CaseId({})", &self.to_hex()[..12])
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CaseId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for CaseId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CaseId::from_hex(&s).map_err(de::Error::custom)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("unexpected end of input at byte {0}")]
    Truncated(usize),
    #[error("unknown datum tag {tag} at byte {at}")]
    UnknownTag { tag: u8, at: usize },
    #[error("invalid UTF-8 in text payload at byte {0}")]
    Utf8(usize),
    #[error("record keys not strictly ascending at byte {0}")]
    KeyOrder(usize),
    #[error("nonzero padding bits in bit payload at byte {0}")]
    Padding(usize),
    #[error("{0} trailing bytes after datum")]
    Trailing(usize),
    #[error("malformed case id {0:?}")]
    BadCaseId(String),
}

impl Datum {
    pub fn tag(&self) -> DatumTag {
        match self {
            Datum::Number(_) => DatumTag::Number,
            Datum::Text(_) => DatumTag::Text,
            Datum::Bits(_) => DatumTag::Bits,
            Datum::NumVector(_) => DatumTag::NumVector,
            Datum::Record(_) => DatumTag::Record,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Datum::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Datum::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Datum::NumVector(v) => Some(v),
            _ => None,
        }
    }

    /// Parses a `0`/`1` string into a bit vector.
    pub fn bits_from_str(s: &str) -> Option<Datum> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Datum::Bits)
    }

    pub fn record<K: Into<String>>(fields: impl IntoIterator<Item = (K, Datum)>) -> Datum {
        Datum::Record(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    /// Appends the canonical serialization of `self` to `out`.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Datum::Number(x) => {
                out.push(TAG_NUMBER);
                out.extend_from_slice(&x.to_bits().to_be_bytes());
            }
            Datum::Text(s) => {
                out.push(TAG_TEXT);
                out.extend_from_slice(&len_u32(s.len()).to_be_bytes());
                out.extend_from_slice(s.as_bytes());
            }
            Datum::Bits(bits) => {
                out.push(TAG_BITS);
                out.extend_from_slice(&len_u32(bits.len()).to_be_bytes());
                for chunk in bits.chunks(8) {
                    let mut byte = 0u8;
                    for (i, &b) in chunk.iter().enumerate() {
                        if b {
                            byte |= 0x80 >> i;
                        }
                    }
                    out.push(byte);
                }
            }
            Datum::NumVector(v) => {
                out.push(TAG_VECTOR);
                out.extend_from_slice(&len_u32(v.len()).to_be_bytes());
                for x in v {
                    out.extend_from_slice(&x.to_bits().to_be_bytes());
                }
            }
            Datum::Record(fields) => {
                out.push(TAG_RECORD);
                out.extend_from_slice(&len_u32(fields.len()).to_be_bytes());
                for (k, v) in fields {
                    out.extend_from_slice(&len_u32(k.len()).to_be_bytes());
                    out.extend_from_slice(k.as_bytes());
                    v.encode_into(out);
                }
            }
        }
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }

    /// Decodes exactly one datum; trailing bytes are an error.
    pub fn decode(bytes: &[u8]) -> Result<Datum, DecodeError> {
        let mut r = Reader { bytes, pos: 0 };
        let d = r.datum()?;
        if r.pos != bytes.len() {
            return Err(DecodeError::Trailing(bytes.len() - r.pos));
        }
        Ok(d)
    }

    pub fn case_id(&self) -> CaseId {
        canonical_hash(self)
    }
}

fn len_u32(n: usize) -> u32 {
    u32::try_from(n).expect("datum component longer than u32::MAX")
}

/// SHA-256 of the canonical serialization.
pub fn canonical_hash(d: &Datum) -> CaseId {
    let digest = Sha256::digest(d.canonical_bytes());
    CaseId(digest.into())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], DecodeError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(DecodeError::Truncated(self.pos)),
        }
    }

    fn u32(&mut self) -> Result<usize, DecodeError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn f64(&mut self) -> Result<f64, DecodeError> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(f64::from_bits(u64::from_be_bytes(a)))
    }

    fn string(&mut self) -> Result<String, DecodeError> {
        let at = self.pos;
        let n = self.u32()?;
        let b = self.take(n)?;
        String::from_utf8(b.to_vec()).map_err(|_| DecodeError::Utf8(at))
    }

    fn datum(&mut self) -> Result<Datum, DecodeError> {
        let at = self.pos;
        let tag = self.take(1)?[0];
        match tag {
            TAG_NUMBER => Ok(Datum::Number(self.f64()?)),
            TAG_TEXT => Ok(Datum::Text(self.string()?)),
            TAG_BITS => {
                let n = self.u32()?;
                let payload_at = self.pos;
                let packed = self.take(n.div_ceil(8))?;
                let bits: Vec<bool> = (0..n).map(|i| packed[i / 8] & (0x80 >> (i % 8)) != 0).collect();
                if n % 8 != 0 {
                    let last = packed[packed.len() - 1];
                    if last & (0xff >> (n % 8)) != 0 {
                        return Err(DecodeError::Padding(payload_at));
                    }
                }
                Ok(Datum::Bits(bits))
            }
            TAG_VECTOR => {
                let n = self.u32()?;
                // Bound the allocation by what the input can actually hold.
                let mut v = Vec::with_capacity(n.min(self.bytes.len() / 8));
                for _ in 0..n {
                    v.push(self.f64()?);
                }
                Ok(Datum::NumVector(v))
            }
            TAG_RECORD => {
                let n = self.u32()?;
                let mut fields = BTreeMap::new();
                let mut prev: Option<String> = None;
                for _ in 0..n {
                    let key_at = self.pos;
                    let k = self.string()?;
                    if prev.as_ref().is_some_and(|p| p.as_bytes() >= k.as_bytes()) {
                        return Err(DecodeError::KeyOrder(key_at));
                    }
                    let v = self.datum()?;
                    prev = Some(k.clone());
                    fields.insert(k, v);
                }
                Ok(Datum::Record(fields))
            }
            tag => Err(DecodeError::UnknownTag { tag, at }),
        }
    }
}

impl PartialEq for Datum {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Datum::Number(a), Datum::Number(b)) => a.to_bits() == b.to_bits(),
            (Datum::Text(a), Datum::Text(b)) => a == b,
            (Datum::Bits(a), Datum::Bits(b)) => a == b,
            (Datum::NumVector(a), Datum::NumVector(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Datum::Record(a), Datum::Record(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Datum {}

impl Hash for Datum {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical_bytes().hash(state);
    }
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Number(x) => write!(f, "{x}"),
            Datum::Text(s) => write!(f, "{s:?}"),
            Datum::Bits(b) => {
                for &bit in b {
                    f.write_str(if bit { "1" } else { "0" })?;
                }
                Ok(())
            }
            Datum::NumVector(v) => write!(f, "{v:?}"),
            Datum::Record(r) => {
                f.write_str("{")?;
                for (i, (k, v)) in r.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}: {v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

// Tagged JSON form used on the subject wire protocol and in config files:
// {"num":x} | {"text":s} | {"bits":"0101"} | {"vec":[...]} | {"rec":{...}}.
// Non-finite numbers are written as the strings "NaN", "inf" and "-inf".

struct JsonNum(f64);

impl Serialize for JsonNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("NaN")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for JsonNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(JsonNum(x)),
            Raw::Str(s) => match s.as_str() {
                "NaN" => Ok(JsonNum(f64::NAN)),
                "inf" => Ok(JsonNum(f64::INFINITY)),
                "-inf" => Ok(JsonNum(f64::NEG_INFINITY)),
                other => Err(de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

impl Serialize for Datum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(1))?;
        match self {
            Datum::Number(x) => map.serialize_entry("num", &JsonNum(*x))?,
            Datum::Text(t) => map.serialize_entry("text", t)?,
            Datum::Bits(_) => map.serialize_entry("bits", &self.to_string())?,
            Datum::NumVector(v) => {
                let v: Vec<JsonNum> = v.iter().map(|&x| JsonNum(x)).collect();
                map.serialize_entry("vec", &v)?
            }
            Datum::Record(r) => map.serialize_entry("rec", r)?,
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Datum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct DatumVisitor;

        impl<'de> Visitor<'de> for DatumVisitor {
            type Value = Datum;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a tagged datum object with one of num/text/bits/vec/rec")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Datum, A::Error> {
                let key: String = map
                    .next_key()?
                    .ok_or_else(|| de::Error::custom("empty datum object"))?;
                let datum = match key.as_str() {
                    "num" => Datum::Number(map.next_value::<JsonNum>()?.0),
                    "text" => Datum::Text(map.next_value()?),
                    "bits" => {
                        let s: String = map.next_value()?;
                        Datum::bits_from_str(&s)
                            .ok_or_else(|| de::Error::custom(format!("invalid bit string {s:?}")))?
                    }
                    "vec" => {
                        let v: Vec<JsonNum> = map.next_value()?;
                        Datum::NumVector(v.into_iter().map(|x| x.0).collect())
                    }
                    "rec" => Datum::Record(map.next_value()?),
                    other => return Err(de::Error::unknown_field(other, &["num", "text", "bits", "vec", "rec"])),
                };
                if map.next_key::<String>()?.is_some() {
                    return Err(de::Error::custom("datum object must have exactly one key"));
                }
                Ok(datum)
            }
        }

        d.deserialize_map(DatumVisitor)
    }
}
