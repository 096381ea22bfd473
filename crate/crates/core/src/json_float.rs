//! Serde helpers writing `f64` as JSON numbers with 17 significant digits.
//!
//! `serde_json` emits the shortest round-tripping representation; these
//! helpers force a fixed-width scientific form so files are diffable and
//! carry full precision explicitly. Only meaningful with `serde_json`.

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

fn raw(value: f64) -> Result<Box<RawValue>, String> {
    if !value.is_finite() {
        return Err(format!("cannot write non-finite number {value}"));
    }
    RawValue::from_string(format!("{value:.16e}")).map_err(|e| e.to_string())
}

pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw(*value).map_err(S::Error::custom)?.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    f64::deserialize(d)
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let raws = values
            .iter()
            .map(|v| raw(*v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(S::Error::custom)?;
        raws.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<f64>::deserialize(d)
    }
}

/// NaN is written as `null` and read back as NaN.
pub mod nullable {
    use super::*;

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_nan() {
            s.serialize_none()
        } else {
            super::serialize(value, s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// `Option<f64>` with `None` as `null`.
pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => super::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<f64>::deserialize(d)
    }
}
