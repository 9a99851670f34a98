use serde::{Deserialize, Serialize};

use super::{Atom, CantorComponent, Segment, SpectralMeasure};
use crate::error::Error;

/// On-disk measure document:
/// `{"atoms": [{x, mass}], "segments": [{a, b, family, c, p, s, xs?, values?}], "cantor": [{a, b, q, weight?}]}`.
/// Unbounded segment ends are written as the strings `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub cantor: Vec<CantorComponent>,
}

impl TryFrom<MeasureSpec> for SpectralMeasure {
    type Error = Error;

    fn try_from(spec: MeasureSpec) -> Result<Self, Error> {
        SpectralMeasure::new(spec.atoms, spec.segments, spec.cantor)
    }
}

impl From<SpectralMeasure> for MeasureSpec {
    fn from(m: SpectralMeasure) -> Self {
        MeasureSpec {
            atoms: m.atoms,
            segments: m.segments,
            cantor: m.cantor,
        }
    }
}

/// Serde adapter for reals that may be infinite.
pub(crate) mod ext_float {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *x == f64::INFINITY {
            s.serialize_str("inf")
        } else if *x == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => other
                    .parse::<f64>()
                    .map_err(|_| D::Error::custom(format!("expected a number or \"inf\", got \"{t}\""))),
            },
        }
    }
}
