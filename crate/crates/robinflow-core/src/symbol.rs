//! Equivariant Robin data `n ↦ τ_n` on the unit circle.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A rule assigning the Robin coefficient `τ_n` to each angular mode.
///
/// Serialized as `{"kind": "zero"}`, `{"kind": "constant", "c": x}`,
/// `{"kind": "affine", "a": x, "c": y}` (meaning `a|n| + c`) or
/// `{"kind": "table", "values": {"n": τ_n, ...}, "default": {...}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RobinSymbol {
    #[default]
    Zero,
    Constant { c: f64 },
    Affine { a: f64, c: f64 },
    Table {
        #[serde(with = "mode_keys")]
        values: BTreeMap<i64, f64>,
        default: Box<RobinSymbol>,
    },
}

// JSON object keys are strings; tagged enums buffer their content, which
// loses serde_json's integer-key coercion, so convert by hand.
mod mode_keys {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(map: &BTreeMap<i64, f64>, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_map(map.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BTreeMap<i64, f64>, D::Error> {
        BTreeMap::<String, f64>::deserialize(de)?
            .into_iter()
            .map(|(k, v)| k.trim().parse::<i64>().map(|n| (n, v)).map_err(|_| D::Error::custom(format!("mode key {k:?} is not an integer"))))
            .collect()
    }
}

impl RobinSymbol {
    pub fn constant(c: f64) -> Self {
        RobinSymbol::Constant { c }
    }

    pub fn value(&self, n: i64) -> f64 {
        match self {
            RobinSymbol::Zero => 0.0,
            RobinSymbol::Constant { c } => *c,
            RobinSymbol::Affine { a, c } => a * n.unsigned_abs() as f64 + c,
            RobinSymbol::Table { values, default } => values.get(&n).copied().unwrap_or_else(|| default.value(n)),
        }
    }

    /// Growth order in |n|: 1 for a non-zero affine slope, else 0.
    pub fn order(&self) -> f64 {
        match self {
            RobinSymbol::Zero | RobinSymbol::Constant { .. } => 0.0,
            RobinSymbol::Affine { a, .. } => {
                if *a == 0.0 { 0.0 } else { 1.0 }
            }
            RobinSymbol::Table { default, .. } => default.order(),
        }
    }

    /// Smallest C with `|τ_n| ≤ C (1+|n|)^order` for all n.
    pub fn bound_constant(&self) -> f64 {
        match self {
            RobinSymbol::Zero => 0.0,
            RobinSymbol::Constant { c } => c.abs(),
            // (a n + c)/(1 + n) is monotone in n, so the extremes are at 0 and ∞
            RobinSymbol::Affine { a, c } => a.abs().max(c.abs()),
            RobinSymbol::Table { values, default } => {
                let ord = self.order();
                values
                    .iter()
                    .map(|(&n, &v)| v.abs() / (1.0 + n.unsigned_abs() as f64).powf(ord))
                    .fold(default.bound_constant(), f64::max)
            }
        }
    }

    /// Largest |τ_n| over |n| ≤ m.
    pub fn sup_abs(&self, m: u64) -> f64 {
        let m = m as i64;
        (-m..=m).map(|n| self.value(n).abs()).fold(0.0, f64::max)
    }

    /// Rejects non-finite parameters.
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            RobinSymbol::Zero => true,
            RobinSymbol::Constant { c } => c.is_finite(),
            RobinSymbol::Affine { a, c } => a.is_finite() && c.is_finite(),
            RobinSymbol::Table { values, default } => {
                default.validate()?;
                values.values().all(|v| v.is_finite())
            }
        };
        if ok { Ok(()) } else { Err(Error::Validation("Robin symbol has a non-finite value".into())) }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sym: RobinSymbol = serde_json::from_str(s).map_err(|e| Error::Validation(format!("bad Robin symbol: {e}")))?;
        sym.validate()?;
        Ok(sym)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("Robin symbols always serialize")
    }

    /// `τ_n + shift` mode by mode.
    pub fn shifted(&self, shift: f64) -> RobinSymbol {
        match self {
            RobinSymbol::Zero => RobinSymbol::Constant { c: shift },
            RobinSymbol::Constant { c } => RobinSymbol::Constant { c: c + shift },
            RobinSymbol::Affine { a, c } => RobinSymbol::Affine { a: *a, c: c + shift },
            RobinSymbol::Table { values, default } => RobinSymbol::Table {
                values: values.iter().map(|(&n, &v)| (n, v + shift)).collect(),
                default: Box::new(default.shifted(shift)),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn json_schema_round_trip() {
        let cases = [
            r#"{"kind":"zero"}"#,
            r#"{"kind":"constant","c":0.5}"#,
            r#"{"kind":"affine","a":1.0,"c":-0.5}"#,
            r#"{"kind":"table","values":{"-2":1.5,"3":-0.25},"default":{"kind":"constant","c":2.0}}"#,
        ];
        for s in cases {
            let sym = RobinSymbol::from_json(s).unwrap();
            assert_eq!(RobinSymbol::from_json(&sym.to_json()).unwrap(), sym);
        }
        let t = RobinSymbol::from_json(cases[3]).unwrap();
        assert_eq!(t.value(-2), 1.5);
        assert_eq!(t.value(3), -0.25);
        assert_eq!(t.value(0), 2.0);
        assert_eq!(RobinSymbol::from_json(cases[2]).unwrap().value(-4), 3.5);
    }

    #[test]
    fn rejects_bad_json() {
        assert!(RobinSymbol::from_json(r#"{"kind":"cubic"}"#).is_err());
        assert!(RobinSymbol::from_json(r#"{"kind":"constant"}"#).is_err());
        assert!(RobinSymbol::from_json(r#"{"kind":"constant","c":1,"x":2}"#).is_err());
    }

    proptest! {
        #[test]
        fn bound_holds(a in -3.0f64..3.0, c in -5.0f64..5.0, n in -200i64..200) {
            let s = RobinSymbol::Affine { a, c };
            let bound = s.bound_constant() * (1.0 + n.unsigned_abs() as f64).powf(s.order());
            prop_assert!(s.value(n).abs() <= bound * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn shift_is_modewise(c in -5.0f64..5.0, t in -5.0f64..5.0, n in -50i64..50) {
            let s = RobinSymbol::Affine { a: 0.5, c };
            prop_assert!((s.shifted(t).value(n) - s.value(n) - t).abs() < 1e-12);
        }
    }
}
