use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::{EndpointFactors, MaxEntError};

/// One end of a support interval. Serialized as a number, or as the strings
/// `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound(pub f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Bound(v)),
            Raw::Text(t) => match t.trim() {
                "inf" | "+inf" | "infinity" => Ok(Bound(f64::INFINITY)),
                // U+2212 minus sign is accepted alongside ASCII '-'
                "-inf" | "\u{2212}inf" | "-infinity" => Ok(Bound(f64::NEG_INFINITY)),
                other => Err(de::Error::custom(format!("unrecognised bound {other:?}"))),
            },
        }
    }
}

/// Closed interval, possibly with infinite ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Bound; 2]", into = "[Bound; 2]")]
pub struct Support {
    lower: f64,
    upper: f64,
}

impl Support {
    pub fn new(lower: f64, upper: f64) -> Result<Self, MaxEntError> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(MaxEntError::Validation(format!("bad support [{lower}, {upper}]")));
        }
        if lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(MaxEntError::Validation(format!("bad support [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn real_line() -> Self {
        Self { lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

impl TryFrom<[Bound; 2]> for Support {
    type Error = MaxEntError;
    fn try_from(b: [Bound; 2]) -> Result<Self, Self::Error> {
        Support::new(b[0].0, b[1].0)
    }
}

impl From<Support> for [Bound; 2] {
    fn from(s: Support) -> Self {
        [Bound(s.lower), Bound(s.upper)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub order: u32,
    pub value: f64,
}

/// Multiplier `a_order` of the monomial `x^order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub order: u32,
    pub value: f64,
}

/// Moment constraints on a single variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec1D")]
pub struct MomentSpec1D {
    pub support: Support,
    #[serde(rename = "moments")]
    constraints: Vec<Moment>,
    #[serde(default, skip_serializing_if = "EndpointFactors::is_trivial")]
    pub factors: EndpointFactors,
}

#[derive(Deserialize)]
struct RawSpec1D {
    support: Support,
    #[serde(default)]
    moments: Vec<Moment>,
    #[serde(default)]
    factors: EndpointFactors,
}

impl TryFrom<RawSpec1D> for MomentSpec1D {
    type Error = MaxEntError;
    fn try_from(r: RawSpec1D) -> Result<Self, Self::Error> {
        MomentSpec1D::with_factors(r.support, r.moments, r.factors)
    }
}

impl MomentSpec1D {
    pub fn new(support: Support, constraints: Vec<Moment>) -> Result<Self, MaxEntError> {
        Self::with_factors(support, constraints, EndpointFactors::default())
    }

    /// Validates and sorts the constraints by order.
    pub fn with_factors(
        support: Support,
        mut constraints: Vec<Moment>,
        factors: EndpointFactors,
    ) -> Result<Self, MaxEntError> {
        constraints.sort_by_key(|m| m.order);
        for w in constraints.windows(2) {
            if w[0].order == w[1].order {
                return Err(MaxEntError::Validation(format!("duplicate order {}", w[0].order)));
            }
        }
        for m in &constraints {
            if m.order == 0 {
                return Err(MaxEntError::Validation(
                    "order 0 is fixed by normalization".into(),
                ));
            }
            if !m.value.is_finite() {
                return Err(MaxEntError::Validation(format!("moment {} is not finite", m.order)));
            }
        }
        if !support.is_bounded() {
            match constraints.last() {
                Some(m) if m.order % 2 == 0 => {}
                Some(m) => {
                    return Err(MaxEntError::Validation(format!(
                        "unbounded support needs an even top order, got {}",
                        m.order
                    )))
                }
                None => {
                    return Err(MaxEntError::Validation(
                        "unbounded support needs at least one even-order constraint".into(),
                    ))
                }
            }
        }
        factors.validate(&support)?;
        Ok(Self { support, constraints, factors })
    }

    pub fn constraints(&self) -> &[Moment] {
        &self.constraints
    }

    pub fn value(&self, order: u32) -> Option<f64> {
        self.constraints.iter().find(|m| m.order == order).map(|m| m.value)
    }

    pub fn from_json(text: &str) -> Result<Self, MaxEntError> {
        serde_json::from_str(text).map_err(|e| MaxEntError::Json(e.to_string()))
    }
}

/// Axis-aligned finite rectangle `[x_lo, x_hi] × [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Rectangle {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self, MaxEntError> {
        let ok = [x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite()) && x_lo < x_hi && y_lo < y_hi;
        if !ok {
            return Err(MaxEntError::Validation(format!(
                "degenerate rectangle [{x_lo}, {x_hi}]×[{y_lo}, {y_hi}]"
            )));
        }
        Ok(Self { x: (x_lo, x_hi), y: (y_lo, y_hi) })
    }

    pub fn square(lo: f64, hi: f64) -> Result<Self, MaxEntError> {
        Self::new(lo, hi, lo, hi)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moment2D {
    pub i: u32,
    pub j: u32,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multiplier2D {
    pub i: u32,
    pub j: u32,
    pub value: f64,
}

/// Constraints `⟨xⁱ yʲ⟩ = cᵢⱼ` on a rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec2D {
    pub support: Rectangle,
    constraints: Vec<Moment2D>,
}

impl MomentSpec2D {
    pub fn new(support: Rectangle, mut constraints: Vec<Moment2D>) -> Result<Self, MaxEntError> {
        constraints.sort_by_key(|m| (m.i + m.j, m.i, m.j));
        for w in constraints.windows(2) {
            if (w[0].i, w[0].j) == (w[1].i, w[1].j) {
                return Err(MaxEntError::Validation(format!(
                    "duplicate pair ({}, {})",
                    w[0].i, w[0].j
                )));
            }
        }
        for m in &constraints {
            if m.i + m.j == 0 {
                return Err(MaxEntError::Validation("pair (0, 0) is fixed by normalization".into()));
            }
            if !m.value.is_finite() {
                return Err(MaxEntError::Validation(format!(
                    "moment ({}, {}) is not finite",
                    m.i, m.j
                )));
            }
        }
        Ok(Self { support, constraints })
    }

    pub fn constraints(&self) -> &[Moment2D] {
        &self.constraints
    }

    pub fn value(&self, i: u32, j: u32) -> Option<f64> {
        self.constraints.iter().find(|m| m.i == i && m.j == j).map(|m| m.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_infinite_sentinels() {
        let s = MomentSpec1D::from_json(
            r#"{"support":["-inf","inf"],"moments":[{"order":2,"value":1.0},{"order":1,"value":0.0}]}"#,
        )
        .unwrap();
        assert_eq!(s.support, Support::real_line());
        assert_eq!(s.constraints()[0].order, 1);
        let s = MomentSpec1D::from_json(
            "{\"support\":[\"\u{2212}inf\",\"inf\"],\"moments\":[{\"order\":2,\"value\":1.0}]}",
        )
        .unwrap();
        assert!(!s.support.is_bounded());
        let back = serde_json::to_string(&s).unwrap();
        assert!(back.contains("\"-inf\""));
    }

    #[test]
    fn validation_errors() {
        let line = Support::real_line();
        let odd = MomentSpec1D::new(line, vec![Moment { order: 1, value: 0.0 }, Moment { order: 3, value: 0.0 }]);
        assert!(matches!(odd, Err(MaxEntError::Validation(_))));
        let dup = MomentSpec1D::new(
            Support::new(0.0, 1.0).unwrap(),
            vec![Moment { order: 1, value: 0.5 }, Moment { order: 1, value: 0.4 }],
        );
        assert!(matches!(dup, Err(MaxEntError::Validation(_))));
        assert!(MomentSpec1D::from_json(r#"{"support":[1,0],"moments":[]}"#).is_err());
        assert!(Rectangle::new(0.0, 0.0, 0.0, 1.0).is_err());
    }
}
