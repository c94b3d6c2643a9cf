use serde::{Deserialize, Serialize};

use super::{MaxEntError, Support};

/// Zero factor `|x - location|^multiplicity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub location: f64,
    pub multiplicity: f64,
}

/// Singularity factor `|x - location|^(-exponent)` with `0 < exponent < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub location: f64,
    pub exponent: f64,
}

/// The zero factor `Z(x)` and singularity factor `S(x)` of a density.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EndpointFactors {
    #[serde(default)]
    pub zeros: Vec<Zero>,
    #[serde(default)]
    pub singularities: Vec<Singularity>,
}

impl EndpointFactors {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn zero_at(location: f64, multiplicity: f64) -> Self {
        Self { zeros: vec![Zero { location, multiplicity }], singularities: vec![] }
    }

    pub fn singularity_at(location: f64, exponent: f64) -> Self {
        Self { zeros: vec![], singularities: vec![Singularity { location, exponent }] }
    }

    pub fn is_trivial(&self) -> bool {
        self.zeros.is_empty() && self.singularities.is_empty()
    }

    pub fn validate(&self, support: &Support) -> Result<(), MaxEntError> {
        for z in &self.zeros {
            if !(z.multiplicity > 0.0 && z.multiplicity.is_finite()) {
                return Err(MaxEntError::Validation(format!(
                    "zero multiplicity must be positive, got {}",
                    z.multiplicity
                )));
            }
            if !(z.location.is_finite() && support.contains(z.location)) {
                return Err(MaxEntError::Validation(format!(
                    "zero location {} outside support",
                    z.location
                )));
            }
        }
        for s in &self.singularities {
            if !(s.exponent > 0.0 && s.exponent < 1.0) {
                return Err(MaxEntError::Validation(format!(
                    "singularity exponent must lie in (0, 1), got {}",
                    s.exponent
                )));
            }
            if !(s.location.is_finite() && support.contains(s.location)) {
                return Err(MaxEntError::Validation(format!(
                    "singularity location {} outside support",
                    s.location
                )));
            }
        }
        Ok(())
    }

    /// Distinct factor locations, ascending.
    pub fn locations(&self) -> Vec<f64> {
        let mut locs: Vec<f64> = self
            .zeros
            .iter()
            .map(|z| z.location)
            .chain(self.singularities.iter().map(|s| s.location))
            .collect();
        locs.sort_by(f64::total_cmp);
        locs.dedup();
        locs
    }

    /// Net power of `|x - location|` contributed at `location`
    /// (multiplicities minus singular exponents).
    pub fn net_exponent(&self, location: f64) -> f64 {
        let zeros: f64 = self.zeros.iter().filter(|z| z.location == location).map(|z| z.multiplicity).sum();
        let sing: f64 =
            self.singularities.iter().filter(|s| s.location == location).map(|s| s.exponent).sum();
        zeros - sing
    }

    /// Fails if any location carries a net power `≤ -1`.
    pub fn check_integrable(&self) -> Result<(), MaxEntError> {
        for loc in self.locations() {
            let p = self.net_exponent(loc);
            if p <= -1.0 {
                return Err(MaxEntError::Numeric(format!(
                    "factors at {loc} give a non-integrable power {p}"
                )));
            }
        }
        Ok(())
    }

    /// `ln Z(x) + ln S(x)`, with the distance to each location supplied by
    /// `distance` (so callers can pass exact endpoint gaps).
    pub fn log_value_with<D: Fn(f64) -> f64>(&self, distance: D) -> f64 {
        let mut acc = 0.0;
        for z in &self.zeros {
            acc += z.multiplicity * distance(z.location).ln();
        }
        for s in &self.singularities {
            acc -= s.exponent * distance(s.location).ln();
        }
        acc
    }

    /// `Z(x)·S(x)`; `+∞` at a net singularity, `0` at a net zero.
    pub fn value(&self, x: f64) -> f64 {
        for loc in self.locations() {
            if x == loc {
                let p = self.net_exponent(loc);
                return if p > 0.0 {
                    0.0
                } else if p < 0.0 {
                    f64::INFINITY
                } else {
                    // coincident zero and singularity cancel; remaining factors are regular here
                    let others = EndpointFactors {
                        zeros: self.zeros.iter().copied().filter(|z| z.location != loc).collect(),
                        singularities: self
                            .singularities
                            .iter()
                            .copied()
                            .filter(|s| s.location != loc)
                            .collect(),
                    };
                    others.value(x)
                };
            }
        }
        self.log_value_with(|loc| (x - loc).abs()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        let f = EndpointFactors::zero_at(0.0, 1.0);
        assert_eq!(f.value(0.0), 0.0);
        assert!((f.value(0.5) - 0.5).abs() < 1e-15);
        let s = EndpointFactors::singularity_at(1.0, 0.5);
        assert_eq!(s.value(1.0), f64::INFINITY);
        assert!((s.value(0.75) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let sup = Support::new(0.0, 1.0).unwrap();
        assert!(EndpointFactors::singularity_at(0.0, 1.0).validate(&sup).is_err());
        assert!(EndpointFactors::singularity_at(2.0, 0.5).validate(&sup).is_err());
        assert!(EndpointFactors::zero_at(0.0, -1.0).validate(&sup).is_err());
        let stacked = EndpointFactors {
            zeros: vec![],
            singularities: vec![
                Singularity { location: 0.0, exponent: 0.6 },
                Singularity { location: 0.0, exponent: 0.6 },
            ],
        };
        assert!(stacked.validate(&sup).is_ok());
        assert!(stacked.check_integrable().is_err());
    }
}
