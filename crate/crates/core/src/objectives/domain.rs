use serde::{Deserialize, Serialize};

/// Per-coordinate open domain of an objective. Multivariate objectives apply
/// the same interval to every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    AllSpace,
    OpenHalfline { lower: f64 },
    OpenInterval { lo: f64, hi: f64 },
    Punctured { excluded: f64 },
}

impl DomainSpec {
    /// Distance to the boundary: positive inside, `-(distance outside)` or 0
    /// outside. `+∞` for all of space.
    pub fn signed_distance(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NEG_INFINITY;
        }
        match *self {
            DomainSpec::AllSpace => {
                if x.is_finite() {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            DomainSpec::OpenHalfline { lower } => x - lower,
            DomainSpec::OpenInterval { lo, hi } => (x - lo).min(hi - x),
            DomainSpec::Punctured { excluded } => (x - excluded).abs(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.signed_distance(x) > 0.0
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| self.contains(v))
    }

    /// Smallest per-coordinate signed distance.
    pub fn point_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .map(|&v| self.signed_distance(v))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self, DomainSpec::AllSpace)
    }

    pub fn describe(&self) -> String {
        match *self {
            DomainSpec::AllSpace => "all space".into(),
            DomainSpec::OpenHalfline { lower } => format!("({lower}, inf)"),
            DomainSpec::OpenInterval { lo, hi } => format!("({lo}, {hi})"),
            DomainSpec::Punctured { excluded } => format!("R \\ {{{excluded}}}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_matches_distance() {
        let specs = [
            DomainSpec::AllSpace,
            DomainSpec::OpenHalfline { lower: 0.0 },
            DomainSpec::OpenInterval { lo: -1.0, hi: 2.0 },
            DomainSpec::Punctured { excluded: 1.0 },
        ];
        for d in specs {
            for x in [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0] {
                assert_eq!(d.contains(x), d.signed_distance(x) > 0.0);
            }
        }
        let h = DomainSpec::OpenHalfline { lower: 0.0 };
        assert!(!h.contains(0.0));
        assert_eq!(h.signed_distance(-2.0), -2.0);
        assert!(!DomainSpec::AllSpace.contains(f64::INFINITY));
    }
}
