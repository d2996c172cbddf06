use serde::{Deserialize, Serialize};

use crate::model::velocity::piecewise_linear;
use crate::model::Issue;
use crate::scalar::Scalar;

/// Reaction time as a function of the (macroscopic) space coordinate.
/// Driver `i` at scale `epsilon` reacts after `tau0(i * epsilon)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DelayProfile<T> {
    Constant {
        tau: T,
    },
    /// Piecewise linear in space, constant outside the nodes.
    Table {
        xs: Vec<T>,
        values: Vec<T>,
    },
}

impl<T: Scalar> DelayProfile<T> {
    pub fn constant(tau: T) -> Self {
        DelayProfile::Constant { tau }
    }

    pub fn reaction_time(&self, x: T) -> T {
        match self {
            DelayProfile::Constant { tau } => *tau,
            DelayProfile::Table { xs, values } => piecewise_linear(xs, values, x),
        }
    }

    /// Lower bound `xi` of the reaction times.
    pub fn xi(&self) -> T {
        match self {
            DelayProfile::Constant { tau } => *tau,
            DelayProfile::Table { values, .. } => values.iter().copied().fold(T::infinity(), T::min),
        }
    }

    /// Upper bound `tau` of the reaction times.
    pub fn tau(&self) -> T {
        match self {
            DelayProfile::Constant { tau } => *tau,
            DelayProfile::Table { values, .. } => values.iter().copied().fold(T::neg_infinity(), T::max),
        }
    }

    pub fn issues(&self, at: &str) -> Vec<Issue> {
        let mut out = Vec::new();
        match self {
            DelayProfile::Constant { tau } => {
                if !(tau.is_finite() && *tau > T::zero()) {
                    out.push(Issue::new(format!("{at}.tau"), format!("must be finite and positive, got {tau}")));
                }
            }
            DelayProfile::Table { xs, values } => {
                if xs.is_empty() || xs.len() != values.len() {
                    out.push(Issue::new(format!("{at}.xs"), "need nodes with matching values"));
                }
                if let Some(k) = xs.windows(2).position(|w| !(w[0] < w[1])) {
                    out.push(Issue::new(format!("{at}.xs"), format!("not strictly increasing at node {k}")));
                }
                if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v > T::zero())) {
                    out.push(Issue::new(format!("{at}.values[{k}]"), "reaction times must be finite and positive"));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        let d = DelayProfile::Table { xs: vec![0.0, 1.0, 2.0], values: vec![0.3, 0.1, 0.2] };
        assert_eq!(d.xi(), 0.1);
        assert_eq!(d.tau(), 0.3);
        assert_eq!(d.reaction_time(0.5), 0.2);
        assert_eq!(d.reaction_time(-4.0), 0.3);
        let c = DelayProfile::constant(0.25);
        assert_eq!((c.xi(), c.tau(), c.reaction_time(7.0)), (0.25, 0.25, 0.25));
        assert!(c.issues("delay").is_empty());
        assert_eq!(DelayProfile::constant(0.0).issues("delay").len(), 1);
    }
}
