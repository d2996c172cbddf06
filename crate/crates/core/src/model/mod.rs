//! Speed laws, reaction-time profiles, initial histories and scenarios.

mod delay;
mod history;
mod scenario;
mod velocity;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use delay::DelayProfile;
pub use history::{DisruptionCopy, InitialHistory};
pub use scenario::{validate_scenario, Expectation, Scenario, ThresholdInfo, Truncation, ValidationReport};
pub use velocity::{LipschitzData, VelocityProfile};

/// One violated invariant, located by a dotted field path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

impl Issue {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Issue { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}
