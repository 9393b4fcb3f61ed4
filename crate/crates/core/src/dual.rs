//! Dual solutions of the configuration LP used as infeasibility witnesses.

use serde::{Deserialize, Serialize};

use crate::value::Value;

/// An assignment `(y, z)` to the dual of the configuration LP at `target`.
///
/// If every `y_p` is at most the `z`-weight of every configuration of `p` and
/// the objective `Σy − Σz` is positive, scaling the solution up makes the dual
/// unbounded, so no fractional assignment reaches `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualCertificate {
    pub target: Value,
    pub y: Vec<Value>,
    pub z: Vec<Value>,
    pub objective: Value,
}

impl DualCertificate {
    pub fn new(target: Value, y: Vec<Value>, z: Vec<Value>) -> Self {
        let objective = objective_of(&y, &z);
        DualCertificate {
            target,
            y,
            z,
            objective,
        }
    }

    /// `Σy − Σz` recomputed from the entries.
    pub fn computed_objective(&self) -> Value {
        objective_of(&self.y, &self.z)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("certificate serializes");
        s.push('\n');
        s
    }
}

fn objective_of(y: &[Value], z: &[Value]) -> Value {
    let sy: Value = y.iter().sum();
    let sz: Value = z.iter().sum();
    sy - sz
}
