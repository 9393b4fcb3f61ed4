//! Problem data: players, resources with intrinsic values, desire sets, and
//! allocations, plus the canonical JSON forms of both.

use serde::{Deserialize, Serialize};

use crate::error::InstanceError;
use crate::value::Value;

/// A restricted max-min allocation instance.
///
/// Resource `r` is worth `values[r]` to every player whose desire set contains
/// it and nothing to anyone else. Desire sets are sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    values: Vec<Value>,
    desires: Vec<Vec<usize>>,
    desired_by: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    players: usize,
    resources: Vec<ResourceDoc>,
    desires: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResourceDoc {
    value: Value,
}

impl Instance {
    /// Validates and builds an instance. Desire lists may arrive unsorted.
    pub fn new(values: Vec<Value>, desires: Vec<Vec<usize>>) -> Result<Self, InstanceError> {
        if desires.is_empty() {
            return Err(InstanceError::validation("players", "at least one player is required"));
        }
        for (r, v) in values.iter().enumerate() {
            if v.is_negative() {
                return Err(InstanceError::validation(
                    format!("resources[{r}].value"),
                    format!("negative value {v}"),
                ));
            }
        }
        let m = values.len();
        let mut sorted = Vec::with_capacity(desires.len());
        for (p, mut d) in desires.into_iter().enumerate() {
            d.sort_unstable();
            for w in d.windows(2) {
                if w[0] == w[1] {
                    return Err(InstanceError::validation(
                        format!("desires[{p}]"),
                        format!("player {p} lists resource {} twice", w[0]),
                    ));
                }
            }
            if let Some(&bad) = d.iter().find(|&&r| r >= m) {
                return Err(InstanceError::validation(
                    format!("desires[{p}]"),
                    format!("player {p} desires resource {bad} but only {m} resources exist"),
                ));
            }
            sorted.push(d);
        }
        let mut desired_by = vec![Vec::new(); m];
        for (p, d) in sorted.iter().enumerate() {
            for &r in d {
                desired_by[r].push(p);
            }
        }
        Ok(Instance {
            values,
            desires: sorted,
            desired_by,
        })
    }

    pub fn n_players(&self) -> usize {
        self.desires.len()
    }

    pub fn n_resources(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, r: usize) -> &Value {
        &self.values[r]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    /// Sorted resource ids desired by `p`.
    pub fn desires(&self, p: usize) -> &[usize] {
        &self.desires[p]
    }

    /// Sorted player ids desiring `r`.
    pub fn desired_by(&self, r: usize) -> &[usize] {
        &self.desired_by[r]
    }

    pub fn is_desired(&self, p: usize, r: usize) -> bool {
        self.desires[p].binary_search(&r).is_ok()
    }

    /// `v[D]` for a set of resource ids.
    pub fn value_of(&self, resources: &[usize]) -> Value {
        resources.iter().map(|&r| &self.values[r]).sum()
    }

    /// Total value a player could collect if it received everything it desires.
    pub fn desired_total(&self, p: usize) -> Value {
        self.value_of(&self.desires[p])
    }

    pub fn total_value(&self) -> Value {
        self.values.iter().sum()
    }

    /// Same instance with every value multiplied by `factor`.
    pub fn scaled(&self, factor: &Value) -> Instance {
        Instance {
            values: self.values.iter().map(|v| v * factor).collect(),
            desires: self.desires.clone(),
            desired_by: self.desired_by.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
        if doc.desires.len() != doc.players {
            return Err(InstanceError::validation(
                "desires",
                format!(
                    "{} desire lists given for {} players",
                    doc.desires.len(),
                    doc.players
                ),
            ));
        }
        Instance::new(
            doc.resources.into_iter().map(|r| r.value).collect(),
            doc.desires,
        )
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, InstanceError> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| InstanceError::Parse(format!("input is not UTF-8: {e}")))?;
        Instance::from_json(text)
    }

    /// Canonical document: compact JSON, keys in `players`, `resources`,
    /// `desires` order, sorted desire lists, trailing newline.
    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            players: self.n_players(),
            resources: self
                .values
                .iter()
                .map(|v| ResourceDoc { value: v.clone() })
                .collect(),
            desires: self.desires.clone(),
        };
        let mut s = serde_json::to_string(&doc).expect("instance serialization");
        s.push('\n');
        s
    }
}

/// Reads an instance document from raw bytes.
pub fn load_instance(bytes: &[u8]) -> Result<Instance, InstanceError> {
    Instance::from_bytes(bytes)
}

/// Canonical serialized form of an instance.
pub fn save_instance(inst: &Instance) -> String {
    inst.to_json()
}

/// One bundle of resource ids per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub bundles: Vec<Vec<usize>>,
}

/// Problems found by [`Allocation::violations`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AllocationViolation {
    PlayerCount { expected: usize, found: usize },
    UnknownResource { player: usize, resource: usize },
    Undesired { player: usize, resource: usize },
    Shared { resource: usize, players: Vec<usize> },
}

impl std::fmt::Display for AllocationViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AllocationViolation::PlayerCount { expected, found } => {
                write!(f, "expected {expected} bundles, found {found}")
            }
            AllocationViolation::UnknownResource { player, resource } => {
                write!(f, "player {player} holds unknown resource {resource}")
            }
            AllocationViolation::Undesired { player, resource } => {
                write!(f, "player {player} holds resource {resource} it does not desire")
            }
            AllocationViolation::Shared { resource, players } => {
                write!(f, "resource {resource} is assigned to players {players:?}")
            }
        }
    }
}

impl Allocation {
    pub fn empty(n_players: usize) -> Self {
        Allocation {
            bundles: vec![Vec::new(); n_players],
        }
    }

    /// Every way the allocation fails to be a valid partial partition of the
    /// desired resources.
    pub fn violations(&self, inst: &Instance) -> Vec<AllocationViolation> {
        let mut out = Vec::new();
        if self.bundles.len() != inst.n_players() {
            out.push(AllocationViolation::PlayerCount {
                expected: inst.n_players(),
                found: self.bundles.len(),
            });
        }
        let mut holders: Vec<Vec<usize>> = vec![Vec::new(); inst.n_resources()];
        for (p, bundle) in self.bundles.iter().enumerate() {
            for &r in bundle {
                if r >= inst.n_resources() {
                    out.push(AllocationViolation::UnknownResource { player: p, resource: r });
                    continue;
                }
                holders[r].push(p);
                if p < inst.n_players() && !inst.is_desired(p, r) {
                    out.push(AllocationViolation::Undesired { player: p, resource: r });
                }
            }
        }
        for (r, ps) in holders.into_iter().enumerate() {
            if ps.len() > 1 {
                out.push(AllocationViolation::Shared { resource: r, players: ps });
            }
        }
        out
    }

    pub fn is_valid(&self, inst: &Instance) -> bool {
        self.violations(inst).is_empty()
    }

    /// Serializable form carrying the min value alongside the bundles.
    pub fn to_doc(&self, inst: &Instance) -> AllocationDoc {
        let mut bundles = self.bundles.clone();
        for b in &mut bundles {
            b.sort_unstable();
        }
        AllocationDoc {
            bundles,
            min_value: min_value(inst, self),
        }
    }
}

/// `{"bundles": [[ids...]...], "min_value": "num/den"}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationDoc {
    pub bundles: Vec<Vec<usize>>,
    pub min_value: Value,
}

impl AllocationDoc {
    pub fn allocation(&self) -> Allocation {
        Allocation {
            bundles: self.bundles.clone(),
        }
    }
}

/// Value player `p` receives under `alloc`. Resources it does not desire count
/// for nothing.
pub fn allocation_value(inst: &Instance, alloc: &Allocation, p: usize) -> Value {
    alloc.bundles[p]
        .iter()
        .filter(|&&r| inst.is_desired(p, r))
        .map(|&r| inst.value(r))
        .sum()
}

/// Welfare of the least lucky player.
pub fn min_value(inst: &Instance, alloc: &Allocation) -> Value {
    (0..inst.n_players())
        .map(|p| allocation_value(inst, alloc, p))
        .min()
        .unwrap_or_else(Value::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ex1() -> Instance {
        Instance::new(
            vec![
                Value::one(),
                Value::ratio(1, 10),
                Value::ratio(1, 10),
                Value::ratio(1, 10),
            ],
            vec![vec![0], vec![0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn smallest_valid_instance() {
        let inst = Instance::from_json(r#"{"players":1,"resources":[{"value":"1"}],"desires":[[0]]}"#)
            .unwrap();
        assert_eq!(inst.n_players(), 1);
        assert_eq!(inst.n_resources(), 1);
        assert_eq!(inst.value(0), &Value::one());
    }

    #[test]
    fn out_of_range_desire_names_player_and_id() {
        let err = Instance::from_json(
            r#"{"players":1,"resources":[{"value":1},{"value":1},{"value":1}],"desires":[[5]]}"#,
        )
        .unwrap_err();
        match err {
            InstanceError::Validation { field, message } => {
                assert_eq!(field, "desires[0]");
                assert!(message.contains("player 0"), "{message}");
                assert!(message.contains("resource 5"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_value_rejected() {
        let err = Instance::from_json(r#"{"players":1,"resources":[{"value":"-1/2"}],"desires":[[0]]}"#)
            .unwrap_err();
        assert!(matches!(err, InstanceError::Validation { ref field, .. } if field == "resources[0].value"));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(Instance::from_json("{"), Err(InstanceError::Parse(_))));
        assert!(matches!(
            Instance::from_json(r#"{"players":1,"resources":[{"value":0.5}],"desires":[[0]]}"#),
            Err(InstanceError::Parse(_))
        ));
    }

    #[test]
    fn player_count_mismatch() {
        let err = Instance::from_json(r#"{"players":2,"resources":[],"desires":[[]]}"#).unwrap_err();
        assert!(matches!(err, InstanceError::Validation { ref field, .. } if field == "desires"));
    }

    #[test]
    fn allocation_values_on_ex1() {
        let inst = ex1();
        let alloc = Allocation {
            bundles: vec![vec![0], vec![1, 2, 3]],
        };
        assert_eq!(allocation_value(&inst, &alloc, 1), Value::ratio(3, 10));
        assert_eq!(allocation_value(&inst, &alloc, 0), Value::one());
        assert_eq!(min_value(&inst, &alloc), Value::ratio(3, 10));
        assert_eq!(allocation_value(&inst, &Allocation::empty(2), 0), Value::zero());
        assert_eq!(min_value(&inst, &Allocation::empty(2)), Value::zero());
    }

    #[test]
    fn single_player_full_bundle() {
        let inst = Instance::new(vec![Value::ratio(1, 3), Value::ratio(1, 6)], vec![vec![0, 1]]).unwrap();
        let alloc = Allocation {
            bundles: vec![vec![0, 1]],
        };
        assert_eq!(min_value(&inst, &alloc), inst.desired_total(0));
    }

    #[test]
    fn violations_name_offenders() {
        let inst = ex1();
        let alloc = Allocation {
            bundles: vec![vec![0, 1], vec![0]],
        };
        let v = alloc.violations(&inst);
        assert!(v.contains(&AllocationViolation::Undesired { player: 0, resource: 1 }));
        assert!(v.contains(&AllocationViolation::Shared {
            resource: 0,
            players: vec![0, 1]
        }));
    }
}
