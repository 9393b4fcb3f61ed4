//! Seeded instance generators. Each generator is a pure function of its kind
//! and parameters; the same seed always yields the same instance.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::InstanceError;
use crate::instance::Instance;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    /// Values `k/den` with `k` uniform in `1..=den`, desires with probability 1/2.
    Uniform,
    /// Every value at least 1.
    FatHeavy,
    /// Every value strictly below `lambda_target`.
    ThinHeavy,
    /// Players grouped around blocks of resources, a few large values mixed in.
    Clustered,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::Uniform,
        GeneratorKind::FatHeavy,
        GeneratorKind::ThinHeavy,
        GeneratorKind::Clustered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Uniform => "uniform",
            GeneratorKind::FatHeavy => "fat-heavy",
            GeneratorKind::ThinHeavy => "thin-heavy",
            GeneratorKind::Clustered => "clustered",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" | "uniform-random" => Ok(GeneratorKind::Uniform),
            "fat-heavy" => Ok(GeneratorKind::FatHeavy),
            "thin-heavy" => Ok(GeneratorKind::ThinHeavy),
            "clustered" => Ok(GeneratorKind::Clustered),
            other => Err(InstanceError::UnknownGenerator(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorParams {
    pub seed: u64,
    pub n_players: usize,
    pub n_resources: usize,
    /// Granularity of generated values.
    pub denominator: u32,
    /// Upper bound (exclusive) on values for [`GeneratorKind::ThinHeavy`].
    pub lambda_target: Value,
}

impl GeneratorParams {
    pub fn new(seed: u64, n_players: usize, n_resources: usize) -> Self {
        GeneratorParams {
            seed,
            n_players,
            n_resources,
            denominator: 10,
            lambda_target: Value::ratio(1, 4),
        }
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let bad = |field: &str, message: &str| InstanceError::GeneratorParams {
            field: field.to_string(),
            message: message.to_string(),
        };
        if self.n_players == 0 {
            return Err(bad("n_players", "must be at least 1"));
        }
        if self.n_resources == 0 {
            return Err(bad("n_resources", "must be at least 1"));
        }
        if self.denominator == 0 {
            return Err(bad("denominator", "must be at least 1"));
        }
        if !self.lambda_target.is_positive() {
            return Err(bad("lambda_target", "must be positive"));
        }
        Ok(())
    }
}

/// Generates an instance of the requested kind.
pub fn generate(kind: GeneratorKind, params: &GeneratorParams) -> Result<Instance, InstanceError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_players;
    let m = params.n_resources;
    let den = i64::from(params.denominator);

    let (values, desires) = match kind {
        GeneratorKind::Uniform => {
            let values = (0..m)
                .map(|_| Value::ratio(rng.gen_range(1..=den), den))
                .collect();
            (values, random_desires(&mut rng, n, m, 0.5))
        }
        GeneratorKind::FatHeavy => {
            let values = (0..m)
                .map(|_| Value::from_integer(1) + Value::ratio(rng.gen_range(0..=den), den))
                .collect();
            (values, random_desires(&mut rng, n, m, 0.5))
        }
        GeneratorKind::ThinHeavy => {
            let values = (0..m)
                .map(|_| &params.lambda_target * Value::ratio(rng.gen_range(1..=den), den + 1))
                .collect();
            (values, random_desires(&mut rng, n, m, 2.0 / 3.0))
        }
        GeneratorKind::Clustered => {
            let clusters = (n / 2).max(1);
            let values = (0..m)
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        Value::from_integer(1) + Value::ratio(rng.gen_range(0..=den), den)
                    } else {
                        Value::ratio(rng.gen_range(1..=den), 4 * den)
                    }
                })
                .collect();
            let mut desires = vec![Vec::new(); n];
            for (p, d) in desires.iter_mut().enumerate() {
                for r in 0..m {
                    let p_in = if r % clusters == p % clusters { 0.75 } else { 0.1 };
                    if rng.gen_bool(p_in) {
                        d.push(r);
                    }
                }
                if d.is_empty() {
                    d.push(rng.gen_range(0..m));
                }
            }
            (values, desires)
        }
    };
    Instance::new(values, desires)
}

fn random_desires(rng: &mut ChaCha8Rng, n: usize, m: usize, prob: f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| {
            let mut d: Vec<usize> = (0..m).filter(|_| rng.gen_bool(prob)).collect();
            if d.is_empty() {
                d.push(rng.gen_range(0..m));
            }
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let p = GeneratorParams::new(7, 4, 8);
        let a = generate(GeneratorKind::Uniform, &p).unwrap();
        let b = generate(GeneratorKind::Uniform, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_players(), 4);
        assert_eq!(a.n_resources(), 8);
    }

    #[test]
    fn thin_heavy_stays_below_target() {
        let mut p = GeneratorParams::new(3, 4, 10);
        p.lambda_target = Value::ratio(1, 4);
        let inst = generate(GeneratorKind::ThinHeavy, &p).unwrap();
        assert!(inst.values().iter().all(|v| v < &Value::ratio(1, 4)));
    }

    #[test]
    fn fat_heavy_values_at_least_one() {
        let inst = generate(GeneratorKind::FatHeavy, &GeneratorParams::new(11, 3, 3)).unwrap();
        assert!(inst.values().iter().all(|v| v >= &Value::one()));
    }

    #[test]
    fn unknown_kind() {
        assert!(matches!(
            "zipf".parse::<GeneratorKind>(),
            Err(InstanceError::UnknownGenerator(_))
        ));
        for k in GeneratorKind::ALL {
            assert_eq!(k.name().parse::<GeneratorKind>().unwrap(), k);
        }
    }

    #[test]
    fn every_player_desires_something() {
        for kind in GeneratorKind::ALL {
            for seed in 0..20 {
                let inst = generate(kind, &GeneratorParams::new(seed, 5, 6)).unwrap();
                assert!((0..5).all(|p| !inst.desires(p).is_empty()));
            }
        }
    }
}
