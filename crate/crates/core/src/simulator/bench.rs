//! Random benchmark instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DistinguisherTable, JointDistribution, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    /// `X = {0,1}^x_bits`.
    pub x_bits: usize,
    pub lambda: usize,
    /// Members drawn before complement closure.
    pub family_size: usize,
    /// `{0,1}`-valued tables when true, uniform `[0,1]` values otherwise.
    pub boolean: bool,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self { x_bits: 3, lambda: 2, family_size: 128, boolean: true, seed: 0 }
    }
}

/// A random joint distribution with full-support `X`-marginal and a random
/// family of unit-size distinguishers.
pub fn benchmark_instance(spec: &BenchmarkSpec) -> Result<(JointDistribution, Vec<DistinguisherTable>), SimError> {
    if spec.x_bits > 12 {
        return Err(SimError::InvalidParameter(format!("x_bits = {} > 12", spec.x_bits)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let x_count = 1usize << spec.x_bits;
    let cells = x_count << spec.lambda;
    let raw: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let dist = JointDistribution::new(x_count, spec.lambda, raw.iter().map(|p| p / total).collect())?;
    let family = (0..spec.family_size)
        .map(|_| {
            let values = (0..cells)
                .map(|_| if spec.boolean { f64::from(u8::from(rng.gen::<bool>())) } else { rng.gen() })
                .collect();
            DistinguisherTable::new(x_count, spec.lambda, values, 1.0)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((dist, family))
}
