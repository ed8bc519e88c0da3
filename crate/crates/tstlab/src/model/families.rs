use super::{ModelError, TraitSpace};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Scalar-valued family over trait values. Families read the first
/// coordinate of the trait value as their argument.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFamily {
    Constant { value: f64 },
    Affine { intercept: f64, slope: f64 },
}

impl ScalarFamily {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarFamily::Constant { value } => *value,
            ScalarFamily::Affine { intercept, slope } => intercept + slope * x[0],
        }
    }
}

/// Isotropic decay profiles for distance-scaled competition.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistanceKernel {
    Gaussian { width: f64 },
    Exponential { scale: f64 },
}

impl DistanceKernel {
    fn eval(&self, dist: f64) -> f64 {
        match self {
            DistanceKernel::Gaussian { width } => (-0.5 * (dist / width).powi(2)).exp(),
            DistanceKernel::Exponential { scale } => (-dist / scale).exp(),
        }
    }
}

/// Competition kernel families `alpha(x, y)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompetitionFamily {
    /// `amplitude * exp(-decay * (s(x) - s(y)))` with `s` the first
    /// coordinate, clamped at `exp(±max_exponent)`. Competition presses
    /// harder downward than upward, which makes the fitness order coincide
    /// with the value order for every pair of distinct traits.
    AsymmetricExponential {
        amplitude: f64,
        decay: f64,
        max_exponent: f64,
    },
    /// `a(x) * k(|x - y|)`. Symmetric in distance; distant pairs may be
    /// mutually invadable, in which case ordering them fails.
    ScaledDistance {
        amplitude: ScalarFamily,
        kernel: DistanceKernel,
    },
}

impl CompetitionFamily {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            CompetitionFamily::AsymmetricExponential {
                amplitude,
                decay,
                max_exponent,
            } => {
                let arg = (decay * (x[0] - y[0])).clamp(-max_exponent, *max_exponent);
                amplitude * (-arg).exp()
            }
            CompetitionFamily::ScaledDistance { amplitude, kernel } => {
                let dist = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                amplitude.eval(x) * kernel.eval(dist)
            }
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            CompetitionFamily::AsymmetricExponential {
                amplitude,
                decay,
                max_exponent,
            } => {
                if !(*amplitude > 0.0 && *decay > 0.0 && *max_exponent > 0.0) {
                    return Err(ModelError::validation(
                        "rates.alpha",
                        "asymmetric_exponential requires amplitude, decay, max_exponent > 0",
                    ));
                }
            }
            CompetitionFamily::ScaledDistance { kernel, .. } => {
                let ok = match kernel {
                    DistanceKernel::Gaussian { width } => *width > 0.0,
                    DistanceKernel::Exponential { scale } => *scale > 0.0,
                };
                if !ok {
                    return Err(ModelError::validation(
                        "rates.alpha",
                        "scaled_distance kernel width/scale must be > 0",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Mutation offset law `p(x, dh)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MutationKernel {
    /// Isotropic Gaussian offset, rejection-resampled until `x + h` lands
    /// inside the trait space.
    Gaussian { stddev: f64 },
}

impl MutationKernel {
    const MAX_DRAWS: u32 = 10_000;

    pub fn sample_within(
        &self,
        parent: &[f64],
        space: &TraitSpace,
        rng: &mut impl Rng,
    ) -> Result<Vec<f64>, ModelError> {
        let MutationKernel::Gaussian { stddev } = self;
        if !(*stddev > 0.0) {
            return Err(ModelError::MutationSampling("stddev must be > 0".into()));
        }
        let normal = Normal::new(0.0, *stddev)
            .map_err(|e| ModelError::MutationSampling(e.to_string()))?;
        for _ in 0..Self::MAX_DRAWS {
            let h: Vec<f64> = parent.iter().map(|_| normal.sample(rng)).collect();
            let candidate: Vec<f64> = parent.iter().zip(&h).map(|(p, dh)| p + dh).collect();
            if space.contains(&candidate) {
                return Ok(h);
            }
        }
        Err(ModelError::MutationSampling(format!(
            "no in-space offset from {parent:?} after {} draws",
            Self::MAX_DRAWS
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn asymmetric_exponential_orders_by_value() {
        let fam = CompetitionFamily::AsymmetricExponential {
            amplitude: 0.5,
            decay: 1.0,
            max_exponent: 3.0,
        };
        // pressing down on a lower trait is stronger than the reverse
        assert!(fam.eval(&[1.0], &[2.0]) > fam.eval(&[2.0], &[1.0]));
        assert_eq!(fam.eval(&[1.5], &[1.5]), 0.5);
        // clamped far apart
        assert_eq!(fam.eval(&[0.0], &[10.0]), 0.5 * 3f64.exp());
    }

    #[test]
    fn gaussian_offsets_stay_in_space() {
        let space = TraitSpace {
            lower: vec![0.0],
            upper: vec![1.0],
        };
        let kernel = MutationKernel::Gaussian { stddev: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let h = kernel.sample_within(&[0.5], &space, &mut rng).unwrap();
            assert!(space.contains(&[0.5 + h[0]]));
        }
    }
}
