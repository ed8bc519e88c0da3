//! Demographic model: traits, rate parameterizations, fitness order, and
//! validators for the structural assumptions behind the limit results.

mod assumptions;
mod families;
mod fitness;
mod sequence;

pub use assumptions::{check_assumptions, AssumptionReport, CheckItem};
pub use families::{CompetitionFamily, DistanceKernel, MutationKernel, ScalarFamily};
pub use fitness::{compute_fitness, find_rank, FitnessReport};
pub use sequence::OrderedTraitSequence;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type TraitId = u32;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("validation failed at `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("fitness order violation: {0}")]
    OrderViolation(String),
    #[error("mutant cannot be ranked: {0}")]
    AmbiguousRank(String),
    #[error("tabular rate tables cannot be evaluated at new traits; parametric families are required")]
    UnsupportedExtension,
    #[error("mutation sampling failed: {0}")]
    MutationSampling(String),
}

impl ModelError {
    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        ModelError::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// A single trait: a point in the compact trait space, with genealogy links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraitRecord {
    pub id: TraitId,
    pub value: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<TraitId>,
    /// Mutation-event index that created this trait; 0 for ancestors.
    #[serde(default)]
    pub birth_event: u32,
}

impl TraitRecord {
    pub fn ancestor(id: TraitId, value: Vec<f64>) -> Self {
        TraitRecord {
            id,
            value,
            parent_id: None,
            birth_event: 0,
        }
    }
}

/// Bounding box of the compact trait space `X ⊂ R^d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraitSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TraitSpace {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, value: &[f64]) -> bool {
        value.len() == self.dim()
            && value
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// Dense rate tables over a fixed trait roster, indexed by trait id.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularRates {
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    /// `alpha[i][j]` is the competition felt by trait `i` from trait `j`.
    pub alpha: Vec<Vec<f64>>,
    /// `m[i][j]` is the migration weight from `i` to `j`; rows sum to 1 over
    /// the fitness-order neighbors of `i`.
    pub m: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
}

/// Parametric rate families over trait values; required for runs that create
/// new traits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricRates {
    pub b: ScalarFamily,
    pub d: ScalarFamily,
    pub alpha: CompetitionFamily,
    pub mu: ScalarFamily,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rates {
    Tabular(TabularRates),
    Parametric(ParametricRates),
}

/// Scale parameters: migration `epsilon`, mutation `sigma`, mutant seed mass
/// `rho`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scales {
    pub epsilon: f64,
    pub sigma: f64,
    pub rho: f64,
}

/// What to do when a sampled mutant cannot be strictly ranked against the
/// existing traits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankPolicy {
    /// Surface the ambiguity as an error.
    Error,
    /// Redraw the mutation offset (same parent) up to `max_rank_retries`
    /// times; every redraw is counted in the run report.
    Resample,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelOptions {
    /// Fitness values with |f| below this are treated as sign-ambiguous.
    pub fitness_tol: f64,
    /// A trait counts as supported when its density exceeds this threshold.
    pub support_threshold: f64,
    /// Densities above this abort integration as a blow-up.
    pub mass_cap: f64,
    pub rank_policy: RankPolicy,
    pub max_rank_retries: u32,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            fitness_tol: 1e-12,
            support_threshold: 1e-12,
            mass_cap: 1e6,
            rank_policy: RankPolicy::Error,
            max_rank_retries: 100,
        }
    }
}

/// Full parameterization of the dynamics. Immutable after construction; all
/// operations on it are pure, so it can be shared across parallel workers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemographicModel {
    pub space: TraitSpace,
    /// Initial trait roster. Ids must be dense (`0..n`) and, for tabular
    /// rates, listed in ascending fitness order.
    pub traits: Vec<TraitRecord>,
    pub rates: Rates,
    pub scales: Scales,
    pub mutation_kernel: MutationKernel,
    #[serde(default)]
    pub options: ModelOptions,
}

impl DemographicModel {
    pub fn is_parametric(&self) -> bool {
        matches!(self.rates, Rates::Parametric(_))
    }

    pub fn birth(&self, t: &TraitRecord) -> Result<f64, ModelError> {
        match &self.rates {
            Rates::Tabular(tab) => table_get(&tab.b, t.id, "rates.b"),
            Rates::Parametric(p) => Ok(p.b.eval(&t.value)),
        }
    }

    pub fn death(&self, t: &TraitRecord) -> Result<f64, ModelError> {
        match &self.rates {
            Rates::Tabular(tab) => table_get(&tab.d, t.id, "rates.d"),
            Rates::Parametric(p) => Ok(p.d.eval(&t.value)),
        }
    }

    /// Net growth rate `b(x) - d(x)`.
    pub fn growth(&self, t: &TraitRecord) -> Result<f64, ModelError> {
        Ok(self.birth(t)? - self.death(t)?)
    }

    pub fn mutation_rate(&self, t: &TraitRecord) -> Result<f64, ModelError> {
        match &self.rates {
            Rates::Tabular(tab) => table_get(&tab.mu, t.id, "rates.mu"),
            Rates::Parametric(p) => Ok(p.mu.eval(&t.value)),
        }
    }

    /// Competition kernel `alpha(x, y)`: pressure felt by `x` from `y`.
    pub fn alpha(&self, x: &TraitRecord, y: &TraitRecord) -> Result<f64, ModelError> {
        match &self.rates {
            Rates::Tabular(tab) => {
                let row = tab
                    .alpha
                    .get(x.id as usize)
                    .ok_or(ModelError::UnsupportedExtension)?;
                row.get(y.id as usize)
                    .copied()
                    .ok_or(ModelError::UnsupportedExtension)
            }
            Rates::Parametric(p) => Ok(p.alpha.eval(&x.value, &y.value)),
        }
    }

    /// Monomorphic equilibrium mass `(b(x) - d(x)) / alpha(x, x)`.
    pub fn xibar(&self, t: &TraitRecord) -> Result<f64, ModelError> {
        let self_alpha = self.alpha(t, t)?;
        Ok(self.growth(t)? / self_alpha)
    }

    /// Invasion fitness `f(x, y) = b(x) - d(x) - alpha(x, y) * xibar(y)` of a
    /// rare `x` against a resident `y` at equilibrium.
    pub fn fitness(&self, x: &TraitRecord, y: &TraitRecord) -> Result<f64, ModelError> {
        Ok(self.growth(x)? - self.alpha(x, y)? * self.xibar(y)?)
    }

    /// Migration weight from ordered rank `from` to rank `to` in `seq`.
    /// Only order-adjacent ranks exchange mass.
    pub fn migration_weight(
        &self,
        seq: &OrderedTraitSequence,
        from: usize,
        to: usize,
    ) -> Result<f64, ModelError> {
        if from.abs_diff(to) != 1 || to >= seq.len() {
            return Ok(0.0);
        }
        match &self.rates {
            Rates::Tabular(tab) => {
                let i = seq.ordered_ids()[from] as usize;
                let j = seq.ordered_ids()[to] as usize;
                let row = tab.m.get(i).ok_or(ModelError::UnsupportedExtension)?;
                row.get(j).copied().ok_or(ModelError::UnsupportedExtension)
            }
            // Uniform over the neighbors that exist: 1/2 in the interior,
            // 1 at the ends of the order.
            Rates::Parametric(_) => {
                let n_neighbors = if from == 0 || from + 1 == seq.len() {
                    1.0
                } else {
                    2.0
                };
                Ok(1.0 / n_neighbors)
            }
        }
    }

    /// Draw a mutation offset `h ~ p(parent, dh)`, resampling until
    /// `parent + h` stays inside the trait space.
    pub fn sample_offset(
        &self,
        parent: &TraitRecord,
        rng: &mut impl rand::Rng,
    ) -> Result<Vec<f64>, ModelError> {
        self.mutation_kernel
            .sample_within(&parent.value, &self.space, rng)
    }

    /// Structural validation: positivity (A1), supercriticality (A2),
    /// well-defined equilibrium masses, row-stochastic migration, and
    /// nearest-neighbor sparsity of tabular kernels.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.traits.len();
        if n == 0 {
            return Err(ModelError::validation("traits", "at least one trait required"));
        }
        if self.space.lower.len() != self.space.upper.len() {
            return Err(ModelError::validation("space", "lower/upper dimension mismatch"));
        }
        for (lo, hi) in self.space.lower.iter().zip(&self.space.upper) {
            if !(lo < hi) {
                return Err(ModelError::validation("space", "lower must be < upper"));
            }
        }
        for (k, t) in self.traits.iter().enumerate() {
            if t.id as usize != k {
                return Err(ModelError::validation(
                    "traits.id",
                    format!("trait ids must be dense 0..{n} in listed order; found id {} at position {k}", t.id),
                ));
            }
            if !self.space.contains(&t.value) {
                return Err(ModelError::validation(
                    "traits.value",
                    format!("trait {} lies outside the trait space", t.id),
                ));
            }
            if t.parent_id.is_none() != (t.birth_event == 0) {
                return Err(ModelError::validation(
                    "traits.parent_id",
                    format!("trait {}: parent_id must be absent iff birth_event = 0", t.id),
                ));
            }
        }
        if !(self.scales.epsilon >= 0.0 && self.scales.sigma >= 0.0 && self.scales.rho >= 0.0) {
            return Err(ModelError::validation("scales", "epsilon, sigma, rho must be >= 0"));
        }
        match &self.rates {
            Rates::Tabular(tab) => self.validate_tabular(tab)?,
            Rates::Parametric(p) => self.validate_parametric(p)?,
        }
        for t in &self.traits {
            let (b, d) = (self.birth(t)?, self.death(t)?);
            if !(b > 0.0) || !(d > 0.0) {
                return Err(ModelError::validation(
                    "rates",
                    format!("trait {}: b and d must be positive (A1); got b={b}, d={d}", t.id),
                ));
            }
            if !(b - d > 0.0) {
                return Err(ModelError::validation(
                    "rates",
                    format!("trait {}: b(x) - d(x) > 0 required (A2); got {}", t.id, b - d),
                ));
            }
            let a = self.alpha(t, t)?;
            if !(a > 0.0) {
                return Err(ModelError::validation(
                    "rates.alpha",
                    format!("trait {}: alpha(x, x) must be positive; got {a}", t.id),
                ));
            }
            let mu = self.mutation_rate(t)?;
            if !(mu >= 0.0) {
                return Err(ModelError::validation(
                    "rates.mu",
                    format!("trait {}: mu must be >= 0; got {mu}", t.id),
                ));
            }
        }
        Ok(())
    }

    fn validate_tabular(&self, tab: &TabularRates) -> Result<(), ModelError> {
        let n = self.traits.len();
        for (name, len) in [
            ("rates.b", tab.b.len()),
            ("rates.d", tab.d.len()),
            ("rates.mu", tab.mu.len()),
            ("rates.alpha", tab.alpha.len()),
            ("rates.m", tab.m.len()),
        ] {
            if len != n {
                return Err(ModelError::validation(
                    name,
                    format!("expected {n} entries, found {len}"),
                ));
            }
        }
        for (i, row) in tab.alpha.iter().chain(tab.m.iter()).enumerate() {
            if row.len() != n {
                return Err(ModelError::validation(
                    "rates",
                    format!("row {} has {} entries, expected {n}", i % n, row.len()),
                ));
            }
        }
        // Tabular rosters are listed in fitness order, so nearest-neighbor
        // sparsity is |i - j| > 1 in index distance.
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 {
                    if tab.alpha[i][j] != 0.0 {
                        return Err(ModelError::validation(
                            "rates.alpha",
                            format!("alpha[{i}][{j}] must be 0 beyond nearest neighbors"),
                        ));
                    }
                    if tab.m[i][j] != 0.0 {
                        return Err(ModelError::validation(
                            "rates.m",
                            format!("m[{i}][{j}] must be 0 beyond nearest neighbors"),
                        ));
                    }
                }
                if tab.alpha[i][j] < 0.0 || tab.m[i][j] < 0.0 {
                    return Err(ModelError::validation(
                        "rates",
                        format!("kernel entries must be >= 0 at [{i}][{j}]"),
                    ));
                }
            }
            if tab.m[i][i] != 0.0 {
                return Err(ModelError::validation(
                    "rates.m",
                    format!("m[{i}][{i}] must be 0 (no self-migration)"),
                ));
            }
            let row_sum: f64 = tab.m[i].iter().sum();
            if n > 1 && (row_sum - 1.0).abs() > 1e-9 {
                return Err(ModelError::validation(
                    "rates.m",
                    format!("migration row {i} sums to {row_sum}, expected 1"),
                ));
            }
        }
        Ok(())
    }

    fn validate_parametric(&self, p: &ParametricRates) -> Result<(), ModelError> {
        // Families must keep b, d positive and b - d supercritical across the
        // whole box, since mutants can land anywhere in it.
        for corner in self.space_corners() {
            let b = p.b.eval(&corner);
            let d = p.d.eval(&corner);
            if !(b > 0.0 && d > 0.0 && b - d > 0.0) {
                return Err(ModelError::validation(
                    "rates",
                    format!(
                        "parametric b, d must satisfy b > d > 0 over the whole trait space; \
                         violated at {corner:?} (b={b}, d={d})"
                    ),
                ));
            }
            if p.mu.eval(&corner) < 0.0 {
                return Err(ModelError::validation("rates.mu", "mu must be >= 0 over the trait space"));
            }
        }
        p.alpha.validate()?;
        Ok(())
    }

    fn space_corners(&self) -> Vec<Vec<f64>> {
        let d = self.space.dim();
        (0..(1usize << d))
            .map(|mask| {
                (0..d)
                    .map(|k| {
                        if mask >> k & 1 == 0 {
                            self.space.lower[k]
                        } else {
                            self.space.upper[k]
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

fn table_get(table: &[f64], id: TraitId, _field: &str) -> Result<f64, ModelError> {
    table
        .get(id as usize)
        .copied()
        .ok_or(ModelError::UnsupportedExtension)
}
