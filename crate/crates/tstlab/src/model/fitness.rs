use super::{DemographicModel, ModelError, OrderedTraitSequence, Rates, TraitRecord};
use serde::Serialize;
use std::cmp::Ordering;

/// Equilibrium masses, pairwise invasion fitness, and the total fitness
/// order of a model's trait roster.
#[derive(Debug, Clone, Serialize)]
pub struct FitnessReport {
    /// `xi_bar[i]` for trait id `i`.
    pub xi_bar: Vec<f64>,
    /// `f[i][j] = b_i - d_i - alpha(i, j) * xi_bar[j]`, indexed by trait id.
    pub f: Vec<Vec<f64>>,
    /// Trait ids sorted ascending in fitness (last = fittest).
    pub order: Vec<u32>,
}

impl FitnessReport {
    /// Fitness of the rank-`i` trait invading the rank-`j` resident.
    pub fn f_by_rank(&self, i: usize, j: usize) -> f64 {
        self.f[self.order[i] as usize][self.order[j] as usize]
    }

    pub fn xibar_by_rank(&self, i: usize) -> f64 {
        self.xi_bar[self.order[i] as usize]
    }

    pub fn sequence(&self) -> OrderedTraitSequence {
        OrderedTraitSequence::new(self.order.clone())
    }

    /// Largest |f| over consecutive ordered pairs, both directions. Governs
    /// the fastest sweep rate and hence the integrator's default max step.
    pub fn max_consecutive_fitness(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 1..self.order.len() {
            max = max
                .max(self.f_by_rank(i, i - 1).abs())
                .max(self.f_by_rank(i - 1, i).abs());
        }
        max
    }
}

/// Strict pairwise comparison: `x ≺ y` iff `f(x, y) < 0 < f(y, x)` with both
/// magnitudes above the model's fitness tolerance.
pub(crate) fn compare(
    model: &DemographicModel,
    x: &TraitRecord,
    y: &TraitRecord,
) -> Result<Option<Ordering>, ModelError> {
    let tol = model.options.fitness_tol;
    let fxy = model.fitness(x, y)?;
    let fyx = model.fitness(y, x)?;
    if fxy < -tol && fyx > tol {
        Ok(Some(Ordering::Less))
    } else if fyx < -tol && fxy > tol {
        Ok(Some(Ordering::Greater))
    } else {
        Ok(None)
    }
}

/// Computes equilibrium masses, all pairwise fitness values, and the total
/// order, verifying that the order is strict and acyclic.
///
/// Tabular rosters are declared in fitness order; only adjacent pairs carry
/// competition, so the order is checked on consecutive pairs and on any
/// interacting pair. Parametric rosters are sorted by the pairwise relation
/// with a full consistency sweep.
pub fn compute_fitness(model: &DemographicModel) -> Result<FitnessReport, ModelError> {
    let n = model.traits.len();
    let mut xi_bar = vec![0.0; n];
    for t in &model.traits {
        let v = model.xibar(t)?;
        if !(v > 0.0) {
            return Err(ModelError::validation(
                "rates",
                format!("trait {}: equilibrium mass must be positive, got {v}", t.id),
            ));
        }
        xi_bar[t.id as usize] = v;
    }
    let mut f = vec![vec![0.0; n]; n];
    for x in &model.traits {
        for y in &model.traits {
            f[x.id as usize][y.id as usize] =
                model.growth(x)? - model.alpha(x, y)? * xi_bar[y.id as usize];
        }
    }

    let order: Vec<u32> = match &model.rates {
        Rates::Tabular(_) => {
            verify_declared_order(model)?;
            model.traits.iter().map(|t| t.id).collect()
        }
        Rates::Parametric(_) => sort_parametric(model)?,
    };

    Ok(FitnessReport { xi_bar, f, order })
}

fn verify_declared_order(model: &DemographicModel) -> Result<(), ModelError> {
    let n = model.traits.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let x = &model.traits[i];
            let y = &model.traits[j];
            let interacting = model.alpha(x, y)? > 0.0 || model.alpha(y, x)? > 0.0;
            if !interacting {
                continue;
            }
            match compare(model, x, y)? {
                Some(Ordering::Less) => {}
                Some(Ordering::Greater) => {
                    return Err(ModelError::OrderViolation(format!(
                        "traits {} and {} are ordered against their declared ranks",
                        x.id, y.id
                    )));
                }
                None => {
                    return Err(ModelError::OrderViolation(format!(
                        "traits {} and {} have no strict fitness order \
                         (f({},{}) = {:.6e}, f({},{}) = {:.6e})",
                        x.id,
                        y.id,
                        x.id,
                        y.id,
                        model.fitness(x, y)?,
                        y.id,
                        x.id,
                        model.fitness(y, x)?,
                    )));
                }
            }
        }
    }
    Ok(())
}

fn sort_parametric(model: &DemographicModel) -> Result<Vec<u32>, ModelError> {
    let mut idx: Vec<usize> = (0..model.traits.len()).collect();
    // insertion sort with explicit comparability checks; n is small here
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 {
            let a = &model.traits[idx[j - 1]];
            let b = &model.traits[idx[j]];
            match compare(model, a, b)? {
                Some(Ordering::Greater) => {
                    idx.swap(j - 1, j);
                    j -= 1;
                }
                Some(Ordering::Less) => break,
                _ => {
                    return Err(ModelError::OrderViolation(format!(
                        "traits {} and {} have no strict fitness order",
                        a.id, b.id
                    )))
                }
            }
        }
    }
    // full pairwise consistency: the sorted sequence must be totally ordered
    for i in 0..idx.len() {
        for j in (i + 1)..idx.len() {
            let a = &model.traits[idx[i]];
            let b = &model.traits[idx[j]];
            if compare(model, a, b)? != Some(Ordering::Less) {
                return Err(ModelError::OrderViolation(format!(
                    "pairwise relation between traits {} and {} is inconsistent with a total order",
                    a.id, b.id
                )));
            }
        }
    }
    Ok(idx.into_iter().map(|i| model.traits[i].id as u32).collect())
}

/// Ranks a mutant against every trait in the ordered roster. The mutant must
/// sit strictly above everything below some cut and strictly below everything
/// at or above it; any other sign pattern is ambiguous.
pub fn find_rank(
    model: &DemographicModel,
    roster: &[TraitRecord],
    seq: &OrderedTraitSequence,
    mutant: &TraitRecord,
) -> Result<usize, ModelError> {
    let mut rank = None;
    for (pos, id) in seq.ordered_ids().iter().enumerate() {
        let existing = &roster[*id as usize];
        match compare(model, mutant, existing)? {
            Some(Ordering::Greater) => {
                if rank.is_some() {
                    return Err(ModelError::AmbiguousRank(format!(
                        "mutant {} dominates rank {pos} after already ranking below a lower trait",
                        mutant.id
                    )));
                }
            }
            Some(Ordering::Less) => {
                if rank.is_none() {
                    rank = Some(pos);
                }
            }
            None => {
                return Err(ModelError::AmbiguousRank(format!(
                    "mutant {} has no strict order against trait {}",
                    mutant.id, existing.id
                )));
            }
        }
    }
    Ok(rank.unwrap_or(seq.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn canonical_fitness_values() {
        let model = fixtures::canonical_three_trait();
        let report = compute_fitness(&model).unwrap();
        assert_eq!(report.xi_bar, vec![1.0, 2.0, 2.0]);
        assert!((report.f[1][0] - 1.5).abs() < 1e-12);
        assert!((report.f[0][1] + 0.5).abs() < 1e-12);
        assert!((report.f[2][1] - 0.9).abs() < 1e-12);
        assert!((report.f[1][2] + 1.0).abs() < 1e-12);
        assert_eq!(report.order, vec![0, 1, 2]);
    }

    #[test]
    fn self_fitness_is_zero() {
        let model = fixtures::canonical_three_trait();
        for t in &model.traits {
            assert!(model.fitness(t, t).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn identical_rows_violate_order() {
        let model = fixtures::neutral_pair();
        let err = compute_fitness(&model).unwrap_err();
        assert!(matches!(err, ModelError::OrderViolation(_)), "{err}");
    }
}
