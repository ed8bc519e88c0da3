use crate::model::{DemographicModel, ModelError, OrderedTraitSequence, TraitRecord};
use serde::{Deserialize, Serialize};

/// How migration couples neighboring traits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MigrationMode {
    /// Flux `epsilon * b(x_j) * xi(x_j) * m(x_j, x_i)`: migration rides on
    /// birth events.
    BirthWeighted,
    /// Flux `epsilon * xi(x_j) * m(x_j, x_i)`, restricted to supported
    /// target sites (density above the model's support threshold).
    Plain,
}

/// Deterministic system specification: model, migration mode, and the
/// initial per-trait densities (indexed by trait id).
#[derive(Debug, Clone)]
pub struct OdeSystemSpec {
    pub model: DemographicModel,
    pub migration_mode: MigrationMode,
    pub initial_state: Vec<f64>,
}

/// Rate tables flattened along the fitness order so the right-hand side
/// only touches adjacent ranks.
pub(crate) struct SystemParams {
    pub growth: Vec<f64>,
    pub birth: Vec<f64>,
    pub alpha_self: Vec<f64>,
    /// `alpha_up[i]` = pressure on rank `i` from rank `i+1`.
    pub alpha_up: Vec<f64>,
    /// `alpha_dn[i]` = pressure on rank `i+1` from rank `i`.
    pub alpha_dn: Vec<f64>,
    /// `m_up[i]` = migration weight rank `i` -> rank `i+1`.
    pub m_up: Vec<f64>,
    /// `m_dn[i]` = migration weight rank `i+1` -> rank `i`.
    pub m_dn: Vec<f64>,
    pub support_threshold: f64,
}

impl SystemParams {
    pub fn build(
        model: &DemographicModel,
        roster: &[TraitRecord],
        seq: &OrderedTraitSequence,
    ) -> Result<Self, ModelError> {
        let n = seq.len();
        let by_rank = |rank: usize| &roster[seq.ordered_ids()[rank] as usize];
        let mut p = SystemParams {
            growth: Vec::with_capacity(n),
            birth: Vec::with_capacity(n),
            alpha_self: Vec::with_capacity(n),
            alpha_up: Vec::with_capacity(n.saturating_sub(1)),
            alpha_dn: Vec::with_capacity(n.saturating_sub(1)),
            m_up: Vec::with_capacity(n.saturating_sub(1)),
            m_dn: Vec::with_capacity(n.saturating_sub(1)),
            support_threshold: model.options.support_threshold,
        };
        for rank in 0..n {
            let t = by_rank(rank);
            p.growth.push(model.growth(t)?);
            p.birth.push(model.birth(t)?);
            p.alpha_self.push(model.alpha(t, t)?);
        }
        for rank in 0..n.saturating_sub(1) {
            let lo = by_rank(rank);
            let hi = by_rank(rank + 1);
            p.alpha_up.push(model.alpha(lo, hi)?);
            p.alpha_dn.push(model.alpha(hi, lo)?);
            p.m_up.push(model.migration_weight(seq, rank, rank + 1)?);
            p.m_dn.push(model.migration_weight(seq, rank + 1, rank)?);
        }
        Ok(p)
    }

    /// Lotka-Volterra drift plus migration exchange, in rank coordinates.
    pub fn rhs(&self, mode: MigrationMode, epsilon: f64, y: &[f64], dy: &mut [f64]) {
        let n = y.len();
        for i in 0..n {
            let mut pressure = self.alpha_self[i] * y[i];
            if i > 0 {
                pressure += self.alpha_dn[i - 1] * y[i - 1];
            }
            if i + 1 < n {
                pressure += self.alpha_up[i] * y[i + 1];
            }
            dy[i] = (self.growth[i] - pressure) * y[i];
        }
        if epsilon == 0.0 || n == 1 {
            return;
        }
        match mode {
            MigrationMode::BirthWeighted => {
                for i in 0..n - 1 {
                    let up = self.birth[i] * y[i] * self.m_up[i];
                    let down = self.birth[i + 1] * y[i + 1] * self.m_dn[i];
                    dy[i] += epsilon * (down - up);
                    dy[i + 1] += epsilon * (up - down);
                }
            }
            MigrationMode::Plain => {
                // mass moves only into supported sites; each pairwise flux is
                // gated by its target, so totals are conserved
                for i in 0..n - 1 {
                    let up_ok = y[i + 1] > self.support_threshold;
                    let dn_ok = y[i] > self.support_threshold;
                    let up = if up_ok { y[i] * self.m_up[i] } else { 0.0 };
                    let down = if dn_ok { y[i + 1] * self.m_dn[i] } else { 0.0 };
                    dy[i] += epsilon * (down - up);
                    dy[i + 1] += epsilon * (up - down);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::compute_fitness;

    #[test]
    fn migration_conserves_mass_in_both_modes() {
        let model = fixtures::canonical_three_trait();
        let fit = compute_fitness(&model).unwrap();
        let params = SystemParams::build(&model, &model.traits, &fit.sequence()).unwrap();
        let y = vec![0.7, 0.2, 1.4];
        for mode in [MigrationMode::BirthWeighted, MigrationMode::Plain] {
            let mut with_mig = vec![0.0; 3];
            params.rhs(mode, 1e-3, &y, &mut with_mig);
            let mut without = vec![0.0; 3];
            params.rhs(mode, 0.0, &y, &mut without);
            let flux: f64 = with_mig.iter().zip(&without).map(|(a, b)| a - b).sum();
            assert!(flux.abs() < 1e-15, "{mode:?} leaks mass: {flux}");
        }
    }

    #[test]
    fn plain_mode_gates_unsupported_targets() {
        let model = fixtures::canonical_three_trait();
        let fit = compute_fitness(&model).unwrap();
        let params = SystemParams::build(&model, &model.traits, &fit.sequence()).unwrap();
        // trait 1 exactly extinct: it must receive nothing in plain mode
        let y = vec![1.0, 0.0, 2.0];
        let mut dy = vec![0.0; 3];
        params.rhs(MigrationMode::Plain, 1e-2, &y, &mut dy);
        assert_eq!(dy[1], 0.0);
        // but it does receive the birth-weighted flux
        params.rhs(MigrationMode::BirthWeighted, 1e-2, &y, &mut dy);
        assert!(dy[1] > 0.0);
    }
}
