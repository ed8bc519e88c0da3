use super::AnalysisError;
use crate::model::{check_assumptions, DemographicModel, FitnessReport, TraitId};
use serde::Serialize;
use std::collections::BTreeMap;

/// The limiting piecewise-constant path on the `ln(1/epsilon)` clock.
///
/// `configurations[k]` (an atomic measure, trait id -> mass) holds on the
/// left-closed interval `[switch_times[k-1], switch_times[k])`, with the
/// first interval starting at 0 and the last extending to infinity.
///
/// Invasion phase: between `I_k` and `I_{k+1}` the population is monomorphic
/// at the rank-`k` trait. After the fittest trait fixates, previously
/// collapsed traits recover every second rank downward; the recovery switch
/// times are `I_{2j+2} + S_{2j}` (even top rank) or `I_{2j+1} + S_{2j-1}`
/// (odd top rank), decreasing in depth.
#[derive(Debug, Clone, Serialize)]
pub struct LimitProfile {
    pub switch_times: Vec<f64>,
    pub configurations: Vec<BTreeMap<TraitId, f64>>,
    /// `I_k = sum_{i<=k} 1/f(i, i-1)`, `k = 1..=L`.
    pub invasion_times: Vec<f64>,
    /// `S_k = |f(k, k+1)| / (f(k+2, k+1) (b_k - d_k))`, `k = 0..=L-2`.
    pub recovery_increments: Vec<f64>,
    /// Trait ids in fitness-rank order.
    pub order: Vec<TraitId>,
}

impl LimitProfile {
    pub fn configuration_at(&self, t: f64) -> &BTreeMap<TraitId, f64> {
        let idx = self
            .switch_times
            .iter()
            .position(|s| t < *s)
            .unwrap_or(self.switch_times.len());
        &self.configurations[idx]
    }

    pub fn final_configuration(&self) -> &BTreeMap<TraitId, f64> {
        self.configurations.last().expect("at least one interval")
    }

    pub fn last_switch(&self) -> f64 {
        self.switch_times.last().copied().unwrap_or(0.0)
    }
}

/// Builds the exact limit profile for a model whose assumptions all hold.
pub fn build_limit_profile(
    model: &DemographicModel,
    fit: &FitnessReport,
) -> Result<LimitProfile, AnalysisError> {
    let assumptions = check_assumptions(model, fit);
    if !assumptions.passes() {
        let detail: Vec<String> = assumptions
            .violations()
            .iter()
            .map(|c| format!("{} (lhs {:.6}, rhs {:.6})", c.label, c.lhs, c.rhs))
            .collect();
        return Err(AnalysisError::AssumptionViolation(detail.join("; ")));
    }

    let order = fit.order.clone();
    let top = order.len() - 1; // L
    let invasion_times = assumptions.invasion_times.clone();
    let recovery_increments = assumptions.recovery_increments.clone();
    let atom = |rank: usize| (order[rank], fit.xibar_by_rank(rank));

    let mut switch_times = Vec::new();
    let mut configurations = Vec::new();
    configurations.push(BTreeMap::from([atom(0)]));

    if top == 0 {
        return Ok(LimitProfile {
            switch_times,
            configurations,
            invasion_times,
            recovery_increments,
            order,
        });
    }

    // monomorphic substitutions at I_1 < ... < I_L
    for k in 1..=top {
        switch_times.push(invasion_times[k - 1]);
        configurations.push(BTreeMap::from([atom(k)]));
    }

    if top >= 2 {
        // recovery cascade: every second rank below the top switches back
        // on, deepest last
        let mut support = vec![top];
        let mut rank = top as isize - 2;
        while rank >= 0 {
            let r = rank as usize;
            support.push(r);
            switch_times.push(invasion_times[r + 2 - 1] + recovery_increments[r]);
            configurations.push(support.iter().map(|rr| atom(*rr)).collect());
            rank -= 2;
        }
    }

    debug_assert!(
        switch_times.windows(2).all(|w| w[0] < w[1]),
        "switch times must increase strictly"
    );
    Ok(LimitProfile {
        switch_times,
        configurations,
        invasion_times,
        recovery_increments,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::compute_fitness;

    fn profile_for(model: &DemographicModel) -> LimitProfile {
        let fit = compute_fitness(model).unwrap();
        build_limit_profile(model, &fit).unwrap()
    }

    #[test]
    fn canonical_profile_times_and_final_configuration() {
        let profile = profile_for(&fixtures::canonical_three_trait());
        let expect = [2.0 / 3.0, 16.0 / 9.0, 16.0 / 9.0 + 5.0 / 9.0];
        assert_eq!(profile.switch_times.len(), 3);
        for (got, want) in profile.switch_times.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(
            profile.final_configuration(),
            &BTreeMap::from([(0, 1.0), (2, 2.0)])
        );
        // invasion phase is monomorphic per rank
        assert_eq!(profile.configuration_at(0.5), &BTreeMap::from([(0, 1.0)]));
        assert_eq!(profile.configuration_at(1.0), &BTreeMap::from([(1, 2.0)]));
        assert_eq!(profile.configuration_at(2.0), &BTreeMap::from([(2, 2.0)]));
    }

    #[test]
    fn fig1_three_trait_final_configuration() {
        let profile = profile_for(&fixtures::fig1_three_trait());
        assert_eq!(
            profile.final_configuration(),
            &BTreeMap::from([(0, 1.0), (2, 3.0)])
        );
    }

    #[test]
    fn fig1_four_trait_ends_on_odd_ranks() {
        let profile = profile_for(&fixtures::fig1_four_trait());
        assert_eq!(
            profile.final_configuration(),
            &BTreeMap::from([(1, 2.0), (3, 4.0)])
        );
        // I = (0.4, 1.1143, 2.2254), final switch at I_3 + S_1
        assert!((profile.invasion_times[0] - 0.4).abs() < 1e-12);
        let last = profile.last_switch();
        let expect = profile.invasion_times[2] + profile.recovery_increments[1];
        assert!((last - expect).abs() < 1e-12);
        assert!((profile.recovery_increments[1] - 2.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn single_trait_profile_is_constant() {
        let profile = profile_for(&fixtures::single_trait());
        assert!(profile.switch_times.is_empty());
        assert_eq!(profile.final_configuration(), &BTreeMap::from([(0, 1.0)]));
    }

    #[test]
    fn switch_increments_match_fitness_reciprocals() {
        let model = fixtures::recursion_extended_l4();
        let fit = compute_fitness(&model).unwrap();
        let profile = profile_for(&model);
        for k in 1..profile.invasion_times.len() {
            let diff = profile.invasion_times[k] - profile.invasion_times[k - 1];
            let expect = 1.0 / fit.f_by_rank(k + 1, k);
            assert!((diff - expect).abs() <= 4.0 * f64::EPSILON * expect.abs());
        }
    }

    #[test]
    fn assumption_violation_blocks_profile() {
        let model = fixtures::canonical_with_alpha21(0.3);
        let fit = compute_fitness(&model).unwrap();
        let err = build_limit_profile(&model, &fit).unwrap_err();
        assert!(matches!(err, AnalysisError::AssumptionViolation(_)));
    }
}
