//! Named model fixtures used across tests, the acceptance suite, and docs.
//!
//! The canonical three-trait chain is the workhorse: it provably satisfies
//! the relay (C3) and depth-ratio (C4) conditions, with growth rates
//! `b - d = (1, 2, 1)`, equilibrium masses `(1, 2, 2)`, and consecutive
//! fitness values `f(1,0) = 1.5`, `f(0,1) = -0.5`, `f(2,1) = 0.9`,
//! `f(1,2) = -1`.

use crate::model::{
    CompetitionFamily, DemographicModel, ModelOptions, MutationKernel, ParametricRates,
    RankPolicy, Rates, ScalarFamily, Scales, TabularRates, TraitRecord, TraitSpace,
};

fn tabular(
    values: &[f64],
    b: &[f64],
    d: &[f64],
    alpha: Vec<Vec<f64>>,
    m: Vec<Vec<f64>>,
    mu: &[f64],
) -> DemographicModel {
    let traits = values
        .iter()
        .enumerate()
        .map(|(i, v)| TraitRecord::ancestor(i as u32, vec![*v]))
        .collect();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min) - 0.5;
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5;
    DemographicModel {
        space: TraitSpace {
            lower: vec![lo],
            upper: vec![hi],
        },
        traits,
        rates: Rates::Tabular(TabularRates {
            b: b.to_vec(),
            d: d.to_vec(),
            alpha,
            m,
            mu: mu.to_vec(),
        }),
        scales: Scales {
            epsilon: 1e-4,
            sigma: 1e-2,
            rho: 1e-3,
        },
        mutation_kernel: MutationKernel::Gaussian { stddev: 0.3 },
        options: ModelOptions::default(),
    }
}

/// Three traits, `xibar = (1, 2, 2)`; the slow-migration limit ends at
/// `1·δ_x0 + 2·δ_x2` with switch times `I_1 = 2/3`, `I_2 = 16/9`,
/// `S_0 = 5/9`.
pub fn canonical_three_trait() -> DemographicModel {
    tabular(
        &[0.0, 1.0, 2.0],
        &[2.0, 3.0, 2.0],
        &[1.0, 1.0, 1.0],
        vec![
            vec![1.0, 0.75, 0.0],
            vec![0.5, 1.0, 1.5],
            vec![0.0, 0.05, 0.5],
        ],
        vec![
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0],
        ],
        &[0.5, 0.5, 0.5],
    )
}

/// Canonical chain with `alpha(x2, x1)` overridden; `0.3` drops `f(2,1)` to
/// `0.4` and breaks the (C4) depth ratio.
pub fn canonical_with_alpha21(alpha21: f64) -> DemographicModel {
    let mut model = canonical_three_trait();
    if let Rates::Tabular(tab) = &mut model.rates {
        tab.alpha[2][1] = alpha21;
    }
    model
}

pub fn canonical_with_mu(mu: [f64; 3]) -> DemographicModel {
    let mut model = canonical_three_trait();
    if let Rates::Tabular(tab) = &mut model.rates {
        tab.mu = mu.to_vec();
    }
    model
}

/// One logistic trait with `xibar = 1`.
pub fn single_trait() -> DemographicModel {
    tabular(
        &[0.0],
        &[2.0],
        &[1.0],
        vec![vec![1.0]],
        vec![vec![0.0]],
        &[0.5],
    )
}

/// Two identical traits with symmetric competition: no strict fitness order,
/// degenerate interior kernel.
pub fn neutral_pair() -> DemographicModel {
    tabular(
        &[0.0, 1.0],
        &[2.0, 2.0],
        &[1.0, 1.0],
        vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        &[0.0, 0.0],
    )
}

/// Three traits tuned to `xibar = (1, 2, 3)`: the limit ends at
/// `δ_x0 + 3·δ_x2`. Same switch times as the canonical chain.
pub fn fig1_three_trait() -> DemographicModel {
    tabular(
        &[0.0, 1.0, 2.0],
        &[2.0, 3.0, 2.0],
        &[1.0, 1.0, 1.0],
        vec![
            vec![1.0, 0.75, 0.0],
            vec![0.5, 1.0, 1.0],
            vec![0.0, 0.05, 1.0 / 3.0],
        ],
        vec![
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0],
        ],
        &[0.5, 0.5, 0.5],
    )
}

/// Four traits tuned to `xibar = (1, 2, 1, 4)`: the odd-length limit ends at
/// `2·δ_x1 + 4·δ_x3`, with `I = (0.4, 1.1143, 2.2254)` and `S_1 = 2/27`.
pub fn fig1_four_trait() -> DemographicModel {
    tabular(
        &[0.0, 1.0, 2.0, 3.0],
        &[1.25, 4.0, 2.5, 2.0],
        &[1.0, 1.0, 1.0, 1.0],
        vec![
            vec![0.25, 0.375, 0.0, 0.0],
            vec![0.5, 1.5, 3.2, 0.0],
            vec![0.0, 0.05, 1.5, 0.5],
            vec![0.0, 0.0, 0.1, 0.25],
        ],
        vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.0, 0.0, 1.0, 0.0],
        ],
        &[0.5, 0.5, 0.5, 0.5],
    )
}

/// Recovery-friendly five-trait chain: `xibar = (2, 3, 2.5, 3, 2)`,
/// up-fitness `(1.6, 0.95, 0.9, 0.9)`, down-fitness
/// `(-0.5, -0.4, -0.3, -0.4)`. `S_0 = 10.53` dwarfs the later invasion
/// increments, so the even-length recovery cascade is well separated.
pub fn recursion_extended_l4() -> DemographicModel {
    // alpha cross terms from the target fitness values:
    //   alpha(i+1, i) = (r_{i+1} - u_i) / xibar_i
    //   alpha(i, i+1) = (r_i - v_i) / xibar_{i+1}
    tabular(
        &[0.0, 1.0, 2.0, 3.0, 4.0],
        &[1.05, 3.0, 2.0, 2.0, 2.0],
        &[1.0, 1.0, 1.0, 1.0, 1.0],
        vec![
            vec![0.025, 0.55 / 3.0, 0.0, 0.0, 0.0],
            vec![0.2, 2.0 / 3.0, 0.96, 0.0, 0.0],
            vec![0.0, 0.05 / 3.0, 0.4, 1.3 / 3.0, 0.0],
            vec![0.0, 0.0, 0.04, 1.0 / 3.0, 0.7],
            vec![0.0, 0.0, 0.0, 0.1 / 3.0, 0.5],
        ],
        vec![
            vec![0.0, 1.0, 0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.5, 0.0, 0.0],
            vec![0.0, 0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.0, 0.5, 0.0, 0.5],
            vec![0.0, 0.0, 0.0, 1.0, 0.0],
        ],
        &[0.5; 5],
    )
}

/// The first three traits of [`recursion_extended_l4`] as a standalone chain
/// (boundary migration renormalized). Same `I_1`, `I_2`, `S_0`, so its limit
/// profile embeds into the five-trait one.
pub fn recursion_base_l2() -> DemographicModel {
    tabular(
        &[0.0, 1.0, 2.0],
        &[1.05, 3.0, 2.0],
        &[1.0, 1.0, 1.0],
        vec![
            vec![0.025, 0.55 / 3.0, 0.0],
            vec![0.2, 2.0 / 3.0, 0.96],
            vec![0.0, 0.05 / 3.0, 0.4],
        ],
        vec![
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0],
        ],
        &[0.5; 3],
    )
}

fn parametric(
    amplitude: f64,
    mu: f64,
    fitness_tol: f64,
    rank_policy: RankPolicy,
) -> DemographicModel {
    DemographicModel {
        space: TraitSpace {
            lower: vec![0.0],
            upper: vec![60.0],
        },
        traits: vec![TraitRecord::ancestor(0, vec![30.0])],
        rates: Rates::Parametric(ParametricRates {
            b: ScalarFamily::Constant { value: 2.0 },
            d: ScalarFamily::Constant { value: 1.0 },
            alpha: CompetitionFamily::AsymmetricExponential {
                amplitude,
                decay: 1.0,
                max_exponent: 3.0,
            },
            mu: ScalarFamily::Constant { value: mu },
        }),
        scales: Scales {
            epsilon: 1e-4,
            sigma: 1e-2,
            rho: 1e-3,
        },
        mutation_kernel: MutationKernel::Gaussian { stddev: 1.5 },
        options: ModelOptions {
            fitness_tol,
            rank_policy,
            ..ModelOptions::default()
        },
    }
}

/// Unbounded growth fixture for jump-chain statistics: constant `xibar = 2`,
/// `mu = 1`, value order = fitness order for every mutant.
pub fn tst_jump_fixture() -> DemographicModel {
    parametric(0.5, 1.0, 1e-9, RankPolicy::Error)
}

/// Fixture for cross-validating the jump chain against the full two-scale
/// simulator: small equilibrium mass (`xibar = 0.5`) keeps the migration
/// footprint per trait well under the comparison tolerance, and the wide
/// fitness tolerance with resampling keeps reshuffle rates bounded away
/// from zero.
pub fn two_scale_fixture() -> DemographicModel {
    parametric(2.0, 0.02, 0.05, RankPolicy::Resample)
}

/// Single ancestor with `xibar = 1` and `mu = 0.5` for event-rate laws.
pub fn poisson_fixture() -> DemographicModel {
    parametric(1.0, 0.5, 1e-9, RankPolicy::Error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_assumptions, compute_fitness};

    #[test]
    fn all_tabular_fixtures_validate() {
        for model in [
            canonical_three_trait(),
            single_trait(),
            fig1_three_trait(),
            fig1_four_trait(),
            recursion_base_l2(),
            recursion_extended_l4(),
        ] {
            model.validate().unwrap();
            let fit = compute_fitness(&model).unwrap();
            let report = check_assumptions(&model, &fit);
            assert!(
                report.passes(),
                "fixture failed assumptions: {:?}",
                report.violations()
            );
        }
    }

    #[test]
    fn fig1_masses() {
        let m3 = fig1_three_trait();
        let fit = compute_fitness(&m3).unwrap();
        assert_eq!(fit.xi_bar, vec![1.0, 2.0, 3.0]);
        let m4 = fig1_four_trait();
        let fit = compute_fitness(&m4).unwrap();
        assert_eq!(fit.xi_bar, vec![1.0, 2.0, 1.0, 4.0]);
    }

    #[test]
    fn recursion_chain_targets() {
        let model = recursion_extended_l4();
        let fit = compute_fitness(&model).unwrap();
        let u: Vec<f64> = (1..5).map(|k| fit.f_by_rank(k, k - 1)).collect();
        let v: Vec<f64> = (0..4).map(|k| fit.f_by_rank(k, k + 1)).collect();
        for (got, want) in u.iter().zip([1.6, 0.95, 0.9, 0.9]) {
            assert!((got - want).abs() < 1e-12, "u: {got} vs {want}");
        }
        for (got, want) in v.iter().zip([-0.5, -0.4, -0.3, -0.4]) {
            assert!((got - want).abs() < 1e-12, "v: {got} vs {want}");
        }
    }

    #[test]
    fn parametric_fixtures_validate() {
        for model in [tst_jump_fixture(), two_scale_fixture(), poisson_fixture()] {
            model.validate().unwrap();
            compute_fitness(&model).unwrap();
        }
    }
}
