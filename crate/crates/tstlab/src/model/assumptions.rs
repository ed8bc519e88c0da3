use super::fitness::FitnessReport;
use super::DemographicModel;
use serde::Serialize;

/// One evaluated inequality instance.
#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl CheckItem {
    fn geq(label: String, lhs: f64, rhs: f64) -> Self {
        CheckItem {
            label,
            lhs,
            rhs,
            holds: lhs >= rhs,
        }
    }

    fn lt(label: String, lhs: f64, rhs: f64) -> Self {
        CheckItem {
            label,
            lhs,
            rhs,
            holds: lhs < rhs,
        }
    }

    fn gt(label: String, lhs: f64, rhs: f64) -> Self {
        CheckItem {
            label,
            lhs,
            rhs,
            holds: lhs > rhs,
        }
    }
}

/// Pass/fail report for the structural assumptions behind the slow-migration
/// limit profile, with every violated inequality instance spelled out.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// Cumulative invasion times `I_k = sum_{i<=k} 1/f(i, i-1)` in rank
    /// indexing, `k = 1..=L`.
    pub invasion_times: Vec<f64>,
    /// Recovery increments `S_k = |f(k, k+1)| / (f(k+2, k+1) * (b_k - d_k))`,
    /// `k = 0..=L-2`.
    pub recovery_increments: Vec<f64>,
    /// Relay condition: `i / (b_i - d_i) >= I_i` for every `i >= 2`.
    pub c3: Vec<CheckItem>,
    /// Depth-ratio condition: `|f(i, i+1)| / f(i+2, i+1) < 1`.
    pub c4_ratio: Vec<CheckItem>,
    /// Recovery-ordering condition `S_i - 1/f(i+3, i+2) > S_{i+1}`, evaluated
    /// for the parity of `i` that the length-`L` profile actually uses
    /// (even `i` for even `L`, odd `i` for odd `L`).
    pub c4_three_index: Vec<CheckItem>,
    /// Derived chain: each recovery increment exceeds the remaining invasion
    /// time above it, `S_i > I_L - I_{i+2}`. Consistency cross-check only
    /// (implied by the recovery ordering together with `S > 0`).
    pub chain_tail: Vec<CheckItem>,
    /// Same-parity recovery ordering over two invasion increments,
    /// `S_i - (I_{i+4} - I_{i+2}) > S_{i+2}`: recovery switch times must
    /// decrease in depth. Load-bearing for the profile's case split.
    pub chain_order: Vec<CheckItem>,
}

impl AssumptionReport {
    /// True when (C3), (C4), and the recovery ordering all hold; the tail
    /// chain is informative.
    pub fn passes(&self) -> bool {
        self.c3
            .iter()
            .chain(&self.c4_ratio)
            .chain(&self.c4_three_index)
            .chain(&self.chain_order)
            .all(|c| c.holds)
    }

    pub fn violations(&self) -> Vec<&CheckItem> {
        self.c3
            .iter()
            .chain(&self.c4_ratio)
            .chain(&self.c4_three_index)
            .chain(&self.chain_order)
            .filter(|c| !c.holds)
            .collect()
    }
}

/// Evaluates (C3), (C4), and the derived recovery-ordering chains on the
/// fitness-ordered roster. All checks are vacuous for fewer than three
/// traits.
pub fn check_assumptions(model: &DemographicModel, fit: &FitnessReport) -> AssumptionReport {
    let n = fit.order.len();
    let ell = n.saturating_sub(1); // top rank index L

    let growth_by_rank: Vec<f64> = (0..n)
        .map(|rank| {
            let t = &model.traits[fit.order[rank] as usize];
            model.growth(t).expect("rates evaluated during compute_fitness")
        })
        .collect();

    // I_k, k = 1..=L
    let mut invasion_times = Vec::with_capacity(ell);
    let mut acc = 0.0;
    for k in 1..=ell {
        acc += 1.0 / fit.f_by_rank(k, k - 1);
        invasion_times.push(acc);
    }

    // S_k, k = 0..=L-2
    let recovery_increments: Vec<f64> = (0..ell.saturating_sub(1))
        .map(|k| fit.f_by_rank(k, k + 1).abs() / (fit.f_by_rank(k + 2, k + 1) * growth_by_rank[k]))
        .collect();

    let mut c3 = Vec::new();
    for i in 2..=ell {
        c3.push(CheckItem::geq(
            format!("C3[i={i}]: i/(b_i-d_i) >= I_i"),
            i as f64 / growth_by_rank[i],
            invasion_times[i - 1],
        ));
    }

    let mut c4_ratio = Vec::new();
    for i in 0..ell.saturating_sub(1) {
        c4_ratio.push(CheckItem::lt(
            format!("C4[i={i}]: |f(i,i+1)|/f(i+2,i+1) < 1"),
            fit.f_by_rank(i, i + 1).abs() / fit.f_by_rank(i + 2, i + 1),
            1.0,
        ));
    }

    // Only the parity the profile's recovery cascade uses is required; the
    // opposite-parity instances are jointly infeasible with (C3) for L >= 4.
    let parity = ell % 2;
    let mut c4_three_index = Vec::new();
    for i in 0..ell.saturating_sub(2) {
        if i % 2 != parity {
            continue;
        }
        c4_three_index.push(CheckItem::gt(
            format!("C4[i={i}]: S_i - 1/f(i+3,i+2) > S_(i+1)"),
            recovery_increments[i] - 1.0 / fit.f_by_rank(i + 3, i + 2),
            recovery_increments[i + 1],
        ));
    }

    let mut chain_tail = Vec::new();
    let mut chain_order = Vec::new();
    if ell >= 1 {
        let i_total = invasion_times[ell - 1];
        for i in 0..ell.saturating_sub(2) {
            if i % 2 != parity {
                continue;
            }
            chain_tail.push(CheckItem::gt(
                format!("chain[i={i}]: S_i > I_L - I_(i+2)"),
                recovery_increments[i],
                i_total - invasion_times[i + 1],
            ));
            if i + 4 <= ell {
                chain_order.push(CheckItem::gt(
                    format!("chain[i={i}]: S_i - (I_(i+4) - I_(i+2)) > S_(i+2)"),
                    recovery_increments[i] - (invasion_times[i + 3] - invasion_times[i + 1]),
                    recovery_increments[i + 2],
                ));
            }
        }
    }

    AssumptionReport {
        invasion_times,
        recovery_increments,
        c3,
        c4_ratio,
        c4_three_index,
        chain_tail,
        chain_order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::compute_fitness;

    #[test]
    fn canonical_passes_with_expected_margins() {
        let model = fixtures::canonical_three_trait();
        let fit = compute_fitness(&model).unwrap();
        let report = check_assumptions(&model, &fit);
        assert!(report.passes());
        // C3 at i = 2: 2/1 vs 1/1.5 + 1/0.9
        assert!((report.c3[0].lhs - 2.0).abs() < 1e-12);
        assert!((report.c3[0].rhs - (1.0 / 1.5 + 1.0 / 0.9)).abs() < 1e-12);
        // C4 ratio: 0.5 / 0.9
        assert!((report.c4_ratio[0].lhs - 0.5 / 0.9).abs() < 1e-12);
        assert!(report.c4_three_index.is_empty());
    }

    #[test]
    fn single_trait_vacuously_passes() {
        let model = fixtures::single_trait();
        let fit = compute_fitness(&model).unwrap();
        let report = check_assumptions(&model, &fit);
        assert!(report.passes());
        assert!(report.c3.is_empty() && report.c4_ratio.is_empty());
    }

    #[test]
    fn weakened_top_fitness_fails_ratio() {
        // raising alpha(x2, x1) to 0.3 drops f(2,1) to 0.4 < |f(0,1)| = 0.5
        let model = fixtures::canonical_with_alpha21(0.3);
        let fit = compute_fitness(&model).unwrap();
        assert!((fit.f[2][1] - 0.4).abs() < 1e-12);
        let report = check_assumptions(&model, &fit);
        assert!(!report.passes());
        assert!(!report.c4_ratio[0].holds);
        assert!((report.c4_ratio[0].lhs - 0.5 / 0.4).abs() < 1e-12);
    }
}
