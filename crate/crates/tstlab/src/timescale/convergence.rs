use super::{AnalysisError, LimitProfile};
use crate::model::{compute_fitness, DemographicModel, TraitId};
use crate::ode::{detect_crossings, integrate_with, CrossingKind, IntegrateOptions, MigrationMode,
    OdeError, OdeSystemSpec};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub tol: f64,
    /// Extra rescaled time past the last switch.
    pub rescaled_margin: f64,
    /// Extra natural time on top, covering order-one sweep windows.
    pub natural_margin: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            tol: 1e-9,
            rescaled_margin: 0.6,
            natural_margin: 30.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub event: String,
    pub trait_id: TraitId,
    /// Predicted switch time on the rescaled clock.
    pub predicted: f64,
    /// Measured crossing time divided by `ln(1/epsilon)`.
    pub measured: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub eta: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Whether every event's |relative error| is non-increasing as epsilon
    /// decreases; absent for single-point sweeps.
    pub monotone_decreasing: Option<bool>,
}

/// Integrates the birth-weighted system from the monomorphic initial
/// condition for each epsilon, extracts eta-level crossings, pairs them with
/// the profile's predicted switch times (invasion up-crossings with `I_k`,
/// recovery up-crossings with `I + S`), and reports relative errors on the
/// rescaled clock. Sweep members run in parallel.
pub fn verify_convergence(
    model: &DemographicModel,
    profile: &LimitProfile,
    eps_sweep: &[f64],
    eta: f64,
    opts: &SweepOptions,
) -> Result<ConvergenceReport, AnalysisError> {
    let fit = compute_fitness(model)?;
    let min_xibar = fit
        .xi_bar
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(eta > 0.0 && eta < min_xibar) {
        return Err(AnalysisError::Ode(OdeError::InvalidArgument(format!(
            "eta must lie in (0, min xibar = {min_xibar}); got {eta}"
        ))));
    }
    if eps_sweep.is_empty() || eps_sweep.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(AnalysisError::Ode(OdeError::InvalidArgument(
            "epsilon sweep must be nonempty with values in (0, 1)".into(),
        )));
    }

    // predicted events: invasions at I_k, recoveries at I_{r+2} + S_r
    let top = profile.order.len() - 1;
    let mut predictions: Vec<(String, TraitId, f64)> = Vec::new();
    for k in 1..=top {
        predictions.push((
            format!("invasion x{}", profile.order[k]),
            profile.order[k],
            profile.invasion_times[k - 1],
        ));
    }
    let mut rank = top as isize - 2;
    while rank >= 0 {
        let r = rank as usize;
        predictions.push((
            format!("recovery x{}", profile.order[r]),
            profile.order[r],
            profile.invasion_times[r + 1] + profile.recovery_increments[r],
        ));
        rank -= 2;
    }
    predictions.sort_by(|a, b| a.2.total_cmp(&b.2));

    let mut eps_sorted = eps_sweep.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a)); // largest epsilon first

    let per_eps: Vec<Result<Vec<ConvergenceRow>, AnalysisError>> = eps_sorted
        .par_iter()
        .map(|&eps| measure_one(model, profile, &predictions, eps, eta, opts))
        .collect();

    let mut rows = Vec::new();
    for r in per_eps {
        rows.extend(r?);
    }

    let monotone_decreasing = if eps_sorted.len() >= 2 {
        let mut ok = true;
        for (label, _, _) in &predictions {
            let errs: Vec<f64> = rows
                .iter()
                .filter(|r| &r.event == label)
                .map(|r| r.rel_err.abs())
                .collect();
            ok &= errs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        }
        Some(ok)
    } else {
        None
    };

    Ok(ConvergenceReport {
        eta,
        rows,
        monotone_decreasing,
    })
}

fn measure_one(
    model: &DemographicModel,
    profile: &LimitProfile,
    predictions: &[(String, TraitId, f64)],
    eps: f64,
    eta: f64,
    opts: &SweepOptions,
) -> Result<Vec<ConvergenceRow>, AnalysisError> {
    let ln_inv = (1.0 / eps).ln();
    let mut sweep_model = model.clone();
    sweep_model.scales.epsilon = eps;
    let fit = compute_fitness(&sweep_model)?;
    let mut initial = vec![0.0; sweep_model.traits.len()];
    initial[fit.order[0] as usize] = fit.xibar_by_rank(0);
    let spec = OdeSystemSpec {
        model: sweep_model,
        migration_mode: MigrationMode::BirthWeighted,
        initial_state: initial,
    };
    let t_end = (profile.last_switch() + opts.rescaled_margin) * ln_inv + opts.natural_margin;
    let traj = integrate_with(&spec, t_end, opts.tol, &IntegrateOptions::default())?;
    let crossings = detect_crossings(&traj, eta);

    let mut rows = Vec::new();
    let mut used: Vec<bool> = vec![false; crossings.len()];
    for (label, trait_id, predicted) in predictions {
        let target = predicted * ln_inv;
        let best = crossings
            .iter()
            .enumerate()
            .filter(|(i, c)| {
                !used[*i] && c.trait_id == *trait_id && matches!(c.kind, CrossingKind::Up)
            })
            .min_by(|(_, a), (_, b)| {
                (a.time - target).abs().total_cmp(&(b.time - target).abs())
            });
        match best {
            Some((i, c)) => {
                used[i] = true;
                let measured = c.time / ln_inv;
                rows.push(ConvergenceRow {
                    epsilon: eps,
                    event: label.clone(),
                    trait_id: *trait_id,
                    predicted: *predicted,
                    measured,
                    rel_err: (measured - predicted) / predicted,
                });
            }
            None => {
                return Err(AnalysisError::UnresolvedEvent(format!(
                    "{label} at rescaled time {predicted:.4} has no unmatched up-crossing \
                     at epsilon = {eps:.1e} (t_end = {t_end:.1})"
                )));
            }
        }
    }
    Ok(rows)
}
