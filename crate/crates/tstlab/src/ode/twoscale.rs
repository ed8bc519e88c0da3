//! Two-scale simulator: deterministic drift and migration between mutation
//! events, Poissonian mutant insertions of seed mass `rho` via thinning.

use super::{default_max_step, integrate_adaptive, OdeError, StepperOptions};
use super::{MigrationMode, SystemParams, Trajectory};
use crate::model::{
    compute_fitness, find_rank, DemographicModel, ModelError, OrderedTraitSequence, RankPolicy,
    Rates, TraitId, TraitRecord,
};
use crate::rng::SimRng;
use rand::Rng;
use rand::SeedableRng;
use serde::Serialize;

/// One mutant insertion, in both natural and mutation time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationEvent {
    /// 1-based mutation-event index; doubles as the mutant's `birth_event`.
    pub index: u32,
    pub time: f64,
    pub mutation_time: f64,
    pub parent_id: TraitId,
    pub new_id: TraitId,
    pub value: Vec<f64>,
    pub offset: Vec<f64>,
    pub rank: usize,
    /// Offset redraws forced by rank ambiguity under the resample policy.
    pub resamples: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordMode {
    /// Keep every accepted integrator step.
    Full,
    /// Keep only each segment's first and last state.
    Endpoints,
}

#[derive(Debug, Clone, Copy)]
pub struct TwoScaleOptions {
    pub migration_mode: MigrationMode,
    pub tol: f64,
    pub max_step: Option<f64>,
    /// Stop right after this many mutation events.
    pub max_events: Option<u32>,
    /// Quiet window (natural time) after each event during which further
    /// events are suppressed. Used to condition on undisturbed relaxation
    /// when cross-validating one-step transitions; 0 leaves the law intact.
    pub min_event_gap: f64,
    pub record: RecordMode,
}

impl Default for TwoScaleOptions {
    fn default() -> Self {
        TwoScaleOptions {
            migration_mode: MigrationMode::Plain,
            tol: 1e-8,
            max_step: None,
            max_events: None,
            min_event_gap: 0.0,
            record: RecordMode::Full,
        }
    }
}

/// Trajectory piece between consecutive mutation events, with the trait
/// order that was in force.
#[derive(Debug, Clone)]
pub struct TwoScaleSegment {
    pub seq: OrderedTraitSequence,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone)]
pub struct TwoScaleRun {
    pub segments: Vec<TwoScaleSegment>,
    pub events: Vec<MutationEvent>,
    /// Every trait ever present, initial roster first, mutants in event order.
    pub roster: Vec<TraitRecord>,
    pub final_seq: OrderedTraitSequence,
    /// Final densities in `final_seq` rank order.
    pub final_state: Vec<f64>,
    pub seed: u64,
}

impl TwoScaleRun {
    /// Pre-event density snapshot: the last state of the segment that ended
    /// at event `index` (1-based), with its trait order.
    pub fn pre_event_state(&self, index: u32) -> (&OrderedTraitSequence, &[f64]) {
        let seg = &self.segments[index as usize - 1];
        (&seg.seq, seg.trajectory.final_state())
    }

    /// Relaxed post-event snapshot: the last state of the segment that
    /// started at event `index`. For the final event this is the run's end.
    pub fn post_event_state(&self, index: u32) -> (&OrderedTraitSequence, &[f64]) {
        match self.segments.get(index as usize) {
            Some(seg) => (&seg.seq, seg.trajectory.final_state()),
            None => (&self.final_seq, &self.final_state),
        }
    }
}

struct Engine<'m> {
    model: &'m DemographicModel,
    opts: TwoScaleOptions,
    roster: Vec<TraitRecord>,
    seq: OrderedTraitSequence,
    y: Vec<f64>,
    params: SystemParams,
    mu_by_rank: Vec<f64>,
    mu_max: f64,
    growth_max: f64,
}

impl<'m> Engine<'m> {
    fn rebuild(&mut self) -> Result<(), ModelError> {
        self.params = SystemParams::build(self.model, &self.roster, &self.seq)?;
        self.mu_by_rank = self
            .seq
            .ordered_ids()
            .iter()
            .map(|id| self.model.mutation_rate(&self.roster[*id as usize]))
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    fn event_rate(&self) -> f64 {
        let sigma = self.model.scales.sigma;
        sigma
            * self
                .y
                .iter()
                .zip(&self.mu_by_rank)
                .map(|(y, mu)| y * mu)
                .sum::<f64>()
    }

    fn max_step(&self) -> f64 {
        self.opts
            .max_step
            .unwrap_or_else(|| default_max_step(self.params.max_consecutive_fitness()))
    }

    /// Advance the state to `t_target`, appending accepted steps to `traj`.
    fn advance(
        &mut self,
        t: f64,
        t_target: f64,
        traj: &mut Trajectory,
        last: &mut (f64, Vec<f64>),
    ) -> Result<(), OdeError> {
        if t_target <= t {
            return Ok(());
        }
        let stepper = StepperOptions {
            rtol: self.opts.tol,
            atol: 1e-60,
            max_step: self.max_step(),
            mass_cap: self.model.options.mass_cap,
        };
        let mode = self.opts.migration_mode;
        let eps = self.model.scales.epsilon;
        let params = &self.params;
        let record_full = self.opts.record == RecordMode::Full;
        let (y_end, _) = integrate_adaptive(
            |_t, y, dy| params.rhs(mode, eps, y, dy),
            t,
            &self.y,
            t_target,
            &stepper,
            |tt, yy| {
                if record_full {
                    traj.push(tt, yy);
                } else {
                    last.0 = tt;
                    last.1.clear();
                    last.1.extend_from_slice(yy);
                }
            },
        )?;
        self.y = y_end;
        Ok(())
    }
}

/// Runs the two-scale dynamics from `initial` (densities indexed by trait
/// id) for `t_end` units of mutation time (`t_end / sigma` natural units).
/// Mutation events arrive as an inhomogeneous Poisson process with rate
/// `sigma * sum_x xi_t(x) mu(x)`, simulated exactly by thinning under a
/// per-window majorant `sigma * mu_max * M * exp(r_max * window)`. Each
/// event samples a parent proportionally to `xi_t(x) mu(x)`, draws an
/// offset, inserts the mutant at its fitness rank with seed mass `rho`, and
/// extends the system dimension. Fully reproducible from `seed`.
pub fn simulate_two_scale(
    model: &DemographicModel,
    initial: &[f64],
    t_end: f64,
    seed: u64,
    opts: &TwoScaleOptions,
) -> Result<TwoScaleRun, OdeError> {
    if !(model.scales.sigma > 0.0) {
        return Err(OdeError::InvalidArgument(
            "sigma must be > 0 for two-scale runs".into(),
        ));
    }
    if !(model.scales.rho > 0.0) {
        return Err(OdeError::InvalidArgument(
            "rho must be > 0 for two-scale runs".into(),
        ));
    }
    if !(t_end >= 0.0) {
        return Err(OdeError::InvalidArgument("t_end must be >= 0".into()));
    }
    if initial.len() != model.traits.len() {
        return Err(OdeError::InvalidArgument(format!(
            "initial has {} entries, model has {} traits",
            initial.len(),
            model.traits.len()
        )));
    }
    if initial.iter().any(|v| *v < 0.0) || !initial.iter().any(|v| *v > 0.0) {
        return Err(OdeError::InvalidArgument(
            "initial densities must be nonnegative with at least one positive".into(),
        ));
    }
    // Tabular tables cannot be evaluated at freshly created traits, so a
    // tabular run must stop at its first insertion (or never mutate).
    if !model.is_parametric() {
        let mu_max = rate_bound(model, |p| &p.mu, |tab| &tab.mu)?;
        if mu_max > 0.0 && opts.max_events != Some(1) {
            return Err(OdeError::Model(ModelError::UnsupportedExtension));
        }
    }

    let mut rng = SimRng::seed_from_u64(seed);
    let sigma = model.scales.sigma;
    let rho = model.scales.rho;
    let t_end_nat = t_end / sigma;

    let fit = compute_fitness(model)?;
    let seq = fit.sequence();
    let y: Vec<f64> = seq
        .ordered_ids()
        .iter()
        .map(|id| initial[*id as usize])
        .collect();

    let mut eng = Engine {
        model,
        opts: *opts,
        roster: model.traits.clone(),
        seq,
        y,
        params: SystemParams::build(model, &model.traits, &fit.sequence())?,
        mu_by_rank: Vec::new(),
        mu_max: rate_bound(model, |p| &p.mu, |tab| &tab.mu)?,
        growth_max: growth_bound(model)?,
    };
    eng.rebuild()?;

    let mut segments: Vec<TwoScaleSegment> = Vec::new();
    let mut events: Vec<MutationEvent> = Vec::new();
    let mut traj = Trajectory::new(eng.seq.ordered_ids().to_vec());
    traj.push(0.0, &eng.y);
    let mut last = (0.0, eng.y.clone());

    let mut t = 0.0;
    let mut suppress_until = 0.0;

    'outer: while t < t_end_nat {
        let window = (0.5 / eng.growth_max.max(0.25)).min(t_end_nat - t);
        let mass: f64 = eng.y.iter().sum();
        let majorant = sigma * eng.mu_max * mass * (eng.growth_max * window).exp();
        let window_end = t + window;

        if majorant <= 0.0 {
            eng.advance(t, window_end, &mut traj, &mut last)?;
            t = window_end;
            continue;
        }

        while t < window_end {
            let wait = -rng.random::<f64>().max(f64::MIN_POSITIVE).ln() / majorant;
            let t_prop = t + wait;
            if t_prop >= window_end {
                eng.advance(t, window_end, &mut traj, &mut last)?;
                t = window_end;
                break;
            }
            eng.advance(t, t_prop, &mut traj, &mut last)?;
            t = t_prop;
            if t < suppress_until {
                continue;
            }
            let rate = eng.event_rate();
            if rng.random::<f64>() * majorant >= rate {
                continue;
            }

            // --- mutation event ---
            let parent_rank = sample_parent(&eng, &mut rng);
            let parent = eng.roster[eng.seq.ordered_ids()[parent_rank] as usize].clone();
            let event_index = (events.len() + 1) as u32;
            let new_id = eng.roster.len() as TraitId;
            let mut resamples = 0u32;
            let (mutant, offset, rank) = loop {
                let offset = model.sample_offset(&parent, &mut rng)?;
                let value: Vec<f64> =
                    parent.value.iter().zip(&offset).map(|(p, h)| p + h).collect();
                let candidate = TraitRecord {
                    id: new_id,
                    value,
                    parent_id: Some(parent.id),
                    birth_event: event_index,
                };
                match find_rank(model, &eng.roster, &eng.seq, &candidate) {
                    Ok(rank) => break (candidate, offset, rank),
                    Err(err @ ModelError::AmbiguousRank(_)) => {
                        if model.options.rank_policy == RankPolicy::Resample
                            && resamples < model.options.max_rank_retries
                        {
                            resamples += 1;
                        } else {
                            return Err(err.into());
                        }
                    }
                    Err(err) => return Err(err.into()),
                }
            };

            if eng.opts.record == RecordMode::Endpoints && last.0 > 0.0 {
                traj.push(last.0, &last.1);
            }
            segments.push(TwoScaleSegment {
                seq: eng.seq.clone(),
                trajectory: std::mem::replace(
                    &mut traj,
                    Trajectory::new(Vec::new()), // placeholder, re-created below
                ),
            });

            events.push(MutationEvent {
                index: event_index,
                time: t,
                mutation_time: t * sigma,
                parent_id: parent.id,
                new_id,
                value: mutant.value.clone(),
                offset,
                rank,
                resamples,
            });
            eng.roster.push(mutant);
            eng.seq = eng.seq.insert_at(rank, new_id);
            eng.y.insert(rank, rho);
            suppress_until = t + eng.opts.min_event_gap;

            if opts
                .max_events
                .is_some_and(|cap| events.len() as u32 >= cap)
            {
                traj = Trajectory::new(eng.seq.ordered_ids().to_vec());
                traj.push(t, &eng.y);
                break 'outer;
            }
            // continuing past the event requires rate tables at the mutant
            if !model.is_parametric() {
                return Err(OdeError::Model(ModelError::UnsupportedExtension));
            }
            eng.rebuild()?;
            traj = Trajectory::new(eng.seq.ordered_ids().to_vec());
            traj.push(t, &eng.y);
            last = (t, eng.y.clone());
            break; // majorant is stale after the insertion
        }
    }

    if eng.opts.record == RecordMode::Endpoints && last.0 > traj.final_time() {
        traj.push(last.0, &last.1);
    }
    let final_state = eng.y.clone();
    segments.push(TwoScaleSegment {
        seq: eng.seq.clone(),
        trajectory: traj,
    });

    Ok(TwoScaleRun {
        segments,
        events,
        roster: eng.roster,
        final_seq: eng.seq,
        final_state,
        seed,
    })
}

fn sample_parent(eng: &Engine, rng: &mut SimRng) -> usize {
    let weights: Vec<f64> = eng
        .y
        .iter()
        .zip(&eng.mu_by_rank)
        .map(|(y, mu)| y * mu)
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

fn rate_bound(
    model: &DemographicModel,
    param: impl Fn(&crate::model::ParametricRates) -> &crate::model::ScalarFamily,
    table: impl Fn(&crate::model::TabularRates) -> &Vec<f64>,
) -> Result<f64, ModelError> {
    Ok(match &model.rates {
        Rates::Tabular(tab) => table(tab).iter().cloned().fold(0.0, f64::max),
        Rates::Parametric(p) => corners_max(model, |x| param(p).eval(x)),
    })
}

fn growth_bound(model: &DemographicModel) -> Result<f64, ModelError> {
    Ok(match &model.rates {
        Rates::Tabular(tab) => tab
            .b
            .iter()
            .zip(&tab.d)
            .map(|(b, d)| b - d)
            .fold(0.0, f64::max),
        Rates::Parametric(p) => corners_max(model, |x| p.b.eval(x) - p.d.eval(x)),
    })
}

fn corners_max(model: &DemographicModel, f: impl Fn(&[f64]) -> f64) -> f64 {
    let dim = model.space.dim();
    (0..(1usize << dim))
        .map(|mask| {
            let corner: Vec<f64> = (0..dim)
                .map(|k| {
                    if mask >> k & 1 == 0 {
                        model.space.lower[k]
                    } else {
                        model.space.upper[k]
                    }
                })
                .collect();
            f(&corner)
        })
        .fold(0.0, f64::max)
}

impl SystemParams {
    pub(crate) fn max_consecutive_fitness(&self) -> f64 {
        let n = self.growth.len();
        let xibar = |i: usize| self.growth[i] / self.alpha_self[i];
        let mut max = 0.0f64;
        for i in 0..n.saturating_sub(1) {
            let up = self.growth[i + 1] - self.alpha_dn[i] * xibar(i);
            let down = self.growth[i] - self.alpha_up[i] * xibar(i + 1);
            max = max.max(up.abs()).max(down.abs());
        }
        max
    }
}
