//! The trait substitution tree jump process on the mutation time scale.
//!
//! States are fitness-ordered trait sequences with alternation-from-top
//! occupancy; occupied traits sit at their equilibrium mass. A jump waits an
//! exponential time with rate `sum_occupied xibar(x) mu(x)`, picks a parent
//! proportionally to its contribution, draws a mutant offset, and inserts
//! the mutant at its fitness rank. Virtual traits stay in the sequence
//! forever: they shape the parity landscape and may recover later.

mod tree;

pub use tree::{export_tree, TreeExport, TreeNode};

use crate::model::{
    compute_fitness, find_rank, DemographicModel, ModelError, OrderedTraitSequence, RankPolicy,
    TraitId, TraitRecord,
};
use crate::rng::SimRng;
use rand::Rng;
use rand::SeedableRng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Jump-chain state: the ordered sequence plus the clock, in mutation time.
/// Masses are always derived from the model, never stored stale.
#[derive(Debug, Clone, Serialize)]
pub struct TstState {
    pub seq: OrderedTraitSequence,
    pub clock: f64,
}

impl TstState {
    /// Occupied traits at their equilibrium mass; virtual traits are absent
    /// (mass zero).
    pub fn masses(
        &self,
        model: &DemographicModel,
        roster: &[TraitRecord],
    ) -> Result<BTreeMap<TraitId, f64>, ModelError> {
        self.seq
            .occupied_ids()
            .map(|id| Ok((id, model.xibar(&roster[id as usize])?)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpCase {
    /// The mutant lands on an occupied rank of the new state.
    Establish,
    /// The mutant is virtual immediately after insertion; it still shifts
    /// the parity landscape below it.
    Shadow,
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpEvent {
    /// 1-based jump index; equals the mutant's `birth_event`.
    pub index: u32,
    pub wait: f64,
    pub clock: f64,
    /// Total jump rate of the state the wait was drawn from.
    pub beta: f64,
    pub parent_id: TraitId,
    pub mutant_id: TraitId,
    pub offset: Vec<f64>,
    pub rank: usize,
    pub case: JumpCase,
    pub resamples: u32,
}

/// Recorded jump chain with its genealogy. States are replayed on demand
/// rather than stored; a ten-thousand-jump path stays small.
#[derive(Debug, Clone)]
pub struct TstPath {
    pub initial_seq: OrderedTraitSequence,
    /// All traits ever created; index equals id.
    pub roster: Vec<TraitRecord>,
    pub events: Vec<JumpEvent>,
    pub end_clock: f64,
    /// True when the chain stopped because the jump rate hit zero.
    pub absorbed: bool,
    pub seed: u64,
}

impl TstPath {
    pub fn waits(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().map(|e| e.wait)
    }

    /// Replays the chain: yields the initial state and the state after each
    /// jump.
    pub fn states(&self) -> impl Iterator<Item = TstState> + '_ {
        let mut seq = self.initial_seq.clone();
        let mut clock = 0.0;
        std::iter::once(TstState {
            seq: seq.clone(),
            clock,
        })
        .chain(self.events.iter().map(move |e| {
            clock = e.clock;
            seq = seq.insert_at(e.rank, e.mutant_id);
            TstState {
                seq: seq.clone(),
                clock,
            }
        }))
    }

    pub fn final_state(&self) -> TstState {
        self.states().last().expect("at least the initial state")
    }
}

/// Total jump rate `beta = sum_occupied xibar(x) mu(x)`. Zero means the
/// state is absorbing.
pub fn jump_rate(
    model: &DemographicModel,
    roster: &[TraitRecord],
    seq: &OrderedTraitSequence,
) -> Result<f64, ModelError> {
    let mut beta = 0.0;
    for id in seq.occupied_ids() {
        let t = &roster[id as usize];
        beta += model.xibar(t)? * model.mutation_rate(t)?;
    }
    Ok(beta)
}

/// Outcome of one jump: the exponential wait, the relabeled sequence, and
/// the event record. `roster` gains the mutant.
pub fn sample_jump(
    model: &DemographicModel,
    roster: &mut Vec<TraitRecord>,
    seq: &OrderedTraitSequence,
    clock: f64,
    event_index: u32,
    rng: &mut SimRng,
) -> Result<(f64, OrderedTraitSequence, JumpEvent), ModelError> {
    let beta = jump_rate(model, roster, seq)?;
    assert!(beta > 0.0, "sample_jump requires a positive jump rate");
    let wait = -rng.random::<f64>().max(f64::MIN_POSITIVE).ln() / beta;

    // parent ~ xibar * mu over occupied traits
    let occupied: Vec<TraitId> = seq.occupied_ids().collect();
    let mut weights = Vec::with_capacity(occupied.len());
    for id in &occupied {
        let t = &roster[*id as usize];
        weights.push(model.xibar(t)? * model.mutation_rate(t)?);
    }
    let mut u = rng.random::<f64>() * beta;
    let mut parent_id = *occupied.last().expect("beta > 0 implies occupied traits");
    for (id, w) in occupied.iter().zip(&weights) {
        u -= w;
        if u <= 0.0 {
            parent_id = *id;
            break;
        }
    }
    let parent = roster[parent_id as usize].clone();

    let new_id = roster.len() as TraitId;
    let mut resamples = 0u32;
    let (mutant, offset, rank) = loop {
        let offset = model.sample_offset(&parent, rng)?;
        let value: Vec<f64> = parent.value.iter().zip(&offset).map(|(p, h)| p + h).collect();
        let candidate = TraitRecord {
            id: new_id,
            value,
            parent_id: Some(parent_id),
            birth_event: event_index,
        };
        match find_rank(model, roster, seq, &candidate) {
            Ok(rank) => break (candidate, offset, rank),
            Err(err @ ModelError::AmbiguousRank(_)) => {
                if model.options.rank_policy == RankPolicy::Resample
                    && resamples < model.options.max_rank_retries
                {
                    resamples += 1;
                } else {
                    return Err(err);
                }
            }
            Err(err) => return Err(err),
        }
    };

    let next = seq.insert_at(rank, new_id);
    let case = if next.is_occupied(rank) {
        JumpCase::Establish
    } else {
        JumpCase::Shadow
    };
    roster.push(mutant);
    Ok((
        wait,
        next,
        JumpEvent {
            index: event_index,
            wait,
            clock: clock + wait,
            beta,
            parent_id,
            mutant_id: new_id,
            offset,
            rank,
            case,
            resamples,
        },
    ))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TstOptions {
    /// Stop after this many jumps even if the clock has not reached `t_end`.
    pub max_jumps: Option<u64>,
}

/// Simulates the jump chain from the model's alternation configuration
/// (for a single ancestor: the monomorphic state) until `t_end` mutation
/// time units, absorption, or the jump cap.
pub fn simulate_tst(
    model: &DemographicModel,
    t_end: f64,
    seed: u64,
) -> Result<TstPath, ModelError> {
    simulate_tst_with(model, t_end, seed, &TstOptions::default())
}

pub fn simulate_tst_with(
    model: &DemographicModel,
    t_end: f64,
    seed: u64,
    opts: &TstOptions,
) -> Result<TstPath, ModelError> {
    let fit = compute_fitness(model)?;
    let initial_seq = fit.sequence();
    let mut roster = model.traits.clone();
    let mut seq = initial_seq.clone();
    let mut clock = 0.0;
    let mut rng = SimRng::seed_from_u64(seed);
    let mut events = Vec::new();
    let mut absorbed = false;
    let by_count = opts.max_jumps.is_some();
    let mut end_clock;

    loop {
        if opts.max_jumps.is_some_and(|cap| events.len() as u64 >= cap) {
            end_clock = clock;
            break;
        }
        let beta = jump_rate(model, &roster, &seq)?;
        if beta <= 0.0 {
            absorbed = true;
            end_clock = if t_end.is_finite() { t_end } else { clock };
            break;
        }
        if !by_count && clock >= t_end {
            end_clock = t_end;
            break;
        }
        let (wait, next, event) = sample_jump(
            model,
            &mut roster,
            &seq,
            clock,
            (events.len() + 1) as u32,
            &mut rng,
        )?;
        if !by_count && clock + wait > t_end {
            // the sampled jump falls beyond the horizon; drop the mutant
            roster.pop();
            end_clock = t_end;
            break;
        }
        clock += wait;
        seq = next;
        events.push(event);
    }

    Ok(TstPath {
        initial_seq,
        roster,
        events,
        end_clock,
        absorbed,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn jump_rate_sums_occupied_masses() {
        // xibar = (1, 2, 3), final-configuration occupancy {x0, x2}
        let model = fixtures::fig1_three_trait();
        let seq = OrderedTraitSequence::new(vec![0, 1, 2]);
        let beta = jump_rate(&model, &model.traits, &seq).unwrap();
        assert!((beta - 0.5 * (1.0 + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn jump_rate_weights_mu_per_trait() {
        let model = fixtures::canonical_with_mu([0.2, 0.3, 0.4]);
        let seq = OrderedTraitSequence::new(vec![0, 1, 2]);
        let beta = jump_rate(&model, &model.traits, &seq).unwrap();
        assert!((beta - (1.0 * 0.2 + 2.0 * 0.4)).abs() < 1e-12);
    }

    #[test]
    fn zero_mutation_rate_absorbs_immediately() {
        let model = fixtures::canonical_with_mu([0.0, 0.0, 0.0]);
        let path = simulate_tst(&model, 100.0, 7).unwrap();
        assert!(path.absorbed);
        assert!(path.events.is_empty());
        assert_eq!(path.final_state().seq, path.initial_seq);
    }

    #[test]
    fn zero_horizon_keeps_initial_state() {
        let model = fixtures::tst_jump_fixture();
        let path = simulate_tst(&model, 0.0, 7).unwrap();
        assert!(path.events.is_empty());
        assert!(!path.absorbed);
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let model = fixtures::tst_jump_fixture();
        let a = simulate_tst(&model, 5.0, 99).unwrap();
        let b = simulate_tst(&model, 5.0, 99).unwrap();
        assert_eq!(a.events.len(), b.events.len());
        for (x, y) in a.events.iter().zip(&b.events) {
            assert_eq!(x.wait.to_bits(), y.wait.to_bits());
            assert_eq!(x.offset, y.offset);
            assert_eq!(x.rank, y.rank);
        }
    }

    #[test]
    fn monotone_growth_and_order_preservation() {
        let model = fixtures::tst_jump_fixture();
        let path = simulate_tst_with(
            &model,
            f64::INFINITY,
            3,
            &TstOptions {
                max_jumps: Some(200),
            },
        )
        .unwrap();
        assert_eq!(path.events.len(), 200);
        let states: Vec<_> = path.states().collect();
        for (k, pair) in states.windows(2).enumerate() {
            assert_eq!(pair[1].seq.len(), pair[0].seq.len() + 1);
            // relative order of old ids is untouched
            let inserted = path.events[k].mutant_id;
            let filtered: Vec<TraitId> = pair[1]
                .seq
                .ordered_ids()
                .iter()
                .copied()
                .filter(|id| *id != inserted)
                .collect();
            assert_eq!(filtered, pair[0].seq.ordered_ids());
        }
    }
}
