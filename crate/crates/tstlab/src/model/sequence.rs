use super::{DemographicModel, ModelError, TraitId, TraitRecord};
use serde::{Deserialize, Serialize};

/// Fitness-ordered trait sequence with parity occupancy.
///
/// Rank 0 is the least fit trait, rank `n` the fittest. Occupancy follows
/// alternation-from-top: the fittest rank always carries mass and occupancy
/// alternates going down, so rank `i` is occupied iff `n - i` is even.
/// Relabeling after an insertion is a pure view change; trait ids are never
/// rewritten, which keeps genealogies intact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedTraitSequence {
    ordered_ids: Vec<TraitId>,
}

impl OrderedTraitSequence {
    pub fn new(ordered_ids: Vec<TraitId>) -> Self {
        OrderedTraitSequence { ordered_ids }
    }

    pub fn single(id: TraitId) -> Self {
        OrderedTraitSequence {
            ordered_ids: vec![id],
        }
    }

    pub fn len(&self) -> usize {
        self.ordered_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered_ids.is_empty()
    }

    pub fn ordered_ids(&self) -> &[TraitId] {
        &self.ordered_ids
    }

    pub fn is_occupied(&self, rank: usize) -> bool {
        (self.len() - 1 - rank) % 2 == 0
    }

    pub fn occupied_ids(&self) -> impl Iterator<Item = TraitId> + '_ {
        self.ordered_ids
            .iter()
            .enumerate()
            .filter(|(rank, _)| self.is_occupied(*rank))
            .map(|(_, id)| *id)
    }

    pub fn rank_of(&self, id: TraitId) -> Option<usize> {
        self.ordered_ids.iter().position(|x| *x == id)
    }

    /// Inserts `id` at `rank`, shifting everything at or above it up by one.
    /// The relative order of pre-existing traits is untouched; occupancy is
    /// recomputed by the parity rule.
    pub fn insert_at(&self, rank: usize, id: TraitId) -> Self {
        assert!(rank <= self.len(), "rank {rank} out of range");
        let mut ids = Vec::with_capacity(self.len() + 1);
        ids.extend_from_slice(&self.ordered_ids[..rank]);
        ids.push(id);
        ids.extend_from_slice(&self.ordered_ids[rank..]);
        OrderedTraitSequence { ordered_ids: ids }
    }
}

/// Ranks the mutant by pairwise fitness against the whole roster and inserts
/// it. Returns the relabeled sequence and the insertion rank.
pub fn insert_and_relabel(
    model: &DemographicModel,
    roster: &[TraitRecord],
    seq: &OrderedTraitSequence,
    mutant: &TraitRecord,
) -> Result<(OrderedTraitSequence, usize), ModelError> {
    let rank = super::fitness::find_rank(model, roster, seq, mutant)?;
    Ok((seq.insert_at(rank, mutant.id), rank))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternation_from_top() {
        // n = 3 (four traits): occupied ranks are the odd ones
        let seq = OrderedTraitSequence::new(vec![10, 11, 12, 13]);
        assert_eq!(
            (0..4).map(|r| seq.is_occupied(r)).collect::<Vec<_>>(),
            vec![false, true, false, true]
        );
        // n = 2: occupied ranks are the even ones
        let seq = OrderedTraitSequence::new(vec![5, 6, 7]);
        assert_eq!(
            (0..3).map(|r| seq.is_occupied(r)).collect::<Vec<_>>(),
            vec![true, false, true]
        );
    }

    #[test]
    fn insert_mid_sequence_keeps_relative_order() {
        let seq = OrderedTraitSequence::new(vec![0, 1, 2, 3]);
        let new = seq.insert_at(2, 9);
        assert_eq!(new.ordered_ids(), &[0, 1, 9, 2, 3]);
        assert_eq!(
            new.occupied_ids().collect::<Vec<_>>(),
            vec![0, 9, 3],
            "occupancy recomputed by alternation"
        );
        let old_order: Vec<_> = new
            .ordered_ids()
            .iter()
            .copied()
            .filter(|id| *id != 9)
            .collect();
        assert_eq!(old_order, seq.ordered_ids());
    }

    #[test]
    fn spec_case_mutant_below_unoccupied() {
        // order [x0, x1, x2] occupied {x0, x2}; mutant between x0 and x1
        let seq = OrderedTraitSequence::new(vec![0, 1, 2]);
        let new = seq.insert_at(1, 3);
        assert_eq!(new.ordered_ids(), &[0, 3, 1, 2]);
        assert_eq!(new.occupied_ids().collect::<Vec<_>>(), vec![3, 2]);
    }

    #[test]
    fn singleton_grows_upward() {
        let seq = OrderedTraitSequence::single(0);
        assert!(seq.is_occupied(0));
        let new = seq.insert_at(1, 1);
        assert_eq!(new.ordered_ids(), &[0, 1]);
        assert_eq!(new.occupied_ids().collect::<Vec<_>>(), vec![1]);
    }
}
