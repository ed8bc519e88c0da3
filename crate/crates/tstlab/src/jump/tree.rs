//! Genealogy export: Newick strings and a JSON adjacency document with
//! per-node occupancy history.
//!
//! Newick convention: every node is labelled `x<id>` and carries, in its own
//! length slot, the time from its birth to the birth of its first child
//! (for children-less nodes: to the end of the recorded path). A path with
//! no jumps renders as the bare root label. Children are listed in birth
//! order. Multiple ancestors are joined under an unlabelled virtual root.

use super::TstPath;
use crate::model::TraitId;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Serialize)]
pub struct OccupancyToggle {
    pub time: f64,
    pub occupied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeNode {
    pub id: TraitId,
    pub value: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<TraitId>,
    pub birth_event: u32,
    pub birth_time: f64,
    pub children: Vec<TraitId>,
    /// Occupancy changes over the path, starting with the state at birth.
    pub occupancy: Vec<OccupancyToggle>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeExport {
    pub newick: String,
    pub end_time: f64,
    pub nodes: Vec<TreeNode>,
}

/// Renders the recorded genealogy.
pub fn export_tree(path: &TstPath) -> TreeExport {
    let n = path.roster.len();
    let mut birth_time = vec![0.0f64; n];
    let mut children: Vec<Vec<TraitId>> = vec![Vec::new(); n];
    for event in &path.events {
        birth_time[event.mutant_id as usize] = event.clock;
        children[event.parent_id as usize].push(event.mutant_id);
    }

    let mut occupancy: Vec<Vec<OccupancyToggle>> = vec![Vec::new(); n];
    let mut current: Vec<Option<bool>> = vec![None; n];
    for state in path.states() {
        let mut occupied = vec![false; n];
        for id in state.seq.occupied_ids() {
            occupied[id as usize] = true;
        }
        for rank in 0..state.seq.len() {
            let id = state.seq.ordered_ids()[rank] as usize;
            if current[id] != Some(occupied[id]) {
                current[id] = Some(occupied[id]);
                occupancy[id].push(OccupancyToggle {
                    time: state.clock,
                    occupied: occupied[id],
                });
            }
        }
    }

    let length = |id: usize| -> f64 {
        let first_child = children[id].first().map(|c| birth_time[*c as usize]);
        first_child.unwrap_or(path.end_clock) - birth_time[id]
    };

    let roots: Vec<TraitId> = path
        .roster
        .iter()
        .filter(|t| t.parent_id.is_none())
        .map(|t| t.id)
        .collect();
    let with_lengths = !path.events.is_empty();
    let rendered: Vec<String> = roots
        .iter()
        .map(|root| render_subtree(*root, &children, length, with_lengths))
        .collect();
    let newick = if rendered.len() == 1 {
        format!("{};", rendered[0])
    } else {
        format!("({});", rendered.join(","))
    };

    let nodes = path
        .roster
        .iter()
        .map(|t| TreeNode {
            id: t.id,
            value: t.value.clone(),
            parent_id: t.parent_id,
            birth_event: t.birth_event,
            birth_time: birth_time[t.id as usize],
            children: children[t.id as usize].clone(),
            occupancy: std::mem::take(&mut occupancy[t.id as usize]),
        })
        .collect();

    TreeExport {
        newick,
        end_time: path.end_clock,
        nodes,
    }
}

fn render_subtree(
    root: TraitId,
    children: &[Vec<TraitId>],
    length: impl Fn(usize) -> f64,
    with_lengths: bool,
) -> String {
    enum Frame {
        Enter(TraitId),
        Exit(TraitId),
    }
    let mut fragments: HashMap<TraitId, String> = HashMap::new();
    let mut stack = vec![Frame::Enter(root)];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(id) => {
                stack.push(Frame::Exit(id));
                for child in children[id as usize].iter().rev() {
                    stack.push(Frame::Enter(*child));
                }
            }
            Frame::Exit(id) => {
                let kids = &children[id as usize];
                let mut s = if kids.is_empty() {
                    String::new()
                } else {
                    let parts: Vec<String> = kids
                        .iter()
                        .map(|c| fragments.remove(c).expect("child rendered first"))
                        .collect();
                    format!("({})", parts.join(","))
                };
                s.push_str(&format!("x{id}"));
                if with_lengths {
                    s.push_str(&format!(":{:?}", length(id as usize)));
                }
                fragments.insert(id, s);
            }
        }
    }
    fragments.remove(&root).expect("root rendered")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump::{JumpCase, JumpEvent};
    use crate::model::{OrderedTraitSequence, TraitRecord};

    fn one_jump_path() -> TstPath {
        TstPath {
            initial_seq: OrderedTraitSequence::single(0),
            roster: vec![
                TraitRecord::ancestor(0, vec![0.0]),
                TraitRecord {
                    id: 1,
                    value: vec![0.4],
                    parent_id: Some(0),
                    birth_event: 1,
                },
            ],
            events: vec![JumpEvent {
                index: 1,
                wait: 0.7,
                clock: 0.7,
                beta: 1.0,
                parent_id: 0,
                mutant_id: 1,
                offset: vec![0.4],
                rank: 1,
                case: JumpCase::Establish,
                resamples: 0,
            }],
            end_clock: 0.7,
            absorbed: false,
            seed: 0,
        }
    }

    #[test]
    fn single_jump_newick() {
        let export = export_tree(&one_jump_path());
        assert_eq!(export.newick, "(x1:0.0)x0:0.7;");
    }

    #[test]
    fn empty_path_newick() {
        let path = TstPath {
            initial_seq: OrderedTraitSequence::single(0),
            roster: vec![TraitRecord::ancestor(0, vec![0.0])],
            events: vec![],
            end_clock: 3.0,
            absorbed: false,
            seed: 0,
        };
        assert_eq!(export_tree(&path).newick, "x0;");
    }

    #[test]
    fn occupancy_history_records_the_flip() {
        let export = export_tree(&one_jump_path());
        let root = &export.nodes[0];
        assert_eq!(root.children, vec![1]);
        // x0 starts occupied, loses its mass when the fitter mutant lands
        assert_eq!(root.occupancy.len(), 2);
        assert!(root.occupancy[0].occupied && root.occupancy[0].time == 0.0);
        assert!(!root.occupancy[1].occupied && root.occupancy[1].time == 0.7);
        let mutant = &export.nodes[1];
        assert_eq!(mutant.occupancy.len(), 1);
        assert!(mutant.occupancy[0].occupied);
    }
}
