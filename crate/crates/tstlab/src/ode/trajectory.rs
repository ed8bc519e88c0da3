use crate::model::TraitId;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    Up,
    Down,
}

/// A level crossing of one trait's density, located by linear interpolation
/// between saved integrator steps.
#[derive(Debug, Clone, Serialize)]
pub struct CrossingEvent {
    pub time: f64,
    pub trait_id: TraitId,
    pub kind: CrossingKind,
    pub level: f64,
}

/// Time series of per-trait densities. Column `c` of `states` belongs to
/// `trait_ids[c]`; columns are stored in fitness-rank order.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub trait_ids: Vec<TraitId>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub events: Vec<CrossingEvent>,
}

impl Trajectory {
    pub fn new(trait_ids: Vec<TraitId>) -> Self {
        Trajectory {
            trait_ids,
            times: Vec::new(),
            states: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, state: &[f64]) {
        debug_assert_eq!(state.len(), self.trait_ids.len());
        self.times.push(t);
        self.states.push(state.to_vec());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("empty trajectory")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("empty trajectory")
    }

    pub fn column(&self, trait_id: TraitId) -> Option<usize> {
        self.trait_ids.iter().position(|id| *id == trait_id)
    }

    /// Linear interpolation between saved steps; clamped at the ends.
    pub fn state_at(&self, t: f64) -> Vec<f64> {
        match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => self.states[i].clone(),
            Err(0) => self.states[0].clone(),
            Err(i) if i >= self.len() => self.final_state().to_vec(),
            Err(i) => {
                let (t0, t1) = (self.times[i - 1], self.times[i]);
                let w = (t - t0) / (t1 - t0);
                self.states[i - 1]
                    .iter()
                    .zip(&self.states[i])
                    .map(|(a, b)| a + w * (b - a))
                    .collect()
            }
        }
    }
}

/// Finds every sign-definite crossing of `level` per trait, with linear
/// interpolation between saved steps. Events are returned in time order.
pub fn detect_crossings(traj: &Trajectory, level: f64) -> Vec<CrossingEvent> {
    let mut events = Vec::new();
    for (col, trait_id) in traj.trait_ids.iter().enumerate() {
        for w in 1..traj.len() {
            let prev = traj.states[w - 1][col];
            let next = traj.states[w][col];
            let kind = if prev < level && next >= level {
                CrossingKind::Up
            } else if prev >= level && next < level {
                CrossingKind::Down
            } else {
                continue;
            };
            let frac = (level - prev) / (next - prev);
            events.push(CrossingEvent {
                time: traj.times[w - 1] + frac * (traj.times[w] - traj.times[w - 1]),
                trait_id: *trait_id,
                kind,
                level,
            });
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    events
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic_traj(r: f64, y0: f64, t_end: f64, dt: f64) -> Trajectory {
        let mut traj = Trajectory::new(vec![0]);
        let mut t = 0.0;
        while t <= t_end {
            let y = 1.0 / (1.0 + (1.0 / y0 - 1.0) * (-r * t).exp());
            traj.push(t, &[y]);
            t += dt;
        }
        traj
    }

    #[test]
    fn logistic_crossing_matches_closed_form() {
        // from 0.01, level 0.5 is crossed at ln(99)/r
        let r = 1.3;
        let traj = logistic_traj(r, 0.01, 10.0, 1e-3);
        let events = detect_crossings(&traj, 0.5);
        assert_eq!(events.len(), 1);
        assert!(matches!(events[0].kind, CrossingKind::Up));
        assert!((events[0].time - 99.0f64.ln() / r).abs() < 1e-5);
    }

    #[test]
    fn constant_trajectory_has_no_events() {
        let mut traj = Trajectory::new(vec![0]);
        for i in 0..100 {
            traj.push(i as f64, &[2.0]);
        }
        assert!(detect_crossings(&traj, 0.5).is_empty());
    }

    #[test]
    fn crossing_is_grid_insensitive() {
        let fine = logistic_traj(1.0, 0.01, 10.0, 1e-4);
        let coarse = logistic_traj(1.0, 0.01, 10.0, 5e-2);
        let t_fine = detect_crossings(&fine, 0.5)[0].time;
        let t_coarse = detect_crossings(&coarse, 0.5)[0].time;
        assert!((t_fine - t_coarse).abs() < 1e-3);
    }

    #[test]
    fn interpolation_brackets() {
        let mut traj = Trajectory::new(vec![0, 1]);
        traj.push(0.0, &[0.0, 1.0]);
        traj.push(2.0, &[2.0, 3.0]);
        assert_eq!(traj.state_at(1.0), vec![1.0, 2.0]);
        assert_eq!(traj.state_at(-1.0), vec![0.0, 1.0]);
        assert_eq!(traj.state_at(5.0), vec![2.0, 3.0]);
    }
}
