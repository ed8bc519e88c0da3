//! Simulation and verification suite for trait substitution dynamics on two
//! time scales.
//!
//! Three layers of the same evolutionary system, with cross-validation
//! between them:
//!
//! * [`ode`] — the deterministic finite-trait Lotka-Volterra system with
//!   nearest-neighbor competition and slow migration at rate `epsilon`,
//!   integrated with an adaptive embedded Runge-Kutta pair and level-crossing
//!   event detection.
//! * [`timescale`] — the analytic slow-migration limit on the `ln(1/epsilon)`
//!   clock: a piecewise-constant profile of atomic configurations with exact
//!   switch times, plus machinery that measures how fast rescaled ODE
//!   trajectories converge to it.
//! * [`jump`] — the rare-mutation limit on the mutation clock: a Markov jump
//!   process on fitness-ordered trait sequences in which every second trait
//!   below the fittest carries mass, mutants insert by fitness rank, and
//!   collapsed traits may recover. Genealogies are recorded and exportable
//!   as Newick trees.
//!
//! [`model`] holds the shared demographic parameterization (birth, death,
//! competition, migration, mutation kernels) with validators for every
//! structural assumption the limit results need. [`stability`] classifies the
//! dimorphic Lotka-Volterra equilibria that drive each invasion step.

pub mod config;
pub mod export;
pub mod fixtures;
pub mod jump;
pub mod model;
pub mod ode;
pub mod rng;
pub mod stability;
pub mod stats;
pub mod timescale;

pub use model::{DemographicModel, FitnessReport, OrderedTraitSequence, TraitId, TraitRecord};
