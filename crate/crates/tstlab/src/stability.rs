//! Fixed points and linear stability of the dimorphic Lotka-Volterra
//! system, with a brute-force basin-of-attraction check.

use crate::model::{DemographicModel, ModelError, TraitRecord};
use crate::ode::{integrate_adaptive, OdeError, StepperOptions};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("competition kernel is degenerate: alpha(x,x)alpha(y,y) - alpha(x,y)alpha(y,x) = 0")]
    DegenerateKernel,
    #[error("expected exactly one stable equilibrium, found {0}")]
    NoUniqueStablePoint(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Two traits with their rates and the 2x2 competition kernel.
#[derive(Debug, Clone, Serialize)]
pub struct DimorphicSystem {
    pub b: [f64; 2],
    pub d: [f64; 2],
    pub alpha: [[f64; 2]; 2],
}

impl DimorphicSystem {
    pub fn new(b: [f64; 2], d: [f64; 2], alpha: [[f64; 2]; 2]) -> Self {
        assert!(alpha[0][0] > 0.0 && alpha[1][1] > 0.0, "self-competition must be positive");
        DimorphicSystem { b, d, alpha }
    }

    /// Restriction of a model to an ordered pair of its traits.
    pub fn from_model_pair(
        model: &DemographicModel,
        x: &TraitRecord,
        y: &TraitRecord,
    ) -> Result<Self, ModelError> {
        Ok(DimorphicSystem::new(
            [model.birth(x)?, model.birth(y)?],
            [model.death(x)?, model.death(y)?],
            [
                [model.alpha(x, x)?, model.alpha(x, y)?],
                [model.alpha(y, x)?, model.alpha(y, y)?],
            ],
        ))
    }

    pub fn growth(&self, i: usize) -> f64 {
        self.b[i] - self.d[i]
    }

    pub fn xibar(&self, i: usize) -> f64 {
        self.growth(i) / self.alpha[i][i]
    }

    /// Invasion fitness of trait `i` against resident `j` at equilibrium.
    pub fn fitness(&self, i: usize, j: usize) -> f64 {
        self.growth(i) - self.alpha[i][j] * self.xibar(j)
    }

    fn rhs(&self, n: &[f64], dn: &mut [f64]) {
        dn[0] = (self.growth(0) - self.alpha[0][0] * n[0] - self.alpha[0][1] * n[1]) * n[0];
        dn[1] = (self.growth(1) - self.alpha[1][0] * n[0] - self.alpha[1][1] * n[1]) * n[1];
    }

    fn jacobian(&self, n: [f64; 2]) -> [[f64; 2]; 2] {
        [
            [
                self.growth(0) - 2.0 * self.alpha[0][0] * n[0] - self.alpha[0][1] * n[1],
                -self.alpha[0][1] * n[0],
            ],
            [
                -self.alpha[1][0] * n[1],
                self.growth(1) - self.alpha[1][0] * n[0] - 2.0 * self.alpha[1][1] * n[1],
            ],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Origin,
    OnlyFirst,
    OnlySecond,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Stable,
    Unstable,
    Saddle,
    NonHyperbolic,
    /// Interior solve landed outside the (strictly) positive quadrant.
    NonAdmissible,
}

#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub point: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    /// Eigenvalues as (re, im) pairs.
    pub eigenvalues: [(f64, f64); 2],
    pub class: Classification,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub equilibria: Vec<Equilibrium>,
}

impl EquilibriumReport {
    pub fn stable(&self) -> Vec<&Equilibrium> {
        self.equilibria
            .iter()
            .filter(|e| e.class == Classification::Stable)
            .collect()
    }
}

const HYPERBOLICITY_TOL: f64 = 1e-10;
const ADMISSIBILITY_TOL: f64 = 1e-12;

fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> [(f64, f64); 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [(tr / 2.0 + s, 0.0), (tr / 2.0 - s, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [(tr / 2.0, s), (tr / 2.0, -s)]
    }
}

fn classify_point(sys: &DimorphicSystem, kind: EquilibriumKind, point: [f64; 2]) -> Equilibrium {
    let jacobian = sys.jacobian(point);
    let eigenvalues = eigenvalues_2x2(jacobian);
    let res = eigenvalues.map(|(re, _)| re);
    let class = if res.iter().any(|re| re.abs() < HYPERBOLICITY_TOL) {
        Classification::NonHyperbolic
    } else if res.iter().all(|re| *re < 0.0) {
        Classification::Stable
    } else if res.iter().all(|re| *re > 0.0) {
        Classification::Unstable
    } else {
        Classification::Saddle
    };
    Equilibrium {
        kind,
        point,
        jacobian,
        eigenvalues,
        class,
    }
}

/// Computes the four candidate fixed points (interior via the 2x2 linear
/// solve), their Jacobian eigenvalues, and sign-based classifications.
pub fn classify_equilibria(sys: &DimorphicSystem) -> Result<EquilibriumReport, StabilityError> {
    let a = &sys.alpha;
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 {
        return Err(StabilityError::DegenerateKernel);
    }
    let mut equilibria = vec![
        classify_point(sys, EquilibriumKind::Origin, [0.0, 0.0]),
        classify_point(sys, EquilibriumKind::OnlyFirst, [sys.xibar(0), 0.0]),
        classify_point(sys, EquilibriumKind::OnlySecond, [0.0, sys.xibar(1)]),
    ];
    // interior solve: alpha * n = growth
    let interior = [
        (a[1][1] * sys.growth(0) - a[0][1] * sys.growth(1)) / det,
        (a[0][0] * sys.growth(1) - a[1][0] * sys.growth(0)) / det,
    ];
    let mut eq = classify_point(sys, EquilibriumKind::Interior, interior);
    if interior.iter().any(|n| *n <= ADMISSIBILITY_TOL) {
        eq.class = Classification::NonAdmissible;
    }
    equilibria.push(eq);
    Ok(EquilibriumReport { equilibria })
}

/// Integrates the migration-free dimorphic system from a `grid x grid`
/// lattice of strictly positive initial conditions and returns the fraction
/// that converges (within `1e-4`) to the unique stable point.
pub fn basin_check(sys: &DimorphicSystem, grid: u32, t_end: f64) -> Result<f64, StabilityError> {
    let report = classify_equilibria(sys)?;
    let stable = report.stable();
    if stable.len() != 1 {
        return Err(StabilityError::NoUniqueStablePoint(stable.len()));
    }
    let target = stable[0].point;
    let span = [1.5 * sys.xibar(0), 1.5 * sys.xibar(1)];
    let opts = StepperOptions {
        rtol: 1e-8,
        atol: 1e-12,
        max_step: 0.5,
        mass_cap: 1e9,
    };
    let converged: u32 = (0..grid * grid)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / grid, idx % grid);
            let start = [
                span[0] * (i + 1) as f64 / grid as f64,
                span[1] * (j + 1) as f64 / grid as f64,
            ];
            let mut y = start.to_vec();
            let mut t = 0.0;
            // integrate in slabs, stopping early once inside the target ball
            while t < t_end {
                let slab = (t_end - t).min(10.0);
                let res = integrate_adaptive(
                    |_, n, dn| sys.rhs(n, dn),
                    t,
                    &y,
                    t + slab,
                    &opts,
                    |_, _| {},
                );
                match res {
                    Ok((end, _)) => y = end,
                    Err(_) => return 0u32,
                }
                t += slab;
                let dist =
                    ((y[0] - target[0]).powi(2) + (y[1] - target[1]).powi(2)).sqrt();
                if dist < 1e-4 {
                    return 1u32;
                }
            }
            0u32
        })
        .sum();
    Ok(f64::from(converged) / f64::from(grid * grid))
}

/// Random dimorphic systems satisfying the sign condition
/// `f(x, y) < 0 < f(y, x)` (the second trait invades, the first cannot).
pub fn sample_sign_condition_pair(rng: &mut impl Rng) -> DimorphicSystem {
    loop {
        let b = [1.0 + 2.0 * rng.random::<f64>(), 1.0 + 2.0 * rng.random::<f64>()];
        let d = [
            b[0] * (0.2 + 0.5 * rng.random::<f64>()),
            b[1] * (0.2 + 0.5 * rng.random::<f64>()),
        ];
        let alpha = [
            [0.5 + rng.random::<f64>(), 0.2 + rng.random::<f64>()],
            [0.2 + rng.random::<f64>(), 0.5 + rng.random::<f64>()],
        ];
        let sys = DimorphicSystem::new(b, d, alpha);
        if sys.fitness(0, 1) < -1e-3 && sys.fitness(1, 0) > 1e-3 {
            return sys;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn canonical_pair() -> DimorphicSystem {
        let model = fixtures::canonical_three_trait();
        DimorphicSystem::from_model_pair(&model, &model.traits[0], &model.traits[1]).unwrap()
    }

    #[test]
    fn canonical_pair_classification() {
        // f(1,0) = 1.5 > 0, f(0,1) = -0.5 < 0: only (0, xibar_1) is stable
        let sys = canonical_pair();
        let report = classify_equilibria(&sys).unwrap();
        let by_kind = |k: EquilibriumKind| {
            report
                .equilibria
                .iter()
                .find(|e| e.kind == k)
                .unwrap()
                .clone()
        };
        let origin = by_kind(EquilibriumKind::Origin);
        assert_eq!(origin.class, Classification::Unstable);
        // triangular Jacobian: eigenvalues are exactly the growth rates
        assert_eq!(origin.eigenvalues[0].0.max(origin.eigenvalues[1].0), 2.0);
        assert_eq!(origin.eigenvalues[0].0.min(origin.eigenvalues[1].0), 1.0);

        let first = by_kind(EquilibriumKind::OnlyFirst);
        assert_eq!(first.point, [1.0, 0.0]);
        assert_eq!(first.class, Classification::Saddle);
        let eigs = [first.eigenvalues[0].0, first.eigenvalues[1].0];
        assert!(eigs.contains(&-1.0) && eigs.contains(&1.5));

        let second = by_kind(EquilibriumKind::OnlySecond);
        assert_eq!(second.point, [0.0, 2.0]);
        assert_eq!(second.class, Classification::Stable);
        let eigs = [second.eigenvalues[0].0, second.eigenvalues[1].0];
        assert!(eigs.contains(&-0.5) && eigs.contains(&-2.0));

        let interior = by_kind(EquilibriumKind::Interior);
        assert_eq!(interior.class, Classification::NonAdmissible);
    }

    #[test]
    fn neutral_pair_is_degenerate() {
        let model = fixtures::neutral_pair();
        let sys =
            DimorphicSystem::from_model_pair(&model, &model.traits[0], &model.traits[1]).unwrap();
        assert!(matches!(
            classify_equilibria(&sys).unwrap_err(),
            StabilityError::DegenerateKernel
        ));
    }

    #[test]
    fn weak_competition_admits_interior_point() {
        let sys = DimorphicSystem::new(
            [2.0, 2.0],
            [1.0, 1.0],
            [[1.0, 0.5], [0.5, 1.0]],
        );
        let report = classify_equilibria(&sys).unwrap();
        let interior = report
            .equilibria
            .iter()
            .find(|e| e.kind == EquilibriumKind::Interior)
            .unwrap();
        assert!((interior.point[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((interior.point[1] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(interior.class, Classification::Stable);
    }

    #[test]
    fn basin_of_canonical_pair_is_full() {
        let ratio = basin_check(&canonical_pair(), 10, 200.0).unwrap();
        assert_eq!(ratio, 1.0);
    }

    #[test]
    fn reversed_pair_attracts_to_first_axis() {
        // swap roles: now trait 0 is the fitter one
        let model = fixtures::canonical_three_trait();
        let sys =
            DimorphicSystem::from_model_pair(&model, &model.traits[1], &model.traits[0]).unwrap();
        let report = classify_equilibria(&sys).unwrap();
        let stable = report.stable();
        assert_eq!(stable.len(), 1);
        assert_eq!(stable[0].kind, EquilibriumKind::OnlyFirst);
        assert_eq!(stable[0].point, [2.0, 0.0]);
        let ratio = basin_check(&sys, 10, 200.0).unwrap();
        assert_eq!(ratio, 1.0);
    }
}
