//! Adaptive Dormand-Prince 5(4) stepper with PI-free step control, density
//! flooring, and blow-up guards.

use super::OdeError;

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    ],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct StepperOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Any component exceeding this aborts with a blow-up error.
    pub mass_cap: f64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions {
            rtol: 1e-8,
            // essentially pure relative control: exponentially small densities
            // carry timing information through their logarithm
            atol: 1e-60,
            max_step: 0.1,
            mass_cap: 1e6,
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    /// Largest negative excursion absorbed by the zero floor.
    pub max_clip: f64,
}

/// Integrates `dy/dt = f(t, y)` from `(t0, y0)` to `t_end`, invoking
/// `on_step` after every accepted step (not for the initial point).
/// `y` is floored at zero after each accepted step.
pub fn integrate_adaptive<F, S>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &StepperOptions,
    mut on_step: S,
) -> Result<(Vec<f64>, StepStats), OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]),
{
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut stats = StepStats::default();

    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    f(t, &y, &mut k[0]);
    let mut h = initial_step(t0, &y, &k[0], t_end, opts);

    while t < t_end {
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t, h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        // stages 2..=7 (k[0] holds f(t, y) via FSAL)
        for s in 0..6 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s].iter().enumerate() {
                    acc += a * k[j][i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            f(t + C[s] * h, &y_stage, &mut k[s + 1]);
        }
        // 5th-order solution is stage 7's argument
        y_new.copy_from_slice(&y_stage);

        let mut err_sq = 0.0;
        for i in 0..n {
            let e_i = h
                * (E[0] * k[0][i]
                    + E[2] * k[2][i]
                    + E[3] * k[3][i]
                    + E[4] * k[4][i]
                    + E[5] * k[5][i]
                    + E[6] * k[6][i]);
            if e_i == 0.0 {
                continue;
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e_i / sc) * (e_i / sc);
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            t += h;
            for (i, v) in y_new.iter().enumerate() {
                if !v.is_finite() || *v > opts.mass_cap {
                    return Err(OdeError::BlowUp {
                        t,
                        value: *v,
                        cap: opts.mass_cap,
                    });
                }
                if *v < 0.0 {
                    stats.max_clip = stats.max_clip.max(-v);
                    y[i] = 0.0;
                } else {
                    y[i] = *v;
                }
            }
            stats.accepted += 1;
            on_step(t, &y);
            // FSAL, re-evaluated when the floor moved anything
            if stats.max_clip > 0.0 {
                f(t, &y, &mut k[0]);
            } else {
                let (head, tail) = k.split_at_mut(1);
                head[0].copy_from_slice(&tail[5]);
            }
            let scale = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h = (h * scale).min(opts.max_step);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok((y, stats))
}

fn initial_step(t0: f64, y: &[f64], dy: &[f64], t_end: f64, opts: &StepperOptions) -> f64 {
    let sc = |yi: f64| opts.atol + opts.rtol * yi.abs();
    let d0: f64 = y.iter().map(|v| (v / sc(*v)).powi(2)).sum::<f64>().sqrt();
    let d1: f64 = y
        .iter()
        .zip(dy)
        .map(|(v, dv)| (dv / sc(*v)).powi(2))
        .sum::<f64>()
        .sqrt();
    let guess = if d0 > 1e-10 && d1 > 1e-10 {
        0.01 * d0 / d1
    } else {
        1e-6
    };
    guess.min(opts.max_step).min((t_end - t0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_reaches_machine_accuracy() {
        let opts = StepperOptions {
            rtol: 1e-10,
            max_step: 10.0,
            ..Default::default()
        };
        let (y, _) = integrate_adaptive(
            |_, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            5.0,
            &opts,
            |_, _| {},
        )
        .unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn logistic_hits_fixed_point() {
        let opts = StepperOptions {
            rtol: 1e-10,
            max_step: 1.0,
            ..Default::default()
        };
        let (y, _) = integrate_adaptive(
            |_, y, dy| dy[0] = (1.0 - y[0]) * y[0],
            0.0,
            &[0.01],
            50.0,
            &opts,
            |_, _| {},
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn blow_up_detected() {
        let opts = StepperOptions {
            mass_cap: 1e3,
            max_step: 1.0,
            ..Default::default()
        };
        let err = integrate_adaptive(
            |_, y, dy| dy[0] = y[0] * y[0],
            0.0,
            &[1.0],
            10.0,
            &opts,
            |_, _| {},
        )
        .unwrap_err();
        assert!(matches!(err, OdeError::BlowUp { .. }));
    }

    #[test]
    fn exact_zero_components_stay_zero() {
        let opts = StepperOptions::default();
        let (y, stats) = integrate_adaptive(
            |_, y, dy| {
                dy[0] = (1.0 - y[0]) * y[0];
                dy[1] = 0.5 * y[1];
            },
            0.0,
            &[0.5, 0.0],
            10.0,
            &opts,
            |_, _| {},
        )
        .unwrap();
        assert_eq!(y[1], 0.0);
        assert_eq!(stats.max_clip, 0.0);
    }
}
