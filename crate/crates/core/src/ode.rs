//! Dormand–Prince 5(4) integrator with continuous (dense) output.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Clone, Debug)]
struct Step {
    t0: f64,
    h: f64,
    cont: [Vec<f64>; 5],
}

/// Piecewise continuous extension of an accepted Dormand–Prince trajectory.
#[derive(Clone, Debug)]
pub struct DenseSolution {
    t0: f64,
    y0: Vec<f64>,
    steps: Vec<Step>,
    /// Set when integration stopped before the requested end point.
    pub truncated_at: Option<f64>,
    pub rejected: usize,
}

impl DenseSolution {
    pub fn start(&self) -> f64 {
        self.t0
    }

    /// End of the covered interval (may precede `t0` for backward runs).
    pub fn end(&self) -> f64 {
        self.steps.last().map_or(self.t0, |s| s.t0 + s.h)
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.end() >= self.t0 {
            (self.t0, self.end())
        } else {
            (self.end(), self.t0)
        };
        t >= lo && t <= hi
    }

    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        if !self.contains(t) {
            return None;
        }
        if self.steps.is_empty() {
            return Some(self.y0.clone());
        }
        let forward = self.steps[0].h > 0.0;
        let i = self.steps.partition_point(|s| {
            if forward {
                s.t0 + s.h < t
            } else {
                s.t0 + s.h > t
            }
        });
        let s = &self.steps[i.min(self.steps.len() - 1)];
        let th = (t - s.t0) / s.h;
        let th1 = 1.0 - th;
        let c = &s.cont;
        Some(
            (0..c[0].len())
                .map(|k| c[0][k] + th * (c[1][k] + th1 * (c[2][k] + th * (c[3][k] + th1 * c[4][k]))))
                .collect(),
        )
    }

    /// Step boundaries, starting at `t0`.
    pub fn mesh(&self) -> Vec<f64> {
        std::iter::once(self.t0)
            .chain(self.steps.iter().map(|s| s.t0 + s.h))
            .collect()
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// If `f` fails or the step size collapses, integration stops and the
/// solution is returned with `truncated_at` set; callers decide whether the
/// covered interval suffices.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[f64], t_end: f64, rtol: f64, atol: f64) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = y0.len();
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Err(Error::Ode("empty integration interval".into()));
    }
    let mut sol = DenseSolution {
        t0,
        y0: y0.to_vec(),
        steps: Vec::new(),
        truncated_at: None,
        rejected: 0,
    };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    f(t, &y, &mut k[0])?;
    let mut h = dir * (1e-3 * span).min(1e-2);
    let h_min = 1e-14 * span.max(1.0);
    let mut tmp = vec![0.0; dim];
    let mut facold: f64 = 1e-4;
    for _ in 0..200_000 {
        if (t - t_end) * dir >= -1e-15 * span {
            return Ok(sol);
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        let mut stage_ok = true;
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            if f(t + C[s] * h, &tmp, &mut tail[0]).is_err() {
                stage_ok = false;
                break;
            }
        }
        if !stage_ok {
            h *= 0.25;
            sol.rejected += 1;
            if h.abs() < h_min {
                sol.truncated_at = Some(t);
                return Ok(sol);
            }
            continue;
        }
        // tmp now holds the 5th-order solution (stage 7 abscissa is t+h)
        let y_new = tmp.clone();
        let mut err = 0.0;
        for i in 0..dim {
            let sk = atol + rtol * y[i].abs().max(y_new[i].abs());
            let ei: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            err += (ei / sk).powi(2);
        }
        let err = (err / dim as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            sol.rejected += 1;
            if h.abs() < h_min {
                sol.truncated_at = Some(t);
                return Ok(sol);
            }
            continue;
        }
        let fac11 = err.powf(0.2);
        let fac = (fac11 / facold.powf(0.04)) / 0.9;
        let fac = fac.clamp(0.1, 5.0);
        if err <= 1.0 {
            facold = err.max(1e-4);
            let ydiff: Vec<f64> = (0..dim).map(|i| y_new[i] - y[i]).collect();
            let bspl: Vec<f64> = (0..dim).map(|i| h * k[0][i] - ydiff[i]).collect();
            let c3: Vec<f64> = (0..dim)
                .map(|i| ydiff[i] - h * k[6][i] - bspl[i])
                .collect();
            let c4: Vec<f64> = (0..dim)
                .map(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>())
                .collect();
            sol.steps.push(Step {
                t0: t,
                h,
                cont: [y.clone(), ydiff, bspl, c3, c4],
            });
            t += h;
            y = y_new;
            k[0] = k[6].clone();
            h /= fac;
        } else {
            sol.rejected += 1;
            h /= (fac11 / 0.9).min(10.0);
            if h.abs() < h_min {
                sol.truncated_at = Some(t);
                return Ok(sol);
            }
        }
    }
    Err(Error::Ode("step budget exhausted".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_dense_output() {
        let sol = dopri5(
            |_t, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
                Ok(())
            },
            0.0,
            &[0.0, 1.0],
            3.0,
            1e-10,
            1e-12,
        )
        .unwrap();
        assert!(sol.truncated_at.is_none());
        for &t in &[0.1, 0.77, 1.5, 2.999] {
            let y = sol.eval(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-8, "t={t}");
            assert!((y[1] - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn backward_run_and_truncation() {
        let sol = dopri5(
            |_t, y, d| {
                d[0] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            -1.0,
            1e-10,
            1e-12,
        )
        .unwrap();
        let y = sol.eval(-0.5).unwrap();
        assert!((y[0] - 0.5f64.exp()).abs() < 1e-9);

        // y' = 1/(1-t) blows up at t=1
        let sol = dopri5(
            |t, _y, d| {
                if t >= 1.0 {
                    return Err(Error::Ode("pole".into()));
                }
                d[0] = 1.0 / (1.0 - t);
                Ok(())
            },
            0.0,
            &[0.0],
            2.0,
            1e-8,
            1e-10,
        )
        .unwrap();
        assert!(sol.truncated_at.is_some());
        assert!(sol.end() < 1.0);
    }
}
