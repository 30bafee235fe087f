//! Deterministic sample grids: Halton points in a box and low-discrepancy
//! directions on the unit α-sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::finsler::FinslerMetric;
use crate::linalg::cholesky;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> GridSpec {
        GridSpec {
            lo,
            hi,
            nx: 16,
            ny: 32,
            seed: 0,
        }
    }

    pub fn cube(n: usize, half: f64) -> GridSpec {
        GridSpec::new(vec![-half; n], vec![half; n])
    }

    pub fn with_counts(mut self, nx: usize, ny: usize) -> GridSpec {
        self.nx = nx;
        self.ny = ny;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> GridSpec {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub x: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    pub points: Vec<SamplePoint>,
    /// Directions dropped because `|s| > 0.9·b₀`.
    pub dropped: usize,
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Unit vectors in `R^n` for `n = 2, 3`, rotated by `shift ∈ [0,1)`.
fn sphere_directions(n: usize, m: usize, shift: f64) -> Result<Vec<Vec<f64>>> {
    let tau = 2.0 * std::f64::consts::PI;
    match n {
        2 => Ok((0..m)
            .map(|k| {
                let t = tau * (k as f64 + shift) / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => {
            // Fibonacci lattice
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            Ok((0..m)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let p = tau * (k as f64 / golden + shift);
                    vec![r * p.cos(), r * p.sin(), z]
                })
                .collect())
        }
        _ => Err(Error::Invalid(format!(
            "sample directions are implemented for n = 2, 3 (got {n})"
        ))),
    }
}

impl SampleGrid {
    pub fn build(metric: &FinslerMetric, spec: &GridSpec) -> Result<SampleGrid> {
        let n = metric.dim();
        if spec.lo.len() != n || spec.hi.len() != n {
            return Err(Error::Invalid(format!("grid box must have dimension {n}")));
        }
        if spec.nx < 8 || spec.ny < 8 {
            return Err(Error::Invalid("grids need at least 8 samples per axis".into()));
        }
        if spec.lo.iter().zip(&spec.hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::Invalid("grid box has lo > hi".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let rot: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let dshift: f64 = rng.gen();
        let dirs = sphere_directions(n, spec.ny, dshift)?;
        let mut points = Vec::with_capacity(spec.nx);
        let mut dropped = 0;
        for i in 0..spec.nx {
            let x: Vec<f64> = (0..n)
                .map(|d| {
                    let u = (radical_inverse(i as u64 + 1, PRIMES[d]) + rot[d]).fract();
                    spec.lo[d] + u * (spec.hi[d] - spec.lo[d])
                })
                .collect();
            let ys = match metric {
                FinslerMetric::AB(m) => {
                    // y = L^{−T} ξ has α(y) = |ξ| when a = L Lᵀ
                    let a = m.a.matrix(&x)?;
                    let l = cholesky(&a).ok_or_else(|| Error::NotPositiveDefinite {
                        what: "a_ij".into(),
                        x: x.clone(),
                    })?;
                    let mut ys = Vec::new();
                    for xi in &dirs {
                        let mut y = xi.clone();
                        for r in (0..n).rev() {
                            let mut v = xi[r];
                            for c in r + 1..n {
                                v -= l[c][r] * y[c];
                            }
                            y[r] = v / l[r][r];
                        }
                        if m.s_value(&x, &y)?.abs() <= 0.9 * m.phi.b0 {
                            ys.push(y);
                        } else {
                            dropped += 1;
                        }
                    }
                    ys
                }
                FinslerMetric::Generic(_) => dirs.clone(),
            };
            points.push(SamplePoint { x, ys });
        }
        Ok(SampleGrid { points, dropped })
    }

    pub fn len(&self) -> usize {
        self.points.iter().map(|p| p.ys.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The first `k` points with their first `m` directions each.
    pub fn subset(&self, k: usize, m: usize) -> SampleGrid {
        SampleGrid {
            points: self
                .points
                .iter()
                .take(k)
                .map(|p| SamplePoint {
                    x: p.x.clone(),
                    ys: p.ys.iter().take(m).cloned().collect(),
                })
                .collect(),
            dropped: self.dropped,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::ABMetric;
    use crate::geometry::{OneForm, RiemannMetric};
    use crate::phi::PhiFamily;

    #[test]
    fn directions_are_alpha_unit_and_regular() {
        let a = RiemannMetric::diagonal(&["1", "exp(2*x1)"]).unwrap();
        let m = FinslerMetric::AB(
            ABMetric::new(a.clone(), OneForm::parse(&["0.49", "0"]).unwrap(), PhiFamily::matsumoto())
                .unwrap(),
        );
        let g = SampleGrid::build(&m, &GridSpec::cube(2, 0.5).with_seed(7)).unwrap();
        assert_eq!(g.points.len(), 16);
        assert!(g.dropped > 0);
        for p in &g.points {
            for y in &p.ys {
                assert!((a.norm(&p.x, y).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        let again = SampleGrid::build(&m, &GridSpec::cube(2, 0.5).with_seed(7)).unwrap();
        assert_eq!(g, again);
        let other = SampleGrid::build(&m, &GridSpec::cube(2, 0.5).with_seed(8)).unwrap();
        assert_ne!(g.points[0].x, other.points[0].x);
    }

    #[test]
    fn halton_is_low_discrepancy() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    }
}
