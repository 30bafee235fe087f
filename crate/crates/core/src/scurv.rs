//! Busemann-Hausdorff volume form and S-curvature.
//!
//! `σ_F(x) = Vol(Bⁿ)/Vol{y : F(x,y) < 1}` with `Vol{F < 1} = (1/n)∮ F(x,θ)^{−n} dθ`.
//! For (α,β)-metrics the indicatrix is a linear image of a fixed body of
//! revolution, which reduces the sphere integral to one dimension:
//! `ln σ = ln Vol(Bⁿ) + ½ ln det a − ln V(b)`, with
//! `V(b) = (1/n)|S^{n−2}| ∫₀^π φ(b cos t)^{−n} sin^{n−2}t dt`.

use crate::error::{Error, Result};
use crate::deriv::{fd_oracle, ScalarField};
use crate::finsler::{ABMetric, FinslerMetric};
use crate::jet::{Caps, Jet, MultiIndex};
use crate::linalg::cholesky;
use crate::quad::{gauss_kronrod, gauss_legendre};
use crate::tensor::{Slot, TensorValue};

/// `σ_F` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeSample {
    pub x: Vec<f64>,
    pub sigma: f64,
    pub ln_sigma: f64,
    pub nodes: usize,
    /// Estimated absolute error of `ln σ`.
    pub error: f64,
    pub warning: Option<String>,
}

/// Volume of the Euclidean unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Area of the unit sphere `S^m ⊂ R^{m+1}`.
fn sphere_area(m: usize) -> f64 {
    (m as f64 + 1.0) * unit_ball_volume(m + 1)
}

/// Default tolerance for the one-dimensional reductions.
pub const SIGMA_TOL: f64 = 1e-12;

pub fn bh_sigma(metric: &FinslerMetric, x: &[f64], tol: f64) -> Result<VolumeSample> {
    match metric {
        FinslerMetric::AB(m) => ab_sigma(m, x, tol),
        FinslerMetric::Generic(_) => sphere_sigma(metric, x),
    }
}

fn weight(n: usize, t: f64) -> f64 {
    t.sin().powi(n as i32 - 2)
}

/// `V(b)` and `V'(b)`.
fn profile_volume(m: &ABMetric, n: usize, b: f64, tol: f64, derivative: bool) -> Result<(f64, f64, f64)> {
    let c = sphere_area(n - 2) / n as f64;
    let phi = &m.phi;
    let v = gauss_kronrod(
        |t| {
            let p = phi.value(b * t.cos())?;
            Ok(p.powi(-(n as i32)) * weight(n, t))
        },
        0.0,
        std::f64::consts::PI,
        tol,
    )?;
    let dv = if derivative {
        gauss_kronrod(
            |t| {
                let d = phi.phi_jet(b * t.cos(), 1)?;
                Ok(-(n as f64) * d[0].powi(-(n as i32) - 1) * d[1] * t.cos() * weight(n, t))
            },
            0.0,
            std::f64::consts::PI,
            tol,
        )?
        .value
    } else {
        0.0
    };
    Ok((c * v.value, c * dv, c * v.error))
}

fn ab_sigma(m: &ABMetric, x: &[f64], tol: f64) -> Result<VolumeSample> {
    let n = m.a.dim();
    if n < 2 {
        return Err(Error::Invalid("volume form needs dimension >= 2".into()));
    }
    let a = m.a.matrix(x)?;
    let l = cholesky(&a).ok_or_else(|| Error::NotPositiveDefinite {
        what: "a_ij".into(),
        x: x.to_vec(),
    })?;
    let half_ln_det: f64 = (0..n).map(|i| l[i][i].ln()).sum();
    let b = m.b_norm(x)?;
    let (v, _, err) = profile_volume(m, n, b, tol, false).map_err(|e| e.at_point(x, &[]))?;
    let ln_sigma = unit_ball_volume(n).ln() + half_ln_det - v.ln();
    let warning = (b >= m.phi.b0).then(|| {
        format!(
            "b = {b} reaches the regular radius {}; extremal directions are excluded from the integral",
            m.phi.b0
        )
    });
    Ok(VolumeSample {
        x: x.to_vec(),
        sigma: ln_sigma.exp(),
        ln_sigma,
        nodes: 0,
        error: err / v,
        warning,
    })
}

/// `(1/n)∮ F^{−n}` over the unit sphere, with a coarser rule as error estimate.
fn sphere_volume(metric: &FinslerMetric, x: &[f64], fine: bool, skipped: &mut usize) -> Result<(f64, usize)> {
    let n = metric.dim();
    let mut eval = |y: &[f64]| -> Result<f64> {
        match metric.f_value(x, y) {
            Ok(f) => Ok(f.powi(-(n as i32))),
            Err(Error::ExtremalDirection { .. }) => {
                *skipped += 1;
                Ok(0.0)
            }
            Err(e) => Err(e),
        }
    };
    let tau = 2.0 * std::f64::consts::PI;
    match n {
        2 => {
            let m = if fine { 512 } else { 256 };
            let mut acc = 0.0;
            for k in 0..m {
                let t = tau * k as f64 / m as f64;
                acc += eval(&[t.cos(), t.sin()])?;
            }
            Ok((acc * tau / m as f64 / 2.0, m))
        }
        3 => {
            let (mu, mp) = if fine { (64, 128) } else { (48, 96) };
            let (nodes, weights) = gauss_legendre(mu);
            let mut acc = 0.0;
            for (u, w) in nodes.iter().zip(&weights) {
                let r = (1.0 - u * u).sqrt();
                let mut ring = 0.0;
                for k in 0..mp {
                    let p = tau * k as f64 / mp as f64;
                    ring += eval(&[r * p.cos(), r * p.sin(), *u])?;
                }
                acc += w * ring * tau / mp as f64;
            }
            Ok((acc / 3.0, mu * mp))
        }
        _ => Err(Error::Invalid(format!(
            "sphere quadrature is implemented for n = 2, 3 (got {n})"
        ))),
    }
}

/// `σ_F` by direct quadrature over the unit sphere; valid for every metric.
pub fn sphere_sigma(metric: &FinslerMetric, x: &[f64]) -> Result<VolumeSample> {
    let n = metric.dim();
    let mut skipped = 0;
    let (fine, nodes) = sphere_volume(metric, x, true, &mut skipped)?;
    let (coarse, _) = sphere_volume(metric, x, false, &mut skipped)?;
    let ln_sigma = unit_ball_volume(n).ln() - fine.ln();
    Ok(VolumeSample {
        x: x.to_vec(),
        sigma: ln_sigma.exp(),
        ln_sigma,
        nodes,
        error: ((fine - coarse) / fine).abs(),
        warning: (skipped > 0)
            .then(|| format!("{skipped} quadrature nodes fell on extremal directions and were clipped")),
    })
}

/// Gradient of `ln σ_F` by central differences with one Richardson level,
/// step `1e−4 (1 + |x_m|)`.
pub fn ln_sigma_gradient_fd(metric: &FinslerMetric, x: &[f64]) -> Result<Vec<f64>> {
    let ln_s = |p: &[f64]| -> Result<f64> {
        match metric {
            FinslerMetric::AB(m) => Ok(ab_sigma(m, p, 1e-14)?.ln_sigma),
            FinslerMetric::Generic(_) => Ok(sphere_sigma(metric, p)?.ln_sigma),
        }
    };
    (0..x.len())
        .map(|m| {
            let h = 1e-4 * (1.0 + x[m].abs());
            let diff = |h: f64| -> Result<f64> {
                let mut p = x.to_vec();
                p[m] = x[m] + h;
                let up = ln_s(&p)?;
                p[m] = x[m] - h;
                Ok((up - ln_s(&p)?) / (2.0 * h))
            };
            let (d1, d2) = (diff(h)?, diff(h / 2.0)?);
            Ok((4.0 * d2 - d1) / 3.0)
        })
        .collect()
}

/// Gradient of `ln σ_F`. For (α,β)-metrics this is
/// `Γ^l_{lm} − (V'(b)/V(b)) ∂_m b`; otherwise finite differences.
pub fn ln_sigma_gradient(metric: &FinslerMetric, x: &[f64]) -> Result<Vec<f64>> {
    let m = match metric {
        FinslerMetric::AB(m) => m,
        FinslerMetric::Generic(_) => return ln_sigma_gradient_fd(metric, x),
    };
    let n = m.a.dim();
    let aj = m.a.jets(x, 1)?;
    let bj = m.beta.jets(x, &aj)?;
    let b2 = bj.b2.value();
    let b = b2.sqrt();
    let db: Vec<f64> = (0..n)
        .map(|k| if b > 0.0 { bj.b2.dx(k).value() / (2.0 * b) } else { 0.0 })
        .collect();
    let ratio = if db.iter().any(|v| *v != 0.0) {
        let (v, dv, _) = profile_volume(m, n, b, SIGMA_TOL, true).map_err(|e| e.at_point(x, &[]))?;
        dv / v
    } else {
        0.0
    };
    Ok((0..n)
        .map(|k| {
            let tr: f64 = (0..n).map(|l| aj.gamma[l][l][k].value()).sum();
            tr - ratio * db[k]
        })
        .collect())
}

/// `∂G^i/∂y^i`.
pub fn spray_divergence(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    let g = metric.spray_jets(x, y, Caps::split(0, 1), metric.default_route())?;
    Ok(g.iter().enumerate().map(|(i, gi)| gi.dy(i).value()).sum())
}

/// `S = ∂G^i/∂y^i − y^m ∂_m ln σ_F` given the gradient of `ln σ_F` at `x`.
pub fn s_curvature_with(metric: &FinslerMetric, x: &[f64], y: &[f64], grad: &[f64]) -> Result<f64> {
    let div = spray_divergence(metric, x, y)?;
    Ok(div - y.iter().zip(grad).map(|(a, b)| a * b).sum::<f64>())
}

pub fn s_curvature(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    let grad = ln_sigma_gradient(metric, x)?;
    s_curvature_with(metric, x, y, &grad)
}

struct SField<'a> {
    metric: &'a FinslerMetric,
    grad: Vec<f64>,
}

impl ScalarField for SField<'_> {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        s_curvature_with(self.metric, x, y, &self.grad)
    }

    fn eval_jet(&self, _x: &[Jet], _y: &[Jet]) -> Result<Jet> {
        Err(Error::Invalid("the S field is evaluated pointwise only".into()))
    }
}

/// `E_jk = ½ ∂²S/∂y^j∂y^k` by finite differences of `S`.
pub fn e_from_s(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    let n = metric.dim();
    let field = SField {
        metric,
        grad: ln_sigma_gradient(metric, x)?,
    };
    let mut out = TensorValue::zeros(n, &[Slot::Down, Slot::Down]);
    for j in 0..n {
        for k in j..n {
            let idx = MultiIndex::from_vars(n, &[], &[j, k])?;
            let v = 0.5 * fd_oracle(&field, x, y, &idx)?;
            out.set(&[j, k], v);
            out.set(&[k, j], v);
        }
    }
    Ok(out)
}
