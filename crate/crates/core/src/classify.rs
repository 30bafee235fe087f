//! Residual-based predicates over sample grids.
//!
//! Every residual is homogeneous of degree zero in `y`, so tolerances are
//! dimensionless:
//!
//! | predicate           | per-sample residual                                    |
//! |---------------------|--------------------------------------------------------|
//! | berwald             | `max |B^i_jkl| · F`                                    |
//! | douglas             | `max |D^i_jkl| · F`                                    |
//! | gdw                 | `max |h^m_i D^i_jkl|s y^s|`                            |
//! | scalar_flag         | `max |R^i_k − K F² h^i_k| / F²`                        |
//! | isotropic_s         | `|S − (n+1) c(x) F| / F`                               |
//! | isotropic_mean_berwald | `max |E_jk − c(x) (n+1)/2 F^{−1} h_jk| · F`         |
//!
//! Samples are evaluated in parallel but collected in grid order, so reports
//! are reproducible bit for bit.

use rayon::prelude::*;

use crate::curvature::{Spray, TensorJet};
use crate::error::{Error, Result};
use crate::finsler::FinslerMetric;
use crate::geometry::{beta_invariants, OneForm, RiemannMetric};
use crate::grid::SampleGrid;
use crate::jet::Caps;
use crate::report::{ClassifierReport, Verdict, Witness};
use crate::scurv::{ln_sigma_gradient, s_curvature_with};
use crate::tensor::TensorValue;

pub const BERWALD_TOL: f64 = 1e-6;
pub const DOUGLAS_TOL: f64 = 1e-6;
pub const GDW_TOL: f64 = 1e-5;
pub const SCALAR_FLAG_TOL: f64 = 1e-6;
pub const ISOTROPIC_S_TOL: f64 = 1e-4;
pub const CS0_TOL: f64 = 1e-6;
pub const MEAN_BERWALD_TOL: f64 = 1e-4;

/// Fraction of failed evaluations above which a report fails outright.
const MAX_ERROR_FRACTION: f64 = 0.01;

struct Sample<T> {
    x: Vec<f64>,
    y: Vec<f64>,
    out: Result<T>,
}

/// Evaluates `f` at every `(x, y)` of the grid; `prep` runs once per `x`.
fn sweep<P: Sync, T: Send>(
    grid: &SampleGrid,
    prep: impl Fn(&[f64]) -> Result<P> + Sync,
    f: impl Fn(&P, &[f64], &[f64]) -> Result<T> + Sync,
) -> Vec<Sample<T>> {
    grid.points
        .par_iter()
        .map(|p| {
            let pre = prep(&p.x);
            p.ys
                .iter()
                .map(|y| Sample {
                    x: p.x.clone(),
                    y: y.clone(),
                    out: match &pre {
                        Ok(pre) => f(pre, &p.x, y),
                        Err(e) => Err(e.clone()),
                    },
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Sup-norm report from per-sample residuals.
fn sup_report(predicate: &str, tol: f64, samples: &[Sample<f64>]) -> ClassifierReport {
    let mut worst: Option<(f64, &Sample<f64>)> = None;
    let mut failures = 0;
    let mut first_error: Option<(&Sample<f64>, &Error)> = None;
    for s in samples {
        match &s.out {
            Ok(r) => {
                let r = if r.is_nan() { f64::INFINITY } else { *r };
                if worst.map_or(true, |(w, _)| r > w) {
                    worst = Some((r, s));
                }
            }
            Err(e) => {
                failures += 1;
                first_error.get_or_insert((s, e));
            }
        }
    }
    let residual = worst.map_or(f64::INFINITY, |(w, _)| w);
    let mut rep = ClassifierReport::new(predicate, residual, tol);
    rep.samples = samples.len();
    rep.failures = failures;
    if let Some((_, s)) = worst {
        rep.witness = Some(Witness {
            x: s.x.clone(),
            y: s.y.clone(),
        });
    }
    if let Some((s, e)) = first_error {
        rep.notes.push(format!("evaluation failed at x={:?}, y={:?}: {e}", s.x, s.y));
        if failures as f64 > MAX_ERROR_FRACTION * samples.len() as f64 {
            rep.verdict = Verdict::Fail;
            rep.notes.push(format!(
                "{failures} of {} samples failed to evaluate",
                samples.len()
            ));
            if rep.witness.is_none() {
                rep.witness = Some(Witness {
                    x: s.x.clone(),
                    y: s.y.clone(),
                });
            }
        }
    }
    if samples.is_empty() {
        rep.verdict = Verdict::Fail;
        rep.notes.push("empty sample grid".into());
    }
    rep
}

fn split<T>(samples: Vec<Sample<(f64, T)>>) -> (Vec<Sample<f64>>, Vec<Option<T>>) {
    samples
        .into_iter()
        .map(|s| match s.out {
            Ok((r, t)) => (
                Sample {
                    x: s.x,
                    y: s.y,
                    out: Ok(r),
                },
                Some(t),
            ),
            Err(e) => (
                Sample {
                    x: s.x,
                    y: s.y,
                    out: Err(e),
                },
                None,
            ),
        })
        .unzip()
}

fn witness_index(rep: &ClassifierReport, samples: &[Sample<f64>]) -> Option<usize> {
    let w = rep.witness.as_ref()?;
    samples.iter().position(|s| s.x == w.x && s.y == w.y)
}

fn spray(metric: &FinslerMetric, x: &[f64], y: &[f64], caps: Caps) -> Result<Spray> {
    Spray::with_caps(metric, x, y, metric.default_route(), caps)
}

/// `G^i` quadratic in `y`.
pub fn classify_berwald(metric: &FinslerMetric, grid: &SampleGrid, tol: f64) -> ClassifierReport {
    let samples = sweep(grid, |_| Ok(()), |_, x, y| {
        let b = spray(metric, x, y, Caps::new(0, 3, 3))?.berwald_jet()?.value();
        Ok(b.max_abs() * metric.f_value(x, y)?)
    });
    sup_report("berwald", tol, &samples)
}

/// `G^i = ½Γ^i_jk y^j y^k + P y^i`, i.e. `D = 0`.
pub fn classify_douglas(metric: &FinslerMetric, grid: &SampleGrid, tol: f64) -> ClassifierReport {
    let samples = sweep(grid, |_| Ok(()), |_, x, y| {
        let d = spray(metric, x, y, Caps::new(0, 4, 4))?.douglas_jet()?.value();
        Ok(d.max_abs() * metric.f_value(x, y)?)
    });
    sup_report("douglas", tol, &samples)
}

/// `D^i_jkl|m y^m` and its projection `h^m_i D^i_jkl|m y^m`, plus `T_jkl`.
pub fn gdw_parts(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<(TensorValue, TensorValue)> {
    let n = metric.dim();
    let sp = spray(metric, x, y, Caps::new(1, 5, 5))?;
    let d: TensorJet = sp.douglas_jet()?;
    let dh = sp.hderiv_contract(&d)?.value();
    let pack = metric.fundamental_pack(x, y)?;
    let f2 = pack.f * pack.f;
    let mut proj = TensorValue::zeros(n, &dh.valence);
    let mut t = TensorValue::zeros(n, &dh.valence[1..]);
    for idx in t.indices() {
        let (j, k, l) = (idx[0], idx[1], idx[2]);
        let tv: f64 = (0..n).map(|i| pack.y_low[i] * dh.get(&[i, j, k, l])).sum::<f64>() / f2;
        t.set(&idx, tv);
        for m in 0..n {
            proj.set(&[m, j, k, l], dh.get(&[m, j, k, l]) - tv * y[m]);
        }
    }
    Ok((proj, t))
}

/// Generalized Douglas-Weyl: `D^i_jkl|m y^m = T_jkl y^i` for some `T`.
pub fn classify_gdw(metric: &FinslerMetric, grid: &SampleGrid, tol: f64) -> ClassifierReport {
    let samples = sweep(grid, |_| Ok(()), |_, x, y| {
        let (proj, t) = gdw_parts(metric, x, y)?;
        Ok((proj.max_abs(), t))
    });
    let (res, ts) = split(samples);
    let mut rep = sup_report("gdw", tol, &res);
    if let Some(t) = witness_index(&rep, &res).and_then(|i| ts[i].as_ref()) {
        for idx in t.indices() {
            rep.scalars.push((t.label("T", &idx), t.get(&idx)));
        }
    }
    rep
}

/// `K = R^m_m / ((n−1)F²)` and the residual `max |R^i_k − K F² h^i_k| / F²`.
pub fn scalar_flag_parts(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = metric.dim();
    let r = spray(metric, x, y, Caps::new(1, 2, 3))?.riemann_ry()?;
    let pack = metric.fundamental_pack(x, y)?;
    let f2 = pack.f * pack.f;
    let trace: f64 = (0..n).map(|m| r.get(&[m, m])).sum();
    let k = trace / ((n as f64 - 1.0) * f2);
    let mut res = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            res = res.max((r.get(&[i, j]) - k * f2 * pack.h_mixed[i][j]).abs() / f2);
        }
    }
    Ok((res, k))
}

/// Scalar flag curvature (Weyl): `R^i_k = K F² h^i_k`.
pub fn classify_scalar_flag(metric: &FinslerMetric, grid: &SampleGrid, tol: f64) -> ClassifierReport {
    if metric.dim() < 2 {
        let mut r = ClassifierReport::new("scalar_flag", f64::INFINITY, tol);
        r.notes.push("flag curvature needs n >= 2".into());
        return r;
    }
    let samples = sweep(grid, |_| Ok(()), |_, x, y| scalar_flag_parts(metric, x, y));
    let (res, ks) = split(samples);
    let mut rep = sup_report("scalar_flag", tol, &res);
    let ks: Vec<f64> = ks.into_iter().flatten().collect();
    if !ks.is_empty() {
        let lo = ks.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let max_abs = lo.abs().max(hi.abs());
        rep.scalars.push(("K_min".into(), lo));
        rep.scalars.push(("K_max".into(), hi));
        rep.scalars.push(("K_max_abs".into(), max_abs));
    }
    rep
}

/// `S/F` at every sample, grouped per `x`.
fn s_over_f(metric: &FinslerMetric, grid: &SampleGrid) -> Vec<Sample<f64>> {
    sweep(
        grid,
        |x| ln_sigma_gradient(metric, x),
        |grad, x, y| Ok(s_curvature_with(metric, x, y, grad)? / metric.f_value(x, y)?),
    )
}

/// Isotropic S-curvature `S = (n+1) c(x) F`, with labels `vanishing`,
/// `constant`, `isotropic` or `none`.
pub fn classify_isotropic_s(metric: &FinslerMetric, grid: &SampleGrid, tol: f64) -> ClassifierReport {
    let n1 = metric.dim() as f64 + 1.0;
    let sf = s_over_f(metric, grid);
    // c(x) = mean of S/((n+1)F) over the directions at x
    let mut cs = Vec::new();
    let mut res = Vec::with_capacity(sf.len());
    let mut start = 0;
    for p in &grid.points {
        let block = &sf[start..start + p.ys.len()];
        start += p.ys.len();
        let ok: Vec<f64> = block.iter().filter_map(|s| s.out.as_ref().ok().copied()).collect();
        let c = ok.iter().sum::<f64>() / (n1 * ok.len().max(1) as f64);
        if !ok.is_empty() {
            cs.push(c);
        }
        for s in block {
            res.push(Sample {
                x: s.x.clone(),
                y: s.y.clone(),
                out: s.out.clone().map(|v| (v - n1 * c).abs()),
            });
        }
    }
    let mut rep = sup_report("isotropic_s", tol, &res);
    let vals: Vec<f64> = sf.iter().filter_map(|s| s.out.as_ref().ok().map(|v| v.abs())).collect();
    let sup = vals.iter().copied().fold(0.0, f64::max);
    let inf = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let c_lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
    let c_hi = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c_mean = cs.iter().sum::<f64>() / cs.len().max(1) as f64;
    let label = if sup < tol {
        "vanishing"
    } else if rep.residual < tol && c_hi - c_lo < tol {
        "constant"
    } else if rep.residual < tol {
        "isotropic"
    } else {
        "none"
    };
    rep.label = Some(label.into());
    rep.scalars.push(("sup_abs_S_over_F".into(), sup));
    rep.scalars.push(("inf_abs_S_over_F".into(), inf));
    rep.scalars.push(("c_mean".into(), c_mean));
    rep.scalars.push(("c_min".into(), c_lo));
    rep.scalars.push(("c_max".into(), c_hi));
    rep
}

/// Branch test for isotropic S-curvature of (α,β)-metrics: (b) `r_ij = 0,
/// s_j = 0`, else (a) `r_ij = ε(b² a_ij − b_i b_j), s_j = 0` with `ε(x)`
/// fitted by least squares.
pub fn lemma_cs0_check(a: &RiemannMetric, beta: &OneForm, xs: &[Vec<f64>], tol: f64) -> ClassifierReport {
    let n = a.dim();
    let per_x: Vec<Result<(f64, f64, f64, f64)>> = xs
        .par_iter()
        .map(|x| {
            let y = vec![1.0; n];
            let inv = beta_invariants(a, beta, x, &y)?;
            let am = a.matrix(x)?;
            let r_max = inv.r_ij.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            let sj = inv.s_j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let p = inv.b2 * am[i][j] - inv.b[i] * inv.b[j];
                    num += p * inv.r_ij[i][j];
                    den += p * p;
                }
            }
            let eps = if den > 0.0 { num / den } else { 0.0 };
            let mut res45 = sj;
            for i in 0..n {
                for j in 0..n {
                    let p = inv.b2 * am[i][j] - inv.b[i] * inv.b[j];
                    res45 = res45.max((inv.r_ij[i][j] - eps * p).abs());
                }
            }
            Ok((r_max.max(sj), res45, eps, inv.b2.sqrt()))
        })
        .collect();
    let mut failures = 0;
    let mut res_b = 0.0f64;
    let mut res_a = 0.0f64;
    let mut witness_b: Option<usize> = None;
    let mut witness_a: Option<usize> = None;
    let mut eps = Vec::new();
    let mut bs = Vec::new();
    let mut notes = Vec::new();
    for (i, r) in per_x.iter().enumerate() {
        match r {
            Ok((rb, ra, e, b)) => {
                if witness_b.is_none() || *rb > res_b {
                    res_b = *rb;
                    witness_b = Some(i);
                }
                if witness_a.is_none() || *ra > res_a {
                    res_a = *ra;
                    witness_a = Some(i);
                }
                eps.push(*e);
                bs.push(*b);
            }
            Err(e) => {
                failures += 1;
                if notes.is_empty() {
                    notes.push(format!("evaluation failed at x={:?}: {e}", xs[i]));
                }
            }
        }
    }
    let (residual, label, wi) = if res_b < tol {
        (res_b, "b", witness_b)
    } else if res_a < tol {
        (res_a, "a", witness_a)
    } else {
        (res_a, "none", witness_a)
    };
    let mut rep = ClassifierReport::new("lemma_cs0", residual, tol);
    if failures > 0 || xs.is_empty() {
        rep.verdict = Verdict::Fail;
    }
    rep.label = Some(label.into());
    rep.samples = xs.len();
    rep.failures = failures;
    rep.notes = notes;
    rep.witness = wi.map(|i| Witness {
        x: xs[i].clone(),
        y: vec![],
    });
    let stat = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    rep.scalars.push(("residual_b".into(), res_b));
    rep.scalars.push(("residual_a".into(), res_a));
    rep.scalars.push(("eps_min".into(), stat(&eps, f64::min, f64::INFINITY)));
    rep.scalars.push(("eps_max".into(), stat(&eps, f64::max, f64::NEG_INFINITY)));
    rep.scalars.push(("b_min".into(), stat(&bs, f64::min, f64::INFINITY)));
    rep.scalars.push(("b_max".into(), stat(&bs, f64::max, f64::NEG_INFINITY)));
    rep
}

/// Per-sample data for the isotropic mean Berwald fit: `E_jk`, the
/// `F^{−1}` template `(n+1)/2 F^{−1} h_jk`, the `F` template
/// `(n+1)/2 F h_jk`, and `F`.
type EParts = (TensorValue, Vec<f64>, Vec<f64>, f64);

fn e_parts(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<EParts> {
    let n = metric.dim();
    let e = spray(metric, x, y, Caps::new(0, 3, 3))?.mean_berwald_jet()?.value();
    let pack = metric.fundamental_pack(x, y)?;
    let h = (n as f64 + 1.0) / 2.0;
    let mut inv = Vec::with_capacity(n * n);
    let mut fwd = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            inv.push(h * pack.h[j][k] / pack.f);
            fwd.push(h * pack.h[j][k] * pack.f);
        }
    }
    Ok((e, inv, fwd, pack.f))
}

/// Isotropic mean Berwald curvature `E = (n+1)/2 c(x) F^{−1} h`.
///
/// `E` has degree −1 in `y` and `h` degree 0, so only the `F^{−1}` form is
/// consistent with homogeneity; it decides the verdict. The residual of the
/// `E = (n+1)/2 c F h` form is reported as the scalar `residual_F_form`.
/// The fitted `c` is compared with `S/((n+1)F)` as `c_mismatch`.
pub fn isotropic_mean_berwald_check(metric: &FinslerMetric, grid: &SampleGrid, tol: f64) -> ClassifierReport {
    let parts = sweep(grid, |_| Ok(()), |_, x, y| e_parts(metric, x, y));
    let sf = s_over_f(metric, grid);
    let n1 = metric.dim() as f64 + 1.0;
    let fit = |block: &[Sample<EParts>], pick: fn(&EParts) -> &Vec<f64>| {
        let (mut num, mut den) = (0.0, 0.0);
        for s in block {
            if let Ok(p) = &s.out {
                for (e, t) in p.0.data.iter().zip(pick(p)) {
                    num += e * t;
                    den += t * t;
                }
            }
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    };
    let mut res = Vec::with_capacity(parts.len());
    let mut res_f = 0.0f64;
    let mut cs = Vec::new();
    let mut mismatch = 0.0f64;
    let mut start = 0;
    for p in &grid.points {
        let m = p.ys.len();
        let block = &parts[start..start + m];
        let sblock = &sf[start..start + m];
        start += m;
        let c = fit(block, |p| &p.1);
        let c_f = fit(block, |p| &p.2);
        cs.push(c);
        let ok: Vec<f64> = sblock.iter().filter_map(|s| s.out.as_ref().ok().copied()).collect();
        if !ok.is_empty() {
            let c_s = ok.iter().sum::<f64>() / (n1 * ok.len() as f64);
            mismatch = mismatch.max((c - c_s).abs());
        }
        for s in block {
            res.push(Sample {
                x: s.x.clone(),
                y: s.y.clone(),
                out: s.out.as_ref().map_err(Clone::clone).map(|(e, inv, fwd, f)| {
                    let mut r = 0.0f64;
                    let mut rf = 0.0f64;
                    for ((ev, ti), tf) in e.data.iter().zip(inv).zip(fwd) {
                        r = r.max((ev - c * ti).abs() * f);
                        rf = rf.max((ev - c_f * tf).abs() * f);
                    }
                    res_f = res_f.max(rf);
                    r
                }),
            });
        }
    }
    let mut rep = sup_report("isotropic_mean_berwald", tol, &res);
    let c_lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
    let c_hi = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rep.scalars.push(("c_min".into(), c_lo));
    rep.scalars.push(("c_max".into(), c_hi));
    rep.scalars.push(("c_mismatch".into(), mismatch));
    rep.scalars.push(("residual_F_form".into(), res_f));
    rep
}

/// Predicate names accepted by [`run_predicate`] with their default tolerances.
pub const PREDICATES: &[(&str, f64)] = &[
    ("berwald", BERWALD_TOL),
    ("douglas", DOUGLAS_TOL),
    ("gdw", GDW_TOL),
    ("scalar_flag", SCALAR_FLAG_TOL),
    ("isotropic_s", ISOTROPIC_S_TOL),
    ("isotropic_mean_berwald", MEAN_BERWALD_TOL),
    ("lemma_cs0", CS0_TOL),
];

pub fn default_tolerance(predicate: &str) -> Option<f64> {
    PREDICATES.iter().find(|(n, _)| *n == predicate).map(|(_, t)| *t)
}

/// Runs a predicate by name; `tol = None` uses its default tolerance.
pub fn run_predicate(
    predicate: &str,
    metric: &FinslerMetric,
    grid: &SampleGrid,
    tol: Option<f64>,
) -> Result<ClassifierReport> {
    let tol = match (tol, default_tolerance(predicate)) {
        (Some(t), Some(_)) => t,
        (None, Some(t)) => t,
        (_, None) => {
            let names: Vec<&str> = PREDICATES.iter().map(|(n, _)| *n).collect();
            return Err(Error::Invalid(format!(
                "unknown predicate `{predicate}` (known: {})",
                names.join(", ")
            )));
        }
    };
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance must be positive (got {tol})")));
    }
    Ok(match predicate {
        "berwald" => classify_berwald(metric, grid, tol),
        "douglas" => classify_douglas(metric, grid, tol),
        "gdw" => classify_gdw(metric, grid, tol),
        "scalar_flag" => classify_scalar_flag(metric, grid, tol),
        "isotropic_s" => classify_isotropic_s(metric, grid, tol),
        "isotropic_mean_berwald" => isotropic_mean_berwald_check(metric, grid, tol),
        _ => {
            let ab = metric.as_ab().ok_or_else(|| {
                Error::Invalid("lemma_cs0 needs an (alpha, beta)-metric".into())
            })?;
            let xs: Vec<Vec<f64>> = grid.points.iter().map(|p| p.x.clone()).collect();
            lemma_cs0_check(&ab.a, &ab.beta, &xs, tol)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::finsler::GenericMetric;
    use crate::grid::GridSpec;

    #[test]
    fn riemannian_passes_berwald_and_douglas() {
        let f = parse_expr("sqrt(y1^2 + exp(2*x1)*y2^2)", 2).unwrap();
        let m = FinslerMetric::Generic(GenericMetric::new(f).unwrap());
        let g = SampleGrid::build(&m, &GridSpec::cube(2, 0.5).with_counts(8, 8)).unwrap();
        let b = classify_berwald(&m, &g, BERWALD_TOL);
        assert!(b.passed() && b.residual < 1e-10, "{b:?}");
        assert_eq!(b.samples, 64);
        assert!(classify_douglas(&m, &g, DOUGLAS_TOL).passed());
        let s = classify_scalar_flag(&m, &g, SCALAR_FLAG_TOL);
        assert!(s.passed());
        assert!((s.scalar("K_min").unwrap() + 1.0).abs() < 1e-8);
    }

    #[test]
    fn failing_evaluations_fail_the_report() {
        // F is undefined for x1 < 0
        let f = parse_expr("sqrt(x1)*sqrt(y1^2+y2^2)", 2).unwrap();
        let m = FinslerMetric::Generic(GenericMetric::new(f).unwrap());
        let g = SampleGrid::build(&m, &GridSpec::cube(2, 0.5).with_counts(8, 8)).unwrap();
        let r = classify_berwald(&m, &g, BERWALD_TOL);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.failures > 0);
    }
}

