//! Riemannian data `α = √(a_ij y^i y^j)` and the invariants of a 1-form `β = b_i y^i`.
//!
//! Everything here depends on `x` only. The jet versions work in an
//! `x`-only layout and are embedded into the caller's mixed layout at the end.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expression};
use crate::jet::{Caps, Jet, Layout};
use crate::linalg::{cholesky, jet_inverse, mat_values, Mat};
use crate::tensor::{Slot, TensorValue};

fn x_only(e: &Expression, what: &str) -> Result<()> {
    if e.depends_on_y() {
        return Err(Error::Invalid(format!("{what} must not depend on y: {e}")));
    }
    if let Some(p) = e.parameters().first() {
        return Err(Error::UnboundParameter(p.clone()));
    }
    Ok(())
}

fn x_layout(n: usize, order_x: usize) -> Arc<Layout> {
    Layout::get(n, n, Caps::new(order_x, 0, order_x))
}

fn eval_x(e: &Expression, layout: &Arc<Layout>, x: &[f64]) -> Result<Jet> {
    let (xs, ys) = Jet::coordinates(layout, x, &vec![0.0; x.len()]);
    e.eval_jet(&xs, &ys, &HashMap::new())
}

/// Symmetric matrix of component expressions `a_ij(x)`.
#[derive(Clone, Debug)]
pub struct RiemannMetric {
    n: usize,
    a: Vec<Vec<Expression>>,
}

impl RiemannMetric {
    /// Builds from the upper triangle of `rows` (`rows[i][j]` for `j ≥ i`);
    /// the lower triangle, if given, must print identically.
    pub fn new(rows: Vec<Vec<Expression>>) -> Result<RiemannMetric> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("metric must be a square matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.dim() != n {
                    return Err(Error::Invalid(format!(
                        "a_{}{} parsed for dimension {}, metric has {n}",
                        i + 1,
                        j + 1,
                        e.dim()
                    )));
                }
                x_only(e, "a_ij")?;
                if j < i && e.to_string() != rows[j][i].to_string() {
                    return Err(Error::Invalid(format!(
                        "a_{}{} and a_{}{} differ",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let a = (0..n)
            .map(|i| (0..n).map(|j| rows[i.min(j)][i.max(j)].clone()).collect())
            .collect();
        Ok(RiemannMetric { n, a })
    }

    /// Parses an `n×n` table of strings.
    pub fn parse(rows: &[Vec<&str>]) -> Result<RiemannMetric> {
        let n = rows.len();
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|t| parse_expr(t, n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        RiemannMetric::new(parsed)
    }

    pub fn euclidean(n: usize) -> RiemannMetric {
        let rows: Vec<Vec<&str>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }).collect())
            .collect();
        RiemannMetric::parse(&rows).expect("constant metric")
    }

    pub fn diagonal(entries: &[&str]) -> Result<RiemannMetric> {
        let n = entries.len();
        let rows: Vec<Vec<&str>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { entries[i] } else { "0" }).collect())
            .collect();
        RiemannMetric::parse(&rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn component(&self, i: usize, j: usize) -> &Expression {
        &self.a[i][j]
    }

    /// `a_ij(x)`, checked positive definite.
    pub fn matrix(&self, x: &[f64]) -> Result<Mat> {
        let no_y = vec![0.0; self.n];
        let m = self
            .a
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| e.eval(x, &no_y, &HashMap::new()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Mat>>()?;
        if cholesky(&m).is_none() {
            return Err(Error::NotPositiveDefinite {
                what: "a_ij".into(),
                x: x.to_vec(),
            });
        }
        Ok(m)
    }

    /// `α(x, y)`.
    pub fn norm(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let m = self.matrix(x)?;
        Ok(quad_form(&m, y).sqrt())
    }

    /// Jets of `a_ij`, `a^ij` and `Γ^i_jk` with `order_x` x-derivatives.
    pub fn jets(&self, x: &[f64], order_x: usize) -> Result<AlphaJets> {
        let n = self.n;
        let ext = x_layout(n, order_x + 1);
        let lay = x_layout(n, order_x);
        let a_ext = self
            .a
            .iter()
            .map(|r| r.iter().map(|e| eval_x(e, &ext, x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if cholesky(&mat_values(&a_ext)).is_none() {
            return Err(Error::NotPositiveDefinite {
                what: "a_ij".into(),
                x: x.to_vec(),
            });
        }
        // da[k][i][j] = ∂_k a_ij
        let da: Vec<Vec<Vec<Jet>>> = (0..n)
            .map(|k| {
                a_ext
                    .iter()
                    .map(|r| r.iter().map(|v| v.dx(k).project(&lay)).collect())
                    .collect()
            })
            .collect();
        let a: Vec<Vec<Jet>> = a_ext
            .iter()
            .map(|r| r.iter().map(|v| v.project(&lay)).collect())
            .collect();
        let a_inv = jet_inverse(&a, "a_ij")?;
        let zero = Jet::zero(&lay);
        let mut gamma = vec![vec![vec![zero.clone(); n]; n]; n];
        // lowered Γ_ljk first, then raise
        let mut low = vec![vec![vec![zero.clone(); n]; n]; n];
        for l in 0..n {
            for j in 0..n {
                for k in j..n {
                    let v = (&da[j][l][k] + &da[k][l][j] - &da[l][j][k]).scale(0.5);
                    low[l][j][k] = v.clone();
                    low[l][k][j] = v;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let mut acc = zero.clone();
                    for l in 0..n {
                        acc += &a_inv[i][l] * &low[l][j][k];
                    }
                    gamma[i][j][k] = acc.clone();
                    gamma[i][k][j] = acc;
                }
            }
        }
        Ok(AlphaJets { a, a_inv, gamma })
    }
}

fn quad_form(m: &Mat, y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        for j in 0..y.len() {
            s += m[i][j] * y[i] * y[j];
        }
    }
    s
}

/// Component expressions `b_i(x)`.
#[derive(Clone, Debug)]
pub struct OneForm {
    n: usize,
    b: Vec<Expression>,
}

impl OneForm {
    pub fn new(b: Vec<Expression>) -> Result<OneForm> {
        let n = b.len();
        for e in &b {
            if e.dim() != n {
                return Err(Error::Invalid("1-form dimension mismatch".into()));
            }
            x_only(e, "b_i")?;
        }
        Ok(OneForm { n, b })
    }

    pub fn parse(comps: &[&str]) -> Result<OneForm> {
        let n = comps.len();
        OneForm::new(
            comps
                .iter()
                .map(|t| parse_expr(t, n))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn component(&self, i: usize) -> &Expression {
        &self.b[i]
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let no_y = vec![0.0; self.n];
        self.b
            .iter()
            .map(|e| e.eval(x, &no_y, &HashMap::new()))
            .collect()
    }

    /// Jets of the invariants of `β` relative to `alpha`, with the same
    /// x-order as `alpha`.
    pub fn jets(&self, x: &[f64], alpha: &AlphaJets) -> Result<BetaJets> {
        let n = self.n;
        if n != alpha.a.len() {
            return Err(Error::Invalid("1-form and metric dimensions differ".into()));
        }
        let lay = alpha.a[0][0].layout().clone();
        let order_x = lay.caps().max_x as usize;
        let ext = x_layout(n, order_x + 1);
        let b_ext = self
            .b
            .iter()
            .map(|e| eval_x(e, &ext, x))
            .collect::<Result<Vec<_>>>()?;
        let b: Vec<Jet> = b_ext.iter().map(|v| v.project(&lay)).collect();
        let zero = Jet::zero(&lay);
        // b_{i|j} = ∂_j b_i − b_l Γ^l_ij
        let mut cov = vec![vec![zero.clone(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = b_ext[i].dx(j).project(&lay);
                for l in 0..n {
                    acc -= &b[l] * &alpha.gamma[l][i][j];
                }
                cov[i][j] = acc;
            }
        }
        let mut r = vec![vec![zero.clone(); n]; n];
        let mut s = vec![vec![zero.clone(); n]; n];
        for i in 0..n {
            for j in 0..n {
                r[i][j] = (&cov[i][j] + &cov[j][i]).scale(0.5);
                s[i][j] = (&cov[i][j] - &cov[j][i]).scale(0.5);
            }
        }
        let raise = |v: &[Jet]| -> Vec<Jet> {
            (0..n)
                .map(|i| {
                    let mut acc = zero.clone();
                    for j in 0..n {
                        acc += &alpha.a_inv[i][j] * &v[j];
                    }
                    acc
                })
                .collect()
        };
        let b_up = raise(&b);
        let mut b2 = zero.clone();
        for i in 0..n {
            b2 += &b[i] * &b_up[i];
        }
        // s^i_j = a^{ik} s_kj
        let mut s_up = vec![vec![zero.clone(); n]; n];
        for j in 0..n {
            let col: Vec<Jet> = (0..n).map(|k| s[k][j].clone()).collect();
            for (i, v) in raise(&col).into_iter().enumerate() {
                s_up[i][j] = v;
            }
        }
        let contract = |m: &[Vec<Jet>]| -> Vec<Jet> {
            (0..n)
                .map(|j| {
                    let mut acc = zero.clone();
                    for i in 0..n {
                        acc += &b_up[i] * &m[i][j];
                    }
                    acc
                })
                .collect()
        };
        let r_j = contract(&r);
        let s_j = contract(&s);
        Ok(BetaJets {
            b,
            b_up,
            b2,
            cov,
            r,
            s,
            s_up,
            r_j,
            s_j,
        })
    }
}

/// `x`-only jets of the Riemannian data.
#[derive(Clone, Debug)]
pub struct AlphaJets {
    pub a: Vec<Vec<Jet>>,
    pub a_inv: Vec<Vec<Jet>>,
    /// `gamma[i][j][k] = Γ^i_jk`.
    pub gamma: Vec<Vec<Vec<Jet>>>,
}

impl AlphaJets {
    pub fn embed(&self, target: &Arc<Layout>) -> AlphaJets {
        AlphaJets {
            a: embed2(&self.a, target),
            a_inv: embed2(&self.a_inv, target),
            gamma: self.gamma.iter().map(|m| embed2(m, target)).collect(),
        }
    }
}

/// `x`-only jets of the 1-form invariants. Indices are raised with `a`.
#[derive(Clone, Debug)]
pub struct BetaJets {
    pub b: Vec<Jet>,
    pub b_up: Vec<Jet>,
    pub b2: Jet,
    /// `cov[i][j] = b_{i|j}`.
    pub cov: Vec<Vec<Jet>>,
    pub r: Vec<Vec<Jet>>,
    pub s: Vec<Vec<Jet>>,
    /// `s_up[i][j] = s^i_j`.
    pub s_up: Vec<Vec<Jet>>,
    pub r_j: Vec<Jet>,
    pub s_j: Vec<Jet>,
}

impl BetaJets {
    pub fn embed(&self, target: &Arc<Layout>) -> BetaJets {
        BetaJets {
            b: embed1(&self.b, target),
            b_up: embed1(&self.b_up, target),
            b2: self.b2.embed(target),
            cov: embed2(&self.cov, target),
            r: embed2(&self.r, target),
            s: embed2(&self.s, target),
            s_up: embed2(&self.s_up, target),
            r_j: embed1(&self.r_j, target),
            s_j: embed1(&self.s_j, target),
        }
    }
}

fn embed1(v: &[Jet], t: &Arc<Layout>) -> Vec<Jet> {
    v.iter().map(|j| j.embed(t)).collect()
}

fn embed2(m: &[Vec<Jet>], t: &Arc<Layout>) -> Vec<Vec<Jet>> {
    m.iter().map(|r| embed1(r, t)).collect()
}

fn values1(v: &[Jet]) -> Vec<f64> {
    v.iter().map(|j| j.value()).collect()
}

/// Christoffel symbols `Γ^i_jk` of `a` at `x`.
pub fn levi_civita(a: &RiemannMetric, x: &[f64]) -> Result<TensorValue> {
    let j = a.jets(x, 0)?;
    Ok(TensorValue::from_fn(
        a.dim(),
        &[Slot::Up, Slot::Down, Slot::Down],
        |i| j.gamma[i[0]][i[1]][i[2]].value(),
    ))
}

/// `G^i_α = ½ Γ^i_jk y^j y^k`.
pub fn spray_alpha(a: &RiemannMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    let g = levi_civita(a, x)?;
    let n = a.dim();
    Ok(TensorValue::from_fn(n, &[Slot::Up], |i| {
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                s += g.get(&[i[0], j, k]) * y[j] * y[k];
            }
        }
        0.5 * s
    }))
}

/// Covariant-derivative invariants of `β` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaInvariants {
    pub r_ij: Mat,
    pub s_ij: Mat,
    /// `s_up[i][j] = s^i_j`.
    pub s_up: Mat,
    pub r_j: Vec<f64>,
    pub s_j: Vec<f64>,
    pub r_0: f64,
    pub s_0: f64,
    pub r_00: f64,
    /// `s^i_0`.
    pub s_i0: Vec<f64>,
    pub b2: f64,
    pub b: Vec<f64>,
    pub b_up: Vec<f64>,
}

pub fn beta_invariants(
    a: &RiemannMetric,
    beta: &OneForm,
    x: &[f64],
    y: &[f64],
) -> Result<BetaInvariants> {
    let aj = a.jets(x, 0)?;
    let bj = beta.jets(x, &aj)?;
    let n = a.dim();
    let r_ij = mat_values(&bj.r);
    let s_ij = mat_values(&bj.s);
    let s_up = mat_values(&bj.s_up);
    let r_j = values1(&bj.r_j);
    let s_j = values1(&bj.s_j);
    let dot = |v: &[f64]| v.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let r_0 = dot(&r_j);
    let s_0 = dot(&s_j);
    let r_00 = quad_form(&r_ij, y);
    let s_i0 = (0..n).map(|i| dot(&s_up[i])).collect();
    Ok(BetaInvariants {
        r_ij,
        s_ij,
        s_up,
        r_j,
        s_j,
        r_0,
        s_0,
        r_00,
        s_i0,
        b2: bj.b2.value(),
        b: values1(&bj.b),
        b_up: values1(&bj.b_up),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface() -> RiemannMetric {
        RiemannMetric::diagonal(&["1", "exp(2*x1)"]).unwrap()
    }

    #[test]
    fn christoffels_of_diagonal_surface() {
        let g = levi_civita(&surface(), &[0.3, -0.2]).unwrap();
        let e = (0.6f64).exp();
        assert!((g.get(&[0, 1, 1]) + e).abs() < 1e-14);
        assert!((g.get(&[1, 0, 1]) - 1.0).abs() < 1e-14);
        assert!((g.get(&[1, 1, 0]) - 1.0).abs() < 1e-14);
        assert_eq!(g.get(&[0, 0, 0]), 0.0);
    }

    #[test]
    fn spray_of_surface() {
        let g = spray_alpha(&surface(), &[0.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((g.get(&[0]) + 0.5).abs() < 1e-15);
        assert_eq!(g.get(&[1]), 0.0);
    }

    #[test]
    fn surface_form_invariants() {
        let beta = OneForm::parse(&["1", "0"]).unwrap();
        let x = [0.4, 1.0];
        let inv = beta_invariants(&surface(), &beta, &x, &[0.3, 0.7]).unwrap();
        let a = surface().matrix(&x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = a[i][j] - inv.b[i] * inv.b[j];
                assert!((inv.r_ij[i][j] - expect).abs() < 1e-14);
                assert_eq!(inv.s_ij[i][j], 0.0);
            }
        }
        assert!((inv.b2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_y_dependence_and_indefinite() {
        assert!(RiemannMetric::diagonal(&["1", "y1"]).is_err());
        let m = RiemannMetric::diagonal(&["1", "x1"]).unwrap();
        assert!(matches!(
            m.matrix(&[-1.0, 0.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let asym = RiemannMetric::parse(&[vec!["1", "x1"], vec!["x2", "1"]]);
        assert!(asym.is_err());
    }
}
