//! Finsler metrics, their fundamental tensor and the spray coefficients `G^i`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{DomainError, Error, Result};
use crate::expr::Expression;
use crate::geometry::{OneForm, RiemannMetric};
use crate::jet::{Caps, Jet, Layout};
use crate::linalg::{jet_inverse, spd_inverse, Mat};
use crate::phi::PhiFamily;
use crate::tensor::{Slot, TensorValue};

/// `F = α φ(β/α)`.
#[derive(Clone, Debug)]
pub struct ABMetric {
    pub a: RiemannMetric,
    pub beta: OneForm,
    pub phi: PhiFamily,
}

/// `F` given directly as an expression in `(x, y)`.
#[derive(Clone, Debug)]
pub struct GenericMetric {
    pub f: Expression,
}

#[derive(Clone, Debug)]
pub enum FinslerMetric {
    AB(ABMetric),
    Generic(GenericMetric),
}

/// Which construction of `G^i` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SprayRoute {
    /// `¼ g^{il}([F²]_{x^k y^l} y^k − [F²]_{x^l})`; works for every metric.
    Generic,
    /// The (α,β) formula from `Q, Θ, Ψ` and the invariants of `β`.
    AlphaBeta,
    /// The (α,β) formula with the sign of the `(−2Qαs_0 + r_00)` term
    /// flipped. Exists only so that verification can show it catches a
    /// faulty assembly.
    #[doc(hidden)]
    FaultyAlphaBeta,
}

fn dom(what: &'static str) -> impl Fn(DomainError) -> Error {
    move |e| Error::Domain {
        op: e.op,
        arg: e.arg,
        context: what.to_string(),
    }
}

impl ABMetric {
    pub fn new(a: RiemannMetric, beta: OneForm, phi: PhiFamily) -> Result<ABMetric> {
        if a.dim() != beta.dim() {
            return Err(Error::Invalid(format!(
                "metric has dimension {}, 1-form has {}",
                a.dim(),
                beta.dim()
            )));
        }
        Ok(ABMetric { a, beta, phi })
    }

    /// `‖β_x‖_α`.
    pub fn b_norm(&self, x: &[f64]) -> Result<f64> {
        let aj = self.a.jets(x, 0)?;
        Ok(self.beta.jets(x, &aj)?.b2.value().sqrt())
    }

    /// `s = β/α` at `(x, y)`.
    pub fn s_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let alpha = self.a.norm(x, y)?;
        let b = self.beta.values(x)?;
        let beta: f64 = b.iter().zip(y).map(|(u, v)| u * v).sum();
        Ok(beta / alpha)
    }

    pub(crate) fn check_s(&self, s: f64) -> Result<()> {
        if s.abs() >= self.phi.b0 || !self.phi.defined_at(s) {
            return Err(Error::ExtremalDirection {
                s: s.abs(),
                limit: self.phi.b0,
            });
        }
        Ok(())
    }

    /// Jets of `α`, `β` and `s` in `layout`, with the `x`-only data embedded.
    fn base_jets(&self, x: &[f64], y: &[f64], layout: &Arc<Layout>) -> Result<AbBase> {
        let n = x.len();
        let ox = layout.caps().max_x as usize;
        let aj = self.a.jets(x, ox)?;
        let bj = self.beta.jets(x, &aj)?;
        let aj = aj.embed(layout);
        let bj = bj.embed(layout);
        let (_, ys) = Jet::coordinates(layout, x, y);
        let mut alpha2 = Jet::zero(layout);
        let mut beta = Jet::zero(layout);
        for i in 0..n {
            for j in 0..n {
                alpha2 += &aj.a[i][j] * &(&ys[i] * &ys[j]);
            }
            beta += &bj.b[i] * &ys[i];
        }
        let alpha = alpha2.sqrt().map_err(dom("alpha"))?;
        let s = beta.div_or(&alpha, "alpha")?;
        self.check_s(s.value())?;
        Ok(AbBase {
            ys,
            alpha,
            s,
            aj,
            bj,
        })
    }

    fn f2_jet(&self, x: &[f64], y: &[f64], layout: &Arc<Layout>) -> Result<Jet> {
        let base = self.base_jets(x, y, layout)?;
        let phi = self.phi.compose(&base.s, 0)?.remove(0);
        let f = &base.alpha * &phi;
        Ok(&f * &f)
    }

    /// `G^i` by the (α,β) formula, as jets in `layout`.
    fn spray_jets(
        &self,
        x: &[f64],
        y: &[f64],
        layout: &Arc<Layout>,
        faulty: bool,
    ) -> Result<Vec<Jet>> {
        let n = x.len();
        let AbBase {
            ys,
            alpha,
            s,
            aj,
            bj,
        } = self.base_jets(x, y, layout)?;
        let p = self.phi.compose(&s, 2)?;
        let (f, f1, f2) = (&p[0], &p[1], &p[2]);
        let f_sf1 = f - &(&s * f1);
        let q = f1.div_or(&f_sf1, "Q: phi - s phi'")?;
        let reg = &f_sf1 + &(&(-(&s * &s) + &bj.b2) * f2);
        let theta_num = f * f1 - &s * &(f * f2 + f1 * f1);
        let theta = theta_num.div_or(&(f * &reg).scale(2.0), "Theta: phi [(phi - s phi') + (b^2 - s^2) phi'']")?;
        let psi = f2.div_or(&reg.scale(2.0), "Psi: (phi - s phi') + (b^2 - s^2) phi''")?;
        let zero = Jet::zero(layout);
        let mut s_0 = zero.clone();
        let mut r_00 = zero.clone();
        for i in 0..n {
            s_0 += &bj.s_j[i] * &ys[i];
            for j in 0..n {
                r_00 += &bj.r[i][j] * &(&ys[i] * &ys[j]);
            }
        }
        let mut bracket = &r_00 - &(&(&q * &alpha) * &s_0).scale(2.0);
        if faulty {
            bracket = -bracket;
        }
        let theta_over_alpha = theta.div_or(&alpha, "alpha")?;
        let alpha_q = &alpha * &q;
        (0..n)
            .map(|i| {
                let mut g_alpha = zero.clone();
                let mut s_i0 = zero.clone();
                for j in 0..n {
                    s_i0 += &bj.s_up[i][j] * &ys[j];
                    for k in 0..n {
                        g_alpha += &aj.gamma[i][j][k] * &(&ys[j] * &ys[k]);
                    }
                }
                let tail = &theta_over_alpha * &ys[i] + &psi * &bj.b_up[i];
                Ok(g_alpha.scale(0.5) + &alpha_q * &s_i0 + &bracket * &tail)
            })
            .collect()
    }
}

struct AbBase {
    ys: Vec<Jet>,
    alpha: Jet,
    s: Jet,
    aj: crate::geometry::AlphaJets,
    bj: crate::geometry::BetaJets,
}

impl GenericMetric {
    pub fn new(f: Expression) -> Result<GenericMetric> {
        if let Some(p) = f.parameters().first() {
            return Err(Error::UnboundParameter(p.clone()));
        }
        Ok(GenericMetric { f })
    }
}

/// `F`, `g_ij`, `g^ij`, `y_i`, `h_ij` and `h^i_j` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalPack {
    pub f: f64,
    pub g: Mat,
    pub g_inv: Mat,
    pub y_low: Vec<f64>,
    pub h: Mat,
    /// `h_mixed[i][j] = h^i_j`.
    pub h_mixed: Mat,
}

impl FinslerMetric {
    pub fn dim(&self) -> usize {
        match self {
            FinslerMetric::AB(m) => m.a.dim(),
            FinslerMetric::Generic(m) => m.f.dim(),
        }
    }

    pub fn as_ab(&self) -> Option<&ABMetric> {
        match self {
            FinslerMetric::AB(m) => Some(m),
            FinslerMetric::Generic(_) => None,
        }
    }

    fn check_point(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let n = self.dim();
        if x.len() != n || y.len() != n {
            return Err(Error::Invalid(format!(
                "point has dimension ({}, {}), metric has {n}",
                x.len(),
                y.len()
            )));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::Invalid("F is not differentiable at y = 0".into()));
        }
        Ok(())
    }

    pub fn f_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x, y)?;
        let v = match self {
            FinslerMetric::AB(m) => {
                let alpha = m.a.norm(x, y)?;
                let b = m.beta.values(x)?;
                let beta: f64 = b.iter().zip(y).map(|(u, v)| u * v).sum();
                let s = beta / alpha;
                m.check_s(s)?;
                alpha * m.phi.value(s)?
            }
            FinslerMetric::Generic(m) => m.f.eval(x, y, &HashMap::new())?,
        };
        if !(v > 0.0) {
            return Err(Error::Invalid(format!("F = {v} is not positive")).at_point(x, y));
        }
        Ok(v)
    }

    /// Jet of `F²` in `layout`.
    pub fn f2_jet_in(&self, x: &[f64], y: &[f64], layout: &Arc<Layout>) -> Result<Jet> {
        self.check_point(x, y)?;
        let r = match self {
            FinslerMetric::AB(m) => m.f2_jet(x, y, layout),
            FinslerMetric::Generic(m) => {
                let (xs, ys) = Jet::coordinates(layout, x, y);
                m.f.eval_jet(&xs, &ys, &HashMap::new()).map(|f| &f * &f)
            }
        };
        r.map_err(|e| e.at_point(x, y))
    }

    pub fn f2_jet(&self, x: &[f64], y: &[f64], caps: Caps) -> Result<Jet> {
        let n = self.dim();
        self.f2_jet_in(x, y, &Layout::get(n, n, caps))
    }

    pub fn fundamental_pack(&self, x: &[f64], y: &[f64]) -> Result<FundamentalPack> {
        let n = self.dim();
        let f2 = self.f2_jet(x, y, Caps::split(0, 2))?;
        let g: Mat = (0..n)
            .map(|i| (0..n).map(|j| 0.5 * f2.dy(i).dy(j).value()).collect())
            .collect();
        let g_inv = spd_inverse(&g).ok_or_else(|| Error::NotPositiveDefinite {
            what: "g_ij (strong convexity)".into(),
            x: x.to_vec(),
        })?;
        let ff = f2.value();
        let y_low: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| g[i][j] * y[j]).sum())
            .collect();
        let h = (0..n)
            .map(|i| (0..n).map(|j| g[i][j] - y_low[i] * y_low[j] / ff).collect())
            .collect();
        let h_mixed = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| f64::from(u8::from(i == j)) - y[i] * y_low[j] / ff)
                    .collect()
            })
            .collect();
        Ok(FundamentalPack {
            f: ff.sqrt(),
            g,
            g_inv,
            y_low,
            h,
            h_mixed,
        })
    }

    /// `C_ijk = ¼ ∂³F²/∂y^i∂y^j∂y^k`.
    pub fn cartan_torsion(&self, x: &[f64], y: &[f64]) -> Result<TensorValue> {
        let n = self.dim();
        let f2 = self.f2_jet(x, y, Caps::split(0, 3))?;
        Ok(TensorValue::from_fn(n, &[Slot::Down; 3], |i| {
            0.25 * f2.dy(i[0]).dy(i[1]).dy(i[2]).value()
        }))
    }

    /// Spray coefficients as jets with the given caps.
    pub fn spray_jets(&self, x: &[f64], y: &[f64], caps: Caps, route: SprayRoute) -> Result<Vec<Jet>> {
        self.check_point(x, y)?;
        let n = self.dim();
        let layout = Layout::get(n, n, caps);
        let r = match (self, route) {
            (_, SprayRoute::Generic) => self.spray_generic_jets(x, y, &layout),
            (FinslerMetric::AB(m), SprayRoute::AlphaBeta) => m.spray_jets(x, y, &layout, false),
            (FinslerMetric::AB(m), SprayRoute::FaultyAlphaBeta) => m.spray_jets(x, y, &layout, true),
            (FinslerMetric::Generic(_), _) => Err(Error::Invalid(
                "the (alpha, beta) spray formula needs an (alpha, beta)-metric".into(),
            )),
        };
        r.map_err(|e| e.at_point(x, y))
    }

    /// The natural route: the (α,β) formula for (α,β)-metrics, generic otherwise.
    pub fn default_route(&self) -> SprayRoute {
        match self {
            FinslerMetric::AB(_) => SprayRoute::AlphaBeta,
            FinslerMetric::Generic(_) => SprayRoute::Generic,
        }
    }

    fn spray_generic_jets(&self, x: &[f64], y: &[f64], layout: &Arc<Layout>) -> Result<Vec<Jet>> {
        let n = self.dim();
        let c = layout.caps();
        let wide = Caps::new(
            c.max_x as usize + 1,
            c.max_y as usize + 2,
            c.max_total as usize + 2,
        );
        let f2 = self.f2_jet(x, y, wide)?;
        let (_, ys) = Jet::coordinates(layout, x, y);
        let g: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                let di = f2.dy(i);
                (0..n).map(|j| di.dy(j).project(layout).scale(0.5)).collect()
            })
            .collect();
        let g_inv = jet_inverse(&g, "g_ij")?;
        let dx: Vec<Jet> = (0..n).map(|k| f2.dx(k)).collect();
        let rhs: Vec<Jet> = (0..n)
            .map(|l| {
                let mut acc = -dx[l].project(layout);
                for k in 0..n {
                    acc += &dx[k].dy(l).project(layout) * &ys[k];
                }
                acc
            })
            .collect();
        Ok((0..n)
            .map(|i| {
                let mut acc = Jet::zero(layout);
                for l in 0..n {
                    acc += &g_inv[i][l] * &rhs[l];
                }
                acc.scale(0.25)
            })
            .collect())
    }

    fn spray_value(&self, x: &[f64], y: &[f64], route: SprayRoute) -> Result<TensorValue> {
        let g = self.spray_jets(x, y, Caps::split(0, 0), route)?;
        Ok(TensorValue::from_fn(self.dim(), &[Slot::Up], |i| g[i[0]].value()))
    }

    pub fn spray_generic(&self, x: &[f64], y: &[f64]) -> Result<TensorValue> {
        self.spray_value(x, y, SprayRoute::Generic)
    }

    pub fn spray_ab(&self, x: &[f64], y: &[f64]) -> Result<TensorValue> {
        self.spray_value(x, y, SprayRoute::AlphaBeta)
    }

    pub fn spray(&self, x: &[f64], y: &[f64]) -> Result<TensorValue> {
        self.spray_value(x, y, self.default_route())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::geometry::spray_alpha;

    fn surface_ab(phi: PhiFamily, b: &[&str]) -> FinslerMetric {
        let a = RiemannMetric::diagonal(&["1", "exp(2*x1)"]).unwrap();
        FinslerMetric::AB(ABMetric::new(a, OneForm::parse(b).unwrap(), phi).unwrap())
    }

    #[test]
    fn riemannian_generic_spray_matches_christoffels() {
        let f = parse_expr("sqrt(y1^2 + exp(2*x1)*y2^2)", 2).unwrap();
        let m = FinslerMetric::Generic(GenericMetric::new(f).unwrap());
        let x = [0.3, -0.4];
        let y = [0.7, 1.1];
        let g = m.spray_generic(&x, &y).unwrap();
        let a = RiemannMetric::diagonal(&["1", "exp(2*x1)"]).unwrap();
        let ga = spray_alpha(&a, &x, &y).unwrap();
        assert!(g.max_abs_diff(&ga) < 1e-12);
    }

    #[test]
    fn ab_spray_matches_generic() {
        let m = surface_ab(PhiFamily::square(), &["0.3*cos(x2)", "0.2*x1*exp(x1)"]);
        let x = [0.1, 0.4];
        let y = [0.8, -0.5];
        let a = m.spray_ab(&x, &y).unwrap();
        let g = m.spray_generic(&x, &y).unwrap();
        assert!(a.max_abs_diff(&g) < 1e-12 * (1.0 + g.max_abs()), "{a:?} vs {g:?}");
        let bad = m
            .spray_jets(&x, &y, Caps::split(0, 0), SprayRoute::FaultyAlphaBeta)
            .unwrap();
        assert!((bad[0].value() - g.get(&[0])).abs() > 1e-3);
    }

    #[test]
    fn fundamental_pack_invariants() {
        let m = surface_ab(PhiFamily::matsumoto(), &["0.2", "0.1*exp(x1)"]);
        let x = [0.2, 0.1];
        let y = [0.3, 0.9];
        let p = m.fundamental_pack(&x, &y).unwrap();
        let gyy: f64 = (0..2).map(|i| p.y_low[i] * y[i]).sum();
        assert!((gyy - p.f * p.f).abs() < 1e-12);
        for i in 0..2 {
            let hy: f64 = (0..2).map(|j| p.h_mixed[i][j] * y[j]).sum();
            assert!(hy.abs() < 1e-12);
        }
        assert!((m.f_value(&x, &y).unwrap() - p.f).abs() < 1e-14);
    }

    #[test]
    fn extremal_direction_is_reported() {
        let m = surface_ab(PhiFamily::matsumoto(), &["0.9", "0"]);
        match m.f_value(&[0.0, 0.0], &[1.0, 0.0]) {
            Err(Error::ExtremalDirection { .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
