//! Berwald, Douglas and Riemann curvature, built from spray jets.
//!
//! Everything here starts from `G^i` as jets in `(x, y)`. Tensors are kept as
//! jets too, so horizontal derivatives (which need `∂_x` and `∂_y` of the
//! components) are available without another pass through `F`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::finsler::{ABMetric, FinslerMetric, SprayRoute};
use crate::jet::{series, Caps, Jet, Layout};
use crate::tensor::{Slot, TensorValue};

/// Tensor components as jets.
#[derive(Clone, Debug)]
pub struct TensorJet {
    pub dim: usize,
    pub valence: Vec<Slot>,
    pub comps: Vec<Jet>,
}

fn unflatten(k: usize, dim: usize, idx: &mut [usize]) {
    let mut r = k;
    for s in (0..idx.len()).rev() {
        idx[s] = r % dim;
        r /= dim;
    }
}

impl TensorJet {
    pub fn from_fn(dim: usize, valence: &[Slot], mut f: impl FnMut(&[usize]) -> Jet) -> TensorJet {
        let rank = valence.len();
        let mut idx = vec![0usize; rank];
        let comps = (0..dim.pow(rank as u32))
            .map(|k| {
                unflatten(k, dim, &mut idx);
                f(&idx)
            })
            .collect();
        TensorJet {
            dim,
            valence: valence.to_vec(),
            comps,
        }
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[idx.iter().fold(0, |acc, &i| acc * self.dim + i)]
    }

    pub fn caps(&self) -> Caps {
        self.comps[0].layout().caps()
    }

    pub fn value(&self) -> TensorValue {
        TensorValue {
            dim: self.dim,
            valence: self.valence.clone(),
            data: self.comps.iter().map(Jet::value).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> TensorJet {
        TensorJet {
            dim: self.dim,
            valence: self.valence.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn project(&self, layout: &Arc<Layout>) -> TensorJet {
        self.map(|j| j.project(layout))
    }
}

fn layout_for(n: usize, caps: Caps) -> Arc<Layout> {
    Layout::get(n, n, caps)
}

/// `G^i` at a point as jets, by default with one `x`-order and five `y`-orders.
/// That budget covers `B`, `E`, `D`, their contracted horizontal derivatives,
/// `R^i_k`, `R^i_jkl` and the Bianchi-type identities.
#[derive(Clone, Debug)]
pub struct Spray {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub route: SprayRoute,
    pub g: Vec<Jet>,
}

pub const SPRAY_CAPS: Caps = Caps {
    max_x: 1,
    max_y: 5,
    max_total: 5,
};

impl Spray {
    pub fn new(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<Spray> {
        Spray::with_route(metric, x, y, metric.default_route())
    }

    pub fn with_route(metric: &FinslerMetric, x: &[f64], y: &[f64], route: SprayRoute) -> Result<Spray> {
        Spray::with_caps(metric, x, y, route, SPRAY_CAPS)
    }

    pub fn with_caps(
        metric: &FinslerMetric,
        x: &[f64],
        y: &[f64],
        route: SprayRoute,
        caps: Caps,
    ) -> Result<Spray> {
        let g = metric.spray_jets(x, y, caps, route)?;
        Ok(Spray {
            n: metric.dim(),
            x: x.to_vec(),
            y: y.to_vec(),
            route,
            g,
        })
    }

    fn caps(&self) -> Caps {
        self.g[0].layout().caps()
    }

    fn need(&self, caps: Caps, what: &str) -> Result<()> {
        let c = self.caps();
        if c.max_x < caps.max_x || c.max_y < caps.max_y || c.max_total < caps.max_total {
            return Err(Error::Invalid(format!(
                "{what} needs spray jets with caps {caps:?}, have {c:?}"
            )));
        }
        Ok(())
    }

    pub fn value(&self) -> TensorValue {
        TensorValue::from_fn(self.n, &[Slot::Up], |i| self.g[i[0]].value())
    }

    /// `N^i_j = ∂G^i/∂y^j` projected to `layout`.
    fn nonlinear(&self, layout: &Arc<Layout>) -> Vec<Vec<Jet>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.g[i].dy(j).project(layout)).collect())
            .collect()
    }

    /// `N^i_j` at the point.
    pub fn connection(&self) -> TensorValue {
        TensorValue::from_fn(self.n, &[Slot::Up, Slot::Down], |i| self.g[i[0]].dy(i[1]).value())
    }

    /// `B^i_jkl = ∂³G^i/∂y^j∂y^k∂y^l`, as jets with caps `(x, y − 3, total − 3)`.
    pub fn berwald_jet(&self) -> Result<TensorJet> {
        self.need(Caps::new(0, 3, 3), "the Berwald curvature")?;
        let n = self.n;
        let dg: Vec<Vec<Vec<Jet>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let gj = self.g[i].dy(j);
                        (0..n).map(|k| gj.dy(k)).collect()
                    })
                    .collect()
            })
            .collect();
        Ok(TensorJet::from_fn(n, &[Slot::Up, Slot::Down, Slot::Down, Slot::Down], |i| {
            dg[i[0]][i[1].min(i[2])][i[1].max(i[2])].dy(i[3])
        }))
    }

    /// `E_jk = ½ B^m_jkm`.
    pub fn mean_berwald_jet(&self) -> Result<TensorJet> {
        let b = self.berwald_jet()?;
        Ok(mean_of(&b))
    }

    /// Douglas curvature
    /// `D^i_jkl = B^i_jkl − 2/(n+1) (E_jk δ^i_l + E_kl δ^i_j + E_lj δ^i_k + E_jk,l y^i)`.
    pub fn douglas_jet(&self) -> Result<TensorJet> {
        self.need(Caps::new(0, 4, 4), "the Douglas curvature")?;
        let b = self.berwald_jet()?;
        let e = mean_of(&b);
        let layout = e.get(&[0, 0]).dy(0).layout().clone();
        let b = b.project(&layout);
        let e_l = TensorJet::from_fn(self.n, &[Slot::Down; 3], |i| e.get(&[i[0], i[1]]).dy(i[2]));
        let e = e.project(&layout);
        let (_, ys) = Jet::coordinates(&layout, &self.x, &self.y);
        let c = 2.0 / (self.n as f64 + 1.0);
        Ok(TensorJet::from_fn(
            self.n,
            &[Slot::Up, Slot::Down, Slot::Down, Slot::Down],
            |ix| {
                let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
                let mut corr = e_l.get(&[j, k, l]) * &ys[i];
                if i == l {
                    corr += e.get(&[j, k]);
                }
                if i == j {
                    corr += e.get(&[k, l]);
                }
                if i == k {
                    corr += e.get(&[l, j]);
                }
                b.get(ix) - &corr.scale(c)
            },
        ))
    }

    /// `R^i_k = 2 ∂G^i/∂x^k − y^j ∂²G^i/∂x^j∂y^k + 2 G^j ∂²G^i/∂y^j∂y^k − N^i_j N^j_k`,
    /// as jets with caps `(0, 3, 3)` (or less if the spray is shallower).
    pub fn riemann_ry_jet(&self) -> Result<TensorJet> {
        self.need(Caps::new(1, 2, 3), "the Riemann curvature")?;
        let c = self.caps();
        let oy = (c.max_y as usize - 2).min(c.max_total as usize - 2);
        let layout = layout_for(self.n, Caps::new(0, oy, oy));
        let n = self.n;
        let (_, ys) = Jet::coordinates(&layout, &self.x, &self.y);
        let nl = self.nonlinear(&layout);
        let g: Vec<Jet> = self.g.iter().map(|j| j.project(&layout)).collect();
        Ok(TensorJet::from_fn(n, &[Slot::Up, Slot::Down], |ik| {
            let (i, k) = (ik[0], ik[1]);
            let gi = &self.g[i];
            let gik = gi.dy(k);
            let mut r = gi.dx(k).project(&layout).scale(2.0);
            for j in 0..n {
                r -= &ys[j] * &gik.dx(j).project(&layout);
                r += (&g[j] * &gi.dy(j).dy(k).project(&layout)).scale(2.0);
                r -= &nl[i][j] * &nl[j][k];
            }
            r
        }))
    }

    pub fn riemann_ry(&self) -> Result<TensorValue> {
        Ok(self.riemann_ry_jet()?.value())
    }

    /// `R^i_jkl = ⅓ (∂²R^i_k/∂y^j∂y^l − ∂²R^i_l/∂y^j∂y^k)`, as jets with caps `(0, 1, 1)`.
    pub fn riemann_full_jet(&self) -> Result<TensorJet> {
        self.need(Caps::new(1, 5, 5), "the full Riemann tensor")?;
        let r = self.riemann_ry_jet()?;
        let layout = layout_for(self.n, Caps::new(0, 1, 1));
        Ok(TensorJet::from_fn(
            self.n,
            &[Slot::Up, Slot::Down, Slot::Down, Slot::Down],
            |ix| {
                let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
                let a = r.get(&[i, k]).dy(j).dy(l);
                let b = r.get(&[i, l]).dy(j).dy(k);
                (a - b).scale(1.0 / 3.0).project(&layout)
            },
        ))
    }

    pub fn riemann_full(&self) -> Result<TensorValue> {
        Ok(self.riemann_full_jet()?.value())
    }

    /// Contracted horizontal derivative `T|m y^m` for the Berwald connection:
    /// `y^m ∂_m T − 2 G^u ∂_{y^u} T + Σ_up T^{..u..} N^i_u − Σ_down T_{..u..} N^u_j`.
    /// `t` needs at least one `x`- and one `y`-order; the result loses one of each.
    pub fn hderiv_contract(&self, t: &TensorJet) -> Result<TensorJet> {
        let c = t.caps();
        if c.max_x == 0 || c.max_y == 0 {
            return Err(Error::Invalid(
                "horizontal derivative needs one x- and one y-order in the tensor".into(),
            ));
        }
        let layout = layout_for(
            self.n,
            Caps::new(
                c.max_x as usize - 1,
                c.max_y as usize - 1,
                c.max_total as usize - 1,
            ),
        );
        let n = self.n;
        let (_, ys) = Jet::coordinates(&layout, &self.x, &self.y);
        let g: Vec<Jet> = self.g.iter().map(|j| j.project(&layout)).collect();
        let nl = self.nonlinear(&layout);
        let tp = t.project(&layout);
        let mut jdx = vec![0usize; t.rank()];
        Ok(TensorJet::from_fn(n, &t.valence, |idx| {
            let comp = t.get(idx);
            let mut acc = Jet::zero(&layout);
            for m in 0..n {
                acc += &ys[m] * &comp.dx(m).project(&layout);
                acc -= (&g[m] * &comp.dy(m).project(&layout)).scale(2.0);
            }
            for (slot, kind) in t.valence.iter().enumerate() {
                jdx.copy_from_slice(idx);
                for u in 0..n {
                    jdx[slot] = u;
                    match kind {
                        Slot::Up => acc += tp.get(&jdx) * &nl[idx[slot]][u],
                        Slot::Down => acc -= tp.get(&jdx) * &nl[u][idx[slot]],
                    }
                }
            }
            acc
        }))
    }

    /// Full horizontal derivative `T|m` at the point, with the derivative index last:
    /// `δ_m T + Σ_up G^i_{um} T^{..u..} − Σ_down G^u_{jm} T_{..u..}`,
    /// where `δ_m = ∂_m − N^u_m ∂_{y^u}` and `G^i_{jk} = ∂²G^i/∂y^j∂y^k`.
    pub fn hderiv(&self, t: &TensorJet) -> Result<TensorValue> {
        let c = t.caps();
        if c.max_x == 0 || c.max_y == 0 {
            return Err(Error::Invalid(
                "horizontal derivative needs one x- and one y-order in the tensor".into(),
            ));
        }
        self.need(Caps::new(0, 2, 2), "the Berwald connection")?;
        let n = self.n;
        let nv = self.connection();
        let gamma = TensorValue::from_fn(n, &[Slot::Up, Slot::Down, Slot::Down], |i| {
            self.g[i[0]].dy(i[1]).dy(i[2]).value()
        });
        let tv = t.value();
        let mut valence = t.valence.clone();
        valence.push(Slot::Down);
        let rank = t.rank();
        let mut jdx = vec![0usize; rank];
        Ok(TensorValue::from_fn(n, &valence, |full| {
            let (idx, m) = (&full[..rank], full[rank]);
            let comp = t.get(idx);
            let mut acc = comp.dx(m).value();
            for u in 0..n {
                acc -= nv.get(&[u, m]) * comp.dy(u).value();
            }
            for (slot, kind) in t.valence.iter().enumerate() {
                jdx.copy_from_slice(idx);
                for u in 0..n {
                    jdx[slot] = u;
                    match kind {
                        Slot::Up => acc += gamma.get(&[idx[slot], u, m]) * tv.get(&jdx),
                        Slot::Down => acc -= gamma.get(&[u, idx[slot], m]) * tv.get(&jdx),
                    }
                }
            }
            acc
        }))
    }

    /// `H_jk = E_jk|m y^m`.
    pub fn h_tensor(&self) -> Result<TensorValue> {
        self.need(Caps::new(1, 4, 4), "the H tensor")?;
        let e = self.mean_berwald_jet()?;
        Ok(self.hderiv_contract(&e)?.value())
    }
}

fn mean_of(b: &TensorJet) -> TensorJet {
    let n = b.dim;
    TensorJet::from_fn(n, &[Slot::Down, Slot::Down], |jk| {
        let mut acc = Jet::zero(b.comps[0].layout());
        for m in 0..n {
            acc += b.get(&[m, jk[0], jk[1], m]);
        }
        acc.scale(0.5)
    })
}

/// A spray with just enough orders for `B` at the point.
fn shallow(metric: &FinslerMetric, x: &[f64], y: &[f64], oy: usize) -> Result<Spray> {
    Spray::with_caps(metric, x, y, metric.default_route(), Caps::new(0, oy, oy))
}

pub fn berwald(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    Ok(shallow(metric, x, y, 3)?.berwald_jet()?.value())
}

pub fn mean_berwald(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    Ok(shallow(metric, x, y, 3)?.mean_berwald_jet()?.value())
}

pub fn douglas(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    Ok(shallow(metric, x, y, 4)?.douglas_jet()?.value())
}

pub fn riemann_ry(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    let s = Spray::with_caps(metric, x, y, metric.default_route(), Caps::new(1, 2, 3))?;
    s.riemann_ry()
}

pub fn riemann_full(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    Spray::new(metric, x, y)?.riemann_full()
}

pub fn h_tensor(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    Spray::with_caps(metric, x, y, metric.default_route(), Caps::new(1, 4, 4))?.h_tensor()
}

/// Landsberg curvature `L_jkl = −½ y_m B^m_jkl` with `y_m = g_mi y^i`.
pub fn landsberg(metric: &FinslerMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    let b = berwald(metric, x, y)?;
    let pack = metric.fundamental_pack(x, y)?;
    let n = metric.dim();
    Ok(TensorValue::from_fn(n, &[Slot::Down; 3], |i| {
        -0.5 * (0..n)
            .map(|m| pack.y_low[m] * b.get(&[m, i[0], i[1], i[2]]))
            .sum::<f64>()
    }))
}

/// Tolerance on `r_ij` and `s_j` for the closed-form Berwald curvature.
pub const KILLING_TOL: f64 = 1e-8;

/// Berwald curvature of an (α,β)-metric whose `β` is Killing of constant
/// length (`r_ij = 0`, `s_j = 0`). Then `G^i = G^i_α + α Q s^i_0` and
///
/// `B^i_jkl = s^i_0 (αQ)_{jkl} + s^i_l (αQ)_{jk} + s^i_k (αQ)_{jl} + s^i_j (αQ)_{kl}`,
///
/// evaluated from closed-form `y`-derivatives of `α` and `s = β/α` in plain
/// floating point. It shares no code with the jet route beyond the invariants of `β`.
pub fn berwald_ab_reduced(m: &ABMetric, x: &[f64], y: &[f64]) -> Result<TensorValue> {
    let n = m.a.dim();
    let inv = crate::geometry::beta_invariants(&m.a, &m.beta, x, y)?;
    let r_max = inv.r_ij.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let s_max = inv.s_j.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if r_max > KILLING_TOL || s_max > KILLING_TOL {
        return Err(Error::Invalid(format!(
            "closed-form Berwald curvature needs r_ij = 0 and s_j = 0 (max |r_ij| = {r_max:.3e}, max |s_j| = {s_max:.3e})"
        )));
    }
    let a = m.a.matrix(x)?;
    let b = m.beta.values(x)?;
    let yl: Vec<f64> = (0..n).map(|j| (0..n).map(|k| a[j][k] * y[k]).sum()).collect();
    let al2: f64 = (0..n).map(|j| yl[j] * y[j]).sum();
    let al = al2.sqrt();
    let beta: f64 = (0..n).map(|j| b[j] * y[j]).sum();
    let s = beta / al;
    m.check_s(s)?;

    let a1: Vec<f64> = yl.iter().map(|v| v / al).collect();
    let big = |j: usize, k: usize| al2 * a[j][k] - yl[j] * yl[k];
    let a2 = |j: usize, k: usize| big(j, k) / al.powi(3);
    let a3 = |j: usize, k: usize, l: usize| {
        -(big(j, k) * yl[l] + big(j, l) * yl[k] + big(k, l) * yl[j]) / al.powi(5)
    };
    let s1: Vec<f64> = (0..n).map(|j| (b[j] - s * a1[j]) / al).collect();
    let s2 = |j: usize, k: usize| -(s1[k] * a1[j] + s * a2(j, k) + s1[j] * a1[k]) / al;
    let s3 = |j: usize, k: usize, l: usize| {
        -(s2(k, l) * a1[j]
            + s1[k] * a2(j, l)
            + s1[l] * a2(j, k)
            + s * a3(j, k, l)
            + s2(j, l) * a1[k]
            + s1[j] * a2(k, l)
            + s2(j, k) * a1[l])
            / al
    };

    // Q(s0 + t) as a series, for Q', Q'', Q'''
    let c = m.phi.taylor(s, 4)?;
    let phi = series::from_coeffs(&c);
    let dphi = series::from_coeffs(&series::derivative_coeffs(&c));
    let sv = series::variable(s, 3);
    let den = &phi.project(sv.layout()) - &(&sv * &dphi.project(sv.layout()));
    let q = dphi.project(sv.layout()).div_or(&den, "phi - s phi'")?;
    let qc = series::coeffs(&q);
    let (q0, q1, q2, q3) = (qc[0], qc[1], 2.0 * qc[2], 6.0 * qc[3]);

    let qy1 = |j: usize| q1 * s1[j];
    let qy2 = |j: usize, k: usize| q2 * s1[j] * s1[k] + q1 * s2(j, k);
    let qy3 = |j: usize, k: usize, l: usize| {
        q3 * s1[j] * s1[k] * s1[l]
            + q2 * (s2(j, k) * s1[l] + s2(j, l) * s1[k] + s2(k, l) * s1[j])
            + q1 * s3(j, k, l)
    };
    let f2 = |j: usize, k: usize| a2(j, k) * q0 + a1[j] * qy1(k) + a1[k] * qy1(j) + al * qy2(j, k);
    let f3 = |j: usize, k: usize, l: usize| {
        a3(j, k, l) * q0
            + a2(j, k) * qy1(l)
            + a2(j, l) * qy1(k)
            + a2(k, l) * qy1(j)
            + a1[j] * qy2(k, l)
            + a1[k] * qy2(j, l)
            + a1[l] * qy2(j, k)
            + al * qy3(j, k, l)
    };
    Ok(TensorValue::from_fn(
        n,
        &[Slot::Up, Slot::Down, Slot::Down, Slot::Down],
        |ix| {
            let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
            inv.s_i0[i] * f3(j, k, l)
                + inv.s_up[i][l] * f2(j, k)
                + inv.s_up[i][k] * f2(j, l)
                + inv.s_up[i][j] * f2(k, l)
        },
    ))
}

/// Residuals of structural identities at one point, each normalised by the
/// size of the terms involved.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResiduals {
    /// `B^i_jkl y^l`
    pub berwald_y: f64,
    /// `D^m_jkm`
    pub douglas_trace: f64,
    /// `D^i_jkl y^l`
    pub douglas_y: f64,
    /// `R^i_k y^k`
    pub riemann_y: f64,
    /// `B^i_jkl|m − B^i_jmk|l − R^i_jml,k`
    pub bianchi: f64,
    /// `R^i_jkl + R^i_jlk`
    pub riemann_antisym: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.berwald_y,
            self.douglas_trace,
            self.douglas_y,
            self.riemann_y,
            self.bianchi,
            self.riemann_antisym,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel(res: f64, scale: f64) -> f64 {
    res / (1.0 + scale)
}

pub fn identity_residuals(sp: &Spray) -> Result<IdentityResiduals> {
    let n = sp.n;
    let y = &sp.y;
    let b = sp.berwald_jet()?;
    let bv = b.value();
    let d = sp.douglas_jet()?.value();
    let rk = sp.riemann_ry()?;
    let rf = sp.riemann_full_jet()?;
    let rv = rf.value();
    let bh = sp.hderiv(&b.project(&layout_for(n, Caps::new(1, 1, 2))))?;

    let mut by = 0.0f64;
    let mut dy = 0.0f64;
    let mut dt = 0.0f64;
    let mut bi = 0.0f64;
    let mut anti = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut t = 0.0;
                for m in 0..n {
                    t += d.get(&[m, i, j, m]);
                }
                dt = dt.max(t.abs());
                let mut sb = 0.0;
                let mut sd = 0.0;
                for l in 0..n {
                    sb += bv.get(&[i, j, k, l]) * y[l];
                    sd += d.get(&[i, j, k, l]) * y[l];
                    anti = anti.max((rv.get(&[i, j, k, l]) + rv.get(&[i, j, l, k])).abs());
                    for m in 0..n {
                        let lhs = bh.get(&[i, j, k, l, m]) - bh.get(&[i, j, m, k, l]);
                        let rhs = rf.get(&[i, j, m, l]).dy(k).value();
                        bi = bi.max((lhs - rhs).abs());
                    }
                }
                by = by.max(sb.abs());
                dy = dy.max(sd.abs());
            }
        }
    }
    let mut ry = 0.0f64;
    for i in 0..n {
        let r: f64 = (0..n).map(|k| rk.get(&[i, k]) * y[k]).sum();
        ry = ry.max(r.abs());
    }
    Ok(IdentityResiduals {
        berwald_y: rel(by, bv.max_abs()),
        douglas_trace: rel(dt, d.max_abs()),
        douglas_y: rel(dy, d.max_abs()),
        riemann_y: rel(ry, rk.max_abs()),
        bianchi: rel(bi, bh.max_abs()),
        riemann_antisym: rel(anti, rv.max_abs()),
    })
}
