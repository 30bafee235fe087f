//! The function `φ` of an (α,β)-metric `F = α φ(β/α)` and the quantities
//! `Q, Θ, Ψ, Δ, Φ` built from it.
//!
//! Two families are defined through `Q := φ'/(φ − sφ')` rather than `φ`.
//! Solving that definition for `φ'` gives `φ'/φ = Q/(1 + sQ)`, so
//! `φ(s) = φ(0) exp ∫₀ˢ Q(t)/(1 + tQ(t)) dt`. The `uni` family inserts
//! `Q = ks + q√(b²−s²)`; the `odeP` family integrates the isotropic-S
//! condition as a second-order ODE for `Q` alongside `ln φ`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{series, Jet};
use crate::ode::{dopri5, DenseSolution};
use crate::quad::gauss_kronrod;
use crate::report::{ClassifierReport, Verdict, Witness};

#[derive(Clone, Debug)]
pub enum PhiKind {
    /// `c₁√(1 + c₂s²) + c₃s`.
    RandersType { c1: f64, c2: f64, c3: f64 },
    /// `(1 + s)²`.
    Square,
    /// `1/(1 − s)`.
    Matsumoto,
    Uni { c: f64, k: f64, q: f64, b: f64 },
    OdeNumeric(Arc<OdePhi>),
}

/// A `φ` together with its regularity radius `b₀`.
#[derive(Clone, Debug)]
pub struct PhiFamily {
    pub kind: PhiKind,
    pub b0: f64,
}

/// `Q, Θ, Ψ, Δ` and the derivatives of `Q` at `(s, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qtpd {
    pub s: f64,
    pub b: f64,
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
    pub theta: f64,
    pub psi: f64,
    pub delta: f64,
}

impl Qtpd {
    /// `Φ = −(Q − sQ')[nΔ + 1 + sQ] − (b² − s²)(1 + sQ)Q''`.
    pub fn phi_capital(&self, n: usize) -> f64 {
        let Qtpd { s, b, q, q1, q2, delta, .. } = *self;
        -(q - s * q1) * (n as f64 * delta + 1.0 + s * q) - (b * b - s * s) * (1.0 + s * q) * q2
    }
}

impl PhiFamily {
    pub fn randers_type(c1: f64, c2: f64, c3: f64) -> Result<PhiFamily> {
        if !(c1 > 0.0) {
            return Err(Error::Invalid(format!("randers-type needs c1 > 0, got {c1}")));
        }
        let mut f = PhiFamily {
            kind: PhiKind::RandersType { c1, c2, c3 },
            b0: f64::INFINITY,
        };
        f.b0 = regularity_radius(&f);
        Ok(f)
    }

    pub fn square() -> PhiFamily {
        PhiFamily {
            kind: PhiKind::Square,
            b0: 1.0,
        }
    }

    pub fn matsumoto() -> PhiFamily {
        PhiFamily {
            kind: PhiKind::Matsumoto,
            b0: 0.5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PhiKind::RandersType { .. } => "randers",
            PhiKind::Square => "square",
            PhiKind::Matsumoto => "matsumoto",
            PhiKind::Uni { .. } => "uni",
            PhiKind::OdeNumeric(_) => "odeP",
        }
    }

    /// Whether `φ` can be evaluated at `s` (wider than the regular range for
    /// closed forms).
    pub fn defined_at(&self, s: f64) -> bool {
        match &self.kind {
            PhiKind::RandersType { c2, .. } => 1.0 + c2 * s * s > 0.0,
            PhiKind::Square => true,
            PhiKind::Matsumoto => s < 1.0,
            PhiKind::Uni { b, .. } => s.abs() < *b,
            PhiKind::OdeNumeric(o) => s >= o.lo && s <= o.hi,
        }
    }

    /// Normalized Taylor coefficients `φ^(k)(s)/k!` for `k = 0..=order`.
    pub fn taylor(&self, s: f64, order: usize) -> Result<Vec<f64>> {
        if !self.defined_at(s) {
            return Err(Error::ExtremalDirection {
                s: s.abs(),
                limit: self.b0,
            });
        }
        let t = series::variable(s, order);
        let j = match &self.kind {
            PhiKind::RandersType { c1, c2, c3 } => {
                let r = (&t * &t * *c2 + 1.0).sqrt().map_err(dom("randers sqrt"))?;
                r * *c1 + &t * *c3
            }
            PhiKind::Square => {
                let u = &t + 1.0;
                &u * &u
            }
            PhiKind::Matsumoto => (-&t + 1.0).recip().map_err(dom("matsumoto"))?,
            PhiKind::Uni { c, k, q, b } => {
                let g = uni_integrand_series(*k, *q, *b, s, order)?;
                let i0 = uni_log_integral(*k, *q, *b, s)?;
                series::integrate(&g, i0).exp() * *c
            }
            PhiKind::OdeNumeric(o) => {
                let y = o.taylor_state(s, order)?;
                y[2].exp()
            }
        };
        let mut c = series::coeffs(&j);
        c.truncate(order + 1);
        Ok(c)
    }

    /// `[φ, φ', …, φ^(order)]` at `s`.
    pub fn phi_jet(&self, s: f64, order: usize) -> Result<Vec<f64>> {
        let c = self.taylor(s, order)?;
        let mut fact = 1.0;
        Ok(c
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    fact *= k as f64;
                }
                v * fact
            })
            .collect())
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(self.taylor(s, 0)?[0])
    }

    /// `φ^(d) ∘ s` for `d = 0..=max_deriv`, where `s` is a jet.
    pub fn compose(&self, s: &Jet, max_deriv: usize) -> Result<Vec<Jet>> {
        let order = s.layout().caps().max_total as usize;
        let mut c = self.taylor(s.value(), order + max_deriv)?;
        let mut out = Vec::with_capacity(max_deriv + 1);
        for _ in 0..=max_deriv {
            out.push(s.compose(&c));
            c = series::derivative_coeffs(&c);
        }
        Ok(out)
    }

    /// `Q, Θ, Ψ, Δ` at `(s, b)`.
    pub fn q_theta_psi(&self, s: f64, b: f64) -> Result<Qtpd> {
        let c = self.taylor(s, 3)?;
        let p = series::from_coeffs(&c);
        let dp = series::from_coeffs(&series::derivative_coeffs(&c));
        let t = series::variable(s, 2);
        let den = &p - &t * &dp;
        if den.value() == 0.0 || !den.value().is_finite() {
            return Err(Error::Singular {
                what: "Q".into(),
                detail: format!("phi - s phi' = {} at s = {s}", den.value()),
            });
        }
        let qs = dp.try_div(&den).map_err(dom("Q"))?;
        let qc = series::coeffs(&qs);
        let (q, q1, q2) = (qc[0], qc[1], 2.0 * qc[2]);
        let (f, f1, f2) = (c[0], c[1], 2.0 * c[2]);
        let reg = (f - s * f1) + (b * b - s * s) * f2;
        if reg == 0.0 || f == 0.0 {
            return Err(Error::Singular {
                what: if f == 0.0 { "Theta" } else { "Psi" }.into(),
                detail: format!("(phi - s phi') + (b^2 - s^2) phi'' = {reg} at s = {s}, b = {b}"),
            });
        }
        Ok(Qtpd {
            s,
            b,
            q,
            q1,
            q2,
            theta: (f * f1 - s * (f * f2 + f1 * f1)) / (2.0 * f * reg),
            psi: 0.5 * f2 / reg,
            delta: 1.0 + s * q + (b * b - s * s) * q1,
        })
    }

    pub fn phi_capital(&self, s: f64, b: f64, n: usize) -> Result<f64> {
        Ok(self.q_theta_psi(s, b)?.phi_capital(n))
    }

    /// `Q(s) = φ'/(φ − sφ')` as a plain value.
    pub fn q(&self, s: f64) -> Result<f64> {
        let d = self.phi_jet(s, 1)?;
        let den = d[0] - s * d[1];
        if den == 0.0 {
            return Err(Error::Singular {
                what: "Q".into(),
                detail: format!("phi - s phi' = 0 at s = {s}"),
            });
        }
        Ok(d[1] / den)
    }
}

fn dom(what: &'static str) -> impl Fn(crate::error::DomainError) -> Error {
    move |e| Error::Domain {
        op: e.op,
        arg: e.arg,
        context: what.to_string(),
    }
}

fn uni_integrand(k: f64, q: f64, b: f64, t: f64) -> Result<f64> {
    let r = (b * b - t * t).max(0.0).sqrt();
    let den = 1.0 + k * t * t + q * t * r;
    if !(den > 0.0) {
        return Err(Error::Domain {
            op: "div",
            arg: den,
            context: "uni integrand denominator".into(),
        });
    }
    Ok((k * t + q * r) / den)
}

fn uni_log_integral(k: f64, q: f64, b: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(gauss_kronrod(|t| uni_integrand(k, q, b, t), 0.0, s, 1e-12)?.value)
}

/// Series of `(kt + q√(b²−t²))/(1 + kt² + qt√(b²−t²))` at `s`.
fn uni_integrand_series(k: f64, q: f64, b: f64, s: f64, order: usize) -> Result<Jet> {
    let t = series::variable(s, order.saturating_sub(1));
    let r = (-(&t * &t) + b * b).sqrt().map_err(dom("uni sqrt(b^2 - s^2)"))?;
    let num = &t * k + &r * q;
    let den = &t * &t * k + &t * &r * q + 1.0;
    num.try_div(&den).map_err(dom("uni integrand denominator"))
}

pub fn phi_uni(c: f64, k: f64, q: f64, b: f64) -> Result<PhiFamily> {
    if !(c > 0.0) || !(b > 0.0) || q < 0.0 || !k.is_finite() || !q.is_finite() {
        return Err(Error::Invalid(format!(
            "uni needs c > 0, q >= 0, b > 0 (got c={c}, k={k}, q={q}, b={b})"
        )));
    }
    // the integrand denominator must stay positive on (-b, b)
    for i in 0..=400 {
        let t = b * (-1.0 + 2.0 * i as f64 / 400.0) * 0.999_999;
        uni_integrand(k, q, b, t)?;
    }
    Ok(PhiFamily {
        kind: PhiKind::Uni { c, k, q, b },
        b0: b,
    })
}

/// Numerical solution of the isotropic-S condition with `φ(0) = 1`.
#[derive(Clone, Debug)]
pub struct OdePhi {
    pub k: f64,
    pub n: usize,
    pub b: f64,
    pub q0: f64,
    pub q0p: f64,
    pub lo: f64,
    pub hi: f64,
    forward: DenseSolution,
    backward: DenseSolution,
    pub warning: Option<String>,
}

/// Right-hand side for the state `(Q, Q', ln φ)` over any scalar type.
fn ode_rhs(k: f64, n: usize, b: f64, s: &Jet, y: &[Jet]) -> std::result::Result<[Jet; 3], crate::error::DomainError> {
    let (q, q1, l) = (&y[0], &y[1], &y[2]);
    let d = -(s * s) + b * b;
    let one_sq = s * q + 1.0;
    let delta = &one_sq + &d * q1;
    let phi = l.exp();
    let nf = n as f64;
    let lhs = -((q - s * q1) * (&delta * nf + &one_sq));
    let src = (phi * &delta * &delta).try_div(&d)? * (2.0 * (nf + 1.0) * k);
    let q2 = (lhs + src).try_div(&(&d * &one_sq))?;
    let dl = q.try_div(&one_sq)?;
    Ok([q1.clone(), q2, dl])
}

impl OdePhi {
    fn state(&self, s: f64) -> Option<Vec<f64>> {
        if s >= 0.0 {
            self.forward.eval(s)
        } else {
            self.backward.eval(s)
        }
    }

    /// Taylor series of `(Q, Q', ln φ)` at `s`, from the interpolated state
    /// by Picard iteration on truncated series.
    fn taylor_state(&self, s: f64, order: usize) -> Result<Vec<Jet>> {
        let z = self.state(s).ok_or(Error::ExtremalDirection {
            s: s.abs(),
            limit: if s >= 0.0 { self.hi } else { -self.lo },
        })?;
        let t = series::variable(s, order + 1);
        let mut y: Vec<Jet> = z.iter().map(|&v| Jet::constant(t.layout(), v)).collect();
        for _ in 0..=order + 1 {
            let f = ode_rhs(self.k, self.n, self.b, &t, &y).map_err(dom("odeP right-hand side"))?;
            y = f
                .iter()
                .zip(&z)
                .map(|(fi, &zi)| series::integrate(&fi.project(t.layout()), zi).project(t.layout()))
                .collect();
        }
        Ok(y)
    }

    /// Residual of the isotropic-S equation at `s`, normalized by the size
    /// of its terms.
    pub fn p_residual(&self, phi: &PhiFamily, s: f64) -> Result<f64> {
        let t = phi.q_theta_psi(s, self.b)?;
        let f = phi.value(s)?;
        let nf = self.n as f64;
        let rhs = -2.0 * (nf + 1.0) * self.k * f * t.delta * t.delta / (self.b * self.b - s * s);
        let lhs = t.phi_capital(self.n);
        Ok((lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs())))
    }
}

/// Integrates the isotropic-S condition from `s = 0` towards `±0.95 b`.
pub fn solve_isotropic_ode(k: f64, n: usize, b: f64, q0: f64, q0p: f64) -> Result<PhiFamily> {
    if !(b > 0.0) || n < 2 {
        return Err(Error::Invalid(format!("odeP needs b > 0 and n >= 2 (got b={b}, n={n})")));
    }
    let rhs = |s: f64, y: &[f64], d: &mut [f64]| -> Result<()> {
        let t = series::variable(s, 0);
        let yj: Vec<Jet> = y.iter().map(|&v| Jet::constant(t.layout(), v)).collect();
        let f = ode_rhs(k, n, b, &t, &yj).map_err(dom("odeP right-hand side"))?;
        for i in 0..3 {
            d[i] = f[i].value();
            if !d[i].is_finite() {
                return Err(Error::Ode("non-finite derivative".into()));
            }
        }
        Ok(())
    };
    let end = 0.95 * b;
    let y0 = [q0, q0p, 0.0];
    let forward = dopri5(rhs, 0.0, &y0, end, 1e-10, 1e-10)?;
    let backward = dopri5(rhs, 0.0, &y0, -end, 1e-10, 1e-10)?;
    let hi = forward.end();
    let lo = backward.end();
    let warning = match (forward.truncated_at, backward.truncated_at) {
        (None, None) => None,
        _ => Some(format!(
            "odeP solution truncated to [{lo}, {hi}] (requested [-{end}, {end}])"
        )),
    };
    let o = OdePhi {
        k,
        n,
        b,
        q0,
        q0p,
        lo,
        hi,
        forward,
        backward,
        warning,
    };
    // solutions of the isotropic-S equation may blow up before ±b; the
    // regular radius is the symmetric interval actually covered
    Ok(PhiFamily {
        b0: b.min(hi).min(-lo),
        kind: PhiKind::OdeNumeric(Arc::new(o)),
    })
}

/// `m` equally spaced points on `[-b, b]`.
pub fn s_grid(b: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| -b + 2.0 * b * i as f64 / (m - 1) as f64)
        .collect()
}

/// Checks `φ > 0` and `φ − sφ' + (b² − s²)φ'' > 0` on `grid ⊂ [−b, b]`.
///
/// Labels: `regular` if both hold everywhere; `almost-regular` if they hold
/// at every interior sample and fail or are undefined only at `s = ±b`;
/// `irregular` otherwise. The residual is the negative part of the
/// smallest margin.
pub fn regularity_check(phi: &PhiFamily, b: f64, grid: &[f64]) -> ClassifierReport {
    let mut min_margin = f64::INFINITY;
    let mut worst_s = 0.0;
    let mut interior_ok = true;
    let mut boundary_ok = true;
    let mut failures = 0;
    let mut notes = Vec::new();
    for &s in grid {
        let at_edge = (s.abs() - b).abs() <= 1e-12 * b.max(1.0);
        let margin = phi.phi_jet(s, 2).map(|d| d[0].min(d[0] - s * d[1] + (b * b - s * s) * d[2]));
        let ok = match margin {
            Ok(m) if m.is_finite() => {
                if m < min_margin {
                    min_margin = m;
                    worst_s = s;
                }
                m > 0.0
            }
            Ok(_) | Err(_) => {
                failures += 1;
                notes.push(format!("singular at s = {s:.6}"));
                false
            }
        };
        if !ok {
            if at_edge {
                boundary_ok = false;
            } else {
                interior_ok = false;
            }
        }
    }
    let label = if interior_ok && boundary_ok {
        "regular"
    } else if interior_ok {
        "almost-regular"
    } else {
        "irregular"
    };
    let mut r = ClassifierReport::new("regularity", (-min_margin).max(0.0), 1e-12);
    r.verdict = if label == "regular" {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    r.label = Some(label.into());
    r.samples = grid.len();
    r.failures = failures;
    r.notes = notes;
    r.witness = Some(Witness {
        x: vec![],
        y: vec![worst_s],
    });
    r.with_scalar("min_margin", min_margin).with_scalar("b", b)
}

/// Largest `b` (up to 10) at which `φ` stays regular on `[−b, b]`.
fn regularity_radius(phi: &PhiFamily) -> f64 {
    let regular = |b: f64| regularity_check(phi, b, &s_grid(b, 201)).label.as_deref() == Some("regular");
    if regular(10.0) {
        return 10.0;
    }
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if regular(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Result of fitting `c₁√(1 + c₂s²) + c₃s` to a `φ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandersFit {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Sup deviation over the fit grid; infinite if the fit failed.
    pub residual: f64,
}

impl RandersFit {
    pub fn is_randers_type(&self) -> bool {
        self.residual < 1e-8
    }
}

/// Least-squares fit on 41 equally spaced points of `[−0.9 b₀, 0.9 b₀]`.
///
/// The odd part of `φ` determines `c₃` linearly; the even part squared is
/// linear in `(c₁², c₁²c₂)`, which seeds a Gauss-Newton refinement of the
/// full nonlinear fit.
pub fn randers_type_fit(phi: &PhiFamily, b0: f64) -> RandersFit {
    let failed = RandersFit {
        c1: f64::NAN,
        c2: f64::NAN,
        c3: f64::NAN,
        residual: f64::INFINITY,
    };
    let ss = s_grid(0.9 * b0, 41);
    let vals: Option<Vec<f64>> = ss.iter().map(|&s| phi.value(s).ok()).collect();
    let Some(vals) = vals else { return failed };
    let m = ss.len();
    let mut so = 0.0;
    let mut oo = 0.0;
    let (mut a11, mut a12, mut a22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..m {
        let s = ss[i];
        let even = 0.5 * (vals[i] + vals[m - 1 - i]);
        let odd = 0.5 * (vals[i] - vals[m - 1 - i]);
        so += s * odd;
        oo += s * s;
        let e2 = even * even;
        let s2 = s * s;
        a11 += 1.0;
        a12 += s2;
        a22 += s2 * s2;
        r1 += e2;
        r2 += e2 * s2;
    }
    let c3 = if oo > 0.0 { so / oo } else { 0.0 };
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-300 {
        return failed;
    }
    let u = (r1 * a22 - r2 * a12) / det;
    let v = (a11 * r2 - a12 * r1) / det;
    if !(u > 0.0) {
        return failed;
    }
    let mut p = [u.sqrt(), v / u, c3];
    let model = |p: &[f64; 3], s: f64| -> Option<(f64, [f64; 3])> {
        let w = 1.0 + p[1] * s * s;
        if !(w > 0.0) {
            return None;
        }
        let r = w.sqrt();
        Some((p[0] * r + p[2] * s, [r, p[0] * s * s / (2.0 * r), s]))
    };
    for _ in 0..50 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for i in 0..m {
            let Some((f, g)) = model(&p, ss[i]) else { return failed };
            let res = vals[i] - f;
            for a in 0..3 {
                jtr[a] += g[a] * res;
                for c in 0..3 {
                    jtj[a][c] += g[a] * g[c];
                }
            }
        }
        let Some(step) = solve3(jtj, jtr) else { break };
        for a in 0..3 {
            p[a] += step[a];
        }
        if step.iter().all(|d| d.abs() < 1e-15) {
            break;
        }
    }
    let mut residual: f64 = 0.0;
    for i in 0..m {
        match model(&p, ss[i]) {
            Some((f, _)) => residual = residual.max((vals[i] - f).abs()),
            None => return failed,
        }
    }
    if !residual.is_finite() {
        return failed;
    }
    RandersFit {
        c1: p[0],
        c2: p[1],
        c3: p[2],
        residual,
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for p in 0..3 {
        let piv = (p..3).max_by(|&i, &j| a[i][p].abs().total_cmp(&a[j][p].abs()))?;
        if a[piv][p].abs() < 1e-300 {
            return None;
        }
        a.swap(p, piv);
        b.swap(p, piv);
        for r in p + 1..3 {
            let f = a[r][p] / a[p][p];
            for c in p..3 {
                a[r][c] -= f * a[p][c];
            }
            b[r] -= f * b[p];
        }
    }
    let mut x = [0.0; 3];
    for p in (0..3).rev() {
        let mut s = b[p];
        for c in p + 1..3 {
            s -= a[p][c] * x[c];
        }
        x[p] = s / a[p][p];
    }
    Some(x)
}

/// Parses `randers:c1,c2,c3`, `square`, `matsumoto`, `uni:c,k,q,b` or
/// `odeP:k,n,b,Q0,Q0p` (the last two of `odeP` default to 0).
pub fn parse_phi_spec(spec: &str) -> Result<PhiFamily> {
    let spec = spec.trim();
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), a),
        None => (spec, ""),
    };
    let nums: Vec<f64> = if args.trim().is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Invalid(format!("bad number `{}` in phi spec `{spec}`", t.trim())))
            })
            .collect::<Result<_>>()?
    };
    let want = |k: usize| -> Result<()> {
        if nums.len() == k {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "phi spec `{spec}` needs {k} arguments, got {}",
                nums.len()
            )))
        }
    };
    match name {
        "square" => {
            want(0)?;
            Ok(PhiFamily::square())
        }
        "matsumoto" => {
            want(0)?;
            Ok(PhiFamily::matsumoto())
        }
        "randers" => {
            want(3)?;
            PhiFamily::randers_type(nums[0], nums[1], nums[2])
        }
        "uni" => {
            want(4)?;
            phi_uni(nums[0], nums[1], nums[2], nums[3])
        }
        "odeP" => {
            if nums.len() != 3 && nums.len() != 5 {
                return Err(Error::Invalid(format!(
                    "phi spec `{spec}` needs 3 or 5 arguments, got {}",
                    nums.len()
                )));
            }
            let n = nums[1];
            if n.fract() != 0.0 || n < 2.0 {
                return Err(Error::Invalid(format!("odeP dimension must be an integer >= 2, got {n}")));
            }
            let (q0, q0p) = if nums.len() == 5 { (nums[3], nums[4]) } else { (0.0, 0.0) };
            solve_isotropic_ode(nums[0], n as usize, nums[2], q0, q0p)
        }
        other => Err(Error::Invalid(format!("unknown phi family `{other}`"))),
    }
}

impl fmt::Display for PhiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PhiKind::RandersType { c1, c2, c3 } => write!(f, "randers:{c1},{c2},{c3}"),
            PhiKind::Square => write!(f, "square"),
            PhiKind::Matsumoto => write!(f, "matsumoto"),
            PhiKind::Uni { c, k, q, b } => write!(f, "uni:{c},{k},{q},{b}"),
            PhiKind::OdeNumeric(o) => write!(f, "odeP:{},{},{},{},{}", o.k, o.n, o.b, o.q0, o.q0p),
        }
    }
}
