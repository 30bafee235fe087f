//! Truncated multivariate Taylor arithmetic over the `2n` variables
//! `(x^1..x^n, y^1..y^n)`.
//!
//! A [`Jet`] stores normalized Taylor coefficients `f^(α)(p) / α!` for every
//! multi-index `α` admitted by its [`Layout`]. A layout truncates by x-degree,
//! y-degree and total degree separately, so a computation that needs many
//! y-derivatives but only one or two x-derivatives does not pay for the full
//! total-degree simplex.
//!
//! Composition with elementary functions uses the univariate Taylor
//! expansion of the function at the base value together with Horner's
//! scheme in the nilpotent part; every elementary function therefore costs
//! `max_total` jet multiplications.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, LazyLock, Mutex, OnceLock};

use crate::error::{DomainError, Error, Result};

/// Highest total derivative order any layout may carry.
pub const MAX_ORDER: usize = 8;

/// Exponents are packed into 4-bit fields of a `u64` key.
const MAX_VARS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Caps {
    pub max_x: u8,
    pub max_y: u8,
    pub max_total: u8,
}

impl Caps {
    pub fn new(max_x: usize, max_y: usize, max_total: usize) -> Caps {
        Caps {
            max_x: max_x as u8,
            max_y: max_y as u8,
            max_total: max_total as u8,
        }
    }

    /// Caps for "all derivatives with at most `ox` x-orders and `oy` y-orders".
    pub fn split(ox: usize, oy: usize) -> Caps {
        Caps::new(ox, oy, ox + oy)
    }

    fn normalized(self, nx: usize, ny: usize) -> Caps {
        let max_x = if nx == 0 { 0 } else { self.max_x.min(self.max_total) };
        let max_y = if ny == 0 { 0 } else { self.max_y.min(self.max_total) };
        Caps {
            max_x,
            max_y,
            max_total: self.max_total.min(max_x + max_y),
        }
    }

    fn meet(self, other: Caps) -> Caps {
        Caps {
            max_x: self.max_x.min(other.max_x),
            max_y: self.max_y.min(other.max_y),
            max_total: self.max_total.min(other.max_total),
        }
    }
}

struct DerivMap {
    target: Arc<Layout>,
    /// For each target monomial: source index and the factor `β_v + 1`.
    src: Vec<(u32, f64)>,
}

/// Monomial set of a jet plus precomputed multiplication table.
pub struct Layout {
    nx: usize,
    ny: usize,
    caps: Caps,
    monos: Vec<u8>,
    degrees: Vec<(u8, u8)>,
    index: HashMap<u64, u32>,
    prod_start: Vec<u32>,
    prod_jk: Vec<(u32, u32)>,
    derivs: Vec<OnceLock<DerivMap>>,
}

type LayoutKey = (usize, usize, Caps);

static LAYOUTS: LazyLock<Mutex<HashMap<LayoutKey, Arc<Layout>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn pack(exps: &[u8]) -> u64 {
    exps.iter()
        .enumerate()
        .fold(0u64, |k, (i, &e)| k | ((e as u64) << (4 * i)))
}

fn compositions(nvars: usize, max_deg: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, nvars: usize, left: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == nvars {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=left {
            prefix.push(e as u8);
            rec(prefix, nvars, left - e, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(nvars), nvars, max_deg, out);
}

impl Layout {
    pub fn get(nx: usize, ny: usize, caps: Caps) -> Arc<Layout> {
        let caps = caps.normalized(nx, ny);
        assert!(nx + ny <= MAX_VARS, "too many jet variables");
        // univariate series may go further; the 4-bit packing allows 15
        let limit = if nx + ny == 1 { 15 } else { MAX_ORDER };
        assert!(caps.max_total as usize <= limit, "jet order above limit");
        let key = (nx, ny, caps);
        if let Some(l) = LAYOUTS.lock().unwrap().get(&key) {
            return l.clone();
        }
        let layout = Arc::new(Layout::build(nx, ny, caps));
        LAYOUTS
            .lock()
            .unwrap()
            .entry(key)
            .or_insert(layout)
            .clone()
    }

    fn build(nx: usize, ny: usize, caps: Caps) -> Layout {
        let nv = nx + ny;
        let mut xs = Vec::new();
        compositions(nx, caps.max_x as usize, &mut xs);
        let mut ys = Vec::new();
        compositions(ny, caps.max_y as usize, &mut ys);
        let mut all: Vec<(usize, Vec<u8>)> = Vec::new();
        for xp in &xs {
            let dx: usize = xp.iter().map(|&e| e as usize).sum();
            for yp in &ys {
                let dy: usize = yp.iter().map(|&e| e as usize).sum();
                if dx + dy <= caps.max_total as usize {
                    let mut m = xp.clone();
                    m.extend_from_slice(yp);
                    all.push((dx + dy, m));
                }
            }
        }
        // graded, then reverse-lexicographic so that x^1 precedes x^2
        all.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));

        let mut monos = Vec::with_capacity(all.len() * nv);
        let mut degrees = Vec::with_capacity(all.len());
        let mut index = HashMap::with_capacity(all.len());
        let mut keys = Vec::with_capacity(all.len());
        for (i, (_, m)) in all.iter().enumerate() {
            let dx: u8 = m[..nx].iter().sum();
            let dy: u8 = m[nx..].iter().sum();
            monos.extend_from_slice(m);
            degrees.push((dx, dy));
            let k = pack(m);
            index.insert(k, i as u32);
            keys.push(k);
        }

        let len = all.len();
        let mut prod_start = Vec::with_capacity(len + 1);
        let mut prod_jk = Vec::new();
        for i in 0..len {
            prod_start.push(prod_jk.len() as u32);
            let (dxi, dyi) = degrees[i];
            for j in 0..len {
                let (dxj, dyj) = degrees[j];
                let dx = dxi + dxj;
                let dy = dyi + dyj;
                if dx > caps.max_x || dy > caps.max_y || dx + dy > caps.max_total {
                    continue;
                }
                if let Some(&k) = index.get(&(keys[i] + keys[j])) {
                    prod_jk.push((j as u32, k));
                }
            }
        }
        prod_start.push(prod_jk.len() as u32);

        Layout {
            nx,
            ny,
            caps,
            monos,
            degrees,
            index,
            prod_start,
            prod_jk,
            derivs: (0..nv).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nvars(&self) -> usize {
        self.nx + self.ny
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        let nv = self.nvars();
        &self.monos[i * nv..(i + 1) * nv]
    }

    pub fn find(&self, exps: &[u8]) -> Option<usize> {
        if exps.len() != self.nvars() || exps.iter().any(|&e| e > 15) {
            return None;
        }
        self.index.get(&pack(exps)).map(|&i| i as usize)
    }

    fn deriv_map(&self, v: usize) -> &DerivMap {
        self.derivs[v].get_or_init(|| {
            let is_x = v < self.nx;
            let group_cap = if is_x { self.caps.max_x } else { self.caps.max_y };
            assert!(
                group_cap >= 1 && self.caps.max_total >= 1,
                "differentiating a jet that carries no derivative information in variable {v}"
            );
            let caps = if is_x {
                Caps {
                    max_x: self.caps.max_x - 1,
                    max_y: self.caps.max_y,
                    max_total: self.caps.max_total - 1,
                }
            } else {
                Caps {
                    max_x: self.caps.max_x,
                    max_y: self.caps.max_y - 1,
                    max_total: self.caps.max_total - 1,
                }
            };
            let target = Layout::get(self.nx, self.ny, caps);
            let mut buf = vec![0u8; self.nvars()];
            let src = (0..target.len())
                .map(|t| {
                    buf.copy_from_slice(target.monomial(t));
                    let factor = buf[v] as f64 + 1.0;
                    buf[v] += 1;
                    let s = self.find(&buf).expect("derivative source monomial");
                    (s as u32, factor)
                })
                .collect();
            DerivMap { target, src }
        })
    }
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Layout(nx={}, ny={}, {:?}, {} monomials)",
            self.nx,
            self.ny,
            self.caps,
            self.len()
        )
    }
}

/// A multi-index over the `2n` variables `(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(orders: Vec<u8>) -> Result<MultiIndex> {
        let total: usize = orders.iter().map(|&e| e as usize).sum();
        if total > MAX_ORDER {
            return Err(Error::OrderTooHigh(total));
        }
        if orders.len() % 2 != 0 {
            return Err(Error::Invalid(
                "multi-index length must be twice the manifold dimension".into(),
            ));
        }
        Ok(MultiIndex(orders))
    }

    /// Builds the multi-index of `∂/∂x^{xs...} ∂/∂y^{ys...}` (0-based, repeats allowed).
    pub fn from_vars(n: usize, xs: &[usize], ys: &[usize]) -> Result<MultiIndex> {
        let mut o = vec![0u8; 2 * n];
        for &i in xs {
            o[i] += 1;
        }
        for &i in ys {
            o[n + i] += 1;
        }
        MultiIndex::new(o)
    }

    pub fn orders(&self) -> &[u8] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len() / 2
    }

    pub fn x_order(&self) -> usize {
        self.0[..self.dim()].iter().map(|&e| e as usize).sum()
    }

    pub fn y_order(&self) -> usize {
        self.total() - self.x_order()
    }

    fn factorial_weight(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (1..=e as u64).product::<u64>() as f64)
            .product()
    }
}

/// Truncated Taylor polynomial.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("layout", &self.layout)
            .field("value", &self.value())
            .finish()
    }
}

fn binomial_series(u: f64, p: f64, order: usize) -> std::result::Result<Vec<f64>, DomainError> {
    let mut c = vec![0.0; order + 1];
    if u == 0.0 {
        // only non-negative integer powers are smooth at zero
        if p >= 0.0 && p.fract() == 0.0 {
            let k = p as usize;
            if k <= order {
                c[k] = 1.0;
            }
            return Ok(c);
        }
        if order == 0 && p > 0.0 {
            return Ok(c);
        }
        return Err(DomainError { op: "pow", arg: u });
    }
    c[0] = u.powf(p);
    for k in 1..=order {
        c[k] = c[k - 1] * (p - (k as f64 - 1.0)) / (k as f64 * u);
    }
    Ok(c)
}

impl Jet {
    pub fn constant(layout: &Arc<Layout>, value: f64) -> Jet {
        let mut c = vec![0.0; layout.len()];
        c[0] = value;
        Jet {
            layout: layout.clone(),
            c,
        }
    }

    pub fn zero(layout: &Arc<Layout>) -> Jet {
        Jet::constant(layout, 0.0)
    }

    /// The coordinate function `v` (0-based over `x` then `y`) expanded at `value`.
    pub fn variable(layout: &Arc<Layout>, v: usize, value: f64) -> Jet {
        let mut j = Jet::constant(layout, value);
        let mut e = vec![0u8; layout.nvars()];
        e[v] = 1;
        if let Some(i) = layout.find(&e) {
            j.c[i] = 1.0;
        }
        j
    }

    /// Jets for `x^1..x^n` and `y^1..y^n` at the base point.
    pub fn coordinates(layout: &Arc<Layout>, x: &[f64], y: &[f64]) -> (Vec<Jet>, Vec<Jet>) {
        let n = x.len();
        debug_assert_eq!(layout.nx(), n);
        let xs = (0..n).map(|i| Jet::variable(layout, i, x[i])).collect();
        let ys = (0..y.len())
            .map(|i| Jet::variable(layout, n + i, y[i]))
            .collect();
        (xs, ys)
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn is_constant(&self) -> bool {
        self.c[1..].iter().all(|&v| v == 0.0)
    }

    /// Normalized coefficient `f^(α)/α!`; `None` if `α` is outside the layout.
    pub fn coeff(&self, exps: &[u8]) -> Option<f64> {
        self.layout.find(exps).map(|i| self.c[i])
    }

    /// The mixed partial derivative `∂^α f` at the base point.
    pub fn partial(&self, idx: &MultiIndex) -> Result<f64> {
        self.coeff(idx.orders())
            .map(|v| v * idx.factorial_weight())
            .ok_or(Error::OrderTooHigh(idx.total()))
    }

    /// `∂f/∂(var v)` as a jet one order lower.
    pub fn diff(&self, v: usize) -> Jet {
        let map = self.layout.deriv_map(v);
        let c = map
            .src
            .iter()
            .map(|&(s, f)| self.c[s as usize] * f)
            .collect();
        Jet {
            layout: map.target.clone(),
            c,
        }
    }

    pub fn dx(&self, i: usize) -> Jet {
        self.diff(i)
    }

    pub fn dy(&self, i: usize) -> Jet {
        self.diff(self.layout.nx + i)
    }

    /// Restricts to a layout whose caps are no larger than this one's.
    pub fn project(&self, target: &Arc<Layout>) -> Jet {
        if Arc::ptr_eq(&self.layout, target) {
            return self.clone();
        }
        let c = (0..target.len())
            .map(|t| {
                let i = self
                    .layout
                    .find(target.monomial(t))
                    .expect("projection target must be a sub-layout");
                self.c[i]
            })
            .collect();
        Jet {
            layout: target.clone(),
            c,
        }
    }

    /// Re-expresses in `target`, treating monomials absent from this layout
    /// as zero. Used to lift `x`-only jets into mixed layouts.
    pub fn embed(&self, target: &Arc<Layout>) -> Jet {
        if Arc::ptr_eq(&self.layout, target) {
            return self.clone();
        }
        let c = (0..target.len())
            .map(|t| self.layout.find(target.monomial(t)).map_or(0.0, |i| self.c[i]))
            .collect();
        Jet {
            layout: target.clone(),
            c,
        }
    }

    pub fn project_caps(&self, caps: Caps) -> Jet {
        let l = Layout::get(self.layout.nx, self.layout.ny, caps);
        self.project(&l)
    }

    fn aligned(a: &Jet, b: &Jet) -> Option<Arc<Layout>> {
        if Arc::ptr_eq(&a.layout, &b.layout) {
            None
        } else {
            Some(Layout::get(
                a.layout.nx,
                a.layout.ny,
                a.layout.caps.meet(b.layout.caps),
            ))
        }
    }

    fn mul_into(a: &[f64], b: &[f64], layout: &Layout, out: &mut [f64]) {
        for i in 0..a.len() {
            let ai = a[i];
            if ai == 0.0 {
                continue;
            }
            let s = layout.prod_start[i] as usize;
            let e = layout.prod_start[i + 1] as usize;
            for &(j, k) in &layout.prod_jk[s..e] {
                out[k as usize] += ai * b[j as usize];
            }
        }
    }

    /// `Σ_k coeffs[k] (self − self.value())^k`, i.e. `g(self)` where `coeffs`
    /// are the normalized Taylor coefficients of `g` at `self.value()`.
    pub fn compose(&self, coeffs: &[f64]) -> Jet {
        let order = (self.layout.caps.max_total as usize).min(coeffs.len().saturating_sub(1));
        let mut delta = self.c.clone();
        delta[0] = 0.0;
        let mut r = vec![0.0; self.c.len()];
        r[0] = coeffs[order];
        let mut tmp = vec![0.0; self.c.len()];
        for k in (0..order).rev() {
            tmp.iter_mut().for_each(|v| *v = 0.0);
            Jet::mul_into(&r, &delta, &self.layout, &mut tmp);
            std::mem::swap(&mut r, &mut tmp);
            r[0] += coeffs[k];
        }
        Jet {
            layout: self.layout.clone(),
            c: r,
        }
    }

    fn order(&self) -> usize {
        self.layout.caps.max_total as usize
    }

    pub fn scale(mut self, s: f64) -> Jet {
        self.c.iter_mut().for_each(|v| *v *= s);
        self
    }

    pub fn add_const(mut self, s: f64) -> Jet {
        self.c[0] += s;
        self
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut c = vec![e; self.order() + 1];
        let mut f = 1.0;
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            f *= k as f64;
            *ck = e / f;
        }
        self.compose(&c)
    }

    pub fn ln(&self) -> std::result::Result<Jet, DomainError> {
        let u = self.value();
        if !(u > 0.0) {
            return Err(DomainError { op: "log", arg: u });
        }
        let mut c = vec![u.ln(); self.order() + 1];
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *ck = sign / (k as f64 * u.powi(k as i32));
        }
        Ok(self.compose(&c))
    }

    pub fn recip(&self) -> std::result::Result<Jet, DomainError> {
        let u = self.value();
        if u == 0.0 || !u.is_finite() {
            return Err(DomainError { op: "recip", arg: u });
        }
        let mut c = vec![1.0 / u; self.order() + 1];
        for k in 1..c.len() {
            c[k] = -c[k - 1] / u;
        }
        Ok(self.compose(&c))
    }

    pub fn powf(&self, p: f64) -> std::result::Result<Jet, DomainError> {
        let u = self.value();
        if u < 0.0 && p.fract() != 0.0 {
            return Err(DomainError { op: "pow", arg: u });
        }
        let order = if self.is_constant() { 0 } else { self.order() };
        let c = binomial_series(u, p, order)?;
        if order == 0 {
            return Ok(Jet::constant(&self.layout, c[0]));
        }
        Ok(self.compose(&c))
    }

    pub fn powi(&self, p: i32) -> std::result::Result<Jet, DomainError> {
        self.powf(p as f64)
    }

    pub fn sqrt(&self) -> std::result::Result<Jet, DomainError> {
        let u = self.value();
        if u < 0.0 || (u == 0.0 && !self.is_constant()) {
            return Err(DomainError { op: "sqrt", arg: u });
        }
        self.powf(0.5)
    }

    fn trig(&self, phase: usize) -> Jet {
        let u = self.value();
        let cycle = [u.sin(), u.cos(), -u.sin(), -u.cos()];
        let mut c = Vec::with_capacity(self.order() + 1);
        let mut f = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                f *= k as f64;
            }
            c.push(cycle[(k + phase) % 4] / f);
        }
        self.compose(&c)
    }

    pub fn sin(&self) -> Jet {
        self.trig(0)
    }

    pub fn cos(&self) -> Jet {
        self.trig(1)
    }

    pub fn abs(&self) -> std::result::Result<Jet, DomainError> {
        let u = self.value();
        if u > 0.0 {
            Ok(self.clone())
        } else if u < 0.0 {
            Ok(-self.clone())
        } else if self.is_constant() {
            Ok(self.clone())
        } else {
            Err(DomainError { op: "abs", arg: u })
        }
    }

    pub fn try_div(&self, o: &Jet) -> std::result::Result<Jet, DomainError> {
        Ok(self * &o.recip()?)
    }

    /// Division that reports a singular denominator through [`Error::Singular`].
    pub fn div_or(&self, o: &Jet, what: &str) -> Result<Jet> {
        self.try_div(o).map_err(|e| Error::Singular {
            what: what.to_string(),
            detail: format!("denominator {}", e.arg),
        })
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.c.iter_mut().for_each(|v| *v = -*v);
        self
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -self.clone()
    }
}

macro_rules! elementwise {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:tt) => {
        impl $atr<&Jet> for Jet {
            fn $am(&mut self, o: &Jet) {
                match Jet::aligned(self, o) {
                    None => self.c.iter_mut().zip(&o.c).for_each(|(a, b)| *a $op *b),
                    Some(l) => {
                        *self = self.project(&l);
                        let o = o.project(&l);
                        self.c.iter_mut().zip(&o.c).for_each(|(a, b)| *a $op *b);
                    }
                }
            }
        }
        impl $atr<Jet> for Jet {
            fn $am(&mut self, o: Jet) {
                *self $op &o;
            }
        }
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, o: &Jet) -> Jet {
                let mut r = self.clone();
                r $op o;
                r
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(mut self, o: Jet) -> Jet {
                self $op &o;
                self
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(mut self, o: &Jet) -> Jet {
                self $op o;
                self
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet {
                let mut r = self.clone();
                r $op &o;
                r
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(mut self, o: f64) -> Jet {
                self.c[0] $op o;
                self
            }
        }
        impl $tr<f64> for &Jet {
            type Output = Jet;
            fn $m(self, o: f64) -> Jet {
                self.clone().$m(o)
            }
        }
    };
}

elementwise!(Add, add, AddAssign, add_assign, +=);
elementwise!(Sub, sub, SubAssign, sub_assign, -=);

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        match Jet::aligned(self, o) {
            None => {
                let mut out = vec![0.0; self.c.len()];
                Jet::mul_into(&self.c, &o.c, &self.layout, &mut out);
                Jet {
                    layout: self.layout.clone(),
                    c: out,
                }
            }
            Some(l) => &self.project(&l) * &o.project(&l),
        }
    }
}

impl Mul<Jet> for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        &self * &o
    }
}

impl Mul<&Jet> for Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        &self * o
    }
}

impl Mul<Jet> for &Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        self * &o
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.scale(o)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.clone().scale(o)
    }
}

/// Number types the expression evaluator can run on: plain `f64` and [`Jet`].
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn value(&self) -> f64;
    fn lift(&self, c: f64) -> Self;
    fn is_constant(&self) -> bool;
    fn recip(&self) -> std::result::Result<Self, DomainError>;
    fn exp(&self) -> Self;
    fn ln(&self) -> std::result::Result<Self, DomainError>;
    fn sqrt(&self) -> std::result::Result<Self, DomainError>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn abs(&self) -> std::result::Result<Self, DomainError>;
    fn powf(&self, p: f64) -> std::result::Result<Self, DomainError>;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn is_constant(&self) -> bool {
        true
    }
    fn recip(&self) -> std::result::Result<f64, DomainError> {
        if *self == 0.0 {
            Err(DomainError { op: "recip", arg: *self })
        } else {
            Ok(1.0 / self)
        }
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> std::result::Result<f64, DomainError> {
        if *self > 0.0 {
            Ok(f64::ln(*self))
        } else {
            Err(DomainError { op: "log", arg: *self })
        }
    }
    fn sqrt(&self) -> std::result::Result<f64, DomainError> {
        if *self >= 0.0 {
            Ok(f64::sqrt(*self))
        } else {
            Err(DomainError { op: "sqrt", arg: *self })
        }
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn abs(&self) -> std::result::Result<f64, DomainError> {
        Ok(f64::abs(*self))
    }
    fn powf(&self, p: f64) -> std::result::Result<f64, DomainError> {
        let u = *self;
        if u < 0.0 && p.fract() != 0.0 {
            return Err(DomainError { op: "pow", arg: u });
        }
        if u == 0.0 && p < 0.0 {
            return Err(DomainError { op: "pow", arg: u });
        }
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
            Ok(u.powi(p as i32))
        } else {
            Ok(u.powf(p))
        }
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn lift(&self, c: f64) -> Jet {
        Jet::constant(&self.layout, c)
    }
    fn is_constant(&self) -> bool {
        Jet::is_constant(self)
    }
    fn recip(&self) -> std::result::Result<Jet, DomainError> {
        Jet::recip(self)
    }
    fn exp(&self) -> Jet {
        Jet::exp(self)
    }
    fn ln(&self) -> std::result::Result<Jet, DomainError> {
        Jet::ln(self)
    }
    fn sqrt(&self) -> std::result::Result<Jet, DomainError> {
        Jet::sqrt(self)
    }
    fn sin(&self) -> Jet {
        Jet::sin(self)
    }
    fn cos(&self) -> Jet {
        Jet::cos(self)
    }
    fn abs(&self) -> std::result::Result<Jet, DomainError> {
        Jet::abs(self)
    }
    fn powf(&self, p: f64) -> std::result::Result<Jet, DomainError> {
        Jet::powf(self, p)
    }
}

/// Univariate truncated series helpers (a one-variable [`Jet`]).
pub mod series {
    use super::*;

    pub fn layout(order: usize) -> Arc<Layout> {
        Layout::get(0, 1, Caps::new(0, order, order))
    }

    /// The identity `t` expanded at `t0`.
    pub fn variable(t0: f64, order: usize) -> Jet {
        Jet::variable(&layout(order), 0, t0)
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Jet {
        let order = coeffs.len() - 1;
        let l = layout(order);
        Jet {
            c: coeffs.to_vec(),
            layout: l,
        }
    }

    /// Normalized coefficients of a univariate jet, lowest order first.
    pub fn coeffs(j: &Jet) -> Vec<f64> {
        debug_assert_eq!(j.layout.nvars(), 1);
        j.c.clone()
    }

    /// Termwise antiderivative with constant term `c0`; the result has one order more.
    pub fn integrate(j: &Jet, c0: f64) -> Jet {
        let mut c = Vec::with_capacity(j.c.len() + 1);
        c.push(c0);
        for (k, v) in j.c.iter().enumerate() {
            c.push(v / (k as f64 + 1.0));
        }
        from_coeffs(&c)
    }

    /// Coefficients of the derivative series.
    pub fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
        c.iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| v * k as f64)
            .collect()
    }

    /// Evaluates the truncated series at offset `h` from its base point.
    pub fn eval_at(c: &[f64], h: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, v| acc * h + v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lay(n: usize, ox: usize, oy: usize) -> Arc<Layout> {
        Layout::get(n, n, Caps::split(ox, oy))
    }

    #[test]
    fn layout_counts_monomials() {
        // 2 variables, total degree <= 3 -> C(5,2) = 10
        let l = Layout::get(1, 1, Caps::new(3, 3, 3));
        assert_eq!(l.len(), 10);
        assert_eq!(l.monomial(0), &[0, 0]);
    }

    #[test]
    fn product_of_variables() {
        let l = lay(1, 2, 2);
        let x = Jet::variable(&l, 0, 2.0);
        let y = Jet::variable(&l, 1, 3.0);
        let p = &x * &y;
        assert_eq!(p.value(), 6.0);
        let i = MultiIndex::new(vec![1, 1]).unwrap();
        assert_eq!(p.partial(&i).unwrap(), 1.0);
        let i = MultiIndex::new(vec![1, 0]).unwrap();
        assert_eq!(p.partial(&i).unwrap(), 3.0);
    }

    #[test]
    fn exp_series_matches_factorials() {
        let t = series::variable(0.0, 5);
        let e = t.exp();
        let c = series::coeffs(&e);
        assert!((c[4] - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn sin_third_derivative() {
        let t = series::variable(0.0, 4);
        let s = t.sin();
        let i = MultiIndex(vec![3]);
        assert!((s.partial(&i).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn recip_and_sqrt_compose() {
        let t = series::variable(4.0, 3);
        let r = t.sqrt().unwrap().recip().unwrap();
        // d/dt t^{-1/2} = -1/2 t^{-3/2} = -1/16 at t=4
        assert!((series::coeffs(&r)[1] + 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_lowers_order() {
        let l = lay(1, 1, 3);
        let y = Jet::variable(&l, 1, 2.0);
        let f = &(&y * &y) * &y;
        let d = f.dy(0);
        assert_eq!(d.layout().caps().max_total, 3);
        assert!((d.value() - 12.0).abs() < 1e-14);
        let dd = d.dy(0);
        assert!((dd.value() - 12.0).abs() < 1e-14);
    }

    #[test]
    fn mismatched_layouts_meet() {
        let a = Jet::variable(&lay(1, 1, 3), 1, 1.0);
        let b = Jet::variable(&lay(1, 2, 1), 0, 1.0);
        let c = &a * &b;
        assert_eq!(c.layout().caps(), Caps::new(1, 1, 2));
    }

    #[test]
    fn domain_errors() {
        let t = series::variable(-1.0, 2);
        assert!(t.ln().is_err());
        assert!(t.sqrt().is_err());
        assert!(series::variable(0.0, 2).recip().is_err());
        assert!(series::variable(0.0, 2).abs().is_err());
        assert!(series::variable(-2.0, 2).powi(3).is_ok());
    }
}
