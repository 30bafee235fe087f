//! Mixed partial derivatives of scalar fields `f(x, y)`.
//!
//! [`eval_jet`] lifts a field to truncated Taylor arithmetic and is exact up
//! to rounding. [`fd_oracle`] is an independent central-difference estimator
//! used to check it.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::jet::{Caps, Jet, Layout, MultiIndex, MAX_ORDER};

/// A scalar function of `(x, y) ∈ R^n × R^n`.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    /// Evaluates on coordinate jets produced by [`Jet::coordinates`].
    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet>;
}

/// An [`Expression`] with its parameter values.
#[derive(Clone, Debug)]
pub struct ExprField {
    pub expr: Expression,
    pub params: HashMap<String, f64>,
}

impl ExprField {
    pub fn new(expr: Expression) -> ExprField {
        ExprField {
            expr,
            params: HashMap::new(),
        }
    }
}

impl ScalarField for ExprField {
    fn dim(&self) -> usize {
        self.expr.dim()
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.expr.eval(x, y, &self.params)
    }

    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        self.expr.eval_jet(x, y, &self.params)
    }
}

impl<F: Fn(&[f64], &[f64]) -> f64 + Send + Sync> ScalarField for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok((self.1)(x, y))
    }
    fn eval_jet(&self, _x: &[Jet], _y: &[Jet]) -> Result<Jet> {
        Err(Error::Invalid(
            "closure fields support only plain evaluation".into(),
        ))
    }
}

pub fn jet_layout(n: usize, order_x: usize, order_y: usize) -> Result<Arc<Layout>> {
    if order_x + order_y > MAX_ORDER {
        return Err(Error::OrderTooHigh(order_x + order_y));
    }
    Ok(Layout::get(n, n, Caps::split(order_x, order_y)))
}

/// All mixed partials of `f` at `(x, y)` with at most `order_x` x-derivatives
/// and `order_y` y-derivatives.
pub fn eval_jet(
    f: &dyn ScalarField,
    x: &[f64],
    y: &[f64],
    order_x: usize,
    order_y: usize,
) -> Result<Jet> {
    let n = f.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::Invalid(format!(
            "point has dimension ({}, {}), field has {n}",
            x.len(),
            y.len()
        )));
    }
    let layout = jet_layout(n, order_x, order_y)?;
    let (xs, ys) = Jet::coordinates(&layout, x, y);
    f.eval_jet(&xs, &ys).map_err(|e| e.at_point(x, y))
}

/// Central difference weights `(offset, weight)` for the `k`-th derivative with unit step.
fn stencil(k: u8) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
    }
}

/// Base step for a derivative of total order `p`. The tensor-product central
/// stencil has O(h²) truncation; two Richardson levels raise that to O(h⁶),
/// so the step balancing truncation against rounding is `ε^(1/(p+6))`.
pub fn fd_base_step(order: usize) -> f64 {
    f64::EPSILON.powf(1.0 / (order as f64 + 6.0))
}

fn fd_once(f: &dyn ScalarField, x: &[f64], y: &[f64], orders: &[u8], h: &[f64]) -> Result<f64> {
    let n = x.len();
    let active: Vec<usize> = (0..2 * n).filter(|&v| orders[v] > 0).collect();
    let stencils: Vec<&[(i32, f64)]> = active.iter().map(|&v| stencil(orders[v])).collect();
    let mut px = x.to_vec();
    let mut py = y.to_vec();
    let mut counter = vec![0usize; active.len()];
    // dyadic weights are summed first so that constant fields cancel exactly
    let mut acc = 0.0;
    'points: loop {
        let mut w = 1.0;
        for (a, &v) in active.iter().enumerate() {
            let (off, wt) = stencils[a][counter[a]];
            w *= wt;
            let d = off as f64 * h[v];
            if v < n {
                px[v] = x[v] + d;
            } else {
                py[v - n] = y[v - n] + d;
            }
        }
        acc += w * f.eval(&px, &py)?;
        for a in 0..active.len() {
            counter[a] += 1;
            if counter[a] < stencils[a].len() {
                continue 'points;
            }
            counter[a] = 0;
        }
        break;
    }
    let denom: f64 = active
        .iter()
        .map(|&v| h[v].powi(orders[v] as i32))
        .product();
    Ok(acc / denom)
}

/// Central finite difference with two Richardson levels for `∂^idx f(x, y)`.
///
/// Expected relative accuracy is about `1e-8` at order ≤ 3 for smooth
/// fields with O(1) derivatives. If a stencil point leaves the domain the
/// step is shrunk by 4 until it fits; below `1e-7` this gives
/// [`Error::StepUnderflow`].
pub fn fd_oracle(f: &dyn ScalarField, x: &[f64], y: &[f64], idx: &MultiIndex) -> Result<f64> {
    let n = f.dim();
    if idx.dim() != n {
        return Err(Error::Invalid("multi-index dimension mismatch".into()));
    }
    let order = idx.total();
    if order > 4 {
        return Err(Error::OrderTooHigh(order));
    }
    if order == 0 {
        return f.eval(x, y);
    }
    let mut base = fd_base_step(order);
    loop {
        let h: Vec<f64> = x
            .iter()
            .chain(y)
            .map(|&z| base * z.abs().max(1.0))
            .collect();
        let attempt = (|| {
            let d1 = fd_once(f, x, y, idx.orders(), &h)?;
            let h2: Vec<f64> = h.iter().map(|v| v / 2.0).collect();
            let d2 = fd_once(f, x, y, idx.orders(), &h2)?;
            let h4: Vec<f64> = h.iter().map(|v| v / 4.0).collect();
            let d4 = fd_once(f, x, y, idx.orders(), &h4)?;
            let r1 = (4.0 * d2 - d1) / 3.0;
            let r2 = (4.0 * d4 - d2) / 3.0;
            Ok::<f64, Error>((16.0 * r2 - r1) / 15.0)
        })();
        match attempt {
            Ok(v) => return Ok(v),
            Err(e) if matches!(e.root(), Error::Domain { .. }) => {
                base /= 4.0;
                if base < 1e-7 {
                    return Err(Error::StepUnderflow);
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Every multi-index over `2n` variables with total order in `1..=max_order`.
pub fn multi_indices(n: usize, max_order: usize) -> Vec<MultiIndex> {
    let layout = Layout::get(n, n, Caps::new(max_order, max_order, max_order));
    (1..layout.len())
        .map(|i| MultiIndex::new(layout.monomial(i).to_vec()).expect("within MAX_ORDER"))
        .collect()
}
