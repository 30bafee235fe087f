use finsler_lab::curvature::{
    berwald, berwald_ab_reduced, douglas, identity_residuals, landsberg, mean_berwald, riemann_full,
    riemann_ry, Spray, TensorJet,
};
use finsler_lab::expr::parse_expr;
use finsler_lab::finsler::{ABMetric, FinslerMetric, GenericMetric, SprayRoute};
use finsler_lab::geometry::{OneForm, RiemannMetric};
use finsler_lab::jet::{Caps, Layout};
use finsler_lab::phi::PhiFamily;
use finsler_lab::tensor::Slot;

fn generic(f: &str, n: usize) -> FinslerMetric {
    FinslerMetric::Generic(GenericMetric::new(parse_expr(f, n).unwrap()).unwrap())
}

fn ab(a: RiemannMetric, b: &[&str], phi: PhiFamily) -> FinslerMetric {
    FinslerMetric::AB(ABMetric::new(a, OneForm::parse(b).unwrap(), phi).unwrap())
}

/// Unit 3-sphere in stereographic coordinates with the Hopf field (Killing, unit length).
fn hopf(lambda: f64, phi: PhiFamily) -> FinslerMetric {
    let c = "4/(1+x1^2+x2^2+x3^2)^2";
    let a = RiemannMetric::diagonal(&[c, c, c]).unwrap();
    let d2 = "(1+x1^2+x2^2+x3^2)^2";
    let b1 = format!("{lambda}*4*(x1*x3-x2)/{d2}");
    let b2 = format!("{lambda}*4*(x2*x3+x1)/{d2}");
    let b3 = format!("{lambda}*2*(1+x3^2-x1^2-x2^2)/{d2}");
    ab(a, &[&b1, &b2, &b3], phi)
}

const X3: [f64; 3] = [0.2, -0.3, 0.15];
const Y3: [f64; 3] = [0.6, 0.4, -0.7];

#[test]
fn hyperbolic_plane_has_constant_curvature() {
    // a = dx1² + e^{2 x1} dx2², K = −1
    let m = generic("sqrt(y1^2 + exp(2*x1)*y2^2)", 2);
    let (x, y) = ([0.3, -0.2], [0.5, 1.2]);
    let a = [[1.0, 0.0], [0.0, (2.0f64 * 0.3).exp()]];
    let yl = [a[0][0] * y[0], a[1][1] * y[1]];
    let f2 = yl[0] * y[0] + yl[1] * y[1];
    let k = -1.0;
    let r = riemann_ry(&m, &x, &y).unwrap();
    let rf = riemann_full(&m, &x, &y).unwrap();
    for i in 0..2 {
        for kk in 0..2 {
            let d = f64::from(u8::from(i == kk));
            let exact = k * (f2 * d - y[i] * yl[kk]);
            assert!((r.get(&[i, kk]) - exact).abs() < 1e-9, "R^{i}_{kk}");
            for j in 0..2 {
                for l in 0..2 {
                    let dik = f64::from(u8::from(i == kk));
                    let dil = f64::from(u8::from(i == l));
                    let exact = k * (a[j][l] * dik - a[j][kk] * dil);
                    assert!((rf.get(&[i, j, kk, l]) - exact).abs() < 1e-8);
                }
            }
        }
    }
    assert!(berwald(&m, &x, &y).unwrap().max_abs() < 1e-9);
    assert!(douglas(&m, &x, &y).unwrap().max_abs() < 1e-9);
}

#[test]
fn sphere_has_curvature_one() {
    let m = generic(
        "2*sqrt(y1^2+y2^2+y3^2)/(1+x1^2+x2^2+x3^2)",
        3,
    );
    let r = riemann_ry(&m, &X3, &Y3).unwrap();
    let c = 4.0 / (1.0 + X3.iter().map(|v| v * v).sum::<f64>()).powi(2);
    let f2 = c * Y3.iter().map(|v| v * v).sum::<f64>();
    for i in 0..3 {
        for k in 0..3 {
            let d = f64::from(u8::from(i == k));
            let exact = f2 * d - Y3[i] * c * Y3[k];
            assert!((r.get(&[i, k]) - exact).abs() < 1e-9);
        }
    }
}

#[test]
fn hopf_field_is_killing_of_unit_length() {
    let m = hopf(0.5, PhiFamily::square());
    let am = m.as_ab().unwrap();
    let inv = finsler_lab::geometry::beta_invariants(&am.a, &am.beta, &X3, &Y3).unwrap();
    assert!((inv.b2 - 0.25).abs() < 1e-12);
    assert!(inv.r_ij.iter().flatten().all(|v| v.abs() < 1e-12));
    assert!(inv.s_j.iter().all(|v| v.abs() < 1e-12));
    assert!(inv.s_ij.iter().flatten().any(|v| v.abs() > 0.1));
}

#[test]
fn closed_form_berwald_matches_jets() {
    for (m, tol) in [
        (hopf(0.5, PhiFamily::square()), 1e-9),
        (hopf(0.3, PhiFamily::matsumoto()), 1e-9),
        (hopf(0.4, finsler_lab::phi::phi_uni(1.0, 0.3, 0.5, 0.4).unwrap()), 1e-8),
    ] {
        let closed = berwald_ab_reduced(m.as_ab().unwrap(), &X3, &Y3).unwrap();
        let jets = berwald(&m, &X3, &Y3).unwrap();
        assert!(closed.max_abs() > 1e-2);
        let d = closed.max_abs_diff(&jets);
        assert!(d < tol * (1.0 + closed.max_abs()), "{d}");
    }
}

#[test]
fn closed_form_berwald_checks_its_precondition() {
    let a = RiemannMetric::euclidean(2);
    let m = ab(a, &["0.3*x2", "0.1"], PhiFamily::square());
    assert!(berwald_ab_reduced(m.as_ab().unwrap(), &[0.1, 0.2], &[1.0, 0.5]).is_err());
}

#[test]
fn randers_with_closed_beta_is_douglas() {
    // β = d(0.2 x1 x2 + 0.1 sin x1) on a non-flat α
    let a = RiemannMetric::diagonal(&["1", "exp(2*x1)"]).unwrap();
    let m = ab(
        a,
        &["0.2*x2 + 0.1*cos(x1)", "0.2*x1"],
        PhiFamily::randers_type(1.0, 0.0, 1.0).unwrap(),
    );
    let (x, y) = ([0.2, 0.3], [0.4, -0.9]);
    assert!(douglas(&m, &x, &y).unwrap().max_abs() < 1e-9);
    assert!(berwald(&m, &x, &y).unwrap().max_abs() > 1e-3);
}

#[test]
fn square_metric_is_not_douglas_for_nonclosed_beta() {
    let m = hopf(0.5, PhiFamily::square());
    assert!(douglas(&m, &X3, &Y3).unwrap().max_abs() > 1e-3);
}

#[test]
fn berwald_metric_is_flat_and_projectively_flat() {
    let rt = "sqrt((1-x1^2-x2^2)*(y1^2+y2^2) + (x1*y1+x2*y2)^2)";
    let f = format!("({rt} + x1*y1 + x2*y2)^2 / ((1-x1^2-x2^2)^2 * {rt})");
    let m = generic(&f, 2);
    let (x, y) = ([0.2, -0.1], [0.7, 0.3]);
    assert!(douglas(&m, &x, &y).unwrap().max_abs() < 1e-8);
    assert!(riemann_ry(&m, &x, &y).unwrap().max_abs() < 1e-8);
    assert!(berwald(&m, &x, &y).unwrap().max_abs() > 1e-2);
}

#[test]
fn mean_berwald_is_half_trace() {
    let m = hopf(0.4, PhiFamily::matsumoto());
    let b = berwald(&m, &X3, &Y3).unwrap();
    let e = mean_berwald(&m, &X3, &Y3).unwrap();
    for j in 0..3 {
        for k in 0..3 {
            let t: f64 = (0..3).map(|m| b.get(&[m, j, k, m])).sum();
            assert!((e.get(&[j, k]) - 0.5 * t).abs() < 1e-13);
        }
    }
}

#[test]
fn landsberg_vanishes_for_berwald_type() {
    let m = ab(
        RiemannMetric::euclidean(2),
        &["0.3", "0.2"],
        PhiFamily::matsumoto(),
    );
    assert!(landsberg(&m, &[0.1, 0.2], &[1.0, 0.4]).unwrap().max_abs() < 1e-12);
    let m = hopf(0.5, PhiFamily::square());
    assert!(landsberg(&m, &X3, &Y3).unwrap().max_abs() > 1e-3);
}

#[test]
fn horizontal_derivative_reduces_to_levi_civita() {
    // on a Riemannian metric the Berwald connection is Levi-Civita, so the
    // horizontal derivative of an x-only covector is b_{i|j}
    let a = RiemannMetric::diagonal(&["1", "exp(2*x1)", "1+x1^2"]).unwrap();
    let beta = OneForm::parse(&["x2", "sin(x3)", "x1*x2"]).unwrap();
    let m = generic("sqrt(y1^2 + exp(2*x1)*y2^2 + (1+x1^2)*y3^2)", 3);
    let sp = Spray::with_caps(&m, &X3, &Y3, SprayRoute::Generic, Caps::new(1, 3, 4)).unwrap();
    let aj = a.jets(&X3, 1).unwrap();
    let bj = beta.jets(&X3, &aj).unwrap();
    let layout = Layout::get(3, 3, Caps::new(1, 1, 2));
    let t = TensorJet::from_fn(3, &[Slot::Down], |i| bj.b[i[0]].embed(&layout));
    let full = sp.hderiv(&t).unwrap();
    let contracted = sp.hderiv_contract(&t).unwrap().value();
    for i in 0..3 {
        let mut c = 0.0;
        for j in 0..3 {
            let cov = bj.cov[i][j].value();
            assert!((full.get(&[i, j]) - cov).abs() < 1e-10);
            c += cov * Y3[j];
        }
        assert!((contracted.get(&[i]) - c).abs() < 1e-10);
    }
}

#[test]
fn structural_identities_hold() {
    let cases = [
        hopf(0.5, PhiFamily::square()),
        hopf(0.3, PhiFamily::matsumoto()),
        ab(
            RiemannMetric::diagonal(&["1", "exp(2*x1)"]).unwrap(),
            &["0.2*cos(x2)", "0.3*x1"],
            PhiFamily::square(),
        ),
    ];
    for m in &cases {
        let n = m.dim();
        let sp = Spray::new(m, &X3[..n], &Y3[..n]).unwrap();
        let r = identity_residuals(&sp).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
    }
}

#[test]
fn generic_and_ab_routes_give_the_same_curvature() {
    let m = hopf(0.3, PhiFamily::matsumoto());
    let a = Spray::with_route(&m, &X3, &Y3, SprayRoute::AlphaBeta).unwrap();
    let g = Spray::with_route(&m, &X3, &Y3, SprayRoute::Generic).unwrap();
    let (ra, rg) = (a.riemann_ry().unwrap(), g.riemann_ry().unwrap());
    assert!(ra.max_abs_diff(&rg) < 1e-9 * (1.0 + ra.max_abs()));
    let (da, dg) = (a.douglas_jet().unwrap().value(), g.douglas_jet().unwrap().value());
    assert!(da.max_abs_diff(&dg) < 1e-9 * (1.0 + da.max_abs()));
}
