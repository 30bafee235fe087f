use finsler_lab::curvature::mean_berwald;
use finsler_lab::expr::parse_expr;
use finsler_lab::finsler::{ABMetric, FinslerMetric, GenericMetric};
use finsler_lab::geometry::{OneForm, RiemannMetric};
use finsler_lab::phi::{phi_uni, solve_isotropic_ode, PhiFamily};
use finsler_lab::scurv::{
    bh_sigma, e_from_s, ln_sigma_gradient, ln_sigma_gradient_fd, s_curvature, sphere_sigma,
    SIGMA_TOL,
};

fn generic(f: &str, n: usize) -> FinslerMetric {
    FinslerMetric::Generic(GenericMetric::new(parse_expr(f, n).unwrap()).unwrap())
}

fn ab(a: RiemannMetric, b: &[&str], phi: PhiFamily) -> FinslerMetric {
    FinslerMetric::AB(ABMetric::new(a, OneForm::parse(b).unwrap(), phi).unwrap())
}

fn hopf(lambda: f64, phi: PhiFamily) -> FinslerMetric {
    let c = "4/(1+x1^2+x2^2+x3^2)^2";
    let a = RiemannMetric::diagonal(&[c, c, c]).unwrap();
    let d2 = "(1+x1^2+x2^2+x3^2)^2";
    let b1 = format!("{lambda}*4*(x1*x3-x2)/{d2}");
    let b2 = format!("{lambda}*4*(x2*x3+x1)/{d2}");
    let b3 = format!("{lambda}*2*(1+x3^2-x1^2-x2^2)/{d2}");
    ab(a, &[&b1, &b2, &b3], phi)
}

fn surface() -> RiemannMetric {
    RiemannMetric::diagonal(&["1", "exp(2*x1)"]).unwrap()
}

#[test]
fn sigma_of_euclidean_norm_is_one() {
    for (f, n) in [("sqrt(y1^2+y2^2)", 2), ("sqrt(y1^2+y2^2+y3^2)", 3)] {
        let m = generic(f, n);
        let s = bh_sigma(&m, &vec![0.3; n], SIGMA_TOL).unwrap();
        assert!((s.sigma - 1.0).abs() < 1e-12, "{s:?}");
    }
}

#[test]
fn sigma_of_ellipse_and_scaling() {
    let m = generic("sqrt(4*y1^2+y2^2)", 2);
    assert!((bh_sigma(&m, &[0.0, 0.0], SIGMA_TOL).unwrap().sigma - 2.0).abs() < 1e-12);
    let base = generic("sqrt(y1^2+y2^2+y3^2) + 0.3*y1", 3);
    let doubled = generic("2*(sqrt(y1^2+y2^2+y3^2) + 0.3*y1)", 3);
    let x = [0.1, 0.2, 0.3];
    let s1 = bh_sigma(&base, &x, SIGMA_TOL).unwrap().sigma;
    let s2 = bh_sigma(&doubled, &x, SIGMA_TOL).unwrap().sigma;
    assert!((s2 / s1 - 8.0).abs() < 1e-10);
}

#[test]
fn ab_reduction_matches_sphere_quadrature() {
    let cases = [
        (hopf(0.5, PhiFamily::square()), vec![0.2, -0.1, 0.3]),
        (
            ab(surface(), &["0.2*cos(x2)", "0.3*x1"], PhiFamily::matsumoto()),
            vec![0.3, 0.4],
        ),
        (hopf(0.6, phi_uni(1.0, 0.5, 1.0, 0.6).unwrap()), vec![0.1, 0.1, -0.2]),
    ];
    for (m, x) in &cases {
        let red = bh_sigma(m, x, SIGMA_TOL).unwrap();
        let quad = sphere_sigma(m, x).unwrap();
        assert!((red.ln_sigma - quad.ln_sigma).abs() < 1e-9, "{red:?} vs {quad:?}");
    }
}

#[test]
fn ab_gradient_matches_finite_differences() {
    let m = ab(surface(), &["0.2*cos(x2)", "0.3*x1 + 0.1"], PhiFamily::square());
    let x = [0.3, 0.4];
    let g = ln_sigma_gradient(&m, &x).unwrap();
    let fd = ln_sigma_gradient_fd(&m, &x).unwrap();
    for k in 0..2 {
        assert!((g[k] - fd[k]).abs() < 1e-8, "{g:?} vs {fd:?}");
    }
}

#[test]
fn riemannian_s_vanishes() {
    let m = generic("sqrt(y1^2 + exp(2*x1)*y2^2)", 2);
    let s = s_curvature(&m, &[0.3, 0.1], &[0.6, -0.8]).unwrap();
    assert!(s.abs() < 1e-6, "{s}");
}

#[test]
fn killing_constant_length_gives_zero_s() {
    let m = hopf(1.0, phi_uni(1.0, 0.5, 1.0, 1.0).unwrap());
    for y in [[0.6, 0.4, -0.7], [0.1, -0.9, 0.2]] {
        let s = s_curvature(&m, &[0.2, -0.3, 0.15], &y).unwrap();
        let f = m.f_value(&[0.2, -0.3, 0.15], &y).unwrap();
        assert!((s / f).abs() < 1e-10, "{s}");
    }
}

#[test]
fn twodim_example_has_constant_s() {
    let k = 0.1;
    let phi = solve_isotropic_ode(k, 2, 1.0, 0.0, 0.0).unwrap();
    let b0 = phi.b0;
    let m = ab(surface(), &["1", "0"], phi);
    let x = [0.2, -0.4];
    for t in [0.0f64, 0.7, 1.3, 2.0, 2.9, 4.0] {
        let y = [t.cos(), (-0.2f64).exp() * t.sin()];
        let s = m.as_ab().unwrap().s_value(&x, &y).unwrap();
        if s.abs() > 0.9 * b0 {
            continue;
        }
        let sc = s_curvature(&m, &x, &y).unwrap();
        let f = m.f_value(&x, &y).unwrap();
        assert!((sc / f - 3.0 * k).abs() < 1e-6, "t={t}: {}", sc / f);
    }
}

#[test]
fn berwald_metric_has_nonzero_s() {
    let rt = "sqrt((1-x1^2-x2^2)*(y1^2+y2^2) + (x1*y1+x2*y2)^2)";
    let f = format!("({rt} + x1*y1 + x2*y2)^2 / ((1-x1^2-x2^2)^2 * {rt})");
    let m = generic(&f, 2);
    let (x, y) = ([0.1, 0.0], [1.0, 0.0]);
    let s = s_curvature(&m, &x, &y).unwrap();
    assert!(s.abs() / m.f_value(&x, &y).unwrap() > 0.1, "{s}");
}

#[test]
fn s_is_positively_homogeneous() {
    let m = ab(surface(), &["0.2*cos(x2)", "0.3*x1"], PhiFamily::square());
    let (x, y) = ([0.3, 0.4], [0.5, -0.2]);
    let s1 = s_curvature(&m, &x, &y).unwrap();
    let s2 = s_curvature(&m, &x, &[1.5, -0.6]).unwrap();
    assert!((s2 - 3.0 * s1).abs() < 1e-10 * (1.0 + s1.abs()));
}

#[test]
fn mean_berwald_from_s_matches_jets() {
    for m in [
        ab(surface(), &["0.2*cos(x2)", "0.3*x1"], PhiFamily::square()),
        hopf(0.4, PhiFamily::square()),
    ] {
        let n = m.dim();
        let x = &[0.2, -0.3, 0.1][..n];
        let y = &[0.6, 0.5, -0.4][..n];
        let e = mean_berwald(&m, x, y).unwrap();
        let es = e_from_s(&m, x, y).unwrap();
        assert!(e.max_abs_diff(&es) < 1e-6, "{e}\n{es}");
    }
}
