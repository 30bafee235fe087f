use finsler_lab::catalog::{catalog_get, funk_type_expr, parse_params, CatalogEntry};
use finsler_lab::classify::*;
use finsler_lab::curvature::mean_berwald;
use finsler_lab::expr::parse_expr;
use finsler_lab::finsler::{FinslerMetric, GenericMetric};
use finsler_lab::geometry::{OneForm, RiemannMetric};
use finsler_lab::grid::SampleGrid;
use finsler_lab::phi::randers_type_fit;
use finsler_lab::report::Verdict;

fn entry(name: &str, params: &str) -> CatalogEntry {
    catalog_get(name, &parse_params(params).unwrap()).unwrap()
}

fn small_grid(e: &CatalogEntry) -> SampleGrid {
    SampleGrid::build(&e.metric, &e.grid.clone().with_counts(8, 12)).unwrap()
}

#[test]
fn berwald_implies_douglas_implies_gdw() {
    let entries = [
        entry("euclid_parallel", ""),
        entry("euclid_parallel", "n=2 phi=matsumoto b=0.2"),
        entry("funk_type", ""),
        entry("twodim_constant_s", ""),
        entry("killing_hopf", ""),
        entry("product", ""),
        entry("square", "a=diag:1,exp(2*x1) beta=0.2*cos(x2),0.3*x1"),
        entry("randers", "beta=0.2*x2,-0.2*x1 c1=1 c2=0 c3=1"),
    ];
    for e in &entries {
        let g = small_grid(e);
        let b = classify_berwald(&e.metric, &g, BERWALD_TOL);
        let d = classify_douglas(&e.metric, &g, DOUGLAS_TOL);
        let w = classify_gdw(&e.metric, &g, GDW_TOL);
        if b.passed() {
            assert!(d.passed() && w.passed(), "{}: {b:?} {d:?} {w:?}", e.name);
        }
        if d.passed() {
            assert!(w.passed(), "{}: {d:?} {w:?}", e.name);
        }
    }
}

#[test]
fn vanishing_s_gdw_matches_berwald_for_regular_non_randers() {
    let configs = [
        ("euclid_parallel", "n=3 phi=square"),
        ("euclid_parallel", "n=2 phi=matsumoto b=0.3"),
        ("killing_hopf", "phi=square lambda=0.5"),
        ("killing_hopf", "phi=matsumoto lambda=0.3"),
        ("product", ""),
    ];
    for (name, params) in configs {
        let e = entry(name, params);
        let ab = e.metric.as_ab().unwrap();
        assert!(!randers_type_fit(&ab.phi, ab.phi.b0).is_randers_type());
        let g = small_grid(&e);
        let s = classify_isotropic_s(&e.metric, &g, ISOTROPIC_S_TOL);
        assert_eq!(s.label.as_deref(), Some("vanishing"), "{name} {params}: {s:?}");
        let b = classify_berwald(&e.metric, &g, BERWALD_TOL);
        let w = classify_gdw(&e.metric, &g, GDW_TOL);
        assert_eq!(b.verdict, w.verdict, "{name} {params}: {b:?} {w:?}");
    }
}

#[test]
fn cs0_branches() {
    let e = entry("twodim_constant_s", "");
    let ab = e.metric.as_ab().unwrap();
    let xs: Vec<Vec<f64>> = small_grid(&e).points.iter().map(|p| p.x.clone()).collect();
    let r = lemma_cs0_check(&ab.a, &ab.beta, &xs, CS0_TOL);
    assert_eq!(r.label.as_deref(), Some("a"));
    for k in ["eps_min", "eps_max", "b_min", "b_max"] {
        assert!((r.scalar(k).unwrap() - 1.0).abs() < 1e-8, "{k}: {r:?}");
    }

    let e = entry("killing_hopf", "");
    let ab = e.metric.as_ab().unwrap();
    let r = lemma_cs0_check(&ab.a, &ab.beta, &xs_of(&e), CS0_TOL);
    assert_eq!(r.label.as_deref(), Some("b"));

    let a = RiemannMetric::euclidean(2);
    let beta = OneForm::parse(&["x1^2", "x2"]).unwrap();
    let r = lemma_cs0_check(&a, &beta, &xs_of(&entry("euclid_parallel", "n=2")), CS0_TOL);
    assert_eq!(r.label.as_deref(), Some("none"));
    assert_eq!(r.verdict, Verdict::Fail);
}

fn xs_of(e: &CatalogEntry) -> Vec<Vec<f64>> {
    small_grid(e).points.iter().map(|p| p.x.clone()).collect()
}

#[test]
fn non_constant_curvature_surface_product_is_not_weyl() {
    let f = FinslerMetric::Generic(
        GenericMetric::new(parse_expr("sqrt(y1^2 + y2^2 + exp(2*x1)*y3^2)", 3).unwrap()).unwrap(),
    );
    let e = entry("product", "");
    let g = SampleGrid::build(&f, &e.grid.clone().with_counts(8, 12)).unwrap();
    let r = classify_scalar_flag(&f, &g, SCALAR_FLAG_TOL);
    assert_eq!(r.verdict, Verdict::Fail, "{r:?}");
}

#[test]
fn funk_type_verdicts() {
    let e = entry("funk_type", "");
    let g = small_grid(&e);
    let k = classify_scalar_flag(&e.metric, &g, SCALAR_FLAG_TOL);
    assert!(k.passed() && k.scalar("K_max_abs").unwrap() < 1e-6, "{k:?}");
    assert!(classify_berwald(&e.metric, &g, BERWALD_TOL).residual > 1e-2);
    assert!(classify_douglas(&e.metric, &g, DOUGLAS_TOL).passed());
    assert!(classify_gdw(&e.metric, &g, GDW_TOL).passed());
    let s = classify_isotropic_s(&e.metric, &g, ISOTROPIC_S_TOL);
    assert_ne!(s.label.as_deref(), Some("vanishing"));
    assert!(s.scalar("inf_abs_S_over_F").unwrap() > 0.05);
}

#[test]
fn funk_type_mean_berwald_is_isotropic_for_the_funk_metric() {
    // G = Θ y with Θ the Funk metric, so E = (n+1)/2 Θ_yy = (n+1)/2 h^Θ / Θ
    let n = 2;
    let funk = "(sqrt((1-(x1^2+x2^2))*(y1^2+y2^2) + (x1*y1+x2*y2)^2) + x1*y1 + x2*y2)/(1-(x1^2+x2^2))";
    let theta = FinslerMetric::Generic(GenericMetric::new(parse_expr(funk, n).unwrap()).unwrap());
    let f = FinslerMetric::Generic(GenericMetric::new(parse_expr(&funk_type_expr(n), n).unwrap()).unwrap());
    for (x, y) in [([0.1, -0.2], [1.0, 0.3]), ([-0.3, 0.25], [-0.4, 0.9])] {
        let e = mean_berwald(&f, &x, &y).unwrap();
        let p = theta.fundamental_pack(&x, &y).unwrap();
        for j in 0..n {
            for k in 0..n {
                let want = 1.5 * p.h[j][k] / p.f;
                assert!((e.get(&[j, k]) - want).abs() < 1e-9, "{e}");
            }
        }
    }
    let e = entry("funk_type", "");
    let r = isotropic_mean_berwald_check(&e.metric, &small_grid(&e), MEAN_BERWALD_TOL);
    assert_eq!(r.verdict, Verdict::Fail, "{r:?}");
}

#[test]
fn hopf_uni_gdw_matches_high_precision_reference() {
    // reference from an independent 60-digit evaluation of G = G_α + α Q s^i_0
    let e = entry("killing_hopf", "");
    let (proj, _) = gdw_parts(&e.metric, &[0.2, -0.1, 0.15], &[0.3, 0.5, -0.4]).unwrap();
    assert!((proj.max_abs() - 2.598948542279).abs() < 1e-9, "{}", proj.max_abs());
    let sp = finsler_lab::curvature::Spray::new(&e.metric, &[0.2, -0.1, 0.15], &[0.3, 0.5, -0.4]).unwrap();
    let dh = sp.hderiv_contract(&sp.douglas_jet().unwrap()).unwrap().value();
    assert!((dh.get(&[0, 0, 0, 0]) - 3.7549648112108).abs() < 1e-9);
    assert!((dh.get(&[1, 0, 1, 2]) + 4.60676504503645).abs() < 1e-9);
}

#[test]
fn twodim_is_gdw_and_weyl_with_constant_s() {
    let e = entry("twodim_constant_s", "");
    let g = small_grid(&e);
    assert!(classify_gdw(&e.metric, &g, GDW_TOL).passed());
    assert!(classify_scalar_flag(&e.metric, &g, SCALAR_FLAG_TOL).passed());
    let s = classify_isotropic_s(&e.metric, &g, ISOTROPIC_S_TOL);
    assert_eq!(s.label.as_deref(), Some("constant"));
    assert!((s.scalar("c_mean").unwrap() - 0.1).abs() < 1e-6);
    let m = isotropic_mean_berwald_check(&e.metric, &g, MEAN_BERWALD_TOL);
    assert!(m.passed(), "{m:?}");
}

#[test]
fn reports_are_reproducible() {
    let e = entry("killing_hopf", "phi=square lambda=0.5");
    let g1 = small_grid(&e);
    let g2 = small_grid(&e);
    let a = classify_gdw(&e.metric, &g1, GDW_TOL).to_toml();
    let b = classify_gdw(&e.metric, &g2, GDW_TOL).to_toml();
    assert_eq!(a, b);
}
