use finsler_lab::catalog::{catalog_get, parse_params, CATALOG};
use finsler_lab::classify::run_predicate;
use finsler_lab::grid::SampleGrid;
use finsler_lab::scurv::s_curvature;

#[test]
fn documented_verdicts_are_reproduced() {
    for (name, _) in CATALOG {
        let Ok(e) = catalog_get(name, &parse_params("").unwrap()) else {
            // builders without defaults need a and beta
            continue;
        };
        let g = SampleGrid::build(&e.metric, &e.grid.clone().with_counts(8, 12)).unwrap();
        for x in &e.expected {
            let r = run_predicate(x.predicate, &e.metric, &g, None).unwrap();
            let label_ok = match x.predicate {
                "isotropic_s" => r.label.as_deref() != Some("none"),
                _ => r.passed(),
            };
            assert_eq!(label_ok, x.holds, "{name}/{}: {}\n{r:?}", x.predicate, x.reason);
        }
    }
}

#[test]
fn twodim_with_k_zero_has_vanishing_s() {
    let e = catalog_get("twodim_constant_s", &parse_params("k=0").unwrap()).unwrap();
    for (x, y) in [([0.1, 0.2], [0.3, 0.9]), ([-0.3, 0.0], [-0.2, 0.5])] {
        let s = s_curvature(&e.metric, &x, &y).unwrap();
        assert!(s.abs() < 1e-8, "{s}");
    }
}

#[test]
fn builders_require_beta() {
    assert!(catalog_get("square", &parse_params("").unwrap()).is_err());
    assert!(catalog_get("killing_hopf", &parse_params("phi=bogus").unwrap()).is_err());
}
