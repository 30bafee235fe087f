use finsler_lab::phi::{
    parse_phi_spec, phi_uni, randers_type_fit, regularity_check, s_grid, solve_isotropic_ode,
    PhiFamily,
};

fn grid(b: f64) -> Vec<f64> {
    s_grid(0.9 * b, 37)
}

#[test]
fn uni_q_matches_closed_form() {
    let (k, q, b) = (0.5, 1.0, 1.0);
    let phi = phi_uni(1.0, k, q, b).unwrap();
    assert_eq!(phi.value(0.0).unwrap(), 1.0);
    for s in grid(b) {
        let t = phi.q_theta_psi(s, b).unwrap();
        let r = (b * b - s * s).sqrt();
        assert!((t.q - (k * s + q * r)).abs() < 1e-9, "s={s}: {}", t.q);
        let ode = (b * b - s * s) * t.q2 + (t.q - s * t.q1);
        assert!(ode.abs() < 1e-9, "s={s}: {ode}");
    }
}

#[test]
fn uni_scales_with_c() {
    let a = phi_uni(1.0, 0.3, 0.7, 0.8).unwrap();
    let b = phi_uni(2.5, 0.3, 0.7, 0.8).unwrap();
    for s in [-0.5, 0.1, 0.6] {
        assert!((2.5 * a.value(s).unwrap() - b.value(s).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn q_definition_is_consistent() {
    let fams = [
        PhiFamily::square(),
        PhiFamily::matsumoto(),
        PhiFamily::randers_type(1.2, 0.4, -0.3).unwrap(),
        phi_uni(1.0, 0.5, 1.0, 1.0).unwrap(),
        solve_isotropic_ode(0.2, 3, 1.0, 0.1, 0.0).unwrap(),
    ];
    for phi in &fams {
        for s in [-0.3, 0.0, 0.2] {
            let d = phi.phi_jet(s, 2).unwrap();
            let q = d[1] / (d[0] - s * d[1]);
            let t = phi.q_theta_psi(s, 0.45).unwrap();
            assert!((q - t.q).abs() < 1e-12 * (1.0 + q.abs()), "{phi} at {s}");
            let delta = 1.0 + s * t.q + (0.45f64.powi(2) - s * s) * t.q1;
            assert!((delta - t.delta).abs() < 1e-12);
        }
    }
}

#[test]
fn matsumoto_and_square_at_origin() {
    let t = PhiFamily::matsumoto().q_theta_psi(0.0, 0.3).unwrap();
    assert_eq!(t.q, 1.0);
    let t = PhiFamily::square().q_theta_psi(0.0, 0.3).unwrap();
    assert_eq!(t.q, 2.0);
}

#[test]
fn ode_linear_q_gives_randers_type() {
    // k = 0 and Q = λs make both terms of Φ vanish
    let lam = 0.6;
    let phi = solve_isotropic_ode(0.0, 3, 1.0, 0.0, lam).unwrap();
    for s in grid(1.0) {
        let t = phi.q_theta_psi(s, 1.0).unwrap();
        assert!((t.q - lam * s).abs() < 1e-9, "s={s}");
        let exact = (1.0 + lam * s * s).sqrt();
        assert!((phi.value(s).unwrap() - exact).abs() < 1e-9);
    }
}

#[test]
fn uni_with_k_zero_is_not_a_k_zero_solution() {
    // Φ = −n q b²/√(b²−s²) for Q = q√(b²−s²), so the isotropic-S equation
    // with k = 0 is not satisfied and its solution leaves the uni family
    let (q, b, n) = (0.8, 1.0, 3);
    let uni = phi_uni(1.0, 0.0, q, b).unwrap();
    for s in [-0.5, 0.0, 0.4] {
        let cap = uni.phi_capital(s, b, n).unwrap();
        let expect = -(n as f64) * q * b * b / (b * b - s * s).sqrt();
        assert!((cap - expect).abs() < 1e-9);
    }
    let ode = solve_isotropic_ode(0.0, n, b, q * b, 0.0).unwrap();
    let t = ode.q_theta_psi(0.4, b).unwrap();
    assert!((t.q - q * (b * b - 0.16f64).sqrt()).abs() > 1e-3);
}

#[test]
fn ode_solution_matches_its_taylor_expansion() {
    let phi = solve_isotropic_ode(0.25, 3, 1.0, 0.1, -0.2).unwrap();
    let c = phi.taylor(0.0, 8).unwrap();
    for h in [0.02, -0.03] {
        let series: f64 = c.iter().rev().fold(0.0, |acc, v| acc * h + v);
        assert!((phi.value(h).unwrap() - series).abs() < 1e-10);
    }
}

#[test]
fn ode_with_zero_data_is_trivial() {
    let phi = solve_isotropic_ode(0.0, 2, 1.0, 0.0, 0.0).unwrap();
    for s in [-0.9, 0.4] {
        assert!((phi.value(s).unwrap() - 1.0).abs() < 1e-14);
    }
    assert!(phi.value(0.97).is_err());
}

#[test]
fn regularity_verdicts() {
    let r = regularity_check(&PhiFamily::square(), 0.5, &s_grid(0.5, 101));
    assert_eq!(r.label.as_deref(), Some("regular"));
    assert!(r.scalar("min_margin").unwrap() > 0.0);

    let r = regularity_check(&PhiFamily::matsumoto(), 0.9, &s_grid(0.9, 101));
    assert_eq!(r.label.as_deref(), Some("irregular"));
    assert!(r.witness.unwrap().y[0] > 0.5);

    let uni = phi_uni(1.0, 0.0, 1.0, 1.0).unwrap();
    let r = regularity_check(&uni, 1.0, &s_grid(1.0, 101));
    assert_eq!(r.label.as_deref(), Some("almost-regular"));
    assert_eq!(r.failures, 2);
}

#[test]
fn randers_type_fits() {
    let exact = PhiFamily::randers_type(1.0, 1.0, 2.0).unwrap();
    let f = randers_type_fit(&exact, 1.0);
    assert!(f.residual < 1e-10);
    assert!((f.c1 - 1.0).abs() < 1e-9 && (f.c2 - 1.0).abs() < 1e-9 && (f.c3 - 2.0).abs() < 1e-9);

    let f = randers_type_fit(&PhiFamily::square(), 1.0);
    assert!(f.residual > 1e-3, "{f:?}");
    assert!(!f.is_randers_type());

    let uni0 = phi_uni(1.0, 0.6, 0.0, 1.0).unwrap();
    let f = randers_type_fit(&uni0, 1.0);
    assert!(f.residual < 1e-10, "{f:?}");
    assert!(f.c3.abs() < 1e-10 && (f.c2 - 0.6).abs() < 1e-8);

    let uni1 = phi_uni(1.0, 0.0, 1.0, 1.0).unwrap();
    assert!(randers_type_fit(&uni1, 1.0).residual > 1e-8);
}

#[test]
fn ode_spec_defaults() {
    let phi = parse_phi_spec("odeP:0.1,2,1").unwrap();
    assert_eq!(phi.to_string(), "odeP:0.1,2,1,0,0");
}
