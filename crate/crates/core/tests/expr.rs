use std::collections::HashMap;

use approx::assert_relative_eq;
use finsler_lab::expr::parse_expr;
use proptest::prelude::*;

/// A small expression tree rendered to source and evaluated directly.
#[derive(Clone, Debug)]
enum T {
    Num(f64),
    X(usize),
    Y(usize),
    Neg(Box<T>),
    Add(Box<T>, Box<T>),
    Sub(Box<T>, Box<T>),
    Mul(Box<T>, Box<T>),
    Div(Box<T>, Box<T>),
    Sin(Box<T>),
    Cos(Box<T>),
    Exp(Box<T>),
    Sq(Box<T>),
}

impl T {
    fn src(&self) -> String {
        match self {
            T::Num(v) => format!("{v}"),
            T::X(i) => format!("x{}", i + 1),
            T::Y(i) => format!("y{}", i + 1),
            T::Neg(a) => format!("-({})", a.src()),
            T::Add(a, b) => format!("{} + {}", a.src(), b.src()),
            T::Sub(a, b) => format!("{} - ({})", a.src(), b.src()),
            T::Mul(a, b) => format!("({})*({})", a.src(), b.src()),
            // denominator kept away from zero
            T::Div(a, b) => format!("({})/(2 + ({})^2)", a.src(), b.src()),
            T::Sin(a) => format!("sin({})", a.src()),
            T::Cos(a) => format!("cos({})", a.src()),
            T::Exp(a) => format!("exp(0.1*({}))", a.src()),
            T::Sq(a) => format!("({})^2", a.src()),
        }
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            T::Num(v) => *v,
            T::X(i) => x[*i],
            T::Y(i) => y[*i],
            T::Neg(a) => -a.eval(x, y),
            T::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            T::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            T::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            T::Div(a, b) => a.eval(x, y) / (2.0 + b.eval(x, y).powi(2)),
            T::Sin(a) => a.eval(x, y).sin(),
            T::Cos(a) => a.eval(x, y).cos(),
            T::Exp(a) => (0.1 * a.eval(x, y)).exp(),
            T::Sq(a) => a.eval(x, y).powi(2),
        }
    }
}

fn tree() -> impl Strategy<Value = T> {
    let leaf = prop_oneof![
        (-3.0..3.0f64).prop_map(|v| T::Num((v * 100.0).round() / 100.0)),
        (0..3usize).prop_map(T::X),
        (0..3usize).prop_map(T::Y),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let b = |f: fn(Box<T>, Box<T>) -> T| (inner.clone(), inner.clone()).prop_map(move |(a, c)| f(Box::new(a), Box::new(c)));
        prop_oneof![
            inner.clone().prop_map(|a| T::Neg(Box::new(a))),
            inner.clone().prop_map(|a| T::Sin(Box::new(a))),
            inner.clone().prop_map(|a| T::Cos(Box::new(a))),
            inner.clone().prop_map(|a| T::Exp(Box::new(a))),
            inner.clone().prop_map(|a| T::Sq(Box::new(a))),
            b(T::Add),
            b(T::Sub),
            b(T::Mul),
            b(T::Div),
        ]
    })
}

fn coords() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.0..1.0f64, 3),
        prop::collection::vec(-1.0..1.0f64, 3),
    )
}

proptest! {
    #[test]
    fn print_then_parse_is_structural_identity(t in tree()) {
        let e = parse_expr(&t.src(), 3).unwrap();
        let again = parse_expr(&e.to_string(), 3).unwrap();
        prop_assert_eq!(&e, &again);
        prop_assert_eq!(e.to_string(), again.to_string());
    }

    #[test]
    fn evaluation_matches_direct_arithmetic(t in tree(), (x, y) in coords()) {
        let e = parse_expr(&t.src(), 3).unwrap();
        let got = e.eval(&x, &y, &HashMap::new()).unwrap();
        let want = t.eval(&x, &y);
        assert_relative_eq!(got, want, epsilon = 1e-12, max_relative = 1e-12);
    }
}

#[test]
fn domain_errors_name_the_subexpression() {
    let e = parse_expr("1 + sqrt(1 - x1^2)", 1).unwrap();
    let msg = e.eval(&[2.0], &[0.0], &HashMap::new()).unwrap_err().to_string();
    assert!(msg.contains("sqrt"), "{msg}");
}
