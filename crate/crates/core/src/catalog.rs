//! Built-in example metrics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::parse_expr;
use crate::finsler::{ABMetric, FinslerMetric, GenericMetric};
use crate::geometry::{beta_invariants, OneForm, RiemannMetric};
use crate::grid::GridSpec;
use crate::phi::{parse_phi_spec, PhiFamily, PhiKind};

/// Named string parameters, e.g. `k=0.1`, `phi=uni:1,0.5,1,1`.
pub type Params = BTreeMap<String, String>;

/// Parses whitespace-separated `key=value` pairs. Values cannot contain spaces.
pub fn parse_params(text: &str) -> Result<Params> {
    let mut out = Params::new();
    for item in text.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Catalog(format!("parameter `{item}` is not key=value")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// A predicate outcome the entry is known to produce.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    pub predicate: &'static str,
    pub holds: bool,
    pub reason: &'static str,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub metric: FinslerMetric,
    /// Box of the default sample grid.
    pub grid: GridSpec,
    pub expected: Vec<Expectation>,
    pub description: String,
}

impl CatalogEntry {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }
}

pub const CATALOG: &[(&str, &str)] = &[
    ("euclid_parallel", "n=3 phi=square b=0.3: Euclidean alpha, constant beta = b dx1"),
    ("funk_type", "n=2: Berwald's projectively flat metric on the unit ball"),
    ("twodim_constant_s", "k=0.1 q0=0 q0p=0: alpha = dx1^2 + e^{2x1} dx2^2, beta = dx1, phi from the isotropic-S ODE"),
    ("killing_hopf", "phi=uni:1,0.5,1,1 lambda=<b of phi or 0.5>: round S^3 (stereographic) with lambda times the Hopf 1-form"),
    ("product", "phi=square b=0.3: alpha = dx1^2 + dx2^2 + e^{2x2} dx3^2, beta = b dx1 (parallel)"),
    ("square", "a=<rows> beta=<components>: alpha + 2 beta + beta^2/alpha"),
    ("matsumoto", "a=<rows> beta=<components>: alpha^2/(alpha - beta)"),
    ("randers", "c1 c2 c3 a=<rows> beta=<components>: c1 sqrt(alpha^2 + c2 beta^2) + c3 beta"),
];

fn get_f64(p: &Params, key: &str, default: f64) -> Result<f64> {
    match p.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Catalog(format!("parameter `{key}` = `{v}` is not a number"))),
    }
}

fn get_usize(p: &Params, key: &str, default: usize) -> Result<usize> {
    let v = get_f64(p, key, default as f64)?;
    if v.fract() != 0.0 || v < 1.0 {
        return Err(Error::Catalog(format!("parameter `{key}` must be a positive integer")));
    }
    Ok(v as usize)
}

fn check_known(p: &Params, known: &[&str]) -> Result<()> {
    for k in p.keys() {
        if !known.contains(&k.as_str()) {
            return Err(Error::Catalog(format!(
                "unknown parameter `{k}` (expected one of: {})",
                known.join(", ")
            )));
        }
    }
    Ok(())
}

/// Parses `a` as rows separated by `;` and entries by `,` (e.g. `1,0;0,exp(2*x1)`),
/// or `diag:e1,e2,...`.
pub fn parse_riemann(text: &str) -> Result<RiemannMetric> {
    if let Some(d) = text.strip_prefix("diag:") {
        let entries: Vec<&str> = d.split(',').map(str::trim).collect();
        return RiemannMetric::diagonal(&entries);
    }
    let rows: Vec<Vec<&str>> = text
        .split(';')
        .map(|r| r.split(',').map(str::trim).collect())
        .collect();
    RiemannMetric::parse(&rows)
}

pub fn parse_one_form(text: &str) -> Result<OneForm> {
    let comps: Vec<&str> = text.split(',').map(str::trim).collect();
    OneForm::parse(&comps)
}

fn ab(a: RiemannMetric, beta: OneForm, phi: PhiFamily) -> Result<FinslerMetric> {
    Ok(FinslerMetric::AB(ABMetric::new(a, beta, phi)?))
}

fn exp(predicate: &'static str, holds: bool, reason: &'static str) -> Expectation {
    Expectation {
        predicate,
        holds,
        reason,
    }
}

fn unit_dx1(n: usize, b: f64) -> Result<OneForm> {
    let comps: Vec<String> = (0..n).map(|i| if i == 0 { b.to_string() } else { "0".into() }).collect();
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    OneForm::parse(&refs)
}

/// Berwald's metric `(√((1−|x|²)|y|² + ⟨x,y⟩²) + ⟨x,y⟩)² / ((1−|x|²)² √(…))`.
pub fn funk_type_expr(n: usize) -> String {
    let sum = |f: &dyn Fn(usize) -> String| (1..=n).map(f).collect::<Vec<_>>().join("+");
    let xx = sum(&|i| format!("x{i}^2"));
    let yy = sum(&|i| format!("y{i}^2"));
    let xy = sum(&|i| format!("x{i}*y{i}"));
    let rt = format!("sqrt((1-({xx}))*({yy}) + ({xy})^2)");
    format!("({rt} + ({xy}))^2 / ((1-({xx}))^2 * {rt})")
}

/// The Hopf 1-form on the unit 3-sphere in stereographic coordinates, scaled by `lambda`.
pub fn hopf_form(lambda: f64) -> Result<OneForm> {
    let d2 = "(1+x1^2+x2^2+x3^2)^2";
    OneForm::parse(&[
        &format!("{lambda}*4*(x1*x3-x2)/{d2}"),
        &format!("{lambda}*4*(x2*x3+x1)/{d2}"),
        &format!("{lambda}*2*(1+x3^2-x1^2-x2^2)/{d2}"),
    ])
}

pub fn round_sphere3() -> Result<RiemannMetric> {
    let c = "4/(1+x1^2+x2^2+x3^2)^2";
    RiemannMetric::diagonal(&[c, c, c])
}

/// Checks `r_ij = 0`, `s_j = 0` and `‖s_ij‖ > 0.1` at a few points.
fn killing_self_check(a: &RiemannMetric, beta: &OneForm) -> Result<()> {
    let pts = [
        [0.0, 0.0, 0.0],
        [0.3, -0.2, 0.1],
        [-0.4, 0.25, 0.35],
        [0.1, 0.45, -0.3],
    ];
    for x in &pts {
        let inv = beta_invariants(a, beta, x, &[1.0, 0.0, 0.0])?;
        let r = inv.r_ij.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let sj = inv.s_j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = inv.s_ij.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        if r >= 1e-8 || sj >= 1e-8 || s <= 0.1 {
            return Err(Error::Catalog(format!(
                "killing_hopf self-check failed at x={x:?}: max|r_ij| = {r:.3e}, max|s_j| = {sj:.3e}, |s_ij| = {s:.3e}"
            )));
        }
    }
    Ok(())
}

pub fn catalog_get(name: &str, params: &Params) -> Result<CatalogEntry> {
    let p = params;
    let (metric, grid, expected) = match name {
        "euclid_parallel" => {
            check_known(p, &["n", "phi", "b"])?;
            let n = get_usize(p, "n", 3)?;
            let phi = parse_phi_spec(p.get("phi").map_or("square", String::as_str))?;
            let b = get_f64(p, "b", 0.3)?;
            let m = ab(RiemannMetric::euclidean(n), unit_dx1(n, b)?, phi)?;
            (
                m,
                GridSpec::cube(n, 0.5),
                vec![
                    exp("berwald", true, "constant beta on flat alpha gives a quadratic spray"),
                    exp("douglas", true, "Berwald implies Douglas"),
                    exp("gdw", true, "Berwald implies GDW"),
                ],
            )
        }
        "funk_type" => {
            check_known(p, &["n"])?;
            let n = get_usize(p, "n", 2)?;
            let f = parse_expr(&funk_type_expr(n), n)?;
            (
                FinslerMetric::Generic(GenericMetric::new(f)?),
                GridSpec::cube(n, 0.35),
                vec![
                    exp("scalar_flag", true, "projectively flat with K = 0"),
                    exp("berwald", false, "not a Berwald metric"),
                    exp("douglas", true, "projectively flat"),
                    exp("gdw", true, "Weyl metrics are GDW"),
                ],
            )
        }
        "twodim_constant_s" => {
            check_known(p, &["k", "q0", "q0p"])?;
            let k = get_f64(p, "k", 0.1)?;
            let q0 = get_f64(p, "q0", 0.0)?;
            let q0p = get_f64(p, "q0p", 0.0)?;
            let phi = crate::phi::solve_isotropic_ode(k, 2, 1.0, q0, q0p)?;
            let a = RiemannMetric::diagonal(&["1", "exp(2*x1)"])?;
            (
                ab(a, OneForm::parse(&["1", "0"])?, phi)?,
                GridSpec::cube(2, 0.5),
                vec![
                    exp("isotropic_s", true, "S = 3kF"),
                    exp("gdw", true, "two-dimensional metrics are Weyl, hence GDW"),
                    exp("scalar_flag", true, "two-dimensional metrics are Weyl"),
                ],
            )
        }
        "killing_hopf" => {
            check_known(p, &["phi", "lambda"])?;
            let phi = parse_phi_spec(p.get("phi").map_or("uni:1,0.5,1,1", String::as_str))?;
            let default_lambda = match phi.kind {
                PhiKind::Uni { b, .. } => b,
                _ => 0.5,
            };
            let lambda = get_f64(p, "lambda", default_lambda)?;
            let a = round_sphere3()?;
            let beta = hopf_form(lambda)?;
            killing_self_check(&a, &beta)?;
            let uni = matches!(phi.kind, PhiKind::Uni { .. });
            let expected = if uni {
                vec![
                    exp("isotropic_s", true, "r_ij = 0 and s_j = 0 give S = 0"),
                    exp("berwald", false, "uni family on a non-closed Killing form"),
                    exp("douglas", false, "not Douglas"),
                    exp("gdw", false, "h·D|0 is of order one; the uni family meets only a necessary condition for GDW"),
                ]
            } else {
                vec![exp("isotropic_s", true, "r_ij = 0 and s_j = 0 give S = 0")]
            };
            (ab(a, beta, phi)?, GridSpec::cube(3, 0.5), expected)
        }
        "product" => {
            check_known(p, &["phi", "b"])?;
            let phi = parse_phi_spec(p.get("phi").map_or("square", String::as_str))?;
            let b = get_f64(p, "b", 0.3)?;
            let a = RiemannMetric::diagonal(&["1", "1", "exp(2*x2)"])?;
            (
                ab(a, unit_dx1(3, b)?, phi)?,
                GridSpec::cube(3, 0.5),
                vec![
                    exp("berwald", true, "dx1 is parallel for this alpha"),
                    exp("isotropic_s", true, "parallel beta gives S = 0"),
                ],
            )
        }
        "square" | "matsumoto" | "randers" => {
            let mut known = vec!["a", "beta"];
            if name == "randers" {
                known.extend(["c1", "c2", "c3"]);
            }
            check_known(p, &known)?;
            let beta_s = p
                .get("beta")
                .ok_or_else(|| Error::Catalog(format!("{name} needs beta=<components>")))?;
            let beta = parse_one_form(beta_s)?;
            let n = beta.dim();
            let a = match p.get("a") {
                Some(s) => parse_riemann(s)?,
                None => RiemannMetric::euclidean(n),
            };
            let phi = match name {
                "square" => PhiFamily::square(),
                "matsumoto" => PhiFamily::matsumoto(),
                _ => PhiFamily::randers_type(
                    get_f64(p, "c1", 1.0)?,
                    get_f64(p, "c2", 0.0)?,
                    get_f64(p, "c3", 1.0)?,
                )?,
            };
            (ab(a, beta, phi)?, GridSpec::cube(n, 0.5), vec![])
        }
        other => {
            let names: Vec<&str> = CATALOG.iter().map(|(n, _)| *n).collect();
            return Err(Error::Catalog(format!(
                "unknown catalog entry `{other}` (known: {})",
                names.join(", ")
            )));
        }
    };
    let description = CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .map_or(String::new(), |(_, d)| d.to_string());
    Ok(CatalogEntry {
        name: name.to_string(),
        metric,
        grid,
        expected,
        description,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn funk_type_at_origin() {
        let e = catalog_get("funk_type", &parse_params("n=2").unwrap()).unwrap();
        assert!((e.metric.f_value(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hopf_self_check_passes_and_rejects_bad_forms() {
        assert!(catalog_get("killing_hopf", &Params::new()).is_ok());
        let a = round_sphere3().unwrap();
        let bad = OneForm::parse(&["1", "0", "0"]).unwrap();
        assert!(matches!(killing_self_check(&a, &bad), Err(Error::Catalog(_))));
    }

    #[test]
    fn builders_parse_specs() {
        let p = parse_params("a=1,0;0,exp(2*x1) beta=0.2*cos(x2),0.3*x1").unwrap();
        let e = catalog_get("matsumoto", &p).unwrap();
        assert_eq!(e.dim(), 2);
        let p = parse_params("a=diag:1,1 beta=0.1,0.2 c1=1 c2=0 c3=1").unwrap();
        assert!(catalog_get("randers", &p).is_ok());
        assert!(catalog_get("nope", &Params::new()).is_err());
        assert!(catalog_get("funk_type", &parse_params("m=2").unwrap()).is_err());
    }
}
