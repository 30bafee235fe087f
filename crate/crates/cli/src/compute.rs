//! Pointwise quantities rendered as TOML with index-labelled components.

use std::fmt::Write as _;

use finsler_lab::curvature;
use finsler_lab::finsler::FinslerMetric;
use finsler_lab::geometry::beta_invariants;
use finsler_lab::linalg::Mat;
use finsler_lab::report::{float, float_array, quote};
use finsler_lab::scurv::{bh_sigma, s_curvature, SIGMA_TOL};
use finsler_lab::tensor::TensorValue;

use crate::error::CliError;

pub const QUANTITIES: &[(&str, &str)] = &[
    ("G", "spray coefficients G^i"),
    ("B", "Berwald curvature B^i_jkl"),
    ("E", "mean Berwald curvature E_ij"),
    ("D", "Douglas curvature D^i_jkl"),
    ("R", "Riemann curvature R^i_k"),
    ("C", "Cartan torsion C_ijk"),
    ("L", "Landsberg curvature L_ijk"),
    ("H", "H_ij = E_ij|m y^m"),
    ("S", "S-curvature (Busemann-Hausdorff)"),
    ("sigma", "Busemann-Hausdorff volume density (also accepted: σ)"),
    ("g", "fundamental tensor g_ij"),
    ("h", "angular metric h_ij"),
    ("BetaInvariants", "r_ij, s_ij, s^i_j, r_j, s_j, r_00, s_0, s^i_0, b^2"),
    ("QTPD", "Q, Q', Q'', Theta, Psi, Delta at (s, b)"),
];

pub struct Point<'a> {
    pub x: &'a [f64],
    pub y: Option<&'a [f64]>,
    /// Overrides for QTPD.
    pub s: Option<f64>,
    pub b: Option<f64>,
}

pub fn run_compute(metric: &FinslerMetric, label: &str, what: &str, p: &Point) -> Result<String, CliError> {
    let n = metric.dim();
    if p.x.len() != n {
        return Err(CliError::Usage(format!("--x needs {n} components")));
    }
    if let Some(y) = p.y {
        if y.len() != n {
            return Err(CliError::Usage(format!("--y needs {n} components")));
        }
    }
    let what = match what {
        "σ" => "sigma",
        "beta-invariants" => "BetaInvariants",
        "qtpd" => "QTPD",
        w => w,
    };
    if !QUANTITIES.iter().any(|(q, _)| *q == what) {
        let names: Vec<&str> = QUANTITIES.iter().map(|(q, _)| *q).collect();
        return Err(CliError::Usage(format!(
            "unknown quantity `{what}` (known: {})",
            names.join(", ")
        )));
    }
    let x = p.x;
    let need_y = || {
        p.y.ok_or_else(|| CliError::Usage(format!("{what} needs --y")))
    };
    let ctx = |name: &str| CliError::eval(format!("computing {name}"));

    let mut out = String::new();
    writeln!(out, "metric = {}", quote(label)).unwrap();
    writeln!(out, "quantity = {}", quote(what)).unwrap();
    writeln!(out, "x = {}", float_array(x)).unwrap();
    if let Some(y) = p.y {
        writeln!(out, "y = {}", float_array(y)).unwrap();
    }
    writeln!(out, "\n[values]").unwrap();

    match what {
        "S" => {
            let y = need_y()?;
            let v = s_curvature(metric, x, y).map_err(ctx("S"))?;
            scalar(&mut out, "S", v);
        }
        "sigma" => {
            let v = bh_sigma(metric, x, SIGMA_TOL).map_err(ctx("sigma"))?;
            scalar(&mut out, "sigma", v.sigma);
            scalar(&mut out, "ln_sigma", v.ln_sigma);
            scalar(&mut out, "ln_sigma_error", v.error);
            writeln!(out, "nodes = {}", v.nodes).unwrap();
            if let Some(w) = &v.warning {
                writeln!(out, "warning = {}", quote(w)).unwrap();
            }
        }
        "g" | "h" => {
            let y = need_y()?;
            let pack = metric.fundamental_pack(x, y).map_err(ctx(what))?;
            scalar(&mut out, "F", pack.f);
            matrix(&mut out, what, if what == "g" { &pack.g } else { &pack.h });
        }
        "BetaInvariants" => {
            let y = need_y()?;
            let ab = metric
                .as_ab()
                .ok_or_else(|| CliError::Usage("BetaInvariants needs an (alpha, beta)-metric".into()))?;
            let v = beta_invariants(&ab.a, &ab.beta, x, y).map_err(ctx(what))?;
            matrix(&mut out, "r", &v.r_ij);
            matrix(&mut out, "s", &v.s_ij);
            for (i, row) in v.s_up.iter().enumerate() {
                for (j, val) in row.iter().enumerate() {
                    scalar(&mut out, &format!("s^{}_{}", i + 1, j + 1), *val);
                }
            }
            vector(&mut out, "r_", &v.r_j);
            vector(&mut out, "s_", &v.s_j);
            scalar(&mut out, "r_0", v.r_0);
            scalar(&mut out, "s_0", v.s_0);
            scalar(&mut out, "r_00", v.r_00);
            vector(&mut out, "s0^", &v.s_i0);
            scalar(&mut out, "b2", v.b2);
        }
        "QTPD" => {
            let ab = metric
                .as_ab()
                .ok_or_else(|| CliError::Usage("QTPD needs an (alpha, beta)-metric".into()))?;
            let s = match (p.s, p.y) {
                (Some(s), _) => s,
                (None, Some(y)) => ab.s_value(x, y).map_err(ctx("s = beta/alpha"))?,
                (None, None) => return Err(CliError::Usage("QTPD needs --s or --y".into())),
            };
            let b = match p.b {
                Some(b) => b,
                None => ab.b_norm(x).map_err(ctx("b = ||beta||_alpha"))?,
            };
            let t = ab.phi.q_theta_psi(s, b).map_err(ctx("QTPD"))?;
            for (k, v) in [
                ("s", t.s),
                ("b", t.b),
                ("Q", t.q),
                ("Q'", t.q1),
                ("Q''", t.q2),
                ("Theta", t.theta),
                ("Psi", t.psi),
                ("Delta", t.delta),
            ] {
                scalar(&mut out, k, v);
            }
        }
        _ => {
            let y = need_y()?;
            let t = match what {
                "G" => metric.spray(x, y),
                "B" => curvature::berwald(metric, x, y),
                "E" => curvature::mean_berwald(metric, x, y),
                "D" => curvature::douglas(metric, x, y),
                "R" => curvature::riemann_ry(metric, x, y),
                "C" => metric.cartan_torsion(x, y),
                "L" => curvature::landsberg(metric, x, y),
                _ => curvature::h_tensor(metric, x, y),
            }
            .map_err(ctx(what))?;
            tensor(&mut out, what, &t);
        }
    }
    Ok(out)
}

fn scalar(out: &mut String, key: &str, v: f64) {
    writeln!(out, "{} = {}", quote(key), float(v)).unwrap();
}

fn vector(out: &mut String, prefix: &str, v: &[f64]) {
    for (i, x) in v.iter().enumerate() {
        scalar(out, &format!("{prefix}{}", i + 1), *x);
    }
}

fn matrix(out: &mut String, name: &str, m: &Mat) {
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            scalar(out, &format!("{name}_{}{}", i + 1, j + 1), *v);
        }
    }
}

fn tensor(out: &mut String, name: &str, t: &TensorValue) {
    for (idx, v) in t.indices().iter().zip(&t.data) {
        scalar(out, &t.label(name, idx), *v);
    }
}
