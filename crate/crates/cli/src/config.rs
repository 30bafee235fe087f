//! Run configuration: TOML file plus command-line overrides.
//!
//! ```toml
//! [metric]
//! catalog = "square"                 # a catalog entry ...
//! params = "beta=0.2*x2,0.1"
//! # ... or an inline (alpha, beta)-metric
//! a = [["1", "0"], ["0", "exp(2*x1)"]]
//! beta = ["0.2", "0.1*x1"]
//! phi = "matsumoto"
//! # ... or an inline F
//! F = "sqrt(y1^2 + y2^2)"
//! dim = 2
//!
//! [grid]
//! lo = [-0.5, -0.5]
//! hi = [0.5, 0.5]
//! nx = 16
//! ny = 32
//! seed = 0
//!
//! predicates = ["berwald", "gdw"]   # top level, before any table
//! [tolerances]
//! gdw = 1e-5
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use finsler_lab::catalog::{catalog_get, parse_params};
use finsler_lab::expr::parse_expr;
use finsler_lab::finsler::{ABMetric, FinslerMetric, GenericMetric};
use finsler_lab::geometry::{OneForm, RiemannMetric};
use finsler_lab::grid::GridSpec;
use finsler_lab::phi::parse_phi_spec;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub predicates: Vec<String>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub metric: Option<MetricConfig>,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub catalog: Option<String>,
    pub params: Option<String>,
    pub a: Option<Vec<Vec<String>>>,
    pub beta: Option<Vec<String>>,
    pub phi: Option<String>,
    #[serde(rename = "F")]
    pub f: Option<String>,
    pub dim: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        for (k, t) in &cfg.tolerances {
            if !(*t > 0.0) {
                return Err(CliError::Usage(format!("tolerance for `{k}` must be positive")));
            }
        }
        Ok(cfg)
    }
}

/// A resolved metric with its label and default sample box.
pub struct Resolved {
    pub label: String,
    pub metric: FinslerMetric,
    pub grid: GridSpec,
}

/// Flags take precedence over the config file.
pub fn resolve_metric(
    flag_metric: Option<&str>,
    flag_params: Option<&str>,
    cfg: &RunConfig,
) -> Result<Resolved, CliError> {
    let mc = cfg.metric.as_ref();
    let catalog = flag_metric.or(mc.and_then(|m| m.catalog.as_deref()));
    let params = flag_params.or(mc.and_then(|m| m.params.as_deref())).unwrap_or("");
    if let Some(name) = catalog {
        let p = parse_params(params).map_err(CliError::from_core)?;
        let e = catalog_get(name, &p).map_err(CliError::from_core)?;
        let label = if params.is_empty() {
            name.to_string()
        } else {
            format!("{name} {params}")
        };
        return Ok(Resolved {
            label,
            metric: e.metric,
            grid: e.grid,
        });
    }
    let Some(mc) = mc else {
        return Err(CliError::Usage(
            "no metric given: use --metric <catalog entry> or a [metric] table in --config".into(),
        ));
    };
    if let Some(f) = &mc.f {
        if mc.a.is_some() || mc.beta.is_some() || mc.phi.is_some() {
            return Err(CliError::Usage("[metric] sets both F and a/beta/phi".into()));
        }
        let n = mc
            .dim
            .ok_or_else(|| CliError::Usage("[metric] with F needs dim".into()))?;
        let expr = parse_expr(f, n).map_err(CliError::from_core)?;
        let metric = FinslerMetric::Generic(GenericMetric::new(expr).map_err(CliError::from_core)?);
        return Ok(Resolved {
            label: format!("F = {f}"),
            metric,
            grid: GridSpec::cube(n, 0.5),
        });
    }
    let beta = mc
        .beta
        .as_ref()
        .ok_or_else(|| CliError::Usage("[metric] needs catalog, F, or beta".into()))?;
    let n = beta.len();
    if mc.dim.is_some_and(|d| d != n) {
        return Err(CliError::Usage(format!("dim does not match the {n} components of beta")));
    }
    let comps: Vec<&str> = beta.iter().map(String::as_str).collect();
    let beta_form = OneForm::parse(&comps).map_err(CliError::from_core)?;
    let a = match &mc.a {
        Some(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(CliError::Usage(format!("a must be a {n}x{n} matrix")));
            }
            let rows: Vec<Vec<&str>> = rows
                .iter()
                .map(|r| r.iter().map(String::as_str).collect())
                .collect();
            RiemannMetric::parse(&rows).map_err(CliError::from_core)?
        }
        None => RiemannMetric::euclidean(n),
    };
    let phi_s = mc.phi.as_deref().unwrap_or("square");
    let phi = parse_phi_spec(phi_s).map_err(CliError::from_core)?;
    let metric = FinslerMetric::AB(ABMetric::new(a, beta_form, phi).map_err(CliError::from_core)?);
    Ok(Resolved {
        label: format!("inline phi={phi_s}"),
        metric,
        grid: GridSpec::cube(n, 0.5),
    })
}

/// Parses `NXxNY`, e.g. `16x32`.
pub fn parse_counts(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NXxNY, got `{s}`"))?;
    let nx = a.trim().parse().map_err(|_| format!("bad count `{a}`"))?;
    let ny = b.trim().parse().map_err(|_| format!("bad count `{b}`"))?;
    Ok((nx, ny))
}

pub fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", t.trim())))
        .collect()
}

/// Applies the `[grid]` table and then the flags to a default box.
pub fn grid_spec(
    base: GridSpec,
    cfg: &RunConfig,
    counts: Option<(usize, usize)>,
    seed: Option<u64>,
) -> GridSpec {
    let mut g = base;
    if let Some(gc) = &cfg.grid {
        if let Some(lo) = &gc.lo {
            g.lo = lo.clone();
        }
        if let Some(hi) = &gc.hi {
            g.hi = hi.clone();
        }
        g.nx = gc.nx.unwrap_or(g.nx);
        g.ny = gc.ny.unwrap_or(g.ny);
        g.seed = gc.seed.unwrap_or(g.seed);
    }
    if let Some((nx, ny)) = counts {
        g = g.with_counts(nx, ny);
    }
    if let Some(s) = seed {
        g = g.with_seed(s);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_points() {
        assert_eq!(parse_counts("16x32"), Ok((16, 32)));
        assert!(parse_counts("16").is_err());
        assert_eq!(parse_point("0.1, -2"), Ok(vec![0.1, -2.0]));
        assert!(parse_point("a,1").is_err());
    }

    #[test]
    fn inline_metrics() {
        let cfg: RunConfig = toml::from_str(
            r#"
            [metric]
            a = [["1", "0"], ["0", "exp(2*x1)"]]
            beta = ["0.2", "0.1*x1"]
            phi = "matsumoto"
            "#,
        )
        .unwrap();
        assert_eq!(resolve_metric(None, None, &cfg).ok().unwrap().metric.dim(), 2);

        let cfg: RunConfig = toml::from_str("[metric]\nF = \"sqrt(y1^2+y2^2+y3^2)\"\ndim = 3").unwrap();
        assert!(resolve_metric(None, None, &cfg).is_ok());

        let cfg: RunConfig = toml::from_str("[metric]\nbeta = [\"0.1\"]\ndim = 2").unwrap();
        assert!(matches!(resolve_metric(None, None, &cfg), Err(CliError::Usage(_))));
    }

    #[test]
    fn flags_override_the_grid_table() {
        let cfg: RunConfig = toml::from_str("[grid]\nnx = 10\nseed = 4").unwrap();
        let g = grid_spec(GridSpec::cube(2, 0.5), &cfg, Some((9, 12)), None);
        assert_eq!((g.nx, g.ny, g.seed), (9, 12, 4));
    }
}
