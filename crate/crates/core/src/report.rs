//! Classifier reports and their TOML / CSV serialization.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// `Pass` below `tol`, `Fail` above `100·tol`, otherwise `Inconclusive`.
    pub fn from_residual(residual: f64, tol: f64) -> Verdict {
        if residual < tol {
            Verdict::Pass
        } else if residual > 100.0 * tol {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Outcome of one predicate over a sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierReport {
    pub predicate: String,
    /// Scale-free sup-norm residual.
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Finer classification where the predicate has one (e.g. "vanishing").
    pub label: Option<String>,
    /// Sample of largest residual, or the first failing sample.
    pub witness: Option<Witness>,
    /// Extracted quantities in insertion order.
    pub scalars: Vec<(String, f64)>,
    pub samples: usize,
    pub failures: usize,
    pub notes: Vec<String>,
}

impl ClassifierReport {
    pub fn new(predicate: &str, residual: f64, tolerance: f64) -> ClassifierReport {
        ClassifierReport {
            predicate: predicate.to_string(),
            residual,
            tolerance,
            verdict: Verdict::from_residual(residual, tolerance),
            label: None,
            witness: None,
            scalars: Vec::new(),
            samples: 0,
            failures: 0,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn with_scalar(mut self, name: &str, v: f64) -> ClassifierReport {
        self.scalars.push((name.to_string(), v));
        self
    }

    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        writeln!(s, "[[report]]").unwrap();
        writeln!(s, "predicate = {}", quote(&self.predicate)).unwrap();
        writeln!(s, "verdict = {}", quote(self.verdict.as_str())).unwrap();
        if let Some(l) = &self.label {
            writeln!(s, "label = {}", quote(l)).unwrap();
        }
        writeln!(s, "residual = {}", float(self.residual)).unwrap();
        writeln!(s, "tolerance = {}", float(self.tolerance)).unwrap();
        writeln!(s, "samples = {}", self.samples).unwrap();
        writeln!(s, "failures = {}", self.failures).unwrap();
        if let Some(w) = &self.witness {
            writeln!(s, "witness_x = {}", float_array(&w.x)).unwrap();
            writeln!(s, "witness_y = {}", float_array(&w.y)).unwrap();
        }
        if !self.notes.is_empty() {
            let notes: Vec<String> = self.notes.iter().map(|n| quote(n)).collect();
            writeln!(s, "notes = [{}]", notes.join(", ")).unwrap();
        }
        if !self.scalars.is_empty() {
            writeln!(s, "[report.scalars]").unwrap();
            for (k, v) in &self.scalars {
                writeln!(s, "{} = {}", quote(k), float(*v)).unwrap();
            }
        }
        s
    }

    pub fn csv_header() -> &'static str {
        "predicate,verdict,label,residual,tolerance,samples,failures,witness_x,witness_y"
    }

    pub fn to_csv_row(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
        let (wx, wy) = match &self.witness {
            Some(w) => (join(&w.x), join(&w.y)),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{},{},{:.16e},{:.16e},{},{},{},{}",
            self.predicate,
            self.verdict.as_str(),
            self.label.as_deref().unwrap_or(""),
            self.residual,
            self.tolerance,
            self.samples,
            self.failures,
            wx,
            wy
        )
    }
}

/// A float as a TOML value with 17 significant digits.
pub fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn float_array(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| float(*x)).collect();
    format!("[{}]", items.join(", "))
}

/// A TOML basic string.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Serializes reports as a TOML document.
pub fn reports_to_toml(reports: &[ClassifierReport]) -> String {
    reports
        .iter()
        .map(|r| r.to_toml())
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn reports_to_csv(reports: &[ClassifierReport]) -> String {
    let mut s = String::from(ClassifierReport::csv_header());
    s.push('\n');
    for r in reports {
        s.push_str(&r.to_csv_row());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_bands() {
        assert_eq!(Verdict::from_residual(1e-7, 1e-6), Verdict::Pass);
        assert_eq!(Verdict::from_residual(1e-5, 1e-6), Verdict::Inconclusive);
        assert_eq!(Verdict::from_residual(1e-3, 1e-6), Verdict::Fail);
        assert_eq!(Verdict::from_residual(f64::NAN, 1e-6), Verdict::Inconclusive);
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(0.1, float(0.1).parse::<f64>().unwrap());
    }
}
