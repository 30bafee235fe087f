use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("\"{key}\" = ")))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"));
    line.split(" = ").nth(1).unwrap().parse().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn funk_type_s_curvature_is_nonzero() {
    let o = run(&["compute", "--metric", "funk_type", "--what", "S", "--x", "0.1,0", "--y", "1,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(value(&stdout(&o), "S").abs() > 0.1);
}

#[test]
fn euclid_parallel_berwald_is_zero() {
    let o = run(&[
        "compute", "--metric", "euclid_parallel", "--what", "B", "--x", "0.1,0.2,-0.1", "--y", "1,0.3,0.2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let comps: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("\"B^"))
        .map(|l| l.split(" = ").nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(comps.len(), 81);
    assert!(comps.iter().all(|v| v.abs() < 1e-12), "{text}");
}

#[test]
fn matsumoto_q_at_zero_is_one() {
    let o = run(&[
        "compute", "--metric", "matsumoto", "--params", "beta=0.2,0", "--what", "QTPD", "--x", "0,0", "--s", "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((value(&text, "Q") - 1.0).abs() < 1e-14);
    assert!((value(&text, "b") - 0.2).abs() < 1e-14);
}

#[test]
fn quantities_cover_the_documented_list() {
    for what in ["G", "E", "D", "R", "C", "L", "H", "g", "h", "σ", "BetaInvariants"] {
        let o = run(&[
            "compute", "--metric", "square", "--params", "beta=0.1*x2,0.2", "--what", what, "--x", "0.1,-0.2",
            "--y", "0.6,0.8",
        ]);
        assert_eq!(o.status.code(), Some(0), "{what}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn exit_codes() {
    // predicate failure
    let o = run(&["classify", "--metric", "funk_type", "--predicates", "berwald", "--grid", "8x8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict = \"fail\""));

    let o = run(&["classify", "--metric", "funk_type", "--predicates", "douglas,gdw", "--grid", "8x8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // usage errors
    for args in [
        &["classify", "--metric", "no_such_entry"][..],
        &["classify", "--metric", "funk_type", "--predicates", "nope"],
        &["compute", "--metric", "funk_type", "--what", "S", "--x", "0.1"],
        &["compute", "--metric", "funk_type", "--what", "Q", "--x", "0,0"],
        &["frobnicate"],
        &["compute", "--what", "S", "--x", "0,0"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }

    // evaluation error outside the Funk ball
    let o = run(&["compute", "--metric", "funk_type", "--what", "S", "--x", "0.99,0.5", "--y", "1,0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("computing S"));
}

#[test]
fn classify_is_byte_deterministic_and_seeded() {
    let args = ["classify", "--metric", "killing_hopf", "--predicates", "isotropic_s", "--grid", "8x8"];
    let a = run(&args);
    let b = run(&[&args[..], &["--jobs", "2"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[&args[..], &["--seed", "5"]].concat());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_output_and_config_file() {
    let cfg = tmp("inline.toml");
    std::fs::write(
        &cfg,
        r#"
predicates = ["berwald", "douglas"]

[metric]
a = [["1", "0"], ["0", "1"]]
beta = ["0.3", "0"]
phi = "matsumoto"

[grid]
nx = 8
ny = 8
"#,
    )
    .unwrap();
    let out = tmp("inline.csv");
    let o = run(&["classify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("predicate,verdict"));
    assert!(lines[1].starts_with("berwald,pass"));

    let bad = tmp("bad.toml");
    std::fs::write(&bad, "[metric]\nnonsense = 1\n").unwrap();
    assert_eq!(run(&["classify", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn ode_phi_reports_a_small_residual() {
    let o = run(&["ode-phi", "--k", "0.1", "--n", "2", "--b", "1", "--points", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.matches("[[sample]]").count(), 7);
    assert!(text.contains("predicate = \"ode_residual\"\nverdict = \"pass\""));
}

#[test]
fn catalog_lists_and_describes() {
    let o = run(&["catalog"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 8);
    let o = run(&["catalog", "killing_hopf"]);
    assert!(stdout(&o).contains("predicate = \"gdw\"\nholds = false"));
}

#[test]
fn verify_single_check_and_tightened_tolerance() {
    let o = run(&["verify", "--check", "3", "--grid", "8x8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("passed = true"));

    let o = run(&["verify", "--check", "3", "--grid", "8x8", "--tol", "1e-14"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("status = \"inconclusive\""));
}
