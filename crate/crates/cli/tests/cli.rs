use std::collections::BTreeSet;
use std::process::Command;

use serde_json::Value;
use thetalab_cli::{run, Invocation, Thresholds, DISPATCH};

const OMEGA2: &str = "[[[0.2,1.1],[0.35,0.2]],[[0.35,0.2],[-0.1,1.3]]]";
const OMEGA1: &str = "[[[0.3,1.2]]]";
const KP_TAU: &str = r#"{"kind":"exp","tau":{"terms":[
    {"coefficient":[1,0],"wavevector":[[0,0],[0,0],[0,0]]},
    {"coefficient":[1,0],"wavevector":[[0.7,0],[0.49,0],[0.343,0]],"phase":[0.1,0]}]}}"#;
const KP_POINTS: &str = "[[[0.1,0],[0.2,0],[0.3,0]],[[1,0.5],[-0.3,0],[0.2,0]]]";
const D1: &str = r#"{"monomials":[{"coefficient":[1,0],"exponents":{"1":1}}]}"#;
const EXPSUM: &str = r#"{"terms":[{"coefficient":[1,0],"wavevector":[[0.3,0]]},{"coefficient":[2,0],"wavevector":[[-0.5,0.1]]}]}"#;

fn go(args: &[&str]) -> Invocation {
    run(std::iter::once("thetalab").chain(args.iter().copied()))
}

fn report_json(inv: &Invocation) -> Value {
    serde_json::to_value(inv.report.as_ref().expect("a report")).unwrap()
}

/// The report with its wall time blanked, as text.
fn stable(inv: &Invocation) -> String {
    let mut v: Value = serde_json::from_str(&inv.stdout).expect("stdout is the JSON report");
    v["wall_time_s"] = Value::Null;
    v.to_string()
}

/// One invocation per code path; together they must reach every operation.
fn coverage_invocations() -> Vec<Vec<&'static str>> {
    vec![
        vec!["theta-eval", "--omega", OMEGA2, "--z", "[[0.1,0],[0.2,0.1]]", "--char", "[0.5,0],[0,0.5]", "--deriv", "[[1,0],[0,0]]:2", "--kummer", "--hat-order", "2"],
        vec!["identity-suite", "--suite", "addition", "--genus", "1", "--trials", "2", "--seed", "1"],
        vec!["identity-suite", "--suite", "modular", "--genus", "1", "--trials", "1", "--seed", "1"],
        vec!["identity-suite", "--suite", "symplectic", "--genus", "2", "--trials", "5", "--seed", "1"],
        vec!["identity-suite", "--suite", "prym", "--genus", "1", "--trials", "2", "--seed", "1"],
        vec!["identity-suite", "--suite", "secant", "--trials", "2", "--seed", "1"],
        vec!["identity-suite", "--suite", "sg", "--trials", "1", "--seed", "1"],
        vec!["secant-fit", "--kind", "quadrisecant", "--genus", "2", "--trials", "2", "--seed", "1"],
        vec!["hirota", "--poly", "kp", "--tau", KP_TAU, "--points", KP_POINTS],
        vec!["hirota", "--poly", D1, "--f", EXPSUM, "--g", EXPSUM, "--points", "[[[0.4,0]]]"],
        vec!["hirota", "--poly", D1, "--theta", r#"{"omega":[[[0,1]]],"directions":[[[1,0]]],"z1":[[[0.2,0.1]]],"z2":[[[0.2,0.1]]]}"#],
        vec!["effectivize", "--kind", "kdv", "--omega", OMEGA1, "--seed", "4"],
        vec!["effectivize", "--kind", "kp", "--omega", OMEGA2, "--seed", "4"],
        vec!["effectivize", "--kind", "vn", "--omega", OMEGA2, "--seed", "4"],
        vec!["build-solution", "--kind", "kp", "--omega", OMEGA2, "--seed", "4", "--at", "0.1,0.2,0.3"],
        vec!["residual-grid", "--kind", "kdv", "--omega", OMEGA1, "--seed", "4", "--grid", "x=0:1:5,t=0:1:5"],
        vec!["period-matrix", "--branch-points", r#"[0,1,2,3.5,5,"inf"]"#, "--genus", "2"],
        vec!["period-matrix", "--prym", r#"{"kind":"ramified","pi":[[[0,1]]],"b0":[[[0,2]]]}"#],
        vec!["sasaki", "--omega", OMEGA2, "--relations"],
    ]
}

#[test]
fn every_operation_is_reachable() {
    let expected: BTreeSet<&str> = [
        "frobenius_normal_form",
        "is_symplectic_member",
        "validate_siegel",
        "theta",
        "theta_char",
        "theta_deriv",
        "theta_hat_table",
        "kummer_vector",
        "modular_transform",
        "modular_constancy_check",
        "addition_binary_residual",
        "addition_binary_dual_residual",
        "addition_ternary_residual",
        "prym_decomposition_ramified_residual",
        "prym_decomposition_unramified_residual",
        "secant_fit",
        "secant_points_from_quadruple",
        "sine_gordon_identity_fit",
        "hirota_apply",
        "hirota_apply_theta",
        "hierarchy_residual",
        "kdv_effectivization_residual",
        "kp_effectivization_residual",
        "vn_effectivization_residual",
        "solve_effectivization",
        "build_solution",
        "pde_residual",
        "sasaki_irreducibility",
        "g2_theta_constant_relations",
        "period_matrix",
        "prym_block_assemble",
    ]
    .into_iter()
    .collect();
    let declared: BTreeSet<&str> = DISPATCH.iter().flat_map(|(_, ops)| ops.iter().copied()).collect();
    assert!(expected.is_subset(&declared), "undeclared: {:?}", expected.difference(&declared).collect::<Vec<_>>());

    let commands: BTreeSet<&str> = DISPATCH.iter().map(|(c, _)| *c).collect();
    assert_eq!(commands.len(), 9);
    let mut reached = BTreeSet::new();
    let mut run_commands = BTreeSet::new();
    for args in coverage_invocations() {
        let inv = go(&args);
        assert_eq!(inv.code, 0, "{args:?}: {}", inv.stderr);
        let report = inv.report.unwrap();
        let allowed = DISPATCH.iter().find(|(c, _)| *c == report.command).unwrap().1;
        for op in &report.operations {
            assert!(allowed.contains(op), "{} reported undeclared {op}", report.command);
            reached.insert(*op);
        }
        run_commands.insert(args[0]);
    }
    assert_eq!(run_commands, commands);
    assert!(expected.is_subset(&reached), "never run: {:?}", expected.difference(&reached).collect::<Vec<_>>());
}

#[test]
fn reports_are_deterministic() {
    for args in [
        vec!["identity-suite", "--suite", "secant", "--trials", "3", "--seed", "11"],
        vec!["effectivize", "--kind", "kp", "--omega", OMEGA2, "--seed", "2"],
        vec!["identity-suite", "--suite", "modular", "--genus", "2", "--trials", "1", "--seed", "5"],
    ] {
        let (a, b) = (go(&args), go(&args));
        assert_eq!(stable(&a), stable(&b), "{args:?}");
    }
    let a = go(&["identity-suite", "--suite", "addition", "--trials", "3", "--seed", "11"]);
    let b = go(&["identity-suite", "--suite", "addition", "--trials", "3", "--seed", "12"]);
    assert_ne!(stable(&a), stable(&b));
}

#[test]
fn addition_example_passes() {
    let inv = go(&["identity-suite", "--suite", "addition", "--genus", "1", "--trials", "20", "--eps", "1e-12", "--seed", "7"]);
    assert_eq!(inv.code, 0);
    let r = report_json(&inv);
    assert_eq!(r["pass"], true);
    assert_eq!(r["seed"], 7);
    for key in ["binary", "dual_binary", "ternary"] {
        let values = r["result"][key].as_array().unwrap();
        assert_eq!(values.len(), 20);
        assert!(values.iter().all(|v| v.as_f64().unwrap() < 1e-9));
    }
}

#[test]
fn sasaki_is_informational() {
    let inv = go(&["sasaki", "--omega", "[[[0,1],[0,0]],[[0,0],[0,2]]]"]);
    assert_eq!(inv.code, 0);
    let r = report_json(&inv);
    assert_eq!(r["result"]["is_irreducible"], false);
    assert_eq!(r["result"]["rank"], 3);
}

#[test]
fn non_symmetric_omega_is_a_numerical_failure() {
    let inv = go(&["theta-eval", "--omega", "[[[0,1],[0,0]],[[0,0.5],[0,2]]]"]);
    assert_eq!(inv.code, 1);
    assert!(inv.stderr.contains("NotSymmetric"), "{}", inv.stderr);
    assert!(report_json(&inv)["error"].as_str().unwrap().starts_with("NotSymmetric"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["identity-suite", "--suite", "addition"],
        vec!["no-such-command"],
        vec!["identity-suite", "--suite", "nothing", "--seed", "1"],
        vec!["theta-eval", "--omega", "/nonexistent/omega.json"],
        vec!["theta-eval", "--omega", OMEGA1, "--char", "0.5"],
        vec!["residual-grid", "--kind", "kdv", "--omega", OMEGA1, "--seed", "1", "--grid", "x=0:1"],
        vec!["period-matrix", "--branch-points", "[0,1,2,3]", "--genus", "2"],
        vec!["identity-suite", "--suite", "sg", "--genus", "2", "--seed", "1"],
        vec!["effectivize", "--kind", "kp", "--omega", OMEGA2],
    ] {
        let inv = go(&args);
        assert_eq!(inv.code, 2, "{args:?}: {}", inv.stderr);
        assert!(inv.report.is_none());
    }
}

#[test]
fn numerical_failures_exit_one() {
    let reducible = go(&["effectivize", "--kind", "kp", "--omega", "[[[0,1],[0,0]],[[0,0],[0,2]]]", "--seed", "1"]);
    assert_eq!(reducible.code, 1);
    assert!(reducible.stderr.contains("ReducibleVariety"));
    let collide = go(&["period-matrix", "--branch-points", "[0,1,1,3]"]);
    assert_eq!(collide.code, 1);
    assert!(collide.stderr.contains("BranchCollision"));
}

#[test]
fn thresholds_file_controls_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let strict = dir.path().join("strict.toml");
    std::fs::write(&strict, "addition = 1e-30\n").unwrap();
    let args = ["identity-suite", "--suite", "addition", "--trials", "2", "--seed", "3", "--thresholds"];
    let inv = go(&[&args[..], &[strict.to_str().unwrap()]].concat());
    assert_eq!(inv.code, 1);
    assert!(inv.stderr.contains("check failed"));
    assert_eq!(report_json(&inv)["checks"][0]["threshold"], 1e-30);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "no_such_threshold = 1\n").unwrap();
    assert_eq!(go(&[&args[..], &[bad.to_str().unwrap()]].concat()).code, 2);

    let shipped = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/thresholds.toml")).unwrap();
    assert_eq!(toml::from_str::<Thresholds>(&shipped).unwrap(), Thresholds::default());
}

#[test]
fn out_flag_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("grid.csv");
    let inv = go(&[
        "residual-grid", "--kind", "kdv", "--omega", OMEGA1, "--seed", "4", "--grid", "x=0:1:4,t=0:1:3",
        "--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(inv.code, 0, "{}", inv.stderr);
    assert!(inv.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["result"]["points"], 12);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,t,u_re,u_im,residual");
    assert_eq!(lines.len(), 13);
    for line in &lines[1..] {
        let r: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(r < 1e-8);
    }

    // without --csv the grid goes to stdout and the report only to --out
    let inv = go(&["residual-grid", "--kind", "kdv", "--omega", OMEGA1, "--seed", "4", "--grid", "x=0:1:2"]);
    assert!(inv.stdout.starts_with("x,y,t,"));
}

#[test]
fn binary_exit_codes_and_thread_cap() {
    let bin = env!("CARGO_BIN_EXE_thetalab");
    let args = ["identity-suite", "--suite", "secant", "--trials", "2", "--seed", "9"];
    let one = Command::new(bin).args(args).env("THETALAB_THREADS", "1").output().unwrap();
    let many = Command::new(bin).args(args).env("THETALAB_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    let strip = |o: &std::process::Output| {
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["wall_time_s"] = Value::Null;
        v
    };
    assert_eq!(strip(&one), strip(&many));

    let bad = Command::new(bin).args(["theta-eval", "--omega", "[[[0,1],[0,0]],[[0,0.5],[0,2]]]"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("NotSymmetric"));
    let usage = Command::new(bin).arg("--no-such-flag").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}
