use std::path::Path;
use std::process::Command;

fn kakeya(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_kakeya"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn malformed_scene_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"polylines\": [[1, 2]").unwrap();
    let (code, err) = kakeya(&["translate", "--scene", bad.to_str().unwrap(), "--target", "1,0"], dir.path());
    assert_eq!(code, 3, "{err}");
}

#[test]
fn huge_eps_is_a_single_segment() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = kakeya(&["translate", "--gen", "circle:1,72", "--target", "2,0", "--eps", "10"], dir.path());
    assert_eq!(code, 0, "{err}");
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("plan.json")).unwrap()).unwrap();
    assert_eq!(plan["steps"].as_array().unwrap().len(), 1);
}

#[test]
fn line_off_center_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = kakeya(
        &["rotate", "--gen", "segment:1", "--target-rot", "0,0,1.5", "--line", "0,1..1,1", "--eps", "0.5"],
        dir.path(),
    );
    assert_eq!(code, 4);
}

#[test]
fn infeasible_budget_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = kakeya(
        &["translate", "--gen", "circle:1,720", "--target", "2,0", "--eps", "0.1", "--depth-cap", "3"],
        dir.path(),
    );
    assert_eq!(code, 2, "{err}");
}

#[test]
fn half_turn_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["rotate", "--gen", "segment:1", "--target-rot", "0,0,3.141592653589793", "--line", "0,0..1,0", "--eps", "0.5"];
    let (code, err) = kakeya(&args, dir.path());
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    for a in report["artifacts"].as_array().unwrap() {
        let p = dir.path().join(a.as_str().unwrap());
        let body = std::fs::read(&p).unwrap();
        assert!(!body.is_empty(), "{}", p.display());
        if p.extension().is_some_and(|e| e == "json") {
            serde_json::from_slice::<serde_json::Value>(&body).unwrap();
        }
    }
    assert!(report["max_center_distance"].as_f64().unwrap() <= 0.5);
    assert_eq!(report["drift_violations"].as_u64(), Some(0));
}

#[test]
fn reports_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["translate", "--gen", "convex:0.15,0,0,1,100", "--target", "1,0", "--eps", "0.1", "--beta0", "0.15", "--beta-ratio", "1", "--eta-scale", "100", "--grid-max", "256"];
    assert_eq!(kakeya(&args, a.path()).0, 0);
    assert_eq!(kakeya(&args, b.path()).0, 0);
    for f in ["report.json", "plan.json", "area.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
