use std::fs;
use std::process::Command;

fn fastlight() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fastlight"))
}

#[test]
fn selftest_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = fastlight()
        .args(["selftest", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("selftest.csv")).unwrap();
    assert!(csv.starts_with("check,value,expected,tolerance,passed\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["scenario"], "selftest");
}

#[test]
fn small_xcorr_run_is_reproducible_from_the_command_line() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = fastlight()
                .args([
                    "xcorr",
                    "--preset",
                    "fig4-advance",
                    "--traces",
                    "2",
                    "--samples",
                    "65536",
                    "--seed",
                    "9",
                ])
                .arg("--out-dir")
                .arg(dir.path())
                .args(["--jobs", "2"])
                .output()
                .unwrap();
            assert_eq!(
                out.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            (
                fs::read(dir.path().join("xcorr.csv")).unwrap(),
                fs::read(dir.path().join("summary.json")).unwrap(),
            )
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"scenario\": \"xcorr\", }").unwrap();
    let out = fastlight()
        .args(["xcorr", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let out = fastlight()
        .args(["line-scan", "--preset", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = fastlight()
        .args(["delay-scan", "--samples", "1000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = fastlight().arg("teleport").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn version_reports_trace_format() {
    let out = fastlight().arg("--version").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains(env!("CARGO_PKG_VERSION")));
    assert!(text.contains("FLTR v1"));
}
