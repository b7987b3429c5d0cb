use std::path::Path;
use std::process::{Command, Output};

fn fastdvm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastdvm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    std::fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

const MINIMAL: &str = r#"
model = "maxwell2d"
operator = "fast"
dt = 0.01
t_end = 0.0
initial = "bkw"
compare_bkw = true

[grid]
half_nodes = 8
box_half_width = 5.0
"#;

#[test]
fn minimal_run_emits_initial_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", MINIMAL);
    let out = fastdvm(dir.path(), &["run", "--config", &cfg, "--out", "o/min"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("records=1"), "{stdout}");
    let traj = std::fs::read_to_string(dir.path().join("o/min_trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 2);
    assert!(traj.starts_with("t,mass,"));
    assert!(dir.path().join("o/min_final.csv").exists());
}

#[test]
fn direction_order_above_radius_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = MINIMAL.replace("box_half_width = 5.0", "box_half_width = 5.0\nkernel_radius = 2\ndirection_order = 3");
    let cfg = write(dir.path(), "bad.toml", &body);
    let out = fastdvm(dir.path(), &["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &format!("{MINIMAL}colour = \"red\"\n"));
    assert_eq!(fastdvm(dir.path(), &["run", "--config", &cfg]).status.code(), Some(2));
    let missing = fastdvm(dir.path(), &["run", "--config", "nope.toml"]);
    assert_ne!(missing.status.code(), Some(0));
}

#[test]
fn budget_overrun_exits_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let body = MINIMAL
        .replace("t_end = 0.0", "t_end = 1000.0")
        .replace("half_nodes = 8", "half_nodes = 32");
    let cfg = write(dir.path(), "long.toml", &body);
    let out = fastdvm(dir.path(), &["--budget-seconds", "0.2", "run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn farey_csv_has_both_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = fastdvm(
        dir.path(),
        &["farey", "--dim", "3", "--min-order", "1", "--max-order", "2", "--out", "f"],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("f_farey.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("order,farey_size,formula_count,enumerated_count,agree,leading_ratio")
    );
    assert!(lines.next().unwrap().starts_with("1,3,16,13,false,"));
}

#[test]
fn deterministic_table1_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t1.toml",
        r#"
direction_orders = [1, 3]

[[rows]]
half_nodes = 8
box_half_width = 5.0
kernel_radius = 1

[[rows]]
half_nodes = 16
box_half_width = 5.5
kernel_radius = 3
"#,
    );
    for prefix in ["a", "b"] {
        let out = fastdvm(
            dir.path(),
            &["--deterministic", "table1", "--config", &cfg, "--out", prefix],
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a_table1.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b_table1.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",x"), "{text}");
}
