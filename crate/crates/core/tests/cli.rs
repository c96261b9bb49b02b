use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn acsplit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acsplit"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn acsplit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn coeffs_lists_named_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let out = acsplit(&["coeffs", "--schemes", "S3Y,S4U"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("label,order,stages,omega,min,max,max_residual,a1,b1"));
    assert!(lines[1].starts_with("S3Y,3,3,0.26833"));
    assert!(lines[2].starts_with("S4U,4,4,1.35120719"));
}

#[test]
fn coeffs_tabulates_a_family() {
    let dir = tempfile::tempdir().unwrap();
    let out = acsplit(
        &[
            "coeffs",
            "--family",
            "s3-",
            "--omega-min",
            "0.2",
            "--omega-max",
            "1.2",
            "--points",
            "11",
            "-o",
            "fam.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("fam.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[0].starts_with("omega,a1,b1,a2,b2,a3,b3,D,min,max,bounded,status"));
    // omega = 0.2 has D < 0
    assert!(lines[1].contains("error"));
    assert!(lines.iter().filter(|l| l.ends_with(",ok")).count() >= 8);
}

#[test]
fn run_writes_snapshots_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = acsplit(
        &[
            "run",
            "--problem",
            "spinodal",
            "--cells",
            "8",
            "--t-final",
            "2e-3",
            "--dt",
            "5e-4",
            "--scheme",
            "S3X",
            "--snapshots",
            "0,1e-3,2e-3",
            "-o",
            "out",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    assert!(names.contains(&"diagnostics.csv".to_string()));
    assert_eq!(names.iter().filter(|n| n.ends_with(".acf")).count(), 3);

    let out = acsplit(
        &[
            "run",
            "--problem",
            "spinodal",
            "--cells",
            "8",
            "--t-final",
            "1e-3",
            "--no-snapshots",
            "-o",
            "bare",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let names: Vec<_> = fs::read_dir(dir.path().join("bare")).unwrap().collect();
    assert_eq!(names.len(), 1);
}

#[test]
fn converge_prints_slopes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    fs::write(&cfg, r#"{"schemes": ["S1", "S2"], "k_tol": 1e9}"#).unwrap();
    let out = acsplit(
        &["converge", "-c", "study.json", "-o", "res", "--plot-script"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().contains("slope"));
    let s2 = text.lines().find(|l| l.starts_with("S2 ")).unwrap();
    let slope: f64 = s2.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((slope - 2.0).abs() < 0.2, "{s2}");
    for f in ["errors.csv", "slopes.csv", "plot_errors.py"] {
        assert!(dir.path().join("res").join(f).exists(), "{f} missing");
    }
}

#[test]
fn sweep_omega_writes_one_row_per_point_and_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let out = acsplit(
        &[
            "sweep-omega",
            "--branch",
            "-",
            "--omega-min",
            "0.265",
            "--omega-max",
            "0.27",
            "--points",
            "3",
            "--k-tols",
            "1e4,1e9",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 6);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.starts_with("-,") && l.contains("completed")));
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"problem": "spinodal", "cels": 8}"#).unwrap();
    let code = |args: &[&str]| acsplit(args, dir.path()).status.code();

    assert_eq!(code(&["run", "-c", "bad.json"]), Some(2));
    assert_eq!(code(&["run", "--scheme", "S9"]), Some(2));
    assert_eq!(code(&["run", "-c", "missing.json"]), Some(3));
    assert_eq!(code(&["coeffs", "--schemes", "S3+:0.1"]), Some(5));
    assert_eq!(code(&["frobnicate"]), Some(2));

    let out = acsplit(&["run", "-c", "bad.json"], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cels"));
}
