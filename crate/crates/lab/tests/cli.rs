use std::path::Path;
use std::process::{Command, Output};

fn selfnorm(args: &[&str], workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfnorm"))
        .args(args)
        .env("WORKERS", workers)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_writes_csv_and_companions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let cfg = write(
        dir.path(),
        "c.cfg",
        &format!(
            "model=iid_rademacher\nn_grid=8,16,32\np=1.5\nm=500\noutput={}\n",
            out.display()
        ),
    );
    let o = selfnorm(&["run", &cfg], "2");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.exists());
    assert!(dir.path().join("r.rate.csv").exists());
    assert!(dir.path().join("r.sharpness.csv").exists());
    let meta = std::fs::read_to_string(dir.path().join("r.meta.txt")).unwrap();
    assert!(meta.contains("seed = 0x5eed"));
    assert!(meta.contains("workers = 2"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(!csv.contains("workers"));
    assert!(csv.lines().nth(1).unwrap().contains(",24301,"));

    let fit = selfnorm(&["rate-fit", &out.to_string_lossy()], "1");
    assert!(fit.status.success());
    assert!(String::from_utf8_lossy(&fit.stdout).contains("-0.12500"));
}

#[test]
fn stdout_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "model=stationary_normal\nstatistic=variance_normalized\nn_grid=4,8,16\np=2\nm=3000\nplug_in_m=2000\n",
    );
    let a = selfnorm(&["run", &cfg], "1");
    let b = selfnorm(&["run", &cfg], "4");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "model=iid_normal\nn_grid=64,16\np=2\nm=1\n");
    let o = selfnorm(&["run", &bad], "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_grid must be strictly increasing"));

    let missing = dir.path().join("nope.cfg");
    assert_eq!(
        selfnorm(&["run", &missing.to_string_lossy()], "1").status.code(),
        Some(4)
    );

    let ok = write(dir.path(), "ok.cfg", "model=iid_normal\nn_grid=4\np=2\nm=10\n");
    assert_eq!(selfnorm(&["run", &ok], "zero").status.code(), Some(2));

    let unwritable = write(
        dir.path(),
        "w.cfg",
        "model=iid_normal\nn_grid=4\np=2\nm=10\noutput=/nonexistent/dir/r.csv\n",
    );
    assert_eq!(selfnorm(&["run", &unwritable], "1").status.code(), Some(4));

    assert_eq!(
        selfnorm(&["tstat-check", "--samples", "10", "--x-grid", "-1"], "1")
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn subcommands_run() {
    let o = selfnorm(&["selftest"], "2");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));

    let o = selfnorm(&["tstat-check", "--samples", "500"], "1");
    assert!(o.status.success());

    let o = selfnorm(
        &["sharpness", "--alpha-grid", "0.04,0.01", "--n", "30", "--m", "2000"],
        "1",
    );
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 3);

    let o = selfnorm(&["ar1", "--theta", "0.5", "--n-grid", "10,20", "--m", "500"], "1");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("monte_carlo"));
}

#[test]
fn error_classes_map_to_exit_codes() {
    use selfnorm_core::Error;
    use selfnorm_lab::LabError;
    assert_eq!(LabError::config("p", "x").exit_code(), 2);
    assert_eq!(
        LabError::Core(Error::Aborted {
            degenerate: 5,
            total: 10
        })
        .exit_code(),
        3
    );
    assert_eq!(
        LabError::Core(Error::Quadrature {
            achieved: 1e-3,
            requested: 1e-8
        })
        .exit_code(),
        3
    );
    let cell = LabError::Cell {
        cell: "n=4".into(),
        source: Error::Degenerate("x"),
    };
    assert_eq!(cell.exit_code(), 3);
    assert!(cell.to_string().contains("n=4"));
    assert_eq!(LabError::io("f", std::io::Error::other("disk")).exit_code(), 4);
}
