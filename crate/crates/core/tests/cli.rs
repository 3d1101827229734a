//! End-to-end runs of the `transbem` binary on small configurations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use transbem::cli::ExperimentConfig;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transbem")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_config(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

const SMALL_CIRCLE: &str = r#"
[scene]
preset = "circle"
omega = 2.0
elements = 60
epsilon = [2.0]

[solve]
field = true
grid_points = 21

[sweep]
parameter = "omega"
start = 0.5
stop = 2.0
points = 4

[eig]
diagonal_blocks = true

[converge]
elements = [40, 80]
"#;

#[test]
fn solve_writes_reports() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_CIRCLE);
    let out = tmp.path().join("out");
    let o = run_config("solve", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(header(&out.join("solve.csv")), "formulation,dimension,iterations,converged,breakdown,final_residual,true_residual");
    assert_eq!(header(&out.join("residuals.csv")), "iteration,residual");
    assert_eq!(header(&out.join("field.csv")), "x,y,re,im,domain");
    assert!(out.join("densities.csv").exists() && out.join("field_error.csv").exists());
    assert_eq!(fs::read_to_string(out.join("field.csv")).unwrap().lines().count(), 1 + 21 * 21);
}

#[test]
fn outputs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_CIRCLE);
    for command in ["solve", "sweep", "eig"] {
        let a = tmp.path().join(format!("{command}_a"));
        let b = tmp.path().join(format!("{command}_b"));
        assert!(run_config(command, &cfg, &a, &["--threads", "1"]).status.success());
        assert!(run_config(command, &cfg, &b, &["--threads", "3"]).status.success());
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")) {
            assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{command}: {name:?}");
        }
    }
}

#[test]
fn sweep_eig_and_converge_write_their_tables() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_CIRCLE);
    let out = tmp.path().join("out");
    assert!(run_config("sweep", &cfg, &out, &[]).status.success());
    assert_eq!(header(&out.join("sweep.csv")), "omega,formulation,iterations,converged,note");
    assert_eq!(fs::read_to_string(out.join("sweep.csv")).unwrap().lines().count(), 1 + 4 * 3);
    assert_eq!(header(&out.join("sweep_summary.csv")), "formulation,max_iterations,median_iterations,max_over_median");

    assert!(run_config("eig", &cfg, &out, &[]).status.success());
    for name in ["eig_A", "eig_A2", "eig_diag_A2"] {
        assert_eq!(header(&out.join(format!("{name}.csv"))), "re,im");
        assert_eq!(header(&out.join(format!("{name}_clustering.csv"))), "point_re,point_im,radius,fraction,note");
        assert!(out.join(format!("{name}_truncated.csv")).exists());
    }
    assert_eq!(header(&out.join("spectrum_summary.csv")), "matrix,dimension,spectral_radius,dominant_re,dominant_im");

    assert!(run_config("converge", &cfg, &out, &[]).status.success());
    assert_eq!(header(&out.join("converge.csv")), "elements,formulation,error,iterations,converged");
    assert_eq!(header(&out.join("slope.csv")), "formulation,slope");
    assert!(out.join("timing.txt").exists());
}

#[test]
fn calderon_check_on_the_circle() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[scene]\npreset = \"circle\"\nelements = 200\n[calderon]\nwavenumber = 1.5\n",
    );
    let out = tmp.path().join("out");
    assert!(run_config("calderon", &cfg, &out, &[]).status.success());
    let text = fs::read_to_string(out.join("calderon.csv")).unwrap();
    let rows: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|&d| d <= 5e-2), "{text}");
}

#[test]
fn non_convergence_exits_with_one_and_still_reports() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &format!("{SMALL_CIRCLE}\n").replace("field = true", "field = false\nmax_iter = 2"));
    let out = tmp.path().join("out");
    let o = run_config("solve", &cfg, &out, &["--formulation", "conventional-bm"]);
    assert_eq!(o.status.code(), Some(1));
    let report = fs::read_to_string(out.join("solve.csv")).unwrap();
    assert!(report.contains("conventional-bm,120,2,false"), "{report}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let unknown = write_config(tmp.path(), "u.toml", "[scene]\npreset = \"circle\"\nradius = 1.0\nwobble = 3\n");
    let o = run_config("solve", &unknown, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("wobble"));

    let square = write_config(tmp.path(), "s.toml", "[scene]\npreset = \"square\"\nelements = 40\n");
    let o = run_config("converge", &square, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("series solution"));

    let o = run_config("solve", &square, &out, &["--formulation", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));

    let big = write_config(tmp.path(), "b.toml", "[scene]\npreset = \"circle\"\nelements = 2000\n[eig]\ncap = 3000\n");
    let o = run_config("eig", &big, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds cap"));
}

#[test]
fn bundled_configurations_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if path.extension().is_some_and(|e| e == "toml") && !name.ends_with("_scene.toml") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
            count += 1;
        }
    }
    assert!(count >= 10);
}
