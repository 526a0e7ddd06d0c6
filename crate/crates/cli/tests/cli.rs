use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_eigenlab"));
    c.env_remove("EIGENLAB_SEED");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn manifest(o: &Output) -> PathBuf {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    PathBuf::from(String::from_utf8(o.stdout.clone()).unwrap().trim())
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn sibling(m: &Path, ext: &str) -> PathBuf {
    m.with_extension(ext)
}

#[test]
fn sample_writes_rows_and_embeds_hash() {
    let d = tempfile::tempdir().unwrap();
    let m = manifest(&run(&["sample", "--space", "interval", "--n", "5000", "--seed", "7"], d.path()));
    let v = json(&m);
    let hash = v["config_hash"].as_str().unwrap();
    assert!(m.to_string_lossy().contains(hash));
    let csv = fs::read_to_string(sibling(&m, "csv")).unwrap();
    assert_eq!(csv.lines().count(), 5001);
    assert_eq!(v["config"]["seed"], "7");
}

#[test]
fn gasket_sample_with_address_length() {
    let d = tempfile::tempdir().unwrap();
    let m = manifest(&run(&["sample", "--space", "sg", "--n", "500", "--addr-len", "15"], d.path()));
    let csv = fs::read_to_string(sibling(&m, "csv")).unwrap();
    let first = csv.lines().nth(1).unwrap();
    assert_eq!(first.rsplit(',').next().unwrap().len(), 15);
}

#[test]
fn invalid_space_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["sample", "--space", "klein-bottle", "--n", "10"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown space"));
    let o = run(&["sample", "--space", "interval", "--n", "10", "--colour", "red"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_values_yield_to_flags() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    fs::write(&cfg, "# sampling\nspace = interval\nn = 40\nseed = 3\n").unwrap();
    let m = manifest(&run(&["sample", "--config", cfg.to_str().unwrap(), "n=25"], d.path()));
    let v = json(&m);
    assert_eq!(v["config"]["n"], "25");
    assert_eq!(v["config"]["seed"], "3");
    assert_eq!(fs::read_to_string(sibling(&m, "csv")).unwrap().lines().count(), 26);
}

#[test]
fn seed_falls_back_to_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = bin().args(["sample", "n=10"]).arg("--out").arg(d.path()).env("EIGENLAB_SEED", "99").output().unwrap();
    assert_eq!(json(&manifest(&o))["config"]["seed"], "99");
    let o = bin().args(["sample", "n=10", "seed=4"]).arg("--out").arg(d.path()).env("EIGENLAB_SEED", "99").output().unwrap();
    assert_eq!(json(&manifest(&o))["config"]["seed"], "4");
}

#[test]
fn eigenmap_then_fit_recovers_parabola() {
    let d = tempfile::tempdir().unwrap();
    let m = manifest(&run(&["eigenmap", "space=grid", "n=200", "eps=0.010050251256281407", "dim=3", "tol=1e-11"], d.path()));
    let csv = sibling(&m, "csv");
    let f = manifest(&run(&["fit", &format!("input={}", csv.display()), "pairs=1:2:2"], d.path()));
    let c = &json(&f)["result"][0]["coefficients"];
    for (got, want) in c.as_array().unwrap().iter().zip([2.0, 0.0, -1.0]) {
        assert!((got.as_f64().unwrap() - want).abs() < 1e-6, "{c}");
    }
}

#[test]
fn fit_of_constant_column_fails() {
    let d = tempfile::tempdir().unwrap();
    let csv = d.path().join("flat.csv");
    let mut body = String::from("point_index,x1,phi_1,phi_2,lambda_1,lambda_2\n");
    for i in 0..10 {
        body.push_str(&format!("{i},{},1,{},-0.1,-0.2\n", i as f64 / 10.0, i as f64));
    }
    fs::write(&csv, body).unwrap();
    let o = run(&["fit", &format!("input={}", csv.display()), "pairs=1:2:2"], d.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_detects_tampering() {
    let d = tempfile::tempdir().unwrap();
    let m = manifest(&run(&["exactspec", "kind=torus", "kmax=2"], d.path()));
    assert!(bin().arg("--verify").arg(&m).status().unwrap().success());
    let csv = sibling(&m, "csv");
    fs::write(&csv, fs::read_to_string(&csv).unwrap() + "9,9,9\n").unwrap();
    assert_eq!(bin().arg("--verify").arg(&m).status().unwrap().code(), Some(2));
    let body = fs::read_to_string(&m).unwrap().replace("\"kmax\": \"2\"", "\"kmax\": \"3\"");
    fs::write(&m, body).unwrap();
    assert_eq!(bin().arg("--verify").arg(&m).status().unwrap().code(), Some(2));
}

#[test]
fn exact_square_multiplicities() {
    let d = tempfile::tempdir().unwrap();
    let m = manifest(&run(&["exactspec", "kind=square", "kmax=2"], d.path()));
    let v = json(&m);
    let mult: Vec<u64> = v["result"]["multiplicities"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(&mult[..3], &[1, 2, 1]);
}

#[test]
fn worker_count_does_not_change_reports() {
    for args in [
        vec!["clt", "n=5000", "trials=150", "seed=2"],
        vec!["sweep", "n_grid=300,600,1200", "trials=4", "eps_count=10", "seed=5"],
        vec!["sgprobe", "n=600", "eps=0.2", "seeds=1,2,3", "addr_len=12", "cell_level=2"],
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let mut one = args.clone();
        one.extend(["--workers", "1"]);
        let mut four = args.clone();
        four.extend(["--workers", "4"]);
        let ma = manifest(&run(&one, a.path()));
        let mb = manifest(&run(&four, b.path()));
        assert_eq!(fs::read(&ma).unwrap(), fs::read(&mb).unwrap(), "{args:?}");
    }
}

#[test]
fn failed_check_exits_four() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["sgprobe", "mode=rescale", "levels=3,4", "--check"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(
        &["sweep", "n_grid=300,600,1200", "trials=3", "eps_count=8", "slope_lo=-0.01", "slope_hi=0", "--check"],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    // the report is still written before the check fails
    assert!(fs::read_dir(d.path()).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().starts_with("sweep-")));
}

#[test]
fn degenerate_clt_setup_is_numeric_failure() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["clt", "f=x2", "trials=100", "n=1000"], d.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
}

#[test]
fn laplacian_coo_header() {
    let d = tempfile::tempdir().unwrap();
    let m = manifest(&run(&["laplacian", "space=grid", "n=5", "eps=0.5"], d.path()));
    let coo = fs::read_to_string(sibling(&m, "coo")).unwrap();
    assert_eq!(coo.lines().next().unwrap(), "5 13 convention=averaging");
}
