use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn confvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confvar")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// The shipped elliptic job with fewer samples, written next to `dir`.
fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let text = fs::read_to_string(repo_config("elliptic.toml")).unwrap();
    let text = text
        .replace("count = 500", "count = 120")
        .replace("bending_count = 24", "bending_count = 8")
        .replace("[killing]\ncount = 4", "[killing]\ncount = 2");
    let path = dir.join("job.toml");
    fs::write(&path, format!("{text}\n{extra}")).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_verify_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = tmp.path().join("out");
    let g = confvar(&["generate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&g), 0, "{}", String::from_utf8_lossy(&g.stderr));
    for f in ["config.json", "solutions.json", "patch.json", "pair.json", "mu.csv", "samples.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let v1 = confvar(&["verify", "--out", s(&out), "--seed", "3"]);
    assert_eq!(code(&v1), 0, "{}", String::from_utf8_lossy(&v1.stdout));
    let first = fs::read(out.join("report.json")).unwrap();
    let v2 = confvar(&["verify", "--out", s(&out), "--seed", "3"]);
    assert_eq!(code(&v2), 0);
    assert_eq!(first, fs::read(out.join("report.json")).unwrap());
    assert_eq!(v1.stdout, v2.stdout);

    let r = confvar(&["report", "--out", s(&out)]);
    assert_eq!(code(&r), 0);
    assert!(String::from_utf8_lossy(&r.stdout).contains("overall: PASS"));

    let strict = confvar(&["verify", "--out", s(&out), "--tol-scale", "1e-6"]);
    assert_eq!(code(&strict), 1);
}

#[test]
fn exports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = tmp.path().join("out");
    assert_eq!(code(&confvar(&["generate", "--config", s(&cfg), "--out", s(&out)])), 0);

    let csv = confvar(&["export", "samples", "--out", s(&out)]);
    assert_eq!(code(&csv), 0);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("u,v,theta1,theta2,theta3,x1,"));
    assert_eq!(text.lines().count(), 121);

    let obj_path = tmp.path().join("slice.obj");
    let obj = confvar(&["export", "slice", "--out", s(&out), "--theta", "0.5,1,-1", "--dest", s(&obj_path)]);
    assert_eq!(code(&obj), 0, "{}", String::from_utf8_lossy(&obj.stderr));
    let mesh = fs::read_to_string(&obj_path).unwrap();
    assert!(mesh.lines().any(|l| l.starts_with("v ")));
    assert!(mesh.lines().any(|l| l.starts_with("f ")));

    let bad = confvar(&["export", "slice", "--out", s(&out), "--theta", "1"]);
    assert_eq!(code(&bad), 3);

    assert_eq!(code(&confvar(&["verify", "--out", s(&out)])), 0);
    let rep = confvar(&["export", "report", "--out", s(&out)]);
    assert_eq!(rep.stdout, fs::read(out.join("report.json")).unwrap());
    let rep_csv = confvar(&["export", "report", "--format", "csv", "--out", s(&out)]);
    assert!(String::from_utf8_lossy(&rep_csv.stdout).starts_with("name,pass,mandatory"));
    assert_eq!(code(&confvar(&["export", "pair", "--format", "obj", "--out", s(&out)])), 3);
}

#[test]
fn dimension_four_is_rejected_at_parse_time() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(repo_config("hyperbolic.toml")).unwrap().replace("n = 5", "n = 4");
    let cfg = tmp.path().join("n4.toml");
    fs::write(&cfg, text).unwrap();
    let o = confvar(&["generate", "--config", s(&cfg), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n >= 5"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn negative_mu_is_a_generation_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(repo_config("hyperbolic.toml"))
        .unwrap()
        .replace("close = 1.0\n", "")
        .replace(
            "    [{ coeff = 0.5, trig = \"cos\", freq = [0.5, 2.0] }],\n",
            "    [{ coeff = 0.5, trig = \"cos\", freq = [0.5, 2.0] }],\n    [{ coeff = 5.0, exp = [1.0, -1.0] }],\n",
        )
        .replace("nu = 65\nnv = 65", "nu = 17\nnv = 17");
    let cfg = tmp.path().join("neg.toml");
    fs::write(&cfg, text).unwrap();
    let o = confvar(&["generate", "--config", s(&cfg), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(code(&o), 2);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "mu_nonpositive");
    assert!(err["message"].as_str().unwrap().contains("Location"));
}

#[test]
fn missing_artifacts_and_perturbed_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let o = confvar(&["verify", "--out", s(&tmp.path().join("nothing"))]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing artifact"));

    let cfg = small_config(tmp.path(), "");
    let out = tmp.path().join("out");
    assert_eq!(code(&confvar(&["generate", "--config", s(&cfg), "--out", s(&out)])), 0);
    let path = out.join("pair.json");
    let mut pair: serde_json::Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    let h = &mut pair["pair"]["h"];
    let dim = h["dim"].as_u64().unwrap() as usize;
    let data = h["data"].as_array_mut().unwrap();
    let nodes = data.len() / dim;
    for k in 0..nodes {
        let x = data[k * dim].as_f64().unwrap() + 1e-2 * ((k % 7) as f64 * 0.9).sin();
        data[k * dim] = serde_json::json!(x);
    }
    fs::write(&path, serde_json::to_vec(&pair).unwrap()).unwrap();
    let v = confvar(&["verify", "--out", s(&out)]);
    assert_eq!(code(&v), 1);
    assert!(String::from_utf8_lossy(&v.stdout).contains("overall: FAIL"));

    let mut pair: serde_json::Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    pair["format_version"] = serde_json::json!(99);
    fs::write(&path, serde_json::to_vec(&pair).unwrap()).unwrap();
    let v = confvar(&["verify", "--out", s(&out)]);
    assert_eq!(code(&v), 3);
    assert!(String::from_utf8_lossy(&v.stderr).contains("format version"));
}
