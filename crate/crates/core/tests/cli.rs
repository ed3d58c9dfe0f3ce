use std::path::Path;
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector};
use serde_json::Value;

use sphere_degree::nn::{Layer, MlpWeights};

fn sphere_degree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphere-degree"))
        .args(args)
        .env_remove("SPHERE_DEGREE_THREADS")
        .output()
        .unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn selection_weights(l: usize, sign: f64) -> MlpWeights {
    let mut weight = DMatrix::zeros(3, 2 * l + 1);
    weight[(0, l + 1)] = 1.0;
    weight[(1, l - 1)] = sign;
    weight[(2, l)] = 1.0;
    let layer = Layer { weight, bias: DVector::from_vec(vec![0.0, 0.0, 0.7]) };
    MlpWeights::new(2 * l + 1, vec![layer]).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn degree_of_builtin_maps() {
    let v = json_stdout(&sphere_degree(&["degree", "--map", "power:-3", "--lipschitz", "3", "--oracle"]));
    assert_eq!(v["degree"], -3);
    assert_eq!(v["n_used"], 29);
    assert_eq!(v["timezone_checks_passed"], true);
    assert!((v["oracle_estimate"].as_f64().unwrap() + 3.0).abs() < 0.5);

    let v = json_stdout(&sphere_degree(&["degree", "--map", "antipodal", "--auto"]));
    assert_eq!(v["degree"], -1);
    assert_eq!(v["heuristic"], true);

    let v = json_stdout(&sphere_degree(&["--threads", "2", "degree", "--map", "constant:1,0,0", "--n", "7"]));
    assert_eq!(v["degree"], 0);
    assert_eq!(v["n_used"], 7);
}

#[test]
fn invalid_input_exits_with_2() {
    assert_eq!(sphere_degree(&["degree", "--map", "identity"]).status.code(), Some(2));
    assert_eq!(sphere_degree(&["degree", "--map", "spin", "--n", "5"]).status.code(), Some(2));
    assert_eq!(sphere_degree(&["degree", "--map", "identity", "--lipschitz", "1e9"]).status.code(), Some(2));
    assert_eq!(sphere_degree(&["lsbd", "--latents", "/nonexistent/latents.jsonl"]).status.code(), Some(2));
}

#[test]
fn mesh_below_certified_size_is_heuristic() {
    let coarse = json_stdout(&sphere_degree(&["degree", "--map", "power:3", "--n", "5"]));
    assert_eq!(coarse["heuristic"], true);
    let certified = json_stdout(&sphere_degree(&["degree", "--map", "power:3", "--n", "29"]));
    assert_eq!(certified["heuristic"], false);
    assert_eq!(certified["degree"], 3);
}

#[test]
fn weights_map_degree_and_lipschitz_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("enc.json");
    selection_weights(5, -1.0).save(&path).unwrap();
    let map_arg = format!("weights:{}", path_str(&path));

    let v = json_stdout(&sphere_degree(&["degree", "--map", &map_arg, "--L", "5", "--n", "60"]));
    assert_eq!(v["degree"], -1);

    let v = json_stdout(&sphere_degree(&["lipschitz", "--weights", path_str(&path), "--L", "5"]));
    assert!((v["network_lipschitz"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["rho_lower_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(v["layer_norms"].as_array().unwrap().len(), 1);
    assert!(v["choose_n"].as_u64().unwrap() >= 3);

    // dimension mismatch against L
    let out = sphere_degree(&["lipschitz", "--weights", path_str(&path), "--L", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn encoder_through_zero_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.json");
    let layer = Layer { weight: DMatrix::zeros(3, 7), bias: DVector::zeros(3) };
    MlpWeights::new(7, vec![layer]).unwrap().save(&path).unwrap();
    let map_arg = format!("weights:{}", path_str(&path));
    let out = sphere_degree(&["degree", "--map", &map_arg, "--L", "3", "--n", "10"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn watch_degree_writes_one_row_per_file() {
    let dir = tempfile::tempdir().unwrap();
    selection_weights(5, 1.0).save(dir.path().join("step_1.json")).unwrap();
    selection_weights(5, -1.0).save(dir.path().join("step_2.json")).unwrap();
    std::fs::write(dir.path().join("step_3.json"), "{\"format_version\": 1, \"layers\": [{\"W\": [[NaN]]}]}").unwrap();
    let csv = dir.path().join("out").join("degrees.csv");
    std::fs::create_dir(csv.parent().unwrap()).unwrap();

    let out = sphere_degree(&[
        "watch-degree", "--weights-dir", path_str(dir.path()), "--L", "5", "--out", path_str(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["checkpoint", "degree", "n_used", "heuristic"]);
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[1][..2], ["step_1.json", "1"]);
    assert_eq!(&rows[2][..2], ["step_2.json", "-1"]);
    assert_eq!(rows[2][3], "false");
    assert_eq!(&rows[3][..2], ["step_3.json", "error"]);

    let empty = tempfile::tempdir().unwrap();
    let out = sphere_degree(&["watch-degree", "--weights-dir", path_str(empty.path()), "--L", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_data_then_lsbd() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.jsonl");
    let run = || {
        let out = sphere_degree(&["gen-data", "--L", "5", "--count", "4266", "--seed", "9", "--out", path_str(&data)]);
        assert!(out.status.success());
        std::fs::read(&data).unwrap()
    };
    let first = run();
    assert_eq!(first, run());
    let text = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4267);
    let header: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(header["L"], 5);
    assert_eq!(header["count"], 4266);
    let record: Value = serde_json::from_str(lines[1]).unwrap();
    assert_eq!(record["coeffs"].as_array().unwrap().len(), 11);

    // an encoder that recovers u exactly is perfectly equivariant
    let latents: String = lines[1..]
        .iter()
        .map(|l| {
            let r: Value = serde_json::from_str(l).unwrap();
            format!("{{\"quaternion\":{},\"z\":{}}}\n", r["quaternion"], r["u"])
        })
        .collect();
    let path = dir.path().join("latents.jsonl");
    std::fs::write(&path, latents).unwrap();
    let v = json_stdout(&sphere_degree(&["lsbd", "--latents", path_str(&path)]));
    assert!(v["score"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["n_pairs"], 4266);
    let p: Vec<f64> = serde_json::from_value(v["base_point"].clone()).unwrap();
    assert!((p[2] - 1.0).abs() < 1e-9);
}
