use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use osteotex::cnn::{parse_network_spec, shipped, WeightStore};
use osteotex::image::save_pgm;
use osteotex::{FeatureTable, GrayImage};
use tempfile::TempDir;

fn osteotex(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osteotex"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[track_caller]
fn assert_ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}\n{}", o.status.code(), stderr(o));
}

/// Smooth periodic pattern for label 0, hashed noise for label 1.
fn image(label: u8, seed: u64, size: usize) -> GrayImage {
    let mut data = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let v = if label == 0 {
                let phase = seed as f64 * 0.37;
                128.0 + 90.0 * ((x as f64 / 4.0 + phase).sin() * (y as f64 / 5.0).cos())
            } else {
                let mut h = (x as u64 * 73_856_093) ^ (y as u64 * 19_349_663) ^ (seed * 83_492_791);
                h ^= h >> 13;
                h = h.wrapping_mul(0x5bd1_e995);
                h ^= h >> 15;
                (h % 256) as f64
            };
            data.push(v.clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(size, size, data).unwrap()
}

/// Writes `n` images (labels alternate) and a manifest; returns the
/// manifest rows as (id, label).
fn dataset(dir: &Path, n: usize, labeled: bool) -> Vec<(String, u8)> {
    fs::create_dir_all(dir.join("img")).unwrap();
    let mut manifest = String::from("id,filename,label\n");
    let mut rows = Vec::new();
    for i in 0..n {
        let label = (i % 2) as u8;
        let id = format!("x{i:03}");
        save_pgm(&image(label, i as u64, 40), dir.join("img").join(format!("{id}.pgm"))).unwrap();
        let text = match (labeled, label) {
            (false, _) => "?",
            (true, 0) => "control",
            (true, _) => "osteoporosis",
        };
        manifest.push_str(&format!("{id},{id}.pgm,{text}\n"));
        rows.push((id, label));
    }
    fs::write(dir.join("manifest.csv"), manifest).unwrap();
    rows
}

/// A numeric table where the first `informative` features shift with the
/// label.
fn synthetic_table(n: usize, d: usize, informative: usize, labeled: bool, prefix: &str) -> FeatureTable {
    let ids: Vec<String> = (0..n).map(|i| format!("{prefix}{i:03}")).collect();
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let mut values = Vec::with_capacity(n * d);
    for i in 0..n {
        for j in 0..d {
            let noise = (((i * 31 + j * 17) * 2_654_435_761) % 1000) as f64 / 1000.0;
            let shift = if j < informative { 2.0 * labels[i] as f64 } else { 0.0 };
            values.push(noise + shift);
        }
    }
    let names = (0..d).map(|j| format!("f{j:02}")).collect();
    FeatureTable::new(ids, names, values, labeled.then_some(labels)).unwrap()
}

/// Random vgg-f weights, written once per test binary.
fn vgg_f_weights() -> &'static Path {
    static FILE: OnceLock<(TempDir, PathBuf)> = OnceLock::new();
    &FILE
        .get_or_init(|| {
            let dir = TempDir::new().unwrap();
            let path = dir.path().join("vgg-f.otwt");
            let spec = parse_network_spec(shipped::VGG_F).unwrap();
            WeightStore::random(&spec, 7).save(&path).unwrap();
            (dir, path)
        })
        .1
}

fn csv_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn extract_traditional_three_images() {
    let dir = TempDir::new().unwrap();
    let rows = dataset(dir.path(), 3, true);
    let o = osteotex(&["extract", "--images", "img", "--manifest", "manifest.csv", "--out", "out"], dir.path());
    assert_ok(&o);
    let lines = csv_lines(&dir.path().join("out/traditional.csv"));
    assert_eq!(lines.len(), 4);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header.len(), 2 + 44 + 257 + 20);
    assert_eq!(&header[..2], ["id", "label"]);
    for (line, (id, label)) in lines[1..].iter().zip(&rows) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), header.len());
        assert_eq!(cells[0], id);
        assert_eq!(cells[1], label.to_string());
    }
}

#[test]
fn extract_deep_vgg_f_gives_4096_columns() {
    let dir = TempDir::new().unwrap();
    dataset(dir.path(), 1, true);
    let w = vgg_f_weights().to_str().unwrap();
    let o = osteotex(
        &["extract", "--approach", "deep", "--images", "img", "--manifest", "manifest.csv",
          "--net-spec", "vgg-f", "--weights", w, "--out", "out"],
        dir.path(),
    );
    assert_ok(&o);
    let t = FeatureTable::load(dir.path().join("out/deep.csv")).unwrap();
    assert_eq!((t.n_samples(), t.n_features()), (1, 4096));
    assert_eq!(t.names()[0], "fc7_0000");
    assert!(!dir.path().join("out/traditional.csv").exists());
}

#[test]
fn empty_manifest_gives_empty_table() {
    let dir = TempDir::new().unwrap();
    fs::create_dir(dir.path().join("img")).unwrap();
    fs::write(dir.path().join("manifest.csv"), "id,filename,label\n").unwrap();
    let o = osteotex(&["extract", "--images", "img", "--manifest", "manifest.csv", "--out", "out"], dir.path());
    assert_ok(&o);
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
    let lines = csv_lines(&dir.path().join("out/traditional.csv"));
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].split(',').count(), 323);
    let t = FeatureTable::load(dir.path().join("out/traditional.csv")).unwrap();
    assert_eq!(t.n_samples(), 0);
}

#[test]
fn unreadable_image_reported_and_run_continues() {
    let dir = TempDir::new().unwrap();
    dataset(dir.path(), 4, true);
    fs::write(dir.path().join("img/x001.pgm"), b"P5\n40 40\n255\nshort").unwrap();
    fs::remove_file(dir.path().join("img/x002.pgm")).unwrap();
    let o = osteotex(&["extract", "--images", "img", "--manifest", "manifest.csv", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("x001") && err.contains("x002"), "{err}");
    let t = FeatureTable::load(dir.path().join("out/traditional.csv")).unwrap();
    assert_eq!(t.ids(), ["x000", "x003"]);
}

#[test]
fn cv_reports_are_byte_identical_on_rerun() {
    let dir = TempDir::new().unwrap();
    synthetic_table(60, 30, 4, true, "s").save(dir.path().join("t.csv")).unwrap();
    let args = |out: &'static str| {
        ["cv", "--trad-table", "t.csv", "--selector", "relieff", "--k-features", "5",
         "--classifier", "rf", "--folds", "5", "--seed", "11", "--out", out]
    };
    let a = osteotex(&args("a"), dir.path());
    let b = osteotex(&args("b"), dir.path());
    assert_ok(&a);
    assert_ok(&b);
    for f in ["report.json", "report.txt", "roc.csv"] {
        let x = fs::read(dir.path().join("a").join(f)).unwrap();
        let y = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 11);
    assert_eq!(json["folds"], 5);
    assert_eq!(json["n_samples"], 60);
    assert_eq!(json["predictions"].as_array().unwrap().len(), 60);
    assert!(stdout(&a).contains("Accuracy"));
    let roc = csv_lines(&dir.path().join("a/roc.csv"));
    assert_eq!(roc[0], "fpr,tpr");
    assert_eq!(roc[1], "0,0");
}

#[test]
fn k_larger_than_d_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    synthetic_table(20, 6, 2, true, "s").save(dir.path().join("t.csv")).unwrap();
    let o = osteotex(&["cv", "--trad-table", "t.csv", "--k-features", "7", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k_features = 7 exceeds the 6 features"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn validation_lists_every_problem_before_exit() {
    let dir = TempDir::new().unwrap();
    let o = osteotex(
        &["cv", "--approach", "merged", "--folds", "1", "--k-features", "0",
          "--weights", "missing.otwt", "--params", "{\"trees\": 0}"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for needle in ["--trad-table", "--deep-table", "--net-spec", "missing.otwt", "folds", "k_features", "trees"] {
        assert!(err.contains(needle), "missing {needle:?} in\n{err}");
    }
}

#[test]
fn config_file_paths_are_relative_and_flags_override() {
    let dir = TempDir::new().unwrap();
    fs::create_dir(dir.path().join("exp")).unwrap();
    synthetic_table(30, 8, 3, true, "s").save(dir.path().join("exp/t.csv")).unwrap();
    fs::write(
        dir.path().join("exp/config.json"),
        r#"{"approach": "traditional", "traditional_table": "t.csv", "selector": "ttest",
            "k_features": 3, "classifier": "nb", "folds": 3, "seed": 5, "out": "results"}"#,
    )
    .unwrap();
    let o = osteotex(&["cv", "--config", "exp/config.json", "--seed", "9"], dir.path());
    assert_ok(&o);
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("exp/results/report.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 9);
    assert_eq!(json["folds"], 3);
    assert_eq!(json["config"]["classifier"], "nb");

    fs::write(dir.path().join("bad.json"), r#"{"sed": 3}"#).unwrap();
    let o = osteotex(&["cv", "--config", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sed"), "{}", stderr(&o));
}

#[test]
fn merged_cv_counts_features_per_source() {
    let dir = TempDir::new().unwrap();
    synthetic_table(40, 50, 3, true, "s").save(dir.path().join("deep.csv")).unwrap();
    synthetic_table(40, 20, 3, true, "s").save(dir.path().join("trad.csv")).unwrap();
    let o = osteotex(
        &["cv", "--approach", "merged", "--deep-table", "deep.csv", "--trad-table", "trad.csv",
          "--k-features", "5", "--classifier", "svm", "--folds", "4", "--out", "out"],
        dir.path(),
    );
    assert_ok(&o);
    let text = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(text.contains("10 (5 deep + 5 trad)"), "{text}");
    assert!(text.contains("merged"), "{text}");
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/report.json")).unwrap()).unwrap();
    let selected = json["per_fold"][0]["selected"].as_array().unwrap();
    assert_eq!(selected.len(), 10);
    assert!(selected[..5].iter().all(|s| s.as_str().unwrap().starts_with("deep:")));
    assert!(selected[5..].iter().all(|s| s.as_str().unwrap().starts_with("trad:")));
}

#[test]
fn deep_rforest_su_15_runs_end_to_end_from_images() {
    let dir = TempDir::new().unwrap();
    dataset(dir.path(), 20, true);
    let w = vgg_f_weights().to_str().unwrap().to_string();
    fs::write(
        dir.path().join("config.json"),
        format!(
            r#"{{"approach": "deep", "images": "img", "manifest": "manifest.csv",
                "net_spec": "vgg-f", "weights": {w:?}, "selector": "su", "k_features": 15,
                "classifier": "rf", "folds": 5, "out": "out"}}"#
        ),
    )
    .unwrap();
    let o = osteotex(&["cv", "--config", "config.json"], dir.path());
    assert_ok(&o);
    let text = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    for needle in ["deep (vgg-f)", "rforest", "su", "Number of features      15", "Samples                 20"] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
}

#[test]
fn train_predict_nn1_round_trip_is_perfect() {
    let dir = TempDir::new().unwrap();
    let rows = dataset(dir.path(), 16, true);
    let o = osteotex(
        &["train", "--images", "img", "--manifest", "manifest.csv", "--classifier", "nn1",
          "--selector", "su", "--k-features", "12", "--out", "out"],
        dir.path(),
    );
    assert_ok(&o);
    let o = osteotex(
        &["predict", "--model", "out/model.otmd", "--images", "img", "--manifest", "manifest.csv", "--out", "out"],
        dir.path(),
    );
    assert_ok(&o);
    let lines = csv_lines(&dir.path().join("out/predictions.csv"));
    assert_eq!(lines[0], "id,label,score");
    assert_eq!(lines.len(), rows.len() + 1);
    for (line, (id, label)) in lines[1..].iter().zip(&rows) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], id);
        assert_eq!(cells[1], label.to_string(), "{line}");
    }
    let json: serde_json::Value = serde_json::from_slice(
        &fs::read(dir.path().join("out/prediction_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["accuracy"], 1.0);
}

#[test]
fn blind_predictions_scored_against_withheld_labels() {
    let dir = TempDir::new().unwrap();
    synthetic_table(116, 25, 2, true, "t").save(dir.path().join("train.csv")).unwrap();
    let blind = synthetic_table(58, 25, 2, false, "b");
    blind.save(dir.path().join("blind.csv")).unwrap();
    let o = osteotex(
        &["train", "--trad-table", "train.csv", "--selector", "ttest", "--k-features", "10",
          "--classifier", "dtree", "--out", "out"],
        dir.path(),
    );
    assert_ok(&o);
    let o = osteotex(&["predict", "--model", "out/model.otmd", "--trad-table", "blind.csv", "--out", "out"], dir.path());
    assert_ok(&o);
    let lines = csv_lines(&dir.path().join("out/predictions.csv"));
    assert_eq!(lines.len(), 59);
    assert!(!dir.path().join("out/prediction_report.json").exists());

    // withheld labels: alternate, as generated
    let mut truth = String::from("id,label\n");
    for (i, id) in blind.ids().iter().enumerate() {
        truth.push_str(&format!("{id},{}\n", i % 2));
    }
    fs::write(dir.path().join("truth.csv"), truth).unwrap();
    let o = osteotex(
        &["predict", "--model", "out/model.otmd", "--trad-table", "blind.csv", "--truth", "truth.csv", "--out", "out"],
        dir.path(),
    );
    assert_ok(&o);
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (i, line) in csv_lines(&dir.path().join("out/predictions.csv"))[1..].iter().enumerate() {
        let predicted: u8 = line.split(',').nth(1).unwrap().parse().unwrap();
        match (predicted, (i % 2) as u8) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 0) => tn += 1,
            _ => fn_ += 1,
        }
    }
    let json: serde_json::Value = serde_json::from_slice(
        &fs::read(dir.path().join("out/prediction_report.json")).unwrap(),
    )
    .unwrap();
    let c = &json["confusion"];
    assert_eq!((c["tp"].as_u64(), c["fp"].as_u64(), c["tn"].as_u64(), c["fn"].as_u64()),
               (Some(tp), Some(fp), Some(tn), Some(fn_)));
    assert_eq!(json["accuracy"].as_f64().unwrap(), (tp + tn) as f64 / 58.0);
    assert!(fs::read_to_string(dir.path().join("out/prediction_report.txt")).unwrap()
        .contains(&format!("TP-{tp}, FP-{fp}, TN-{tn}, FN-{fn_}")));
}

#[test]
fn predict_rejects_a_table_missing_model_columns() {
    let dir = TempDir::new().unwrap();
    synthetic_table(30, 12, 2, true, "t").save(dir.path().join("train.csv")).unwrap();
    synthetic_table(10, 4, 2, false, "b").save(dir.path().join("narrow.csv")).unwrap();
    assert_ok(&osteotex(&["train", "--trad-table", "train.csv", "--k-features", "8", "--out", "out"], dir.path()));
    let o = osteotex(&["predict", "--model", "out/model.otmd", "--trad-table", "narrow.csv", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not in table"), "{}", stderr(&o));
}

/// Two-tailed normal p by Simpson integration of the density.
fn p_oracle(z: f64) -> f64 {
    let n = 20_000;
    let h = z.abs() / n as f64;
    let f = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = f(0.0) + f(z.abs());
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * s * h / 3.0
}

fn ztest(args: [&str; 4]) -> (f64, f64) {
    let dir = TempDir::new().unwrap();
    let o = osteotex(&["ztest", "--acc1", args[0], "--n1", args[1], "--acc2", args[2], "--n2", args[3]], dir.path());
    assert_ok(&o);
    let out = stdout(&o);
    let mut lines = out.lines();
    let z = lines.next().unwrap().strip_prefix("z = ").unwrap().parse().unwrap();
    let p = lines.next().unwrap().strip_prefix("p = ").unwrap().parse().unwrap();
    (z, p)
}

#[test]
fn ztest_command() {
    assert_eq!(ztest(["0.5", "100", "0.5", "100"]), (0.0, 1.0));
    let a = (26.0f64 / 58.0).to_string();
    assert_eq!(ztest([&a, "58", &a, "58"]).0, 0.0);

    let (z, p) = ztest(["0.793103", "116", "0.603448", "116"]);
    let pooled: f64 = (0.793103 + 0.603448) / 2.0;
    let z_expected = (0.793103 - 0.603448) / (pooled * (1.0 - pooled) * (2.0 / 116.0)).sqrt();
    assert!((z - z_expected).abs() < 1e-4, "{z} vs {z_expected}");
    assert!((z - 3.15).abs() < 0.01);
    assert!((p - p_oracle(z_expected)).abs() < 1e-6, "{p}");

    let dir = TempDir::new().unwrap();
    let o = osteotex(&["ztest", "--acc1", "1.5", "--n1", "10", "--acc2", "0.5", "--n2", "10"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_command_lays_out_columns() {
    let dir = TempDir::new().unwrap();
    synthetic_table(40, 10, 3, true, "s").save(dir.path().join("t.csv")).unwrap();
    for (out, clf) in [("a", "nb"), ("b", "dtree")] {
        assert_ok(&osteotex(
            &["cv", "--trad-table", "t.csv", "--k-features", "4", "--classifier", clf, "--folds", "4", "--out", out],
            dir.path(),
        ));
    }
    let single = osteotex(&["report", "a/report.json"], dir.path());
    assert_ok(&single);
    assert_eq!(stdout(&single), fs::read_to_string(dir.path().join("a/report.txt")).unwrap());

    let both = osteotex(&["report", "a/report.json", "b/report.json"], dir.path());
    assert_ok(&both);
    let text = stdout(&both);
    let classifier = text.lines().find(|l| l.starts_with("Classifier used")).unwrap();
    assert!(classifier.contains("nb") && classifier.contains("dtree"), "{text}");
    assert_eq!(text.lines().count(), 11);

    let o = osteotex(&["report", "t.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}
