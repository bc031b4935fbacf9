use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mixkit::imgcore::{load_image, save_image};
use mixkit::Image;
use serde_json::Value;

fn mixkit() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mixkit"));
    cmd.env_remove("MIXKIT_SEED");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn mixkit")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn write_img(path: &Path, w: u32, h: u32, salt: u32) {
    let img = Image::from_fn(w, h, 3, |x, y, c| {
        (x * 5 + y * 11 + c as u32 * 70 + salt) as u8
    })
    .unwrap();
    save_image(&img, path).unwrap();
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        write_img(&dir.path().join("a.png"), 32, 32, 0);
        write_img(&dir.path().join("b.png"), 32, 32, 100);
        Self { dir }
    }

    fn p(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn dataset(&self, n: u32) -> PathBuf {
        let mut lines = String::new();
        for i in 0..n {
            write_img(&self.p(&format!("d{i}.png")), 16, 16, i * 30);
            lines.push_str(&format!("d{i}.png\t{}\n", i % 2));
        }
        let m = self.p("data.tsv");
        fs::write(&m, lines).unwrap();
        m
    }
}

#[test]
fn mix_resizemix_is_deterministic() {
    let fx = Fixture::new();
    let mut outs = Vec::new();
    for name in ["m1.png", "m2.png"] {
        let o = run(mixkit()
            .args([
                "mix",
                "--strategy",
                "resizemix",
                "--alpha",
                "0.1",
                "--beta",
                "0.8",
                "--seed",
                "7",
            ])
            .arg(fx.p("a.png"))
            .arg(fx.p("b.png"))
            .arg("-o")
            .arg(fx.p(name)));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let rec = stdout_json(&o);
        assert_eq!(rec["pair_seed"], 7);
        assert_eq!(rec["strategy"]["obtain"], "resize_whole");
        let tau = rec["tau"].as_f64().unwrap();
        assert!((0.1..=0.8).contains(&tau));
        outs.push((rec["lambda"].clone(), fs::read(fx.p(name)).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn mix_defaults_scale_range_and_env_seed() {
    let fx = Fixture::new();
    let o = run(mixkit()
        .env("MIXKIT_SEED", "7")
        .args(["mix"])
        .arg(fx.p("a.png"))
        .arg(fx.p("b.png"))
        .arg("-o")
        .arg(fx.p("m.png")));
    assert_eq!(code(&o), 0);
    let rec = stdout_json(&o);
    assert_eq!(rec["strategy"]["alpha"], 0.1);
    assert_eq!(rec["strategy"]["beta"], 0.8);
    assert_eq!(rec["pair_seed"], 7);
}

#[test]
fn matrix_without_heatmap_exits_3() {
    let fx = Fixture::new();
    let o = run(mixkit()
        .args([
            "mix",
            "--strategy",
            "matrix",
            "--obtain",
            "cut_salient",
            "--paste",
            "random",
        ])
        .arg(fx.p("a.png"))
        .arg(fx.p("b.png"))
        .arg("-o")
        .arg(fx.p("m.png")));
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--src-heatmap"));
    assert!(!fx.p("m.png").exists());
}

#[test]
fn matrix_with_heatmaps() {
    let fx = Fixture::new();
    let hm = Image::from_fn(8, 8, 1, |x, y, _| if (x, y) == (2, 6) { 255 } else { 10 }).unwrap();
    save_image(&hm, fx.p("h.png")).unwrap();
    let base = |extra: &[&str]| {
        let mut c = mixkit();
        c.args([
            "mix",
            "--strategy",
            "matrix",
            "--obtain",
            "cut_salient",
            "--paste",
            "salient",
        ])
        .args(extra)
        .arg("--src-heatmap")
        .arg(fx.p("h.png"))
        .arg("--tgt-heatmap")
        .arg(fx.p("h.png"))
        .arg(fx.p("a.png"))
        .arg(fx.p("b.png"))
        .arg("-o")
        .arg(fx.p("m.png"));
        c
    };
    // 8x8 heatmap against 32x32 images
    assert_eq!(code(&run(&mut base(&[]))), 3);
    let o = run(&mut base(&["--resize-heatmaps"]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rec = stdout_json(&o);
    assert_eq!(rec["source_region"], rec["paste_region"]);
}

#[test]
fn mixup_blends_pixels() {
    let fx = Fixture::new();
    let o = run(mixkit()
        .args(["mix", "--strategy", "mixup", "--lambda", "0.5"])
        .arg(fx.p("a.png"))
        .arg(fx.p("b.png"))
        .arg("-o")
        .arg(fx.p("m.png")));
    assert_eq!(code(&o), 0);
    let a = load_image(fx.p("a.png")).unwrap();
    let b = load_image(fx.p("b.png")).unwrap();
    let m = load_image(fx.p("m.png")).unwrap();
    for ((&x, &y), &z) in a.data().iter().zip(b.data()).zip(m.data()) {
        assert_eq!(z, ((f64::from(x) + f64::from(y)) / 2.0).round() as u8);
    }
    assert_eq!(stdout_json(&o)["strategy"]["kind"], "mixup");
}

#[test]
fn flag_errors_exit_1() {
    let fx = Fixture::new();
    for args in [
        vec!["mix", "--bogus"],
        vec!["mix", "--strategy", "cutmix", "--obtain", "cut_random"],
        vec!["mix", "--strategy", "mixup"],
        vec![
            "mix",
            "--strategy",
            "resizemix",
            "--alpha",
            "0.9",
            "--beta",
            "0.2",
        ],
        vec![
            "mix",
            "--strategy",
            "matrix",
            "--obtain",
            "resize_whole",
            "--paste",
            "corresponding",
        ],
        vec!["stats", "--dims", "12"],
        vec!["mix", "--strategy", "cutmix", "--resize-filter", "area"],
        vec!["mix", "--resize-filter", "lanczos"],
    ] {
        let o = run(mixkit()
            .args(&args)
            .arg(fx.p("a.png"))
            .arg(fx.p("b.png"))
            .arg("-o")
            .arg(fx.p("m.png")));
        assert_eq!(
            code(&o),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    assert_eq!(code(&run(mixkit().arg("--help"))), 0);
}

#[test]
fn io_and_dimension_errors() {
    let fx = Fixture::new();
    let o = run(mixkit()
        .arg("mix")
        .arg(fx.p("missing.png"))
        .arg(fx.p("b.png"))
        .arg("-o")
        .arg(fx.p("m.png")));
    assert_eq!(code(&o), 2);

    write_img(&fx.p("small.png"), 16, 32, 0);
    let o = run(mixkit()
        .arg("mix")
        .arg(fx.p("a.png"))
        .arg(fx.p("small.png"))
        .arg("-o")
        .arg(fx.p("m.png")));
    assert_eq!(code(&o), 3);
}

#[test]
fn batch_zero_outputs() {
    let fx = Fixture::new();
    let m = fx.dataset(3);
    let o = run(mixkit()
        .args(["batch", "--n", "0", "--manifest"])
        .arg(&m)
        .arg("--out-dir")
        .arg(fx.p("out")));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(fx.p("out/manifest.jsonl")).unwrap(), "");
}

#[test]
fn batch_worker_count_independent() {
    let fx = Fixture::new();
    let m = fx.dataset(5);
    for (workers, out) in [("1", "o1"), ("8", "o8")] {
        let o = run(mixkit()
            .args([
                "batch",
                "--n",
                "12",
                "--seed",
                "3",
                "--workers",
                workers,
                "--manifest",
            ])
            .arg(&m)
            .arg("--out-dir")
            .arg(fx.p(out)));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let names = |d: &str| {
        let mut v: Vec<_> = fs::read_dir(fx.p(d))
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        v.sort();
        v
    };
    assert_eq!(names("o1"), names("o8"));
    assert_eq!(names("o1").len(), 13);
    for n in names("o1") {
        assert_eq!(
            fs::read(fx.p("o1").join(&n)).unwrap(),
            fs::read(fx.p("o8").join(&n)).unwrap()
        );
    }
}

#[test]
fn batch_empty_dataset_exits_3() {
    let fx = Fixture::new();
    fs::write(fx.p("empty.tsv"), "").unwrap();
    let o = run(mixkit()
        .args(["batch", "--n", "2", "--manifest"])
        .arg(fx.p("empty.tsv"))
        .arg("--out-dir")
        .arg(fx.p("out")));
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty dataset"));
}

#[test]
fn batch_malformed_manifest_exits_1() {
    let fx = Fixture::new();
    fs::write(fx.p("bad.tsv"), "a.png\t0\na.png\t1\tx\ty\n").unwrap();
    let o = run(mixkit()
        .args(["batch", "--n", "2", "--manifest"])
        .arg(fx.p("bad.tsv"))
        .arg("--out-dir")
        .arg(fx.p("out")));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));
}

#[test]
fn stats_reports_resizemix_moment() {
    let o = run(mixkit().args([
        "stats",
        "--strategy",
        "resizemix",
        "--n",
        "100000",
        "--dims",
        "224x224",
    ]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    let mean = r["lambda"]["mean"].as_f64().unwrap();
    assert!((mean - 0.24333).abs() <= 0.01, "{mean}");
    assert!((r["analytic_mean_tau_squared"].as_f64().unwrap() - 0.243333).abs() < 1e-5);
}

#[test]
fn halfres_resize_resize() {
    let fx = Fixture::new();
    let m = fx.dataset(2);
    let o = run(mixkit()
        .args([
            "halfres",
            "--train-mode",
            "resize",
            "--val-mode",
            "resize",
            "--manifest",
        ])
        .arg(&m)
        .arg("--out-dir")
        .arg(fx.p("hr")));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for split in ["train", "val"] {
        for k in 0..2 {
            let img = load_image(fx.p(&format!("hr/{split}/{k:06}.png"))).unwrap();
            assert_eq!(img.dims(), (8, 8));
        }
    }
    let manifest = fs::read_to_string(fx.p("hr/manifest.jsonl")).unwrap();
    assert_eq!(manifest.lines().count(), 4);
}

#[test]
fn grid_layouts_and_errors() {
    let fx = Fixture::new();
    let m = fx.dataset(4);
    let o = run(mixkit()
        .args(["batch", "--n", "4", "--strategy", "cutmix", "--manifest"])
        .arg(&m)
        .arg("--out-dir")
        .arg(fx.p("out")));
    assert_eq!(code(&o), 0);
    let manifest = fx.p("out/manifest.jsonl");

    let o = run(mixkit()
        .args(["grid", "--rows", "2", "--cols", "2", "--manifest"])
        .arg(&manifest)
        .arg("-o")
        .arg(fx.p("sheet.png")));
    assert_eq!(code(&o), 0);
    assert_eq!(load_image(fx.p("sheet.png")).unwrap().dims(), (34, 34));

    let o = run(mixkit()
        .args(["grid", "--rows", "1", "--cols", "1", "--manifest"])
        .arg(&manifest)
        .arg("-o")
        .arg(fx.p("one.png")));
    assert_eq!(code(&o), 0);
    assert_eq!(
        load_image(fx.p("one.png")).unwrap(),
        load_image(fx.p("out/mix_000000.png")).unwrap()
    );

    let o = run(mixkit()
        .args(["grid", "--rows", "3", "--cols", "2", "--manifest"])
        .arg(&manifest)
        .arg("-o")
        .arg(fx.p("big.png")));
    assert_eq!(code(&o), 3);

    write_img(&fx.p("out/mix_000001.png"), 10, 16, 0);
    let o = run(mixkit()
        .args(["grid", "--rows", "2", "--cols", "2", "--manifest"])
        .arg(&manifest)
        .arg("-o")
        .arg(fx.p("odd.png")));
    assert_eq!(code(&o), 3);
    assert!(!fx.p("odd.png").exists());
}

#[test]
fn resize_filter_changes_patch_only() {
    let fx = Fixture::new();
    let mut recs = Vec::new();
    for filter in ["area", "bilinear"] {
        let out = fx.p(&format!("{filter}.png"));
        let o = run(mixkit()
            .args([
                "mix",
                "--alpha",
                "0.3",
                "--beta",
                "0.3",
                "--seed",
                "4",
                "--resize-filter",
                filter,
            ])
            .arg(fx.p("a.png"))
            .arg(fx.p("b.png"))
            .arg("-o")
            .arg(&out));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let rec = stdout_json(&o);
        assert_eq!(rec["strategy"]["resize_filter"], filter);
        recs.push((rec, load_image(&out).unwrap()));
    }
    assert_eq!(recs[0].0["paste_region"], recs[1].0["paste_region"]);
    assert_ne!(recs[0].1, recs[1].1);
}
