use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use localdense::io::{load_edge_list, ResultDocument};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_localdense"))
        .args(args)
        .output()
        .unwrap()
}

fn fixture(dir: &Path, name: &str, body: &str) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn docs(out: &Output) -> Vec<ResultDocument> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| ResultDocument::from_json_line(l).unwrap())
        .collect()
}

fn json_lines(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

const STAR: &str = "center r1\ncenter r2\ncenter r3\ncenter r4\n";

#[test]
fn exact_on_k23() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path(), "k23.tsv", "a x\na y\na z\nb x\nb y\nb z\n");
    let out = bin(&["exact", &f]);
    assert!(out.status.success());
    let d = &docs(&out)[0];
    assert!((d.density - 6f64.sqrt()).abs() < 1e-12);
    assert_eq!((d.s_size, d.t_size), (2, 3));
}

#[test]
fn local_on_star() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path(), "star.tsv", STAR);
    let out = bin(&["local", &f, "--seed", "center", "--target-size", "4", "--trace"]);
    assert!(out.status.success());
    let d = &docs(&out)[0];
    assert_eq!(d.density, 2.0);
    assert_eq!(d.s, vec!["center"]);
    let fa = d.found_at.as_ref().unwrap();
    assert_eq!((fa.t, fa.i, fa.j), (0, 0, 0));
    let steps = &d.trace.as_ref().unwrap()[0]["steps"];
    assert_eq!(steps[0]["rounded_norm"], 2.0);
    assert_eq!(steps[0]["x_levels"][0]["vertices"][0], "center");
}

#[test]
fn stats_on_single_edge() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path(), "one.tsv", "u v 1\n");
    let out = bin(&["stats", &f]);
    assert!(out.status.success());
    let s = &json_lines(&out)[0];
    assert_eq!(s["n"], 2);
    assert_eq!(s["m"], 1.0);
    assert_eq!(s["max_degree"], 1.0);
}

#[test]
fn directed_flag_applies_reduction() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path(), "arcs.tsv", "x y\ny x\n");
    let s = &json_lines(&bin(&["stats", "--directed", &f]))[0];
    assert_eq!(s["n"], 4);
    assert_eq!(s["m"], 2.0);
    let s = &json_lines(&bin(&["stats", &f]))[0];
    assert_eq!(s["n"], 4);
}

#[test]
fn documents_are_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.tsv").to_string_lossy().into_owned();
    let gen = bin(&[
        "generate", "--n-left", "60", "--n-right", "50", "--noise-edges", "150", "--block-left",
        "4", "--block-right", "5", "--rng-seed", "7", "--out", &f,
    ]);
    assert!(gen.status.success());
    let g = load_edge_list(&f, None).unwrap();
    let mut all = Vec::new();
    all.extend(docs(&bin(&["global", &f])));
    all.extend(docs(&bin(&[
        "scan", &f, "--seeds", "all", "--target-size", "5", "--top", "20",
    ])));
    assert!(all.len() > 2);
    for d in &all {
        let again = d.recompute_density(&g).unwrap();
        assert!((again - d.density).abs() <= 1e-9, "{d:?}");
        assert!((d.edge_weight / ((d.s_size * d.t_size) as f64).sqrt() - d.density).abs() <= 1e-9);
        let line = d.to_json_line();
        assert_eq!(&ResultDocument::from_json_line(&line).unwrap(), d);
    }
}

#[test]
fn generated_edge_list_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.tsv").to_string_lossy().into_owned();
    let prefix = dir.path().join("planted").to_string_lossy().into_owned();
    let args = [
        "generate", "--n-left", "20", "--n-right", "20", "--noise-edges", "30", "--block-left",
        "4", "--block-right", "4",
    ];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", &f, "--planted-out", &prefix]);
    assert!(bin(&with_out).status.success());
    let text = std::fs::read_to_string(&f).unwrap();
    let g = load_edge_list(&f, None).unwrap();
    let sorted = |t: &str| {
        let mut v: Vec<String> = t.lines().map(str::to_owned).collect();
        v.sort();
        v
    };
    assert_eq!(sorted(&localdense::io::write_edge_list(&g)), sorted(&text));
    let s = std::fs::read_to_string(format!("{prefix}.S")).unwrap();
    assert_eq!(s.lines().count(), 4);

    // planted K_{4,4}: d(S,T) = 4
    let ps = format!("{prefix}.S");
    let pt = format!("{prefix}.T");
    let out = bin(&["verify", &f, "--planted", &ps, &pt]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let lines = json_lines(&out);
    let summary = lines.last().unwrap();
    assert_eq!(summary["failed"], 0);
    assert!(lines
        .iter()
        .any(|l| l["property"] == "planted.local_guarantee" && l["status"] == "pass"));
}

#[test]
fn verify_fails_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path(), "star.tsv", STAR);
    let s = fixture(dir.path(), "s.txt", "center\n");
    let t = fixture(dir.path(), "t.txt", "r1\nr2\n");
    // d(S,T) = √2 is far below 2θ, so the good-set precondition fails
    let out = bin(&["verify", &f, "--planted", &s, &t, "--theta", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let summary = json_lines(&out).pop().unwrap();
    assert_eq!(summary["failed"], 3);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = fixture(dir.path(), "bad.tsv", "a x 1\nb y -1\n");
    let out = bin(&["stats", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["code"], 2);
    assert!(err["error"].as_str().unwrap().contains("line 2, column 5"));

    assert_eq!(bin(&["stats", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["local"]).status.code(), Some(1));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));

    let k44 = fixture(
        dir.path(),
        "wide.tsv",
        &(0..25).map(|i| format!("l{i} r{i}\n")).collect::<String>(),
    );
    assert_eq!(bin(&["exact", &k44, "--side-cap", "10"]).status.code(), Some(2));
}

#[test]
fn verify_help_lists_properties() {
    let out = bin(&["verify", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for (name, _) in localdense::verify::PROPERTIES {
        assert!(text.contains(name), "{name} missing from help");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path(), "star.tsv", STAR);
    let o = dir.path().join("res.jsonl");
    let out = bin(&[
        "local", &f, "--seed", "center", "--target-size", "4", "--out", o.to_str().unwrap(),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let line = std::fs::read_to_string(&o).unwrap();
    assert_eq!(ResultDocument::from_json_line(line.trim()).unwrap().density, 2.0);
}
