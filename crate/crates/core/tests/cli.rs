use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use rigid_genera::cli::{parse_document, render_document, InputDocument};
use rigid_genera::{canonical_form, Mode, Sign, WeightMatrix};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rigid-genera"))
}

fn run(args: &[&str]) -> (i32, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = bin().args(args).output().expect("binary runs");
    let mut text = String::from_utf8(stdout).unwrap();
    text.push_str(&String::from_utf8(stderr).unwrap());
    (status.code().expect("exit code"), text)
}

fn doc(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_quasilinear_is_rigid() {
    let dir = tempfile::tempdir().unwrap();
    let p = doc(dir.path(), "ql.txt", "3 2\n+: -1 -2\n+: 1 -1\n+: 2 1\n");
    let (code, out) = run(&["check", &p, "--mode", "T"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("Rigid, constant = x^2 - x*y + y^2"), "{out}");
    assert!(out.contains("agrees"));

    let (code, out) = run(&["check", &p, "--mode", "L"]);
    assert_eq!(code, 0);
    assert!(out.contains("Rigid, constant = 1"), "{out}");
}

#[test]
fn check_not_rigid_prints_witness() {
    let dir = tempfile::tempdir().unwrap();
    let p = doc(dir.path(), "nr.txt", "2 1\n+: 1\n-: 2\n");
    let (code, out) = run(&["check", &p]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("NotRigid"));
    assert!(
        out.contains("witness: z = 2, x = 1, y = 1: value 4/3 != expected 0"),
        "{out}"
    );
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = doc(dir.path(), "bad.txt", "2 1\n+: 1\n?: 2\n");
    let (code, out) = run(&["check", &p]);
    assert_eq!(code, 2);
    assert!(out.contains("line 3"), "{out}");
    let (code, _) = run(&["check", "/definitely/not/here"]);
    assert_eq!(code, 2);
    let (code, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn json_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = doc(
        dir.path(),
        "l1.json",
        r#"{"matrix": [{"weights": [5], "sign": "+"}, {"weights": [-5], "sign": "+"}]}"#,
    );
    let (code, out) = run(&["classify", &p, "--json"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "L1");
}

#[test]
fn classify_chern_screen() {
    let dir = tempfile::tempdir().unwrap();
    let s3 = doc(dir.path(), "s3.txt", "2 3\n+: 1 1 -2\n+: -1 -1 2\n");
    let (code, out) = run(&["chern", &s3, "--partition", "0,0,1"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "2 (integer)");
    let (_, out) = run(&["classify", &s3]);
    assert_eq!(out.trim(), "S3");
    let (_, out) = run(&["chern", &s3]);
    assert!(out.contains("c3 = 2 (integer)"), "{out}");

    let single = doc(dir.path(), "one.txt", "1 2\n+: 1 2\n");
    let (code, out) = run(&["screen", &single]);
    assert_eq!(code, 0);
    assert!(out.contains("<c0, [M]> = 1/2"), "{out}");

    let z = doc(dir.path(), "z.txt", "2 2\n+: 1 2\n-: 1 2\n");
    let (_, out) = run(&["screen", &z]);
    assert!(
        out.contains("boundary candidate: all Chern numbers vanish"),
        "{out}"
    );

    let three = doc(dir.path(), "three.txt", "quasilinear: 0 1 2\n");
    let (code, out) = run(&["classify", &three]);
    assert_eq!(code, 2, "{out}");
    let (code, _) = run(&["chern", &s3, "--partition", "1,0"]);
    assert_eq!(code, 2);
}

#[test]
fn search_m2_n3_lists_only_z_and_s3() {
    let (code, out) = run(&[
        "search", "--m", "2", "--n", "3", "--bound", "4", "--mode", "T",
    ]);
    assert_eq!(code, 0, "{out}");
    let finds: Vec<&str> = out.lines().filter(|l| l.contains("constant =")).collect();
    assert!(!finds.is_empty());
    assert!(
        finds
            .iter()
            .all(|l| l.ends_with("[Z]") || l.ends_with("[S3]")),
        "{out}"
    );
    assert!(finds.iter().any(|l| l.ends_with("[S3]")));
    assert!(!out.contains("!!!"));
}

#[test]
fn search_problem24_and_theorem_m3() {
    let (code, out) = run(&["search", "--problem24", "--n", "3", "--bound", "6"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("0 solutions"), "{out}");

    let (code, out) = run(&[
        "search", "--m", "3", "--n", "2", "--bound", "8", "--mode", "L",
    ]);
    assert_eq!(code, 0);
    let finds: Vec<&str> = out.lines().filter(|l| l.contains("constant =")).collect();
    assert_eq!(finds.len(), 32);
    assert!(finds.iter().all(|l| l.contains("[quasilinear")), "{out}");
}

#[test]
fn report_file_is_deterministic_across_shards() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ndjson");
    let b = dir.path().join("b.ndjson");
    let base = [
        "search", "--m", "2", "--n", "2", "--bound", "3", "--mode", "T", "--out",
    ];
    let (ca, _) = run(&[&base[..], &[a.to_str().unwrap(), "--shards", "1"]].concat());
    let (cb, _) = run(&[&base[..], &[b.to_str().unwrap(), "--shards", "3"]].concat());
    assert_eq!((ca, cb), (0, 0));
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let text = String::from_utf8(ra).unwrap();
    // only the Z family exists for n = 2: one record per 2-multiset of +-1..=3
    assert_eq!(text.lines().count(), 21);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("matrix").is_some() && v.get("constant").is_some() && v.get("tag").is_some());
    }
}

#[test]
fn budget_exceeded_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("partial.ndjson");
    let (code, out) = run(&[
        "search",
        "--m",
        "2",
        "--n",
        "2",
        "--bound",
        "3",
        "--budget",
        "2",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{out}");
    assert!(out.contains("budget exceeded"));
    assert!(p.exists());
}

#[test]
fn bad_flags_exit_2() {
    let (code, _) = run(&["search", "--m", "0", "--n", "1", "--bound", "3"]);
    assert_eq!(code, 2);
    let (code, _) = run(&["search", "--n", "1", "--bound", "3"]);
    assert_eq!(code, 2);
    let (code, _) = run(&[
        "search", "--m", "2", "--n", "1", "--bound", "3", "--mode", "Q",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn quasilinear_subcommand() {
    let (code, out) = run(&["quasilinear", "0", "2", "5"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("3 2\n+: -2 -5\n+: 2 -3\n+: 5 3\n"), "{out}");
    let (code, out) = run(&["quasilinear", "-1", "3", "-1"]);
    assert_eq!(code, 2, "{out}");
}

fn arb_matrix() -> impl Strategy<Value = WeightMatrix> {
    (1usize..5, 1usize..4).prop_flat_map(|(m, n)| {
        prop::collection::vec(
            (
                prop::collection::vec((-9i64..=9).prop_filter("nonzero", |v| *v != 0), n),
                any::<bool>(),
            ),
            m,
        )
        .prop_map(|rows| {
            WeightMatrix::from_rows(
                rows.into_iter()
                    .map(|(w, s)| (w, if s { Sign::Plus } else { Sign::Minus })),
            )
            .unwrap()
        })
    })
}

proptest! {
    #[test]
    fn rendered_documents_reparse(w in arb_matrix()) {
        let InputDocument::Matrix(back) = parse_document(&render_document(&w)).unwrap() else {
            panic!("matrix document expected");
        };
        prop_assert_eq!(&back, &w);
        for mode in [Mode::T, Mode::L] {
            prop_assert_eq!(canonical_form(&back, mode), canonical_form(&w, mode));
        }
    }
}
