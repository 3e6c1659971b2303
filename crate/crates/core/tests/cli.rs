use std::path::{Path, PathBuf};
use std::process::Command;

use polling_core::plan::load_plan;

fn plans_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../plans")
}

fn polling(args: &[&str], plan: &Path, out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_polling"))
        .arg("--plan")
        .arg(plan)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn shipped_plans_parse() {
    let mut n = 0;
    for entry in std::fs::read_dir(plans_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "plan") {
            load_plan(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn classify_writes_verdict_and_honours_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = polling(&["--seed", "99", "--threads", "2"], &plans_dir().join("null_recurrent.plan"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("RECURRENT, null recurrent"), "{stdout}");
    let verdict: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["master_seed"], 99);
    let k = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
    assert!(k.starts_with("# master_seed=99\ns,k_hat,stderr\n"));
    let resolved = std::fs::read_to_string(dir.path().join("plan.resolved.txt")).unwrap();
    assert!(resolved.contains("seed 99") && resolved.contains("max_replicas 64000"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let plan = plans_dir().join("coupling.plan");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(polling(&["--threads", "1"], &plan, a.path()).status.success());
    assert!(polling(&["--threads", "4"], &plan, b.path()).status.success());
    let read = |d: &Path| std::fs::read(d.join("couple.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn bad_plans_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("bad.plan");
    std::fs::write(&plan, "system\n  d 1\n  lambda 1 1\n  speed 3\n").unwrap();
    let out = polling(&[], &plan, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    // mu = 0.5 < lambda violates the stability margin
    std::fs::write(
        &plan,
        "system\n  d 1\n  lambda 1 1\nstation 0\n  atom 1 0.5 0\nstation 1\n  atom 1 3 0\naction classify\n",
    )
    .unwrap();
    assert_eq!(polling(&[], &plan, &dir.path().join("out")).status.code(), Some(2));

    let missing = polling(&[], &dir.path().join("none.plan"), &dir.path().join("out"));
    assert_eq!(missing.status.code(), Some(2));
}
