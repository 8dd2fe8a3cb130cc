use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gsindex(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsindex"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = gsindex(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn running_example(mode: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("t"), b"abaababaabaab").unwrap();
    ok(&["build", "-i", "t", "-o", "t.gsi", "--mode", mode], dir.path());
    dir
}

#[test]
fn running_example_queries() {
    for mode in ["verify", "fp"] {
        let dir = running_example(mode);
        let d = dir.path();
        assert_eq!(ok(&["locate", "-x", "t.gsi", "-p", "ab"], d), "1\n4\n6\n9\n12\n");
        assert_eq!(ok(&["count", "-x", "t.gsi", "-p", "ba"], d), "4\n");
        assert_eq!(ok(&["extract", "-x", "t.gsi", "--from", "8", "--len", "5"], d), "aabaa\n");
        assert_eq!(ok(&["cyclic", "-x", "t.gsi", "-p", "ba"], d), "0\n1\n");
        assert_eq!(ok(&["maximal", "-x", "t.gsi", "-p", "bb"], d), "1 1\n2 2\n");
        assert_eq!(ok(&["locate", "-x", "t.gsi", "-p", "zz"], d), "");
    }
}

#[test]
fn json_output_tags_kinds() {
    let dir = running_example("verify");
    let out = ok(&["locate", "-x", "t.gsi", "-p", "ab", "--json", "--verify-occurrences"], dir.path());
    assert_eq!(
        out,
        "[{\"pos\":1,\"kind\":\"primary\"},{\"pos\":4,\"kind\":\"primary\"},{\"pos\":6,\"kind\":\"primary\"},\
         {\"pos\":9,\"kind\":\"secondary\"},{\"pos\":12,\"kind\":\"primary\"}]\n"
    );
}

#[test]
fn pattern_file_is_binary_safe() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(d.join("t"), b"x\ny\nx\ny\xff").unwrap();
    std::fs::write(d.join("p"), b"\ny").unwrap();
    ok(&["build", "-i", "t", "-o", "t.gsi"], d);
    assert_eq!(ok(&["locate", "-x", "t.gsi", "--pattern-file", "p"], d), "2\n6\n");
    assert_eq!(gsindex(&["extract", "-x", "t.gsi", "--from", "6", "--len", "3"], d).stdout, b"\ny\xff\n");
}

#[test]
fn threaded_batch_matches_sequential() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["gen", "--base-len", "2000", "--copies", "5", "--mut-rate", "0.01", "--seed", "3", "-o", "g"], d);
    ok(&["build", "-i", "g", "-o", "g.gsi", "--mode", "fp"], d);
    let pats = ["ACG", "TTA", "GATTACA", "CC", "A"];
    let mut args = vec!["locate", "-x", "g.gsi"];
    for p in &pats {
        args.extend(["-p", p]);
    }
    let seq = ok(&args, d);
    args.extend(["--threads", "3"]);
    assert_eq!(ok(&args, d), seq);
    assert_eq!(seq.matches("# ").count(), pats.len());
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    for f in ["a", "b"] {
        ok(&["gen", "--base-len", "500", "--copies", "4", "--mut-rate", "0.02", "--seed", "9", "-o", f], d);
        ok(&["build", "-i", f, "-o", &format!("{f}.gsi"), "--mode", "fp", "--seed", "5"], d);
    }
    assert_eq!(std::fs::read(d.join("a")).unwrap(), std::fs::read(d.join("b")).unwrap());
    assert_eq!(std::fs::read(d.join("a.gsi")).unwrap(), std::fs::read(d.join("b.gsi")).unwrap());
    assert_eq!(ok(&["stats", "-x", "a.gsi"], d), ok(&["stats", "-x", "b.gsi"], d));
}

#[test]
fn stats_lists_sizes() {
    let dir = running_example("fp");
    let out = ok(&["stats", "-x", "t.gsi"], dir.path());
    for key in ["n\t13\n", "z\t6\n", "rules_s\t", "rules_sprime\t", "n_prime\t", "height_s\t", "section.GRID\t"] {
        assert!(out.contains(key), "missing {key:?} in\n{out}");
    }
}

#[test]
fn imported_grammar() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(d.join("t"), b"abab").unwrap();
    std::fs::write(d.join("g"), "root: S\nA -> 'a'\nB -> 'b'\nX -> A B\nS -> X X\n").unwrap();
    let out = gsindex(&["build", "-i", "t", "-o", "t.gsi", "--slp", "g"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(ok(&["locate", "-x", "t.gsi", "-p", "ba"], d), "2\n");
    std::fs::write(d.join("t"), b"abba").unwrap();
    assert_eq!(gsindex(&["build", "-i", "t", "-o", "u.gsi", "--slp", "g"], d).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = running_example("verify");
    let d = dir.path();
    assert_eq!(gsindex(&["locate", "-x", "missing.gsi", "-p", "a"], d).status.code(), Some(1));
    assert_eq!(gsindex(&["extract", "-x", "t.gsi", "--from", "12", "--len", "5"], d).status.code(), Some(1));
    assert_eq!(gsindex(&["locate", "-x", "t.gsi", "-p", ""], d).status.code(), Some(1));
    assert_eq!(gsindex(&["locate", "-x", "t.gsi"], d).status.code(), Some(1));
    assert_eq!(gsindex(&["locate", "-p", "a"], d).status.code(), Some(2));
    assert_eq!(gsindex(&["extract", "-x", "t.gsi", "--from", "x", "--len", "1"], d).status.code(), Some(2));
    assert_eq!(gsindex(&["frobnicate"], d).status.code(), Some(2));
    assert_eq!(gsindex(&[], d).status.code(), Some(2));
    std::fs::write(d.join("bad.gsi"), b"GSI1 not really").unwrap();
    let out = gsindex(&["stats", "-x", "bad.gsi"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("format error"));
}

#[test]
fn gen_identical_copies_add_few_phrases() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let z = |k: usize| -> usize {
        let f = format!("c{k}");
        ok(&["gen", "--base-len", "3000", "--copies", &k.to_string(), "--seed", "4", "-o", &f], d);
        ok(&["build", "-i", &f, "-o", &format!("{f}.gsi")], d);
        let stats = ok(&["stats", "-x", &format!("{f}.gsi")], d);
        stats.lines().find_map(|l| l.strip_prefix("z\t")).unwrap().parse().unwrap()
    };
    let z0 = z(0);
    for k in [1, 5, 20] {
        assert!(z(k) <= z0 + 2 * k, "z({k}) = {} vs z(0) = {z0}", z(k));
    }
}

#[test]
fn selftest_passes() {
    let dir = TempDir::new().unwrap();
    let out = ok(&["selftest", "--cases", "40"], dir.path());
    assert!(out.starts_with("ok: 40 texts"));
}
