use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

const DIAMOND: &str = "class a {};\nclass b : public a {};\nclass c : public a {};\nclass d : public b, public c {};\n";

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn structlint(dir: &Path, args: &[&str]) -> Out {
    let o = Command::new(env!("CARGO_BIN_EXE_structlint"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn structlint");
    Out {
        code: o.status.code().expect("exit code"),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn workspace(files: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

#[test]
fn violations_exit_one_with_text_report() {
    let d = workspace(&[("diamond.cpp", DIAMOND)]);
    let o = structlint(d.path(), &["check", "diamond.cpp"]);
    assert_eq!(o.code, 1);
    let heads: Vec<&str> = o.stdout.lines().filter(|l| !l.starts_with(' ')).collect();
    assert_eq!(heads.len(), 2, "{}", o.stdout);
    assert!(heads.iter().all(|l| l.starts_with("diamond.cpp:1:7: violation[hicpp_3_3_15]: ")));
    assert!(o.stdout.contains("    where a = a\n"));
    assert!(o.stderr.is_empty());
}

#[test]
fn clean_input_exits_zero_silently() {
    let d = workspace(&[("ok.cpp", "class a {};\nclass b : virtual public a {};\nclass c : virtual public a {};\nclass d : public b, public c {};\n")]);
    let o = structlint(d.path(), &["check", "ok.cpp"]);
    assert_eq!((o.code, o.stdout.as_str()), (0, ""));
}

#[test]
fn empty_fact_file_is_clean() {
    let d = workspace(&[("e.facts", "% structlint facts v1\n")]);
    let o = structlint(d.path(), &["check", "--facts", "e.facts", "--format", "json"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn json_is_deterministic_and_well_formed() {
    let d = workspace(&[("diamond.cpp", DIAMOND)]);
    let a = structlint(d.path(), &["check", "--format", "json", "diamond.cpp"]);
    let b = structlint(d.path(), &["check", "--format", "json", "diamond.cpp"]);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&a.stdout).unwrap();
    let vs = v["violations"].as_array().unwrap();
    assert_eq!(vs.len(), 2);
    assert_eq!(vs[0]["rule"], "hicpp_3_3_15");
    assert_eq!(vs[0]["witness"]["a"], "a");
    assert_eq!(vs[0]["witness"]["d"], "d");
}

#[test]
fn symmetric_dedup_halves_the_diamond() {
    let d = workspace(&[("diamond.cpp", DIAMOND)]);
    let o = structlint(d.path(), &["check", "--dedup-symmetric", "diamond.cpp"]);
    assert_eq!(o.code, 1);
    assert_eq!(o.stdout.lines().filter(|l| !l.starts_with(' ')).count(), 1);
}

#[test]
fn parse_error_is_located() {
    let d = workspace(&[("bad.cpp", "class a {};\nclass b : public a {\n")]);
    let o = structlint(d.path(), &["check", "bad.cpp"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("bad.cpp:2:"), "{}", o.stderr);
    assert!(o.stderr.contains(": error: "));
    assert!(o.stdout.is_empty());
}

#[test]
fn missing_file_is_an_error() {
    let d = workspace(&[]);
    let o = structlint(d.path(), &["check", "nowhere.cpp"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("nowhere.cpp:0:0: error: cannot read file"), "{}", o.stderr);
}

#[test]
fn rules_syntax_error_is_located() {
    let d = workspace(&[
        ("bad.rules", "rule x: forall a: klass where class(a) report \"m\"\n"),
        ("ok.cpp", "class a {};\n"),
    ]);
    let o = structlint(d.path(), &["check", "--rules", "bad.rules", "ok.cpp"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("bad.rules:1:19: error:"), "{}", o.stderr);
}

#[test]
fn malformed_fact_file_is_located() {
    let d = workspace(&[("g.facts", "% structlint facts v1\nentity(class,\"a\",\"x.cpp\",1,7).\nbogus\n")]);
    let o = structlint(d.path(), &["check", "--facts", "g.facts"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("g.facts:3:"), "{}", o.stderr);
}

#[test]
fn unknown_rule_ids_are_rejected() {
    let d = workspace(&[("diamond.cpp", DIAMOND)]);
    for flag in ["--enable", "--disable"] {
        let o = structlint(d.path(), &["check", flag, "nope", "diamond.cpp"]);
        assert_eq!(o.code, 2, "{flag}");
        assert!(o.stderr.contains("unknown rule id `nope`"), "{}", o.stderr);
    }
}

#[test]
fn disable_and_enable_select_rules() {
    let d = workspace(&[("diamond.cpp", DIAMOND)]);
    let o = structlint(d.path(), &["check", "--disable", "hicpp_3_3_15", "diamond.cpp"]);
    assert_eq!((o.code, o.stdout.as_str()), (0, ""));
    let o = structlint(d.path(), &["check", "--enable", "no_public_data_member", "diamond.cpp"]);
    assert_eq!(o.code, 0);
    let o = structlint(d.path(), &["check", "--enable", "hicpp_3_3_15", "diamond.cpp"]);
    assert_eq!(o.code, 1);
}

#[test]
fn user_rules_replace_the_builtin() {
    let rules = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/rules/hicpp.rules")).unwrap();
    let d = workspace(&[("diamond.cpp", DIAMOND), ("hicpp.rules", &rules)]);
    let builtin = structlint(d.path(), &["check", "diamond.cpp"]);
    let clash = structlint(d.path(), &["check", "--rules", "hicpp.rules", "diamond.cpp"]);
    assert_eq!(clash.code, 2, "duplicate rule id must be rejected");
    let dsl = structlint(
        d.path(),
        &["check", "--rules", "hicpp.rules", "--disable", "hicpp_3_3_15", "diamond.cpp"],
    );
    assert_eq!((dsl.code, &dsl.stdout), (builtin.code, &builtin.stdout));
}

#[test]
fn facts_query_lists_derived_tuples() {
    let d = workspace(&[("diamond.cpp", DIAMOND)]);
    let o = structlint(d.path(), &["facts", "--query", "base_of", "diamond.cpp"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout.lines().count(), 5);
    let o = structlint(d.path(), &["facts", "--query", "nope", "diamond.cpp"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("unknown predicate `nope`"));
}

#[test]
fn extract_writes_a_readable_fact_file() {
    let d = workspace(&[("diamond.cpp", DIAMOND)]);
    let o = structlint(d.path(), &["extract", "-o", "out.facts", "diamond.cpp"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let facts = fs::read_to_string(d.path().join("out.facts")).unwrap();
    assert!(facts.starts_with("% structlint facts v1\n"));
    let to_stdout = structlint(d.path(), &["extract", "diamond.cpp"]);
    assert_eq!(to_stdout.stdout, facts);
}

#[test]
fn compile_rules_dumps_ir() {
    let d = workspace(&[]);
    let o = structlint(d.path(), &["compile-rules"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("base_of(X,Y) :- direct_base_of(X,Y)."), "{}", o.stdout);
}

#[test]
fn missing_input_is_a_usage_error() {
    let d = workspace(&[]);
    assert_eq!(structlint(d.path(), &["check"]).code, 2);
    assert_eq!(structlint(d.path(), &["frobnicate"]).code, 2);
    assert_eq!(structlint(d.path(), &["--help"]).code, 0);
}
