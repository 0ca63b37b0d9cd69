use std::fs;
use std::path::Path;

use structlint::cpp::extract_project;
use structlint::facts::{read_fact_file, write_fact_file};

fn fixture_names() -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "cpp").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

fn check(name: &str) -> Result<(), String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let src = fs::read_to_string(dir.join(format!("{name}.cpp"))).unwrap();
    let expected = fs::read_to_string(dir.join(format!("{name}.facts"))).unwrap();
    let project = extract_project(&[(format!("{name}.cpp"), src)]).map_err(|e| e.to_string())?;
    let got = write_fact_file(&project.facts);
    if got != expected {
        return Err(format!("--- expected\n{expected}--- got\n{got}"));
    }
    // the golden file itself must be stable under read and write
    let again = write_fact_file(&read_fact_file(&expected).map_err(|e| e.to_string())?);
    if again != expected {
        return Err("golden file is not write-stable".into());
    }
    Ok(())
}

#[test]
fn at_least_ten_fixtures() {
    assert!(fixture_names().len() >= 10);
}

macro_rules! golden {
    ($($t:ident => $n:literal),* $(,)?) => {$(
        #[test]
        fn $t() {
            if let Err(e) = check($n) {
                panic!("{}: {e}", $n);
            }
        }
    )*};
}

golden! {
    diamond => "01_diamond",
    virtual_diamond => "02_virtual_diamond",
    struct_defaults => "03_struct_defaults",
    overrides => "04_overrides",
    pure_virtual => "05_pure_virtual",
    destructors => "06_destructors",
    access_sections => "07_access_sections",
    signatures => "08_signatures",
    skipped_members => "09_skipped_members",
    operators => "10_operators",
    forward_and_comments => "11_forward_and_comments",
    base_access => "12_base_access",
}
