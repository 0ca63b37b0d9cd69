#![no_main]

use libfuzzer_sys::fuzz_target;
use structlint::facts::{read_fact_file, write_fact_file};

fuzz_target!(|data: &str| {
    if let Ok(p) = structlint::cpp::extract_project(&[("f.cpp", data)]) {
        // Whatever the extractor accepts must serialize to a file that reads back.
        let text = write_fact_file(&p.facts);
        let back = read_fact_file(&text).expect("extracted facts re-read");
        assert_eq!(write_fact_file(&back), text);
    }
});
