#![no_main]

use libfuzzer_sys::fuzz_target;
use structlint::facts::{read_fact_file, write_fact_file};

fuzz_target!(|data: &str| {
    if let Ok(fb) = read_fact_file(data) {
        let text = write_fact_file(&fb);
        let again = read_fact_file(&text).expect("written file re-reads");
        assert_eq!(write_fact_file(&again), text);
    }
});
