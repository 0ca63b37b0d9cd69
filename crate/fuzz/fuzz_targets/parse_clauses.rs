#![no_main]

use libfuzzer_sys::fuzz_target;
use structlint::datalog::{parse_clauses, Program};

fuzz_target!(|data: &str| {
    if let Ok(clauses) = parse_clauses(data) {
        if let Ok(p) = Program::new(clauses) {
            let _ = structlint::datalog::stratify(&p);
        }
    }
});
