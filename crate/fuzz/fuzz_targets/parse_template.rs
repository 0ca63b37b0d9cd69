#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let _ = structlint::dsl::format_message(data, &[("a".into(), "x".into())]);
});
