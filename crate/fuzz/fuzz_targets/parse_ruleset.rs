#![no_main]

use libfuzzer_sys::fuzz_target;
use structlint::dsl::parse_ruleset;

fuzz_target!(|data: &str| {
    if let Ok(rs) = parse_ruleset(data) {
        let printed = rs.to_string();
        let back = parse_ruleset(&printed).expect("printed ruleset re-parses");
        assert_eq!(back, rs);
    }
});
