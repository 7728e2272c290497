#![no_main]

use libfuzzer_sys::fuzz_target;
use multibump::profile::cache::parse_profile_meta;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(meta) = parse_profile_meta(text) {
            let again = parse_profile_meta(&meta.to_text()).unwrap();
            // NaN fields compare unequal, so compare the text forms
            assert_eq!(again.to_text(), meta.to_text());
        }
    }
});
