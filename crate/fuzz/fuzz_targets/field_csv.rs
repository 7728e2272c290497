#![no_main]

use libfuzzer_sys::fuzz_target;
use multibump::pde::build_strip_grid;
use multibump::pde::export::{field_from_table, parse_field_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = parse_field_csv(text) {
            let grid = build_strip_grid(0.5, 0.125).unwrap();
            let _ = field_from_table(&grid, &table);
        }
    }
});
