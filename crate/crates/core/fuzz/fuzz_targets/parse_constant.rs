#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(c) = dfcert::parse::parse_constant(s) {
            let _ = c.exact();
            let _ = c.enclose(64);
        }
    }
});
